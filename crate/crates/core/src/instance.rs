//! Data matrices, row partitioning and synthetic instances.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{axpy, check_finite, dot, norm};
use crate::objective::{reference_spectrum, CovarianceShard, Spectrum};
use crate::{Error, Result};

/// Dense row-major `m × d` data matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RowMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RowMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        crate::linalg::check_len(rows * cols, data.len())?;
        check_finite(&data)?;
        Ok(RowMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Subtracts the column means in place.
    pub fn center(&mut self) {
        if self.rows == 0 {
            return;
        }
        let mut mean = alloc::vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols) {
            axpy(1.0 / self.rows as f64, row, &mut mean);
        }
        for row in self.data.chunks_exact_mut(self.cols) {
            axpy(-1.0, &mean, row);
        }
    }

    /// `MᵀM`.
    pub fn covariance(&self) -> Result<CovarianceShard> {
        CovarianceShard::from_rows(&self.data, self.cols)
    }
}

/// Block sizes for `m` rows over `n` nodes: the first `m mod n` blocks get
/// one extra row.
pub fn block_sizes(m: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| m / n + usize::from(i < m % n)).collect()
}

/// Splits `m` into `n_nodes` contiguous row blocks and forms each `MᵢᵀMᵢ`.
///
/// With `shuffle_seed`, rows are permuted before splitting.
pub fn partition_rows(
    m: &RowMatrix,
    n_nodes: usize,
    shuffle_seed: Option<u64>,
) -> Result<Vec<CovarianceShard>> {
    if n_nodes == 0 {
        return Err(Error::invalid("n_nodes", "must be at least 1"));
    }
    if m.rows < n_nodes {
        return Err(Error::invalid(
            "n_nodes",
            alloc::format!("{} rows cannot feed {} nodes", m.rows, n_nodes),
        ));
    }
    let mut order: Vec<usize> = (0..m.rows).collect();
    if let Some(seed) = shuffle_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut start = 0;
    block_sizes(m.rows, n_nodes)
        .into_iter()
        .map(|size| {
            let mut block = Vec::with_capacity(size * m.cols);
            for &r in &order[start..start + size] {
                block.extend_from_slice(m.row(r));
            }
            start += size;
            CovarianceShard::from_rows(&block, m.cols)
        })
        .collect()
}

/// Target spectrum and size of a synthetic data set.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub dim: usize,
    /// Population eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub rows: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Eigenvalues `λ₁`, `λ₂ = (1 − gap_ratio)·λ₁`, then a linear decay from
    /// `λ₂` down to `λ₂/d`.
    pub fn with_gap(dim: usize, lambda1: f64, gap_ratio: f64, rows: usize, seed: u64) -> Self {
        let lambda2 = lambda1 * (1.0 - gap_ratio);
        let mut eigenvalues = alloc::vec![lambda1];
        for j in 1..dim {
            let frac = (j - 1) as f64 / (dim.max(3) - 2) as f64;
            eigenvalues.push(lambda2 * (1.0 - frac * (1.0 - 1.0 / dim as f64)));
        }
        SyntheticSpec {
            dim,
            eigenvalues,
            rows,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::DimensionTooSmall(self.dim));
        }
        crate::linalg::check_len(self.dim, self.eigenvalues.len())?;
        if self.eigenvalues.iter().any(|&l| !(l.is_finite() && l >= 0.0)) {
            return Err(Error::invalid("eigenvalues", "must be finite and nonnegative"));
        }
        if self.eigenvalues.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::invalid("eigenvalues", "must be sorted descending"));
        }
        let gap = self.eigenvalues[0] - self.eigenvalues[1];
        if !(gap > 0.0) {
            return Err(Error::NonPositiveGap(gap));
        }
        if self.rows == 0 {
            return Err(Error::invalid("rows", "must be at least 1"));
        }
        Ok(())
    }
}

/// Rows and the exact spectrum of their realized covariance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub rows: RowMatrix,
    /// Population eigenbasis used to draw the rows.
    pub basis: Vec<Vec<f64>>,
    pub spectrum: Spectrum,
    /// Redraws needed before the realized gap was positive.
    pub redraws: usize,
}

/// Orthonormal basis from Gram–Schmidt on Gaussian vectors.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d);
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        // Two passes keep the basis orthogonal to working precision.
        for _ in 0..2 {
            for b in &basis {
                let c = dot(&v, b);
                axpy(-c, b, &mut v);
            }
        }
        let n = norm(&v);
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

const MAX_REDRAWS: usize = 32;

/// Draws `rows` Gaussian rows with covariance `QΛQᵀ/rows`, so that `E[MᵀM]`
/// is `QΛQᵀ`. The returned spectrum is that of the realized `MᵀM`.
pub fn synth_instance(spec: &SyntheticSpec) -> Result<Instance> {
    spec.validate()?;
    let d = spec.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let basis = random_orthogonal(d, &mut rng);
    let scales: Vec<f64> = spec
        .eigenvalues
        .iter()
        .map(|l| libm::sqrt(l / spec.rows as f64))
        .collect();
    let mut last_gap = 0.0;
    for redraws in 0..MAX_REDRAWS {
        let mut data = alloc::vec![0.0; spec.rows * d];
        for row in data.chunks_exact_mut(d) {
            for (q, s) in basis.iter().zip(&scales) {
                let z: f64 = rng.sample(StandardNormal);
                axpy(s * z, q, row);
            }
        }
        let rows = RowMatrix::new(spec.rows, d, data)?;
        let spectrum = reference_spectrum(&rows.covariance()?)?;
        if spectrum.gap > 0.0 {
            return Ok(Instance {
                rows,
                basis,
                spectrum,
                redraws,
            });
        }
        last_gap = spectrum.gap;
    }
    Err(Error::NonPositiveGap(last_gap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::assemble_global;
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn block_size_example() {
        assert_eq!(block_sizes(10, 3), vec![4, 3, 3]);
        assert_eq!(block_sizes(9, 3), vec![3, 3, 3]);
    }

    #[test]
    fn partition_examples() {
        let m = RowMatrix::new(10, 2, (0..20).map(f64::from).collect()).unwrap();
        let shards = partition_rows(&m, 3, None).unwrap();
        let sizes: Vec<_> = shards.iter().map(CovarianceShard::row_count).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        // First block holds rows 0..4 in file order.
        let first = CovarianceShard::from_rows(&m.as_slice()[..8], 2).unwrap();
        assert_eq!(shards[0], first);

        let one = partition_rows(&m, 1, None).unwrap();
        assert_eq!(one, vec![m.covariance().unwrap()]);

        assert!(partition_rows(&m, 11, None).is_err());
        assert!(partition_rows(&m, 0, None).is_err());
    }

    #[test]
    fn centering_zeroes_column_means() {
        let mut m = RowMatrix::new(3, 2, vec![1.0, 10.0, 2.0, 20.0, 3.0, 30.0]).unwrap();
        m.center();
        assert_eq!(m.as_slice(), &[-1.0, -10.0, 0.0, 0.0, 1.0, 10.0]);
    }

    #[test]
    fn synthetic_is_deterministic() {
        let spec = SyntheticSpec::with_gap(5, 2.0, 0.5, 40, 17);
        let a = synth_instance(&spec).unwrap();
        let b = synth_instance(&spec).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.spectrum, b.spectrum);
    }

    #[test]
    fn synthetic_concentrates_at_large_m() {
        let spec = SyntheticSpec {
            dim: 2,
            eigenvalues: vec![3.0, 1.0],
            rows: 10_000,
            seed: 5,
        };
        let inst = synth_instance(&spec).unwrap();
        let l = &inst.spectrum.eigenvalues;
        assert!((l[0] / l[1] / 3.0 - 1.0).abs() < 0.1);

        let spec = SyntheticSpec {
            dim: 2,
            eigenvalues: vec![2.0, 1.0],
            rows: 10_000,
            seed: 6,
        };
        let inst = synth_instance(&spec).unwrap();
        let c = dot(inst.spectrum.leading_vector.coords(), &inst.basis[0]).abs();
        assert!(libm::acos(c.min(1.0)) < 0.1);
    }

    #[test]
    fn spec_validation() {
        let mut spec = SyntheticSpec::with_gap(4, 1.0, 0.3, 10, 0);
        assert!(spec.validate().is_ok());
        assert_eq!(spec.eigenvalues.len(), 4);
        spec.eigenvalues[1] = 1.0;
        assert!(matches!(synth_instance(&spec), Err(Error::NonPositiveGap(_))));
    }

    #[test]
    fn random_orthogonal_is_orthonormal() {
        let q = random_orthogonal(7, &mut ChaCha8Rng::seed_from_u64(1));
        for i in 0..7 {
            for j in 0..7 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot(&q[i], &q[j]) - want).abs() < 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn partition_reassembles(seed in any::<u64>(), m in 4usize..30, d in 2usize..5, n in 1usize..4, shuffle in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<f64> = (0..m * d).map(|_| rand::Rng::sample(&mut rng, StandardNormal)).collect();
            let mat = RowMatrix::new(m, d, data).unwrap();
            let shards = partition_rows(&mat, n, shuffle.then_some(seed)).unwrap();
            let sizes: Vec<_> = shards.iter().map(CovarianceShard::row_count).collect();
            prop_assert_eq!(sizes.iter().sum::<usize>(), m);
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let whole = mat.covariance().unwrap();
            let sum = assemble_global(&shards).unwrap();
            let scale = whole.matrix().max_abs();
            for (a, b) in sum.matrix().as_row_major().iter().zip(whole.matrix().as_row_major()) {
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }
    }
}
