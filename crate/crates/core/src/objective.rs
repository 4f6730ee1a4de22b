//! The cost `f(x) = −xᵀAx` on the sphere, split across covariance shards.

use alloc::vec::Vec;

use crate::geometry::{distance, log_map, project_to_tangent, TangentVector, UnitVector};
use crate::linalg::{check_len, dot, jacobi_eigen, scale, SymMatrix};
use crate::{Error, Result};

/// One node's local covariance `Aᵢ = MᵢᵀMᵢ`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceShard {
    matrix: SymMatrix,
    row_count: usize,
    local_smoothness: f64,
}

impl CovarianceShard {
    /// Validates positive semi-definiteness and records `γᵢ = 2λ_max(Aᵢ)`.
    pub fn from_matrix(matrix: SymMatrix, row_count: usize) -> Result<Self> {
        if matrix.dim() < 2 {
            return Err(Error::DimensionTooSmall(matrix.dim()));
        }
        let eig = jacobi_eigen(&matrix);
        let top = eig.values[0];
        let bottom = *eig.values.last().unwrap_or(&0.0);
        if bottom < -1e-10 * matrix.max_abs().max(f64::MIN_POSITIVE) {
            return Err(Error::NotPositiveSemidefinite(bottom));
        }
        Ok(CovarianceShard {
            matrix,
            row_count,
            local_smoothness: 2.0 * top.max(0.0),
        })
    }

    /// `MᵀM` for row-major `rows` with `cols` columns.
    pub fn from_rows(rows: &[f64], cols: usize) -> Result<Self> {
        if cols == 0 || !rows.len().is_multiple_of(cols) {
            return Err(Error::invalid("rows", "length is not a multiple of the column count"));
        }
        crate::linalg::check_finite(rows)?;
        Self::from_matrix(SymMatrix::gram(rows, cols), rows.len() / cols)
    }

    #[inline]
    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    #[inline]
    pub fn row_count(&self) -> usize {
        self.row_count
    }

    /// `γᵢ = 2λ_max(Aᵢ)`.
    #[inline]
    pub fn local_smoothness(&self) -> f64 {
        self.local_smoothness
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Ground-truth eigen-information of a covariance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub leading_vector: UnitVector,
    /// `λ₁ − λ₂`.
    pub gap: f64,
    /// `2λ₁`.
    pub smoothness: f64,
}

impl Spectrum {
    #[inline]
    pub fn lambda1(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Optimal cost `f* = −λ₁`.
    #[inline]
    pub fn optimal_cost(&self) -> f64 {
        -self.eigenvalues[0]
    }

    /// Whichever of `±v₁` lies in the same hemisphere as `x`.
    pub fn minimizer_near(&self, x: &UnitVector) -> UnitVector {
        if x.dot(&self.leading_vector) >= 0.0 {
            self.leading_vector.clone()
        } else {
            self.leading_vector.neg()
        }
    }

    pub fn require_gap(&self) -> Result<()> {
        if self.gap > 0.0 {
            Ok(())
        } else {
            Err(Error::NonPositiveGap(self.gap))
        }
    }
}

/// `Σ Aᵢ` with smoothness recomputed for the sum.
pub fn assemble_global(shards: &[CovarianceShard]) -> Result<CovarianceShard> {
    let first = shards.first().ok_or(Error::EmptyShards)?;
    let mut total = first.matrix.clone();
    let mut rows = first.row_count;
    for s in &shards[1..] {
        total.add_assign(&s.matrix)?;
        rows += s.row_count;
    }
    CovarianceShard::from_matrix(total, rows)
}

/// `−xᵀAx`.
pub fn cost(a: &CovarianceShard, x: &UnitVector) -> f64 {
    -a.matrix.quad_form(x.coords())
}

/// Ambient gradient `−2Ax`.
pub fn euclidean_grad(a: &CovarianceShard, x: &[f64]) -> Vec<f64> {
    scale(&a.matrix.mul_vec(x), -2.0)
}

/// `P_x(−2Ax)`.
pub fn riemannian_grad(a: &CovarianceShard, x: &UnitVector) -> TangentVector {
    // Lengths agree by construction, so projection cannot fail.
    project_to_tangent(x, &euclidean_grad(a, x.coords())).expect("dimension checked by shard")
}

/// Checked variant of [`riemannian_grad`].
pub fn try_riemannian_grad(a: &CovarianceShard, x: &UnitVector) -> Result<TangentVector> {
    check_len(a.dim(), x.dim())?;
    Ok(riemannian_grad(a, x))
}

/// Full eigendecomposition through the Jacobi solver.
pub fn reference_spectrum(a: &CovarianceShard) -> Result<Spectrum> {
    let eig = jacobi_eigen(&a.matrix);
    let leading_vector = UnitVector::new(eig.vectors[0].clone())?;
    let gap = eig.values[0] - eig.values[1];
    Ok(Spectrum {
        smoothness: 2.0 * eig.values[0],
        gap,
        leading_vector,
        eigenvalues: eig.values,
        eigenvectors: eig.vectors,
    })
}

/// `n · maxᵢ γᵢ`, an upper bound on the global smoothness computable from
/// local information only.
pub fn over_approx_smoothness(shards: &[CovarianceShard]) -> Result<f64> {
    if shards.is_empty() {
        return Err(Error::EmptyShards);
    }
    let max = shards
        .iter()
        .map(CovarianceShard::local_smoothness)
        .fold(0.0, f64::max);
    Ok(shards.len() as f64 * max)
}

/// Signed slacks of the four convexity-type inequalities at one point. Each
/// is nonnegative when the inequality holds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexitySlacks {
    /// `⟨x, x*⟩` with `x*` sign-aligned to `x`.
    pub a: f64,
    /// `⟨grad f, −log_x x*⟩ − 2a(f − f*)`
    pub weak_quasi_convexity: f64,
    /// `(f − f*) − (δ/4)dist²`
    pub quadratic_growth: f64,
    /// `‖grad f‖² − δa²(f − f*)`
    pub gradient_dominance: f64,
    /// `(1/a)⟨grad f, −log_x x*⟩ − (δ/4)dist² − (f − f*)`
    pub strong_weak_convexity: f64,
}

impl ConvexitySlacks {
    pub fn min(&self) -> f64 {
        self.weak_quasi_convexity
            .min(self.quadratic_growth)
            .min(self.gradient_dominance)
            .min(self.strong_weak_convexity)
    }
}

pub fn check_convexity_properties(a: &CovarianceShard, x: &UnitVector) -> Result<ConvexitySlacks> {
    let spectrum = reference_spectrum(a)?;
    convexity_slacks(a, &spectrum, x)
}

/// As [`check_convexity_properties`] with a precomputed spectrum.
pub fn convexity_slacks(
    a: &CovarianceShard,
    spectrum: &Spectrum,
    x: &UnitVector,
) -> Result<ConvexitySlacks> {
    spectrum.require_gap()?;
    check_len(a.dim(), x.dim())?;
    let x_star = spectrum.minimizer_near(x);
    let ball = x.dot(&x_star);
    let delta = spectrum.gap;
    let excess = cost(a, x) - spectrum.optimal_cost();
    let grad = riemannian_grad(a, x);
    let toward = log_map(x, &x_star)?;
    let pairing = -dot(grad.coords(), toward.coords());
    let dist = distance(x, &x_star);
    let grad_sq = dot(grad.coords(), grad.coords());

    Ok(ConvexitySlacks {
        a: ball,
        weak_quasi_convexity: pairing - 2.0 * ball * excess,
        quadratic_growth: excess - delta / 4.0 * dist * dist,
        gradient_dominance: grad_sq - delta * ball * ball * excess,
        strong_weak_convexity: pairing / ball - delta / 4.0 * dist * dist - excess,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{exp_map, parallel_transport, sample_uniform_with};
    use crate::linalg::norm;
    use alloc::vec;
    use core::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn diag(values: &[f64]) -> CovarianceShard {
        CovarianceShard::from_matrix(SymMatrix::from_diagonal(values), 1).unwrap()
    }

    fn random_shard<R: Rng>(rng: &mut R, d: usize, m: usize) -> CovarianceShard {
        let rows: Vec<f64> = (0..d * m).map(|_| rng.sample(StandardNormal)).collect();
        CovarianceShard::from_rows(&rows, d).unwrap()
    }

    fn diag_point() -> UnitVector {
        UnitVector::new(vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn cost_examples() {
        let a = diag(&[2.0, 1.0]);
        assert_eq!(cost(&a, &UnitVector::basis(2, 0).unwrap()), -2.0);
        assert_eq!(cost(&a, &UnitVector::basis(2, 1).unwrap()), -1.0);
        assert!((cost(&a, &diag_point()) + 1.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let a = diag(&[2.0, 1.0]);
        assert_eq!(riemannian_grad(&a, &UnitVector::basis(2, 0).unwrap()).norm(), 0.0);
        let g = riemannian_grad(&a, &diag_point());
        assert!((g.coords()[0] + FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((g.coords()[1] - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn gradient_vanishes_at_eigenvectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_shard(&mut rng, 6, 20);
        let s = reference_spectrum(&a).unwrap();
        for v in &s.eigenvectors {
            let x = UnitVector::new(v.clone()).unwrap();
            assert!(riemannian_grad(&a, &x).norm() <= 1e-10 * s.lambda1());
        }
    }

    #[test]
    fn assemble_examples() {
        let one = diag(&[2.0, 1.0]);
        assert_eq!(assemble_global(core::slice::from_ref(&one)).unwrap(), one);
        let sum = assemble_global(&[diag(&[1.0, 0.0]), diag(&[0.0, 1.0])]).unwrap();
        assert_eq!(sum.matrix(), &SymMatrix::identity(2));
        assert_eq!(sum.row_count(), 2);
        assert_eq!(sum.local_smoothness(), 2.0);
        assert_eq!(assemble_global(&[]), Err(Error::EmptyShards));
        assert!(matches!(
            assemble_global(&[diag(&[1.0, 0.0]), diag(&[1.0, 0.0, 0.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn global_cost_and_gradient_are_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let shards: Vec<_> = (0..4).map(|_| random_shard(&mut rng, 5, 7)).collect();
        let global = assemble_global(&shards).unwrap();
        for _ in 0..100 {
            let x = sample_uniform_with(5, &mut rng).unwrap();
            let total: f64 = shards.iter().map(|s| cost(s, &x)).sum();
            let f = cost(&global, &x);
            assert!((f - total).abs() <= 1e-10 * f.abs());
            let mut g = vec![0.0; 5];
            for s in &shards {
                crate::linalg::axpy(1.0, riemannian_grad(s, &x).coords(), &mut g);
            }
            let gg = riemannian_grad(&global, &x);
            let err = crate::linalg::euclidean_distance(&g, gg.coords());
            assert!(err <= 1e-10 * gg.norm().max(1.0));
        }
    }

    #[test]
    fn spectrum_examples() {
        let s = reference_spectrum(&diag(&[3.0, 2.0, 1.0])).unwrap();
        assert_eq!(s.eigenvalues, vec![3.0, 2.0, 1.0]);
        assert_eq!(s.leading_vector.coords()[0].abs(), 1.0);
        assert_eq!(s.gap, 1.0);
        assert_eq!(s.smoothness, 6.0);

        let s = reference_spectrum(&diag(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(s.gap, 0.0);
        assert_eq!(s.require_gap(), Err(Error::NonPositiveGap(0.0)));
    }

    #[test]
    fn spectrum_is_similarity_invariant() {
        // Q = Householder reflection I − 2uuᵀ, so Q e₁ = e₁ − 2u₁u.
        let u = UnitVector::new(vec![0.3, -0.5, 0.8]).unwrap();
        let u = u.coords();
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|j| (0..3).map(|i| f64::from(u8::from(i == j)) - 2.0 * u[i] * u[j]).collect())
            .collect();
        let a = CovarianceShard::from_matrix(SymMatrix::from_eigen(&[3.0, 2.0, 1.0], &cols), 1).unwrap();
        let s = reference_spectrum(&a).unwrap();
        for (got, want) in s.eigenvalues.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((dot(s.leading_vector.coords(), &cols[0]).abs() - 1.0).abs() < 1e-12);
        let av = a.matrix().mul_vec(s.leading_vector.coords());
        let res = crate::linalg::euclidean_distance(&av, &scale(s.leading_vector.coords(), 3.0));
        assert!(res <= 1e-8 * 3.0);
    }

    #[test]
    fn shard_rejects_indefinite_matrix() {
        let m = SymMatrix::from_diagonal(&[1.0, -0.5]);
        assert!(matches!(
            CovarianceShard::from_matrix(m, 1),
            Err(Error::NotPositiveSemidefinite(_))
        ));
    }

    #[test]
    fn smoothness_examples() {
        let a = diag(&[2.0, 1.0]);
        assert_eq!(over_approx_smoothness(core::slice::from_ref(&a)).unwrap(), 4.0);
        assert_eq!(reference_spectrum(&a).unwrap().smoothness, 4.0);
        let two = over_approx_smoothness(&[a.clone(), a.clone()]).unwrap();
        let global = reference_spectrum(&assemble_global(&[a.clone(), a]).unwrap()).unwrap();
        assert_eq!(two, 8.0);
        assert!(two >= global.smoothness);
        assert_eq!(over_approx_smoothness(&[]), Err(Error::EmptyShards));

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let shards: Vec<_> = (0..3).map(|_| random_shard(&mut rng, 4, 5)).collect();
            let s = reference_spectrum(&assemble_global(&shards).unwrap()).unwrap();
            assert!(over_approx_smoothness(&shards).unwrap() >= s.smoothness * (1.0 - 1e-12));
        }
    }

    #[test]
    fn convexity_examples() {
        let a = diag(&[2.0, 1.0]);
        let at_opt = check_convexity_properties(&a, &UnitVector::basis(2, 0).unwrap()).unwrap();
        assert_eq!(at_opt.min(), 0.0);

        let s = check_convexity_properties(&a, &diag_point()).unwrap();
        assert!((s.a - FRAC_1_SQRT_2).abs() < 1e-15);
        let want = 0.5 - 0.25 * FRAC_PI_4 * FRAC_PI_4;
        assert!((s.quadratic_growth - want).abs() < 1e-14);
        assert!(s.min() >= 0.0);

        let flat = diag(&[1.0, 1.0]);
        assert!(matches!(
            check_convexity_properties(&flat, &diag_point()),
            Err(Error::NonPositiveGap(_))
        ));
    }

    #[test]
    fn convexity_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut checked = 0;
        while checked < 2_000 {
            let d = rng.random_range(2..7);
            let a = random_shard(&mut rng, d, d + 2);
            let s = reference_spectrum(&a).unwrap();
            if s.gap <= 1e-6 * s.lambda1() {
                continue;
            }
            for _ in 0..5 {
                let x = sample_uniform_with(d, &mut rng).unwrap();
                if x.dot(&s.leading_vector).abs() <= 0.05 {
                    continue;
                }
                let slack = convexity_slacks(&a, &s, &x).unwrap();
                assert!(slack.min() >= -1e-9 * s.lambda1(), "{slack:?}");
                checked += 1;
            }
        }
    }

    fn shard_and_points() -> impl Strategy<Value = (CovarianceShard, UnitVector, UnitVector, Vec<f64>)> {
        (2usize..6, any::<u64>()).prop_map(|(d, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_shard(&mut rng, d, d + 1);
            let x = sample_uniform_with(d, &mut rng).unwrap();
            let y = sample_uniform_with(d, &mut rng).unwrap();
            let u = sample_uniform_with(d, &mut rng).unwrap().into_coords();
            (a, x, y, u)
        })
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences((a, x, _y, raw) in shard_and_points()) {
            let u = project_to_tangent(&x, &raw).unwrap();
            prop_assume!(u.norm() > 1e-3);
            let u = u.scale(1.0 / u.norm());
            let h = 1e-4;
            let plus = cost(&a, &exp_map(&x, &u.scale(h)).unwrap());
            let minus = cost(&a, &exp_map(&x, &u.scale(-h)).unwrap());
            let fd = (plus - minus) / (2.0 * h);
            let exact = dot(riemannian_grad(&a, &x).coords(), u.coords());
            prop_assert!((fd - exact).abs() <= 10.0 * h * h * a.local_smoothness().max(1.0) + 1e-8,
                "fd {} exact {}", fd, exact);
        }

        #[test]
        fn gradient_is_tangent((a, x, _y, _u) in shard_and_points()) {
            let g = riemannian_grad(&a, &x);
            prop_assert!(dot(g.coords(), x.coords()).abs() <= 1e-10 * norm(g.coords()).max(1.0));
        }

        #[test]
        fn gradient_is_lipschitz_under_transport((a, x, y, _u) in shard_and_points()) {
            let y = if x.dot(&y) < 0.0 { y.neg() } else { y };
            let lambda1 = a.local_smoothness() / 2.0;
            let moved = parallel_transport(&y, &x, &riemannian_grad(&a, &y)).unwrap();
            let lhs = riemannian_grad(&a, &x).distance_to(&moved).unwrap();
            prop_assert!(lhs <= 2.0 * lambda1 * distance(&x, &y) * (1.0 + 1e-8) + 1e-12);
        }

        #[test]
        fn cost_lies_in_spectral_range((a, x, _y, _u) in shard_and_points()) {
            let l1 = a.local_smoothness() / 2.0;
            let f = cost(&a, &x);
            prop_assert!(f <= 1e-12 && f >= -l1 * (1.0 + 1e-12));
        }
    }
}
