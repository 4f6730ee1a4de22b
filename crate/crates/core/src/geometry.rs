//! Geometry of the unit sphere `S^{d-1} ⊂ R^d`.
//!
//! Points are [`UnitVector`]s. Tangent vectors carry their base point so that
//! mixing vectors from different tangent spaces is caught at runtime.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{axpy, check_finite, check_len, dot, norm};
use crate::{Error, Result};

/// Below this norm a tangent vector is treated as zero.
pub const ZERO_NORM: f64 = 1e-15;

const BASE_TOL: f64 = 1e-12;
const TANGENT_TOL: f64 = 1e-10;

/// A point on the unit sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitVector {
    coords: Vec<f64>,
}

impl UnitVector {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::DimensionTooSmall(coords.len()));
        }
        check_finite(&coords)?;
        let n = norm(&coords);
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        if !n.is_finite() {
            return Err(Error::NonFinite);
        }
        let coords = coords.into_iter().map(|x| x / n).collect();
        Ok(UnitVector { coords })
    }

    /// The `i`-th standard basis vector of `R^d`.
    pub fn basis(d: usize, i: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::DimensionTooSmall(d));
        }
        if i >= d {
            return Err(Error::invalid("i", "basis index out of range"));
        }
        let mut coords = alloc::vec![0.0; d];
        coords[i] = 1.0;
        Ok(UnitVector { coords })
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn dot(&self, other: &UnitVector) -> f64 {
        dot(&self.coords, &other.coords)
    }

    pub fn neg(&self) -> UnitVector {
        UnitVector {
            coords: self.coords.iter().map(|x| -x).collect(),
        }
    }

    /// Whether two points agree to `1e-12` in every coordinate.
    pub fn same_point(&self, other: &UnitVector) -> bool {
        self.dim() == other.dim()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| (a - b).abs() <= BASE_TOL)
    }
}

/// A vector in the tangent space at `base`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentVector {
    base: UnitVector,
    coords: Vec<f64>,
}

impl TangentVector {
    /// Checks `⟨base, coords⟩ ≈ 0` before accepting the vector.
    pub fn new(base: UnitVector, coords: Vec<f64>) -> Result<Self> {
        check_len(base.dim(), coords.len())?;
        check_finite(&coords)?;
        let ip = dot(base.coords(), &coords);
        if ip.abs() > TANGENT_TOL * norm(&coords).max(1.0) {
            return Err(Error::NotTangent(ip));
        }
        Ok(TangentVector { base, coords })
    }

    pub fn zero(base: UnitVector) -> Self {
        let coords = alloc::vec![0.0; base.dim()];
        TangentVector { base, coords }
    }

    /// Caller guarantees tangency up to rounding.
    pub(crate) fn from_parts(base: UnitVector, coords: Vec<f64>) -> Self {
        debug_assert_eq!(base.dim(), coords.len());
        TangentVector { base, coords }
    }

    #[inline]
    pub fn base(&self) -> &UnitVector {
        &self.base
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        norm(&self.coords)
    }

    fn check_same_base(&self, other: &TangentVector) -> Result<()> {
        if self.base.same_point(&other.base) {
            Ok(())
        } else {
            Err(Error::BaseMismatch)
        }
    }

    pub fn inner(&self, other: &TangentVector) -> Result<f64> {
        self.check_same_base(other)?;
        Ok(dot(&self.coords, &other.coords))
    }

    pub fn add(&self, other: &TangentVector) -> Result<TangentVector> {
        self.check_same_base(other)?;
        let mut coords = self.coords.clone();
        axpy(1.0, &other.coords, &mut coords);
        Ok(TangentVector::from_parts(self.base.clone(), coords))
    }

    pub fn sub(&self, other: &TangentVector) -> Result<TangentVector> {
        self.check_same_base(other)?;
        let mut coords = self.coords.clone();
        axpy(-1.0, &other.coords, &mut coords);
        Ok(TangentVector::from_parts(self.base.clone(), coords))
    }

    /// `‖self − other‖`, for vectors at the same base.
    pub fn distance_to(&self, other: &TangentVector) -> Result<f64> {
        self.check_same_base(other)?;
        Ok(crate::linalg::euclidean_distance(&self.coords, &other.coords))
    }

    pub fn scale(&self, s: f64) -> TangentVector {
        let coords = self.coords.iter().map(|x| x * s).collect();
        TangentVector::from_parts(self.base.clone(), coords)
    }

    /// Removes any component along the base point. Returns the size of the
    /// removed component.
    pub fn reorthogonalize(&mut self) -> f64 {
        let ip = dot(self.base.coords(), &self.coords);
        axpy(-ip, &self.base.coords, &mut self.coords);
        ip.abs()
    }
}

/// `(I − ppᵀ) w`.
pub fn project_to_tangent(p: &UnitVector, w: &[f64]) -> Result<TangentVector> {
    check_len(p.dim(), w.len())?;
    let mut coords = w.to_vec();
    axpy(-dot(p.coords(), w), p.coords(), &mut coords);
    Ok(TangentVector::from_parts(p.clone(), coords))
}

/// Endpoint of the geodesic leaving `p` with velocity `v`.
pub fn exp_map(p: &UnitVector, v: &TangentVector) -> Result<UnitVector> {
    if !p.same_point(v.base()) {
        return Err(Error::BaseMismatch);
    }
    let nv = v.norm();
    if nv < ZERO_NORM {
        return Ok(p.clone());
    }
    let (s, c) = (libm::sin(nv), libm::cos(nv));
    let coords: Vec<f64> = p
        .coords()
        .iter()
        .zip(v.coords())
        .map(|(pi, vi)| c * pi + s * vi / nv)
        .collect();
    UnitVector::new(coords)
}

/// Intrinsic (great-circle) distance.
///
/// Computed as `2·atan2(‖p−q‖, ‖p+q‖)`, which equals `arccos⟨p,q⟩` but keeps
/// full relative precision near 0 and π.
pub fn distance(p: &UnitVector, q: &UnitVector) -> f64 {
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (a, b) in p.coords().iter().zip(q.coords()) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * libm::atan2(libm::sqrt(diff), libm::sqrt(sum))
}

/// Inverse of [`exp_map`]: the tangent vector at `p` pointing to `q` with
/// length `distance(p, q)`.
pub fn log_map(p: &UnitVector, q: &UnitVector) -> Result<TangentVector> {
    check_len(p.dim(), q.dim())?;
    let theta = distance(p, q);
    if theta < ZERO_NORM {
        return Ok(TangentVector::zero(p.clone()));
    }
    let dir = project_to_tangent(p, q.coords())?;
    let n = dir.norm();
    // Near-antipodal pairs leave no usable direction.
    if n < 1e-14 && p.dot(q) < 0.0 {
        return Err(Error::Antipodal);
    }
    Ok(dir.scale(theta / n))
}

/// Parallel transport of `u` (tangent at `from`) along the minimizing
/// geodesic to `to`.
pub fn parallel_transport(
    from: &UnitVector,
    to: &UnitVector,
    u: &TangentVector,
) -> Result<TangentVector> {
    if !from.same_point(u.base()) {
        return Err(Error::BaseMismatch);
    }
    let v = log_map(from, to)?;
    let nv = v.norm();
    if nv < ZERO_NORM {
        return Ok(TangentVector::from_parts(to.clone(), u.coords().to_vec()));
    }
    let vu = dot(v.coords(), u.coords());
    let mut coords = u.coords().to_vec();
    axpy((libm::cos(nv) - 1.0) * vu / (nv * nv), v.coords(), &mut coords);
    axpy(-libm::sin(nv) * vu / nv, from.coords(), &mut coords);
    Ok(TangentVector::from_parts(to.clone(), coords))
}

/// `(distance(a, b), ‖log_c(a) − log_c(b)‖)`. On the sphere the first never
/// exceeds the second.
pub fn tangent_chord_bound(a: &UnitVector, b: &UnitVector, c: &UnitVector) -> Result<(f64, f64)> {
    let la = log_map(c, a)?;
    let lb = log_map(c, b)?;
    Ok((distance(a, b), la.distance_to(&lb)?))
}

/// A uniformly distributed point on `S^{d-1}`, reproducible from `seed`.
pub fn sample_uniform(d: usize, seed: u64) -> Result<UnitVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_uniform_with(d, &mut rng)
}

/// As [`sample_uniform`], drawing from a caller-provided generator.
pub fn sample_uniform_with<R: rand::Rng + ?Sized>(d: usize, rng: &mut R) -> Result<UnitVector> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    loop {
        let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        if norm(&g) > 1e-150 {
            return UnitVector::new(g);
        }
    }
}
