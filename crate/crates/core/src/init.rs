//! Initialization: a uniformly random point, or a quantized copy of one
//! node's local leading eigenvector.

use crate::geometry::{sample_uniform, UnitVector};
use crate::ledger::BitLedger;
use crate::linalg::{euclidean_distance, jacobi_eigen, norm};
use crate::objective::{over_approx_smoothness, CovarianceShard};
use crate::quantizer::{bit_cost, decode, encode, QuantizerConfig};
use crate::special::inc_beta;
use crate::{Error, Result};

/// Constant in the ball parameter `a = c·p/√d` of random initialization.
pub const CAP_CONSTANT: f64 = 1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct InitResult {
    /// `x⁽⁰⁾`
    pub point: UnitVector,
    /// `a`, a lower bound on `⟨x⁽⁰⁾, x*⟩`.
    pub ball_param: f64,
    /// `D = arccos(a)`
    pub init_radius: f64,
    /// `a/γ`
    pub suggested_eta: f64,
    /// Probability that `ball_param` is not a valid bound.
    pub failure_prob: f64,
    pub init_bits: u64,
}

impl InitResult {
    fn from_ball(point: UnitVector, a: f64, gamma: f64, p: f64, bits: u64) -> Self {
        InitResult {
            point,
            ball_param: a,
            init_radius: libm::acos(a),
            suggested_eta: a / gamma,
            failure_prob: p,
            init_bits: bits,
        }
    }
}

/// A uniform point on the sphere drawn from `seed`. With probability at
/// least `1 − p` it satisfies `|⟨x⁽⁰⁾, v₁⟩| ≥ p/√d`.
pub fn random_init(d: usize, gamma: f64, p: f64, seed: u64) -> Result<InitResult> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", "must lie in (0, 1)"));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::invalid("gamma", "must be positive and finite"));
    }
    let a = CAP_CONSTANT * p / libm::sqrt(d as f64);
    if a >= 1.0 {
        return Err(Error::invalid("p", "c·p/√d must be below 1"));
    }
    let point = sample_uniform(d, seed)?;
    Ok(InitResult::from_ball(point, a, gamma, p, 0))
}

/// `P(|⟨x, v⟩| ≥ a)` for `x` uniform on `S^{d−1}`, i.e.
/// `I_{1−a²}((d−1)/2, 1/2)`.
pub fn cap_probability(d: usize, a: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::DimensionTooSmall(d));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::invalid("a", "must lie in [0, 1]"));
    }
    Ok(inc_beta(1.0 - a * a, (d as f64 - 1.0) / 2.0, 0.5))
}

/// Quantities a warm start exposes for checking, beyond [`InitResult`].
#[derive(Clone, Debug, PartialEq)]
pub struct WarmStart {
    pub init: InitResult,
    /// The master's local leading eigenvector `v^{i₀}`.
    pub master_vector: UnitVector,
    /// `‖x̃⁽⁰⁾ − v^{i₀}‖` before normalization.
    pub quantization_error: f64,
    /// `‖x⁽⁰⁾ − v^{i₀}‖` after normalization.
    pub normalized_error: f64,
    /// Output radius used for the broadcast.
    pub output_radius: f64,
}

/// Input radius of the warm-start broadcast: any two unit vectors are within 2.
pub const WARM_INPUT_RADIUS: f64 = 2.0;

/// The master broadcasts its local leading eigenvector, quantized with output
/// radius `b/(2(√2+2))` for the caller's lower bound `b` on `⟨v^{i₀}, x*⟩`.
/// Workers decode against their own local leading eigenvectors.
///
/// The broadcast costs `(n−1)·bit_cost` bits, charged to `ledger` as setup.
pub fn warm_start(
    shards: &[CovarianceShard],
    master_id: usize,
    quant_lower_bound: f64,
    ledger: &mut BitLedger,
) -> Result<WarmStart> {
    if !(quant_lower_bound > 0.0 && quant_lower_bound <= 1.0) {
        return Err(Error::invalid("quant_lower_bound", "must lie in (0, 1]"));
    }
    let master = shards
        .get(master_id)
        .ok_or_else(|| Error::invalid("master_id", "no such shard"))?;
    let gamma = over_approx_smoothness(shards)?;
    let leading = |s: &CovarianceShard| -> Result<(UnitVector, f64, f64)> {
        let eig = jacobi_eigen(s.matrix());
        Ok((
            UnitVector::new(eig.vectors[0].clone())?,
            eig.values[0],
            eig.values[0] - eig.values[1],
        ))
    };
    let (v, lambda1, gap) = leading(master)?;
    if gap <= 1e-12 * lambda1.abs() {
        return Err(Error::NonPositiveGap(gap));
    }
    let ball = quant_lower_bound / 2.0;
    let w = quant_lower_bound / (2.0 * (core::f64::consts::SQRT_2 + 2.0));

    if shards.len() == 1 {
        return Ok(WarmStart {
            init: InitResult::from_ball(v.clone(), ball, gamma, 0.0, 0),
            master_vector: v,
            quantization_error: 0.0,
            normalized_error: 0.0,
            output_radius: w,
        });
    }

    let cfg = QuantizerConfig::new(WARM_INPUT_RADIUS, w, v.dim())?;
    let msg = encode(&cfg, v.coords())?;
    let decoded = decode(&msg, v.coords())?;
    for (i, s) in shards.iter().enumerate() {
        if i == master_id {
            continue;
        }
        let (vi, _, _) = leading(s)?;
        if decode(&msg, vi.coords())? != decoded {
            return Err(Error::Divergence { round: 0 });
        }
    }
    let bits = (shards.len() as u64 - 1) * bit_cost(&cfg);
    ledger.charge_setup(bits);

    if norm(&decoded) == 0.0 {
        return Err(Error::ZeroVector);
    }
    let point = UnitVector::new(decoded.clone())?;
    Ok(WarmStart {
        quantization_error: euclidean_distance(&decoded, v.coords()),
        normalized_error: euclidean_distance(point.coords(), v.coords()),
        init: InitResult::from_ball(point, ball, gamma, 0.0, bits),
        master_vector: v,
        output_radius: w,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_uniform_with;
    use crate::instance::{partition_rows, synth_instance, SyntheticSpec};
    use crate::linalg::SymMatrix;
    use crate::objective::{assemble_global, reference_spectrum};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_init_example() {
        let r = random_init(4, 2.0, 0.1, 1).unwrap();
        assert!((r.ball_param - 0.05).abs() < 1e-15);
        assert_eq!(r.init_radius, libm::acos(0.05));
        assert_eq!(r.suggested_eta, 0.025);
        assert!(r.suggested_eta <= libm::cos(r.init_radius) / 2.0 + 1e-15);
        assert_eq!(r.init_bits, 0);
        assert_eq!(r, random_init(4, 2.0, 0.1, 1).unwrap());
    }

    #[test]
    fn random_init_guards() {
        assert!(random_init(2, 1.0, 0.0, 0).is_err());
        assert!(random_init(2, 1.0, 1.0, 0).is_err());
        assert!(random_init(1, 1.0, 0.5, 0).is_err());
        assert!(random_init(2, 0.0, 0.5, 0).is_err());
    }

    #[test]
    fn cap_probability_examples() {
        assert_eq!(cap_probability(5, 0.0).unwrap(), 1.0);
        assert_eq!(cap_probability(5, 1.0).unwrap(), 0.0);
        assert!((cap_probability(3, 0.5).unwrap() - 0.5).abs() < 1e-14);
        for a in [0.1, 0.37, 0.9] {
            assert!((cap_probability(3, a).unwrap() - (1.0 - a)).abs() < 1e-13);
        }
        // d = 2: P(|cos φ| ≥ a) = 1 − (2/π) asin(a).
        let a: f64 = 0.3;
        let want = 1.0 - 2.0 / core::f64::consts::PI * libm::asin(a);
        assert!((cap_probability(2, a).unwrap() - want).abs() < 1e-13);
        assert!(cap_probability(3, 1.5).is_err());
        assert!(cap_probability(1, 0.5).is_err());
    }

    #[test]
    fn cap_probability_matches_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20_000;
        for &(d, a) in &[(4usize, 0.3), (10, 0.2), (30, 0.05)] {
            let hits = (0..n)
                .filter(|_| sample_uniform_with(d, &mut rng).unwrap().coords()[0].abs() >= a)
                .count();
            let freq = hits as f64 / n as f64;
            let p = cap_probability(d, a).unwrap();
            let se = libm::sqrt(p * (1.0 - p) / n as f64);
            assert!((freq - p).abs() <= 3.0 * se, "d={d} a={a}: {freq} vs {p}");
        }
    }

    #[test]
    fn warm_start_single_node_is_exact() {
        let shard = CovarianceShard::from_matrix(SymMatrix::from_diagonal(&[1.0, 3.0, 2.0]), 3).unwrap();
        let mut ledger = BitLedger::new();
        let ws = warm_start(&[shard], 0, 0.5, &mut ledger).unwrap();
        assert_eq!(ws.init.point.coords()[1].abs(), 1.0);
        assert_eq!(ws.init.ball_param, 0.25);
        assert_eq!(ws.init.init_bits, 0);
        assert_eq!(ledger.total(), 0);
    }

    #[test]
    fn warm_start_identical_shards() {
        let inst = synth_instance(&SyntheticSpec::with_gap(8, 2.0, 0.5, 80, 4)).unwrap();
        let one = inst.rows.covariance().unwrap();
        let shards = vec![one.clone(); 4];
        let mut ledger = BitLedger::new();
        let ws = warm_start(&shards, 0, 0.5, &mut ledger).unwrap();
        let x_star = reference_spectrum(&assemble_global(&shards).unwrap()).unwrap();
        let x_star = x_star.minimizer_near(&ws.master_vector);
        assert!(ws.quantization_error <= ws.output_radius * (1.0 + 1e-12));
        assert!(ws.normalized_error <= 2.0 * ws.quantization_error + 1e-15);
        assert!(ws.init.point.dot(&x_star) >= 1.0 - 2.0 * ws.output_radius);
        assert_eq!(ledger.setup_bits(), ws.init.init_bits);
        let cfg = QuantizerConfig::new(2.0, ws.output_radius, 8).unwrap();
        assert_eq!(ws.init.init_bits, 3 * bit_cost(&cfg));
        assert!((norm(ws.init.point.coords()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn warm_start_rejects_degenerate_master() {
        let flat = CovarianceShard::from_matrix(SymMatrix::identity(3), 3).unwrap();
        let mut ledger = BitLedger::new();
        assert!(matches!(
            warm_start(&[flat.clone(), flat], 0, 0.5, &mut ledger),
            Err(Error::NonPositiveGap(_))
        ));
    }

    #[test]
    fn warm_start_on_partitioned_data() {
        let inst = synth_instance(&SyntheticSpec::with_gap(6, 2.0, 0.6, 4000, 9)).unwrap();
        let shards = partition_rows(&inst.rows, 4, None).unwrap();
        let mut ledger = BitLedger::new();
        let ws = warm_start(&shards, 0, 0.5, &mut ledger).unwrap();
        let x_star = inst.spectrum.minimizer_near(&ws.master_vector);
        assert!(ws.init.point.dot(&x_star) >= 0.25);
    }

    proptest! {
        #[test]
        fn cap_probability_is_monotone(d in 2usize..300, a in 0.0f64..0.99, da in 0.0f64..0.01) {
            let p1 = cap_probability(d, a).unwrap();
            let p2 = cap_probability(d, a + da).unwrap();
            prop_assert!(p2 <= p1 + 1e-14);
            prop_assert!((0.0..=1.0).contains(&p1));
        }
    }
}
