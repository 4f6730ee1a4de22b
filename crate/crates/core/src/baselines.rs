//! Comparison methods run over the same shards, quantizer and bit ledger as
//! the quantized Riemannian protocol.
//!
//! Every method uses the master/worker layout of the protocol: node 0 is the
//! master, each worker sends one vector per round and the master broadcasts
//! one vector back, charged once per worker link. All nodes hold the same
//! decoded values and take the same step.
//!
//! Quantized methods fix the modulus at `2^bits` per coordinate and derive
//! input radii from bounds every node can evaluate, exactly as the protocol's
//! fixed-budget rule does. A budget of 64 bits sends raw `f64` coordinates.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{distance, exp_map, project_to_tangent, TangentVector, UnitVector};
use crate::ledger::{BitLedger, SCALAR_BITS};
use crate::linalg::{add, axpy, euclidean_distance, norm, sub};
use crate::objective::{assemble_global, cost, euclidean_grad, riemannian_grad, CovarianceShard, Spectrum};
use crate::protocol::{check_radius, RadiusSource, RADIUS_FLOOR};
use crate::quantizer::{decode, encode, header_radius, QuantizerConfig, RADIUS_HEADER_BITS};
use crate::trace::{RoundRecord, Trajectory};
use crate::{Error, Result};

/// Budget that selects raw `f64` transmission.
pub const RAW_BITS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    FullPrecisionRgd,
    EuclideanDiffQuant,
    QuantizedPowerIteration,
    SingleNodeRgd,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::FullPrecisionRgd,
        Method::EuclideanDiffQuant,
        Method::QuantizedPowerIteration,
        Method::SingleNodeRgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::FullPrecisionRgd => "full_precision_rgd",
            Method::EuclideanDiffQuant => "euclidean_diff_quant",
            Method::QuantizedPowerIteration => "quantized_power_iteration",
            Method::SingleNodeRgd => "single_node_rgd",
        }
    }

    pub fn is_quantized(self) -> bool {
        matches!(self, Method::EuclideanDiffQuant | Method::QuantizedPowerIteration)
    }

    pub fn uses_step_size(self) -> bool {
        self != Method::QuantizedPowerIteration
    }
}

impl core::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid("method", alloc::format!("unknown method `{s}`")))
    }
}

/// How vectors go on the wire.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    /// Lattice quantization with `2^bits` residues per coordinate.
    Lattice(u32),
    /// Raw 64-bit coordinates.
    Raw,
}

impl Precision {
    /// `1..=32` selects the lattice, [`RAW_BITS`] raw floats.
    pub fn from_bits(bits: u32) -> Result<Self> {
        match bits {
            1..=32 => Ok(Precision::Lattice(bits)),
            RAW_BITS => Ok(Precision::Raw),
            _ => Err(Error::invalid("bits_per_coord", "must lie in 1..=32 or equal 64")),
        }
    }
}

/// What quantized power iteration encodes `Aᵢx⁽ᵗ⁾` against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerReference {
    /// The previously decoded `Aᵢx⁽ᵗ⁻¹⁾` (and previous broadcast).
    Previous,
    /// The zero vector in every round: the vectors themselves are quantized.
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaselineConfig {
    pub method: Method,
    /// Ignored by the unquantized methods.
    pub bits_per_coord: u32,
    /// Ignored by power iteration.
    pub step_size: f64,
    pub rounds: usize,
    /// Radius rule of the quantized methods.
    pub radii: RadiusSource,
    /// Only read by power iteration.
    pub power_reference: PowerReference,
}

/// Runs `cfg` from `x0`, recording metrics against `spectrum`.
pub fn run_baseline(
    cfg: &BaselineConfig,
    shards: &[CovarianceShard],
    x0: &UnitVector,
    spectrum: &Spectrum,
) -> Result<Trajectory> {
    match cfg.method {
        Method::FullPrecisionRgd => full_precision_rgd(shards, x0, cfg.step_size, cfg.rounds, spectrum),
        Method::SingleNodeRgd => {
            let global = assemble_global(shards)?;
            single_node_rgd(&global, x0, cfg.step_size, cfg.rounds, spectrum)
        }
        Method::EuclideanDiffQuant => {
            euclidean_diff_quant(shards, x0, cfg.step_size, cfg.rounds, cfg.bits_per_coord, cfg.radii, spectrum)
        }
        Method::QuantizedPowerIteration => {
            quantized_power_iteration(
            shards,
            x0,
            cfg.rounds,
            cfg.bits_per_coord,
            cfg.radii,
            cfg.power_reference,
            spectrum,
        )
        }
    }
}

struct Link {
    precision: Precision,
    radii: RadiusSource,
    floor: f64,
    dim: usize,
}

impl Link {
    /// Sends `value` to receivers holding `reference` and returns the
    /// reconstruction, its bit cost and the guaranteed error bound. `radius`
    /// is the a-priori bound, replaced by the measured distance (plus a
    /// header) under [`RadiusSource::Measured`].
    fn send(
        &self,
        round: usize,
        node: usize,
        stream: &'static str,
        value: &[f64],
        reference: &[f64],
        radius: f64,
    ) -> Result<(Vec<f64>, u64, f64)> {
        match self.precision {
            Precision::Raw => Ok((value.to_vec(), SCALAR_BITS * self.dim as u64, 0.0)),
            Precision::Lattice(bits) => {
                let (radius, header) = match self.radii {
                    RadiusSource::APriori => (radius.max(self.floor), 0),
                    RadiusSource::Measured => {
                        let y = euclidean_distance(value, reference).max(self.floor);
                        (header_radius(y)?, RADIUS_HEADER_BITS)
                    }
                };
                check_radius(round, node, stream, value, reference, radius)?;
                let cfg = QuantizerConfig::with_bits(radius, bits, self.dim)?;
                let msg = encode(&cfg, value)?;
                Ok((decode(&msg, reference)?, msg.bit_count() + header, cfg.output_radius()))
            }
        }
    }
}

/// Collects per-round records. Distances are to the nearer of `±v₁`.
struct Recorder {
    global: CovarianceShard,
    spectrum: Spectrum,
    records: Vec<RoundRecord>,
}

impl Recorder {
    fn new(shards: &[CovarianceShard], spectrum: &Spectrum, rounds: usize) -> Result<Self> {
        Ok(Recorder {
            global: assemble_global(shards)?,
            spectrum: spectrum.clone(),
            records: Vec::with_capacity(rounds.min(1 << 16) + 1),
        })
    }

    fn push(&mut self, x: &UnitVector, ledger: &BitLedger, sum_error: f64, budget: f64) {
        let t = self.records.len();
        let bits = ledger.rounds()[t];
        self.records.push(RoundRecord {
            t,
            cost: cost(&self.global, x),
            dist: distance(x, &self.spectrum.minimizer_near(x)),
            sum_error,
            budget,
            uplink_bits: bits.uplink,
            downlink_bits: bits.downlink,
            cumulative_bits: ledger.cumulative(t),
        });
    }

    fn finish(self, x: UnitVector, ledger: BitLedger) -> Trajectory {
        Trajectory {
            minimizer: self.spectrum.minimizer_near(&x),
            final_point: x,
            ledger,
            records: self.records,
        }
    }
}

fn check_step(eta: f64) -> Result<()> {
    if eta.is_finite() && eta > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("step_size", "must be positive and finite"))
    }
}

fn check_shards(shards: &[CovarianceShard], x0: &UnitVector) -> Result<()> {
    if shards.is_empty() {
        return Err(Error::EmptyShards);
    }
    for s in shards {
        crate::linalg::check_len(x0.dim(), s.dim())?;
    }
    Ok(())
}

/// Riemannian gradient descent with every vector sent as raw `f64`.
pub fn full_precision_rgd(
    shards: &[CovarianceShard],
    x0: &UnitVector,
    eta: f64,
    rounds: usize,
    spectrum: &Spectrum,
) -> Result<Trajectory> {
    check_step(eta)?;
    check_shards(shards, x0)?;
    let workers = (shards.len() - 1) as u64;
    let vector_bits = SCALAR_BITS * x0.dim() as u64;
    let mut ledger = BitLedger::new();
    // η down.
    ledger.charge_setup_scalars(workers);
    let mut rec = Recorder::new(shards, spectrum, rounds)?;
    let mut x = x0.clone();
    let mut q = TangentVector::zero(x.clone());
    for t in 0..=rounds {
        if t > 0 {
            x = exp_map(&x, &q.scale(-eta))?;
        }
        ledger.begin_round();
        q = TangentVector::zero(x.clone());
        for (i, s) in shards.iter().enumerate() {
            q = q.add(&riemannian_grad(s, &x))?;
            if i > 0 {
                ledger.charge_uplink(vector_bits);
                ledger.charge_downlink(vector_bits);
            }
        }
        rec.push(&x, &ledger, 0.0, 0.0);
    }
    Ok(rec.finish(x, ledger))
}

/// Riemannian gradient descent on one machine holding `a`. Sends nothing.
pub fn single_node_rgd(
    a: &CovarianceShard,
    x0: &UnitVector,
    eta: f64,
    rounds: usize,
    spectrum: &Spectrum,
) -> Result<Trajectory> {
    full_precision_rgd(core::slice::from_ref(a), x0, eta, rounds, spectrum)
}

/// Quantizes differences of ambient Euclidean gradients.
///
/// Each worker sends `Δᵢ = ∇fᵢ(x⁽ᵗ⁾) − ∇fᵢ(x⁽ᵗ⁻¹⁾)` (the gradient itself in
/// round 0) against the zero vector with radius `γᵢ‖x⁽ᵗ⁾ − x⁽ᵗ⁻¹⁾‖`. The
/// master adds its exact difference and broadcasts the summed difference the
/// same way. Every node accumulates the decoded differences into a running
/// Euclidean gradient, projects it onto the tangent space and steps. Errors
/// are never corrected, so they accumulate.
pub fn euclidean_diff_quant(
    shards: &[CovarianceShard],
    x0: &UnitVector,
    eta: f64,
    rounds: usize,
    bits: u32,
    radii: RadiusSource,
    spectrum: &Spectrum,
) -> Result<Trajectory> {
    check_step(eta)?;
    check_shards(shards, x0)?;
    let n = shards.len();
    let gammas: Vec<f64> = shards.iter().map(|s| s.local_smoothness()).collect();
    let gamma: f64 = gammas.iter().sum();
    let link = Link {
        precision: Precision::from_bits(bits)?,
        radii,
        floor: RADIUS_FLOOR * gamma / n as f64,
        dim: x0.dim(),
    };
    let mut ledger = BitLedger::new();
    // Each γᵢ up; γ and η down.
    ledger.charge_setup_scalars(3 * (n as u64 - 1));
    let mut rec = Recorder::new(shards, spectrum, rounds)?;

    let zero = vec![0.0; x0.dim()];
    let mut x = x0.clone();
    let mut prev_grads: Vec<Vec<f64>> = vec![zero.clone(); n];
    let mut running = zero.clone();
    let mut chord = 0.0;
    for t in 0..=rounds {
        if t > 0 {
            let dir = project_to_tangent(&x, &running)?;
            let next = exp_map(&x, &dir.scale(-eta))?;
            chord = euclidean_distance(next.coords(), x.coords());
            x = next;
        }
        ledger.begin_round();
        let scale_for = |g: f64| if t == 0 { g } else { g * chord };

        let mut total = vec![0.0; x.dim()];
        let mut up_error = 0.0;
        for (i, s) in shards.iter().enumerate() {
            let g = euclidean_grad(s, x.coords());
            let delta = sub(&g, &prev_grads[i]);
            prev_grads[i] = g;
            if i == 0 {
                axpy(1.0, &delta, &mut total);
                continue;
            }
            let (decoded, bits, w) = link.send(t, i, "uplink", &delta, &zero, scale_for(gammas[i]))?;
            ledger.charge_uplink(bits);
            axpy(1.0, &decoded, &mut total);
            up_error += w;
        }

        let (decoded, down_error) = if n == 1 {
            (total, 0.0)
        } else {
            let y = scale_for(gamma) + up_error;
            let (decoded, bits, w) = link.send(t, 0, "downlink", &total, &zero, y)?;
            for _ in 1..n {
                ledger.charge_downlink(bits);
            }
            (decoded, w)
        };
        running = add(&running, &decoded);

        let exact = shards
            .iter()
            .try_fold(TangentVector::zero(x.clone()), |acc, s| acc.add(&riemannian_grad(s, &x)))?;
        let used = project_to_tangent(&x, &running)?;
        rec.push(&x, &ledger, used.distance_to(&exact)?, up_error + down_error);
    }
    Ok(rec.finish(x, ledger))
}

/// Power iteration `x ← Ax/‖Ax‖` with quantized `Aᵢx`.
///
/// With [`PowerReference::Previous`], worker `i` sends `Aᵢx⁽ᵗ⁾` against its
/// previously decoded value with a-priori radius
/// `λᵢ‖x⁽ᵗ⁾ − x⁽ᵗ⁻¹⁾‖ + wᵢ⁽ᵗ⁻¹⁾` (`λᵢ = γᵢ/2`) and the master broadcasts the
/// sum against the previous broadcast. Round 0, and every round under
/// [`PowerReference::Zero`], uses the zero reference and radius `λᵢ`. No
/// transport is involved: the iteration is Euclidean.
pub fn quantized_power_iteration(
    shards: &[CovarianceShard],
    x0: &UnitVector,
    rounds: usize,
    bits: u32,
    radii: RadiusSource,
    reference: PowerReference,
    spectrum: &Spectrum,
) -> Result<Trajectory> {
    check_shards(shards, x0)?;
    let n = shards.len();
    let lambdas: Vec<f64> = shards.iter().map(|s| s.local_smoothness() / 2.0).collect();
    let lambda: f64 = lambdas.iter().sum();
    let link = Link {
        precision: Precision::from_bits(bits)?,
        radii,
        floor: RADIUS_FLOOR * lambda / n as f64,
        dim: x0.dim(),
    };
    let mut ledger = BitLedger::new();
    // Each λᵢ up; their sum down.
    ledger.charge_setup_scalars(2 * (n as u64 - 1));
    let mut rec = Recorder::new(shards, spectrum, rounds)?;

    let zero = vec![0.0; x0.dim()];
    let mut x = x0.clone();
    let mut local: Vec<Vec<f64>> = vec![zero.clone(); n];
    let mut prev_w = vec![0.0; n];
    let mut prev_down_w = 0.0;
    let mut broadcast = zero.clone();
    let mut chord = 0.0;
    for t in 0..=rounds {
        if t > 0 {
            let next = UnitVector::new(broadcast.clone())?;
            chord = euclidean_distance(next.coords(), x.coords());
            x = next;
        }
        ledger.begin_round();
        let fresh = t == 0 || reference == PowerReference::Zero;

        let mut sum = vec![0.0; x.dim()];
        let mut w_now = vec![0.0; n];
        for (i, s) in shards.iter().enumerate() {
            let v = s.matrix().mul_vec(x.coords());
            if i == 0 {
                axpy(1.0, &v, &mut sum);
                local[0] = v;
                continue;
            }
            let y = if fresh {
                lambdas[i]
            } else {
                lambdas[i] * chord + prev_w[i]
            };
            let reference = if fresh { &zero } else { &local[i] };
            let (decoded, bits, w) = link.send(t, i, "uplink", &v, reference, y)?;
            ledger.charge_uplink(bits);
            axpy(1.0, &decoded, &mut sum);
            local[i] = decoded;
            w_now[i] = w;
        }
        let up_error: f64 = w_now.iter().sum();

        let down_error = if n == 1 {
            broadcast = sum;
            0.0
        } else {
            let y = if fresh {
                lambda + up_error
            } else {
                lambda * chord + up_error + prev_w.iter().sum::<f64>() + prev_down_w
            };
            let reference = if fresh { zero.clone() } else { broadcast.clone() };
            let (decoded, bits, w) = link.send(t, 0, "downlink", &sum, &reference, y)?;
            for _ in 1..n {
                ledger.charge_downlink(bits);
            }
            broadcast = decoded;
            w
        };
        prev_w = w_now;
        prev_down_w = down_error;

        let exact = rec.global.matrix().mul_vec(x.coords());
        let err = euclidean_distance(&broadcast, &exact);
        rec.push(&x, &ledger, err, up_error + down_error);
    }
    if norm(&broadcast) == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(rec.finish(x, ledger))
}
