//! Master/worker quantized Riemannian gradient descent.
//!
//! Node 0 is the master. In every round each worker quantizes its local
//! Riemannian gradient against the value it sent in the previous round,
//! parallel-transported to the current iterate; the master sums what it
//! decoded (plus its own exact gradient), quantizes the sum the same way and
//! broadcasts it; every node then takes the same exponential-map step.
//!
//! The simulator is omniscient: before every encode it checks that the
//! decoder's reference really lies within the input radius, and after every
//! decode that all nodes reconstructed the same vector. Either failure aborts
//! the run.
//!
//! Two radius rules are available. [`RadiusRule::Schedule`] uses the
//! geometrically shrinking radii `R⁽ᵗ⁾` of [`ScheduleParams`], whose bit cost
//! per round is constant. [`RadiusRule::FixedBits`] instead fixes the modulus
//! at `2^bits` per coordinate and derives radii from quantities every node
//! already knows (the step length and the previous round's error bounds).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::geometry::{
    distance, exp_map, parallel_transport, project_to_tangent, TangentVector, UnitVector,
};
use crate::ledger::BitLedger;
use crate::objective::{assemble_global, cost, riemannian_grad, CovarianceShard, Spectrum};
use crate::quantizer::{header_radius, QuantizerConfig, Transmission, RADIUS_HEADER_BITS};
use crate::trace::RoundRecord;
use crate::{Error, Result};

/// Slack allowed on radius checks, relative to the radius.
const RADIUS_SLACK: f64 = 1e-12;
/// Absolute tolerance of the invariant checks in [`verify_invariants`].
pub const INVARIANT_TOL: f64 = 1e-9;

/// Constants of the quantized gradient descent schedule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleParams {
    /// `η`
    pub step_size: f64,
    /// `D`, an upper bound on the initial intrinsic distance to the minimizer.
    pub init_radius: f64,
    /// `μ = δ/2`
    pub growth: f64,
    /// `γ`
    pub smoothness: f64,
    /// `σ = max(1 − cos(D)·μ·η, 1/2)`
    pub sigma: f64,
    /// `K = 2/√σ`
    pub k_const: f64,
    /// `θ = √σ(1 − √σ)/4`
    pub theta: f64,
    /// `ξ`, with `√ξ = θK + √σ`
    pub xi: f64,
    /// `T`, rounds needed to reach the target accuracy.
    pub horizon: usize,
    /// `ε`
    pub epsilon: f64,
}

impl ScheduleParams {
    pub fn build(gamma: f64, mu: f64, init_radius: f64, eta: f64, epsilon: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma", gamma),
            ("mu", mu),
            ("init_radius", init_radius),
            ("eta", eta),
            ("epsilon", epsilon),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        if init_radius >= PI / 2.0 {
            return Err(Error::invalid("init_radius", "must be below π/2"));
        }
        let cos_d = libm::cos(init_radius);
        let max_eta = cos_d / gamma;
        if eta > max_eta * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "eta",
                alloc::format!("{eta} exceeds cos(D)/γ = {max_eta}"),
            ));
        }
        let sigma = (1.0 - cos_d * mu * eta).max(0.5);
        let root = libm::sqrt(sigma);
        let k_const = 2.0 / root;
        let theta = root * (1.0 - root) / 4.0;
        let root_xi = theta * k_const + root;
        if root_xi > libm::sqrt((1.0 + sigma) / 2.0) * (1.0 + 1e-15) {
            return Err(Error::invalid("sigma", "contraction factor bound violated"));
        }
        let xi = root_xi * root_xi;
        if !(xi < 1.0) {
            return Err(Error::invalid("mu", "no contraction: ξ is not below 1"));
        }
        let horizon = if epsilon >= init_radius {
            0
        } else {
            let rounds = libm::ceil(libm::log(init_radius * init_radius / (epsilon * epsilon)) / (1.0 - xi));
            rounds as usize
        };
        Ok(ScheduleParams {
            step_size: eta,
            init_radius,
            growth: mu,
            smoothness: gamma,
            sigma,
            k_const,
            theta,
            xi,
            horizon,
            epsilon,
        })
    }

    pub fn radius_schedule(&self) -> RadiusSchedule {
        RadiusSchedule {
            base: self.smoothness * self.k_const * self.init_radius,
            ratio: libm::sqrt(self.xi),
        }
    }
}

/// `R⁽ᵗ⁾ = base · ratioᵗ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusSchedule {
    pub base: f64,
    pub ratio: f64,
}

impl RadiusSchedule {
    pub fn radius(&self, t: usize) -> f64 {
        self.base * libm::pow(self.ratio, t as f64)
    }
}


#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RadiusRule {
    /// Radii from the shrinking schedule `R⁽ᵗ⁾`.
    Schedule { radii: RadiusSchedule, theta: f64 },
    /// `2^bits` residues per coordinate in every message.
    FixedBits { bits: u32, radii: RadiusSource },
}

/// Where fixed-budget messages take their input radius from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadiusSource {
    /// Bounds every node can evaluate before the round starts.
    APriori,
    /// The sender measures `‖x − reference‖` and announces it in a 32-bit
    /// header. Receivers must then share the reference, so round 0 quantizes
    /// against the zero vector.
    Measured,
}

/// Lower bound on fixed-budget input radii, relative to `γ/n`. Keeps lattice
/// indices exactly representable once the iterates stop moving.
pub const RADIUS_FLOOR: f64 = 9.094947017729282e-13; // 2^-40

/// One node's view of the protocol.
#[derive(Clone, Debug)]
pub struct NodeState {
    pub node_id: usize,
    pub shard: CovarianceShard,
    /// `qᵢ⁽ᵗ⁾`: this node's gradient as the master decoded it.
    pub last_decoded_local: TangentVector,
    /// `q⁽ᵗ⁾`: the broadcast aggregate.
    pub last_decoded_sum: TangentVector,
    /// `x⁽ᵗ⁾`
    pub current_point: UnitVector,
    /// Master only: the decoded `qᵢ⁽ᵗ⁾` of every node.
    received: Vec<TangentVector>,
}

pub const MASTER: usize = 0;

impl NodeState {
    pub fn is_master(&self) -> bool {
        self.node_id == MASTER
    }

    /// Moves every stored reference to `next` and makes it the current point.
    /// Returns the largest normal component removed after transport.
    fn transport_to(&mut self, next: &UnitVector) -> Result<f64> {
        let from = self.current_point.clone();
        let mut worst = 0.0_f64;
        let mut move_one = |v: &mut TangentVector| -> Result<()> {
            let mut moved = parallel_transport(&from, next, v)?;
            worst = worst.max(moved.reorthogonalize());
            *v = moved;
            Ok(())
        };
        move_one(&mut self.last_decoded_local)?;
        move_one(&mut self.last_decoded_sum)?;
        for r in &mut self.received {
            move_one(r)?;
        }
        self.current_point = next.clone();
        Ok(worst)
    }
}

/// What one round did, as seen by an omniscient observer.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundReport {
    pub t: usize,
    pub point: UnitVector,
    /// `‖qᵢ⁽ᵗ⁾ − grad fᵢ(x⁽ᵗ⁾)‖` per node; zero for the master.
    pub node_errors: Vec<f64>,
    /// `‖q⁽ᵗ⁾ − grad f(x⁽ᵗ⁾)‖`
    pub sum_error: f64,
    /// Promised bound on each node error.
    pub node_budget: f64,
    /// Promised bound on `sum_error`.
    pub sum_budget: f64,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
    /// Largest normal component removed after transporting references.
    pub reorth_correction: f64,
}

impl RoundReport {
    pub fn max_node_error(&self) -> f64 {
        self.node_errors.iter().copied().fold(0.0, f64::max)
    }
}

/// Radii of one round's messages.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Radii {
    up_y: f64,
    up_w: f64,
    down_y: f64,
    down_w: f64,
}

/// Drives the protocol one round at a time.
#[derive(Clone, Debug)]
pub struct Simulation {
    states: Vec<NodeState>,
    step_size: f64,
    smoothness: f64,
    rule: RadiusRule,
    ledger: BitLedger,
    next_round: usize,
    prev: Option<Radii>,
    last_step: f64,
}

pub(crate) fn check_radius(
    round: usize,
    node: usize,
    stream: &'static str,
    value: &[f64],
    reference: &[f64],
    radius: f64,
) -> Result<()> {
    let distance = crate::linalg::euclidean_distance(value, reference);
    if distance > radius * (1.0 + RADIUS_SLACK) {
        return Err(Error::RadiusViolation {
            round,
            node,
            stream,
            distance,
            radius,
        });
    }
    Ok(())
}

impl Simulation {
    /// Setup phase with the shrinking-radius schedule.
    pub fn with_schedule(
        shards: &[CovarianceShard],
        x0: &UnitVector,
        params: &ScheduleParams,
    ) -> Result<Self> {
        let rule = RadiusRule::Schedule {
            radii: params.radius_schedule(),
            theta: params.theta,
        };
        let mut sim = Self::start(shards, x0, params.step_size, params.smoothness, rule)?;
        // Each γᵢ up; γ, μ, D and η down.
        sim.charge_setup_scalars(1, 4);
        Ok(sim)
    }

    /// Setup phase with a fixed bit budget per coordinate. `gamma` must be at
    /// least `n · maxᵢ γᵢ`.
    pub fn with_fixed_bits(
        shards: &[CovarianceShard],
        x0: &UnitVector,
        eta: f64,
        gamma: f64,
        bits: u32,
        radii: RadiusSource,
    ) -> Result<Self> {
        let n = shards.len() as f64;
        if shards
            .iter()
            .any(|s| s.local_smoothness() * n > gamma * (1.0 + 1e-12))
        {
            return Err(Error::invalid("gamma", "must be at least n · max γᵢ"));
        }
        if !(eta.is_finite() && eta > 0.0) {
            return Err(Error::invalid("eta", "must be positive and finite"));
        }
        QuantizerConfig::with_bits(1.0, bits, x0.dim())?;
        let mut sim = Self::start(shards, x0, eta, gamma, RadiusRule::FixedBits { bits, radii })?;
        // Each γᵢ up; γ and η down.
        sim.charge_setup_scalars(1, 2);
        Ok(sim)
    }

    fn start(
        shards: &[CovarianceShard],
        x0: &UnitVector,
        step_size: f64,
        smoothness: f64,
        rule: RadiusRule,
    ) -> Result<Self> {
        if shards.is_empty() {
            return Err(Error::EmptyShards);
        }
        for s in shards {
            crate::linalg::check_len(x0.dim(), s.dim())?;
        }
        let zero = TangentVector::zero(x0.clone());
        let states = shards
            .iter()
            .enumerate()
            .map(|(i, s)| NodeState {
                node_id: i,
                shard: s.clone(),
                last_decoded_local: zero.clone(),
                last_decoded_sum: zero.clone(),
                current_point: x0.clone(),
                received: if i == MASTER {
                    vec![zero.clone(); shards.len()]
                } else {
                    Vec::new()
                },
            })
            .collect();
        Ok(Simulation {
            states,
            step_size,
            smoothness,
            rule,
            ledger: BitLedger::new(),
            next_round: 0,
            prev: None,
            last_step: 0.0,
        })
    }

    fn charge_setup_scalars(&mut self, per_worker_up: u64, per_worker_down: u64) {
        let workers = (self.states.len() - 1) as u64;
        self.ledger
            .charge_setup_scalars(workers * (per_worker_up + per_worker_down));
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn ledger(&self) -> &BitLedger {
        &self.ledger
    }

    /// Charges extra setup bits (for example an initialization broadcast).
    pub fn charge_setup(&mut self, bits: u64) {
        self.ledger.charge_setup(bits);
    }

    pub fn point(&self) -> &UnitVector {
        &self.states[MASTER].current_point
    }

    /// `q⁽ᵗ⁾` for the last completed round.
    pub fn aggregate(&self) -> &TangentVector {
        &self.states[MASTER].last_decoded_sum
    }

    /// Index of the round [`Simulation::step`] runs next.
    pub fn next_round(&self) -> usize {
        self.next_round
    }

    pub fn node_count(&self) -> usize {
        self.states.len()
    }

    fn radii(&self, t: usize) -> Radii {
        let n = self.states.len() as f64;
        let workers = n - 1.0;
        match self.rule {
            RadiusRule::Schedule { radii, theta } => {
                let r = radii.radius(t);
                let (up_w, down_w) = (theta * r / (2.0 * n), theta * r / 2.0);
                if t == 0 {
                    let far = 2.0 * self.smoothness * PI;
                    Radii {
                        up_y: far,
                        up_w,
                        down_y: theta * r / 2.0 + far,
                        down_w,
                    }
                } else {
                    Radii {
                        up_y: r / n,
                        up_w,
                        down_y: (1.0 + theta / 2.0) * r,
                        down_w,
                    }
                }
            }
            RadiusRule::FixedBits { bits, .. } => {
                let rho = QuantizerConfig::ratio_for_bits(bits, self.point().dim());
                let local = self.smoothness / n;
                let floor = RADIUS_FLOOR * local;
                let (up_y, drift) = match self.prev {
                    // ‖gᵢ − g₀‖ ≤ γᵢ + γ₀; ‖r − gᵢ‖ ≤ ‖r‖ + γᵢ.
                    None => (2.0 * local, self.smoothness + local),
                    // Lipschitz drift of the gradients plus last round's errors.
                    Some(p) => (
                        local * self.last_step + p.up_w,
                        self.smoothness * self.last_step + workers * p.up_w + p.down_w,
                    ),
                };
                let up_y = up_y.max(floor);
                let up_w = rho * up_y;
                let down_y = (workers * up_w + drift).max(floor);
                Radii {
                    up_y,
                    up_w,
                    down_y,
                    down_w: rho * down_y,
                }
            }
        }
    }

    /// Promised per-node and aggregate error bounds, given the output radii
    /// actually used this round.
    fn budgets(&self, t: usize, up_w: &[f64], down_w: f64) -> (f64, f64) {
        let n = self.states.len() as f64;
        match self.rule {
            RadiusRule::Schedule { radii: sched, theta } => {
                let r = sched.radius(t);
                (theta * r / (2.0 * n), theta * r)
            }
            RadiusRule::FixedBits { .. } => (
                up_w.iter().copied().fold(0.0, f64::max),
                up_w.iter().sum::<f64>() + down_w,
            ),
        }
    }

    /// Input radius, output radius and header bits of one message whose
    /// receivers all hold `reference` (only consulted for measured radii).
    fn message_radii(&self, planned: (f64, f64), value: &[f64], reference: &[f64]) -> Result<(f64, f64, u64)> {
        match self.rule {
            RadiusRule::FixedBits {
                bits,
                radii: RadiusSource::Measured,
            } => {
                let n = self.states.len() as f64;
                let floor = RADIUS_FLOOR * self.smoothness / n;
                let measured = crate::linalg::euclidean_distance(value, reference);
                let y = header_radius(measured.max(floor))?;
                let rho = QuantizerConfig::ratio_for_bits(bits, value.len());
                Ok((y, rho * y, RADIUS_HEADER_BITS))
            }
            _ => Ok((planned.0, planned.1, 0)),
        }
    }

    fn measured(&self) -> bool {
        matches!(
            self.rule,
            RadiusRule::FixedBits {
                radii: RadiusSource::Measured,
                ..
            }
        )
    }

    /// Runs the next round: round 0 exchanges the initial gradients, later
    /// rounds first step to `x⁽ᵗ⁾ = exp(−η q⁽ᵗ⁻¹⁾)` and transport references.
    pub fn step(&mut self) -> Result<RoundReport> {
        let t = self.next_round;
        let n = self.states.len();
        let mut reorth = 0.0_f64;
        if t > 0 {
            let x = self.point().clone();
            let v = self.aggregate().scale(-self.step_size);
            let next = exp_map(&x, &v)?;
            self.last_step = distance(&x, &next);
            for s in &mut self.states {
                reorth = reorth.max(s.transport_to(&next)?);
            }
        }
        let radii = self.radii(t);
        let x = self.point().clone();
        let dim = x.dim();
        self.ledger.begin_round();

        let grads: Vec<TangentVector> = self
            .states
            .iter()
            .map(|s| riemannian_grad(&s.shard, &s.current_point))
            .collect();

        let measured = self.measured();
        let zero = vec![0.0; dim];
        let mut node_errors = vec![0.0; n];
        let mut up_ws = Vec::with_capacity(n);
        let mut uplink_bits = 0;
        for i in 1..n {
            let value = grads[i].coords();
            let (master_ref, worker_ref) = if t == 0 && measured {
                (zero.clone(), zero.clone())
            } else if t == 0 {
                (grads[MASTER].coords().to_vec(), value.to_vec())
            } else {
                (
                    self.states[MASTER].received[i].coords().to_vec(),
                    self.states[i].last_decoded_local.coords().to_vec(),
                )
            };
            let (up_y, up_w, header) = self.message_radii((radii.up_y, radii.up_w), value, &master_ref)?;
            check_radius(t, i, "uplink", value, &master_ref, up_y)?;
            let msg = Transmission::new(up_y, up_w, value)?;
            let at_master = project_to_tangent(&x, &msg.decode(&master_ref)?)?;
            let at_worker = project_to_tangent(&x, &msg.decode(&worker_ref)?)?;
            if at_master != at_worker {
                return Err(Error::Divergence { round: t });
            }
            node_errors[i] = at_master.distance_to(&grads[i])?;
            self.states[MASTER].received[i] = at_master;
            self.states[i].last_decoded_local = at_worker;
            up_ws.push(up_w);
            let bits = msg.bit_count() + header;
            self.ledger.charge_uplink(bits);
            uplink_bits += bits;
        }
        self.states[MASTER].received[MASTER] = grads[MASTER].clone();
        self.states[MASTER].last_decoded_local = grads[MASTER].clone();

        let mut r = vec![0.0; dim];
        for q in &self.states[MASTER].received {
            crate::linalg::axpy(1.0, q.coords(), &mut r);
        }

        let mut downlink_bits = 0;
        let mut down_w_used = 0.0;
        if n == 1 {
            self.states[MASTER].last_decoded_sum = project_to_tangent(&x, &r)?;
        } else {
            let reference_of = |i: usize| match (t, i) {
                (0, _) if measured => zero.clone(),
                (0, MASTER) => r.clone(),
                (0, _) => grads[i].coords().to_vec(),
                _ => self.states[i].last_decoded_sum.coords().to_vec(),
            };
            let (down_y, down_w, header) =
                self.message_radii((radii.down_y, radii.down_w), &r, &reference_of(MASTER))?;
            down_w_used = down_w;
            let msg = Transmission::new(down_y, down_w, &r)?;
            let mut decoded = Vec::with_capacity(n);
            for i in 0..n {
                let reference = reference_of(i);
                check_radius(t, i, "downlink", &r, &reference, down_y)?;
                decoded.push(project_to_tangent(&x, &msg.decode(&reference)?)?);
            }
            if decoded.iter().any(|q| q != &decoded[MASTER]) {
                return Err(Error::Divergence { round: t });
            }
            for (s, q) in self.states.iter_mut().zip(decoded) {
                s.last_decoded_sum = q;
            }
            let bits = msg.bit_count() + header;
            for _ in 1..n {
                self.ledger.charge_downlink(bits);
                downlink_bits += bits;
            }
        }

        let mut exact = vec![0.0; dim];
        for g in &grads {
            crate::linalg::axpy(1.0, g.coords(), &mut exact);
        }
        let sum_error = crate::linalg::euclidean_distance(self.aggregate().coords(), &exact);
        let (node_budget, sum_budget) = self.budgets(t, &up_ws, down_w_used);

        self.prev = Some(radii);
        self.next_round += 1;
        Ok(RoundReport {
            t,
            point: x,
            node_errors,
            sum_error,
            node_budget,
            sum_budget,
            uplink_bits,
            downlink_bits,
            reorth_correction: reorth,
        })
    }
}

/// Setup plus round 0. The returned simulation holds the node states and the
/// ledger.
pub fn run_setup(
    shards: &[CovarianceShard],
    x0: &UnitVector,
    params: &ScheduleParams,
) -> Result<(Simulation, RoundReport)> {
    let mut sim = Simulation::with_schedule(shards, x0, params)?;
    let report = sim.step()?;
    Ok((sim, report))
}

/// Runs round `sim.next_round()`.
pub fn run_round(sim: &mut Simulation) -> Result<RoundReport> {
    sim.step()
}

/// A finished run with ground-truth metrics.
#[derive(Clone, Debug)]
pub struct RunResult {
    pub final_point: UnitVector,
    pub ledger: BitLedger,
    /// One record per round `t = 0..=T`.
    pub records: Vec<RoundRecord>,
    pub reports: Vec<RoundReport>,
    /// The minimizer the metrics refer to (`±v₁`, aligned with `x⁽⁰⁾`).
    pub minimizer: UnitVector,
    /// `D` and `ξ` of the schedule, if one was used.
    pub schedule: Option<ScheduleParams>,
}

impl RunResult {
    pub fn final_distance(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.dist)
    }

    pub fn final_cost(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.cost)
    }
}

/// Executes `rounds + 1` rounds (`t = 0..=rounds`) of a prepared simulation
/// and records metrics against `spectrum`.
pub fn drive(
    mut sim: Simulation,
    shards: &[CovarianceShard],
    spectrum: &Spectrum,
    rounds: usize,
    schedule: Option<ScheduleParams>,
) -> Result<RunResult> {
    let global = assemble_global(shards)?;
    let minimizer = spectrum.minimizer_near(sim.point());
    let mut records = Vec::with_capacity(rounds.min(1 << 16) + 1);
    let mut reports = Vec::with_capacity(rounds.min(1 << 16) + 1);
    for _ in 0..=rounds {
        let rep = sim.step()?;
        records.push(RoundRecord {
            t: rep.t,
            cost: cost(&global, &rep.point),
            dist: distance(&rep.point, &minimizer),
            sum_error: rep.sum_error,
            budget: rep.sum_budget,
            uplink_bits: rep.uplink_bits,
            downlink_bits: rep.downlink_bits,
            cumulative_bits: sim.ledger().cumulative(rep.t),
        });
        reports.push(rep);
    }
    let final_point = sim.point().clone();
    Ok(RunResult {
        final_point,
        ledger: sim.ledger,
        records,
        reports,
        minimizer,
        schedule,
    })
}

/// Setup plus `T` update rounds of the scheduled protocol.
pub fn run(
    shards: &[CovarianceShard],
    x0: &UnitVector,
    params: &ScheduleParams,
    spectrum: &Spectrum,
) -> Result<RunResult> {
    let sim = Simulation::with_schedule(shards, x0, params)?;
    drive(sim, shards, spectrum, params.horizon, Some(*params))
}

/// Per-round outcome of the three invariant checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InvariantRow {
    pub t: usize,
    /// `dist²(x⁽ᵗ⁾, x*) ≤ ξᵗ D²`
    pub contraction: bool,
    /// `‖qᵢ⁽ᵗ⁾ − grad fᵢ‖ ≤ θR⁽ᵗ⁾/(2n)` for every node
    pub node_error: bool,
    /// `‖q⁽ᵗ⁾ − grad f‖ ≤ θR⁽ᵗ⁾`
    pub sum_error: bool,
}

impl InvariantRow {
    pub fn all(&self) -> bool {
        self.contraction && self.node_error && self.sum_error
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantReport {
    pub rows: Vec<InvariantRow>,
}

impl InvariantReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(InvariantRow::all)
    }

    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.all()).count()
    }
}

/// Checks the three per-round invariants of a scheduled run, each with
/// absolute tolerance [`INVARIANT_TOL`].
pub fn verify_invariants(result: &RunResult) -> Result<InvariantReport> {
    let params = result
        .schedule
        .ok_or_else(|| Error::invalid("result", "run did not use the radius schedule"))?;
    let d2 = params.init_radius * params.init_radius;
    let rows = result
        .records
        .iter()
        .zip(&result.reports)
        .map(|(rec, rep)| {
            let bound = libm::pow(params.xi, rec.t as f64) * d2;
            InvariantRow {
                t: rec.t,
                contraction: rec.dist * rec.dist <= bound + INVARIANT_TOL,
                node_error: rep.max_node_error() <= rep.node_budget + INVARIANT_TOL,
                sum_error: rep.sum_error <= rep.sum_budget + INVARIANT_TOL,
            }
        })
        .collect();
    Ok(InvariantReport { rows })
}
