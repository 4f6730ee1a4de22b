//! Per-round metrics shared by the protocol and the baselines.

/// One row of a convergence trace. All quantities describe the iterate
/// `x⁽ᵗ⁾` and the messages of round `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    /// `f(x⁽ᵗ⁾)` for the global matrix.
    pub cost: f64,
    /// Intrinsic distance to the minimizer.
    pub dist: f64,
    /// `‖q⁽ᵗ⁾ − grad f(x⁽ᵗ⁾)‖`, or NaN where a method has no such quantity.
    pub sum_error: f64,
    /// The bound the method promises for `sum_error` (NaN if none).
    pub budget: f64,
    pub uplink_bits: u64,
    pub downlink_bits: u64,
    /// Setup bits plus all rounds up to `t`.
    pub cumulative_bits: u64,
}

/// A finished run of any method, reduced to what the harness reports.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub final_point: crate::UnitVector,
    pub ledger: crate::BitLedger,
    /// One record per round `t = 0..=rounds`.
    pub records: alloc::vec::Vec<RoundRecord>,
    /// The minimizer the metrics refer to.
    pub minimizer: crate::UnitVector,
}

impl Trajectory {
    pub fn final_distance(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.dist)
    }

    pub fn final_cost(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.cost)
    }
}

impl From<crate::protocol::RunResult> for Trajectory {
    fn from(r: crate::protocol::RunResult) -> Self {
        Trajectory {
            final_point: r.final_point,
            ledger: r.ledger,
            records: r.records,
            minimizer: r.minimizer,
        }
    }
}
