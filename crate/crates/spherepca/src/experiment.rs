//! Runs every configured method on shared shards and writes traces and a
//! summary.

use std::fs;

use anyhow::{bail, Context};
use serde::Serialize;
use spherepca_core::baselines::{run_baseline, BaselineConfig, RAW_BITS};
use spherepca_core::init::{random_init, warm_start, InitResult};
use spherepca_core::instance::{partition_rows, synth_instance, RowMatrix};
use spherepca_core::ledger::{BitLedger, SCALAR_BITS};
use spherepca_core::objective::{assemble_global, over_approx_smoothness, reference_spectrum};
use spherepca_core::protocol::{drive, RadiusSource, ScheduleParams, Simulation};
use spherepca_core::trace::Trajectory;
use spherepca_core::{CovarianceShard, Spectrum};

use crate::config::{DataSource, InitKind, MethodConfig, MethodKind, RunConfig};
use crate::csv_io::{read_matrix, trace_csv, trace_jsonl, write_atomic};

/// Data and ground truth shared by all methods of a run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub rows: usize,
    pub shards: Vec<CovarianceShard>,
    pub spectrum: Spectrum,
}

impl Prepared {
    pub fn dim(&self) -> usize {
        self.spectrum.eigenvalues.len()
    }
}

pub fn load_rows(cfg: &RunConfig) -> anyhow::Result<RowMatrix> {
    let mut rows = match &cfg.data {
        DataSource::Csv { path } => read_matrix(path)?,
        DataSource::Synthetic(s) => synth_instance(&s.to_spec(cfg.seed)?)?.rows,
    };
    if cfg.center {
        rows.center();
    }
    Ok(rows)
}

pub fn prepare(cfg: &RunConfig) -> anyhow::Result<Prepared> {
    let rows = load_rows(cfg)?;
    let shards = partition_rows(&rows, cfg.n_nodes, cfg.shuffle_seed)?;
    let spectrum = reference_spectrum(&assemble_global(&shards)?)?;
    spectrum.require_gap()?;
    Ok(Prepared {
        rows: rows.rows(),
        shards,
        spectrum,
    })
}

/// Initialization for repeat `run`, with the bits it costs every method.
pub fn initialize(cfg: &RunConfig, data: &Prepared, run: usize) -> anyhow::Result<(InitResult, u64)> {
    let gamma = over_approx_smoothness(&data.shards)?;
    match cfg.init {
        InitKind::Random => {
            let init = random_init(data.dim(), gamma, cfg.failure_prob, cfg.seed.wrapping_add(run as u64))?;
            // The seed goes to every worker.
            let bits = SCALAR_BITS * (data.shards.len() as u64 - 1);
            Ok((init, bits))
        }
        InitKind::WarmStart => {
            let mut ledger = BitLedger::new();
            let ws = warm_start(&data.shards, 0, cfg.quant_lower_bound, &mut ledger)?;
            Ok((ws.init, ledger.total()))
        }
    }
}

/// Adds `bits` of setup to a finished trajectory.
fn charge_init(mut traj: Trajectory, bits: u64) -> Trajectory {
    traj.ledger.charge_setup(bits);
    for r in &mut traj.records {
        r.cumulative_bits += bits;
    }
    traj
}

/// Runs one method from one initialization.
pub fn run_method(
    cfg: &RunConfig,
    m: &MethodConfig,
    data: &Prepared,
    init: &InitResult,
    init_bits: u64,
) -> anyhow::Result<Trajectory> {
    let x0 = &init.point;
    let eta = m.step_size.unwrap_or(init.suggested_eta);
    let traj: Trajectory = match m.method.baseline() {
        Some(method) => {
            let bc = BaselineConfig {
                method,
                bits_per_coord: m.bits_per_coord.unwrap_or(RAW_BITS),
                step_size: eta,
                rounds: m.rounds.expect("validated"),
                radii: m.radii.into(),
                power_reference: m.power_reference.into(),
            };
            run_baseline(&bc, &data.shards, x0, &data.spectrum)?
        }
        None => {
            let gamma = match m.smoothness {
                Some(g) => g,
                None => over_approx_smoothness(&data.shards)?,
            };
            match m.bits_per_coord {
                Some(bits) => {
                    let sim = Simulation::with_fixed_bits(
                        &data.shards,
                        x0,
                        eta,
                        gamma,
                        bits,
                        RadiusSource::from(m.radii),
                    )?;
                    drive(sim, &data.shards, &data.spectrum, m.rounds.expect("validated"), None)?.into()
                }
                None => {
                    let d = m.init_radius.unwrap_or(init.init_radius);
                    let mu = m.growth.unwrap_or(data.spectrum.gap / 2.0);
                    let eta = m.step_size.unwrap_or(d.cos() / gamma);
                    let eps = cfg.epsilon.expect("validated");
                    let params = ScheduleParams::build(gamma, mu, d, eta, eps)?;
                    let rounds = m.rounds.unwrap_or(params.horizon);
                    let sim = Simulation::with_schedule(&data.shards, x0, &params)?;
                    drive(sim, &data.shards, &data.spectrum, rounds, Some(params))?.into()
                }
            }
        }
    };
    Ok(charge_init(traj, init_bits))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunSummary {
    pub run: usize,
    pub final_cost: f64,
    pub final_dist: f64,
    pub total_bits: u64,
    pub rounds: usize,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct MethodSummary {
    pub label: String,
    pub method: &'static str,
    pub runs: Vec<RunSummary>,
    pub mean_final_cost: f64,
    /// Sample standard deviation; zero for a single run.
    pub std_final_cost: f64,
    pub mean_final_dist: f64,
    pub std_final_dist: f64,
    pub mean_total_bits: f64,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Failure {
    pub label: String,
    pub run: usize,
    pub error: String,
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct Summary {
    pub dim: usize,
    pub rows: usize,
    pub n_nodes: usize,
    pub lambda1: f64,
    pub gap: f64,
    pub methods: Vec<MethodSummary>,
    /// Set when a run failed; `methods` then holds what finished before it.
    pub failure: Option<Failure>,
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn summarize(label: String, method: MethodKind, runs: Vec<RunSummary>) -> MethodSummary {
    let costs: Vec<f64> = runs.iter().map(|r| r.final_cost).collect();
    let dists: Vec<f64> = runs.iter().map(|r| r.final_dist).collect();
    let (mean_final_cost, std_final_cost) = mean_std(&costs);
    let (mean_final_dist, std_final_dist) = mean_std(&dists);
    let mean_total_bits = runs.iter().map(|r| r.total_bits as f64).sum::<f64>() / runs.len() as f64;
    MethodSummary {
        label,
        method: method.name(),
        runs,
        mean_final_cost,
        std_final_cost,
        mean_final_dist,
        std_final_dist,
        mean_total_bits,
    }
}

fn summary_csv(s: &Summary) -> anyhow::Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Row<'a> {
        label: &'a str,
        method: &'a str,
        run: usize,
        final_cost: f64,
        final_dist: f64,
        total_bits: u64,
        rounds: usize,
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for m in &s.methods {
        for r in &m.runs {
            w.serialize(Row {
                label: &m.label,
                method: m.method,
                run: r.run,
                final_cost: r.final_cost,
                final_dist: r.final_dist,
                total_bits: r.total_bits,
                rounds: r.rounds,
            })?;
        }
    }
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn write_summary(cfg: &RunConfig, s: &Summary) -> anyhow::Result<()> {
    let mut json = serde_json::to_vec_pretty(s)?;
    json.push(b'\n');
    write_atomic(&cfg.output.join("summary.json"), &json)?;
    write_atomic(&cfg.output.join("summary.csv"), &summary_csv(s)?)?;
    Ok(())
}

/// Runs every method `repeats` times and writes `<label>.csv`,
/// `<label>.jsonl`, `summary.json` and `summary.csv` under `cfg.output`.
/// On failure the summary is still written, with `failure` set, and the
/// error is returned.
pub fn run_experiment(cfg: &RunConfig) -> anyhow::Result<Summary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.output).with_context(|| format!("creating {}", cfg.output.display()))?;
    let data = prepare(cfg)?;
    let mut summary = Summary {
        dim: data.dim(),
        rows: data.rows,
        n_nodes: cfg.n_nodes,
        lambda1: data.spectrum.lambda1(),
        gap: data.spectrum.gap,
        methods: Vec::new(),
        failure: None,
    };
    let inits = (0..cfg.repeats)
        .map(|run| initialize(cfg, &data, run))
        .collect::<anyhow::Result<Vec<_>>>()?;

    for m in &cfg.methods {
        let label = m.label();
        let mut csv_out = Vec::new();
        let mut jsonl_out = Vec::new();
        let mut runs = Vec::new();
        for (run, (init, bits)) in inits.iter().enumerate() {
            let traj = match run_method(cfg, m, &data, init, *bits) {
                Ok(t) => t,
                Err(e) => {
                    summary.failure = Some(Failure {
                        label: label.clone(),
                        run,
                        error: format!("{e:#}"),
                    });
                    write_summary(cfg, &summary)?;
                    bail!("{label}, run {run}: {e:#}");
                }
            };
            let mut chunk = trace_csv(&label, run, &traj.records)?;
            if run > 0 {
                // Keep one header line per file.
                let header_end = chunk.iter().position(|&b| b == b'\n').map_or(0, |i| i + 1);
                chunk.drain(..header_end);
            }
            csv_out.extend_from_slice(&chunk);
            jsonl_out.extend_from_slice(&trace_jsonl(&label, run, &traj.records));
            runs.push(RunSummary {
                run,
                final_cost: traj.final_cost(),
                final_dist: traj.final_distance(),
                total_bits: traj.ledger.total(),
                rounds: traj.records.len().saturating_sub(1),
            });
        }
        write_atomic(&cfg.output.join(format!("{label}.csv")), &csv_out)?;
        write_atomic(&cfg.output.join(format!("{label}.jsonl")), &jsonl_out)?;
        summary.methods.push(summarize(label, m.method, runs));
    }
    write_summary(cfg, &summary)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_statistics() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[7.0]), (7.0, 0.0));
    }
}
