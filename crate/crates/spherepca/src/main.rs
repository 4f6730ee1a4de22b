use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;
use spherepca::config::RunConfig;
use spherepca::csv_io::{write_atomic, write_matrix};
use spherepca::experiment::run_experiment;
use spherepca::verify;
use spherepca_core::instance::{synth_instance, SyntheticSpec};

#[derive(Parser)]
#[command(name = "spherepca", version, about = "Quantized distributed leading-eigenvector experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Write a synthetic data matrix with a prescribed spectrum.
    Synth {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long, default_value_t = 2.0)]
        lambda1: f64,
        /// `(λ₁ − λ₂)/λ₁`
        #[arg(long, default_value_t = 0.5)]
        gap_ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; the spectrum goes to the same path with `.spectrum.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the acceptance checks.
    Verify {
        /// Criterion numbers to run (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Serialize)]
struct SpectrumFile<'a> {
    eigenvalues: &'a [f64],
    leading_vector: &'a [f64],
    gap: f64,
    redraws: usize,
}

fn synth(dim: usize, rows: usize, lambda1: f64, gap_ratio: f64, seed: u64, out: PathBuf) -> anyhow::Result<()> {
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let inst = synth_instance(&SyntheticSpec::with_gap(dim, lambda1, gap_ratio, rows, seed))?;
    write_matrix(&out, &inst.rows).with_context(|| format!("writing {}", out.display()))?;
    let spec_path = out.with_extension("spectrum.json");
    let file = SpectrumFile {
        eigenvalues: &inst.spectrum.eigenvalues,
        leading_vector: inst.spectrum.leading_vector.coords(),
        gap: inst.spectrum.gap,
        redraws: inst.redraws,
    };
    let mut json = serde_json::to_vec_pretty(&file)?;
    json.push(b'\n');
    write_atomic(&spec_path, &json)?;
    println!("wrote {} and {}", out.display(), spec_path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => RunConfig::load(&config).and_then(|cfg| {
            let summary = run_experiment(&cfg)?;
            for m in &summary.methods {
                println!(
                    "{:<26} final cost {:.6e} ± {:.1e}  dist {:.3e}  bits {:.0}",
                    m.label, m.mean_final_cost, m.std_final_cost, m.mean_final_dist, m.mean_total_bits
                );
            }
            println!("results in {}", cfg.output.display());
            Ok(true)
        }),
        Command::Synth {
            dim,
            rows,
            lambda1,
            gap_ratio,
            seed,
            out,
        } => synth(dim, rows, lambda1, gap_ratio, seed, out).map(|()| true),
        Command::Verify { only } => {
            let mut all = true;
            for c in verify::ALL
                .iter()
                .enumerate()
                .filter(|(i, _)| only.is_empty() || only.contains(&(*i as u8 + 1)))
            {
                let outcome = (c.1)();
                println!("{}", outcome.line());
                all &= outcome.passed;
            }
            Ok(all)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
