use std::fs;
use std::path::Path;
use std::process::Command;

use spherepca::config::RunConfig;
use spherepca::csv_io::read_matrix;
use spherepca::experiment::{mean_std, run_experiment};

fn config(dir: &Path, body: &str) -> RunConfig {
    let text = format!("output = \"{}\"\n{body}", dir.join("out").display());
    RunConfig::from_toml(&text).unwrap()
}

const SMALL_DATA: &str = r#"
[data.synthetic]
dim = 6
rows = 120
lambda1 = 2.0
gap_ratio = 0.5
"#;

fn read_csv(path: &Path) -> Vec<csv::StringRecord> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.records().map(Result::unwrap).collect()
}

fn header(path: &Path) -> Vec<String> {
    let mut rdr = csv::Reader::from_path(path).unwrap();
    rdr.headers().unwrap().iter().map(str::to_owned).collect()
}

#[test]
fn csv_example_round_trips_through_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    fs::write(&path, "1,2\n3,4\n5,6").unwrap();
    let m = read_matrix(&path).unwrap();
    assert_eq!((m.rows(), m.cols()), (3, 2));
    assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);

    fs::write(&path, "a,b\n1,2\n3,4,5\n").unwrap();
    let msg = read_matrix(&path).unwrap_err().to_string();
    assert!(msg.contains("row 3"), "{msg}");
}

#[test]
fn single_method_one_round() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &format!(
            "seed = 1\nn_nodes = 3\n{SMALL_DATA}\n[[methods]]\nmethod = \"quantized_rgd\"\nbits_per_coord = 8\nradii = \"measured\"\nrounds = 0\n"
        ),
    );
    let summary = run_experiment(&cfg).unwrap();
    let rows = read_csv(&cfg.output.join("quantized_rgd.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(&rows[0][2], "0");
    assert_eq!(summary.methods.len(), 1);
    assert_eq!(summary.methods[0].runs[0].rounds, 0);
    let jsonl = fs::read_to_string(cfg.output.join("quantized_rgd.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 1);
    let summary_rows = read_csv(&cfg.output.join("summary.csv"));
    assert_eq!(summary_rows.len(), 1);
    assert!(cfg.output.join("summary.json").exists());
}

const FOUR_METHODS: &str = r#"
[[methods]]
method = "quantized_rgd"
bits_per_coord = 6
radii = "measured"
rounds = 40

[[methods]]
method = "full_precision_rgd"
rounds = 40

[[methods]]
method = "euclidean_diff_quant"
bits_per_coord = 6
radii = "measured"
rounds = 40

[[methods]]
method = "quantized_power_iteration"
bits_per_coord = 6
radii = "measured"
rounds = 40
"#;

#[test]
fn four_methods_share_round_indices() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("seed = 3\nn_nodes = 4\n{SMALL_DATA}\n{FOUR_METHODS}"));
    let summary = run_experiment(&cfg).unwrap();
    assert_eq!(summary.methods.len(), 4);
    for m in &summary.methods {
        let path = cfg.output.join(format!("{}.csv", m.label));
        assert_eq!(
            header(&path),
            ["method", "run", "t", "cost", "dist", "sum_error", "budget", "uplink_bits", "downlink_bits", "cumulative_bits"]
        );
        let ts: Vec<usize> = read_csv(&path).iter().map(|r| r[2].parse().unwrap()).collect();
        assert_eq!(ts, (0..=40).collect::<Vec<_>>(), "{}", m.label);
    }
}

#[test]
fn repeated_runs_report_sample_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        &format!(
            "seed = 5\nn_nodes = 4\nrepeats = 10\n{SMALL_DATA}\n[[methods]]\nmethod = \"quantized_rgd\"\nbits_per_coord = 6\nradii = \"measured\"\nrounds = 15\n"
        ),
    );
    let summary = run_experiment(&cfg).unwrap();
    let rows = read_csv(&cfg.output.join("quantized_rgd.csv"));
    assert_eq!(rows.len(), 10 * 16);
    // Final cost of each run, recomputed from its trace rows.
    let finals: Vec<f64> = (0..10)
        .map(|run| {
            rows.iter()
                .filter(|r| r[1].parse::<usize>().unwrap() == run)
                .max_by_key(|r| r[2].parse::<usize>().unwrap())
                .map(|r| r[3].parse::<f64>().unwrap())
                .unwrap()
        })
        .collect();
    let n = finals.len() as f64;
    let mean = finals.iter().sum::<f64>() / n;
    let std = (finals.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let m = &summary.methods[0];
    assert!((m.mean_final_cost - mean).abs() <= 1e-12 * mean.abs());
    assert!((m.std_final_cost - std).abs() <= 1e-9 * std.max(1e-300));
    assert!(std > 0.0, "runs should differ by initialization");
    assert_eq!(mean_std(&finals).0, m.mean_final_cost);
}

#[test]
fn summary_totals_match_trace_ledgers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), &format!("seed = 9\nn_nodes = 3\nrepeats = 2\n{SMALL_DATA}\n{FOUR_METHODS}"));
    let summary = run_experiment(&cfg).unwrap();
    for m in &summary.methods {
        let rows = read_csv(&cfg.output.join(format!("{}.csv", m.label)));
        for r in &m.runs {
            let last = rows
                .iter()
                .rfind(|row| row[1].parse::<usize>().unwrap() == r.run)
                .unwrap();
            assert_eq!(last[9].parse::<u64>().unwrap(), r.total_bits, "{}", m.label);
        }
    }
}

#[test]
fn pipeline_is_byte_deterministic() {
    let run = |dir: &Path| {
        let cfg = config(dir, &format!("seed = 11\nn_nodes = 4\nrepeats = 2\n{SMALL_DATA}\n{FOUR_METHODS}"));
        run_experiment(&cfg).unwrap();
        let mut files: Vec<_> = fs::read_dir(&cfg.output).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files
            .into_iter()
            .map(|p| (p.file_name().unwrap().to_owned(), fs::read(&p).unwrap()))
            .collect::<Vec<_>>()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (fa, fb) = (run(a.path()), run(b.path()));
    assert_eq!(fa.len(), 10);
    assert_eq!(fa, fb);
}

#[test]
fn failure_leaves_a_marked_summary() {
    let dir = tempfile::tempdir().unwrap();
    // One bit per coordinate is below 2·√d, so the second method cannot start.
    let cfg = config(
        dir.path(),
        &format!(
            "seed = 2\nn_nodes = 2\n{SMALL_DATA}\n[[methods]]\nmethod = \"full_precision_rgd\"\nrounds = 2\n\n[[methods]]\nmethod = \"quantized_rgd\"\nbits_per_coord = 1\nrounds = 2\n"
        ),
    );
    assert!(run_experiment(&cfg).is_err());
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(cfg.output.join("summary.json")).unwrap()).unwrap();
    assert_eq!(json["failure"]["label"], "quantized_rgd");
    assert_eq!(json["methods"].as_array().unwrap().len(), 1);
}

#[test]
fn cli_synth_then_run() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data.csv");
    let exe = env!("CARGO_BIN_EXE_spherepca");
    let status = Command::new(exe)
        .args(["synth", "--dim", "5", "--rows", "80", "--seed", "4", "--out"])
        .arg(&data)
        .status()
        .unwrap();
    assert!(status.success());
    let spectrum: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("data.spectrum.json")).unwrap()).unwrap();
    assert_eq!(spectrum["eigenvalues"].as_array().unwrap().len(), 5);
    assert_eq!(read_matrix(&data).unwrap().rows(), 80);

    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "seed = 1\nn_nodes = 2\nepsilon = 0.3\noutput = \"out\"\n\n[data.csv]\npath = \"data.csv\"\n\n[[methods]]\nmethod = \"quantized_rgd\"\n",
    )
    .unwrap();
    let out = Command::new(exe).arg("run").arg(&cfg).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/quantized_rgd.csv").exists());

    let bad = Command::new(exe).arg("run").arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("error"));
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut count = 0;
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let cfg = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e:#}", path.display()));
            assert!(cfg.output.starts_with(&dir));
            count += 1;
        }
    }
    assert_eq!(count, 2);
}
