use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use recapture_hmm::io;

fn recapture(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recapture"))
        .args(args)
        .env_remove("RECAPTURE_THREADS")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn missing_out_is_a_usage_error() {
    let o = recapture(&["fit", "histories.csv"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--out"));
}

#[test]
fn unknown_subcommand_and_design() {
    assert_eq!(recapture(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(recapture(&["simulate", "--design", "grid", "--out", "x"]).status.code(), Some(2));
}

#[test]
fn malformed_history_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("h.csv");
    fs::write(&data, "id,t,x\na,0,1\na,1,7\n").unwrap();
    let o = recapture(&["fit", p(&data), "--out", p(&dir.path().join("fit"))]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn missing_input_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = recapture(&["fit", p(&dir.path().join("absent.csv")), "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn burnin_past_iterations_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("h.csv");
    fs::write(&data, "id,t,x\na,0,1\na,1,0\n").unwrap();
    let o = recapture(&["fit", p(&data), "--iters", "10", "--burnin", "20", "--out", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_fit_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    let fit = dir.path().join("fit");
    let diag = dir.path().join("diag");

    let o = recapture(&["simulate", "--design", "asymptotic-n", "--size", "6", "--seed", "4", "--out", p(&sim)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["histories.csv", "truth.csv", "config.toml"] {
        assert!(sim.join(f).exists(), "{f}");
    }
    let config = io::load_config(&sim.join("config.toml")).unwrap();
    assert_eq!(config.seed, 4);
    assert_eq!(config.simulation.unwrap().individuals, 6);

    let o = recapture(&[
        "fit",
        p(&sim.join("histories.csv")),
        "--truth",
        p(&sim.join("truth.csv")),
        "--iters",
        "60",
        "--burnin",
        "20",
        "--thin",
        "2",
        "--seed",
        "9",
        "--threads",
        "2",
        "--quiet",
        "--out",
        p(&fit),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let table = io::read_samples(fs::File::open(fit.join("samples.csv")).unwrap()).unwrap();
    assert_eq!(table.samples.len(), 20);
    assert_eq!(table.ids.len(), 6);
    assert!(table.samples.iter().all(|s| (s.iteration - 20) % 2 == 0));
    let summary = io::read_summary(fs::File::open(fit.join("summary.csv")).unwrap()).unwrap();
    assert_eq!(summary.len(), 3 * 4 + 3);
    let individuals = io::read_truth(fs::File::open(fit.join("individuals.csv")).unwrap()).unwrap();
    assert_eq!(individuals.ids, table.ids);

    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(fit.join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["seed"], 9);
    assert_eq!(meta["threads"], 2);
    assert_eq!(meta["draws"], 20);
    assert_eq!(meta["config"]["iterations"], 60);
    for block in ["pi", "gHH", "gAA"] {
        let a = meta["acceptance"][block].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&a));
        assert!(meta["truth_correlation"][block].is_number());
    }
    assert!(meta["wall_time_secs"].as_f64().unwrap() >= 0.0);

    let o = recapture(&[
        "diagnose",
        p(&fit.join("samples.csv")),
        "--truth",
        p(&sim.join("truth.csv")),
        "--config",
        p(&sim.join("config.toml")),
        "--out",
        p(&diag),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["trace_pi_a.svg", "density_gAA_logit_sd.svg", "scatter_gHH.svg", "summary.txt"] {
        assert!(diag.join(f).exists(), "{f}");
    }
    let summary = fs::read_to_string(diag.join("summary.txt")).unwrap();
    assert!(summary.contains("correlation of posterior means with truth"));
}

#[test]
fn fit_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("sim");
    assert!(recapture(&["simulate", "--design", "asymptotic-T", "--horizon", "80", "--out", p(&sim)]).status.success());
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(format!("fit{threads}"));
        let o = recapture(&[
            "fit",
            p(&sim.join("histories.csv")),
            "--iters",
            "30",
            "--burnin",
            "10",
            "--threads",
            threads,
            "-q",
            "--out",
            p(&out),
        ]);
        assert!(o.status.success());
        outputs.push(fs::read(out.join("samples.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_recapture"))
        .args(["experiment", "horizon", "--horizon", "20", "--iters", "12", "--burnin", "2", "--out", p(dir.path())])
        .env("RECAPTURE_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("metadata.json")).unwrap()).unwrap();
    assert_eq!(meta["threads"], 2);
    let csv = fs::read_to_string(dir.path().join("horizon.csv")).unwrap();
    assert!(csv.starts_with("T,block,correlation"));
    assert!(!csv.contains("wall"));
}
