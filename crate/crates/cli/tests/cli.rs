use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use bbnet::analysis::{estimate_prevalence, theorem1_lower_bound, SisRun};
use bbnet::graph::{generate_ba, BaParams};
use bbnet::rng::derive_seed;
use serde_json::Value;

const FAST: [&str; 4] = ["--max-len", "10", "--set", "analysis.c4=-5"];

fn bbnet(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bbnet")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn ok_json(out: &Output) -> Value {
    assert!(out.status.success(), "status {:?}, stderr: {}", out.status, String::from_utf8_lossy(&out.stderr));
    assert!(out.stderr.is_empty(), "unexpected stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().count(), 1, "stdout should be one JSON line: {text}");
    serde_json::from_str(&text).expect("stdout is JSON")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn gen_graph_writes_requested_nodes_and_repeats() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok_json(&bbnet(&["gen-graph", "--ba", "--n", "1000", "--m", "3", "--seed", "7"], dir.path()));
    assert_eq!(a["degrees"]["nodes"], 1000);
    let first = fs::read(dir.path().join("ba-1000-3-7.graph")).unwrap();
    assert!(String::from_utf8_lossy(&first).starts_with("static 1000 1\n"));
    ok_json(&bbnet(&["gen-graph", "--ba", "--n", "1000", "--m", "3", "--seed", "7", "--out", "b.graph"], dir.path()));
    assert_eq!(first, fs::read(dir.path().join("b.graph")).unwrap());
}

#[test]
fn gen_graph_summary_shows_heavy_tail() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok_json(&bbnet(&["gen-graph", "--ba", "--n", "10000", "--m", "3", "--seed", "1", "--out", "g"], dir.path()));
    let max = a["degrees"]["max_degree"].as_f64().unwrap();
    let mean = a["degrees"]["mean_degree"].as_f64().unwrap();
    assert!(max > 10.0 * mean, "max {max}, mean {mean}");
}

#[test]
fn gen_graph_round_trips_a_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("in.tvg"), "tvg 3 3\n0 0 1 1\n1 1 2 2\n").unwrap();
    let a = ok_json(&bbnet(&["gen-graph", "--input", "in.tvg", "--out", "out.tvg"], dir.path()));
    assert_eq!(a["nodes"], 3);
    assert_eq!(a["timed_edges"], 2);
}

#[test]
fn bad_graph_parameters_exit_with_config_status() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbnet(&["gen-graph", "--ba", "--n", "5", "--m", "9", "--seed", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn seed_is_mandatory_for_run_sweep_and_scan() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "--out", "o"],
        vec!["sweep", "--lambdas", "0.5", "--out", "o"],
        vec!["scan", "--out", "o"],
    ] {
        let out = bbnet(&args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn minimal_run_is_fast_and_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--seed", "3", "--set", "graph.n=8", "--set", "graph.m=2", "--out", "r"];
    args.extend(FAST);
    let t0 = Instant::now();
    let s = ok_json(&bbnet(&args, dir.path()));
    assert!(t0.elapsed().as_secs_f64() < 1.0, "took {:?}", t0.elapsed());
    assert_eq!(s["n"], 8);
    for f in ["config.toml", "traces.csv", "traces.json", "prevalence.csv", "eac.csv", "eeac.csv", "bound_report.csv", "summary.json"] {
        assert!(dir.path().join("r").join(f).exists(), "{f} missing");
    }
    let trace = fs::read_to_string(dir.path().join("r/traces.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("trial,mapping,cycle,node,tag,origin,value"));
}

#[test]
fn repeated_runs_and_job_counts_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--seed", "11", "--set", "graph.n=48", "--mappings", "3", "--trials", "2"];
    for (out, jobs) in [("a", "1"), ("b", "1"), ("c", "4")] {
        let mut args = vec!["--jobs", jobs, "run", "--out", out];
        args.extend(base);
        args.extend(FAST);
        ok_json(&bbnet(&args, dir.path()));
    }
    let a = read_dir_sorted(&dir.path().join("a"));
    assert_eq!(a, read_dir_sorted(&dir.path().join("b")));
    assert_eq!(a, read_dir_sorted(&dir.path().join("c")));
}

#[test]
fn dry_run_prints_resolved_config_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&bbnet(&["run", "--seed", "1", "--dry-run", "--set", "graph.n=16", "--out", "never"], dir.path()));
    assert_eq!(v["config"]["graph"]["n"], 16);
    assert_eq!(v["config"]["seed"], 1);
    assert!(v["schedule"]["cycles"].as_u64().unwrap() >= 2);
    assert!(fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn schedule_violation_prints_the_inequality() {
    let dir = tempfile::tempdir().unwrap();
    let out = bbnet(
        &["run", "--seed", "1", "--dry-run", "--set", "schedule.c0=2", "--set", "schedule.cycles={kind=\"linear\",slope=1,shift=0}"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("c(z + f + 2) >= c0 + z + f + 2 fails"), "{err}");
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("g.graph"), "static 4\n0 1\n1 2\n2 3\n").unwrap();
    fs::write(
        dir.path().join("exp.toml"),
        "seed = 99\n[graph]\nkind = \"file\"\npath = \"g.graph\"\n[run]\nmappings = 2\n[schedule]\nbudget = { kind = \"constant\", value = 3 }\n",
    )
    .unwrap();
    let v = ok_json(&bbnet(&["run", "--config", "exp.toml", "--seed", "5", "--trials", "3", "--dry-run"], dir.path()));
    assert_eq!(v["n"], 4);
    assert_eq!(v["config"]["seed"], 5);
    assert_eq!(v["config"]["run"]["mappings"], 2);
    assert_eq!(v["config"]["run"]["trials"], 3);
    assert_eq!(v["schedule"]["x"], 5);
}

#[test]
fn analyze_check_passes_then_catches_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["run", "--seed", "4", "--set", "graph.n=32", "--mappings", "2", "--out", "r"];
    args.extend(FAST);
    ok_json(&bbnet(&args, dir.path()));
    let v = ok_json(&bbnet(&["analyze", "r", "--check"], dir.path()));
    assert_eq!(v["passed"], true);

    let path = dir.path().join("r/traces.csv");
    let text = fs::read_to_string(&path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let row = &mut lines[1];
    let cut = row.rfind(',').unwrap();
    let value: u64 = row[cut + 1..].parse().unwrap();
    row.replace_range(cut + 1.., &(value + 1000).to_string());
    fs::write(&path, lines.join("\n") + "\n").unwrap();

    let out = bbnet(&["analyze", "r", "--check"], dir.path());
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], false);
    let out = bbnet(&["analyze", "r"], dir.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn analyze_missing_dir_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(bbnet(&["analyze", "nowhere"], dir.path()).status.code(), Some(2));
}

#[test]
fn single_cell_sweep_matches_the_library_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "--seed", "8", "--lambdas", "0.5", "--ms", "2", "--ns", "300", "--trials", "3", "--horizon", "60", "--out", "s"];
    let v = ok_json(&bbnet(&args, dir.path()));
    let net = generate_ba(BaParams::new(300, 2, derive_seed(8, &[2, 300]))).unwrap();
    let e = estimate_prevalence(&net, &SisRun::new(0.5, 60), 3, derive_seed(8, &[2, 300]), 20, 0.005).unwrap();
    assert_eq!(v["rows"][0]["rho_hat"].as_f64(), e.rho_hat, "{v}");
    assert_eq!(v["cells"], 1);
}

#[test]
fn sweep_is_job_count_invariant_and_records_failed_cells() {
    let dir = tempfile::tempdir().unwrap();
    let grid = ["--seed", "2", "--lambdas", "-1,0.4,0.6", "--ns", "200", "--trials", "2", "--horizon", "50"];
    for (out, jobs) in [("a", "1"), ("b", "3")] {
        let mut args = vec!["--jobs", jobs, "sweep", "--out", out];
        args.extend(grid);
        let o = bbnet(&args, dir.path());
        assert!(o.status.success());
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["failed"], 1);
        assert!(String::from_utf8_lossy(&o.stderr).contains("lambda=-1"));
    }
    let a = fs::read(dir.path().join("a/sweep.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b/sweep.csv")).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 4);
}

#[test]
fn bound_with_explicit_c5_matches_the_formula() {
    let dir = tempfile::tempdir().unwrap();
    let v = ok_json(&bbnet(
        &["bound", "--n", "512", "--x", "12", "--tau", "0.9", "--omega", "0.41", "--a-w", "3", "--c5", "-8", "--lambda", "0.5"],
        dir.path(),
    ));
    let expected = theorem1_lower_bound(512, 12, 0.9, 0.41, 3.0, -8.0).unwrap();
    assert_eq!(v["bound"].as_f64(), Some(expected));
    assert_eq!(v["corollary"]["smallest_m"], 3);
    let out = bbnet(&["bound", "--n", "512", "--x", "12", "--tau", "1.5", "--omega", "0.41", "--a-w", "3", "--c5", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bound_calibrates_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["bound", "--n", "256", "--x", "10", "--tau", "0.95"];
    args.extend(FAST);
    let v = ok_json(&bbnet(&args, dir.path()));
    assert_eq!(v["constants"]["c4"], -5);
    assert_eq!(v["cycles"], 10);
    assert!(v["bound"].as_f64().is_some());
}

#[test]
fn scan_reports_points_for_every_start_and_rung() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["scan", "--seed", "0", "--starts", "0,1", "--ladder", "32,64", "--out", "s"];
    args.extend(FAST);
    let v = ok_json(&bbnet(&args, dir.path()));
    assert_eq!(v["points"].as_array().unwrap().len(), 4);
    assert!(v["description"].is_string());
    let csv = fs::read_to_string(dir.path().join("s/scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("s/eeac_ladder.csv").exists());
}

#[test]
fn enumerate_uses_the_cache_directory() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let out = Command::new(env!("CARGO_BIN_EXE_bbnet"))
        .args(["enumerate", "--max-len", "10", "--cycles", "3"])
        .env("BBNET_CACHE_DIR", &cache)
        .output()
        .unwrap();
    let v = ok_json(&out);
    assert_eq!(v["c0"], 3);
    assert_eq!(v["omega"].as_array().unwrap().len(), 3);
    assert_eq!(fs::read_dir(&cache).unwrap().count(), 1);
}
