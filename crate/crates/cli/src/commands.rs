use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use bbnet::analysis::{
    calibrate_experiment, eac_per_node, estimate_prevalence, from_micro, measure, prevalence_law_slope, smallest_m,
    theorem1_lower_bound, write_bound_report_csv, write_eeac_ladder_csv, write_prevalence_csv, write_sweep_csv,
    BoundReport, Calibration, GrowthCondition, Measurement, RunSummary, ScanPoint, SisRun, SweepRow,
};
use bbnet::graph::{generate_ba, read_graph, write_static, write_temporal, BaParams, DegreeSummary, GraphFile};
use bbnet::machine::{omega_profile, ComplexityIndex, EnumerationTable};
use bbnet::protocol::{
    hex_digest, read_trace_rows, run_experiment, write_traces_csv, ExperimentConfig, GraphSource, ResolvedExperiment,
    TraceRow,
};
use bbnet::rng::derive_seed;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config;
use crate::failure::Failure;
use crate::{AnalyzeArgs, BoundArgs, EnumerateArgs, GenGraphArgs, RunArgs, ScanArgs, SweepArgs};

pub const EAC_HEADER: &str = "mapping,trial,node,member,eac";
pub const SCAN_HEADER: &str = "start,n,eeac,bound";
pub const FIT_HEADER: &str = "m,n,cells,slope,target,relative_error";

/// One JSON line on stdout. A closed pipe is not an error.
fn emit<T: Serialize>(value: &T) -> Result<(), Failure> {
    let line = serde_json::to_string(value)?;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{line}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?);
    f(&mut out)?;
    out.flush()?;
    Ok(())
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))
}

pub fn gen_graph(a: &GenGraphArgs) -> Result<(), Failure> {
    if let Some(input) = &a.input {
        let file = File::open(input).map_err(|e| Failure::Config(format!("cannot open {}: {e}", input.display())))?;
        let graph = read_graph(BufReader::new(file))?;
        let out = a.out.clone().ok_or_else(|| Failure::Config("--out is required with --input".into()))?;
        let g = graph.temporal(a.instants);
        write_file(&out, |w| match &graph {
            GraphFile::Static { network, .. } => write_static(network, g.time_count(), w),
            GraphFile::Varying(_) => write_temporal(&g, w),
        })?;
        let degrees = match &graph {
            GraphFile::Static { network, .. } => Some(DegreeSummary::of(network, 1)),
            GraphFile::Varying(_) => None,
        };
        return emit(&json!({
            "path": out,
            "nodes": g.node_count(),
            "instants": g.time_count(),
            "timed_edges": g.edges().len(),
            "degrees": degrees,
        }));
    }
    if !a.ba {
        return Err(Failure::Config("pass --ba with --n, --m and --seed, or --input".into()));
    }
    let (n, m, seed) = match (a.n, a.m, a.seed) {
        (Some(n), Some(m), Some(s)) => (n, m, s),
        _ => return Err(Failure::Config("--ba needs --n, --m and --seed".into())),
    };
    let mut params = BaParams::new(n, m, seed);
    if let Some(m0) = a.m0 {
        params.m0 = m0;
    }
    let net = generate_ba(params)?;
    let out = a.out.clone().unwrap_or_else(|| format!("ba-{n}-{m}-{seed}.graph").into());
    write_file(&out, |w| write_static(&net, a.instants.unwrap_or(1), w))?;
    emit(&json!({ "path": out, "degrees": DegreeSummary::of(&net, m) }))
}

pub fn enumerate(a: &EnumerateArgs, cache: Option<&Path>) -> Result<(), Failure> {
    if a.cycles == 0 {
        return Err(Failure::Config("--cycles must be at least 1".into()));
    }
    let table = EnumerationTable::load_or_build(cache, a.max_len, a.input, a.step_limit)?;
    let index = if a.input == 0 {
        ComplexityIndex::from_table(&table)
    } else {
        ComplexityIndex::from_table(&EnumerationTable::load_or_build(cache, a.max_len, 0, a.step_limit)?)
    };
    let omega: Vec<f64> = omega_profile(a.input, a.cycles, a.max_len, a.step_limit)?.iter().map(|d| d.value()).collect();
    let mut busy_beaver = BTreeMap::new();
    for k in (4..=a.max_len).step_by(2) {
        let (value, program) = table.busy_beaver(k)?;
        busy_beaver.insert(k.to_string(), json!({ "value": value, "program": program.map(|p| p.bit_string()) }));
    }
    let frontier = match a.frontier {
        Some(limit) => {
            let other = EnumerationTable::load_or_build(cache, a.max_len, a.input, limit)?;
            Some(json!({ "step_limit": limit, "differing": table.frontier(&other).len() }))
        }
        None => None,
    };
    if let Some(out) = &a.out {
        write_file(out, |w| table.write_csv(w))?;
    }
    emit(&json!({
        "max_len": a.max_len,
        "input": a.input,
        "step_limit": a.step_limit,
        "programs": table.entries.len(),
        "halting": table.entries.iter().filter(|e| e.outcome.halted).count(),
        "kraft": table.kraft_mass().value(),
        "omega": omega,
        "c0": index.complexity(0),
        "busy_beaver": busy_beaver,
        "frontier": frontier,
    }))
}

fn calibrate_for(exp: &ResolvedExperiment, cache: Option<&Path>) -> Result<Calibration, Failure> {
    Ok(calibrate_experiment(&exp.config, exp.schedule.x, exp.schedule.cycles, cache)?)
}

fn measure_run(exp: &ResolvedExperiment, calib: &Calibration) -> Result<(Measurement, bbnet::protocol::ExperimentOutput), Failure> {
    let out = run_experiment(exp)?;
    let a = &exp.config.analysis;
    let m = measure(exp, &out, &calib.index, |c| calib.omega_at(c), &calib.constants, a.window, a.tolerance)?;
    Ok((m, out))
}

pub fn run(a: &RunArgs, cache: Option<&Path>) -> Result<(), Failure> {
    let loaded = config::load(&a.cfg, Some(a.seed))?;
    let exp = loaded.config.resolve(loaded.base_dir.as_deref())?;
    if a.dry_run {
        return emit(&json!({ "config": exp.config, "schedule": exp.schedule, "n": exp.population.len() }));
    }
    let dir = a.out.as_deref().ok_or_else(|| Failure::Config("--out is required".into()))?;
    let calib = calibrate_for(&exp, cache)?;
    let (m, out) = measure_run(&exp, &calib)?;
    let index = &calib.index;

    create_dir(dir)?;
    fs::write(dir.join("config.toml"), exp.config.to_toml())?;
    let mut trace_csv = Vec::new();
    write_traces_csv(&out.traces, &mut trace_csv)?;
    let digest = hex_digest(&trace_csv);
    fs::write(dir.join("traces.csv"), &trace_csv)?;
    let sidecar = json!({
        "seed": exp.seed,
        "config": exp.config,
        "schedule": exp.schedule,
        "traces": out.traces.iter().map(|t| json!({
            "mapping": t.mapping_index,
            "trial": t.trial,
            "seed": t.seed,
            "digest": t.digest(),
        })).collect::<Vec<_>>(),
    });
    fs::write(dir.join("traces.json"), serde_json::to_string_pretty(&sidecar)?)?;
    write_file(&dir.join("prevalence.csv"), |w| write_prevalence_csv(&m.prevalence, w))?;
    let mut eac_rows = Vec::new();
    for t in &out.traces {
        eac_rows.push((t, eac_per_node(t, &out.isolated, |v| index.complexity(v))?));
    }
    write_file(&dir.join("eac.csv"), |w| {
        writeln!(w, "{EAC_HEADER}")?;
        for (t, eac) in &eac_rows {
            for (v, d) in eac.iter().enumerate() {
                writeln!(w, "{},{},{v},{},{d}", t.mapping_index, t.trial, t.mapping.member(v))?;
            }
        }
        Ok(())
    })?;
    write_file(&dir.join("eeac.csv"), |w| write_eeac_ladder_csv(std::slice::from_ref(&m), w))?;
    write_file(&dir.join("bound_report.csv"), |w| write_bound_report_csv(std::slice::from_ref(&m.bound), w))?;
    let summary = RunSummary::new(&m, out.traces.len(), &calib.constants, digest);
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    emit(&summary)
}

#[derive(Debug, Serialize)]
struct Fit {
    m: usize,
    n: usize,
    cells: usize,
    slope: Option<f64>,
    target: f64,
    relative_error: Option<f64>,
}

pub fn sweep(a: &SweepArgs) -> Result<(), Failure> {
    if a.lambdas.is_empty() || a.ms.is_empty() || a.ns.is_empty() {
        return Err(Failure::Config("the (lambda, m, n) grid is empty".into()));
    }
    let mut cells = Vec::new();
    for &m in &a.ms {
        for &n in &a.ns {
            for &lambda in &a.lambdas {
                cells.push((m, n, lambda));
            }
        }
    }
    let networks: BTreeMap<(usize, usize), Result<_, String>> = a
        .ms
        .iter()
        .flat_map(|&m| a.ns.iter().map(move |&n| (m, n)))
        .map(|(m, n)| {
            let net = generate_ba(BaParams::new(n, m, derive_seed(a.seed, &[m as u64, n as u64])));
            ((m, n), net.map_err(|e| e.to_string()))
        })
        .collect();
    let rows: Vec<SweepRow> = cells
        .par_iter()
        .map(|&(m, n, lambda)| {
            let run = SisRun { lambda, horizon: a.horizon, initial_fraction: a.initial_fraction };
            let result = networks[&(m, n)].as_ref().map_err(Clone::clone).and_then(|net| {
                estimate_prevalence(net, &run, a.trials, derive_seed(a.seed, &[m as u64, n as u64]), a.window, a.tolerance)
                    .map_err(|e| e.to_string())
            });
            match result {
                Ok(e) => SweepRow { lambda, m, n, estimate: Some(e), error: None },
                Err(e) => SweepRow { lambda, m, n, estimate: None, error: Some(e) },
            }
        })
        .collect();
    for r in rows.iter().filter(|r| r.error.is_some()) {
        eprintln!("cell lambda={} m={} n={} failed: {}", r.lambda, r.m, r.n, r.error.as_deref().unwrap_or(""));
    }
    let fits: Vec<Fit> = networks
        .keys()
        .map(|&(m, n)| {
            let pts: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.m == m && r.n == n)
                .filter_map(|r| r.estimate.as_ref().and_then(|e| e.rho_hat).map(|rho| (r.lambda, rho)))
                .collect();
            let slope = prevalence_law_slope(&pts).ok();
            let target = -1.0 / m as f64;
            Fit { m, n, cells: pts.len(), slope, target, relative_error: slope.map(|s| (s - target).abs() / target.abs()) }
        })
        .collect();

    create_dir(&a.out)?;
    write_file(&a.out.join("sweep.csv"), |w| write_sweep_csv(&rows, w))?;
    write_file(&a.out.join("fit.csv"), |w| {
        writeln!(w, "{FIT_HEADER}")?;
        for f in &fits {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{},{}", f.m, f.n, f.cells, opt(f.slope), f.target, opt(f.relative_error))?;
        }
        Ok(())
    })?;
    let summary = json!({
        "seed": a.seed,
        "cells": rows.len(),
        "failed": rows.iter().filter(|r| r.error.is_some()).count(),
        "trials": a.trials,
        "horizon": a.horizon,
        "rows": rows.iter().map(|r| json!({
            "lambda": r.lambda,
            "m": r.m,
            "n": r.n,
            "rho_hat": r.estimate.as_ref().and_then(|e| e.rho_hat),
            "delta_star": r.estimate.as_ref().and_then(|e| e.stationarity.delta_star),
            "error": r.error,
        })).collect::<Vec<_>>(),
        "fits": fits,
    });
    fs::write(a.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    emit(&summary)
}

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

pub fn analyze(a: &AnalyzeArgs) -> Result<(), Failure> {
    let read = |name: &str| {
        fs::read(a.dir.join(name)).map_err(|e| Failure::Config(format!("cannot read {}: {e}", a.dir.join(name).display())))
    };
    let summary: RunSummary = serde_json::from_slice(&read("summary.json")?)
        .map_err(|e| Failure::Config(format!("summary.json: {e}")))?;
    let cfg = ExperimentConfig::from_toml(&String::from_utf8_lossy(&read("config.toml")?))?;
    let trace_bytes = read("traces.csv")?;
    let rows = read_trace_rows(BufReader::new(trace_bytes.as_slice()))?;
    let mut checks = Vec::new();

    let digest = hex_digest(&trace_bytes);
    checks.push(check("trace_digest", digest == summary.trace_digest, digest));

    let mut runs: BTreeMap<(u32, u32), Vec<TraceRow>> = BTreeMap::new();
    for r in rows {
        runs.entry((r.mapping, r.trial)).or_default().push(r);
    }
    checks.push(check(
        "trace_count",
        runs.len() == summary.traces,
        format!("{} runs in traces.csv, summary says {}", runs.len(), summary.traces),
    ));

    let start_cycle = cfg.schedule.start + 1 + cfg.schedule.c0;
    let mut taus = Vec::new();
    let mut max_kept = true;
    let mut sizes_ok = true;
    for rs in runs.values() {
        let mut by_cycle: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
        for r in rs.iter().filter(|r| r.tag.is_some()) {
            by_cycle.entry(r.cycle).or_default().push(r.value);
        }
        let first_max = by_cycle.get(&1).and_then(|v| v.iter().max().copied());
        max_kept &= by_cycle.values().all(|v| v.iter().max().copied() == first_max);
        sizes_ok &= by_cycle.values().all(|v| v.len() == summary.n);
        let (Some(best), Some((_, last))) =
            (by_cycle.get(&start_cycle).and_then(|v| v.iter().max()), by_cycle.iter().next_back())
        else {
            sizes_ok = false;
            continue;
        };
        taus.push(last.iter().filter(|&&v| v == *best).count() as f64 / last.len() as f64);
    }
    checks.push(check("records_per_cycle", sizes_ok, format!("{} nodes per stored cycle", summary.n)));
    checks.push(check("global_max_kept", max_kept, "largest value is the same in every stored cycle".into()));
    let tau = if taus.is_empty() { f64::NAN } else { taus.iter().sum::<f64>() / taus.len() as f64 };
    checks.push(check("tau_recount", close(tau, summary.tau), format!("recounted {tau}, summary {}", summary.tau)));
    checks.push(check(
        "densities_in_unit_interval",
        (0.0..=1.0).contains(&summary.tau) && (0.0..=1.0).contains(&summary.omega),
        format!("tau {}, omega {}", summary.tau, summary.omega),
    ));

    let mut per_run: BTreeMap<(u32, u32), (f64, usize)> = BTreeMap::new();
    let eac_bytes = read("eac.csv")?;
    for row in csv::Reader::from_reader(eac_bytes.as_slice()).deserialize::<(u32, u32, u32, u64, i64)>() {
        let (mapping, trial, _, _, d) = row.map_err(|e| Failure::Config(format!("eac.csv: {e}")))?;
        let e = per_run.entry((mapping, trial)).or_default();
        e.0 += d as f64;
        e.1 += 1;
    }
    let eeac = per_run.values().map(|(s, k)| s / *k as f64).sum::<f64>() / per_run.len().max(1) as f64;
    checks.push(check("eeac_recount", close(eeac, summary.eeac), format!("recounted {eeac}, summary {}", summary.eeac)));

    let c5 = summary.constants.c5() as f64;
    let bound = theorem1_lower_bound(summary.n as u64, summary.x, summary.tau, summary.omega, summary.a_w, c5)?;
    checks.push(check(
        "bound_recompute",
        (bound - summary.bound).abs() <= 2e-6,
        format!("recomputed {bound}, summary {}", summary.bound),
    ));
    checks.push(check(
        "constants_valid",
        summary.constants.validate().is_ok(),
        summary.constants.validate().err().map(|e| e.to_string()).unwrap_or_else(|| "ok".into()),
    ));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
    emit(&json!({ "dir": a.dir, "passed": failed.is_empty(), "checks": checks }))?;
    if a.check && !failed.is_empty() {
        return Err(Failure::Check(failed.join(", ")));
    }
    Ok(())
}

pub fn bound(a: &BoundArgs, cache: Option<&Path>) -> Result<(), Failure> {
    let corollary = |omega: f64| -> Result<Option<serde_json::Value>, Failure> {
        match a.lambda {
            Some(l) => Ok(Some(json!({ "lambda": l, "omega": omega, "smallest_m": smallest_m(l, omega, 1024)? }))),
            None => Ok(None),
        }
    };
    if let (Some(c5), Some(omega), Some(a_w)) = (a.c5, a.omega, a.a_w) {
        let bound = theorem1_lower_bound(a.n, a.x, a.tau, omega, a_w, c5)?;
        return emit(&json!({
            "n": a.n, "x": a.x, "tau": a.tau, "omega": omega, "a_w": a_w, "c5": c5, "bound": bound,
            "growth": GrowthCondition::new(a.tau, omega).ok(),
            "corollary": corollary(omega)?,
        }));
    }
    let loaded = config::load(&a.cfg, None)?;
    let cfg = loaded.config;
    let cycles = cfg.schedule.cycles.eval(a.x, cfg.schedule.c0);
    let calib = calibrate_experiment(&cfg, a.x, cycles, cache)?;
    let omega = match a.omega {
        Some(o) => o,
        None => calib.omega_at(cycles)?,
    };
    let a_w = a.a_w.unwrap_or_else(|| calib.index.complexity(cfg.machine.input) as f64);
    let report = BoundReport::new(a.n, a.x, a.tau, omega, a_w, &calib.constants, None)?;
    emit(&json!({
        "cycles": cycles,
        "report": report,
        "bound": report.bound(),
        "bound_proof": from_micro(report.bound_proof_micro),
        "constants": calib.constants,
        "growth": GrowthCondition::new(a.tau, omega).ok(),
        "corollary": corollary(omega)?,
    }))
}

pub fn scan(a: &ScanArgs, cache: Option<&Path>) -> Result<(), Failure> {
    let loaded = config::load(&a.cfg, Some(a.seed))?;
    let base = loaded.config;
    let GraphSource::Ba { .. } = base.graph else {
        return Err(Failure::Config("scan varies the population size and needs a BA graph source".into()));
    };
    let mut exps = BTreeMap::new();
    for &z in &a.starts {
        for &n in &a.ladder {
            let mut cfg = base.clone();
            cfg.schedule.start = z;
            if let GraphSource::Ba { n: size, .. } = &mut cfg.graph {
                *size = n as usize;
            }
            cfg.population.size = None;
            exps.insert((z, n), cfg.resolve(loaded.base_dir.as_deref())?);
        }
    }
    let first = exps.values().next().ok_or_else(|| Failure::Config("nothing to scan".into()))?;
    let x_max = exps.values().map(|e| e.schedule.x).max().unwrap_or(0);
    let c_max = exps.values().map(|e| e.schedule.cycles).max().unwrap_or(1);
    let calib = calibrate_experiment(&first.config, x_max, c_max, cache)?;
    let mut measured = Vec::new();
    let result = bbnet::analysis::central_time_scan(&a.starts, &a.ladder, |z, n| {
        let exp = &exps[&(z, n)];
        let (m, _) = measure_run(exp, &calib).map_err(|f| bbnet::Error::Config(f.to_string()))?;
        let point = ScanPoint { start: z, n, eeac: m.eeac, bound: m.bound.bound() };
        measured.push(m);
        Ok(point)
    })?;
    let growth = result.estimate.and_then(|z| {
        measured
            .iter()
            .filter(|m| m.schedule.start == z)
            .max_by_key(|m| m.n)
            .and_then(|m| GrowthCondition::new(m.tau, m.omega).ok())
    });

    create_dir(&a.out)?;
    fs::write(a.out.join("config.toml"), base.to_toml())?;
    write_file(&a.out.join("scan.csv"), |w| {
        writeln!(w, "{SCAN_HEADER}")?;
        for p in &result.points {
            writeln!(w, "{},{},{},{}", p.start, p.n, p.eeac, p.bound)?;
        }
        Ok(())
    })?;
    write_file(&a.out.join("eeac_ladder.csv"), |w| write_eeac_ladder_csv(&measured, w))?;
    let summary = json!({
        "seed": a.seed,
        "estimate": result.estimate,
        "description": result.describe(),
        "points": result.points,
        "growth": growth,
        "constants": calib.constants,
    });
    fs::write(a.out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    emit(&summary)
}
