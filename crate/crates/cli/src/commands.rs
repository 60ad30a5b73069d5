use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use tanhshift::bias::{self, figure_data, mc_density_check, McRow, Preset};
use tanhshift::dist::SquashedGaussian1D;
use tanhshift::mode::{analytic_mode, grid_mode, naive_action, stationary_points, ModeResult};
use tanhshift::sac::{train_modes, InferenceMode, RunConfig, RunRecord, SeedRange};
use tanhshift::stats::{
    final_matrix, linspace, performance_profile, sample_efficiency_with, stratified_bootstrap_ci,
    AggregateRow, Metric,
};

use crate::output::{bad_arg, emit, emit_csv, json_string, usage, write_file};
use crate::{
    FigureArgs, Format, McArgs, MethodArg, ModeArgs, PdfArgs, StatsArgs, SweepArgs, TrainArgs,
};

fn dist(mu: f64, sigma: f64) -> Result<SquashedGaussian1D> {
    SquashedGaussian1D::new(mu, sigma).map_err(bad_arg)
}

pub fn pdf(a: PdfArgs) -> Result<()> {
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    dist(a.dist.mu, a.dist.sigma)?;
    let rows = bias::pdf_curve("pdf", a.dist.mu, a.dist.sigma, a.points)?;
    let config =
        json!({"command": "pdf", "mu": a.dist.mu, "sigma": a.dist.sigma, "points": a.points});
    emit_csv(a.out.as_deref(), &rows, &config)
}

#[derive(Serialize)]
struct ModeEntry {
    #[serde(flatten)]
    result: ModeResult,
    bias: f64,
}

pub fn mode(a: ModeArgs) -> Result<()> {
    let d = dist(a.dist.mu, a.dist.sigma)?;
    let naive = naive_action(&d);
    let mut modes = Vec::new();
    if matches!(a.method, MethodArg::Grid | MethodArg::Both) {
        modes.push(grid_mode(&d));
    }
    if matches!(a.method, MethodArg::Analytic | MethodArg::Both) {
        modes.push(analytic_mode(&d)?);
    }
    let set = stationary_points(&d)?;
    let headline = *modes.last().expect("at least one method");
    let doc = json!({
        "config": {"command": "mode", "mu": a.dist.mu, "sigma": a.dist.sigma, "method": a.method},
        "naive_action": naive,
        "y_star": headline.y_star,
        "bias": headline.y_star - naive,
        "bimodal": set.bimodal,
        "modes": modes
            .iter()
            .map(|&m| ModeEntry { result: m, bias: m.y_star - naive })
            .collect::<Vec<_>>(),
        "stationary_points": set.stationary_points,
    });
    emit(a.out.as_deref(), &json_string(&doc)?)
}

pub fn bias_sweep(a: SweepArgs) -> Result<()> {
    dist(a.mu, a.sigma)?;
    let rows = bias::bias_scaling_sweep(&a.dims, a.mu, a.sigma).map_err(bad_arg)?;
    let config = json!({"command": "bias-sweep", "dims": a.dims, "mu": a.mu, "sigma": a.sigma});
    emit_csv(a.out.as_deref(), &rows, &config)
}

pub fn mc_check(a: McArgs) -> Result<()> {
    let d = dist(a.mu, a.sigma)?;
    let report = mc_density_check(&d, a.samples, a.bins, a.seed).map_err(bad_arg)?;
    let config = json!({
        "command": "mc-check", "mu": a.mu, "sigma": a.sigma, "samples": a.samples,
        "bins": a.bins, "seed": a.seed, "format": a.format,
    });
    match a.format {
        Format::Json => {
            let doc = json!({"config": config, "report": report});
            emit(a.out.as_deref(), &json_string(&doc)?)
        }
        Format::Csv => emit_csv(a.out.as_deref(), &[McRow::from(&report)], &config),
    }
}

pub fn figures(a: FigureArgs) -> Result<()> {
    let preset: Preset = a.preset.parse().map_err(bad_arg)?;
    let fig = figure_data(preset)?;
    let name = preset.name();
    let dir = &a.out_dir;
    let mut written = Vec::new();
    let mut put = |suffix: &str, csv: String| -> Result<()> {
        let path = dir.join(format!("{name}_{suffix}.csv"));
        write_file(&path, &csv)?;
        written.push(path.file_name().unwrap().to_string_lossy().into_owned());
        Ok(())
    };
    if !fig.curves.is_empty() {
        put("curves", crate::output::csv_string(&fig.curves)?)?;
    }
    if !fig.points.is_empty() {
        put("points", crate::output::csv_string(&fig.points)?)?;
    }
    if !fig.grid.is_empty() {
        put("grid", crate::output::csv_string(&fig.grid)?)?;
    }
    let config = json!({
        "command": "figures", "preset": name, "sigma": 0.5,
        "curve_points": bias::CURVE_POINTS, "grid_points": bias::GRID_2D_POINTS, "files": written,
    });
    write_file(
        &dir.join(format!("{name}.config.json")),
        &json_string(&config)?,
    )?;
    for f in &written {
        println!("{}", dir.join(f).display());
    }
    Ok(())
}

fn parse_modes(s: &str) -> Result<Vec<InferenceMode>> {
    match s {
        "both" => Ok(InferenceMode::ALL.to_vec()),
        _ => Ok(vec![s.parse().map_err(|_| {
            usage(format!(
                "--mode: expected standard, corrected or both, got `{s}`"
            ))
        })?]),
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    let Some(p) = path else {
        return Ok(RunConfig::default());
    };
    let text =
        fs::read_to_string(p).with_context(|| format!("unreadable config {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed config {}", p.display()))
}

pub fn train(a: TrainArgs) -> Result<()> {
    let modes = parse_modes(&a.mode)?;
    let mut cfg = load_config(a.config.as_deref())?;
    if let Some(s) = &a.seeds {
        cfg.sac.seed_range = s.parse::<SeedRange>().map_err(bad_arg)?;
    }
    if let Some(d) = a.env_d {
        cfg.env.d = d;
    }
    if let Some(n) = a.steps {
        cfg.sac.max_steps = n;
    }
    cfg.sac.inference_mode = modes[0];
    cfg.env.validate().map_err(bad_arg)?;
    cfg.sac.validate().map_err(bad_arg)?;
    if a.jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }

    let seeds: Vec<u64> = cfg.sac.seed_range.seeds().collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<BTreeMap<u64, Result<Vec<RunRecord>>>> = Mutex::new(BTreeMap::new());
    std::thread::scope(|scope| {
        for _ in 0..a.jobs.min(seeds.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&seed) = seeds.get(i) else { break };
                let r = train_modes(&cfg.env, &cfg.sac, seed, &modes)
                    .with_context(|| format!("training seed {seed}"));
                results.lock().unwrap().insert(seed, r);
            });
        }
    });

    for (_, r) in results.into_inner().unwrap() {
        for rec in r? {
            let path = a.out_dir.join(rec.file_name());
            write_file(&path, &json_string(&rec)?)?;
            let last = rec.checkpoints.last();
            match last {
                Some(c) => println!(
                    "{}: final mean normalized score {:.4} at {} steps",
                    path.display(),
                    c.normalized.iter().sum::<f64>() / c.normalized.len() as f64,
                    c.steps
                ),
                None => println!("{}: no checkpoints", path.display()),
            }
        }
    }
    write_file(
        &a.out_dir.join("train.config.json"),
        &json_string(&json!({
            "command": "train", "modes": modes, "jobs": a.jobs, "config": cfg,
        }))?,
    )
}

fn load_runs(dir: &Path) -> Result<BTreeMap<InferenceMode, Vec<RunRecord>>> {
    let entries = fs::read_dir(dir)
        .with_context(|| format!("cannot read runs directory {}", dir.display()))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("run_") && n.ends_with(".json"))
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        bail!("no run_*.json files in {}", dir.display());
    }
    let mut groups: BTreeMap<InferenceMode, Vec<RunRecord>> = BTreeMap::new();
    for p in paths {
        let text = fs::read_to_string(&p)
            .with_context(|| format!("unreadable run file {}", p.display()))?;
        let rec: RunRecord = serde_json::from_str(&text)
            .with_context(|| format!("malformed run file {}", p.display()))?;
        groups.entry(rec.mode).or_default().push(rec);
    }
    for runs in groups.values_mut() {
        runs.sort_by_key(|r| r.seed);
    }
    Ok(groups)
}

pub fn stats(a: StatsArgs) -> Result<()> {
    let metrics = match &a.metric {
        Some(m) => vec![m.parse::<Metric>().map_err(bad_arg)?],
        None => Metric::ALL.to_vec(),
    };
    let taus = a.taus.clone().unwrap_or_else(|| linspace(0.0, 1.0, 21));
    if taus.is_empty() || taus.windows(2).any(|w| w[0] > w[1]) {
        return Err(usage("--taus must be a non-empty ascending list"));
    }
    if a.n_boot < tanhshift::stats::MIN_N_BOOT {
        return Err(usage(format!(
            "--n-boot must be at least {}",
            tanhshift::stats::MIN_N_BOOT
        )));
    }
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(usage("--level must lie in (0, 1)"));
    }
    let groups = load_runs(&a.runs)?;
    let out_dir = a.out_dir.clone().unwrap_or_else(|| a.runs.clone());

    let mut summary = Vec::new();
    for (mode, runs) in &groups {
        let m = final_matrix(runs).with_context(|| format!("{mode} runs"))?;
        let mut rows = Vec::new();
        for &metric in &metrics {
            let e = stratified_bootstrap_ci(metric, &m, a.n_boot, a.level, a.seed)?;
            println!(
                "{mode:<9} {:<6} {:.4} [{:.4}, {:.4}] over {} runs",
                metric.name(),
                e.point,
                e.lo,
                e.hi,
                runs.len()
            );
            rows.push(AggregateRow::new(metric, &e));
        }
        let write = |name: String, csv: String| write_file(&out_dir.join(name), &csv);
        write(
            format!("aggregate_{mode}.csv"),
            crate::output::csv_string(&rows)?,
        )?;
        write(
            format!("profile_{mode}.csv"),
            crate::output::csv_string(&performance_profile(&m, &taus)?)?,
        )?;
        write(
            format!("efficiency_{mode}.csv"),
            crate::output::csv_string(&sample_efficiency_with(runs, a.n_boot, a.level, a.seed)?)?,
        )?;
        summary
            .push(json!({"mode": mode, "seeds": runs.iter().map(|r| r.seed).collect::<Vec<_>>()}));
    }
    let config = json!({
        "command": "stats", "runs": a.runs, "metrics": metrics, "taus": taus,
        "n_boot": a.n_boot, "level": a.level, "seed": a.seed, "groups": summary,
    });
    write_file(&out_dir.join("stats.config.json"), &json_string(&config)?)
}
