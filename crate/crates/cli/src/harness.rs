//! Replica orchestration for the three subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use roughwalk::estimators::{estimate, kolmogorov_ratio, pstar, AnomalyEstimate, ScaleSample};
use roughwalk::lift::{holder_norm, write_path, HolderGrid};
use roughwalk::regeneration::{decompose, detect_regenerations, survival_points, tail_slope, write_block_records, Block};
use roughwalk::rng::{environment_seed, mix64, replica_seed};
use roughwalk::walks::{gen_annealed_rwre_walk, gen_iid_walk, gen_loop_walk, gen_periodic_env_walk, gen_rotating_drift, gen_rwre_walk, LazyEnvironment};
use roughwalk::{DiscretePath, RegenerationDecomposition};

use crate::config::{ConfigError, Environment, ExperimentConfig, Model, Regeneration};

/// Blocks needed before an estimate counts as adequately sampled.
pub const MIN_BLOCKS: usize = 100;

pub const WORKERS_ENV: &str = "ROUGHWALK_WORKERS";

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error(transparent)]
    Model(#[from] roughwalk::Error),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io { path: path.display().to_string(), msg: e.to_string() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Estimate,
    Diagnose,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Estimate => "estimate",
            Command::Diagnose => "diagnose",
        }
    }
}

/// What a run produced.
#[derive(Debug, Default)]
pub struct Report {
    /// Human-readable summary for stdout.
    pub summary: Vec<String>,
    /// Set when the run completed but had too little data.
    pub under_sampled: Option<String>,
    /// Output files relative to the output directory, with their sha256.
    pub checksums: Vec<(String, String)>,
    pub manifest: PathBuf,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.under_sampled.is_some() {
            3
        } else {
            0
        }
    }
}

/// Flag, then the config file, then available parallelism; never more than
/// the replica count.
pub fn resolve_workers(requested: Option<usize>, replicas: usize) -> usize {
    let w = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    w.clamp(1, replicas.max(1))
}

/// Runs `f(0..count)` on `workers` threads, returning results in index order.
pub fn run_ordered<T, F>(workers: usize, count: usize, f: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(usize) -> Result<T, HarnessError> + Send + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Io { path: "thread pool".into(), msg: e.to_string() })?;
    pool.install(|| (0..count).into_par_iter().map(f).collect())
}

/// Path of replica `replica` with `n` steps, seeded by `base ⊕ replica`.
pub fn generate(cfg: &ExperimentConfig, base: u64, replica: usize, n: usize) -> Result<DiscretePath<f64>, HarnessError> {
    let seed = replica_seed(base, replica as u64);
    let path = match &cfg.model {
        Model::Iid(law) => gen_iid_walk(law, n, seed)?,
        Model::Rotating { p } => gen_rotating_drift(*p, n, seed)?,
        Model::Periodic { p } => gen_periodic_env_walk(*p, n, seed)?,
        Model::SrwLoops => gen_loop_walk(n, seed)?,
        Model::Rwre { law, environment: Environment::Annealed } => gen_annealed_rwre_walk(law, n, seed)?,
        Model::Rwre { law, environment: Environment::Quenched } => {
            let mut env = LazyEnvironment::new(law.clone(), environment_seed(base));
            gen_rwre_walk(&mut env, n, seed)?
        }
    };
    Ok(path)
}

pub fn regenerations(cfg: &ExperimentConfig, path: &DiscretePath<f64>) -> Result<RegenerationDecomposition, HarnessError> {
    Ok(match &cfg.regeneration {
        Regeneration::Period(p) => RegenerationDecomposition::periodic(path.len(), *p)?,
        Regeneration::Detect { direction, margin } => detect_regenerations(path, direction, *margin)?,
    })
}

fn sha256(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Output {
    dir: PathBuf,
    checksums: Vec<(String, String)>,
}

impl Output {
    fn new(dir: &Path) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        Ok(Output { dir: dir.to_path_buf(), checksums: Vec::new() })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), HarnessError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        self.checksums.push((name.to_string(), sha256(bytes)));
        Ok(())
    }

    fn record(&mut self, name: String, checksum: String) {
        self.checksums.push((name, checksum));
    }

    fn finish(
        self,
        cmd: Command,
        cfg: &ExperimentConfig,
        workers: usize,
        timings: &[(&str, f64)],
        mut report: Report,
    ) -> Result<Report, HarnessError> {
        let mut m = String::new();
        writeln!(m, "command={}", cmd.name()).unwrap();
        writeln!(m, "version={}", env!("CARGO_PKG_VERSION")).unwrap();
        for (k, v) in &cfg.echo {
            writeln!(m, "config.{k}={v}").unwrap();
        }
        writeln!(m, "workers={workers}").unwrap();
        for (name, sum) in &self.checksums {
            writeln!(m, "sha256.{name}={sum}").unwrap();
        }
        for (phase, secs) in timings {
            writeln!(m, "time.{phase}_ms={:.3}", secs * 1e3).unwrap();
        }
        if let Some(w) = &report.under_sampled {
            writeln!(m, "warning={w}").unwrap();
        }
        let path = self.dir.join(format!("manifest_{}.txt", cmd.name()));
        fs::write(&path, m).map_err(|e| io_err(&path, e))?;
        report.checksums = self.checksums;
        report.manifest = path;
        Ok(report)
    }
}

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    match cmd {
        Command::Simulate => simulate(cfg),
        Command::Estimate => run_estimate(cfg),
        Command::Diagnose => diagnose(cfg),
    }
}

fn fmt_vec(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn simulate(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let workers = resolve_workers(cfg.workers, cfg.replicas);
    let mut out = Output::new(&cfg.out)?;
    let rows = run_ordered(workers, cfg.replicas, |r| {
        let path = generate(cfg, cfg.seed, r, cfg.n)?;
        let end = path.increment(0, path.len())?;
        let record = if cfg.record_paths {
            let mut bytes = Vec::new();
            write_path(&path, &mut bytes).expect("in-memory write");
            let name = format!("paths/replica_{r:05}.txt");
            let file = cfg.out.join(&name);
            fs::create_dir_all(file.parent().unwrap()).map_err(|e| io_err(&file, e))?;
            fs::write(&file, &bytes).map_err(|e| io_err(&file, e))?;
            Some((name, sha256(&bytes)))
        } else {
            None
        };
        Ok((end, record))
    })?;
    let generate_secs = start.elapsed().as_secs_f64();

    let mut table = String::from("replica,seed,steps");
    for i in 1..=cfg.d {
        write!(table, ",x{i}").unwrap();
    }
    table.push('\n');
    for (r, (end, record)) in rows.into_iter().enumerate() {
        writeln!(table, "{r},{},{},{}", replica_seed(cfg.seed, r as u64), cfg.n, fmt_vec(&end)).unwrap();
        if let Some((name, sum)) = record {
            out.record(name, sum);
        }
    }
    out.write("simulate.csv", table.as_bytes())?;
    let report = Report {
        summary: vec![format!("simulated {} replicas of {} steps into {}", cfg.replicas, cfg.n, cfg.out.display())],
        ..Report::default()
    };
    out.finish(Command::Simulate, cfg, workers, &[("generate", generate_secs), ("total", start.elapsed().as_secs_f64())], report)
}

/// Blocks of every replica, in replica order. Each replica contributes its own
/// first block, which the estimators skip.
pub fn pooled_blocks(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<Block<f64>>, HarnessError> {
    let per_replica = run_ordered(workers, cfg.replicas, |r| {
        let path = generate(cfg, cfg.seed, r, cfg.n)?;
        let decomposition = regenerations(cfg, &path)?;
        Ok(decompose(&path, &decomposition)?)
    })?;
    Ok(per_replica.into_iter().flatten().collect())
}

pub fn estimate_header(d: usize) -> String {
    let mut cols: Vec<String> = ["model", "d", "n", "replicas", "seed", "blocks", "mean_duration"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=d).map(|i| format!("v{i}")));
    cols.extend((1..=d).map(|i| format!("v{i}_se")));
    for suffix in ["", "_se"] {
        for i in 1..=d {
            for j in 1..=d {
                cols.push(format!("M{i}{j}{suffix}"));
            }
        }
    }
    for suffix in ["", "_se"] {
        for i in 1..=d {
            for j in i + 1..=d {
                cols.push(format!("G{i}{j}{suffix}"));
            }
        }
    }
    cols.join(",")
}

pub fn estimate_row(cfg: &ExperimentConfig, est: &AnomalyEstimate) -> String {
    let d = est.dim();
    let mut vals = vec![
        cfg.model_name.clone(),
        d.to_string(),
        cfg.n.to_string(),
        cfg.replicas.to_string(),
        cfg.seed.to_string(),
        est.blocks_used.to_string(),
        est.mean_duration.to_string(),
    ];
    vals.extend(est.speed.iter().chain(&est.speed_se).map(f64::to_string));
    vals.extend(est.covariance.as_slice().iter().chain(est.covariance_se.as_slice()).map(f64::to_string));
    for m in [&est.anomaly, &est.anomaly_se] {
        for i in 0..d {
            for j in i + 1..d {
                vals.push(m.get(i, j).to_string());
            }
        }
    }
    vals.join(",")
}

pub fn run_estimate(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let workers = resolve_workers(cfg.workers, cfg.replicas);
    let mut out = Output::new(&cfg.out)?;
    let blocks = pooled_blocks(cfg, workers)?;
    let pipeline_secs = start.elapsed().as_secs_f64();

    let mut bytes = Vec::new();
    write_block_records(&blocks, &mut bytes).expect("in-memory write");
    out.write("blocks.csv", &bytes)?;

    let usable = blocks.iter().filter(|b| b.index >= 2).count();
    let t = Instant::now();
    let mut report = Report::default();
    match estimate(&blocks) {
        Ok(est) => {
            let csv = format!("{}\n{}\n", estimate_header(est.dim()), estimate_row(cfg, &est));
            out.write("estimate.csv", csv.as_bytes())?;
            report.summary.push(format!("blocks used: {} (mean duration {})", est.blocks_used, est.mean_duration));
            report.summary.push(format!("v = [{}] ± [{}]", fmt_vec(&est.speed), fmt_vec(&est.speed_se)));
            report.summary.push(format!("M = [{}] ± [{}]", fmt_vec(est.covariance.as_slice()), fmt_vec(est.covariance_se.as_slice())));
            for i in 0..est.dim() {
                for j in i + 1..est.dim() {
                    report.summary.push(format!("Gamma{}{} = {} ± {}", i + 1, j + 1, est.anomaly.get(i, j), est.anomaly_se.get(i, j)));
                }
            }
        }
        Err(roughwalk::Error::InsufficientBlocks { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    if usable < MIN_BLOCKS {
        report.under_sampled = Some(format!("under-sampled: {usable} usable blocks, need at least {MIN_BLOCKS}"));
    }
    let timings = [("pipeline", pipeline_secs), ("estimate", t.elapsed().as_secs_f64()), ("total", start.elapsed().as_secs_f64())];
    out.finish(Command::Estimate, cfg, workers, &timings, report)
}

/// One row of the diagnostics summary.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleDiagnostics {
    pub scale: usize,
    /// Mean over replicas of the α-Hölder norm, one entry per configured α.
    pub holder: Vec<f64>,
    /// `None` when there are too few replicas or `p* = 0`.
    pub kolmogorov: Option<f64>,
}

fn scale_seed(base: u64, scale: usize) -> u64 {
    mix64(base ^ scale as u64)
}

pub fn scale_diagnostics(cfg: &ExperimentConfig, workers: usize, scale: usize, pstar_value: u32) -> Result<ScaleDiagnostics, HarnessError> {
    let base = scale_seed(cfg.seed, scale);
    let per_replica = run_ordered(workers, cfg.replicas, |r| {
        let path = generate(cfg, base, r, scale)?;
        let lift = path.rescale(scale)?;
        let norms = cfg
            .holder_alphas
            .iter()
            .map(|&a| holder_norm(&lift, a, &HolderGrid::Dyadic).map(|h| h.total()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((path, norms))
    })?;
    let k = per_replica.len() as f64;
    let holder = (0..cfg.holder_alphas.len()).map(|i| per_replica.iter().map(|(_, h)| h[i]).sum::<f64>() / k).collect();
    let kolmogorov = if pstar_value > 0 && cfg.replicas >= roughwalk::estimators::MIN_KOLMOGOROV_REPLICAS {
        let sample = ScaleSample { scale, paths: per_replica.into_iter().map(|(p, _)| p).collect() };
        Some(kolmogorov_ratio(&[sample], pstar_value)?[0].max_ratio)
    } else {
        None
    };
    Ok(ScaleDiagnostics { scale, holder, kolmogorov })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".to_string(), |v| v.to_string())
}

pub fn diagnose(cfg: &ExperimentConfig) -> Result<Report, HarnessError> {
    let start = Instant::now();
    let workers = resolve_workers(cfg.workers, cfg.replicas);
    let mut out = Output::new(&cfg.out)?;
    let p_star = pstar(cfg.moment_p)?;
    let rows = cfg
        .scales
        .iter()
        .map(|&n| scale_diagnostics(cfg, workers, n, p_star.value))
        .collect::<Result<Vec<_>, _>>()?;
    let scales_secs = start.elapsed().as_secs_f64();

    let t = Instant::now();
    let durations: Vec<usize> = pooled_blocks(cfg, workers)?.iter().filter(|b| b.index >= 2).map(Block::duration).collect();
    let durations_secs = t.elapsed().as_secs_f64();

    for (i, alpha) in cfg.holder_alphas.iter().enumerate() {
        let mut dat = String::new();
        for row in &rows {
            writeln!(dat, "{} {}", row.scale, row.holder[i]).unwrap();
        }
        out.write(&format!("holder_alpha_{alpha}.dat"), dat.as_bytes())?;
    }
    let mut dat = String::new();
    for row in &rows {
        writeln!(dat, "{} {}", row.scale, opt(row.kolmogorov)).unwrap();
    }
    out.write("kolmogorov.dat", dat.as_bytes())?;
    let mut dat = String::new();
    for (x, y) in survival_points(&durations) {
        writeln!(dat, "{x} {y}").unwrap();
    }
    out.write("duration_tail.dat", dat.as_bytes())?;

    let mut csv = String::from("scale,replicas,pstar");
    for a in &cfg.holder_alphas {
        write!(csv, ",holder_{a}").unwrap();
    }
    csv.push_str(",kolmogorov\n");
    for row in &rows {
        write!(csv, "{},{},{}", row.scale, cfg.replicas, p_star.value).unwrap();
        for h in &row.holder {
            write!(csv, ",{h}").unwrap();
        }
        writeln!(csv, ",{}", opt(row.kolmogorov)).unwrap();
    }
    out.write("diagnose_summary.csv", csv.as_bytes())?;

    let mut report = Report::default();
    report.summary.push(format!(
        "p* = {} (Hölder bound {})",
        p_star.value,
        p_star.holder_bound.map_or_else(|| "none".into(), |b| b.to_string())
    ));
    for row in &rows {
        report.summary.push(format!("N={} holder=[{}] kolmogorov={}", row.scale, fmt_vec(&row.holder), opt(row.kolmogorov)));
    }
    report.summary.push(format!("duration tail slope: {}", opt(tail_slope(&durations))));
    if cfg.replicas < roughwalk::estimators::MIN_KOLMOGOROV_REPLICAS {
        report.under_sampled = Some(format!(
            "under-sampled: Kolmogorov ratios need at least {} replicas, got {}",
            roughwalk::estimators::MIN_KOLMOGOROV_REPLICAS,
            cfg.replicas
        ));
    }
    let timings = [("scales", scales_secs), ("durations", durations_secs), ("total", start.elapsed().as_secs_f64())];
    out.finish(Command::Diagnose, cfg, workers, &timings, report)
}
