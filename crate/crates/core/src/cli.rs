//! Command-line front end: `verify`, `dist` and `experiment` subcommands.
//!
//! A `--config` file is a JSON object `{"seed": .., "threads": .., "run": {..}}`
//! where `run` holds the subcommand's settings; flags override the file.
//! Artifacts go to `--out`, else `$LGPOLY_OUT_DIR`, else the current directory.
//! Exit codes: 0 pass, 1 failed check or accuracy error, 2 bad configuration.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::asymptotics::{gaussian_cdf, parse_t_grid, tabulate, FredholmSpec};
use crate::error::Error;
use crate::harness::{run_phase, write_samples_csv, KsLevel, Phase, PhaseConfig, TabulatedCdf};
use crate::laplace::{ContourGrid, ContourVariant};
use crate::polymer::ParameterSet;
use crate::suites::*;

pub const OUT_DIR_ENV: &str = "LGPOLY_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lgpoly", version, about = "Log-gamma polymer verification suites and limit laws")]
pub struct Cli {
    /// Master seed (required by stochastic commands).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a verification suite.
    #[command(subcommand)]
    Verify(Verify),
    /// Tabulate a limit law as `t,F`.
    #[command(subcommand)]
    Dist(Dist),
    /// Run an experiment.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    Grsk(GrskArgs),
    Identity(IdentityArgs),
    Laplace(LaplaceArgs),
    Whittaker(WhittakerArgs),
}

#[derive(Debug, Subcommand)]
pub enum Dist {
    Gue(DistArgs),
    Bbp(DistArgs),
    Normal(DistArgs),
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    Phase(PhaseArgs),
}

#[derive(Debug, Args)]
pub struct GrskArgs {
    /// Fix every array to an NxM rectangle.
    #[arg(long)]
    shape: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    jacobian_trials: Option<usize>,
    #[arg(long)]
    spread: Option<f64>,
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    /// Replicas per side.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_circ: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    level: Option<LevelArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LevelArg {
    #[value(name = "0.01")]
    P01,
    #[value(name = "0.05")]
    P05,
}

impl From<LevelArg> for KsLevel {
    fn from(l: LevelArg) -> Self {
        match l {
            LevelArg::P01 => KsLevel::P01,
            LevelArg::P05 => KsLevel::P05,
        }
    }
}

#[derive(Debug, Args)]
pub struct LaplaceArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    #[arg(long, allow_hyphen_values = true)]
    alpha_circ: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    /// Half-length of the truncated contour.
    #[arg(long)]
    truncation: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Trapezoid,
    Fullspace,
}

#[derive(Debug, Args)]
pub struct WhittakerArgs {
    #[arg(long, value_enum)]
    identity: Option<IdentityArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IdentityArg {
    All,
    Stade,
    TTransform,
    SoTransform,
    Translation,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    /// Grid `a:b:step`.
    #[arg(long, allow_hyphen_values = true)]
    t_grid: Option<String>,
    /// BBP parameters.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    b: Option<Vec<f64>>,
    #[arg(long)]
    nodes_per_leg: Option<usize>,
    #[arg(long)]
    leg_length: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    theta0: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long, value_enum)]
    phase: Option<PhaseArg>,
    /// Grid step of the tabulated GUE law.
    #[arg(long)]
    gue_step: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhaseArg {
    Gue,
    Gaussian,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile<T> {
    seed: Option<u64>,
    threads: Option<usize>,
    #[serde(default)]
    run: Option<T>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DistConfig {
    pub t_grid: Option<String>,
    pub b: Vec<f64>,
    pub fredholm: FredholmSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseRunConfig {
    pub theta: f64,
    pub theta0: f64,
    pub p: f64,
    pub ns: Vec<usize>,
    pub replicas: usize,
    pub phase: Option<Phase>,
    pub gue_step: f64,
}

impl Default for PhaseRunConfig {
    fn default() -> Self {
        Self { theta: 2.0, theta0: 2.0, p: 1.0, ns: vec![32, 64, 128], replicas: 10_000, phase: None, gue_step: 0.025 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhittakerConfig {
    pub identity: WhittakerSelection,
}

impl Default for WhittakerConfig {
    fn default() -> Self {
        Self { identity: WhittakerSelection::All }
    }
}

/// Parses arguments, runs and returns the process exit code.
pub fn main_with_args<I: IntoIterator<Item = T>, T: Into<OsString> + Clone>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> i32 {
    match e.downcast_ref::<Error>() {
        Some(Error::Accuracy(_)) | Some(Error::Contract(_)) => 1,
        _ => 2,
    }
}

struct RunContext {
    seed: Option<u64>,
    threads: Option<usize>,
    out: PathBuf,
}

fn load<T: DeserializeOwned + Default>(cli: &Cli) -> anyhow::Result<(T, RunContext)> {
    let (file_seed, file_threads, body) = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            let f: ConfigFile<T> =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("config {}: {e}", path.display())))?;
            (f.seed, f.threads, f.run.unwrap_or_default())
        }
        None => (None, None, T::default()),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    Ok((body, RunContext { seed: cli.seed.or(file_seed), threads: cli.threads.or(file_threads), out }))
}

fn require_seed(ctx: &RunContext) -> anyhow::Result<u64> {
    ctx.seed.ok_or_else(|| Error::Config("this command is stochastic and needs --seed".into()).into())
}

fn with_threads<R: Send>(ctx: &RunContext, f: impl FnOnce() -> R + Send) -> anyhow::Result<R> {
    match ctx.threads {
        None => Ok(f()),
        Some(0) => Err(Error::Config("--threads must be positive".into()).into()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

fn out_file(ctx: &RunContext, name: &str) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(&ctx.out).map_err(|e| Error::Config(format!("output dir {}: {e}", ctx.out.display())))?;
    Ok(ctx.out.join(name))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn report<C: Serialize, R: Serialize>(
    ctx: &RunContext,
    command: &str,
    config: &C,
    seed: Option<u64>,
    result: &R,
    pass: bool,
) -> anyhow::Result<PathBuf> {
    let path = out_file(ctx, &format!("{}.json", command.replace(' ', "-")))?;
    let doc = json!({ "command": command, "seed": seed, "config": config, "pass": pass, "result": result });
    write_json(&path, &doc)?;
    Ok(path)
}

fn params_from(
    n: Option<usize>,
    m: Option<usize>,
    ac: Option<f64>,
    alpha: &Option<Vec<f64>>,
    beta: &Option<Vec<f64>>,
) -> anyhow::Result<Option<ParameterSet>> {
    if n.is_none() && m.is_none() && ac.is_none() && alpha.is_none() && beta.is_none() {
        return Ok(None);
    }
    let n = n.or(alpha.as_ref().map(Vec::len)).unwrap_or(1);
    let m = m.or(beta.as_ref().map(Vec::len)).unwrap_or(0);
    if n == 0 {
        bail!(Error::Parameter("n must be at least 1".into()));
    }
    let g = generic_params(n, m)?;
    let alpha = alpha.clone().unwrap_or(g.alpha);
    let beta = beta.clone().unwrap_or(g.beta);
    if alpha.len() != n || beta.len() != m {
        bail!(Error::Parameter(format!("alpha/beta lengths {}/{} do not match n={n}, m={m}", alpha.len(), beta.len())));
    }
    Ok(Some(ParameterSet::new(ac.unwrap_or(g.alpha_circ), alpha, beta)?))
}

pub fn run(cli: &Cli) -> anyhow::Result<bool> {
    match &cli.command {
        Command::Verify(Verify::Grsk(a)) => {
            let (mut cfg, ctx) = load::<GrskSuiteConfig>(cli)?;
            if a.shape.is_some() {
                cfg.shape = a.shape.clone();
            }
            cfg.trials = a.trials.unwrap_or(cfg.trials);
            cfg.jacobian_trials = a.jacobian_trials.unwrap_or(cfg.jacobian_trials);
            cfg.spread = a.spread.unwrap_or(cfg.spread);
            let seed = require_seed(&ctx)?;
            let rep = with_threads(&ctx, || grsk_suite(&cfg, seed))??;
            println!("{:<18} {:>7} {:>12} {:>10}  result", "identity", "arrays", "worst", "tolerance");
            for c in &rep.checks {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                println!("{:<18} {:>7} {:>12.3e} {:>10.0e}  {verdict}", c.name, c.arrays, c.worst_error, c.tolerance);
            }
            for f in &rep.failures {
                println!("  {f}");
            }
            let path = report(&ctx, "verify grsk", &cfg, Some(seed), &rep, rep.pass)?;
            println!("report: {}", path.display());
            Ok(rep.pass)
        }
        Command::Verify(Verify::Identity(a)) => {
            let (mut cfg, ctx) = load::<IdentitySuiteConfig>(cli)?;
            if let Some(p) = params_from(a.n, a.m, a.alpha_circ, &a.alpha, &a.beta)? {
                cfg.cases = vec![p];
            }
            cfg.replicas = a.samples.unwrap_or(cfg.replicas);
            if let Some(l) = a.level {
                cfg.level = l.into();
            }
            let seed = require_seed(&ctx)?;
            let rep = with_threads(&ctx, || identity_suite(&cfg, seed))??;
            for c in &rep.closed_form {
                println!("n=1 m={}: shapes {:?} identical={}", c.params.m(), c.full_shapes, c.identical);
            }
            for c in &rep.cases {
                println!(
                    "n={} m={}: D={:.5} critical={:.5} {}",
                    c.params.n(),
                    c.params.m(),
                    c.ks.statistic,
                    c.ks.critical_value,
                    if c.ks.pass { "PASS" } else { "FAIL" }
                );
            }
            let path = report(&ctx, "verify identity", &cfg, Some(seed), &rep, rep.pass)?;
            println!("report: {}", path.display());
            Ok(rep.pass)
        }
        Command::Verify(Verify::Laplace(a)) => {
            let (mut cfg, ctx) = load::<LaplaceCheckConfig>(cli)?;
            if let Some(p) = params_from(a.n, a.m, a.alpha_circ, &a.alpha, &a.beta)? {
                cfg.params = p;
            }
            cfg.r = a.r.unwrap_or(cfg.r);
            cfg.mu = a.mu.or(cfg.mu);
            cfg.replicas = a.replicas.unwrap_or(cfg.replicas);
            if let Some(v) = a.variant {
                cfg.variant = match v {
                    VariantArg::Trapezoid => ContourVariant::Trapezoid,
                    VariantArg::Fullspace => ContourVariant::Fullspace,
                };
            }
            if let Some(t) = a.truncation {
                cfg.grid = ContourGrid { truncation: t, ..cfg.grid };
            }
            let seed = require_seed(&ctx)?;
            let rep = with_threads(&ctx, || laplace_check(&cfg, seed))??;
            println!(
                "contour={:.10} mc={:.10} stderr={:.3e} sigma={:.3} {}",
                rep.contour,
                rep.mc_estimate,
                rep.mc_stderr,
                rep.agreement_sigma,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            let path = report(&ctx, "verify laplace", &cfg, Some(seed), &rep, rep.pass)?;
            println!("report: {}", path.display());
            Ok(rep.pass)
        }
        Command::Verify(Verify::Whittaker(a)) => {
            let (mut cfg, ctx) = load::<WhittakerConfig>(cli)?;
            if let Some(i) = a.identity {
                cfg.identity = match i {
                    IdentityArg::All => WhittakerSelection::All,
                    IdentityArg::Stade => WhittakerSelection::Stade,
                    IdentityArg::TTransform => WhittakerSelection::TTransform,
                    IdentityArg::SoTransform => WhittakerSelection::SoTransform,
                    IdentityArg::Translation => WhittakerSelection::Translation,
                };
            }
            let rep = with_threads(&ctx, || whittaker_suite(cfg.identity))??;
            for c in &rep.checks {
                println!(
                    "{:<22} lhs={:.12e} rhs={:.12e} discrepancy={:.3e} tol={:.0e} {}",
                    c.name,
                    c.lhs,
                    c.rhs,
                    c.discrepancy,
                    c.tolerance,
                    if c.pass { "PASS" } else { "FAIL" }
                );
            }
            let path = report(&ctx, "verify whittaker", &cfg, ctx.seed, &rep, rep.pass)?;
            println!("report: {}", path.display());
            Ok(rep.pass)
        }
        Command::Dist(d) => {
            let (law, a) = match d {
                Dist::Gue(a) => ("gue", a),
                Dist::Bbp(a) => ("bbp", a),
                Dist::Normal(a) => ("normal", a),
            };
            let (mut cfg, ctx) = load::<DistConfig>(cli)?;
            if a.t_grid.is_some() {
                cfg.t_grid = a.t_grid.clone();
            }
            if let Some(b) = &a.b {
                cfg.b = b.clone();
            }
            cfg.fredholm.nodes_per_leg = a.nodes_per_leg.unwrap_or(cfg.fredholm.nodes_per_leg);
            cfg.fredholm.leg_length = a.leg_length.unwrap_or(cfg.fredholm.leg_length);
            let grid = cfg.t_grid.as_deref().ok_or_else(|| Error::Config("--t-grid is required".into()))?;
            let ts = parse_t_grid(grid)?;
            let fs: Vec<f64> = match law {
                "normal" => ts.iter().map(|&t| gaussian_cdf(t)).collect(),
                "gue" => with_threads(&ctx, || tabulate(&ts, &[], &cfg.fredholm))??,
                _ => {
                    if cfg.b.is_empty() {
                        bail!(Error::Config("dist bbp needs --b".into()));
                    }
                    with_threads(&ctx, || tabulate(&ts, &cfg.b, &cfg.fredholm))??
                }
            };
            let command = format!("dist {law}");
            let path = out_file(&ctx, &format!("dist-{law}.csv"))?;
            let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
            use std::io::Write;
            writeln!(w, "# {}", json!({ "command": command, "seed": ctx.seed, "config": cfg }))?;
            let mut csv = csv::Writer::from_writer(w);
            csv.write_record(["t", "F"])?;
            for (t, f) in ts.iter().zip(&fs) {
                csv.write_record([t.to_string(), f.to_string()])?;
            }
            csv.flush()?;
            println!("{} rows: {}", ts.len(), path.display());
            Ok(true)
        }
        Command::Experiment(Experiment::Phase(a)) => {
            let (mut cfg, ctx) = load::<PhaseRunConfig>(cli)?;
            cfg.theta = a.theta.unwrap_or(cfg.theta);
            cfg.theta0 = a.theta0.unwrap_or(cfg.theta0);
            cfg.p = a.p.unwrap_or(cfg.p);
            if let Some(ns) = &a.ns {
                cfg.ns = ns.clone();
            }
            cfg.replicas = a.replicas.unwrap_or(cfg.replicas);
            if let Some(p) = a.phase {
                cfg.phase = Some(match p {
                    PhaseArg::Gue => Phase::Gue,
                    PhaseArg::Gaussian => Phase::Gaussian,
                });
            }
            cfg.gue_step = a.gue_step.unwrap_or(cfg.gue_step);
            let seed = require_seed(&ctx)?;
            if !(cfg.gue_step > 0.0 && cfg.gue_step <= 1.0) {
                bail!(Error::Config(format!("gue_step must lie in (0, 1], got {}", cfg.gue_step)));
            }
            let pc = PhaseConfig {
                theta: cfg.theta,
                theta0: cfg.theta0,
                p: cfg.p,
                ns: cfg.ns.clone(),
                replicas: cfg.replicas,
                phase: cfg.phase,
            };
            pc.validate()?;
            let rows = with_threads(&ctx, || -> crate::Result<_> {
                let spec = FredholmSpec { convergence_tol: None, ..FredholmSpec::default() };
                let gue = TabulatedCdf::bbp(&[], -8.0, 5.0, cfg.gue_step, &spec)?;
                run_phase(&pc, seed, &gue)
            })??;
            for (row, res) in &rows {
                let path = out_file(&ctx, &format!("experiment-phase-n{}.csv", row.n))?;
                let header = json!({ "command": "experiment phase", "seed": seed, "config": cfg, "plan": row.plan });
                write_samples_csv(BufWriter::new(File::create(&path)?), &header, res)?;
                println!(
                    "n={:4} m={:4} phase={:?} mean={:+.4} sd={:.4} D_own={:.4} D_other={:.4}",
                    row.n, row.m, row.phase, row.mean, row.std_dev, row.ks.statistic, row.cross.statistic
                );
            }
            let summary: Vec<_> = rows.iter().map(|(r, _)| r).collect();
            let path = report(&ctx, "experiment phase", &cfg, Some(seed), &summary, true)?;
            println!("summary: {}", path.display());
            Ok(true)
        }
    }
}
