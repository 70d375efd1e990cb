use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use super::config::ExperimentConfig;
use super::suite::{self, bifurcation_csv, bifurcation_rows, census_config, random_field, RANDOM_MAX_MODE};
use crate::dynamics::{integrate, Params, Scheme};
use crate::error::{Error, Result};
use crate::linear;
use crate::reduced::{self, ReducedSystem};
use crate::spectral::{Boundary, Domain, ModeIndex, Parity, SpectralField};
use crate::steady::{self, SteadyState};

#[derive(Parser, Debug)]
#[command(name = "shbif", version, about = "Swift-Hohenberg solver and bifurcation toolkit")]
pub struct Cli {
    /// Output directory for reports and data files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long = "rng-seed", global = true)]
    pub rng_seed: Option<u64>,
    /// key=value configuration file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Critical eigenvalue and growth rates about u = 0.
    Eig(EigArgs),
    /// Time integration from a seed.
    Run(RunArgs),
    /// Steady states from a seed or a multi-start census.
    Steady(SteadyArgs),
    /// Census over a parameter range; writes a bifurcation diagram.
    Sweep(SweepArgs),
    /// Reduced system on the critical modes.
    Reduce(ReduceArgs),
    /// Run a verification scenario (or `all`).
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    #[arg(long)]
    pub dim: Option<usize>,
    /// dirichlet, odd-periodic or periodic.
    #[arg(long)]
    pub bc: Option<Boundary>,
    #[arg(long)]
    pub length: Option<f64>,
    /// Retained modes per axis.
    #[arg(long)]
    pub band: Option<usize>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EigArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Extra parameter values at which to report growth rates.
    #[arg(long = "at", value_delimiter = ',')]
    pub at: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SeedMode {
    Random,
    Mode,
    Zero,
}

#[derive(Args, Debug, Clone)]
pub struct SeedArgs {
    #[arg(long = "seed-mode", value_enum)]
    pub seed_mode: Option<SeedMode>,
    /// Wave vector for `--seed-mode mode`, e.g. `1` or `1,0`.
    #[arg(long, value_delimiter = ',')]
    pub mode: Vec<i32>,
    /// L2 norm of the seed.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Coefficient file: one value per retained mode in basis order,
    /// separated by commas or whitespace.
    #[arg(long = "seed-file")]
    pub seed_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[command(flatten)]
    pub seed: SeedArgs,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long = "t-end")]
    pub t_end: Option<f64>,
    /// etd1 or etdrk2.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    #[arg(long = "sample-every")]
    pub sample_every: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Newton from a single mode with this wave vector.
    #[arg(long = "from-mode", value_delimiter = ',')]
    pub from_mode: Vec<i32>,
    /// Newton from the coefficients in this file.
    #[arg(long = "from-file")]
    pub from_file: Option<PathBuf>,
    /// Seed amplitude (L2 norm) for `--from-mode`.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Run a census with this many random seeds instead.
    #[arg(long)]
    pub nseeds: Option<usize>,
    #[arg(long = "seed-scale")]
    pub seed_scale: Option<f64>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long = "lambda-min")]
    pub lambda_min: Option<f64>,
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<f64>,
    #[arg(long = "lambda-steps")]
    pub lambda_steps: Option<usize>,
    #[arg(long)]
    pub nseeds: Option<usize>,
    #[arg(long = "seed-scale")]
    pub seed_scale: Option<f64>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Scenario id, or `all`.
    pub scenario: String,
}

impl DomainArgs {
    fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.bc {
            cfg.bc = v;
        }
        if let Some(v) = self.length {
            cfg.length = v;
        }
        if self.band.is_some() {
            cfg.band = self.band;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = self.mu {
            cfg.mu = v;
        }
    }
}

fn parse_mode(domain: &Domain, k: &[i32], parity: Parity) -> Result<ModeIndex> {
    if k.len() != domain.dim() {
        return Err(Error::Usage(format!("mode needs {} components", domain.dim())));
    }
    let m = ModeIndex::new(k, parity);
    if domain.index_of(&m).is_none() {
        return Err(Error::Usage(format!("mode {k:?} is not retained")));
    }
    Ok(m)
}

fn read_coeffs(domain: &std::sync::Arc<Domain>, path: &Path) -> Result<SpectralField> {
    let text = std::fs::read_to_string(path)?;
    let mut c = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split(|ch: char| ch == ',' || ch.is_whitespace()).filter(|t| !t.is_empty()) {
            c.push(tok.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("cannot parse coefficient '{tok}'"),
            })?);
        }
    }
    if c.len() != domain.len() {
        return Err(Error::Range(format!(
            "seed file has {} coefficients, the domain retains {}",
            c.len(),
            domain.len()
        )));
    }
    SpectralField::from_coeffs(domain, c)
}

fn seed_field(domain: &std::sync::Arc<Domain>, cfg: &ExperimentConfig, args: &SeedArgs) -> Result<SpectralField> {
    if let Some(path) = &args.seed_file {
        return read_coeffs(domain, path);
    }
    match args.seed_mode.unwrap_or(SeedMode::Random) {
        SeedMode::Random => random_field(domain, RANDOM_MAX_MODE, args.amplitude, &mut suite::rng(cfg, 0)),
        SeedMode::Zero => Ok(SpectralField::zeros(domain)),
        SeedMode::Mode => {
            let k = if args.mode.is_empty() { vec![1; domain.dim()] } else { args.mode.clone() };
            let m = parse_mode(domain, &k, Parity::Sin)?;
            SpectralField::single(domain, &m, args.amplitude)
        }
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, file: &str, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(file), text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn write_text(out: Option<&Path>, file: &str, body: &str) -> Result<()> {
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(file), body)?;
    }
    Ok(())
}

/// CSV for 1-d fields, PGM for 2-d ones; nothing for 3-d.
fn write_snapshot(out: Option<&Path>, stem: &str, u: &SpectralField) -> Result<()> {
    let Some(dir) = out else { return Ok(()) };
    std::fs::create_dir_all(dir)?;
    let g = u.to_grid();
    match u.domain().dim() {
        1 => g.write_csv(std::fs::File::create(dir.join(format!("{stem}.csv")))?),
        2 => g.write_pgm(std::fs::File::create(dir.join(format!("{stem}.pgm")))?),
        _ => Ok(()),
    }
}

#[derive(Serialize)]
struct ReduceOutput {
    rng_seed: u64,
    system: reduced::ReducedReport,
    fixed_points: Vec<reduced::ReducedFixedPoint>,
    prediction: reduced::AmplitudePrediction,
}

#[derive(Serialize)]
struct SweepPoint {
    lambda: f64,
    states: Vec<steady::SteadyReport>,
}

#[derive(Serialize)]
struct Tagged<T: Serialize> {
    rng_seed: u64,
    #[serde(flatten)]
    body: T,
}

fn state_reports(states: &[SteadyState]) -> Vec<steady::SteadyReport> {
    states.iter().map(|s| s.report()).collect()
}

/// Executes the command line; the returned flag is false when a
/// verification check failed.
pub fn run(cli: Cli) -> Result<bool> {
    let base = |scenario: Option<&str>| -> Result<ExperimentConfig> {
        let mut cfg = match scenario {
            Some(s) => suite::preset(s)?,
            None => ExperimentConfig::default(),
        };
        if let Some(path) = &cli.config {
            cfg.apply_text(&std::fs::read_to_string(path)?)?;
        }
        if let Some(s) = cli.rng_seed {
            cfg.rng_seed = s;
        }
        if cli.jobs.is_some() {
            cfg.jobs = cli.jobs;
        }
        if let Some(o) = &cli.out {
            cfg.out_dir = Some(o.display().to_string());
        }
        Ok(cfg)
    };
    let scenario = match &cli.command {
        Command::Verify(v) => Some(v.scenario.as_str()),
        _ => None,
    };
    let mut cfg = base(scenario)?;
    if let Some(n) = cfg.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Usage(e.to_string()))?;
    }
    let out = cfg.out_dir.clone().map(PathBuf::from);
    let out = out.as_deref();
    match &cli.command {
        Command::Eig(a) => {
            a.domain.apply(&mut cfg);
            cfg.validate()?;
            let d = cfg.domain()?;
            let mut lambdas = vec![cfg.lambda];
            lambdas.extend(&a.at);
            let report = linear::principal(&d)?.report(&lambdas);
            write_json(out, "eig.json", &report)?;
        }
        Command::Run(a) => {
            a.domain.apply(&mut cfg);
            if let Some(v) = a.dt {
                cfg.dt = v;
            }
            if let Some(v) = a.t_end {
                cfg.t_end = v;
            }
            if let Some(v) = a.scheme {
                cfg.scheme = v;
            }
            if let Some(v) = a.sample_every {
                cfg.sample_every = v;
            }
            cfg.validate()?;
            let d = cfg.domain()?;
            let u0 = seed_field(&d, &cfg, &a.seed)?;
            let report = match integrate(&u0, cfg.params(), &cfg.stepper()) {
                Ok(r) => r,
                Err(Error::NonFinite { t, report }) => {
                    write_json(out, "run.json", &Tagged { rng_seed: cfg.rng_seed, body: &*report })?;
                    return Err(Error::NonFinite { t, report });
                }
                Err(e) => return Err(e),
            };
            write_json(out, "run.json", &Tagged { rng_seed: cfg.rng_seed, body: &report })?;
            if let Some(dir) = out {
                report.write_csv(std::fs::File::create(dir.join("timeseries.csv"))?)?;
            }
            write_snapshot(out, "initial", &u0)?;
            write_snapshot(out, "final", report.final_state())?;
        }
        Command::Steady(a) => {
            a.domain.apply(&mut cfg);
            if let Some(n) = a.nseeds {
                cfg.n_seeds = n;
            }
            if a.seed_scale.is_some() {
                cfg.seed_scale = a.seed_scale;
            }
            cfg.validate()?;
            let d = cfg.domain()?;
            let p = cfg.params();
            let states = if a.nseeds.is_some() && a.from_file.is_none() && a.from_mode.is_empty() {
                steady::find_all(&d, p, &census_config(&cfg))?
            } else {
                let u0 = match &a.from_file {
                    Some(path) => read_coeffs(&d, path)?,
                    None => {
                        let k = if a.from_mode.is_empty() { vec![1; d.dim()] } else { a.from_mode.clone() };
                        SpectralField::single(&d, &parse_mode(&d, &k, Parity::Sin)?, a.amplitude)?
                    }
                };
                vec![steady::solve_and_classify(&u0, p)?]
            };
            write_json(out, "steady.json", &Tagged { rng_seed: cfg.rng_seed, body: SweepPoint { lambda: p.lambda, states: state_reports(&states) } })?;
            for (i, s) in states.iter().enumerate() {
                write_snapshot(out, &format!("state_{i}"), &s.state)?;
            }
        }
        Command::Sweep(a) => {
            a.domain.apply(&mut cfg);
            if a.lambda_min.is_some() {
                cfg.lambda_min = a.lambda_min;
            }
            if a.lambda_max.is_some() {
                cfg.lambda_max = a.lambda_max;
            }
            if let Some(n) = a.lambda_steps {
                cfg.lambda_steps = n;
            }
            if let Some(n) = a.nseeds {
                cfg.n_seeds = n;
            }
            if a.seed_scale.is_some() {
                cfg.seed_scale = a.seed_scale;
            }
            cfg.validate()?;
            let d = cfg.domain()?;
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for lambda in cfg.lambdas() {
                let states = steady::find_all(&d, cfg.params().with_lambda(lambda), &census_config(&cfg))?;
                rows.extend(bifurcation_rows(lambda, &states)?);
                points.push(SweepPoint { lambda, states: state_reports(&states) });
            }
            write_json(out, "sweep.json", &Tagged { rng_seed: cfg.rng_seed, body: SweepOutput { points } })?;
            let csv = bifurcation_csv(&rows);
            if out.is_some() {
                write_text(out, "bifurcation.csv", &csv)?;
            } else {
                print!("{csv}");
            }
        }
        Command::Reduce(a) => {
            a.domain.apply(&mut cfg);
            cfg.validate()?;
            let d = cfg.domain()?;
            let p = Params { lambda: cfg.lambda, mu: cfg.mu };
            let sys = ReducedSystem::new(&d, p)?;
            let body = ReduceOutput {
                rng_seed: cfg.rng_seed,
                system: sys.report(),
                fixed_points: reduced::fixed_points(&sys),
                prediction: reduced::predict_amplitudes(&d, p)?,
            };
            write_json(out, "reduce.json", &body)?;
        }
        Command::Verify(v) => {
            let report = suite::run_suite(&v.scenario, &cfg)?;
            print!("{}", report.summary());
            println!("{}: {}", report.scenario, if report.passed { "PASS" } else { "FAIL" });
            return Ok(report.passed);
        }
    }
    Ok(true)
}

#[derive(Serialize)]
struct SweepOutput {
    points: Vec<SweepPoint>,
}
