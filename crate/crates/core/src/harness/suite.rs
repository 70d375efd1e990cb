//! Verification scenarios. Each one runs a fixed experiment, compares the
//! outcome with closed forms or independent oracles, and returns a
//! [`VerificationReport`] plus CSV artifacts.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::report::{Check, Comparison, Provenance, VerificationReport};
use crate::dynamics::{self, basin_probe, integrate, BasinLabel, Model, Params, Regime, Stepper, StepperConfig};
use crate::error::{Error, Result};
use crate::linear;
use crate::reduced::{self, FixedPointKind, ReducedSystem};
use crate::spectral::{Boundary, Domain, GridField, ModeIndex, SpectralField};
use crate::steady::{self, CensusConfig, SteadyState};

pub const SCENARIOS: &[&str] = &[
    "subcritical-decay",
    "critical-decay",
    "supercritical-bound",
    "pitchfork-amplitude",
    "pitchfork-dirichlet",
    "gsh-transcritical",
    "odd-periodic-census",
    "periodic-torus",
    "slaved-mode",
    "reduced-shadowing",
    "infrastructure",
];

/// Initial critical-mode coefficients of the shadowing experiment.
pub const SHADOW_START: [f64; 2] = [0.3, 0.2];

/// Largest wavenumber carried by random initial data.
pub const RANDOM_MAX_MODE: i32 = 8;

/// The experiment a scenario reproduces, before any user overrides.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let dirichlet = ExperimentConfig {
        scenario: Some(name.to_string()),
        band: Some(32),
        sample_every: 10,
        ..Default::default()
    };
    let odd2 = ExperimentConfig {
        scenario: Some(name.to_string()),
        dim: 2,
        bc: Boundary::OddPeriodic,
        length: 2.0 * PI,
        band: Some(31),
        lambda: 0.2,
        ..Default::default()
    };
    let cfg = match name {
        "subcritical-decay" => ExperimentConfig { lambda: 8.0, ..dirichlet },
        "critical-decay" => ExperimentConfig { lambda: 9.0, ..dirichlet },
        "supercritical-bound" => ExperimentConfig { lambda: 9.5, ..dirichlet },
        "pitchfork-amplitude" => ExperimentConfig {
            lambda_values: vec![9.05, 9.1, 9.2, 9.35, 9.5],
            band: Some(64),
            ..dirichlet
        },
        "pitchfork-dirichlet" => ExperimentConfig {
            lambda: 9.5,
            n_runs: 50,
            ..dirichlet
        },
        "gsh-transcritical" => ExperimentConfig {
            mu: 1.0,
            lambda_values: vec![8.9, 9.1],
            band: Some(64),
            ..dirichlet
        },
        "odd-periodic-census" => ExperimentConfig {
            seed_scale: Some(2.0),
            ..odd2
        },
        "periodic-torus" => ExperimentConfig {
            dim: 1,
            bc: Boundary::Periodic,
            band: Some(32),
            n_seeds: 16,
            ..odd2
        },
        "slaved-mode" => ExperimentConfig {
            lambda: 9.2,
            band: Some(64),
            ..dirichlet
        },
        "reduced-shadowing" => ExperimentConfig {
            lambda: 0.01,
            band: Some(15),
            dt: 1e-2,
            t_end: 50.0,
            sample_every: 100,
            ..odd2
        },
        "infrastructure" => ExperimentConfig {
            n_runs: 100,
            ..dirichlet
        },
        "all" => ExperimentConfig {
            scenario: Some("all".into()),
            ..Default::default()
        },
        other => return Err(Error::Usage(format!("unknown scenario '{other}'"))),
    };
    Ok(cfg)
}

/// Checks and CSV artifacts of one scenario run.
#[derive(Debug, Default)]
pub struct Outcome {
    pub checks: Vec<Check>,
    /// `(file name, contents)`
    pub artifacts: Vec<(String, String)>,
}

impl Outcome {
    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn attempt(&mut self, name: &str, f: impl FnOnce(&mut Outcome) -> Result<()>) {
        if let Err(e) = f(self) {
            self.checks.push(Check::error(name, e));
        }
    }
}

/// Run scenario `name` on `cfg`, writing `report.json` and the artifacts to
/// `cfg.out_dir/<name>/` when an output directory is set.
///
/// Module errors become failing checks; only an unknown id is an error.
pub fn run_suite(name: &str, cfg: &ExperimentConfig) -> Result<VerificationReport> {
    let report = match name {
        "all" => {
            let mut checks = Vec::new();
            for s in SCENARIOS {
                let mut sub = preset(s)?;
                sub.rng_seed = cfg.rng_seed;
                sub.out_dir = cfg.out_dir.clone();
                sub.jobs = cfg.jobs;
                let r = run_suite(s, &sub)?;
                checks.extend(r.checks.into_iter().map(|mut c| {
                    c.name = format!("{s}/{}", c.name);
                    c
                }));
            }
            let report = VerificationReport::new("all", cfg, checks);
            if let Some(dir) = &cfg.out_dir {
                write_outputs(&Path::new(dir).join("all"), &report, &[])?;
            }
            return Ok(report);
        }
        _ => {
            let outcome = dispatch(name, cfg)?;
            let report = VerificationReport::new(name, cfg, outcome.checks);
            if let Some(dir) = &cfg.out_dir {
                write_outputs(&Path::new(dir).join(name), &report, &outcome.artifacts)?;
            }
            report
        }
    };
    Ok(report)
}

fn dispatch(name: &str, cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let f: fn(&ExperimentConfig, &mut Outcome) -> Result<()> = match name {
        "subcritical-decay" | "critical-decay" | "supercritical-bound" => bounds,
        "pitchfork-amplitude" => pitchfork_amplitude,
        "pitchfork-dirichlet" => pitchfork_dirichlet,
        "gsh-transcritical" => gsh_transcritical,
        "odd-periodic-census" => odd_periodic_census,
        "periodic-torus" => periodic_torus,
        "slaved-mode" => slaved_mode,
        "reduced-shadowing" => reduced_shadowing,
        "infrastructure" => infrastructure,
        other => return Err(Error::Usage(format!("unknown scenario '{other}'"))),
    };
    if let Err(e) = cfg.validate().and_then(|_| f(cfg, &mut out)) {
        out.push(Check::error("scenario", e));
    }
    Ok(out)
}

fn write_outputs(dir: &Path, report: &VerificationReport, artifacts: &[(String, String)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), serde_json::to_string_pretty(report)? + "\n")?;
    for (file, body) in artifacts {
        std::fs::write(dir.join(file), body)?;
    }
    Ok(())
}

pub fn rng(cfg: &ExperimentConfig, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    r.set_stream(stream);
    r
}

/// Gaussian coefficients on the modes with every `|k_a| <= max_k`, scaled to
/// `|u|_2 = norm`.
pub fn random_field(domain: &Arc<Domain>, max_k: i32, norm: f64, rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    let c: Vec<f64> = domain
        .modes()
        .iter()
        .map(|m| {
            let x: f64 = StandardNormal.sample(rng);
            if m.k.iter().all(|k| k.abs() <= max_k) {
                x
            } else {
                0.0
            }
        })
        .collect();
    let u = SpectralField::from_coeffs(domain, c)?;
    let n = u.norm();
    if n == 0.0 {
        return Err(Error::Range("no modes below the requested wavenumber".into()));
    }
    Ok(u.scaled(norm / n))
}

/// Least-squares line `y = a + b x`; returns `(b, a)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}

/// Least squares `y = c1 x + c2 x^2`; returns `(c1, c2)`.
pub fn fit_quadratic_through_origin(x: &[f64], y: &[f64]) -> (f64, f64) {
    let s = |p: i32| x.iter().map(|v| v.powi(p)).sum::<f64>();
    let t = |p: i32| x.iter().zip(y).map(|(v, w)| v.powi(p) * w).sum::<f64>();
    let (a11, a12, a22) = (s(2), s(3), s(4));
    let (b1, b2) = (t(1), t(2));
    let det = a11 * a22 - a12 * a12;
    ((b1 * a22 - b2 * a12) / det, (a11 * b2 - a12 * b1) / det)
}

/// `(critical mode, index)` of a domain with a simple critical eigenvalue.
fn simple_critical(domain: &Arc<Domain>) -> Result<(ModeIndex, f64)> {
    let s = linear::principal(domain)?;
    if s.multiplicity != 1 {
        return Err(Error::Range(format!(
            "a simple critical eigenvalue is required, found multiplicity {}",
            s.multiplicity
        )));
    }
    Ok((s.critical_modes[0], s.lambda_c))
}

/// Newton from the leading-order pitchfork (or transcritical) state.
fn branch_state(domain: &Arc<Domain>, p: Params) -> Result<SteadyState> {
    let (mode, _) = simple_critical(domain)?;
    let pred = reduced::predict_amplitudes(domain, p)?;
    let fam = pred
        .family("transcritical")
        .or_else(|| pred.family("pitchfork"))
        .ok_or_else(|| Error::Range("no single-mode family".into()))?;
    if fam.coeffs[0] == 0.0 {
        return Err(Error::Range(format!("no nontrivial branch at lambda = {}", p.lambda)));
    }
    let s = steady::newton(&SpectralField::single(domain, &mode, fam.coeffs[0])?, p)?;
    steady::stability(&s)
}

fn bound_runs(cfg: &ExperimentConfig, lambda: f64, csv: &mut String, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let lc = linear::principal(&domain)?.lambda_c;
    let regime = Regime::classify(lambda, lc);
    let p = cfg.params().with_lambda(lambda);
    let mut r = rng(cfg, 1);
    let seeds = (0..cfg.n_runs)
        .map(|_| random_field(&domain, RANDOM_MAX_MODE, 1.0, &mut r))
        .collect::<Result<Vec<_>>>()?;
    let scfg = StepperConfig {
        stop_when_steady: false,
        ..cfg.stepper()
    };
    let runs = seeds
        .par_iter()
        .map(|u0| integrate(u0, p, &scfg))
        .collect::<Result<Vec<_>>>()?;
    let mut worst: f64 = 0.0;
    let mut worst_printed: f64 = 0.0;
    let mut final_ratio: f64 = 0.0;
    for (i, run) in runs.iter().enumerate() {
        let b = run.bound_check.as_ref().ok_or_else(|| Error::Range("bound not monitored".into()))?;
        worst = worst.max(b.worst_ratio);
        worst_printed = worst_printed.max(b.worst_ratio_printed);
        final_ratio = final_ratio.max(run.l2_norms.last().copied().unwrap_or(0.0) / run.l2_norms[0]);
        for k in 0..run.times.len() {
            let (bound, _) = dynamics::a_priori_bound(regime, lambda, lc, domain.volume(), run.l2_norms[0], run.times[k]);
            writeln!(
                csv,
                "{lambda},{i},{:.10e},{:.17e},{:.17e},{:.17e}",
                run.times[k], run.l2_norms[k], run.lyapunov_values[k], bound
            )
            .expect("string write");
        }
    }
    let tag = match regime {
        Regime::Subcritical => "subcritical",
        Regime::Critical => "critical",
        Regime::Supercritical => "supercritical",
    };
    out.push(
        Check::new(
            format!("{tag}-bound/lambda={lambda}"),
            1.0,
            worst,
            dynamics::BOUND_SLACK,
            Comparison::AtMost,
            Provenance::ClosedForm,
        )
        .with_note(format!(
            "max |u(t)|/bound(t) over {} runs; commonly printed form gives {worst_printed:.6e}",
            runs.len()
        )),
    );
    if regime == Regime::Critical {
        out.push(Check::new(
            format!("critical-final-decay/lambda={lambda}"),
            0.5,
            final_ratio,
            0.0,
            Comparison::AtMost,
            Provenance::ClosedForm,
        ));
    }
    Ok(())
}

fn bounds(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let mut csv = String::from("lambda,run,t,l2,lyapunov,bound\n");
    for lambda in cfg.lambdas() {
        out.attempt(&format!("bound/lambda={lambda}"), |o| bound_runs(cfg, lambda, &mut csv, o));
    }
    out.artifacts.push(("timeseries.csv".into(), csv));
    Ok(())
}

fn pitchfork_amplitude(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let (mode, lc) = simple_critical(&domain)?;
    let idx = domain.index_of(&mode).expect("critical mode is retained");
    let mut lambdas: Vec<f64> = cfg.lambdas().into_iter().filter(|&l| l > lc).collect();
    lambdas.sort_by(f64::total_cmp);
    if lambdas.len() < 2 {
        return Err(Error::Range("need two parameter values above threshold".into()));
    }
    let states = lambdas
        .par_iter()
        .map(|&l| branch_state(&domain, cfg.params().with_lambda(l)))
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("lambda,delta,amplitude,amplitude_squared\n");
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (l, s) in lambdas.iter().zip(&states) {
        let a = s.physical_amplitude(&mode);
        writeln!(csv, "{l},{:.17e},{a:.17e},{:.17e}", l - lc, a * a).expect("string write");
        xs.push(l - lc);
        ys.push(a * a);
    }
    let (slope, _) = fit_line(&xs, &ys);
    out.push(
        Check::new("amplitude-squared-slope", 4.0 / 3.0, slope, 0.03, Comparison::Relative, Provenance::ClosedForm)
            .with_note("least-squares slope of a^2 against lambda - lambda_c"),
    );
    let u = states[0].state.to_grid();
    let phi = GridField::sample(&domain, |x| domain.basis_value(idx, x));
    let dot: f64 = u.values().iter().zip(phi.values()).map(|(a, b)| a * b).sum();
    let n = |g: &GridField| g.values().iter().map(|v| v * v).sum::<f64>().sqrt();
    out.push(Check::new(
        format!("profile-cosine/lambda={}", lambdas[0]),
        0.999,
        dot.abs() / (n(&u) * n(&phi)),
        0.0,
        Comparison::AtLeast,
        Provenance::ClosedForm,
    ));
    out.artifacts.push(("amplitude.csv".into(), csv));
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct BifurcationRow {
    pub lambda: f64,
    pub state_id: usize,
    /// Signed bare amplitude of the dominant critical mode.
    pub amplitude: f64,
    pub morse_index: Option<usize>,
}

pub fn bifurcation_rows(lambda: f64, states: &[SteadyState]) -> Result<Vec<BifurcationRow>> {
    let Some(first) = states.first() else {
        return Ok(Vec::new());
    };
    let summary = linear::principal(first.domain())?;
    Ok(states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let amplitude = summary
                .critical_modes
                .iter()
                .map(|m| s.physical_amplitude(m))
                .fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
            BifurcationRow {
                lambda,
                state_id: i,
                amplitude,
                morse_index: s.morse_index,
            }
        })
        .collect())
}

pub fn bifurcation_csv(rows: &[BifurcationRow]) -> String {
    let mut s = String::from("lambda,state_id,amplitude,morse_index\n");
    for r in rows {
        let m = r.morse_index.map(|m| m.to_string()).unwrap_or_default();
        writeln!(s, "{},{},{:.17e},{}", r.lambda, r.state_id, r.amplitude, m).expect("string write");
    }
    s
}

pub fn census_config(cfg: &ExperimentConfig) -> CensusConfig {
    CensusConfig {
        n_seeds: cfg.n_seeds,
        seed_scale: cfg.seed_scale.unwrap_or(1.0),
        rng_seed: cfg.rng_seed,
        ..Default::default()
    }
}

fn pitchfork_dirichlet(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let summary = linear::principal(&domain)?;
    let mut rows = Vec::new();
    let mut csv = String::from("lambda,run,t,l2,lyapunov,bound\n");
    for lambda in cfg.lambdas() {
        out.attempt(&format!("bound/lambda={lambda}"), |o| bound_runs(cfg, lambda, &mut csv, o));
        out.attempt(&format!("census/lambda={lambda}"), |o| {
            let p = cfg.params().with_lambda(lambda);
            let states = steady::find_all(&domain, p, &census_config(cfg))?;
            rows.extend(bifurcation_rows(lambda, &states)?);
            let nonzero: Vec<&SteadyState> = states.iter().filter(|s| !s.is_trivial()).collect();
            let above = lambda > summary.lambda_c && summary.multiplicity == 1;
            o.push(Check::count(
                format!("steady-state-count/lambda={lambda}"),
                if above { 3 } else { 1 },
                states.len(),
                Provenance::ClosedForm,
            ));
            if !above {
                return Ok(());
            }
            if nonzero.len() == 2 {
                o.push(Check::new(
                    format!("states-antisymmetric/lambda={lambda}"),
                    0.0,
                    nonzero[1].state.distance(&-&nonzero[0].state)?,
                    1e-8,
                    Comparison::AtMost,
                    Provenance::Invariant,
                ));
            }
            let total = steady::index_sum(&states);
            o.push(match total {
                Ok(v) => Check::new(
                    format!("index-sum/lambda={lambda}"),
                    steady::index_formula(summary.multiplicity) as f64,
                    v as f64,
                    0.0,
                    Comparison::Exact,
                    Provenance::ClosedForm,
                ),
                Err(e) => Check::error(format!("index-sum/lambda={lambda}"), e),
            });
            let mut r = rng(cfg, 2);
            let seeds = (0..cfg.n_runs)
                .map(|_| random_field(&domain, RANDOM_MAX_MODE, 1.0, &mut r))
                .collect::<Result<Vec<_>>>()?;
            let targets: Vec<SpectralField> = nonzero.iter().map(|s| s.state.clone()).collect();
            let bcfg = StepperConfig {
                t_end: cfg.t_end.max(200.0),
                stop_when_steady: true,
                ..cfg.stepper()
            };
            let labels = basin_probe(p, &seeds, &targets, &bcfg, 1e6)?;
            let captured = labels.iter().filter(|l| matches!(l, BasinLabel::State(_))).count();
            o.push(
                Check::count(
                    format!("basins-captured/lambda={lambda}"),
                    labels.len(),
                    captured,
                    Provenance::ClosedForm,
                )
                .with_note(format!(
                    "{} trivial, {} divergent, {} unresolved",
                    labels.iter().filter(|l| **l == BasinLabel::Trivial).count(),
                    labels.iter().filter(|l| **l == BasinLabel::Divergent).count(),
                    labels.iter().filter(|l| **l == BasinLabel::Unresolved).count()
                )),
            );
            Ok(())
        });
    }
    out.artifacts.push(("timeseries.csv".into(), csv));
    out.artifacts.push(("bifurcation.csv".into(), bifurcation_csv(&rows)));
    Ok(())
}

fn gsh_transcritical(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let (mode, lc) = simple_critical(&domain)?;
    let law = 3.0 * PI / 8.0;
    let mut csv = String::from("lambda,delta,amplitude,predicted,morse_index\n");
    for lambda in cfg.lambdas() {
        out.attempt(&format!("branch/lambda={lambda}"), |o| {
            let s = branch_state(&domain, cfg.params().with_lambda(lambda))?;
            let a = s.physical_amplitude(&mode);
            let pred = law * (lc - lambda) / cfg.mu;
            let morse = s.morse_index.unwrap_or(usize::MAX);
            writeln!(csv, "{lambda},{:.17e},{a:.17e},{pred:.17e},{morse}", lambda - lc).expect("string write");
            o.push(Check::count(
                format!("morse-index/lambda={lambda}"),
                if lambda < lc { 1 } else { 0 },
                morse,
                Provenance::ClosedForm,
            ));
            o.push(Check::new(
                format!("amplitude/lambda={lambda}"),
                pred,
                a,
                0.1,
                Comparison::Relative,
                Provenance::ClosedForm,
            ));
            Ok(())
        });
    }
    out.attempt("linearity", |o| {
        let deltas: Vec<f64> = (1..=5).map(|i| 0.02 * i as f64).collect();
        let dmax = deltas[deltas.len() - 1];
        // relative size of the quadratic term at the end of the range
        let curvature = |sign: f64| -> Result<f64> {
            let amps = deltas
                .par_iter()
                .map(|&d| Ok(branch_state(&domain, cfg.params().with_lambda(lc + sign * d))?.physical_amplitude(&mode)))
                .collect::<Result<Vec<f64>>>()?;
            let (c1, c2) = fit_quadratic_through_origin(&deltas, &amps);
            Ok((c2 * dmax / c1).abs())
        };
        let above = curvature(1.0)?;
        let below = curvature(-1.0)?;
        o.push(
            Check::new("linearity", 0.0, above, 0.1, Comparison::AtMost, Provenance::ClosedForm).with_note(format!(
                "|c2 delta_max / c1| for a = c1 delta + c2 delta^2, lambda - lambda_c in [0.02, 0.1]; \
                 the mirrored range below threshold gives {below:.4e}"
            )),
        );
        Ok(())
    });
    out.artifacts.push(("transcritical.csv".into(), csv));
    Ok(())
}

fn odd_periodic_census(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let p = cfg.params();
    let sys = ReducedSystem::new(&domain, p)?;
    let pred = reduced::predict_amplitudes(&domain, p)?;
    let fps = reduced::fixed_points(&sys);
    let nonzero_fps: Vec<_> = fps.iter().filter(|f| f.x.iter().any(|v| *v != 0.0)).collect();
    let states = steady::find_all(&domain, p, &census_config(cfg))?;
    let nonzero: Vec<&SteadyState> = states.iter().filter(|s| !s.is_trivial()).collect();
    out.push(
        Check::count("nonzero-states", nonzero_fps.len() / 2, nonzero.len(), Provenance::Oracle)
            .with_note("reduced fixed points modulo u -> -u"),
    );
    let mut csv = String::from("state,morse_index,l2");
    for l in sys.labels() {
        write!(csv, ",{l}").expect("string write");
    }
    csv.push('\n');
    let mut agree = 0;
    for (i, s) in nonzero.iter().enumerate() {
        let x = sys.project(&s.state);
        let xa: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        let err = |c: &[f64]| {
            let top = c.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            xa.iter().zip(c).map(|(a, b)| (a - b.abs()).abs()).fold(0.0, f64::max) / top
        };
        let best = pred
            .families
            .iter()
            .map(|f| (f.name.as_str(), err(&f.coeffs)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Range("no amplitude families".into()))?;
        out.push(
            Check::new(format!("amplitude/state={i}"), 0.0, best.1, 0.05, Comparison::AtMost, Provenance::Oracle)
                .with_note(format!("max relative deviation from the {} family", best.0)),
        );
        let nearest = nonzero_fps
            .iter()
            .min_by(|a, b| {
                let d = |f: &reduced::ReducedFixedPoint| f.x.iter().zip(&x).map(|(u, v)| (u - v).powi(2)).sum::<f64>();
                d(a).total_cmp(&d(b))
            })
            .ok_or_else(|| Error::Range("no reduced fixed points".into()))?;
        if s.morse_index == Some(nearest.index) {
            agree += 1;
        }
        write!(csv, "{i},{},{:.17e}", s.morse_index.unwrap_or(usize::MAX), s.norm()).expect("string write");
        for v in &x {
            write!(csv, ",{v:.17e}").expect("string write");
        }
        csv.push('\n');
    }
    let attractors = nonzero_fps.iter().filter(|f| f.kind == FixedPointKind::Attractor).count() / 2;
    let saddles = nonzero_fps.iter().filter(|f| f.kind == FixedPointKind::Saddle).count() / 2;
    out.push(Check::count(
        "attractors",
        attractors,
        nonzero.iter().filter(|s| s.morse_index == Some(0)).count(),
        Provenance::Oracle,
    ));
    out.push(Check::count(
        "saddles",
        saddles,
        nonzero.iter().filter(|s| s.morse_index.is_some_and(|m| m > 0)).count(),
        Provenance::Oracle,
    ));
    out.push(
        Check::count("stability-matches-reduced", nonzero.len(), agree, Provenance::Oracle)
            .with_note("pure states attract, mixed states are saddles"),
    );
    let summary = linear::principal(&domain)?;
    out.push(match steady::index_sum(&states) {
        Ok(v) => Check::new(
            "index-sum",
            steady::index_formula(summary.multiplicity) as f64,
            v as f64,
            0.0,
            Comparison::Exact,
            Provenance::ClosedForm,
        ),
        Err(e) => Check::error("index-sum", e),
    });
    out.artifacts.push(("census.csv".into(), csv));
    Ok(())
}

fn periodic_torus(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let p = cfg.params();
    let n = cfg.n_seeds.max(1);
    let thetas: Vec<Vec<f64>> = (0..n)
        .map(|j| vec![2.0 * PI * j as f64 / n as f64; domain.dim()])
        .collect();
    let states = reduced::torus_points(&domain, p, &thetas)?;
    let states = states.par_iter().map(steady::stability).collect::<Result<Vec<_>>>()?;
    let max_res = states.iter().map(|s| s.residual).fold(0.0, f64::max);
    let norms: Vec<f64> = states.iter().map(|s| s.norm()).collect();
    let spread = norms.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - norms.iter().cloned().fold(f64::INFINITY, f64::min);
    out.push(Check::new("max-residual", 0.0, max_res, steady::RESIDUAL_TOL, Comparison::AtMost, Provenance::Invariant));
    out.push(Check::new("norm-spread", 0.0, spread, 1e-6, Comparison::AtMost, Provenance::Invariant));
    let one_neutral = states.iter().filter(|s| s.neutral_eigs.len() == domain.dim()).count();
    out.push(
        Check::count("neutral-modes", states.len(), one_neutral, Provenance::Invariant)
            .with_note("states with exactly one neutral eigenvalue per translation direction"),
    );
    let top = states
        .iter()
        .flat_map(|s| s.leading_eigs.first().copied())
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(Check::new("max-leading-eigenvalue", 0.0, top, steady::NEUTRAL_BAND, Comparison::AtMost, Provenance::Invariant));
    let mut csv = String::from("phase,l2,residual,leading_eig,neutral_count\n");
    for (t, s) in thetas.iter().zip(&states) {
        writeln!(
            csv,
            "{:.17e},{:.17e},{:.3e},{:.17e},{}",
            t[0],
            s.norm(),
            s.residual,
            s.leading_eigs.first().copied().unwrap_or(f64::NAN),
            s.neutral_eigs.len()
        )
        .expect("string write");
    }
    out.artifacts.push(("torus.csv".into(), csv));
    Ok(())
}

fn slaved_mode(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let s = branch_state(&domain, cfg.params())?;
    let x1 = s.coeff(&ModeIndex::sin(&[1]));
    let x3 = s.coeff(&ModeIndex::sin(&[3]));
    let pred = reduced::slaved_mode(&domain, cfg.lambda)?;
    out.push(
        Check::new("slaved-ratio", pred.ratio, x3 / x1.powi(3), 0.02, Comparison::Relative, Provenance::Oracle)
            .with_note(format!("closed form -1/(2 L beta_3) gives {:.10e}", pred.printed_ratio)),
    );
    out.push(Check::new(
        "closed-form-agrees",
        pred.ratio,
        pred.printed_ratio,
        1e-10,
        Comparison::Relative,
        Provenance::ClosedForm,
    ));
    out.artifacts.push((
        "slaved.csv".into(),
        format!(
            "lambda,x1,x3,ratio,predicted,printed\n{},{x1:.17e},{x3:.17e},{:.17e},{:.17e},{:.17e}\n",
            cfg.lambda,
            x3 / x1.powi(3),
            pred.ratio,
            pred.printed_ratio
        ),
    ));
    Ok(())
}

/// Critical-mode trajectories of the PDE and of the reduced flow from the
/// same initial amplitudes, sampled every `sample_every` steps.
pub fn shadowing(
    domain: &Arc<Domain>,
    p: Params,
    x0: &[f64],
    stepper: &StepperConfig,
) -> Result<(Vec<(f64, Vec<f64>)>, Vec<(f64, Vec<f64>)>)> {
    let sys = ReducedSystem::new(domain, p)?;
    if x0.len() != sys.m() {
        return Err(Error::Range(format!("{} initial amplitudes for {} modes", x0.len(), sys.m())));
    }
    let st = Stepper::new(Model::new(domain, p)?, stepper.dt, stepper.scheme);
    let steps = (stepper.t_end / stepper.dt).round() as usize;
    let mut u = sys.lift(x0)?;
    let mut pde = vec![(0.0, x0.to_vec())];
    for n in 1..=steps {
        u = st.step(&u)?;
        if n % stepper.sample_every == 0 || n == steps {
            pde.push((n as f64 * stepper.dt, sys.project(&u)));
        }
    }
    let red = reduced::integrate_flow(&sys, x0, stepper.t_end, stepper.dt, stepper.sample_every);
    Ok((pde, red))
}

fn reduced_shadowing(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let domain = cfg.domain()?;
    let (pde, red) = shadowing(&domain, cfg.params(), &SHADOW_START, &cfg.stepper())?;
    let mut worst: f64 = 0.0;
    let mut csv = String::from("t");
    for j in 0..SHADOW_START.len() {
        write!(csv, ",pde_{j},reduced_{j}").expect("string write");
    }
    csv.push('\n');
    for ((t, a), (_, b)) in pde.iter().zip(&red) {
        write!(csv, "{t:.6}").expect("string write");
        for (x, y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs() / y.abs());
            write!(csv, ",{x:.17e},{y:.17e}").expect("string write");
        }
        csv.push('\n');
    }
    out.push(
        Check::new("max-relative-deviation", 0.0, worst, 0.1, Comparison::AtMost, Provenance::Oracle)
            .with_note(format!("critical amplitudes over t in [0, {}]", cfg.t_end)),
    );
    out.artifacts.push(("shadowing.csv".into(), csv));
    Ok(())
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (mut q0, mut q1) = (1.0, z);
                for k in 2..=n {
                    let q2 = ((2 * k - 1) as f64 * z * q1 - (k - 1) as f64 * q0) / k as f64;
                    q0 = q1;
                    q1 = q2;
                }
                let dq = n as f64 * (z * q1 - q0) / (z * z - 1.0);
                w[i] = 2.0 / ((1.0 - z * z) * dq * dq);
                break;
            }
        }
        x[i] = z;
    }
    (x, w)
}

/// Projection of a pointwise function of `u` by direct quadrature,
/// independent of the transform path: the rectangle rule over a period for
/// periodic boxes, Gauss-Legendre on the Dirichlet interval (where the
/// integrands include half-period sines).
pub fn quadrature_projection(u: &SpectralField, f: impl Fn(f64) -> f64, per_axis: usize) -> Vec<f64> {
    let d = u.domain();
    let dim = d.dim();
    let active: Vec<usize> = (0..d.len()).filter(|&i| u.coeffs()[i] != 0.0).collect();
    let mut acc = vec![0.0; d.len()];
    let mut add = |x: &[f64], weight: f64| {
        let val: f64 = active.iter().map(|&i| u.coeffs()[i] * d.basis_value(i, x)).sum();
        let fv = f(val) * weight;
        for (i, a) in acc.iter_mut().enumerate() {
            *a += fv * d.basis_value(i, x);
        }
    };
    if d.bc() == Boundary::Dirichlet {
        let l = d.lengths()[0];
        let (nodes, weights) = gauss_legendre(per_axis);
        for (z, w) in nodes.iter().zip(&weights) {
            add(&[0.5 * l * (z + 1.0)], 0.5 * l * w);
        }
        return acc;
    }
    let weight: f64 = d.lengths().iter().map(|l| l / per_axis as f64).product();
    let mut x = vec![0.0; dim];
    for p in 0..per_axis.pow(dim as u32) {
        let mut rem = p;
        for a in (0..dim).rev() {
            x[a] = (rem % per_axis) as f64 * d.lengths()[a] / per_axis as f64;
            rem /= per_axis;
        }
        add(&x, weight);
    }
    acc
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn sparse_field(domain: &Arc<Domain>, n_modes: usize, max_k: i32, rng: &mut ChaCha8Rng) -> Result<SpectralField> {
    let eligible: Vec<usize> = (0..domain.len())
        .filter(|&i| domain.modes()[i].k.iter().all(|k| k.abs() <= max_k))
        .collect();
    let mut c = vec![0.0; domain.len()];
    for _ in 0..n_modes {
        let pick: f64 = rand::Rng::random(rng);
        let i = eligible[((pick * eligible.len() as f64) as usize).min(eligible.len() - 1)];
        c[i] = StandardNormal.sample(rng);
    }
    SpectralField::from_coeffs(domain, c)
}

fn infrastructure(cfg: &ExperimentConfig, out: &mut Outcome) -> Result<()> {
    let mut r = rng(cfg, 3);
    let spaces: Vec<(&str, Arc<Domain>)> = vec![
        ("dirichlet-1d", Domain::line(Boundary::Dirichlet, PI / 2.0, 32)?),
        ("odd-periodic-1d", Domain::line(Boundary::OddPeriodic, 2.0 * PI, 32)?),
        ("odd-periodic-2d", Domain::cube(Boundary::OddPeriodic, 2, 2.0 * PI, 12)?),
        ("periodic-1d", Domain::line(Boundary::Periodic, 2.0 * PI, 32)?),
        ("periodic-2d", Domain::cube(Boundary::Periodic, 2, 2.0 * PI, 12)?),
    ];
    for (name, d) in &spaces {
        let mut worst: f64 = 0.0;
        for _ in 0..cfg.n_runs {
            let u = random_field(d, i32::MAX, 1.0, &mut r)?;
            worst = worst.max(max_abs_diff(u.coeffs(), u.to_grid().to_spectral().coeffs()));
        }
        out.push(Check::new(format!("roundtrip/{name}"), 0.0, worst, 1e-12, Comparison::AtMost, Provenance::Invariant));
        let (mut wc, mut ws) = (0.0f64, 0.0f64);
        for _ in 0..5 {
            let u = sparse_field(d, 5, 3, &mut r)?;
            let n = if d.bc() == Boundary::Dirichlet { 160 } else { 48 };
            wc = wc.max(max_abs_diff(u.cube()?.coeffs(), &quadrature_projection(&u, |v| v * v * v, n)));
            ws = ws.max(max_abs_diff(u.square()?.coeffs(), &quadrature_projection(&u, |v| v * v, n)));
        }
        out.push(Check::new(format!("cube/{name}"), 0.0, wc, 1e-12, Comparison::AtMost, Provenance::Oracle));
        out.push(Check::new(format!("square/{name}"), 0.0, ws, 1e-12, Comparison::AtMost, Provenance::Oracle));
    }

    let d = Domain::line(Boundary::Dirichlet, PI / 2.0, 32)?;
    let p = Params::gsh(9.5, 0.5);
    out.attempt("jacobian-fd-slope", |o| {
        let u = random_field(&d, RANDOM_MAX_MODE, 1.0, &mut r)?;
        let v = random_field(&d, RANDOM_MAX_MODE, 1.0, &mut r)?;
        let (slope, _) = jacobian_fd_slope(&u, &v, p)?;
        o.push(Check::new("jacobian-fd-slope", 2.0, slope, 0.2, Comparison::Absolute, Provenance::Invariant));
        Ok(())
    });
    out.attempt("etdrk2-order", |o| {
        // low modes only: rough data puts the whole dt range inside the
        // initial layer of the stiff modes
        let u0 = random_field(&d, 2, 1.0, &mut r)?;
        let slope = time_order_slope(&u0, p, dynamics::Scheme::Etdrk2)?;
        o.push(Check::new("etdrk2-order", 2.0, slope, 0.2, Comparison::Absolute, Provenance::Invariant));
        Ok(())
    });
    out.attempt("lyapunov-monotone", |o| {
        let seeds = (0..cfg.n_runs)
            .map(|_| random_field(&d, RANDOM_MAX_MODE, 1.0, &mut r))
            .collect::<Result<Vec<_>>>()?;
        let scfg = StepperConfig {
            dt: 1e-3,
            t_end: 1.0,
            sample_every: 1,
            stop_when_steady: false,
            ..Default::default()
        };
        let rises = seeds
            .par_iter()
            .map(|u0| {
                let run = integrate(u0, Params::sh(9.5), &scfg)?;
                Ok(run.lyapunov_values.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max))
            })
            .collect::<Result<Vec<f64>>>()?;
        let worst = rises.into_iter().fold(f64::NEG_INFINITY, f64::max);
        o.push(
            Check::new("lyapunov-monotone", 0.0, worst, 1e-10, Comparison::AtMost, Provenance::Invariant)
                .with_note(format!("largest per-step increase over {} trajectories", seeds.len())),
        );
        Ok(())
    });
    Ok(())
}

/// Log-log slope of `|F(u + h v) - F(u) - h J v|` over `h = 0.2 .. 0.025`.
pub fn jacobian_fd_slope(u: &SpectralField, v: &SpectralField, p: Params) -> Result<(f64, Vec<f64>)> {
    let f0 = steady::residual(u, p)?;
    let jv = steady::jacobian_apply(u, p, v)?;
    let hs = [0.2, 0.1, 0.05, 0.025];
    let mut errs = Vec::new();
    for h in hs {
        let fh = steady::residual(&u.axpy(h, v)?, p)?;
        errs.push((&(&fh - &f0) - &jv.scaled(h)).norm());
    }
    let lx: Vec<f64> = hs.iter().map(|h: &f64| h.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    Ok((fit_line(&lx, &ly).0, errs))
}

/// Observed convergence order at `t = 1` against a `dt = 1e-5` reference.
pub fn time_order_slope(u0: &SpectralField, p: Params, scheme: dynamics::Scheme) -> Result<f64> {
    let at = |dt: f64| -> Result<SpectralField> {
        let cfg = StepperConfig {
            dt,
            t_end: 1.0,
            scheme,
            sample_every: usize::MAX,
            stop_when_steady: false,
        };
        Ok(integrate(u0, p, &cfg)?.final_state().clone())
    };
    let reference = at(1e-5)?;
    let dts = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4];
    let errs = dts
        .par_iter()
        .map(|&dt| Ok(at(dt)?.distance(&reference)?))
        .collect::<Result<Vec<f64>>>()?;
    let lx: Vec<f64> = dts.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    Ok(fit_line(&lx, &ly).0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_scenario_is_usage_error() {
        assert!(matches!(
            run_suite("nope", &ExperimentConfig::default()),
            Err(Error::Usage(_))
        ));
        assert!(matches!(preset("nope"), Err(Error::Usage(_))));
    }

    #[test]
    fn fits() {
        let x = [1.0, 2.0, 3.0];
        let (b, a) = fit_line(&x, &[3.0, 5.0, 7.0]);
        assert!((b - 2.0).abs() < 1e-12 && (a - 1.0).abs() < 1e-12);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 0.5 * v * v).collect();
        let (c1, c2) = fit_quadratic_through_origin(&x, &y);
        assert!((c1 - 2.0).abs() < 1e-12 && (c2 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(12);
        let q = |p: i32| x.iter().zip(&w).map(|(a, b)| a.powi(p) * b).sum::<f64>();
        assert!((q(0) - 2.0).abs() < 1e-14);
        assert!((q(22) - 2.0 / 23.0).abs() < 1e-14);
        assert!(q(21).abs() < 1e-14);
    }

    #[test]
    fn presets_are_valid() {
        for s in SCENARIOS {
            preset(s).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn slaved_scenario_passes() {
        let r = run_suite("slaved-mode", &preset("slaved-mode").unwrap()).unwrap();
        assert!(r.passed, "{}", r.summary());
    }
}
