//! Time integration by exponential time differencing, with monitors for the
//! a priori `L^2` bounds and the gradient-flow structure.
//!
//! The linear part `-(I + Delta)^2 + lambda` is diagonal in the basis and is
//! integrated exactly; only the polynomial nonlinearity `mu u^2 - u^3` is
//! approximated, so the step size is limited by accuracy alone.
//!
//! Each sample is checked against the bound that the energy estimate
//! `d|u|^2/dt <= 2 (lambda - lambda_c) |u|^2 - (2/|Omega|) |u|^4` implies:
//!
//! * `lambda < lambda_c`: `|u(t)| <= exp((lambda - lambda_c) t) |u(0)|`
//! * `lambda = lambda_c`: `|u(t)|^2 <= |u(0)|^2 / ((2/|Omega|) |u(0)|^2 t + 1)`
//! * `lambda > lambda_c`: `|u(t)|^2 <= max(|u(0)|^2, (lambda - lambda_c) |Omega|)`
//!
//! The commonly quoted forms `|u(0)| / sqrt(2 |Omega| |u(0)|^2 t + 1)` and
//! `max(sqrt((lambda - lambda_c)/|Omega|), |u(0)|)` are evaluated alongside and
//! reported, but do not decide pass/fail.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{self, symbol_p};
use crate::spectral::{Boundary, Domain, SpectralField, Symmetry};

/// Relative slack allowed when comparing a sampled norm with its bound.
pub const BOUND_SLACK: f64 = 1e-6;
/// `|du/dt|` below which a sample counts as stationary.
pub const STEADY_RATE: f64 = 1e-9;
/// Consecutive stationary samples that end an integration.
pub const STEADY_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub lambda: f64,
    /// Quadratic coefficient; zero for the plain equation.
    pub mu: f64,
}

impl Params {
    pub fn sh(lambda: f64) -> Self {
        Self { lambda, mu: 0.0 }
    }

    pub fn gsh(lambda: f64, mu: f64) -> Self {
        Self { lambda, mu }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn validate(&self, domain: &Domain) -> Result<()> {
        if !self.lambda.is_finite() || !self.mu.is_finite() {
            return Err(Error::Range("parameters must be finite".into()));
        }
        if self.mu < 0.0 {
            return Err(Error::Range(format!("mu = {} must be non-negative", self.mu)));
        }
        if self.mu > 0.0 && domain.bc() != Boundary::Dirichlet {
            return Err(Error::Range(
                "the quadratic term is supported with Dirichlet conditions only".into(),
            ));
        }
        Ok(())
    }
}

/// Right-hand side `L_lambda u + mu u^2 - u^3` on a fixed domain.
#[derive(Clone, Debug)]
pub struct Model {
    domain: Arc<Domain>,
    params: Params,
    beta: Vec<f64>,
}

impl Model {
    pub fn new(domain: &Arc<Domain>, params: Params) -> Result<Self> {
        params.validate(domain)?;
        domain.check_dealiased()?;
        Ok(Self {
            domain: domain.clone(),
            params,
            beta: linear::linear_symbol(domain, params.lambda),
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Projection of `mu u^2 - u^3`.
    pub fn nonlinear(&self, u: &SpectralField) -> SpectralField {
        let mu = self.params.mu;
        let ext: Vec<f64> = u
            .to_ext()
            .into_iter()
            .map(|v| v * v * (mu - v))
            .collect();
        let sym = if mu == 0.0 { Symmetry::Odd } else { Symmetry::Any };
        SpectralField::from_ext(&self.domain, &ext, sym)
    }

    pub fn rhs(&self, u: &SpectralField) -> SpectralField {
        let mut n = self.nonlinear(u);
        for ((o, b), c) in n.coeffs_mut().iter_mut().zip(&self.beta).zip(u.coeffs()) {
            *o += b * c;
        }
        n
    }

    /// `F[u] = int 1/2 ((I+Delta)u)^2 - lambda/2 u^2 - mu/3 u^3 + 1/4 u^4`; the
    /// flow is its `L^2` gradient descent.
    pub fn lyapunov(&self, u: &SpectralField) -> f64 {
        let quad: f64 = u
            .coeffs()
            .iter()
            .zip(self.domain.kappa2())
            .map(|(c, &k2)| 0.5 * (symbol_p(k2) - self.params.lambda) * c * c)
            .sum();
        let ext = u.to_ext();
        let cube: Vec<f64> = ext.iter().map(|v| v * v * v).collect();
        let quartic = SpectralField::from_ext(&self.domain, &cube, Symmetry::Odd)
            .inner(u)
            .unwrap_or(0.0);
        let cubic = if self.params.mu != 0.0 {
            let sq: Vec<f64> = ext.iter().map(|v| v * v).collect();
            SpectralField::from_ext(&self.domain, &sq, Symmetry::Even)
                .inner(u)
                .unwrap_or(0.0)
        } else {
            0.0
        };
        quad - self.params.mu / 3.0 * cubic + 0.25 * quartic
    }
}

pub fn lyapunov(u: &SpectralField, p: Params) -> Result<f64> {
    Ok(Model::new(u.domain(), p)?.lyapunov(u))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    Etd1,
    Etdrk2,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "etd1" => Ok(Scheme::Etd1),
            "etdrk2" => Ok(Scheme::Etdrk2),
            _ => Err(Error::Range(format!("unknown scheme '{s}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub sample_every: usize,
    /// End early once the state is stationary.
    pub stop_when_steady: bool,
}

impl Default for StepperConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 10.0,
            scheme: Scheme::Etdrk2,
            sample_every: 100,
            stop_when_steady: true,
        }
    }
}

impl StepperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Range(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Range(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if self.sample_every == 0 {
            return Err(Error::Range("sample_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// `phi_1(z) = (e^z - 1) / z`.
fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-5 {
        1.0 + z / 2.0 + z * z / 6.0
    } else {
        z.exp_m1() / z
    }
}

/// `phi_2(z) = (e^z - 1 - z) / z^2`.
fn phi2(z: f64) -> f64 {
    if z.abs() < 0.1 {
        // sum_k z^k / (k + 2)!
        let mut term = 0.5;
        let mut sum = term;
        for k in 1..10 {
            term *= z / (k + 2) as f64;
            sum += term;
        }
        sum
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

/// Exponential integrator with exact treatment of the diagonal linear part.
#[derive(Clone, Debug)]
pub struct Stepper {
    model: Model,
    scheme: Scheme,
    dt: f64,
    decay: Vec<f64>,
    w1: Vec<f64>,
    w2: Vec<f64>,
    nonlinear: bool,
}

impl Stepper {
    pub fn new(model: Model, dt: f64, scheme: Scheme) -> Self {
        let decay = model.beta().iter().map(|b| (b * dt).exp()).collect();
        let w1 = model.beta().iter().map(|b| dt * phi1(b * dt)).collect();
        let w2 = model.beta().iter().map(|b| dt * phi2(b * dt)).collect();
        Self {
            model,
            scheme,
            dt,
            decay,
            w1,
            w2,
            nonlinear: true,
        }
    }

    /// Stepper that drops the nonlinearity, leaving the exact linear flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, u: &SpectralField) -> Result<SpectralField> {
        let next = if !self.nonlinear {
            u.with_coeffs(u.coeffs().iter().zip(&self.decay).map(|(c, e)| c * e).collect())
        } else {
            let n0 = self.model.nonlinear(u);
            let a: Vec<f64> = u
                .coeffs()
                .iter()
                .zip(n0.coeffs())
                .zip(self.decay.iter().zip(&self.w1))
                .map(|((c, n), (e, w))| e * c + w * n)
                .collect();
            let a = u.with_coeffs(a);
            match self.scheme {
                Scheme::Etd1 => a,
                Scheme::Etdrk2 => {
                    let na = self.model.nonlinear(&a);
                    let out = a
                        .coeffs()
                        .iter()
                        .zip(na.coeffs().iter().zip(n0.coeffs()))
                        .zip(&self.w2)
                        .map(|((c, (x, y)), w)| c + w * (x - y))
                        .collect();
                    u.with_coeffs(out)
                }
            }
        };
        if next.is_finite() {
            Ok(next)
        } else {
            Err(Error::Range("non-finite coefficient after step".into()))
        }
    }
}

/// One exponential step of size `dt`.
pub fn step(u: &SpectralField, p: Params, dt: f64, scheme: Scheme) -> Result<SpectralField> {
    let stepper = Stepper::new(Model::new(u.domain(), p)?, dt, scheme);
    stepper.step(u).map_err(|_| Error::NonFinite {
        t: dt,
        report: Box::new(RunReport::empty(u.clone())),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn classify(lambda: f64, lambda_c: f64) -> Self {
        let tol = 1e-12 * lambda_c.abs().max(1.0);
        if lambda < lambda_c - tol {
            Regime::Subcritical
        } else if lambda > lambda_c + tol {
            Regime::Supercritical
        } else {
            Regime::Critical
        }
    }
}

/// A priori bound on `|u(t)|_2`: `(derived, commonly printed)` forms.
pub fn a_priori_bound(regime: Regime, lambda: f64, lambda_c: f64, volume: f64, u0: f64, t: f64) -> (f64, f64) {
    let d = lambda - lambda_c;
    match regime {
        Regime::Subcritical => {
            let b = (d * t).exp() * u0;
            (b, b)
        }
        Regime::Critical => (
            u0 / ((2.0 / volume) * u0 * u0 * t + 1.0).sqrt(),
            u0 / (2.0 * volume * u0 * u0 * t + 1.0).sqrt(),
        ),
        Regime::Supercritical => (
            (u0 * u0).max(d * volume).sqrt(),
            (d / volume).sqrt().max(u0),
        ),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundCheck {
    pub regime: Regime,
    pub lambda_c: f64,
    /// Max over samples of `|u(t)| / bound(t)` for the derived bound.
    pub worst_ratio: f64,
    /// Same for the commonly printed form of the bound.
    pub worst_ratio_printed: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub times: Vec<f64>,
    pub l2_norms: Vec<f64>,
    pub lyapunov_values: Vec<f64>,
    pub bound_check: Option<BoundCheck>,
    /// Time at which the stationarity criterion was first met.
    pub steady_at: Option<f64>,
    #[serde(skip)]
    pub final_state: Option<SpectralField>,
}

impl RunReport {
    fn empty(state: SpectralField) -> Self {
        Self {
            times: Vec::new(),
            l2_norms: Vec::new(),
            lyapunov_values: Vec::new(),
            bound_check: None,
            steady_at: None,
            final_state: Some(state),
        }
    }

    pub fn final_state(&self) -> &SpectralField {
        self.final_state.as_ref().expect("report carries its final state")
    }

    /// Time series as CSV `t,l2,lyapunov`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,l2,lyapunov")?;
        for i in 0..self.times.len() {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e}",
                self.times[i], self.l2_norms[i], self.lyapunov_values[i]
            )?;
        }
        Ok(())
    }
}

struct BoundMonitor {
    regime: Regime,
    lambda: f64,
    lambda_c: f64,
    volume: f64,
    u0: f64,
    worst: f64,
    worst_printed: f64,
}

impl BoundMonitor {
    fn observe(&mut self, t: f64, norm: f64) {
        let (b, bp) = a_priori_bound(self.regime, self.lambda, self.lambda_c, self.volume, self.u0, t);
        let ratio = |b: f64| if b > 0.0 { norm / b } else if norm == 0.0 { 0.0 } else { f64::INFINITY };
        self.worst = self.worst.max(ratio(b));
        self.worst_printed = self.worst_printed.max(ratio(bp));
    }

    fn finish(&self) -> BoundCheck {
        BoundCheck {
            regime: self.regime,
            lambda_c: self.lambda_c,
            worst_ratio: self.worst,
            worst_ratio_printed: self.worst_printed,
            violated: self.worst > 1.0 + BOUND_SLACK,
        }
    }
}

/// Integrates from `u0` to `cfg.t_end`, sampling every `cfg.sample_every` steps.
pub fn integrate(u0: &SpectralField, p: Params, cfg: &StepperConfig) -> Result<RunReport> {
    cfg.validate()?;
    let domain = u0.domain().clone();
    let model = Model::new(&domain, p)?;
    let lambda_c = linear::principal(&domain).ok().map(|s| s.lambda_c);
    let stepper = Stepper::new(model, cfg.dt, cfg.scheme);
    integrate_with(&stepper, u0, cfg, lambda_c)
}

pub fn integrate_with(
    stepper: &Stepper,
    u0: &SpectralField,
    cfg: &StepperConfig,
    lambda_c: Option<f64>,
) -> Result<RunReport> {
    let model = stepper.model();
    let p = model.params();
    let mut monitor = lambda_c.map(|lc| BoundMonitor {
        regime: Regime::classify(p.lambda, lc),
        lambda: p.lambda,
        lambda_c: lc,
        volume: model.domain().volume(),
        u0: u0.norm(),
        worst: 0.0,
        worst_printed: 0.0,
    });
    let mut report = RunReport::empty(u0.clone());
    let steps = (cfg.t_end / stepper.dt() - 1e-9).ceil().max(0.0) as usize;
    let mut u = u0.clone();
    let mut calm = 0usize;

    let mut sample = |report: &mut RunReport, u: &SpectralField, t: f64| -> bool {
        let norm = u.norm();
        report.times.push(t);
        report.l2_norms.push(norm);
        report.lyapunov_values.push(model.lyapunov(u));
        if let Some(m) = monitor.as_mut() {
            m.observe(t, norm);
        }
        if cfg.stop_when_steady {
            if model.rhs(u).norm() < STEADY_RATE {
                calm += 1;
            } else {
                calm = 0;
            }
            if calm >= STEADY_SAMPLES && report.steady_at.is_none() {
                report.steady_at = Some(t);
                return true;
            }
        }
        false
    };

    sample(&mut report, &u, 0.0);
    for n in 1..=steps {
        let t = n as f64 * stepper.dt();
        match stepper.step(&u) {
            Ok(next) => u = next,
            Err(_) => {
                report.bound_check = monitor.as_ref().map(|m| m.finish());
                report.final_state = Some(u);
                return Err(Error::NonFinite {
                    t,
                    report: Box::new(report),
                });
            }
        }
        if (n % cfg.sample_every == 0 || n == steps) && sample(&mut report, &u, t) {
            break;
        }
    }
    report.bound_check = monitor.as_ref().map(|m| m.finish());
    report.final_state = Some(u);
    Ok(report)
}

/// Outcome of following a seed to its limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "index")]
pub enum BasinLabel {
    Trivial,
    /// Index into the target list.
    State(usize),
    /// Left the neighbourhood of every target (blow-up or escape to a far state).
    Divergent,
    Unresolved,
}

/// Distance below which an end state is attributed to a target.
pub const BASIN_RADIUS: f64 = 1e-4;

/// Integrates each seed and labels it by the nearest target (or `u = 0`).
pub fn basin_probe(
    p: Params,
    seeds: &[SpectralField],
    targets: &[SpectralField],
    cfg: &StepperConfig,
    escape_norm: f64,
) -> Result<Vec<BasinLabel>> {
    use rayon::prelude::*;
    let Some(first) = seeds.first() else {
        return Ok(Vec::new());
    };
    let model = Model::new(first.domain(), p)?;
    let stepper = Stepper::new(model, cfg.dt, cfg.scheme);
    seeds
        .par_iter()
        .map(|seed| {
            let end = match integrate_with(&stepper, seed, cfg, None) {
                Ok(r) => r.final_state.expect("final state"),
                Err(Error::NonFinite { .. }) => return Ok(BasinLabel::Divergent),
                Err(e) => return Err(e),
            };
            if end.norm() < BASIN_RADIUS {
                return Ok(BasinLabel::Trivial);
            }
            let mut best: Option<(usize, f64)> = None;
            for (i, t) in targets.iter().enumerate() {
                let d = end.distance(t)?;
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
            Ok(match best {
                Some((i, d)) if d < BASIN_RADIUS => BasinLabel::State(i),
                _ if end.norm() > escape_norm => BasinLabel::Divergent,
                _ => BasinLabel::Unresolved,
            })
        })
        .collect()
}
