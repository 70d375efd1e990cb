//! Plain-text experiment configuration: one `key=value` per line, `#`
//! starts a comment.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Params, Scheme, StepperConfig};
use crate::error::{Error, Result};
use crate::spectral::{Boundary, Domain};

pub const DEFAULT_RNG_SEED: u64 = 20_240_611;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Option<String>,
    pub dim: usize,
    pub bc: Boundary,
    pub length: f64,
    /// Retained modes per axis; `None` picks a per-scenario default.
    pub band: Option<usize>,
    pub lambda: f64,
    pub lambda_min: Option<f64>,
    pub lambda_max: Option<f64>,
    pub lambda_steps: usize,
    /// Explicit parameter values; takes precedence over the range.
    pub lambda_values: Vec<f64>,
    pub mu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub scheme: Scheme,
    pub sample_every: usize,
    pub n_seeds: usize,
    pub seed_scale: Option<f64>,
    pub n_runs: usize,
    pub out_dir: Option<String>,
    pub rng_seed: u64,
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            dim: 1,
            bc: Boundary::Dirichlet,
            length: std::f64::consts::FRAC_PI_2,
            band: None,
            lambda: 9.5,
            lambda_min: None,
            lambda_max: None,
            lambda_steps: 11,
            lambda_values: Vec::new(),
            mu: 0.0,
            dt: 1e-3,
            t_end: 20.0,
            scheme: Scheme::Etdrk2,
            sample_every: 100,
            n_seeds: 100,
            seed_scale: None,
            n_runs: 20,
            out_dir: None,
            rng_seed: DEFAULT_RNG_SEED,
            jobs: None,
        }
    }
}

/// Retained band used when the configuration leaves it open.
pub fn default_band(dim: usize) -> usize {
    match dim {
        1 => 128,
        2 => 31,
        _ => 16,
    }
}

impl ExperimentConfig {
    pub fn params(&self) -> Params {
        Params {
            lambda: self.lambda,
            mu: self.mu,
        }
    }

    pub fn stepper(&self) -> StepperConfig {
        StepperConfig {
            dt: self.dt,
            t_end: self.t_end,
            scheme: self.scheme,
            sample_every: self.sample_every,
            stop_when_steady: true,
        }
    }

    pub fn domain(&self) -> Result<Arc<Domain>> {
        let band = self.band.unwrap_or_else(|| default_band(self.dim));
        Domain::new(self.bc, &vec![self.length; self.dim], &vec![band; self.dim])
    }

    /// Parameter values of a sweep: the explicit list, `lambda_steps` points
    /// from min to max, or the single `lambda`.
    pub fn lambdas(&self) -> Vec<f64> {
        if !self.lambda_values.is_empty() {
            return self.lambda_values.clone();
        }
        match (self.lambda_min, self.lambda_max) {
            (Some(a), Some(b)) if self.lambda_steps > 1 => (0..self.lambda_steps)
                .map(|i| a + (b - a) * i as f64 / (self.lambda_steps - 1) as f64)
                .collect(),
            (Some(a), _) => vec![a],
            _ => vec![self.lambda],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim) {
            return Err(Error::Range(format!("dim = {} must be 1, 2 or 3", self.dim)));
        }
        if self.bc == Boundary::Dirichlet && self.dim != 1 {
            return Err(Error::Range("Dirichlet conditions are one-dimensional only".into()));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::Range(format!("length = {} must be positive", self.length)));
        }
        if self.band == Some(0) {
            return Err(Error::Range("band must be at least 1".into()));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::Range(format!("mu = {} must be non-negative", self.mu)));
        }
        if self.mu > 0.0 && self.bc != Boundary::Dirichlet {
            return Err(Error::Range("mu > 0 requires Dirichlet conditions".into()));
        }
        if let (Some(a), Some(b)) = (self.lambda_min, self.lambda_max) {
            if a > b {
                return Err(Error::Range("lambda_min exceeds lambda_max".into()));
            }
        }
        if self.seed_scale.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::Range("seed_scale must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Range("jobs must be at least 1".into()));
        }
        self.stepper().validate()
    }

    /// Apply one `key=value` assignment; `line` is used in error messages.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        fn num<T: std::str::FromStr>(v: &str, line: usize, key: &str) -> Result<T> {
            v.parse::<T>().map_err(|_| Error::Parse {
                line,
                msg: format!("cannot parse '{v}' for {key}"),
            })
        }
        let v = value.trim();
        match key.trim() {
            "scenario" => self.scenario = Some(v.to_string()),
            "dim" => self.dim = num(v, line, key)?,
            "bc" => {
                self.bc = v.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("unknown boundary condition '{v}'"),
                })?
            }
            "length" => self.length = num(v, line, key)?,
            "band" => self.band = Some(num(v, line, key)?),
            "lambda" => self.lambda = num(v, line, key)?,
            "lambda_min" => self.lambda_min = Some(num(v, line, key)?),
            "lambda_max" => self.lambda_max = Some(num(v, line, key)?),
            "lambda_steps" => self.lambda_steps = num(v, line, key)?,
            "lambdas" => {
                self.lambda_values = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| num(s.trim(), line, key))
                    .collect::<Result<_>>()?
            }
            "mu" => self.mu = num(v, line, key)?,
            "dt" => self.dt = num(v, line, key)?,
            "t_end" => self.t_end = num(v, line, key)?,
            "scheme" => {
                self.scheme = v.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("unknown scheme '{v}'"),
                })?
            }
            "sample_every" => self.sample_every = num(v, line, key)?,
            "n_seeds" => self.n_seeds = num(v, line, key)?,
            "seed_scale" => self.seed_scale = Some(num(v, line, key)?),
            "n_runs" => self.n_runs = num(v, line, key)?,
            "out_dir" => self.out_dir = Some(v.to_string()),
            "rng_seed" => self.rng_seed = num(v, line, key)?,
            "jobs" => self.jobs = Some(num(v, line, key)?),
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key '{other}'"),
                })
            }
        }
        Ok(())
    }
}

/// Parse a configuration; missing keys keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text(text)?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Overlay the assignments of `text` on `self`, then validate.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected key=value, found '{content}'"),
            })?;
            self.set(k, v, line)?;
        }
        self.validate()
    }
}
