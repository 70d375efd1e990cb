//! Natural-parameter continuation with a secant predictor.

use serde::Serialize;

use super::{newton, stability, SteadyState};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Increasing,
    Decreasing,
}

#[derive(Clone, Copy, Debug)]
pub struct ContinuationConfig {
    pub d_lambda: f64,
    /// Stop at the first eigenvalue crossing instead of recording it.
    pub stop_at_crossing: bool,
    /// Largest accepted jump between consecutive states.
    pub max_jump: f64,
    pub max_points: usize,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        Self {
            d_lambda: 0.05,
            stop_at_crossing: true,
            max_jump: 0.5,
            max_points: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchPoint {
    pub lambda: f64,
    pub state: SteadyState,
}

/// A change of sign of the leading eigenvalue between two points.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Crossing {
    pub lambda_before: f64,
    pub lambda_after: f64,
    pub eig_before: f64,
    pub eig_after: f64,
    /// Linear interpolation of the zero.
    pub lambda_star: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BranchEnd {
    Reached,
    BifurcationDetected(Crossing),
    NewtonFailed { lambda: f64, reason: String },
    Jump { lambda: f64, distance: f64 },
}

#[derive(Clone, Debug)]
pub struct Branch {
    pub points: Vec<BranchPoint>,
    pub direction: Direction,
    pub crossings: Vec<Crossing>,
    pub end: BranchEnd,
}

impl Branch {
    pub fn lambdas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    pub fn bifurcation(&self) -> Option<Crossing> {
        match self.end {
            BranchEnd::BifurcationDetected(c) => Some(c),
            _ => self.crossings.first().copied(),
        }
    }
}

fn leading(s: &SteadyState) -> f64 {
    s.leading_eigs.first().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Trace the branch through `start` towards `lambda_end` in steps of `d_lambda`.
pub fn continue_branch(start: &SteadyState, lambda_end: f64, cfg: &ContinuationConfig) -> Result<Branch> {
    let first = if start.morse_index.is_some() {
        start.clone()
    } else {
        stability(start)?
    };
    let dir = if lambda_end >= first.lambda {
        Direction::Increasing
    } else {
        Direction::Decreasing
    };
    let step = cfg.d_lambda.abs()
        * match dir {
            Direction::Increasing => 1.0,
            Direction::Decreasing => -1.0,
        };
    let mu = first.mu;
    let mut points = vec![BranchPoint {
        lambda: first.lambda,
        state: first,
    }];
    let mut crossings = Vec::new();
    let end = loop {
        let last = &points[points.len() - 1];
        let remaining = lambda_end - last.lambda;
        if remaining.abs() < 1e-12 * lambda_end.abs().max(1.0) || points.len() >= cfg.max_points {
            break BranchEnd::Reached;
        }
        let h = if remaining.abs() < step.abs() { remaining } else { step };
        let lambda = last.lambda + h;
        let guess = if points.len() >= 2 {
            let prev = &points[points.len() - 2];
            let ratio = h / (last.lambda - prev.lambda);
            last.state.state.axpy(ratio, &(&last.state.state - &prev.state.state))?
        } else {
            last.state.state.clone()
        };
        let p = crate::dynamics::Params { lambda, mu };
        let solved = match newton(&guess, p) {
            Ok(s) => s,
            Err(e) => {
                break BranchEnd::NewtonFailed {
                    lambda,
                    reason: e.to_string(),
                }
            }
        };
        let distance = solved.state.distance(&last.state.state)?;
        if distance > cfg.max_jump {
            break BranchEnd::Jump { lambda, distance };
        }
        let solved = stability(&solved)?;
        let (e0, e1) = (leading(&last.state), leading(&solved));
        let crossed = (e0 > 0.0) != (e1 > 0.0) && e0.is_finite() && e1.is_finite();
        let crossing = Crossing {
            lambda_before: last.lambda,
            lambda_after: lambda,
            eig_before: e0,
            eig_after: e1,
            lambda_star: last.lambda + (lambda - last.lambda) * e0 / (e0 - e1),
        };
        points.push(BranchPoint {
            lambda,
            state: solved,
        });
        if crossed {
            if cfg.stop_at_crossing {
                break BranchEnd::BifurcationDetected(crossing);
            }
            crossings.push(crossing);
        }
    };
    Ok(Branch {
        points,
        direction: dir,
        crossings,
        end,
    })
}
