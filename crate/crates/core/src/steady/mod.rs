//! Steady states: Newton-Krylov solves, matrix-free stability, censuses of
//! equilibria and natural-parameter continuation.

mod census;
mod continuation;
mod eigs;
mod krylov;

use std::sync::Arc;

use serde::Serialize;

use crate::dynamics::{Model, Params};
use crate::error::{Error, Result};
use crate::spectral::{Boundary, Domain, GridMultiplier, ModeIndex, Parity, SpectralField};

pub use census::{align, find_all, index_formula, index_sum, CensusConfig};
pub use continuation::{continue_branch, Branch, BranchEnd, BranchPoint, ContinuationConfig, Crossing, Direction};
pub use eigs::{EigOptions, Eigenpair};
pub use krylov::{KrylovOptions, SolveInfo};

/// Eigenvalues above this count towards the Morse index.
pub const MORSE_THRESHOLD: f64 = 1e-8;
/// Periodic states: eigenvalues this close to zero are translation modes.
pub const NEUTRAL_BAND: f64 = 1e-6;
/// Required residual of an accepted steady state.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_steps: usize,
    pub max_halvings: usize,
    pub krylov: KrylovOptions,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-11,
            max_steps: 50,
            max_halvings: 10,
            krylov: KrylovOptions::default(),
        }
    }
}

/// A converged equilibrium. `morse_index` stays `None` until
/// [`stability`] has run.
#[derive(Clone, Debug)]
pub struct SteadyState {
    pub state: SpectralField,
    pub residual: f64,
    pub morse_index: Option<usize>,
    pub leading_eigs: Vec<f64>,
    pub neutral_eigs: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub newton_steps: usize,
}

impl SteadyState {
    pub fn params(&self) -> Params {
        Params {
            lambda: self.lambda,
            mu: self.mu,
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        self.state.domain()
    }

    pub fn norm(&self) -> f64 {
        self.state.norm()
    }

    pub fn is_trivial(&self) -> bool {
        self.state.norm() < 1e-8
    }

    /// Coefficient of `mode` (basis normalization).
    pub fn coeff(&self, mode: &ModeIndex) -> f64 {
        self.state.coeff(mode)
    }

    /// Coefficient of `mode` times the basis scale, i.e. the amplitude of
    /// the bare sine or cosine.
    pub fn physical_amplitude(&self, mode: &ModeIndex) -> f64 {
        self.coeff(mode) * self.domain().basis_scale()
    }

    pub fn negated(&self) -> SteadyState {
        SteadyState {
            state: -&self.state,
            ..self.clone()
        }
    }

    pub fn report(&self) -> SteadyReport {
        let d = self.domain();
        let modes = d
            .modes()
            .iter()
            .zip(self.state.coeffs())
            .filter(|(_, c)| c.abs() > 1e-12)
            .map(|(m, &c)| ModeCoeff {
                k: m.k[..d.dim()].to_vec(),
                parity: m.parity,
                coeff: c,
            })
            .collect();
        SteadyReport {
            lambda: self.lambda,
            mu: self.mu,
            l2_norm: self.norm(),
            residual: self.residual,
            morse_index: self.morse_index,
            leading_eigs: self.leading_eigs.clone(),
            neutral_eigs: self.neutral_eigs.clone(),
            newton_steps: self.newton_steps,
            coefficients: modes,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeCoeff {
    pub k: Vec<i32>,
    pub parity: Parity,
    pub coeff: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SteadyReport {
    pub lambda: f64,
    pub mu: f64,
    pub l2_norm: f64,
    pub residual: f64,
    pub morse_index: Option<usize>,
    pub leading_eigs: Vec<f64>,
    pub neutral_eigs: Vec<f64>,
    pub newton_steps: usize,
    pub coefficients: Vec<ModeCoeff>,
}

/// Right-hand side of the steady equation.
pub fn residual(u: &SpectralField, p: Params) -> Result<SpectralField> {
    Ok(Model::new(u.domain(), p)?.rhs(u))
}

/// Jacobian `L_lambda + 2 mu u - 3 u^2` frozen at a state.
#[derive(Clone, Debug)]
pub struct Linearization {
    domain: Arc<Domain>,
    beta: Vec<f64>,
    g: GridMultiplier,
}

impl Linearization {
    pub fn new(model: &Model, u: &SpectralField) -> Result<Self> {
        let mu = model.params().mu;
        Ok(Self {
            domain: model.domain().clone(),
            beta: model.beta().to_vec(),
            g: GridMultiplier::polynomial(u, &[0.0, 2.0 * mu, -3.0])?,
        })
    }

    pub fn at(u: &SpectralField, p: Params) -> Result<Self> {
        Self::new(&Model::new(u.domain(), p)?, u)
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Upper bound on the spectrum: `max beta + max g`.
    pub fn spectral_upper_bound(&self) -> f64 {
        let bmax = self.beta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        bmax + self.g.max().max(0.0)
    }

    pub fn apply(&self, v: &SpectralField) -> SpectralField {
        let mut out = self.g.apply(v);
        for ((o, b), c) in out.coeffs_mut().iter_mut().zip(&self.beta).zip(v.coeffs()) {
            *o += b * c;
        }
        out
    }

    pub(crate) fn apply_raw(&self, v: &[f64]) -> Vec<f64> {
        let f = SpectralField::from_coeffs(&self.domain, v.to_vec())
            .expect("coefficient vector matches the domain");
        self.apply(&f).into_coeffs()
    }
}

pub fn jacobian_apply(u: &SpectralField, p: Params, v: &SpectralField) -> Result<SpectralField> {
    if !u.same_domain(v) {
        return Err(Error::DomainMismatch);
    }
    Ok(Linearization::at(u, p)?.apply(v))
}

/// Orthonormal basis of the translation generators `d_a u` (periodic only).
pub(crate) fn translation_modes(u: &SpectralField) -> Vec<Vec<f64>> {
    let d = u.domain();
    if d.bc() != Boundary::Periodic {
        return Vec::new();
    }
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for a in 0..d.dim() {
        let mut t = u.derivative(a).expect("periodic").into_coeffs();
        for _ in 0..2 {
            for b in &basis {
                let c = crate::spectral::dot(&t, b);
                t.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = crate::spectral::dot(&t, &t).sqrt();
        if n > 1e-8 * u.norm().max(1e-300) && n > 1e-12 {
            t.iter_mut().for_each(|x| *x /= n);
            basis.push(t);
        }
    }
    basis
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = crate::spectral::dot(v, b);
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
    }
}

/// Solve `J delta = -r`, with translation generators projected out on
/// periodic domains.
fn newton_direction(
    lin: &Linearization,
    r: &SpectralField,
    ker: &[Vec<f64>],
    opts: KrylovOptions,
) -> (Vec<f64>, SolveInfo) {
    let op = |v: &[f64]| -> Vec<f64> {
        let mut w = v.to_vec();
        project_out(&mut w, ker);
        let mut out: Vec<f64> = lin.apply_raw(&w).into_iter().map(|x| -x).collect();
        project_out(&mut out, ker);
        out
    };
    let prec = |v: &[f64]| -> Vec<f64> {
        let mut w = v.to_vec();
        project_out(&mut w, ker);
        let mut out: Vec<f64> = w
            .iter()
            .zip(lin.beta())
            .map(|(x, b)| x / (b.abs() + 1.0))
            .collect();
        project_out(&mut out, ker);
        out
    };
    let mut b = r.coeffs().to_vec();
    project_out(&mut b, ker);
    krylov::solve_symmetric(&op, &prec, &b, opts)
}

pub fn newton(u0: &SpectralField, p: Params) -> Result<SteadyState> {
    newton_with(u0, p, NewtonOptions::default())
}

pub fn newton_with(u0: &SpectralField, p: Params, opts: NewtonOptions) -> Result<SteadyState> {
    let model = Model::new(u0.domain(), p)?;
    let mut u = u0.clone();
    let mut r = model.rhs(&u);
    let mut rn = r.norm();
    if !rn.is_finite() {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: rn,
        });
    }
    let mut steps = 0;
    while rn > opts.tol {
        if steps == opts.max_steps {
            return Err(Error::NoConvergence {
                iterations: steps,
                residual: rn,
            });
        }
        steps += 1;
        let lin = Linearization::new(&model, &u)?;
        let ker = translation_modes(&u);
        let (delta, info) = newton_direction(&lin, &r, &ker, opts.krylov);
        if !(info.relative_residual < 1e-4) {
            return Err(Error::SingularJacobian(info.relative_residual));
        }
        let delta = u.with_coeffs(delta);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = u.axpy(t, &delta)?;
            let rt = model.rhs(&trial);
            let n = rt.norm();
            if n < rn {
                accepted = Some((trial, rt, n));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((nu, nr, n)) => {
                u = nu;
                r = nr;
                rn = n;
            }
            None => {
                return Err(Error::NoConvergence {
                    iterations: steps,
                    residual: rn,
                });
            }
        }
    }
    Ok(SteadyState {
        state: u,
        residual: rn,
        morse_index: None,
        leading_eigs: Vec::new(),
        neutral_eigs: Vec::new(),
        lambda: p.lambda,
        mu: p.mu,
        newton_steps: steps,
    })
}

/// Leading Jacobian eigenvalues and Morse index of `s`.
pub fn stability(s: &SteadyState) -> Result<SteadyState> {
    stability_with(s, EigOptions::for_domain(s.domain()))
}

pub fn stability_with(s: &SteadyState, opts: EigOptions) -> Result<SteadyState> {
    let lin = Linearization::at(&s.state, s.params())?;
    let pairs = eigs::leading(&lin, opts)?;
    let periodic = s.domain().bc() == Boundary::Periodic;
    let mut leading = Vec::new();
    let mut neutral = Vec::new();
    for e in pairs.iter().map(|p| p.value) {
        if periodic && !s.is_trivial() && e.abs() < NEUTRAL_BAND {
            neutral.push(e);
        } else {
            leading.push(e);
        }
    }
    let morse = leading.iter().filter(|&&e| e > MORSE_THRESHOLD).count();
    Ok(SteadyState {
        morse_index: Some(morse),
        leading_eigs: leading,
        neutral_eigs: neutral,
        ..s.clone()
    })
}

/// Newton followed by [`stability`].
pub fn solve_and_classify(u0: &SpectralField, p: Params) -> Result<SteadyState> {
    stability(&newton(u0, p)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeIndex;
    use std::f64::consts::PI;

    fn line() -> Arc<Domain> {
        Domain::line(Boundary::Dirichlet, PI / 2.0, 32).unwrap()
    }

    #[test]
    fn residual_of_zero_vanishes() {
        let u = SpectralField::zeros(&line());
        assert_eq!(residual(&u, Params::sh(9.5)).unwrap().norm(), 0.0);
    }

    #[test]
    fn jacobian_at_zero_is_diagonal() {
        let d = line();
        let u = SpectralField::zeros(&d);
        let v = SpectralField::single(&d, &ModeIndex::sin(&[2]), 1.0).unwrap();
        let jv = jacobian_apply(&u, Params::sh(9.5), &v).unwrap();
        let b = crate::linear::growth_rate(&d, &ModeIndex::sin(&[2]), 9.5);
        assert!((jv.coeff(&ModeIndex::sin(&[2])) - b).abs() < 1e-9);
        assert!((jv.norm() - b.abs()).abs() < 1e-9);
    }

    #[test]
    fn jacobian_is_symmetric() {
        let d = line();
        let u = SpectralField::from_coeffs(&d, (0..d.len()).map(|i| 0.5 / (1.0 + i as f64).powi(2)).collect()).unwrap();
        let v = SpectralField::from_coeffs(&d, (0..d.len()).map(|i| ((i * 3 % 7) as f64 - 3.0) / (1.0 + i as f64).powi(3)).collect()).unwrap();
        let w = SpectralField::from_coeffs(&d, (0..d.len()).map(|i| ((i * 5 % 11) as f64 - 5.0) / (1.0 + i as f64).powi(3)).collect()).unwrap();
        let p = Params::gsh(9.2, 1.0);
        let a = jacobian_apply(&u, p, &v).unwrap().inner(&w).unwrap();
        let b = jacobian_apply(&u, p, &w).unwrap().inner(&v).unwrap();
        assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn newton_from_zero_is_trivial() {
        let s = newton(&SpectralField::zeros(&line()), Params::sh(9.5)).unwrap();
        assert!(s.is_trivial());
        assert_eq!(s.newton_steps, 0);
    }

    #[test]
    fn newton_finds_pitchfork_state() {
        let d = line();
        let u0 = SpectralField::single(&d, &ModeIndex::sin(&[1]), 0.8 / d.basis_scale()).unwrap();
        let s = newton(&u0, Params::sh(9.5)).unwrap();
        assert!(s.residual < RESIDUAL_TOL);
        let a = s.physical_amplitude(&ModeIndex::sin(&[1]));
        assert!((a - (4.0f64 / 3.0 * 0.5).sqrt()).abs() < 3e-2, "{a}");
        let s = stability(&s).unwrap();
        assert_eq!(s.morse_index, Some(0));
        assert!(s.leading_eigs.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trivial_state_indices() {
        let d = line();
        let z = SpectralField::zeros(&d);
        let below = solve_and_classify(&z, Params::sh(8.0)).unwrap();
        assert_eq!(below.morse_index, Some(0));
        assert!(below.leading_eigs.iter().all(|&e| e < 0.0));
        let above = solve_and_classify(&z, Params::sh(9.5)).unwrap();
        assert_eq!(above.morse_index, Some(1));
        assert!((above.leading_eigs[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn negated_state_is_steady() {
        let d = line();
        let u0 = SpectralField::single(&d, &ModeIndex::sin(&[1]), 0.8 / d.basis_scale()).unwrap();
        let s = newton(&u0, Params::sh(9.5)).unwrap();
        let r = residual(&s.negated().state, Params::sh(9.5)).unwrap();
        assert!(r.norm() < RESIDUAL_TOL);
    }

    #[test]
    fn periodic_state_has_translation_mode() {
        let d = Domain::line(Boundary::Periodic, 2.0 * PI, 16).unwrap();
        let u0 = SpectralField::single(&d, &ModeIndex::sin(&[1]), 0.4 / d.basis_scale()).unwrap();
        let s = solve_and_classify(&u0, Params::sh(0.2)).unwrap();
        assert!(s.residual < RESIDUAL_TOL);
        assert_eq!(s.neutral_eigs.len(), 1);
        assert_eq!(s.morse_index, Some(0));
        let shifted = s.state.translated(&[0.37]).unwrap();
        assert!(residual(&shifted, Params::sh(0.2)).unwrap().norm() < 1e-9);
    }
}
