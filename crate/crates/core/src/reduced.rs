//! Amplitude-level models on the critical eigenspace: interaction tensors
//! from dealiased products, reduced vector fields, their fixed points and
//! closed-form amplitude predictions.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::Params;
use crate::error::{Error, Result};
use crate::linear::{self, symbol_p};
use crate::spectral::{Boundary, Domain, ModeIndex, Parity, SpectralField};
use crate::steady::{self, SteadyState};

/// Reduced eigenvalues below this magnitude are not classified.
pub const DEGENERATE_EIG: f64 = 1e-8;

/// Projection of `beta x + mu Q(x, x) - C(x, x, x)` onto the critical modes.
#[derive(Clone, Debug)]
pub struct ReducedSystem {
    domain: Arc<Domain>,
    pub modes: Vec<ModeIndex>,
    pub lambda_c: f64,
    pub linear: f64,
    pub mu: f64,
    /// `c[i][j][k][l] = <phi_i phi_j phi_k, phi_l>`, flattened.
    pub cubic: Vec<f64>,
    /// `q[i][j][l] = <phi_i phi_j, phi_l>`, flattened.
    pub quadratic: Vec<f64>,
}

fn axis_key(m: &ModeIndex) -> (usize, ModeIndex) {
    let axis = m.k.iter().position(|&c| c != 0).unwrap_or(0);
    (axis, *m)
}

impl ReducedSystem {
    pub fn new(domain: &Arc<Domain>, p: Params) -> Result<Self> {
        let summary = linear::principal(domain)?;
        summary.require_clean()?;
        let mut modes = summary.critical_modes.clone();
        modes.sort_by_key(axis_key);
        Self::on_modes(domain, &modes, p.lambda - summary.lambda_c, summary.lambda_c, p.mu)
    }

    /// Tensors over an arbitrary mode list; `linear` is the common growth rate.
    pub fn on_modes(domain: &Arc<Domain>, modes: &[ModeIndex], linear: f64, lambda_c: f64, mu: f64) -> Result<Self> {
        domain.check_dealiased()?;
        let m = modes.len();
        let fields = modes
            .iter()
            .map(|k| SpectralField::single(domain, k, 1.0))
            .collect::<Result<Vec<_>>>()?;
        let cubic = cubic_tensor(&fields)?;
        let mut quadratic = vec![0.0; m * m * m];
        for i in 0..m {
            for j in i..m {
                let q = fields[i].product(&fields[j])?;
                for l in 0..m {
                    let v = q.inner(&fields[l])?;
                    quadratic[(i * m + j) * m + l] = v;
                    quadratic[(j * m + i) * m + l] = v;
                }
            }
        }
        Ok(Self {
            domain: domain.clone(),
            modes: modes.to_vec(),
            lambda_c,
            linear,
            mu,
            cubic,
            quadratic,
        })
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn m(&self) -> usize {
        self.modes.len()
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            linear: lambda - self.lambda_c,
            ..self.clone()
        }
    }

    pub fn c(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let m = self.m();
        self.cubic[((i * m + j) * m + k) * m + l]
    }

    pub fn q(&self, i: usize, j: usize, l: usize) -> f64 {
        let m = self.m();
        self.quadratic[(i * m + j) * m + l]
    }

    pub fn labels(&self) -> Vec<String> {
        self.modes.iter().map(|m| m.to_string()).collect()
    }

    pub fn flow(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m();
        (0..m)
            .map(|l| {
                let mut v = self.linear * x[l];
                if self.mu != 0.0 {
                    for i in 0..m {
                        for j in 0..m {
                            v += self.mu * self.q(i, j, l) * x[i] * x[j];
                        }
                    }
                }
                for i in 0..m {
                    for j in 0..m {
                        for k in 0..m {
                            v -= self.c(i, j, k, l) * x[i] * x[j] * x[k];
                        }
                    }
                }
                v
            })
            .collect()
    }

    /// `d flow_l / d x_r`; symmetric because the flow is a gradient.
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let m = self.m();
        DMatrix::from_fn(m, m, |l, r| {
            let mut v = if l == r { self.linear } else { 0.0 };
            for i in 0..m {
                v += 2.0 * self.mu * self.q(i, r, l) * x[i];
                for j in 0..m {
                    v -= 3.0 * self.c(i, j, r, l) * x[i] * x[j];
                }
            }
            v
        })
    }

    /// Field `sum x_i phi_i`.
    pub fn lift(&self, x: &[f64]) -> Result<SpectralField> {
        let mut u = SpectralField::zeros(&self.domain);
        for (m, &v) in self.modes.iter().zip(x) {
            let i = self.domain.index_of(m).expect("critical mode is retained");
            u.coeffs_mut()[i] = v;
        }
        Ok(u)
    }

    /// Critical-mode coefficients of a field.
    pub fn project(&self, u: &SpectralField) -> Vec<f64> {
        self.modes.iter().map(|m| u.coeff(m)).collect()
    }

    pub fn report(&self) -> ReducedReport {
        ReducedReport {
            bc: self.domain.bc(),
            lengths: self.domain.lengths().to_vec(),
            modes: self.labels(),
            lambda_c: self.lambda_c,
            linear: self.linear,
            mu: self.mu,
            cubic: self.cubic.clone(),
            quadratic: self.quadratic.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedReport {
    pub bc: Boundary,
    pub lengths: Vec<f64>,
    pub modes: Vec<String>,
    pub lambda_c: f64,
    pub linear: f64,
    pub mu: f64,
    pub cubic: Vec<f64>,
    pub quadratic: Vec<f64>,
}

/// `<f_i f_j f_k, f_l>` for all index quadruples, filled by symmetry.
pub fn cubic_tensor(fields: &[SpectralField]) -> Result<Vec<f64>> {
    let m = fields.len();
    let mut triples = Vec::new();
    for i in 0..m {
        for j in i..m {
            for k in j..m {
                triples.push((i, j, k));
            }
        }
    }
    let rows = triples
        .par_iter()
        .map(|&(i, j, k)| {
            let t = fields[i].triple(&fields[j], &fields[k])?;
            fields.iter().map(|f| t.inner(f)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut c = vec![0.0; m * m * m * m];
    for (&(i, j, k), row) in triples.iter().zip(&rows) {
        for (l, &v) in row.iter().enumerate() {
            for (a, b, d) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                c[((a * m + b) * m + d) * m + l] = v;
            }
        }
    }
    Ok(c)
}

/// The odd-periodic amplitude field; identical to [`ReducedSystem::flow`]
/// but insists on the sine-only space.
pub fn odd_periodic_flow(y: &[f64], sys: &ReducedSystem) -> Result<Vec<f64>> {
    if sys.domain.bc() != Boundary::OddPeriodic {
        return Err(Error::Range("odd-periodic system expected".into()));
    }
    Ok(sys.flow(y))
}

/// Periodic amplitude field in `(y_i, z_i)` = (sine, cosine) coefficients of
/// the critical wave vectors, one pair per axis.
pub fn periodic_flow(y: &[f64], z: &[f64], sys: &ReducedSystem) -> Result<(Vec<f64>, Vec<f64>)> {
    if sys.domain.bc() != Boundary::Periodic {
        return Err(Error::Range("periodic system expected".into()));
    }
    let pairs = periodic_pairs(sys)?;
    if y.len() != pairs.len() || z.len() != pairs.len() {
        return Err(Error::Range(format!("expected {} amplitude pairs", pairs.len())));
    }
    let mut x = vec![0.0; sys.m()];
    for (p, &(s, c)) in pairs.iter().enumerate() {
        x[s] = y[p];
        x[c] = z[p];
    }
    let f = sys.flow(&x);
    Ok((pairs.iter().map(|&(s, _)| f[s]).collect(), pairs.iter().map(|&(_, c)| f[c]).collect()))
}

/// Indices of the (sin, cos) partners in the reduced mode list.
fn periodic_pairs(sys: &ReducedSystem) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (i, m) in sys.modes.iter().enumerate() {
        if m.parity == Parity::Sin {
            let j = sys
                .modes
                .iter()
                .position(|o| *o == m.partner())
                .ok_or_else(|| Error::Range("critical set is not closed under sin/cos".into()))?;
            out.push((i, j));
        }
    }
    Ok(out)
}

/// Roots of `2 L beta_1 x - 3 x^3 = 0` in the unit-norm basis.
pub fn dirichlet_bifurcation_roots(length: f64, lambda: f64) -> Vec<f64> {
    let beta1 = lambda - symbol_p((std::f64::consts::PI / length).powi(2));
    if beta1 <= 0.0 {
        return vec![0.0];
    }
    let r = (2.0 * length * beta1 / 3.0).sqrt();
    vec![-r, 0.0, r]
}

/// One-mode quadratic truncation `dx/dt = beta_c x + alpha mu x^2`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct QuadraticReduced {
    pub beta_c: f64,
    pub alpha: f64,
    pub mu: f64,
}

impl QuadraticReduced {
    pub fn new(beta_c: f64, mu: f64, alpha: f64) -> Self {
        Self { beta_c, alpha, mu }
    }

    /// Coefficients from the tensor of a Dirichlet domain.
    pub fn from_domain(domain: &Arc<Domain>, p: Params) -> Result<Self> {
        let sys = ReducedSystem::new(domain, p)?;
        if sys.m() != 1 {
            return Err(Error::Range("a simple critical eigenvalue is required".into()));
        }
        Ok(Self::new(sys.linear, p.mu, sys.q(0, 0, 0)))
    }

    pub fn flow(&self, x: f64) -> f64 {
        self.beta_c * x + self.alpha * self.mu * x * x
    }

    /// `{0, -beta_c / (alpha mu)}`.
    pub fn fixed_points(&self) -> Result<[f64; 2]> {
        let am = self.alpha * self.mu;
        if am == 0.0 {
            return Err(Error::DegenerateQuadratic(am));
        }
        Ok([0.0, -self.beta_c / am])
    }
}

pub fn gsh_reduced_flow(x: f64, beta_c: f64, mu: f64, alpha: f64) -> Result<f64> {
    if alpha * mu == 0.0 {
        return Err(Error::DegenerateQuadratic(alpha * mu));
    }
    Ok(QuadraticReduced::new(beta_c, mu, alpha).flow(x))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointKind {
    Attractor,
    Saddle,
    Repeller,
    Degenerate,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedFixedPoint {
    pub x: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    pub kind: FixedPointKind,
    /// Number of positive eigenvalues.
    pub index: usize,
}

pub fn classify(sys: &ReducedSystem, x: &[f64]) -> ReducedFixedPoint {
    let jac = sys.jacobian(x);
    let sym = (&jac + jac.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    let index = ev.iter().filter(|&&e| e > DEGENERATE_EIG).count();
    let kind = if ev.iter().any(|e| e.abs() < DEGENERATE_EIG) {
        FixedPointKind::Degenerate
    } else if index == 0 {
        FixedPointKind::Attractor
    } else if index == ev.len() {
        FixedPointKind::Repeller
    } else {
        FixedPointKind::Saddle
    };
    ReducedFixedPoint {
        x: x.to_vec(),
        eigenvalues: ev,
        kind,
        index,
    }
}

/// All real fixed points of the reduced field, by Newton from a dense
/// lattice of starts covering every root (bounded by the cubic's growth).
pub fn fixed_points(sys: &ReducedSystem) -> Vec<ReducedFixedPoint> {
    let m = sys.m();
    if m == 0 {
        return Vec::new();
    }
    // |x| <= R for any root: the cubic form is coercive
    let cmin = (0..m).map(|i| sys.c(i, i, i, i)).fold(f64::INFINITY, f64::min);
    let qmax = sys.quadratic.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let scale = ((sys.linear.abs() + sys.mu * qmax * 1.0) / cmin.max(1e-300)).sqrt()
        + sys.mu * qmax * m as f64 / cmin.max(1e-300);
    let radius = 1.5 * scale.max(1e-12);
    let per_axis = match m {
        1 => 201,
        2 => 41,
        3 => 17,
        _ => 9,
    };
    let total = (per_axis as usize).pow(m as u32);
    let starts: Vec<Vec<f64>> = (0..total)
        .map(|mut idx| {
            (0..m)
                .map(|_| {
                    let j = idx % per_axis;
                    idx /= per_axis;
                    -radius + 2.0 * radius * j as f64 / (per_axis - 1) as f64
                })
                .collect()
        })
        .collect();
    let roots: Vec<Option<Vec<f64>>> = starts.par_iter().map(|x0| newton_reduced(sys, x0)).collect();
    let tol = 1e-8 * radius.max(1.0);
    let mut found: Vec<Vec<f64>> = Vec::new();
    for r in roots.into_iter().flatten() {
        if !found.iter().any(|f| f.iter().zip(&r).all(|(a, b)| (a - b).abs() < tol)) {
            found.push(r);
        }
    }
    found.sort_by(|a, b| {
        let na: f64 = a.iter().map(|v| v * v).sum();
        let nb: f64 = b.iter().map(|v| v * v).sum();
        na.total_cmp(&nb).then_with(|| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    });
    found.iter().map(|x| classify(sys, x)).collect()
}

fn newton_reduced(sys: &ReducedSystem, x0: &[f64]) -> Option<Vec<f64>> {
    let mut x = DVector::from_column_slice(x0);
    for _ in 0..60 {
        let f = DVector::from_vec(sys.flow(x.as_slice()));
        if f.norm() < 1e-14 * (1.0 + x.norm().powi(3)) {
            return Some(x.iter().map(|v| if v.abs() < 1e-13 { 0.0 } else { *v }).collect());
        }
        let step = sys.jacobian(x.as_slice()).lu().solve(&f)?;
        x -= step;
        if !x.iter().all(|v| v.is_finite()) {
            return None;
        }
    }
    None
}

/// Fourth-order Runge-Kutta trajectory of the reduced field, sampled every
/// `sample_every` steps (first and last included).
pub fn integrate_flow(sys: &ReducedSystem, x0: &[f64], t_end: f64, dt: f64, sample_every: usize) -> Vec<(f64, Vec<f64>)> {
    let steps = (t_end / dt).round() as usize;
    let mut x = x0.to_vec();
    let mut out = vec![(0.0, x.clone())];
    let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> { a.iter().zip(b).map(|(p, q)| p + s * q).collect() };
    for n in 1..=steps {
        let k1 = sys.flow(&x);
        let k2 = sys.flow(&add(&x, &k1, dt / 2.0));
        let k3 = sys.flow(&add(&x, &k2, dt / 2.0));
        let k4 = sys.flow(&add(&x, &k3, dt));
        for i in 0..x.len() {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if n % sample_every.max(1) == 0 || n == steps {
            out.push((n as f64 * dt, x.clone()));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplitudeFamily {
    pub name: String,
    /// Unit-basis coefficients on the critical modes.
    pub coeffs: Vec<f64>,
    /// Bare sine/cosine amplitudes, `coeff * sqrt(2 / |Omega|)`.
    pub physical: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplitudePrediction {
    pub modes: Vec<String>,
    pub beta_c: f64,
    pub families: Vec<AmplitudeFamily>,
    pub leading_order: bool,
}

impl AmplitudePrediction {
    pub fn family(&self, name: &str) -> Option<&AmplitudeFamily> {
        self.families.iter().find(|f| f.name == name)
    }
}

/// Closed-form leading-order amplitudes for the critical configuration.
pub fn predict_amplitudes(domain: &Arc<Domain>, p: Params) -> Result<AmplitudePrediction> {
    let sys = ReducedSystem::new(domain, p)?;
    let beta = sys.linear;
    let scale = domain.basis_scale();
    let m = sys.m();
    let family = |name: &str, coeffs: Vec<f64>| AmplitudeFamily {
        name: name.into(),
        physical: coeffs.iter().map(|c| c * scale).collect(),
        coeffs,
    };
    let mut families = Vec::new();
    if p.mu != 0.0 && m == 1 {
        let q = QuadraticReduced::new(beta, p.mu, sys.q(0, 0, 0));
        let x = q.fixed_points().map(|r| r[1]).unwrap_or(0.0);
        families.push(family("transcritical", vec![x]));
    } else if beta > 0.0 {
        // single active mode: beta = c_iiii a^2
        for i in 0..m {
            let mut c = vec![0.0; m];
            c[i] = (beta / sys.c(i, i, i, i)).sqrt();
            let name = if m == 1 { "pitchfork".to_string() } else { format!("pure-{i}") };
            families.push(family(&name, c));
        }
        if m > 1 && domain.bc() == Boundary::OddPeriodic {
            // all modes at equal amplitude: beta = a^2 sum_{jkl} c_0jkl
            let s: f64 = (0..m)
                .flat_map(|j| (0..m).flat_map(move |k| (0..m).map(move |l| (j, k, l))))
                .map(|(j, k, l)| sys.c(0, j, k, l))
                .sum();
            let a = (beta / s).sqrt();
            families.push(family("mixed", vec![a; m]));
        }
        if domain.bc() == Boundary::Periodic {
            let pairs = periodic_pairs(&sys)?;
            let mut c = vec![0.0; m];
            for &(s, _) in &pairs {
                c[s] = 1.0;
            }
            let cube = sys.flow(&c);
            // flow(a c) = beta a c - a^3 C(c,c,c); all sine components equal by symmetry
            let gain = beta * c[pairs[0].0] - cube[pairs[0].0];
            let a = (beta / gain).sqrt();
            families.push(family("torus", c.iter().map(|v| v * a).collect()));
        }
    } else {
        families.push(family(if m == 1 { "pitchfork" } else { "trivial" }, vec![0.0; m]));
    }
    Ok(AmplitudePrediction {
        modes: sys.labels(),
        beta_c: beta,
        families,
        leading_order: true,
    })
}

/// Torus candidates `sum_j y sin(kappa_j x_j + theta_j)` at the predicted
/// equal amplitude, each refined by Newton.
pub fn torus_points(domain: &Arc<Domain>, p: Params, thetas: &[Vec<f64>]) -> Result<Vec<SteadyState>> {
    if domain.bc() != Boundary::Periodic {
        return Err(Error::Range("the torus family needs periodic conditions".into()));
    }
    let pred = predict_amplitudes(domain, p)?;
    let torus = pred
        .family("torus")
        .ok_or_else(|| Error::Range("no torus above threshold".into()))?
        .clone();
    let sys = ReducedSystem::new(domain, p)?;
    let pairs = periodic_pairs(&sys)?;
    thetas
        .par_iter()
        .map(|theta| {
            let mut x = vec![0.0; sys.m()];
            for &(s, c) in &pairs {
                let axis = axis_key(&sys.modes[s]).0;
                let th = theta.get(axis).copied().unwrap_or(0.0);
                let y = torus.coeffs[s];
                // sin(a + th) = sin a cos th + cos a sin th
                x[s] = y * th.cos();
                x[c] = y * th.sin();
            }
            let s = steady::newton(&sys.lift(&x)?, p)?;
            if s.residual >= steady::RESIDUAL_TOL {
                return Err(Error::NoConvergence {
                    iterations: s.newton_steps,
                    residual: s.residual,
                });
            }
            Ok(s)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SlavedPrediction {
    /// `<phi_1^3, phi_3>` from dealiased products.
    pub tensor: f64,
    pub beta3: f64,
    /// Predicted `x_3 / x_1^3`.
    pub ratio: f64,
    /// Same ratio with the closed form `-1 / (2 L beta_3)`.
    pub printed_ratio: f64,
}

/// Third-harmonic response `x_3 = <phi_1^3, phi_3> x_1^3 / beta_3` on a
/// Dirichlet interval.
pub fn slaved_mode(domain: &Arc<Domain>, lambda: f64) -> Result<SlavedPrediction> {
    if domain.bc() != Boundary::Dirichlet {
        return Err(Error::Range("slaved harmonic is defined on Dirichlet intervals".into()));
    }
    let p1 = SpectralField::single(domain, &ModeIndex::sin(&[1]), 1.0)?;
    let p3 = SpectralField::single(domain, &ModeIndex::sin(&[3]), 1.0)?;
    let tensor = p1.cube()?.inner(&p3)?;
    // steady balance on the third mode: beta_3 x_3 = <u^3, phi_3>
    let beta3 = linear::growth_rate(domain, &ModeIndex::sin(&[3]), lambda);
    let l = domain.lengths()[0];
    Ok(SlavedPrediction {
        tensor,
        beta3,
        ratio: tensor / beta3,
        printed_ratio: -1.0 / (2.0 * l * beta3),
    })
}

pub fn slaved_mode_prediction(domain: &Arc<Domain>, lambda: f64, x1: f64) -> Result<f64> {
    Ok(slaved_mode(domain, lambda)?.ratio * x1.powi(3))
}

/// The closed-form cubic coefficient `3 / (2 L^2)` quoted for the
/// odd-periodic system, for comparison with the tensor.
pub fn printed_cubic_constant(length: f64) -> f64 {
    3.0 / (2.0 * length * length)
}
