//! Spectrum of `L_lambda = -(I + Delta)^2 + lambda` about the trivial state.
//!
//! On every supported space the eigenfunctions of `(I + Delta)^2` are the
//! retained sine/cosine modes themselves, with eigenvalue `P(|kappa|)` where
//! `P(x) = (1 - x^2)^2`. Periodic conditions use `kappa = 2 pi k / L`, so the
//! basis functions are `L`-periodic; the odd-periodic lattice is the sine half
//! of the periodic one.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{Boundary, Domain, ModeIndex};

/// Modes within this distance of the minimum of `P` count as critical.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// `P(x) = (1 - x^2)^2` evaluated at `x^2 = kappa2`.
pub fn symbol_p(kappa2: f64) -> f64 {
    (1.0 - kappa2).powi(2)
}

pub fn growth_rate(domain: &Domain, mode: &ModeIndex, lambda: f64) -> f64 {
    let dim = domain.dim();
    lambda - symbol_p(domain.kappa2_of(&mode.k[..dim]))
}

/// Diagonal of `L_lambda` in coefficient order; the same quantity as
/// [`growth_rate`] for every retained mode.
pub fn linear_symbol(domain: &Domain, lambda: f64) -> Vec<f64> {
    domain
        .kappa2()
        .iter()
        .map(|&k2| lambda - symbol_p(k2))
        .collect()
}

/// Eigenvalues `P(kappa)` of `(I + Delta)^2` in coefficient order.
pub fn operator_a(domain: &Domain) -> Vec<f64> {
    domain.kappa2().iter().map(|&k2| symbol_p(k2)).collect()
}

#[derive(Clone, Debug)]
pub struct EigenSummary {
    domain: Arc<Domain>,
    pub lambda_c: f64,
    pub critical_modes: Vec<ModeIndex>,
    /// Distinct `|kappa|^2` values attaining `lambda_c`.
    pub critical_kappa2: Vec<f64>,
    pub multiplicity: usize,
}

impl EigenSummary {
    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn beta(&self, mode: &ModeIndex, lambda: f64) -> f64 {
        growth_rate(&self.domain, mode, lambda)
    }

    /// `beta` of the critical modes, `lambda - lambda_c`.
    pub fn beta_c(&self, lambda: f64) -> f64 {
        lambda - self.lambda_c
    }

    pub fn is_degenerate(&self) -> bool {
        self.critical_kappa2.len() > 1
    }

    /// Errors unless the critical eigenspace belongs to a single wavenumber.
    pub fn require_clean(&self) -> Result<&Self> {
        if self.is_degenerate() {
            Err(Error::ExplicitDegeneracy(
                self.critical_kappa2.iter().map(|k| k.sqrt()).collect(),
            ))
        } else {
            Ok(self)
        }
    }

    pub fn critical_indices(&self) -> Vec<usize> {
        self.critical_modes
            .iter()
            .filter_map(|m| self.domain.index_of(m))
            .collect()
    }

    /// Critical wave vectors with both signs, as integer vectors.
    pub fn critical_wavevectors(&self) -> Vec<Vec<i32>> {
        let dim = self.domain.dim();
        let mut out: Vec<Vec<i32>> = Vec::new();
        for m in &self.critical_modes {
            let k = m.k[..dim].to_vec();
            if self.domain.bc() == Boundary::Dirichlet {
                if !out.contains(&k) {
                    out.push(k);
                }
                continue;
            }
            let nk: Vec<i32> = k.iter().map(|v| -v).collect();
            for v in [k, nk] {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out.sort();
        out
    }

    pub fn report(&self, lambdas: &[f64]) -> EigenReport {
        let modes: Vec<ModeIndex> = self.domain.modes().to_vec();
        EigenReport {
            bc: self.domain.bc(),
            lengths: self.domain.lengths().to_vec(),
            lambda_c: self.lambda_c,
            critical_modes: self.critical_modes.clone(),
            multiplicity: self.multiplicity,
            degenerate: self.is_degenerate(),
            betas: lambdas
                .iter()
                .map(|&l| BetaRow {
                    lambda: l,
                    critical: self.beta_c(l),
                    leading: {
                        let mut b: Vec<(f64, ModeIndex)> = modes
                            .iter()
                            .map(|m| (self.beta(m, l), *m))
                            .collect();
                        b.sort_by(|a, c| c.0.total_cmp(&a.0).then(a.1.cmp(&c.1)));
                        b.truncate(8);
                        b.into_iter()
                            .map(|(beta, mode)| ModeBeta { mode, beta })
                            .collect()
                    },
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenReport {
    pub bc: Boundary,
    pub lengths: Vec<f64>,
    pub lambda_c: f64,
    pub critical_modes: Vec<ModeIndex>,
    pub multiplicity: usize,
    pub degenerate: bool,
    pub betas: Vec<BetaRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaRow {
    pub lambda: f64,
    pub critical: f64,
    pub leading: Vec<ModeBeta>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModeBeta {
    pub mode: ModeIndex,
    pub beta: f64,
}

/// Principal eigenvalue of `(I + Delta)^2` and its eigenspace.
///
/// The minimizer is searched over the whole lattice, not only the retained
/// band, and `BandTooSmall` is returned when it falls outside the band.
pub fn principal(domain: &Arc<Domain>) -> Result<EigenSummary> {
    let dim = domain.dim();
    let steps: Vec<f64> = (0..dim).map(|a| domain.wavenumber(a, 1)).collect();

    // P at the smallest single-axis wave vector bounds the minimum from above;
    // anything better has |1 - kappa^2| below that bound.
    let w_min = steps.iter().cloned().fold(f64::INFINITY, f64::min);
    let reach = 1.0 + (1.0 - w_min * w_min).abs();
    let extent: Vec<i32> = steps
        .iter()
        .map(|w| (reach.sqrt() / w).floor() as i32 + 1)
        .collect();

    let mut best = f64::INFINITY;
    let mut hits: Vec<(Vec<i32>, f64)> = Vec::new();
    let mut k = vec![0i32; dim];
    scan(&extent, 0, &mut k, domain.bc(), &mut |k| {
        let k2 = domain.kappa2_of(k);
        let p = symbol_p(k2);
        if p < best - TIE_TOLERANCE {
            best = p;
            hits.retain(|(_, q)| *q <= best + TIE_TOLERANCE);
        }
        if p <= best + TIE_TOLERANCE {
            hits.push((k.to_vec(), p));
        }
    });
    hits.retain(|(_, q)| *q <= best + TIE_TOLERANCE);

    let mut critical_modes = Vec::new();
    let mut critical_kappa2: Vec<f64> = Vec::new();
    for (k, _) in &hits {
        let outside = k
            .iter()
            .zip(domain.band())
            .any(|(&ka, &m)| ka.unsigned_abs() as usize > m);
        if outside {
            let needed = k.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
            return Err(Error::BandTooSmall {
                band: *domain.band().iter().min().unwrap_or(&0),
                needed,
            });
        }
        let k2 = domain.kappa2_of(k);
        if !critical_kappa2.iter().any(|c| (c - k2).abs() <= 1e-9 * k2.max(1.0)) {
            critical_kappa2.push(k2);
        }
        critical_modes.push(ModeIndex::sin(k));
        if domain.bc() == Boundary::Periodic {
            critical_modes.push(ModeIndex::cos(k));
        }
    }
    critical_modes.sort();
    critical_kappa2.sort_by(f64::total_cmp);
    let multiplicity = critical_modes.len();
    Ok(EigenSummary {
        domain: domain.clone(),
        lambda_c: best,
        critical_modes,
        critical_kappa2,
        multiplicity,
    })
}

fn scan(extent: &[i32], axis: usize, k: &mut Vec<i32>, bc: Boundary, f: &mut impl FnMut(&[i32])) {
    if axis == extent.len() {
        let normalized = match k.iter().find(|&&c| c != 0) {
            Some(&c) => c > 0,
            None => false,
        };
        if normalized {
            f(k);
        }
        return;
    }
    let lo = if bc == Boundary::Dirichlet { 1 } else { -extent[axis] };
    for v in lo..=extent[axis] {
        k[axis] = v;
        scan(extent, axis + 1, k, bc, f);
    }
}

/// Modes ordered by `P(kappa)`, lowest first; handy for picking slaved modes.
pub fn modes_by_symbol(domain: &Domain) -> Vec<(ModeIndex, f64)> {
    let mut v: Vec<(ModeIndex, f64)> = domain
        .modes()
        .iter()
        .zip(domain.kappa2())
        .map(|(m, &k2)| (*m, symbol_p(k2)))
        .collect();
    v.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    v
}
