use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use super::domain::{Boundary, Domain, ModeIndex, Parity};
use super::transform::Symmetry;
use crate::error::{Error, Result};

/// Real field expanded in the orthonormal eigenbasis of `(I + Delta)^2`.
///
/// Coefficient `i` multiplies `sqrt(2/|Omega|) sin(kappa . x)` (or `cos`) for
/// `domain.modes()[i]`, so `|u|_2^2 = sum coeffs^2`.
#[derive(Clone, Debug)]
pub struct SpectralField {
    domain: Arc<Domain>,
    coeffs: Vec<f64>,
}

/// Samples on the physical collocation grid.
#[derive(Clone, Debug)]
pub struct GridField {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(domain: &Arc<Domain>) -> Self {
        Self {
            domain: domain.clone(),
            coeffs: vec![0.0; domain.len()],
        }
    }

    pub fn from_coeffs(domain: &Arc<Domain>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.len() {
            return Err(Error::DomainMismatch);
        }
        Ok(Self {
            domain: domain.clone(),
            coeffs,
        })
    }

    /// `value` times the normalized basis function of `mode`.
    pub fn single(domain: &Arc<Domain>, mode: &ModeIndex, value: f64) -> Result<Self> {
        let idx = domain
            .index_of(mode)
            .ok_or_else(|| Error::Range(format!("mode {mode} is not retained")))?;
        let mut f = Self::zeros(domain);
        f.coeffs[idx] = value;
        Ok(f)
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn coeff(&self, mode: &ModeIndex) -> f64 {
        self.domain
            .index_of(mode)
            .map(|i| self.coeffs[i])
            .unwrap_or(0.0)
    }

    /// Same-grid field built from new coefficients.
    pub(crate) fn with_coeffs(&self, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), self.coeffs.len());
        Self {
            domain: self.domain.clone(),
            coeffs,
        }
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    /// `L^2(Omega)` inner product.
    pub fn inner(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(dot(&self.coeffs, &other.coeffs))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.coeffs, &self.coeffs).sqrt()
    }

    pub fn distance(&self, other: &Self) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.with_coeffs(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// `self + a * x`.
    pub fn axpy(&self, a: f64, x: &Self) -> Result<Self> {
        self.check(x)?;
        Ok(self.with_coeffs(
            self.coeffs
                .iter()
                .zip(&x.coeffs)
                .map(|(s, x)| s + a * x)
                .collect(),
        ))
    }

    pub fn to_grid(&self) -> GridField {
        let ext = self.domain.synthesize(&self.coeffs);
        GridField {
            domain: self.domain.clone(),
            values: self.domain.restrict(&ext),
        }
    }

    pub(crate) fn to_ext(&self) -> Vec<f64> {
        self.domain.synthesize(&self.coeffs)
    }

    pub(crate) fn from_ext(domain: &Arc<Domain>, ext: &[f64], symmetry: Symmetry) -> Self {
        Self {
            domain: domain.clone(),
            coeffs: domain.analyze(ext, symmetry),
        }
    }

    /// Field translated by `shift`: `u(x - shift)`. Only meaningful for
    /// periodic conditions; Dirichlet and odd-periodic spaces are not
    /// translation invariant and are returned unchanged for a zero shift.
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        let d = &self.domain;
        if d.bc() != Boundary::Periodic {
            if shift.iter().all(|&s| s == 0.0) {
                return Ok(self.clone());
            }
            return Err(Error::Range(format!(
                "translations do not preserve the {} space",
                d.bc()
            )));
        }
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, m) in d.modes().iter().enumerate() {
            if m.parity != Parity::Sin {
                continue;
            }
            // modes are stored as (sin, cos) pairs for periodic domains
            let (s, c) = (self.coeffs[i], self.coeffs[i + 1]);
            let phase: f64 = (0..d.dim()).map(|a| d.wavenumber(a, m.k[a]) * shift[a]).sum();
            let (sn, cs) = phase.sin_cos();
            // sin(k(x - h)) = sin kx cos kh - cos kx sin kh
            // cos(k(x - h)) = cos kx cos kh + sin kx sin kh
            out[i] = s * cs + c * sn;
            out[i + 1] = c * cs - s * sn;
        }
        Ok(self.with_coeffs(out))
    }

    /// Partial derivative along `axis` (periodic conditions only).
    pub fn derivative(&self, axis: usize) -> Result<Self> {
        let d = &self.domain;
        if d.bc() != Boundary::Periodic {
            return Err(Error::Range("derivatives leave the sine space".into()));
        }
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, m) in d.modes().iter().enumerate() {
            if m.parity != Parity::Sin {
                continue;
            }
            let k = d.wavenumber(axis, m.k[axis]);
            let (s, c) = (self.coeffs[i], self.coeffs[i + 1]);
            out[i] = -k * c;
            out[i + 1] = k * s;
        }
        Ok(self.with_coeffs(out))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl<'a> Add<&'a SpectralField> for &'a SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(1.0, rhs).expect("domain mismatch in field addition")
    }
}

impl<'a> Sub<&'a SpectralField> for &'a SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: &SpectralField) -> SpectralField {
        self.axpy(-1.0, rhs).expect("domain mismatch in field subtraction")
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, s: f64) -> SpectralField {
        self.scaled(s)
    }
}

impl GridField {
    pub fn from_values(domain: &Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.grid_points() {
            return Err(Error::DomainMismatch);
        }
        Ok(Self {
            domain: domain.clone(),
            values,
        })
    }

    /// Samples `f` at every collocation point.
    pub fn sample(domain: &Arc<Domain>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..domain.grid_points())
            .map(|i| f(&domain.grid_coords(i)))
            .collect();
        Self {
            domain: domain.clone(),
            values,
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Projection onto the retained band; the exact inverse of
    /// [`SpectralField::to_grid`] on band-limited data.
    pub fn to_spectral(&self) -> SpectralField {
        let ext = self.domain.extend(&self.values);
        SpectralField::from_ext(&self.domain, &ext, Symmetry::Odd)
    }

    /// Discrete `L^2` norm by the trapezoid rule, which is exact for
    /// trigonometric polynomials resolved by the grid.
    pub fn l2_norm(&self) -> f64 {
        let d = &self.domain;
        let cell: f64 = d
            .lengths()
            .iter()
            .zip(d.grid())
            .map(|(l, n)| l / *n as f64)
            .product();
        (self.values.iter().map(|v| v * v).sum::<f64>() * cell).sqrt()
    }
}
