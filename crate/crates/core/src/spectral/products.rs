//! Dealiased pointwise products.
//!
//! Every product is formed on the extended grid, which the domain guarantees
//! is fine enough that a cubic of band-limited fields is resolved exactly, and
//! then projected back onto the retained band. For periodic domains this also
//! drops the mean.

use super::field::SpectralField;
use super::transform::Symmetry;
use crate::error::{Error, Result};

impl SpectralField {
    /// Coefficients of `u^3` on the retained band.
    pub fn cube(&self) -> Result<SpectralField> {
        self.domain().check_dealiased()?;
        let ext: Vec<f64> = self.to_ext().into_iter().map(|v| v * v * v).collect();
        Ok(SpectralField::from_ext(self.domain(), &ext, Symmetry::Odd))
    }

    /// Coefficients of `u^2` on the retained band. On a Dirichlet interval the
    /// result is the half-range sine expansion of `u^2` on `(0, L)`.
    pub fn square(&self) -> Result<SpectralField> {
        self.domain().check_dealiased()?;
        let ext: Vec<f64> = self.to_ext().into_iter().map(|v| v * v).collect();
        Ok(SpectralField::from_ext(self.domain(), &ext, Symmetry::Even))
    }

    /// Projection of `u v`.
    pub fn product(&self, other: &SpectralField) -> Result<SpectralField> {
        if !self.same_domain(other) {
            return Err(Error::DomainMismatch);
        }
        self.domain().check_dealiased()?;
        let a = self.to_ext();
        let b = other.to_ext();
        let ext: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        Ok(SpectralField::from_ext(self.domain(), &ext, Symmetry::Even))
    }

    /// Projection of `u v w`.
    pub fn triple(&self, v: &SpectralField, w: &SpectralField) -> Result<SpectralField> {
        if !self.same_domain(v) || !self.same_domain(w) {
            return Err(Error::DomainMismatch);
        }
        self.domain().check_dealiased()?;
        let a = self.to_ext();
        let b = v.to_ext();
        let c = w.to_ext();
        let ext: Vec<f64> = a
            .iter()
            .zip(&b)
            .zip(&c)
            .map(|((x, y), z)| x * y * z)
            .collect();
        Ok(SpectralField::from_ext(self.domain(), &ext, Symmetry::Odd))
    }
}

/// Pointwise multiplier held on the extended grid, for repeated products
/// `P(g v)` with a fixed `g` (Jacobian actions).
#[derive(Clone, Debug)]
pub struct GridMultiplier {
    values: Vec<f64>,
    symmetry: Symmetry,
}

impl GridMultiplier {
    /// `g = sum_p coeff_p u^p` for the given polynomial coefficients (constant first).
    pub fn polynomial(u: &SpectralField, coeffs: &[f64]) -> Result<Self> {
        u.domain().check_dealiased()?;
        let ext = u.to_ext();
        let values = ext
            .iter()
            .map(|&x| coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c))
            .collect();
        let has_odd = coeffs.iter().skip(1).step_by(2).any(|&c| c != 0.0);
        let has_even = coeffs.iter().step_by(2).any(|&c| c != 0.0);
        // g times an odd field: even powers of u keep it odd, odd powers make it even
        let symmetry = match (has_even, has_odd) {
            (true, false) | (false, false) => Symmetry::Odd,
            (false, true) => Symmetry::Even,
            (true, true) => Symmetry::Any,
        };
        Ok(Self { values, symmetry })
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn abs_max(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn apply(&self, v: &SpectralField) -> SpectralField {
        let ext: Vec<f64> = v
            .to_ext()
            .iter()
            .zip(&self.values)
            .map(|(a, g)| a * g)
            .collect();
        SpectralField::from_ext(v.domain(), &ext, self.symmetry)
    }
}
