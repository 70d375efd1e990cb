//! Synthesis and analysis between coefficient vectors and the extended
//! periodic grid on which every pointwise product is formed.

use num_complex::Complex64;

use super::domain::{Boundary, Domain, Parity};

/// Which parts of an extended-grid function carry information.
///
/// On a Dirichlet domain, products of an odd number of fields are odd on the
/// extended period and expand exactly in sines; products of an even number are
/// even and must be projected onto the half-range sine series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    Odd,
    Even,
    Any,
}

impl Domain {
    pub(crate) fn fft_nd(&self, data: &mut [Complex64], inverse: bool) {
        let dim = self.ext_len.len();
        let total = data.len();
        let mut stride = total;
        let mut scratch = Vec::new();
        let mut line = Vec::new();
        for a in 0..dim {
            let n = self.ext_len[a];
            stride /= n;
            let plan = if inverse { &self.plans[a].1 } else { &self.plans[a].0 };
            let need = plan.get_inplace_scratch_len();
            if scratch.len() < need {
                scratch.resize(need, Complex64::new(0.0, 0.0));
            }
            if stride == 1 {
                for chunk in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(chunk, &mut scratch);
                }
            } else {
                line.resize(n, Complex64::new(0.0, 0.0));
                let block = n * stride;
                for outer in (0..total).step_by(block) {
                    for inner in 0..stride {
                        let base = outer + inner;
                        for (j, v) in line.iter_mut().enumerate() {
                            *v = data[base + j * stride];
                        }
                        plan.process_with_scratch(&mut line, &mut scratch);
                        for (j, v) in line.iter().enumerate() {
                            data[base + j * stride] = *v;
                        }
                    }
                }
            }
        }
    }

    /// Field values on the extended grid from basis coefficients.
    pub(crate) fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut spec = vec![Complex64::new(0.0, 0.0); self.ext_points()];
        let half = 0.5 * self.basis_scale();
        for (i, &c) in coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            let (p, n) = (self.pos[i], self.neg[i]);
            match self.modes()[i].parity {
                Parity::Sin => {
                    spec[p] += Complex64::new(0.0, -half * c);
                    spec[n] += Complex64::new(0.0, half * c);
                }
                Parity::Cos => {
                    spec[p] += Complex64::new(half * c, 0.0);
                    spec[n] += Complex64::new(half * c, 0.0);
                }
            }
        }
        self.fft_nd(&mut spec, true);
        spec.into_iter().map(|z| z.re).collect()
    }

    /// Projection of an extended-grid function onto the retained basis.
    pub(crate) fn analyze(&self, values: &[f64], symmetry: Symmetry) -> Vec<f64> {
        let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft_nd(&mut spec, false);
        let norm = 1.0 / (self.ext_points() as f64 * 0.5 * self.basis_scale());
        let mut out: Vec<f64> = self
            .modes()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let z = spec[self.pos[i]];
                match m.parity {
                    Parity::Sin => -z.im * norm,
                    Parity::Cos => z.re * norm,
                }
            })
            .collect();
        if self.bc() == Boundary::Dirichlet && symmetry != Symmetry::Odd {
            if symmetry == Symmetry::Even {
                out.iter_mut().for_each(|v| *v = 0.0);
            }
            let n_cos = self.grid()[0];
            let inv = 1.0 / self.ext_points() as f64;
            let cos: Vec<f64> = (0..n_cos)
                .map(|m| {
                    let w = if m == 0 { 1.0 } else { 2.0 };
                    w * spec[m].re * inv
                })
                .collect();
            for (n, o) in out.iter_mut().enumerate() {
                let row = &self.cos_to_sin[n * n_cos..(n + 1) * n_cos];
                *o += row.iter().zip(&cos).map(|(t, c)| t * c).sum::<f64>();
            }
        }
        out
    }

    /// Physical-grid samples from the extended grid.
    pub(crate) fn restrict(&self, ext: &[f64]) -> Vec<f64> {
        match self.bc() {
            Boundary::Dirichlet => ext[1..self.grid()[0]].to_vec(),
            _ => ext.to_vec(),
        }
    }

    /// Extended-grid samples from the physical grid (odd extension for Dirichlet).
    pub(crate) fn extend(&self, phys: &[f64]) -> Vec<f64> {
        match self.bc() {
            Boundary::Dirichlet => {
                let n = self.grid()[0];
                let mut ext = vec![0.0; 2 * n];
                for j in 1..n {
                    ext[j] = phys[j - 1];
                    ext[2 * n - j] = -phys[j - 1];
                }
                ext
            }
            _ => phys.to_vec(),
        }
    }
}
