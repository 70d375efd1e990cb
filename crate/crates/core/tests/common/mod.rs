//! Independent oracles: exact products through exponential convolution,
//! Gauss-Legendre quadrature and a brute-force scan for the threshold.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use shbif::{Boundary, Domain, Parity, SpectralField};

/// `sum_j c_j exp(i j . theta)` with integer `j` in units of the axis
/// base wavenumber (`pi / L` for Dirichlet, `2 pi / L` otherwise).
pub type ExpPoly = BTreeMap<Vec<i32>, Complex64>;

fn mode_exp(d: &Domain, k: &[i32], parity: Parity, c: f64) -> ExpPoly {
    let dim = d.dim();
    let s = (2.0 / d.volume()).sqrt() * c;
    let k: Vec<i32> = k[..dim].to_vec();
    let nk: Vec<i32> = k.iter().map(|v| -v).collect();
    let mut out = ExpPoly::new();
    let (plus, minus) = match parity {
        // sin t = (e^{it} - e^{-it}) / 2i
        Parity::Sin => (Complex64::new(0.0, -s / 2.0), Complex64::new(0.0, s / 2.0)),
        Parity::Cos => (Complex64::new(s / 2.0, 0.0), Complex64::new(s / 2.0, 0.0)),
    };
    *out.entry(k).or_default() += plus;
    *out.entry(nk).or_default() += minus;
    out
}

pub fn to_exp(u: &SpectralField) -> ExpPoly {
    let d = u.domain();
    let mut out = ExpPoly::new();
    for (m, &c) in d.modes().iter().zip(u.coeffs()) {
        if c != 0.0 {
            for (k, v) in mode_exp(d, &m.k, m.parity, c) {
                *out.entry(k).or_default() += v;
            }
        }
    }
    out
}

pub fn mul(a: &ExpPoly, b: &ExpPoly) -> ExpPoly {
    let mut out = ExpPoly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            let k: Vec<i32> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
            *out.entry(k).or_default() += va * vb;
        }
    }
    out
}

/// `int exp(i n theta(x)) dx` over one axis.
fn axis_integral(bc: Boundary, l: f64, n: i32) -> Complex64 {
    if n == 0 {
        return Complex64::new(l, 0.0);
    }
    match bc {
        Boundary::Dirichlet if n % 2 != 0 => Complex64::new(0.0, 2.0 * l / (n as f64 * PI)),
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Coefficients of the orthogonal projection of `f` onto the retained basis.
pub fn project(d: &std::sync::Arc<Domain>, f: &ExpPoly) -> Vec<f64> {
    d.modes()
        .iter()
        .map(|m| {
            let phi = mode_exp(d, &m.k, m.parity, 1.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (kf, vf) in f {
                for (kp, vp) in &phi {
                    let mut w = vf * vp;
                    for a in 0..d.dim() {
                        w *= axis_integral(d.bc(), d.lengths()[a], kf[a] + kp[a]);
                    }
                    acc += w;
                }
            }
            acc.re
        })
        .collect()
}

pub fn oracle_cube(u: &SpectralField) -> Vec<f64> {
    let e = to_exp(u);
    project(u.domain(), &mul(&mul(&e, &e), &e))
}

pub fn oracle_square(u: &SpectralField) -> Vec<f64> {
    let e = to_exp(u);
    project(u.domain(), &mul(&e, &e))
}

/// `<phi_a phi_b phi_c, phi_d>` for modes given by index.
pub fn oracle_tensor(d: &std::sync::Arc<Domain>, idx: [usize; 4]) -> f64 {
    let e: Vec<ExpPoly> = idx
        .iter()
        .map(|&i| {
            let m = &d.modes()[i];
            mode_exp(d, &m.k, m.parity, 1.0)
        })
        .collect();
    let prod = mul(&mul(&e[0], &e[1]), &e[2]);
    project(d, &prod)[idx[3]]
}

/// Gauss-Legendre nodes and weights on `[a, b]`.
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let legendre = |z: f64| {
        let (mut p0, mut p1) = (1.0, z);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
    };
    (0..n)
        .map(|i| {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(z);
                let dz = p / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(z);
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            (0.5 * (b - a) * (z + 1.0) + a, 0.5 * (b - a) * w)
        })
        .collect()
}

/// `int_a^b f` by 200-point Gauss-Legendre.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    gauss_legendre(200, a, b).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// Smallest `(1 - |kappa|^2)^2` over a generous lattice.
pub fn threshold_scan(bc: Boundary, lengths: &[f64]) -> f64 {
    let unit: Vec<f64> = lengths
        .iter()
        .map(|l| if bc == Boundary::Dirichlet { PI / l } else { 2.0 * PI / l })
        .collect();
    let mut best = f64::INFINITY;
    let range = 40i32;
    let mut k = vec![0i32; lengths.len()];
    loop {
        let nonzero = match bc {
            Boundary::Dirichlet => k.iter().all(|&v| v > 0),
            _ => k.iter().any(|&v| v != 0),
        };
        if nonzero {
            let k2: f64 = k.iter().zip(&unit).map(|(&v, u)| (v as f64 * u).powi(2)).sum();
            best = best.min((1.0 - k2).powi(2));
        }
        let mut a = 0;
        loop {
            if a == k.len() {
                return best;
            }
            k[a] += 1;
            if k[a] <= range {
                break;
            }
            k[a] = 0;
            a += 1;
        }
    }
}

/// Gaussian field on the modes with all `|k_a| <= max_k`, unit `L^2` norm.
pub fn random_unit(d: &std::sync::Arc<Domain>, max_k: i32, rng: &mut impl rand::Rng) -> SpectralField {
    use rand_distr::{Distribution, StandardNormal};
    let c: Vec<f64> = d
        .modes()
        .iter()
        .map(|m| {
            let x: f64 = StandardNormal.sample(rng);
            if m.k.iter().all(|k| k.abs() <= max_k) { x } else { 0.0 }
        })
        .collect();
    let u = SpectralField::from_coeffs(d, c).unwrap();
    let n = u.norm();
    u.scaled(1.0 / n)
}

/// Least-squares slope and intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let b = sxy / sxx;
    (b, my - b * mx)
}
