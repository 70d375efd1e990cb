//! Multi-start censuses of equilibria, symmetry-aware deduplication and the
//! index count.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::{newton, stability, SteadyState, MORSE_THRESHOLD};
use crate::dynamics::Params;
use crate::error::{Error, Result};
use crate::linear;
use crate::spectral::{Boundary, Domain, Parity, SpectralField};
use std::sync::Arc;

#[derive(Clone, Copy, Debug)]
pub struct CensusConfig {
    pub n_seeds: usize,
    /// L2 norm of the critical-mode part of each seed.
    pub seed_scale: f64,
    /// Relative size of the perturbation on nearby slaved modes.
    pub noise: f64,
    pub rng_seed: u64,
    /// States closer than this (modulo symmetry) are merged.
    pub dedup_tol: f64,
    pub classify: bool,
}

impl Default for CensusConfig {
    fn default() -> Self {
        Self {
            n_seeds: 100,
            seed_scale: 1.0,
            noise: 1e-2,
            rng_seed: 1,
            dedup_tol: 1e-6,
            classify: true,
        }
    }
}

fn seeds(domain: &Arc<Domain>, cfg: &CensusConfig) -> Result<Vec<SpectralField>> {
    let summary = linear::principal(domain)?;
    let crit = summary.critical_indices();
    let lc = summary.lambda_c;
    // slaved modes that get a little noise: the next few symbol levels up
    let slaved: Vec<usize> = domain
        .kappa2()
        .iter()
        .enumerate()
        .filter(|(i, &k2)| !crit.contains(i) && linear::symbol_p(k2) <= lc + 10.0)
        .map(|(i, _)| i)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut out = Vec::with_capacity(cfg.n_seeds);
    for _ in 0..cfg.n_seeds {
        let mut c = vec![0.0; domain.len()];
        let dir: Vec<f64> = crit.iter().map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
        for (&i, x) in crit.iter().zip(&dir) {
            c[i] = cfg.seed_scale * x / n;
        }
        for &i in &slaved {
            let x: f64 = StandardNormal.sample(&mut rng);
            c[i] = cfg.noise * cfg.seed_scale * x / (slaved.len() as f64).sqrt();
        }
        out.push(SpectralField::from_coeffs(domain, c)?);
    }
    Ok(out)
}

/// `x -> L - x` on a Dirichlet interval: `c_n -> (-1)^(n+1) c_n`.
fn reflected(u: &SpectralField) -> SpectralField {
    let d = u.domain();
    let c = d
        .modes()
        .iter()
        .zip(u.coeffs())
        .map(|(m, &c)| if m.k[0] % 2 == 0 { -c } else { c })
        .collect();
    SpectralField::from_coeffs(d, c).expect("same domain")
}

/// Best translation (and sign) aligning `b` onto `a` on a periodic box.
/// Returns the shift and the remaining distance `min |a - s T_h b|`.
pub fn align(a: &SpectralField, b: &SpectralField, allow_sign: bool) -> Result<(Vec<f64>, f64, f64)> {
    if !a.same_domain(b) {
        return Err(Error::DomainMismatch);
    }
    let d = a.domain();
    if d.bc() != Boundary::Periodic {
        return Err(Error::Range("translations need periodic conditions".into()));
    }
    // C(h) = <a, T_h b> = sum_K A_K cos(kappa.h) + B_K sin(kappa.h)
    let mut terms: Vec<(usize, [f64; 3], f64, f64)> = Vec::new();
    let (ca, cb) = (a.coeffs(), b.coeffs());
    for (i, m) in d.modes().iter().enumerate() {
        if m.parity != Parity::Sin {
            continue;
        }
        let (sa, xa, sb, xb) = (ca[i], ca[i + 1], cb[i], cb[i + 1]);
        let big_a = sa * sb + xa * xb;
        let big_b = sa * xb - xa * sb;
        if big_a == 0.0 && big_b == 0.0 {
            continue;
        }
        let mut kv = [0.0; 3];
        for (ax, k) in kv.iter_mut().enumerate().take(d.dim()) {
            *k = d.wavenumber(ax, m.k[ax]);
        }
        terms.push((d.pos[i], kv, big_a, big_b));
    }
    let corr = |h: &[f64]| -> (f64, [f64; 3], [[f64; 3]; 3]) {
        let mut c = 0.0;
        let mut g = [0.0; 3];
        let mut hess = [[0.0; 3]; 3];
        for (_, kv, aa, bb) in &terms {
            let ph: f64 = (0..d.dim()).map(|x| kv[x] * h[x]).sum();
            let (s, co) = ph.sin_cos();
            c += aa * co + bb * s;
            let d1 = -aa * s + bb * co;
            let d2 = -(aa * co + bb * s);
            for x in 0..d.dim() {
                g[x] += kv[x] * d1;
                for y in 0..d.dim() {
                    hess[x][y] += kv[x] * kv[y] * d2;
                }
            }
        }
        (c, g, hess)
    };
    // coarse: all grid shifts at once
    let total = d.ext_points();
    let mut buf = vec![Complex64::new(0.0, 0.0); total];
    for (p, _, aa, bb) in &terms {
        buf[*p] += Complex64::new(*aa, -*bb);
    }
    d.fft_nd(&mut buf, true);
    let grid = d.grid();
    let shift_of = |flat: usize| -> Vec<f64> {
        let mut h = vec![0.0; d.dim()];
        let mut rem = flat;
        for ax in (0..d.dim()).rev() {
            let j = rem % grid[ax];
            rem /= grid[ax];
            h[ax] = j as f64 * d.lengths()[ax] / grid[ax] as f64;
        }
        h
    };
    let signs: &[f64] = if allow_sign { &[1.0, -1.0] } else { &[1.0] };
    let na2 = a.norm().powi(2);
    let nb2 = b.norm().powi(2);
    let mut best = (vec![0.0; d.dim()], f64::INFINITY, 1.0);
    for &sgn in signs {
        let (j, _) = buf
            .iter()
            .enumerate()
            .map(|(j, z)| (j, sgn * z.re))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let mut h = shift_of(j);
        // Newton on grad C = 0 from the best grid shift
        for _ in 0..30 {
            let (_, g, hs) = corr(&h);
            let step = solve_small(d.dim(), &hs, &g);
            let mut moved = 0.0f64;
            for x in 0..d.dim() {
                h[x] -= step[x];
                moved = moved.max(step[x].abs());
            }
            if moved < 1e-14 {
                break;
            }
        }
        let (c, _, _) = corr(&h);
        let dist = (na2 + nb2 - 2.0 * sgn * c).max(0.0).sqrt();
        if dist < best.1 {
            for (x, l) in h.iter_mut().zip(d.lengths()) {
                *x = x.rem_euclid(*l);
            }
            best = (h, dist, sgn);
        }
    }
    Ok(best)
}

fn solve_small(n: usize, a: &[[f64; 3]; 3], b: &[f64; 3]) -> [f64; 3] {
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let v = nalgebra::DVector::from_fn(n, |i, _| b[i]);
    let mut out = [0.0; 3];
    // a flat correlation (zero Hessian) means no preferred shift
    if let Some(x) = m.lu().solve(&v) {
        for i in 0..n {
            if x[i].is_finite() {
                out[i] = x[i];
            }
        }
    }
    out
}

/// Distance modulo the symmetries the census identifies: sign for odd
/// spaces, translations and sign for periodic ones, the reflection
/// `x -> L - x` for Dirichlet intervals.
pub(crate) fn symmetric_distance(a: &SpectralField, b: &SpectralField) -> Result<f64> {
    match a.domain().bc() {
        Boundary::Dirichlet => Ok(a.distance(b)?.min(a.distance(&reflected(b))?)),
        Boundary::OddPeriodic => Ok(a.distance(b)?.min(a.distance(&-b)?)),
        Boundary::Periodic => Ok(align(a, b, true)?.1),
    }
}

/// Flip the sign so the first significant coefficient is positive.
fn canonical_sign(u: SpectralField) -> SpectralField {
    if u.domain().bc() == Boundary::Dirichlet {
        return u;
    }
    let scale = u.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
    match u.coeffs().iter().find(|c| c.abs() > 1e-6 * scale) {
        Some(&c) if c < 0.0 => -&u,
        _ => u,
    }
}

/// Newton from `cfg.n_seeds` random seeds on the critical modes plus the
/// trivial state, merged modulo symmetry and (optionally) classified.
pub fn find_all(domain: &Arc<Domain>, p: Params, cfg: &CensusConfig) -> Result<Vec<SteadyState>> {
    linear::principal(domain)?.require_clean()?;
    let mut starts = vec![SpectralField::zeros(domain)];
    starts.extend(seeds(domain, cfg)?);
    let solved: Vec<Option<SteadyState>> = starts.par_iter().map(|u0| newton(u0, p).ok()).collect();
    let mut found: Vec<(usize, SteadyState)> = solved
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (i, s)))
        .collect();
    found.sort_by(|a, b| a.1.norm().total_cmp(&b.1.norm()).then(a.0.cmp(&b.0)));
    let mut reps: Vec<SteadyState> = Vec::new();
    for (_, s) in found {
        let mut dup = false;
        for r in &reps {
            if (r.norm() - s.norm()).abs() < cfg.dedup_tol
                && symmetric_distance(&r.state, &s.state)? < cfg.dedup_tol
            {
                dup = true;
                break;
            }
        }
        if !dup {
            let state = if s.is_trivial() {
                SpectralField::zeros(domain)
            } else {
                canonical_sign(s.state.clone())
            };
            reps.push(SteadyState { state, ..s });
        }
    }
    if cfg.classify {
        reps = reps.par_iter().map(stability).collect::<Result<Vec<_>>>()?;
    }
    Ok(reps)
}

/// `sum (-1)^morse` over the nontrivial states of the list.
pub fn index_sum(states: &[SteadyState]) -> Result<i64> {
    let mut sum = 0;
    for s in states.iter().filter(|s| !s.is_trivial()) {
        let morse = s
            .morse_index
            .ok_or_else(|| Error::Range("stability has not been computed".into()))?;
        if let Some(e) = s.leading_eigs.iter().find(|e| e.abs() < MORSE_THRESHOLD) {
            return Err(Error::DegenerateState(*e));
        }
        sum += if morse % 2 == 0 { 1 } else { -1 };
    }
    Ok(sum)
}

/// Value the index sum must take for a critical space of dimension `m`.
pub fn index_formula(m: usize) -> i64 {
    if m % 2 == 1 {
        2
    } else {
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeIndex;
    use std::f64::consts::PI;

    #[test]
    fn empty_list_sums_to_zero() {
        assert_eq!(index_sum(&[]).unwrap(), 0);
        assert_eq!(index_formula(1), 2);
        assert_eq!(index_formula(2), 0);
    }

    #[test]
    fn align_recovers_translation() {
        let d = Domain::cube(Boundary::Periodic, 2, 2.0 * PI, 4).unwrap();
        let c: Vec<f64> = (0..d.len()).map(|i| ((i * 7 % 13) as f64 - 6.0) / (1.0 + i as f64)).collect();
        let a = SpectralField::from_coeffs(&d, c).unwrap();
        let b = a.translated(&[0.731, 2.2]).unwrap();
        let (h, dist, sgn) = align(&a, &b, true).unwrap();
        assert!(dist < 1e-10, "{dist}");
        assert_eq!(sgn, 1.0);
        let back = b.translated(&h).unwrap();
        assert!(back.distance(&a).unwrap() < 1e-10);
        let (_, dist, sgn) = align(&a, &-&b, true).unwrap();
        assert!(dist < 1e-10);
        assert_eq!(sgn, -1.0);
    }

    #[test]
    fn subcritical_census_is_trivial() {
        let d = Domain::line(Boundary::Dirichlet, PI / 2.0, 16).unwrap();
        let cfg = CensusConfig {
            n_seeds: 10,
            seed_scale: 0.5,
            ..Default::default()
        };
        let states = find_all(&d, Params::sh(8.5), &cfg).unwrap();
        assert_eq!(states.len(), 1);
        assert!(states[0].is_trivial());
        assert_eq!(states[0].morse_index, Some(0));
    }

    #[test]
    fn reflection_fixes_odd_modes() {
        let d = Domain::line(Boundary::Dirichlet, 1.0, 8).unwrap();
        let u = SpectralField::single(&d, &ModeIndex::sin(&[3]), 1.0).unwrap();
        assert_eq!(reflected(&u).distance(&u).unwrap(), 0.0);
        let v = SpectralField::single(&d, &ModeIndex::sin(&[2]), 1.0).unwrap();
        assert_eq!(reflected(&v).distance(&-&v).unwrap(), 0.0);
    }
}
