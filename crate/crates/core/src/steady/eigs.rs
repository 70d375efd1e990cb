//! Largest eigenvalues of a frozen Jacobian by shift-invert Lanczos with
//! full reorthogonalization and locking.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::krylov::{self, CgOutcome, KrylovOptions};
use super::{Linearization, NEUTRAL_BAND};
use crate::error::{Error, Result};
use crate::spectral::{dot, Domain};

#[derive(Clone, Copy, Debug)]
pub struct EigOptions {
    /// Minimum number of eigenvalues returned; more are computed until the
    /// window reaches clearly negative values.
    pub nev: usize,
    pub max_basis: usize,
    pub tol: f64,
    pub max_runs: usize,
    pub seed: u64,
}

impl EigOptions {
    pub fn for_domain(d: &Domain) -> Self {
        Self {
            nev: (4 + 2 * d.dim()).min(d.len()),
            ..Self::default()
        }
    }
}

impl Default for EigOptions {
    fn default() -> Self {
        Self {
            nev: 6,
            max_basis: 40,
            tol: 1e-11,
            max_runs: 200,
            seed: 0x5eed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
}

fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(w, b);
            w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn normalize(w: &mut [f64]) -> f64 {
    let n = dot(w, w).sqrt();
    if n > 0.0 {
        w.iter_mut().for_each(|x| *x /= n);
    }
    n
}

struct Run {
    qs: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    last_beta: f64,
}

/// One Lanczos pass of at most `m` steps, kept orthogonal to `basis`.
fn lanczos_run(solve: &dyn Fn(&[f64]) -> Vec<f64>, basis: &[Vec<f64>], q: Vec<f64>, m: usize) -> Run {
    let mut run = Run {
        qs: vec![q],
        alpha: Vec::new(),
        beta: Vec::new(),
        last_beta: 0.0,
    };
    for j in 0..m {
        let mut w = solve(&run.qs[j]);
        orthogonalize(&mut w, basis);
        let a = dot(&w, &run.qs[j]);
        w.iter_mut().zip(&run.qs[j]).for_each(|(x, y)| *x -= a * y);
        if j > 0 {
            let b = run.beta[j - 1];
            w.iter_mut().zip(&run.qs[j - 1]).for_each(|(x, y)| *x -= b * y);
        }
        orthogonalize(&mut w, &run.qs);
        orthogonalize(&mut w, basis);
        run.alpha.push(a);
        let b = dot(&w, &w).sqrt();
        if b < 1e-13 * a.abs().max(1e-300) {
            run.last_beta = 0.0;
            break;
        }
        run.last_beta = b;
        if j + 1 == m {
            break;
        }
        run.beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        run.qs.push(w);
    }
    run
}

/// Descending eigenvalues of `lin`, at least `opts.nev` of them and always
/// reaching below `-NEUTRAL_BAND` unless the whole spectrum is exhausted.
pub(crate) fn leading(lin: &Linearization, opts: EigOptions) -> Result<Vec<Eigenpair>> {
    let n = lin.beta().len();
    let sigma = lin.spectral_upper_bound() + 0.1;
    let inv_diag: Vec<f64> = lin.beta().iter().map(|b| 1.0 / (sigma - b)).collect();
    let inner = KrylovOptions {
        rtol: 1e-13,
        max_iter: 2000,
    };
    let shifted = |v: &[f64]| -> Vec<f64> {
        let jv = lin.apply_raw(v);
        v.iter().zip(jv).map(|(a, b)| sigma * a - b).collect()
    };
    let prec = |v: &[f64]| -> Vec<f64> { v.iter().zip(&inv_diag).map(|(a, d)| a * d).collect() };
    let solve = |b: &[f64]| -> Vec<f64> {
        match krylov::pcg(&shifted, &prec, b, inner) {
            CgOutcome::Done(x, _) => x,
            CgOutcome::NegativeCurvature => krylov::minres(&shifted, &prec, b, inner).0,
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    // (theta, vector) with theta = 1 / (sigma - e)
    let mut locked: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut want = opts.nev.min(n).max(1);
    for _ in 0..opts.max_runs {
        if locked.len() == n {
            return Ok(finish(&locked, sigma, want));
        }
        let basis: Vec<Vec<f64>> = locked.iter().map(|(_, v)| v.clone()).collect();
        let mut q: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        orthogonalize(&mut q, &basis);
        if normalize(&mut q) == 0.0 {
            return Ok(finish(&locked, sigma, want.min(locked.len())));
        }
        let run = lanczos_run(&solve, &basis, q, opts.max_basis.min(n - locked.len()));
        let k = run.alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                run.alpha[i]
            } else if i + 1 == j {
                run.beta[i]
            } else if j + 1 == i {
                run.beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let scale = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // window edge before this run's additions
        let edge = (locked.len() >= want).then(|| locked[want - 1].0);
        let mut top = None;
        for &i in &order {
            let theta = eig.eigenvalues[i];
            let res = (run.last_beta * eig.eigenvectors[(k - 1, i)]).abs();
            if res > opts.tol * scale || theta <= 0.0 {
                break;
            }
            top.get_or_insert(theta);
            let mut v = vec![0.0; n];
            for (c, qv) in run.qs.iter().enumerate().take(k) {
                let y = eig.eigenvectors[(c, i)];
                v.iter_mut().zip(qv).for_each(|(x, q)| *x += y * q);
            }
            orthogonalize(&mut v, &basis);
            normalize(&mut v);
            locked.push((theta, v));
        }
        locked.sort_by(|a, b| b.0.total_cmp(&a.0));
        if let (Some(edge), Some(top)) = (edge, top) {
            // a converged pass orthogonal to the window found nothing above it
            if top < edge {
                let e_min = sigma - 1.0 / locked[want - 1].0;
                if e_min < -NEUTRAL_BAND || want == n {
                    return Ok(finish(&locked, sigma, want));
                }
            }
        }
        if locked.len() >= want && sigma - 1.0 / locked[want - 1].0 >= -NEUTRAL_BAND && want < n {
            want = (2 * want).min(n);
        }
    }
    Err(Error::EigsNoConvergence(format!(
        "{} of {} eigenvalues converged",
        locked.len(),
        want
    )))
}

fn finish(locked: &[(f64, Vec<f64>)], sigma: f64, want: usize) -> Vec<Eigenpair> {
    locked
        .iter()
        .take(want)
        .map(|(theta, v)| Eigenpair {
            value: sigma - 1.0 / theta,
            vector: v.clone(),
        })
        .collect()
}
