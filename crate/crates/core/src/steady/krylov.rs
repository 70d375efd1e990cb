//! Matrix-free Krylov solvers for symmetric systems with a diagonal
//! preconditioner.

use crate::spectral::dot;

#[derive(Clone, Copy, Debug)]
pub struct SolveInfo {
    pub iterations: usize,
    /// `|b - A x| / |b|`, recomputed explicitly at exit.
    pub relative_residual: f64,
    pub used_minres: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    pub rtol: f64,
    pub max_iter: usize,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            max_iter: 400,
        }
    }
}

pub(crate) enum CgOutcome {
    Done(Vec<f64>, usize),
    NegativeCurvature,
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Preconditioned conjugate gradients; bails out when `p^T A p <= 0`.
pub(crate) fn pcg(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    prec: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: KrylovOptions,
) -> CgOutcome {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return CgOutcome::Done(x, 0);
    }
    let mut r = b.to_vec();
    let mut z = prec(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=opts.max_iter {
        let ap = op(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return CgOutcome::NegativeCurvature;
        }
        let alpha = rz / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        if norm(&r) <= opts.rtol * bnorm {
            return CgOutcome::Done(x, it);
        }
        z = prec(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    CgOutcome::Done(x, opts.max_iter)
}

/// Preconditioned MINRES for symmetric, possibly indefinite `A`; the
/// preconditioner must be symmetric positive definite.
pub(crate) fn minres(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    prec: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: KrylovOptions,
) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut y = prec(&r1);
    let beta1 = dot(&r1, &y).max(0.0).sqrt();
    if beta1 == 0.0 {
        return (x, 0);
    }
    let mut r2 = r1.clone();
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut w = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut iters = 0;
    for it in 1..=opts.max_iter {
        iters = it;
        let s = 1.0 / beta;
        let v: Vec<f64> = y.iter().map(|yi| s * yi).collect();
        y = op(&v);
        if it >= 2 {
            axpy(&mut y, -beta / oldb, &r1);
        }
        let alfa = dot(&v, &y);
        axpy(&mut y, -alfa / beta, &r2);
        r1 = std::mem::replace(&mut r2, y);
        y = prec(&r2);
        oldb = beta;
        beta = dot(&r2, &y).max(0.0).sqrt();

        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;

        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;

        let denom = 1.0 / gamma;
        let w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) * denom;
            x[i] += phi * w[i];
        }
        if phibar <= opts.rtol * beta1 || beta == 0.0 {
            break;
        }
    }
    (x, iters)
}

/// CG first, MINRES when negative curvature shows up.
pub(crate) fn solve_symmetric(
    op: &dyn Fn(&[f64]) -> Vec<f64>,
    prec: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    opts: KrylovOptions,
) -> (Vec<f64>, SolveInfo) {
    let (x, iterations, used_minres) = match pcg(op, prec, b, opts) {
        CgOutcome::Done(x, it) => (x, it, false),
        CgOutcome::NegativeCurvature => {
            let (x, it) = minres(op, prec, b, opts);
            (x, it, true)
        }
    };
    let bnorm = norm(b);
    let relative_residual = if bnorm == 0.0 {
        0.0
    } else {
        let ax = op(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        norm(&r) / bnorm
    };
    (
        x,
        SolveInfo {
            iterations,
            relative_residual,
            used_minres,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(shift: f64) -> impl Fn(&[f64]) -> Vec<f64> {
        move |x: &[f64]| {
            let n = x.len();
            (0..n)
                .map(|i| {
                    let mut v = (2.0 + shift + i as f64) * x[i];
                    if i > 0 {
                        v -= x[i - 1];
                    }
                    if i + 1 < n {
                        v -= x[i + 1];
                    }
                    v
                })
                .collect()
        }
    }

    #[test]
    fn cg_solves_spd() {
        let op = tridiag(0.0);
        let prec = |x: &[f64]| x.to_vec();
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let (_, info) = solve_symmetric(&op, &prec, &b, KrylovOptions::default());
        assert!(!info.used_minres);
        assert!(info.relative_residual < 1e-10);
    }

    #[test]
    fn minres_handles_indefinite() {
        let op = tridiag(-6.5);
        let prec = |x: &[f64]| x.to_vec();
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).cos()).collect();
        let (_, info) = solve_symmetric(&op, &prec, &b, KrylovOptions::default());
        assert!(info.used_minres);
        assert!(info.relative_residual < 1e-9, "{}", info.relative_residual);
    }

    #[test]
    fn minres_with_diagonal_preconditioner() {
        let n = 40;
        let diag: Vec<f64> = (0..n).map(|i| if i == 3 { -0.5 } else { 1.0 + (i * i) as f64 }).collect();
        let d2 = diag.clone();
        let op = move |x: &[f64]| -> Vec<f64> {
            (0..x.len())
                .map(|i| d2[i] * x[i] + 0.1 * if i > 0 { x[i - 1] } else { 0.0 } + 0.1 * if i + 1 < x.len() { x[i + 1] } else { 0.0 })
                .collect()
        };
        let prec = move |x: &[f64]| -> Vec<f64> { x.iter().zip(&diag).map(|(v, d)| v / (d.abs() + 1.0)).collect() };
        let b: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let (x, it) = minres(&op, &prec, &b, KrylovOptions::default());
        let ax = op(&x);
        let res: f64 = b.iter().zip(&ax).map(|(a, c)| (a - c).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-9, "res {res} after {it}");
    }
}
