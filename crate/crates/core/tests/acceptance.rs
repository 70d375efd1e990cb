//! Acceptance criteria 1-11. Prints one line per criterion and exits
//! non-zero if any fails. Expected values are computed here, from closed
//! forms or from the oracles in `common`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use shbif::dynamics::{self, basin_probe, integrate, BasinLabel, Model, Stepper};
use shbif::reduced;
use shbif::steady::{self, CensusConfig, SteadyState};
use shbif::{Boundary, Domain, GridField, ModeIndex, Params, Scheme, SpectralField, StepperConfig};

const SEED: u64 = 7;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(parts: Vec<(bool, String)>) -> Verdict {
    Verdict {
        passed: parts.iter().all(|p| p.0),
        detail: parts
            .into_iter()
            .map(|(ok, s)| format!("{}{s}", if ok { "" } else { "!" }))
            .collect::<Vec<_>>()
            .join("; "),
    }
}

fn dirichlet(band: usize) -> Arc<Domain> {
    Domain::line(Boundary::Dirichlet, PI / 2.0, band).unwrap()
}

fn random_runs(lambda: f64, stream: u64) -> (Arc<Domain>, Vec<shbif::RunReport>) {
    let d = dirichlet(32);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + stream);
    let seeds: Vec<SpectralField> = (0..20).map(|_| common::random_unit(&d, 8, &mut rng)).collect();
    let cfg = StepperConfig {
        dt: 1e-3,
        t_end: 20.0,
        scheme: Scheme::Etdrk2,
        sample_every: 10,
        stop_when_steady: false,
    };
    let runs = seeds
        .par_iter()
        .map(|u0| integrate(u0, Params::sh(lambda), &cfg).unwrap())
        .collect();
    (d, runs)
}

fn c1_subcritical() -> Verdict {
    let lc = common::threshold_scan(Boundary::Dirichlet, &[PI / 2.0]);
    let (_, runs) = random_runs(8.0, 1);
    let worst = runs
        .iter()
        .flat_map(|r| r.times.iter().zip(&r.l2_norms).map(|(t, n)| n / ((8.0 - lc) * t).exp()))
        .fold(0.0, f64::max);
    verdict(vec![
        ((lc - 9.0).abs() < 1e-12, format!("lambda_c = {lc}")),
        (worst <= 1.0 + 1e-6, format!("max |u(t)| e^t = {worst:.9}")),
    ])
}

fn c2_critical() -> Verdict {
    let (d, runs) = random_runs(9.0, 2);
    let vol = d.volume();
    let mut worst: f64 = 0.0;
    let mut final_ratio: f64 = 0.0;
    for r in &runs {
        let n0 = r.l2_norms[0];
        for (t, n) in r.times.iter().zip(&r.l2_norms) {
            let bound2 = n0 * n0 / ((2.0 / vol) * n0 * n0 * t + 1.0);
            worst = worst.max(n * n / bound2);
        }
        final_ratio = final_ratio.max(r.l2_norms.last().unwrap() / n0);
    }
    verdict(vec![
        (worst <= 1.0 + 1e-6, format!("max |u|^2 / bound = {worst:.9}")),
        (final_ratio < 0.5, format!("max |u(20)|/|u0| = {final_ratio:.4}")),
    ])
}

fn c3_supercritical() -> Verdict {
    let (d, runs) = random_runs(9.5, 3);
    let vol = d.volume();
    let worst = runs
        .iter()
        .flat_map(|r| {
            let n0 = r.l2_norms[0];
            r.l2_norms.iter().map(move |n| n * n / (n0 * n0).max(0.5 * vol))
        })
        .fold(0.0, f64::max);
    verdict(vec![(worst <= 1.0 + 1e-6, format!("max |u|^2 / max(|u0|^2, |Omega|/2) = {worst:.6}"))])
}

fn branch(d: &Arc<Domain>, p: Params, physical_guess: f64) -> SteadyState {
    let m1 = ModeIndex::sin(&[1]);
    let u0 = SpectralField::single(d, &m1, physical_guess / d.basis_scale()).unwrap();
    steady::stability(&steady::newton(&u0, p).unwrap()).unwrap()
}

fn c4_pitchfork() -> Verdict {
    let d = dirichlet(64);
    let m1 = ModeIndex::sin(&[1]);
    let lambdas = [9.05, 9.1, 9.2, 9.35, 9.5];
    let states: Vec<SteadyState> = lambdas
        .par_iter()
        .map(|&l| branch(&d, Params::sh(l), (4.0 * (l - 9.0) / 3.0f64).sqrt()))
        .collect();
    let x: Vec<f64> = lambdas.iter().map(|l| l - 9.0).collect();
    let y: Vec<f64> = states.iter().map(|s| s.physical_amplitude(&m1).powi(2)).collect();
    let (slope, _) = common::fit_line(&x, &y);
    let g = states[0].state.to_grid();
    let l = PI / 2.0;
    let phi = GridField::sample(&d, |p| (PI * p[0] / l).sin());
    let dot: f64 = g.values().iter().zip(phi.values()).map(|(a, b)| a * b).sum();
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let cosine = dot.abs() / (norm(g.values()) * norm(phi.values()));
    verdict(vec![
        (((slope - 4.0 / 3.0) / (4.0 / 3.0)).abs() <= 0.03, format!("slope {slope:.5} vs 4/3")),
        (cosine >= 0.999, format!("cosine similarity {cosine:.7}")),
    ])
}

fn c5_two_states() -> Verdict {
    let d = dirichlet(32);
    let p = Params::sh(9.5);
    let cfg = CensusConfig {
        n_seeds: 100,
        rng_seed: SEED,
        ..Default::default()
    };
    let states = steady::find_all(&d, p, &cfg).unwrap();
    let nonzero: Vec<&SteadyState> = states.iter().filter(|s| !s.is_trivial()).collect();
    let mut parts = vec![(nonzero.len() == 2, format!("{} nonzero states", nonzero.len()))];
    if nonzero.len() != 2 {
        return verdict(parts);
    }
    let asym = nonzero[0].state.distance(&-&nonzero[1].state).unwrap();
    parts.push((asym <= 1e-8, format!("|u1 + u2| = {asym:.2e}")));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 5);
    let seeds: Vec<SpectralField> = (0..50).map(|_| common::random_unit(&d, 8, &mut rng)).collect();
    let targets = vec![nonzero[0].state.clone(), nonzero[1].state.clone()];
    let bcfg = StepperConfig {
        dt: 1e-3,
        t_end: 200.0,
        scheme: Scheme::Etdrk2,
        sample_every: 100,
        stop_when_steady: true,
    };
    let labels = basin_probe(p, &seeds, &targets, &bcfg, 1e6).unwrap();
    let captured = labels.iter().filter(|l| matches!(l, BasinLabel::State(_))).count();
    parts.push((captured == 50, format!("{captured}/50 seeds reach u1 or u2")));
    let sum = steady::index_sum(&states);
    parts.push((matches!(sum, Ok(2)), format!("index sum {sum:?}")));
    verdict(parts)
}

fn c6_transcritical() -> Verdict {
    let d = dirichlet(64);
    let m1 = ModeIndex::sin(&[1]);
    let law = |l: f64| 3.0 * PI / 8.0 * (9.0 - l);
    let mut parts = Vec::new();
    for (l, morse) in [(8.9, 1usize), (9.1, 0)] {
        let s = branch(&d, Params::gsh(l, 1.0), law(l));
        let a = s.physical_amplitude(&m1);
        let rel = (a - law(l)) / law(l);
        parts.push((s.morse_index == Some(morse), format!("lambda {l}: morse {:?}", s.morse_index)));
        parts.push((rel.abs() <= 0.1, format!("lambda {l}: amplitude {a:.6} vs {:.6} ({:+.1}%)", law(l), 100.0 * rel)));
    }
    // a = c1 delta + c2 delta^2 on lambda - lambda_c in [0.02, 0.1]
    let deltas: Vec<f64> = (1..=5).map(|i| 0.02 * i as f64).collect();
    let amps: Vec<f64> = deltas
        .par_iter()
        .map(|&dl| branch(&d, Params::gsh(9.0 + dl, 1.0), law(9.0 + dl)).physical_amplitude(&m1))
        .collect();
    let (s2, s3, s4) = (
        deltas.iter().map(|x| x * x).sum::<f64>(),
        deltas.iter().map(|x| x.powi(3)).sum::<f64>(),
        deltas.iter().map(|x| x.powi(4)).sum::<f64>(),
    );
    let b1: f64 = deltas.iter().zip(&amps).map(|(x, y)| x * y).sum();
    let b2: f64 = deltas.iter().zip(&amps).map(|(x, y)| x * x * y).sum();
    let det = s2 * s4 - s3 * s3;
    let (c1, c2) = ((b1 * s4 - b2 * s3) / det, (s2 * b2 - s3 * b1) / det);
    let quad = (c2 * 0.1 / c1).abs();
    parts.push((quad < 0.1, format!("quadratic share {:.1}%", 100.0 * quad)));
    verdict(parts)
}

fn c7_census() -> Verdict {
    let start = Instant::now();
    let l = 2.0 * PI;
    // 64 modes per axis of the full exponential lattice: band 31
    let d = Domain::cube(Boundary::OddPeriodic, 2, l, 31).unwrap();
    let lambda = 0.2;
    let cfg = CensusConfig {
        n_seeds: 100,
        seed_scale: 2.0,
        rng_seed: SEED,
        ..Default::default()
    };
    let states = steady::find_all(&d, Params::sh(lambda), &cfg).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let i1 = d.index_of(&ModeIndex::sin(&[1, 0])).unwrap();
    let i2 = d.index_of(&ModeIndex::sin(&[0, 1])).unwrap();
    let lc = common::threshold_scan(Boundary::OddPeriodic, &[l, l]);
    let beta = lambda - lc;
    // reduced field y_i' = beta y_i - c y_i^3 - 3 e y_i y_j^2
    let c = common::oracle_tensor(&d, [i1, i1, i1, i1]);
    let e = common::oracle_tensor(&d, [i1, i1, i2, i2]);
    let pure = (beta / c).sqrt();
    let mixed = (beta / (c + 3.0 * e)).sqrt();
    let predicted_morse = |y: [f64; 2]| {
        let j11 = beta - 3.0 * c * y[0] * y[0] - 3.0 * e * y[1] * y[1];
        let j22 = beta - 3.0 * c * y[1] * y[1] - 3.0 * e * y[0] * y[0];
        let j12 = -6.0 * e * y[0] * y[1];
        let tr = j11 + j22;
        let disc = ((j11 - j22).powi(2) + 4.0 * j12 * j12).sqrt();
        [(tr + disc) / 2.0, (tr - disc) / 2.0].iter().filter(|&&v| v > 0.0).count()
    };
    let nonzero: Vec<&SteadyState> = states.iter().filter(|s| !s.is_trivial()).collect();
    let mut parts = vec![(nonzero.len() == 4, format!("{} nonzero states", nonzero.len()))];
    let mut worst: f64 = 0.0;
    let mut agree = 0;
    for s in &nonzero {
        let y = [s.state.coeffs()[i1].abs(), s.state.coeffs()[i2].abs()];
        let candidates = [[pure, 0.0], [0.0, pure], [mixed, mixed]];
        let best = candidates
            .iter()
            .min_by(|a, b| {
                let da = (a[0] - y[0]).abs().max((a[1] - y[1]).abs());
                let db = (b[0] - y[0]).abs().max((b[1] - y[1]).abs());
                da.total_cmp(&db)
            })
            .unwrap();
        let top = best[0].max(best[1]);
        worst = worst.max((best[0] - y[0]).abs().max((best[1] - y[1]).abs()) / top);
        let signed = [s.state.coeffs()[i1], s.state.coeffs()[i2]];
        let target = [best[0].copysign(signed[0]), best[1].copysign(signed[1])];
        if s.morse_index == Some(predicted_morse(target)) {
            agree += 1;
        }
    }
    let attractors = nonzero.iter().filter(|s| s.morse_index == Some(0)).count();
    let saddles = nonzero.iter().filter(|s| s.morse_index == Some(1)).count();
    parts.push((worst <= 0.05, format!("max amplitude deviation {:.2}%", 100.0 * worst)));
    parts.push((attractors == 2 && saddles == 2, format!("{attractors} attractors, {saddles} saddles")));
    parts.push((agree == nonzero.len(), format!("{agree} match reduced stability (pure attract)")));
    let sum = steady::index_sum(&states);
    parts.push((matches!(sum, Ok(0)), format!("index sum {sum:?}")));
    parts.push((elapsed <= 300.0, format!("{elapsed:.1} s")));
    verdict(parts)
}

fn c8_torus() -> Verdict {
    let d = Domain::line(Boundary::Periodic, 2.0 * PI, 32).unwrap();
    let thetas: Vec<Vec<f64>> = (0..16).map(|j| vec![2.0 * PI * j as f64 / 16.0]).collect();
    let states = match reduced::torus_points(&d, Params::sh(0.2), &thetas) {
        Ok(s) => s,
        Err(e) => return verdict(vec![(false, format!("torus_points: {e}"))]),
    };
    let states: Vec<SteadyState> = states.par_iter().map(|s| steady::stability(s).unwrap()).collect();
    let res = states.iter().map(|s| s.residual).fold(0.0, f64::max);
    let norms: Vec<f64> = states.iter().map(|s| s.norm()).collect();
    let spread = norms.iter().cloned().fold(f64::MIN, f64::max) - norms.iter().cloned().fold(f64::MAX, f64::min);
    let neutral_ok = states.iter().all(|s| {
        let all: Vec<f64> = s.leading_eigs.iter().chain(&s.neutral_eigs).cloned().collect();
        all.iter().filter(|e| e.abs() < 1e-6).count() == 1
    });
    let top = states
        .iter()
        .flat_map(|s| s.leading_eigs.iter().chain(&s.neutral_eigs))
        .filter(|e| e.abs() >= 1e-6)
        .cloned()
        .fold(f64::MIN, f64::max);
    verdict(vec![
        (states.len() == 16 && res < 1e-10, format!("{} states, max residual {res:.2e}", states.len())),
        (spread <= 1e-6, format!("norm spread {spread:.2e}")),
        (neutral_ok, "one neutral eigenvalue each".into()),
        (top <= 1e-6, format!("largest non-neutral eigenvalue {top:.4}")),
    ])
}

fn c9_slaved() -> Verdict {
    let l = PI / 2.0;
    let lambda = 9.2;
    let d = dirichlet(64);
    let s = branch(&d, Params::sh(lambda), (4.0 * 0.2 / 3.0f64).sqrt());
    let x1 = s.coeff(&ModeIndex::sin(&[1]));
    let x3 = s.coeff(&ModeIndex::sin(&[3]));
    let phi = |n: f64, x: f64| (2.0 / l).sqrt() * (n * PI * x / l).sin();
    let tensor = common::integrate(|x| phi(1.0, x).powi(3) * phi(3.0, x), 0.0, l);
    let beta3 = lambda - (1.0 - (3.0 * PI / l).powi(2)).powi(2);
    let predicted = tensor / beta3;
    let measured = x3 / x1.powi(3);
    let rel = (measured - predicted) / predicted;
    verdict(vec![(
        rel.abs() <= 0.02,
        format!("x3/x1^3 = {measured:.6e} vs {predicted:.6e} ({:+.3}%)", 100.0 * rel),
    )])
}

fn c10_shadowing() -> Verdict {
    let l = 2.0 * PI;
    let d = Domain::cube(Boundary::OddPeriodic, 2, l, 15).unwrap();
    let beta = 0.01;
    let p = Params::sh(beta);
    let i1 = d.index_of(&ModeIndex::sin(&[1, 0])).unwrap();
    let i2 = d.index_of(&ModeIndex::sin(&[0, 1])).unwrap();
    let c = common::oracle_tensor(&d, [i1, i1, i1, i1]);
    let e = common::oracle_tensor(&d, [i1, i1, i2, i2]);
    let flow = |y: [f64; 2]| {
        [
            beta * y[0] - c * y[0].powi(3) - 3.0 * e * y[0] * y[1] * y[1],
            beta * y[1] - c * y[1].powi(3) - 3.0 * e * y[1] * y[0] * y[0],
        ]
    };
    let dt = 1e-2;
    let y0 = [0.3, 0.2];
    let mut coeffs = vec![0.0; d.len()];
    coeffs[i1] = y0[0];
    coeffs[i2] = y0[1];
    let mut u = SpectralField::from_coeffs(&d, coeffs).unwrap();
    let stepper = Stepper::new(Model::new(&d, p).unwrap(), dt, Scheme::Etdrk2);
    let mut y = y0;
    let mut worst: f64 = 0.0;
    for n in 1..=5000 {
        u = stepper.step(&u).unwrap();
        let k1 = flow(y);
        let k2 = flow([y[0] + dt / 2.0 * k1[0], y[1] + dt / 2.0 * k1[1]]);
        let k3 = flow([y[0] + dt / 2.0 * k2[0], y[1] + dt / 2.0 * k2[1]]);
        let k4 = flow([y[0] + dt * k3[0], y[1] + dt * k3[1]]);
        for i in 0..2 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if n % 100 == 0 {
            let pde = [u.coeffs()[i1], u.coeffs()[i2]];
            for i in 0..2 {
                worst = worst.max((pde[i] - y[i]).abs() / y[i].abs());
            }
        }
    }
    verdict(vec![(worst <= 0.1, format!("max relative deviation {:.3e} over [0, 50]", worst))])
}

fn c11_infrastructure() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 11);
    let spaces = [
        Domain::line(Boundary::Dirichlet, PI / 2.0, 32).unwrap(),
        Domain::line(Boundary::OddPeriodic, 2.0 * PI, 32).unwrap(),
        Domain::cube(Boundary::OddPeriodic, 2, 2.0 * PI, 10).unwrap(),
        Domain::line(Boundary::Periodic, 2.0 * PI, 32).unwrap(),
        Domain::cube(Boundary::Periodic, 2, 3.0 * PI, 10).unwrap(),
    ];
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let (mut round, mut prod): (f64, f64) = (0.0, 0.0);
    for d in &spaces {
        for _ in 0..100 {
            let u = common::random_unit(d, i32::MAX, &mut rng);
            round = round.max(diff(u.coeffs(), u.to_grid().to_spectral().coeffs()));
        }
        for _ in 0..10 {
            // five random modes with |k| <= 3
            let eligible: Vec<usize> = (0..d.len()).filter(|&i| d.modes()[i].k.iter().all(|k| k.abs() <= 3)).collect();
            let mut c = vec![0.0; d.len()];
            for _ in 0..5 {
                let i = eligible[rand::Rng::random_range(&mut rng, 0..eligible.len())];
                c[i] = rand::Rng::random_range(&mut rng, -1.0..1.0);
            }
            let u = SpectralField::from_coeffs(d, c).unwrap();
            prod = prod.max(diff(u.cube().unwrap().coeffs(), &common::oracle_cube(&u)));
            prod = prod.max(diff(u.square().unwrap().coeffs(), &common::oracle_square(&u)));
        }
    }

    let d = dirichlet(32);
    let p = Params::gsh(9.5, 0.5);
    let u = common::random_unit(&d, 8, &mut rng);
    let v = common::random_unit(&d, 8, &mut rng);
    let f0 = steady::residual(&u, p).unwrap();
    let jv = steady::jacobian_apply(&u, p, &v).unwrap();
    let hs = [0.2, 0.1, 0.05, 0.025];
    let errs: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let fh = steady::residual(&u.axpy(h, &v).unwrap(), p).unwrap();
            (&(&fh - &f0) - &jv.scaled(h)).norm()
        })
        .collect();
    let (fd_slope, _) = common::fit_line(
        &hs.iter().map(|h| h.ln()).collect::<Vec<_>>(),
        &errs.iter().map(|e| e.ln()).collect::<Vec<_>>(),
    );

    // smooth data: the observed order is the classical one
    let u0 = common::random_unit(&d, 2, &mut rng);
    let at = |dt: f64| {
        let cfg = StepperConfig {
            dt,
            t_end: 1.0,
            scheme: Scheme::Etdrk2,
            sample_every: usize::MAX,
            stop_when_steady: false,
        };
        integrate(&u0, p, &cfg).unwrap().final_state().clone()
    };
    let reference = at(1e-5);
    let dts = [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4];
    let terr: Vec<f64> = dts.par_iter().map(|&dt| at(dt).distance(&reference).unwrap()).collect();
    let (order, _) = common::fit_line(
        &dts.iter().map(|h| h.ln()).collect::<Vec<_>>(),
        &terr.iter().map(|e| e.ln()).collect::<Vec<_>>(),
    );

    let seeds: Vec<SpectralField> = (0..100).map(|_| common::random_unit(&d, 8, &mut rng)).collect();
    let lcfg = StepperConfig {
        dt: 1e-3,
        t_end: 1.0,
        scheme: Scheme::Etdrk2,
        sample_every: 1,
        stop_when_steady: false,
    };
    let rise = seeds
        .par_iter()
        .map(|u0| {
            let r = integrate(u0, Params::gsh(9.5, 0.5), &lcfg).unwrap();
            r.lyapunov_values.windows(2).map(|w| w[1] - w[0]).fold(f64::MIN, f64::max)
        })
        .reduce(|| f64::MIN, f64::max);
    let direct = dynamics::lyapunov(&seeds[0], Params::gsh(9.5, 0.5)).unwrap();
    let lyap_oracle = {
        let lin: f64 = d
            .modes()
            .iter()
            .zip(seeds[0].coeffs())
            .map(|(m, c)| {
                let k2 = (m.k[0] as f64 * 2.0).powi(2);
                0.5 * ((1.0 - k2).powi(2) - 9.5) * c * c
            })
            .sum();
        let quartic = {
            let e = common::to_exp(&seeds[0]);
            let e2 = common::mul(&e, &e);
            let u3 = common::project(&d, &common::mul(&e2, &e));
            let u2 = common::project(&d, &e2);
            let q4: f64 = u3.iter().zip(seeds[0].coeffs()).map(|(a, b)| a * b).sum();
            let q3: f64 = u2.iter().zip(seeds[0].coeffs()).map(|(a, b)| a * b).sum();
            q4 / 4.0 - 0.5 * q3 / 3.0
        };
        lin + quartic
    };
    verdict(vec![
        (round <= 1e-12, format!("roundtrip {round:.1e}")),
        (prod <= 1e-12, format!("products vs oracle {prod:.1e}")),
        ((fd_slope - 2.0).abs() <= 0.2, format!("Jacobian FD slope {fd_slope:.3}")),
        ((order - 2.0).abs() <= 0.2, format!("ETDRK2 order {order:.3}")),
        (rise <= 1e-10, format!("largest Lyapunov increase {rise:.2e}")),
        (
            ((direct - lyap_oracle) / lyap_oracle).abs() < 1e-10,
            format!("Lyapunov value {direct:.10} vs {lyap_oracle:.10}"),
        ),
    ])
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("subcritical decay", c1_subcritical),
        ("critical algebraic decay", c2_critical),
        ("supercritical bound", c3_supercritical),
        ("pitchfork amplitude law", c4_pitchfork),
        ("exactly two states and basins", c5_two_states),
        ("transcritical structure", c6_transcritical),
        ("2-d odd-periodic census", c7_census),
        ("periodic torus", c8_torus),
        ("slaved-mode law", c9_slaved),
        ("reduced-model shadowing", c10_shadowing),
        ("infrastructure properties", c11_infrastructure),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let v = f();
        println!(
            "criterion {:>2} {} {name}: {} [{:.1} s]",
            i + 1,
            if v.passed { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        if !v.passed {
            failed.push(i + 1);
        }
    }
    println!(
        "acceptance: {}/{} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
