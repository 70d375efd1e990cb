mod common;

use std::f64::consts::PI;
use std::sync::Arc;

use approx::assert_relative_eq;
use proptest::prelude::*;
use shbif::dynamics::{step, Model};
use shbif::steady;
use shbif::{Boundary, Domain, Params, Scheme, SpectralField};

fn domains() -> Vec<Arc<Domain>> {
    vec![
        Domain::line(Boundary::Dirichlet, PI / 2.0, 12).unwrap(),
        Domain::line(Boundary::OddPeriodic, 2.0 * PI, 12).unwrap(),
        Domain::line(Boundary::Periodic, 5.0, 12).unwrap(),
        Domain::cube(Boundary::OddPeriodic, 2, 2.0 * PI, 6).unwrap(),
        Domain::new(Boundary::Periodic, &[2.0 * PI, 4.0], &[5, 4]).unwrap(),
    ]
}

fn field(d: &Arc<Domain>, raw: &[f64]) -> SpectralField {
    let c = (0..d.len()).map(|i| raw[i % raw.len()] * (1.0 + i as f64).powf(-1.0)).collect();
    SpectralField::from_coeffs(d, c).unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_roundtrip_and_parseval(raw in coeffs(), which in 0usize..5) {
        let d = &domains()[which];
        let u = field(d, &raw);
        let g = u.to_grid();
        let back = g.to_spectral();
        for (a, b) in u.coeffs().iter().zip(back.coeffs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        prop_assert!((g.l2_norm() - u.norm()).abs() < 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn products_match_convolution(raw in prop::collection::vec(-1.0f64..1.0, 1..5), which in 0usize..5) {
        let d = &domains()[which];
        let mut c = vec![0.0; d.len()];
        for (i, v) in raw.iter().enumerate() {
            c[(7 * i + 1) % d.len().min(9)] = *v;
        }
        let u = SpectralField::from_coeffs(d, c).unwrap();
        let cube = u.cube().unwrap();
        for (a, b) in cube.coeffs().iter().zip(common::oracle_cube(&u)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let sq = u.square().unwrap();
        for (a, b) in sq.coeffs().iter().zip(common::oracle_square(&u)) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn odd_flow_commutes_with_sign(raw in coeffs(), lambda in 7.0f64..11.0) {
        let d = &domains()[0];
        let u = field(d, &raw);
        let p = Params::sh(lambda);
        let a = step(&-&u, p, 1e-2, Scheme::Etdrk2).unwrap();
        let b = -&step(&u, p, 1e-2, Scheme::Etdrk2).unwrap();
        prop_assert!(a.distance(&b).unwrap() < 1e-14);
    }

    #[test]
    fn jacobian_is_symmetric(raw in coeffs(), mu in 0.0f64..1.0, which in 0usize..5) {
        let d = &domains()[which];
        let mu = if d.bc() == Boundary::Dirichlet { mu } else { 0.0 };
        let p = Params::gsh(0.3, mu);
        let u = field(d, &raw);
        let v = field(d, &raw.iter().rev().cloned().collect::<Vec<_>>());
        let w = field(d, &raw.iter().map(|x| x * x - 0.3).collect::<Vec<_>>());
        let jv = steady::jacobian_apply(&u, p, &v).unwrap();
        let jw = steady::jacobian_apply(&u, p, &w).unwrap();
        let lhs = w.inner(&jv).unwrap();
        let rhs = v.inner(&jw).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let d = Domain::line(Boundary::Dirichlet, PI / 2.0, 16).unwrap();
    let p = Params::gsh(9.3, 0.7);
    let u = field(&d, &[0.4, -0.2, 0.1]);
    let v = field(&d, &[0.1, 0.3, -0.5, 0.2]);
    let jv = steady::jacobian_apply(&u, p, &v).unwrap();
    let h = 1e-6;
    let plus = steady::residual(&u.axpy(h, &v).unwrap(), p).unwrap();
    let minus = steady::residual(&u.axpy(-h, &v).unwrap(), p).unwrap();
    let fd = (&plus - &minus).scaled(0.5 / h);
    assert!(fd.distance(&jv).unwrap() < 1e-6 * jv.norm());
}

#[test]
fn grid_norm_matches_quadrature_of_profile() {
    let d = Domain::line(Boundary::Dirichlet, PI / 2.0, 16).unwrap();
    let u = field(&d, &[1.0, 0.5]);
    let direct = common::integrate(
        |x| {
            let v: f64 = (0..d.len()).map(|i| u.coeffs()[i] * d.basis_value(i, &[x])).sum();
            v * v
        },
        0.0,
        PI / 2.0,
    );
    assert_relative_eq!(u.norm(), direct.sqrt(), max_relative = 1e-12);
}

#[test]
fn threshold_matches_library() {
    for (bc, lengths) in [
        (Boundary::Dirichlet, vec![PI / 2.0]),
        (Boundary::Dirichlet, vec![7.3]),
        (Boundary::OddPeriodic, vec![2.0 * PI, 2.0 * PI]),
        (Boundary::Periodic, vec![9.0]),
    ] {
        let d = Domain::new(bc, &lengths, &vec![16; lengths.len()]).unwrap();
        let s = shbif::linear::principal(&d).unwrap();
        assert_relative_eq!(s.lambda_c, common::threshold_scan(bc, &lengths), epsilon = 1e-12);
    }
}

#[test]
fn lyapunov_decreases_along_gsh_flow() {
    let d = Domain::line(Boundary::Dirichlet, PI / 2.0, 24).unwrap();
    let model = Model::new(&d, Params::gsh(9.4, 0.8)).unwrap();
    let mut u = field(&d, &[0.9, -0.4, 0.3]);
    let mut e = model.lyapunov(&u);
    for _ in 0..500 {
        u = step(&u, model.params(), 2e-3, Scheme::Etdrk2).unwrap();
        let next = model.lyapunov(&u);
        assert!(next <= e + 1e-10);
        e = next;
    }
}
