use liouville_q::elliptic::ell_gamma;
use liouville_q::thermo::*;
use liouville_q::{Context, Error};
use num_complex::Complex64 as C;

const P: f64 = 0.2;
const Q: f64 = 0.2;
const V: f64 = 0.7;

fn opts() -> ThermoOptions {
    ThermoOptions::default()
}

#[test]
fn ground_coefficient_frozen_value() {
    // N (v^-1 - v) pq / ((1-p)(1-q)(1+pq)) at N=1, p=q=0.1, v=0.5, hand-expanded
    let expected = 1.5 * 0.01 / (0.9 * 0.9 * 1.01);
    assert!((expected - 0.018335166850018335f64).abs() < 1e-17);
    assert!((f_ground(1, 1, 0.5, 0.1, 0.1) - 0.018335166850018335).abs() < 1e-17);
}

#[test]
fn ground_chi_solves_the_product_relation() {
    let ctx = Context::double();
    let n = 3;
    // both u and pqu must lie in the annulus pq/v < |u| < v/pq where the
    // exponent series converges
    for u in [C::new(2.0, 0.5), C::new(4.0, -2.0), C::new(-5.0, 1.0), C::new(0.3, 9.0), C::new(12.0, 0.0)] {
        let f = |z: C| ground_exponent(z, n, V, P, Q, 80);
        let lhs = (f(P * Q * u) + f(u)).exp();
        let pc = C::new(P, 0.0);
        let r = (ell_gamma(1.0 / (u * V), pc, pc, &ctx).unwrap() / ell_gamma(V / u, pc, pc, &ctx).unwrap()).powi(n as i32);
        assert!((lhs - r).norm() / r.norm() < 1e-12, "u = {u}: {lhs} vs {r}");
    }
}

#[test]
fn digamma_power_is_the_ground_chi_ratio() {
    let ctx = Context::double();
    let n = 3;
    let f = |z: C| ground_exponent(z, n, V, P, Q, 80);
    for u in [C::new(2.0, 0.5), C::new(4.0, -2.0), C::new(-5.0, 1.0)] {
        let lhs = digamma_f(u, V, P, Q, &ctx).unwrap().powi(n as i32);
        let rhs = V.powi(n as i32) * (f(P * u) + f(Q * u) - f(P * Q * u) - f(u)).exp();
        assert!((lhs / rhs - 1.0).norm() < 1e-12);
    }
}

#[test]
fn digamma_is_below_one_inside_the_regime() {
    let ctx = Context::double();
    let r = (P * Q).powf(-0.5);
    for radius in [0.8 * r, r, 1.2 * r] {
        for j in 0..40 {
            let u = C::from_polar(radius, 2.0 * std::f64::consts::PI * j as f64 / 40.0);
            assert!(digamma_f(u, V, P, Q, &ctx).unwrap().norm() < 1.0);
        }
    }
}

#[test]
fn unit_v_is_rejected() {
    let err = delta_f_solve(4, 1.0, P, Q, &opts(), &Context::double()).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
}

#[test]
fn outside_the_regime_carries_a_warning() {
    // v below √(pq): the driving term is larger but the iteration may still run
    match delta_f_solve(8, 0.15, P, Q, &opts(), &Context::double()) {
        Ok(sol) => assert!(!sol.warnings.is_empty() && !sol.regime.inside()),
        Err(e) => assert!(matches!(e, Error::Domain(_) | Error::Convergence { .. })),
    }
}

#[test]
fn fixed_point_is_exponentially_small_and_consistent() {
    let ctx = Context::double();
    let s4 = delta_f_solve(4, V, P, Q, &opts(), &ctx).unwrap();
    let s8 = delta_f_solve(8, V, P, Q, &opts(), &ctx).unwrap();
    for s in [&s4, &s8] {
        assert!(s.regime.inside() && s.warnings.is_empty());
        assert!(s.digamma_max < 1.0);
        assert!(s.reflection_defect < 1e-12, "reflection {}", s.reflection_defect);
        assert!(s.basis.f1_roundtrip < 1e-15 && s.basis.f2_roundtrip < 1e-15);
        assert!(s.contraction.iter().take(5).all(|&r| r < 1.0));
        for (_, _, rel) in s.liouville_check(7, &ctx).unwrap() {
            assert!(rel < 1e-8, "Liouville relative residual {rel}");
        }
        let (rec, asym) = s.reconstructed_f();
        assert!(asym < 1e-13, "asymmetry {asym}");
        for ((r, g), d) in rec.iter().zip(&s.f_g).zip(&s.delta_f) {
            assert!((r - g).abs() <= d.abs() * (1.0 + 1e-6) + 1e-12);
        }
    }
    let max = |s: &ThermoSolution| s.delta_f.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let ratio = max(&s8) / max(&s4);
    let expected = s4.digamma_max.powi(4);
    assert!(ratio < 1.0 && ratio / expected < 3.0 && expected / ratio < 3.0, "ratio {ratio} vs {expected}");
}

#[test]
fn free_energy_regroups_into_ground_coefficients() {
    for row in regrouping_check(10, V, P, Q).unwrap() {
        assert!(row.deviation < 1e-12, "k = {}: {:?}", row.k, row);
    }
}

#[test]
fn free_energy_is_inversion_symmetric_and_matches_the_ground_exponent() {
    for u in [C::new(1.7, 0.0), C::new(0.9, 0.4), C::new(2.5, -1.0)] {
        let a = free_energy(u, V, P, Q, 1e-16).unwrap();
        let b = free_energy(1.0 / u, V, P, Q, 1e-16).unwrap();
        assert!((a.value - b.value).norm() < 1e-14);
        assert!(a.tail_bound <= 1e-16);
        let via_f = ground_exponent(u, 1, V, P, Q, 80);
        assert!((a.value - via_f).norm() < 1e-14);
    }
    assert!(free_energy(C::new(50.0, 0.0), V, P, Q, 1e-12).is_err());
}
