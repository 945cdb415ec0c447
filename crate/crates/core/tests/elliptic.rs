use std::f64::consts::{LN_10, PI};

use liouville_q::elliptic::*;
use liouville_q::{Context, Error};
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Values from independent 40-digit direct summation / brute-force products.
mod oracle {
    pub const THETA1_03_05I: f64 = 1.0744053196400079172;
    pub const THETA4_02_06I: f64 = 0.90530041090815897949;
    pub const QPOCH2_02_01_015: f64 = 0.75181842126927817344;
    pub const PHI_03: (f64, f64) = (0.93578726389406292257, -0.3525651666481863884);
    pub const GAMMA_04_015_02: f64 = 1.8060275974410037736;
}

fn ctx() -> Context {
    Context::double()
}

#[test]
fn frozen_values() {
    let ctx = ctx();
    let t1 = theta1(c(0.3, 0.0), c(0.0, 0.5), &ctx).unwrap();
    assert!(rel_diff(t1, c(oracle::THETA1_03_05I, 0.0)) < 1e-15);
    let t4 = theta4(c(0.2, 0.0), c(0.0, 0.6), &ctx).unwrap();
    assert!(rel_diff(t4, c(oracle::THETA4_02_06I, 0.0)) < 1e-15);
    let qp = qpoch2(c(0.2, 0.0), c(0.1, 0.0), c(0.15, 0.0), &ctx).unwrap();
    assert!(rel_diff(qp, c(oracle::QPOCH2_02_01_015, 0.0)) < 1e-15);
    let g = ell_gamma(c(0.4, 0.0), c(0.15, 0.0), c(0.2, 0.0), &ctx).unwrap();
    assert!(rel_diff(g, c(oracle::GAMMA_04_015_02, 0.0)) < 1e-14);
    // p = 0.1, q = 0.2 exactly on the imaginary axis
    let tau = c(0.0, 5f64.ln() / (2.0 * PI));
    let eta = c(0.0, LN_10 / (2.0 * PI));
    let md = ModularData::from_additive(c(0.3, 0.0), c(0.0, 0.0), tau, eta).unwrap();
    let f = phi(c(0.3, 0.0), &md, &ctx).unwrap();
    assert!(rel_diff(f, c(oracle::PHI_03.0, oracle::PHI_03.1)) < 1e-14);
}

#[test]
fn collapsed_products() {
    let ctx = ctx();
    let z = c(0.0, 0.0);
    assert!((h(c(0.3, 0.0), z, &ctx).unwrap() - 0.7).norm() < 1e-16);
    assert_eq!(qpoch1(z, c(0.4, 0.1), &ctx).unwrap(), c(1.0, 0.0));
    assert!((qpoch2(c(0.3, 0.2), z, z, &ctx).unwrap() - c(0.7, -0.2)).norm() < 1e-16);
}

#[test]
fn single_step_shift_of_h() {
    let ctx = ctx();
    let (u, q) = (c(0.4, 0.0), c(0.2, 0.0));
    let lhs = h(q * u, q, &ctx).unwrap();
    assert!(rel_diff(lhs, -h(u, q, &ctx).unwrap() / u) < 1e-14);
}

#[test]
fn theta_parity_and_zero() {
    let ctx = ctx();
    let tau = c(0.0, 0.5);
    assert!(theta1(c(0.0, 0.0), tau, &ctx).unwrap().norm() < 1e-16);
    let x = c(0.17, 0.03);
    assert!(rel_diff(theta4(-x, tau, &ctx).unwrap(), theta4(x, tau, &ctx).unwrap()) < 1e-15);
    assert!(rel_diff(theta1(x + 1.0, c(0.0, 0.4), &ctx).unwrap(), -theta1(x, c(0.0, 0.4), &ctx).unwrap()) < 1e-14);
}

#[test]
fn gamma_special_points() {
    let ctx = ctx();
    let (p, q) = (c(0.1, 0.0), c(0.2, 0.0));
    assert!((ell_gamma((p * q).sqrt(), p, q, &ctx).unwrap() - 1.0).norm() < 1e-15);
    let u = c(0.5, 0.0);
    let (p, q) = (c(0.15, 0.0), c(0.2, 0.0));
    let ratio = ell_gamma(p * u, p, q, &ctx).unwrap() / ell_gamma(u, p, q, &ctx).unwrap();
    assert!(rel_diff(ratio, h(u, q, &ctx).unwrap()) < 1e-14);
    let series = log_gamma_series(c(0.4, 0.0), p, q, &ctx).unwrap();
    assert!(rel_diff(series.exp(), ell_gamma(c(0.4, 0.0), p, q, &ctx).unwrap()) < 1e-14);
}

#[test]
fn gamma_pole_carries_lattice_index() {
    let ctx = ctx();
    let (p, q) = (c(0.1, 0.0), c(0.3, 0.0));
    let err = ell_gamma(1.0 / (p * q * q), p, q, &ctx).unwrap_err();
    assert_eq!(err, Error::Pole { function: "elliptic gamma", m: 1, n: 2 });
}

#[test]
fn phi_at_zero_and_branch_consistent_theta() {
    let ctx = ctx();
    let md = ModularData::from_additive(c(0.0, 0.0), c(0.0, 0.0), c(0.02, 0.41), c(0.05, 0.37)).unwrap();
    assert!((phi(c(0.0, 0.0), &md, &ctx).unwrap() - 1.0).norm() < 1e-15);
    let (x, tau) = (c(0.21, 0.0), c(0.0, 0.45));
    let rec = theta1_from_h(expi2pi(x), expi2pi(tau), &ctx).unwrap();
    assert!(rel_diff(rec, theta1(x, tau, &ctx).unwrap()) < 1e-14);
}

#[test]
fn invalid_modulus_is_a_domain_error() {
    let ctx = ctx();
    assert!(matches!(theta1(c(0.1, 0.0), c(0.3, -0.1), &ctx), Err(Error::Domain(_))));
    assert!(matches!(h(c(0.0, 0.0), c(0.2, 0.0), &ctx), Err(Error::Domain(_))));
}

#[test]
fn high_precision_agrees_with_double() {
    let hi = Context::with_bits(160).unwrap();
    let lo = ctx();
    let (x, tau) = (c(0.3, 0.0), c(0.0, 0.5));
    assert!(rel_diff(theta1(x, tau, &hi).unwrap(), theta1(x, tau, &lo).unwrap()) < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_difference_and_reflection(
        ur in 0.35f64..0.85, ua in -3.0f64..3.0,
        pr in 0.02f64..0.3, pa in -3.0f64..3.0,
        qr in 0.02f64..0.3, qa in -3.0f64..3.0,
    ) {
        let ctx = ctx();
        let (u, p, q) = (C::from_polar(ur, ua), C::from_polar(pr, pa), C::from_polar(qr, qa));
        let g = ell_gamma(u, p, q, &ctx).unwrap();
        prop_assert!(rel_diff(ell_gamma(p * u, p, q, &ctx).unwrap() / g, h(u, q, &ctx).unwrap()) < 1e-12);
        prop_assert!((g * ell_gamma(p * q / u, p, q, &ctx).unwrap() - 1.0).norm() < 1e-12);
        prop_assert_eq!(g, ell_gamma(u, q, p, &ctx).unwrap());
    }

    #[test]
    fn theta1_quasi_periods(xr in -0.5f64..0.5, xi in -0.2f64..0.2, tr in -0.5f64..0.5, ti in 0.2f64..1.0) {
        let ctx = ctx();
        let (x, tau) = (c(xr, xi), c(tr, ti));
        let t = theta1(x, tau, &ctx).unwrap();
        let shifted = theta1(x + tau, tau, &ctx).unwrap();
        let factor = -(c(0.0, -PI) * (tau + 2.0 * x)).exp();
        prop_assert!(rel_diff(shifted, factor * t) < 1e-12);
    }

    #[test]
    fn multiplicative_roundtrip(xr in -0.49f64..0.49, xi in -0.3f64..0.3) {
        let x = c(xr, xi);
        let back = log2pi(expi2pi(x)).unwrap();
        prop_assert!((back - x).norm() < 1e-13);
    }
}
