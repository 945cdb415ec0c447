use liouville_q::conformance::structural_suite;
use liouville_q::elliptic::{rel_diff, ModularData};
use liouville_q::vertex::*;
use liouville_q::Context;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn md(tau: C, eta: C) -> ModularData {
    ModularData::from_additive(c(0.0, 0.0), c(0.0, 0.0), tau, eta).unwrap()
}

#[test]
fn r_matrix_frozen_entries() {
    // a, b, c, d at x = 0.13, η = 0.07, τ = 0.5i from 40-digit direct summation
    let expected = [0.46343822050200452288, 0.32347524607175018054, 0.18119555439663866288, 0.038123772733483848007];
    let ctx = Context::double();
    // the R-matrix only needs τ and η; a real η is fine here even though the
    // nome p = e^{2πiη} built by the checked constructor would not converge
    let (tau, eta) = (c(0.0, 0.5), c(0.07, 0.0));
    let m = ModularData {
        x: c(0.0, 0.0),
        y: c(0.0, 0.0),
        tau,
        eta,
        u: c(1.0, 0.0),
        v: c(1.0, 0.0),
        q: liouville_q::elliptic::expi2pi(tau),
        p: liouville_q::elliptic::expi2pi(eta),
    };
    let r = r_matrix(c(0.13, 0.0), &m, c(1.0, 0.0), &ctx).unwrap();
    let got = [r.get(0, 0, 0, 0), r.get(0, 1, 0, 1), r.get(0, 1, 1, 0), r.get(0, 0, 1, 1)];
    for (g, e) in got.iter().zip(expected) {
        assert!(rel_diff(*g, c(e, 0.0)) < 1e-14, "{g} vs {e}");
    }
}

#[test]
fn ising_weight_frozen_value() {
    let ctx = Context::double();
    let m = md(c(0.05, 0.45), c(0.03, 0.35));
    let v = ising_weight_v(c(0.11, 0.0), c(0.2, 0.0), c(0.35, 0.0), &m, &ctx).unwrap();
    assert!(rel_diff(v, c(0.98686309541077811599, 0.041817765075740549364)) < 1e-14);
}

#[test]
fn q_kernel_reduces_to_v_factors() {
    let ctx = Context::double();
    let m = md(c(0.05, 0.45), c(0.03, 0.35));
    let (a, b) = (c(0.2, 0.01), c(0.33, -0.02));
    let (x, y) = (c(0.07, 0.0), c(0.12, 0.01));
    let spec = QKernelSpec { a: vec![a], b: vec![b], x, y };
    let direct = ising_weight_v(y - x, a, b, &m, &ctx).unwrap() * ising_weight_v(y + x, b, a, &m, &ctx).unwrap();
    assert!(rel_diff(q_kernel(&spec, &m, &ctx).unwrap(), direct) < 1e-15);
    // at x = −y the second group is V₀ = 1
    let spec = QKernelSpec { a: vec![a, b], b: vec![b, a], x: -y, y };
    let first = ising_weight_v(2.0 * y, a, b, &m, &ctx).unwrap() * ising_weight_v(2.0 * y, b, a, &m, &ctx).unwrap();
    assert!(rel_diff(q_kernel(&spec, &m, &ctx).unwrap(), first) < 1e-14);
}

#[test]
fn transfer_single_site_is_an_l_element() {
    let ctx = Context::double();
    let m = md(c(0.05, 0.45), c(0.03, 0.35));
    let a = c(0.21, 0.01);
    let path = HeightPath::new(vec![a], vec![Sign::Plus]).unwrap();
    let out = path.shifted(m.eta);
    let (x, y) = (c(0.17, 0.02), c(0.09, -0.01));
    let t = transfer_element(&path, &out, x, y, &m, &ctx).unwrap();
    let l = l_element(a, a, Sign::Plus, Sign::Plus, x, y, &m, &ctx).unwrap();
    assert!(rel_diff(t, l) < 1e-14);
}

#[test]
fn structural_suite_passes_on_default_seed() {
    let ctx = Context::double();
    let s = structural_suite(42, 20, 1e-8, &ctx).unwrap();
    assert!(s.passes(), "{:?}", s.failing());
    assert!(s.max_residual() < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn duality_depends_only_on_differences(
        xr in -0.4f64..0.4, xpr in -0.4f64..0.4, s in -0.3f64..0.3, ar in 0.05f64..0.45,
    ) {
        let ctx = Context::double();
        let m = md(c(0.05, 0.45), c(0.03, 0.35));
        let (x, xp, a) = (c(xr, 0.02), c(xpr, -0.01), c(ar, 0.01));
        let one = c(1.0, 0.0);
        let r1 = vertex_sos_duality_residual(x, xp, a, &m, one, one, &ctx).unwrap();
        let r2 = vertex_sos_duality_residual(x + s, xp + s, a, &m, one, one, &ctx).unwrap();
        prop_assert!(r1 < 1e-10 && r2 < 1e-10);
    }

    #[test]
    fn inversion_on_a_grid(ar in 0.05f64..0.45, xr in -0.5f64..0.5) {
        let ctx = Context::double();
        let m = md(c(0.05, 0.45), c(0.03, 0.35));
        prop_assert!(inversion_residual(c(ar, 0.0), c(xr, 0.0), &m, &ctx).unwrap() < 1e-10);
    }

    #[test]
    fn v_inverts_under_negated_argument(xr in -0.3f64..0.3, ar in 0.05f64..0.45, br in 0.05f64..0.45) {
        let ctx = Context::double();
        let m = md(c(0.05, 0.45), c(0.03, 0.35));
        let (x, a, b) = (c(xr, 0.01), c(ar, 0.0), c(br, 0.0));
        let prod = ising_weight_v(x, a, b, &m, &ctx).unwrap() * ising_weight_v(-x, a, b, &m, &ctx).unwrap();
        prop_assert!((prod - 1.0).norm() < 1e-12);
    }
}
