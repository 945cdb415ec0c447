use liouville_q::bethe::*;
use liouville_q::perturbative::resonance_scan;
use liouville_q::Context;
use num_complex::Complex64 as C;

fn params() -> (C, C) {
    (C::new(0.0, 0.6), C::new(0.13, 0.45))
}

#[test]
fn baxter_case_has_a_valid_branch() {
    let ctx = Context::double();
    let (tau, eta) = params();
    let spin = SpinSet { m: 1, n: 0 };
    let rep = bethe_solve(spin, 2, tau, eta, &BetheOptions::default(), &ctx).unwrap();
    assert!(rep.locus_defect < 1e-13);
    for b in &rep.branches {
        assert!(b.residual < 1e-9, "{:?}", b.roots);
        assert!(b.negation_defect < 1e-9);
        eprintln!("{:?} {:?}", b.roots.tau_roots, b.q_check.as_ref().map(|c| (c.fresh_point_residual, c.periodicity)));
    }
    let valid: Vec<_> = rep.valid_branches(1e-8).collect();
    assert_eq!(valid.len(), 1);
    let x = valid[0].roots.tau_roots.iter().map(|z| z.re.min(2.0 - z.re)).fold(0.0, f64::max);
    // the valid pair is ±1/2
    assert!((x - 0.5).abs() < 1e-10);
    let check = valid[0].q_check.as_ref().unwrap();
    assert!(check.periodicity < 1e-12);
    let eq = q_equivalence_baxter(&valid[0].roots, 2, tau, eta, &ctx).unwrap();
    eprintln!("{eq:?}");
    assert_eq!(eq.xi.len(), 1);
    assert!((eq.xi[0] - (1.0 + tau) / 2.0).norm() < 1e-8);
    assert!(eq.gauge_deviation < 1e-8);
    assert!(eq.literal_deviation > 1e-3);
    assert!(eq.s.rem_euclid(2) == 1);
}

#[test]
fn solving_is_reproducible_for_a_seed() {
    let ctx = Context::double();
    let (tau, eta) = params();
    let spin = SpinSet { m: 1, n: 0 };
    let a = serde_json::to_string(&bethe_solve(spin, 2, tau, eta, &BetheOptions::default(), &ctx).unwrap()).unwrap();
    let b = serde_json::to_string(&bethe_solve(spin, 2, tau, eta, &BetheOptions::default(), &ctx).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn empty_spin_set_gives_a_constant_q() {
    let ctx = Context::double();
    let (tau, eta) = params();
    let spin = SpinSet { m: 0, n: 0 };
    let rep = bethe_solve(spin, 2, tau, eta, &BetheOptions::default(), &ctx).unwrap();
    assert_eq!(rep.branches.len(), 1);
    let qf = FactorizedQ { roots: rep.branches[0].roots.clone(), tau, eta };
    assert!((qf.eval(C::new(0.3, 0.1), &ctx).unwrap() - 2.0).norm() < 1e-15);
    // with y = 0 the equation reduces to t = 2θ₁(x)^N, a basis element
    assert!(rep.branches[0].q_check.as_ref().unwrap().fresh_point_residual < 1e-10);
}

#[test]
fn mirrored_sector_uses_swapped_moduli() {
    let ctx = Context::double();
    let (tau, eta) = params();
    let x = [C::new(0.4, 0.05), C::new(-0.4, -0.05)];
    // (m, n) = (0, 1) in the η-sector is the (1, 0) τ-sector with τ ↔ η
    let a = bethe_residual(Sector::Eta, 0, &x, SpinSet { m: 0, n: 1 }, 2, tau, eta, &ctx).unwrap();
    let b = bethe_residual(Sector::Tau, 0, &x, SpinSet { m: 1, n: 0 }, 2, eta, tau, &ctx).unwrap();
    assert!((a - b).norm() < 1e-14);
}

#[test]
fn r_has_no_poles_at_the_spin_set() {
    let ctx = Context::double();
    let (tau, eta) = params();
    for (m, n) in [(1, 0), (0, 1), (1, 1)] {
        let pc = r_pole_cancellation(SpinSet { m, n }, 2, tau, eta, &ctx).unwrap();
        assert!(pc.at_spin_set < 10.0, "({m},{n}) {pc:?}");
        assert!(pc.generic > 100.0, "({m},{n}) {pc:?}");
    }
}

#[test]
fn resonance_detector_agrees_with_the_spin_set() {
    let (tau, eta) = params();
    let (p, q) = (liouville_q::elliptic::expi2pi(eta), liouville_q::elliptic::expi2pi(tau));
    for (m, n) in [(1usize, 0usize), (0, 1), (1, 1)] {
        let v = SpinSet { m, n }.v(tau, eta);
        assert_eq!(resonance_scan(p, q, v, 6, 1e-8), vec![(m as i64, n as i64)]);
    }
}

#[test]
fn oversized_instances_are_rejected() {
    let (tau, eta) = params();
    assert!(bethe_solve(SpinSet { m: 4, n: 0 }, 2, tau, eta, &BetheOptions::default(), &Context::double()).is_err());
}
