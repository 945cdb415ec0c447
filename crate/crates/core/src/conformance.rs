//! Seeded identity suites for the special functions and the vertex/SOS
//! structures. Both the `verify` command and the acceptance harness run these.

use std::f64::consts::PI;

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::{
    ell_gamma, expi2pi, h, log2pi, log_gamma_series, phi, rel_diff, theta1, theta1_from_h, theta4, ModularData,
};
use crate::error::Result;
use crate::precision::Context;
use crate::report::ResidualReport;
use crate::vertex::{
    intertwining_residual, inversion_residual, transfer_transpose_residual, vertex_sos_duality_residual, HeightPath, Sign,
};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: &'static str,
    pub seed: u64,
    pub points: usize,
    pub tolerance: f64,
    pub relations: Vec<ResidualReport>,
}

impl SuiteReport {
    pub fn max_residual(&self) -> f64 {
        self.relations.iter().map(|r| r.max_residual).fold(0.0, f64::max)
    }

    pub fn passes(&self) -> bool {
        self.relations.iter().all(|r| r.passes(self.tolerance))
    }

    /// Names of the relations above tolerance.
    pub fn failing(&self) -> Vec<&str> {
        self.relations.iter().filter(|r| !r.passes(self.tolerance)).map(|r| r.relation.as_str()).collect()
    }
}

fn polar(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64) -> C {
    C::from_polar(rng.random_range(r_lo..r_hi), rng.random_range(-PI..PI))
}

fn rect(rng: &mut ChaCha8Rng, re: f64, im: f64) -> C {
    C::new(rng.random_range(-re..re), rng.random_range(-im..im))
}

/// Theta quasi-periodicity, the Γ difference equation and reflection, p ↔ q
/// symmetry, series/product agreement for log Γ, θ₁ from h, and the Φ-ratio
/// identity Φ(x − η/2)/Φ(x + η/2) = h(q^{1/2}u; q), on `points` random samples
/// with |p|, |q| ≤ `max_nome`.
pub fn elliptic_suite(seed: u64, points: usize, max_nome: f64, tolerance: f64, ctx: &Context) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names = [
        "theta1 period 1",
        "theta1 quasi-period tau",
        "theta4 period 1",
        "gamma difference equation",
        "gamma reflection",
        "gamma p-q symmetry",
        "log gamma series",
        "theta1 from h",
        "phi ratio",
    ];
    let mut reps: Vec<ResidualReport> = names.iter().map(|n| ResidualReport::new(*n, ctx)).collect();
    for _ in 0..points {
        let q = polar(&mut rng, 0.05, max_nome);
        let p = polar(&mut rng, 0.05, max_nome);
        let tau = log2pi(q)?;
        let eta = log2pi(p)?;
        // Re x inside (−1/2, 1/2) so that e^{−iπx} is the principal u^{−1/2}
        let x = rect(&mut rng, 0.45, 0.15);
        // |u| away from 1 and from pq keeps Γ clear of its poles and zeros
        let u = polar(&mut rng, 0.4, 0.85);
        let params = [("x", x), ("u", u), ("p", p), ("q", q)];

        let t1 = theta1(x, tau, ctx)?;
        reps[0].push(&params, rel_diff(theta1(x + 1.0, tau, ctx)?, -t1));
        let quasi = -(C::new(0.0, -PI) * (tau + 2.0 * x)).exp() * t1;
        reps[1].push(&params, rel_diff(theta1(x + tau, tau, ctx)?, quasi));
        reps[2].push(&params, rel_diff(theta4(x + 1.0, tau, ctx)?, theta4(x, tau, ctx)?));

        let g = ell_gamma(u, p, q, ctx)?;
        reps[3].push(&params, rel_diff(ell_gamma(p * u, p, q, ctx)? / g, h(u, q, ctx)?));
        reps[4].push(&params, (g * ell_gamma(p * q / u, p, q, ctx)? - 1.0).norm());
        reps[5].push(&params, (g - ell_gamma(u, q, p, ctx)?).norm());
        reps[6].push(&params, rel_diff(log_gamma_series(u, p, q, ctx)?.exp(), g));

        reps[7].push(&params, rel_diff(theta1_from_h(expi2pi(x), q, ctx)?, t1));
        let md = ModularData::from_additive(x, C::new(0.0, 0.0), tau, eta)?;
        let ratio = phi(x - 0.5 * eta, &md, ctx)? / phi(x + 0.5 * eta, &md, ctx)?;
        let half_q = (C::new(0.0, PI) * tau).exp();
        reps[8].push(&params, rel_diff(ratio, h(half_q * expi2pi(x), q, ctx)?));
    }
    Ok(SuiteReport { suite: "elliptic", seed, points, tolerance, relations: reps })
}

fn random_md(rng: &mut ChaCha8Rng) -> Result<ModularData> {
    let tau = C::new(rng.random_range(-0.1..0.1), rng.random_range(0.35..0.6));
    let eta = C::new(rng.random_range(-0.1..0.1), rng.random_range(0.25..0.45));
    ModularData::from_additive(C::new(0.0, 0.0), C::new(0.0, 0.0), tau, eta)
}

fn random_sign(rng: &mut ChaCha8Rng) -> Sign {
    if rng.random_bool(0.5) {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Baxter-vector inversion, vertex–SOS duality under the frozen convention,
/// the intertwining relation for all four sign pairs, and T'(x) = T(−x)ᵗ for
/// N = 1, 2, 3, each on `points` random generic samples.
pub fn structural_suite(seed: u64, points: usize, tolerance: f64, ctx: &Context) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inversion = ResidualReport::new("inversion", ctx);
    let mut duality = ResidualReport::new("vertex-SOS duality", ctx);
    let mut intertwining = ResidualReport::new("intertwining", ctx);
    let mut transpose: Vec<ResidualReport> =
        (1..=3).map(|n| ResidualReport::new(format!("transfer transpose N={n}"), ctx)).collect();
    let one = C::new(1.0, 0.0);
    for _ in 0..points {
        let md = random_md(&mut rng)?;
        let base = [("tau", md.tau), ("eta", md.eta)];

        let (a, x) = (C::new(rng.random_range(0.05..0.45), rng.random_range(-0.05..0.05)), rect(&mut rng, 0.5, 0.1));
        inversion.push(&[base[0], base[1], ("a", a), ("x", x)], inversion_residual(a, x, &md, ctx)?);

        let (x, xp) = (rect(&mut rng, 0.5, 0.1), rect(&mut rng, 0.5, 0.1));
        let a = C::new(rng.random_range(0.05..0.45), rng.random_range(-0.05..0.05));
        duality.push(
            &[base[0], base[1], ("x", x), ("x'", xp), ("a", a)],
            vertex_sos_duality_residual(x, xp, a, &md, one, one, ctx)?,
        );

        let xs: Vec<C> = (0..3).map(|_| rect(&mut rng, 0.5, 0.1)).collect();
        let (x1, x2) = (rect(&mut rng, 0.4, 0.08), rect(&mut rng, 0.4, 0.08));
        let a = C::new(rng.random_range(0.05..0.45), rng.random_range(-0.05..0.05));
        let bp = C::new(rng.random_range(0.05..0.45), rng.random_range(-0.05..0.05));
        let mut worst = 0.0f64;
        for e in Sign::BOTH {
            for ep in Sign::BOTH {
                worst = worst.max(intertwining_residual(&xs, x1, x2, a, bp, e, ep, &md, ctx)?);
            }
        }
        intertwining.push(&[base[0], base[1], ("x1", x1), ("x2", x2), ("a", a), ("b'", bp)], worst);

        for (i, rep) in transpose.iter_mut().enumerate() {
            let n = i + 1;
            let heights: Vec<C> =
                (0..n).map(|_| C::new(rng.random_range(0.05..0.45), rng.random_range(-0.05..0.05))).collect();
            let signs: Vec<Sign> = (0..n).map(|_| random_sign(&mut rng)).collect();
            let path = HeightPath::new(heights, signs)?;
            let (x, y) = (rect(&mut rng, 0.5, 0.1), rect(&mut rng, 0.5, 0.1));
            rep.push(&[base[0], base[1], ("x", x), ("y", y)], transfer_transpose_residual(&path, x, y, &md, ctx)?);
        }
    }
    let mut relations = vec![inversion, duality, intertwining];
    relations.extend(transpose);
    Ok(SuiteReport { suite: "structural", seed, points, tolerance, relations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_tolerance_always_fails() {
        let ctx = Context::double();
        let s = elliptic_suite(1, 3, 0.3, 0.0, &ctx).unwrap();
        assert!(!s.passes());
    }
}
