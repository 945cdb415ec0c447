//! Jacobi theta functions, q-Pochhammer products, the elliptic Gamma function
//! and its companion Φ, each with certified truncation.
//!
//! Every evaluator exists in a generic form (`*_in`) over [`Scalar`] and as a
//! `Complex64` entry point that dispatches on the [`PrecisionContext`]: at 53
//! bits it runs natively, above that it runs on MPFR and rounds once.
//!
//! Fractional powers (q^{1/8}, u^{±1/2}, √(pq)) come from the additive
//! coordinates when those are available (q^{1/8} = e^{iπτ/4}); functions that
//! only see multiplicative inputs use the principal logarithm.
//!
//! [`PrecisionContext`]: crate::precision::PrecisionContext

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::Context;
use crate::scalar::{MpComplex, Scalar};

const I: Complex64 = Complex64::new(0.0, 1.0);
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Evaluates `$body` once with the named `Complex64` bindings as they are, or,
/// for a high-precision context, with the bindings lifted to [`MpComplex`] and
/// the result rounded back.
macro_rules! at_precision {
    ($ctx:expr, [$($arg:ident),*], $body:expr) => {{
        let ctx: &Context = $ctx;
        if ctx.precision.is_double() {
            $body
        } else {
            let bits = ctx.precision.bits;
            $(let $arg = MpComplex::new(bits, $arg);)*
            ($body).map(|z| z.to_c64())
        }
    }};
}

/// The additive parameters (x, y, τ, η) together with their exponential images
/// u = e^{2πix}, v = e^{2πiy}, q = e^{2πiτ}, p = e^{2πiη}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularData {
    pub x: Complex64,
    pub y: Complex64,
    pub tau: Complex64,
    pub eta: Complex64,
    pub u: Complex64,
    pub v: Complex64,
    pub q: Complex64,
    pub p: Complex64,
}

pub fn expi2pi(z: Complex64) -> Complex64 {
    (I * TWO_PI * z).exp()
}

/// Principal inverse of [`expi2pi`].
pub fn log2pi(w: Complex64) -> Result<Complex64> {
    if w.norm() == 0.0 {
        return Err(Error::Domain("logarithm of zero".into()));
    }
    Ok(w.ln() / (I * TWO_PI))
}

impl ModularData {
    pub fn from_additive(x: Complex64, y: Complex64, tau: Complex64, eta: Complex64) -> Result<Self> {
        if tau.im <= 0.0 {
            return Err(Error::Domain(format!("Im tau = {} must be positive", tau.im)));
        }
        if eta.im <= 0.0 {
            return Err(Error::Domain(format!("Im eta = {} must be positive", eta.im)));
        }
        Ok(ModularData {
            x,
            y,
            tau,
            eta,
            u: expi2pi(x),
            v: expi2pi(y),
            q: expi2pi(tau),
            p: expi2pi(eta),
        })
    }

    /// Recovers the additive coordinates with the principal logarithm.
    pub fn from_multiplicative(u: Complex64, v: Complex64, q: Complex64, p: Complex64) -> Result<Self> {
        if !(q.norm() < 1.0 && q.norm() > 0.0) {
            return Err(Error::Domain(format!("|q| = {} must lie in (0, 1)", q.norm())));
        }
        if !(p.norm() < 1.0 && p.norm() > 0.0) {
            return Err(Error::Domain(format!("|p| = {} must lie in (0, 1)", p.norm())));
        }
        let mut md = ModularData::from_additive(log2pi(u)?, log2pi(v)?, log2pi(q)?, log2pi(p)?)?;
        // keep the caller's exact multiplicative values
        md.u = u;
        md.v = v;
        md.q = q;
        md.p = p;
        Ok(md)
    }

    pub fn with_x(&self, x: Complex64) -> Self {
        ModularData {
            x,
            u: expi2pi(x),
            ..*self
        }
    }

    pub fn with_y(&self, y: Complex64) -> Self {
        ModularData {
            y,
            v: expi2pi(y),
            ..*self
        }
    }

    /// √(pq) on the additive branch, e^{iπ(τ+η)}.
    pub fn sqrt_pq(&self) -> Complex64 {
        (I * std::f64::consts::PI * (self.tau + self.eta)).exp()
    }

    /// The same data with τ and η (and hence q and p) exchanged.
    pub fn swapped(&self) -> Self {
        ModularData {
            tau: self.eta,
            eta: self.tau,
            q: self.p,
            p: self.q,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaKind {
    One,
    Two,
    Three,
    Four,
}

/// Jacobi theta function by direct summation of its Fourier series.
pub fn theta_in<S: Scalar>(kind: ThetaKind, x: &S, tau: &S, ctx: &Context) -> Result<S> {
    let tau_c = tau.to_c64();
    if tau_c.im <= 0.0 {
        return Err(Error::Domain(format!("Im tau = {} must be positive", tau_c.im)));
    }
    let im_tau = tau_c.im;
    let im_x = x.to_c64().im.abs();
    let (offset, alternating) = match kind {
        ThetaKind::One => (0.5, true),
        ThetaKind::Two => (0.5, false),
        ThetaKind::Three => (0.0, false),
        ThetaKind::Four => (0.0, true),
    };
    let pi = x.pi();
    let i_pi_tau = pi.clone() * x.i() * tau.clone();
    let two_pi_i_x = pi * x.lift(Complex64::new(0.0, 2.0)) * x.clone();
    let term = |n: i64| -> S {
        let c = x.real(n as f64 + offset);
        let e = (i_pi_tau.clone() * c.clone() * c.clone() + two_pi_i_x.clone() * c).exp();
        if alternating && n.rem_euclid(2) == 1 {
            -e
        } else {
            e
        }
    };
    let tol = ctx.tail_tol();
    let log_bound = |c: f64| -std::f64::consts::PI * im_tau * c * c + TWO_PI * c * im_x;
    let mut sum = term(0);
    if offset != 0.0 {
        sum = sum + term(-1);
    }
    let mut k: i64 = 1;
    loop {
        if k as usize > ctx.truncation.max_terms {
            return Err(Error::Truncation {
                what: "theta series",
                terms: ctx.truncation.max_terms,
            });
        }
        let c = k as f64 + offset;
        // ratio of consecutive term bounds beyond |c|; the tail is geometric once it is < 1
        let ratio = (log_bound(c + 1.0) - log_bound(c)).exp();
        if ratio < 0.5 && 4.0 * log_bound(c).exp() < tol {
            break;
        }
        sum = sum + term(k);
        let mirror = if offset != 0.0 { -k - 1 } else { -k };
        sum = sum + term(mirror);
        k += 1;
    }
    if kind == ThetaKind::One {
        Ok(-x.i() * sum)
    } else {
        Ok(sum)
    }
}

pub fn theta1(x: Complex64, tau: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [x, tau], theta_in(ThetaKind::One, &x, &tau, ctx))
}

pub fn theta2(x: Complex64, tau: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [x, tau], theta_in(ThetaKind::Two, &x, &tau, ctx))
}

pub fn theta3(x: Complex64, tau: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [x, tau], theta_in(ThetaKind::Three, &x, &tau, ctx))
}

pub fn theta4(x: Complex64, tau: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [x, tau], theta_in(ThetaKind::Four, &x, &tau, ctx))
}

pub fn theta(kind: ThetaKind, x: Complex64, tau: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [x, tau], theta_in(kind, &x, &tau, ctx))
}

/// (u; q)_∞.
pub fn qpoch1_in<S: Scalar>(u: &S, q: &S, ctx: &Context) -> Result<S> {
    let qa = q.abs_f64();
    if qa >= 1.0 {
        return Err(Error::Domain(format!("|q| = {qa} must be below 1")));
    }
    let tol = ctx.tail_tol();
    let mut prod = u.one();
    let mut z = u.clone();
    for _ in 0..ctx.truncation.max_terms {
        let za = z.abs_f64();
        if za == 0.0 || (za < 0.5 && 2.0 * za / (1.0 - qa) < tol) {
            return Ok(prod);
        }
        prod = prod * (u.one() - z.clone());
        z = z * q.clone();
    }
    Err(Error::Truncation {
        what: "single q-Pochhammer product",
        terms: ctx.truncation.max_terms,
    })
}

pub fn qpoch1(u: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, q], qpoch1_in(&u, &q, ctx))
}

/// Outcome of a double product: its value and the first factor found to vanish.
struct DoubleProduct<S> {
    value: S,
    zero_factor: Option<(i64, i64)>,
}

fn zero_factor_tol(ctx: &Context) -> f64 {
    if ctx.precision.is_double() {
        1e-13
    } else {
        2f64.powi(-(ctx.precision.bits as i32) + 16)
    }
}

/// Π_{a,b ≥ 0} (1 − u p^a q^b), multiplied in an order that is invariant
/// under p ↔ q so that swapping the nomes gives a bit-identical result.
fn qpoch2_scan<S: Scalar>(u: &S, p: &S, q: &S, ctx: &Context) -> Result<DoubleProduct<S>> {
    let (pa, qa) = (p.abs_f64(), q.abs_f64());
    if pa >= 1.0 || qa >= 1.0 {
        return Err(Error::Domain(format!("|p| = {pa}, |q| = {qa} must be below 1")));
    }
    let r = pa.max(qa);
    let ua = u.abs_f64();
    let tol = ctx.tail_tol();
    let ztol = zero_factor_tol(ctx);
    let mut p_pows = vec![u.one()];
    let mut q_pows = vec![u.one()];
    let mut value = u.one();
    let mut zero_factor = None;
    let one = u.one();
    for t in 0usize.. {
        if t > ctx.truncation.max_terms {
            return Err(Error::Truncation {
                what: "double q-Pochhammer product",
                terms: ctx.truncation.max_terms,
            });
        }
        let lead = ua * r.powi(t as i32);
        if r == 0.0 && t > 0 || ua == 0.0 {
            break;
        }
        let tail = 2.0 * lead * (t as f64 + 1.0) / ((1.0 - r) * (1.0 - r));
        if lead < 0.5 && tail < tol {
            break;
        }
        if t > 0 {
            p_pows.push(p_pows[t - 1].clone() * p.clone());
            q_pows.push(q_pows[t - 1].clone() * q.clone());
        }
        let factor = |a: usize, b: usize| -> S {
            let mono = p_pows[a].clone() * q_pows[b].clone();
            one.clone() - u.clone() * mono
        };
        for a in 0..=t / 2 {
            let b = t - a;
            let f_ab = factor(a, b);
            let pair = if a == b {
                f_ab
            } else {
                let f_ba = factor(b, a);
                if zero_factor.is_none() && f_ba.abs_f64() < ztol {
                    zero_factor = Some((b as i64, a as i64));
                }
                f_ab * f_ba
            };
            if zero_factor.is_none() && factor(a, b).abs_f64() < ztol {
                zero_factor = Some((a as i64, b as i64));
            }
            value = value * pair;
        }
    }
    Ok(DoubleProduct { value, zero_factor })
}

/// (u; p, q)_∞.
pub fn qpoch2_in<S: Scalar>(u: &S, p: &S, q: &S, ctx: &Context) -> Result<S> {
    qpoch2_scan(u, p, q, ctx).map(|d| d.value)
}

pub fn qpoch2(u: Complex64, p: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, p, q], qpoch2_in(&u, &p, &q, ctx))
}

/// h(u; q) = (u; q)_∞ (q/u; q)_∞.
pub fn h_in<S: Scalar>(u: &S, q: &S, ctx: &Context) -> Result<S> {
    if u.abs_f64() == 0.0 {
        return Err(Error::Domain("h(u; q) needs u != 0".into()));
    }
    Ok(qpoch1_in(u, q, ctx)? * qpoch1_in(&(q.clone() / u.clone()), q, ctx)?)
}

pub fn h(u: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, q], h_in(&u, &q, ctx))
}

/// Γ(u; p, q) = (pq/u; p, q)_∞ / (u; p, q)_∞.
pub fn ell_gamma_in<S: Scalar>(u: &S, p: &S, q: &S, ctx: &Context) -> Result<S> {
    if u.abs_f64() == 0.0 {
        return Err(Error::Domain("elliptic gamma needs u != 0".into()));
    }
    let den = qpoch2_scan(u, p, q, ctx)?;
    if let Some((m, n)) = den.zero_factor {
        return Err(Error::Pole {
            function: "elliptic gamma",
            m,
            n,
        });
    }
    let num = qpoch2_in(&(p.clone() * q.clone() / u.clone()), p, q, ctx)?;
    Ok(num / den.value)
}

pub fn ell_gamma(u: Complex64, p: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, p, q], ell_gamma_in(&u, &p, &q, ctx))
}

/// Φ(x) = (√(pq) u; p, q)_∞ / (√(pq)/u; p, q)_∞ with √(pq) = e^{iπ(τ+η)}.
pub fn phi_in<S: Scalar>(x: &S, tau: &S, eta: &S, ctx: &Context) -> Result<S> {
    let pi_i = x.pi() * x.i();
    let two = x.real(2.0);
    let u = (two.clone() * pi_i.clone() * x.clone()).exp();
    let q = (two.clone() * pi_i.clone() * tau.clone()).exp();
    let p = (two * pi_i.clone() * eta.clone()).exp();
    let s = (pi_i * (tau.clone() + eta.clone())).exp();
    let den = qpoch2_scan(&(s.clone() / u.clone()), &p, &q, ctx)?;
    if let Some((m, n)) = den.zero_factor {
        return Err(Error::Pole {
            function: "phi",
            m,
            n,
        });
    }
    let num = qpoch2_in(&(s * u), &p, &q, ctx)?;
    Ok(num / den.value)
}

pub fn phi(x: Complex64, md: &ModularData, ctx: &Context) -> Result<Complex64> {
    let (tau, eta) = (md.tau, md.eta);
    at_precision!(ctx, [x, tau, eta], phi_in(&x, &tau, &eta, ctx))
}

/// log Γ(u) from its Fourier series, valid for |pq| < |u| < 1.
pub fn log_gamma_series_in<S: Scalar>(u: &S, p: &S, q: &S, ctx: &Context) -> Result<S> {
    let (ua, pqa) = (u.abs_f64(), p.abs_f64() * q.abs_f64());
    if !(pqa < ua && ua < 1.0) {
        return Err(Error::Domain(format!(
            "log-gamma series needs |pq| < |u| < 1, got |pq| = {pqa}, |u| = {ua}"
        )));
    }
    let tol = ctx.tail_tol();
    let w = p.clone() * q.clone() / u.clone();
    let r = ua.max(pqa / ua);
    let m = 1.0 / ((1.0 - p.abs_f64()) * (1.0 - q.abs_f64()));
    let one = u.one();
    let (mut uk, mut wk, mut pk, mut qk) = (u.clone(), w.clone(), p.clone(), q.clone());
    let mut sum = u.real(0.0);
    for k in 1..=ctx.truncation.max_terms {
        let den = u.real(k as f64) * (one.clone() - qk.clone()) * (one.clone() - pk.clone());
        sum = sum + (uk.clone() - wk.clone()) / den;
        let next = r.powi(k as i32 + 1);
        if 2.0 * m * next / (1.0 - r) < tol {
            return Ok(sum);
        }
        uk = uk * u.clone();
        wk = wk * w.clone();
        pk = pk * p.clone();
        qk = qk * q.clone();
    }
    Err(Error::Truncation {
        what: "log-gamma series",
        terms: ctx.truncation.max_terms,
    })
}

pub fn log_gamma_series(u: Complex64, p: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, p, q], log_gamma_series_in(&u, &p, &q, ctx))
}

/// θ₁ rebuilt from h as i q^{1/8} u^{−1/2} h(u; q)(q; q)_∞, principal branches.
pub fn theta1_from_h_in<S: Scalar>(u: &S, q: &S, ctx: &Context) -> Result<S> {
    let q18 = (q.ln() * q.real(0.125)).exp();
    let u_half_inv = (-(u.ln() * u.real(0.5))).exp();
    Ok(u.i() * q18 * u_half_inv * h_in(u, q, ctx)? * qpoch1_in(q, q, ctx)?)
}

pub fn theta1_from_h(u: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, q], theta1_from_h_in(&u, &q, ctx))
}

/// θ₄ rebuilt from h as h(q^{1/2} u; q)(q; q)_∞, principal branch of q^{1/2}.
pub fn theta4_from_h(u: Complex64, q: Complex64, ctx: &Context) -> Result<Complex64> {
    at_precision!(ctx, [u, q], {
        let half = (q.ln() * q.real(0.5)).exp();
        Ok::<_, Error>(h_in(&(half * u.clone()), &q, ctx)? * qpoch1_in(&q, &q, ctx)?)
    })
}

/// Relative discrepancy |a − b| / max(|a|, |b|), or the absolute one when both vanish.
pub fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else if scale < 1e-300 {
        (a - b).norm()
    } else {
        (a - b).norm() / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn theta1_is_odd_and_vanishes_at_zero() {
        let ctx = Context::double();
        assert_eq!(theta1(c(0.0, 0.0), c(0.0, 0.5), &ctx).unwrap().norm(), 0.0);
        let x = c(0.17, 0.03);
        let t = c(0.1, 0.4);
        let a = theta1(x, t, &ctx).unwrap();
        let b = theta1(-x, t, &ctx).unwrap();
        assert!((a + b).norm() < 1e-15);
    }

    #[test]
    fn theta1_quasi_periods() {
        let ctx = Context::double();
        let (x, tau) = (c(0.17, 0.03), c(0.0, 0.4));
        let t = theta1(x, tau, &ctx).unwrap();
        assert!(rel_diff(theta1(x + 1.0, tau, &ctx).unwrap(), -t) < 1e-14);
        let factor = -(-I * std::f64::consts::PI * tau - I * TWO_PI * x).exp();
        assert!(rel_diff(theta1(x + tau, tau, &ctx).unwrap(), factor * t) < 1e-13);
    }

    #[test]
    fn theta_half_period_relations() {
        let ctx = Context::double();
        let (x, tau) = (c(0.31, -0.05), c(0.2, 0.7));
        assert!(rel_diff(theta2(x, tau, &ctx).unwrap(), theta1(x + 0.5, tau, &ctx).unwrap()) < 1e-14);
        assert!(rel_diff(theta3(x, tau, &ctx).unwrap(), theta4(x + 0.5, tau, &ctx).unwrap()) < 1e-14);
    }

    #[test]
    fn theta_rejects_lower_half_plane() {
        let ctx = Context::double();
        assert!(matches!(theta1(c(0.1, 0.0), c(0.0, -0.2), &ctx), Err(Error::Domain(_))));
    }

    #[test]
    fn h_at_zero_nome_and_shift() {
        let ctx = Context::double();
        assert!((h(c(0.3, 0.0), c(0.0, 0.0), &ctx).unwrap() - c(0.7, 0.0)).norm() < 1e-16);
        let (u, q) = (c(0.4, 0.0), c(0.2, 0.0));
        let lhs = h(q * u, q, &ctx).unwrap();
        let rhs = -h(u, q, &ctx).unwrap() / u;
        assert!(rel_diff(lhs, rhs) < 1e-14);
        assert!(matches!(h(c(0.0, 0.0), q, &ctx), Err(Error::Domain(_))));
    }

    #[test]
    fn single_and_double_products_trivial_cases() {
        let ctx = Context::double();
        assert_eq!(qpoch1(c(0.0, 0.0), c(0.3, 0.0), &ctx).unwrap(), c(1.0, 0.0));
        let z = qpoch2(c(0.2, 0.1), c(0.0, 0.0), c(0.0, 0.0), &ctx).unwrap();
        assert!((z - c(0.8, -0.1)).norm() < 1e-16);
    }

    #[test]
    fn gamma_reflection_fixed_point_and_pole() {
        let ctx = Context::double();
        let (p, q) = (c(0.1, 0.0), c(0.2, 0.0));
        let s = (p * q).sqrt();
        assert!((ell_gamma(s, p, q, &ctx).unwrap() - 1.0).norm() < 1e-15);
        // u = p^{-1} q^{-2} sits on a pole
        let u = 1.0 / (p * q * q);
        match ell_gamma(u, p, q, &ctx) {
            Err(Error::Pole { m, n, .. }) => assert_eq!((m, n), (1, 2)),
            other => panic!("expected pole, got {other:?}"),
        }
    }

    #[test]
    fn gamma_is_symmetric_in_nomes_bitwise() {
        let ctx = Context::double();
        let (u, p, q) = (c(0.43, 0.12), c(0.13, 0.05), c(-0.21, 0.08));
        assert_eq!(ell_gamma(u, p, q, &ctx).unwrap(), ell_gamma(u, q, p, &ctx).unwrap());
    }

    #[test]
    fn phi_at_origin_is_one() {
        let ctx = Context::double();
        let md = ModularData::from_additive(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.37), c(0.05, 0.29)).unwrap();
        assert!((phi(c(0.0, 0.0), &md, &ctx).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn modular_round_trip() {
        let md = ModularData::from_additive(c(0.21, 0.02), c(-0.1, 0.05), c(0.1, 0.5), c(0.03, 0.4)).unwrap();
        let back = ModularData::from_multiplicative(md.u, md.v, md.q, md.p).unwrap();
        assert!((back.x - md.x).norm() < 1e-15);
        assert!((back.tau - md.tau).norm() < 1e-15);
    }

    #[test]
    fn high_precision_theta_agrees_with_double() {
        let hp = Context::with_bits(160).unwrap();
        let d = Context::double();
        let (x, tau) = (c(0.3, 0.0), c(0.0, 0.5));
        assert!(rel_diff(theta1(x, tau, &hp).unwrap(), theta1(x, tau, &d).unwrap()) < 1e-15);
    }
}
