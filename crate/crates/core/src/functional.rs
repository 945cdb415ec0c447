//! The TQ pair, the discrete Liouville equation in its plain and pole-stripped
//! forms, the right-hand sides R(u) and S(u), and transfer-eigenvalue
//! symmetry/decomposition helpers.
//!
//! Multiplicative variables follow [`ModularData`]: the shifts are by p and q,
//! the spin parameter is v, and the lattice has N sites.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{ell_gamma, expi2pi, h, qpoch2, rel_diff, theta1, ModularData};
use crate::error::{Error, Result};
use crate::laurent::SymmetricLaurent;
use crate::linalg::lstsq;
use crate::precision::Context;
use crate::series::Series;

type C = Complex64;

const I: C = C::new(0.0, 1.0);

/// How H(u) is stored inside a pole-stripped 𝛘.
#[derive(Debug, Clone)]
pub enum HRep {
    Laurent(SymmetricLaurent),
    /// A (p, q, u) series evaluated at the numeric nomes.
    Series(Series),
}

impl HRep {
    pub fn eval(&self, u: C, md: &ModularData) -> C {
        match self {
            HRep::Laurent(l) => l.eval(u),
            HRep::Series(s) => s.eval(md.p, md.q, u),
        }
    }
}

type Evaluator = Arc<dyn Fn(C) -> Result<C> + Send + Sync>;

/// A Q-eigenvalue 𝛘(u).
#[derive(Clone)]
pub enum ChiFunction {
    /// 𝛘(u) = H(u) / (pq/(uv), pq·u/v; p,q)^N.
    Stripped { h: HRep, md: ModularData, n: usize },
    /// Any evaluator, e.g. one built from a product formula.
    Grid(Evaluator),
}

impl std::fmt::Debug for ChiFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChiFunction::Stripped { h, n, .. } => f.debug_struct("Stripped").field("h", h).field("n", n).finish(),
            ChiFunction::Grid(_) => f.write_str("Grid(..)"),
        }
    }
}

impl ChiFunction {
    pub fn from_fn(f: impl Fn(C) -> Result<C> + Send + Sync + 'static) -> Self {
        ChiFunction::Grid(Arc::new(f))
    }

    pub fn eval(&self, u: C, ctx: &Context) -> Result<C> {
        match self {
            ChiFunction::Stripped { h, md, n } => {
                let d = pole_prefactor(u, md, *n, ctx)?;
                if d.norm() == 0.0 {
                    return Err(Error::Pole {
                        function: "chi",
                        m: 0,
                        n: 0,
                    });
                }
                Ok(h.eval(u, md) / d)
            }
            ChiFunction::Grid(f) => f(u),
        }
    }
}

/// (pq/(uv), pq·u/v; p,q)^N, the denominator carrying the poles of 𝛘.
pub fn pole_prefactor(u: C, md: &ModularData, n: usize, ctx: &Context) -> Result<C> {
    let (p, q, v) = (md.p, md.q, md.v);
    let a = qpoch2(p * q / (u * v), p, q, ctx)?;
    let b = qpoch2(p * q * u / v, p, q, ctx)?;
    Ok((a * b).powi(n as i32))
}

/// Extracts H from a pole-stripped 𝛘 as a symmetric Laurent polynomial. A series
/// representation is collapsed at the numeric nomes; modes above `k_max` are
/// dropped and flagged.
pub fn strip_poles(chi: &ChiFunction, k_max: usize) -> Result<SymmetricLaurent> {
    match chi {
        ChiFunction::Stripped { h: HRep::Laurent(l), .. } => Ok(l.clone()),
        ChiFunction::Stripped { h: HRep::Series(s), md, .. } => {
            let mut out = SymmetricLaurent::zero(k_max);
            for (&(a, b, k), c) in s.iter() {
                if k < 0 {
                    continue;
                }
                let val = c * md.p.powi(a) * md.q.powi(b);
                match out.coeffs.get_mut(k as usize) {
                    Some(slot) => *slot += val,
                    None => out.truncated |= val.norm() > 0.0,
                }
            }
            Ok(out)
        }
        ChiFunction::Grid(_) => Err(Error::Domain("a grid evaluator carries no stripped form".into())),
    }
}

/// t_q(u)𝛘(u) − h_q(uv)^N 𝛘(pu) − v^N h_q(u/v)^N 𝛘(u/p).
pub fn tq_residual_q(
    chi: &ChiFunction,
    t: &dyn Fn(C) -> Result<C>,
    u: C,
    md: &ModularData,
    n: usize,
    ctx: &Context,
) -> Result<C> {
    let (p, q, v) = (md.p, md.q, md.v);
    let ni = n as i32;
    Ok(t(u)? * chi.eval(u, ctx)?
        - h(u * v, q, ctx)?.powi(ni) * chi.eval(p * u, ctx)?
        - v.powi(ni) * h(u / v, q, ctx)?.powi(ni) * chi.eval(u / p, ctx)?)
}

/// The p ↔ q mirror of [`tq_residual_q`].
pub fn tq_residual_p(
    chi: &ChiFunction,
    t: &dyn Fn(C) -> Result<C>,
    u: C,
    md: &ModularData,
    n: usize,
    ctx: &Context,
) -> Result<C> {
    tq_residual_q(chi, t, u, &md.swapped(), n, ctx)
}

/// R(u) = R₀ (Γ(1/(uv)) / Γ(v/u))^N.
pub fn liouville_r(u: C, md: &ModularData, n: usize, r0: C, ctx: &Context) -> Result<C> {
    let (p, q, v) = (md.p, md.q, md.v);
    let num = ell_gamma(1.0 / (u * v), p, q, ctx)?;
    let den = ell_gamma(v / u, p, q, ctx)?;
    Ok(r0 * (num / den).powi(n as i32))
}

/// Relative residual of R(pqu)R(u) − v^{2N} R(pu)R(qu).
pub fn laplace_residual(u: C, md: &ModularData, n: usize, ctx: &Context) -> Result<f64> {
    let (p, q, v) = (md.p, md.q, md.v);
    let one = C::new(1.0, 0.0);
    let r = |z: C| liouville_r(z, md, n, one, ctx);
    let lhs = r(p * q * u)? * r(u)?;
    let rhs = v.powi(2 * n as i32) * r(p * u)? * r(q * u)?;
    Ok(rel_diff(lhs, rhs))
}

/// 𝛘(pqu)𝛘(u) − v^N 𝛘(pu)𝛘(qu) − R(u).
pub fn liouville_residual(chi: &ChiFunction, u: C, md: &ModularData, n: usize, r0: C, ctx: &Context) -> Result<C> {
    let (p, q, v) = (md.p, md.q, md.v);
    Ok(chi.eval(p * q * u, ctx)? * chi.eval(u, ctx)?
        - v.powi(n as i32) * chi.eval(p * u, ctx)? * chi.eval(q * u, ctx)?
        - liouville_r(u, md, n, r0, ctx)?)
}

/// S(u) = R₀ (v/u, p²q²u/v, pq·uv, pq/(uv); p,q)^N.
pub fn s_function(u: C, md: &ModularData, n: usize, r0: C, ctx: &Context) -> Result<C> {
    let (p, q, v) = (md.p, md.q, md.v);
    let pq = p * q;
    let prod = qpoch2(v / u, p, q, ctx)?
        * qpoch2(pq * pq * u / v, p, q, ctx)?
        * qpoch2(pq * u * v, p, q, ctx)?
        * qpoch2(pq / (u * v), p, q, ctx)?;
    Ok(r0 * prod.powi(n as i32))
}

/// H(pqu)H(u) − v^N(1 − 1/(uv))^N(1 − pq·u/v)^N H(pu)H(qu) − S(u).
pub fn liouville_h_residual(
    hf: &dyn Fn(C) -> C,
    u: C,
    md: &ModularData,
    n: usize,
    r0: C,
    ctx: &Context,
) -> Result<C> {
    let (p, q, v) = (md.p, md.q, md.v);
    let ni = n as i32;
    let one = C::new(1.0, 0.0);
    let pref = v.powi(ni) * (one - 1.0 / (u * v)).powi(ni) * (one - p * q * u / v).powi(ni);
    Ok(hf(p * q * u) * hf(u) - pref * hf(p * u) * hf(q * u) - s_function(u, md, n, r0, ctx)?)
}

/// Relative mismatch between the plain Liouville residual of 𝛘 = H/D^N, scaled
/// by (D(pqu)D(u))^N, and the stripped residual of H.
pub fn form_equivalence_residual(
    hf: &dyn Fn(C) -> C,
    u: C,
    md: &ModularData,
    n: usize,
    r0: C,
    ctx: &Context,
) -> Result<f64> {
    let md_c = *md;
    let ctx_c = *ctx;
    let hh = {
        // evaluate H up front at the four shifted points; the closure below only looks them up
        let (p, q) = (md.p, md.q);
        [(u, hf(u)), (p * u, hf(p * u)), (q * u, hf(q * u)), (p * q * u, hf(p * q * u))]
    };
    let chi = ChiFunction::from_fn(move |z| {
        let hv = hh
            .iter()
            .find(|(w, _)| (w - z).norm() <= 1e-15 * z.norm())
            .map(|(_, val)| *val)
            .ok_or_else(|| Error::Domain("point outside the precomputed stencil".into()))?;
        Ok(hv / pole_prefactor(z, &md_c, n, &ctx_c)?)
    });
    let plain = liouville_residual(&chi, u, md, n, r0, ctx)?;
    let scale = pole_prefactor(md.p * md.q * u, md, n, ctx)? * pole_prefactor(u, md, n, ctx)?;
    let stripped = liouville_h_residual(hf, u, md, n, r0, ctx)?;
    let size = s_function(u, md, n, r0, ctx)?.norm().max(stripped.norm()).max(1e-300);
    Ok((plain * scale - stripped).norm() / size)
}

/// t_q(u) = Σ_k t_{q,k} h_q(ω^k u)^N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferPolynomial {
    pub n: usize,
    pub coeffs: Vec<C>,
}

fn omega(n: usize) -> C {
    expi2pi(C::new(1.0 / n as f64, 0.0))
}

impl TransferPolynomial {
    pub fn eval(&self, u: C, q: C, ctx: &Context) -> Result<C> {
        let w = omega(self.n);
        let mut acc = C::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            acc += c * h(w.powi(k as i32) * u, q, ctx)?.powi(self.n as i32);
        }
        Ok(acc)
    }

    /// max_k |t_{N−k} − t_k|.
    pub fn symmetry_deviation(&self) -> f64 {
        (1..self.n)
            .map(|k| (self.coeffs[self.n - k] - self.coeffs[k]).norm())
            .fold(0.0, f64::max)
    }

    pub fn independent_count(&self) -> usize {
        self.n / 2 + 1
    }
}

/// Residuals of t(qu) − (−u)^{−N} t(u) and t(1/u) − (−u)^{−N} t(u).
pub fn t_symmetry_check(t: &dyn Fn(C) -> Result<C>, u: C, q: C, n: usize) -> Result<(C, C)> {
    let tu = t(u)?;
    let factor = (-u).powi(-(n as i32));
    Ok((t(q * u)? - factor * tu, t(1.0 / u)? - factor * tu))
}

/// Sample points r·ω^j·e^{iφ} with r = |q|^{1/4}, inside the annulus |q|^{1/2} < |u| < 1.
/// The small rotation φ keeps the points off the real axis.
pub fn default_sample_points(q: C, n: usize) -> Vec<C> {
    let r = q.norm().powf(0.25);
    let tilt = expi2pi(C::new(0.5 / (n as f64 * 7.0), 0.0));
    (0..n).map(|j| r * tilt * omega(n).powi(j as i32)).collect()
}

/// Basis coefficients from samples (u_j, t(u_j)). The symmetry t_{N−k} = t_k
/// is enforced by averaging; the deviation before averaging is returned.
pub fn t_decompose(samples: &[(C, C)], q: C, n: usize, ctx: &Context) -> Result<(TransferPolynomial, f64)> {
    if samples.len() < n {
        return Err(Error::Config(format!("need at least {n} samples, got {}", samples.len())));
    }
    let w = omega(n);
    let mut a = DMatrix::<C>::zeros(samples.len(), n);
    for (j, (u, _)) in samples.iter().enumerate() {
        for k in 0..n {
            a[(j, k)] = h(w.powi(k as i32) * u, q, ctx)?.powi(n as i32);
        }
    }
    let rhs = DVector::<C>::from_iterator(samples.len(), samples.iter().map(|(_, t)| *t));
    let ls = lstsq(&a, &rhs, 1e-12)?;
    if ls.rank < n || !(ls.sigma_min > 1e-12 * ls.sigma_max) {
        return Err(Error::IllConditioned(format!(
            "transfer basis matrix has condition number {:e}",
            ls.sigma_max / ls.sigma_min
        )));
    }
    let sol = ls.x;
    let raw = TransferPolynomial {
        n,
        coeffs: sol.iter().copied().collect(),
    };
    let deviation = raw.symmetry_deviation();
    let coeffs = (0..n)
        .map(|k| (raw.coeffs[k] + raw.coeffs[(n - k) % n]) * 0.5)
        .collect();
    Ok((TransferPolynomial { n, coeffs }, deviation))
}

/// θ₁(z|τ) = i q^{1/8} e^{−iπz} (q;q) h_q(e^{2πiz}): the factor multiplying
/// h_q when the additive Baxter equation is rewritten multiplicatively.
pub fn theta_to_h_factor(z: C, tau: C, ctx: &Context) -> Result<C> {
    let q = expi2pi(tau);
    let qq = crate::elliptic::qpoch1(q, q, ctx)?;
    Ok(I * (I * std::f64::consts::PI * tau / 4.0).exp() * (-I * std::f64::consts::PI * z).exp() * qq)
}

/// Compares the right-hand side of the additive Baxter equation
/// θ₁(x+y)^N 𝒬(x+η) + θ₁(x−y)^N 𝒬(x−η) with the multiplicative one
/// h_q(uv)^N 𝛘(pu) + v^N h_q(u/v)^N 𝛘(u/p) multiplied by
/// (i q^{1/8} (uv)^{−1/2} (q;q))^N, for 𝒬(x) = 𝛘(e^{2πix}).
/// Returns the relative difference; both transfer normalisations then agree.
pub fn additive_tq_consistency(chi_additive: &dyn Fn(C) -> Result<C>, md: &ModularData, n: usize, ctx: &Context) -> Result<f64> {
    let ni = n as i32;
    let (x, y, eta, tau) = (md.x, md.y, md.eta, md.tau);
    let additive = theta1(x + y, tau, ctx)?.powi(ni) * chi_additive(x + eta)?
        + theta1(x - y, tau, ctx)?.powi(ni) * chi_additive(x - eta)?;
    let (u, v, q) = (md.u, md.v, md.q);
    let multiplicative = h(u * v, q, ctx)?.powi(ni) * chi_additive(x + eta)?
        + v.powi(ni) * h(u / v, q, ctx)?.powi(ni) * chi_additive(x - eta)?;
    let factor = theta_to_h_factor(x + y, tau, ctx)?.powi(ni);
    Ok(rel_diff(additive, factor * multiplicative))
}
