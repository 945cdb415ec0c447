//! Eight-vertex R-matrix, Baxter vectors, SOS weights, SOS L-operators and
//! transfer-matrix elements, the Ising-type weight V and the Q-kernel, with
//! residual checks for the relations between them.
//!
//! Vector conventions: X^{(ε)}_a is the Baxter vector whose upper height is
//! a + εη/2, with components (θ₁(x − 2εa|2τ), θ₄(x − 2εa|2τ)). X̄ is its dual
//! row, normalised so that X̄^{(ε)}_a(x)·X^{(ε')}_a(x) = δ_{εε'} θ₂(x|τ).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{phi, rel_diff, theta1, theta2, theta4, ModularData};
use crate::error::{Error, Result};
use crate::precision::Context;
use crate::report::ResidualReport;

type C = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn f(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_f(x: f64) -> Sign {
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Nearest lattice point m + nτ to z.
fn lattice_index(z: C, tau: C) -> (i64, i64) {
    let n = (z.im / tau.im).round();
    let m = (z - tau * n).re.round();
    (m as i64, n as i64)
}

/// θ₁(z|τ) for use as a denominator; a zero becomes a pole error at the lattice point.
fn theta1_denominator(z: C, tau: C, function: &'static str, ctx: &Context) -> Result<C> {
    let t = theta1(z, tau, ctx)?;
    let (m, n) = lattice_index(z, tau);
    let near = (z - C::new(m as f64, 0.0) - tau * n as f64).norm();
    if t.norm() < 1e-13 || near < 1e-13 {
        return Err(Error::Pole { function, m, n });
    }
    Ok(t)
}

fn heights_equal(a: C, b: C) -> bool {
    (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
}

/// R^{j₁j₂}_{i₁i₂}, stored as `entries[i1][i2][j1][j2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RMatrix {
    pub entries: [[[[C; 2]; 2]; 2]; 2],
    pub rho: C,
}

impl RMatrix {
    pub fn get(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> C {
        self.entries[i1][i2][j1][j2]
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries
            .iter()
            .flatten()
            .flatten()
            .flatten()
            .filter(|z| z.norm() != 0.0)
            .count()
    }
}

/// The eight-vertex R-matrix at spectral argument `x`, built from θ₁, θ₄ at modulus 2τ.
pub fn r_matrix(x: C, md: &ModularData, rho: C, ctx: &Context) -> Result<RMatrix> {
    let (eta, t2) = (md.eta, md.tau * 2.0);
    let th1 = |z: C| theta1(z, t2, ctx);
    let th4 = |z: C| theta4(z, t2, ctx);
    let a = rho * th1(x + eta)? * th4(x)? * th4(eta)?;
    let b = rho * th4(x + eta)? * th1(x)? * th4(eta)?;
    let c = rho * th4(x + eta)? * th4(x)? * th1(eta)?;
    let d = rho * th1(x + eta)? * th1(x)? * th1(eta)?;
    let mut e = [[[[C::new(0.0, 0.0); 2]; 2]; 2]; 2];
    e[0][0][0][0] = a;
    e[1][1][1][1] = a;
    e[0][1][0][1] = b;
    e[1][0][1][0] = b;
    e[0][1][1][0] = c;
    e[1][0][0][1] = c;
    e[0][0][1][1] = d;
    e[1][1][0][0] = d;
    Ok(RMatrix { entries: e, rho })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaxterKind {
    X,
    XBar,
    Y,
    YBar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BaxterVector {
    pub kind: BaxterKind,
    pub eps: Sign,
    pub a: C,
    pub x: C,
    pub value: [C; 2],
}

impl BaxterVector {
    /// Row-times-column contraction.
    pub fn dot(&self, other: &BaxterVector) -> C {
        self.value[0] * other.value[0] + self.value[1] * other.value[1]
    }
}

fn x_components(a: C, x: C, eps: Sign, md: &ModularData, ctx: &Context) -> Result<[C; 2]> {
    let z = x - a * (2.0 * eps.f());
    let t2 = md.tau * 2.0;
    Ok([theta1(z, t2, ctx)?, theta4(z, t2, ctx)?])
}

fn xbar_components(a: C, x: C, eps: Sign, md: &ModularData, ctx: &Context) -> Result<[C; 2]> {
    let s = -eps.f();
    let den = theta1_denominator(a * 2.0, md.tau, "baxter vector", ctx)?;
    let z = x - a * (2.0 * s);
    let t2 = md.tau * 2.0;
    Ok([
        theta4(z, t2, ctx)? * s / den,
        -theta1(z, t2, ctx)? * s / den,
    ])
}

pub fn baxter_x(a: C, x: C, eps: Sign, md: &ModularData, ctx: &Context) -> Result<BaxterVector> {
    Ok(BaxterVector {
        kind: BaxterKind::X,
        eps,
        a,
        x,
        value: x_components(a, x, eps, md, ctx)?,
    })
}

pub fn baxter_xbar(a: C, x: C, eps: Sign, md: &ModularData, ctx: &Context) -> Result<BaxterVector> {
    Ok(BaxterVector {
        kind: BaxterKind::XBar,
        eps,
        a,
        x,
        value: xbar_components(a, x, eps, md, ctx)?,
    })
}

/// Y_a(x) = [[0,1],[−1,0]]·X_a(−x).
pub fn baxter_y(a: C, x: C, eps: Sign, md: &ModularData, ctx: &Context) -> Result<BaxterVector> {
    let v = x_components(a, -x, eps, md, ctx)?;
    Ok(BaxterVector {
        kind: BaxterKind::Y,
        eps,
        a,
        x,
        value: [v[1], -v[0]],
    })
}

/// Ȳ_a(x) = X̄_a(−x)·[[0,−1],[1,0]].
pub fn baxter_ybar(a: C, x: C, eps: Sign, md: &ModularData, ctx: &Context) -> Result<BaxterVector> {
    let v = xbar_components(a, -x, eps, md, ctx)?;
    Ok(BaxterVector {
        kind: BaxterKind::YBar,
        eps,
        a,
        x,
        value: [v[1], -v[0]],
    })
}

/// Which of the six allowed height configurations a face is in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FaceType {
    /// left = right, top and bottom on opposite sides of them
    A,
    /// left = bottom − η/2, right = bottom + η/2
    B1,
    /// left = bottom + η/2, right = bottom − η/2
    B2,
    /// left = right = bottom + η/2
    C1,
    /// left = right = bottom − η/2
    C2,
}

pub fn classify_face(left: C, top: C, right: C, bottom: C, eta: C) -> Option<FaceType> {
    let h = eta * 0.5;
    if heights_equal(left, right) {
        for s in [1.0, -1.0] {
            if heights_equal(left, bottom + h * s) && heights_equal(top, bottom + eta * s) {
                return Some(FaceType::A);
            }
        }
    }
    if !heights_equal(top, bottom) {
        return None;
    }
    let a = bottom;
    match (heights_equal(left, a - h), heights_equal(left, a + h), heights_equal(right, a - h), heights_equal(right, a + h)) {
        (true, _, _, true) => Some(FaceType::B1),
        (_, true, true, _) => Some(FaceType::B2),
        (_, true, _, true) => Some(FaceType::C1),
        (true, _, true, _) => Some(FaceType::C2),
        _ => None,
    }
}

/// Face weight with an explicit sign for the C1 face; `c1_sign = 1` gives
/// θ₁(η)θ₁(z − 2a)/θ₁(2a).
fn sos_weight_signed(
    left: C,
    top: C,
    right: C,
    bottom: C,
    z: C,
    md: &ModularData,
    rho_prime: C,
    c1_sign: f64,
    ctx: &Context,
) -> Result<C> {
    let Some(face) = classify_face(left, top, right, bottom, md.eta) else {
        return Ok(C::new(0.0, 0.0));
    };
    let (eta, tau, a) = (md.eta, md.tau, bottom);
    let th = |w: C| theta1(w, tau, ctx);
    let w = match face {
        FaceType::A => th(z + eta)?,
        other => {
            let den = theta1_denominator(a * 2.0, tau, "SOS weight", ctx)?;
            match other {
                FaceType::B1 => th(z)? * th(a * 2.0 + eta)? / den,
                FaceType::B2 => th(z)? * th(a * 2.0 - eta)? / den,
                FaceType::C1 => th(eta)? * th(z - a * 2.0)? * c1_sign / den,
                FaceType::C2 => th(eta)? * th(z + a * 2.0)? / den,
                FaceType::A => unreachable!(),
            }
        }
    };
    Ok(rho_prime * w)
}

/// SOS face weight with spectral arguments x (upper-left line) and x' (lower-left line).
/// Disallowed height patterns give exactly zero.
#[allow(clippy::too_many_arguments)]
pub fn sos_weight(
    left: C,
    top: C,
    right: C,
    bottom: C,
    x: C,
    x_prime: C,
    md: &ModularData,
    rho_prime: C,
    ctx: &Context,
) -> Result<C> {
    sos_weight_signed(
        left,
        top,
        right,
        bottom,
        x - x_prime,
        md,
        rho_prime,
        DUALITY_CONVENTION.c1_sign,
        ctx,
    )
}

/// One orientation choice for the vertex–SOS duality relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DualityConvention {
    /// R is evaluated at `r_arg_sign·(x − x')`.
    pub r_arg_sign: f64,
    /// If set, the free vertex indices are attached as (x', x) instead of (x, x').
    pub swap_free_indices: bool,
    /// Baxter vectors are evaluated at `x_arg_sign·x`, `x_arg_sign·x'`.
    pub x_arg_sign: f64,
    /// SOS weights are evaluated at `w_arg_sign·(x − x')`.
    pub w_arg_sign: f64,
    /// Sign of the C1 face weight relative to θ₁(η)θ₁(z − 2a)/θ₁(2a).
    pub c1_sign: f64,
}

/// The convention under which the duality holds (see [`convention_search`]);
/// its [`reflected`](DualityConvention::reflected) image is the only other one.
pub const DUALITY_CONVENTION: DualityConvention = DualityConvention {
    r_arg_sign: 1.0,
    swap_free_indices: false,
    x_arg_sign: 1.0,
    w_arg_sign: 1.0,
    c1_sign: -1.0,
};

impl DualityConvention {
    /// The same convention with every spectral argument negated, which maps
    /// solutions of the duality to solutions.
    pub fn reflected(&self) -> DualityConvention {
        DualityConvention {
            r_arg_sign: -self.r_arg_sign,
            x_arg_sign: -self.x_arg_sign,
            w_arg_sign: -self.w_arg_sign,
            ..*self
        }
    }

    pub fn all() -> Vec<DualityConvention> {
        let mut out = Vec::with_capacity(32);
        for r_arg_sign in [1.0, -1.0] {
            for swap_free_indices in [false, true] {
                for x_arg_sign in [1.0, -1.0] {
                    for w_arg_sign in [1.0, -1.0] {
                        for c1_sign in [1.0, -1.0] {
                            out.push(DualityConvention {
                                r_arg_sign,
                                swap_free_indices,
                                x_arg_sign,
                                w_arg_sign,
                                c1_sign,
                            });
                        }
                    }
                }
            }
        }
        out
    }
}

/// Both sides of the duality for every (ε₁, ε₂) and free index pair, at one point.
/// Returns (vertex side, SOS side without the constant) pairs.
fn duality_sides(
    conv: &DualityConvention,
    x: C,
    xp: C,
    a: C,
    md: &ModularData,
    ctx: &Context,
) -> Result<Vec<(C, C)>> {
    let rm = r_matrix((x - xp) * conv.r_arg_sign, md, C::new(1.0, 0.0), ctx)?;
    let (sx, sxp) = (x * conv.x_arg_sign, xp * conv.x_arg_sign);
    let h = md.eta * 0.5;
    let mut out = Vec::with_capacity(16);
    for e1 in Sign::BOTH {
        for e2 in Sign::BOTH {
            let b = a + h * e1.f();
            let c = b + h * e2.f();
            let vx = x_components(a, sx, e1, md, ctx)?;
            let vxp = x_components(b, sxp, e2, md, ctx)?;
            // the two intermediate heights d = a ± η/2 that are adjacent to c
            let mut terms = Vec::new();
            for s in Sign::BOTH {
                let d = a + h * s.f();
                for ed in Sign::BOTH {
                    if heights_equal(d + h * ed.f(), c) {
                        let w = sos_weight_signed(
                            d,
                            c,
                            b,
                            a,
                            (x - xp) * conv.w_arg_sign,
                            md,
                            C::new(1.0, 0.0),
                            conv.c1_sign,
                            ctx,
                        )?;
                        let xd = x_components(d, sx, ed, md, ctx)?;
                        let xa = x_components(a, sxp, s, md, ctx)?;
                        terms.push((w, xd, xa));
                    }
                }
            }
            for fx in 0..2 {
                for fxp in 0..2 {
                    let mut lhs = C::new(0.0, 0.0);
                    for k1 in 0..2 {
                        for k2 in 0..2 {
                            let r = if conv.swap_free_indices {
                                rm.get(k1, k2, fxp, fx)
                            } else {
                                rm.get(k1, k2, fx, fxp)
                            };
                            lhs += r * vx[k1] * vxp[k2];
                        }
                    }
                    let rhs: C = terms.iter().map(|(w, xd, xa)| w * xd[fx] * xa[fxp]).sum();
                    out.push((lhs, rhs));
                }
            }
        }
    }
    Ok(out)
}

/// Relative spread of the ratio vertex side / SOS side; zero means the
/// convention holds up to a constant.
fn ratio_spread(sides: &[(C, C)]) -> (f64, C) {
    let ratios: Vec<C> = sides
        .iter()
        .filter(|(l, r)| l.norm() > 1e-14 || r.norm() > 1e-14)
        .map(|(l, r)| if r.norm() == 0.0 { C::new(f64::INFINITY, 0.0) } else { l / r })
        .collect();
    let Some(&first) = ratios.first() else {
        return (f64::INFINITY, C::new(0.0, 0.0));
    };
    let spread = ratios
        .iter()
        .map(|r| rel_diff(*r, first))
        .fold(0.0, |acc: f64, d| if d.is_nan() { f64::INFINITY } else { acc.max(d) });
    (spread, first)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionTrial {
    pub convention: DualityConvention,
    /// Worst spread of the vertex/SOS ratio over the trial points.
    pub spread: f64,
    /// The ratio found at the first point.
    pub ratio: C,
}

/// Tries all 32 orientation conventions for the duality at the given points
/// `(x, x', a)` and reports, for each, how far the two sides are from being
/// proportional.
pub fn convention_search(points: &[(C, C, C)], md: &ModularData, ctx: &Context) -> Result<Vec<ConventionTrial>> {
    let mut out = Vec::new();
    for conv in DualityConvention::all() {
        let mut worst = 0.0f64;
        let mut ratio = C::new(0.0, 0.0);
        for (i, &(x, xp, a)) in points.iter().enumerate() {
            let (spread, r) = ratio_spread(&duality_sides(&conv, x, xp, a, md, ctx)?);
            worst = worst.max(spread);
            if i == 0 {
                ratio = r;
            }
        }
        out.push(ConventionTrial {
            convention: conv,
            spread: worst,
            ratio,
        });
    }
    Ok(out)
}

/// Constant relating the two sides of the duality when ϱ = ϱ' = 1: ½θ₂(0|τ)θ₄(0|2τ).
pub fn duality_constant(md: &ModularData, ctx: &Context) -> Result<C> {
    let zero = C::new(0.0, 0.0);
    Ok(theta2(zero, md.tau, ctx)? * theta4(zero, md.tau * 2.0, ctx)? * 0.5)
}

/// Worst relative mismatch, over (ε₁, ε₂) and free indices, between
/// ϱ Σ R·X·X and κ ϱ' Σ_d W·X·X under the frozen convention.
pub fn vertex_sos_duality_residual(
    x: C,
    xp: C,
    a: C,
    md: &ModularData,
    rho: C,
    rho_prime: C,
    ctx: &Context,
) -> Result<f64> {
    let kappa = duality_constant(md, ctx)?;
    let sides = duality_sides(&DUALITY_CONVENTION, x, xp, a, md, ctx)?;
    Ok(sides
        .iter()
        .map(|(l, r)| rel_diff(l * rho, r * kappa * rho_prime))
        .fold(0.0, f64::max))
}

/// Worst |X̄^{(ε)}_a(x)·X^{(ε')}_a(x) − δ θ₂(x|τ)| (relative to θ₂) over the four
/// sign pairs, and the same for Ȳ·Y.
pub fn inversion_residual(a: C, x: C, md: &ModularData, ctx: &Context) -> Result<f64> {
    let t2 = theta2(x, md.tau, ctx)?;
    let scale = t2.norm().max(1e-300);
    let mut worst = 0.0f64;
    for e in Sign::BOTH {
        for ep in Sign::BOTH {
            let target = if e == ep { t2 } else { C::new(0.0, 0.0) };
            let xx = baxter_xbar(a, x, e, md, ctx)?.dot(&baxter_x(a, x, ep, md, ctx)?);
            let yy = baxter_ybar(a, x, e, md, ctx)?.dot(&baxter_y(a, x, ep, md, ctx)?);
            worst = worst.max((xx - target).norm() / scale).max((yy - target).norm() / scale);
        }
    }
    Ok(worst)
}

/// SOS L-operator element θ₂(x + εa − ε'a')θ₁(y + εa + ε'a')/θ₁(2εa).
pub fn l_element(a: C, ap: C, eps: Sign, epsp: Sign, x: C, y: C, md: &ModularData, ctx: &Context) -> Result<C> {
    let (ea, eap) = (a * eps.f(), ap * epsp.f());
    let den = theta1_denominator(ea * 2.0, md.tau, "L-operator", ctx)?;
    Ok(theta2(x + ea - eap, md.tau, ctx)? * theta1(y + ea + eap, md.tau, ctx)? / den)
}

/// Second L-operator element θ₂(x − εa + ε'a')θ₁(y + εa + ε'a')/θ₁(2εa).
pub fn l_prime_element(a: C, ap: C, eps: Sign, epsp: Sign, x: C, y: C, md: &ModularData, ctx: &Context) -> Result<C> {
    let (ea, eap) = (a * eps.f(), ap * epsp.f());
    let den = theta1_denominator(ea * 2.0, md.tau, "L-operator", ctx)?;
    Ok(theta2(x - ea + eap, md.tau, ctx)? * theta1(y + ea + eap, md.tau, ctx)? / den)
}

/// The same L element assembled from Baxter vectors: X̄^{(ε)}_a(x + y)·X^{(ε')}_{a'}(x − y).
pub fn l_element_from_vectors(a: C, ap: C, eps: Sign, epsp: Sign, x: C, y: C, md: &ModularData, ctx: &Context) -> Result<C> {
    Ok(baxter_xbar(a, x + y, eps, md, ctx)?.dot(&baxter_x(ap, x - y, epsp, md, ctx)?))
}

/// Ȳ^{(ε)}_a(x − y)·Y^{(ε')}_{a'}(x + y), which reproduces [`l_prime_element`].
pub fn l_prime_element_from_vectors(a: C, ap: C, eps: Sign, epsp: Sign, x: C, y: C, md: &ModularData, ctx: &Context) -> Result<C> {
    Ok(baxter_ybar(a, x - y, eps, md, ctx)?.dot(&baxter_y(ap, x + y, epsp, md, ctx)?))
}

/// Heights a_k with signs ε_k on a periodic chain of N sites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeightPath {
    pub a: Vec<C>,
    pub eps: Vec<Sign>,
}

impl HeightPath {
    pub fn new(a: Vec<C>, eps: Vec<Sign>) -> Result<Self> {
        if a.is_empty() || a.len() != eps.len() {
            return Err(Error::Config(format!(
                "height path needs equal nonzero lengths, got {} heights and {} signs",
                a.len(),
                eps.len()
            )));
        }
        Ok(HeightPath { a, eps })
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// The heights a_k + ε_k η/2 the transfer matrix maps this path to.
    pub fn shifted(&self, eta: C) -> Vec<C> {
        self.a.iter().zip(&self.eps).map(|(a, e)| a + eta * (0.5 * e.f())).collect()
    }
}

fn transfer_product(path: &HeightPath, x: C, y: C, prime: bool, md: &ModularData, ctx: &Context) -> Result<C> {
    let n = path.len();
    let mut prod = C::new(1.0, 0.0);
    for k in 0..n {
        let k1 = (k + 1) % n;
        let (ea, eb) = (path.a[k] * path.eps[k].f(), path.a[k1] * path.eps[k1].f());
        let den = theta1(ea * 2.0, md.tau, ctx)?;
        if den.norm() < 1e-13 {
            let (m, n) = lattice_index(ea * 2.0, md.tau);
            return Err(Error::SitePole { site: k + 1, m, n });
        }
        let arg2 = if prime { x - ea + eb } else { x + ea - eb };
        prod *= theta2(arg2, md.tau, ctx)? * theta1(y + ea + eb, md.tau, ctx)? / den;
    }
    Ok(prod)
}

/// ⟨out|T(x)|in⟩: nonzero only when `out` is `path_in` shifted by ε_k η/2.
pub fn transfer_element(path_in: &HeightPath, path_out: &[C], x: C, y: C, md: &ModularData, ctx: &Context) -> Result<C> {
    if !path_matches(path_in, path_out, md.eta) {
        return Ok(C::new(0.0, 0.0));
    }
    transfer_product(path_in, x, y, false, md, ctx)
}

/// ⟨in|T'(x)|out⟩ for the second transfer matrix, with the same path labelling.
pub fn transfer_prime_element(path_in: &HeightPath, path_out: &[C], x: C, y: C, md: &ModularData, ctx: &Context) -> Result<C> {
    if !path_matches(path_in, path_out, md.eta) {
        return Ok(C::new(0.0, 0.0));
    }
    transfer_product(path_in, x, y, true, md, ctx)
}

fn path_matches(path_in: &HeightPath, path_out: &[C], eta: C) -> bool {
    path_out.len() == path_in.len()
        && path_in
            .shifted(eta)
            .iter()
            .zip(path_out)
            .all(|(a, b)| heights_equal(*a, *b))
}

/// |T'(x) − T(−x)ᵗ| for one matrix element, relative.
pub fn transfer_transpose_residual(path: &HeightPath, x: C, y: C, md: &ModularData, ctx: &Context) -> Result<f64> {
    let out = path.shifted(md.eta);
    let tp = transfer_prime_element(path, &out, x, y, md, ctx)?;
    let t = transfer_element(path, &out, -x, y, md, ctx)?;
    Ok(rel_diff(tp, t))
}

/// V_x(a, b) = Φ(a−b+x/2)Φ(a+b+x/2)/(Φ(a−b−x/2)Φ(a+b−x/2)).
pub fn ising_weight_v(x: C, a: C, b: C, md: &ModularData, ctx: &Context) -> Result<C> {
    let h = x * 0.5;
    let num = phi(a - b + h, md, ctx)? * phi(a + b + h, md, ctx)?;
    let den = phi(a - b - h, md, ctx)? * phi(a + b - h, md, ctx)?;
    Ok(num / den)
}

/// Both sides of the intertwining relation, as (left, right).
#[allow(clippy::too_many_arguments)]
pub fn intertwining_sides(
    x: C,
    x1: C,
    x2: C,
    a: C,
    bp: C,
    eps: Sign,
    epsp: Sign,
    md: &ModularData,
    ctx: &Context,
) -> Result<(C, C)> {
    let h = md.eta * 0.5;
    let w = x2 - x1;
    let lhs = ising_weight_v(w, a + h * eps.f(), bp, md, ctx)?
        * baxter_xbar(a, x - x1, eps, md, ctx)?.dot(&baxter_y(bp, x - x2, epsp, md, ctx)?);
    let rhs = baxter_xbar(a, x - x2, eps, md, ctx)?.dot(&baxter_y(bp, x - x1, epsp, md, ctx)?)
        * ising_weight_v(w, a, bp + h * epsp.f(), md, ctx)?;
    Ok((lhs, rhs))
}

/// Relative intertwining mismatch, worst over the sample values of the free argument `xs`.
#[allow(clippy::too_many_arguments)]
pub fn intertwining_residual(
    xs: &[C],
    x1: C,
    x2: C,
    a: C,
    bp: C,
    eps: Sign,
    epsp: Sign,
    md: &ModularData,
    ctx: &Context,
) -> Result<f64> {
    let mut worst = 0.0f64;
    for &x in xs {
        let (l, r) = intertwining_sides(x, x1, x2, a, bp, eps, epsp, md, ctx)?;
        worst = worst.max(rel_diff(l, r));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QKernelSpec {
    pub a: Vec<C>,
    pub b: Vec<C>,
    pub x: C,
    pub y: C,
}

/// Π_k V_{y−x}(a_k, b_k) V_{y+x}(b_k, a_{k+1}), periodic in k.
pub fn q_kernel(spec: &QKernelSpec, md: &ModularData, ctx: &Context) -> Result<C> {
    let n = spec.a.len();
    if n == 0 || spec.b.len() != n {
        return Err(Error::Config("Q-kernel needs equally many a and b heights".into()));
    }
    let mut prod = C::new(1.0, 0.0);
    for k in 0..n {
        prod *= ising_weight_v(spec.y - spec.x, spec.a[k], spec.b[k], md, ctx)?;
        prod *= ising_weight_v(spec.y + spec.x, spec.b[k], spec.a[(k + 1) % n], md, ctx)?;
    }
    Ok(prod)
}

/// Duality residuals at a list of points, collected into a report.
pub fn duality_report(points: &[(C, C, C)], md: &ModularData, ctx: &Context) -> Result<ResidualReport> {
    let mut rep = ResidualReport::new("vertex-SOS duality", ctx);
    let one = C::new(1.0, 0.0);
    for &(x, xp, a) in points {
        let r = vertex_sos_duality_residual(x, xp, a, md, one, one, ctx)?;
        rep.push(&[("x", x), ("x'", xp), ("a", a), ("tau", md.tau), ("eta", md.eta)], r);
    }
    Ok(rep)
}
