//! Order-by-order solution of the pole-stripped Liouville equation
//!
//!   H(pqu)H(u) − v^N(1 − 1/(uv))^N(1 − pq·u/v)^N H(pu)H(qu) = S(u)
//!
//! as a series in (p, q), graded by total degree. The unknowns at each degree
//! (new Laurent coefficients of H and the next coefficient of R₀) enter
//! linearly, so each degree is a least-squares problem whose residual doubles
//! as a certificate that the assumed shape of the expansion is right.
//!
//! Bookkeeping: the coefficient of p^i q^j (u^n + u^{−n}) is an unknown of
//! "native" degree s = i + j, and it first shows up in the residual at degree
//! s − 2·max(n, m). Degree d of the residual therefore fixes every mode n at
//! native degree d + 2·max(n, m).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::expi2pi;
use crate::error::{Error, Result};
use crate::linalg::lstsq;
use crate::precision::Context;
use crate::series::{degree, double_pochhammer, q_pochhammer, Buckets, Key, Series};
use crate::tropical::{tropical_t, SpectralState};
use crate::poly;

type C = Complex64;

fn c(x: f64) -> C {
    C::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Highest residual degree D that is solved.
    pub degree: i32,
    /// Modes allocated beyond m + N at the first degree; one more per degree after.
    pub extra_modes: usize,
    /// Solved coefficients with modulus below this are dropped.
    pub coefficient_floor: f64,
    /// Singular values below rank_tol·σ_max count as zero.
    pub rank_tol: f64,
    /// Largest acceptable relative least-squares residual per degree.
    pub consistency_tol: f64,
    /// Numeric nomes for the resonance scan; the recursion itself is formal.
    pub nomes: Option<(C, C)>,
    pub resonance_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            degree: 6,
            extra_modes: 3,
            coefficient_floor: 1e-13,
            rank_tol: 1e-10,
            consistency_tol: 1e-9,
            nomes: None,
            resonance_tol: 1e-8,
        }
    }
}

/// Every (i, j) ≠ (0, 0) with i + j ≤ D where 1 − p^i q^j v² is below `tol`.
pub fn resonance_scan(p: C, q: C, v: C, max_degree: i32, tol: f64) -> Vec<(i64, i64)> {
    let mut hits = Vec::new();
    for i in 0..=max_degree {
        for j in 0..=(max_degree - i) {
            if i == 0 && j == 0 {
                continue;
            }
            if (1.0 - p.powi(i) * q.powi(j) * v * v).norm() < tol {
                hits.push((i as i64, j as i64));
            }
        }
    }
    hits
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeDiagnostic {
    pub degree: i32,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    /// max|A·x − b| relative to the largest term entering the degree.
    pub relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbativeSolution {
    #[serde(rename = "N")]
    pub n: usize,
    pub v: C,
    pub m: usize,
    pub partition: Vec<usize>,
    #[serde(rename = "D")]
    pub max_degree: i32,
    #[serde(rename = "H")]
    pub h: Series,
    #[serde(rename = "R0")]
    pub r0: Series,
    /// Mode n ↦ first native total degree with a nonzero coefficient.
    pub orders: BTreeMap<usize, i32>,
    pub residual_norms: Vec<DegreeDiagnostic>,
    #[serde(skip)]
    pub state: SpectralState,
    pub options: SolverOptions,
    pub policy: Context,
}

/// The fixed series entering the equation for given (N, m, v).
struct LiouvilleSystem {
    pref: Series,
    s: Buckets,
}

impl LiouvilleSystem {
    fn new(n: usize, v: C, s_degree: i32) -> Self {
        // v^N (1 − u^{−1}/v)^N (1 − pq·u/v)^N
        let lin = Series::one_plus(-1.0 / v, (0, 0, -1)).mul_trunc(&Series::one_plus(-1.0 / v, (1, 1, 1)), i32::MAX / 2);
        let pref = lin.pow_trunc(n, i32::MAX / 2).scale(v.powi(n as i32));
        let t = s_degree;
        let base = double_pochhammer(v, 0, 0, -1, t)
            .mul_trunc(&double_pochhammer(1.0 / v, 2, 2, 1, t), t)
            .mul_trunc(&double_pochhammer(v, 1, 1, 1, t), t)
            .mul_trunc(&double_pochhammer(1.0 / v, 1, 1, -1, t), t);
        LiouvilleSystem {
            pref,
            s: Buckets::new(&base.pow_trunc(n, t)),
        }
    }
}

/// The shifted copies of H and the products with the prefactor needed to
/// assemble one degree of the residual.
struct Shifted {
    h: Buckets,
    hpq: Buckets,
    hp: Buckets,
    pref_hq: Buckets,
    pref_hp: Buckets,
}

impl Shifted {
    fn new(h: &Series, pref: &Series, d: i32) -> Self {
        let hp = h.shift(1, 0);
        let hq = h.shift(0, 1);
        let lo = hp.min_degree().unwrap_or(0).min(hq.min_degree().unwrap_or(0)).min(0);
        Shifted {
            h: Buckets::new(h),
            hpq: Buckets::new(&h.shift(1, 1)),
            pref_hq: Buckets::new(&pref.mul_trunc(&hq, d - lo)),
            pref_hp: Buckets::new(&pref.mul_trunc(&hp, d - lo)),
            hp: Buckets::new(&hp),
        }
    }
}

fn max_norm(s: &Series) -> f64 {
    s.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max)
}

/// Degree-d part of the residual and the largest coefficient among its three
/// constituent products.
fn residual_at(sys: &LiouvilleSystem, sh: &Shifted, r0: &Series, d: i32) -> (Series, f64) {
    let mut a = Series::zero();
    sh.hpq.product_at(&sh.h, d, &mut a, c(1.0));
    let mut b = Series::zero();
    sh.hp.product_at(&sh.pref_hq, d, &mut b, c(1.0));
    let mut s = Series::zero();
    Buckets::new(r0).product_at(&sys.s, d, &mut s, c(1.0));
    let scale = max_norm(&a).max(max_norm(&b)).max(max_norm(&s));
    (a.sub(&b).sub(&s), scale)
}

#[derive(Debug, Clone, Copy)]
enum Unknown {
    /// Coefficient of p^i q^j (u^n + u^{−n}); a single u^0 term when n = 0.
    H { n: i32, i: i32, j: i32 },
    R0 { a: i32, b: i32 },
}

fn mode_monomials(n: i32, i: i32, j: i32) -> Vec<Key> {
    if n == 0 {
        vec![(i, j, 0)]
    } else {
        vec![(i, j, n), (i, j, -n)]
    }
}

fn column(sys: &LiouvilleSystem, sh: &Shifted, unk: Unknown, d: i32) -> Series {
    let mut out = Series::zero();
    match unk {
        Unknown::H { n, i, j } => {
            let one = c(1.0);
            for (a, b, k) in mode_monomials(n, i, j) {
                // δ(pqu)·H + Hpq·δ − δ(pu)·(pref·Hq) − (pref·Hp)·δ(qu)
                sh.h.monomial_product_at((a + k, b + k, k), one, d, &mut out);
                sh.hpq.monomial_product_at((a, b, k), one, d, &mut out);
                sh.pref_hq.monomial_product_at((a + k, b, k), -one, d, &mut out);
                sh.pref_hp.monomial_product_at((a, b + k, k), -one, d, &mut out);
            }
        }
        Unknown::R0 { a, b } => {
            sys.s.monomial_product_at((a, b, 0), c(-1.0), d, &mut out);
        }
    }
    out
}

/// Seed Laurent coefficients of P_m: mode n ↦ coefficient of u^{±n}.
fn seed_modes(state: &SpectralState) -> Vec<(i32, C)> {
    let coeffs = state.p_polynomial();
    let m = state.m;
    (0..=m).map(|n| (n as i32, coeffs[m + n])).collect()
}

/// Solves the ground state (m = 0, H = 1 at leading order).
pub fn solve_ground(n: usize, v: C, opts: &SolverOptions, ctx: &Context) -> Result<PerturbativeSolution> {
    solve_excited(&SpectralState::ground(n, v)?, opts, ctx)
}

/// Solves the state seeded by the tropical polynomial P_m of `state`.
pub fn solve_excited(state: &SpectralState, opts: &SolverOptions, ctx: &Context) -> Result<PerturbativeSolution> {
    let (n, m, v) = (state.n, state.m as i32, state.v);
    let big_d = opts.degree;
    if let Some((p, q)) = opts.nomes {
        if let Some(&(i, j)) = resonance_scan(p, q, v, big_d, opts.resonance_tol).first() {
            return Err(Error::Resonance { i, j });
        }
    }
    let d0 = -2 * m;
    if big_d < d0 {
        return Err(Error::Config(format!("degree {big_d} is below the leading degree {d0}")));
    }
    let sys = LiouvilleSystem::new(n, v, big_d + 2 * m);
    let mut h = Series::zero();
    for (mode, coeff) in seed_modes(state) {
        for key in mode_monomials(mode, 0, 0) {
            h.add_term(key, coeff);
        }
    }
    let mut r0 = Series::zero();
    let mut orders: BTreeMap<usize, i32> = (0..=m as usize).map(|k| (k, 0)).collect();
    let mut diagnostics = Vec::new();

    for d in d0..=big_d {
        let nmax = m + n as i32 + opts.extra_modes as i32 + (d - d0);
        let mut unknowns = Vec::new();
        for mode in 0..=nmax {
            if mode == m {
                continue;
            }
            let s = d + 2 * mode.max(m);
            if s < 0 || (mode < m && s == 0) {
                continue;
            }
            for i in 0..=s {
                unknowns.push(Unknown::H { n: mode, i, j: s - i });
            }
        }
        let s = d + 2 * m;
        for i in 0..=s {
            unknowns.push(Unknown::R0 { a: i - m, b: s - i - m });
        }

        let sh = Shifted::new(&h, &sys.pref, d);
        let (base, scale) = residual_at(&sys, &sh, &r0, d);
        let cols: Vec<Series> = unknowns.iter().map(|&u| column(&sys, &sh, u, d)).collect();

        let mut rows: BTreeMap<Key, usize> = BTreeMap::new();
        for key in base.iter().map(|(k, _)| *k).chain(cols.iter().flat_map(|s| s.iter().map(|(k, _)| *k))) {
            let next = rows.len();
            rows.entry(key).or_insert(next);
        }
        let (nr, nc) = (rows.len(), unknowns.len());
        if nr < nc {
            return Err(Error::Degeneracy(format!(
                "degree {d}: {nc} unknowns but only {nr} equations"
            )));
        }
        let mut a = DMatrix::<C>::zeros(nr, nc);
        let mut col_scale: f64 = 0.0;
        for (j, col) in cols.iter().enumerate() {
            for (k, x) in col.iter() {
                a[(rows[k], j)] = *x;
                col_scale = col_scale.max(x.norm());
            }
        }
        let mut rhs = DVector::<C>::zeros(nr);
        for (k, x) in base.iter() {
            rhs[rows[k]] = -x;
        }
        let ls = lstsq(&a, &rhs, opts.rank_tol)?;
        let rank = ls.rank;
        if rank < nc {
            return Err(Error::Degeneracy(format!(
                "degree {d}: rank {rank} for {nc} unknowns"
            )));
        }
        let (sol, miss) = (ls.x, ls.miss);
        let relative = miss / scale.max(col_scale).max(f64::MIN_POSITIVE);
        diagnostics.push(DegreeDiagnostic {
            degree: d,
            unknowns: nc,
            equations: nr,
            rank,
            relative_residual: relative,
        });
        if !(relative <= opts.consistency_tol) {
            return Err(if d == d0 {
                Error::SeedInconsistent { residual: relative }
            } else {
                Error::InvalidSolution(format!(
                    "degree {d}: least-squares residual {relative:e} exceeds {:e}",
                    opts.consistency_tol
                ))
            });
        }
        for (unk, x) in unknowns.iter().zip(sol.iter()) {
            if x.norm() < opts.coefficient_floor {
                continue;
            }
            match *unk {
                Unknown::H { n: mode, i, j } => {
                    for key in mode_monomials(mode, i, j) {
                        h.add_term(key, *x);
                    }
                    orders.entry(mode as usize).or_insert(i + j);
                }
                Unknown::R0 { a, b } => r0.add_term((a, b, 0), *x),
            }
        }
    }
    Ok(PerturbativeSolution {
        n,
        v,
        m: state.m,
        partition: state.p_indices.clone(),
        max_degree: big_d,
        h,
        r0,
        orders,
        residual_norms: diagnostics,
        state: state.clone(),
        options: *opts,
        policy: *ctx,
    })
}

impl PerturbativeSolution {
    /// Per degree d ≤ D, max|residual_d| relative to the largest product term at d,
    /// recomputed from the stored series.
    pub fn liouville_certificate(&self) -> Vec<(i32, f64)> {
        let m = self.m as i32;
        let sys = LiouvilleSystem::new(self.n, self.v, self.max_degree + 2 * m);
        (-2 * m..=self.max_degree)
            .map(|d| {
                let sh = Shifted::new(&self.h, &sys.pref, d);
                let (res, scale) = residual_at(&sys, &sh, &self.r0, d);
                (d, max_norm(&res) / scale.max(f64::MIN_POSITIVE))
            })
            .collect()
    }

    /// max |H(i,j,k) − H(j,i,k)|: the p ↔ q symmetry that the solver does not impose.
    pub fn pq_asymmetry(&self) -> f64 {
        self.h
            .iter()
            .map(|(&(a, b, k), x)| (x - self.h.get(&(b, a, k))).norm())
            .fold(0.0, f64::max)
    }

    /// The first orders Q_n for n ≥ 1, in mode order.
    pub fn order_sequence(&self) -> Vec<i32> {
        self.orders.iter().filter(|(k, _)| **k > self.m).map(|(_, d)| *d).collect()
    }

    /// Numerical H at given nomes.
    pub fn eval_h(&self, p: C, q: C, u: C) -> C {
        self.h.eval(p, q, u)
    }

    pub fn eval_r0(&self, p: C, q: C) -> C {
        self.r0.eval(p, q, c(1.0))
    }

    fn max_mode(&self) -> i32 {
        self.h.iter().map(|(k, _)| k.2.abs()).max().unwrap_or(0)
    }
}

/// Leading orders of 𝛘/√R₀ in total (p, q) degree and in powers of pq.
#[derive(Debug, Clone, Serialize)]
pub struct ConjectureReport {
    pub h_leading_degree: i32,
    pub r0_leading_degree: i32,
    pub chi_over_sqrt_r0_degree: f64,
    /// The same order counted in powers of pq.
    pub pq_order: f64,
    pub expected_pq_order: f64,
    pub confirmed: bool,
}

/// The pole prefactor of 𝛘 starts at 1, so the leading order of 𝛘/√R₀ is that of
/// H minus half that of R₀.
pub fn conjecture_scaling(sol: &PerturbativeSolution) -> ConjectureReport {
    let h_lead = sol.h.min_degree().unwrap_or(0);
    let r0_lead = sol.r0.min_degree().unwrap_or(0);
    let chi = h_lead as f64 - r0_lead as f64 / 2.0;
    let expected = sol.m as f64 / 2.0;
    ConjectureReport {
        h_leading_degree: h_lead,
        r0_leading_degree: r0_lead,
        chi_over_sqrt_r0_degree: chi,
        pq_order: chi / 2.0,
        expected_pq_order: expected,
        confirmed: (chi / 2.0 - expected).abs() < 1e-12,
    }
}

/// The order structure of an excited state: modes m+1..m+N enter at pq-orders
/// 1..N, and mode m+N+1 has nothing up to pq-order N+1.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    /// (mode, first total degree) for modes m+1..=m+N+1; None if never nonzero.
    pub first_degrees: Vec<(usize, Option<i32>)>,
    pub consecutive_orders: bool,
    /// Whether the solve reached total degree 2(N+1) for mode m+N+1.
    pub checkable: bool,
    pub gap_holds: bool,
}

pub fn gap_check(sol: &PerturbativeSolution) -> GapReport {
    let (m, n) = (sol.m, sol.n);
    let first_degrees: Vec<(usize, Option<i32>)> =
        (m + 1..=m + n + 1).map(|k| (k, sol.orders.get(&k).copied())).collect();
    let consecutive = first_degrees
        .iter()
        .take(n)
        .enumerate()
        .all(|(i, (_, d))| *d == Some(2 * (i as i32 + 1)));
    let gap_mode = (m + n + 1) as i32;
    let bound = 2 * (n as i32 + 1);
    let checkable = bound <= sol.max_degree + 2 * gap_mode;
    let gap_holds = match first_degrees.last().and_then(|(_, d)| *d) {
        Some(d) => d > bound,
        None => checkable,
    };
    GapReport {
        first_degrees,
        consecutive_orders: consecutive,
        checkable,
        gap_holds,
    }
}

/// The first coefficient (in degree order) where two R₀ series differ by more than `tol`.
pub fn first_r0_difference(a: &Series, b: &Series, tol: f64) -> Option<(Key, C, C)> {
    let mut keys: Vec<Key> = a.iter().chain(b.iter()).map(|(k, _)| *k).collect();
    keys.sort_by_key(|k| (degree(k), k.0, k.1, k.2));
    keys.dedup();
    keys.into_iter()
        .find(|k| (a.get(k) - b.get(k)).norm() > tol)
        .map(|k| (k, a.get(&k), b.get(&k)))
}

/// t_q(u) = Σ_{a,b,k} c_{k,a,b} p^a q^b h_q(ω^k u)^N.
#[derive(Debug, Clone, Serialize)]
pub struct GradedTransfer {
    #[serde(rename = "N")]
    pub n: usize,
    /// (a, b) ↦ [c_{0,a,b}, …, c_{N−1,a,b}].
    pub coeffs: BTreeMap<(i32, i32), Vec<C>>,
    /// Total degrees through which t_q is determined.
    pub valid_through: i32,
    /// Per degree: relative residual of the q-form TQ equation after the fit.
    pub q_form_residuals: Vec<(i32, f64)>,
    /// Per degree: relative residual of the p-form equation with t_p = (p↔q image).
    pub p_form_residuals: Vec<(i32, f64)>,
    /// max |c_{N−k} − c_k| over all (a, b), relative to the largest coefficient.
    pub symmetry_deviation: f64,
    /// Max relative difference between the leading coefficient and the tropical t.
    pub tropical_mismatch: f64,
}

fn omega(n: usize) -> C {
    expi2pi(c(1.0 / n as f64))
}

/// h_q(c·u^{k0})^N as a series: ((c u^{k0}; q)(q/(c u^{k0}); q))^N.
fn h_series_q(cf: C, k0: i32, n: usize, t: i32) -> Series {
    let h = q_pochhammer(cf, 0, 0, k0, t).mul_trunc(&q_pochhammer(1.0 / cf, 0, 1, -k0, t), t);
    h.pow_trunc(n, t)
}

fn basis_series(n: usize, t: i32) -> Vec<Series> {
    (0..n).map(|k| h_series_q(omega(n).powi(k as i32), 1, n, t)).collect()
}

/// The right-hand side of the q-form TQ equation for H:
/// (uv;q)^N (pqu/v;q)^N H(pu) + v^N (1 − u/v)^N (qv/u;q)^N (pq/(uv);q)^N H(u/p).
fn tq_rhs_q(h: &Series, n: usize, v: C, t: i32) -> Series {
    let a = q_pochhammer(v, 0, 0, 1, t)
        .mul_trunc(&q_pochhammer(1.0 / v, 1, 1, 1, t), t)
        .pow_trunc(n, t);
    let b = Series::one_plus(-1.0 / v, (0, 0, 1))
        .mul_trunc(&q_pochhammer(v, 0, 1, -1, t), t)
        .mul_trunc(&q_pochhammer(1.0 / v, 1, 1, -1, t), t)
        .pow_trunc(n, t)
        .scale(v.powi(n as i32));
    a.mul_trunc(&h.shift(1, 0), t).add(&b.mul_trunc(&h.shift(-1, 0), t))
}

fn transfer_series(coeffs: &BTreeMap<(i32, i32), Vec<C>>, basis: &[Series], t: i32) -> Series {
    let mut out = Series::zero();
    for (&(a, b), cs) in coeffs {
        for (k, x) in cs.iter().enumerate() {
            if x.norm() == 0.0 {
                continue;
            }
            out = out.add(&basis[k].mul_trunc(&Series::monomial((a, b, 0), *x), t));
        }
    }
    out
}

fn per_degree_relative(res: &Series, parts: &[&Series], lo: i32, hi: i32) -> Vec<(i32, f64)> {
    (lo..=hi)
        .map(|d| {
            let scale = parts.iter().map(|s| s.max_at_degree(d)).fold(0.0, f64::max);
            (d, res.max_at_degree(d) / scale.max(f64::MIN_POSITIVE))
        })
        .collect()
}

/// Fits t_q from t_q·H = RHS degree by degree, then checks the p-form equation
/// with the p ↔ q image of the fitted coefficients.
pub fn induced_transfer(sol: &PerturbativeSolution, tol: f64) -> Result<GradedTransfer> {
    let (n, m, v) = (sol.n, sol.m as i32, sol.v);
    let top = sol.max_degree + m;
    let amax = sol.max_mode();
    let t = top + amax + m + 2;
    let h = &sol.h;
    let basis = basis_series(n, t);
    let rhs = tq_rhs_q(h, n, v, t);
    let products: Vec<Buckets> = basis.iter().map(|b| Buckets::new(&b.mul_trunc(h, t))).collect();
    let lo = rhs.min_degree().unwrap_or(-m).min(-m);

    let mut coeffs: BTreeMap<(i32, i32), Vec<C>> = BTreeMap::new();
    for e in lo..=top {
        let mut target = rhs.degree_part(e);
        // contributions of the coefficients fitted at lower degrees
        let mut known = Series::zero();
        for (&(a, b), cs) in &coeffs {
            for (kk, x) in cs.iter().enumerate() {
                products[kk].monomial_product_at((a, b, 0), *x, e, &mut known);
            }
        }
        target = target.sub(&known);
        let mut unknowns = Vec::new();
        for a in -amax..=e {
            let b = e - a;
            if b < 0 {
                continue;
            }
            for k in 0..n {
                unknowns.push((a, b, k));
            }
        }
        let cols: Vec<Series> = unknowns
            .iter()
            .map(|&(a, b, k)| {
                let mut s = Series::zero();
                products[k].monomial_product_at((a, b, 0), c(1.0), e, &mut s);
                s
            })
            .collect();
        let mut rows: BTreeMap<Key, usize> = BTreeMap::new();
        for key in target.iter().map(|(k, _)| *k).chain(cols.iter().flat_map(|s| s.iter().map(|(k, _)| *k))) {
            let next = rows.len();
            rows.entry(key).or_insert(next);
        }
        if rows.is_empty() {
            continue;
        }
        let mut a = DMatrix::<C>::zeros(rows.len(), unknowns.len());
        for (j, col) in cols.iter().enumerate() {
            for (k, x) in col.iter() {
                a[(rows[k], j)] = *x;
            }
        }
        let mut b = DVector::<C>::zeros(rows.len());
        for (k, x) in target.iter() {
            b[rows[k]] = *x;
        }
        let x = lstsq(&a, &b, 1e-12)?.x;
        for (&(aa, bb, k), val) in unknowns.iter().zip(x.iter()) {
            if val.norm() < sol.options.coefficient_floor {
                continue;
            }
            coeffs.entry((aa, bb)).or_insert_with(|| vec![c(0.0); n])[k] += *val;
        }
    }

    let lhs = transfer_series(&coeffs, &basis, t).mul_trunc(h, t);
    let q_res = lhs.sub(&rhs);
    let q_form_residuals = per_degree_relative(&q_res, &[&lhs, &rhs], lo, top);
    if let Some((d, r)) = q_form_residuals.iter().find(|(_, r)| !(*r <= tol)) {
        return Err(Error::InvalidSolution(format!(
            "q-form TQ remainder {r:e} at degree {d}: the quotient is not a transfer polynomial"
        )));
    }

    // p-form: the same equation with p and q exchanged everywhere except in H
    let swapped: BTreeMap<(i32, i32), Vec<C>> = coeffs.iter().map(|(&(a, b), cs)| ((b, a), cs.clone())).collect();
    let basis_p: Vec<Series> = basis.iter().map(|s| s.swap_pq()).collect();
    let tp = transfer_series(&swapped, &basis_p, t);
    let lhs_p = tp.mul_trunc(h, t);
    let rhs_p = tq_rhs_q(&h.swap_pq(), n, v, t).swap_pq();
    let p_res = lhs_p.sub(&rhs_p);
    let p_form_residuals = per_degree_relative(&p_res, &[&lhs_p, &rhs_p], lo, top);

    let cmax = coeffs.values().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    let symmetry_deviation = coeffs
        .values()
        .flat_map(|cs| (1..n).map(move |k| (cs[n - k] - cs[k]).norm()))
        .fold(0.0, f64::max)
        / cmax.max(f64::MIN_POSITIVE);

    let tropical_mismatch = {
        let lead = coeffs.get(&(-m, 0)).cloned().unwrap_or_else(|| vec![c(0.0); n]);
        let mut poly_t = vec![c(0.0); n + 1];
        for (k, x) in lead.iter().enumerate() {
            let term = poly::scale(&poly::linear_power(c(1.0), -omega(n).powi(k as i32), n), *x);
            poly_t = poly::add(&poly_t, &term);
        }
        let trop = tropical_t(&sol.state)?;
        let scale = trop.iter().map(|z| z.norm()).fold(0.0, f64::max);
        poly_t
            .iter()
            .zip(trop.iter().chain(std::iter::repeat(&c(0.0))))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
            / scale.max(f64::MIN_POSITIVE)
    };

    Ok(GradedTransfer {
        n,
        coeffs,
        valid_through: top,
        q_form_residuals,
        p_form_residuals,
        symmetry_deviation,
        tropical_mismatch,
    })
}

impl GradedTransfer {
    /// Numerical t_q(u) at given nomes.
    pub fn eval(&self, p: C, q: C, u: C, ctx: &Context) -> Result<C> {
        let w = omega(self.n);
        let hs: Vec<C> = (0..self.n)
            .map(|k| crate::elliptic::h(w.powi(k as i32) * u, q, ctx).map(|z| z.powi(self.n as i32)))
            .collect::<Result<_>>()?;
        Ok(self
            .coeffs
            .iter()
            .map(|(&(a, b), cs)| p.powi(a) * q.powi(b) * cs.iter().zip(&hs).map(|(x, y)| x * y).sum::<C>())
            .sum())
    }

    /// Independent coefficients per (a, b) after the symmetry c_{N−k} = c_k.
    pub fn independent_count(&self) -> usize {
        self.n / 2 + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(d: i32) -> SolverOptions {
        SolverOptions {
            degree: d,
            ..SolverOptions::default()
        }
    }

    #[test]
    fn ground_state_first_order_is_two() {
        let ctx = Context::double();
        let sol = solve_ground(1, c(0.5), &opts(4), &ctx).unwrap();
        assert_eq!(sol.orders.get(&1), Some(&2));
        for (d, r) in sol.liouville_certificate() {
            assert!(r < 1e-12, "degree {d}: {r:e}");
        }
        assert!(sol.pq_asymmetry() < 1e-12);
    }

    #[test]
    fn degree_zero_r0_matches_direct_expansion() {
        // N = 1, degree 0: 1 + h₁/u − (v − 1/u) = R₀⁽⁰⁾(1 − v/u), where h₁ is the
        // pq·(u + 1/u) coefficient; so R₀⁽⁰⁾ = 1 − v and h₁ = −1 − (1 − v)v.
        let ctx = Context::double();
        let v = 0.5;
        let sol = solve_ground(1, c(v), &opts(0), &ctx).unwrap();
        assert!((sol.r0.get(&(0, 0, 0)) - c(1.0 - v)).norm() < 1e-13);
        assert!((sol.h.get(&(1, 1, 1)) - c(-1.0 - (1.0 - v) * v)).norm() < 1e-13);
    }

    #[test]
    fn numeric_spot_check_at_small_nomes() {
        let ctx = Context::double();
        let sol = solve_ground(2, c(0.5), &opts(6), &ctx).unwrap();
        let md = crate::elliptic::ModularData::from_multiplicative(c(0.8), c(0.5), c(0.02), c(0.01)).unwrap();
        let (p, q) = (md.p, md.q);
        let hf = |u: C| sol.eval_h(p, q, u);
        let r0 = sol.eval_r0(p, q);
        let u = C::new(0.8, 0.3);
        let res = crate::functional::liouville_h_residual(&hf, u, &md, 2, r0, &ctx).unwrap();
        let size = crate::functional::s_function(u, &md, 2, r0, &ctx).unwrap().norm();
        assert!(res.norm() / size < 1e-9, "{:e}", res.norm() / size);
    }

    #[test]
    fn resonance_fires_only_at_the_spin_set_index() {
        let (p, q) = (c(0.1), c(0.2));
        let v = (p * q).sqrt().inv();
        assert_eq!(resonance_scan(p, q, v, 6, 1e-8), vec![(1, 1)]);
    }
}
