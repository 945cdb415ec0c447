//! Factorised Q at the special spin values y = −λ, λ = (m/2)η + (n/2)τ.
//!
//! There 𝒬(x) = A(x)A'(x) + B(x)B'(x) with A a product of θ₄((x − x_j)/2 | τ/2)
//! over mN roots, A' the same over nN roots with τ → η, and B(x) = A(x + 1),
//! B'(x) = A'(x + 1). The roots obey Bethe-type equations whose prefactor uses
//! θ₄ or θ₁ depending on the parity of the other index.
//!
//! The solver works on the symmetric ansatz {x_j} = {−x_j}: one unknown per
//! pair ±x, plus a fixed self-conjugate root at 0 or 1 when the count is odd.

use num_complex::Complex64 as C;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::elliptic::{expi2pi, theta, theta1, ModularData, ThetaKind};
use crate::error::{Error, Result};
use crate::functional::{liouville_r, t_decompose, theta_to_h_factor, TransferPolynomial};
use crate::precision::Context;

/// Largest root count per sector the enumeration is meant for.
pub const MAX_ROOTS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpinSet {
    pub m: usize,
    pub n: usize,
}

impl SpinSet {
    pub fn lambda(&self, tau: C, eta: C) -> C {
        0.5 * self.m as f64 * eta + 0.5 * self.n as f64 * tau
    }

    pub fn y(&self, tau: C, eta: C) -> C {
        -self.lambda(tau, eta)
    }

    /// v = e^{2πiy}.
    pub fn v(&self, tau: C, eta: C) -> C {
        expi2pi(self.y(tau, eta))
    }

    pub fn modular_data(&self, x: C, tau: C, eta: C) -> Result<ModularData> {
        ModularData::from_additive(x, self.y(tau, eta), tau, eta)
    }

    /// |v² p^m q^n − 1|, zero on the resonance locus.
    pub fn locus_defect(&self, tau: C, eta: C) -> f64 {
        let v = self.v(tau, eta);
        (v * v * expi2pi(eta).powi(self.m as i32) * expi2pi(tau).powi(self.n as i32) - 1.0).norm()
    }
}

/// Which of the two mirrored equation systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    /// Roots x_j, mN of them, theta functions of modulus τ.
    Tau,
    /// Roots x'_j, nN of them, the same equations with η ↔ τ and m ↔ n.
    Eta,
}

/// The data one sector's equations depend on.
#[derive(Debug, Clone, Copy)]
struct SectorSpec {
    /// (m/2)η in the τ-sector.
    offset: C,
    period: C,
    shift: C,
    sigma: ThetaKind,
    count: usize,
}

fn sigma(parity_index: usize) -> ThetaKind {
    if parity_index % 2 == 0 {
        ThetaKind::Four
    } else {
        ThetaKind::One
    }
}

fn sector_spec(sector: Sector, spin: SpinSet, n_sites: usize, tau: C, eta: C) -> SectorSpec {
    match sector {
        Sector::Tau => SectorSpec {
            offset: 0.5 * spin.m as f64 * eta,
            period: tau,
            shift: eta,
            sigma: sigma(spin.n),
            count: spin.m * n_sites,
        },
        Sector::Eta => SectorSpec {
            offset: 0.5 * spin.n as f64 * tau,
            period: eta,
            shift: tau,
            sigma: sigma(spin.m),
            count: spin.n * n_sites,
        },
    }
}

fn checked_ratio(num: C, den: C) -> Result<C> {
    if den.norm() == 0.0 || !den.is_finite() || !num.is_finite() {
        return Err(Error::Pole { function: "bethe_residual", m: 0, n: 0 });
    }
    Ok(num / den)
}

fn lhs(spec: &SectorSpec, xk: C, roots: &[C], n_sites: usize, ctx: &Context) -> Result<C> {
    let pre = checked_ratio(
        theta(spec.sigma, spec.offset - xk, spec.period, ctx)?,
        theta(spec.sigma, spec.offset + xk, spec.period, ctx)?,
    )?;
    let mut acc = pre.powi(n_sites as i32);
    let half = 0.5 * spec.period;
    for &xj in roots {
        acc *= checked_ratio(
            theta1(0.5 * (xk - xj + spec.shift), half, ctx)?,
            theta1(0.5 * (xk - xj - spec.shift), half, ctx)?,
        )?;
    }
    Ok(acc)
}

/// LHS + 1 of the k-th equation of `sector`, with the product running over all
/// roots including j = k (that factor is −1).
pub fn bethe_residual(
    sector: Sector,
    k: usize,
    roots: &[C],
    spin: SpinSet,
    n_sites: usize,
    tau: C,
    eta: C,
    ctx: &Context,
) -> Result<C> {
    let spec = sector_spec(sector, spin, n_sites, tau, eta);
    let xk = *roots.get(k).ok_or_else(|| Error::Config(format!("root index {k} out of range")))?;
    Ok(lhs(&spec, xk, roots, n_sites, ctx)? + 1.0)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BetheRoots {
    pub tau_roots: Vec<C>,
    pub eta_roots: Vec<C>,
}

impl BetheRoots {
    pub fn sector(&self, s: Sector) -> &[C] {
        match s {
            Sector::Tau => &self.tau_roots,
            Sector::Eta => &self.eta_roots,
        }
    }

    /// Largest |{x_j} − {−x_j}| mismatch after matching each root to the
    /// closest negated root modulo 2.
    pub fn negation_defect(&self) -> f64 {
        [&self.tau_roots, &self.eta_roots]
            .iter()
            .flat_map(|rs| {
                rs.iter().map(move |&x| {
                    rs.iter().map(|&y| mod2_distance(x, -y)).fold(f64::INFINITY, f64::min)
                })
            })
            .fold(0.0, f64::max)
    }
}

fn mod2_distance(a: C, b: C) -> f64 {
    let d = a - b;
    C::new(d.re - 2.0 * (d.re / 2.0).round(), d.im).norm()
}

/// Max |residual| over every equation of both sectors for the full root sets.
pub fn unreduced_residual(roots: &BetheRoots, spin: SpinSet, n_sites: usize, tau: C, eta: C, ctx: &Context) -> Result<f64> {
    let mut worst = 0.0f64;
    for s in [Sector::Tau, Sector::Eta] {
        let rs = roots.sector(s);
        for k in 0..rs.len() {
            worst = worst.max(bethe_residual(s, k, rs, spin, n_sites, tau, eta, ctx)?.norm());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheOptions {
    /// Random starting points per sector and self-conjugate choice.
    pub seeds: usize,
    pub seed: u64,
    pub max_iterations: usize,
    /// Newton stops once every reduced residual is below this.
    pub tol: f64,
    /// Continuation steps from a smaller nome to the target one.
    pub continuation_steps: usize,
}

impl Default for BetheOptions {
    fn default() -> Self {
        BetheOptions { seeds: 12, seed: 42, max_iterations: 80, tol: 1e-13, continuation_steps: 8 }
    }
}

/// Roots of one sector for pair representatives `reps` and an optional
/// self-conjugate root.
fn expand(reps: &[C], center: Option<C>) -> Vec<C> {
    let mut out: Vec<C> = reps.iter().flat_map(|&x| [x, -x]).collect();
    out.extend(center);
    out
}

fn reduced_residuals(spec: &SectorSpec, reps: &[C], center: Option<C>, n_sites: usize, ctx: &Context) -> Result<Vec<C>> {
    let roots = expand(reps, center);
    reps.iter().map(|&x| Ok(lhs(spec, x, &roots, n_sites, ctx)? + 1.0)).collect()
}

fn max_norm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Damped Newton with a central-difference Jacobian (the residuals are
/// holomorphic in the roots).
fn newton(spec: &SectorSpec, start: &[C], center: Option<C>, n_sites: usize, opts: &BetheOptions, ctx: &Context) -> Option<(Vec<C>, f64)> {
    let mut x = start.to_vec();
    let mut f = reduced_residuals(spec, &x, center, n_sites, ctx).ok()?;
    let dim = x.len();
    for _ in 0..opts.max_iterations {
        let norm = max_norm(&f);
        if norm < opts.tol {
            return Some((x, norm));
        }
        let mut jac = nalgebra::DMatrix::<C>::zeros(dim, dim);
        for c in 0..dim {
            let h = 1e-6 * (1.0 + x[c].norm());
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[c] += h;
            xm[c] -= h;
            let fp = reduced_residuals(spec, &xp, center, n_sites, ctx).ok()?;
            let fm = reduced_residuals(spec, &xm, center, n_sites, ctx).ok()?;
            for r in 0..dim {
                jac[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
        let rhs = nalgebra::DVector::from_iterator(dim, f.iter().map(|z| -z));
        let step = jac.lu().solve(&rhs)?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<C> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(ft) = reduced_residuals(spec, &trial, center, n_sites, ctx) {
                if max_norm(&ft) < norm || lambda < 1e-3 {
                    x = trial;
                    f = ft;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-4 {
                return None;
            }
        }
    }
    let norm = max_norm(&f);
    (norm < opts.tol).then_some((x, norm))
}

/// Canonical representative of ±x modulo 2: real part in [0, 1], and
/// nonnegative imaginary part on the boundary lines.
fn canonical_pair(x: C) -> C {
    let reduce = |z: C| {
        let re = z.re.rem_euclid(2.0);
        C::new(if re > 2.0 - 1e-12 { 0.0 } else { re }, z.im)
    };
    let (a, b) = (reduce(x), reduce(-x));
    let on_line = a.re < 1e-12 || (a.re - 1.0).abs() < 1e-12;
    if on_line {
        // x and −x share the real part; break the tie by the sign of Im
        if a.im >= 0.0 { a } else { b }
    } else if a.re < 1.0 {
        a
    } else {
        b
    }
}

/// One distinct solution of a sector's equations.
#[derive(Debug, Clone, Serialize)]
pub struct SectorSolution {
    pub roots: Vec<C>,
    pub reduced_residual: f64,
    pub path: &'static str,
}

fn collides(roots: &[C]) -> bool {
    for i in 0..roots.len() {
        for j in 0..i {
            if mod2_distance(roots[i], roots[j]) < 1e-8 {
                return true;
            }
        }
    }
    false
}

fn same_set(a: &[C], b: &[C]) -> bool {
    a.len() == b.len() && a.iter().all(|&x| b.iter().any(|&y| mod2_distance(x, y) < 1e-7))
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SectorSearch {
    pub solutions: Vec<SectorSolution>,
    pub attempts: usize,
    pub converged: usize,
    pub collisions: usize,
    pub outside_domain: usize,
}

fn solve_sector(spec: &SectorSpec, n_sites: usize, opts: &BetheOptions, rng: &mut ChaCha8Rng, ctx: &Context) -> SectorSearch {
    let mut out = SectorSearch::default();
    if spec.count == 0 {
        out.solutions.push(SectorSolution { roots: vec![], reduced_residual: 0.0, path: "empty" });
        return out;
    }
    let pairs = spec.count / 2;
    let centers: Vec<Option<C>> = if spec.count % 2 == 1 {
        vec![Some(C::new(0.0, 0.0)), Some(C::new(1.0, 0.0))]
    } else {
        vec![None]
    };
    let im_t = spec.period.im;
    for &center in &centers {
        if pairs == 0 {
            // only the self-conjugate root; nothing to solve for
            out.attempts += 1;
            if let Ok(f) = reduced_residuals(spec, &[], center, n_sites, ctx) {
                let roots = expand(&[], center);
                if let Ok(r) = lhs(spec, center.unwrap(), &roots, n_sites, ctx) {
                    let res = (r + 1.0).norm().max(max_norm(&f));
                    if res < opts.tol {
                        out.converged += 1;
                        out.solutions.push(SectorSolution { roots, reduced_residual: res, path: "direct" });
                    }
                }
            }
            continue;
        }
        for _ in 0..opts.seeds {
            let start: Vec<C> = (0..pairs)
                .map(|_| C::new(rng.random_range(0.05..1.95), rng.random_range(-0.45..0.45) * im_t))
                .collect();
            for path in ["direct", "continuation"] {
                out.attempts += 1;
                let found = if path == "direct" {
                    newton(spec, &start, center, n_sites, opts, ctx)
                } else {
                    // follow the solution from a nome of smaller modulus to the target
                    let mut x = Some((start.clone(), f64::INFINITY));
                    for s in 0..=opts.continuation_steps {
                        let t = s as f64 / opts.continuation_steps.max(1) as f64;
                        let period = C::new(spec.period.re, im_t * (3.0 - 2.0 * t));
                        let step_spec = SectorSpec { period, ..*spec };
                        x = x.and_then(|(xs, _)| newton(&step_spec, &xs, center, n_sites, opts, ctx));
                    }
                    x
                };
                let Some((reps, res)) = found else { continue };
                out.converged += 1;
                let reps: Vec<C> = reps.into_iter().map(canonical_pair).collect();
                if reps.iter().any(|x| x.im.abs() >= im_t) {
                    out.outside_domain += 1;
                    continue;
                }
                let mut roots = expand(&reps, center);
                if collides(&roots) {
                    out.collisions += 1;
                    continue;
                }
                roots.iter_mut().for_each(|z| *z = C::new(z.re.rem_euclid(2.0), z.im));
                if out.solutions.iter().any(|s| same_set(&s.roots, &roots)) {
                    continue;
                }
                out.solutions.push(SectorSolution { roots, reduced_residual: res, path });
            }
        }
    }
    out
}

/// Residual report of the additive TQ equation for the factorised 𝒬.
#[derive(Debug, Clone, Serialize)]
pub struct TqCheck {
    pub transfer: TransferPolynomial,
    /// Spread of the coefficient symmetrisation inside the fit.
    pub fit_deviation: f64,
    /// Largest relative |t_fit − t_sampled| at points not used for the fit.
    pub fresh_point_residual: f64,
    /// max |𝒬(x + 2) − 𝒬(x)|/|𝒬(x)|.
    pub periodicity: f64,
}

/// Each report on a distinct pair of sector solutions.
#[derive(Debug, Clone, Serialize)]
pub struct BetheBranch {
    pub roots: BetheRoots,
    pub residual: f64,
    pub negation_defect: f64,
    pub q_check: Option<TqCheck>,
    pub q_check_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BetheReport {
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub n_sites: usize,
    pub tau: C,
    pub eta: C,
    pub locus_defect: f64,
    pub tau_search: SectorSearch,
    pub eta_search: SectorSearch,
    pub branches: Vec<BetheBranch>,
    pub options: BetheOptions,
    pub policy: Context,
}

impl BetheReport {
    /// Branches whose factorised 𝒬 passes the TQ check at fresh points.
    pub fn valid_branches(&self, tol: f64) -> impl Iterator<Item = &BetheBranch> {
        self.branches
            .iter()
            .filter(move |b| b.q_check.as_ref().is_some_and(|c| c.fresh_point_residual < tol))
    }
}

/// Enumerates solutions of both sectors from seeded starting points, combines
/// them and checks every combination against the TQ equation.
pub fn bethe_solve(spin: SpinSet, n_sites: usize, tau: C, eta: C, opts: &BetheOptions, ctx: &Context) -> Result<BetheReport> {
    if n_sites == 0 || spin.m * n_sites > MAX_ROOTS || spin.n * n_sites > MAX_ROOTS {
        return Err(Error::Config(format!(
            "need N ≥ 1 and at most {MAX_ROOTS} roots per sector (mN = {}, nN = {})",
            spin.m * n_sites,
            spin.n * n_sites
        )));
    }
    if tau.im <= 0.0 || eta.im <= 0.0 {
        return Err(Error::Domain("τ and η need positive imaginary parts".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ts = sector_spec(Sector::Tau, spin, n_sites, tau, eta);
    let es = sector_spec(Sector::Eta, spin, n_sites, tau, eta);
    let tau_search = solve_sector(&ts, n_sites, opts, &mut rng, ctx);
    let eta_search = solve_sector(&es, n_sites, opts, &mut rng, ctx);
    for (s, search) in [(&ts, &tau_search), (&es, &eta_search)] {
        if search.solutions.is_empty() {
            if search.collisions > 0 {
                return Err(Error::Degeneracy(format!("every converged solution of a sector with {} roots has colliding roots", s.count)));
            }
            return Err(Error::Convergence { what: "bethe_solve", iterations: search.attempts, residual: f64::INFINITY });
        }
    }
    let mut branches = Vec::new();
    for a in &tau_search.solutions {
        for b in &eta_search.solutions {
            let roots = BetheRoots { tau_roots: a.roots.clone(), eta_roots: b.roots.clone() };
            let residual = unreduced_residual(&roots, spin, n_sites, tau, eta, ctx)?;
            let (q_check, q_check_error) = match q_factorized_tq_check(&roots, spin, n_sites, tau, eta, ctx) {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            branches.push(BetheBranch { negation_defect: roots.negation_defect(), roots, residual, q_check, q_check_error });
        }
    }
    Ok(BetheReport {
        m: spin.m,
        n: spin.n,
        n_sites,
        tau,
        eta,
        locus_defect: spin.locus_defect(tau, eta),
        tau_search,
        eta_search,
        branches,
        options: opts.clone(),
        policy: *ctx,
    })
}

/// A(x)A'(x) + B(x)B'(x) with B(x) = A(x + 1), B'(x) = A'(x + 1).
#[derive(Debug, Clone, Serialize)]
pub struct FactorizedQ {
    pub roots: BetheRoots,
    pub tau: C,
    pub eta: C,
}

impl FactorizedQ {
    fn product(roots: &[C], x: C, period: C, ctx: &Context) -> Result<C> {
        roots.iter().try_fold(C::new(1.0, 0.0), |acc, &r| Ok(acc * theta(ThetaKind::Four, 0.5 * (x - r), 0.5 * period, ctx)?))
    }

    pub fn a(&self, x: C, ctx: &Context) -> Result<C> {
        Self::product(&self.roots.tau_roots, x, self.tau, ctx)
    }

    pub fn a_prime(&self, x: C, ctx: &Context) -> Result<C> {
        Self::product(&self.roots.eta_roots, x, self.eta, ctx)
    }

    pub fn eval(&self, x: C, ctx: &Context) -> Result<C> {
        let one = C::new(1.0, 0.0);
        Ok(self.a(x, ctx)? * self.a_prime(x, ctx)? + self.a(x + one, ctx)? * self.a_prime(x + one, ctx)?)
    }
}

const FIT_POINTS: [(f64, f64); 6] = [(0.11, 0.05), (0.37, -0.02), (0.53, 0.08), (0.71, -0.06), (0.19, -0.09), (0.87, 0.03)];
const FRESH_POINTS: [(f64, f64); 4] = [(0.23, 0.01), (-0.31, 0.07), (0.61, -0.04), (0.44, 0.11)];

/// t_q(u) read off the additive TQ equation for a given 𝒬:
/// [θ₁(x+y)^N 𝒬(x+η) + θ₁(x−y)^N 𝒬(x−η)] / 𝒬(x) divided by the factor that
/// turns θ₁(x+y)^N into h(uv; q)^N.
fn sampled_t(qf: &FactorizedQ, x: C, y: C, n_sites: usize, ctx: &Context) -> Result<C> {
    let ni = n_sites as i32;
    let (tau, eta) = (qf.tau, qf.eta);
    let rhs = theta1(x + y, tau, ctx)?.powi(ni) * qf.eval(x + eta, ctx)? + theta1(x - y, tau, ctx)?.powi(ni) * qf.eval(x - eta, ctx)?;
    let qx = qf.eval(x, ctx)?;
    if qx.norm() == 0.0 {
        return Err(Error::Pole { function: "sampled_t", m: 0, n: 0 });
    }
    Ok(rhs / qx / theta_to_h_factor(x + y, tau, ctx)?.powi(ni))
}

/// Extracts t from the TQ equation at N fit points, fits it in the basis
/// h(ωᵏu; q)^N, and measures the mismatch at fresh points.
pub fn q_factorized_tq_check(roots: &BetheRoots, spin: SpinSet, n_sites: usize, tau: C, eta: C, ctx: &Context) -> Result<TqCheck> {
    let y = spin.y(tau, eta);
    let q = expi2pi(tau);
    let qf = FactorizedQ { roots: roots.clone(), tau, eta };
    let count = n_sites.max(n_sites / 2 + 1);
    if count > FIT_POINTS.len() {
        return Err(Error::Config(format!("TQ check supports N ≤ {}", FIT_POINTS.len())));
    }
    let samples: Vec<(C, C)> = FIT_POINTS[..count]
        .iter()
        .map(|&(a, b)| {
            let x = C::new(a, b);
            Ok((expi2pi(x), sampled_t(&qf, x, y, n_sites, ctx)?))
        })
        .collect::<Result<_>>()?;
    let (transfer, fit_deviation) =
        t_decompose(&samples, q, n_sites, ctx).map_err(|e| Error::InvalidSolution(format!("t is not in the polynomial basis: {e}")))?;
    let mut fresh = 0.0f64;
    let mut periodicity = 0.0f64;
    for &(a, b) in &FRESH_POINTS {
        let x = C::new(a, b);
        let t = transfer.eval(expi2pi(x), q, ctx)?;
        let s = sampled_t(&qf, x, y, n_sites, ctx)?;
        fresh = fresh.max((t - s).norm() / t.norm().max(s.norm()));
        let qx = qf.eval(x, ctx)?;
        periodicity = periodicity.max((qf.eval(x + 2.0, ctx)? - qx).norm() / qx.norm());
    }
    Ok(TqCheck { transfer, fit_deviation, fresh_point_residual: fresh, periodicity })
}

/// Behaviour of R(u) at the points where the numerator Γ(1/(uv)) has poles.
#[derive(Debug, Clone, Serialize)]
pub struct PoleCancellation {
    /// max |R(u₀(1+ε))| / |R(u₀(1+10³ε))| over the probed poles u₀ at the spin
    /// value of v; stays O(1) when the poles cancel.
    pub at_spin_set: f64,
    /// The same probe with v moved off the spin set; grows like 10³ at a pole.
    pub generic: f64,
}

pub fn r_pole_cancellation(spin: SpinSet, n_sites: usize, tau: C, eta: C, ctx: &Context) -> Result<PoleCancellation> {
    let probe = |v: C| -> Result<f64> {
        let (p, q) = (expi2pi(eta), expi2pi(tau));
        let md = ModularData::from_multiplicative(C::new(1.0, 0.0), v, q, p)?;
        let mut worst = 0.0f64;
        for (i, j) in [(0, 0), (1, 0), (0, 1)] {
            let u0 = p.powi(i) * q.powi(j) / v;
            let near = liouville_r(u0 * (1.0 + 1e-7), &md, n_sites, C::new(1.0, 0.0), ctx)?;
            let far = liouville_r(u0 * (1.0 + 1e-4), &md, n_sites, C::new(1.0, 0.0), ctx)?;
            worst = worst.max(near.norm() / far.norm());
        }
        Ok(worst)
    };
    let v = spin.v(tau, eta);
    Ok(PoleCancellation { at_spin_set: probe(v)?, generic: probe(v * expi2pi(C::new(0.0137, 0.0)))? })
}

/// Proportionality of 𝒬 to e^{iπsx} ∏_{j=1}^{N/2} θ₁(x − ξ_j | τ).
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub xi: Vec<C>,
    /// max |𝒬(ξ_j)| / max |𝒬| over the sample points.
    pub zero_residual: f64,
    pub s: i32,
    pub constant: C,
    /// Relative spread of the pointwise ratio for the fitted s.
    pub gauge_deviation: f64,
    /// The same spread with s = 0.
    pub literal_deviation: f64,
}

const RATIO_POINTS: [(f64, f64); 6] = [(0.1, 0.02), (0.33, -0.1), (0.7, 0.2), (0.9, -0.05), (1.37, 0.12), (-0.42, 0.07)];

fn ratio_spread(qf: &FactorizedQ, xi: &[C], s: i32, ctx: &Context) -> Result<(f64, C)> {
    let ratios: Vec<C> = RATIO_POINTS
        .iter()
        .map(|&(a, b)| {
            let x = C::new(a, b);
            let mut den = (C::new(0.0, std::f64::consts::PI * s as f64) * x).exp();
            for &z in xi {
                den *= theta1(x - z, qf.tau, ctx)?;
            }
            Ok(qf.eval(x, ctx)? / den)
        })
        .collect::<Result<_>>()?;
    let mean = ratios.iter().sum::<C>() / ratios.len() as f64;
    Ok((ratios.iter().map(|r| (r / mean - 1.0).norm()).fold(0.0, f64::max), mean))
}

/// Fits 𝒬 from the n = 0, m = 1 roots to the θ₁-product form. The ξ_j are the
/// zeros of 𝒬 in the cell spanned by 1 and τ, located by Newton from a grid.
pub fn q_equivalence_baxter(roots: &BetheRoots, n_sites: usize, tau: C, eta: C, ctx: &Context) -> Result<EquivalenceReport> {
    if n_sites % 2 == 1 || !roots.eta_roots.is_empty() || roots.tau_roots.len() != n_sites {
        return Err(Error::Config("the θ₁-product form needs n = 0, m = 1 and even N".into()));
    }
    let qf = FactorizedQ { roots: roots.clone(), tau, eta };
    let want = n_sites / 2;
    let scale = RATIO_POINTS
        .iter()
        .map(|&(a, b)| qf.eval(C::new(a, b), ctx).map(|z| z.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut xi: Vec<C> = Vec::new();
    let reduce = |z: C| {
        let k = (z.im / tau.im).floor();
        let z = z - k * tau;
        C::new(z.re.rem_euclid(1.0), z.im)
    };
    let h = 1e-6;
    'grid: for i in 0..6 {
        for j in 0..6 {
            let mut z = (i as f64 + 0.5) / 6.0 + tau * ((j as f64 + 0.5) / 6.0);
            for _ in 0..60 {
                let f = qf.eval(z, ctx)?;
                let d = (qf.eval(z + h, ctx)? - qf.eval(z - h, ctx)?) / (2.0 * h);
                if d.norm() == 0.0 {
                    break;
                }
                let step = f / d;
                z -= step;
                if step.norm() < 1e-14 {
                    break;
                }
            }
            if qf.eval(z, ctx)?.norm() > 1e-10 * scale {
                continue;
            }
            let z = reduce(z);
            let dup = xi.iter().any(|&w| {
                let d = z - w;
                let d = d - (d.im / tau.im).round() * tau;
                (d.re - d.re.round()).abs() < 1e-7 && d.im.abs() < 1e-7
            });
            if !dup {
                xi.push(z);
                if xi.len() == want {
                    break 'grid;
                }
            }
        }
    }
    if xi.len() != want {
        return Err(Error::InvalidSolution(format!("found {} zeros of Q per cell, expected {want}", xi.len())));
    }
    let zero_residual = xi.iter().map(|&z| qf.eval(z, ctx).map(|v| v.norm() / scale)).collect::<Result<Vec<_>>>()?.into_iter().fold(0.0, f64::max);
    let (literal_deviation, _) = ratio_spread(&qf, &xi, 0, ctx)?;
    let mut best = (f64::INFINITY, 0, C::new(0.0, 0.0));
    let bound = 2 * n_sites as i32;
    for s in -bound..=bound {
        let (dev, c) = ratio_spread(&qf, &xi, s, ctx)?;
        if dev < best.0 {
            best = (dev, s, c);
        }
    }
    Ok(EquivalenceReport { xi, zero_residual, s: best.1, constant: best.2, gauge_deviation: best.0, literal_deviation })
}
