//! The p, q → 0 limit of the spectral problem: the polynomial G_m, its root
//! pairs ξ ↔ 1/ξ, the split of the pairs between P_m and H, and the tropical
//! TQ identity t(u) P_m(u) = (1 − uv)^N u^{−m} + (v − u)^N u^m.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly;

type C = Complex64;

const PAIRING_TOL: f64 = 1e-8;
const COLLISION_TOL: f64 = 1e-7;
const UNIT_ROOT_TOL: f64 = 1e-8;

/// Coefficients (ascending) of u^{m+N} G_m(u) = u^{2m}(u − v)^N + v^N (u − 1/v)^N.
pub fn g_polynomial(m: usize, n: usize, v: C) -> Result<Vec<C>> {
    if n == 0 {
        return Err(Error::Config("N must be at least 1".into()));
    }
    if v.norm() == 0.0 {
        return Err(Error::Domain("v must be nonzero".into()));
    }
    let mut first = vec![C::new(0.0, 0.0); 2 * m];
    first.extend(poly::linear_power(-v, C::new(1.0, 0.0), n));
    let second = poly::scale(&poly::linear_power(-1.0 / v, C::new(1.0, 0.0), n), v.powu(n as u32));
    Ok(poly::add(&first, &second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootPair {
    /// Representative with |ξ| ≥ 1.
    pub xi: C,
    pub mate: C,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub pairs: Vec<RootPair>,
    /// Whether u = 1 is a root (odd N).
    pub unit_root: bool,
}

fn canonical_key(z: C) -> (f64, f64) {
    (z.norm(), z.arg())
}

/// All roots of a polynomial: companion-matrix eigenvalues, then Newton
/// refinement at 128 bits.
pub fn polynomial_roots(coeffs: &[C]) -> Result<Vec<C>> {
    let mut cs = coeffs.to_vec();
    while cs.last().is_some_and(|c| c.norm() == 0.0) {
        cs.pop();
    }
    let deg = cs.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = cs[deg];
    let mut comp = DMatrix::<C>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = C::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -cs[i] / lead;
    }
    let eig = comp
        .schur()
        .eigenvalues()
        .ok_or_else(|| Error::Degeneracy("Schur decomposition did not triangularise".into()))?;
    Ok(eig.iter().map(|z| poly::newton_polish(&cs, *z, 128, 60)).collect())
}

/// Roots of u^{m+N} G_m, paired as (ξ, 1/ξ), plus the root u = 1 for odd N.
pub fn find_root_pairs(coeffs: &[C], odd_n: bool) -> Result<RootSet> {
    let mut roots = polynomial_roots(coeffs)?;
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            let scale = 1.0f64.max(roots[i].norm());
            if (roots[i] - roots[j]).norm() < COLLISION_TOL * scale {
                return Err(Error::Degeneracy(format!(
                    "roots {} and {} collide; perturb v",
                    roots[i], roots[j]
                )));
            }
        }
    }
    let mut unit_root = false;
    if odd_n {
        let pos = roots
            .iter()
            .position(|z| (z - 1.0).norm() < UNIT_ROOT_TOL)
            .ok_or_else(|| Error::Classification("odd N but u = 1 is not a root".into()))?;
        roots.remove(pos);
        unit_root = true;
    }
    roots.sort_by(|a, b| {
        let (ka, kb) = (canonical_key(*a), canonical_key(*b));
        kb.0.total_cmp(&ka.0).then(kb.1.total_cmp(&ka.1))
    });
    let mut pairs = Vec::new();
    while let Some(z) = (!roots.is_empty()).then(|| roots.remove(0)) {
        let (j, mismatch) = roots
            .iter()
            .enumerate()
            .map(|(j, w)| (j, (z * w - 1.0).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .ok_or_else(|| Error::Pairing {
                root: format!("{z}"),
                mismatch: f64::INFINITY,
            })?;
        if mismatch > PAIRING_TOL {
            return Err(Error::Pairing {
                root: format!("{z}"),
                mismatch,
            });
        }
        let w = roots.remove(j);
        let (kz, kw) = (canonical_key(z), canonical_key(w));
        let z_first = kz.0 > kw.0 + 1e-12 || ((kz.0 - kw.0).abs() <= 1e-12 && kz.1 >= kw.1);
        let (xi, mate) = if z_first { (z, w) } else { (w, z) };
        pairs.push(RootPair { xi, mate });
    }
    pairs.sort_by(|a, b| {
        let (ka, kb) = (canonical_key(a.xi), canonical_key(b.xi));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    Ok(RootSet { pairs, unit_root })
}

/// A tropical eigenstate: which root pairs go into P_m and which into H.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralState {
    pub n: usize,
    pub m: usize,
    pub v: C,
    pub p_indices: Vec<usize>,
    pub pairs_p: Vec<RootPair>,
    pub pairs_h: Vec<RootPair>,
    pub unit_root: bool,
}

impl SpectralState {
    /// The ground state (m = 0) at given N and v.
    pub fn ground(n: usize, v: C) -> Result<SpectralState> {
        enumerate_states(n, 0, v)?
            .into_iter()
            .next()
            .ok_or_else(|| Error::Classification("no ground state".into()))
    }

    /// Coefficients of u^m P_m(u) = Π_P (u − ξ)(u − 1/ξ), ascending; index k
    /// is the coefficient of u^{k−m} in P_m.
    pub fn p_polynomial(&self) -> Vec<C> {
        let roots: Vec<C> = self.pairs_p.iter().flat_map(|p| [p.xi, p.mate]).collect();
        poly::from_roots(&roots)
    }

    /// Coefficients of u^N H^{(0)}(u), ascending.
    pub fn h_polynomial(&self) -> Vec<C> {
        let mut roots: Vec<C> = self.pairs_h.iter().flat_map(|p| [p.xi, p.mate]).collect();
        if self.unit_root {
            roots.push(C::new(1.0, 0.0));
        }
        poly::from_roots(&roots)
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Every split of the root pairs into m for P_m and the rest for H, in lexicographic
/// order of the P indices.
pub fn enumerate_states(n: usize, m: usize, v: C) -> Result<Vec<SpectralState>> {
    let roots = find_root_pairs(&g_polynomial(m, n, v)?, n % 2 == 1)?;
    let expected = m + n / 2;
    if roots.pairs.len() != expected {
        return Err(Error::Classification(format!(
            "found {} root pairs, expected {expected}",
            roots.pairs.len()
        )));
    }
    Ok(combinations(expected, m)
        .into_iter()
        .map(|idx| {
            let pairs_p = idx.iter().map(|&i| roots.pairs[i]).collect();
            let pairs_h = (0..expected)
                .filter(|i| !idx.contains(i))
                .map(|i| roots.pairs[i])
                .collect();
            SpectralState {
                n,
                m,
                v,
                p_indices: idx,
                pairs_p,
                pairs_h,
                unit_root: roots.unit_root,
            }
        })
        .collect())
}

/// t^{(−m)}(u) = (−u)^N G_m(u)/P_m(u) as ascending polynomial coefficients
/// (degree N), by exact division.
pub fn tropical_t(state: &SpectralState) -> Result<Vec<C>> {
    let g = g_polynomial(state.m, state.n, state.v)?;
    let sign = if state.n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let num = poly::scale(&g, C::new(sign, 0.0));
    let (quot, rem) = poly::divrem(&num, &state.p_polynomial());
    let gnorm = g.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let worst = rem.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if worst > 1e-10 * gnorm {
        return Err(Error::Classification(format!(
            "division of G_m by P_m leaves remainder {worst:e}"
        )));
    }
    Ok(quot)
}

/// t(u) P_m(u) − (1 − uv)^N u^{−m} − (v − u)^N u^m.
pub fn tropical_tq_residual(state: &SpectralState, t: &[C], u: C) -> C {
    let (n, m, v) = (state.n as u32, state.m as i32, state.v);
    let p = poly::eval(&state.p_polynomial(), u) * u.powi(-m);
    poly::eval(t, u) * p - (1.0 - u * v).powu(n) * u.powi(-m) - (v - u).powu(n) * u.powi(m)
}

/// (−u)^N G_m(u) − (1 − uv)^N u^{−m} − (v − u)^N u^m from the expanded polynomial.
pub fn g_identity_residual(m: usize, n: usize, v: C, u: C) -> Result<C> {
    let g = poly::eval(&g_polynomial(m, n, v)?, u) * u.powi(-((m + n) as i32));
    let lhs = (-u).powu(n as u32) * g;
    Ok(lhs - (1.0 - u * v).powu(n as u32) * u.powi(-(m as i32)) - (v - u).powu(n as u32) * u.powi(m as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn quadratic_case_matches_formula() {
        // N = 2, m = 0: (u − v)² + v²(u − 1/v)² is a quadratic
        let v = 0.5;
        let g = g_polynomial(0, 2, c(v)).unwrap();
        let (a, b, cc) = (g[2], g[1], g[0]);
        let disc = (b * b - a * cc * 4.0).sqrt();
        let r1 = (-b + disc) / (a * 2.0);
        let set = find_root_pairs(&g, false).unwrap();
        assert_eq!(set.pairs.len(), 1);
        let p = set.pairs[0];
        assert!((p.xi - r1).norm() < 1e-14 || (p.mate - r1).norm() < 1e-14);
    }

    #[test]
    fn odd_n_has_unit_root() {
        let g = g_polynomial(1, 3, c(0.5)).unwrap();
        assert!(poly::eval(&g, c(1.0)).norm() < 1e-14);
        let set = find_root_pairs(&g, true).unwrap();
        assert!(set.unit_root);
        assert_eq!(set.pairs.len(), 2);
    }

    #[test]
    fn state_counts() {
        assert_eq!(enumerate_states(2, 0, c(0.5)).unwrap().len(), 1);
        assert_eq!(enumerate_states(2, 1, c(0.5)).unwrap().len(), 2);
        assert_eq!(enumerate_states(4, 2, c(0.5)).unwrap().len(), 6);
    }

    #[test]
    fn ground_tropical_t() {
        let st = SpectralState::ground(3, c(0.4)).unwrap();
        let t = tropical_t(&st).unwrap();
        let direct = poly::add(&poly::linear_power(c(1.0), c(-0.4), 3), &poly::linear_power(c(0.4), c(-1.0), 3));
        for (a, b) in t.iter().zip(&direct) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn p_polynomial_is_palindromic_monic() {
        for st in enumerate_states(4, 2, c(0.5)).unwrap() {
            let p = st.p_polynomial();
            assert!((p[0] - 1.0).norm() < 1e-12 && (p[4] - 1.0).norm() < 1e-12);
            assert!((p[1] - p[3]).norm() < 1e-10);
        }
    }
}
