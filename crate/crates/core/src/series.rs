//! Truncated Laurent series in (p, q, u) with numeric coefficients.
//!
//! A term c·p^a q^b u^k is stored under the key (a, b, k). The grading used
//! throughout is the total degree a + b, which is the ε-order of the
//! substitution p → εp, q → εq. Negative exponents are allowed in every slot.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

type C = Complex64;

pub type Key = (i32, i32, i32);

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Series {
    terms: BTreeMap<Key, C>,
}

impl Serialize for Series {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<(i32, i32, i32, C)> = self.sorted_terms().into_iter().map(|((a, b, k), c)| (a, b, k, c)).collect();
        rows.serialize(s)
    }
}

pub fn degree(key: &Key) -> i32 {
    key.0 + key.1
}

impl Series {
    pub fn zero() -> Self {
        Series::default()
    }

    pub fn one() -> Self {
        Series::monomial((0, 0, 0), C::new(1.0, 0.0))
    }

    pub fn monomial(key: Key, c: C) -> Self {
        let mut s = Series::zero();
        s.add_term(key, c);
        s
    }

    /// 1 + c·p^a q^b u^k.
    pub fn one_plus(c: C, key: Key) -> Self {
        let mut s = Series::one();
        s.add_term(key, c);
        s
    }

    pub fn add_term(&mut self, key: Key, c: C) {
        *self.terms.entry(key).or_insert(C::new(0.0, 0.0)) += c;
    }

    pub fn get(&self, key: &Key) -> C {
        self.terms.get(key).copied().unwrap_or(C::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &C)> {
        self.terms.iter()
    }

    /// Terms in a fixed order, for reproducible output.
    pub fn sorted_terms(&self) -> Vec<(Key, C)> {
        let mut v: Vec<(Key, C)> = self.terms.iter().map(|(k, c)| (*k, *c)).collect();
        v.sort_by_key(|(k, _)| (degree(k), k.0, k.1, k.2));
        v
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms
            .iter()
            .filter(|(_, c)| c.norm() > 0.0)
            .map(|(k, _)| degree(k))
            .min()
    }

    /// Drops coefficients with modulus at or below `tol`.
    pub fn prune(&mut self, tol: f64) {
        self.terms.retain(|_, c| c.norm() > tol);
    }

    pub fn scale(&self, s: C) -> Series {
        Series {
            terms: self.terms.iter().map(|(k, c)| (*k, c * s)).collect(),
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(*k, *c);
        }
        out
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.add(&other.scale(C::new(-1.0, 0.0)))
    }

    /// The substitution u → p^{sp} q^{sq} u.
    pub fn shift(&self, sp: i32, sq: i32) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .map(|(&(a, b, k), c)| ((a + sp * k, b + sq * k, k), *c))
                .collect(),
        }
    }

    /// Exchange of p and q.
    pub fn swap_pq(&self) -> Series {
        Series {
            terms: self.terms.iter().map(|(&(a, b, k), c)| ((b, a, k), *c)).collect(),
        }
    }

    /// Terms of total degree at most `max_degree`.
    pub fn truncated(&self, max_degree: i32) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| degree(k) <= max_degree)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    /// Terms of total degree exactly `d`.
    pub fn degree_part(&self, d: i32) -> Series {
        Series {
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| degree(k) == d)
                .map(|(k, c)| (*k, *c))
                .collect(),
        }
    }

    /// Product keeping only terms of total degree ≤ `max_degree`.
    pub fn mul_trunc(&self, other: &Series, max_degree: i32) -> Series {
        let mut out = Series::zero();
        let ob = Buckets::new(other);
        for (&(a, b, k), x) in &self.terms {
            let d = a + b;
            for terms in ob.by_degree.range(..=max_degree - d).map(|(_, t)| t) {
                for &((a2, b2, k2), y) in terms {
                    out.add_term((a + a2, b + b2, k + k2), x * y);
                }
            }
        }
        out
    }

    pub fn pow_trunc(&self, n: usize, max_degree: i32) -> Series {
        (0..n).fold(Series::one(), |acc, _| acc.mul_trunc(self, max_degree))
    }

    /// Numerical value at given p, q, u.
    pub fn eval(&self, p: C, q: C, u: C) -> C {
        self.sorted_terms()
            .into_iter()
            .map(|((a, b, k), c)| c * p.powi(a) * q.powi(b) * u.powi(k))
            .sum()
    }

    /// Coefficients grouped by their (p, q) monomial, as Laurent polynomials in u.
    pub fn by_pq(&self) -> BTreeMap<(i32, i32), BTreeMap<i32, C>> {
        let mut out: BTreeMap<(i32, i32), BTreeMap<i32, C>> = BTreeMap::new();
        for (&(a, b, k), c) in &self.terms {
            *out.entry((a, b)).or_default().entry(k).or_insert(C::new(0.0, 0.0)) += c;
        }
        out
    }

    /// Largest coefficient modulus among terms of total degree `d`.
    pub fn max_at_degree(&self, d: i32) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| degree(k) == d)
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max)
    }
}

/// A series' terms bucketed by total degree, for products restricted to one degree.
#[derive(Debug, Clone, Default)]
pub struct Buckets {
    pub by_degree: BTreeMap<i32, Vec<(Key, C)>>,
}

impl Buckets {
    pub fn new(s: &Series) -> Self {
        let mut by_degree: BTreeMap<i32, Vec<(Key, C)>> = BTreeMap::new();
        for (k, c) in s.sorted_terms() {
            by_degree.entry(degree(&k)).or_default().push((k, c));
        }
        Buckets { by_degree }
    }

    pub fn at(&self, d: i32) -> &[(Key, C)] {
        self.by_degree.get(&d).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// The degree-`d` part of the product of two bucketed series.
    pub fn product_at(&self, other: &Buckets, d: i32, out: &mut Series, scale: C) {
        for (&da, ta) in &self.by_degree {
            let tb = other.at(d - da);
            for &((a, b, k), x) in ta {
                for &((a2, b2, k2), y) in tb {
                    out.add_term((a + a2, b + b2, k + k2), x * y * scale);
                }
            }
        }
    }

    /// The degree-`d` part of (monomial c·p^a q^b u^k) × self, accumulated into `out`.
    pub fn monomial_product_at(&self, key: Key, c: C, d: i32, out: &mut Series) {
        for &((a2, b2, k2), y) in self.at(d - degree(&key)) {
            out.add_term((key.0 + a2, key.1 + b2, key.2 + k2), c * y);
        }
    }
}

/// (c·p^{a0} q^{b0} u^{k0}; p, q)_∞ truncated at total degree `max_degree`.
pub fn double_pochhammer(c: C, a0: i32, b0: i32, k0: i32, max_degree: i32) -> Series {
    let mut out = Series::one();
    for i in 0..=(max_degree - a0 - b0).max(-1) {
        for j in 0..=(max_degree - a0 - b0 - i) {
            let f = Series::one_plus(-c, (a0 + i, b0 + j, k0));
            out = out.mul_trunc(&f, max_degree);
        }
    }
    out
}

/// (c·p^{a0} q^{b0} u^{k0}; q)_∞ truncated at total degree `max_degree`.
pub fn q_pochhammer(c: C, a0: i32, b0: i32, k0: i32, max_degree: i32) -> Series {
    let mut out = Series::one();
    for j in 0..=(max_degree - a0 - b0).max(-1) {
        let f = Series::one_plus(-c, (a0, b0 + j, k0));
        out = out.mul_trunc(&f, max_degree);
    }
    out
}

/// 1/(c·p^{a0} q^{b0} u^{k0}; q)_∞ truncated at total degree `max_degree`;
/// requires a0 + b0 ≥ 1 so each geometric factor is a power series.
pub fn q_pochhammer_inverse(c: C, a0: i32, b0: i32, k0: i32, max_degree: i32) -> Series {
    assert!(a0 + b0 >= 1, "inverse Pochhammer needs a positive-degree argument");
    let mut out = Series::one();
    for j in 0..=(max_degree - a0 - b0).max(-1) {
        let step = a0 + b0 + j;
        let mut geo = Series::one();
        let mut power = 1;
        while power * step <= max_degree {
            geo.add_term((power * a0, power * (b0 + j), power * k0), c.powi(power));
            power += 1;
        }
        out = out.mul_trunc(&geo, max_degree);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn shift_and_eval_agree() {
        let mut s = Series::zero();
        s.add_term((1, 0, 2), c(0.5));
        s.add_term((0, 2, -1), c(-1.5));
        let (p, q, u) = (C::new(0.1, 0.02), C::new(0.2, -0.01), C::new(0.8, 0.3));
        let lhs = s.shift(1, 1).eval(p, q, u);
        let rhs = s.eval(p, q, p * q * u);
        assert!((lhs - rhs).norm() < 1e-15);
    }

    #[test]
    fn pochhammer_matches_product_numerically() {
        let (p, q, u) = (c(0.01), c(0.02), c(0.7));
        let s = double_pochhammer(c(1.0), 0, 0, 1, 12);
        let ctx = crate::precision::Context::double();
        let exact = crate::elliptic::qpoch2(u, p, q, &ctx).unwrap();
        assert!((s.eval(p, q, u) - exact).norm() < 1e-12);
    }

    #[test]
    fn inverse_pochhammer() {
        let d = 10;
        let a = q_pochhammer(c(0.7), 0, 1, -1, d);
        let b = q_pochhammer_inverse(c(0.7), 0, 1, -1, d);
        let prod = a.mul_trunc(&b, d);
        for (k, v) in prod.iter() {
            let target = if *k == (0, 0, 0) { 1.0 } else { 0.0 };
            assert!((v - target).norm() < 1e-13, "{k:?} {v}");
        }
    }

    #[test]
    fn degree_restricted_product() {
        let mut a = Series::zero();
        a.add_term((0, 0, 0), c(1.0));
        a.add_term((1, 0, 1), c(2.0));
        a.add_term((-1, 0, -1), c(3.0));
        let full = a.mul_trunc(&a, 4);
        let ba = Buckets::new(&a);
        for d in -2..=2 {
            let mut part = Series::zero();
            ba.product_at(&ba, d, &mut part, c(1.0));
            for (k, v) in full.degree_part(d).iter() {
                assert!((part.get(k) - v).norm() < 1e-15);
            }
        }
    }
}
