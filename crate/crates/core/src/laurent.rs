//! Functions invariant under u → 1/u, stored as c₀ + Σ_{k=1}^{K} c_k (u^k + u^{−k}).

use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

type C = Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricLaurent {
    /// c₀..c_K.
    pub coeffs: Vec<C>,
    /// Set when an operation dropped modes above K.
    pub truncated: bool,
}

/// Written as {"K", "coeffs": [[re, im], ...], "truncated"}.
impl Serialize for SymmetricLaurent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        let mut st = s.serialize_struct("SymmetricLaurent", 3)?;
        st.serialize_field("K", &self.order())?;
        st.serialize_field("coeffs", &pairs)?;
        st.serialize_field("truncated", &self.truncated)?;
        st.end()
    }
}

impl SymmetricLaurent {
    pub fn new(coeffs: Vec<C>) -> Self {
        SymmetricLaurent {
            coeffs,
            truncated: false,
        }
    }

    pub fn zero(k: usize) -> Self {
        SymmetricLaurent::new(vec![C::new(0.0, 0.0); k + 1])
    }

    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, u: C) -> C {
        let inv = 1.0 / u;
        let (mut up, mut dn) = (C::new(1.0, 0.0), C::new(1.0, 0.0));
        let mut acc = self.coeffs.first().copied().unwrap_or_default();
        for c in self.coeffs.iter().skip(1) {
            up *= u;
            dn *= inv;
            acc += c * (up + dn);
        }
        acc
    }

    /// f(s·u). The rescaled function is no longer inversion-symmetric, so it is
    /// evaluated directly rather than stored.
    pub fn eval_scaled(&self, s: C, u: C) -> C {
        self.eval(s * u)
    }

    pub fn add(&self, other: &SymmetricLaurent) -> SymmetricLaurent {
        let k = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..k)
            .map(|i| self.coeffs.get(i).copied().unwrap_or_default() + other.coeffs.get(i).copied().unwrap_or_default())
            .collect();
        SymmetricLaurent {
            coeffs,
            truncated: self.truncated || other.truncated,
        }
    }

    /// Product truncated at the larger of the two orders.
    pub fn mul(&self, other: &SymmetricLaurent) -> SymmetricLaurent {
        let k = self.order().max(other.order()) as i64;
        let full = |s: &SymmetricLaurent, j: i64| -> C { s.coeffs.get(j.unsigned_abs() as usize).copied().unwrap_or_default() };
        let (ka, kb) = (self.order() as i64, other.order() as i64);
        let mut out = vec![C::new(0.0, 0.0); k as usize + 1];
        let mut dropped = false;
        for i in -ka..=ka {
            for j in -kb..=kb {
                let prod = full(self, i) * full(other, j);
                let s = i + j;
                if s.abs() > k {
                    dropped |= prod.norm() > 0.0;
                } else if s >= 0 {
                    out[s as usize] += prod;
                }
            }
        }
        SymmetricLaurent {
            coeffs: out,
            truncated: self.truncated || other.truncated || dropped,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_by_construction() {
        let f = SymmetricLaurent::new(vec![C::new(1.0, 0.0), C::new(0.3, 0.1), C::new(-0.2, 0.0)]);
        let u = C::new(0.7, 0.4);
        assert!((f.eval(u) - f.eval(1.0 / u)).norm() < 1e-14);
    }

    #[test]
    fn product_matches_pointwise_and_flags_truncation() {
        let f = SymmetricLaurent::new(vec![C::new(1.0, 0.0), C::new(0.5, 0.0)]);
        let g = f.mul(&f);
        assert!(g.truncated);
        let exact = SymmetricLaurent::new(vec![C::new(1.0, 0.0), C::new(0.5, 0.0), C::new(0.0, 0.0)]);
        let h = exact.mul(&exact);
        assert!(!h.truncated);
        let u = C::new(1.3, -0.2);
        assert!((h.eval(u) - f.eval(u) * f.eval(u)).norm() < 1e-13);
    }
}
