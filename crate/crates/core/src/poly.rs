//! Dense complex polynomials with ascending coefficients.

use num_complex::Complex64;

use crate::scalar::{MpComplex, Scalar};

type C = Complex64;

pub fn eval(coeffs: &[C], u: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, c| acc * u + c)
}

pub fn mul(a: &[C], b: &[C]) -> Vec<C> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn add(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

pub fn scale(a: &[C], s: C) -> Vec<C> {
    a.iter().map(|x| x * s).collect()
}

/// (c₀ + c₁u)^n.
pub fn linear_power(c0: C, c1: C, n: usize) -> Vec<C> {
    (0..n).fold(vec![C::new(1.0, 0.0)], |acc, _| mul(&acc, &[c0, c1]))
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C]) -> Vec<C> {
    roots
        .iter()
        .fold(vec![C::new(1.0, 0.0)], |acc, r| mul(&acc, &[-r, C::new(1.0, 0.0)]))
}

/// Long division by a polynomial with nonzero leading coefficient; returns (quotient, remainder).
pub fn divrem(num: &[C], den: &[C]) -> (Vec<C>, Vec<C>) {
    let dl = den.len();
    assert!(dl > 0 && den[dl - 1].norm() > 0.0, "division by a zero polynomial");
    if num.len() < dl {
        return (vec![C::new(0.0, 0.0)], num.to_vec());
    }
    let mut rem = num.to_vec();
    let mut quot = vec![C::new(0.0, 0.0); num.len() - dl + 1];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dl - 1] / den[dl - 1];
        quot[k] = c;
        for (j, d) in den.iter().enumerate() {
            rem[k + j] -= c * d;
        }
    }
    rem.truncate(dl - 1);
    (quot, rem)
}

pub fn derivative(a: &[C]) -> Vec<C> {
    a.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect()
}

/// Newton refinement of an approximate root in `bits`-bit arithmetic.
pub fn newton_polish(coeffs: &[C], root: C, bits: u32, iterations: usize) -> C {
    let cs: Vec<MpComplex> = coeffs.iter().map(|c| MpComplex::new(bits, *c)).collect();
    let mut z = MpComplex::new(bits, root);
    let zero = MpComplex::new(bits, C::new(0.0, 0.0));
    for _ in 0..iterations {
        let mut p = zero.clone();
        let mut dp = zero.clone();
        for c in cs.iter().rev() {
            dp = dp * z.clone() + p.clone();
            p = p * z.clone() + c.clone();
        }
        if dp.abs_f64() == 0.0 {
            break;
        }
        let step = p / dp;
        let small = step.abs_f64() <= 1e-30 * z.abs_f64().max(1.0);
        z = z - step;
        if small {
            break;
        }
    }
    z.to_c64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C {
        C::new(x, 0.0)
    }

    #[test]
    fn divide_exactly() {
        let a = from_roots(&[c(1.0), c(2.0), c(-3.0)]);
        let (q, r) = divrem(&a, &from_roots(&[c(2.0)]));
        assert!(r.iter().all(|x| x.norm() < 1e-14));
        let expect = from_roots(&[c(1.0), c(-3.0)]);
        for (x, y) in q.iter().zip(&expect) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn polish_improves_root() {
        let p = from_roots(&[c(0.5), C::new(1.0, 2.0)]);
        let z = newton_polish(&p, C::new(1.01, 1.99), 120, 50);
        assert!((z - C::new(1.0, 2.0)).norm() < 1e-15);
    }
}
