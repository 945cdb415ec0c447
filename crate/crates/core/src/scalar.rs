//! Complex scalars the special-function kernel is generic over.
//!
//! `Complex64` is the working type everywhere. [`MpComplex`] is a complex
//! number built from two MPFR floats; it backs `PrecisionContext` values above
//! 53 bits and the brute-force oracles in the tests.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;
use rug::float::Constant;
use rug::Float;

pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// A constant carried at the same precision as `self`.
    fn lift(&self, z: Complex64) -> Self;
    fn to_c64(&self) -> Complex64;
    fn exp(&self) -> Self;
    /// Principal branch.
    fn ln(&self) -> Self;
    fn abs_f64(&self) -> f64;
    fn pi(&self) -> Self;

    fn real(&self, x: f64) -> Self {
        self.lift(Complex64::new(x, 0.0))
    }

    fn one(&self) -> Self {
        self.real(1.0)
    }

    fn i(&self) -> Self {
        self.lift(Complex64::new(0.0, 1.0))
    }

    fn powi(&self, n: i64) -> Self {
        let mut base = if n < 0 {
            self.one() / self.clone()
        } else {
            self.clone()
        };
        let mut k = n.unsigned_abs();
        let mut acc = self.one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// e^{2πi z}.
    fn expi2pi(&self) -> Self {
        let two_pi_i = self.pi() * self.lift(Complex64::new(0.0, 2.0));
        (two_pi_i * self.clone()).exp()
    }

    /// Principal square root.
    fn sqrt(&self) -> Self {
        if self.abs_f64() == 0.0 {
            return self.real(0.0);
        }
        (self.ln() * self.real(0.5)).exp()
    }
}

impl Scalar for Complex64 {
    fn lift(&self, z: Complex64) -> Self {
        z
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn abs_f64(&self) -> f64 {
        self.norm()
    }
    fn pi(&self) -> Self {
        Complex64::new(std::f64::consts::PI, 0.0)
    }
    fn powi(&self, n: i64) -> Self {
        if let Ok(n32) = i32::try_from(n) {
            Complex64::powi(self, n32)
        } else {
            Complex64::powf(*self, n as f64)
        }
    }
    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }
}

/// Complex number with MPFR real and imaginary parts of equal precision.
#[derive(Debug, Clone, PartialEq)]
pub struct MpComplex {
    pub re: Float,
    pub im: Float,
}

impl MpComplex {
    pub fn new(bits: u32, z: Complex64) -> Self {
        MpComplex {
            re: Float::with_val(bits, z.re),
            im: Float::with_val(bits, z.im),
        }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.clone() * &self.re) + self.im.clone() * &self.im
    }

    /// Modulus at full precision.
    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }
}

impl Add for MpComplex {
    type Output = MpComplex;
    fn add(self, rhs: MpComplex) -> MpComplex {
        MpComplex {
            re: self.re + rhs.re,
            im: self.im + rhs.im,
        }
    }
}

impl Sub for MpComplex {
    type Output = MpComplex;
    fn sub(self, rhs: MpComplex) -> MpComplex {
        MpComplex {
            re: self.re - rhs.re,
            im: self.im - rhs.im,
        }
    }
}

impl Mul for MpComplex {
    type Output = MpComplex;
    fn mul(self, rhs: MpComplex) -> MpComplex {
        let ac = self.re.clone() * &rhs.re;
        let bd = self.im.clone() * &rhs.im;
        let ad = self.re * &rhs.im;
        let bc = self.im * &rhs.re;
        MpComplex {
            re: ac - bd,
            im: ad + bc,
        }
    }
}

impl Div for MpComplex {
    type Output = MpComplex;
    fn div(self, rhs: MpComplex) -> MpComplex {
        let den = rhs.norm_sqr();
        let ac = self.re.clone() * &rhs.re;
        let bd = self.im.clone() * &rhs.im;
        let bc = self.im * &rhs.re;
        let ad = self.re * &rhs.im;
        MpComplex {
            re: (ac + bd) / &den,
            im: (bc - ad) / &den,
        }
    }
}

impl Neg for MpComplex {
    type Output = MpComplex;
    fn neg(self) -> MpComplex {
        MpComplex {
            re: -self.re,
            im: -self.im,
        }
    }
}

impl Scalar for MpComplex {
    fn lift(&self, z: Complex64) -> Self {
        MpComplex::new(self.prec(), z)
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
    fn exp(&self) -> Self {
        let modulus = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        MpComplex {
            re: modulus.clone() * &c,
            im: modulus * &s,
        }
    }
    fn ln(&self) -> Self {
        let arg = self.im.clone().atan2(&self.re);
        MpComplex {
            re: self.abs().ln(),
            im: arg,
        }
    }
    fn abs_f64(&self) -> f64 {
        self.abs().to_f64()
    }
    fn pi(&self) -> Self {
        MpComplex {
            re: Float::with_val(self.prec(), Constant::Pi),
            im: Float::new(self.prec()),
        }
    }
}
