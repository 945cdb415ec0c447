//! Truncation and working-precision settings shared by one computation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Where infinite sums and products stop.
///
/// An evaluator stops once its analytic bound on the dropped tail falls below
/// `tail_tol`, and fails with [`Error::Truncation`] if that has not happened
/// after `max_terms` terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_terms: usize,
    pub tail_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy {
            max_terms: 4096,
            tail_tol: 1e-18,
        }
    }
}

/// Working precision in bits. 53 means native `f64`; anything larger runs the
/// special-function kernel on MPFR floats and rounds the result.
/// Rounding is always to nearest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub bits: u32,
}

pub const DOUBLE_BITS: u32 = 53;
const MAX_BITS: u32 = 4096;

impl PrecisionContext {
    pub fn double() -> Self {
        PrecisionContext { bits: DOUBLE_BITS }
    }

    pub fn with_bits(bits: u32) -> Result<Self> {
        if !(DOUBLE_BITS..=MAX_BITS).contains(&bits) {
            return Err(Error::Precision(bits));
        }
        Ok(PrecisionContext { bits })
    }

    pub fn is_double(&self) -> bool {
        self.bits <= DOUBLE_BITS
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        Self::double()
    }
}

/// The pair of settings every evaluator receives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Context {
    pub precision: PrecisionContext,
    pub truncation: TruncationPolicy,
}

impl Context {
    pub fn double() -> Self {
        Context::default()
    }

    /// High-precision context whose tail tolerance matches the working precision.
    pub fn with_bits(bits: u32) -> Result<Self> {
        let precision = PrecisionContext::with_bits(bits)?;
        let tail_tol = 2f64.powi(-(bits as i32) - 4).max(f64::MIN_POSITIVE);
        Ok(Context {
            precision,
            truncation: TruncationPolicy {
                max_terms: 1 << 16,
                tail_tol,
            },
        })
    }

    /// Tail tolerance actually used: never coarser than the working precision asks for.
    pub fn tail_tol(&self) -> f64 {
        if self.precision.is_double() {
            self.truncation.tail_tol
        } else {
            self.truncation
                .tail_tol
                .min(2f64.powi(-(self.precision.bits as i32) - 4))
        }
    }
}
