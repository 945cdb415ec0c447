use num_complex::Complex64;
use serde::Serialize;

use crate::precision::Context;

/// One evaluation point of a residual scan.
#[derive(Debug, Clone, Serialize)]
pub struct PointResidual {
    pub params: Vec<(String, Complex64)>,
    pub residual: f64,
}

/// Named functional-equation residual over a set of evaluation points.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub relation: String,
    pub points: Vec<PointResidual>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub policy: Context,
}

impl ResidualReport {
    pub fn new(relation: impl Into<String>, ctx: &Context) -> Self {
        ResidualReport {
            relation: relation.into(),
            points: Vec::new(),
            max_residual: 0.0,
            mean_residual: 0.0,
            policy: *ctx,
        }
    }

    pub fn push(&mut self, params: &[(&str, Complex64)], residual: f64) {
        let n = self.points.len() as f64;
        self.mean_residual = (self.mean_residual * n + residual) / (n + 1.0);
        // NaN must never read as a pass
        if residual.is_nan() || residual > self.max_residual {
            self.max_residual = if residual.is_nan() { f64::INFINITY } else { residual };
        }
        self.points.push(PointResidual {
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            residual,
        });
    }

    pub fn passes(&self, tol: f64) -> bool {
        !self.points.is_empty() && self.max_residual < tol
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracks_max_and_mean() {
        let mut r = ResidualReport::new("demo", &Context::double());
        r.push(&[("x", Complex64::new(1.0, 0.0))], 1e-3);
        r.push(&[], 3e-3);
        assert_eq!(r.max_residual, 3e-3);
        assert!((r.mean_residual - 2e-3).abs() < 1e-18);
        assert!(r.passes(1e-2));
        assert!(!r.passes(1e-3));
    }

    #[test]
    fn nan_fails() {
        let mut r = ResidualReport::new("demo", &Context::double());
        r.push(&[], f64::NAN);
        assert!(!r.passes(1.0));
    }
}
