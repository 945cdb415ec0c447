//! Complex least squares by a thin SVD.
//!
//! The factorisation comes from faer: nalgebra's SVD was observed to return
//! factorisations with reconstruction errors up to 1e−1 on the sparse,
//! structured systems assembled by the perturbative solver.

use faer::Mat;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: DVector<C>,
    /// Numerical rank.
    pub rank: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    /// max_i |(A·x − b)_i|.
    pub miss: f64,
}

/// Minimum-norm least-squares solution; singular values below `rank_tol·σ_max`
/// are treated as zero.
pub fn lstsq(a: &DMatrix<C>, b: &DVector<C>, rank_tol: f64) -> Result<LeastSquares> {
    let (r, c) = a.shape();
    if r == 0 || c == 0 {
        return Err(Error::Degeneracy("empty linear system".into()));
    }
    let m = Mat::<C>::from_fn(r, c, |i, j| a[(i, j)]);
    let svd = m
        .thin_svd()
        .map_err(|e| Error::IllConditioned(format!("singular value decomposition failed: {e:?}")))?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = s.nrows();
    let sig: Vec<f64> = (0..k).map(|i| s[i].re).collect();
    let sigma_max = sig.iter().copied().fold(0.0, f64::max);
    // a wide matrix has c − k implicit zero singular values
    let sigma_min = if c > k { 0.0 } else { sig.iter().copied().fold(f64::INFINITY, f64::min) };
    let cutoff = rank_tol * sigma_max;
    let mut x = DVector::<C>::zeros(c);
    let mut rank = 0;
    for l in 0..k {
        if !(sig[l] > cutoff) {
            continue;
        }
        rank += 1;
        let coef: C = (0..r).map(|i| u[(i, l)].conj() * b[i]).sum::<C>() / sig[l];
        for j in 0..c {
            x[j] += v[(j, l)] * coef;
        }
    }
    let miss = (a * &x - b).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(LeastSquares {
        x,
        rank,
        sigma_max,
        sigma_min,
        miss,
    })
}
