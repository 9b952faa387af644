use serde::{Deserialize, Serialize};

use super::StandardizedData;
use crate::error::{Error, Result};
use crate::linalg::{self, add_to_diagonal, check_lambda, cholesky, dot, invert_spd, DenseMatrix};

/// Roundoff allowance for a partial variance that comes out slightly negative.
const NEGATIVE_VARIANCE_TOLERANCE: f64 = 1e-10;
const VARIANCE_FLOOR: f64 = 1e-15;
/// Largest bordered system the direct oracle will invert.
const ORACLE_MAX_DIM: usize = 2000;

/// Entries of the ridge-regularized bordered precision matrix for one penalty,
/// and the ridge partial correlations built from them.
///
/// The common factor `n` of the precision estimate is left out; it cancels in
/// every score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpcComponents {
    pub lambda: f64,
    /// Response entry, `1 / S_λ`.
    pub v_y: f64,
    /// Response/predictor cross entries.
    pub v_iy: Vec<f64>,
    /// Predictor diagonal entries (ridge partial variances).
    pub v_i: Vec<f64>,
    /// `R_i = -v_iy / sqrt(v_i v_y)`.
    pub scores: Vec<f64>,
    /// Diagonal of `(XᵀX + λI)⁻¹`.
    pub xi: Vec<f64>,
    /// Ridge residual sum of squares.
    pub s_lambda: f64,
    /// Ridge estimator `Xᵀ(XXᵀ + λI)⁻¹ỹ`.
    pub ridge_beta: Vec<f64>,
}

/// Caches `XXᵀ` so several penalties can be evaluated for one dataset at
/// the cost of one gram product.
#[derive(Debug, Clone)]
pub struct RidgeEngine<'a> {
    data: &'a StandardizedData,
    gram: DenseMatrix,
}

impl<'a> RidgeEngine<'a> {
    pub fn new(data: &'a StandardizedData) -> Self {
        RidgeEngine {
            data,
            gram: linalg::gram(data.x()),
        }
    }

    /// Fast path: Cholesky of the n×n dual matrix, then one triangular solve
    /// per predictor. O(n³ + n²p).
    pub fn components(&self, lambda: f64) -> Result<RpcComponents> {
        check_lambda(lambda)?;
        self.data.ensure_response_varies()?;

        let mut w = self.gram.clone();
        add_to_diagonal(&mut w, lambda);
        let factor = cholesky(&w)?;
        let theta = linalg::solve_transposed_triangular(&factor, self.data.y_tilde())?;
        let tt = dot(&theta, &theta);
        if !(tt > 0.0) {
            return Err(Error::Degenerate("response has zero ridge norm".into()));
        }
        let s_lambda = lambda * tt;
        let v_y = 1.0 / s_lambda;

        let (cross, norms) = linalg::whitened_inner_products(&factor, self.data.x(), &theta)?;
        let p = cross.len();
        let mut v_iy = Vec::with_capacity(p);
        let mut v_i = Vec::with_capacity(p);
        let mut scores = Vec::with_capacity(p);
        let mut xi = Vec::with_capacity(p);
        let inv_lambda = 1.0 / lambda;
        for i in 0..p {
            let c = cross[i];
            let viy = -v_y * c;
            let mut vi = inv_lambda + v_y * c * c - inv_lambda * norms[i];
            if vi <= 0.0 {
                if vi >= -NEGATIVE_VARIANCE_TOLERANCE {
                    vi = VARIANCE_FLOOR;
                } else {
                    return Err(Error::Numerical {
                        index: i,
                        message: format!("partial variance {vi:e} is negative"),
                    });
                }
            }
            v_iy.push(viy);
            v_i.push(vi);
            scores.push(partial_correlation(viy, vi, v_y));
            xi.push((1.0 - norms[i]) / lambda);
        }

        Ok(RpcComponents {
            lambda,
            v_y,
            v_iy,
            v_i,
            scores,
            xi,
            s_lambda,
            ridge_beta: cross,
        })
    }

    /// Ridge coefficients `Xᵀ(XXᵀ + λI)⁻¹ỹ` through the same factorization.
    pub fn ridge_beta(&self, lambda: f64) -> Result<Vec<f64>> {
        Ok(self.components(lambda)?.ridge_beta)
    }
}

#[inline]
fn partial_correlation(v_iy: f64, v_i: f64, v_y: f64) -> f64 {
    (-v_iy / (v_i * v_y).sqrt()).clamp(-1.0, 1.0)
}

/// Ridge partial correlations by the Cholesky-accelerated dual algorithm.
pub fn rpc_fast(data: &StandardizedData, lambda: f64) -> Result<RpcComponents> {
    RidgeEngine::new(data).components(lambda)
}

/// Reference computation: inverts the (p+1)×(p+1) bordered matrix
/// `[[ỹᵀỹ, ỹᵀX], [Xᵀỹ, XᵀX + λI]]` directly and reads the entries off.
/// `xi`, `s_lambda` and `ridge_beta` come from a separate p×p inverse.
pub fn rpc_oracle(data: &StandardizedData, lambda: f64) -> Result<RpcComponents> {
    check_lambda(lambda)?;
    data.ensure_response_varies()?;
    let p = data.p();
    if p + 1 > ORACLE_MAX_DIM {
        return Err(Error::invalid(format!(
            "oracle is limited to p + 1 <= {ORACLE_MAX_DIM}, got p = {p}"
        )));
    }
    let x = data.x();
    let y = data.y_tilde();

    let mut xtx = x.transpose().matmul(x)?;
    add_to_diagonal(&mut xtx, lambda);
    let xty: Vec<f64> = (0..p)
        .map(|j| x.col(j).iter().zip(y).map(|(a, b)| a * b).sum())
        .collect();
    let yty: f64 = y.iter().map(|v| v * v).sum();

    let mut bordered = DenseMatrix::zeros(p + 1, p + 1);
    bordered.set(0, 0, yty);
    for (j, &v) in xty.iter().enumerate() {
        bordered.set(0, j + 1, v);
        bordered.set(j + 1, 0, v);
        for k in 0..p {
            bordered.set(j + 1, k + 1, xtx.get(j, k));
        }
    }
    let inv = invert_spd(&bordered)?;
    let v_y = inv.get(0, 0);
    let v_iy: Vec<f64> = (0..p).map(|i| inv.get(0, i + 1)).collect();
    let v_i: Vec<f64> = (0..p).map(|i| inv.get(i + 1, i + 1)).collect();
    let scores = (0..p).map(|i| partial_correlation(v_iy[i], v_i[i], v_y)).collect();

    let xtx_inv = invert_spd(&xtx)?;
    let xi = (0..p).map(|i| xtx_inv.get(i, i)).collect();
    let ridge_beta = xtx_inv.mul_vec(&xty)?;
    let s_lambda = yty - xty.iter().zip(&ridge_beta).map(|(a, b)| a * b).sum::<f64>();

    Ok(RpcComponents {
        lambda,
        v_y,
        v_iy,
        v_i,
        scores,
        xi,
        s_lambda,
        ridge_beta,
    })
}

/// HOLP criterion: the ridge estimator `β̂(λ)`; variables rank by `|β̂_i|`.
pub fn holp_scores(data: &StandardizedData, lambda: f64) -> Result<Vec<f64>> {
    RidgeEngine::new(data).ridge_beta(lambda)
}
