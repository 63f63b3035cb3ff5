//! Model-based adaptive process-noise baselines.
//!
//! Three classic schemes that re-estimate Q online from filter by-products:
//! the innovation-based method (Q̂ = K C Kᵀ from the windowed innovation
//! covariance), generative learning (empirical transition-residual
//! covariance), and the scaling method (trace-matched multiplicative update).

use nalgebra::{DMatrix, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::kalman::{CovarianceMatrix, StateVector};

/// Floor applied to the scaling factor α before the square root. Keeps the
/// scaled Q positive semidefinite and the filter recoverable when the
/// windowed innovation covariance momentarily drops below R.
pub const ALPHA_FLOOR: f64 = 1e-4;

/// Windowed innovation covariance C = (1/ξ) Σ ν νᵀ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnovationMatrix {
    pub c: Matrix2<f64>,
    pub window_len: usize,
}

/// Averages the outer products of the innovations in the window.
pub fn innovation_matrix(window: &[Vector2<f64>]) -> Result<InnovationMatrix> {
    if window.is_empty() {
        return Err(Error::state("innovation window is empty"));
    }
    let mut c = Matrix2::zeros();
    for nu in window {
        c += nu * nu.transpose();
    }
    c /= window.len() as f64;
    Ok(InnovationMatrix {
        c,
        window_len: window.len(),
    })
}

/// Innovation-based estimate Q̂ = K C Kᵀ.
pub fn innovation_q(c: &InnovationMatrix, k_gain: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    if k_gain.ncols() != 2 {
        return Err(Error::config(format!(
            "gain must have 2 columns, got {}",
            k_gain.ncols()
        )));
    }
    let c_dyn = DMatrix::from_fn(2, 2, |i, j| c.c[(i, j)]);
    let q = k_gain * c_dyn * k_gain.transpose();
    Ok(CovarianceMatrix::from_symmetric_unchecked(
        (&q + q.transpose()) * 0.5,
    ))
}

/// Generative-learning estimate: the empirical covariance of the transition
/// residuals x_k − Φ x_{k−1} over consecutive state pairs.
pub fn generative_q(states: &[StateVector], phi: &DMatrix<f64>) -> Result<CovarianceMatrix> {
    if states.len() < 2 {
        return Err(Error::state(format!(
            "generative estimate needs at least 2 states, got {}",
            states.len()
        )));
    }
    let dim = states[0].dim();
    if phi.nrows() != dim || phi.ncols() != dim {
        return Err(Error::config(format!(
            "transition matrix is {}x{}, state dimension is {dim}",
            phi.nrows(),
            phi.ncols()
        )));
    }
    if states.iter().any(|s| s.dim() != dim) {
        return Err(Error::config("states have mixed dimensions"));
    }
    let mut q = DMatrix::zeros(dim, dim);
    for pair in states.windows(2) {
        let residual = pair[1].as_vector() - phi * pair[0].as_vector();
        q += &residual * residual.transpose();
    }
    q /= (states.len() - 1) as f64;
    Ok(CovarianceMatrix::from_symmetric_unchecked(
        (&q + q.transpose()) * 0.5,
    ))
}

/// Scaling factor α = trace(C − R) / trace(H P⁻ Hᵀ), where C is the windowed
/// innovation covariance and s_theory = H P⁻ Hᵀ.
pub fn scaling_alpha(
    window: &[Vector2<f64>],
    r: &Matrix2<f64>,
    s_theory: &Matrix2<f64>,
) -> Result<f64> {
    let denom = s_theory.trace();
    if denom <= 1e-15 {
        return Err(Error::numerical(
            None,
            format!("theoretical innovation trace too small: {denom}"),
        ));
    }
    let c = innovation_matrix(window)?;
    Ok((c.c - r).trace() / denom)
}

/// Multiplicative update Q̂_k = sqrt(α) Q̂_{k−1}, with α clamped to
/// [`ALPHA_FLOOR`] so the result stays PSD.
pub fn scaling_q(q_prev: &CovarianceMatrix, alpha: f64) -> CovarianceMatrix {
    let factor = alpha.max(ALPHA_FLOOR).sqrt();
    CovarianceMatrix::from_symmetric_unchecked(q_prev.as_matrix() * factor)
}
