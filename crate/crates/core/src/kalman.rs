//! Discrete linear Kalman filter primitives.
//!
//! State propagation, gain, and measurement update for the 2-D tracking
//! filters, plus the two limiting-gain forms (vanishing and infinite process
//! noise) that serve as analytic test oracles. All operations are pure
//! functions: they take a [`FilterState`] and return a new one.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};

/// Default innovation window capacity ξ.
pub const DEFAULT_XI: usize = 10;

/// Relative tolerance for covariance symmetry and positive-semidefiniteness.
pub const COV_TOLERANCE: f64 = 1e-9;

/// Condition-number limit above which the innovation covariance is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Tracking state estimate: position and velocity (dim 4) or position,
/// velocity and acceleration (dim 6). Units m, m/s, m/s².
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(DVector<f64>);

impl StateVector {
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.len() != 4 && values.len() != 6 {
            return Err(Error::config(format!(
                "state vector length must be 4 or 6, got {}",
                values.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::config("state vector has non-finite entries"));
        }
        Ok(StateVector(values))
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(values))
    }

    /// Zero state of the given dimension.
    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn position(&self) -> Vector2<f64> {
        Vector2::new(self.0[0], self.0[1])
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.0[2], self.0[3])
    }

    pub fn acceleration(&self) -> Option<Vector2<f64>> {
        if self.0.len() == 6 {
            Some(Vector2::new(self.0[4], self.0[5]))
        } else {
            None
        }
    }
}

/// Symmetric positive-semidefinite matrix (up to round-off) matching the state dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix(DMatrix<f64>);

impl CovarianceMatrix {
    /// Validates symmetry (relative tolerance 1e-9) and positive
    /// semidefiniteness (eigenvalues ≥ −1e-9·λmax).
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::config(format!(
                "covariance must be square, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::config("covariance has non-finite entries"));
        }
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..values.nrows() {
            for j in (i + 1)..values.ncols() {
                if (values[(i, j)] - values[(j, i)]).abs() > COV_TOLERANCE * scale {
                    return Err(Error::config(format!(
                        "covariance asymmetric at ({i},{j}): {} vs {}",
                        values[(i, j)],
                        values[(j, i)]
                    )));
                }
            }
        }
        let sym = symmetrized(&values);
        let eigs = sym.clone().symmetric_eigenvalues();
        let max_eig = eigs.iter().fold(0.0f64, |m, v| m.max(*v));
        let floor = -COV_TOLERANCE * max_eig.max(1.0);
        if eigs.iter().any(|&e| e < floor) {
            return Err(Error::config(format!(
                "covariance not positive semidefinite: min eigenvalue {}",
                eigs.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        Ok(CovarianceMatrix(sym))
    }

    /// Wraps a matrix that is symmetric PSD by construction (e.g. Φ P Φᵀ + Q
    /// already symmetrized). Skips the eigenvalue check on the hot path.
    pub fn from_symmetric_unchecked(values: DMatrix<f64>) -> Self {
        debug_assert!(values.nrows() == values.ncols());
        CovarianceMatrix(values)
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(dim: usize) -> Self {
        CovarianceMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        CovarianceMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }
}

/// One position measurement z_k (meters) taken at a step index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub z: Vector2<f64>,
    pub step_index: usize,
}

impl Measurement {
    pub fn new(z: Vector2<f64>, step_index: usize) -> Result<Self> {
        if !z.x.is_finite() || !z.y.is_finite() {
            return Err(Error::config("measurement has non-finite entries"));
        }
        Ok(Measurement { z, step_index })
    }
}

/// Bounded FIFO of recent innovations ν, capacity ξ.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationWindow {
    buf: VecDeque<Vector2<f64>>,
    capacity: usize,
}

impl InnovationWindow {
    pub fn new(capacity: usize) -> Self {
        InnovationWindow {
            buf: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn push(&mut self, nu: Vector2<f64>) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(nu);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.buf.len() == self.capacity
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn as_slice(&self) -> Vec<Vector2<f64>> {
        self.buf.iter().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vector2<f64>> {
        self.buf.iter()
    }
}

/// Full filter state: estimate, covariance, last gain, and the innovation window.
#[derive(Debug, Clone)]
pub struct FilterState {
    x_hat: StateVector,
    p: CovarianceMatrix,
    k_gain: DMatrix<f64>,
    innovation_window: InnovationWindow,
}

impl FilterState {
    pub fn x_hat(&self) -> &StateVector {
        &self.x_hat
    }

    pub fn p(&self) -> &CovarianceMatrix {
        &self.p
    }

    pub fn k_gain(&self) -> &DMatrix<f64> {
        &self.k_gain
    }

    pub fn innovation_window(&self) -> &InnovationWindow {
        &self.innovation_window
    }

    pub fn dim(&self) -> usize {
        self.x_hat.dim()
    }
}

fn symmetrized(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn check_finite(m: &DMatrix<f64>, what: &str, step: Option<usize>) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::numerical(step, format!("{what} is non-finite")))
    }
}

/// Builds the initial filter state from a prior mean and covariance, with the
/// default innovation window capacity ξ = 10.
pub fn initialize(x0: StateVector, p0: CovarianceMatrix) -> Result<FilterState> {
    initialize_with_window(x0, p0, DEFAULT_XI)
}

/// As [`initialize`], with an explicit window capacity.
pub fn initialize_with_window(
    x0: StateVector,
    p0: CovarianceMatrix,
    xi: usize,
) -> Result<FilterState> {
    if x0.dim() != p0.dim() {
        return Err(Error::config(format!(
            "state dimension {} does not match covariance dimension {}",
            x0.dim(),
            p0.dim()
        )));
    }
    if xi == 0 {
        return Err(Error::config("innovation window capacity must be >= 1"));
    }
    let dim = x0.dim();
    Ok(FilterState {
        x_hat: x0,
        p: p0,
        k_gain: DMatrix::zeros(dim, 2),
        innovation_window: InnovationWindow::new(xi),
    })
}

/// Time propagation: x̂⁻ = Φ x̂, P⁻ = Φ P Φᵀ + Q (symmetrized).
pub fn propagate(fs: &FilterState, phi: &DMatrix<f64>, q: &CovarianceMatrix) -> Result<FilterState> {
    let dim = fs.dim();
    if phi.nrows() != dim || phi.ncols() != dim {
        return Err(Error::config(format!(
            "transition matrix is {}x{}, state dimension is {dim}",
            phi.nrows(),
            phi.ncols()
        )));
    }
    if q.dim() != dim {
        return Err(Error::config(format!(
            "process noise dimension {} does not match state dimension {dim}",
            q.dim()
        )));
    }
    let x_minus = phi * fs.x_hat.as_vector();
    let p_minus = symmetrized(&(phi * fs.p.as_matrix() * phi.transpose() + q.as_matrix()));
    if !x_minus.iter().all(|v| v.is_finite()) {
        return Err(Error::numerical(None, "propagated state is non-finite"));
    }
    check_finite(&p_minus, "propagated covariance", None)?;
    Ok(FilterState {
        x_hat: StateVector(x_minus),
        p: CovarianceMatrix(p_minus),
        k_gain: fs.k_gain.clone(),
        innovation_window: fs.innovation_window.clone(),
    })
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
fn eig2(s: &Matrix2<f64>) -> (f64, f64) {
    let tr = s[(0, 0)] + s[(1, 1)];
    let half_gap = (((s[(0, 0)] - s[(1, 1)]) * 0.5).powi(2) + s[(0, 1)] * s[(1, 0)]).max(0.0);
    let root = half_gap.sqrt();
    (tr * 0.5 - root, tr * 0.5 + root)
}

/// Innovation covariance S = H P⁻ Hᵀ + R.
pub fn innovation_covariance(
    p_minus: &CovarianceMatrix,
    h: &DMatrix<f64>,
    r: &Matrix2<f64>,
) -> Result<Matrix2<f64>> {
    if h.nrows() != 2 || h.ncols() != p_minus.dim() {
        return Err(Error::config(format!(
            "observation matrix is {}x{}, expected 2x{}",
            h.nrows(),
            h.ncols(),
            p_minus.dim()
        )));
    }
    let hpht = h * p_minus.as_matrix() * h.transpose();
    let mut s = Matrix2::zeros();
    for i in 0..2 {
        for j in 0..2 {
            s[(i, j)] = hpht[(i, j)] + r[(i, j)];
        }
    }
    Ok((s + s.transpose()) * 0.5)
}

/// Kalman gain K = P⁻ Hᵀ S⁻¹ via a Cholesky solve of S.
pub fn gain(p_minus: &CovarianceMatrix, h: &DMatrix<f64>, r: &Matrix2<f64>) -> Result<DMatrix<f64>> {
    let s = innovation_covariance(p_minus, h, r)?;
    let (lo, hi) = eig2(&s);
    if lo <= 0.0 || hi / lo > MAX_CONDITION {
        return Err(Error::numerical(
            None,
            format!("innovation covariance singular (eigenvalues {lo:.3e}, {hi:.3e})"),
        ));
    }
    let s_dyn = DMatrix::from_fn(2, 2, |i, j| s[(i, j)]);
    let chol = s_dyn.cholesky().ok_or_else(|| {
        Error::numerical(None, "Cholesky factorization of innovation covariance failed")
    })?;
    // K = P Hᵀ S⁻¹, computed as Kᵀ = S⁻¹ (H P) since both P and S are symmetric.
    let mut kt = h * p_minus.as_matrix();
    chol.solve_mut(&mut kt);
    Ok(kt.transpose())
}

/// Measurement update: ν = z − H x̂⁻, x̂ = x̂⁻ + Kν, P = (I − KH) P⁻ (symmetrized).
/// Appends ν to the innovation window, evicting the oldest entry at capacity.
pub fn update(
    fs: &FilterState,
    z: &Measurement,
    h: &DMatrix<f64>,
    r: &Matrix2<f64>,
) -> Result<FilterState> {
    let k = gain(&fs.p, h, r)?;
    let predicted = h * fs.x_hat.as_vector();
    let nu = Vector2::new(z.z.x - predicted[0], z.z.y - predicted[1]);
    let nu_dyn = DVector::from_column_slice(&[nu.x, nu.y]);
    let x_new = fs.x_hat.as_vector() + &k * nu_dyn;
    let dim = fs.dim();
    let ikh = DMatrix::identity(dim, dim) - &k * h;
    let p_new = symmetrized(&(ikh * fs.p.as_matrix()));
    if !x_new.iter().all(|v| v.is_finite()) {
        return Err(Error::numerical(
            Some(z.step_index),
            "updated state is non-finite",
        ));
    }
    check_finite(&p_new, "updated covariance", Some(z.step_index))?;
    let mut window = fs.innovation_window.clone();
    window.push(nu);
    Ok(FilterState {
        x_hat: StateVector(x_new),
        p: CovarianceMatrix(p_new),
        k_gain: k,
        innovation_window: window,
    })
}

/// Closed-form gain in the vanishing-process-noise limit:
/// K = [(Φ P Φᵀ)⁻¹ + Hᵀ R⁻¹ H]⁻¹ Hᵀ R⁻¹.
///
/// Uses explicit inverses on purpose; this is a test oracle for [`gain`]
/// with Q = 0, not a production path.
pub fn limit_gain_q_zero(
    p_prev: &CovarianceMatrix,
    phi: &DMatrix<f64>,
    h: &DMatrix<f64>,
    r: &Matrix2<f64>,
) -> Result<DMatrix<f64>> {
    let prop = phi * p_prev.as_matrix() * phi.transpose();
    let prop_inv = prop
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::numerical(None, "Φ P Φᵀ is singular"))?;
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::numerical(None, "R is singular"))?;
    let r_inv_dyn = DMatrix::from_fn(2, 2, |i, j| r_inv[(i, j)]);
    let ht_rinv = h.transpose() * &r_inv_dyn;
    let inner = prop_inv + &ht_rinv * h;
    let inner_inv = inner
        .try_inverse()
        .ok_or_else(|| Error::numerical(None, "limiting-gain inner matrix is singular"))?;
    Ok(inner_inv * ht_rinv)
}

/// Weighted least-squares estimate of the observable state components from a
/// single measurement (the infinite-process-noise limit of the filter).
///
/// Returns the minimum-norm state vector whose observable projection solves
/// argmin (z − Hx)ᵀ R⁻¹ (z − Hx); coordinates outside range(Hᵀ) are zero.
pub fn lse_estimate(z: &Measurement, h: &DMatrix<f64>, r: &Matrix2<f64>) -> Result<DVector<f64>> {
    let svd = h.clone().svd(false, true);
    let v_t = svd
        .v_t
        .as_ref()
        .ok_or_else(|| Error::numerical(None, "SVD of observation matrix failed"))?;
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * smax.max(1.0))
        .count();
    if rank < 2 {
        return Err(Error::numerical(
            None,
            format!("observation matrix rank deficient (rank {rank})"),
        ));
    }
    // Basis of the observable subspace: first two right singular vectors.
    let basis = v_t.rows(0, 2).transpose();
    let a = h * &basis; // 2×2, invertible because H has full row rank
    let r_inv = r
        .try_inverse()
        .ok_or_else(|| Error::numerical(None, "R is singular"))?;
    let r_inv_dyn = DMatrix::from_fn(2, 2, |i, j| r_inv[(i, j)]);
    let m = a.transpose() * &r_inv_dyn * &a;
    let m_inv = m
        .try_inverse()
        .ok_or_else(|| Error::numerical(None, "weighted normal matrix is singular"))?;
    let z_dyn = DVector::from_column_slice(&[z.z.x, z.z.y]);
    let w = m_inv * a.transpose() * r_inv_dyn * z_dyn;
    Ok(basis * w)
}
