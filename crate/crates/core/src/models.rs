//! Constant-velocity and constant-acceleration discrete motion models.
//!
//! Builds the transition matrix Φ, the position observation matrix H, and the
//! process-noise template (intensity on the last-derivative block) from the
//! step size Δt.

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kalman::CovarianceMatrix;

/// Trajectory model family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Constant velocity: state (px, py, vx, vy).
    Cv,
    /// Constant acceleration: state (px, py, vx, vy, ax, ay).
    Ca,
}

impl ModelKind {
    pub fn state_dim(self) -> usize {
        match self {
            ModelKind::Cv => 4,
            ModelKind::Ca => 6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::Cv => "cv",
            ModelKind::Ca => "ca",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cv" => Ok(ModelKind::Cv),
            "ca" => Ok(ModelKind::Ca),
            other => Err(Error::config(format!("unknown model kind '{other}'"))),
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Immutable bundle of Φ, H and the state dimension for one model and step size.
#[derive(Debug, Clone)]
pub struct MotionModel {
    kind: ModelKind,
    dt: f64,
    phi: DMatrix<f64>,
    h: DMatrix<f64>,
}

impl MotionModel {
    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn state_dim(&self) -> usize {
        self.kind.state_dim()
    }

    pub fn phi(&self) -> &DMatrix<f64> {
        &self.phi
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }
}

/// Process-noise intensities (per axis) and measurement variances (per axis).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub q_x: f64,
    pub q_y: f64,
    pub r_x: f64,
    pub r_y: f64,
}

impl NoiseSpec {
    pub fn new(q_x: f64, q_y: f64, r_x: f64, r_y: f64) -> Result<Self> {
        let spec = NoiseSpec { q_x, q_y, r_x, r_y };
        spec.validate()?;
        Ok(spec)
    }

    /// Same intensity on both axes, the default assumption (r_x = r_y = r).
    pub fn isotropic(q: f64, r: f64) -> Result<Self> {
        Self::new(q, q, r, r)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("q_x", self.q_x),
            ("q_y", self.q_y),
            ("r_x", self.r_x),
            ("r_y", self.r_y),
        ] {
            if !v.is_finite() {
                return Err(Error::config(format!("{name} must be finite, got {v}")));
            }
        }
        if self.q_x < 0.0 || self.q_y < 0.0 {
            return Err(Error::config(format!(
                "process noise intensities must be >= 0, got ({}, {})",
                self.q_x, self.q_y
            )));
        }
        if self.r_x <= 0.0 || self.r_y <= 0.0 {
            return Err(Error::config(format!(
                "measurement variances must be > 0, got ({}, {})",
                self.r_x, self.r_y
            )));
        }
        Ok(())
    }

    /// Diagonal measurement noise covariance R.
    pub fn r_matrix(&self) -> Matrix2<f64> {
        Matrix2::new(self.r_x, 0.0, 0.0, self.r_y)
    }
}

/// Builds Φ and H for the requested model at step size dt.
pub fn make_model(kind: ModelKind, dt: f64) -> Result<MotionModel> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::config(format!("step size must be > 0, got {dt}")));
    }
    let (phi, h) = match kind {
        ModelKind::Cv => {
            let mut phi = DMatrix::identity(4, 4);
            phi[(0, 2)] = dt;
            phi[(1, 3)] = dt;
            let mut h = DMatrix::zeros(2, 4);
            h[(0, 0)] = 1.0;
            h[(1, 1)] = 1.0;
            (phi, h)
        }
        ModelKind::Ca => {
            let mut phi = DMatrix::identity(6, 6);
            phi[(0, 2)] = dt;
            phi[(1, 3)] = dt;
            phi[(0, 4)] = 0.5 * dt * dt;
            phi[(1, 5)] = 0.5 * dt * dt;
            phi[(2, 4)] = dt;
            phi[(3, 5)] = dt;
            let mut h = DMatrix::zeros(2, 6);
            h[(0, 0)] = 1.0;
            h[(1, 1)] = 1.0;
            (phi, h)
        }
    };
    Ok(MotionModel { kind, dt, phi, h })
}

/// Process-noise matrix with diag(q_x, q_y) on the trailing 2×2 block and
/// zeros elsewhere.
pub fn q_matrix(model: &MotionModel, spec: &NoiseSpec) -> Result<CovarianceMatrix> {
    spec.validate()?;
    Ok(q_template(model.state_dim(), spec.q_x, spec.q_y))
}

/// The trailing-block placement used by every Q in this toolkit.
/// Callers must pass q_x, q_y >= 0.
pub fn q_template(state_dim: usize, q_x: f64, q_y: f64) -> CovarianceMatrix {
    let mut m = DMatrix::zeros(state_dim, state_dim);
    m[(state_dim - 2, state_dim - 2)] = q_x;
    m[(state_dim - 1, state_dim - 1)] = q_y;
    CovarianceMatrix::from_symmetric_unchecked(m)
}
