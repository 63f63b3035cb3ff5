//! Adaptive process-noise estimation for 2-D vehicle tracking.
//!
//! The toolkit implements a linear Kalman filter over constant-velocity and
//! constant-acceleration motion models, three classic adaptive process-noise
//! baselines, a synthetic-trajectory oracle that grid-searches the optimal
//! noise intensity q*, a curvature/speed feature pipeline with a trainable
//! curvature regressor, and an online learned Q tuner that binds them into a
//! hybrid adaptive tracker, plus PRMSE/PMAE benchmark reporting.

pub mod adaptive;
pub mod curvature;
pub mod error;
pub mod kalman;
pub mod metrics;
pub mod models;
pub mod qlearn;
pub mod runtime;
pub mod seed;

pub use error::{Error, Result};
pub use kalman::{CovarianceMatrix, FilterState, InnovationWindow, Measurement, StateVector};
pub use models::{MotionModel, ModelKind, NoiseSpec};
