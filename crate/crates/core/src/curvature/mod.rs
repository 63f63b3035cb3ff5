//! Road-curvature estimation from windows of estimated positions.
//!
//! The analytic route computes the plane-curve formula κ = det(L′, L″)/‖L′‖³
//! with central finite differences and averages the magnitudes over the
//! window interior. The fitted route is a small regressor trained on
//! synthetic windows; it exists because finite differences are badly biased
//! on noisy tracks. Both are exposed behind [`CurvatureEstimator`].

mod dataset;
mod net;

pub use dataset::{
    generate_curvature_dataset, parse_window_csv, window_csv, CurvatureDatasetConfig,
    LabeledWindow,
};
use net::MlpRegressor;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

const ESTIMATOR_FORMAT_VERSION: u32 = 1;

/// Output clamp range: the curvature span of the training grid.
pub const KAPPA_CLAMP: (f64, f64) = (0.0, 1.0);

/// Default window length N.
pub const DEFAULT_N: usize = 20;

/// Ordered window of N estimated positions (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct PositionWindow {
    points: Vec<Vector2<f64>>,
}

impl PositionWindow {
    /// Requires N ≥ 5 and at least two distinct points.
    pub fn new(points: Vec<Vector2<f64>>) -> Result<Self> {
        if points.len() < 5 {
            return Err(Error::config(format!(
                "position window needs at least 5 points, got {}",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::config("position window has non-finite points"));
        }
        let first = points[0];
        if points.iter().all(|p| (p - first).norm() < 1e-12) {
            return Err(Error::config("position window points are all identical"));
        }
        Ok(PositionWindow { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vector2<f64>] {
        &self.points
    }
}

/// Signed curvature from first and second derivatives:
/// κ = det([d1 d2]) / ‖d1‖³.
pub fn point_curvature(d1: Vector2<f64>, d2: Vector2<f64>) -> Result<f64> {
    let speed = d1.norm();
    if speed <= 1e-9 {
        return Err(Error::numerical(
            None,
            format!("curvature undefined: first derivative norm {speed:.3e}"),
        ));
    }
    Ok((d1.x * d2.y - d1.y * d2.x) / speed.powi(3))
}

/// Mean |κ| over the window interior using central finite differences.
/// Parametrization-invariant, so unit spacing is used. Endpoints are
/// excluded from the average.
pub fn segment_curvature(w: &PositionWindow) -> Result<f64> {
    let p = w.points();
    let n = p.len();
    let mut sum = 0.0;
    for j in 1..n - 1 {
        let d1 = (p[j + 1] - p[j - 1]) * 0.5;
        let d2 = p[j + 1] - 2.0 * p[j] + p[j - 1];
        sum += point_curvature(d1, d2)?.abs();
    }
    Ok(sum / (n - 2) as f64)
}

/// Window brought to canonical pose: translated to the first point, rotated
/// so the chord lies along +x, scaled by the chord length, and mirrored so
/// the arc bulges upward.
#[derive(Debug, Clone)]
pub struct NormalizedWindow {
    /// Canonical points; first = (0,0), last = (1,0).
    pub points: Vec<Vector2<f64>>,
    /// Chord length in meters.
    pub chord: f64,
    /// Path length / chord length.
    pub winding: f64,
}

/// Returns `None` when the chord is degenerate (a wrapped or stationary
/// window that cannot be chord-normalized).
pub fn normalize_window(points: &[Vector2<f64>]) -> Option<NormalizedWindow> {
    let n = points.len();
    let chord_vec = points[n - 1] - points[0];
    let chord = chord_vec.norm();
    let path: f64 = points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if chord < 1e-12 || chord < 0.05 * path {
        return None;
    }
    let (cos_t, sin_t) = (chord_vec.x / chord, chord_vec.y / chord);
    let mut out: Vec<Vector2<f64>> = points
        .iter()
        .map(|p| {
            let d = p - points[0];
            Vector2::new(
                (d.x * cos_t + d.y * sin_t) / chord,
                (-d.x * sin_t + d.y * cos_t) / chord,
            )
        })
        .collect();
    let y_sum: f64 = out.iter().map(|p| p.y).sum();
    if y_sum < 0.0 {
        for p in &mut out {
            p.y = -p.y;
        }
    }
    Some(NormalizedWindow {
        points: out,
        chord,
        winding: path / chord,
    })
}

/// Algebraic (Kåsa) circle fit on canonical points; returns the fitted
/// dimensionless curvature (chord-scaled), or `None` for degenerate fits.
pub(crate) fn kasa_curvature(points: &[Vector2<f64>]) -> Option<f64> {
    // Solve min Σ (x² + y² + D·x + E·y + F)² for (D, E, F).
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sxz, mut syz, mut sz) = (0.0, 0.0, 0.0);
    for p in points {
        let z = p.x * p.x + p.y * p.y;
        sx += p.x;
        sy += p.y;
        sxx += p.x * p.x;
        syy += p.y * p.y;
        sxy += p.x * p.y;
        sxz += p.x * z;
        syz += p.y * z;
        sz += z;
    }
    let a = nalgebra::Matrix3::new(sxx, sxy, sx, sxy, syy, sy, sx, sy, n);
    let b = nalgebra::Vector3::new(-sxz, -syz, -sz);
    let sol = a.lu().solve(&b)?;
    let (d, e, f) = (sol[0], sol[1], sol[2]);
    let r2 = 0.25 * (d * d + e * e) - f;
    if r2 <= 1e-12 {
        return None;
    }
    Some(1.0 / r2.sqrt())
}

/// Number of inputs the fitted regressor consumes for a window of length n.
fn feature_len(n: usize) -> usize {
    2 * (n - 2) + 5
}

/// Index of the circle-fit prior inside the feature vector.
fn kasa_index(n: usize) -> usize {
    2 * (n - 2) + 2
}

/// Shape features of a canonical window: interior coordinates plus the
/// chord scale, winding ratio, and two cheap curvature priors.
fn window_features(norm: &NormalizedWindow) -> Vec<f64> {
    let n = norm.points.len();
    let mut feats = Vec::with_capacity(feature_len(n));
    for p in &norm.points[1..n - 1] {
        feats.push(p.x);
        feats.push(p.y);
    }
    feats.push(norm.chord.ln());
    feats.push(norm.winding);
    feats.push(kasa_curvature(&norm.points).unwrap_or(0.0).clamp(0.0, 4.0));
    let analytic = PositionWindow::new(norm.points.clone())
        .ok()
        .and_then(|w| segment_curvature(&w).ok())
        .unwrap_or(0.0);
    feats.push(analytic.clamp(0.0, 4.0));
    // High-frequency jitter: RMS of second differences, a within-window
    // noise-level proxy.
    let mut jitter = 0.0;
    for i in 1..n - 1 {
        let d2 = norm.points[i + 1] - 2.0 * norm.points[i] + norm.points[i - 1];
        jitter += d2.norm_squared();
    }
    feats.push((jitter / (n - 2) as f64).sqrt());
    feats
}

/// Analytic or fitted curvature estimator for fixed-length windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EstimatorKind {
    Analytic,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEstimator {
    pub version: u32,
    pub kind: EstimatorKind,
    /// Configured window length N.
    pub n: usize,
    /// Small ensemble; predictions are averaged.
    nets: Vec<MlpRegressor>,
    feat_mean: Vec<f64>,
    feat_std: Vec<f64>,
    /// RMSE achieved on the held-out split during fitting (fitted kind only).
    pub holdout_rmse: Option<f64>,
}

impl CurvatureEstimator {
    pub fn analytic(n: usize) -> Self {
        CurvatureEstimator {
            version: ESTIMATOR_FORMAT_VERSION,
            kind: EstimatorKind::Analytic,
            n,
            nets: Vec::new(),
            feat_mean: Vec::new(),
            feat_std: Vec::new(),
            holdout_rmse: None,
        }
    }

    pub fn save_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimator serialization cannot fail")
    }

    pub fn load_json(text: &str) -> Result<Self> {
        let est: CurvatureEstimator = serde_json::from_str(text)
            .map_err(|e| Error::Format(format!("curvature estimator file: {e}")))?;
        if est.version != ESTIMATOR_FORMAT_VERSION {
            return Err(Error::Format(format!(
                "unsupported estimator format version {}",
                est.version
            )));
        }
        if est.kind == EstimatorKind::Fitted && est.nets.is_empty() {
            return Err(Error::Format(
                "fitted estimator file is missing its parameters".into(),
            ));
        }
        Ok(est)
    }

    fn predict_fitted(&self, points: &[Vector2<f64>]) -> f64 {
        let Some(norm) = normalize_window(points) else {
            // Wrapped window: fall back to the analytic route.
            return PositionWindow::new(points.to_vec())
                .ok()
                .and_then(|w| segment_curvature(&w).ok())
                .unwrap_or(0.0)
                .clamp(KAPPA_CLAMP.0, KAPPA_CLAMP.1);
        };
        let mut feats = window_features(&norm);
        let prior = feats[kasa_index(points.len())];
        for (i, f) in feats.iter_mut().enumerate() {
            *f = (*f - self.feat_mean[i]) / self.feat_std[i];
        }
        let residual = self.nets.iter().map(|n| n.predict(&feats)).sum::<f64>()
            / self.nets.len() as f64;
        (prior / norm.chord + residual).clamp(KAPPA_CLAMP.0, KAPPA_CLAMP.1)
    }
}

/// Training configuration for the fitted estimator.
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub n: usize,
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub holdout_frac: f64,
    /// Required held-out RMSE (1/m); training errors out above this.
    pub rmse_bar: f64,
    /// Independently seeded nets whose predictions are averaged.
    pub ensemble: usize,
    pub seed: u64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            n: DEFAULT_N,
            hidden: vec![64, 64],
            epochs: 200,
            batch: 256,
            learning_rate: 1e-3,
            holdout_frac: 0.2,
            rmse_bar: 0.02,
            ensemble: 2,
            seed: 17,
        }
    }
}

/// Trains the regressor on labeled windows and validates it on a held-out
/// split. The regression target is the chord-scaled curvature κ·c, which is
/// dimensionless and bounded; predictions are divided back by the chord.
pub fn fit_curvature_estimator(
    data: &[LabeledWindow],
    config: &FitConfig,
) -> Result<CurvatureEstimator> {
    if data.is_empty() {
        return Err(Error::config("curvature training set is empty"));
    }
    if data.iter().any(|w| w.points.len() != config.n) {
        return Err(Error::config(format!(
            "all training windows must have length N = {}",
            config.n
        )));
    }
    // Deterministic shuffle, then split.
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = rng_for(config.seed, &[data.len() as u64]);
    for i in (1..order.len()).rev() {
        let j = rand::Rng::random_range(&mut rng, 0..=i);
        order.swap(i, j);
    }
    let holdout = ((data.len() as f64 * config.holdout_frac) as usize).min(data.len() - 1);
    let (test_idx, train_idx) = order.split_at(holdout);

    let mut feats: Vec<Vec<f64>> = Vec::with_capacity(train_idx.len());
    let mut targets: Vec<f64> = Vec::with_capacity(train_idx.len());
    for &i in train_idx {
        if let Some(norm) = normalize_window(&data[i].points) {
            let f = window_features(&norm);
            // The net regresses the curvature residual left by the
            // circle-fit prior, in label units.
            targets.push(data[i].kappa - f[kasa_index(config.n)] / norm.chord);
            feats.push(f);
        }
    }
    if feats.len() < 2 {
        return Err(Error::state(
            "too few normalizable windows in the training split",
        ));
    }
    let dim = feats[0].len();
    let mut mean = vec![0.0; dim];
    for f in &feats {
        for i in 0..dim {
            mean[i] += f[i];
        }
    }
    for m in &mut mean {
        *m /= feats.len() as f64;
    }
    let mut std = vec![0.0; dim];
    for f in &feats {
        for i in 0..dim {
            std[i] += (f[i] - mean[i]).powi(2);
        }
    }
    for s in &mut std {
        *s = (*s / feats.len() as f64).sqrt();
        if *s < 1e-9 {
            *s = 1.0;
        }
    }
    for f in &mut feats {
        for i in 0..dim {
            f[i] = (f[i] - mean[i]) / std[i];
        }
    }

    let nets: Vec<MlpRegressor> = (0..config.ensemble.max(1))
        .map(|member| {
            net::train(
                &feats,
                &targets,
                &config.hidden,
                net::TrainConfig {
                    epochs: config.epochs,
                    batch: config.batch,
                    learning_rate: config.learning_rate,
                    seed: crate::seed::derive_seed(config.seed, &[member as u64]),
                },
            )
        })
        .collect();

    let mut est = CurvatureEstimator {
        version: ESTIMATOR_FORMAT_VERSION,
        kind: EstimatorKind::Fitted,
        n: config.n,
        nets,
        feat_mean: mean,
        feat_std: std,
        holdout_rmse: None,
    };

    // Held-out evaluation in curvature units.
    let rmse = if test_idx.is_empty() {
        0.0
    } else {
        let mut sq = 0.0;
        for &i in test_idx {
            let pred = est.predict_fitted(&data[i].points);
            sq += (pred - data[i].kappa).powi(2);
        }
        (sq / test_idx.len() as f64).sqrt()
    };
    est.holdout_rmse = Some(rmse);
    if rmse > config.rmse_bar {
        return Err(Error::Training {
            achieved: rmse,
            required: config.rmse_bar,
        });
    }
    Ok(est)
}

/// Curvature of a window through the configured estimator. The window length
/// must match the estimator's N. Outputs are nonnegative and clamped to the
/// training-grid range [0, 1] 1/m.
pub fn estimate_curvature(est: &CurvatureEstimator, w: &PositionWindow) -> Result<f64> {
    if w.len() != est.n {
        return Err(Error::config(format!(
            "window length {} does not match estimator N = {}",
            w.len(),
            est.n
        )));
    }
    match est.kind {
        EstimatorKind::Analytic => {
            Ok(segment_curvature(w)?.clamp(KAPPA_CLAMP.0, KAPPA_CLAMP.1))
        }
        EstimatorKind::Fitted => Ok(est.predict_fitted(w.points())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn circle_window(radius: f64, n: usize, step_angle: f64, phase: f64) -> Vec<Vector2<f64>> {
        (0..n)
            .map(|i| {
                let t = phase + i as f64 * step_angle;
                Vector2::new(radius * t.cos(), radius * t.sin())
            })
            .collect()
    }

    #[test]
    fn point_curvature_of_a_circle_is_inverse_radius() {
        // Arc-length parametrization of a radius-10 circle.
        let theta: f64 = 0.7;
        let d1 = Vector2::new(-theta.sin(), theta.cos());
        let d2 = Vector2::new(-theta.cos(), -theta.sin()) / 10.0;
        let k = point_curvature(d1, d2).unwrap();
        assert_abs_diff_eq!(k.abs(), 0.1, epsilon = 1e-12);

        let d2_20 = Vector2::new(-theta.cos(), -theta.sin()) / 20.0;
        assert_abs_diff_eq!(point_curvature(d1, d2_20).unwrap().abs(), 0.05, epsilon = 1e-6);
    }

    #[test]
    fn point_curvature_of_parallel_derivatives_is_zero() {
        let d1 = Vector2::new(2.0, 1.0);
        let d2 = Vector2::new(4.0, 2.0);
        assert_eq!(point_curvature(d1, d2).unwrap(), 0.0);
    }

    #[test]
    fn point_curvature_rejects_vanishing_first_derivative() {
        assert!(point_curvature(Vector2::new(1e-12, 0.0), Vector2::new(1.0, 1.0)).is_err());
    }

    #[test]
    fn segment_curvature_on_a_clean_circle_window() {
        // 20 points on a radius-10 circle at speed 10, Δt = 0.1: step angle 0.1 rad.
        let w = PositionWindow::new(circle_window(10.0, 20, 0.1, 0.3)).unwrap();
        let k = segment_curvature(&w).unwrap();
        assert!((k - 0.1).abs() / 0.1 < 0.02, "κ = {k}");
    }

    #[test]
    fn segment_curvature_of_collinear_points_is_zero() {
        let pts: Vec<Vector2<f64>> = (0..10)
            .map(|i| Vector2::new(i as f64 * 0.5, i as f64 * 1.25))
            .collect();
        let w = PositionWindow::new(pts).unwrap();
        assert_abs_diff_eq!(segment_curvature(&w).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn noisy_windows_bias_the_analytic_estimate_high() {
        // The reason the fitted estimator exists: white noise inflates the
        // second difference, so finite-difference curvature overshoots.
        let mut rng = crate::seed::rng_for(881, &[]);
        let mut mean = 0.0;
        let runs = 50;
        for _ in 0..runs {
            let pts: Vec<Vector2<f64>> = circle_window(10.0, 20, 0.1, 0.0)
                .into_iter()
                .map(|p| {
                    Vector2::new(
                        p.x + rng.random_range(-1.0..1.0),
                        p.y + rng.random_range(-1.0..1.0),
                    )
                })
                .collect();
            let w = PositionWindow::new(pts).unwrap();
            mean += segment_curvature(&w).unwrap();
        }
        mean /= runs as f64;
        assert!(mean > 0.15, "noisy analytic mean {mean} should exceed the true 0.1");
    }

    #[test]
    fn window_invariants_are_enforced() {
        assert!(PositionWindow::new(vec![Vector2::zeros(); 4]).is_err());
        assert!(PositionWindow::new(vec![Vector2::new(1.0, 2.0); 8]).is_err());
        let mut pts = vec![Vector2::new(1.0, 2.0); 8];
        pts[3] = Vector2::new(1.5, 2.0);
        assert!(PositionWindow::new(pts).is_ok());
    }

    #[test]
    fn repeated_interior_points_propagate_an_undefined_curvature_error() {
        let mut pts: Vec<Vector2<f64>> = (0..8).map(|i| Vector2::new(i as f64, 0.0)).collect();
        pts[3] = pts[2];
        pts[4] = pts[2]; // d1 vanishes at the middle stencil
        let w = PositionWindow::new(pts).unwrap();
        assert!(segment_curvature(&w).is_err());
    }

    #[test]
    fn similarity_scaling_inverts_curvature() {
        let pts = circle_window(10.0, 20, 0.08, 0.5);
        let w = PositionWindow::new(pts.clone()).unwrap();
        let k = segment_curvature(&w).unwrap();
        for c in [0.5, 3.0, 25.0] {
            let scaled = PositionWindow::new(pts.iter().map(|p| p * c).collect()).unwrap();
            let ks = segment_curvature(&scaled).unwrap();
            assert_abs_diff_eq!(ks, k / c, epsilon = 1e-9 * k);
        }
    }

    #[test]
    fn rigid_motions_leave_curvature_unchanged() {
        let pts = circle_window(25.0, 16, 0.05, 1.1);
        let w = PositionWindow::new(pts.clone()).unwrap();
        let k = segment_curvature(&w).unwrap();
        let (cos_a, sin_a) = (0.6f64, 0.8f64);
        let moved: Vec<Vector2<f64>> = pts
            .iter()
            .map(|p| {
                Vector2::new(
                    cos_a * p.x - sin_a * p.y + 311.0,
                    sin_a * p.x + cos_a * p.y - 94.0,
                )
            })
            .collect();
        let wm = PositionWindow::new(moved).unwrap();
        assert_abs_diff_eq!(segment_curvature(&wm).unwrap(), k, epsilon = 1e-9);
    }

    #[test]
    fn reversal_preserves_curvature_magnitude() {
        let pts = circle_window(12.0, 14, 0.09, 0.2);
        let w = PositionWindow::new(pts.clone()).unwrap();
        let k = segment_curvature(&w).unwrap();
        let rev: Vec<Vector2<f64>> = pts.into_iter().rev().collect();
        let wr = PositionWindow::new(rev).unwrap();
        assert_abs_diff_eq!(segment_curvature(&wr).unwrap(), k, epsilon = 1e-12);
    }

    #[test]
    fn normalization_is_canonical() {
        let pts = circle_window(10.0, 20, 0.1, 0.7);
        let norm = normalize_window(&pts).unwrap();
        assert_abs_diff_eq!(norm.points[0].x, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm.points[0].y, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm.points[19].x, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(norm.points[19].y, 0.0, epsilon = 1e-12);
        let y_sum: f64 = norm.points.iter().map(|p| p.y).sum();
        assert!(y_sum >= 0.0);

        // Same window, rotated, translated, and reversed: identical canonical shape.
        let moved: Vec<Vector2<f64>> = pts
            .iter()
            .rev()
            .map(|p| Vector2::new(-p.y + 50.0, p.x - 20.0))
            .collect();
        let norm2 = normalize_window(&moved).unwrap();
        for (a, b) in norm.points.iter().zip(norm2.points.iter().rev()) {
            assert_abs_diff_eq!(a.y, b.y, epsilon = 1e-9);
            assert_abs_diff_eq!(a.x, 1.0 - b.x, epsilon = 1e-9);
        }
    }

    #[test]
    fn kasa_fit_recovers_circle_curvature() {
        let pts = circle_window(10.0, 20, 0.1, 0.4);
        let norm = normalize_window(&pts).unwrap();
        let u = kasa_curvature(&norm.points).unwrap();
        // κ·chord: chord of a 1.9 rad arc on radius 10.
        let expected = 0.1 * norm.chord;
        assert_abs_diff_eq!(u, expected, epsilon = 1e-6);
    }

    #[test]
    fn estimator_enforces_window_length() {
        let est = CurvatureEstimator::analytic(20);
        let w = PositionWindow::new(circle_window(10.0, 19, 0.1, 0.0)).unwrap();
        assert!(estimate_curvature(&est, &w).is_err());
    }

    #[test]
    fn analytic_estimator_delegates_and_clamps() {
        let est = CurvatureEstimator::analytic(20);
        let w = PositionWindow::new(circle_window(10.0, 20, 0.1, 0.0)).unwrap();
        let k = estimate_curvature(&est, &w).unwrap();
        assert!((k - 0.1).abs() / 0.1 < 0.02);

        // A violently jagged window exceeds the clamp range.
        let mut zigzag = Vec::new();
        for i in 0..20 {
            zigzag.push(Vector2::new(i as f64 * 0.1, if i % 2 == 0 { 0.0 } else { 1.0 }));
        }
        let wz = PositionWindow::new(zigzag).unwrap();
        assert_eq!(estimate_curvature(&est, &wz).unwrap(), KAPPA_CLAMP.1);
    }

    #[test]
    fn constant_label_training_yields_a_constant_predictor() {
        // Degenerate label distribution: every window from the same circle.
        let mut data = Vec::new();
        let mut rng = crate::seed::rng_for(882, &[]);
        for _ in 0..120 {
            let phase = rng.random_range(0.0..6.0);
            data.push(LabeledWindow {
                kappa: 0.1,
                r: 0.0,
                speed: 10.0,
                points: circle_window(10.0, 20, 0.1, phase),
            });
        }
        let cfg = FitConfig {
            epochs: 300,
            batch: 32,
            rmse_bar: 0.01,
            ..FitConfig::default()
        };
        let est = fit_curvature_estimator(&data, &cfg).unwrap();
        assert!(est.holdout_rmse.unwrap() <= 0.01);
        let probe = PositionWindow::new(circle_window(10.0, 20, 0.1, 3.3)).unwrap();
        let k = estimate_curvature(&est, &probe).unwrap();
        assert_abs_diff_eq!(k, 0.1, epsilon = 0.01);
    }

    #[test]
    fn fitted_estimator_handles_straight_segments() {
        // Train on a small mixed set of circles and lines, then probe
        // noise-free straight windows.
        let mut data = Vec::new();
        let mut rng = crate::seed::rng_for(883, &[]);
        for i in 0..6 {
            let kappa = 0.02 + 0.18 * i as f64;
            let radius = 1.0 / kappa;
            for _ in 0..40 {
                let phase = rng.random_range(0.0..6.0);
                let step = (1.0 / radius).min(0.12);
                data.push(LabeledWindow {
                    kappa,
                    r: 0.0,
                    speed: 10.0,
                    points: circle_window(radius, 20, step, phase),
                });
            }
        }
        for _ in 0..60 {
            let heading: f64 = rng.random_range(0.0..6.28);
            let step = rng.random_range(0.5..2.0);
            let origin = Vector2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0));
            let dir = Vector2::new(heading.cos(), heading.sin());
            data.push(LabeledWindow {
                kappa: 0.0,
                r: 0.0,
                speed: 10.0,
                points: (0..20).map(|i| origin + dir * (step * i as f64)).collect(),
            });
        }
        let cfg = FitConfig {
            epochs: 400,
            batch: 64,
            rmse_bar: 0.02,
            ..FitConfig::default()
        };
        let est = fit_curvature_estimator(&data, &cfg).unwrap();
        let probe: Vec<Vector2<f64>> =
            (0..20).map(|i| Vector2::new(3.0 + 0.8 * i as f64, -2.0)).collect();
        let w = PositionWindow::new(probe).unwrap();
        let k = estimate_curvature(&est, &w).unwrap();
        assert!(k.abs() <= 0.02, "straight-line prediction {k}");
    }

    #[test]
    fn estimator_json_round_trip() {
        let est = CurvatureEstimator::analytic(20);
        let text = est.save_json();
        let loaded = CurvatureEstimator::load_json(&text).unwrap();
        assert_eq!(est, loaded);
    }
}
