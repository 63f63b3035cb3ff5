//! Synthetic training grid, Monte-Carlo q* oracle, and the learned Q tuner.
//!
//! Circles parametrized by (curvature, speed, measurement noise) are filtered
//! with every candidate process-noise intensity; the intensity minimizing the
//! Monte-Carlo mean PRMSE becomes the label q*. A supervised model trained on
//! those labels serves online predictions, and `hedge_q` projects any proposed
//! Q back onto the nonnegative-diagonal trailing-block template.

mod tuner;

pub use tuner::{train_tuner, TunerAlgorithm, TunerModel, TunerRecord};

use nalgebra::{DMatrix, Vector2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kalman::{
    initialize, propagate, update, CovarianceMatrix, Measurement, StateVector,
};
use crate::metrics;
use crate::models::{make_model, q_template, ModelKind, MotionModel};
use crate::seed::{derive_seed, rng_for};

/// The printed candidate list, 33 values.
pub const Q_CANDIDATES_PRINTED: [f64; 33] = [
    0.005, 0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.2, 1.3, 1.5, 2.0, 2.5,
    3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 25.0, 30.0,
];

/// Full candidate set 𝒬: the printed list plus 0.04, which the reference
/// optimum must be able to reach. 34 values, ascending.
pub fn q_candidates() -> Vec<f64> {
    let mut all: Vec<f64> = Q_CANDIDATES_PRINTED.to_vec();
    all.push(0.04);
    all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    all
}

/// Training-range bounds for each feature.
pub const KAPPA_RANGE: (f64, f64) = (1.0 / 200.0, 1.0);
pub const SPEED_RANGE: (f64, f64) = (2.0, 40.0);
pub const R_RANGE: (f64, f64) = (0.2, 4.0);

/// Sampling-quality margin for the grid: points whose per-step turn angle
/// ω·Δt exceeds π/8 are skipped when building datasets (the hard error bound
/// in [`generate_circle`] is π/4).
pub const MAX_STEP_ANGLE_GRID: f64 = std::f64::consts::FRAC_PI_8;

/// Initial covariance diagonal consistent with the finite-difference
/// initialization: position variance r, velocity variance 2r/dt² (the
/// variance of the two-point difference), acceleration variance 6r/dt⁴
/// (three-point second difference).
pub fn init_p0_diag(state_dim: usize, r: f64, dt: f64) -> Vec<f64> {
    let mut diag = vec![0.0; state_dim];
    let r_eff = r.max(1e-12);
    diag[0] = r_eff;
    diag[1] = r_eff;
    diag[2] = 2.0 * r_eff / (dt * dt);
    diag[3] = diag[2];
    if state_dim == 6 {
        diag[4] = 6.0 * r_eff / dt.powi(4);
        diag[5] = diag[4];
    }
    diag
}

/// Oracle circle duration: one revolution, clamped to this window (seconds).
pub const DURATION_BOUNDS: (f64, f64) = (10.0, 120.0);

/// The (curvature, speed, noise) triple the tuner maps to q*.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureVector {
    /// Road curvature, 1/m.
    pub kappa: f64,
    /// Vehicle speed, m/s.
    pub speed: f64,
    /// Measurement noise variance, m².
    pub r: f64,
}

impl FeatureVector {
    pub fn new(kappa: f64, speed: f64, r: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::config(format!("curvature must be >= 0, got {kappa}")));
        }
        if !speed.is_finite() || speed <= 0.0 {
            return Err(Error::config(format!("speed must be > 0, got {speed}")));
        }
        if !r.is_finite() || r <= 0.0 {
            return Err(Error::config(format!("noise variance must be > 0, got {r}")));
        }
        Ok(FeatureVector { kappa, speed, r })
    }

    /// Clamps every component into its training range.
    pub fn clamped(&self) -> FeatureVector {
        FeatureVector {
            kappa: self.kappa.clamp(KAPPA_RANGE.0, KAPPA_RANGE.1),
            speed: self.speed.clamp(SPEED_RANGE.0, SPEED_RANGE.1),
            r: self.r.clamp(R_RANGE.0, R_RANGE.1),
        }
    }
}

/// One oracle result: the PRMSE-minimizing candidate for a feature triple.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QGridRecord {
    pub features: FeatureVector,
    pub model_kind: ModelKind,
    pub q_star: f64,
    pub achieved_prmse: f64,
    pub mc_iters: usize,
    pub seed: u64,
}

/// A simulated circular trajectory with noisy position measurements.
#[derive(Debug, Clone)]
pub struct CircleSim {
    pub dt: f64,
    pub truth: Vec<Vector2<f64>>,
    pub measurements: Vec<Measurement>,
}

/// Samples the circle p(t) = (cos ωt, sin ωt)/κ with ω = s·κ at step Δt and
/// adds zero-mean Gaussian noise of variance r per axis. Deterministic under
/// the seed.
pub fn generate_circle(
    kappa: f64,
    speed: f64,
    r: f64,
    duration: f64,
    dt: f64,
    seed: u64,
) -> Result<CircleSim> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::config(format!("curvature must be > 0, got {kappa}")));
    }
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::config(format!("speed must be > 0, got {speed}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::config(format!("noise variance must be >= 0, got {r}")));
    }
    if !(duration > 0.0) || !(dt > 0.0) {
        return Err(Error::config("duration and dt must be > 0"));
    }
    let omega = speed * kappa;
    if omega * dt > std::f64::consts::FRAC_PI_4 {
        return Err(Error::config(format!(
            "under-sampled circle: ω·Δt = {:.4} exceeds π/4",
            omega * dt
        )));
    }
    let steps = (duration / dt).floor() as usize + 1;
    let radius = 1.0 / kappa;
    let mut rng = rng_for(seed, &[]);
    let noise = Normal::new(0.0, r.sqrt()).map_err(|e| Error::config(e.to_string()))?;
    let mut truth = Vec::with_capacity(steps);
    let mut measurements = Vec::with_capacity(steps);
    for k in 0..steps {
        let t = k as f64 * dt;
        let p = Vector2::new(radius * (omega * t).cos(), radius * (omega * t).sin());
        let z = if r > 0.0 {
            Vector2::new(p.x + noise.sample(&mut rng), p.y + noise.sample(&mut rng))
        } else {
            p
        };
        truth.push(p);
        measurements.push(Measurement { z, step_index: k });
    }
    Ok(CircleSim {
        dt,
        truth,
        measurements,
    })
}

/// Oracle circle duration for an angular rate: one revolution clamped to
/// [`DURATION_BOUNDS`].
pub fn oracle_duration(omega: f64) -> f64 {
    (2.0 * std::f64::consts::PI / omega).clamp(DURATION_BOUNDS.0, DURATION_BOUNDS.1)
}

/// Runs a constant-Q filter over the simulation and returns the estimated
/// positions, or `None` if the filter produced a non-finite state.
///
/// Initialization: position from the second measurement, velocity from the
/// finite difference of the first two, acceleration zero; P0 per
/// [`init_p0_diag`]. The first two estimates are the measurements themselves.
pub fn run_constant_q(
    sim: &CircleSim,
    model: &MotionModel,
    q: f64,
    r: f64,
) -> Option<Vec<Vector2<f64>>> {
    let n = sim.measurements.len();
    if n < 2 {
        return None;
    }
    let dim = model.state_dim();
    let z0 = sim.measurements[0].z;
    let z1 = sim.measurements[1].z;
    let mut x0 = vec![0.0; dim];
    x0[0] = z1.x;
    x0[1] = z1.y;
    x0[2] = (z1.x - z0.x) / sim.dt;
    x0[3] = (z1.y - z0.y) / sim.dt;
    let p0_diag = init_p0_diag(dim, r, sim.dt);
    let mut fs = initialize(
        StateVector::from_slice(&x0).ok()?,
        CovarianceMatrix::from_diagonal(&p0_diag).ok()?,
    )
    .ok()?;
    let q_mat = q_template(dim, q, q);
    let r_mat = nalgebra::Matrix2::new(r.max(1e-12), 0.0, 0.0, r.max(1e-12));
    let mut estimates = Vec::with_capacity(n);
    estimates.push(z0);
    estimates.push(z1);
    for k in 2..n {
        fs = propagate(&fs, model.phi(), &q_mat).ok()?;
        fs = update(&fs, &sim.measurements[k], model.h(), &r_mat).ok()?;
        let p = fs.x_hat().position();
        if !p.x.is_finite() || !p.y.is_finite() {
            return None;
        }
        estimates.push(p);
    }
    Some(estimates)
}

/// Grid-searches the candidate set for the intensity minimizing the
/// Monte-Carlo mean PRMSE at one feature triple. All candidates are scored on
/// the same `mc_iters` independently seeded simulations; divergent candidates
/// score +∞; ties break toward the smaller candidate.
pub fn grid_search_qstar(
    features: &FeatureVector,
    model_kind: ModelKind,
    candidates: &[f64],
    mc_iters: usize,
    dt: f64,
    seed: u64,
) -> Result<QGridRecord> {
    if candidates.is_empty() {
        return Err(Error::config("candidate set is empty"));
    }
    if mc_iters < 1 {
        return Err(Error::config("mc_iters must be >= 1"));
    }
    if candidates.iter().any(|&q| !(q > 0.0) || !q.is_finite()) {
        return Err(Error::config("candidates must be finite and > 0"));
    }
    let mut sorted: Vec<f64> = candidates.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();

    let model = make_model(model_kind, dt)?;
    let omega = features.speed * features.kappa;
    let duration = oracle_duration(omega);
    let sims: Vec<CircleSim> = (0..mc_iters)
        .map(|i| {
            generate_circle(
                features.kappa,
                features.speed,
                features.r,
                duration,
                dt,
                derive_seed(seed, &[i as u64]),
            )
        })
        .collect::<Result<_>>()?;

    let mut best_q = sorted[0];
    let mut best_score = f64::INFINITY;
    for &q in &sorted {
        let mut total = 0.0;
        let mut diverged = false;
        for sim in &sims {
            match run_constant_q(sim, &model, q, features.r) {
                Some(est) => total += metrics::prmse(&sim.truth, &est)?,
                None => {
                    diverged = true;
                    break;
                }
            }
        }
        let score = if diverged {
            f64::INFINITY
        } else {
            total / mc_iters as f64
        };
        if score < best_score {
            best_score = score;
            best_q = q;
        }
    }
    if !best_score.is_finite() {
        return Err(Error::numerical(
            None,
            "every candidate diverged in the grid search",
        ));
    }
    Ok(QGridRecord {
        features: *features,
        model_kind,
        q_star: best_q,
        achieved_prmse: best_score,
        mc_iters,
        seed,
    })
}

/// Named grids over the training ranges.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    /// Every node of the training table: 10 curvatures × 20 speeds × 20 noise levels.
    Full,
    /// Coarse subsample sized for desk-scale runs: 6 × 8 × 6.
    Desk,
    /// Explicit feature triples.
    Custom(Vec<FeatureVector>),
}

impl GridSpec {
    /// Grid nodes in deterministic (κ outer, s middle, r inner) order.
    pub fn points(&self) -> Vec<FeatureVector> {
        match self {
            GridSpec::Full => {
                let kappas: Vec<f64> = (0..10).map(|i| 1.0 / 200.0 + i as f64 * 0.1).collect();
                let speeds: Vec<f64> = (1..=20).map(|i| 2.0 * i as f64).collect();
                let rs: Vec<f64> = (1..=20).map(|i| 0.2 * i as f64).collect();
                cross(&kappas, &speeds, &rs)
            }
            GridSpec::Desk => {
                let kappas = [0.005, 0.105, 0.305, 0.505, 0.705, 0.905];
                let speeds = [2.0, 4.0, 6.0, 10.0, 14.0, 20.0, 28.0, 40.0];
                let rs = [0.2, 0.6, 1.0, 2.0, 3.0, 4.0];
                cross(&kappas, &speeds, &rs)
            }
            GridSpec::Custom(points) => points.clone(),
        }
    }

    /// Grid nodes whose per-step turn angle satisfies the sampling margin at
    /// this step size.
    pub fn feasible_points(&self, dt: f64) -> Vec<FeatureVector> {
        self.points()
            .into_iter()
            .filter(|f| f.kappa * f.speed * dt <= MAX_STEP_ANGLE_GRID)
            .collect()
    }
}

fn cross(kappas: &[f64], speeds: &[f64], rs: &[f64]) -> Vec<FeatureVector> {
    let mut out = Vec::with_capacity(kappas.len() * speeds.len() * rs.len());
    for &kappa in kappas {
        for &speed in speeds {
            for &r in rs {
                out.push(FeatureVector { kappa, speed, r });
            }
        }
    }
    out
}

/// Runs the oracle over every feasible grid node, streaming records to the
/// callback in grid order (so dataset files are byte-identical under a seed
/// regardless of thread count). `skip` lets a resumed run drop nodes whose
/// records already exist.
pub fn build_dataset<F>(
    grid: &GridSpec,
    model_kind: ModelKind,
    candidates: &[f64],
    mc_iters: usize,
    dt: f64,
    seed: u64,
    mut skip: impl FnMut(&FeatureVector) -> bool,
    mut on_record: F,
) -> Result<Vec<QGridRecord>>
where
    F: FnMut(&QGridRecord) -> Result<()>,
{
    let points: Vec<(usize, FeatureVector)> = grid
        .feasible_points(dt)
        .into_iter()
        .enumerate()
        .filter(|(_, f)| !skip(f))
        .collect();
    let mut records = Vec::with_capacity(points.len());
    for chunk in points.chunks(64) {
        let chunk_records: Vec<Result<QGridRecord>> = chunk
            .par_iter()
            .map(|(idx, f)| {
                grid_search_qstar(
                    f,
                    model_kind,
                    candidates,
                    mc_iters,
                    dt,
                    derive_seed(seed, &[*idx as u64]),
                )
            })
            .collect();
        for rec in chunk_records {
            let rec = rec?;
            on_record(&rec)?;
            records.push(rec);
        }
    }
    Ok(records)
}

/// Header of the q* dataset file.
pub const DATASET_HEADER: &str = "model,kappa,speed,r,q_star,prmse,mc_iters,seed";

impl QGridRecord {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.model_kind,
            self.features.kappa,
            self.features.speed,
            self.features.r,
            self.q_star,
            self.achieved_prmse,
            self.mc_iters,
            self.seed
        )
    }

    pub fn from_csv_line(line: &str, line_no: usize) -> Result<Self> {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 8 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 8 fields, got {}", parts.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            parts[i].trim().parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad number '{}': {e}", parts[i]),
            })
        };
        Ok(QGridRecord {
            model_kind: ModelKind::parse(parts[0].trim()).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?,
            features: FeatureVector {
                kappa: num(1)?,
                speed: num(2)?,
                r: num(3)?,
            },
            q_star: num(4)?,
            achieved_prmse: num(5)?,
            mc_iters: num(6)? as usize,
            seed: parts[7].trim().parse().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad seed '{}': {e}", parts[7]),
            })?,
        })
    }
}

/// Serializes records with the header line.
pub fn dataset_to_csv(records: &[QGridRecord]) -> String {
    let mut out = String::from(DATASET_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&rec.to_csv_line());
        out.push('\n');
    }
    out
}

/// Parses a dataset file produced by [`dataset_to_csv`].
pub fn dataset_from_csv(text: &str) -> Result<Vec<QGridRecord>> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != DATASET_HEADER {
                return Err(Error::Format(format!("unexpected dataset header: {line}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        records.push(QGridRecord::from_csv_line(line, idx + 1)?);
    }
    Ok(records)
}

/// Projects a proposed process-noise matrix onto the admissible template:
/// off-diagonal entries zeroed, negative diagonals zeroed, and all mass
/// outside the trailing 2×2 block removed.
pub fn hedge_q(q_raw: &CovarianceMatrix) -> CovarianceMatrix {
    let dim = q_raw.dim();
    let src = q_raw.as_matrix();
    let mut out = DMatrix::zeros(dim, dim);
    for i in (dim - 2)..dim {
        out[(i, i)] = src[(i, i)].max(0.0);
    }
    CovarianceMatrix::from_symmetric_unchecked(out)
}

/// Uniform draw from the training-range box, used by test suites.
pub fn random_features(rng: &mut impl Rng) -> FeatureVector {
    FeatureVector {
        kappa: rng.random_range(KAPPA_RANGE.0..KAPPA_RANGE.1),
        speed: rng.random_range(SPEED_RANGE.0..SPEED_RANGE.1),
        r: rng.random_range(R_RANGE.0..R_RANGE.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn candidate_set_has_34_values_including_the_added_optimum() {
        let q = q_candidates();
        assert_eq!(q.len(), 34);
        assert!(q.contains(&0.04));
        assert!(q.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(q[0], 0.005);
        assert_eq!(*q.last().unwrap(), 30.0);
    }

    #[test]
    fn circle_starts_on_the_positive_x_axis() {
        let sim = generate_circle(0.1, 10.0, 0.0, 10.0, 0.1, 1).unwrap();
        assert_abs_diff_eq!(sim.truth[0].x, 10.0, epsilon = 0.0);
        assert_abs_diff_eq!(sim.truth[0].y, 0.0, epsilon = 0.0);
    }

    #[test]
    fn angular_rate_is_speed_times_curvature() {
        // κ = 0.1, s = 10 → ω = 1 rad/s: one revolution takes 2π seconds.
        let dt = 0.01;
        let sim = generate_circle(0.1, 10.0, 0.0, 2.0 * std::f64::consts::PI, dt, 1).unwrap();
        let k_rev = (2.0 * std::f64::consts::PI / dt).floor() as usize;
        let p = sim.truth[k_rev];
        assert_abs_diff_eq!(p.x, 10.0, epsilon = 1e-1);
        assert_abs_diff_eq!(p.y, 0.0, epsilon = 1e-1);
        // Speed along the path matches s.
        let step = (sim.truth[1] - sim.truth[0]).norm();
        assert_abs_diff_eq!(step / dt, 10.0, epsilon = 1e-3);
    }

    #[test]
    fn zero_noise_means_measurements_equal_truth() {
        let sim = generate_circle(0.05, 5.0, 0.0, 12.0, 0.1, 7).unwrap();
        for (t, m) in sim.truth.iter().zip(&sim.measurements) {
            assert_eq!(*t, m.z);
        }
    }

    #[test]
    fn under_sampled_circle_is_rejected() {
        // ω·dt = 1·1 = 1 > π/4.
        assert!(generate_circle(0.1, 10.0, 1.0, 10.0, 1.0, 1).is_err());
    }

    #[test]
    fn circle_generation_is_deterministic() {
        let a = generate_circle(0.2, 8.0, 1.5, 15.0, 0.1, 42).unwrap();
        let b = generate_circle(0.2, 8.0, 1.5, 15.0, 0.1, 42).unwrap();
        assert_eq!(a.measurements.len(), b.measurements.len());
        for (x, y) in a.measurements.iter().zip(&b.measurements) {
            assert_eq!(x.z, y.z);
        }
    }

    #[test]
    fn grid_search_is_deterministic_with_one_iteration() {
        let f = FeatureVector::new(0.2, 5.0, 1.0).unwrap();
        let cands = [0.01, 0.1, 1.0];
        let a = grid_search_qstar(&f, ModelKind::Cv, &cands, 1, 0.1, 5).unwrap();
        let b = grid_search_qstar(&f, ModelKind::Cv, &cands, 1, 0.1, 5).unwrap();
        assert_eq!(a, b);
        assert!(cands.contains(&a.q_star));
        assert!(a.achieved_prmse >= 0.0);
    }

    #[test]
    fn dataset_csv_round_trips() {
        let f = FeatureVector::new(0.105, 4.0, 0.6).unwrap();
        let rec = QGridRecord {
            features: f,
            model_kind: ModelKind::Ca,
            q_star: 0.04,
            achieved_prmse: 0.3725,
            mc_iters: 20,
            seed: 99,
        };
        let text = dataset_to_csv(&[rec.clone()]);
        let parsed = dataset_from_csv(&text).unwrap();
        assert_eq!(parsed, vec![rec]);
    }

    #[test]
    fn small_subgrid_yields_one_record_per_point_all_in_candidates() {
        let kappas = [0.1, 0.2, 0.3];
        let speeds = [3.0, 5.0, 7.0];
        let rs = [0.5, 1.0, 2.0];
        let grid = GridSpec::Custom(cross(&kappas, &speeds, &rs));
        let cands = [0.01, 0.1, 1.0, 5.0];
        let records = build_dataset(
            &grid,
            ModelKind::Cv,
            &cands,
            2,
            0.1,
            3,
            |_| false,
            |_| Ok(()),
        )
        .unwrap();
        assert_eq!(records.len(), 27);
        assert!(records.iter().all(|r| cands.contains(&r.q_star)));
    }

    #[test]
    fn build_dataset_is_byte_deterministic() {
        let grid = GridSpec::Custom(cross(&[0.1, 0.4], &[4.0, 8.0], &[1.0]));
        let cands = [0.02, 0.2, 2.0];
        let run = || {
            let recs = build_dataset(
                &grid,
                ModelKind::Cv,
                &cands,
                3,
                0.1,
                11,
                |_| false,
                |_| Ok(()),
            )
            .unwrap();
            dataset_to_csv(&recs)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn grid_specs_have_the_documented_shapes() {
        assert_eq!(GridSpec::Full.points().len(), 10 * 20 * 20);
        assert_eq!(GridSpec::Desk.points().len(), 6 * 8 * 6);
        // Feasibility filtering keeps the slow nodes of every curvature row.
        let feasible = GridSpec::Desk.feasible_points(0.1);
        assert!(feasible.len() < 6 * 8 * 6);
        for kappa in [0.005, 0.105, 0.305, 0.505, 0.705, 0.905] {
            assert!(feasible.iter().any(|f| f.kappa == kappa));
        }
    }

    #[test]
    fn hedging_keeps_a_conforming_template_unchanged() {
        let q = CovarianceMatrix::from_diagonal(&[0.0, 0.0, 0.04, 0.04]).unwrap();
        assert_eq!(hedge_q(&q).as_matrix(), q.as_matrix());
    }

    #[test]
    fn hedging_strips_off_diagonals_and_leading_blocks() {
        let mut m = DMatrix::from_element(4, 4, 0.3);
        m[(2, 2)] = 0.5;
        m[(3, 3)] = 0.7;
        let q = CovarianceMatrix::new((&m + m.transpose()) * 0.5).unwrap();
        let hedged = hedge_q(&q);
        let out = hedged.as_matrix();
        assert_eq!(out[(2, 2)], 0.5);
        assert_eq!(out[(3, 3)], 0.7);
        assert_eq!(out[(0, 0)], 0.0);
        assert_eq!(out[(2, 3)], 0.0);
        assert_eq!(out[(0, 2)], 0.0);
    }

    #[test]
    fn hedging_zeroes_negative_diagonals() {
        let mut m = DMatrix::zeros(6, 6);
        m[(4, 4)] = -0.5;
        m[(5, 5)] = 0.25;
        let q = CovarianceMatrix::from_symmetric_unchecked(m);
        let hedged = hedge_q(&q);
        assert_eq!(hedged.as_matrix()[(4, 4)], 0.0);
        assert_eq!(hedged.as_matrix()[(5, 5)], 0.25);
        let eigs = hedged.as_matrix().clone().symmetric_eigenvalues();
        assert!(eigs.iter().all(|&e| e >= 0.0));
    }

    #[test]
    fn feature_clamping_is_idempotent_and_bounded() {
        let f = FeatureVector {
            kappa: 3.0,
            speed: 1.0,
            r: 10.0,
        };
        let c = f.clamped();
        assert_eq!(c.kappa, KAPPA_RANGE.1);
        assert_eq!(c.speed, SPEED_RANGE.0);
        assert_eq!(c.r, R_RANGE.1);
        assert_eq!(c.clamped(), c);
    }
}
