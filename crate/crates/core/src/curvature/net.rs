//! Minimal fully-connected regressor trained with Adam.
//!
//! tanh hidden layers, linear output, mean-squared-error loss. Training is
//! single-threaded and fully determined by the seed.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpRegressor {
    dims: Vec<usize>,
    /// Column-major weight entries per layer, shape dims[l+1] × dims[l].
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl MlpRegressor {
    pub fn predict(&self, input: &[f64]) -> f64 {
        debug_assert_eq!(input.len(), self.dims[0]);
        let mut a = DVector::from_column_slice(input);
        let layers = self.weights.len();
        for l in 0..layers {
            let w = DMatrix::from_column_slice(self.dims[l + 1], self.dims[l], &self.weights[l]);
            let b = DVector::from_column_slice(&self.biases[l]);
            let mut z = w * a + b;
            if l + 1 < layers {
                z.apply(|v| *v = v.tanh());
            }
            a = z;
        }
        a[0]
    }
}

pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

struct Adam {
    m: Vec<DMatrix<f64>>,
    v: Vec<DMatrix<f64>>,
    mb: Vec<DVector<f64>>,
    vb: Vec<DVector<f64>>,
    t: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const EPS: f64 = 1e-8;

pub fn train(
    feats: &[Vec<f64>],
    targets: &[f64],
    hidden: &[usize],
    cfg: TrainConfig,
) -> MlpRegressor {
    let n = feats.len();
    let in_dim = feats[0].len();
    let mut dims = vec![in_dim];
    dims.extend_from_slice(hidden);
    dims.push(1);
    let layers = dims.len() - 1;

    let mut rng = rng_for(cfg.seed, &[n as u64, in_dim as u64]);
    let mut weights: Vec<DMatrix<f64>> = Vec::with_capacity(layers);
    let mut biases: Vec<DVector<f64>> = Vec::with_capacity(layers);
    for l in 0..layers {
        let bound = (6.0 / (dims[l] + dims[l + 1]) as f64).sqrt();
        weights.push(DMatrix::from_fn(dims[l + 1], dims[l], |_, _| {
            rng.random_range(-bound..bound)
        }));
        biases.push(DVector::zeros(dims[l + 1]));
    }
    let mut adam = Adam {
        m: weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
        v: weights.iter().map(|w| DMatrix::zeros(w.nrows(), w.ncols())).collect(),
        mb: biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        vb: biases.iter().map(|b| DVector::zeros(b.len())).collect(),
        t: 0,
    };

    let mut order: Vec<usize> = (0..n).collect();
    for epoch in 0..cfg.epochs {
        // Step decay: fine-tune at a tenth of the rate for the last third.
        let lr = if epoch * 3 >= cfg.epochs * 2 {
            cfg.learning_rate * 0.1
        } else {
            cfg.learning_rate
        };
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        for chunk in order.chunks(cfg.batch.max(1)) {
            let b = chunk.len();
            let x = DMatrix::from_fn(in_dim, b, |i, j| feats[chunk[j]][i]);
            let t = DMatrix::from_fn(1, b, |_, j| targets[chunk[j]]);

            // Forward pass keeping activations.
            let mut acts: Vec<DMatrix<f64>> = vec![x];
            for l in 0..layers {
                let mut z = &weights[l] * &acts[l];
                for mut col in z.column_iter_mut() {
                    col += &biases[l];
                }
                if l + 1 < layers {
                    z.apply(|v| *v = v.tanh());
                }
                acts.push(z);
            }

            // Backward pass: d = dL/dz at the output (MSE).
            let mut d = (acts[layers].clone() - t) * (2.0 / b as f64);
            adam.t += 1;
            let corr1 = 1.0 - BETA1.powi(adam.t);
            let corr2 = 1.0 - BETA2.powi(adam.t);
            for l in (0..layers).rev() {
                let dw = &d * acts[l].transpose();
                let db = DVector::from_fn(d.nrows(), |i, _| d.row(i).sum());
                if l > 0 {
                    let mut up = weights[l].transpose() * &d;
                    // tanh'(z) = 1 − a².
                    up.zip_apply(&acts[l], |u, a| *u *= 1.0 - a * a);
                    d = up;
                }
                adam.m[l] = &adam.m[l] * BETA1 + &dw * (1.0 - BETA1);
                adam.v[l].zip_apply(&dw, |v, g| *v = BETA2 * *v + (1.0 - BETA2) * g * g);
                adam.mb[l] = &adam.mb[l] * BETA1 + &db * (1.0 - BETA1);
                adam.vb[l].zip_apply(&db, |v, g| *v = BETA2 * *v + (1.0 - BETA2) * g * g);
                let (m, v) = (&adam.m[l], &adam.v[l]);
                weights[l].zip_zip_apply(m, v, |w, m, v| {
                    *w -= lr * (m / corr1) / ((v / corr2).sqrt() + EPS);
                });
                let (mb, vb) = (&adam.mb[l], &adam.vb[l]);
                biases[l].zip_zip_apply(mb, vb, |w, m, v| {
                    *w -= lr * (m / corr1) / ((v / corr2).sqrt() + EPS);
                });
            }
        }
    }

    MlpRegressor {
        dims,
        weights: weights.iter().map(|w| w.as_slice().to_vec()).collect(),
        biases: biases.iter().map(|b| b.as_slice().to_vec()).collect(),
    }
}
