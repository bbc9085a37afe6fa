//! One-hidden-layer backprop network with sigmoid activations.
//!
//! Targets are the labels mapped to {0, 1}; the output unit is a sigmoid
//! trained under mean cross-entropy by full-batch gradient descent.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelError;
use crate::dataset::Label;
use crate::linalg::{dot, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct BpModel {
    /// Hidden-layer weights, one row per hidden unit.
    w1: Matrix,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: f64,
}

impl BpModel {
    fn hidden_activations(&self, x: &[f64]) -> Vec<f64> {
        (0..self.w1.rows())
            .map(|h| sigmoid(dot(self.w1.row(h), x) + self.b1[h]))
            .collect()
    }

    /// Network output in (0, 1).
    pub fn output(&self, x: &[f64]) -> f64 {
        let hidden = self.hidden_activations(x);
        sigmoid(dot(&self.w2, &hidden) + self.b2)
    }

    pub(super) fn write_text(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "hidden: {}", self.w1.rows())?;
        for h in 0..self.w1.rows() {
            let row: Vec<String> = self.w1.row(h).iter().map(f64::to_string).collect();
            writeln!(w, "w1[{h}]: {}", row.join(" "))?;
        }
        let b1: Vec<String> = self.b1.iter().map(f64::to_string).collect();
        writeln!(w, "b1: {}", b1.join(" "))?;
        let w2: Vec<String> = self.w2.iter().map(f64::to_string).collect();
        writeln!(w, "w2: {}", w2.join(" "))?;
        writeln!(w, "b2: {}", self.b2)
    }
}

pub(super) struct BpParams {
    pub hidden: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Parameter vector layout: `[w1 row-major, b1, w2, b2]`.
fn unpack(theta: &[f64], hidden: usize, inputs: usize) -> (Matrix, &[f64], &[f64], f64) {
    let w1_len = hidden * inputs;
    let w1 = Matrix::from_vec(hidden, inputs, theta[..w1_len].to_vec())
        .expect("theta sized for the architecture");
    let b1 = &theta[w1_len..w1_len + hidden];
    let w2 = &theta[w1_len + hidden..w1_len + 2 * hidden];
    let b2 = theta[w1_len + 2 * hidden];
    (w1, b1, w2, b2)
}

/// Mean cross-entropy of the network on `{0, 1}` targets, with its full
/// gradient in the packed layout.
pub(crate) fn loss_and_gradient(
    theta: &[f64],
    hidden: usize,
    x: &Matrix,
    y: &[Label],
) -> (f64, Vec<f64>) {
    let inputs = x.cols();
    let (w1, b1, w2, b2) = unpack(theta, hidden, inputs);
    let samples = x.rows() as f64;
    let w1_len = hidden * inputs;

    let mut loss = 0.0;
    let mut grad = vec![0.0; theta.len()];
    for k in 0..x.rows() {
        let row = x.row(k);
        let target = if y[k].is_positive() { 1.0 } else { 0.0 };
        let h: Vec<f64> = (0..hidden)
            .map(|j| sigmoid(dot(w1.row(j), row) + b1[j]))
            .collect();
        let out = sigmoid(dot(w2, &h) + b2);

        let o = out.clamp(1e-12, 1.0 - 1e-12);
        loss += -(target * o.ln() + (1.0 - target) * (1.0 - o).ln());

        // Cross-entropy with a sigmoid output: d loss / d z_out = out - target.
        let dz_out = (out - target) / samples;
        for j in 0..hidden {
            grad[w1_len + hidden + j] += dz_out * h[j];
            let dz_h = dz_out * w2[j] * h[j] * (1.0 - h[j]);
            for (i, xi) in row.iter().enumerate() {
                grad[j * inputs + i] += dz_h * xi;
            }
            grad[w1_len + j] += dz_h;
        }
        grad[theta.len() - 1] += dz_out;
    }
    (loss / samples, grad)
}

/// Seeded uniform initialization in `(-1/sqrt(fan_in), 1/sqrt(fan_in))`
/// per layer; biases start at zero. Sampling order is fixed (w1 row-major,
/// then w2) so a seed pins the whole trajectory.
fn init_theta(hidden: usize, inputs: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = vec![0.0; hidden * inputs + 2 * hidden + 1];
    let s1 = 1.0 / (inputs as f64).sqrt();
    for slot in theta[..hidden * inputs].iter_mut() {
        *slot = rng.gen_range(-s1..s1);
    }
    let s2 = 1.0 / (hidden as f64).sqrt();
    for slot in theta[hidden * inputs + hidden..hidden * inputs + 2 * hidden].iter_mut() {
        *slot = rng.gen_range(-s2..s2);
    }
    theta
}

pub(super) fn train_bp(
    x: &Matrix,
    y: &[Label],
    p: &BpParams,
) -> Result<(BpModel, usize, f64), ModelError> {
    let inputs = x.cols();
    let mut theta = init_theta(p.hidden, inputs, p.seed);
    let mut loss = 0.0;
    let mut epochs_run = 0;
    for epoch in 1..=p.epochs {
        let (l, grad) = loss_and_gradient(&theta, p.hidden, x, y);
        if !l.is_finite() {
            return Err(ModelError::Divergence { epoch, loss: l });
        }
        loss = l;
        epochs_run = epoch;
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= p.learning_rate * g;
        }
    }
    let (w1, b1, w2, b2) = unpack(&theta, p.hidden, inputs);
    Ok((
        BpModel { w1, b1: b1.to_vec(), w2: w2.to_vec(), b2 },
        epochs_run,
        loss,
    ))
}
