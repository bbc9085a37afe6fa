//! L2-regularized logistic regression trained by batch gradient descent.

use super::ModelError;
use crate::dataset::Label;
use crate::linalg::{dot, Matrix};

/// Gradient infinity-norm below which descent stops early.
const GRAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LrModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LrModel {
    pub fn logit(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }
}

pub(super) struct LrParams {
    pub learning_rate: f64,
    pub l2: f64,
    pub epochs: usize,
}

/// `ln(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 35.0 {
        z
    } else if z < -35.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

/// `1 / (1 + exp(-z))`.
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean log-loss over `{+1, -1}` labels plus an L2 penalty on the weights
/// (the bias is unpenalized), with its gradient. `theta` packs
/// `[w_0 .. w_{n-1}, b]`.
pub(crate) fn loss_and_gradient(
    theta: &[f64],
    x: &Matrix,
    y: &[Label],
    l2: f64,
) -> (f64, Vec<f64>) {
    let n = x.cols();
    let (weights, bias) = (&theta[..n], theta[n]);
    let samples = x.rows() as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; n + 1];
    for i in 0..x.rows() {
        let yi = y[i].sign();
        let f = dot(weights, x.row(i)) + bias;
        loss += softplus(-yi * f);
        // d/df softplus(-y f) = -y * sigmoid(-y f)
        let df = -yi * sigmoid(-yi * f);
        for (g, xij) in grad[..n].iter_mut().zip(x.row(i)) {
            *g += df * xij;
        }
        grad[n] += df;
    }
    loss /= samples;
    for g in grad.iter_mut() {
        *g /= samples;
    }
    for j in 0..n {
        loss += 0.5 * l2 * weights[j] * weights[j];
        grad[j] += l2 * weights[j];
    }
    (loss, grad)
}

pub(super) fn train_lr(
    x: &Matrix,
    y: &[Label],
    p: &LrParams,
) -> Result<(LrModel, usize, f64), ModelError> {
    let n = x.cols();
    let mut theta = vec![0.0; n + 1];
    let mut loss = 0.0;
    let mut epochs_run = 0;
    for epoch in 1..=p.epochs {
        let (l, grad) = loss_and_gradient(&theta, x, y, p.l2);
        if !l.is_finite() {
            return Err(ModelError::Divergence { epoch, loss: l });
        }
        loss = l;
        epochs_run = epoch;
        let grad_norm = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if grad_norm < GRAD_TOL {
            break;
        }
        for (t, g) in theta.iter_mut().zip(&grad) {
            *t -= p.learning_rate * g;
        }
    }
    let bias = theta[n];
    theta.truncate(n);
    Ok((LrModel { weights: theta, bias }, epochs_run, loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::max_gradient_deviation;

    #[test]
    fn gradient_of_bias_at_origin_matches_finite_difference() {
        // Symmetric two-point data: the loss is smooth at the origin and
        // the bias gradient there is exactly reproduced by differencing.
        let x = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let y = vec![Label::Distress, Label::Healthy];
        let theta = vec![0.0, 0.0];
        let (_, grad) = loss_and_gradient(&theta, &x, &y, 0.0);
        let eps = 1e-6;
        let up = loss_and_gradient(&[0.0, eps], &x, &y, 0.0).0;
        let down = loss_and_gradient(&[0.0, -eps], &x, &y, 0.0).0;
        let fd = (up - down) / (2.0 * eps);
        assert!((grad[1] - fd).abs() < 1e-8);
        // By symmetry the bias gradient is exactly zero here.
        assert!(grad[1].abs() < 1e-15);
    }

    #[test]
    fn descent_reduces_loss_on_separable_data() {
        let x = Matrix::from_rows(&[vec![2.0], vec![1.5], vec![-2.0], vec![-1.7]]).unwrap();
        let y = vec![Label::Distress, Label::Distress, Label::Healthy, Label::Healthy];
        let p = LrParams { learning_rate: 0.5, l2: 1e-3, epochs: 300 };
        let (model, epochs, loss) = train_lr(&x, &y, &p).unwrap();
        assert!(epochs > 0);
        assert!(loss < 0.3, "loss {loss}");
        assert!(model.weights[0] > 0.0);
    }

    #[test]
    fn regularizer_contributes_to_the_gradient() {
        let x = Matrix::from_rows(&[vec![1.0], vec![-1.0]]).unwrap();
        let y = vec![Label::Distress, Label::Healthy];
        let theta = vec![0.3, -0.1];
        let dev = max_gradient_deviation(&theta, 1e-5, |t| loss_and_gradient(t, &x, &y, 0.7));
        assert!(dev < 1e-8, "deviation {dev}");
    }
}
