//! Soft-margin linear SVM trained in the dual by sequential minimal
//! optimization.
//!
//! The solver is Platt-style SMO specialized to the linear kernel, with
//! every heuristic made deterministic (fixed scan order, max-|E1 - E2|
//! second choice with lowest-index ties) so that identical inputs always
//! produce identical models.

use super::SelectionError;
use crate::dataset::Label;
use crate::linalg::{dot, Matrix};

/// KKT tolerance at which a sample counts as violating optimality.
const KKT_TOL: f64 = 1e-6;
/// Relative minimum multiplier change for a step to count as progress.
const STEP_EPS: f64 = 1e-14;
/// Sweep budget before giving up.
const MAX_SWEEPS: usize = 10_000;

/// Trained linear SVM: weight vector, bias, and the dual multipliers the
/// weights were reconstructed from (`w = sum_k alpha_k y_k x_k`).
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub alphas: Vec<f64>,
    pub regularization: f64,
}

impl SvmModel {
    pub fn decision(&self, x: &[f64]) -> f64 {
        dot(&self.weights, x) + self.bias
    }

    /// Dual objective `sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j <x_i, x_j>`.
    pub fn dual_objective(&self, x: &Matrix, y: &[Label]) -> f64 {
        let linear: f64 = self.alphas.iter().sum();
        let mut quad = 0.0;
        for i in 0..x.rows() {
            if self.alphas[i] == 0.0 {
                continue;
            }
            for j in 0..x.rows() {
                if self.alphas[j] == 0.0 {
                    continue;
                }
                quad += self.alphas[i]
                    * self.alphas[j]
                    * y[i].sign()
                    * y[j].sign()
                    * dot(x.row(i), x.row(j));
            }
        }
        linear - 0.5 * quad
    }

    /// Primal objective `1/2 ||w||^2 + C sum hinge(y_i f(x_i))`.
    pub fn primal_objective(&self, x: &Matrix, y: &[Label]) -> f64 {
        let margin = 0.5 * dot(&self.weights, &self.weights);
        let hinge: f64 = (0..x.rows())
            .map(|i| (1.0 - y[i].sign() * self.decision(x.row(i))).max(0.0))
            .sum();
        margin + self.regularization * hinge
    }
}

struct Smo<'a> {
    x: &'a Matrix,
    y: Vec<f64>,
    c: f64,
    gram: Vec<f64>,
    n: usize,
    alpha: Vec<f64>,
    bias: f64,
    /// Error cache `E_i = f(x_i) - y_i`, maintained for every sample.
    errors: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(x: &'a Matrix, y: Vec<f64>, c: f64) -> Self {
        let n = x.rows();
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let k = dot(x.row(i), x.row(j));
                gram[i * n + j] = k;
                gram[j * n + i] = k;
            }
        }
        let errors = y.iter().map(|yi| -yi).collect();
        Self { x, y, c, gram, n, alpha: vec![0.0; n], bias: 0.0, errors }
    }

    fn k(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.n + j]
    }

    fn non_bound(&self, i: usize) -> bool {
        self.alpha[i] > 0.0 && self.alpha[i] < self.c
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (alph1, alph2) = (self.alpha[i1], self.alpha[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;

        let (low, high) = if s < 0.0 {
            ((alph2 - alph1).max(0.0), (self.c + alph2 - alph1).min(self.c))
        } else {
            ((alph2 + alph1 - self.c).max(0.0), (alph2 + alph1).min(self.c))
        };
        if low >= high {
            return false;
        }

        let k11 = self.k(i1, i1);
        let k12 = self.k(i1, i2);
        let k22 = self.k(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;

        let a2 = if eta > 0.0 {
            (alph2 + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // Degenerate curvature (duplicate points): compare the dual
            // objective at both interval ends directly.
            let v1 = e1 + y1 - self.bias - alph1 * y1 * k11 - alph2 * y2 * k12;
            let v2 = e2 + y2 - self.bias - alph1 * y1 * k12 - alph2 * y2 * k22;
            let objective = |a2c: f64| {
                let a1c = alph1 + s * (alph2 - a2c);
                a1c + a2c
                    - 0.5 * a1c * a1c * k11
                    - 0.5 * a2c * a2c * k22
                    - s * a1c * a2c * k12
                    - y1 * a1c * v1
                    - y2 * a2c * v2
            };
            let (obj_low, obj_high) = (objective(low), objective(high));
            let eps = STEP_EPS * (obj_low.abs() + obj_high.abs() + STEP_EPS);
            if obj_low > obj_high + eps {
                low
            } else if obj_high > obj_low + eps {
                high
            } else {
                return false;
            }
        };

        if (a2 - alph2).abs() < STEP_EPS * (a2 + alph2 + STEP_EPS) {
            return false;
        }
        let a1 = (alph1 + s * (alph2 - a2)).clamp(0.0, self.c);

        let d1 = a1 - alph1;
        let d2 = a2 - alph2;
        let b1 = self.bias - e1 - y1 * d1 * k11 - y2 * d2 * k12;
        let b2 = self.bias - e2 - y1 * d1 * k12 - y2 * d2 * k22;
        let new_bias = if a1 > 0.0 && a1 < self.c {
            b1
        } else if a2 > 0.0 && a2 < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let delta_b = new_bias - self.bias;

        for k in 0..self.n {
            self.errors[k] += y1 * d1 * self.k(i1, k) + y2 * d2 * self.k(i2, k) + delta_b;
        }
        self.alpha[i1] = a1;
        self.alpha[i2] = a2;
        self.bias = new_bias;
        true
    }

    fn examine(&mut self, i2: usize) -> bool {
        let y2 = self.y[i2];
        let alph2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates =
            (r2 < -KKT_TOL && alph2 < self.c) || (r2 > KKT_TOL && alph2 > 0.0);
        if !violates {
            return false;
        }

        // Second-choice heuristic: the non-bound partner maximizing
        // |E1 - E2|, lowest index on ties.
        let mut best: Option<(usize, f64)> = None;
        for i1 in 0..self.n {
            if i1 != i2 && self.non_bound(i1) {
                let gap = (self.errors[i1] - e2).abs();
                if best.map_or(true, |(_, g)| gap > g) {
                    best = Some((i1, gap));
                }
            }
        }
        if let Some((i1, _)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        for i1 in 0..self.n {
            if i1 != i2 && self.non_bound(i1) && self.take_step(i1, i2) {
                return true;
            }
        }
        for i1 in 0..self.n {
            if i1 != i2 && self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    fn solve(mut self) -> Result<SvmModel, SelectionError> {
        let mut examine_all = true;
        let mut num_changed = 1usize;
        let mut sweeps = 0usize;
        while num_changed > 0 || examine_all {
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(SelectionError::Convergence { sweeps });
            }
            num_changed = 0;
            if examine_all {
                for i in 0..self.n {
                    num_changed += usize::from(self.examine(i));
                }
            } else {
                for i in 0..self.n {
                    if self.non_bound(i) {
                        num_changed += usize::from(self.examine(i));
                    }
                }
            }
            if examine_all {
                examine_all = false;
            } else if num_changed == 0 {
                examine_all = true;
            }
        }

        let mut weights = vec![0.0; self.x.cols()];
        for i in 0..self.n {
            if self.alpha[i] == 0.0 {
                continue;
            }
            let coeff = self.alpha[i] * self.y[i];
            for (w, xij) in weights.iter_mut().zip(self.x.row(i)) {
                *w += coeff * xij;
            }
        }
        Ok(SvmModel {
            weights,
            bias: self.bias,
            alphas: self.alpha,
            regularization: self.c,
        })
    }
}

/// Trains a soft-margin linear SVM on `{+1, -1}` labels.
pub fn train_linear_svm(x: &Matrix, y: &[Label], c: f64) -> Result<SvmModel, SelectionError> {
    if x.rows() != y.len() {
        return Err(SelectionError::Shape { left: x.rows(), right: y.len() });
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(SelectionError::InvalidRegularization(c));
    }
    let has_pos = y.iter().any(|l| l.is_positive());
    let has_neg = y.iter().any(|l| !l.is_positive());
    if !has_pos || !has_neg {
        return Err(SelectionError::SingleClass);
    }
    let signs: Vec<f64> = y.iter().map(|l| l.sign()).collect();
    Smo::new(x, signs, c).solve()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(signs: &[i8]) -> Vec<Label> {
        signs
            .iter()
            .map(|&s| if s > 0 { Label::Distress } else { Label::Healthy })
            .collect()
    }

    #[test]
    fn symmetric_pair_has_unit_weight_and_zero_bias() {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0]]).unwrap();
        let y = labels(&[-1, 1]);
        let model = train_linear_svm(&x, &y, 10.0).unwrap();
        assert!((model.weights[0] - 1.0).abs() < 1e-6, "w = {}", model.weights[0]);
        assert!(model.bias.abs() < 1e-6, "b = {}", model.bias);
        assert!((model.alphas[0] - 0.5).abs() < 1e-6);
        assert!((model.alphas[1] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let err = train_linear_svm(&x, &labels(&[1, 1]), 1.0).unwrap_err();
        assert!(matches!(err, SelectionError::SingleClass));
        let err = train_linear_svm(&x, &labels(&[1, -1]), 0.0).unwrap_err();
        assert!(matches!(err, SelectionError::InvalidRegularization(_)));
    }

    /// Coarse-to-fine grid descent on the primal objective, used as an
    /// independent reference for 2-D problems.
    fn primal_grid_oracle(x: &Matrix, y: &[Label], c: f64) -> (f64, [f64; 3]) {
        let primal = |w1: f64, w2: f64, b: f64| {
            let margin = 0.5 * (w1 * w1 + w2 * w2);
            let hinge: f64 = (0..x.rows())
                .map(|i| {
                    let f = w1 * x.get(i, 0) + w2 * x.get(i, 1) + b;
                    (1.0 - y[i].sign() * f).max(0.0)
                })
                .sum();
            margin + c * hinge
        };
        let mut best = (f64::INFINITY, [0.0f64; 3]);
        let mut center = [0.0f64; 3];
        let mut step = 0.5f64;
        for _ in 0..8 {
            for i in -10..=10 {
                for j in -10..=10 {
                    for k in -10..=10 {
                        let w1 = center[0] + step * i as f64;
                        let w2 = center[1] + step * j as f64;
                        let b = center[2] + step * k as f64;
                        let p = primal(w1, w2, b);
                        if p < best.0 {
                            best = (p, [w1, w2, b]);
                        }
                    }
                }
            }
            center = best.1;
            step /= 4.0;
        }
        best
    }

    #[test]
    fn informative_dimension_dominates_noise_dimension() {
        // Dimension 1 separates the classes; dimension 2 is fixed noise.
        let noise = [0.31, -0.74, 0.52, -0.11, 0.93, -0.48, 0.27, -0.66, 0.08, 0.81];
        let mut rows = Vec::new();
        let mut signs = Vec::new();
        for (i, nz) in noise.iter().enumerate() {
            let cls = if i % 2 == 0 { 1.0 } else { -1.0 };
            rows.push(vec![cls * (1.0 + 0.05 * i as f64), *nz]);
            signs.push(if cls > 0.0 { 1i8 } else { -1i8 });
        }
        let x = Matrix::from_rows(&rows).unwrap();
        let y = labels(&signs);
        let model = train_linear_svm(&x, &y, 5.0).unwrap();
        assert!(
            model.weights[0].abs() > 5.0 * model.weights[1].abs(),
            "weights = {:?}",
            model.weights
        );
        // The SMO solution must reach (or beat) the grid-descent primal.
        let (oracle_primal, _) = primal_grid_oracle(&x, &y, 5.0);
        let smo_primal = model.primal_objective(&x, &y);
        assert!(
            smo_primal <= oracle_primal + 1e-3,
            "smo {smo_primal} vs oracle {oracle_primal}"
        );
    }

    #[test]
    fn weights_reconstruct_from_multipliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.gen_range(6..20);
            let dims = rng.gen_range(1..5);
            let mut rows = Vec::new();
            let mut signs = Vec::new();
            for i in 0..n {
                let cls: f64 = if i % 2 == 0 { 1.0 } else { -1.0 };
                let row: Vec<f64> = (0..dims)
                    .map(|d| {
                        let sep = if d == 0 { 2.0 * cls } else { 0.0 };
                        sep + rng.gen_range(-0.5..0.5)
                    })
                    .collect();
                rows.push(row);
                signs.push(if cls > 0.0 { 1i8 } else { -1i8 });
            }
            let x = Matrix::from_rows(&rows).unwrap();
            let y = labels(&signs);
            let model = train_linear_svm(&x, &y, 2.0).unwrap();

            // Independent reconstruction of the weight identity.
            let mut recon = vec![0.0; dims];
            for i in 0..n {
                for d in 0..dims {
                    recon[d] += model.alphas[i] * y[i].sign() * x.get(i, d);
                }
            }
            let diff: f64 = recon
                .iter()
                .zip(&model.weights)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let norm: f64 = model.weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            assert!(diff <= 1e-8 * (1.0 + norm));

            // Multipliers live in the box.
            assert!(model.alphas.iter().all(|&a| (-1e-12..=2.0 + 1e-12).contains(&a)));

            // Weak-duality certificate of near-optimality.
            let gap = model.primal_objective(&x, &y) - model.dual_objective(&x, &y);
            assert!(gap >= -1e-8);
            assert!(gap <= 1e-4 * (1.0 + model.primal_objective(&x, &y).abs()), "gap {gap}");
        }
    }

    #[test]
    fn label_swap_negates_the_model() {
        let x = Matrix::from_rows(&[
            vec![1.2, 0.3],
            vec![0.8, -0.1],
            vec![-0.9, 0.4],
            vec![-1.1, -0.2],
            vec![0.7, 0.9],
            vec![-0.6, -0.8],
        ])
        .unwrap();
        let y = labels(&[1, 1, -1, -1, 1, -1]);
        let flipped: Vec<Label> = y.iter().map(|l| l.opposite()).collect();
        let m1 = train_linear_svm(&x, &y, 1.0).unwrap();
        let m2 = train_linear_svm(&x, &flipped, 1.0).unwrap();
        for (a, b) in m1.weights.iter().zip(&m2.weights) {
            assert!((a + b).abs() < 1e-12);
        }
        assert!((m1.bias + m2.bias).abs() < 1e-12);
        for (a, b) in m1.alphas.iter().zip(&m2.alphas) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn training_is_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let cls = if i < 12 { 1.0 } else { -1.0 };
                vec![cls + rng.gen_range(-2.0..2.0), rng.gen_range(-1.0..1.0)]
            })
            .collect();
        let signs: Vec<i8> = (0..30).map(|i| if i < 12 { 1 } else { -1 }).collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y = labels(&signs);
        let m1 = train_linear_svm(&x, &y, 1.0).unwrap();
        let m2 = train_linear_svm(&x, &y, 1.0).unwrap();
        assert_eq!(m1, m2);
    }
}
