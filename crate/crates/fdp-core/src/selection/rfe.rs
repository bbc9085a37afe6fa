//! Recursive feature elimination: pure SVM-RFE and the combined
//! MRMR/SVM-RFE criterion.

use super::mrmr::MiTable;
use super::svm::train_linear_svm;
use super::{argmin_with, FeatureRanking, SelectionConfig, SelectionError, TraceEntry};
use crate::dataset::{Dataset, Label};
use crate::linalg::Matrix;

/// Convex combination of the two normalized ranking terms:
/// `beta * w_abs_norm + (1 - beta) * mrmr_quotient_norm`.
pub fn combined_score(
    beta: f64,
    w_abs_norm: f64,
    mrmr_quotient_norm: f64,
) -> Result<f64, SelectionError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(SelectionError::InvalidBeta(beta));
    }
    Ok(beta * w_abs_norm + (1.0 - beta) * mrmr_quotient_norm)
}

/// First `k` codes of the ranking, in rank order.
pub fn select_top_k(ranking: &FeatureRanking, k: usize) -> Result<Vec<String>, SelectionError> {
    if k > ranking.order.len() {
        return Err(SelectionError::InvalidK { k, len: ranking.order.len() });
    }
    Ok(ranking.order[..k].to_vec())
}

/// Min-max rescale into [0, 1]; a constant vector maps to all zeros, the
/// same degenerate rule the dataset normalizer uses.
fn minmax_normalize(values: &[f64]) -> Vec<f64> {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(max > min) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - min) / (max - min)).collect()
}

fn submatrix(x: &Matrix, columns: &[usize]) -> Matrix {
    let mut data = Vec::with_capacity(x.rows() * columns.len());
    for r in 0..x.rows() {
        let row = x.row(r);
        for &c in columns {
            data.push(row[c]);
        }
    }
    Matrix::from_vec(x.rows(), columns.len(), data).expect("consistent dimensions")
}

struct Elimination {
    order: Vec<String>,
    scores: Vec<f64>,
    trace: Vec<TraceEntry>,
}

/// Runs backward elimination where `score_fn` produces the per-feature
/// removal criterion for the surviving set; the argmin is removed each
/// round until nothing survives. The ranking is reverse removal order.
fn eliminate<F>(d: &Dataset, cfg: &SelectionConfig, mut score_fn: F) -> Result<Elimination, SelectionError>
where
    F: FnMut(&[usize], &Matrix, &[Label]) -> Result<Vec<f64>, SelectionError>,
{
    let (x, y) = d.to_matrix()?;
    let mut surviving: Vec<usize> = (0..d.n_features()).collect();
    let mut removed: Vec<(String, f64)> = Vec::new();
    let mut trace = Vec::new();
    let mut iteration = 0usize;
    while !surviving.is_empty() {
        iteration += 1;
        let xs = submatrix(&x, &surviving);
        let scores = score_fn(&surviving, &xs, &y)?;
        debug_assert_eq!(scores.len(), surviving.len());
        let victim = argmin_with(&scores, cfg.tie_break);
        let feature = d.feature_names()[surviving[victim]].clone();
        trace.push(TraceEntry { iteration, feature: feature.clone(), score: scores[victim] });
        removed.push((feature, scores[victim]));
        surviving.remove(victim);
    }
    removed.reverse();
    let (order, scores) = removed.into_iter().unzip();
    Ok(Elimination { order, scores, trace })
}

/// Pure SVM-RFE: repeatedly trains a linear SVM on the surviving features
/// and removes the feature with the smallest absolute weight, one per
/// round. Ranking is reverse elimination order.
pub fn svm_rfe(d: &Dataset, cfg: &SelectionConfig) -> Result<FeatureRanking, SelectionError> {
    let elim = eliminate(d, cfg, |_, xs, y| {
        let model = train_linear_svm(xs, y, cfg.c)?;
        Ok(model.weights.iter().map(|w| w.abs()).collect())
    })?;
    Ok(FeatureRanking {
        order: elim.order,
        scores: elim.scores,
        elimination_trace: elim.trace,
        beta: 1.0,
    })
}

/// Combined MRMR/SVM-RFE backward elimination.
///
/// Per round over the surviving set S: train a linear SVM on S for
/// `|w_i|`; compute each feature's label relevance over its redundancy
/// within S (epsilon-guarded); min-max normalize both vectors over S; and
/// remove the feature minimizing the convex combination under `beta`.
pub fn mrmr_svm_rfe(
    d: &Dataset,
    beta: f64,
    cfg: &SelectionConfig,
) -> Result<FeatureRanking, SelectionError> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(SelectionError::InvalidBeta(beta));
    }
    let table = MiTable::build(d, cfg.bins)?;
    let elim = eliminate(d, cfg, |surviving, xs, y| {
        let model = train_linear_svm(xs, y, cfg.c)?;
        let w_abs: Vec<f64> = model.weights.iter().map(|w| w.abs()).collect();
        let quotient: Vec<f64> = surviving
            .iter()
            .map(|&i| {
                let q = table.redundancy_in(surviving, i).max(cfg.epsilon);
                table.label_mi[i] / q
            })
            .collect();
        let w_norm = minmax_normalize(&w_abs);
        let q_norm = minmax_normalize(&quotient);
        w_norm
            .iter()
            .zip(&q_norm)
            .map(|(&w, &q)| combined_score(beta, w, q))
            .collect()
    })?;
    Ok(FeatureRanking {
        order: elim.order,
        scores: elim.scores,
        elimination_trace: elim.trace,
        beta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Horizon;
    use crate::selection::mrmr::column_values;
    use crate::selection::{discretize, mutual_information, DiscretizedFeature};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dataset(columns: &[(&str, Vec<f64>)], labels: Vec<Label>) -> Dataset {
        let n_samples = labels.len();
        let mut values = Vec::new();
        for k in 0..n_samples {
            for (_, col) in columns {
                values.push(Some(col[k]));
            }
        }
        Dataset::new(
            columns.iter().map(|(n, _)| n.to_string()).collect(),
            (0..n_samples).map(|k| format!("S{k}")).collect(),
            labels,
            values,
            Horizon::T1,
        )
        .unwrap()
    }

    fn planted(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let labels: Vec<Label> = (0..n)
            .map(|k| if k % 3 == 0 { Label::Distress } else { Label::Healthy })
            .collect();
        let informative: Vec<f64> = labels
            .iter()
            .map(|l| 1.5 * l.sign() + rng.gen_range(-0.4..0.4))
            .collect();
        let noise_a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let noise_b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        dataset(
            &[("inf", informative), ("na", noise_a), ("nb", noise_b)],
            labels,
        )
    }

    #[test]
    fn combined_score_endpoints_and_midpoint() {
        assert_eq!(combined_score(1.0, 0.7, 0.2).unwrap(), 0.7);
        assert_eq!(combined_score(0.0, 0.7, 0.2).unwrap(), 0.2);
        assert_eq!(combined_score(0.5, 0.4, 0.6).unwrap(), 0.5);
        assert!(matches!(combined_score(1.2, 0.0, 0.0), Err(SelectionError::InvalidBeta(_))));
        assert!(matches!(combined_score(-0.1, 0.0, 0.0), Err(SelectionError::InvalidBeta(_))));
    }

    #[test]
    fn select_top_k_examples() {
        let ranking = FeatureRanking {
            order: (0..41).map(|i| format!("f{i}")).collect(),
            scores: vec![0.0; 41],
            elimination_trace: Vec::new(),
            beta: 0.2,
        };
        let top = select_top_k(&ranking, 20).unwrap();
        assert_eq!(top.len(), 20);
        assert_eq!(top[0], "f0");
        assert_eq!(top[19], "f19");
        assert_eq!(select_top_k(&ranking, 41).unwrap().len(), 41);
        assert_eq!(select_top_k(&ranking, 1).unwrap(), vec!["f0".to_string()]);
        assert!(matches!(
            select_top_k(&ranking, 42),
            Err(SelectionError::InvalidK { k: 42, len: 41 })
        ));
    }

    #[test]
    fn informative_feature_is_eliminated_last() {
        let d = planted(11, 24);
        let cfg = SelectionConfig::default();
        let ranking = svm_rfe(&d, &cfg).unwrap();
        assert_eq!(ranking.order[0], "inf");
        assert_eq!(ranking.elimination_trace.len(), 3);
        assert_eq!(ranking.elimination_trace[2].feature, "inf");

        // Oracle: re-run the elimination step by step with the trainer.
        let (x, y) = d.to_matrix().unwrap();
        let mut surviving: Vec<usize> = vec![0, 1, 2];
        for entry in &ranking.elimination_trace {
            let xs = submatrix(&x, &surviving);
            let model = train_linear_svm(&xs, &y, cfg.c).unwrap();
            let scores: Vec<f64> = model.weights.iter().map(|w| w.abs()).collect();
            let victim = argmin_with(&scores, cfg.tie_break);
            assert_eq!(d.feature_names()[surviving[victim]], entry.feature);
            surviving.remove(victim);
        }
    }

    #[test]
    fn single_feature_ranking() {
        let d = dataset(
            &[("only", vec![1.0, -1.0, 1.0, -1.0])],
            vec![Label::Distress, Label::Healthy, Label::Distress, Label::Healthy],
        );
        let ranking = svm_rfe(&d, &SelectionConfig::default()).unwrap();
        assert_eq!(ranking.order, vec!["only".to_string()]);
        assert_eq!(ranking.elimination_trace.len(), 1);
    }

    #[test]
    fn identical_twin_features_split_the_weight_deterministically() {
        // Twins a and b are identical perfectly-separating columns; c is a
        // slightly down-scaled copy. The twins split their weight, tie
        // exactly, and the tie resolves to catalog order.
        let labels: Vec<Label> = (0..12)
            .map(|k| if k % 2 == 0 { Label::Distress } else { Label::Healthy })
            .collect();
        let strong: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
        let scaled: Vec<f64> = strong.iter().map(|v| 0.95 * v).collect();
        let cfg = SelectionConfig { c: 100.0, ..Default::default() };

        let d = dataset(
            &[("a", strong.clone()), ("b", strong.clone()), ("c", scaled.clone())],
            labels.clone(),
        );
        let r1 = svm_rfe(&d, &cfg).unwrap();
        let r2 = svm_rfe(&d, &cfg).unwrap();
        assert_eq!(r1, r2);

        // Small-instance enumeration: identical columns give exactly equal
        // weights while both twins survive.
        let (x, y) = d.to_matrix().unwrap();
        let model = train_linear_svm(&x, &y, cfg.c).unwrap();
        assert_eq!(model.weights[0], model.weights[1]);

        // One twin outlives c (full weight restored), the other tied with
        // it and lost to catalog order.
        assert_eq!(r1.elimination_trace[0].feature, "c");
        assert_eq!(r1.elimination_trace[1].feature, "a");
        assert_eq!(r1.order, vec!["b".to_string(), "a".to_string(), "c".to_string()]);

        // Against the duplicate-free reference, the duplication costs the
        // twin its top rank.
        let d_ref = dataset(&[("a", strong), ("c", scaled)], labels);
        let r_ref = svm_rfe(&d_ref, &cfg).unwrap();
        assert_eq!(r_ref.order, vec!["a".to_string(), "c".to_string()]);
        let rank_with_twin = r1.order.iter().position(|f| f == "a").unwrap();
        let rank_without = r_ref.order.iter().position(|f| f == "a").unwrap();
        assert!(rank_with_twin > rank_without);
    }

    #[test]
    fn beta_one_matches_pure_svm_rfe() {
        for seed in [1u64, 2, 3, 4, 5] {
            let d = planted(seed, 21);
            let cfg = SelectionConfig::default();
            let pure = svm_rfe(&d, &cfg).unwrap();
            let combined = mrmr_svm_rfe(&d, 1.0, &cfg).unwrap();
            assert_eq!(pure.order, combined.order, "seed {seed}");
            let pure_removed: Vec<&String> =
                pure.elimination_trace.iter().map(|t| &t.feature).collect();
            let comb_removed: Vec<&String> =
                combined.elimination_trace.iter().map(|t| &t.feature).collect();
            assert_eq!(pure_removed, comb_removed, "seed {seed}");
        }
    }

    #[test]
    fn beta_zero_matches_independently_recomputed_quotients() {
        for seed in [6u64, 7, 8] {
            let d = planted(seed, 18);
            let cfg = SelectionConfig::default();
            let ranking = mrmr_svm_rfe(&d, 0.0, &cfg).unwrap();

            // Independent recomputation: discretize from scratch, evaluate
            // the normalized quotient per surviving set, take the argmin.
            let label = DiscretizedFeature::from_labels(d.labels());
            let cols: Vec<DiscretizedFeature> = (0..d.n_features())
                .map(|j| discretize(&column_values(&d, j).unwrap(), cfg.bins).unwrap())
                .collect();
            let mut surviving: Vec<usize> = (0..d.n_features()).collect();
            for entry in &ranking.elimination_trace {
                let quotients: Vec<f64> = surviving
                    .iter()
                    .map(|&i| {
                        let rel = mutual_information(&label, &cols[i]).unwrap();
                        let red: f64 = surviving
                            .iter()
                            .filter(|&&j| j != i)
                            .map(|&j| mutual_information(&cols[i], &cols[j]).unwrap())
                            .sum::<f64>()
                            / (surviving.len() * surviving.len()) as f64;
                        rel / red.max(cfg.epsilon)
                    })
                    .collect();
                let normalized = minmax_normalize(&quotients);
                let victim = argmin_with(&normalized, cfg.tie_break);
                assert_eq!(d.feature_names()[surviving[victim]], entry.feature, "seed {seed}");
                surviving.remove(victim);
            }
        }
    }

    #[test]
    fn rankings_are_permutations_with_full_traces() {
        let d = planted(42, 27);
        for beta in [0.0, 0.2, 0.5, 1.0] {
            let ranking = mrmr_svm_rfe(&d, beta, &SelectionConfig::default()).unwrap();
            assert_eq!(ranking.elimination_trace.len(), d.n_features());
            let mut sorted = ranking.order.clone();
            sorted.sort();
            let mut names = d.feature_names().to_vec();
            names.sort();
            assert_eq!(sorted, names);
            assert_eq!(ranking.beta, beta);
        }
    }

    #[test]
    fn invalid_beta_is_rejected() {
        let d = planted(1, 12);
        assert!(matches!(
            mrmr_svm_rfe(&d, 1.5, &SelectionConfig::default()),
            Err(SelectionError::InvalidBeta(_))
        ));
    }

    #[test]
    fn planted_informative_features_outrank_pure_noise() {
        // 4 informative, 3 redundant copies, 5 noise features; at beta 0.2
        // every informative feature must rank above every noise feature.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 60;
        let labels: Vec<Label> = (0..n)
            .map(|k| if k % 3 == 0 { Label::Distress } else { Label::Healthy })
            .collect();
        let mut columns: Vec<(String, Vec<f64>)> = Vec::new();
        let mut informative_cols = Vec::new();
        for j in 0..4 {
            let col: Vec<f64> = labels
                .iter()
                .map(|l| 2.0 * l.sign() + rng.gen_range(-0.5..0.5))
                .collect();
            informative_cols.push(col.clone());
            columns.push((format!("inf{j}"), col));
        }
        for j in 0..3 {
            let parent = &informative_cols[j % 4];
            let col: Vec<f64> = parent
                .iter()
                .map(|v| 0.8 * v + rng.gen_range(-0.05..0.05))
                .collect();
            columns.push((format!("red{j}"), col));
        }
        for j in 0..5 {
            let col: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            columns.push((format!("nse{j}"), col));
        }
        let cols_ref: Vec<(&str, Vec<f64>)> =
            columns.iter().map(|(n, c)| (n.as_str(), c.clone())).collect();
        let d = dataset(&cols_ref, labels);

        let ranking = mrmr_svm_rfe(&d, 0.2, &SelectionConfig::default()).unwrap();
        let rank_of = |name: &str| ranking.order.iter().position(|f| f == name).unwrap();
        for j in 0..4 {
            for k in 0..5 {
                assert!(
                    rank_of(&format!("inf{j}")) < rank_of(&format!("nse{k}")),
                    "inf{j} ranked below nse{k}: {:?}",
                    ranking.order
                );
            }
        }
    }
}
