//! Plug-in mutual information on discretized features, in nats.

use super::discretize::DiscretizedFeature;
use super::SelectionError;

/// Plug-in mutual information `sum p(a,b) ln(p(a,b) / (p(a) p(b)))` over
/// the empirical joint frequencies. Zero-count cells contribute nothing.
///
/// The two arguments are ordered canonically before summation, so the
/// result is exactly symmetric in its inputs.
pub fn mutual_information(
    a: &DiscretizedFeature,
    b: &DiscretizedFeature,
) -> Result<f64, SelectionError> {
    if a.len() != b.len() {
        return Err(SelectionError::Shape { left: a.len(), right: b.len() });
    }
    let swap = (b.bin_count(), b.indices()) < (a.bin_count(), a.indices());
    let (x, y) = if swap { (b, a) } else { (a, b) };

    let n = x.len();
    if n == 0 {
        return Ok(0.0);
    }
    let (bx, by) = (x.bin_count(), y.bin_count());
    let mut joint = vec![0usize; bx * by];
    let mut mx = vec![0usize; bx];
    let mut my = vec![0usize; by];
    for (&i, &j) in x.indices().iter().zip(y.indices()) {
        joint[i * by + j] += 1;
        mx[i] += 1;
        my[j] += 1;
    }

    let total = n as f64;
    let mut info = 0.0;
    for i in 0..bx {
        for j in 0..by {
            let c = joint[i * by + j];
            if c == 0 {
                continue;
            }
            let p_xy = c as f64 / total;
            let p_x = mx[i] as f64 / total;
            let p_y = my[j] as f64 / total;
            info += p_xy * (p_xy / (p_x * p_y)).ln();
        }
    }
    Ok(info)
}

/// Plug-in entropy `-sum p ln p` of a discretized feature, in nats.
pub fn entropy(a: &DiscretizedFeature) -> f64 {
    let n = a.len();
    if n == 0 {
        return 0.0;
    }
    let mut counts = vec![0usize; a.bin_count()];
    for &i in a.indices() {
        counts[i] += 1;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn feat(indices: &[usize], bins: usize) -> DiscretizedFeature {
        DiscretizedFeature::new(indices.to_vec(), bins).unwrap()
    }

    #[test]
    fn self_information_of_balanced_binary_is_ln2() {
        let x = feat(&[0, 1, 0, 1, 0, 1], 2);
        let i = mutual_information(&x, &x).unwrap();
        assert!((i - 2f64.ln()).abs() < 1e-15);
        assert!((i - entropy(&x)).abs() < 1e-15);
    }

    #[test]
    fn exact_product_joint_has_zero_information() {
        let a = feat(&[0, 0, 1, 1], 2);
        let b = feat(&[0, 1, 0, 1], 2);
        assert_eq!(mutual_information(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn matches_direct_plug_in_evaluation() {
        // Joint counts {(0,0): 2, (0,1): 1, (1,0): 1, (1,1): 2} over 6 samples.
        let a = feat(&[0, 0, 0, 1, 1, 1], 2);
        let b = feat(&[0, 0, 1, 0, 1, 1], 2);

        // Oracle: the plug-in sum written out term by term.
        let p = |c: f64| c / 6.0;
        let term = |pxy: f64, px: f64, py: f64| pxy * (pxy / (px * py)).ln();
        let expected = term(p(2.0), 0.5, 0.5)
            + term(p(1.0), 0.5, 0.5)
            + term(p(1.0), 0.5, 0.5)
            + term(p(2.0), 0.5, 0.5);

        let got = mutual_information(&a, &b).unwrap();
        assert!((got - expected).abs() < 1e-15, "got {got}, expected {expected}");
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let a = feat(&[0, 1], 2);
        let b = feat(&[0, 1, 0], 2);
        assert!(matches!(
            mutual_information(&a, &b),
            Err(SelectionError::Shape { left: 2, right: 3 })
        ));
    }

    proptest! {
        #[test]
        fn symmetric_and_nonnegative(
            pair in proptest::collection::vec((0usize..4, 0usize..3), 1..60)
        ) {
            let a = feat(&pair.iter().map(|(i, _)| *i).collect::<Vec<_>>(), 4);
            let b = feat(&pair.iter().map(|(_, j)| *j).collect::<Vec<_>>(), 3);
            let ab = mutual_information(&a, &b).unwrap();
            let ba = mutual_information(&b, &a).unwrap();
            prop_assert_eq!(ab, ba); // exact, not approximate
            prop_assert!(ab >= -1e-12);
        }

        #[test]
        fn self_information_equals_entropy(
            indices in proptest::collection::vec(0usize..5, 1..60)
        ) {
            let x = feat(&indices, 5);
            let i = mutual_information(&x, &x).unwrap();
            prop_assert!((i - entropy(&x)).abs() < 1e-12);
        }
    }
}
