use crate::error::{Error, Result};

fn class_counts(labels: &[bool]) -> (usize, usize) {
    let pos = labels.iter().filter(|&&l| l).count();
    (pos, labels.len() - pos)
}

pub(crate) fn has_both_classes(labels: &[bool]) -> bool {
    let (p, n) = class_counts(labels);
    p > 0 && n > 0
}

/// Area under the ROC curve via the Mann-Whitney rank sum, with tied scores
/// sharing the average rank (each tied positive/negative pair counts 1/2).
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidInput("NaN score".into()));
    }
    let (n_pos, n_neg) = class_counts(labels);
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::InvalidInput(
            "AUC needs both positive and negative labels".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_unstable_by(|&a, &b| scores[a].total_cmp(&scores[b]));

    // Sum of (doubled) ranks of the positives; doubling keeps midranks integral.
    let mut pos_rank2: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1..=j, doubled midrank = i+1+j
        let mid2 = (i + 1 + j) as u128;
        let pos_in_tie = order[i..j].iter().filter(|&&k| labels[k]).count() as u128;
        pos_rank2 += mid2 * pos_in_tie;
        i = j;
    }
    let n_pos = n_pos as u128;
    let n_neg = n_neg as u128;
    // 2U = 2R - n_pos(n_pos+1)
    let u2 = pos_rank2 - n_pos * (n_pos + 1);
    Ok(u2 as f64 / (2 * n_pos * n_neg) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(scores: &[f64], labels: &[bool]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..scores.len() {
            for j in 0..scores.len() {
                if labels[i] && !labels[j] {
                    den += 1.0;
                    if scores[i] > scores[j] {
                        num += 1.0;
                    } else if scores[i] == scores[j] {
                        num += 0.5;
                    }
                }
            }
        }
        num / den
    }

    #[test]
    fn examples() {
        assert_eq!(auc(&[0.9, 0.1], &[true, false]).unwrap(), 1.0);
        assert_eq!(auc(&[0.5, 0.5, 0.2], &[true, false, false]).unwrap(), 0.75);
        assert_eq!(auc(&[0.3; 7], &[true, false, true, false, false, true, true]).unwrap(), 0.5);
        assert_eq!(auc(&[0.1, 0.9], &[true, false]).unwrap(), 0.0);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(auc(&[0.1, 0.2], &[true, true]).is_err());
        assert!(auc(&[0.1], &[true, false]).is_err());
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..=50).prop_flat_map(|n| {
            (
                prop::collection::vec((0u8..8).prop_map(|v| f64::from(v) / 4.0), n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_filter("both classes", |(_, l)| has_both_classes(l))
    }

    proptest! {
        #[test]
        fn matches_pairwise_count((s, l) in instance()) {
            prop_assert!((auc(&s, &l).unwrap() - brute(&s, &l)).abs() <= 1e-12);
        }

        #[test]
        fn negation_complements((s, l) in instance()) {
            let neg: Vec<f64> = s.iter().map(|v| -v).collect();
            prop_assert_eq!(auc(&s, &l).unwrap() + auc(&neg, &l).unwrap(), 1.0);
        }

        #[test]
        fn invariant_to_increasing_transform((s, l) in instance()) {
            let t: Vec<f64> = s.iter().map(|v| (3.0 * v).exp() + v.powi(3)).collect();
            prop_assert_eq!(auc(&s, &l).unwrap(), auc(&t, &l).unwrap());
        }
    }
}
