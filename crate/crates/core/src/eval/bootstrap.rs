use rand::Rng;

use super::auc::{auc, has_both_classes};
use crate::error::{Error, Result};
use crate::seeds;

/// Outcome of a bootstrap run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bootstrap {
    pub sd: f64,
    pub replicates: usize,
    /// Replicates drawn again because they held a single class.
    pub redraws: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Resampling {
    /// Resample (score, label) pairs jointly.
    #[default]
    Pairs,
    /// Resample positives and negatives separately, keeping class counts.
    Stratified,
}

const MAX_REDRAWS_PER_REPLICATE: usize = 1000;

/// Sample standard deviation of AUC over `n_replicates` bootstrap replicates.
pub fn bootstrap_sd(
    scores: &[f64],
    labels: &[bool],
    n_replicates: usize,
    seed: u64,
) -> Result<Bootstrap> {
    bootstrap_sd_with(scores, labels, n_replicates, seed, Resampling::Pairs)
}

pub fn bootstrap_sd_with(
    scores: &[f64],
    labels: &[bool],
    n_replicates: usize,
    seed: u64,
    mode: Resampling,
) -> Result<Bootstrap> {
    // validates lengths and classes
    auc(scores, labels)?;
    if n_replicates < 2 {
        return Err(Error::InvalidInput(
            "bootstrap needs at least 2 replicates".into(),
        ));
    }
    let n = scores.len();
    let pos: Vec<usize> = (0..n).filter(|&i| labels[i]).collect();
    let neg: Vec<usize> = (0..n).filter(|&i| !labels[i]).collect();
    let mut rng = seeds::rng(seed, seeds::tag("bootstrap"));
    let mut s = vec![0.0; n];
    let mut l = vec![false; n];
    let mut aucs = Vec::with_capacity(n_replicates);
    let mut redraws = 0;
    for _ in 0..n_replicates {
        let mut attempts = 0;
        loop {
            match mode {
                Resampling::Pairs => {
                    for k in 0..n {
                        let i = rng.random_range(0..n);
                        s[k] = scores[i];
                        l[k] = labels[i];
                    }
                }
                Resampling::Stratified => {
                    for k in 0..n {
                        let src = if k < pos.len() { &pos } else { &neg };
                        let i = src[rng.random_range(0..src.len())];
                        s[k] = scores[i];
                        l[k] = labels[i];
                    }
                }
            }
            if has_both_classes(&l) {
                break;
            }
            redraws += 1;
            attempts += 1;
            if attempts >= MAX_REDRAWS_PER_REPLICATE {
                return Err(Error::InvalidInput(
                    "bootstrap replicates keep drawing a single class".into(),
                ));
            }
        }
        aucs.push(auc(&s, &l)?);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    let var = aucs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (aucs.len() - 1) as f64;
    Ok(Bootstrap {
        sd: var.sqrt(),
        replicates: n_replicates,
        redraws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_scores_have_zero_sd() {
        let labels: Vec<bool> = (0..50).map(|i| i % 5 == 0).collect();
        let b = bootstrap_sd(&[0.4; 50], &labels, 200, 1).unwrap();
        assert_eq!(b.sd, 0.0);
    }

    #[test]
    fn separated_scores_have_small_sd() {
        let labels: Vec<bool> = (0..200).map(|i| i < 20).collect();
        let scores: Vec<f64> = (0..200).map(|i| if i < 20 { 1.0 } else { 0.0 }).collect();
        let b = bootstrap_sd(&scores, &labels, 1000, 3).unwrap();
        assert!(b.sd < 0.02, "{}", b.sd);
    }

    #[test]
    fn deterministic_given_seed() {
        let labels: Vec<bool> = (0..80).map(|i| i % 3 == 0).collect();
        let scores: Vec<f64> = (0..80).map(|i| ((i * 37) % 11) as f64).collect();
        let a = bootstrap_sd(&scores, &labels, 300, 5).unwrap();
        assert_eq!(a, bootstrap_sd(&scores, &labels, 300, 5).unwrap());
        assert_ne!(a.sd, bootstrap_sd(&scores, &labels, 300, 6).unwrap().sd);
        let st = bootstrap_sd_with(&scores, &labels, 300, 5, Resampling::Stratified).unwrap();
        assert_eq!(st.redraws, 0);
        assert!(st.sd > 0.0);
    }

    #[test]
    fn rare_positives_trigger_redraws() {
        let mut labels = vec![false; 30];
        labels[0] = true;
        let scores: Vec<f64> = (0..30).map(f64::from).collect();
        let b = bootstrap_sd(&scores, &labels, 200, 2).unwrap();
        assert!(b.redraws > 0);
    }

    #[test]
    fn single_class_is_an_error() {
        assert!(bootstrap_sd(&[0.1, 0.2], &[false, false], 10, 0).is_err());
    }
}
