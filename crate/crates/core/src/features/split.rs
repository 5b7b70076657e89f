use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::seeds;

/// Development/validation halves and the training/tuning halves of
/// development. When a total is odd the first half gets the extra id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleSplit {
    pub development_ids: Vec<String>,
    pub validation_ids: Vec<String>,
    pub training_ids: Vec<String>,
    pub tuning_ids: Vec<String>,
}

impl SampleSplit {
    /// Order-independent fingerprint of the four sets.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for (tag, ids) in [
            ("training", &self.training_ids),
            ("tuning", &self.tuning_ids),
            ("validation", &self.validation_ids),
        ] {
            let mut sorted: Vec<&String> = ids.iter().collect();
            sorted.sort();
            h.update(tag.as_bytes());
            for id in sorted {
                h.update(id.as_bytes());
                h.update([0u8]);
            }
        }
        hex::encode(&h.finalize()[..8])
    }
}

/// Uniformly random nested split, deterministic given `seed` and the id set.
pub fn split_samples(ids: &[String], seed: u64) -> Result<SampleSplit> {
    if ids.len() < 4 {
        return Err(Error::InvalidInput(format!(
            "need at least 4 ids to split, got {}",
            ids.len()
        )));
    }
    let mut shuffled = ids.to_vec();
    shuffled.sort();
    shuffled.dedup();
    if shuffled.len() != ids.len() {
        return Err(Error::InvalidInput("duplicate ids".into()));
    }
    let mut rng = seeds::rng(seed, seeds::tag("sample-split"));
    shuffled.shuffle(&mut rng);
    let n_dev = shuffled.len().div_ceil(2);
    let validation_ids = shuffled.split_off(n_dev);
    let development_ids = shuffled;
    let n_train = development_ids.len().div_ceil(2);
    let training_ids = development_ids[..n_train].to_vec();
    let tuning_ids = development_ids[n_train..].to_vec();
    Ok(SampleSplit {
        development_ids,
        validation_ids,
        training_ids,
        tuning_ids,
    })
}
