use rand::seq::index;
use rand::Rng;

use super::Sampling;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::seeds;

fn split_classes(y: &[bool]) -> Result<(Vec<usize>, Vec<usize>)> {
    let pos: Vec<usize> = (0..y.len()).filter(|&i| y[i]).collect();
    let neg: Vec<usize> = (0..y.len()).filter(|&i| !y[i]).collect();
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::InvalidInput(
            "resampling needs both classes".into(),
        ));
    }
    Ok((pos, neg))
}

/// (minority, majority) row indices; positives count as minority on a tie.
fn minority_majority(y: &[bool]) -> Result<(Vec<usize>, Vec<usize>)> {
    let (pos, neg) = split_classes(y)?;
    Ok(if pos.len() <= neg.len() { (pos, neg) } else { (neg, pos) })
}

fn take(x: &Matrix, y: &[bool], idx: &[usize]) -> (Matrix, Vec<bool>) {
    (x.select_rows(idx), idx.iter().map(|&i| y[i]).collect())
}

/// Every minority row plus an equal-size random subset of the majority,
/// in original row order.
pub fn down_sample(x: &Matrix, y: &[bool], seed: u64) -> Result<(Matrix, Vec<bool>)> {
    let (minority, majority) = minority_majority(y)?;
    let mut rng = seeds::rng(seed, seeds::tag("down-sample"));
    let mut keep = minority.clone();
    keep.extend(
        index::sample(&mut rng, majority.len(), minority.len())
            .into_iter()
            .map(|k| majority[k]),
    );
    keep.sort_unstable();
    Ok(take(x, y, &keep))
}

/// Every row, followed by minority duplicates drawn with replacement until
/// the classes balance.
pub fn up_sample(x: &Matrix, y: &[bool], seed: u64) -> Result<(Matrix, Vec<bool>)> {
    let (minority, majority) = minority_majority(y)?;
    let mut rng = seeds::rng(seed, seeds::tag("up-sample"));
    let mut keep: Vec<usize> = (0..y.len()).collect();
    keep.extend(
        (0..majority.len() - minority.len()).map(|_| minority[rng.random_range(0..minority.len())]),
    );
    Ok(take(x, y, &keep))
}

pub fn resample(
    x: &Matrix,
    y: &[bool],
    sampling: Sampling,
    seed: u64,
) -> Result<(Matrix, Vec<bool>)> {
    match sampling {
        Sampling::None => Ok((x.clone(), y.to_vec())),
        Sampling::Up => up_sample(x, y, seed),
        Sampling::Down => down_sample(x, y, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn data(labels: &[bool]) -> Matrix {
        let rows: Vec<Vec<f64>> = (0..labels.len()).map(|i| vec![i as f64]).collect();
        Matrix::unnamed(1, &rows).unwrap()
    }

    fn counts(y: &[bool]) -> (usize, usize) {
        let p = y.iter().filter(|&&v| v).count();
        (p, y.len() - p)
    }

    #[test]
    fn down_sample_two_of_eight() {
        let y = [true, false, false, true, false, false, false, false];
        let (x2, y2) = down_sample(&data(&y), &y, 1).unwrap();
        assert_eq!(counts(&y2), (2, 2));
        let ids: Vec<f64> = x2.column(0).collect();
        assert!(ids.contains(&0.0) && ids.contains(&3.0));
        assert_eq!(down_sample(&data(&y), &y, 1).unwrap(), (x2, y2));
    }

    #[test]
    fn up_sample_two_of_eight() {
        let y = [true, false, false, true, false, false, false, false];
        let (x2, y2) = up_sample(&data(&y), &y, 1).unwrap();
        assert_eq!(counts(&y2), (6, 6));
        for (row, lab) in x2.rows().zip(&y2) {
            if *lab {
                assert!(row[0] == 0.0 || row[0] == 3.0);
            }
        }
    }

    #[test]
    fn balanced_input_is_kept() {
        let y = [true, false, true, false];
        let x = data(&y);
        assert_eq!(up_sample(&x, &y, 4).unwrap(), (x.clone(), y.to_vec()));
        let (xd, yd) = down_sample(&x, &y, 4).unwrap();
        assert_eq!((xd, yd), (x, y.to_vec()));
    }

    #[test]
    fn single_class_errors() {
        let y = [false; 4];
        assert!(down_sample(&data(&y), &y, 0).is_err());
        assert!(up_sample(&data(&y), &y, 0).is_err());
    }

    proptest! {
        #[test]
        fn postconditions(
            y in prop::collection::vec(prop::bool::weighted(0.2), 2..120)
                .prop_filter("both", |y| y.iter().any(|&v| v) && y.iter().any(|&v| !v)),
            seed in any::<u64>(),
        ) {
            let x = data(&y);
            let (xd, yd) = down_sample(&x, &y, seed).unwrap();
            let (p, n) = counts(&yd);
            prop_assert_eq!(p, n);
            let mut seen = std::collections::HashSet::new();
            for (row, lab) in xd.rows().zip(&yd) {
                let i = row[0] as usize;
                prop_assert_eq!(y[i], *lab);
                prop_assert!(seen.insert(i));
            }

            let (xu, yu) = up_sample(&x, &y, seed).unwrap();
            let (p, n) = counts(&yu);
            prop_assert_eq!(p, n);
            prop_assert_eq!(xu.select_rows(&(0..y.len()).collect::<Vec<_>>()), x.clone());
            for (row, lab) in xu.rows().zip(&yu) {
                prop_assert_eq!(y[row[0] as usize], *lab);
            }
        }
    }
}
