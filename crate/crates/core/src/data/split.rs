//! Stratified hold-out splits and k-fold assignment.

use rand::seq::SliceRandom;

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Fold id for every record of the dataset it was built from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_index: Vec<usize>,
}

impl FoldAssignment {
    /// Record indices whose fold id is `fold`, ascending.
    pub fn validation(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_index.len())
            .filter(|&i| self.fold_index[i] == fold)
            .collect()
    }

    pub fn training(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_index.len())
            .filter(|&i| self.fold_index[i] != fold)
            .collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.fold_index {
            sizes[f] += 1;
        }
        sizes
    }
}

fn indices_by_class(labels: &[u8]) -> [Vec<usize>; 2] {
    let mut by_class = [Vec::new(), Vec::new()];
    for (i, &y) in labels.iter().enumerate() {
        by_class[usize::from(y)].push(i);
    }
    by_class
}

/// Stratified split. The test part receives `round(test_fraction * n)`
/// records (kept within `[1, n - 1]`), distributed over the classes by
/// largest remainder so each class's share is within one record of its
/// proportional quota.
pub fn train_test_split_indices(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitIndices> {
    let labels = dataset.labels()?;
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} must lie strictly between 0 and 1"
        )));
    }
    let n = labels.len();
    if n < 2 {
        return Err(Error::Empty("need at least two records to split"));
    }
    let n_test = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);

    let mut by_class = indices_by_class(&labels);
    let exact: Vec<f64> = by_class
        .iter()
        .map(|c| c.len() as f64 * n_test as f64 / n as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = n_test - quota.iter().sum::<usize>();
    let mut order = [0usize, 1];
    order.sort_by(|&a, &b| {
        (exact[b] - exact[b].floor())
            .total_cmp(&(exact[a] - exact[a].floor()))
            .then(a.cmp(&b))
    });
    for &c in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }

    let mut test = Vec::with_capacity(n_test);
    let mut train = Vec::with_capacity(n - n_test);
    for (class, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng::stream(seed, Purpose::Split, class as u64));
        test.extend_from_slice(&members[..quota[class]]);
        train.extend_from_slice(&members[quota[class]..]);
    }
    test.sort_unstable();
    train.sort_unstable();
    Ok(SplitIndices { train, test })
}

pub fn train_test_split(
    dataset: &Dataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    let idx = train_test_split_indices(dataset, test_fraction, seed)?;
    Ok((dataset.subset(&idx.train), dataset.subset(&idx.test)))
}

/// Stratified fold ids. Each class is shuffled and dealt round-robin; the
/// dealing position carries over from one class to the next so overall fold
/// sizes also differ by at most one.
pub fn make_folds(dataset: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    let labels = dataset.labels()?;
    let n = labels.len();
    if k < 2 || k > n {
        return Err(Error::Config(format!(
            "fold count k={k} must satisfy 2 <= k <= n={n}"
        )));
    }
    let mut fold_index = vec![0; n];
    let mut next = 0;
    for (class, mut members) in indices_by_class(&labels).into_iter().enumerate() {
        members.shuffle(&mut rng::stream(seed, Purpose::Folds, class as u64));
        for i in members {
            fold_index[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldAssignment { k, fold_index })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PatientRecord;

    fn dataset(labels: &[u8]) -> Dataset {
        Dataset::new(
            labels
                .iter()
                .enumerate()
                .map(|(i, &y)| PatientRecord {
                    age: i as f64 % 100.0,
                    body_temperature: 98.0,
                    symptoms: [0; 5],
                    infected: Some(y),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn seven_records_five_folds() {
        let ds = dataset(&[0, 1, 0, 1, 0, 1, 0]);
        let folds = make_folds(&ds, 5, 1).unwrap();
        assert_eq!(folds.sizes(), vec![2, 2, 1, 1, 1]);
    }

    #[test]
    fn fold_count_bounds() {
        let ds = dataset(&[0, 1, 0]);
        assert!(make_folds(&ds, 1, 0).is_err());
        assert!(make_folds(&ds, 4, 0).is_err());
        assert!(make_folds(&ds, 3, 0).is_ok());
    }

    #[test]
    fn split_rejects_bad_input() {
        let ds = dataset(&[0, 1, 0, 1]);
        assert!(train_test_split(&ds, 0.0, 0).is_err());
        assert!(train_test_split(&ds, 1.0, 0).is_err());
        let unlabeled = Dataset::new(vec![
            PatientRecord {
                age: 1.0,
                body_temperature: 98.0,
                symptoms: [0; 5],
                infected: None,
            };
            4
        ])
        .unwrap();
        assert!(matches!(
            train_test_split(&unlabeled, 0.5, 0),
            Err(Error::Unlabeled)
        ));
    }

    #[test]
    fn split_is_stratified_and_exact() {
        let labels: Vec<u8> = (0..1000).map(|i| u8::from(i % 10 < 3)).collect();
        let ds = dataset(&labels);
        let s = train_test_split_indices(&ds, 0.2, 9).unwrap();
        assert_eq!(s.test.len(), 200);
        let pos = s.test.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(pos, 60);
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..1000).collect::<Vec<_>>());
        assert_eq!(s, train_test_split_indices(&ds, 0.2, 9).unwrap());
        assert_ne!(s, train_test_split_indices(&ds, 0.2, 10).unwrap());
    }
}
