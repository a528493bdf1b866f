//! k-nearest-neighbour classifier over the full stored training set.

use serde::{Deserialize, Serialize};

use crate::data::Matrix;
use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    Euclidean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub x: Matrix,
    pub y: Vec<u8>,
    pub k: usize,
    pub distance: Distance,
}

impl KnnModel {
    pub fn new(x: Matrix, y: Vec<u8>, k: usize) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty("k-NN training set"));
        }
        if x.rows() != y.len() {
            return Err(Error::Dimension {
                expected: x.rows(),
                got: y.len(),
            });
        }
        if k == 0 || k > x.rows() {
            return Err(Error::Config(format!(
                "k must be in 1..={}, got {k}",
                x.rows()
            )));
        }
        Ok(KnnModel {
            x,
            y,
            k,
            distance: Distance::Euclidean,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Indices of the `k` nearest training rows, nearest first. Distance ties
    /// go to the lower index. `exclude` removes one row from consideration.
    pub fn neighbors(&self, query: &[f64], exclude: Option<usize>) -> Result<Vec<usize>> {
        if self.is_empty() {
            return Err(Error::Empty("k-NN model"));
        }
        if query.len() != self.x.cols() {
            return Err(Error::Dimension {
                expected: self.x.cols(),
                got: query.len(),
            });
        }
        let mut cand: Vec<(f64, usize)> = self
            .x
            .iter_rows()
            .enumerate()
            .filter(|(i, _)| Some(*i) != exclude)
            .map(|(i, row)| (squared_distance(row, query), i))
            .collect();
        let k = self.k.min(cand.len());
        if k == 0 {
            return Err(Error::Empty("k-NN candidates"));
        }
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < cand.len() {
            cand.select_nth_unstable_by(k - 1, cmp);
            cand.truncate(k);
        }
        cand.sort_unstable_by(cmp);
        Ok(cand.into_iter().map(|(_, i)| i).collect())
    }

    pub fn predict_proba_excluding(&self, query: &[f64], exclude: Option<usize>) -> Result<f64> {
        let nn = self.neighbors(query, exclude)?;
        let pos = nn.iter().filter(|&&i| self.y[i] == 1).count();
        Ok(pos as f64 / nn.len() as f64)
    }

    pub fn predict_proba(&self, query: &[f64]) -> Result<f64> {
        self.predict_proba_excluding(query, None)
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

pub fn knn_predict_proba(model: &KnnModel, x: &[f64]) -> Result<f64> {
    model.predict_proba(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> KnnModel {
        let x = Matrix::from_rows(&[[0.0], [1.0], [2.0], [3.0], [10.0]]);
        KnnModel::new(x, vec![1, 1, 0, 0, 1], 3).unwrap()
    }

    #[test]
    fn three_neighbors_vote() {
        assert!((line().predict_proba(&[0.9]).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_match_with_k1() {
        let mut m = line();
        m.k = 1;
        assert_eq!(m.predict_proba(&[2.0]).unwrap(), 0.0);
        assert_eq!(m.predict_proba(&[10.0]).unwrap(), 1.0);
    }

    #[test]
    fn ties_prefer_lower_index() {
        let mut m = line();
        m.k = 1;
        // 0.5 is equidistant from rows 0 and 1; 2.5 from rows 2 and 3.
        assert_eq!(m.neighbors(&[0.5], None).unwrap(), vec![0]);
        assert_eq!(m.neighbors(&[2.5], None).unwrap(), vec![2]);
    }

    #[test]
    fn k_equal_n_gives_base_rate() {
        let mut m = line();
        m.k = 5;
        for q in [-4.0, 0.0, 7.5] {
            assert!((m.predict_proba(&[q]).unwrap() - 0.6).abs() < 1e-15);
        }
    }

    #[test]
    fn exclusion_skips_self() {
        let mut m = line();
        m.k = 1;
        assert_eq!(m.neighbors(&[2.0], Some(2)).unwrap(), vec![1]);
    }

    #[test]
    fn rejects_bad_k() {
        let x = Matrix::from_rows(&[[0.0], [1.0]]);
        assert!(KnnModel::new(x.clone(), vec![0, 1], 0).is_err());
        assert!(KnnModel::new(x, vec![0, 1], 3).is_err());
    }
}
