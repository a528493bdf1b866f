use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Per-feature affine map `(x - mean) / std`, fitted on training data.
/// Constant columns get `std = 1` so they map to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Matrix) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::Empty("standardizer needs training rows"));
        }
        let mut mean = Vec::with_capacity(x.cols());
        let mut std = Vec::with_capacity(x.cols());
        for col in x.columns() {
            let s = crate::math::std_pop(&col);
            mean.push(crate::math::mean(&col));
            std.push(if s > 0.0 { s } else { 1.0 });
        }
        Ok(Standardizer { mean, std })
    }

    pub fn identity(cols: usize) -> Self {
        Standardizer {
            mean: vec![0.0; cols],
            std: vec![1.0; cols],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| (v - m) / s)
            .collect())
    }

    pub fn apply(&self, x: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            let r = self.apply_row(x.row(i))?;
            out.row_mut(i).copy_from_slice(&r);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_column() {
        let x = Matrix::from_rows(&[[0.0], [2.0]]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.mean, vec![1.0]);
        assert_eq!(s.std, vec![1.0]);
        assert_eq!(s.apply(&x).unwrap().column(0), vec![-1.0, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let x = Matrix::from_rows(&[[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]);
        let s = Standardizer::fit(&x).unwrap();
        assert_eq!(s.std[0], 1.0);
        assert_eq!(s.apply(&x).unwrap().column(0), vec![0.0; 3]);
    }

    #[test]
    fn refit_on_transformed_is_identity() {
        let x = Matrix::from_rows(&[[1.0, 90.0], [4.0, 101.5], [9.5, 99.0], [2.0, 97.25]]);
        let z = Standardizer::fit(&x).unwrap().apply(&x).unwrap();
        let again = Standardizer::fit(&z).unwrap();
        for j in 0..2 {
            assert!(again.mean[j].abs() < 1e-12);
            assert!((again.std[j] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_and_mismatch() {
        assert!(Standardizer::fit(&Matrix::zeros(0, 3)).is_err());
        let s = Standardizer::identity(2);
        assert!(matches!(s.apply_row(&[1.0]), Err(Error::Dimension { .. })));
    }
}
