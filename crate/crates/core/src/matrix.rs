use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    names: Vec<String>,
    n_rows: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(names: Vec<String>, n_rows: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n_rows * names.len() {
            return Err(Error::InvalidInput(format!(
                "matrix data has {} values, expected {} x {}",
                data.len(),
                n_rows,
                names.len()
            )));
        }
        Ok(Matrix {
            names,
            n_rows,
            data,
        })
    }

    /// Builds a matrix from rows; every row must have `names.len()` entries.
    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let m = names.len();
        let mut data = Vec::with_capacity(rows.len() * m);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != m {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} values, expected {m}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(names, rows.len(), data)
    }

    /// Columns named `x0`, `x1`, ...
    pub fn unnamed(n_cols: usize, rows: &[Vec<f64>]) -> Result<Self> {
        Matrix::from_rows((0..n_cols).map(|j| format!("x{j}")).collect(), rows)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.n_cols();
        &self.data[i * m..(i + 1) * m]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_rows).map(move |i| self.get(i, j))
    }

    /// New matrix holding the given rows in the given order (repeats allowed).
    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let m = self.n_cols();
        let mut data = Vec::with_capacity(idx.len() * m);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            names: self.names.clone(),
            n_rows: idx.len(),
            data,
        }
    }

    /// Applies `f(column, value)` to every entry.
    pub fn map_values(&self, f: impl Fn(usize, f64) -> f64) -> Matrix {
        let m = self.n_cols();
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k % m, v))
            .collect();
        Matrix {
            names: self.names.clone(),
            n_rows: self.n_rows,
            data,
        }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Matrix> {
        if names.len() != self.names.len() {
            return Err(Error::InvalidInput("column count changed".into()));
        }
        self.names = names;
        Ok(self)
    }

    /// Fails unless `self` has exactly the columns `expected`, in order.
    pub fn check_schema(&self, expected: &[String]) -> Result<()> {
        if self.names.len() != expected.len() {
            return Err(Error::Schema(format!(
                "expected {} columns, got {}",
                expected.len(),
                self.names.len()
            )));
        }
        if let Some(j) = (0..expected.len()).find(|&j| self.names[j] != expected[j]) {
            return Err(Error::Schema(format!(
                "column {j} is {:?}, expected {:?}",
                self.names[j], expected[j]
            )));
        }
        Ok(())
    }

    /// Stacks rows of `other` (same schema) below `self`.
    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        other.check_schema(&self.names)?;
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(Matrix {
            names: self.names.clone(),
            n_rows: self.n_rows + other.n_rows,
            data,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(Matrix::unnamed(2, &[vec![1.0, 2.0], vec![3.0]]).is_err());
        let m = Matrix::unnamed(2, &[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(m.row(1), &[3.0, 4.0]);
        assert_eq!(m.column(0).collect::<Vec<_>>(), vec![1.0, 3.0]);
        assert_eq!(m.select_rows(&[1, 1]).row(0), &[3.0, 4.0]);
        assert_eq!(m.rows().count(), 2);
    }

    #[test]
    fn schema_mismatch_is_reported() {
        let m = Matrix::unnamed(2, &[vec![1.0, 2.0]]).unwrap();
        let swapped = vec!["x1".to_string(), "x0".to_string()];
        assert!(matches!(m.check_schema(&swapped), Err(Error::Schema(_))));
        assert!(m.check_schema(&["x0".to_string()]).is_err());
        assert!(m.check_schema(m.names()).is_ok());
    }

    #[test]
    fn zero_columns() {
        let m = Matrix::new(vec![], 3, vec![]).unwrap();
        assert_eq!(m.n_rows(), 3);
        assert_eq!(m.rows().count(), 3);
        assert!(m.row(2).is_empty());
    }
}
