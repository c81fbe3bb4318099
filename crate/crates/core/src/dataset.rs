use crate::error::{Error, Result};

/// An `n x p` design matrix with an `n`-vector of responses.
///
/// Columns are stored contiguously (column-major), since every consumer in
/// this crate works one feature at a time.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    n: usize,
    p: usize,
    x: Vec<f64>,
    y: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from column-major storage: column `k` occupies
    /// `x[k * n..(k + 1) * n]`.
    pub fn from_column_major(n: usize, p: usize, x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
        }
        if p < 1 {
            return Err(Error::invalid("need at least 1 feature"));
        }
        if y.len() != n {
            return Err(Error::invalid(format!(
                "response has {} entries, expected {n}",
                y.len()
            )));
        }
        if x.len() != n * p {
            return Err(Error::invalid(format!(
                "design has {} entries, expected {n} x {p}",
                x.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite design entry at row {}, column {}",
                i % n,
                i / n
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite response at row {i}")));
        }
        Ok(Dataset { n, p, x, y })
    }

    pub fn from_columns(columns: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        let p = columns.len();
        if let Some((k, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(Error::invalid(format!(
                "column {k} has {} rows, response has {n}",
                c.len()
            )));
        }
        Self::from_column_major(n, p, columns.concat(), y)
    }

    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::invalid("rows have differing lengths"));
        }
        let mut x = vec![0.0; n * p];
        for (i, row) in rows.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                x[k * n + i] = v;
            }
        }
        Self::from_column_major(n, p, x, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn column(&self, k: usize) -> &[f64] {
        &self.x[k * self.n..(k + 1) * self.n]
    }

    pub fn columns(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.x.chunks_exact(self.n)
    }

    /// The first `rows` samples as a new dataset.
    pub fn head(&self, rows: usize) -> Result<Self> {
        let rows = rows.min(self.n);
        let x = self.columns().flat_map(|c| &c[..rows]).copied().collect();
        Self::from_column_major(rows, self.p, x, self.y[..rows].to_vec())
    }

    /// Subset of rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let x = self
            .columns()
            .flat_map(|c| rows.iter().map(move |&i| c[i]))
            .collect();
        let y = rows.iter().map(|&i| self.y[i]).collect();
        Self::from_column_major(rows.len(), self.p, x, y)
    }

    /// Applies `f` to every design entry; the response is untouched.
    pub fn map_features(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        let x = self.x.iter().map(|&v| f(v)).collect();
        Self::from_column_major(self.n, self.p, x, self.y.clone())
    }

    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        Self::from_column_major(self.n, self.p, self.x.clone(), y)
    }
}

/// Empirical mean.
pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Population variance (divides by the count). Zero for empty input.
pub fn variance(v: &[f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layouts_agree() {
        let rows = vec![vec![1.0, 10.0], vec![2.0, 20.0], vec![3.0, 30.0]];
        let a = Dataset::from_rows(&rows, vec![0.0, 1.0, 2.0]).unwrap();
        let b = Dataset::from_columns(
            vec![vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0]],
            vec![0.0, 1.0, 2.0],
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.column(1), &[10.0, 20.0, 30.0]);
        assert_eq!(a.select_rows(&[2, 0]).unwrap().column(0), &[3.0, 1.0]);
        assert_eq!(a.head(2).unwrap().column(1), &[10.0, 20.0]);
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(Dataset::from_columns(vec![vec![1.0]], vec![1.0]).is_err());
        assert!(Dataset::from_columns(vec![], vec![1.0, 2.0]).is_err());
        assert!(Dataset::from_columns(vec![vec![1.0, 2.0, 3.0]], vec![1.0, 2.0]).is_err());
        assert!(Dataset::from_columns(vec![vec![1.0, f64::NAN]], vec![1.0, 2.0]).is_err());
        assert!(Dataset::from_columns(vec![vec![1.0, 2.0]], vec![f64::INFINITY, 2.0]).is_err());
    }

    #[test]
    fn population_variance() {
        assert_eq!(variance(&[1.0, 2.0, 3.0, 4.0]), 1.25);
        assert_eq!(variance(&[3.0; 5]), 0.0);
        assert_eq!(variance(&[]), 0.0);
    }
}
