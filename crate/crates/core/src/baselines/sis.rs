use crate::dataset::{mean, Dataset};

use super::rank_descending;

/// Pearson correlation; zero when either input has zero variance.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return 0.0;
    }
    (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0)
}

/// Absolute correlation of each feature with the response.
pub fn sis_scores(data: &Dataset) -> Vec<f64> {
    data.columns().map(|c| pearson(c, data.y()).abs()).collect()
}

/// Features by descending absolute correlation with the response.
pub fn sis_rank(data: &Dataset) -> Vec<usize> {
    rank_descending(&sis_scores(data))
}
