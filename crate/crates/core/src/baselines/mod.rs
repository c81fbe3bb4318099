//! Comparison methods that produce a full feature ranking, so they can be
//! scored the same way as the stump ranking: by how much of the active set
//! lands in the top `s` positions.

mod lasso;
mod sis;

pub use lasso::{
    lasso_cv, lasso_fit, lasso_rank, soft_threshold, LassoCv, LassoFit, DEFAULT_N_FOLDS,
    DEFAULT_N_LAMBDAS, PATH_RATIO, PATH_TOL,
};
pub use sis::{pearson, sis_rank, sis_scores};

/// Indices ordered by descending score; equal scores keep index order.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descending_with_index_ties() {
        assert_eq!(rank_descending(&[0.1, 0.5, 0.0, 0.5]), vec![1, 3, 0, 2]);
    }
}
