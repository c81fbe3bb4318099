//! Threshold selection when the number of active features is unknown.
//!
//! Permuting the rows of the design decouples every feature from the
//! response, so the stump impurities of a permuted copy sample the null
//! distribution. The smallest null impurity over `T - 1` permuted copies is
//! the threshold `gamma`; the selected set is every feature whose impurity
//! on the original data is `<= gamma`.

use rand::seq::SliceRandom;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::Stream;
use crate::stump::{score_all_with, ImpurityScores, SplitStrategy};

/// Default number of rounds `T` (the loop runs `T - 1` permutations).
pub const DEFAULT_T_ROUNDS: usize = 10;

const ORIGINAL: u64 = 0;
const ROUNDS: u64 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdResult {
    pub gamma: f64,
    /// Minimum impurity of each permuted round, `T - 1` entries.
    pub per_round_min: Vec<f64>,
    /// Features with impurity `<= gamma`, ascending.
    pub selected: Vec<usize>,
    /// Impurities on the unpermuted data.
    pub scores: ImpurityScores,
}

/// Copy of `data` with rows of the design permuted uniformly at random; the
/// response keeps its order.
pub fn permute_rows(data: &Dataset, stream: Stream) -> Result<Dataset> {
    let mut perm: Vec<usize> = (0..data.n()).collect();
    perm.shuffle(&mut stream.rng());
    let x = data
        .columns()
        .flat_map(|c| perm.iter().map(move |&i| c[i]))
        .collect();
    Dataset::from_column_major(data.n(), data.p(), x, data.y().to_vec())
}

fn check_rounds(t_rounds: usize) -> Result<()> {
    if t_rounds < 2 {
        Err(Error::invalid(format!(
            "t_rounds must be >= 2, got {t_rounds}"
        )))
    } else {
        Ok(())
    }
}

fn round_minima(
    data: &Dataset,
    t_rounds: usize,
    strategy: SplitStrategy,
    seed: u64,
    exec: Execution,
) -> Result<Vec<f64>> {
    let rounds = Stream::new(seed).child(ROUNDS);
    exec.try_map(t_rounds - 1, |t| {
        let round = rounds.child(t as u64);
        let permuted = permute_rows(data, round.child(0))?;
        let scores = score_all_with(&permuted, strategy, round.child(1).seed(), exec)?;
        Ok(scores.imp.iter().copied().fold(f64::INFINITY, f64::min))
    })
}

/// Minimum stump impurity over `t_rounds - 1` independently row-permuted
/// copies of `data`.
pub fn estimate_threshold(
    data: &Dataset,
    t_rounds: usize,
    strategy: SplitStrategy,
    seed: u64,
) -> Result<f64> {
    check_rounds(t_rounds)?;
    let minima = round_minima(data, t_rounds, strategy, seed, Execution::default())?;
    Ok(minima.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn recover_unknown_s(
    data: &Dataset,
    t_rounds: usize,
    strategy: SplitStrategy,
    seed: u64,
) -> Result<ThresholdResult> {
    recover_unknown_s_with(data, t_rounds, strategy, seed, Execution::default())
}

pub fn recover_unknown_s_with(
    data: &Dataset,
    t_rounds: usize,
    strategy: SplitStrategy,
    seed: u64,
    exec: Execution,
) -> Result<ThresholdResult> {
    check_rounds(t_rounds)?;
    let scores = score_all_with(
        data,
        strategy,
        Stream::new(seed).child(ORIGINAL).seed(),
        exec,
    )?;
    let per_round_min = round_minima(data, t_rounds, strategy, seed, exec)?;
    let gamma = per_round_min.iter().copied().fold(f64::INFINITY, f64::min);
    let selected = (0..scores.len())
        .filter(|&k| scores.imp[k] <= gamma)
        .collect();
    Ok(ThresholdResult {
        gamma,
        per_round_min,
        selected,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{mean, variance};
    use crate::synth::{gen_dataset, DesignDistribution, LinkFunction, ModelSpec};

    fn small() -> Dataset {
        Dataset::from_columns(
            vec![vec![1.0, 2.0, 3.0], vec![10.0, 20.0, 30.0]],
            vec![7.0, 8.0, 9.0],
        )
        .unwrap()
    }

    #[test]
    fn permute_rows_keeps_rows_together() {
        let d = small();
        let p = permute_rows(&d, Stream::new(3)).unwrap();
        assert_eq!(p.y(), d.y());
        for i in 0..3 {
            assert_eq!(p.column(1)[i], 10.0 * p.column(0)[i]);
        }
        assert_eq!(p, permute_rows(&d, Stream::new(3)).unwrap());
        let mut c: Vec<f64> = p.column(0).to_vec();
        c.sort_by(f64::total_cmp);
        assert_eq!(c, d.column(0));
    }

    #[test]
    fn some_draw_is_the_identity() {
        let d = small();
        let hit = (0..100)
            .map(|s| permute_rows(&d, Stream::new(s)).unwrap())
            .any(|p| p == d);
        assert!(hit);
    }

    #[test]
    fn permutation_preserves_column_moments() {
        let spec = ModelSpec::pure_noise(4, DesignDistribution::StdGaussian, 1.0).unwrap();
        let d = gen_dataset(&spec, 500, Stream::new(1)).unwrap();
        let p = permute_rows(&d, Stream::new(2)).unwrap();
        for k in 0..4 {
            assert!((mean(d.column(k)) - mean(p.column(k))).abs() < 1e-12);
            assert!((variance(d.column(k)) - variance(p.column(k))).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_too_few_rounds() {
        assert!(estimate_threshold(&small(), 1, SplitStrategy::Median, 0).is_err());
        assert!(recover_unknown_s(&small(), 0, SplitStrategy::Median, 0).is_err());
    }

    #[test]
    fn threshold_bounds_and_determinism() {
        let spec = ModelSpec::pure_noise(20, DesignDistribution::Uniform01, 1.0).unwrap();
        let d = gen_dataset(&spec, 200, Stream::new(4)).unwrap();
        let g = estimate_threshold(&d, 10, SplitStrategy::Optimal, 9).unwrap();
        assert!(g >= 0.0 && g <= variance(d.y()));
        assert_eq!(
            g,
            estimate_threshold(&d, 10, SplitStrategy::Optimal, 9).unwrap()
        );
        let r = recover_unknown_s(&d, 10, SplitStrategy::Optimal, 9).unwrap();
        assert_eq!(r.per_round_min.len(), 9);
        assert_eq!(r.gamma, g);
    }

    #[test]
    fn result_invariants() {
        let mut links = vec![LinkFunction::Zero; 15];
        links[2] = LinkFunction::Linear { beta: 1.0 };
        links[9] = LinkFunction::Linear { beta: -0.3 };
        let spec = ModelSpec::new(links, DesignDistribution::Uniform01, 0.2).unwrap();
        let d = gen_dataset(&spec, 300, Stream::new(5)).unwrap();
        for exec in [Execution::Sequential, Execution::Parallel] {
            let r = recover_unknown_s_with(&d, 6, SplitStrategy::Median, 1, exec).unwrap();
            let min = r
                .per_round_min
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(r.gamma, min);
            for &k in &r.selected {
                for j in 0..15 {
                    if r.scores.imp[j] < r.scores.imp[k] {
                        assert!(r.selected.contains(&j));
                    }
                }
            }
            assert!(r.selected.contains(&2) && r.selected.contains(&9));
        }
    }

    #[test]
    fn noiseless_perfect_feature_is_selected() {
        let mut links = vec![LinkFunction::Zero; 10];
        links[4] = LinkFunction::Linear { beta: 1.0 };
        let spec = ModelSpec::new(links, DesignDistribution::Uniform01, 0.0).unwrap();
        let d = gen_dataset(&spec, 100, Stream::new(6)).unwrap();
        let r = recover_unknown_s(&d, 10, SplitStrategy::Optimal, 3).unwrap();
        assert!(r.selected.contains(&4));
    }
}
