//! Single-feature decision stumps scored by variance-reduction impurity.
//!
//! For each feature the samples are ordered by that feature, split into a
//! left block of `n_left` samples and a right block of the rest, and the
//! impurity is the size-weighted sum of the two population variances of the
//! response. Features with low impurity explain more of the response; the
//! ranking sorts features by ascending impurity.

use serde::{Deserialize, Serialize};

use crate::dataset::{variance, Dataset};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::Stream;

/// How the split position of a stump is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SplitStrategy {
    /// `n_left = floor(n / 2)`.
    Median,
    /// The `n_left` in `1..n` minimising the impurity.
    Optimal,
    /// Ablation: the population variance of the left block at the median
    /// split, ignoring the right block.
    LeftOnly,
}

/// Per-feature impurities and the ascending ranking they induce.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpurityScores {
    pub imp: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl ImpurityScores {
    /// Ranks `imp` ascending; equal impurities go to the lower feature index.
    pub fn from_impurities(imp: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..imp.len()).collect();
        ranking.sort_by(|&a, &b| imp[a].total_cmp(&imp[b]));
        ImpurityScores { imp, ranking }
    }

    pub fn len(&self) -> usize {
        self.imp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.imp.is_empty()
    }

    pub fn select_top(&self, s: usize) -> Result<Vec<usize>> {
        select_top(self, s)
    }
}

/// Neumaier compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_finite(column: &[f64]) -> Result<()> {
    if column.len() > u32::MAX as usize {
        return Err(Error::invalid("more than 2^32 - 1 rows"));
    }
    match column.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::invalid(format!("non-finite value at row {i}"))),
        None => Ok(()),
    }
}

/// Row order by value; runs of equal values are reordered by the random
/// key `stream.word(row)`, then by row index.
fn ordered_rows(column: &[f64], stream: Stream) -> Vec<u32> {
    let mut pairs: Vec<(f64, u32)> = column.iter().zip(0u32..).map(|(&v, i)| (v, i)).collect();
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut order: Vec<u32> = pairs.iter().map(|p| p.1).collect();
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        // `==` also merges -0.0 with 0.0.
        while end < pairs.len() && pairs[end].0 == pairs[start].0 {
            end += 1;
        }
        if end - start > 1 {
            order[start..end].sort_unstable_by_key(|&i| (stream.word(i as u64), i));
        }
        start = end;
    }
    order
}

/// Row indices that sort `column` ascending. Equal values are ordered by
/// independent random keys: row `i` uses word `i` of `stream`.
pub fn sorted_order(column: &[f64], stream: Stream) -> Result<Vec<usize>> {
    check_finite(column)?;
    Ok(ordered_rows(column, stream)
        .into_iter()
        .map(|i| i as usize)
        .collect())
}

/// Count, sum and sum of squares of shifted responses.
#[derive(Clone, Copy, Debug, Default)]
struct Moments {
    count: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn variance(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let n = self.count as f64;
        let m = self.sum / n;
        (self.sum_sq / n - m * m).max(0.0)
    }
}

/// Moments of the responses of the `n_left` lowest rows of `column` (in the
/// order of [`sorted_order`]) and of the remaining rows. Responses are
/// shifted by their mean before accumulating.
fn split_moments(column: &[f64], y: &[f64], n_left: usize, stream: Stream) -> (Moments, Moments) {
    let mut vals = column.to_vec();
    let (_, &mut pivot, _) = vals.select_nth_unstable_by(n_left - 1, f64::total_cmp);
    let (mut below, mut tied) = (0usize, 0usize);
    for &v in column {
        below += (v < pivot) as usize;
        tied += (v == pivot) as usize;
    }
    let need = n_left - below;
    // Tied rows that go left, only materialised when some ties go right.
    let chosen: Vec<usize> = if tied > need {
        let mut ties: Vec<usize> = (0..column.len()).filter(|&i| column[i] == pivot).collect();
        ties.sort_unstable_by_key(|&i| (stream.word(i as u64), i));
        ties.truncate(need);
        ties.sort_unstable();
        ties
    } else {
        Vec::new()
    };
    let shift = crate::dataset::mean(y);
    let mut total = Moments::default();
    let mut left = Moments::default();
    // Branch-free accumulation; which side a row falls on is unpredictable.
    for (i, (&v, &yi)) in column.iter().zip(y).enumerate() {
        let d = yi - shift;
        let goes_left = if chosen.is_empty() {
            v <= pivot
        } else {
            v < pivot || (v == pivot && chosen.binary_search(&i).is_ok())
        };
        let w = goes_left as u8 as f64;
        total.sum += d;
        total.sum_sq += d * d;
        left.sum += w * d;
        left.sum_sq += w * d * d;
    }
    left.count = n_left;
    total.count = column.len();
    let right = Moments {
        count: total.count - n_left,
        sum: total.sum - left.sum,
        sum_sq: total.sum_sq - left.sum_sq,
    };
    (left, right)
}

fn check_split(n: usize, n_left: usize) -> Result<()> {
    if n_left == 0 || n_left >= n {
        Err(Error::InvalidSplit { n_left, n })
    } else {
        Ok(())
    }
}

/// Weighted sum of the population variances of `y_sorted[..n_left]` and
/// `y_sorted[n_left..]`.
pub fn split_impurity(y_sorted: &[f64], n_left: usize) -> Result<f64> {
    let n = y_sorted.len();
    check_split(n, n_left)?;
    let (left, right) = y_sorted.split_at(n_left);
    let n_f = n as f64;
    Ok(left.len() as f64 / n_f * variance(left) + right.len() as f64 / n_f * variance(right))
}

/// The same impurity written as the parent variance minus the weighted
/// squared gap between the child means.
pub fn split_impurity_via_identity(y_sorted: &[f64], n_left: usize) -> Result<f64> {
    let n = y_sorted.len();
    check_split(n, n_left)?;
    let (left, right) = y_sorted.split_at(n_left);
    let gap = crate::dataset::mean(left) - crate::dataset::mean(right);
    let n_f = n as f64;
    let weight = left.len() as f64 * right.len() as f64 / (n_f * n_f);
    Ok(variance(y_sorted) - weight * gap * gap)
}

/// Minimum impurity over `n_left` in `1..n`, with the minimising `n_left`
/// (smallest on ties). One pass over prefix sums of the centred response:
/// with `c = y - mean(y)` and `S_l = c_1 + ... + c_l`, the impurity at `l`
/// is `Var(y) - S_l^2 / (l (n - l))`.
pub fn best_split(y_sorted: &[f64]) -> Result<(usize, f64)> {
    let n = y_sorted.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
    }
    let mut total = CompensatedSum::default();
    for &v in y_sorted {
        total.add(v);
    }
    let m = total.value() / n as f64;
    let mut sq = CompensatedSum::default();
    for &v in y_sorted {
        sq.add((v - m) * (v - m));
    }
    let var = sq.value() / n as f64;

    let mut prefix = CompensatedSum::default();
    let mut best = (1, f64::NEG_INFINITY);
    for (l, &v) in y_sorted[..n - 1].iter().enumerate() {
        prefix.add(v - m);
        let l = l + 1;
        let s = prefix.value();
        let gain = s * s / (l as f64 * (n - l) as f64);
        if gain > best.1 {
            best = (l, gain);
        }
    }
    Ok((best.0, (var - best.1).max(0.0)))
}

/// Impurity of a single feature under `strategy`. Ties in `column` are
/// broken with `stream` as in [`sorted_order`].
pub fn feature_impurity(
    column: &[f64],
    y: &[f64],
    strategy: SplitStrategy,
    stream: Stream,
) -> Result<f64> {
    let n = column.len();
    if y.len() != n {
        return Err(Error::invalid(format!(
            "feature has {n} rows, response has {}",
            y.len()
        )));
    }
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
    }
    check_finite(column)?;
    let half = n / 2;
    match strategy {
        SplitStrategy::Optimal => {
            let ys: Vec<f64> = ordered_rows(column, stream)
                .iter()
                .map(|&i| y[i as usize])
                .collect();
            best_split(&ys).map(|(_, imp)| imp)
        }
        SplitStrategy::Median => {
            let (left, right) = split_moments(column, y, half, stream);
            let n_f = n as f64;
            Ok(left.count as f64 / n_f * left.variance()
                + right.count as f64 / n_f * right.variance())
        }
        SplitStrategy::LeftOnly => Ok(split_moments(column, y, half, stream).0.variance()),
    }
}

/// Substream used to break ties in feature `k` under `seed`.
pub fn feature_stream(seed: u64, k: usize) -> Stream {
    Stream::new(seed).child(k as u64)
}

/// Scores every feature of `data`.
pub fn score_all(data: &Dataset, strategy: SplitStrategy, seed: u64) -> Result<ImpurityScores> {
    score_all_with(data, strategy, seed, Execution::default())
}

pub fn score_all_with(
    data: &Dataset,
    strategy: SplitStrategy,
    seed: u64,
    exec: Execution,
) -> Result<ImpurityScores> {
    let imp = exec.try_map(data.p(), |k| {
        feature_impurity(data.column(k), data.y(), strategy, feature_stream(seed, k))
    })?;
    Ok(ImpurityScores::from_impurities(imp))
}

/// The `s` highest-ranked features, in ascending index order.
pub fn select_top(scores: &ImpurityScores, s: usize) -> Result<Vec<usize>> {
    if s < 1 || s > scores.len() {
        return Err(Error::invalid(format!(
            "selection size {s} outside 1..={}",
            scores.len()
        )));
    }
    let mut top = scores.ranking[..s].to_vec();
    top.sort_unstable();
    Ok(top)
}
