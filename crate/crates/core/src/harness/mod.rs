//! Sample-complexity measurements: for a method and a model template, how
//! many samples are needed before the method's top-`s` features cover a
//! target fraction of the active set.

mod experiment;
mod format;

pub use experiment::{
    read_rows, run_experiment, run_experiment_with, write_rows, ExperimentConfig, ExperimentRow,
    MethodSet, CSV_HEADER,
};
pub use format::format_sig;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::baselines::{lasso_rank, sis_rank, DEFAULT_N_FOLDS, DEFAULT_N_LAMBDAS};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng::Stream;
use crate::stump::{
    feature_impurity, feature_stream, score_all_with, ImpurityScores, SplitStrategy,
};
use crate::synth::{
    gen_column, gen_dataset, gen_model_with_links, gen_response, DesignDistribution, LinkKind,
    ModelSpec,
};

/// Largest sample count the bracket may grow to.
pub const MAX_SAMPLES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    DStumpMedian,
    DStumpOptimal,
    DStumpLeftOnly,
    Lasso,
    #[serde(rename = "SIS", alias = "Sis")]
    Sis,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::DStumpMedian,
        Method::DStumpOptimal,
        Method::DStumpLeftOnly,
        Method::Lasso,
        Method::Sis,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::DStumpMedian => "DStumpMedian",
            Method::DStumpOptimal => "DStumpOptimal",
            Method::DStumpLeftOnly => "DStumpLeftOnly",
            Method::Lasso => "Lasso",
            Method::Sis => "SIS",
        }
    }

    pub fn split_strategy(self) -> Option<SplitStrategy> {
        match self {
            Method::DStumpMedian => Some(SplitStrategy::Median),
            Method::DStumpOptimal => Some(SplitStrategy::Optimal),
            Method::DStumpLeftOnly => Some(SplitStrategy::LeftOnly),
            Method::Lasso | Method::Sis => None,
        }
    }

    /// Fewest samples the method accepts.
    pub fn min_samples(self) -> usize {
        match self {
            Method::Lasso => DEFAULT_N_FOLDS.max(2),
            _ => 2,
        }
    }

    /// Full ranking of the features of `data`, best first.
    pub fn rank(self, data: &Dataset, seed: u64, exec: Execution) -> Result<Vec<usize>> {
        match self.split_strategy() {
            Some(strategy) => Ok(score_all_with(data, strategy, seed, exec)?.ranking),
            None if self == Method::Lasso => {
                lasso_rank(data, DEFAULT_N_LAMBDAS, DEFAULT_N_FOLDS, seed)
            }
            None => Ok(sis_rank(data)),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    /// Case-insensitive; `-` and `_` are ignored, so `dstump-median` works.
    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| *c != '-' && *c != '_')
            .collect::<String>()
            .to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::invalid(format!("unknown method `{s}`")))
    }
}

/// Distribution over random models: the active set and coefficients are
/// redrawn for every replication.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelTemplate {
    pub p: usize,
    pub s: usize,
    pub design: DesignDistribution,
    pub noise_sd: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    #[serde(default)]
    pub link: LinkKind,
}

impl ModelTemplate {
    pub fn linear(p: usize, s: usize, design: DesignDistribution, noise_sd: f64) -> Self {
        ModelTemplate {
            p,
            s,
            design,
            noise_sd,
            beta_min: 0.5,
            beta_max: 1.5,
            link: LinkKind::Linear,
        }
    }

    pub fn instantiate(&self, stream: Stream) -> Result<ModelSpec> {
        gen_model_with_links(
            self.link,
            self.p,
            self.s,
            self.beta_min,
            self.beta_max,
            self.design,
            self.noise_sd,
            stream,
        )
    }
}

/// Share of `active` found among the first `active.len()` ranked features.
pub fn top_s_overlap(ranking: &[usize], active: &[usize]) -> f64 {
    let s = active.len();
    if s == 0 {
        return 1.0;
    }
    let hits = ranking[..s.min(ranking.len())]
        .iter()
        .filter(|k| active.contains(k))
        .count();
    hits as f64 / s as f64
}

const REP_MODEL: u64 = 0;
const REP_DATA: u64 = 1;
const REP_METHOD: u64 = 2;

fn replication_fraction(
    method: Method,
    spec: &ModelSpec,
    n: usize,
    rep: Stream,
    exec: Execution,
) -> Result<f64> {
    let data_stream = rep.child(REP_DATA);
    let seed = rep.child(REP_METHOD).seed();
    let ranking = match method.split_strategy() {
        Some(strategy) => streamed_scores(spec, n, data_stream, strategy, seed, exec)?.ranking,
        None => method.rank(&gen_dataset(spec, n, data_stream)?, seed, exec)?,
    };
    Ok(top_s_overlap(&ranking, &spec.active))
}

/// `score_all(&gen_dataset(spec, n, data), ..)` without materialising the
/// design: each column is generated, scored and dropped.
pub fn streamed_scores(
    spec: &ModelSpec,
    n: usize,
    data: Stream,
    strategy: SplitStrategy,
    seed: u64,
    exec: Execution,
) -> Result<ImpurityScores> {
    let y = gen_response(spec, n, data)?;
    let imp = exec.try_map(spec.p, |k| {
        let mut column = Vec::with_capacity(n);
        gen_column(spec, n, data, k, &mut column);
        feature_impurity(&column, &y, strategy, feature_stream(seed, k))
    })?;
    Ok(ImpurityScores::from_impurities(imp))
}

fn check_recovery_args(method: Method, s: usize, n: usize, replications: usize) -> Result<()> {
    if s == 0 {
        return Err(Error::invalid(
            "recovery fraction needs at least one active feature",
        ));
    }
    if replications == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    if n < method.min_samples() {
        return Err(Error::invalid(format!(
            "{method} needs at least {} samples, got {n}",
            method.min_samples()
        )));
    }
    Ok(())
}

fn mean_of(fractions: Vec<f64>) -> f64 {
    let r = fractions.len() as f64;
    fractions.into_iter().sum::<f64>() / r
}

/// Mean top-`s` recovery over `replications` datasets drawn from a fixed
/// model.
pub fn recovery_fraction(
    method: Method,
    spec: &ModelSpec,
    n: usize,
    replications: usize,
    seed: u64,
) -> Result<f64> {
    recovery_fraction_with(method, spec, n, replications, seed, Execution::default())
}

pub fn recovery_fraction_with(
    method: Method,
    spec: &ModelSpec,
    n: usize,
    replications: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    check_recovery_args(method, spec.s, n, replications)?;
    let root = Stream::new(seed);
    let fr = exec.try_map(replications, |r| {
        replication_fraction(method, spec, n, root.child(r as u64), exec)
    })?;
    Ok(mean_of(fr))
}

/// Mean top-`s` recovery where every replication draws its own model from
/// `template`. Replication `r` depends only on `(seed, r)`, and its data at
/// `n` rows is the prefix of its data at any larger `n`.
pub fn recovery_fraction_random_models(
    method: Method,
    template: &ModelTemplate,
    n: usize,
    replications: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    check_recovery_args(method, template.s, n, replications)?;
    let root = Stream::new(seed);
    let fr = exec.try_map(replications, |r| {
        let rep = root.child(r as u64);
        let spec = template.instantiate(rep.child(REP_MODEL))?;
        replication_fraction(method, &spec, n, rep, exec)
    })?;
    Ok(mean_of(fr))
}

/// Outcome of a minimal-sample-count search.
#[derive(Clone, Debug, PartialEq)]
pub struct MinSamples {
    pub n_star: usize,
    pub achieved_fraction: f64,
    /// Every `(n, fraction)` evaluated, in probe order.
    pub probes: Vec<(usize, f64)>,
}

/// Smallest `n` whose mean recovery fraction reaches `target`.
///
/// The same replication seeds are used at every probed `n`. If the upper
/// end of the bracket misses the target it is doubled (up to
/// [`MAX_SAMPLES`]) before bisecting down to unit granularity.
pub fn min_samples(
    method: Method,
    template: &ModelTemplate,
    target: f64,
    replications: usize,
    bracket: (usize, usize),
    seed: u64,
) -> Result<MinSamples> {
    min_samples_with(
        method,
        template,
        target,
        replications,
        bracket,
        seed,
        Execution::default(),
    )
}

pub fn min_samples_with(
    method: Method,
    template: &ModelTemplate,
    target: f64,
    replications: usize,
    bracket: (usize, usize),
    seed: u64,
    exec: Execution,
) -> Result<MinSamples> {
    let (n_lo, n_hi) = bracket;
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::invalid(format!(
            "target fraction {target} outside [0, 1]"
        )));
    }
    if n_lo < method.min_samples() {
        return Err(Error::invalid(format!(
            "bracket lower end {n_lo} below {method}'s minimum of {}",
            method.min_samples()
        )));
    }
    if n_lo >= n_hi {
        return Err(Error::invalid(format!("empty bracket ({n_lo}, {n_hi})")));
    }
    if n_hi > MAX_SAMPLES {
        return Err(Error::invalid(format!(
            "bracket upper end {n_hi} above {MAX_SAMPLES}"
        )));
    }

    let mut probes = Vec::new();
    let mut probe = |n: usize| -> Result<f64> {
        let f = recovery_fraction_random_models(method, template, n, replications, seed, exec)?;
        probes.push((n, f));
        Ok(f)
    };

    let f_lo = probe(n_lo)?;
    if f_lo >= target {
        return Ok(MinSamples {
            n_star: n_lo,
            achieved_fraction: f_lo,
            probes,
        });
    }
    let (mut lo, mut hi) = (n_lo, n_hi);
    let mut f_hi = probe(hi)?;
    while f_hi < target {
        if hi * 2 > MAX_SAMPLES {
            return Err(Error::UnreachableTarget {
                target,
                best: f_hi,
                n_hi: hi,
                cap: MAX_SAMPLES,
            });
        }
        lo = hi;
        hi *= 2;
        f_hi = probe(hi)?;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let f = probe(mid)?;
        if f >= target {
            hi = mid;
            f_hi = f;
        } else {
            lo = mid;
        }
    }
    Ok(MinSamples {
        n_star: hi,
        achieved_fraction: f_hi,
        probes,
    })
}
