//! Sparse additive regression instances: `y = sum_k f_k(x_k) + sigma * z`
//! with i.i.d. design entries and only `s` non-zero link functions.

use std::fmt;
use std::str::FromStr;

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DesignDistribution {
    /// U(0, 1).
    #[serde(rename = "uniform01")]
    Uniform01,
    /// U(-1, 1).
    #[serde(rename = "uniformsym")]
    UniformSym,
    /// N(0, 1).
    #[serde(rename = "gaussian", alias = "stdgaussian")]
    StdGaussian,
}

fn std_normal() -> Normal {
    Normal::standard()
}

impl DesignDistribution {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> f64 {
        match self {
            DesignDistribution::Uniform01 => rng.random::<f64>(),
            DesignDistribution::UniformSym => 2.0 * rng.random::<f64>() - 1.0,
            DesignDistribution::StdGaussian => rng.sample(StandardNormal),
        }
    }

    pub fn cdf(self, x: f64) -> f64 {
        match self {
            DesignDistribution::Uniform01 => x.clamp(0.0, 1.0),
            DesignDistribution::UniformSym => ((x + 1.0) / 2.0).clamp(0.0, 1.0),
            DesignDistribution::StdGaussian => std_normal().cdf(x),
        }
    }

    /// Generalised inverse CDF, `inf { x : F(x) >= u }`.
    pub fn quantile(self, u: f64) -> f64 {
        match self {
            DesignDistribution::Uniform01 => u,
            DesignDistribution::UniformSym => 2.0 * u - 1.0,
            DesignDistribution::StdGaussian => std_normal().inverse_cdf(u),
        }
    }
}

impl fmt::Display for DesignDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DesignDistribution::Uniform01 => "uniform01",
            DesignDistribution::UniformSym => "uniformsym",
            DesignDistribution::StdGaussian => "gaussian",
        })
    }
}

impl FromStr for DesignDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform01" | "uniform" => Ok(DesignDistribution::Uniform01),
            "uniformsym" => Ok(DesignDistribution::UniformSym),
            "gaussian" | "stdgaussian" | "normal" => Ok(DesignDistribution::StdGaussian),
            other => Err(Error::invalid(format!(
                "unknown design distribution `{other}`"
            ))),
        }
    }
}

/// A monotone univariate link `f_k`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LinkFunction {
    Linear {
        beta: f64,
    },
    /// `beta * x^3`
    Cubic {
        beta: f64,
    },
    /// `beta / (1 + exp(-4x))`
    Logistic {
        beta: f64,
    },
    Zero,
}

impl LinkFunction {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            LinkFunction::Linear { beta } => beta * x,
            LinkFunction::Cubic { beta } => beta * x * x * x,
            LinkFunction::Logistic { beta } => beta / (1.0 + (-4.0 * x).exp()),
            LinkFunction::Zero => 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LinkFunction::Zero)
    }

    pub fn beta(&self) -> f64 {
        match *self {
            LinkFunction::Linear { beta }
            | LinkFunction::Cubic { beta }
            | LinkFunction::Logistic { beta } => beta,
            LinkFunction::Zero => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkKind {
    #[default]
    Linear,
    Cubic,
    Logistic,
}

impl LinkKind {
    pub fn with_beta(self, beta: f64) -> LinkFunction {
        match self {
            LinkKind::Linear => LinkFunction::Linear { beta },
            LinkKind::Cubic => LinkFunction::Cubic { beta },
            LinkKind::Logistic => LinkFunction::Logistic { beta },
        }
    }
}

/// Generative description of an s-sparse additive model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub p: usize,
    pub s: usize,
    /// Active features, ascending.
    pub active: Vec<usize>,
    pub links: Vec<LinkFunction>,
    pub design: DesignDistribution,
    pub noise_sd: f64,
}

impl ModelSpec {
    /// Builds a spec from per-feature links; the active set is every
    /// feature whose link is not [`LinkFunction::Zero`].
    pub fn new(
        links: Vec<LinkFunction>,
        design: DesignDistribution,
        noise_sd: f64,
    ) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::invalid("model needs at least one feature"));
        }
        if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
            return Err(Error::invalid(format!(
                "noise_sd must be finite and >= 0, got {noise_sd}"
            )));
        }
        if links.iter().any(|l| !l.beta().is_finite()) {
            return Err(Error::invalid("link coefficients must be finite"));
        }
        let active: Vec<usize> = links
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.is_zero())
            .map(|(k, _)| k)
            .collect();
        Ok(ModelSpec {
            p: links.len(),
            s: active.len(),
            active,
            links,
            design,
            noise_sd,
        })
    }

    /// No active features: the response is noise only.
    pub fn pure_noise(p: usize, design: DesignDistribution, noise_sd: f64) -> Result<Self> {
        Self::new(vec![LinkFunction::Zero; p], design, noise_sd)
    }
}

/// Random linear model: `s` active features drawn uniformly without
/// replacement, each with `beta = +/- U(beta_min, beta_max)`.
pub fn gen_model(
    p: usize,
    s: usize,
    beta_min: f64,
    beta_max: f64,
    design: DesignDistribution,
    noise_sd: f64,
    stream: Stream,
) -> Result<ModelSpec> {
    gen_model_with_links(
        LinkKind::Linear,
        p,
        s,
        beta_min,
        beta_max,
        design,
        noise_sd,
        stream,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn gen_model_with_links(
    kind: LinkKind,
    p: usize,
    s: usize,
    beta_min: f64,
    beta_max: f64,
    design: DesignDistribution,
    noise_sd: f64,
    stream: Stream,
) -> Result<ModelSpec> {
    if s < 1 || s > p {
        return Err(Error::invalid(format!("sparsity {s} outside 1..={p}")));
    }
    if !(beta_min > 0.0 && beta_min <= beta_max && beta_max.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < beta_min <= beta_max, got [{beta_min}, {beta_max}]"
        )));
    }
    let mut rng = stream.rng();
    let active = rand::seq::index::sample(&mut rng, p, s);
    let mut links = vec![LinkFunction::Zero; p];
    for k in active.iter() {
        let magnitude = rng.random_range(beta_min..=beta_max);
        let beta = if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        };
        links[k] = kind.with_beta(beta);
    }
    ModelSpec::new(links, design, noise_sd)
}

/// Draws `n` samples from `spec`.
///
/// Column `k` and the noise each read their own substream sequentially, so
/// the first `m` rows of a draw with `n >= m` equal the draw with `n = m`.
/// Columns can also be produced one at a time with [`gen_column`] and
/// [`gen_response`].
pub fn gen_dataset(spec: &ModelSpec, n: usize, stream: Stream) -> Result<Dataset> {
    check_rows(n)?;
    let mut x = Vec::with_capacity(n * spec.p);
    let mut column = Vec::with_capacity(n);
    for k in 0..spec.p {
        gen_column(spec, n, stream, k, &mut column);
        x.extend_from_slice(&column);
    }
    let y = gen_response(spec, n, stream)?;
    Dataset::from_column_major(n, spec.p, x, y)
}

fn check_rows(n: usize) -> Result<()> {
    if n < 2 {
        Err(Error::invalid(format!("need at least 2 samples, got {n}")))
    } else {
        Ok(())
    }
}

/// Column `k` of `gen_dataset(spec, n, stream)`, written into `out`.
pub fn gen_column(spec: &ModelSpec, n: usize, stream: Stream, k: usize, out: &mut Vec<f64>) {
    let mut rng = stream.child(0).child(k as u64).rng();
    out.clear();
    match spec.design {
        DesignDistribution::Uniform01 => out.extend((0..n).map(|_| rng.random::<f64>())),
        DesignDistribution::UniformSym => {
            out.extend((0..n).map(|_| 2.0 * rng.random::<f64>() - 1.0))
        }
        DesignDistribution::StdGaussian => {
            out.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)))
        }
    }
}

/// Response of `gen_dataset(spec, n, stream)`.
pub fn gen_response(spec: &ModelSpec, n: usize, stream: Stream) -> Result<Vec<f64>> {
    check_rows(n)?;
    let mut y = vec![0.0; n];
    let mut column = Vec::with_capacity(n);
    for &k in &spec.active {
        gen_column(spec, n, stream, k, &mut column);
        let link = spec.links[k];
        for (yi, &xi) in y.iter_mut().zip(&column) {
            *yi += link.eval(xi);
        }
    }
    let mut noise = stream.child(1).rng();
    for yi in &mut y {
        let z: f64 = noise.sample(StandardNormal);
        *yi += spec.noise_sd * z;
    }
    Ok(y)
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Expected link value on the upper half of the feature distribution minus
/// that on the lower half, computed on the quantile scale
/// `h(u) = f(F^{-1}(u))`.
pub fn signal_gap(
    link: &LinkFunction,
    design: DesignDistribution,
    mc_samples: usize,
    stream: Stream,
) -> Result<f64> {
    signal_gap_estimate(link, design, mc_samples, stream).map(|e| e.value)
}

/// As [`signal_gap`], also reporting the Monte Carlo standard error (zero
/// when a closed form applies).
pub fn signal_gap_estimate(
    link: &LinkFunction,
    design: DesignDistribution,
    mc_samples: usize,
    stream: Stream,
) -> Result<GapEstimate> {
    let exact = |value| {
        Ok(GapEstimate {
            value,
            std_error: 0.0,
        })
    };
    match (link, design) {
        (LinkFunction::Zero, _) => return exact(0.0),
        (LinkFunction::Linear { beta }, DesignDistribution::Uniform01) => return exact(beta / 2.0),
        _ => {}
    }
    if mc_samples < 1 {
        return Err(Error::invalid(
            "signal gap needs at least one Monte Carlo sample",
        ));
    }
    // Paired draws: u in (0, 1/2) and u + 1/2 in (1/2, 1).
    let mut rng = stream.rng();
    let h = |u: f64| link.eval(design.quantile(u));
    let (mut mean, mut m2) = (0.0, 0.0);
    for i in 0..mc_samples {
        let v: f64 = Open01.sample(&mut rng);
        let u = 0.5 * v;
        let d = h(u + 0.5) - h(u);
        let delta = d - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (d - mean);
    }
    let std_error = if mc_samples > 1 {
        (m2 / (mc_samples - 1) as f64 / mc_samples as f64).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(GapEstimate {
        value: mean,
        std_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{mean, variance};

    #[test]
    fn gen_model_counts() {
        let m = gen_model(
            200,
            5,
            0.5,
            1.5,
            DesignDistribution::Uniform01,
            0.1,
            Stream::new(1),
        )
        .unwrap();
        assert_eq!(m.active.len(), 5);
        assert_eq!(m.links.iter().filter(|l| l.is_zero()).count(), 195);
        for &k in &m.active {
            let b = m.links[k].beta().abs();
            assert!((0.5..=1.5).contains(&b));
        }
        let full = gen_model(
            7,
            7,
            1.0,
            1.0,
            DesignDistribution::Uniform01,
            0.0,
            Stream::new(2),
        )
        .unwrap();
        assert!(full.links.iter().all(|l| !l.is_zero()));
        let again = gen_model(
            200,
            5,
            0.5,
            1.5,
            DesignDistribution::Uniform01,
            0.1,
            Stream::new(1),
        )
        .unwrap();
        assert_eq!(m, again);
    }

    #[test]
    fn gen_model_rejects_bad_parameters() {
        let d = DesignDistribution::Uniform01;
        assert!(gen_model(10, 0, 0.5, 1.5, d, 0.1, Stream::new(0)).is_err());
        assert!(gen_model(10, 11, 0.5, 1.5, d, 0.1, Stream::new(0)).is_err());
        assert!(gen_model(10, 2, 0.0, 1.5, d, 0.1, Stream::new(0)).is_err());
        assert!(gen_model(10, 2, 2.0, 1.5, d, 0.1, Stream::new(0)).is_err());
        assert!(gen_model(10, 2, 0.5, 1.5, d, -1.0, Stream::new(0)).is_err());
    }

    #[test]
    fn random_signs_appear() {
        let m = gen_model(
            100,
            60,
            0.5,
            1.5,
            DesignDistribution::Uniform01,
            0.1,
            Stream::new(4),
        )
        .unwrap();
        let neg = m
            .active
            .iter()
            .filter(|&&k| m.links[k].beta() < 0.0)
            .count();
        assert!(neg > 10 && neg < 50);
    }

    #[test]
    fn noiseless_single_feature_copies_column() {
        let mut links = vec![LinkFunction::Zero; 3];
        links[1] = LinkFunction::Linear { beta: 1.0 };
        let spec = ModelSpec::new(links, DesignDistribution::Uniform01, 0.0).unwrap();
        let d = gen_dataset(&spec, 50, Stream::new(3)).unwrap();
        assert_eq!(d.y(), d.column(1));
    }

    #[test]
    fn dataset_prefix_consistency() {
        let spec = gen_model(
            20,
            3,
            0.5,
            1.5,
            DesignDistribution::StdGaussian,
            0.1,
            Stream::new(5),
        )
        .unwrap();
        let big = gen_dataset(&spec, 300, Stream::new(6)).unwrap();
        let small = gen_dataset(&spec, 120, Stream::new(6)).unwrap();
        assert_eq!(big.head(120).unwrap(), small);
    }

    #[test]
    fn design_moments() {
        let spec = ModelSpec::pure_noise(2, DesignDistribution::Uniform01, 1.0).unwrap();
        let d = gen_dataset(&spec, 100_000, Stream::new(7)).unwrap();
        assert!((mean(d.column(0)) - 0.5).abs() < 0.01);
        let spec = ModelSpec::pure_noise(1, DesignDistribution::StdGaussian, 1.0).unwrap();
        let d = gen_dataset(&spec, 100_000, Stream::new(8)).unwrap();
        assert!((variance(d.column(0)) - 1.0).abs() < 0.03);
        let spec = ModelSpec::pure_noise(1, DesignDistribution::UniformSym, 1.0).unwrap();
        let d = gen_dataset(&spec, 100_000, Stream::new(9)).unwrap();
        assert!(mean(d.column(0)).abs() < 0.01);
        assert!(d.column(0).iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn pure_noise_response_variance() {
        let spec = ModelSpec::pure_noise(3, DesignDistribution::Uniform01, 0.7).unwrap();
        assert_eq!(spec.s, 0);
        let d = gen_dataset(&spec, 100_000, Stream::new(10)).unwrap();
        let v = variance(d.y());
        assert!((v / 0.49 - 1.0).abs() < 0.05, "variance {v}");
    }

    #[test]
    fn cdf_and_quantile_are_inverse() {
        for design in [
            DesignDistribution::Uniform01,
            DesignDistribution::UniformSym,
            DesignDistribution::StdGaussian,
        ] {
            for u in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.999] {
                let x = design.quantile(u);
                assert!((design.cdf(x) - u).abs() < 1e-9, "{design} {u}");
            }
        }
        assert!(
            (DesignDistribution::StdGaussian.quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-9
        );
    }

    #[test]
    fn design_names_round_trip() {
        for d in [
            DesignDistribution::Uniform01,
            DesignDistribution::UniformSym,
            DesignDistribution::StdGaussian,
        ] {
            assert_eq!(d.to_string().parse::<DesignDistribution>().unwrap(), d);
            let json = serde_json::to_string(&d).unwrap();
            assert_eq!(json, format!("\"{d}\""));
        }
        assert!("cauchy".parse::<DesignDistribution>().is_err());
    }

    #[test]
    fn signal_gap_closed_form_and_zero() {
        let s = Stream::new(0);
        let lin = LinkFunction::Linear { beta: 1.0 };
        assert_eq!(
            signal_gap(&lin, DesignDistribution::Uniform01, 0, s).unwrap(),
            0.5
        );
        let neg = LinkFunction::Linear { beta: -3.0 };
        assert_eq!(
            signal_gap(&neg, DesignDistribution::Uniform01, 0, s).unwrap(),
            -1.5
        );
        assert_eq!(
            signal_gap(&LinkFunction::Zero, DesignDistribution::StdGaussian, 0, s).unwrap(),
            0.0
        );
        assert!(signal_gap(&lin, DesignDistribution::StdGaussian, 0, s).is_err());
    }

    #[test]
    fn signal_gap_gaussian_half_normal() {
        let lin = LinkFunction::Linear { beta: 1.0 };
        let g = signal_gap(
            &lin,
            DesignDistribution::StdGaussian,
            1_000_000,
            Stream::new(1),
        )
        .unwrap();
        let oracle = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((g - oracle).abs() < 0.01, "{g} vs {oracle}");
    }

    #[test]
    fn signal_gap_cubic_uniform_oracle() {
        // E[U^3 | U > 1/2] - E[U^3 | U < 1/2] = 2 * (1/4)(1 - 1/16) - 2 * (1/4)(1/16) = 7/16
        let cubic = LinkFunction::Cubic { beta: 1.0 };
        let g = signal_gap(
            &cubic,
            DesignDistribution::Uniform01,
            400_000,
            Stream::new(2),
        )
        .unwrap();
        assert!((g - 7.0 / 16.0).abs() < 3e-3, "{g}");
        // Symmetric design scales the linear gap with the range: beta * 1.
        let lin = LinkFunction::Linear { beta: 2.0 };
        let g = signal_gap(
            &lin,
            DesignDistribution::UniformSym,
            400_000,
            Stream::new(3),
        )
        .unwrap();
        assert!((g - 2.0).abs() < 1e-2, "{g}");
    }

    #[test]
    fn signal_gap_standard_error_rate() {
        // Quadrupling the sample count halves the standard error; averaged
        // over independent runs to keep the check stable.
        let link = LinkFunction::Logistic { beta: 1.0 };
        let design = DesignDistribution::StdGaussian;
        let spread = |m: usize| {
            let runs: Vec<f64> = (0..200)
                .map(|r| signal_gap(&link, design, m, Stream::new(r).child(m as u64)).unwrap())
                .collect();
            variance(&runs).sqrt()
        };
        let ratio = spread(4000) / spread(1000);
        assert!((ratio - 0.5).abs() < 0.1, "ratio {ratio}");
        let e = signal_gap_estimate(&link, design, 4000, Stream::new(5)).unwrap();
        assert!(e.std_error > 0.0 && e.std_error < 0.01);
    }
}
