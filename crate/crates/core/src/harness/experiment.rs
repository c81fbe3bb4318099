//! Sweep driver: one minimal-sample-count search per (method, sparsity),
//! written as CSV rows plus a JSON metadata sidecar.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize, Serializer};

use super::{format_sig, min_samples_with, Method, ModelTemplate};
use crate::baselines::{DEFAULT_N_FOLDS, DEFAULT_N_LAMBDAS, PATH_RATIO, PATH_TOL};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::synth::{DesignDistribution, LinkKind};

pub const CSV_HEADER: &str = "method,p,s,n_star,achieved_fraction,replications,seed,wall_time_ms";

/// A single method name or a list of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MethodSet {
    One(Method),
    Many(Vec<Method>),
}

impl MethodSet {
    pub fn methods(&self) -> Vec<Method> {
        match self {
            MethodSet::One(m) => vec![*m],
            MethodSet::Many(ms) => ms.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: MethodSet,
    pub p: usize,
    pub s_values: Vec<usize>,
    pub design: DesignDistribution,
    /// Standard deviation of the additive Gaussian noise.
    pub noise_sd: f64,
    pub target_fraction: f64,
    pub replications: usize,
    pub seed: u64,
    pub n_bracket: (usize, usize),
    pub beta_range: (f64, f64),
}

impl Default for ExperimentConfig {
    /// p = 200, 95% target, 25 replications, noise sd 0.1.
    fn default() -> Self {
        ExperimentConfig {
            method: MethodSet::Many(vec![
                Method::DStumpMedian,
                Method::DStumpOptimal,
                Method::Lasso,
            ]),
            p: 200,
            s_values: vec![5, 10, 20, 40, 60, 80, 100],
            design: DesignDistribution::Uniform01,
            noise_sd: 0.1,
            target_fraction: 0.95,
            replications: 25,
            seed: 0,
            n_bracket: (101, 4096),
            beta_range: (0.5, 1.5),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let config: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::invalid(m));
        let methods = self.method.methods();
        if methods.is_empty() {
            return fail("no methods configured".into());
        }
        if self.s_values.is_empty() || self.s_values.contains(&0) {
            return fail("s_values must be non-empty and positive".into());
        }
        let s_max = *self.s_values.iter().max().expect("non-empty");
        if s_max > self.p {
            return fail(format!("sparsity {s_max} exceeds p = {}", self.p));
        }
        let (n_lo, n_hi) = self.n_bracket;
        if n_lo < s_max + 1 {
            return fail(format!(
                "n_bracket lower end {n_lo} must be >= max(s) + 1 = {}",
                s_max + 1
            ));
        }
        if n_lo >= n_hi {
            return fail(format!("n_bracket ({n_lo}, {n_hi}) is empty"));
        }
        if !(self.target_fraction > 0.0 && self.target_fraction <= 1.0) {
            return fail(format!(
                "target_fraction {} outside (0, 1]",
                self.target_fraction
            ));
        }
        if self.replications < 1 {
            return fail("replications must be >= 1".into());
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return fail(format!(
                "noise_sd {} must be finite and >= 0",
                self.noise_sd
            ));
        }
        let (b0, b1) = self.beta_range;
        if !(b0 > 0.0 && b0 <= b1 && b1.is_finite()) {
            return fail(format!(
                "beta_range ({b0}, {b1}) must satisfy 0 < min <= max"
            ));
        }
        Ok(())
    }

    pub fn template(&self, s: usize) -> ModelTemplate {
        ModelTemplate {
            p: self.p,
            s,
            design: self.design,
            noise_sd: self.noise_sd,
            beta_min: self.beta_range.0,
            beta_max: self.beta_range.1,
            link: LinkKind::Linear,
        }
    }
}

fn sig6<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format_sig(*v, 6))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub method: Method,
    pub p: usize,
    pub s: usize,
    pub n_star: usize,
    /// Rounded to the six significant digits written to CSV.
    #[serde(serialize_with = "sig6")]
    pub achieved_fraction: f64,
    pub replications: usize,
    pub seed: u64,
    pub wall_time_ms: u64,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `rows` (with header) to `out`.
pub fn write_rows<W: Write>(out: W, rows: &[ExperimentRow]) -> std::result::Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: &Path) -> Result<Vec<ExperimentRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<ExperimentRow>, _>>()
        .map_err(csv_err(path))
}

/// Path of the metadata sidecar for `out`: `<out>.meta.json`.
pub fn meta_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

#[derive(Serialize)]
struct Metadata<'a> {
    config: &'a ExperimentConfig,
    crate_name: &'static str,
    crate_version: &'static str,
    noise_sd_meaning: &'static str,
    recovery_metric: &'static str,
    search: &'static str,
    lasso: LassoMeta,
}

#[derive(Serialize)]
struct LassoMeta {
    solver: &'static str,
    n_lambdas: usize,
    lambda_min_ratio: f64,
    n_folds: usize,
    convergence_tol_per_sd_y: f64,
    ranking: &'static str,
}

fn write_metadata(config: &ExperimentConfig, out: &Path) -> Result<()> {
    let meta = Metadata {
        config,
        crate_name: env!("CARGO_PKG_NAME"),
        crate_version: env!("CARGO_PKG_VERSION"),
        noise_sd_meaning: "standard deviation of additive Gaussian noise",
        recovery_metric: "mean over replications of |top-s ranked features ∩ active set| / s",
        search: "bisection over n with common replication seeds; upper bracket doubled until the target is met",
        lasso: LassoMeta {
            solver: "cyclic coordinate descent on standardized columns",
            n_lambdas: DEFAULT_N_LAMBDAS,
            lambda_min_ratio: PATH_RATIO,
            n_folds: DEFAULT_N_FOLDS,
            convergence_tol_per_sd_y: PATH_TOL,
            ranking: "descending |coefficient| at the cross-validated lambda; zeros last, ties by index",
        },
    };
    let path = meta_path(out);
    let text = serde_json::to_string_pretty(&meta).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    std::fs::write(&path, text + "\n").map_err(io_err(&path))
}

/// Runs the sweep in `config`, writing rows to `out` as they complete.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<Vec<ExperimentRow>> {
    run_experiment_with(config, out, Execution::default())
}

pub fn run_experiment_with(
    config: &ExperimentConfig,
    out: &Path,
    exec: Execution,
) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    write_metadata(config, out)?;
    let file = File::create(out).map_err(io_err(out))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(file);
    w.write_record(CSV_HEADER.split(','))
        .map_err(csv_err(out))?;
    w.flush().map_err(io_err(out))?;

    let mut rows = Vec::new();
    for method in config.method.methods() {
        for &s in &config.s_values {
            let start = Instant::now();
            let result = min_samples_with(
                method,
                &config.template(s),
                config.target_fraction,
                config.replications,
                config.n_bracket,
                config.seed,
                exec,
            )?;
            let fraction: f64 = format_sig(result.achieved_fraction, 6)
                .parse()
                .expect("formatted float parses");
            let row = ExperimentRow {
                method,
                p: config.p,
                s,
                n_star: result.n_star,
                achieved_fraction: fraction,
                replications: config.replications,
                seed: config.seed,
                wall_time_ms: start.elapsed().as_millis() as u64,
            };
            w.serialize(&row).map_err(csv_err(out))?;
            w.flush().map_err(io_err(out))?;
            rows.push(row);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            method: MethodSet::One(Method::DStumpMedian),
            p: 40,
            s_values: vec![2],
            design: DesignDistribution::Uniform01,
            noise_sd: 0.1,
            target_fraction: 0.9,
            replications: 4,
            seed: 3,
            n_bracket: (3, 64),
            beta_range: (0.5, 1.5),
        }
    }

    #[test]
    fn config_json_accepts_one_or_many_methods() {
        let json = r#"{"method":"DStumpOptimal","p":200,"s_values":[5,10],"design":"gaussian",
            "noise_sd":0.1,"target_fraction":0.95,"replications":25,"seed":7,
            "n_bracket":[11,400],"beta_range":[0.5,1.5]}"#;
        let c: ExperimentConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.method.methods(), vec![Method::DStumpOptimal]);
        assert_eq!(c.design, DesignDistribution::StdGaussian);
        c.validate().unwrap();
        let json = json.replace(r#""DStumpOptimal""#, r#"["Lasso","SIS"]"#);
        let c: ExperimentConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(c.method.methods(), vec![Method::Lasso, Method::Sis]);
        let bad = json.replace(r#""seed":7"#, r#""seed":7,"extra":1"#);
        assert!(serde_json::from_str::<ExperimentConfig>(&bad).is_err());
    }

    #[test]
    fn validation() {
        ExperimentConfig::default().validate().unwrap();
        let mut c = small_config();
        c.n_bracket = (2, 64);
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.replications = 0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.target_fraction = 0.0;
        assert!(c.validate().is_err());
        let mut c = small_config();
        c.s_values = vec![41];
        c.n_bracket = (42, 100);
        assert!(c.validate().is_err());
    }

    #[test]
    fn single_row_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("rows.csv");
        let rows = run_experiment(&small_config(), &out).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].achieved_fraction >= 0.9);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_rows(&out).unwrap(), rows);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(meta_path(&out)).unwrap()).unwrap();
        assert_eq!(meta["config"]["p"], 40);
    }

    #[test]
    fn rows_round_trip_through_writer() {
        let rows = vec![ExperimentRow {
            method: Method::Sis,
            p: 200,
            s: 5,
            n_star: 77,
            achieved_fraction: 0.953333,
            replications: 25,
            seed: u64::MAX,
            wall_time_ms: 12,
        }];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            format!("{CSV_HEADER}\nSIS,200,5,77,0.953333,25,18446744073709551615,12\n")
        );
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let back: Vec<ExperimentRow> = r
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err =
            run_experiment(&small_config(), Path::new("/nonexistent/dir/out.csv")).unwrap_err();
        assert!(
            err.to_string().contains("/nonexistent/dir/out.csv"),
            "{err}"
        );
    }
}
