//! `bench`: sample-complexity sweeps and ad-hoc scoring for decision-stump
//! feature selection.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dstump::harness::{
    format_sig, min_samples, run_experiment, write_rows, ExperimentConfig, ExperimentRow, Method,
    ModelTemplate,
};
use dstump::permutation::{recover_unknown_s, DEFAULT_T_ROUNDS};
use dstump::synth::{DesignDistribution, LinkKind};
use dstump::{score_all, Dataset, SplitStrategy};

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Decision-stump feature selection benchmarks"
)]
struct Cli {
    /// Worker threads (0 = one per core). Output does not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON config, writing CSV rows and a
    /// `<out>.meta.json` sidecar.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimal sample count reaching the target recovery fraction.
    MinN {
        #[arg(long)]
        method: Method,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        s: usize,
        #[arg(long, default_value = "uniform01")]
        design: DesignDistribution,
        #[arg(long, default_value_t = 0.1)]
        noise_sd: f64,
        #[arg(long, default_value_t = 0.95)]
        target: f64,
        #[arg(long, default_value_t = 25)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower end of the search bracket [default: max(s + 1, method minimum)].
        #[arg(long)]
        n_lo: Option<usize>,
        /// Upper end of the search bracket; doubled while the target is missed
        /// [default: 16 * s, at least n_lo + 1].
        #[arg(long)]
        n_hi: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        beta_min: f64,
        #[arg(long, default_value_t = 1.5)]
        beta_max: f64,
    },
    /// Score the features of a CSV file (header row; feature columns first,
    /// response last).
    Score {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        strategy: StrategyArg,
        /// Select features by a permutation threshold instead of ranking only.
        #[arg(long)]
        unknown_s: bool,
        #[arg(long, default_value_t = DEFAULT_T_ROUNDS)]
        t_rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Median,
    Optimal,
    LeftOnly,
}

impl From<StrategyArg> for SplitStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Median => SplitStrategy::Median,
            StrategyArg::Optimal => SplitStrategy::Optimal,
            StrategyArg::LeftOnly => SplitStrategy::LeftOnly,
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Run { config, out } => cmd_run(&config, &out),
        Command::MinN {
            method,
            p,
            s,
            design,
            noise_sd,
            target,
            reps,
            seed,
            n_lo,
            n_hi,
            beta_min,
            beta_max,
        } => {
            let template = ModelTemplate {
                p,
                s,
                design,
                noise_sd,
                beta_min,
                beta_max,
                link: LinkKind::Linear,
            };
            let n_lo = n_lo.unwrap_or((s + 1).max(method.min_samples()));
            let n_hi = n_hi.unwrap_or((16 * s).max(n_lo + 1));
            cmd_min_n(method, &template, target, reps, (n_lo, n_hi), seed)
        }
        Command::Score {
            data,
            strategy,
            unknown_s,
            t_rounds,
            seed,
        } => cmd_score(&data, strategy.into(), unknown_s.then_some(t_rounds), seed),
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: usize) -> Result<()> {
    Ok(())
}

fn cmd_run(config: &Path, out: &Path) -> Result<()> {
    let config = ExperimentConfig::from_json_file(config)?;
    let rows = run_experiment(&config, out)?;
    eprintln!("wrote {} rows to {}", rows.len(), out.display());
    Ok(())
}

fn cmd_min_n(
    method: Method,
    template: &ModelTemplate,
    target: f64,
    reps: usize,
    bracket: (usize, usize),
    seed: u64,
) -> Result<()> {
    let start = Instant::now();
    let result = min_samples(method, template, target, reps, bracket, seed)?;
    let row = ExperimentRow {
        method,
        p: template.p,
        s: template.s,
        n_star: result.n_star,
        achieved_fraction: format_sig(result.achieved_fraction, 6).parse()?,
        replications: reps,
        seed,
        wall_time_ms: start.elapsed().as_millis() as u64,
    };
    write_rows(io::stdout().lock(), &[row])?;
    Ok(())
}

/// Reads a numeric CSV with a header; the last column is the response.
fn read_dataset(path: &Path) -> Result<(Vec<String>, Dataset)> {
    let mut reader = csv::Reader::from_path(path).with_context(|| path.display().to_string())?;
    let header: Vec<String> = reader
        .headers()
        .with_context(|| path.display().to_string())?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.len() < 2 {
        bail!(
            "{}: need at least one feature column and a response column",
            path.display()
        );
    }
    let p = header.len() - 1;
    let mut columns = vec![Vec::new(); p];
    let mut y = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.with_context(|| path.display().to_string())?;
        for (k, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().with_context(|| {
                format!(
                    "{}: row {}, column `{}`: not a number: {field:?}",
                    path.display(),
                    line + 2,
                    header[k]
                )
            })?;
            if k < p {
                columns[k].push(v);
            } else {
                y.push(v);
            }
        }
    }
    let data = Dataset::from_columns(columns, y).with_context(|| path.display().to_string())?;
    Ok((header[..p].to_vec(), data))
}

fn cmd_score(
    path: &Path,
    strategy: SplitStrategy,
    t_rounds: Option<usize>,
    seed: u64,
) -> Result<()> {
    let (names, data) = read_dataset(path)?;
    let (scores, threshold) = match t_rounds {
        Some(t) => {
            let r = recover_unknown_s(&data, t, strategy, seed)?;
            (r.scores.clone(), Some(r))
        }
        None => (score_all(&data, strategy, seed)?, None),
    };
    let mut rank = vec![0; scores.len()];
    for (pos, &k) in scores.ranking.iter().enumerate() {
        rank[k] = pos + 1;
    }
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    let mut header = vec!["feature", "name", "impurity", "rank"];
    if threshold.is_some() {
        header.extend(["selected", "gamma"]);
    }
    w.write_record(&header)?;
    for (k, name) in names.iter().enumerate() {
        let mut record = vec![
            k.to_string(),
            name.clone(),
            scores.imp[k].to_string(),
            rank[k].to_string(),
        ];
        if let Some(r) = &threshold {
            record.push(u8::from(r.selected.binary_search(&k).is_ok()).to_string());
            record.push(r.gamma.to_string());
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    io::stdout().flush()?;
    Ok(())
}
