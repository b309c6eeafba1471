//! `evolve`: run scaling experiments, measure densities, analyze result
//! tables, and compute self-consistent tree length distributions.

mod analyze;
mod config;
mod csvio;
mod runner;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::ExperimentConfig;
use gpscale::engine::EvolutionParams;
use gpscale::tree::{
    self_consistent_distribution, ParitySystem, SelfConsistOptions, TreeStatementSet,
};
use gpscale::Error as CoreError;

/// Exit codes: 0 success, 2 validation error, 3 insufficient data.
const EXIT_VALIDATION: u8 = 2;
const EXIT_INSUFFICIENT: u8 = 3;

#[derive(Parser)]
#[command(name = "evolve", about = "Evolution-scaling experiment driver", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonRunArgs {
    /// Experiment config (TOML).
    config: PathBuf,
    /// Worker threads (default: all cores). Results are identical at any
    /// setting.
    #[arg(long)]
    jobs: Option<usize>,
    /// Override a config key, e.g. --set engine.population_size=40 or
    /// --set params.p=[50,100].
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output path (defaults to the config's `output`, or the config path
    /// with a .csv extension).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write data to standard output instead of a file (progress goes to
    /// standard error either way).
    #[arg(long)]
    stdout: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run evolutions and densities for every parameter point; append rows
    /// to the output CSV, skipping points it already contains.
    Run(CommonRunArgs),
    /// Densities only: like `run` with zero evolutions.
    Density(CommonRunArgs),
    /// Recompute K and K' columns of an existing CSV and fit delta.
    Analyze {
        csv: PathBuf,
        /// Delta for the K' column.
        #[arg(long, default_value_t = 0.6)]
        kprime_delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate a parity-tree config to a self-consistent length
    /// distribution and write it as TOML.
    Selfconsist {
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Evolutions per iteration.
        #[arg(long, default_value_t = 50)]
        evolutions: usize,
        #[arg(long, default_value_t = 10)]
        max_iterations: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => with_pool(args.jobs, || run_command(&args, false)),
        Command::Density(args) => with_pool(args.jobs, || run_command(&args, true)),
        Command::Analyze { csv, kprime_delta, out } => analyze::analyze(&csv, kprime_delta, out.as_deref()),
        Command::Selfconsist { config, jobs, overrides, out, evolutions, max_iterations } => {
            with_pool(jobs, || selfconsist_command(&config, &overrides, out.as_deref(), evolutions, max_iterations))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}

fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            return match core {
                CoreError::InsufficientData(_) | CoreError::ZeroDensity { .. } => EXIT_INSUFFICIENT,
                CoreError::InvalidArgument(_) | CoreError::Parse(_) => EXIT_VALIDATION,
            };
        }
        if cause.downcast_ref::<ValidationError>().is_some() {
            return EXIT_VALIDATION;
        }
    }
    1
}

/// Marker wrapped around configuration problems so they map to exit
/// code 2.
#[derive(Debug)]
struct ValidationError(String);

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ValidationError {}

fn validation(err: anyhow::Error) -> anyhow::Error {
    anyhow::Error::new(ValidationError(format!("{err:#}")))
}

fn with_pool(jobs: Option<usize>, f: impl FnOnce() -> Result<()> + Send) -> Result<()> {
    match jobs {
        None => f(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .context("building worker pool")?;
            pool.install(f)
        }
    }
}

fn load_config(path: &Path, overrides: &[String]) -> Result<(ExperimentConfig, String)> {
    let raw = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(validation)?;
    let text = config::apply_overrides(&raw, overrides).map_err(validation)?;
    let config = ExperimentConfig::from_toml(&text).map_err(validation)?;
    config.validate().map_err(validation)?;
    // Hash the canonical serialized form so equivalent configs match.
    let canonical = config.to_toml().map_err(validation)?;
    Ok((config, csvio::config_hash(&canonical)))
}

fn run_command(args: &CommonRunArgs, density_only: bool) -> Result<()> {
    let (config, hash) = load_config(&args.config, &args.overrides)?;
    let n_evolutions = if density_only { 0 } else { config.n_evolutions };
    if !density_only && n_evolutions == 0 {
        return Err(validation(anyhow!("n_evolutions must be >= 1 for `run`")));
    }
    let points = config.points();
    eprintln!(
        "{}: {} parameter point(s), {} evolution(s) each, master seed {}",
        config.system.name(),
        points.len(),
        n_evolutions,
        config.master_seed
    );

    let out_path = args
        .out
        .clone()
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| args.config.with_extension("csv"));

    // Resume: skip parameter points already present in the output file.
    let mut existing_rows = Vec::new();
    if !args.stdout && out_path.exists() {
        let text = std::fs::read_to_string(&out_path)
            .with_context(|| format!("reading {}", out_path.display()))?;
        let (old_hash, rows) = csvio::parse_csv(&text)?;
        if old_hash.as_deref() != Some(hash.as_str()) {
            return Err(validation(anyhow!(
                "{} was produced by a different config (hash {} vs {}); move it aside or change the output path",
                out_path.display(),
                old_hash.unwrap_or_else(|| "none".into()),
                hash
            )));
        }
        existing_rows = rows;
        if !existing_rows.is_empty() {
            eprintln!("resuming: {} point(s) already in {}", existing_rows.len(), out_path.display());
        }
    }

    let mut done_keys: Vec<String> = existing_rows.iter().map(row_key).collect();
    let mut all_rows = existing_rows;

    for (index, point) in points.iter().enumerate() {
        let outcome = runner::run_point(&config, point, index, n_evolutions)?;
        let key = row_key(&outcome.row);
        if done_keys.contains(&key) {
            eprintln!("point {}/{}: already done, skipped", index + 1, points.len());
            continue;
        }
        eprintln!(
            "point {}/{}: {} median_G={} D={} failures={} ({:.1}s)",
            index + 1,
            points.len(),
            key,
            outcome.row.median_g.map(csvio::fmt_sig6).unwrap_or_else(|| "-".into()),
            outcome.row.density.map(csvio::fmt_sig6).unwrap_or_else(|| "-".into()),
            outcome.failures,
            outcome.elapsed_secs,
        );
        done_keys.push(key);
        all_rows.push(outcome.row);
        if !args.stdout {
            // Rewrite the whole file each point: cheap at this scale and
            // keeps it parseable after an interrupt.
            write_atomic(&out_path, &csvio::emit_csv(&all_rows, Some(&hash)))?;
        }
    }
    if args.stdout {
        print!("{}", csvio::emit_csv(&all_rows, Some(&hash)));
    } else {
        eprintln!("wrote {}", out_path.display());
    }
    Ok(())
}

fn row_key(row: &gpscale::analysis::ScalingRow) -> String {
    let p = &row.params;
    format!(
        "{} set={:?} v={:?} len={:?} bits={:?} n={:?} p={:?} b={:?} t={:?}",
        row.system, p.statement_set, p.v, p.program_length, p.n_bits, p.n, p.p, p.b,
        p.termination.map(csvio::fmt_sig6)
    )
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
    }
    std::fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

fn selfconsist_command(
    config_path: &Path,
    overrides: &[String],
    out: Option<&Path>,
    evolutions: usize,
    max_iterations: usize,
) -> Result<()> {
    let (config, _) = load_config(config_path, overrides)?;
    if config.system != config::SystemKind::ParityTree {
        return Err(validation(anyhow!(
            "selfconsist applies to the parity_tree system, config says {}",
            config.system.name()
        )));
    }
    let points = config.points();
    if points.len() != 1 {
        return Err(validation(anyhow!(
            "selfconsist needs a single parameter point, config has {}",
            points.len()
        )));
    }
    let point = &points[0];
    let params: EvolutionParams = config.engine_params(point)?;
    let set = TreeStatementSet::from_index(point.statement_set.unwrap_or(1))?;
    let mut system = ParitySystem::new(set, point.n_bits.unwrap() as usize);
    if config.params.subroutines.unwrap_or(false) {
        system = system.with_subroutines();
        system.length_distribution =
            gpscale::tree::LengthDistribution::seed_default_with_subroutines();
    }
    let opts = SelfConsistOptions {
        evolutions_per_iteration: evolutions,
        max_iterations,
        ..Default::default()
    };
    let result = self_consistent_distribution(&system, &params, &opts, config.master_seed)?;
    eprintln!(
        "converged to TV {} after {} iteration(s); trace {:?}",
        csvio::fmt_sig6(result.achieved_tv),
        result.iterations,
        result.tv_trace.iter().map(|t| csvio::fmt_sig6(*t)).collect::<Vec<_>>()
    );
    let text = toml::to_string_pretty(&result.distribution)?;
    match out {
        Some(path) => {
            std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}
