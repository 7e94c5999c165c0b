//! Command-line front end: instance generation, solving, tuning,
//! benchmarking and best-known bookkeeping.

pub mod bench;
pub mod error;
pub mod files;
pub mod tune;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use log::info;

use bbqp_core::engine::{self, is_k_row, validate_config, CmcsConfig, RunParams, Termination};
use bbqp_core::generator::{self, Preset};
use bbqp_core::tuner::BestKnownRegistry;
use bbqp_core::{BbqpInstance, ComponentKind, Family};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "bbqp", version, about = "Bipartite Boolean Quadratic Programming solver")]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one instance, or a whole benchmark preset.
    Generate(GenerateArgs),
    /// Run a CMCS configuration on an instance.
    Solve(SolveArgs),
    /// Configure CMCS on a training set.
    Tune(TuneArgs),
    /// Run configurations on instances and report gaps to the best known.
    Bench(BenchArgs),
    /// Check a configuration file.
    ValidateConfig(ValidateArgs),
    /// Inspect or edit the best-known registry.
    BestKnown {
        #[command(subcommand)]
        action: BestKnownAction,
    },
}

#[derive(Debug, clap::Args)]
pub struct GenerateArgs {
    #[arg(long, required_unless_present = "preset")]
    pub family: Option<Family>,
    #[arg(long, required_unless_present = "preset")]
    pub m: Option<usize>,
    #[arg(long, required_unless_present = "preset")]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file for a single instance.
    #[arg(long, required_unless_present = "preset")]
    pub out: Option<PathBuf>,
    /// `medium`, `large` or `training`.
    #[arg(long, conflicts_with_all = ["family", "m", "n", "out"], requires = "out_dir")]
    pub preset: Option<Preset>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Configuration file, or `mchh`, `reduced`, `two_row`.
    #[arg(long, default_value = "two_row")]
    pub config: String,
    #[arg(long, default_value_t = 1000)]
    pub budget_ms: u64,
    /// Stop after this many component applications instead.
    #[arg(long)]
    pub iterations: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the solution here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub no_polish: bool,
}

#[derive(Debug, clap::Args)]
pub struct TuneArgs {
    #[arg(long, value_enum, default_value = "krow")]
    pub schema: tune::Schema,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Directory of training instances.
    #[arg(long)]
    pub train: PathBuf,
    /// Per-run budget.
    #[arg(long, default_value_t = 100)]
    pub budget_ms: u64,
    #[arg(long, default_value_t = 10)]
    pub repeats: usize,
    /// Defaults to `best_known.tsv` in the training directory.
    #[arg(long)]
    pub registry: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// CSV log of generation, best gap, mean gap. Defaults to `<out>.csv`.
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Comma-separated component names; all nine by default.
    #[arg(long, value_delimiter = ',')]
    pub pool: Vec<ComponentKind>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub generations: Option<usize>,
    /// Cap on distinct configurations evaluated.
    #[arg(long)]
    pub max_candidates: Option<usize>,
    /// Brute force: candidates re-evaluated at the end.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    /// Repeat multiplier of the final re-evaluation.
    #[arg(long, default_value_t = 10)]
    pub reeval: usize,
    /// Stop evaluating a candidate once it is clearly worse than the best so far.
    #[arg(long)]
    pub capping: bool,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// Instance files or directories.
    #[arg(long, required = true, num_args = 1..)]
    pub instances: Vec<PathBuf>,
    /// Configuration files or shipped names.
    #[arg(long = "config", required = true, num_args = 1..)]
    pub configs: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub budget_ms: u64,
    /// `N=MS`: instances with a dimension of at least N get MS milliseconds.
    #[arg(long = "size-budget", value_parser = bench::parse_size_budget)]
    pub size_budgets: Vec<(usize, u64)>,
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Runs per instance and configuration.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub registry: Option<PathBuf>,
    /// CSV destination; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub no_polish: bool,
}

#[derive(Debug, clap::Args)]
pub struct ValidateArgs {
    pub path: PathBuf,
    /// Also require at most K non-zeros per row.
    #[arg(long)]
    pub k: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum BestKnownAction {
    Show {
        #[arg(long)]
        registry: PathBuf,
    },
    Update {
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long)]
        value: f64,
    },
}

/// Runs a parsed command, writing user-facing output to `out`.
pub fn execute(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::Solve(a) => solve(a, out),
        Command::Tune(a) => run_tune(a, out),
        Command::Bench(a) => run_bench(a, out),
        Command::ValidateConfig(a) => validate(a, out),
        Command::BestKnown { action } => best_known(action, out),
    }
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CliResult<()> {
    if let Some(preset) = a.preset {
        let dir = a.out_dir.expect("clap requires --out-dir with --preset");
        for (family, m, n, seed) in preset.entries(a.seed) {
            let inst = generator::generate(family, m, n, seed)?;
            let path = dir.join(format!("{}.{}", inst.default_id(), files::INSTANCE_EXTENSION));
            files::write_file(&path, &inst.to_text())?;
            writeln!(out, "{}", path.display())?;
        }
        return Ok(());
    }
    let (Some(family), Some(m), Some(n), Some(path)) = (a.family, a.m, a.n, a.out) else {
        return Err(CliError::invalid("--family, --m, --n and --out are required"));
    };
    let inst = generator::generate(family, m, n, a.seed)?;
    files::write_file(&path, &inst.to_text())?;
    writeln!(out, "{}", path.display())?;
    Ok(())
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> CliResult<()> {
    let instance = BbqpInstance::load(&a.instance)?;
    let config = files::load_config(&a.config)?;
    let termination = match a.iterations {
        Some(n) => Termination::Iterations(n),
        None => Termination::millis(a.budget_ms),
    };
    let mut params = RunParams::new(termination, a.seed);
    params.polish = !a.no_polish;
    let result = engine::run(&config, &instance, &params)?;
    info!("search took {:?}", result.search_time);
    if let Some(path) = &a.out {
        files::write_file(path, &files::solution_text(&result.best))?;
    }
    writeln!(
        out,
        "objective {} (initial {}, before polish {}) after {} iterations",
        result.best_objective, result.initial_objective, result.search_objective, result.iterations
    )?;
    writeln!(out, "component,executions,successes")?;
    for (k, kind) in result.components.iter().enumerate() {
        writeln!(
            out,
            "{kind},{},{}",
            result.component_executions[k], result.component_successes[k]
        )?;
    }
    Ok(())
}

fn run_tune(a: TuneArgs, out: &mut dyn Write) -> CliResult<()> {
    let instances = files::load_instances(std::slice::from_ref(&a.train))?;
    let registry_path = a.registry.clone().unwrap_or_else(|| files::default_registry(&a.train));
    let mut registry = BestKnownRegistry::open(registry_path)?;
    let options = tune::TuneOptions {
        schema: a.schema,
        k: a.k,
        budget_ms: a.budget_ms,
        repeats: a.repeats,
        pool: if a.pool.is_empty() {
            ComponentKind::ALL.to_vec()
        } else {
            a.pool.clone()
        },
        seed: a.seed,
        jobs: a.jobs,
        population: a.population,
        generations: a.generations,
        max_candidates: a.max_candidates,
        top: a.top,
        reeval: a.reeval,
        capping: a.capping,
    };
    let problem = tune::training_problem(instances, &mut registry, &options)?;
    let outcome = tune::tune(&problem, &options)?;
    outcome.config.save(&a.out)?;
    let log_path = a.log.unwrap_or_else(|| a.out.with_extension("csv"));
    files::write_file(&log_path, &outcome.log_csv())?;
    writeln!(
        out,
        "{}: gap {:.4}% after {} evaluations, written to {}",
        outcome.config.name,
        outcome.gap,
        outcome.evaluations,
        a.out.display()
    )?;
    Ok(())
}

fn run_bench(a: BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let instances = files::load_instances(&a.instances)?;
    let configs: Vec<CmcsConfig> = a.configs.iter().map(|c| files::load_config(c)).collect::<CliResult<_>>()?;
    let mut registry = bench::registry_for(a.registry, &a.instances)?;
    let options = bench::BenchOptions {
        budget_ms: a.budget_ms,
        size_budgets: a.size_budgets,
        iterations: a.iterations,
        seeds: a.seeds,
        seed: a.seed,
        jobs: a.jobs,
        polish: !a.no_polish,
    };
    let report = bench::bench(&instances, &configs, &options, &mut registry)?;
    let csv = report.to_csv();
    match &a.out {
        Some(path) => files::write_file(path, &csv)?,
        None => out.write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn validate(a: ValidateArgs, out: &mut dyn Write) -> CliResult<()> {
    let config = CmcsConfig::load(&a.path)?;
    let violations = validate_config(&config);
    if !violations.is_empty() {
        return Err(bbqp_core::BbqpError::Config(violations).into());
    }
    if let Some(k) = a.k {
        if !is_k_row(&config, k) {
            return Err(CliError::invalid(format!("{} is not {k}-row", config.name)));
        }
    }
    writeln!(out, "{}: valid ({} components)", config.name, config.len())?;
    Ok(())
}

fn best_known(action: BestKnownAction, out: &mut dyn Write) -> CliResult<()> {
    match action {
        BestKnownAction::Show { registry } => {
            let r = BestKnownRegistry::open(registry)?;
            for (id, v) in r.iter() {
                writeln!(out, "{id}\t{v}")?;
            }
        }
        BestKnownAction::Update { registry, id, value } => {
            let mut r = BestKnownRegistry::open(registry)?;
            let improved = r.update(&id, value)?;
            writeln!(out, "{}", if improved { "updated" } else { "unchanged" })?;
        }
    }
    Ok(())
}
