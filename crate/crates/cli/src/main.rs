use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use bailab_cli::commands;
use bailab_cli::config::{build_instance, parse_rule, RunConfig};
use bailab_cli::CliError;
use bailab_core::allocate::AllocationRule;
use bailab_core::dp::Objective;
use bailab_core::model::Instance;

/// Environment variable naming the directory relative output paths are
/// resolved against.
const OUT_DIR_ENV: &str = "BAILAB_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "bailab",
    version,
    about = "Fixed-budget best-arm identification laboratory: batched Beta-Bernoulli \
             experiments, large-deviations rate reports, and exact dynamic programming",
    after_help = "Exit codes: 0 success, 2 configuration error, 1 runtime error.\n\
                  Relative output paths are resolved against $BAILAB_OUT_DIR when set."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Instance selection shared by several subcommands: an explicit mean
/// vector, or one member of the hard instance family.
#[derive(Args, Clone)]
struct InstanceSel {
    /// True success probabilities, comma-separated (e.g. 0.9,0.6)
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    theta: Option<Vec<f64>>,
    /// Arm count of the hard-family instance (used with --cl-index)
    #[arg(long)]
    cl_k: Option<usize>,
    /// Hard-family instance label in 1..=k (instance d flips arm d to be best)
    #[arg(long)]
    cl_index: Option<usize>,
}

impl InstanceSel {
    fn build(&self) -> Result<Instance, CliError> {
        build_instance(&self.theta, self.cl_k, self.cl_index)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit one instance of the hard family as JSON
    Instance {
        /// Number of arms (k >= 2)
        #[arg(long)]
        k: usize,
        /// Instance label in 1..=k
        #[arg(long)]
        index: usize,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve the optimal-allocation rate program for an instance
    Gamma {
        #[command(flatten)]
        sel: InstanceSel,
        /// Residual tolerance of the solver
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Complexity, Pinsker bound, and rate-cap diagnostics at a budget
    Bounds {
        #[command(flatten)]
        sel: InstanceSel,
        /// Budget in waves (T >= 1)
        #[arg(long)]
        waves: u64,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run replicated adaptive experiments over a horizon grid
    Simulate {
        /// Flat key=value config file; flags override file values
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        sel: InstanceSel,
        /// Allocation rule: exploration, thompson, or uniform
        #[arg(long, value_parser = parse_rule)]
        rule: Option<AllocationRule>,
        /// Subjects per wave (N)
        #[arg(long)]
        wave_size: Option<u64>,
        /// Horizon grid, comma-separated wave counts (e.g. 40,60,80,100)
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        t_grid: Option<Vec<u32>>,
        /// Replications per horizon
        #[arg(long)]
        reps: Option<u64>,
        /// Master seed (default 0)
        #[arg(long)]
        seed: Option<u64>,
        /// Posterior draws per wave for the probability-of-best estimate
        #[arg(long)]
        draws: Option<u32>,
        /// Prior alpha, one value or k comma-separated values (default 1)
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        prior_alpha: Option<Vec<f64>>,
        /// Prior beta, one value or k comma-separated values (default 1)
        #[arg(long, value_delimiter = ',', num_args = 1..)]
        prior_beta: Option<Vec<f64>>,
        /// Worker threads (0 = all cores); never affects the output bytes
        #[arg(long)]
        workers: Option<usize>,
        /// Write the CSV here (default: stdout)
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Write the JSON summary here (omitted from stdout by default)
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Solve the exact design problem by backward induction (tiny scale)
    Dp {
        /// Number of arms
        #[arg(long)]
        k: usize,
        /// Subjects per wave (N)
        #[arg(long, default_value_t = 1)]
        wave_size: u64,
        /// Number of waves (T)
        #[arg(long)]
        waves: u32,
        /// Objective: welfare or bayes-regret
        #[arg(long, default_value = "welfare", value_parser = parse_objective)]
        objective: Objective,
        /// Prior alpha, one value or k comma-separated values
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [1.0])]
        prior_alpha: Vec<f64>,
        /// Prior beta, one value or k comma-separated values
        #[arg(long, value_delimiter = ',', num_args = 1.., default_values_t = [1.0])]
        prior_beta: Vec<f64>,
        /// Write the full policy table as CSV here
        #[arg(long)]
        policy_csv: Option<PathBuf>,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Join a simulate CSV with the rate predictions for its instance
    Report {
        /// CSV produced by `simulate`
        #[arg(long)]
        csv: PathBuf,
        #[command(flatten)]
        sel: InstanceSel,
        /// Write JSON here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_objective(s: &str) -> Result<Objective, String> {
    match s {
        "welfare" => Ok(Objective::Welfare),
        "bayes-regret" | "bayes_regret" => Ok(Objective::BayesRegret),
        _ => Err(format!(
            "unknown objective `{s}` (expected welfare or bayes-regret)"
        )),
    }
}

fn resolve_out(path: &Path) -> PathBuf {
    if path.is_absolute() {
        return path.to_path_buf();
    }
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let path = resolve_out(path);
            std::fs::write(&path, content)
                .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Instance { k, index, out } => emit(&out, &commands::instance_json(k, index)?),
        Command::Gamma { sel, tol, out } => {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(CliError::Config(format!(
                    "--tol must be a positive finite number, got {tol}"
                )));
            }
            let instance = sel.build()?;
            emit(&out, &commands::gamma_json(&instance, tol))
        }
        Command::Bounds { sel, waves, out } => {
            let instance = sel.build()?;
            emit(&out, &commands::bounds_json(&instance, waves)?)
        }
        Command::Simulate {
            config,
            sel,
            rule,
            wave_size,
            t_grid,
            reps,
            seed,
            draws,
            prior_alpha,
            prior_beta,
            workers,
            out_csv,
            out_json,
        } => {
            let base = match config {
                Some(path) => RunConfig::from_file(&path)?,
                None => RunConfig::default(),
            };
            let flags = RunConfig {
                theta: sel.theta,
                cl_k: sel.cl_k,
                cl_index: sel.cl_index,
                rule,
                wave_size,
                t_grid,
                reps,
                seed,
                posterior_draws: draws,
                prior_alpha,
                prior_beta,
                workers,
                out_csv,
                out_json,
            };
            let run = base.overridden_by(flags).resolve()?;
            let output = commands::simulate(&run)?;
            match &run.out_csv {
                Some(path) => emit(&Some(path.clone()), &output.csv)?,
                None => print!("{}", output.csv),
            }
            if let Some(path) = &run.out_json {
                emit(&Some(path.clone()), &output.json)?;
            }
            Ok(())
        }
        Command::Dp {
            k,
            wave_size,
            waves,
            objective,
            prior_alpha,
            prior_beta,
            policy_csv,
            out,
        } => {
            let output = commands::dp_run(k, wave_size, waves, prior_alpha, prior_beta, objective)?;
            emit(&out, &output.json)?;
            if let Some(path) = policy_csv {
                emit(&Some(path), &output.policy_csv)?;
            }
            Ok(())
        }
        Command::Report { csv, sel, out } => {
            let instance = sel.build()?;
            let content = std::fs::read_to_string(&csv)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", csv.display())))?;
            emit(&out, &commands::report(&content, &instance)?)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
