//! Command-line front end: `solve`, `sweep`, `oracle` and `qubo`.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use idp_qaoa::harness::{load_graph, sweep_csv, write_sweep, SweepAxis};
use idp_qaoa::variational::{SeedPolicy, TailWeighting};
use idp_qaoa::{
    brute_force_ids, build_qubo, run_solve, run_sweep, HarnessError, RunConfig, RunReport,
};

const EXIT_USAGE: u8 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "idp-qaoa",
    version,
    about = "Minimum independent dominating sets via simulated QAOA"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize and sample one instance, writing a JSON report.
    Solve {
        #[command(flatten)]
        run: RunArgs,
        /// Report path; a `.trace.csv` cost trace is written next to it.
        /// Without it the report is printed to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every combination of the swept values for every seed.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Parameter to vary; repeat together with `--values` for a grid.
        #[arg(long = "axis", required = true)]
        axes: Vec<SweepAxis>,
        /// Comma-separated values for the matching `--axis`.
        #[arg(long = "values", required = true)]
        values: Vec<String>,
        /// Seeds as an inclusive range `1..5` or a list `1,2,7`.
        #[arg(long, default_value = "1..5")]
        seeds: String,
        /// Output prefix for `<prefix>.csv` and `<prefix>.json`; CSV goes to stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print every independent dominating set and the minimum ones as JSON.
    Oracle {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Print the penalty QUBO as `constant`, `i c` and `i j c` lines.
    Qubo {
        #[arg(long)]
        graph: PathBuf,
        /// Defaults to three quarters of the vertex count.
        #[arg(long)]
        penalty: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Common,
    PerEvaluation,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TailArg {
    Fractional,
    Inclusive,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Edge-list file: `n m` header, then one `u v` pair per line.
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value_t = 15)]
    layers: usize,
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// Defaults to three quarters of the vertex count.
    #[arg(long)]
    penalty: Option<f64>,
    #[arg(long = "max-iters", default_value_t = 10_000)]
    max_iters: usize,
    /// 0 evaluates exact probabilities instead of sampling.
    #[arg(long, default_value_t = 10_000)]
    shots: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long = "ramp-scale", default_value_t = 0.75)]
    ramp_scale: f64,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Edge length of the initial simplex.
    #[arg(long = "initial-step", default_value_t = 0.25)]
    initial_step: f64,
    #[arg(long = "seed-policy", value_enum, default_value_t = PolicyArg::PerEvaluation)]
    seed_policy: PolicyArg,
    #[arg(long, value_enum, default_value_t = TailArg::Fractional)]
    tail: TailArg,
}

impl RunArgs {
    fn config(&self, output_path: Option<PathBuf>) -> RunConfig {
        RunConfig {
            graph_path: self.graph.clone(),
            layers: self.layers,
            alpha: self.alpha,
            penalty: self.penalty,
            max_iterations: self.max_iters,
            shots: self.shots,
            seed: self.seed,
            ramp_scale: self.ramp_scale,
            function_tolerance: self.tolerance,
            initial_step: self.initial_step,
            seed_policy: match self.seed_policy {
                PolicyArg::Common => SeedPolicy::Common,
                PolicyArg::PerEvaluation => SeedPolicy::PerEvaluation,
            },
            tail_weighting: match self.tail {
                TailArg::Fractional => TailWeighting::Fractional,
                TailArg::Inclusive => TailWeighting::Inclusive,
            },
            output_path,
        }
    }
}

enum Failure {
    Usage(String),
    Harness(HarnessError),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Harness(e)
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "invalid --seeds {text:?}: expected `a..b` or `a,b,c`"
        ))
    };
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo > hi {
            return Err(bad());
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

fn parse_values(axis: SweepAxis, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("invalid value {s:?} for axis {axis}")))
        })
        .collect()
}

fn summary(report: &RunReport) -> String {
    let top: Vec<String> = report
        .score
        .top_strings
        .iter()
        .take(4)
        .map(|r| format!("{} {:.4}", r.bits, r.probability))
        .collect();
    format!(
        "correct {:.4}  optimal {:.4}  best cost {:.4} after {} evaluations  solution {}  top [{}]",
        report.score.correct_probability,
        report.score.optimal_probability,
        report.best_cost,
        report.evaluations,
        report.solution,
        top.join(", ")
    )
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Solve { run, out } => {
            let report = run_solve(&run.config(out.clone()))?;
            eprintln!("{}", summary(&report));
            match out {
                Some(path) => eprintln!("wrote {}", path.display()),
                None => println!("{}", report.to_json()?),
            }
        }
        Command::Sweep {
            run,
            axes,
            values,
            seeds,
            out,
        } => {
            if axes.len() != values.len() {
                return Err(Failure::Usage(format!(
                    "{} --axis flags but {} --values lists",
                    axes.len(),
                    values.len()
                )));
            }
            let grid = axes
                .iter()
                .zip(&values)
                .map(|(&axis, text)| parse_values(axis, text).map(|v| (axis, v)))
                .collect::<Result<Vec<_>, _>>()?;
            let seeds = parse_seeds(&seeds)?;
            let graph = load_graph(&run.graph)?;
            let rows = run_sweep(&graph, &run.config(None), &grid, &seeds);
            let failed = rows.iter().filter(|r| r.error.is_some()).count();
            match out {
                Some(prefix) => {
                    let (csv, json) = write_sweep(&rows, &prefix)?;
                    eprintln!("wrote {} and {}", csv.display(), json.display());
                }
                None => print!("{}", sweep_csv(&rows)?),
            }
            if failed > 0 {
                eprintln!(
                    "{failed} of {} cells failed; see the error column",
                    rows.len()
                );
            }
        }
        Command::Oracle { graph } => {
            let catalog = brute_force_ids(&load_graph(&graph)?).map_err(HarnessError::from)?;
            let text = serde_json::to_string_pretty(&catalog)
                .map_err(|e| HarnessError::Serialize(e.to_string()))?;
            println!("{text}");
        }
        Command::Qubo { graph, penalty } => {
            let g = load_graph(&graph)?;
            let p = penalty.unwrap_or_else(|| idp_qaoa::qubo::default_penalty(g.vertex_count()));
            let model = build_qubo(&g, p).map_err(HarnessError::from)?;
            print!("{}", model.to_export_text());
        }
    }
    Ok(())
}

fn exit_code(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(EXIT_USAGE))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            exit_code(e.exit_code())
        }
    }
}
