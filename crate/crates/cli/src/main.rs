//! `snkit`: solve, compare and benchmark transport eigenvalue problems.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use snkit_core::harness::{self, RunReport, CSV_HEADER};
use snkit_core::mge::GridDepth;
use snkit_core::{
    validate_model, EigenConfig, EigenSolver, Error, MgeParams, MultigroupMethod, Partitioning, ProblemModel,
};

/// Quadrature order used inside the preconditioner with `--mge-quad coarse`.
const COARSE_QUADRATURE: usize = 2;

#[derive(Parser, Debug)]
#[command(name = "snkit", version, about = "Multigroup discrete-ordinates k-eigenvalue solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one problem and write a JSON report.
    Solve {
        /// Problem file, or the name of a built-in problem.
        problem: String,
        #[arg(long, default_value = "power")]
        solver: EigenSolver,
        #[command(flatten)]
        opts: SolverArgs,
        /// JSON report path [default: <problem>.<solver>.json].
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run several solvers on one problem and print one table.
    Compare {
        problem: String,
        /// Comma-separated solver list.
        #[arg(long, value_delimiter = ',', default_value = "power,rqi,arnoldi")]
        solvers: Vec<EigenSolver>,
        #[command(flatten)]
        opts: SolverArgs,
        /// Write all run reports as a JSON array.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Probe the operators densely and print the matrices and dominant pair as JSON.
    Oracle { problem: String },
    /// Run a problem suite and print CSV rows.
    Bench {
        #[arg(long, default_value = "builtin")]
        suite: Suite,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Suite {
    Builtin,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MgeQuad {
    Coarse,
    Same,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Multigroup solver: gs or krylov.
    #[arg(long, default_value = "krylov")]
    mg: MultigroupMethod,
    #[arg(long, value_enum, default_value = "full")]
    partition: PartitionArg,
    /// Energy sets for the block Krylov solver.
    #[arg(long, default_value_t = 1)]
    sets: usize,
    /// Apply the multigrid-in-energy preconditioner.
    #[arg(long)]
    precond: bool,
    #[arg(long, default_value_t = 1.2)]
    mge_w: f64,
    #[arg(long, default_value_t = 2)]
    mge_r: usize,
    #[arg(long, default_value_t = 1)]
    mge_v: usize,
    /// Grid depth, or `auto` for the full halving chain.
    #[arg(long, default_value = "auto")]
    mge_depth: GridDepth,
    #[arg(long, value_enum, default_value = "same")]
    mge_quad: MgeQuad,
    /// GMRES restart length.
    #[arg(long, default_value_t = 50)]
    restart: usize,
    #[arg(long, default_value_t = 1e-6)]
    ktol: f64,
    #[arg(long, default_value_t = 1e-5)]
    fluxtol: f64,
    /// Outer iteration limit.
    #[arg(long, default_value_t = EigenConfig::default().max_outer_iterations)]
    max_outer: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PartitionArg {
    Full,
    Upscatter,
}

impl SolverArgs {
    fn config(&self, solver: EigenSolver) -> anyhow::Result<EigenConfig> {
        if self.sets == 0 {
            bail!("--sets must be at least 1");
        }
        let mut cfg = EigenConfig {
            solver,
            k_tolerance: self.ktol,
            flux_tolerance: self.fluxtol,
            max_outer_iterations: self.max_outer,
            ..EigenConfig::default()
        };
        cfg.multigroup.method = self.mg;
        cfg.multigroup.partitioning = match self.partition {
            PartitionArg::Full => Partitioning::Full,
            PartitionArg::Upscatter => Partitioning::Upscatter,
        };
        cfg.multigroup.energy_sets = self.sets;
        cfg.multigroup.krylov.restart = self.restart;
        if self.precond {
            cfg.precondition = Some(MgeParams {
                weight: self.mge_w,
                relaxations: self.mge_r,
                v_cycles: self.mge_v,
                depth: self.mge_depth,
                coarse_quadrature: match self.mge_quad {
                    MgeQuad::Coarse => Some(COARSE_QUADRATURE),
                    MgeQuad::Same => None,
                },
            });
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn status(reports: &[RunReport]) -> ExitCode {
    if reports.iter().all(|r| r.converged) {
        ExitCode::SUCCESS
    } else {
        for r in reports.iter().filter(|r| !r.converged) {
            let why = r.diagnostic.as_deref().unwrap_or("iteration limit reached");
            eprintln!("{} / {}: not converged ({why})", r.problem, r.solver.as_str());
        }
        ExitCode::from(2)
    }
}

/// Resolves the problem and reports its soft diagnostics once.
fn load(problem: &str) -> anyhow::Result<(String, ProblemModel)> {
    let (id, model) = harness::load_problem(problem)?;
    for d in validate_model(&model) {
        log::warn!("{id}: {}", d.message);
    }
    Ok((id, model))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Solve {
            problem,
            solver,
            opts,
            report,
        } => {
            let cfg = opts.config(solver)?;
            let (id, model) = load(&problem)?;
            let r = harness::run_problem(&id, &model, &cfg, None)?;
            print!("{}", harness::format_table(std::slice::from_ref(&r)));
            let path = report.unwrap_or_else(|| PathBuf::from(format!("{id}.{}.json", solver.as_str())));
            fs::write(&path, serde_json::to_string_pretty(&r)?)
                .with_context(|| format!("writing report {}", path.display()))?;
            eprintln!("report written to {}", path.display());
            Ok(status(std::slice::from_ref(&r)))
        }
        Command::Compare {
            problem,
            solvers,
            opts,
            report,
        } => {
            let cfg = opts.config(EigenSolver::Power)?;
            let (id, model) = load(&problem)?;
            let reports = harness::compare(&id, &model, &cfg, &solvers)?;
            print!("{}", harness::format_table(&reports));
            if let Some(path) = report {
                fs::write(&path, serde_json::to_string_pretty(&reports)?)
                    .with_context(|| format!("writing report {}", path.display()))?;
            }
            Ok(status(&reports))
        }
        Command::Oracle { problem } => {
            let (_, model) = load(&problem)?;
            let o = harness::oracle(&model)?;
            println!("{}", serde_json::to_string_pretty(&o)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { suite: Suite::Builtin } => {
            let reports = harness::bench_builtin()?;
            println!("{CSV_HEADER}");
            for r in &reports {
                println!("{}", r.csv_row());
            }
            Ok(status(&reports))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            // Numerical breakdowns are solver failures, not bad input.
            match e.downcast_ref::<Error>() {
                Some(Error::Singular(_) | Error::ComplexDominance(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
