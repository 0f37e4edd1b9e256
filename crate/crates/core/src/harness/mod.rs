//! Problem library, comparison runs and machine-readable reports.

mod builtin;

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use builtin::{builtin_problem, builtin_problems, BUILTIN_NAMES};

use crate::eigen::{self, EigenConfig, EigenReport, EigenSolver, OuterRecord, TransportEigenProblem};
use crate::error::{Error, Result};
use crate::mge::MgeParams;
use crate::multigroup::MultigroupMethod;
use crate::operators::Transport;
use crate::oracle::{dense_dominant_eig, orient, probe_operator, DenseMatrix};
use crate::xsmodel::{read_problem, ProblemModel};

/// Largest flux length for which runs are checked against the dense oracle.
pub const ORACLE_MAX_DIM: usize = 600;

pub const CSV_HEADER: &str = "problem,solver,precond,sets,outer,krylov,k,seconds";

pub const TABLE_HEADER: &str = "problem   solver   precond    sets  outer  krylov  k               |dk oracle|  seconds";

/// Resolves a built-in name, `name.prob` for a built-in, or a problem file.
///
/// Existing files win over built-in names. The id is the file stem.
pub fn load_problem(spec: &str) -> Result<(String, ProblemModel)> {
    let path = Path::new(spec);
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or(spec)
        .to_string();
    if path.is_file() {
        return Ok((stem, read_problem(path)?));
    }
    match builtin_problem(&stem) {
        Some(m) => Ok((stem, m)),
        None => Err(Error::Input(format!(
            "no problem file or built-in problem named '{spec}' (built-ins: {})",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

/// Dense ground truth: probed `I - TMS` and `TMF` and their dominant pair.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub dimension: usize,
    pub k: f64,
    /// Unit L2 norm, nonnegative sum.
    pub flux: Vec<f64>,
    pub loss: Vec<Vec<f64>>,
    pub production: Vec<Vec<f64>>,
}

pub fn oracle_matrices(t: &Transport) -> Result<(DenseMatrix, DenseMatrix)> {
    let d = t.len();
    let loss = probe_operator(|x| t.apply_a(x, 0.0), d)?;
    let production = probe_operator(|x| t.apply_tmf(x), d)?;
    Ok((loss, production))
}

pub fn oracle(model: &ProblemModel) -> Result<OracleReport> {
    let t = Transport::new(model.clone())?;
    let (loss, production) = oracle_matrices(&t)?;
    let (k, mut flux) = dense_dominant_eig(&loss, Some(&production))?;
    orient(&mut flux);
    Ok(OracleReport {
        dimension: t.len(),
        k,
        flux,
        loss: loss.to_rows(),
        production: production.to_rows(),
    })
}

/// One solver run with its configuration echo and oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub solver: EigenSolver,
    pub config: EigenConfig,
    pub k: f64,
    pub gamma: f64,
    pub outer_iterations: usize,
    pub krylov_iterations: usize,
    pub converged: bool,
    pub history: Vec<OuterRecord>,
    pub seconds: f64,
    pub flux: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_k: Option<f64>,
    /// `|k - oracle_k|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RunReport {
    pub fn from_eigen(problem: &str, config: EigenConfig, r: EigenReport, oracle_k: Option<f64>) -> Self {
        Self {
            problem: problem.to_string(),
            solver: r.solver,
            config,
            k: r.k,
            gamma: r.gamma,
            outer_iterations: r.outer_iterations,
            krylov_iterations: r.krylov_iterations,
            converged: r.converged,
            history: r.history,
            seconds: r.seconds,
            flux: r.flux,
            oracle_k,
            oracle_delta: oracle_k.map(|ok| (r.k - ok).abs()),
            diagnostic: r.diagnostic,
        }
    }

    pub fn precond_label(&self) -> String {
        self.config.precondition.map_or_else(|| "none".to_string(), |p| p.label())
    }

    pub fn sets(&self) -> usize {
        self.config.multigroup.energy_sets
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.12},{:.6}",
            self.problem,
            self.solver.as_str(),
            self.precond_label(),
            self.sets(),
            self.outer_iterations,
            self.krylov_iterations,
            self.k,
            self.seconds
        )
    }

    pub fn table_row(&self) -> String {
        let delta = self.oracle_delta.map_or_else(|| "-".to_string(), |d| format!("{d:.3e}"));
        let mark = if self.converged { "" } else { "  (not converged)" };
        format!(
            "{:<9} {:<8} {:<10} {:>4} {:>6} {:>7}  {:<15.12} {:<11}  {:.3}{}",
            self.problem,
            self.solver.as_str(),
            self.precond_label(),
            self.sets(),
            self.outer_iterations,
            self.krylov_iterations,
            self.k,
            delta,
            self.seconds,
            mark
        )
    }
}

pub fn format_table(reports: &[RunReport]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in reports {
        let _ = writeln!(out, "{}", r.table_row());
    }
    out
}

/// Oracle `k` for problems small enough to probe.
pub fn oracle_k(t: &Transport) -> Result<Option<f64>> {
    if t.len() > ORACLE_MAX_DIM {
        return Ok(None);
    }
    let (loss, production) = oracle_matrices(t)?;
    Ok(Some(dense_dominant_eig(&loss, Some(&production))?.0))
}

/// Runs one configuration. `oracle` is computed when `None` and the
/// problem is eligible; pass `Some` to reuse a value across runs.
pub fn run_problem(id: &str, model: &ProblemModel, cfg: &EigenConfig, oracle: Option<f64>) -> Result<RunReport> {
    let problem = TransportEigenProblem::new(model.clone(), cfg)?;
    let oracle = match oracle {
        Some(k) => Some(k),
        None => oracle_k(problem.transport())?,
    };
    let r = eigen::run(&problem, cfg)?;
    Ok(RunReport::from_eigen(id, *cfg, r, oracle))
}

/// Runs several solvers on one problem with a shared base configuration.
pub fn compare(id: &str, model: &ProblemModel, base: &EigenConfig, solvers: &[EigenSolver]) -> Result<Vec<RunReport>> {
    let t = Transport::new(model.clone())?;
    let ok = oracle_k(&t)?;
    solvers
        .iter()
        .map(|&solver| run_problem(id, model, &EigenConfig { solver, ..*base }, ok))
        .collect()
}

/// The configurations run by `bench --suite builtin` for one problem.
pub fn bench_configs() -> Vec<EigenConfig> {
    let base = EigenConfig::default();
    let mut mg = base.multigroup;
    mg.method = MultigroupMethod::MgKrylov;
    let base = EigenConfig { multigroup: mg, ..base };
    vec![
        EigenConfig { solver: EigenSolver::Power, ..base },
        EigenConfig { solver: EigenSolver::Rqi, ..base },
        EigenConfig {
            solver: EigenSolver::Rqi,
            precondition: Some(MgeParams::default()),
            ..base
        },
        EigenConfig { solver: EigenSolver::Arnoldi, ..base },
    ]
}

/// Runs every built-in problem under `bench_configs`.
pub fn bench_builtin() -> Result<Vec<RunReport>> {
    let mut out = Vec::new();
    for (id, model) in builtin_problems() {
        let t = Transport::new(model.clone())?;
        let ok = oracle_k(&t)?;
        for cfg in bench_configs() {
            out.push(run_problem(id, &model, &cfg, ok)?);
        }
    }
    Ok(out)
}
