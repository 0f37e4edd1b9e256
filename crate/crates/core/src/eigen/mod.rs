//! k-eigenvalue solvers: power iteration, Rayleigh quotient iteration, and
//! energy-dependent Arnoldi (plus an energy-independent variant).

mod arnoldi;
mod power;
mod rqi;

pub use arnoldi::{dominant_ritz, solve_arnoldi, solve_arnoldi_energy_independent};
pub use power::solve_power;
pub use rqi::solve_rqi;

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::mge::{MgeParams, MgePreconditioner};
use crate::multigroup::{self, krylov_block, EnergySetLayout, MultigroupConfig, MultigroupMethod};
use crate::operators::{norm2, Transport};
use crate::oracle::{dense_solve, DenseMatrix};
use crate::xsmodel::ProblemModel;

/// Largest shift, `1 / k_min` with `k_min = 1e-3`.
pub const MAX_SHIFT: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSolver {
    Power,
    Rqi,
    Arnoldi,
}

impl EigenSolver {
    pub fn as_str(self) -> &'static str {
        match self {
            EigenSolver::Power => "power",
            EigenSolver::Rqi => "rqi",
            EigenSolver::Arnoldi => "arnoldi",
        }
    }
}

impl std::str::FromStr for EigenSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" | "pi" => Ok(Self::Power),
            "rqi" => Ok(Self::Rqi),
            "arnoldi" => Ok(Self::Arnoldi),
            other => Err(config(format!("unknown solver '{other}' (expected power, rqi, or arnoldi)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenConfig {
    pub solver: EigenSolver,
    pub k_tolerance: f64,
    pub flux_tolerance: f64,
    /// Power iteration only: fission-source change relative to the new source.
    pub fission_l2_tolerance: f64,
    pub fission_inf_tolerance: f64,
    pub max_outer_iterations: usize,
    pub initial_shift: f64,
    pub arnoldi_subspace: usize,
    /// Arnoldi on the spatial fission source instead of the full flux.
    pub arnoldi_energy_independent: bool,
    pub multigroup: MultigroupConfig,
    pub precondition: Option<MgeParams>,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            solver: EigenSolver::Power,
            k_tolerance: 1e-6,
            flux_tolerance: 1e-5,
            fission_l2_tolerance: 1.0,
            fission_inf_tolerance: 0.01,
            max_outer_iterations: 500,
            initial_shift: 1.0,
            arnoldi_subspace: 50,
            arnoldi_energy_independent: false,
            multigroup: MultigroupConfig::default(),
            precondition: None,
        }
    }
}

impl EigenConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("k_tolerance", self.k_tolerance),
            ("flux_tolerance", self.flux_tolerance),
            ("fission_l2_tolerance", self.fission_l2_tolerance),
            ("fission_inf_tolerance", self.fission_inf_tolerance),
            ("krylov tolerance", self.multigroup.krylov.tolerance),
            ("gs_tolerance", self.multigroup.gs_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.initial_shift >= 0.0 && self.initial_shift.is_finite()) {
            return Err(config(format!("initial_shift must be nonnegative, got {}", self.initial_shift)));
        }
        if self.arnoldi_subspace == 0 || self.max_outer_iterations == 0 || self.multigroup.krylov.restart == 0 {
            return Err(config("subspace size, restart length, and outer iteration cap must be at least 1"));
        }
        if let Some(p) = &self.precondition {
            p.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterRecord {
    pub k: f64,
    /// Relative L2 change of the normalized flux (Ritz residual for Arnoldi).
    pub flux_delta: f64,
    pub krylov_iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    pub solver: EigenSolver,
    pub k: f64,
    pub gamma: f64,
    /// Unit L2 norm, entries summing to a nonnegative value.
    pub flux: Vec<f64>,
    pub converged: bool,
    /// Outer iterations; for Arnoldi, operator applications.
    pub outer_iterations: usize,
    pub krylov_iterations: usize,
    pub history: Vec<OuterRecord>,
    pub seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct InnerSolve {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub residual: f64,
}

/// The generalized pair `(loss, production)` behind the eigenproblem
/// `loss x = (1/k) production x`, plus the inner solver.
pub trait EigenOperators {
    fn dim(&self) -> usize;
    /// `(I - TMS) x`.
    fn apply_loss(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// `TMF x`.
    fn apply_production(&self, x: &[f64]) -> Result<Vec<f64>>;
    /// Quantity whose norm drives the power-iteration `k` update (`f^T x` per cell).
    fn fission_source(&self, x: &[f64]) -> Vec<f64>;
    /// Solves `(loss - shift * production) y = production(src)`.
    fn solve(&self, src: &[f64], shift: f64, x0: Option<&[f64]>) -> Result<InnerSolve>;
    /// Errors if shifted solves are not supported by the inner method.
    fn check_shifted(&self) -> Result<()> {
        Ok(())
    }
}

/// Transport operators with the configured multigroup solver and optional
/// MGE preconditioner (built from the unshifted operator).
#[derive(Debug)]
pub struct TransportEigenProblem {
    transport: Transport,
    multigroup: MultigroupConfig,
    precond: Option<MgePreconditioner>,
}

impl TransportEigenProblem {
    pub fn new(model: ProblemModel, cfg: &EigenConfig) -> Result<Self> {
        Self::from_transport(Transport::new(model)?, cfg)
    }

    pub fn from_transport(transport: Transport, cfg: &EigenConfig) -> Result<Self> {
        cfg.validate()?;
        if !transport.model().is_fissile() {
            return Err(Error::Input("eigenvalue problems need fissile material".into()));
        }
        let precond = match (&cfg.precondition, cfg.multigroup.method) {
            (Some(params), MultigroupMethod::MgKrylov) => {
                let block = krylov_block(&transport, cfg.multigroup.partitioning);
                if block.is_empty() {
                    None
                } else {
                    let layout = EnergySetLayout::new(block, cfg.multigroup.energy_sets)?;
                    Some(MgePreconditioner::new(&transport, layout, *params)?)
                }
            }
            (Some(_), MultigroupMethod::GaussSeidel) => {
                return Err(config("the MGE preconditioner requires the Krylov multigroup solver"));
            }
            (None, _) => None,
        };
        Ok(Self {
            transport,
            multigroup: cfg.multigroup,
            precond,
        })
    }

    pub fn transport(&self) -> &Transport {
        &self.transport
    }

    pub fn preconditioner(&self) -> Option<&MgePreconditioner> {
        self.precond.as_ref()
    }

    /// Solves `(I - TMS) phi = TM q` with the configured multigroup solver.
    pub fn solve_source(&self, q: &[f64], x0: Option<&[f64]>) -> Result<InnerSolve> {
        let s = multigroup::solve(&self.transport, q, &self.multigroup, 0.0, x0, self.precond.as_ref())?;
        Ok(InnerSolve {
            x: s.flux,
            iterations: s.krylov_iterations,
            converged: s.converged,
            residual: s.final_relative_residual,
        })
    }
}

impl EigenOperators for TransportEigenProblem {
    fn dim(&self) -> usize {
        self.transport.len()
    }

    fn apply_loss(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.transport.apply_a(x, 0.0)
    }

    fn apply_production(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.transport.apply_tmf(x)
    }

    fn fission_source(&self, x: &[f64]) -> Vec<f64> {
        self.transport.fission_density(x)
    }

    fn solve(&self, src: &[f64], shift: f64, x0: Option<&[f64]>) -> Result<InnerSolve> {
        let q = self.transport.apply_fission(src)?;
        let s = multigroup::solve(&self.transport, &q, &self.multigroup, shift, x0, self.precond.as_ref())?;
        Ok(InnerSolve {
            x: s.flux,
            iterations: s.krylov_iterations,
            converged: s.converged,
            residual: s.final_relative_residual,
        })
    }

    fn check_shifted(&self) -> Result<()> {
        if self.multigroup.method == MultigroupMethod::GaussSeidel {
            return Err(config(
                "Rayleigh quotient iteration needs the Krylov multigroup solver; Gauss-Seidel may not converge with fission in the operator",
            ));
        }
        Ok(())
    }
}

/// Small explicit pair for checking the solvers against hand results.
#[derive(Debug, Clone)]
pub struct DenseEigenProblem {
    pub loss: DenseMatrix,
    pub production: DenseMatrix,
}

impl EigenOperators for DenseEigenProblem {
    fn dim(&self) -> usize {
        self.loss.rows
    }

    fn apply_loss(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.loss.matvec(x))
    }

    fn apply_production(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.production.matvec(x))
    }

    fn fission_source(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }

    fn solve(&self, src: &[f64], shift: f64, _x0: Option<&[f64]>) -> Result<InnerSolve> {
        let a = self.loss.add_scaled(-shift, &self.production)?;
        match dense_solve(&a, &self.production.matvec(src)) {
            Ok(x) => Ok(InnerSolve {
                x,
                iterations: 0,
                converged: true,
                residual: 0.0,
            }),
            // A shift on an eigenvalue is reported as a failed solve.
            Err(Error::Singular(_)) => Ok(InnerSolve {
                x: vec![f64::NAN; src.len()],
                iterations: 0,
                converged: false,
                residual: f64::INFINITY,
            }),
            Err(e) => Err(e),
        }
    }
}

/// Builds the transport operators and runs the configured solver.
pub fn solve_eigen(model: ProblemModel, cfg: &EigenConfig) -> Result<EigenReport> {
    let problem = TransportEigenProblem::new(model, cfg)?;
    run(&problem, cfg)
}

/// Runs `cfg.solver` on an already-built problem.
pub fn run(problem: &TransportEigenProblem, cfg: &EigenConfig) -> Result<EigenReport> {
    match cfg.solver {
        EigenSolver::Power => solve_power(problem, cfg),
        EigenSolver::Rqi => solve_rqi(problem, cfg, None),
        EigenSolver::Arnoldi if cfg.arnoldi_energy_independent => solve_arnoldi_energy_independent(problem, cfg),
        EigenSolver::Arnoldi => solve_arnoldi(problem, cfg),
    }
}

/// Unit vector of all ones.
pub(crate) fn initial_vector(dim: usize) -> Vec<f64> {
    vec![1.0 / (dim as f64).sqrt(); dim]
}

/// Scales to unit L2 norm with a nonnegative entry sum. Returns the norm.
pub(crate) fn normalize(v: &mut [f64]) -> f64 {
    let n = norm2(v);
    if n > 0.0 {
        let s = if v.iter().sum::<f64>() < 0.0 { -1.0 / n } else { 1.0 / n };
        v.iter_mut().for_each(|x| *x *= s);
    }
    n
}

pub(crate) fn relative_change(new: &[f64], old: &[f64]) -> f64 {
    let d = new.iter().zip(old).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let n = norm2(new);
    if n > 0.0 {
        d / n
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xsmodel::{Boundaries, CrossSectionSet};

    fn inf2g(solver: EigenSolver) -> EigenReport {
        let xs = CrossSectionSet::new(
            vec![1.0, 1.2],
            vec![vec![0.3, 0.1], vec![0.4, 0.5]],
            vec![0.2, 0.9],
            vec![1.0, 0.0],
        )
        .unwrap();
        let m = ProblemModel::slab(vec![1.0; 3], vec![0; 3], vec![xs], 4, Boundaries::reflecting());
        let cfg = EigenConfig {
            solver,
            k_tolerance: 1e-10,
            flux_tolerance: 1e-8,
            ..EigenConfig::default()
        };
        solve_eigen(m, &cfg).unwrap()
    }

    #[test]
    fn two_group_infinite_medium_all_solvers() {
        for s in [EigenSolver::Power, EigenSolver::Rqi, EigenSolver::Arnoldi] {
            let r = inf2g(s);
            assert!(r.converged, "{s:?}");
            assert!((r.k - 10.0 / 9.0).abs() < 1e-8, "{s:?}: {}", r.k);
        }
    }

    #[test]
    fn rqi_rejects_gauss_seidel() {
        let xs = CrossSectionSet::new(vec![1.0], vec![vec![0.5]], vec![0.6], vec![1.0]).unwrap();
        let m = ProblemModel::slab(vec![1.0; 2], vec![0; 2], vec![xs], 2, Boundaries::reflecting());
        let mut cfg = EigenConfig {
            solver: EigenSolver::Rqi,
            ..EigenConfig::default()
        };
        cfg.multigroup.method = MultigroupMethod::GaussSeidel;
        assert!(matches!(solve_eigen(m, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn non_fissile_is_rejected() {
        let xs = CrossSectionSet::non_fissile(vec![1.0], vec![vec![0.5]]).unwrap();
        let m = ProblemModel::slab(vec![1.0; 2], vec![0; 2], vec![xs], 2, Boundaries::vacuum());
        assert!(solve_eigen(m, &EigenConfig::default()).is_err());
    }
}
