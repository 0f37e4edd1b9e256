use std::time::Instant;

use super::{initial_vector, normalize, EigenConfig, EigenOperators, EigenReport, EigenSolver, OuterRecord, TransportEigenProblem};
use crate::error::{Error, Result};
use crate::krylov::axpy;
use crate::operators::{dot, norm2};
use crate::oracle::{DenseMatrix, LuFactors};

const RITZ_TOLERANCE: f64 = 1e-12;
const RITZ_MAX_STEPS: usize = 10_000;

/// Dominant eigenpair of a small (Hessenberg) matrix by power iteration from
/// the first unit vector, followed by one Rayleigh-quotient refinement.
pub fn dominant_ritz(h: &DenseMatrix) -> Result<(f64, Vec<f64>)> {
    let d = h.rows;
    if d == 0 || h.cols != d {
        return Err(Error::Shape("Ritz extraction needs a nonempty square matrix".into()));
    }
    let mut x = vec![0.0; d];
    x[0] = 1.0;
    let mut prev: Option<Vec<f64>> = None;
    for _ in 0..RITZ_MAX_STEPS {
        let y = h.matvec(&x);
        let ny = norm2(&y);
        if ny == 0.0 {
            return Err(Error::ComplexDominance(
                "the start vector lies in the null space; change the subspace size".into(),
            ));
        }
        let sign = if dot(&x, &y) < 0.0 { -1.0 } else { 1.0 };
        let next: Vec<f64> = y.iter().map(|v| sign * v / ny).collect();
        let change = distance(&next, &x);
        if change <= RITZ_TOLERANCE {
            return Ok(polish(h, next));
        }
        if let Some(p) = &prev {
            if distance(&next, p) <= RITZ_TOLERANCE {
                return Err(Error::ComplexDominance(
                    "Ritz power iteration alternates between two vectors: the dominant eigenvalue is not simple and real; change the subspace size".into(),
                ));
            }
        }
        prev = Some(std::mem::replace(&mut x, next));
    }
    Err(Error::ComplexDominance(format!(
        "Ritz power iteration did not converge in {RITZ_MAX_STEPS} steps; change the subspace size"
    )))
}

fn polish(h: &DenseMatrix, x: Vec<f64>) -> (f64, Vec<f64>) {
    let rq = |v: &[f64]| dot(v, &h.matvec(v)) / dot(v, v);
    let resid = |v: &[f64], l: f64| {
        let hv = h.matvec(v);
        hv.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt()
    };
    let lambda = rq(&x);
    let mut shifted = h.clone();
    for i in 0..h.rows {
        shifted.set(i, i, h.get(i, i) - lambda);
    }
    if let Ok(lu) = LuFactors::new(&shifted) {
        let mut z = lu.solve(&x);
        let nz = norm2(&z);
        if nz.is_finite() && nz > 0.0 {
            let s = if dot(&z, &x) < 0.0 { -1.0 / nz } else { 1.0 / nz };
            z.iter_mut().for_each(|v| *v *= s);
            let lz = rq(&z);
            if resid(&z, lz) < resid(&x, lambda) {
                return (lz, z);
            }
        }
    }
    (lambda, x)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// One operator application: `(result, krylov iterations)`.
type ApplyFn<'a> = dyn Fn(&[f64]) -> Result<(Vec<f64>, usize)> + 'a;

struct ArnoldiOutcome {
    k: f64,
    vector: Vec<f64>,
    converged: bool,
    applications: usize,
    krylov_iterations: usize,
    history: Vec<OuterRecord>,
    diagnostic: Option<String>,
}

/// Explicitly restarted Arnoldi for the dominant eigenpair of `op`.
fn arnoldi(op: &ApplyFn<'_>, dim: usize, cfg: &EigenConfig) -> Result<ArnoldiOutcome> {
    let m = cfg.arnoldi_subspace.min(dim).max(1);
    let mut start = initial_vector(dim);
    let mut out = ArnoldiOutcome {
        k: f64::NAN,
        vector: start.clone(),
        converged: false,
        applications: 0,
        krylov_iterations: 0,
        history: Vec::new(),
        diagnostic: None,
    };
    let mut k_prev: Option<f64> = None;
    while out.applications < cfg.max_outer_iterations {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut h = DenseMatrix::zeros(m + 1, m);
        let mut size = 0;
        let mut breakdown = false;
        let mut cycle_iterations = 0;
        for j in 0..m {
            if out.applications >= cfg.max_outer_iterations {
                break;
            }
            let (mut w, its) = op(&basis[j])?;
            out.applications += 1;
            cycle_iterations += its;
            let pre = norm2(&w);
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h.set(i, j, c);
                axpy(-c, v, &mut w);
            }
            let mut post = norm2(&w);
            if post < pre / std::f64::consts::SQRT_2 {
                for (i, v) in basis.iter().enumerate() {
                    let c = dot(&w, v);
                    h.set(i, j, h.get(i, j) + c);
                    axpy(-c, v, &mut w);
                }
                post = norm2(&w);
            }
            h.set(j + 1, j, post);
            size = j + 1;
            if post <= 1e-12 * pre.max(f64::MIN_POSITIVE) {
                breakdown = true;
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|x| x / post).collect());
            }
        }
        out.krylov_iterations += cycle_iterations;
        if size == 0 {
            break;
        }
        let mut hk = DenseMatrix::zeros(size, size);
        for i in 0..size {
            for j in 0..size {
                hk.set(i, j, h.get(i, j));
            }
        }
        let (lambda, y) = dominant_ritz(&hk)?;
        let mut u = vec![0.0; dim];
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, &basis[i], &mut u);
        }
        normalize(&mut u);
        let residual = if breakdown {
            0.0
        } else {
            (h.get(size, size - 1) * y[size - 1]).abs() / lambda.abs()
        };
        out.history.push(OuterRecord {
            k: lambda,
            flux_delta: residual,
            krylov_iterations: cycle_iterations,
            shift: None,
        });
        log::debug!("arnoldi restart {}: k = {lambda:.12}, ritz residual = {residual:.3e}", out.history.len());
        out.k = lambda;
        out.vector = u.clone();
        let dk_ok = match k_prev {
            Some(kp) => (lambda - kp).abs() / lambda.abs() <= cfg.k_tolerance,
            None => residual <= cfg.k_tolerance,
        };
        if breakdown || (dk_ok && residual <= cfg.flux_tolerance) {
            out.converged = true;
            break;
        }
        k_prev = Some(lambda);
        start = u;
    }
    Ok(out)
}

fn report(out: ArnoldiOutcome, flux: Vec<f64>, extra_krylov: usize, started: Instant) -> EigenReport {
    EigenReport {
        solver: EigenSolver::Arnoldi,
        k: out.k,
        gamma: 1.0 / out.k,
        flux,
        converged: out.converged,
        outer_iterations: out.applications,
        krylov_iterations: out.krylov_iterations + extra_krylov,
        history: out.history,
        seconds: started.elapsed().as_secs_f64(),
        diagnostic: out.diagnostic,
    }
}

/// Arnoldi on `v -> solve(TMF v)` over the full multigroup flux.
pub fn solve_arnoldi(ops: &dyn EigenOperators, cfg: &EigenConfig) -> Result<EigenReport> {
    cfg.validate()?;
    let started = Instant::now();
    let op = |v: &[f64]| -> Result<(Vec<f64>, usize)> {
        let s = ops.solve(v, 0.0, None)?;
        if !s.converged {
            log::warn!("Arnoldi inner solve stopped at relative residual {:.3e}", s.residual);
        }
        Ok((s.x, s.iterations))
    };
    let mut out = arnoldi(&op, ops.dim(), cfg)?;
    let flux = std::mem::take(&mut out.vector);
    Ok(report(out, flux, 0, started))
}

/// Arnoldi on the spatial fission source `G -> f^T (I - TMS)^{-1} TM chi G`;
/// the flux is recovered by one fixed-source solve with source `chi G / k`.
pub fn solve_arnoldi_energy_independent(problem: &TransportEigenProblem, cfg: &EigenConfig) -> Result<EigenReport> {
    cfg.validate()?;
    let started = Instant::now();
    let t = problem.transport();
    let (groups, cells) = (t.groups(), t.cells());
    let spread = |gamma: &[f64]| -> Vec<f64> {
        let mut q = vec![0.0; groups * cells];
        for g in 0..groups {
            for c in 0..cells {
                q[g * cells + c] = t.model().cell_material(c).chi[g] * gamma[c];
            }
        }
        q
    };
    let op = |gamma: &[f64]| -> Result<(Vec<f64>, usize)> {
        let s = problem.solve_source(&spread(gamma), None)?;
        Ok((t.fission_density(&s.x), s.iterations))
    };
    let mut out = arnoldi(&op, cells, cfg)?;
    let q: Vec<f64> = spread(&out.vector).into_iter().map(|v| v / out.k).collect();
    let final_solve = problem.solve_source(&q, None)?;
    let mut flux = final_solve.x;
    normalize(&mut flux);
    out.converged &= final_solve.converged;
    Ok(report(out, flux, final_solve.iterations, started))
}
