use std::time::Instant;

use super::{
    initial_vector, normalize, relative_change, EigenConfig, EigenOperators, EigenReport, EigenSolver, OuterRecord,
    MAX_SHIFT,
};
use crate::error::{Error, Result};
use crate::operators::{norm2, rayleigh_ratio};

/// Consecutive failed inner solves that end the iteration.
const MAX_INNER_FAILURES: usize = 3;

/// Below this relative eigen-residual the iterate is taken as exact and the
/// (singular) shifted solve is skipped.
const EXACT_RESIDUAL: f64 = 1e-14;

/// Rayleigh quotient iteration: solve `(I - TM(S + rho F)) phi_new = TMF phi`
/// with `rho` the Rayleigh quotient of the current iterate (the configured
/// initial shift on the first step), clamped to `[0, MAX_SHIFT]`.
///
/// `x0` overrides the all-ones starting vector.
pub fn solve_rqi(ops: &dyn EigenOperators, cfg: &EigenConfig, x0: Option<&[f64]>) -> Result<EigenReport> {
    cfg.validate()?;
    ops.check_shifted()?;
    let start = Instant::now();
    let mut phi = match x0 {
        Some(x) if x.len() == ops.dim() => x.to_vec(),
        _ => initial_vector(ops.dim()),
    };
    normalize(&mut phi);
    let mut k = if cfg.initial_shift > 0.0 {
        1.0 / cfg.initial_shift
    } else {
        f64::NAN
    };
    let mut report = EigenReport {
        solver: EigenSolver::Rqi,
        k,
        gamma: cfg.initial_shift,
        flux: Vec::new(),
        converged: false,
        outer_iterations: 0,
        krylov_iterations: 0,
        history: Vec::new(),
        seconds: 0.0,
        diagnostic: None,
    };
    let mut last_good_shift: Option<f64> = None;
    let mut failures = 0usize;
    let mut rho = cfg.initial_shift.min(MAX_SHIFT);
    for i in 0..cfg.max_outer_iterations {
        if i > 0 {
            rho = rayleigh_ratio(&phi, &ops.apply_loss(&phi)?, &ops.apply_production(&phi)?)?
                .clamp(0.0, MAX_SHIFT);
        }
        report.outer_iterations += 1;
        let (next, iterations) = if i > 0 && eigen_residual(ops, &phi, rho)? <= EXACT_RESIDUAL {
            (phi.clone(), 0)
        } else {
            let mut inner = ops.solve(&phi, rho, None)?;
            let mut iterations = inner.iterations;
            let usable = |s: &super::InnerSolve| s.converged && s.x.iter().all(|v| v.is_finite());
            // Only a diverged solve (no residual reduction at all) is retried;
            // a capped solve still carries a good direction.
            let diverged = |s: &super::InnerSolve| !(s.residual < 1.0) || !s.x.iter().all(|v| v.is_finite());
            if diverged(&inner) {
                if let Some(good) = last_good_shift {
                    let relaxed = 0.5 * (rho + good);
                    log::info!("inner solve failed at shift {rho:.6e}; retrying at {relaxed:.6e}");
                    let retry = ops.solve(&phi, relaxed, None)?;
                    iterations += retry.iterations;
                    if !diverged(&retry) {
                        rho = relaxed;
                        inner = retry;
                    }
                }
            }
            if usable(&inner) {
                failures = 0;
                last_good_shift = Some(rho);
            } else {
                failures += 1;
                if failures >= MAX_INNER_FAILURES || !inner.x.iter().all(|v| v.is_finite()) {
                    report.krylov_iterations += iterations;
                    report.diagnostic = Some(format!(
                        "inner solve failed {failures} consecutive times; last shift {rho:.6e}, relative residual {:.3e}",
                        inner.residual
                    ));
                    break;
                }
            }
            (inner.x, iterations)
        };
        report.krylov_iterations += iterations;
        let mut next = next;
        if normalize(&mut next) == 0.0 {
            return Err(Error::NonFissile(0.0));
        }
        let rho_new = rayleigh_ratio(&next, &ops.apply_loss(&next)?, &ops.apply_production(&next)?)?;
        let k_new = 1.0 / rho_new;
        let flux_delta = relative_change(&next, &phi);
        let dk = (k_new - k).abs() / k_new.abs();
        report.history.push(OuterRecord {
            k: k_new,
            flux_delta,
            krylov_iterations: iterations,
            shift: Some(rho),
        });
        log::debug!("rqi {}: shift = {rho:.12}, k = {k_new:.12}, flux change = {flux_delta:.3e}", i + 1);
        phi = next;
        k = k_new;
        if dk <= cfg.k_tolerance && flux_delta <= cfg.flux_tolerance {
            report.converged = true;
            break;
        }
    }
    report.k = k;
    report.gamma = 1.0 / k;
    report.flux = phi;
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// `||loss x - rho prod x|| / ||rho prod x||`.
fn eigen_residual(ops: &dyn EigenOperators, x: &[f64], rho: f64) -> Result<f64> {
    let a = ops.apply_loss(x)?;
    let b = ops.apply_production(x)?;
    let r: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - rho * q).collect();
    let scale = rho.abs() * norm2(&b);
    Ok(if scale > 0.0 { norm2(&r) / scale } else { f64::INFINITY })
}
