use std::time::Instant;

use super::{initial_vector, normalize, relative_change, EigenConfig, EigenOperators, EigenReport, EigenSolver, OuterRecord};
use crate::error::Result;
use crate::operators::{norm2, norm_inf};

/// Power iteration: `phi <- (1/k) solve(TMF phi)` with
/// `k <- k ||f^T phi_new|| / ||f^T phi||`.
///
/// Converged when the relative `k` change and both fission-source changes
/// (L2 and max-norm, relative to the new source) meet their tolerances.
pub fn solve_power(ops: &dyn EigenOperators, cfg: &EigenConfig) -> Result<EigenReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut phi = initial_vector(ops.dim());
    let mut k = 1.0;
    let mut fs = unit(ops.fission_source(&phi));
    let mut report = EigenReport {
        solver: EigenSolver::Power,
        k,
        gamma: 1.0,
        flux: Vec::new(),
        converged: false,
        outer_iterations: 0,
        krylov_iterations: 0,
        history: Vec::new(),
        seconds: 0.0,
        diagnostic: None,
    };
    let mut inner_failures = 0usize;
    for _ in 0..cfg.max_outer_iterations {
        let guess: Vec<f64> = phi.iter().map(|v| v * k).collect();
        let inner = ops.solve(&phi, 0.0, Some(&guess))?;
        report.outer_iterations += 1;
        report.krylov_iterations += inner.iterations;
        if !inner.converged {
            inner_failures += 1;
        }
        let mut next = inner.x;
        let denom = norm2(&ops.fission_source(&phi));
        let k_new = norm2(&ops.fission_source(&next)) / denom;
        if !k_new.is_finite() || k_new <= 0.0 {
            report.diagnostic = Some(format!("power iteration produced k = {k_new}"));
            break;
        }
        normalize(&mut next);
        let fs_new = unit(ops.fission_source(&next));
        let diff: Vec<f64> = fs_new.iter().zip(&fs).map(|(a, b)| a - b).collect();
        let l2 = norm2(&diff) / norm2(&fs_new).max(f64::MIN_POSITIVE);
        let inf = norm_inf(&diff) / norm_inf(&fs_new).max(f64::MIN_POSITIVE);
        let dk = (k_new - k).abs() / k_new;
        let flux_delta = relative_change(&next, &phi);
        report.history.push(OuterRecord {
            k: k_new,
            flux_delta,
            krylov_iterations: inner.iterations,
            shift: None,
        });
        log::debug!("power {}: k = {k_new:.12}, dk = {dk:.3e}, fission l2 = {l2:.3e}", report.outer_iterations);
        phi = next;
        fs = fs_new;
        k = k_new;
        if dk <= cfg.k_tolerance && l2 <= cfg.fission_l2_tolerance && inf <= cfg.fission_inf_tolerance {
            report.converged = true;
            break;
        }
    }
    if inner_failures > 0 {
        let note = format!("{inner_failures} inner solves did not reach their tolerance");
        report.diagnostic = Some(match report.diagnostic.take() {
            Some(d) => format!("{d}; {note}"),
            None => note,
        });
    }
    report.k = k;
    report.gamma = 1.0 / k;
    report.flux = phi;
    report.seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let n = norm2(&v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    v
}
