//! Restarted GMRES with optional right preconditioning.

use serde::{Deserialize, Serialize};

use crate::operators::{dot, norm2};

/// Subdiagonal entries below this (relative to the unit first basis vector)
/// are treated as an exact invariant subspace.
pub const BREAKDOWN_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KrylovConfig {
    pub restart: usize,
    /// Target for `||b - A x|| / ||b||`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for KrylovConfig {
    fn default() -> Self {
        Self {
            restart: 50,
            tolerance: 1e-6,
            max_iterations: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct KrylovStats {
    pub iterations: usize,
    pub converged: bool,
    pub final_relative_residual: f64,
    pub restarts: usize,
    /// Relative residual estimates per restart cycle, starting with the true
    /// residual at the cycle's start.
    pub residual_history: Vec<Vec<f64>>,
    /// An exact invariant subspace was found.
    pub breakdown: bool,
}

pub type LinearOp<'a> = &'a dyn Fn(&[f64], &mut [f64]);

/// Solves `A x = b`. With a preconditioner `M`, solves `A M y = b` and
/// returns `x = M y`; convergence is always judged on the true residual.
pub fn gmres(
    op: LinearOp<'_>,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &KrylovConfig,
    precond: Option<LinearOp<'_>>,
) -> (Vec<f64>, KrylovStats) {
    let n = b.len();
    let m = cfg.restart.max(1);
    let mut stats = KrylovStats::default();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        stats.converged = true;
        return (vec![0.0; n], stats);
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        _ => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut v: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    // Column-major Hessenberg after rotation: h[j] holds column j.
    let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];

    loop {
        op(&x, &mut w);
        for i in 0..n {
            r[i] = b[i] - w[i];
        }
        let beta = norm2(&r);
        let rel = beta / bnorm;
        stats.final_relative_residual = rel;
        if !rel.is_finite() {
            stats.converged = false;
            break;
        }
        if rel <= cfg.tolerance || stats.breakdown {
            stats.converged = rel <= cfg.tolerance || stats.breakdown;
            break;
        }
        if stats.iterations >= cfg.max_iterations {
            break;
        }
        if !stats.residual_history.is_empty() {
            stats.restarts += 1;
        }
        let mut history = vec![rel];
        v.clear();
        h.clear();
        v.push(r.iter().map(|ri| ri / beta).collect());
        g.fill(0.0);
        g[0] = beta;
        let mut k = 0;
        let mut z = vec![0.0; n];
        while k < m && stats.iterations < cfg.max_iterations {
            let j = k;
            match precond {
                Some(p) => {
                    p(&v[j], &mut z);
                    op(&z, &mut w);
                }
                None => op(&v[j], &mut w),
            }
            stats.iterations += 1;
            let mut col = vec![0.0; j + 2];
            let pre = norm2(&w);
            for (i, vi) in v.iter().enumerate() {
                let hij = dot(&w, vi);
                col[i] = hij;
                axpy(-hij, vi, &mut w);
            }
            let mut post = norm2(&w);
            if post < pre / std::f64::consts::SQRT_2 {
                for (i, vi) in v.iter().enumerate() {
                    let c = dot(&w, vi);
                    col[i] += c;
                    axpy(-c, vi, &mut w);
                }
                post = norm2(&w);
            }
            col[j + 1] = post;
            for i in 0..j {
                let (a, bb) = (col[i], col[i + 1]);
                col[i] = cs[i] * a + sn[i] * bb;
                col[i + 1] = -sn[i] * a + cs[i] * bb;
            }
            let (a, bb) = (col[j], col[j + 1]);
            let rho = a.hypot(bb);
            if rho == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = a / rho;
                sn[j] = bb / rho;
            }
            col[j] = rho;
            col[j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            h.push(col);
            k = j + 1;
            let est = g[j + 1].abs() / bnorm;
            history.push(est);
            if !est.is_finite() {
                break;
            }
            if post < BREAKDOWN_TOLERANCE {
                stats.breakdown = true;
                break;
            }
            if est <= cfg.tolerance {
                break;
            }
            v.push(w.iter().map(|wi| wi / post).collect());
        }
        stats.residual_history.push(history);
        if k == 0 {
            break;
        }
        // Back substitution on the rotated triangle.
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for (jj, yj) in y.iter().enumerate().skip(i + 1) {
                s -= h[jj][i] * yj;
            }
            y[i] = if h[i][i] != 0.0 { s / h[i][i] } else { 0.0 };
        }
        let mut u = vec![0.0; n];
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, &v[i], &mut u);
        }
        match precond {
            Some(p) => {
                p(&u, &mut z);
                axpy(1.0, &z, &mut x);
            }
            None => axpy(1.0, &u, &mut x),
        }
    }
    (x, stats)
}

#[inline]
pub(crate) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
