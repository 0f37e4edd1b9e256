//! Multigroup fixed-source solvers: Gauss-Seidel in energy and the block
//! Krylov solver, with full or upscatter partitioning and energy sets.
//!
//! Every solver takes the emission density `q` (before transport) and
//! solves `(I - TM(S + rho F)) phi = TM q`.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, shape, Error, Result};
use crate::krylov::{gmres, KrylovConfig, KrylovStats};
use crate::mge::MgePreconditioner;
use crate::operators::{norm2, Transport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultigroupMethod {
    GaussSeidel,
    MgKrylov,
}

impl std::str::FromStr for MultigroupMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gs" | "gauss_seidel" => Ok(Self::GaussSeidel),
            "krylov" | "mg_krylov" => Ok(Self::MgKrylov),
            other => Err(config(format!("unknown multigroup method '{other}' (expected gs or krylov)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partitioning {
    Full,
    Upscatter,
}

impl std::str::FromStr for Partitioning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Self::Full),
            "upscatter" => Ok(Self::Upscatter),
            other => Err(config(format!("unknown partitioning '{other}' (expected full or upscatter)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultigroupConfig {
    pub method: MultigroupMethod,
    pub partitioning: Partitioning,
    pub gs_max_iterations: usize,
    /// Relative L2 change of the upscatter-block flux that ends Gauss-Seidel.
    pub gs_tolerance: f64,
    pub krylov: KrylovConfig,
    pub energy_sets: usize,
}

impl Default for MultigroupConfig {
    fn default() -> Self {
        Self {
            method: MultigroupMethod::MgKrylov,
            partitioning: Partitioning::Full,
            gs_max_iterations: 1000,
            gs_tolerance: 1e-8,
            krylov: KrylovConfig::default(),
            energy_sets: 1,
        }
    }
}

/// Contiguous group ranges, one per energy set, balanced to within one
/// group (earlier sets take the remainder).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EnergySetLayout {
    pub groups: Range<usize>,
    pub sets: Vec<Range<usize>>,
}

impl EnergySetLayout {
    pub fn new(groups: Range<usize>, set_count: usize) -> Result<Self> {
        let len = groups.len();
        if set_count == 0 || set_count > len.max(1) {
            return Err(config(format!(
                "energy sets must be between 1 and the block size {len}, got {set_count}"
            )));
        }
        let (base, extra) = (len / set_count, len % set_count);
        let mut sets = Vec::with_capacity(set_count);
        let mut start = groups.start;
        for s in 0..set_count {
            let size = base + usize::from(s < extra);
            sets.push(start..start + size);
            start += size;
        }
        Ok(Self { groups, sets })
    }

    pub fn set_count(&self) -> usize {
        self.sets.len()
    }

    pub fn min_set_size(&self) -> usize {
        self.sets.iter().map(Range::len).min().unwrap_or(0)
    }
}

/// Sums per-set contributions to the full block vector in ascending set
/// order, then hands each set its own group block.
pub fn reduce_plus_scatter(
    layout: &EnergySetLayout,
    cells: usize,
    contributions: &[Vec<f64>],
) -> Result<Vec<Vec<f64>>> {
    let len = layout.groups.len() * cells;
    if contributions.len() != layout.set_count() || contributions.iter().any(|c| c.len() != len) {
        return Err(shape(format!(
            "reduce-plus-scatter expects {} contributions of length {len}",
            layout.set_count()
        )));
    }
    let mut sum = contributions[0].clone();
    for c in &contributions[1..] {
        for (s, v) in sum.iter_mut().zip(c) {
            *s += v;
        }
    }
    let base = layout.groups.start;
    Ok(layout
        .sets
        .iter()
        .map(|r| sum[(r.start - base) * cells..(r.end - base) * cells].to_vec())
        .collect())
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct MultigroupSolution {
    pub flux: Vec<f64>,
    pub converged: bool,
    /// All GMRES iterations, block and within-group.
    pub krylov_iterations: usize,
    /// Gauss-Seidel sweeps over the iterated block.
    pub gs_iterations: usize,
    pub final_relative_residual: f64,
}

/// Group range solved as one Krylov block.
pub fn krylov_block(t: &Transport, partitioning: Partitioning) -> Range<usize> {
    let g = t.groups();
    match partitioning {
        Partitioning::Full => 0..g,
        Partitioning::Upscatter => t.model().first_upscatter_group().unwrap_or(g)..g,
    }
}

/// Dispatches on `cfg.method`.
pub fn solve(
    t: &Transport,
    q: &[f64],
    cfg: &MultigroupConfig,
    shift: f64,
    x0: Option<&[f64]>,
    precond: Option<&MgePreconditioner>,
) -> Result<MultigroupSolution> {
    match cfg.method {
        MultigroupMethod::GaussSeidel => solve_gauss_seidel(t, q, cfg, shift, x0),
        MultigroupMethod::MgKrylov => solve_mg_krylov(t, q, cfg, shift, x0, precond),
    }
}

fn check_source(t: &Transport, q: &[f64]) -> Result<()> {
    if q.len() != t.len() {
        return Err(shape(format!("source has {} entries, expected {}", q.len(), t.len())));
    }
    if q.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("source contains non-finite values".into()));
    }
    Ok(())
}

/// Solves one group with all other groups' emission folded into `source`:
/// `(I - TM c_gg) phi_g = TM source`, where `c_gg` is the per-cell
/// self-coupling.
fn within_group(
    t: &Transport,
    g: usize,
    self_coupling: &[f64],
    source: &[f64],
    guess: &[f64],
    kcfg: &KrylovConfig,
) -> (Vec<f64>, KrylovStats) {
    let n = t.cells();
    let mut b = vec![0.0; n];
    t.apply_tm_group(g, source, &mut b);
    if self_coupling.iter().all(|&c| c == 0.0) {
        let stats = KrylovStats {
            converged: true,
            ..KrylovStats::default()
        };
        return (b, stats);
    }
    let op = |x: &[f64], y: &mut [f64]| {
        let src: Vec<f64> = self_coupling.iter().zip(x).map(|(c, v)| c * v).collect();
        t.apply_tm_group(g, &src, y);
        for c in 0..n {
            y[c] = x[c] - y[c];
        }
    };
    gmres(&op, &b, Some(guess), kcfg, None)
}

/// Per-cell coefficient coupling group `into` to group `from` in `S + shift F`.
fn coupling(t: &Transport, into: usize, from: usize, shift: f64) -> Vec<f64> {
    (0..t.cells())
        .map(|c| {
            let xs = t.model().cell_material(c);
            xs.scat(into, from) + shift * xs.chi[into] * xs.nu_sigma_f[from]
        })
        .collect()
}

/// First group receiving emission from a higher-index group under `S + shift F`.
fn first_upward_coupled(t: &Transport, shift: f64) -> Option<usize> {
    let g = t.groups();
    (0..g).find(|&into| {
        ((into + 1)..g).any(|from| t.model().materials.iter().any(|xs| {
            xs.scat(into, from) > 0.0 || (shift != 0.0 && xs.chi[into] * xs.nu_sigma_f[from] > 0.0)
        }))
    })
}

/// Gauss-Seidel in energy. Groups before the first upward-coupled group are
/// solved once; the rest are swept until the relative change of their flux
/// meets `gs_tolerance`.
pub fn solve_gauss_seidel(
    t: &Transport,
    q: &[f64],
    cfg: &MultigroupConfig,
    shift: f64,
    x0: Option<&[f64]>,
) -> Result<MultigroupSolution> {
    check_source(t, q)?;
    if cfg.energy_sets != 1 {
        return Err(config("Gauss-Seidel is serial in energy; energy_sets must be 1"));
    }
    let (g_count, n) = (t.groups(), t.cells());
    let mut phi = match x0 {
        Some(x) if x.len() == t.len() => x.to_vec(),
        _ => vec![0.0; t.len()],
    };
    let inner = KrylovConfig {
        restart: 30,
        tolerance: 0.1 * cfg.gs_tolerance,
        max_iterations: cfg.krylov.max_iterations,
    };
    let couplings: Vec<Vec<Vec<f64>>> = (0..g_count)
        .map(|into| (0..g_count).map(|from| coupling(t, into, from, shift)).collect())
        .collect();
    let mut sol = MultigroupSolution {
        converged: true,
        ..Default::default()
    };
    let solve_group = |g: usize, phi: &mut Vec<f64>, sol: &mut MultigroupSolution| {
        let mut src = q[g * n..(g + 1) * n].to_vec();
        for (from, coef) in couplings[g].iter().enumerate() {
            if from == g {
                continue;
            }
            for c in 0..n {
                src[c] += coef[c] * phi[from * n + c];
            }
        }
        let (x, stats) = within_group(t, g, &couplings[g][g], &src, &phi[g * n..(g + 1) * n], &inner);
        sol.krylov_iterations += stats.iterations;
        if !stats.converged {
            sol.converged = false;
        }
        phi[g * n..(g + 1) * n].copy_from_slice(&x);
    };

    let up = first_upward_coupled(t, shift).unwrap_or(g_count);
    for g in 0..up {
        solve_group(g, &mut phi, &mut sol);
    }
    if up < g_count {
        let block = up * n..g_count * n;
        let start_norm = norm2(&phi[block.clone()]).max(norm2(&q[block.clone()]));
        let mut block_converged = false;
        while sol.gs_iterations < cfg.gs_max_iterations {
            let old = phi[block.clone()].to_vec();
            for g in up..g_count {
                solve_group(g, &mut phi, &mut sol);
            }
            sol.gs_iterations += 1;
            let new = &phi[block.clone()];
            let nn = norm2(new);
            if !nn.is_finite() || (start_norm > 0.0 && nn > 1e12 * start_norm) {
                log::warn!("Gauss-Seidel diverged after {} iterations", sol.gs_iterations);
                break;
            }
            let diff = new.iter().zip(&old).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            sol.final_relative_residual = if nn > 0.0 { diff / nn } else { diff };
            if sol.final_relative_residual <= cfg.gs_tolerance {
                block_converged = true;
                break;
            }
        }
        sol.converged &= block_converged;
    } else {
        sol.gs_iterations = 1;
    }
    sol.flux = phi;
    Ok(sol)
}

/// `y = x - TM (S + shift F) x` on a group block, evaluated set by set.
pub(crate) fn block_apply(
    t: &Transport,
    layout: &EnergySetLayout,
    shift: f64,
    x: &[f64],
    y: &mut [f64],
) {
    let n = t.cells();
    let block = layout.groups.clone();
    let base = block.start;
    let density = (shift != 0.0).then(|| t.block_fission_density(x, block.clone()));
    let owned: Vec<Vec<f64>> = layout
        .sets
        .par_iter()
        .map(|set| {
            let mut out = vec![0.0; set.len() * n];
            let mut e = vec![0.0; n];
            for (k, g) in set.clone().enumerate() {
                t.emission(x, base, g, block.clone(), shift, density.as_deref(), &mut e);
                let o = &mut out[k * n..(k + 1) * n];
                t.apply_tm_group(g, &e, o);
                let xg = &x[(g - base) * n..(g - base + 1) * n];
                for (oc, xc) in o.iter_mut().zip(xg) {
                    *oc = xc - *oc;
                }
            }
            out
        })
        .collect();
    let mut offset = 0;
    for part in owned {
        y[offset..offset + part.len()].copy_from_slice(&part);
        offset += part.len();
    }
}

/// Checks that a shifted solve keeps its fission coupling inside the block.
fn check_shift_block(t: &Transport, block: &Range<usize>, shift: f64) -> Result<()> {
    if shift == 0.0 || block.start == 0 {
        return Ok(());
    }
    let outside = t.model().materials.iter().any(|xs| {
        (0..block.start).any(|g| xs.chi[g] > 0.0 || xs.nu_sigma_f[g] > 0.0)
    });
    if outside {
        return Err(config(format!(
            "shifted solve couples fission into groups below the Krylov block start {}; use full partitioning",
            block.start
        )));
    }
    Ok(())
}

/// Block Krylov solve. With upscatter partitioning the groups ahead of the
/// upscatter block are solved once by Gauss-Seidel and feed its source.
pub fn solve_mg_krylov(
    t: &Transport,
    q: &[f64],
    cfg: &MultigroupConfig,
    shift: f64,
    x0: Option<&[f64]>,
    precond: Option<&MgePreconditioner>,
) -> Result<MultigroupSolution> {
    check_source(t, q)?;
    let (g_count, n) = (t.groups(), t.cells());
    let block = krylov_block(t, cfg.partitioning);
    check_shift_block(t, &block, shift)?;
    let mut sol = MultigroupSolution {
        converged: true,
        ..Default::default()
    };
    let mut phi = match x0 {
        Some(x) if x.len() == t.len() => x.to_vec(),
        _ => vec![0.0; t.len()],
    };

    // Downscatter groups ahead of the block: one pass, lower groups only.
    let inner = KrylovConfig {
        restart: 30,
        ..cfg.krylov
    };
    for g in 0..block.start {
        let mut src = q[g * n..(g + 1) * n].to_vec();
        let mut e = vec![0.0; n];
        t.emission(&phi, 0, g, 0..g, 0.0, None, &mut e);
        for c in 0..n {
            src[c] += e[c];
        }
        let (x, stats) = within_group(t, g, &coupling(t, g, g, 0.0), &src, &phi[g * n..(g + 1) * n], &inner);
        sol.krylov_iterations += stats.iterations;
        sol.converged &= stats.converged;
        phi[g * n..(g + 1) * n].copy_from_slice(&x);
    }
    if block.is_empty() {
        sol.gs_iterations = 1;
        sol.flux = phi;
        return Ok(sol);
    }

    let layout = EnergySetLayout::new(block.clone(), cfg.energy_sets)?;
    if let Some(p) = precond {
        if p.layout() != &layout {
            return Err(config("preconditioner was built for a different group block or set layout"));
        }
    }
    // b = TM (q_block + S_{block, before} phi_before)
    let nb = block.len() * n;
    let mut b = vec![0.0; nb];
    {
        let mut src = vec![0.0; n];
        for (k, g) in block.clone().enumerate() {
            t.emission(&phi, 0, g, 0..block.start, 0.0, None, &mut src);
            for c in 0..n {
                src[c] += q[g * n + c];
            }
            t.apply_tm_group(g, &src, &mut b[k * n..(k + 1) * n]);
        }
    }
    let op = |x: &[f64], y: &mut [f64]| block_apply(t, &layout, shift, x, y);
    let pc = precond.map(|p| move |x: &[f64], y: &mut [f64]| p.apply_into(x, y));
    let guess = phi[block.start * n..].to_vec();
    let (x, stats) = gmres(
        &op,
        &b,
        Some(&guess),
        &cfg.krylov,
        pc.as_ref().map(|f| f as &dyn Fn(&[f64], &mut [f64])),
    );
    sol.krylov_iterations += stats.iterations;
    sol.converged &= stats.converged;
    sol.final_relative_residual = stats.final_relative_residual;
    phi[block.start * n..g_count * n].copy_from_slice(&x);
    sol.flux = phi;
    Ok(sol)
}
