//! Multigrid in energy: a right preconditioner built from V-cycles over
//! successively halved group structures, smoothed by weighted Richardson
//! iteration on the unshifted operator. Each energy set cycles on its own
//! groups with no cross-set coupling.

use std::ops::Range;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::multigroup::EnergySetLayout;
use crate::operators::Transport;
use crate::xsmodel::{build_quadrature, CrossSectionSet, ProblemModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridDepth {
    Auto,
    Fixed(usize),
}

impl std::str::FromStr for GridDepth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Self::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Self::Fixed(n)),
            _ => Err(config(format!("grid depth must be 'auto' or a positive integer, got '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgeParams {
    /// Richardson weight `w`.
    pub weight: f64,
    /// Relaxations per level visit `r`.
    pub relaxations: usize,
    pub v_cycles: usize,
    pub depth: GridDepth,
    /// Quadrature order for the preconditioner's sweeps; `None` keeps the
    /// problem's order.
    pub coarse_quadrature: Option<usize>,
}

impl Default for MgeParams {
    fn default() -> Self {
        Self {
            weight: 1.2,
            relaxations: 2,
            v_cycles: 1,
            depth: GridDepth::Auto,
            coarse_quadrature: None,
        }
    }
}

impl MgeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(config(format!("MGE weight must be positive, got {}", self.weight)));
        }
        if self.relaxations == 0 || self.v_cycles == 0 {
            return Err(config("MGE relaxations and V-cycles must be at least 1"));
        }
        Ok(())
    }

    /// Compact `w1.2r2v1` label.
    pub fn label(&self) -> String {
        format!("w{}r{}v{}", self.weight, self.relaxations, self.v_cycles)
    }
}

/// Group counts from `groups` down to one, halving with rounding up.
pub fn halving_chain(groups: usize) -> Vec<usize> {
    let mut chain = vec![groups.max(1)];
    while *chain.last().unwrap() > 1 {
        let g = *chain.last().unwrap();
        chain.push(g.div_ceil(2));
    }
    chain
}

/// Number of energy grids when `groups` are split into `sets`; every set uses
/// the depth of the smallest one.
pub fn grid_count(groups: usize, sets: usize) -> usize {
    halving_chain(groups / sets.max(1)).len()
}

/// Fine-to-coarse map merging adjacent pairs.
pub fn pair_mapping(groups: usize) -> Vec<usize> {
    (0..groups).map(|g| g / 2).collect()
}

fn coarse_sizes(mapping: &[usize]) -> Vec<usize> {
    let nc = mapping.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0; nc];
    for &h in mapping {
        sizes[h] += 1;
    }
    sizes
}

/// Flat-flux collapse: means of totals and production, spectrum summed,
/// scattering summed over members and divided by the source group's size.
pub fn collapse_xs(xs: &CrossSectionSet, mapping: &[usize]) -> CrossSectionSet {
    let sizes = coarse_sizes(mapping);
    let nc = sizes.len();
    let mut sigma_t = vec![0.0; nc];
    let mut nu_sigma_f = vec![0.0; nc];
    let mut chi = vec![0.0; nc];
    let mut scat = vec![0.0; nc * nc];
    for (g, &h) in mapping.iter().enumerate() {
        sigma_t[h] += xs.sigma_t[g];
        nu_sigma_f[h] += xs.nu_sigma_f[g];
        chi[h] += xs.chi[g];
        for (gp, &hp) in mapping.iter().enumerate() {
            scat[h * nc + hp] += xs.scat(g, gp);
        }
    }
    for h in 0..nc {
        let m = sizes[h] as f64;
        sigma_t[h] /= m;
        nu_sigma_f[h] /= m;
        for hp in 0..nc {
            scat[h * nc + hp] /= sizes[hp] as f64;
        }
    }
    CrossSectionSet {
        group_count: nc,
        sigma_t,
        scat,
        nu_sigma_f,
        chi,
    }
}

/// Coarse entry = sum of its members, cell by cell.
pub fn restrict(fine: &[f64], mapping: &[usize], cells: usize) -> Vec<f64> {
    let nc = coarse_sizes(mapping).len();
    let mut out = vec![0.0; nc * cells];
    for (g, &h) in mapping.iter().enumerate() {
        for c in 0..cells {
            out[h * cells + c] += fine[g * cells + c];
        }
    }
    out
}

/// Fine entry = its coarse parent's entry.
pub fn prolong(coarse: &[f64], mapping: &[usize], cells: usize) -> Vec<f64> {
    let mut out = vec![0.0; mapping.len() * cells];
    for (g, &h) in mapping.iter().enumerate() {
        out[g * cells..(g + 1) * cells].copy_from_slice(&coarse[h * cells..(h + 1) * cells]);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridLevel {
    pub group_count: usize,
    /// Map to the next coarser level; empty on the coarsest.
    pub mapping: Vec<usize>,
    pub materials: Vec<CrossSectionSet>,
}

/// Levels of one energy set, finest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridHierarchy {
    pub groups: Range<usize>,
    pub levels: Vec<GridLevel>,
}

/// One hierarchy per set. All sets share the depth implied by the smallest.
pub fn build_hierarchy(
    model: &ProblemModel,
    layout: &EnergySetLayout,
    params: &MgeParams,
) -> Vec<GridHierarchy> {
    let chain_len = halving_chain(layout.min_set_size()).len();
    let depth = match params.depth {
        GridDepth::Auto => chain_len,
        GridDepth::Fixed(n) if n > chain_len => {
            log::warn!("grid depth {n} exceeds the {chain_len} available levels; clamping");
            chain_len
        }
        GridDepth::Fixed(n) => n.max(1),
    };
    layout
        .sets
        .iter()
        .map(|set| {
            let mut materials: Vec<CrossSectionSet> =
                model.materials.iter().map(|xs| xs.sub_block(set.clone())).collect();
            let mut levels = Vec::with_capacity(depth);
            for l in 0..depth {
                let count = materials[0].group_count;
                let mapping = if l + 1 < depth { pair_mapping(count) } else { Vec::new() };
                let next = (!mapping.is_empty())
                    .then(|| materials.iter().map(|xs| collapse_xs(xs, &mapping)).collect());
                levels.push(GridLevel {
                    group_count: count,
                    mapping,
                    materials: std::mem::take(&mut materials),
                });
                if let Some(n) = next {
                    materials = n;
                }
            }
            GridHierarchy {
                groups: set.clone(),
                levels,
            }
        })
        .collect()
}

/// `count` weighted Richardson steps `phi <- phi + w (b - (I - TMS) phi)`.
pub fn relax(level: &Transport, phi: &mut [f64], b: &[f64], weight: f64, count: usize) -> Result<()> {
    for _ in 0..count {
        relax_once(level, phi, b, weight)?;
    }
    Ok(())
}

fn relax_once(level: &Transport, phi: &mut [f64], b: &[f64], weight: f64) -> Result<()> {
    if phi.iter().all(|&v| v == 0.0) {
        for (p, bi) in phi.iter_mut().zip(b) {
            *p = weight * bi;
        }
        return Ok(());
    }
    let tms = level.apply_tm(&level.apply_emission(phi, 0.0)?)?;
    for i in 0..phi.len() {
        phi[i] = (1.0 - weight) * phi[i] + weight * (tms[i] + b[i]);
    }
    Ok(())
}

#[derive(Debug)]
struct LevelOps {
    transport: Transport,
    mapping: Vec<usize>,
}

/// The preconditioner `G^{-1}` for a Krylov block and its set layout.
#[derive(Debug)]
pub struct MgePreconditioner {
    layout: EnergySetLayout,
    params: MgeParams,
    hierarchies: Vec<GridHierarchy>,
    sets: Vec<Vec<LevelOps>>,
    cells: usize,
    relaxations: AtomicUsize,
}

impl MgePreconditioner {
    pub fn new(t: &Transport, layout: EnergySetLayout, params: MgeParams) -> Result<Self> {
        params.validate()?;
        let model = t.model();
        let quadrature = match params.coarse_quadrature {
            Some(order) => {
                if !model.boundary.all_vacuum(model.dimension) {
                    return Err(config(
                        "a reduced preconditioner quadrature is only supported with vacuum boundaries",
                    ));
                }
                build_quadrature(model.dimension, order)?
            }
            None => t.quadrature().clone(),
        };
        let hierarchies = build_hierarchy(model, &layout, &params);
        let sets = hierarchies
            .iter()
            .map(|h| {
                h.levels
                    .iter()
                    .map(|lvl| {
                        let level_model = model.with_materials(lvl.materials.clone());
                        Ok(LevelOps {
                            transport: Transport::with_quadrature(level_model, &quadrature)?,
                            mapping: lvl.mapping.clone(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            layout,
            params,
            hierarchies,
            sets,
            cells: t.cells(),
            relaxations: AtomicUsize::new(0),
        })
    }

    pub fn layout(&self) -> &EnergySetLayout {
        &self.layout
    }

    pub fn params(&self) -> &MgeParams {
        &self.params
    }

    pub fn hierarchies(&self) -> &[GridHierarchy] {
        &self.hierarchies
    }

    pub fn levels(&self) -> usize {
        self.hierarchies.first().map_or(0, |h| h.levels.len())
    }

    /// Relaxation steps performed since construction, summed over sets.
    pub fn relaxation_count(&self) -> usize {
        self.relaxations.load(Ordering::Relaxed)
    }

    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; y.len()];
        self.apply_into(y, &mut out);
        out
    }

    /// `out = G^{-1} y` on the block vector `y`.
    pub fn apply_into(&self, y: &[f64], out: &mut [f64]) {
        let n = self.cells;
        let base = self.layout.groups.start;
        let parts: Vec<Vec<f64>> = self
            .layout
            .sets
            .par_iter()
            .zip(self.sets.par_iter())
            .map(|(range, levels)| {
                let b = &y[(range.start - base) * n..(range.end - base) * n];
                let mut x = vec![0.0; b.len()];
                for _ in 0..self.params.v_cycles {
                    x = self.v_cycle(levels, b, x);
                }
                x
            })
            .collect();
        let mut offset = 0;
        for p in parts {
            out[offset..offset + p.len()].copy_from_slice(&p);
            offset += p.len();
        }
    }

    fn relax(&self, level: &LevelOps, x: &mut [f64], b: &[f64]) {
        for _ in 0..self.params.relaxations {
            if relax_once(&level.transport, x, b, self.params.weight).is_err() {
                // Non-finite values: leave the smoother's output for GMRES to reject.
                x.fill(f64::NAN);
            }
            self.relaxations.fetch_add(1, Ordering::Relaxed);
        }
    }

    fn v_cycle(&self, levels: &[LevelOps], b: &[f64], x_fine: Vec<f64>) -> Vec<f64> {
        let n = self.cells;
        let depth = levels.len();
        let mut rhs = vec![b.to_vec()];
        let mut xs: Vec<Vec<f64>> = Vec::with_capacity(depth);
        let mut x_fine = Some(x_fine);
        for (l, level) in levels.iter().enumerate() {
            let mut x = x_fine.take().unwrap_or_else(|| vec![0.0; rhs[l].len()]);
            self.relax(level, &mut x, &rhs[l]);
            if l + 1 < depth {
                let ax = level
                    .transport
                    .apply_a(&x, 0.0)
                    .unwrap_or_else(|_| vec![f64::NAN; x.len()]);
                let res: Vec<f64> = rhs[l].iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
                rhs.push(restrict(&res, &level.mapping, n));
            }
            xs.push(x);
        }
        for l in (0..depth.saturating_sub(1)).rev() {
            let level = &levels[l];
            let corr = prolong(&xs[l + 1], &level.mapping, n);
            let mut x = std::mem::take(&mut xs[l]);
            for (xi, ci) in x.iter_mut().zip(&corr) {
                *xi += ci;
            }
            self.relax(level, &mut x, &rhs[l]);
            xs[l] = x;
        }
        xs.swap_remove(0)
    }
}
