//! Problem definition: multigroup cross sections, Cartesian meshes,
//! boundary conditions, fixed sources, and angular quadratures.

mod format;
mod quadrature;

pub use format::{parse_problem, read_problem, write_problem};
pub use quadrature::{build_quadrature, Quadrature, SUPPORTED_2D_ORDERS};

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::sweep::SpatialScheme;

/// Multigroup data for one material.
///
/// `scat` is stored row-major: entry `(g, g')` is scattering *into* group `g`
/// *from* group `g'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionSet {
    pub group_count: usize,
    pub sigma_t: Vec<f64>,
    pub scat: Vec<f64>,
    pub nu_sigma_f: Vec<f64>,
    pub chi: Vec<f64>,
}

impl CrossSectionSet {
    /// Builds a set from rows of the scattering matrix. No validation is done
    /// here; see [`validate_model`].
    pub fn new(
        sigma_t: Vec<f64>,
        scat_rows: Vec<Vec<f64>>,
        nu_sigma_f: Vec<f64>,
        chi: Vec<f64>,
    ) -> Result<Self> {
        let g = sigma_t.len();
        if scat_rows.len() != g || scat_rows.iter().any(|r| r.len() != g) {
            return Err(Error::Shape(format!(
                "scattering matrix must be {g}x{g}"
            )));
        }
        if nu_sigma_f.len() != g || chi.len() != g {
            return Err(Error::Shape(format!(
                "nu_sigma_f and chi must have {g} entries"
            )));
        }
        Ok(Self {
            group_count: g,
            sigma_t,
            scat: scat_rows.into_iter().flatten().collect(),
            nu_sigma_f,
            chi,
        })
    }

    /// Purely absorbing/scattering material with no fission.
    pub fn non_fissile(sigma_t: Vec<f64>, scat_rows: Vec<Vec<f64>>) -> Result<Self> {
        let g = sigma_t.len();
        Self::new(sigma_t, scat_rows, vec![0.0; g], vec![0.0; g])
    }

    #[inline]
    pub fn scat(&self, into: usize, from: usize) -> f64 {
        self.scat[into * self.group_count + from]
    }

    pub fn scat_row(&self, into: usize) -> &[f64] {
        let g = self.group_count;
        &self.scat[into * g..(into + 1) * g]
    }

    pub fn is_fissile(&self) -> bool {
        self.nu_sigma_f.iter().any(|&v| v > 0.0)
    }

    /// Restriction of this set to a contiguous group range. Scattering and
    /// fission couplings leaving the range are dropped.
    pub fn sub_block(&self, groups: std::ops::Range<usize>) -> Self {
        let n = groups.len();
        let mut scat = Vec::with_capacity(n * n);
        for g in groups.clone() {
            for gp in groups.clone() {
                scat.push(self.scat(g, gp));
            }
        }
        Self {
            group_count: n,
            sigma_t: self.sigma_t[groups.clone()].to_vec(),
            scat,
            nu_sigma_f: self.nu_sigma_f[groups.clone()].to_vec(),
            chi: self.chi[groups].to_vec(),
        }
    }

    /// First group `g` with scattering from some lower-energy group `g' > g`.
    pub fn first_upscatter_group(&self) -> Option<usize> {
        (0..self.group_count)
            .find(|&g| ((g + 1)..self.group_count).any(|gp| self.scat(g, gp) > 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Vacuum,
    Reflecting,
}

impl BoundaryCondition {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryCondition::Vacuum => "vacuum",
            BoundaryCondition::Reflecting => "reflecting",
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vacuum" => Ok(Self::Vacuum),
            "reflecting" | "reflective" => Ok(Self::Reflecting),
            other => Err(config(format!(
                "unknown boundary condition '{other}' (expected vacuum or reflecting)"
            ))),
        }
    }
}

/// Per-face boundary conditions. The `y` faces are ignored in 1D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Boundaries {
    pub x_low: BoundaryCondition,
    pub x_high: BoundaryCondition,
    pub y_low: BoundaryCondition,
    pub y_high: BoundaryCondition,
}

impl Boundaries {
    pub fn vacuum() -> Self {
        Self::uniform(BoundaryCondition::Vacuum)
    }

    pub fn reflecting() -> Self {
        Self::uniform(BoundaryCondition::Reflecting)
    }

    pub fn uniform(bc: BoundaryCondition) -> Self {
        Self {
            x_low: bc,
            x_high: bc,
            y_low: bc,
            y_high: bc,
        }
    }

    pub fn all_vacuum(&self, dimension: usize) -> bool {
        let v = BoundaryCondition::Vacuum;
        self.x_low == v && self.x_high == v && (dimension == 1 || (self.y_low == v && self.y_high == v))
    }
}

impl Default for Boundaries {
    fn default() -> Self {
        Self::vacuum()
    }
}

/// A complete transport problem: mesh, materials, angular order, boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemModel {
    pub dimension: usize,
    pub cell_widths_x: Vec<f64>,
    /// Empty in 1D.
    pub cell_widths_y: Vec<f64>,
    /// Material index per cell; 2D cells are row-major with `x` fastest.
    pub material_ids: Vec<usize>,
    pub materials: Vec<CrossSectionSet>,
    pub quadrature_order: usize,
    pub scheme: SpatialScheme,
    pub boundary: Boundaries,
    /// Isotropic emission density, group-major (`G x n_cells`).
    pub fixed_source: Option<Vec<f64>>,
}

impl ProblemModel {
    pub fn slab(
        widths: Vec<f64>,
        material_ids: Vec<usize>,
        materials: Vec<CrossSectionSet>,
        quadrature_order: usize,
        boundary: Boundaries,
    ) -> Self {
        Self {
            dimension: 1,
            cell_widths_x: widths,
            cell_widths_y: Vec::new(),
            material_ids,
            materials,
            quadrature_order,
            scheme: SpatialScheme::StepCharacteristic,
            boundary,
            fixed_source: None,
        }
    }

    pub fn nx(&self) -> usize {
        self.cell_widths_x.len()
    }

    pub fn ny(&self) -> usize {
        if self.dimension == 2 {
            self.cell_widths_y.len()
        } else {
            1
        }
    }

    pub fn cell_count(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn group_count(&self) -> usize {
        self.materials.first().map_or(0, |m| m.group_count)
    }

    /// Number of unknowns in a multigroup flux vector.
    pub fn flux_len(&self) -> usize {
        self.group_count() * self.cell_count()
    }

    pub fn cell_material(&self, cell: usize) -> &CrossSectionSet {
        &self.materials[self.material_ids[cell]]
    }

    pub fn is_fissile(&self) -> bool {
        self.materials.iter().any(CrossSectionSet::is_fissile)
    }

    /// Start of the contiguous upscatter block, or `None` for a
    /// downscatter-only problem.
    pub fn first_upscatter_group(&self) -> Option<usize> {
        self.materials
            .iter()
            .filter_map(CrossSectionSet::first_upscatter_group)
            .min()
    }

    /// Same mesh and settings with different materials (used for collapsed
    /// energy grids).
    pub fn with_materials(&self, materials: Vec<CrossSectionSet>) -> Self {
        Self {
            materials,
            fixed_source: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
}

impl Diagnostic {
    fn error(message: String) -> Self {
        Self {
            severity: Severity::Error,
            message,
        }
    }

    fn warning(message: String) -> Self {
        Self {
            severity: Severity::Warning,
            message,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

/// Checks every model invariant. Hard errors and soft warnings are both
/// returned; an empty list means the model is clean.
pub fn validate_model(model: &ProblemModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut warnings = Vec::new();
    let mut err = |m: String| out.push(Diagnostic::error(m));

    if model.dimension != 1 && model.dimension != 2 {
        err(format!("dimension must be 1 or 2, got {}", model.dimension));
        return out;
    }
    if model.cell_widths_x.is_empty() {
        err("mesh has no cells in x".into());
    }
    if model.dimension == 2 && model.cell_widths_y.is_empty() {
        err("2D mesh has no cells in y".into());
    }
    for (axis, widths) in [("x", &model.cell_widths_x), ("y", &model.cell_widths_y)] {
        if let Some(w) = widths.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            err(format!("cell width in {axis} must be positive and finite, got {w}"));
        }
    }
    if model.materials.is_empty() {
        err("no materials defined".into());
        return out;
    }
    let n_cells = model.cell_count();
    if model.material_ids.len() != n_cells {
        err(format!(
            "material map has {} entries for {} cells",
            model.material_ids.len(),
            n_cells
        ));
    }
    if let Some(id) = model
        .material_ids
        .iter()
        .find(|&&id| id >= model.materials.len())
    {
        err(format!("material id {id} does not refer to a defined material"));
    }

    let groups = model.materials[0].group_count;
    if groups == 0 {
        err("materials must have at least one group".into());
    }
    for (m, xs) in model.materials.iter().enumerate() {
        if xs.group_count != groups {
            err(format!(
                "material {m} has {} groups, expected {groups}",
                xs.group_count
            ));
            continue;
        }
        let g = xs.group_count;
        if xs.sigma_t.len() != g
            || xs.scat.len() != g * g
            || xs.nu_sigma_f.len() != g
            || xs.chi.len() != g
        {
            err(format!("material {m} has inconsistent array lengths"));
            continue;
        }
        let all = xs
            .sigma_t
            .iter()
            .chain(&xs.scat)
            .chain(&xs.nu_sigma_f)
            .chain(&xs.chi);
        if all.clone().any(|v| !v.is_finite()) {
            err(format!("material {m} has non-finite cross sections"));
        }
        if all.clone().any(|&v| v < 0.0) {
            err(format!("material {m} has negative cross sections"));
        }
        let chi_sum: f64 = xs.chi.iter().sum();
        if xs.is_fissile() {
            if (chi_sum - 1.0).abs() > 1e-12 {
                err(format!(
                    "material {m}: fission spectrum sums to {chi_sum}, expected 1"
                ));
            }
        } else if xs.chi.iter().any(|&c| c != 0.0) {
            err(format!(
                "material {m}: non-fissile material must have an all-zero fission spectrum"
            ));
        }
        for gp in 0..g {
            let out_scatter: f64 = (0..g).map(|gi| xs.scat(gi, gp)).sum();
            let production = out_scatter + xs.nu_sigma_f[gp];
            if production > xs.sigma_t[gp] {
                warnings.push(Diagnostic::warning(format!(
                    "material {m}, group {gp}: scattering plus production {production} exceeds sigma_t {}",
                    xs.sigma_t[gp]
                )));
            }
        }
    }

    let mut err = |m: String| out.push(Diagnostic::error(m));
    if model.quadrature_order < 2 || model.quadrature_order % 2 != 0 {
        err(format!(
            "quadrature order must be even and >= 2, got {}",
            model.quadrature_order
        ));
    } else if model.dimension == 2 && !SUPPORTED_2D_ORDERS.contains(&model.quadrature_order) {
        err(format!(
            "2D level-symmetric quadrature supports orders {SUPPORTED_2D_ORDERS:?}, got {}",
            model.quadrature_order
        ));
    }
    if model.dimension == 2 && model.scheme == SpatialScheme::StepCharacteristic {
        err("step_characteristic is only available in 1D; use step or diamond in 2D".into());
    }
    if let Some(q) = &model.fixed_source {
        if q.len() != groups * n_cells {
            err(format!(
                "fixed source has {} entries, expected {}",
                q.len(),
                groups * n_cells
            ));
        } else if q.iter().any(|v| !v.is_finite() || *v < 0.0) {
            err("fixed source must be finite and nonnegative".into());
        }
    }
    out.extend(warnings);
    out
}

/// Returns `Err` with all hard errors joined, or `Ok` with the warnings.
pub fn check_model(model: &ProblemModel) -> Result<Vec<Diagnostic>> {
    let (errors, warnings): (Vec<_>, Vec<_>) =
        validate_model(model).into_iter().partition(Diagnostic::is_error);
    if errors.is_empty() {
        Ok(warnings)
    } else {
        let msg = errors
            .iter()
            .map(|d| d.message.as_str())
            .collect::<Vec<_>>()
            .join("; ");
        Err(Error::Input(msg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_group(sigma_t: f64, scat: f64, nsf: f64) -> CrossSectionSet {
        let chi = if nsf > 0.0 { 1.0 } else { 0.0 };
        CrossSectionSet::new(vec![sigma_t], vec![vec![scat]], vec![nsf], vec![chi]).unwrap()
    }

    fn model_with(materials: Vec<CrossSectionSet>) -> ProblemModel {
        ProblemModel::slab(vec![1.0; 2], vec![0, 0], materials, 2, Boundaries::vacuum())
    }

    #[test]
    fn super_unitary_production_is_a_warning() {
        let d = validate_model(&model_with(vec![one_group(1.0, 0.5, 0.6)]));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].severity, Severity::Warning);
    }

    #[test]
    fn bad_spectrum_is_a_hard_error() {
        let xs = CrossSectionSet::new(
            vec![1.0, 1.0],
            vec![vec![0.1, 0.0], vec![0.1, 0.1]],
            vec![0.1, 0.1],
            vec![0.5, 0.6],
        )
        .unwrap();
        let d = validate_model(&model_with(vec![xs]));
        assert!(d.iter().any(|d| d.is_error() && d.message.contains("spectrum")));
    }

    #[test]
    fn valid_two_group_model_is_clean() {
        let xs = CrossSectionSet::new(
            vec![1.0, 1.2],
            vec![vec![0.3, 0.0], vec![0.4, 0.5]],
            vec![0.05, 0.2],
            vec![1.0, 0.0],
        )
        .unwrap();
        assert!(validate_model(&model_with(vec![xs])).is_empty());
    }

    #[test]
    fn dangling_material_id() {
        let mut m = model_with(vec![one_group(1.0, 0.1, 0.0)]);
        m.material_ids[1] = 3;
        assert!(check_model(&m).is_err());
    }

    #[test]
    fn upscatter_block_detection() {
        let xs = CrossSectionSet::non_fissile(
            vec![1.0; 3],
            vec![
                vec![0.1, 0.0, 0.0],
                vec![0.1, 0.2, 0.05],
                vec![0.0, 0.3, 0.4],
            ],
        )
        .unwrap();
        assert_eq!(xs.first_upscatter_group(), Some(1));
        let sub = xs.sub_block(1..3);
        assert_eq!(sub.scat_row(0), &[0.2, 0.05]);
    }
}
