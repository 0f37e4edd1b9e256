//! Matrix-free multigroup operators over group-major scalar-flux vectors:
//! scattering `S`, fission `F = chi f^T`, the transport-and-moment map `TM`,
//! the fixed-source operator `I - TM(S + rho F)`, and the Rayleigh quotient.

use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::sweep::Sweeper;
use crate::xsmodel::{build_quadrature, check_model, ProblemModel, Quadrature};

/// Group-major scalar flux: group `g` occupies `values[g * cells..(g + 1) * cells]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxVector {
    pub groups: usize,
    pub cells: usize,
    pub values: Vec<f64>,
}

impl FluxVector {
    pub fn zeros(groups: usize, cells: usize) -> Self {
        Self {
            groups,
            cells,
            values: vec![0.0; groups * cells],
        }
    }

    pub fn from_values(groups: usize, cells: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != groups * cells {
            return Err(shape(format!(
                "flux has {} entries, expected {groups} x {cells}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("flux contains non-finite values".into()));
        }
        Ok(Self { groups, cells, values })
    }

    pub fn group(&self, g: usize) -> &[f64] {
        &self.values[g * self.cells..(g + 1) * self.cells]
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.values)
    }
}

/// Matrix-free operators for one problem. Owns the sweep data.
#[derive(Debug, Clone)]
pub struct Transport {
    model: ProblemModel,
    sweeper: Sweeper,
    groups: usize,
    cells: usize,
}

impl Transport {
    /// Validates the model and builds its quadrature.
    pub fn new(model: ProblemModel) -> Result<Self> {
        for w in check_model(&model)? {
            log::debug!("{}", w.message);
        }
        let quadrature = build_quadrature(model.dimension, model.quadrature_order)?;
        Self::with_quadrature(model, &quadrature)
    }

    /// Skips physics validation (collapsed coarse-grid data need not satisfy
    /// the spectrum invariant of a full group structure).
    pub(crate) fn with_quadrature(model: ProblemModel, quadrature: &Quadrature) -> Result<Self> {
        let sweeper = Sweeper::new(&model, quadrature, model.scheme)?;
        Ok(Self {
            groups: model.group_count(),
            cells: model.cell_count(),
            model,
            sweeper,
        })
    }

    pub fn model(&self) -> &ProblemModel {
        &self.model
    }

    pub fn quadrature(&self) -> &Quadrature {
        self.sweeper.quadrature()
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    /// Length of a multigroup flux vector.
    pub fn len(&self) -> usize {
        self.groups * self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_len(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.len() {
            return Err(shape(format!(
                "vector has {} entries, operator expects {}",
                v.len(),
                self.len()
            )));
        }
        Ok(())
    }

    /// `f^T phi` per cell, summed over groups in ascending order.
    pub fn fission_density(&self, phi: &[f64]) -> Vec<f64> {
        self.block_fission_density(phi, 0..self.groups)
    }

    /// Fission density of a block vector holding the groups `block` only.
    pub(crate) fn block_fission_density(&self, phi: &[f64], block: Range<usize>) -> Vec<f64> {
        let n = self.cells;
        (0..n)
            .map(|c| {
                let xs = self.model.cell_material(c);
                block
                    .clone()
                    .enumerate()
                    .fold(0.0, |acc, (k, g)| acc + xs.nu_sigma_f[g] * phi[k * n + c])
            })
            .collect()
    }

    /// Emission into group `into` from the flux of groups `from`:
    /// scattering plus `shift * chi * density`. `phi` holds groups starting
    /// at `base`.
    ///
    /// Every operator goes through this routine so the summation order is the
    /// same wherever a group's emission is formed.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn emission(
        &self,
        phi: &[f64],
        base: usize,
        into: usize,
        from: Range<usize>,
        shift: f64,
        density: Option<&[f64]>,
        out: &mut [f64],
    ) {
        let n = self.cells;
        for (c, o) in out.iter_mut().enumerate() {
            let xs = self.model.cell_material(c);
            let row = xs.scat_row(into);
            let mut acc = 0.0;
            for gp in from.clone() {
                acc += row[gp] * phi[(gp - base) * n + c];
            }
            if let Some(d) = density {
                acc += shift * (xs.chi[into] * d[c]);
            }
            *o = acc;
        }
    }

    /// `S phi` restricted to the rows `into` and columns `from`; the result holds
    /// `into.len()` groups.
    pub fn apply_scatter(&self, phi: &[f64], from: Range<usize>, into: Range<usize>) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        if from.end > self.groups || into.end > self.groups {
            return Err(shape("group range exceeds the group count"));
        }
        let n = self.cells;
        let mut out = vec![0.0; into.len() * n];
        for (k, g) in into.enumerate() {
            self.emission(phi, 0, g, from.clone(), 0.0, None, &mut out[k * n..(k + 1) * n]);
        }
        Ok(out)
    }

    /// `F phi = chi (f^T phi)`.
    pub fn apply_fission(&self, phi: &[f64]) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        let n = self.cells;
        let d = self.fission_density(phi);
        let mut out = vec![0.0; self.len()];
        for g in 0..self.groups {
            for c in 0..n {
                out[g * n + c] = self.model.cell_material(c).chi[g] * d[c];
            }
        }
        Ok(out)
    }

    /// `(S + shift F) phi` over all groups.
    pub fn apply_emission(&self, phi: &[f64], shift: f64) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        let n = self.cells;
        let d = (shift != 0.0).then(|| self.fission_density(phi));
        let mut out = vec![0.0; self.len()];
        for (g, o) in out.chunks_mut(n).enumerate() {
            self.emission(phi, 0, g, 0..self.groups, shift, d.as_deref(), o);
        }
        Ok(out)
    }

    /// Sweeps one group with an isotropic source and returns its scalar flux.
    pub fn apply_tm_group(&self, group: usize, source: &[f64], out: &mut [f64]) {
        self.sweeper.sweep_isotropic(group, source, out);
    }

    /// `TM q`, group by group (groups in parallel).
    pub fn apply_tm(&self, q: &[f64]) -> Result<Vec<f64>> {
        self.check_len(q)?;
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("source contains non-finite values".into()));
        }
        let n = self.cells;
        let mut out = vec![0.0; self.len()];
        out.par_chunks_mut(n)
            .zip(q.par_chunks(n))
            .enumerate()
            .for_each(|(g, (o, src))| self.apply_tm_group(g, src, o));
        Ok(out)
    }

    /// `phi - TM (S + shift F) phi`.
    pub fn apply_a(&self, phi: &[f64], shift: f64) -> Result<Vec<f64>> {
        let e = self.apply_emission(phi, shift)?;
        let tme = self.apply_tm(&e)?;
        Ok(phi.iter().zip(&tme).map(|(p, t)| p - t).collect())
    }

    /// `TM F phi`.
    pub fn apply_tmf(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let f = self.apply_fission(phi)?;
        self.apply_tm(&f)
    }

    /// `<phi, (I - TMS) phi> / <phi, TMF phi>` with the Euclidean product.
    pub fn rayleigh_quotient(&self, phi: &[f64]) -> Result<f64> {
        let a = self.apply_a(phi, 0.0)?;
        let b = self.apply_tmf(phi)?;
        rayleigh_ratio(phi, &a, &b)
    }
}

/// `<x, ax> / <x, bx>`, rejecting a vanishing denominator.
pub fn rayleigh_ratio(x: &[f64], ax: &[f64], bx: &[f64]) -> Result<f64> {
    let den = dot(x, bx);
    if den.abs() < 1e-300 {
        return Err(Error::NonFissile(den));
    }
    Ok(dot(x, ax) / den)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xsmodel::{Boundaries, CrossSectionSet};

    fn two_group_cell() -> Transport {
        let xs = CrossSectionSet::new(
            vec![1.0, 1.2],
            vec![vec![0.3, 0.1], vec![0.4, 0.5]],
            vec![0.0, 0.6],
            vec![1.0, 0.0],
        )
        .unwrap();
        let m = ProblemModel::slab(vec![1.0], vec![0], vec![xs], 2, Boundaries::reflecting());
        Transport::new(m).unwrap()
    }

    #[test]
    fn scatter_two_by_two() {
        let t = two_group_cell();
        let s = t.apply_scatter(&[1.0, 2.0], 0..2, 0..2).unwrap();
        assert!((s[0] - 0.5).abs() < 1e-15 && (s[1] - 1.4).abs() < 1e-15);
    }

    #[test]
    fn fission_outer_product() {
        let t = two_group_cell();
        let f = t.apply_fission(&[1.0, 2.0]).unwrap();
        assert!((f[0] - 1.2).abs() < 1e-15);
        assert_eq!(f[1], 0.0);
    }

    #[test]
    fn infinite_medium_transport_is_division_by_sigma_t() {
        let xs = CrossSectionSet::non_fissile(vec![1.0], vec![vec![0.0]]).unwrap();
        let m = ProblemModel::slab(vec![0.7; 3], vec![0; 3], vec![xs], 4, Boundaries::reflecting());
        let t = Transport::new(m).unwrap();
        for v in t.apply_tm(&[1.0; 3]).unwrap() {
            assert!((v - 1.0).abs() < 1e-11);
        }
    }

    #[test]
    fn zero_scattering_operator_is_identity() {
        let xs = CrossSectionSet::non_fissile(vec![1.0, 2.0], vec![vec![0.0; 2]; 2]).unwrap();
        let m = ProblemModel::slab(vec![1.0; 3], vec![0; 3], vec![xs], 4, Boundaries::vacuum());
        let t = Transport::new(m).unwrap();
        let phi = [1.0, -2.0, 3.0, 0.5, 0.25, 4.0];
        assert_eq!(t.apply_a(&phi, 0.0).unwrap(), phi.to_vec());
    }

    #[test]
    fn infinite_medium_eigenvector_quotient() {
        let xs = CrossSectionSet::new(vec![1.0], vec![vec![0.5]], vec![0.6], vec![1.0]).unwrap();
        let m = ProblemModel::slab(vec![1.0; 4], vec![0; 4], vec![xs], 8, Boundaries::reflecting());
        let t = Transport::new(m).unwrap();
        let rq = t.rayleigh_quotient(&[0.5; 4]).unwrap();
        assert!((rq - 1.0 / 1.2).abs() < 1e-10, "{rq}");
    }

    #[test]
    fn non_fissile_quotient_is_an_error() {
        let xs = CrossSectionSet::non_fissile(vec![1.0], vec![vec![0.5]]).unwrap();
        let m = ProblemModel::slab(vec![1.0; 2], vec![0; 2], vec![xs], 2, Boundaries::vacuum());
        let t = Transport::new(m).unwrap();
        assert!(matches!(t.rayleigh_quotient(&[1.0, 1.0]), Err(Error::NonFissile(_))));
    }

    #[test]
    fn dense_surrogate_quotients() {
        let x = [1.0, 1.0];
        let ax = [2.0, 1.0];
        assert_eq!(rayleigh_ratio(&x, &ax, &x).unwrap(), 1.5);
        assert_eq!(rayleigh_ratio(&[1.0, 0.0], &[2.0, 0.0], &[1.0, 0.0]).unwrap(), 2.0);
    }
}
