//! Built-in problem library.

use crate::sweep::SpatialScheme;
use crate::xsmodel::{BoundaryCondition, Boundaries, CrossSectionSet, ProblemModel};

pub const BUILTIN_NAMES: [&str; 7] = ["inf1g", "inf2g", "slab_vac", "up3g", "up4g", "dr95", "mini2d"];

pub fn builtin_problem(name: &str) -> Option<ProblemModel> {
    Some(match name {
        "inf1g" => inf1g(),
        "inf2g" => inf2g(),
        "slab_vac" => slab_vac(),
        "up3g" => up3g(),
        "up4g" => up4g(),
        "dr95" => dr95(),
        "mini2d" => mini2d(),
        _ => return None,
    })
}

pub fn builtin_problems() -> Vec<(&'static str, ProblemModel)> {
    BUILTIN_NAMES
        .iter()
        .map(|&n| (n, builtin_problem(n).expect("listed names are defined")))
        .collect()
}

fn xs(sigma_t: &[f64], scat: &[&[f64]], nu_sigma_f: &[f64], chi: &[f64]) -> CrossSectionSet {
    CrossSectionSet::new(
        sigma_t.to_vec(),
        scat.iter().map(|r| r.to_vec()).collect(),
        nu_sigma_f.to_vec(),
        chi.to_vec(),
    )
    .expect("built-in data is consistent")
}

fn reflecting_slab() -> Boundaries {
    Boundaries {
        x_low: BoundaryCondition::Reflecting,
        x_high: BoundaryCondition::Reflecting,
        ..Boundaries::vacuum()
    }
}

/// One group, k = 0.6 / 0.5.
pub fn inf1g() -> ProblemModel {
    let m = xs(&[1.0], &[&[0.5]], &[0.6], &[1.0]);
    ProblemModel::slab(vec![1.0; 4], vec![0; 4], vec![m], 8, reflecting_slab())
}

/// Two groups with upscatter, k = 10/9.
pub fn inf2g() -> ProblemModel {
    let m = xs(&[1.0, 1.2], &[&[0.3, 0.1], &[0.4, 0.5]], &[0.2, 0.9], &[1.0, 0.0]);
    ProblemModel::slab(vec![1.0; 4], vec![0; 4], vec![m], 8, reflecting_slab())
}

/// Ten-cell one-group vacuum slab.
pub fn slab_vac() -> ProblemModel {
    let m = xs(&[1.0], &[&[0.5]], &[0.6], &[1.0]);
    ProblemModel::slab(vec![1.0; 10], vec![0; 10], vec![m], 8, Boundaries::vacuum())
}

/// Three groups with strong thermal upscatter in a vacuum slab.
pub fn up3g() -> ProblemModel {
    let m = xs(
        &[1.0, 1.5, 2.0],
        &[&[0.30, 0.05, 0.00], &[0.50, 0.70, 0.30], &[0.05, 0.60, 1.60]],
        &[0.018, 0.09, 0.22],
        &[1.0, 0.0, 0.0],
    );
    ProblemModel::slab(vec![0.5; 20], vec![0; 20], vec![m], 8, Boundaries::vacuum())
}

/// Four-group variant of `up3g`.
pub fn up4g() -> ProblemModel {
    let m = xs(
        &[1.0, 1.3, 1.6, 2.0],
        &[
            &[0.30, 0.02, 0.00, 0.00],
            &[0.45, 0.55, 0.10, 0.02],
            &[0.05, 0.50, 1.00, 0.30],
            &[0.00, 0.05, 0.40, 1.60],
        ],
        &[0.02, 0.06, 0.15, 0.25],
        &[0.9, 0.1, 0.0, 0.0],
    );
    ProblemModel::slab(vec![0.5; 16], vec![0; 16], vec![m], 8, Boundaries::vacuum())
}

/// Two unequal fissile slabs separated by an absorber: a high dominance ratio.
pub fn dr95() -> ProblemModel {
    let fuel = xs(
        &[0.6, 1.2],
        &[&[0.40, 0.00], &[0.18, 1.10]],
        &[0.004, 0.117],
        &[1.0, 0.0],
    );
    let absorber = xs(&[0.8, 1.5], &[&[0.60, 0.00], &[0.15, 1.30]], &[0.0, 0.0], &[0.0, 0.0]);
    let mut ids = vec![0; 24];
    ids.extend(vec![1; 6]);
    ids.extend(vec![0; 20]);
    ProblemModel::slab(vec![1.0; 50], ids, vec![fuel, absorber], 8, Boundaries::vacuum())
}

/// 8 x 8 cells, four groups, a fuel island in a moderator.
pub fn mini2d() -> ProblemModel {
    let fuel = xs(
        &[0.5, 0.9, 1.2, 1.5],
        &[
            &[0.25, 0.00, 0.00, 0.00],
            &[0.15, 0.60, 0.01, 0.00],
            &[0.02, 0.20, 0.80, 0.10],
            &[0.00, 0.01, 0.25, 1.00],
        ],
        &[0.02, 0.04, 0.20, 0.60],
        &[0.8, 0.2, 0.0, 0.0],
    );
    let moderator = xs(
        &[0.6, 1.1, 1.6, 2.2],
        &[
            &[0.30, 0.00, 0.00, 0.00],
            &[0.25, 0.75, 0.02, 0.00],
            &[0.03, 0.30, 1.10, 0.15],
            &[0.00, 0.02, 0.45, 2.00],
        ],
        &[0.0; 4],
        &[0.0; 4],
    );
    let (nx, ny) = (8, 8);
    let ids = (0..nx * ny)
        .map(|c| {
            let (i, j) = (c % nx, c / nx);
            usize::from(!((2..6).contains(&i) && (2..6).contains(&j)))
        })
        .collect();
    ProblemModel {
        dimension: 2,
        cell_widths_x: vec![2.0; nx],
        cell_widths_y: vec![2.0; ny],
        material_ids: ids,
        materials: vec![fuel, moderator],
        quadrature_order: 4,
        scheme: SpatialScheme::Step,
        boundary: Boundaries::uniform(BoundaryCondition::Vacuum),
        fixed_source: None,
    }
}
