//! Property checks shared by the property test target and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use snkit_core::krylov::{gmres, KrylovConfig};
use snkit_core::multigroup::EnergySetLayout;
use snkit_core::sweep::{sweep_group, AngularSource};
use snkit_core::xsmodel::SUPPORTED_2D_ORDERS;
use snkit_core::{
    build_quadrature, BoundaryCondition, Boundaries, CrossSectionSet, MgeParams, MgePreconditioner, ProblemModel,
    SpatialScheme, Transport,
};

pub const PROPERTIES: [&str; 6] = [
    "sweep balance",
    "step-scheme positivity",
    "operator linearity",
    "gmres residual monotonicity",
    "preconditioner determinism",
    "preconditioner set locality",
];

pub fn runner(cases: u32) -> TestRunner {
    let cfg = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(cfg, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

/// Runs one named property for `cases` deterministic cases.
pub fn run_property(name: &str, cases: u32) -> Result<(), String> {
    let mut r = runner(cases);
    fn text<T: std::fmt::Debug>(r: Result<(), proptest::test_runner::TestError<T>>) -> Result<(), String> {
        r.map_err(|e| e.to_string())
    }
    match name {
        "sweep balance" => text(r.run(&sweep_case(), |c| check_balance(&c))),
        "step-scheme positivity" => text(r.run(&(sweep_case(), any::<bool>()), |(c, step)| check_positivity(&c, step))),
        "operator linearity" => text(r.run(&(model_strategy(1..4), any::<u64>()), |(m, seed)| check_linearity(&m, seed))),
        "gmres residual monotonicity" => text(r.run(&dense_case(), |(a, b, m)| check_gmres_monotone(&a, &b, m))),
        "preconditioner determinism" => {
            text(r.run(&(model_strategy(2..7), 1usize..4), |(m, sets)| check_mge_determinism(&m, sets)))
        }
        "preconditioner set locality" => {
            text(r.run(&(model_strategy(4..9), 2usize..4), |(m, sets)| check_mge_locality(&m, sets)))
        }
        other => Err(format!("unknown property '{other}'")),
    }
}

/// Single-group problem and a per-angle source.
#[derive(Debug, Clone)]
pub struct SweepCase {
    pub model: ProblemModel,
    pub source: Vec<f64>,
}

fn scheme_strategy() -> impl Strategy<Value = SpatialScheme> {
    prop_oneof![
        Just(SpatialScheme::StepCharacteristic),
        Just(SpatialScheme::Step),
        Just(SpatialScheme::Diamond)
    ]
}

/// Step characteristic exists only in 1D.
fn for_dimension(scheme: SpatialScheme, dim: usize) -> SpatialScheme {
    if dim == 2 && scheme == SpatialScheme::StepCharacteristic {
        SpatialScheme::Step
    } else {
        scheme
    }
}

fn mesh_strategy() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>, usize)> {
    prop_oneof![
        (prop::collection::vec(0.05f64..3.0, 1..12), prop::sample::select(vec![2usize, 4, 8, 16]))
            .prop_map(|(wx, order)| (1, wx, Vec::new(), order)),
        (
            prop::collection::vec(0.1f64..2.0, 1..5),
            prop::collection::vec(0.1f64..2.0, 1..5),
            prop::sample::select(SUPPORTED_2D_ORDERS.to_vec())
        )
            .prop_map(|(wx, wy, order)| (2, wx, wy, order)),
    ]
}

fn sweep_case() -> impl Strategy<Value = SweepCase> {
    (mesh_strategy(), scheme_strategy(), 0.01f64..5.0, any::<u64>()).prop_flat_map(
        |((dim, wx, wy, order), scheme, sigma, _)| {
            let cells = wx.len() * wy.len().max(1);
            let angles = build_quadrature(dim, order).unwrap().len();
            let xs = CrossSectionSet::non_fissile(vec![sigma], vec![vec![0.0]]).unwrap();
            let model = ProblemModel {
                dimension: dim,
                cell_widths_x: wx,
                cell_widths_y: wy,
                material_ids: vec![0; cells],
                materials: vec![xs],
                quadrature_order: order,
                scheme: for_dimension(scheme, dim),
                boundary: Boundaries::vacuum(),
                fixed_source: None,
            };
            prop::collection::vec(0.0f64..10.0, angles * cells).prop_map(move |source| SweepCase {
                model: model.clone(),
                source,
            })
        },
    )
}

/// Removal inside the domain equals net outflow through the boundary.
pub fn check_balance(c: &SweepCase) -> Result<(), TestCaseError> {
    let m = &c.model;
    let quad = build_quadrature(m.dimension, m.quadrature_order).unwrap();
    let (nx, ny) = (m.nx(), m.ny());
    let n = nx * ny;
    let src = AngularSource {
        groups: 1,
        angles: quad.len(),
        cells: n,
        values: c.source.clone(),
    };
    let f = sweep_group(m, &quad, 0, &src, m.scheme).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let sigma = m.materials[0].sigma_t[0];
    let area = |cell: usize| m.cell_widths_x[cell % nx] * if m.dimension == 2 { m.cell_widths_y[cell / nx] } else { 1.0 };
    let (mut removal, mut scale) = (0.0, 0.0);
    for a in 0..quad.len() {
        for cell in 0..n {
            let q = c.source[a * n + cell];
            removal += quad.weights[a] * area(cell) * (q - sigma * f.psi[a * n + cell]);
            scale += quad.weights[a] * area(cell) * q;
        }
    }
    let mut leak = 0.0;
    let ex = (nx + 1) * ny;
    for a in 0..quad.len() {
        let (mu, w) = (quad.mu[a], quad.weights[a]);
        for j in 0..ny {
            let dy = if m.dimension == 2 { m.cell_widths_y[j] } else { 1.0 };
            let out = if mu > 0.0 { j * (nx + 1) + nx } else { j * (nx + 1) };
            leak += w * mu.abs() * dy * f.edge_x[a * ex + out];
        }
        if m.dimension == 2 {
            let eta = quad.eta[a];
            let ey = nx * (ny + 1);
            for i in 0..nx {
                let out = if eta > 0.0 { ny * nx + i } else { i };
                leak += w * eta.abs() * m.cell_widths_x[i] * f.edge_y[a * ey + out];
            }
        }
    }
    let err = (removal - leak).abs() / scale.max(f64::MIN_POSITIVE);
    prop_assert!(err <= 1e-13, "imbalance {err:e} ({:?})", m.scheme);
    Ok(())
}

/// Step and step-characteristic fluxes are nonnegative for nonnegative sources.
pub fn check_positivity(c: &SweepCase, step: bool) -> Result<(), TestCaseError> {
    let mut m = c.model.clone();
    m.scheme = for_dimension(
        if step { SpatialScheme::Step } else { SpatialScheme::StepCharacteristic },
        m.dimension,
    );
    m.boundary = Boundaries {
        x_low: BoundaryCondition::Reflecting,
        ..Boundaries::vacuum()
    };
    let quad = build_quadrature(m.dimension, m.quadrature_order).unwrap();
    let src = AngularSource {
        groups: 1,
        angles: quad.len(),
        cells: m.cell_count(),
        values: c.source.clone(),
    };
    let f = sweep_group(&m, &quad, 0, &src, m.scheme).map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert!(f.psi.iter().chain(&f.edge_x).chain(&f.edge_y).all(|&v| v >= 0.0));
    prop_assert!(f.scalar.iter().all(|&v| v >= 0.0));
    Ok(())
}

/// Random multigroup material: column scattering ratios below one, random
/// upscatter, optional fission.
fn xs_strategy(groups: usize) -> impl Strategy<Value = CrossSectionSet> {
    (
        prop::collection::vec(0.2f64..3.0, groups),
        prop::collection::vec(0.0f64..1.0, groups * groups),
        prop::collection::vec(0.1f64..0.95, groups),
        prop::collection::vec(0.0f64..0.5, groups),
        prop::collection::vec(0.0f64..1.0, groups),
    )
        .prop_map(move |(sigma_t, raw, ratio, nu, chi_raw)| {
            let mut rows = vec![vec![0.0; groups]; groups];
            for from in 0..groups {
                let col: f64 = (0..groups).map(|to| raw[to * groups + from]).sum::<f64>().max(1e-12);
                for (to, row) in rows.iter_mut().enumerate() {
                    row[from] = ratio[from] * sigma_t[from] * raw[to * groups + from] / col;
                }
            }
            let nu_sigma_f: Vec<f64> = nu.iter().zip(&sigma_t).map(|(v, s)| v * s).collect();
            let total: f64 = chi_raw.iter().sum::<f64>().max(1e-12);
            let chi = chi_raw.iter().map(|c| c / total).collect();
            CrossSectionSet::new(sigma_t, rows, nu_sigma_f, chi).unwrap()
        })
}

pub fn model_strategy(groups: std::ops::Range<usize>) -> impl Strategy<Value = ProblemModel> {
    (groups, 1usize..3).prop_flat_map(|(g, dim)| {
        let mats = prop::collection::vec(xs_strategy(g), 1..3);
        let mesh = if dim == 1 {
            (prop::collection::vec(0.2f64..2.0, 2..8), Just(Vec::new())).boxed()
        } else {
            (prop::collection::vec(0.3f64..2.0, 2..4), prop::collection::vec(0.3f64..2.0, 2..4)).boxed()
        };
        (mats, mesh, scheme_strategy(), any::<bool>(), any::<u64>()).prop_map(
            move |(materials, (wx, wy), scheme, reflect, seed)| {
                let cells = wx.len() * wy.len().max(1);
                let ids = (0..cells).map(|c| (seed as usize >> (c % 32)) % materials.len()).collect();
                let boundary = if reflect && dim == 1 {
                    Boundaries {
                        x_low: BoundaryCondition::Reflecting,
                        ..Boundaries::vacuum()
                    }
                } else {
                    Boundaries::vacuum()
                };
                ProblemModel {
                    dimension: dim,
                    cell_widths_x: wx,
                    cell_widths_y: wy,
                    material_ids: ids,
                    materials,
                    quadrature_order: if dim == 1 { 4 } else { 2 },
                    scheme: for_dimension(scheme, dim),
                    boundary,
                    fixed_source: None,
                }
            },
        )
    })
}

fn seeded_vector(len: usize, seed: u64) -> Vec<f64> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}

/// `A(ax + by) = a A x + b A y` for the loss, production and shifted operators.
pub fn check_linearity(model: &ProblemModel, seed: u64) -> Result<(), TestCaseError> {
    let t = Transport::new(model.clone()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let d = t.len();
    let x = seeded_vector(d, seed);
    let y = seeded_vector(d, seed.wrapping_add(1));
    let (a, b) = (1.7, -0.6);
    let z: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
    let ops: [(&str, Box<dyn Fn(&[f64]) -> Vec<f64>>); 4] = [
        ("loss", Box::new(|v: &[f64]| t.apply_a(v, 0.0).unwrap())),
        ("shifted", Box::new(|v: &[f64]| t.apply_a(v, 0.8).unwrap())),
        ("production", Box::new(|v: &[f64]| t.apply_tmf(v).unwrap())),
        ("transport", Box::new(|v: &[f64]| t.apply_tm(v).unwrap())),
    ];
    for (name, op) in &ops {
        let (az, ax, ay) = (op(&z), op(&x), op(&y));
        let combo: Vec<f64> = ax.iter().zip(&ay).map(|(p, q)| a * p + b * q).collect();
        let err = rel_diff(&az, &combo);
        prop_assert!(err <= 1e-12, "{name}: {err:e}");
    }
    Ok(())
}

fn dense_case() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, usize)> {
    (2usize..21, 1usize..12).prop_flat_map(|(d, m)| {
        (
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, d), d),
            prop::collection::vec(-1.0f64..1.0, d),
            Just(m),
        )
            .prop_map(move |(mut a, b, m)| {
                let s = 0.5 / (d as f64).sqrt();
                for (i, row) in a.iter_mut().enumerate() {
                    row.iter_mut().for_each(|v| *v *= s);
                    row[i] += 1.0;
                }
                (a, b, m)
            })
    })
}

/// Residual estimates never increase inside a restart cycle; a single cycle
/// spanning the whole space is exact.
pub fn check_gmres_monotone(a: &[Vec<f64>], b: &[f64], restart: usize) -> Result<(), TestCaseError> {
    let d = b.len();
    let op = |x: &[f64], y: &mut [f64]| {
        for (yi, row) in y.iter_mut().zip(a) {
            *yi = row.iter().zip(x).map(|(p, q)| p * q).sum();
        }
    };
    let cfg = KrylovConfig {
        restart,
        tolerance: 1e-12,
        max_iterations: 400,
    };
    let (_, stats) = gmres(&op, b, None, &cfg, None);
    for cycle in &stats.residual_history {
        for w in cycle.windows(2) {
            prop_assert!(w[1] <= w[0], "residual rose from {} to {}", w[0], w[1]);
        }
    }
    let full = KrylovConfig {
        restart: d,
        tolerance: 1e-12,
        max_iterations: d,
    };
    let (x, stats) = gmres(&op, b, None, &full, None);
    let mut r = vec![0.0; d];
    op(&x, &mut r);
    let res = rel_diff(&r, b);
    prop_assert!(stats.iterations <= d);
    prop_assert!(res <= 1e-10, "full-space residual {res:e}");
    Ok(())
}

fn preconditioner(model: &ProblemModel, sets: usize) -> Result<(Transport, MgePreconditioner), TestCaseError> {
    let t = Transport::new(model.clone()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let g = t.groups();
    let layout = EnergySetLayout::new(0..g, sets.min(g)).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let p = MgePreconditioner::new(&t, layout, MgeParams::default()).map_err(|e| TestCaseError::fail(e.to_string()))?;
    Ok((t, p))
}

/// Two preconditioners built alike give bitwise-equal output, call after call.
pub fn check_mge_determinism(model: &ProblemModel, sets: usize) -> Result<(), TestCaseError> {
    let (t, p) = preconditioner(model, sets)?;
    let (_, q) = preconditioner(model, sets)?;
    let y = seeded_vector(t.len(), 11);
    let first = p.apply(&y);
    prop_assert!(first.iter().all(|v| v.is_finite()));
    prop_assert_eq!(first.clone(), p.apply(&y));
    prop_assert_eq!(first, q.apply(&y));
    Ok(())
}

/// Each set's output depends only on that set's input.
pub fn check_mge_locality(model: &ProblemModel, sets: usize) -> Result<(), TestCaseError> {
    let (t, p) = preconditioner(model, sets)?;
    let n = t.cells();
    let y = seeded_vector(t.len(), 5);
    let base = p.apply(&y);
    for (s, range) in p.layout().sets.iter().enumerate() {
        let mut z = y.clone();
        for (g, chunk) in z.chunks_mut(n).enumerate() {
            if !range.contains(&g) {
                chunk.iter_mut().for_each(|v| *v = 3.0 * *v + 1.0);
            }
        }
        let out = p.apply(&z);
        let own = range.start * n..range.end * n;
        prop_assert_eq!(&out[own.clone()], &base[own], "set {} changed", s);
    }
    Ok(())
}
