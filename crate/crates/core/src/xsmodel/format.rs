//! Line-oriented problem file format.
//!
//! ```text
//! # two-group infinite medium
//! [mesh]
//! dim 1
//! nx 4 1.0
//! materials 0 0 0 0
//!
//! [material 0]
//! groups 2
//! sigma_t 1.0 1.2
//! chi 1 0
//! nu_sigma_f 0.2 0.9
//! scat_row 0 0.3 0.1
//! scat_row 1 0.4 0.5
//!
//! [boundary]
//! x_low reflecting
//! x_high reflecting
//!
//! [solver]
//! quadrature 8
//! scheme step_characteristic
//! ```
//!
//! Non-uniform meshes use `x_widths w0 w1 ...` (and `y_widths`) instead of
//! `nx`/`ny`. Fixed sources go in `[source]` as `group g v0 .. v(n-1)` or
//! `uniform g v`. Numbers are parsed with Rust's locale-independent `f64`
//! parser and written in shortest round-trip form.

use std::fmt::Write as _;
use std::path::Path;

use super::{Boundaries, CrossSectionSet, ProblemModel};
use crate::error::{Error, Result};
use crate::sweep::SpatialScheme;

#[derive(Default)]
struct MaterialDraft {
    groups: Option<usize>,
    sigma_t: Option<Vec<f64>>,
    chi: Option<Vec<f64>>,
    nu_sigma_f: Option<Vec<f64>>,
    rows: Vec<Option<Vec<f64>>>,
}

enum Section {
    None,
    Mesh,
    Material(usize),
    Boundary,
    Source,
    Solver,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_f64s(line: usize, toks: &[&str]) -> Result<Vec<f64>> {
    toks.iter()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| perr(line, format!("'{t}' is not a number")))
        })
        .collect()
}

fn parse_usize(line: usize, tok: Option<&&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| perr(line, format!("missing {what}")))?;
    tok.parse::<usize>()
        .map_err(|_| perr(line, format!("{what} '{tok}' is not a nonnegative integer")))
}

/// Parses the text of a problem file.
pub fn parse_problem(text: &str) -> Result<ProblemModel> {
    let mut section = Section::None;
    let mut dim: Option<usize> = None;
    let mut widths_x: Option<Vec<f64>> = None;
    let mut widths_y: Option<Vec<f64>> = None;
    let mut material_ids: Vec<usize> = Vec::new();
    let mut drafts: Vec<(usize, usize, MaterialDraft)> = Vec::new();
    let mut boundary = Boundaries::vacuum();
    let mut source_lines: Vec<(usize, usize, Vec<f64>, bool)> = Vec::new();
    let mut quadrature_order: Option<usize> = None;
    let mut scheme: Option<SpatialScheme> = None;

    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('[') {
            let header = header
                .strip_suffix(']')
                .ok_or_else(|| perr(ln, "unterminated section header"))?;
            let parts: Vec<&str> = header.split_whitespace().collect();
            section = match parts.as_slice() {
                ["mesh"] => Section::Mesh,
                ["material", id] => {
                    let id = parse_usize(ln, Some(id), "material id")?;
                    if drafts.iter().any(|(d, _, _)| *d == id) {
                        return Err(perr(ln, format!("material {id} defined twice")));
                    }
                    drafts.push((id, ln, MaterialDraft::default()));
                    Section::Material(drafts.len() - 1)
                }
                ["boundary"] => Section::Boundary,
                ["source"] => Section::Source,
                ["solver"] => Section::Solver,
                _ => return Err(perr(ln, format!("unknown section [{header}]"))),
            };
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let (key, args) = (toks[0], &toks[1..]);
        match &section {
            Section::None => return Err(perr(ln, "content before the first section")),
            Section::Mesh => match key {
                "dim" => dim = Some(parse_usize(ln, args.first(), "dimension")?),
                "nx" | "ny" => {
                    let n = parse_usize(ln, args.first(), "cell count")?;
                    let w = parse_f64s(ln, args.get(1..2).unwrap_or(&[]))?;
                    let w = *w.first().ok_or_else(|| perr(ln, "missing cell width"))?;
                    let v = Some(vec![w; n]);
                    if key == "nx" {
                        widths_x = v;
                    } else {
                        widths_y = v;
                    }
                }
                "x_widths" => widths_x = Some(parse_f64s(ln, args)?),
                "y_widths" => widths_y = Some(parse_f64s(ln, args)?),
                "materials" => {
                    for t in args {
                        material_ids.push(parse_usize(ln, Some(t), "material id")?);
                    }
                }
                _ => return Err(perr(ln, format!("unknown mesh key '{key}'"))),
            },
            Section::Material(i) => {
                let draft = &mut drafts[*i].2;
                match key {
                    "groups" => {
                        let g = parse_usize(ln, args.first(), "group count")?;
                        draft.groups = Some(g);
                        draft.rows = vec![None; g];
                    }
                    "sigma_t" => draft.sigma_t = Some(parse_f64s(ln, args)?),
                    "chi" => draft.chi = Some(parse_f64s(ln, args)?),
                    "nu_sigma_f" => draft.nu_sigma_f = Some(parse_f64s(ln, args)?),
                    "scat_row" => {
                        let g = parse_usize(ln, args.first(), "row index")?;
                        let slot = draft
                            .rows
                            .get_mut(g)
                            .ok_or_else(|| perr(ln, format!("scat_row {g} out of range (declare groups first)")))?;
                        *slot = Some(parse_f64s(ln, &args[1..])?);
                    }
                    _ => return Err(perr(ln, format!("unknown material key '{key}'"))),
                }
            }
            Section::Boundary => {
                let bc = args
                    .first()
                    .ok_or_else(|| perr(ln, "missing boundary condition"))?
                    .parse()
                    .map_err(|e: Error| perr(ln, e.to_string()))?;
                match key {
                    "x_low" => boundary.x_low = bc,
                    "x_high" => boundary.x_high = bc,
                    "y_low" => boundary.y_low = bc,
                    "y_high" => boundary.y_high = bc,
                    _ => return Err(perr(ln, format!("unknown face '{key}'"))),
                }
            }
            Section::Source => match key {
                "group" | "uniform" => {
                    let g = parse_usize(ln, args.first(), "group index")?;
                    let vals = parse_f64s(ln, &args[1..])?;
                    source_lines.push((ln, g, vals, key == "uniform"));
                }
                _ => return Err(perr(ln, format!("unknown source key '{key}'"))),
            },
            Section::Solver => match key {
                "quadrature" => quadrature_order = Some(parse_usize(ln, args.first(), "order")?),
                "scheme" => {
                    let s = args.first().ok_or_else(|| perr(ln, "missing scheme"))?;
                    scheme = Some(s.parse().map_err(|e: Error| perr(ln, e.to_string()))?);
                }
                _ => return Err(perr(ln, format!("unknown solver key '{key}'"))),
            },
        }
    }

    let dimension = dim.ok_or_else(|| perr(0, "[mesh] is missing 'dim'"))?;
    let cell_widths_x = widths_x.ok_or_else(|| perr(0, "[mesh] is missing 'nx' or 'x_widths'"))?;
    let cell_widths_y = if dimension == 2 {
        widths_y.ok_or_else(|| perr(0, "2D [mesh] is missing 'ny' or 'y_widths'"))?
    } else {
        Vec::new()
    };

    drafts.sort_by_key(|(id, _, _)| *id);
    let mut materials = Vec::with_capacity(drafts.len());
    for (expect, (id, ln, d)) in drafts.into_iter().enumerate() {
        if id != expect {
            return Err(perr(ln, format!("material ids must be 0..{}, found {id}", expect + 1)));
        }
        let g = d.groups.ok_or_else(|| perr(ln, "material is missing 'groups'"))?;
        let take = |v: Option<Vec<f64>>, name: &str| -> Result<Vec<f64>> {
            let v = v.ok_or_else(|| perr(ln, format!("material {id} is missing '{name}'")))?;
            if v.len() != g {
                return Err(perr(ln, format!("material {id}: '{name}' needs {g} values, got {}", v.len())));
            }
            Ok(v)
        };
        let sigma_t = take(d.sigma_t, "sigma_t")?;
        let nu_sigma_f = take(d.nu_sigma_f.or(Some(vec![0.0; g])), "nu_sigma_f")?;
        let chi = take(d.chi.or(Some(vec![0.0; g])), "chi")?;
        let rows = d
            .rows
            .into_iter()
            .enumerate()
            .map(|(r, row)| take(row, &format!("scat_row {r}")))
            .collect::<Result<Vec<_>>>()?;
        materials.push(CrossSectionSet::new(sigma_t, rows, nu_sigma_f, chi)?);
    }

    let n_cells = cell_widths_x.len() * if dimension == 2 { cell_widths_y.len() } else { 1 };
    let fixed_source = if source_lines.is_empty() {
        None
    } else {
        let groups = materials.first().map_or(0, |m| m.group_count);
        let mut q = vec![0.0; groups * n_cells];
        for (ln, g, vals, uniform) in source_lines {
            if g >= groups {
                return Err(perr(ln, format!("source group {g} out of range")));
            }
            let block = &mut q[g * n_cells..(g + 1) * n_cells];
            match (uniform, vals.len()) {
                (true, 1) => block.fill(vals[0]),
                (false, n) if n == n_cells => block.copy_from_slice(&vals),
                _ => return Err(perr(ln, format!("source row needs 1 (uniform) or {n_cells} values"))),
            }
        }
        Some(q)
    };

    let scheme = scheme.unwrap_or(if dimension == 2 {
        SpatialScheme::Step
    } else {
        SpatialScheme::StepCharacteristic
    });
    Ok(ProblemModel {
        dimension,
        cell_widths_x,
        cell_widths_y,
        material_ids,
        materials,
        quadrature_order: quadrature_order.unwrap_or(if dimension == 2 { 4 } else { 8 }),
        scheme,
        boundary,
        fixed_source,
    })
}

/// Reads and parses a problem file.
pub fn read_problem(path: impl AsRef<Path>) -> Result<ProblemModel> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

fn join(vals: &[f64]) -> String {
    vals.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
}

fn write_widths(out: &mut String, axis: &str, widths: &[f64]) {
    match widths.first() {
        Some(&w0) if widths.iter().all(|&w| w.to_bits() == w0.to_bits()) => {
            let _ = writeln!(out, "n{axis} {} {w0:?}", widths.len());
        }
        _ => {
            let _ = writeln!(out, "{axis}_widths {}", join(widths));
        }
    }
}

/// Serializes a model; `parse_problem(&write_problem(m))` reproduces `m`
/// bit for bit.
pub fn write_problem(model: &ProblemModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "[mesh]\ndim {}", model.dimension);
    write_widths(&mut out, "x", &model.cell_widths_x);
    if model.dimension == 2 {
        write_widths(&mut out, "y", &model.cell_widths_y);
    }
    let nx = model.nx().max(1);
    for row in model.material_ids.chunks(nx) {
        let ids: Vec<String> = row.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "materials {}", ids.join(" "));
    }
    for (id, m) in model.materials.iter().enumerate() {
        let _ = writeln!(out, "\n[material {id}]\ngroups {}", m.group_count);
        let _ = writeln!(out, "sigma_t {}", join(&m.sigma_t));
        let _ = writeln!(out, "chi {}", join(&m.chi));
        let _ = writeln!(out, "nu_sigma_f {}", join(&m.nu_sigma_f));
        for g in 0..m.group_count {
            let _ = writeln!(out, "scat_row {g} {}", join(m.scat_row(g)));
        }
    }
    let b = &model.boundary;
    let _ = writeln!(out, "\n[boundary]\nx_low {}\nx_high {}", b.x_low.as_str(), b.x_high.as_str());
    if model.dimension == 2 || !b.all_vacuum(2) {
        let _ = writeln!(out, "y_low {}\ny_high {}", b.y_low.as_str(), b.y_high.as_str());
    }
    if let Some(q) = &model.fixed_source {
        let n = model.cell_count();
        let _ = writeln!(out, "\n[source]");
        for (g, block) in q.chunks(n).enumerate() {
            let _ = writeln!(out, "group {g} {}", join(block));
        }
    }
    let _ = writeln!(
        out,
        "\n[solver]\nquadrature {}\nscheme {}",
        model.quadrature_order,
        model.scheme.as_str()
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::xsmodel::BoundaryCondition;

    const INF2G: &str = "\
# two-group infinite medium
[mesh]
dim 1
nx 1 10.0
materials 0
[material 0]
groups 2
sigma_t 1.0 1.2
chi 1 0
nu_sigma_f 0.2 0.9
scat_row 0 0.3 0.1
scat_row 1 0.4 0.5   # upscatter above the diagonal
[boundary]
x_low reflecting
x_high reflecting
";

    #[test]
    fn parses_sections_and_comments() {
        let m = parse_problem(INF2G).unwrap();
        assert_eq!(m.dimension, 1);
        assert_eq!(m.cell_widths_x, vec![10.0]);
        assert_eq!(m.materials[0].scat(0, 1), 0.1);
        assert_eq!(m.boundary.x_high, BoundaryCondition::Reflecting);
        assert_eq!(m.quadrature_order, 8);
        assert_eq!(m.scheme, SpatialScheme::StepCharacteristic);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = INF2G.replace("sigma_t 1.0 1.2", "sigma_t 1.0 x");
        match parse_problem(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_problem("[mesh]\ndim 1\nbogus 3\n").is_err());
    }

    #[test]
    fn nonuniform_mesh_and_source_round_trip() {
        let mut m = parse_problem(INF2G).unwrap();
        m.cell_widths_x = vec![0.1, 0.30000000000000004, 1e-3];
        m.material_ids = vec![0; 3];
        m.fixed_source = Some(vec![1.0, 2.5, 0.0, 0.125, 0.0, 3.0]);
        let text = write_problem(&m);
        assert_eq!(parse_problem(&text).unwrap(), m);
    }
}
