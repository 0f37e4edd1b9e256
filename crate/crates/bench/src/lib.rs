//! Fixtures shared by the criterion benches.

use snkit_core::harness::{bench_configs, builtin_problem};
use snkit_core::{EigenConfig, ProblemModel};

/// Problems benchmarked by default: one 1D upscatter slab and the 2D box.
pub const BENCH_PROBLEMS: [&str; 3] = ["up3g", "dr95", "mini2d"];

pub fn problem(name: &str) -> ProblemModel {
    builtin_problem(name).unwrap_or_else(|| panic!("unknown built-in problem {name}"))
}

/// `(label, config)` pairs, labelled `solver` or `solver+precond`.
pub fn labelled_configs() -> Vec<(String, EigenConfig)> {
    bench_configs()
        .into_iter()
        .map(|c| {
            let label = match c.precondition {
                Some(p) => format!("{}+{}", c.solver.as_str(), p.label()),
                None => c.solver.as_str().to_string(),
            };
            (label, c)
        })
        .collect()
}
