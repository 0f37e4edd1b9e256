mod support;

use support::run_property;

const CASES: u32 = 48;

fn check(name: &str) {
    if let Err(e) = run_property(name, CASES) {
        panic!("{name}: {e}");
    }
}

#[test]
fn sweep_balance() {
    check("sweep balance");
}

#[test]
fn step_scheme_positivity() {
    check("step-scheme positivity");
}

#[test]
fn operator_linearity() {
    check("operator linearity");
}

#[test]
fn gmres_residual_monotonicity() {
    check("gmres residual monotonicity");
}

#[test]
fn preconditioner_determinism() {
    check("preconditioner determinism");
}

#[test]
fn preconditioner_set_locality() {
    check("preconditioner set locality");
}
