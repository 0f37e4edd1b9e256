//! Desk-scale multigroup discrete-ordinates k-eigenvalue toolkit.
//!
//! The crate is organized bottom-up:
//!
//! * [`xsmodel`]: cross sections, meshes, quadratures, and the text problem format.
//! * [`sweep`]: transport sweeps applying the inverse streaming-collision operator.
//! * [`operators`]: matrix-free multigroup operators over [`FluxVector`].
//! * [`krylov`]: restarted GMRES with right preconditioning.
//! * [`multigroup`]: Gauss-Seidel and block Krylov fixed-source solvers with energy sets.
//! * [`mge`]: the multigrid-in-energy right preconditioner.
//! * [`eigen`]: power iteration, Rayleigh quotient iteration, and Arnoldi.
//! * [`oracle`]: dense brute-force verification by operator probing.
//! * [`harness`]: built-in problems and run reports.

pub mod eigen;
pub mod error;
pub mod harness;
pub mod krylov;
pub mod mge;
pub mod multigroup;
pub mod operators;
pub mod oracle;
pub mod sweep;
pub mod xsmodel;

pub use eigen::{EigenConfig, EigenReport, EigenSolver};
pub use error::{Error, Result};
pub use krylov::{gmres, KrylovConfig, KrylovStats};
pub use mge::{GridHierarchy, MgeParams, MgePreconditioner};
pub use multigroup::{EnergySetLayout, MultigroupConfig, MultigroupMethod, Partitioning};
pub use operators::{FluxVector, Transport};
pub use sweep::SpatialScheme;
pub use xsmodel::{
    build_quadrature, validate_model, BoundaryCondition, Boundaries, CrossSectionSet, Diagnostic,
    ProblemModel, Quadrature, Severity,
};
