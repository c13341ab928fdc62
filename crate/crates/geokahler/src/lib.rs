//! geokahler builds Kahler metrics from semi-Riemannian 4-manifolds that
//! carry two distinguished vector fields, and verifies every numerically
//! checkable condition of the construction: admissibility of the almost
//! complex structure, integrability (Nijenhuis tensor), the positivity
//! region of the induced metric, curvature identities, and the closed-form
//! values attached to a catalog of classical spacetimes (Kerr, NUT, de
//! Sitter, plane waves, warped products, a solvable Lie group, SKR models).
//!
//! All derivatives are exact through truncated jet arithmetic of order at
//! most three; finite differences appear only as an independent oracle in
//! the `fd` module and the test suite.
//!
//! The crate is a library first: see the runnable programs under
//! `examples/` for one walk-through per major capability, and the thin
//! `geokahler` binary for batch verification with machine-readable output.

pub mod catalog;
pub mod chart;
pub mod curvature;
pub mod custom;
pub mod error;
pub mod expr;
pub mod fd;
pub mod fields;
pub mod jet;
pub mod jstruct;
pub mod kahler;
pub mod linalg;
pub mod optics;
pub mod output;
pub mod report;
pub mod sample;
pub mod tensor;

pub use chart::Chart;
pub use error::{CatalogError, ExprError, GeomError, SpecFileError};
pub use expr::{parse_expr, Expr, Params};
pub use fields::{
    MetricEval, MetricField, ScalarEval, ScalarField, Signature, VectorEval, VectorField,
};
pub use jet::Jet;
// pub use kahler::{KahlerCandidate, ParamFn};
pub use sample::{sample_points, SampleBox};

/// Version string echoed in reports.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default tolerance for jet-based residuals.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default tolerance for finite-difference comparisons.
pub const DEFAULT_FD_TOL: f64 = 1e-4;
