use thiserror::Error;

/// Errors raised while parsing expression text.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte offset {offset}: {msg}")]
    Syntax { offset: usize, msg: String },
    #[error("unknown identifier `{name}` at byte offset {offset}")]
    UnknownIdent { name: String, offset: usize },
}

/// Errors raised by geometric evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("point {point:?} violates the domain of chart `{chart}`")]
    DomainViolation { chart: String, point: Vec<f64> },
    #[error("jet order {0} exceeds the supported maximum of 3")]
    OrderTooHigh(usize),
    #[error("metric is singular at {point:?} (|det| = {det:.3e})")]
    SingularMetric { point: Vec<f64>, det: f64 },
    #[error("metric does not have the declared {expected} signature at {point:?} (eigenvalue signs {signs:?})")]
    BadSignature {
        expected: String,
        point: Vec<f64>,
        signs: Vec<i8>,
    },
    #[error("V = span(k,t) is degenerate at {point:?} (|det A| = {det:.3e})")]
    DegenerateV { point: Vec<f64>, det: f64 },
    #[error("H = span(k,t)^perp is not positive definite at {point:?} (metric eigenvalue signs {signs:?})")]
    HNotSpacelike { point: Vec<f64>, signs: Vec<i8> },
    #[error("fields live on different charts: `{0}` vs `{1}`")]
    ChartMismatch(String, String),
    #[error("{quantity} is undefined at {point:?}: {reason}")]
    Undefined {
        quantity: String,
        point: Vec<f64>,
        reason: String,
    },
    #[error("hypothesis `{name}` fails (residual {residual:.3e} > {tol:.3e})")]
    HypothesisFailed {
        name: String,
        residual: f64,
        tol: f64,
    },
    #[error("frame pivot unstable near {point:?}: seed choice changed inside the evaluation neighborhood")]
    PivotUnstable { point: Vec<f64> },
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Errors raised while constructing or validating a catalog entry.
#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("invalid parameter for `{entry}`: {msg}")]
    BadParameter { entry: String, msg: String },
    #[error("validation of `{entry}` failed: {check} residual {residual:.3e} exceeds {tol:.3e}")]
    ValidationFailed {
        entry: String,
        check: String,
        residual: f64,
        tol: f64,
    },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Errors raised while reading a custom spacetime description file.
#[derive(Debug, Error)]
pub enum SpecFileError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Expr {
        line: usize,
        #[source]
        source: ExprError,
    },
    #[error("missing required section [{0}]")]
    MissingSection(&'static str),
    #[error("missing required key `{key}` in section [{section}]")]
    MissingKey {
        section: &'static str,
        key: &'static str,
    },
    #[error("io error: {0}")]
    Io(String),
}
