//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by mesh ingestion, operator assembly, the curvature
/// solvers, and the triple-junction matcher.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed mesh file: {0}")]
    MeshFormat(String),

    #[error("non-manifold edge ({a}, {b}) with {count} incident faces")]
    NonManifoldEdge { a: usize, b: usize, count: usize },

    #[error("non-manifold vertex {0}: incident faces do not form a single fan")]
    NonManifoldVertex(usize),

    #[error("zero boundary components")]
    NoBoundary,

    #[error("more than one boundary component ({0} loops)")]
    MultipleBoundaries(usize),

    #[error("mesh is not connected")]
    NotConnected,

    #[error("inconsistent triangle orientation at edge ({a}, {b})")]
    InconsistentOrientation { a: usize, b: usize },

    #[error("triangle {tri} violates the strict triangle inequality (lengths {l0}, {l1}, {l2})")]
    TriangleInequality {
        tri: usize,
        l0: f64,
        l1: f64,
        l2: f64,
    },

    #[error("degenerate triangle {tri}: area {area:e} below {threshold:e} of mean area {mean:e}")]
    DegenerateTriangle {
        tri: usize,
        area: f64,
        mean: f64,
        threshold: f64,
    },

    #[error("mesh generation failed: {0}")]
    Generator(String),

    #[error("inadmissible curvature target (k = {k}, c = {c}): requires k <= 0 and c < sqrt(-k), with c < 0 when k = 0")]
    InadmissibleTarget { k: f64, c: f64 },

    #[error("no constant-curvature metric with k <= 0, c <= 0 exists on a surface with Euler characteristic {chi} >= 0")]
    InfeasibleTopology { chi: i64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("continuation failed beyond c = {last_c}: {source}")]
    ContinuationFailed {
        last_c: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("boundary length {boundary_length:e} exceeded the blow-up cap near c = {c} (approaching c = sqrt(-k))")]
    NearBlowup { c: f64, boundary_length: f64 },

    #[error("linear system is numerically singular (pivot {pivot:e} at column {col})")]
    SingularSystem { col: usize, pivot: f64 },

    #[error("bracket expansion exhausted: {0}")]
    BracketExhausted(String),

    #[error("triple junction has positive Euler characteristic {chi}; the curvature sum is bounded below by 2*pi*chi > 0 (infimum found: {infimum})")]
    PositiveEulerCharacteristic { chi: i64, infimum: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 validation, 3 non-convergence,
    /// 4 topological rejection.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. }
            | Error::ContinuationFailed { .. }
            | Error::NearBlowup { .. }
            | Error::SingularSystem { .. }
            | Error::BracketExhausted(_) => 3,
            Error::PositiveEulerCharacteristic { .. } | Error::InfeasibleTopology { .. } => 4,
            _ => 2,
        }
    }

    /// Single-line JSON diagnostic for the error stream.
    pub fn to_json_line(&self) -> String {
        let kind = match self {
            Error::MeshFormat(_) => "mesh_format",
            Error::NonManifoldEdge { .. } => "non_manifold_edge",
            Error::NonManifoldVertex(_) => "non_manifold_vertex",
            Error::NoBoundary => "no_boundary",
            Error::MultipleBoundaries(_) => "multiple_boundaries",
            Error::NotConnected => "not_connected",
            Error::InconsistentOrientation { .. } => "inconsistent_orientation",
            Error::TriangleInequality { .. } => "triangle_inequality",
            Error::DegenerateTriangle { .. } => "degenerate_triangle",
            Error::Generator(_) => "generator",
            Error::InadmissibleTarget { .. } => "inadmissible_target",
            Error::InfeasibleTopology { .. } => "infeasible_topology",
            Error::NonConvergence { .. } => "non_convergence",
            Error::ContinuationFailed { .. } => "continuation_failed",
            Error::NearBlowup { .. } => "near_blowup",
            Error::SingularSystem { .. } => "singular_system",
            Error::BracketExhausted(_) => "bracket_exhausted",
            Error::PositiveEulerCharacteristic { .. } => "positive_euler_characteristic",
            Error::Precondition(_) => "precondition",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        };
        let msg = self.to_string().replace('\\', "\\\\").replace('"', "\\\"");
        format!("{{\"error\":\"{kind}\",\"message\":\"{msg}\",\"exit_code\":{}}}", self.exit_code())
    }
}
