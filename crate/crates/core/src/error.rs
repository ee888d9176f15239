use thiserror::Error;

/// Errors raised by the gesture toolkit.
///
/// Validation failures that are part of normal reporting (endpoint
/// mismatches, speed-bound breaches, residuals above tolerance) are returned
/// as reports, not as errors.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid digraph: {0}")]
    InvalidDigraph(String),

    #[error("digraph morphism does not preserve incidence at arrow `{arrow}`: {detail}")]
    IncidenceViolation { arrow: String, detail: String },

    #[error("digraph morphism is not total: {0}")]
    NotTotal(String),

    #[error("mismatched digraphs: target of the first morphism is not the source of the second")]
    MismatchedDigraphs,

    #[error("enumeration guard exceeded: {vertices} vertices / {arrows} arrows (limit {limit}/{limit})")]
    TooLarge {
        vertices: usize,
        arrows: usize,
        limit: usize,
    },

    #[error("invalid configuration space: {0}")]
    InvalidSpace(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("space mismatch{context}: expected `{expected}`, found `{found}`")]
    SpaceMismatch {
        expected: String,
        found: String,
        context: String,
    },

    #[error("invalid space map: {0}")]
    InvalidSpaceMap(String),

    #[error("non-composable nabla morphisms: ({0}, {1}) then ({2}, {3})")]
    NonComposable(f64, f64, f64, f64),

    #[error("invalid nabla morphism ({0}, {1}): need 0 <= x <= y <= 1")]
    InvalidNabla(f64, f64),

    #[error("invalid gesture: {0}")]
    InvalidGesture(String),

    #[error("structural mismatch: {0}")]
    StructuralMismatch(String),

    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),

    #[error("unknown arrow `{0}`")]
    UnknownArrow(String),

    #[error("ragged address grid: {0}")]
    RaggedGrid(String),

    #[error("invalid homotopy family: {0}")]
    InvalidFamily(String),

    #[error("infeasible speed on arrow `{arrow}`: endpoints need speed {required:.6} but bound is {bound:.6}")]
    InfeasibleSpeed {
        arrow: String,
        required: f64,
        bound: f64,
    },

    #[error("invalid potential operator: {0}")]
    InvalidOperator(String),

    #[error("missing generator for {0}: dynamics unspecified, the similarity hypothesis cannot be verified")]
    MissingGenerator(String),

    #[error("missing coordinate `{0}`")]
    MissingCoordinate(String),

    #[error("missing leg for node `{0}`")]
    MissingLeg(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("edge `{edge}` does not commute: residual {residual:.3e} > tolerance {tolerance:.3e}")]
    EdgeDoesNotCommute {
        edge: String,
        residual: f64,
        tolerance: f64,
    },

    #[error("candidate mediator set is empty")]
    EmptyCandidates,

    #[error("rival cocone is invalid: residual {0:.3e}")]
    InvalidRival(f64),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn space_mismatch(expected: &str, found: &str, context: impl AsRef<str>) -> Self {
        let context = context.as_ref();
        Error::SpaceMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
            context: if context.is_empty() {
                String::new()
            } else {
                format!(" ({context})")
            },
        }
    }
}
