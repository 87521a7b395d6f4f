use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown {kind} id {id}")]
    UnknownId { kind: &'static str, id: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: String, found: String },

    #[error("malformed walk: {0}")]
    MalformedWalk(String),

    #[error("incidence signs along the walk are not constant (break after step {0})")]
    SignsNotConstant(usize),

    #[error("walk revisits a tree vertex (backtracking at step {0})")]
    Backtracking(usize),

    #[error("permutation is not an automorphism of the ball: {0}")]
    NotAutomorphism(String),

    #[error("interior is empty at margin {margin} (radius {radius}, k {k})")]
    EmptyInterior { margin: usize, radius: usize, k: usize },

    #[error("cochain is not closed: integral {integral} around loop through vertices {loop_vertices:?}")]
    PathDependent {
        loop_vertices: Vec<usize>,
        loop_edges: Vec<usize>,
        integral: String,
    },

    #[error("base vertex {0} lies inside the enlarged support region")]
    BaseInsideSupport(usize),

    #[error("no admissible base vertex in component {0}")]
    NoBaseVertex(usize),

    #[error("singular matrix")]
    Singular,

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
