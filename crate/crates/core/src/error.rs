use alloc::string::String;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid dyadic edge {0}")]
    InvalidEdge(String),
    #[error("edge {edge} has generation >= resolution {resolution}")]
    EdgeBeyondResolution { edge: String, resolution: u32 },
    #[error("tree is flagged normalized but halves at the root edge")]
    NotNormalized,
    #[error("resolution {got} is not supported (allowed {min}..={max})")]
    Resolution { got: u32, min: u32, max: u32 },
    #[error("point {point} is not on the grid V_{resolution}")]
    OffGrid { point: String, resolution: u32 },
    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
    #[error("function must vanish at the basepoint")]
    NonzeroAtBase,
    #[error("level {level}: not measurable on atom {atom}")]
    NotMeasurable { level: u32, atom: String },
    #[error("level {level}: not in the kernel of the conditional expectation on atom {atom}")]
    NotInKernel { level: u32, atom: String },
    #[error("level {level}: the two difference formulas disagree")]
    RouteMismatch { level: u32 },
    #[error("no contained dyadic edge separates {x} and {y} at this resolution")]
    NoWitness { x: String, y: String },
    #[error("decomposition: {0}")]
    Decomposition(String),
    #[error("glue plan: {0}")]
    Plan(String),
    #[error("not a {delta}-chain: hop {hop} has length {length}")]
    NotAChain { delta: String, hop: usize, length: String },
    #[error("measure space: {0}")]
    Measure(String),
    #[error("{0}")]
    Domain(String),
}

pub type Result<T> = core::result::Result<T, Error>;
