use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("invalid point: factor {factor} has value {value}, cardinality is {cardinality}")]
    InvalidPoint {
        factor: usize,
        value: usize,
        cardinality: usize,
    },
    #[error("point has {got} coordinates, space has {expected} factors")]
    PointArity { expected: usize, got: usize },
    #[error("index set is not contained in the domain of the family")]
    Domain,
    #[error("index sets overlap")]
    Overlap,
    #[error("unknown factor {0}")]
    UnknownFactor(usize),
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("value {value} out of range, variable has {num_values} values")]
    ValueOutOfRange { value: u32, num_values: u32 },
    #[error("objects live on different spaces")]
    SpaceMismatch,
    #[error("capacity exceeded: {what} is {requested}, limit is {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("invalid variable: {0}")]
    InvalidVariable(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("distribution does not factorize over the graph")]
    NotFactorizing,
}
