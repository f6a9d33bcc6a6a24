use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not connected")]
    Disconnected,

    #[error("vertex {vertex} out of range (graph has vertices 0..={max})")]
    VertexOutOfRange { vertex: usize, max: usize },

    #[error("configuration has length {got}, graph expects {expected}")]
    LengthMismatch { got: usize, expected: usize },

    #[error("configuration is not stable (vertex {vertex} holds {grains} >= degree {degree})")]
    NotStable {
        vertex: usize,
        grains: u32,
        degree: u32,
    },

    #[error("vertex {vertex} is stable, cannot topple it")]
    StableVertex { vertex: usize },

    #[error("cannot add a grain at the sink")]
    GrainAtSink,

    #[error("configuration is not recurrent for the requested model")]
    NotRecurrent,

    #[error("configuration is not superstable")]
    NotSuperstable,

    #[error("configuration is not SR: {unburned} vertices unburned, remain {remain:?}")]
    NotSr { unburned: usize, remain: Vec<usize> },

    #[error("probability {0} outside (0,1)")]
    InvalidProbability(String),

    #[error("invalid probability vector: {0}")]
    InvalidMu(String),

    #[error("size guard exceeded: {what} = {value} > limit {limit}")]
    GuardExceeded {
        what: &'static str,
        value: u64,
        limit: u64,
    },

    #[error("state space limit exceeded ({limit} states)")]
    StateSpaceExceeded { limit: usize },

    #[error("edge indices do not form a directed cycle")]
    NotACycle,

    #[error("orientations live on different graphs")]
    HostMismatch,

    #[error("unsupported graph: {0}")]
    UnsupportedGraph(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}
