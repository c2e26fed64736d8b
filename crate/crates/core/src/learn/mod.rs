//! Policy/critic oracles, the training data extracted from searches, and a
//! count-based learnable oracle.

mod external;
mod learnable;
mod oracle;
pub mod probe;
mod samples;

pub use external::ExternalOracle;
pub use learnable::{feature_key, Counts, LearnableConfig, LearnableOracle, Model};
pub use oracle::{
    cancellation_distance, heuristic_cost, size_critic, weighted_size, EmptyOracle, Evaluation, HeuristicOracle,
    OracleError, PolicyOracle, UniformOracle, DEFAULT_CRITIC_DECAY,
};
pub use samples::{
    extract_critic_samples, extract_tactic_samples, proof_samples, CriticSample, SampleQueue, TacticMode, TacticSample,
    DEFAULT_QUEUE_CAPACITY,
};
