//! Propagation, multi-node scenarios and Monte Carlo variance studies.
//!
//! Randomness is confined to additive noise. Every capture draws from its
//! own ChaCha8 stream keyed by `(seed, grid index, trial index)`, so
//! parallel and serial runs produce identical numbers.

mod channel;
mod montecarlo;
mod scenario;

pub use channel::{
    add_noise, apply_channel, buffer_len_for, db_to_amplitude, db_to_power, noise_variance, path_amplitude, propagate,
    propagate_into, trial_rng, Channel, LinkModel, DELAY_TAPS,
};
pub use montecarlo::{
    monte_carlo_variance, MonteCarloBase, MonteCarloConfig, MonteCarloPoint, MonteCarloResult, SweepAxis,
};
pub use scenario::{
    run_pair_session, run_three_node_demo, CarrierMetadata, Node, NodeScenario, PairConfig, PairSession, Role,
    SlaveSummary, SweepRow, ThreeNodeConfig, ThreeNodeResult,
};

/// `(0..n).map(f)` in index order, in parallel when enabled.
#[cfg(feature = "parallel")]
pub(crate) fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn par_map<T, F: Fn(usize) -> T>(n: usize, f: F) -> Vec<T> {
    (0..n).map(f).collect()
}
