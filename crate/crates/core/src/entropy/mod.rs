//! Partitions, itinerary entropies, Kolmogorov–Sinai estimates for point maps
//! and flows, and the quantum dynamical entropy of Moyal flows.

mod estimate;
pub mod exact;
mod partition;
mod quantum;
mod systems;

pub use estimate::{
    entropy_rate, entropy_rate_with, ks_entropy, ks_entropy_with, lyapunov_estimate, lyapunov_estimate_seeded, sample_plan,
    EntropyConfig, EntropyReport, Estimator, RateEstimate,
};
pub use partition::{coarsest_refinement, partition_entropy, rect_measure, FinitePartition, PartitionFamily, Rect};
pub use quantum::{
    ks_entropy_quantum, ks_entropy_quantum_with, ks_entropy_symbol_point, quantum_refinement_distribution,
    quantum_refinement_distribution_with, QuasiDistribution, NEGATIVITY_LIMIT,
};
pub use systems::{golden_mean, PointMapSystem, SystemPreset};

pub(crate) use estimate::{check_n, coarsen_dyadic, max_words, orbit_symbols};
pub(crate) use partition::shannon_bits;

#[cfg(test)]
mod tests;
