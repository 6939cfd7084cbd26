//! Benchmark fixtures. The benchmarks themselves live under `benches/`.

use bellfid_core::{correlated_model, iid_model, MixtureOfProducts, NoiseParams};

/// Pair count and sample size of the shipped sweep configs.
pub const N_PAIRS: usize = 1000;
pub const M_SAMPLED: usize = 500;

/// Independent depolarized pairs at `p = 0.5`.
pub fn iid_fixture() -> MixtureOfProducts {
    iid_model(0.5, N_PAIRS).expect("valid fixture")
}

/// Two-component correlated noise at `p = 0.5, d = 0.5`.
pub fn correlated_fixture() -> MixtureOfProducts {
    correlated_model(NoiseParams::new(0.5, 0.5).expect("feasible"), N_PAIRS).expect("valid fixture")
}
