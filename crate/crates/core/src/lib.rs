//! Fidelity estimation for entangled qubit pairs under arbitrary noise.
//!
//! Two nodes share `N` noisy pairs, measure a random subset of `M` of them
//! with bilateral Pauli measurements and estimate the average singlet
//! fidelity of the pairs left over. This crate provides
//!
//! * [`bell`]: closed-form single-pair laws in the Bell basis,
//! * [`dense`]: a brute-force density-matrix oracle for up to three pairs,
//! * [`noise`]: mixtures of product states, including the two-channel
//!   correlated depolarizing model,
//! * [`protocol`]: sampling, measurement simulation and estimators,
//! * [`evaluation`]: the conditional error metric, exact enumeration,
//!   Monte Carlo estimation, bounds and Fisher information,
//! * [`rng`]: the counter-based stream scheme that makes runs reproducible.

pub mod bell;
pub mod dense;
pub mod error;
pub mod evaluation;
pub mod noise;
pub mod protocol;
pub mod rng;

pub use bell::{
    depolarize_to_werner, fidelity, match_probability, proposed_outcome_model, twirl, werner,
    BellIndex, LinearOutcomeModel, OutcomeCoefficients, PairState, PauliBasis,
};
pub use error::{Error, Result};
pub use evaluation::{
    conditional_target, error_decomposition, error_lower_bound, exact_error, fisher_information,
    monte_carlo_error, posterior, Decomposition, ErrorReport, PosteriorWeights,
};
pub use noise::{
    correlated_model, depolarized_pair, iid_model, true_unsampled_mean_fidelity, MixtureOfProducts,
    NoiseParams,
};
pub use protocol::{
    assign_bases, draw_sample_set, estimate, simulate_measurement, BasisAssignment, ProtocolKind,
    SampleSet, TrialOutcome,
};
