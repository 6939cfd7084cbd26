//! Error metric, analytic bounds and Fisher information.
//!
//! The estimation target is the mean fidelity of the unsampled pairs
//! conditioned on what was observed. For a mixture of product states that is
//! the posterior-weighted average of each component's unsampled mean; for a
//! single component it is just that component's unsampled mean.

mod exact;
mod monte_carlo;

pub use exact::{exact_error, EXACT_WORK_LIMIT};
pub use monte_carlo::{error_decomposition, monte_carlo_error, sampling_error};

use crate::bell::LinearOutcomeModel;
use crate::error::{domain, Error, Result};
use crate::noise::MixtureOfProducts;
use crate::protocol::TrialOutcome;

/// Posterior probability of each mixture component given an outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorWeights {
    weights: Vec<f64>,
}

impl PosteriorWeights {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Split of the mean squared error into the error on the sampled pairs and
/// the deviation between sampled and unsampled means. Only defined for
/// single-component (independent) noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// Mean of `(f̌ − f̄_M)²`.
    pub measurement_error: f64,
    pub measurement_stderr: f64,
    /// Mean of `(f̄_M − f̄)²` over uniformly random sample sets, exact.
    pub sampling_error: f64,
    /// Standard error of the per-trial difference `(f̌ − f̄)² − (f̌ − f̄_M)²`,
    /// whose mean should equal `sampling_error`.
    pub reconciliation_stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub mse: f64,
    pub mse_stderr: f64,
    pub bias: f64,
    pub bias_stderr: f64,
    pub trials: u64,
    /// Lower bound on the error, reported for single-component Werner models.
    pub analytic_bound: Option<f64>,
    pub decomposition: Option<Decomposition>,
}

/// Bayes update of the mixture weights from the observed per-pair results.
pub fn posterior(model: &MixtureOfProducts, outcome: &TrialOutcome) -> Result<PosteriorWeights> {
    check_outcome(model, outcome)?;
    let logs: Vec<f64> = model
        .components()
        .iter()
        .map(|c| {
            let prior = c.weight().ln();
            outcome
                .records()
                .fold(prior, |acc, (n, b, m)| acc + c.log_likelihood(n, b, m))
        })
        .collect();
    normalize_log_weights(&logs).map(|weights| PosteriorWeights { weights })
}

/// Posterior-weighted mean fidelity of the unsampled pairs.
pub fn conditional_target(model: &MixtureOfProducts, outcome: &TrialOutcome) -> Result<f64> {
    let post = posterior(model, outcome)?;
    Ok(target_from_posterior(model, outcome, post.weights()))
}

pub(crate) fn check_outcome(model: &MixtureOfProducts, outcome: &TrialOutcome) -> Result<()> {
    let sample = outcome.sample();
    if sample.n_pairs() != model.n_pairs() {
        return Err(domain(format!(
            "outcome over {} pairs does not match model with {}",
            sample.n_pairs(),
            model.n_pairs()
        )));
    }
    if sample.len() >= model.n_pairs() {
        return Err(domain("no unsampled pairs remain"));
    }
    Ok(())
}

pub(crate) fn normalize_log_weights(logs: &[f64]) -> Result<Vec<f64>> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::ImpossibleOutcome);
    }
    let mut w: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    Ok(w)
}

/// Unsampled mean of every component, from cached fidelity totals.
pub(crate) fn unsampled_means(model: &MixtureOfProducts, outcome: &TrialOutcome) -> Vec<f64> {
    let idx = outcome.sample().indices();
    let rest = (model.n_pairs() - idx.len()) as f64;
    model
        .components()
        .iter()
        .map(|c| {
            let sampled: f64 = idx
                .iter()
                .map(|&n| crate::bell::fidelity(&c.states()[n]))
                .sum();
            (c.fidelity_sum() - sampled) / rest
        })
        .collect()
}

pub(crate) fn target_from_posterior(
    model: &MixtureOfProducts,
    outcome: &TrialOutcome,
    weights: &[f64],
) -> f64 {
    unsampled_means(model, outcome)
        .iter()
        .zip(weights)
        .map(|(u, w)| u * w)
        .sum()
}

/// `Σ_n (2f_n + 1)(1 − f_n) / (2·M·N)`: the smallest mean squared error on the
/// sampled pairs that any separable measurement can reach.
pub fn error_lower_bound(fidelities: &[f64], m: usize) -> Result<f64> {
    let n = fidelities.len();
    if m < 1 || m >= n {
        return Err(domain(format!(
            "sample size must satisfy 1 <= m < N, got m = {m}, N = {n}"
        )));
    }
    if let Some(f) = fidelities.iter().find(|f| !(0.0..=1.0).contains(*f)) {
        return Err(domain(format!("fidelity {f} outside [0, 1]")));
    }
    let total: f64 = fidelities.iter().map(|f| (2.0 * f + 1.0) * (1.0 - f)).sum();
    Ok(total / (2.0 * m as f64 * n as f64))
}

/// Fisher information about `f` carried by one outcome of `model`:
/// `Σ_r (a_r − b_r/3)² / (f·a_r + (1 − f)/3·b_r)`.
pub fn fisher_information(model: &LinearOutcomeModel, f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(domain(format!(
            "Fisher information needs 0 < f < 1, got {f}"
        )));
    }
    let mut info = 0.0;
    for (r, o) in model.outcomes().iter().enumerate() {
        let prob = f * o.a + (1.0 - f) / 3.0 * o.b;
        let slope = o.a - o.b / 3.0;
        if prob == 0.0 {
            if slope != 0.0 {
                return Err(Error::SingularInformation { outcome: r });
            }
            continue;
        }
        info += slope * slope / prob;
    }
    Ok(info)
}

/// Closed-form information of the bilateral Pauli measurement, `2/((2f + 1)(1 − f))`,
/// which is also the ceiling for any separable measurement.
pub fn max_separable_information(f: f64) -> f64 {
    2.0 / ((2.0 * f + 1.0) * (1.0 - f))
}
