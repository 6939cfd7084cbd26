//! Joint states of `N` qubit pairs as classical mixtures of product states.

use crate::bell::{fidelity, match_probability, werner, PairState, PauliBasis};
use crate::error::{domain, Result};
use crate::protocol::SampleSet;

/// Tolerance on mixture weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// One product-state term of a [`MixtureOfProducts`].
#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    weight: f64,
    states: Vec<PairState>,
    // Per pair: match probability and its logs, indexed by basis.
    match_prob: Vec<[f64; 3]>,
    log_match: Vec<[f64; 3]>,
    log_miss: Vec<[f64; 3]>,
    fidelity_sum: f64,
}

impl Component {
    fn new(weight: f64, states: Vec<PairState>) -> Self {
        let match_prob: Vec<[f64; 3]> = states
            .iter()
            .map(|s| PauliBasis::ALL.map(|b| match_probability(s, b)))
            .collect();
        let log_match = match_prob.iter().map(|q| q.map(f64::ln)).collect();
        let log_miss = match_prob
            .iter()
            .map(|q| q.map(|q| (1.0 - q).ln()))
            .collect();
        let fidelity_sum = states.iter().map(fidelity).sum();
        Self {
            weight,
            states,
            match_prob,
            log_match,
            log_miss,
            fidelity_sum,
        }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn states(&self) -> &[PairState] {
        &self.states
    }

    pub fn fidelities(&self) -> Vec<f64> {
        self.states.iter().map(fidelity).collect()
    }

    pub fn fidelity_sum(&self) -> f64 {
        self.fidelity_sum
    }

    #[inline]
    pub(crate) fn match_prob(&self, pair: usize, basis: PauliBasis) -> f64 {
        self.match_prob[pair][basis.index()]
    }

    /// Log-likelihood of observing `matched` on `pair` in `basis`.
    #[inline]
    pub(crate) fn log_likelihood(&self, pair: usize, basis: PauliBasis, matched: bool) -> f64 {
        if matched {
            self.log_match[pair][basis.index()]
        } else {
            self.log_miss[pair][basis.index()]
        }
    }
}

/// Weighted ensemble of per-pair product states.
///
/// A single component is independent noise; several components give
/// classically correlated noise.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureOfProducts {
    n_pairs: usize,
    components: Vec<Component>,
}

impl MixtureOfProducts {
    /// Generic constructor from `(weight, pair states)` terms.
    pub fn new(terms: Vec<(f64, Vec<PairState>)>) -> Result<Self> {
        let n_pairs = terms
            .first()
            .map(|(_, s)| s.len())
            .ok_or_else(|| domain("mixture needs at least one component"))?;
        if n_pairs == 0 {
            return Err(domain("mixture components need at least one pair"));
        }
        let mut total = 0.0;
        for (k, (w, states)) in terms.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(domain(format!("component {k} has invalid weight {w}")));
            }
            if states.len() != n_pairs {
                return Err(domain(format!(
                    "component {k} has {} pairs, expected {n_pairs}",
                    states.len()
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(domain(format!(
                "mixture weights sum to {total}, expected 1"
            )));
        }
        Ok(Self {
            n_pairs,
            components: terms
                .into_iter()
                .map(|(w, s)| Component::new(w, s))
                .collect(),
        })
    }

    /// Mixture of Werner product states given per-component fidelity lists.
    pub fn from_fidelities(terms: Vec<(f64, Vec<f64>)>) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(w, fs)| Ok((w, fs.into_iter().map(werner).collect::<Result<Vec<_>>>()?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn component(&self, k: usize) -> Result<&Component> {
        self.components.get(k).ok_or_else(|| {
            domain(format!(
                "component {k} out of range for {} components",
                self.components.len()
            ))
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn is_single_component(&self) -> bool {
        self.components.len() == 1
    }

    /// True when every pair state of every component is a Werner state.
    pub fn is_werner(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.states.iter().all(PairState::is_werner))
    }

    /// Collapses components with identical pair states, summing their weights.
    /// Zero-weight components are dropped unless all weights are zero.
    pub fn merge_identical(&self) -> Self {
        let mut merged: Vec<(f64, Vec<PairState>)> = Vec::new();
        for c in &self.components {
            if c.weight == 0.0 && self.components.iter().any(|o| o.weight > 0.0) {
                continue;
            }
            match merged.iter_mut().find(|(_, s)| *s == c.states) {
                Some((w, _)) => *w += c.weight,
                None => merged.push((c.weight, c.states.clone())),
            }
        }
        Self {
            n_pairs: self.n_pairs,
            components: merged
                .into_iter()
                .map(|(w, s)| Component::new(w, s))
                .collect(),
        }
    }
}

/// Intensity `p` and correlation/heterogeneity degree `d` of the two-channel
/// depolarizing model. Good and bad channels have error probabilities
/// `p − d/2` and `p + d/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    p: f64,
    d: f64,
}

impl NoiseParams {
    const TOL: f64 = 1e-12;

    pub fn new(p: f64, d: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!(
                "noise intensity p must lie in [0, 1], got {p}"
            )));
        }
        if !(0.0..=1.0).contains(&d) {
            return Err(domain(format!(
                "correlation degree d must lie in [0, 1], got {d}"
            )));
        }
        if p - d / 2.0 < -Self::TOL || p + d / 2.0 > 1.0 + Self::TOL {
            return Err(domain(format!(
                "p = {p}, d = {d} gives channel error probabilities outside [0, 1]"
            )));
        }
        Ok(Self { p, d })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn good_error_prob(&self) -> f64 {
        (self.p - self.d / 2.0).clamp(0.0, 1.0)
    }

    pub fn bad_error_prob(&self) -> f64 {
        (self.p + self.d / 2.0).clamp(0.0, 1.0)
    }
}

/// Depolarized singlet `p·I/4 + (1 − p)|Ψ−⟩⟨Ψ−|`, i.e. the Werner state of
/// fidelity `1 − 3p/4`.
pub fn depolarized_pair(error_prob: f64) -> Result<PairState> {
    if !(0.0..=1.0).contains(&error_prob) {
        return Err(domain(format!(
            "error probability must lie in [0, 1], got {error_prob}"
        )));
    }
    werner(1.0 - 3.0 * error_prob / 4.0)
}

/// Independent, identically depolarized pairs.
pub fn iid_model(error_prob: f64, n_pairs: usize) -> Result<MixtureOfProducts> {
    if n_pairs < 1 {
        return Err(domain("n_pairs must be at least 1"));
    }
    let state = depolarized_pair(error_prob)?;
    MixtureOfProducts::new(vec![(1.0, vec![state; n_pairs])])
}

/// Equal mixture of "a quarter good, three quarters bad" and "three quarters
/// good, a quarter bad", in tensor order with the good block first.
pub fn correlated_model(params: NoiseParams, n_pairs: usize) -> Result<MixtureOfProducts> {
    if n_pairs == 0 || n_pairs % 4 != 0 {
        return Err(domain(format!(
            "n_pairs must be a positive multiple of 4, got {n_pairs}"
        )));
    }
    let good = depolarized_pair(params.good_error_prob())?;
    let bad = depolarized_pair(params.bad_error_prob())?;
    let quarter = n_pairs / 4;
    let block = |n_good: usize| {
        let mut v = vec![good; n_good];
        v.resize(n_pairs, bad);
        v
    };
    MixtureOfProducts::new(vec![(0.5, block(quarter)), (0.5, block(3 * quarter))])
}

/// Mean fidelity of the pairs outside `sample` in one component.
pub fn true_unsampled_mean_fidelity(
    model: &MixtureOfProducts,
    component: usize,
    sample: &SampleSet,
) -> Result<f64> {
    let comp = model.component(component)?;
    if sample.n_pairs() != model.n_pairs() {
        return Err(domain(format!(
            "sample set over {} pairs does not match model with {}",
            sample.n_pairs(),
            model.n_pairs()
        )));
    }
    let unsampled = model.n_pairs() - sample.len();
    if unsampled == 0 {
        return Err(domain("every pair is sampled; no unsampled pairs remain"));
    }
    let mut in_sample = vec![false; model.n_pairs()];
    for &i in sample.indices() {
        in_sample[i] = true;
    }
    let sum: f64 = comp
        .states
        .iter()
        .zip(&in_sample)
        .filter(|(_, s)| !**s)
        .map(|(st, _)| fidelity(st))
        .sum();
    Ok(sum / unsampled as f64)
}
