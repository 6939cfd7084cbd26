//! Estimation protocols: sampling, basis assignment, simulated measurement and
//! the estimators.
//!
//! [`ProtocolKind::Proposed`] picks the sample uniformly at random, measures
//! each sampled pair in an independently uniform Pauli basis and estimates
//! `1 − 3ε/2` from the match rate `ε`. The two baselines isolate common
//! failure modes:
//!
//! * [`ProtocolKind::ClusteredBasis`] assigns bases in contiguous blocks over
//!   the sorted sample (x first, then y, then z) and keeps the same estimator.
//! * [`ProtocolKind::PerBasisDfe`] randomizes bases like `Proposed` but
//!   normalizes each basis separately, estimating the three correlators
//!   `⟨σu⊗σu⟩` and combining them as `(1 − Σ ŝ_u)/4`.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::PauliBasis;
use crate::error::{domain, Result};
use crate::noise::MixtureOfProducts;

/// Indices of the measured pairs, strictly increasing, all below `n_pairs`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SampleSet {
    n_pairs: usize,
    indices: Vec<usize>,
}

impl SampleSet {
    /// Builds a sample set from sorted, distinct indices. At least one pair
    /// must remain unsampled.
    pub fn new(n_pairs: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.len() >= n_pairs {
            return Err(domain(format!(
                "sample of {} pairs leaves no unsampled pair out of {n_pairs}",
                indices.len()
            )));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain("sample indices must be strictly increasing"));
        }
        if indices.last().is_some_and(|&i| i >= n_pairs) {
            return Err(domain(format!(
                "sample index out of range for {n_pairs} pairs"
            )));
        }
        Ok(Self { n_pairs, indices })
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Basis per sampled pair, aligned with [`SampleSet::indices`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisAssignment {
    bases: Vec<PauliBasis>,
}

impl BasisAssignment {
    pub fn new(bases: Vec<PauliBasis>) -> Self {
        Self { bases }
    }

    pub fn bases(&self) -> &[PauliBasis] {
        &self.bases
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }
}

/// Everything observed in one trial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrialOutcome {
    sample: SampleSet,
    bases: BasisAssignment,
    matches: Vec<bool>,
    error_count: usize,
}

impl TrialOutcome {
    pub fn new(sample: SampleSet, bases: BasisAssignment, matches: Vec<bool>) -> Result<Self> {
        if bases.len() != sample.len() || matches.len() != sample.len() {
            return Err(domain(format!(
                "outcome sizes disagree: {} sampled, {} bases, {} results",
                sample.len(),
                bases.len(),
                matches.len()
            )));
        }
        let error_count = matches.iter().filter(|m| **m).count();
        Ok(Self {
            sample,
            bases,
            matches,
            error_count,
        })
    }

    pub fn sample(&self) -> &SampleSet {
        &self.sample
    }

    pub fn bases(&self) -> &BasisAssignment {
        &self.bases
    }

    /// `r_n` per sampled pair: true when both results matched.
    pub fn matches(&self) -> &[bool] {
        &self.matches
    }

    pub fn error_count(&self) -> usize {
        self.error_count
    }

    /// Match fraction `e / M`; NaN for an empty sample.
    pub fn qber(&self) -> f64 {
        self.error_count as f64 / self.sample.len() as f64
    }

    /// `(pair index, basis, matched)` for every sampled pair.
    pub fn records(&self) -> impl Iterator<Item = (usize, PauliBasis, bool)> + '_ {
        self.sample
            .indices
            .iter()
            .zip(&self.bases.bases)
            .zip(&self.matches)
            .map(|((&n, &b), &m)| (n, b, m))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Proposed,
    ClusteredBasis,
    PerBasisDfe,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [
        ProtocolKind::Proposed,
        ProtocolKind::ClusteredBasis,
        ProtocolKind::PerBasisDfe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Proposed => "proposed",
            ProtocolKind::ClusteredBasis => "clustered_basis",
            ProtocolKind::PerBasisDfe => "per_basis_dfe",
        }
    }

    /// Whether bases are drawn at random (as opposed to a fixed rule).
    pub fn randomizes_bases(self) -> bool {
        !matches!(self, ProtocolKind::ClusteredBasis)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProtocolKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| domain(format!("unknown protocol {s:?}")))
    }
}

/// Uniformly random `m`-subset of `0..n_pairs`, returned sorted.
pub fn draw_sample_set<R: Rng + ?Sized>(
    n_pairs: usize,
    m: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if m < 1 || m >= n_pairs {
        return Err(domain(format!(
            "sample size must satisfy 1 <= m < n_pairs, got m = {m}, n_pairs = {n_pairs}"
        )));
    }
    let mut indices = index::sample(rng, n_pairs, m).into_vec();
    indices.sort_unstable();
    Ok(SampleSet { n_pairs, indices })
}

/// Block sizes `(x, y, z)` used by the clustered assignment.
pub fn clustered_block_sizes(m: usize) -> (usize, usize, usize) {
    let x = m.div_ceil(3);
    let y = (m - x).div_ceil(2);
    (x, y, m - x - y)
}

pub fn assign_bases<R: Rng + ?Sized>(
    sample: &SampleSet,
    kind: ProtocolKind,
    rng: &mut R,
) -> BasisAssignment {
    let m = sample.len();
    let bases = match kind {
        ProtocolKind::Proposed | ProtocolKind::PerBasisDfe => (0..m)
            .map(|_| PauliBasis::ALL[rng.random_range(0..3)])
            .collect(),
        ProtocolKind::ClusteredBasis => {
            let (x, y, _) = clustered_block_sizes(m);
            (0..m)
                .map(|i| {
                    if i < x {
                        PauliBasis::X
                    } else if i < x + y {
                        PauliBasis::Y
                    } else {
                        PauliBasis::Z
                    }
                })
                .collect()
        }
    };
    BasisAssignment { bases }
}

/// Draws the mixture component, then each sampled pair's result independently.
///
/// The component index is returned for evaluation only; estimators never see it.
pub fn simulate_measurement<R: Rng + ?Sized>(
    model: &MixtureOfProducts,
    sample: &SampleSet,
    bases: &BasisAssignment,
    rng: &mut R,
) -> Result<(usize, TrialOutcome)> {
    if sample.n_pairs() != model.n_pairs() {
        return Err(domain(format!(
            "sample over {} pairs does not match model with {}",
            sample.n_pairs(),
            model.n_pairs()
        )));
    }
    if bases.len() != sample.len() {
        return Err(domain("basis assignment does not cover the sample"));
    }
    let k = draw_component(model, rng);
    let comp = &model.components()[k];
    let matches = sample
        .indices
        .iter()
        .zip(&bases.bases)
        .map(|(&n, &b)| rng.random::<f64>() < comp.match_prob(n, b))
        .collect::<Vec<bool>>();
    let error_count = matches.iter().filter(|m| **m).count();
    Ok((
        k,
        TrialOutcome {
            sample: sample.clone(),
            bases: bases.clone(),
            matches,
            error_count,
        },
    ))
}

fn draw_component<R: Rng + ?Sized>(model: &MixtureOfProducts, rng: &mut R) -> usize {
    let comps = model.components();
    if comps.len() == 1 {
        return 0;
    }
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (k, c) in comps.iter().enumerate() {
        acc += c.weight();
        if u < acc {
            return k;
        }
    }
    // Rounding left `acc` slightly below 1; take the last component with weight.
    comps.iter().rposition(|c| c.weight() > 0.0).unwrap_or(0)
}

/// Estimated fidelity of the unsampled pairs. Values outside `[0, 1]` are
/// returned as is; clamping would bias the estimate.
pub fn estimate(outcome: &TrialOutcome, kind: ProtocolKind) -> Result<f64> {
    let m = outcome.sample.len();
    if m == 0 {
        return Err(domain("cannot estimate from an empty sample"));
    }
    let mut counts = [0usize; 3];
    let mut hits = [0usize; 3];
    for (_, b, matched) in outcome.records() {
        counts[b.index()] += 1;
        hits[b.index()] += usize::from(matched);
    }
    Ok(estimate_from_counts(kind, counts, hits))
}

/// Estimator evaluated from per-basis measurement counts and match counts.
pub(crate) fn estimate_from_counts(
    kind: ProtocolKind,
    counts: [usize; 3],
    hits: [usize; 3],
) -> f64 {
    let m: usize = counts.iter().sum();
    let qber = hits.iter().sum::<usize>() as f64 / m as f64;
    match kind {
        ProtocolKind::Proposed | ProtocolKind::ClusteredBasis => 1.0 - 1.5 * qber,
        ProtocolKind::PerBasisDfe => per_basis_estimate(counts, hits, qber),
    }
}

/// `(1 − Σ_u ŝ_u)/4` with `ŝ_u = 2·hits_u/counts_u − 1`; a basis that was
/// never measured falls back to the pooled `2ε − 1`.
pub(crate) fn per_basis_estimate(counts: [usize; 3], hits: [usize; 3], qber: f64) -> f64 {
    let pooled = 2.0 * qber - 1.0;
    let correlators: f64 = (0..3)
        .map(|u| {
            if counts[u] == 0 {
                pooled
            } else {
                2.0 * hits[u] as f64 / counts[u] as f64 - 1.0
            }
        })
        .sum();
    (1.0 - correlators) / 4.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::werner;
    use crate::noise::iid_model;
    use crate::rng::trial_rng;
    use approx::assert_abs_diff_eq;

    fn outcome(n: usize, bases: Vec<PauliBasis>, matches: Vec<bool>) -> TrialOutcome {
        let m = matches.len();
        TrialOutcome::new(
            SampleSet::new(n, (0..m).collect()).unwrap(),
            BasisAssignment::new(bases),
            matches,
        )
        .unwrap()
    }

    #[test]
    fn sample_set_validation() {
        assert!(SampleSet::new(4, vec![0, 0]).is_err());
        assert!(SampleSet::new(4, vec![2, 1]).is_err());
        assert!(SampleSet::new(4, vec![0, 7]).is_err());
        assert!(SampleSet::new(4, vec![0, 1, 2, 3]).is_err());
        assert!(SampleSet::new(4, vec![1, 3]).is_ok());
    }

    #[test]
    fn draw_rejects_bad_sizes() {
        let mut rng = trial_rng(0, 0);
        assert!(draw_sample_set(4, 4, &mut rng).is_err());
        assert!(draw_sample_set(4, 0, &mut rng).is_err());
        let s = draw_sample_set(10, 5, &mut rng).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.indices().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn clustered_rule() {
        let mut rng = trial_rng(0, 0);
        use PauliBasis::*;
        let s6 = SampleSet::new(8, (0..6).collect()).unwrap();
        assert_eq!(
            assign_bases(&s6, ProtocolKind::ClusteredBasis, &mut rng).bases(),
            &[X, X, Y, Y, Z, Z]
        );
        let s4 = SampleSet::new(8, vec![1, 3, 5, 7]).unwrap();
        assert_eq!(
            assign_bases(&s4, ProtocolKind::ClusteredBasis, &mut rng).bases(),
            &[X, X, Y, Z]
        );
        assert_eq!(clustered_block_sizes(1), (1, 0, 0));
        assert_eq!(clustered_block_sizes(2), (1, 1, 0));
        assert_eq!(clustered_block_sizes(500), (167, 167, 166));
    }

    #[test]
    fn estimator_examples() {
        use PauliBasis::*;
        let zero = outcome(7, vec![X, Y, Z, X, Y, Z], vec![false; 6]);
        assert_eq!(estimate(&zero, ProtocolKind::Proposed).unwrap(), 1.0);
        let two_thirds = outcome(
            7,
            vec![X, Y, Z, X, Y, Z],
            vec![true, true, true, true, false, false],
        );
        assert_abs_diff_eq!(
            estimate(&two_thirds, ProtocolKind::Proposed).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let all = outcome(7, vec![X, Y, Z, X, Y, Z], vec![true; 6]);
        assert_eq!(estimate(&all, ProtocolKind::Proposed).unwrap(), -0.5);
        assert_eq!(estimate(&all, ProtocolKind::ClusteredBasis).unwrap(), -0.5);

        let empty = TrialOutcome::new(
            SampleSet::new(3, vec![]).unwrap(),
            BasisAssignment::new(vec![]),
            vec![],
        )
        .unwrap();
        assert!(estimate(&empty, ProtocolKind::Proposed).is_err());
    }

    #[test]
    fn per_basis_estimator() {
        use PauliBasis::*;
        // Singlet statistics: never matching gives ŝ = −1 in every basis.
        let o = outcome(4, vec![X, Y, Z], vec![false; 3]);
        assert_eq!(estimate(&o, ProtocolKind::PerBasisDfe).unwrap(), 1.0);
        // x: 1/2 match, y: 0/1, z missing → pooled ε = 1/3.
        let o = outcome(5, vec![X, X, Y], vec![true, false, false]);
        let pooled = 2.0 / 3.0 - 1.0;
        let want = (1.0 - (0.0 + -1.0 + pooled)) / 4.0;
        assert_abs_diff_eq!(
            estimate(&o, ProtocolKind::PerBasisDfe).unwrap(),
            want,
            epsilon = 1e-15
        );
    }

    #[test]
    fn perfect_singlets_never_match() {
        let model = iid_model(0.0, 20).unwrap();
        let mut rng = trial_rng(3, 0);
        let s = draw_sample_set(20, 10, &mut rng).unwrap();
        let b = assign_bases(&s, ProtocolKind::Proposed, &mut rng);
        let (k, o) = simulate_measurement(&model, &s, &b, &mut rng).unwrap();
        assert_eq!(k, 0);
        assert_eq!(o.error_count(), 0);
        assert_eq!(o.qber(), 0.0);
    }

    #[test]
    fn outcome_bookkeeping() {
        let model =
            crate::noise::MixtureOfProducts::new(vec![(1.0, vec![werner(0.4).unwrap(); 50])])
                .unwrap();
        let mut rng = trial_rng(9, 1);
        let s = draw_sample_set(50, 30, &mut rng).unwrap();
        let b = assign_bases(&s, ProtocolKind::Proposed, &mut rng);
        let (_, o) = simulate_measurement(&model, &s, &b, &mut rng).unwrap();
        assert_eq!(o.error_count(), o.matches().iter().filter(|m| **m).count());
        assert_abs_diff_eq!(o.qber(), o.error_count() as f64 / 30.0);
    }

    #[test]
    fn protocol_names_round_trip() {
        for k in ProtocolKind::ALL {
            assert_eq!(k.name().parse::<ProtocolKind>().unwrap(), k);
        }
        assert!("guhne".parse::<ProtocolKind>().is_err());
    }
}
