//! Single-pair states in the Bell basis.
//!
//! A Bell-diagonal state of one qubit pair is a probability vector over the
//! four Bell states, stored in the fixed order `(Ψ−, Ψ+, Φ−, Φ+)`. The target
//! state is the singlet `Ψ−`, so the fidelity is always component 0.
//!
//! Everything here is closed form. The dense reference in [`crate::dense`]
//! recomputes the same laws by brute force.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Tolerance on the probability sum of a [`PairState`].
pub const PROB_SUM_TOL: f64 = 1e-12;

/// The four Bell states in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellIndex {
    PsiMinus = 0,
    PsiPlus = 1,
    PhiMinus = 2,
    PhiPlus = 3,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PsiMinus,
        BellIndex::PsiPlus,
        BellIndex::PhiMinus,
        BellIndex::PhiPlus,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

/// Local Pauli measurement basis shared by both nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliBasis {
    X = 0,
    Y = 1,
    Z = 2,
}

impl PauliBasis {
    pub const ALL: [PauliBasis; 3] = [PauliBasis::X, PauliBasis::Y, PauliBasis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// The two non-singlet Bell components on which both nodes obtain the
    /// same result when measuring in this basis.
    pub fn matching_components(self) -> [BellIndex; 2] {
        match self {
            PauliBasis::X => [BellIndex::PsiPlus, BellIndex::PhiPlus],
            PauliBasis::Y => [BellIndex::PsiPlus, BellIndex::PhiMinus],
            PauliBasis::Z => [BellIndex::PhiMinus, BellIndex::PhiPlus],
        }
    }
}

/// Bell-diagonal state of a single qubit pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    probs: [f64; 4],
}

impl PairState {
    /// Builds a state from Bell probabilities in `(Ψ−, Ψ+, Φ−, Φ+)` order.
    ///
    /// Entries must be nonnegative and sum to one within [`PROB_SUM_TOL`].
    /// Inputs that are off are rejected rather than renormalized.
    pub fn new(probs: [f64; 4]) -> Result<Self> {
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(domain(format!(
                "Bell probabilities must be finite and nonnegative, got {probs:?}"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOL {
            return Err(domain(format!(
                "Bell probabilities must sum to 1, got {sum} from {probs:?}"
            )));
        }
        Ok(Self { probs })
    }

    pub fn singlet() -> Self {
        Self {
            probs: [1.0, 0.0, 0.0, 0.0],
        }
    }

    #[inline]
    pub fn probs(&self) -> [f64; 4] {
        self.probs
    }

    #[inline]
    pub fn prob(&self, index: BellIndex) -> f64 {
        self.probs[index.index()]
    }

    /// True when the three non-singlet components are equal.
    pub fn is_werner(&self) -> bool {
        let [_, a, b, c] = self.probs;
        a == b && b == c
    }
}

/// Singlet fidelity `⟨Ψ−|ρ|Ψ−⟩`.
#[inline]
pub fn fidelity(state: &PairState) -> f64 {
    state.probs[0]
}

/// Werner state with the given fidelity: weight `f` on the singlet and
/// `(1 − f)/3` on each other Bell state.
pub fn werner(f: f64) -> Result<PairState> {
    if !(0.0..=1.0).contains(&f) {
        return Err(domain(format!(
            "Werner fidelity must lie in [0, 1], got {f}"
        )));
    }
    let rest = (1.0 - f) / 3.0;
    Ok(PairState {
        probs: [f, rest, rest, rest],
    })
}

/// Probabilistic bilateral rotation. It removes every off-diagonal Bell term,
/// so on a Bell-diagonal state it is the identity.
pub fn twirl(state: &PairState) -> PairState {
    *state
}

/// Symmetrizes the non-singlet weight, yielding the Werner state with the same fidelity.
pub fn depolarize_to_werner(state: &PairState) -> PairState {
    let f = fidelity(state);
    let rest = (1.0 - f) / 3.0;
    PairState {
        probs: [f, rest, rest, rest],
    }
}

/// Probability that the two nodes obtain identical results (`r = 1`) when both
/// measure `state` in `basis`.
#[inline]
pub fn match_probability(state: &PairState, basis: PauliBasis) -> f64 {
    let [a, b] = basis.matching_components();
    (state.prob(a) + state.prob(b)).clamp(0.0, 1.0)
}

/// One outcome of a [`LinearOutcomeModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeCoefficients {
    pub label: String,
    /// Overlap with the singlet.
    pub a: f64,
    /// Overlap with the complement of the singlet.
    pub b: f64,
}

/// Outcome law that is affine in the fidelity: `Pr(r) = f·a_r + (1 − f)/3·b_r`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOutcomeModel {
    outcomes: Vec<OutcomeCoefficients>,
}

impl LinearOutcomeModel {
    /// Checks `0 ≤ a ≤ b` per outcome, `Σa = 1` and `Σb = 3`, to 1e-12.
    pub fn new(outcomes: Vec<OutcomeCoefficients>) -> Result<Self> {
        const TOL: f64 = 1e-12;
        if outcomes.is_empty() {
            return Err(domain("outcome model needs at least one outcome"));
        }
        for o in &outcomes {
            if !(o.a.is_finite() && o.b.is_finite()) || o.a < 0.0 || o.b < 0.0 {
                return Err(domain(format!(
                    "outcome {:?}: coefficients must be finite and nonnegative",
                    o.label
                )));
            }
            if o.a > o.b + TOL {
                return Err(domain(format!(
                    "outcome {:?}: a = {} exceeds b = {}",
                    o.label, o.a, o.b
                )));
            }
        }
        let sum_a: f64 = outcomes.iter().map(|o| o.a).sum();
        let sum_b: f64 = outcomes.iter().map(|o| o.b).sum();
        if (sum_a - 1.0).abs() > TOL {
            return Err(domain(format!("a coefficients sum to {sum_a}, expected 1")));
        }
        if (sum_b - 3.0).abs() > TOL {
            return Err(domain(format!("b coefficients sum to {sum_b}, expected 3")));
        }
        Ok(Self { outcomes })
    }

    pub fn outcomes(&self) -> &[OutcomeCoefficients] {
        &self.outcomes
    }

    /// Outcome probabilities at fidelity `f`, in model order.
    pub fn probabilities(&self, f: f64) -> Vec<f64> {
        self.outcomes
            .iter()
            .map(|o| f * o.a + (1.0 - f) / 3.0 * o.b)
            .collect()
    }
}

/// Outcome law of the bilateral Pauli measurement: `r = 0` (results differ)
/// with `(a, b) = (1, 1)` and `r = 1` (results match) with `(a, b) = (0, 2)`.
pub fn proposed_outcome_model() -> LinearOutcomeModel {
    LinearOutcomeModel {
        outcomes: vec![
            OutcomeCoefficients {
                label: "r=0".into(),
                a: 1.0,
                b: 1.0,
            },
            OutcomeCoefficients {
                label: "r=1".into(),
                a: 0.0,
                b: 2.0,
            },
        ],
    }
}
