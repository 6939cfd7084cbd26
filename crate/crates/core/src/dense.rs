//! Dense reference oracle for one to three qubit pairs.
//!
//! States and operators are explicit complex matrices of dimension 4, 16 or 64.
//! Pair 0 is the most significant tensor factor and, within a pair, node A's
//! qubit comes before node B's. The measurement operators are assembled from
//! single-qubit Pauli projectors, never from the Bell vectors, so comparing
//! them against Bell-basis expressions is a genuine check.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bell::{BellIndex, PairState, PauliBasis};
use crate::error::{domain, Result};

/// Tolerance for exact algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for positivity and probability checks.
pub const PSD_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Matrix = DMatrix<Complex64>;
pub type Vector = DVector<Complex64>;

/// Square complex operator on one to three qubit pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    mat: Matrix,
}

impl DenseOperator {
    /// Wraps a matrix; the dimension must be 4, 16 or 64.
    pub fn new(mat: Matrix) -> Result<Self> {
        if !mat.is_square() || !matches!(mat.nrows(), 4 | 16 | 64) {
            return Err(domain(format!(
                "dense operators must be 4x4, 16x16 or 64x64, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { mat })
    }

    /// Wraps a matrix after checking it is a density operator: Hermitian
    /// within 1e-12, PSD within 1e-10 and unit trace within 1e-12.
    pub fn density(mat: Matrix) -> Result<Self> {
        let op = Self::new(mat)?;
        op.validate_state()?;
        Ok(op)
    }

    pub fn identity(pairs: usize) -> Result<Self> {
        let dim = pair_dim(pairs)?;
        Self::new(Matrix::identity(dim, dim))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn pure(psi: &Vector) -> Result<Self> {
        Self::new(psi * psi.adjoint())
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &Vector, bra: &Vector) -> Result<Self> {
        Self::new(ket * bra.adjoint())
    }

    /// Bell-diagonal embedding `Σ_i p_i |b_i⟩⟨b_i|` of a pair state.
    pub fn from_pair_state(state: &PairState) -> Self {
        let bells = bell_vectors();
        let mut mat = Matrix::zeros(4, 4);
        for idx in BellIndex::ALL {
            let v = &bells[idx.index()];
            mat += v * v.adjoint() * Complex64::from(state.prob(idx));
        }
        Self { mat }
    }

    /// Tensor product of per-pair Bell-diagonal states.
    pub fn from_pair_states(states: &[PairState]) -> Result<Self> {
        pair_dim(states.len())?;
        let mut mat = Matrix::identity(1, 1);
        for s in states {
            mat = mat.kronecker(&Self::from_pair_state(s).mat);
        }
        Self::new(mat)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn pairs(&self) -> usize {
        match self.dim() {
            4 => 1,
            16 => 2,
            _ => 3,
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        max_abs_diff(&self.mat, &self.mat.adjoint()) <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.mat + self.mat.adjoint()) * Complex64::from(0.5);
        herm.symmetric_eigenvalues().min()
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(IDENTITY_TOL) && self.min_eigenvalue() >= -tol
    }

    pub fn validate_state(&self) -> Result<()> {
        if !self.is_hermitian(IDENTITY_TOL) {
            return Err(domain("density operator is not Hermitian"));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > IDENTITY_TOL || tr.im.abs() > IDENTITY_TOL {
            return Err(domain(format!("density operator has trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(domain(format!(
                "density operator is not positive semidefinite (min eigenvalue {min})"
            )));
        }
        Ok(())
    }

    /// Largest entrywise distance to another operator of the same shape.
    pub fn max_abs_diff(&self, other: &DenseOperator) -> f64 {
        max_abs_diff(&self.mat, &other.mat)
    }

    /// Bell-basis matrix elements `⟨b_i|op|b_j⟩` of a single-pair operator.
    pub fn bell_basis_elements(&self) -> Result<[[Complex64; 4]; 4]> {
        if self.dim() != 4 {
            return Err(domain(
                "Bell-basis elements are defined for single pairs only",
            ));
        }
        let bells = bell_vectors();
        let mut out = [[ZERO; 4]; 4];
        for (i, bi) in bells.iter().enumerate() {
            for (j, bj) in bells.iter().enumerate() {
                out[i][j] = (bi.adjoint() * &self.mat * bj)[(0, 0)];
            }
        }
        Ok(out)
    }
}

fn pair_dim(pairs: usize) -> Result<usize> {
    match pairs {
        1 => Ok(4),
        2 => Ok(16),
        3 => Ok(64),
        _ => Err(domain(format!(
            "dense oracle supports 1 to 3 pairs, got {pairs}"
        ))),
    }
}

fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn vec4(entries: [f64; 4]) -> Vector {
    Vector::from_iterator(4, entries.iter().map(|x| Complex64::from(*x)))
}

/// `|Ψ−⟩, |Ψ+⟩, |Φ−⟩, |Φ+⟩` in the computational basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn bell_vectors() -> [Vector; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [
        vec4([0.0, h, -h, 0.0]),
        vec4([0.0, h, h, 0.0]),
        vec4([h, 0.0, 0.0, -h]),
        vec4([h, 0.0, 0.0, h]),
    ]
}

/// Computational basis vector `|index⟩` of a 4-dimensional pair space.
pub fn computational_vector(index: usize) -> Vector {
    let mut v = Vector::zeros(4);
    v[index] = ONE;
    v
}

pub fn pauli(basis: PauliBasis) -> Matrix {
    match basis {
        PauliBasis::X => Matrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        PauliBasis::Y => Matrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        PauliBasis::Z => Matrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    }
}

/// Single-qubit eigenprojectors `(I + σ)/2` and `(I − σ)/2`. All entries are
/// dyadic, so sums and tensor products of them are exact in floating point.
fn eigenprojectors(basis: PauliBasis) -> (Matrix, Matrix) {
    let id = Matrix::identity(2, 2);
    let s = pauli(basis);
    let half = Complex64::from(0.5);
    ((&id + &s) * half, (&id - &s) * half)
}

/// Measurement operators `(M_{u,0}, M_{u,1})` for both nodes measuring in `basis`:
/// `M_{u,0}` collects differing results and `M_{u,1}` matching results.
pub fn protocol_povm(basis: PauliBasis) -> (DenseOperator, DenseOperator) {
    let (plus, minus) = eigenprojectors(basis);
    let differ = plus.kronecker(&minus) + minus.kronecker(&plus);
    let same = plus.kronecker(&plus) + minus.kronecker(&minus);
    (DenseOperator { mat: differ }, DenseOperator { mat: same })
}

/// Applies a single-pair operator to pair `target` of a `pairs`-pair space.
fn embed(op: &Matrix, target: usize, pairs: usize) -> Matrix {
    let before = 4usize.pow(target as u32);
    let after = 4usize.pow((pairs - target - 1) as u32);
    Matrix::identity(before, before)
        .kronecker(op)
        .kronecker(&Matrix::identity(after, after))
}

fn apply_kraus(rho: &Matrix, kraus: &[Matrix]) -> Matrix {
    let dim = rho.nrows();
    let mut out = Matrix::zeros(dim, dim);
    for k in kraus {
        out += k * rho * k.adjoint();
    }
    out
}

/// Kraus operators of the two probabilistic bilateral 180° rotations, first
/// about x then about y: `{I/√2, −σx⊗σx/√2}` and `{I/√2, −σy⊗σy/√2}`.
pub fn rotation_kraus() -> [[Matrix; 2]; 2] {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let id = Matrix::identity(4, 4) * h;
    let xx = pauli(PauliBasis::X).kronecker(&pauli(PauliBasis::X)) * (-h);
    let yy = pauli(PauliBasis::Y).kronecker(&pauli(PauliBasis::Y)) * (-h);
    [[id.clone(), xx], [id, yy]]
}

/// Bell projector Kraus form `{|φ⟩⟨φ|}` of the same twirl.
pub fn projector_kraus() -> [Matrix; 4] {
    bell_vectors().map(|v| &v * v.adjoint())
}

fn check_pairs(op: &DenseOperator, pairs: usize) -> Result<()> {
    if pair_dim(pairs)? != op.dim() {
        return Err(domain(format!(
            "operator of dimension {} does not describe {pairs} pairs",
            op.dim()
        )));
    }
    Ok(())
}

/// The twirl as a linear map on arbitrary operators, applied independently to
/// every pair through the rotation Kraus operators.
pub fn twirl_map(op: &DenseOperator, pairs: usize) -> Result<DenseOperator> {
    check_pairs(op, pairs)?;
    let mut mat = op.mat.clone();
    for target in 0..pairs {
        for stage in rotation_kraus() {
            let kraus: Vec<Matrix> = stage.iter().map(|k| embed(k, target, pairs)).collect();
            mat = apply_kraus(&mat, &kraus);
        }
    }
    Ok(DenseOperator { mat })
}

/// The same map computed through the Bell projector Kraus operators.
pub fn twirl_map_projective(op: &DenseOperator, pairs: usize) -> Result<DenseOperator> {
    check_pairs(op, pairs)?;
    let mut mat = op.mat.clone();
    for target in 0..pairs {
        let kraus: Vec<Matrix> = projector_kraus()
            .iter()
            .map(|k| embed(k, target, pairs))
            .collect();
        mat = apply_kraus(&mat, &kraus);
    }
    Ok(DenseOperator { mat })
}

/// Twirls a density operator on `pairs` pairs.
pub fn twirl_channel(state: &DenseOperator, pairs: usize) -> Result<DenseOperator> {
    check_pairs(state, pairs)?;
    state.validate_state()?;
    twirl_map(state, pairs)
}

/// `Tr(ρ E)`. Negative rounding dust down to −1e-12 is clamped to zero.
pub fn born_probability(state: &DenseOperator, effect: &DenseOperator) -> Result<f64> {
    if state.dim() != effect.dim() {
        return Err(domain(format!(
            "state dimension {} does not match effect dimension {}",
            state.dim(),
            effect.dim()
        )));
    }
    let p = (&state.mat * &effect.mat).trace().re;
    if p < -IDENTITY_TOL {
        return Err(domain(format!("Born probability {p} is negative")));
    }
    Ok(p.max(0.0))
}

/// Fidelity of pair `target` after tracing out the others.
pub fn pair_fidelity(state: &DenseOperator, target: usize) -> Result<f64> {
    let pairs = state.pairs();
    if target >= pairs {
        return Err(domain(format!(
            "pair {target} out of range for {pairs} pairs"
        )));
    }
    let singlet = &bell_vectors()[0];
    let proj = embed(&(singlet * singlet.adjoint()), target, pairs);
    Ok((&state.mat * proj).trace().re)
}

/// `A ⊗ B` with both factors 2×2 Hermitian PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOperator {
    factor_a: Matrix,
    factor_b: Matrix,
}

impl ProductOperator {
    pub fn new(factor_a: Matrix, factor_b: Matrix) -> Result<Self> {
        for (name, f) in [("factor_a", &factor_a), ("factor_b", &factor_b)] {
            if f.shape() != (2, 2) {
                return Err(domain(format!("{name} must be 2x2")));
            }
            if max_abs_diff(f, &f.adjoint()) > PSD_TOL {
                return Err(domain(format!("{name} is not Hermitian")));
            }
            let herm = (f + f.adjoint()) * Complex64::from(0.5);
            if herm.symmetric_eigenvalues().min() < -PSD_TOL {
                return Err(domain(format!("{name} is not positive semidefinite")));
            }
        }
        Ok(Self { factor_a, factor_b })
    }

    pub fn factor_a(&self) -> &Matrix {
        &self.factor_a
    }

    pub fn factor_b(&self) -> &Matrix {
        &self.factor_b
    }

    pub fn to_dense(&self) -> DenseOperator {
        DenseOperator {
            mat: self.factor_a.kronecker(&self.factor_b),
        }
    }
}

/// `Tr(|Ψ−⟩⟨Ψ−| A⊗B) / Tr(A⊗B)`; bounded by 1/2 for any product operator.
pub fn separable_fidelity_ratio(op: &ProductOperator) -> Result<f64> {
    let full = op.to_dense();
    let total = full.trace().re;
    if total <= PSD_TOL {
        return Err(domain("product operator has zero trace"));
    }
    let singlet = &bell_vectors()[0];
    let overlap = (singlet.adjoint() * full.matrix() * singlet)[(0, 0)].re;
    Ok(overlap / total)
}

/// True when `Σ_φ T_φ† op T_φ` reproduces `op` entrywise within 1e-12.
pub fn is_twirl_invariant(op: &DenseOperator) -> Result<bool> {
    if op.dim() != 4 {
        return Err(domain(
            "twirl invariance is checked on single-pair operators",
        ));
    }
    let mut sum = Matrix::zeros(4, 4);
    for t in projector_kraus() {
        sum += t.adjoint() * op.matrix() * &t;
    }
    Ok(max_abs_diff(&sum, op.matrix()) <= IDENTITY_TOL)
}

/// Twirl invariance of `M_{basis,outcome}`; `outcome` 0 means results differ,
/// anything else means they match.
pub fn tmur_invariance_check(basis: PauliBasis, outcome: u8) -> bool {
    let (differ, same) = protocol_povm(basis);
    let op = if outcome == 0 { differ } else { same };
    is_twirl_invariant(&op).unwrap_or(false)
}

/// Random 2×2 PSD matrix `G G†` with i.i.d. standard normal real and imaginary parts.
pub fn random_psd_factor<R: Rng + ?Sized>(rng: &mut R) -> Matrix {
    let g = Matrix::from_fn(2, 2, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    &g * g.adjoint()
}

/// Random full-rank density operator on `pairs` pairs, `G G† / Tr(G G†)`.
pub fn random_density<R: Rng + ?Sized>(pairs: usize, rng: &mut R) -> Result<DenseOperator> {
    let dim = pair_dim(pairs)?;
    let g = Matrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    // Restore exact Hermiticity lost to rounding in the product.
    let rho = (&rho + rho.adjoint()) * Complex64::from(0.5);
    DenseOperator::density(rho)
}
