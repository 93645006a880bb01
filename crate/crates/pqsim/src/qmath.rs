//! Dense complex linear algebra and quantum-state utilities.
//!
//! Everything operates on small (at most 16x16) dense matrices, so the
//! routines favour clarity over asymptotic cleverness. Bit convention used
//! throughout the crate: qubit `n-1` is the leftmost symbol in ket strings
//! and the most significant bit of a basis-state index.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use thiserror::Error;

/// Complex scalar used everywhere.
pub type Complex = Complex64;
/// Dense complex matrix, the universal carrier for states, operators and unitaries.
pub type CMatrix = DMatrix<Complex>;
/// Dense complex vector (a pure state or an unnormalized branch).
pub type CVector = DVector<Complex>;
/// One unnormalized pure-state branch of a [`MixedState`].
pub type PureBranch = CVector;

/// Structural tolerance (unitarity, completeness, positivity).
pub const TOL_STRUCTURAL: f64 = 1e-10;
/// Arithmetic tolerance (hermiticity, exact algebraic identities).
pub const TOL_ARITHMETIC: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum QmathError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("invalid qubit indices: {0}")]
    BadQubitIndices(String),
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0), -Complex::i(), Complex::i(), c(0.0)],
    )
}

/// `sigma_z |0> = +|0>`; `(1 - sigma_z)/2` projects onto `|1>`.
pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

/// Computational basis ket `|index>` of the given dimension.
pub fn basis_ket(dim: usize, index: usize) -> CVector {
    let mut v = CVector::zeros(dim);
    v[index] = c(1.0);
    v
}

fn c(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Largest entrywise absolute difference between two equally sized matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "max_abs_diff shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

pub fn is_unitary(m: &CMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.nrows();
    max_abs_diff(&(m.adjoint() * m), &identity(n)) <= tol
}

/// Kronecker product `A (x) B`; the left factor owns the high-order index bits.
pub fn tensor_product(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Kronecker product of two state vectors, left factor high.
pub fn tensor_product_vec(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            out[i * b.len() + j] = ai * bj;
        }
    }
    out
}

/// Trace out the listed qubits of a `2^n x 2^n` density matrix.
///
/// Remaining qubits keep their relative order. The trace is preserved.
pub fn partial_trace(
    rho: &CMatrix,
    total_qubits: usize,
    traced_qubits: &[usize],
) -> Result<CMatrix, QmathError> {
    let dim = 1usize << total_qubits;
    if rho.nrows() != dim || rho.ncols() != dim {
        return Err(QmathError::DimensionMismatch(format!(
            "expected {dim}x{dim} density matrix, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let mut seen = vec![false; total_qubits];
    for &q in traced_qubits {
        if q >= total_qubits || seen[q] {
            return Err(QmathError::BadQubitIndices(format!(
                "traced qubit {q} invalid or repeated"
            )));
        }
        seen[q] = true;
    }
    let keep: Vec<usize> = (0..total_qubits).filter(|q| !seen[*q]).collect();
    let kdim = 1usize << keep.len();
    let tdim = 1usize << traced_qubits.len();

    let compose = |kept_bits: usize, traced_bits: usize| -> usize {
        let mut idx = 0usize;
        for (t, &q) in keep.iter().enumerate() {
            idx |= ((kept_bits >> t) & 1) << q;
        }
        for (t, &q) in traced_qubits.iter().enumerate() {
            idx |= ((traced_bits >> t) & 1) << q;
        }
        idx
    };

    let mut out = CMatrix::zeros(kdim, kdim);
    for ik in 0..kdim {
        for jk in 0..kdim {
            let mut s = Complex::new(0.0, 0.0);
            for e in 0..tdim {
                s += rho[(compose(ik, e), compose(jk, e))];
            }
            out[(ik, jk)] = s;
        }
    }
    Ok(out)
}

/// `exp(i t H)` for Hermitian `H`, via eigendecomposition.
///
/// Unitary up to rounding; non-Hermitian input is rejected.
pub fn unitary_from_hamiltonian(h: &CMatrix, t: f64) -> Result<CMatrix, QmathError> {
    let residual = max_abs_diff(h, &h.adjoint());
    if residual > 1e-9 {
        return Err(QmathError::NotHermitian(residual));
    }
    // Symmetrize so the eigensolver sees an exactly Hermitian matrix.
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let phases: Vec<Complex> = eig
        .eigenvalues
        .iter()
        .map(|&w| Complex::new(0.0, t * w).exp())
        .collect();
    let v = eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, phase) in phases.iter().enumerate() {
        for i in 0..scaled.nrows() {
            scaled[(i, j)] *= phase;
        }
    }
    Ok(scaled * v.adjoint())
}

/// Embed `op` so it acts on the listed qubits of a larger register.
///
/// `on_qubits` is ordered high bit first: `on_qubits[0]` is the operator's
/// most significant qubit. All other qubits get the identity.
pub fn embed_operator(
    op: &CMatrix,
    on_qubits: &[usize],
    total_qubits: usize,
) -> Result<CMatrix, QmathError> {
    let k = on_qubits.len();
    let opdim = 1usize << k;
    if op.nrows() != opdim || op.ncols() != opdim {
        return Err(QmathError::DimensionMismatch(format!(
            "operator is {}x{}, expected {opdim}x{opdim} for {k} qubits",
            op.nrows(),
            op.ncols()
        )));
    }
    let mut seen = vec![false; total_qubits];
    for &q in on_qubits {
        if q >= total_qubits || seen[q] {
            return Err(QmathError::BadQubitIndices(format!(
                "qubit {q} out of range or repeated"
            )));
        }
        seen[q] = true;
    }
    let dim = 1usize << total_qubits;
    let mut out = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        // column index of op selected by the embedded qubits of j
        let mut jc = 0usize;
        for (t, &q) in on_qubits.iter().enumerate() {
            jc |= ((j >> q) & 1) << (k - 1 - t);
        }
        for ic in 0..opdim {
            let mut i = j;
            for (t, &q) in on_qubits.iter().enumerate() {
                let bit = (ic >> (k - 1 - t)) & 1;
                i = (i & !(1 << q)) | (bit << q);
            }
            out[(i, j)] += op[(ic, jc)];
        }
    }
    Ok(out)
}

/// A pure single-qubit state by its Bloch-sphere angles.
///
/// Maps to amplitudes `a = cos(theta/2)`, `b = e^{i phi} sin(theta/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    /// Polar angle in `[0, pi]`.
    pub theta: f64,
    /// Azimuthal angle in `[0, 2 pi)`.
    pub phi: f64,
}

impl BlochPoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        Self { theta, phi }
    }

    /// The state vector `(a, b)`; normalized by construction.
    pub fn state(&self) -> CVector {
        let a = Complex::new((self.theta / 2.0).cos(), 0.0);
        let b = Complex::new(0.0, self.phi).exp() * (self.theta / 2.0).sin();
        CVector::from_vec(vec![a, b])
    }
}

/// Worst-case fidelity over all pure single-qubit inputs.
///
/// Two stages: a coarse 33x32 grid over `(theta, phi)`, then pattern-search
/// refinement around the grid minimum until the fidelity stops improving by
/// more than `tol`. The global stage matters because the minimizer can sit
/// at the equator or at a pole depending on the channel.
pub fn min_fidelity_over_inputs<F>(channel_eval: F, tol: f64) -> (BlochPoint, f64)
where
    F: Fn(BlochPoint) -> f64,
{
    let mut best = (BlochPoint::new(0.0, 0.0), f64::INFINITY);
    let n_theta = 33;
    let n_phi = 32;
    for it in 0..n_theta {
        let theta = std::f64::consts::PI * it as f64 / (n_theta - 1) as f64;
        for ip in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
            let p = BlochPoint::new(theta, phi);
            let f = channel_eval(p);
            if f < best.1 {
                best = (p, f);
            }
        }
    }
    refine_bloch(channel_eval, best, tol)
}

/// Pattern-search stage of [`min_fidelity_over_inputs`], exposed for callers
/// that supply their own starting point (for example, a grid shared across
/// many related searches).
pub fn refine_bloch<F>(
    channel_eval: F,
    start: (BlochPoint, f64),
    tol: f64,
) -> (BlochPoint, f64)
where
    F: Fn(BlochPoint) -> f64,
{
    use std::f64::consts::PI;
    let (mut p, mut f) = start;
    let mut step = PI / 32.0;
    let mut f_at_last_shrink = f;
    while step > 1e-12 {
        let mut improved = false;
        for (dt, dp) in [
            (1.0, 0.0),
            (-1.0, 0.0),
            (0.0, 1.0),
            (0.0, -1.0),
            (1.0, 1.0),
            (1.0, -1.0),
            (-1.0, 1.0),
            (-1.0, -1.0),
        ] {
            let theta = (p.theta + dt * step).clamp(0.0, PI);
            let phi = (p.phi + dp * 2.0 * step).rem_euclid(2.0 * PI);
            let cand = BlochPoint::new(theta, phi);
            let v = channel_eval(cand);
            if v < f {
                p = cand;
                f = v;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
            if f_at_last_shrink - f < tol && step < 1e-6 {
                break;
            }
            f_at_last_shrink = f;
        }
    }
    (p, f)
}

/// A mixed state as a direct sum of unnormalized pure branches.
///
/// The branch norms squared are the outcome probabilities; they must sum to
/// one for a physical state.
#[derive(Debug, Clone)]
pub struct MixedState {
    branches: Vec<PureBranch>,
    dim: usize,
}

impl MixedState {
    /// A single-branch (pure) state.
    pub fn pure(psi: CVector) -> Self {
        let dim = psi.len();
        Self {
            branches: vec![psi],
            dim,
        }
    }

    pub fn from_branches(branches: Vec<PureBranch>) -> Result<Self, QmathError> {
        let dim = branches
            .first()
            .map(|b| b.len())
            .ok_or_else(|| QmathError::DimensionMismatch("no branches".into()))?;
        if branches.iter().any(|b| b.len() != dim) {
            return Err(QmathError::DimensionMismatch(
                "branches of unequal dimension".into(),
            ));
        }
        Ok(Self { branches, dim })
    }

    pub fn branches(&self) -> &[PureBranch] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Sum of branch norms squared; 1 for a physical state.
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.norm_squared()).sum()
    }

    /// `rho = sum_k |phi_k><phi_k|`.
    pub fn density_matrix(&self) -> CMatrix {
        let mut rho = CMatrix::zeros(self.dim, self.dim);
        for b in &self.branches {
            rho += b * b.adjoint();
        }
        rho
    }

    /// Drop branches with norm squared below `floor`.
    pub fn pruned(mut self, floor: f64) -> Self {
        self.branches.retain(|b| b.norm_squared() >= floor);
        self
    }
}
