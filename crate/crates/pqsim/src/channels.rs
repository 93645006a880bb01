//! Kraus-channel construction and application.
//!
//! A channel is an ordered set of linear operators `A_k` with
//! `sum_k A_k^dag A_k = I` on its declared support. Channels act on density
//! matrices (`rho -> sum_k A_k rho A_k^dag`) or on [`MixedState`] values in
//! the single-wavefunction picture (`psi -> (+)_k A_k psi`).
//!
//! Phase damping comes in two single-qubit forms (computational dephasing
//! and the bit-flip form seen from the Bell basis), an N-qubit product form,
//! and a fast application path that never materializes the `2^n` operator
//! matrices. Amplitude damping covers finite-temperature relaxation and the
//! balanced dual-rail loss channel.

use crate::qmath::{
    identity, pauli_x, pauli_z, tensor_product, CMatrix, CVector, Complex, MixedState,
};
use thiserror::Error;

/// Branches below this norm squared are dropped when applying a channel to a
/// mixed state; keeps the per-application branch blowup bounded.
pub const PRUNE_FLOOR: f64 = 1e-30;

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("negative or non-finite parameter: {0}")]
    BadParameter(String),
    #[error("dimension mismatch: channel is {channel}x{channel}, state is {state}")]
    DimensionMismatch { channel: usize, state: usize },
    #[error("qubit count {0} outside supported range 1..=10")]
    QubitCountOutOfRange(usize),
    #[error("flip count {m} exceeds qubit count {n}")]
    FlipCountTooLarge { n: usize, m: usize },
    #[error("stationary state undefined: both transition probabilities are zero")]
    UndefinedStationaryState,
}

/// An ordered set of Kraus operators, all of the same square dimension.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    operators: Vec<CMatrix>,
    label: String,
    /// Basis indices spanning the subspace on which completeness holds.
    /// `None` means the full space.
    support: Option<Vec<usize>>,
}

impl KrausChannel {
    pub fn new(label: impl Into<String>, operators: Vec<CMatrix>) -> Self {
        Self::with_support(label, operators, None)
    }

    pub fn with_support(
        label: impl Into<String>,
        operators: Vec<CMatrix>,
        support: Option<Vec<usize>>,
    ) -> Self {
        let dim = operators.first().map(|a| a.nrows()).unwrap_or(0);
        assert!(
            operators.iter().all(|a| a.nrows() == dim && a.ncols() == dim),
            "Kraus operators must share one square dimension"
        );
        Self {
            operators,
            label: label.into(),
            support,
        }
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.operators.first().map(|a| a.nrows()).unwrap_or(0)
    }

    pub fn support(&self) -> Option<&[usize]> {
        self.support.as_deref()
    }

    /// `max | (sum_k A_k^dag A_k - I)[i][j] |`, restricted to the declared
    /// support subspace when one is present.
    pub fn completeness_residual(&self) -> f64 {
        let dim = self.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for a in &self.operators {
            sum += a.adjoint() * a;
        }
        match &self.support {
            None => crate::qmath::max_abs_diff(&sum, &identity(dim)),
            Some(idx) => {
                let mut worst = 0.0f64;
                for (r, &i) in idx.iter().enumerate() {
                    for (s, &j) in idx.iter().enumerate() {
                        let expect = if r == s {
                            Complex::new(1.0, 0.0)
                        } else {
                            Complex::new(0.0, 0.0)
                        };
                        worst = worst.max((sum[(i, j)] - expect).norm());
                    }
                }
                worst
            }
        }
    }

    /// `rho -> sum_k A_k rho A_k^dag`.
    pub fn apply_to_density(&self, rho: &CMatrix) -> Result<CMatrix, ChannelError> {
        let dim = self.dim();
        if rho.nrows() != dim || rho.ncols() != dim {
            return Err(ChannelError::DimensionMismatch {
                channel: dim,
                state: rho.nrows(),
            });
        }
        let mut out = CMatrix::zeros(dim, dim);
        for a in &self.operators {
            out += a * rho * a.adjoint();
        }
        Ok(out)
    }

    /// `psi -> (+)_k A_k psi`, dropping branches below [`PRUNE_FLOOR`].
    pub fn apply_to_mixed(&self, psi: &MixedState) -> Result<MixedState, ChannelError> {
        let dim = self.dim();
        if psi.dim() != dim {
            return Err(ChannelError::DimensionMismatch {
                channel: dim,
                state: psi.dim(),
            });
        }
        let mut branches = Vec::with_capacity(psi.branches().len() * self.operators.len());
        for b in psi.branches() {
            for a in &self.operators {
                let out = a * b;
                if out.norm_squared() >= PRUNE_FLOOR {
                    branches.push(out);
                }
            }
        }
        if branches.is_empty() {
            branches.push(CVector::zeros(dim));
        }
        Ok(MixedState::from_branches(branches).expect("equal dims by construction"))
    }

    /// The channel as a matrix on column-stacked density matrices:
    /// `vec(rho_out) = S vec(rho_in)` with `S = sum_k conj(A_k) (x) A_k`.
    pub fn superoperator(&self) -> CMatrix {
        let dim = self.dim();
        let mut s = CMatrix::zeros(dim * dim, dim * dim);
        for a in &self.operators {
            s += tensor_product(&a.map(|z| z.conj()), a);
        }
        s
    }
}

/// Derived no-flip probability `alpha = (1 + e^{-lambda}) / 2`.
pub fn alpha_from_lambda(lambda: f64) -> f64 {
    (1.0 + (-lambda).exp()) / 2.0
}

/// Damping strengths for the channels in this module.
///
/// `lambda` is the decoherence per timestep; `gamma0`/`gamma1` are the
/// upward/downward amplitude-damping exponents and `gamma` the dual-rail
/// loss exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingParams {
    pub lambda: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma: f64,
}

impl DampingParams {
    pub fn phase(lambda: f64) -> Self {
        Self {
            lambda,
            gamma0: 0.0,
            gamma1: 0.0,
            gamma: 0.0,
        }
    }

    /// No-flip probability for the bit-flip picture; in `(1/2, 1]` for
    /// `lambda` in `[0, inf)`.
    pub fn alpha(&self) -> f64 {
        alpha_from_lambda(self.lambda)
    }

    /// Upward transition probability `p = 1 - e^{-gamma0}`.
    pub fn p_up(&self) -> f64 {
        1.0 - (-self.gamma0).exp()
    }

    /// Downward transition probability `q = 1 - e^{-gamma1}`.
    pub fn q_down(&self) -> f64 {
        1.0 - (-self.gamma1).exp()
    }
}

/// Which decomposition of single-qubit phase damping to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseDampingBasis {
    /// `{diag(1, e^{-lambda}), diag(0, sqrt(1 - e^{-2 lambda}))}`; decays the
    /// off-diagonal density-matrix entries in the computational basis.
    ComputationalDephasing,
    /// `{sqrt(alpha) I, sqrt(1-alpha) sigma_x}`; the same physical process
    /// seen from the Bell basis, where it flips the bit with probability
    /// `1 - alpha`.
    BellBitflip,
}

fn require_nonnegative(value: f64, name: &str) -> Result<(), ChannelError> {
    if !value.is_finite() || value < 0.0 {
        return Err(ChannelError::BadParameter(format!("{name} = {value}")));
    }
    Ok(())
}

/// Single-qubit phase damping with decoherence `lambda` per timestep.
pub fn phase_damping_1q(
    lambda: f64,
    basis: PhaseDampingBasis,
) -> Result<KrausChannel, ChannelError> {
    require_nonnegative(lambda, "lambda")?;
    let e = (-lambda).exp();
    let ops = match basis {
        PhaseDampingBasis::ComputationalDephasing => {
            let a0 = CMatrix::from_diagonal(&CVector::from_vec(vec![
                Complex::new(1.0, 0.0),
                Complex::new(e, 0.0),
            ]));
            let a1 = CMatrix::from_diagonal(&CVector::from_vec(vec![
                Complex::new(0.0, 0.0),
                Complex::new((1.0 - e * e).max(0.0).sqrt(), 0.0),
            ]));
            vec![a0, a1]
        }
        PhaseDampingBasis::BellBitflip => {
            let alpha = alpha_from_lambda(lambda);
            vec![
                identity(2).scale(alpha.sqrt()),
                pauli_x().scale((1.0 - alpha).sqrt()),
            ]
        }
    };
    Ok(KrausChannel::new("phase-damping-1q", ops))
}

fn check_alpha(alpha: f64) -> Result<(), ChannelError> {
    if !(0.5..=1.0 + 1e-12).contains(&alpha) {
        return Err(ChannelError::BadParameter(format!("alpha = {alpha}")));
    }
    Ok(())
}

fn hamming(k: usize) -> u32 {
    k.count_ones()
}

fn flip_weight(n: usize, k: usize, alpha: f64) -> f64 {
    let h = hamming(k) as i32;
    (alpha.powi(n as i32 - h) * (1.0 - alpha).powi(h)).sqrt()
}

/// N-qubit phase damping in the bit-flip picture: `2^n` operators
/// `sqrt(alpha^{n-h(k)} (1-alpha)^{h(k)}) (x)_j sigma_x^{bit_j(k)}`.
pub fn phase_damping_nq(n: usize, alpha: f64) -> Result<KrausChannel, ChannelError> {
    product_damping_nq(n, alpha, &pauli_x(), "phase-damping-nq")
}

/// N-qubit phase damping in the computational representation: the same
/// channel with `sigma_z` in place of `sigma_x`, decaying off-diagonals by
/// Hamming distance.
pub fn dephasing_nq(n: usize, alpha: f64) -> Result<KrausChannel, ChannelError> {
    product_damping_nq(n, alpha, &pauli_z(), "dephasing-nq")
}

fn product_damping_nq(
    n: usize,
    alpha: f64,
    pauli: &CMatrix,
    label: &str,
) -> Result<KrausChannel, ChannelError> {
    if !(1..=10).contains(&n) {
        return Err(ChannelError::QubitCountOutOfRange(n));
    }
    check_alpha(alpha)?;
    let mut ops = Vec::with_capacity(1 << n);
    for k in 0..(1usize << n) {
        let mut m = CMatrix::identity(1, 1);
        // qubit n-1 is the leftmost tensor factor
        for q in (0..n).rev() {
            let factor = if (k >> q) & 1 == 1 {
                pauli.clone()
            } else {
                identity(2)
            };
            m = tensor_product(&m, &factor);
        }
        ops.push(m.scale(flip_weight(n, k, alpha)));
    }
    Ok(KrausChannel::new(label, ops))
}

fn binomial(n: usize, m: usize) -> f64 {
    let mut out = 1.0f64;
    for i in 0..m {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

/// Probability that exactly `m` of `n` qubit labels flip:
/// `C(n,m) alpha^{n-m} (1-alpha)^m`.
pub fn flip_count_prob(n: usize, m: usize, alpha: f64) -> Result<f64, ChannelError> {
    if m > n {
        return Err(ChannelError::FlipCountTooLarge { n, m });
    }
    check_alpha(alpha)?;
    Ok(binomial(n, m) * alpha.powi((n - m) as i32) * (1.0 - alpha).powi(m as i32))
}

/// Fast N-qubit phase damping: for each branch and each `k`, permute the
/// amplitudes by index XOR `k` and scale by the flip weight. Identical to
/// applying [`phase_damping_nq`] without building the `2^n` matrices.
pub fn phase_damping_apply_fast(
    psi: &MixedState,
    alpha: f64,
) -> Result<MixedState, ChannelError> {
    fast_damping(psi, alpha, |branch, k, dim| {
        CVector::from_fn(dim, |i, _| branch[i ^ k])
    })
}

/// Computational-representation counterpart of [`phase_damping_apply_fast`]:
/// sign flips `(-1)^{h(i AND k)}` instead of index permutations. Same channel
/// conjugated by the per-qubit basis change.
pub fn dephasing_apply_fast(psi: &MixedState, alpha: f64) -> Result<MixedState, ChannelError> {
    fast_damping(psi, alpha, |branch, k, dim| {
        CVector::from_fn(dim, |i, _| {
            if hamming(i & k) % 2 == 1 {
                -branch[i]
            } else {
                branch[i]
            }
        })
    })
}

fn fast_damping<G>(psi: &MixedState, alpha: f64, permute: G) -> Result<MixedState, ChannelError>
where
    G: Fn(&CVector, usize, usize) -> CVector,
{
    check_alpha(alpha)?;
    let dim = psi.dim();
    assert!(dim.is_power_of_two(), "register dimension must be 2^n");
    let n = dim.trailing_zeros() as usize;
    let mut branches = Vec::with_capacity(psi.branches().len() << n);
    for b in psi.branches() {
        for k in 0..dim {
            let w = flip_weight(n, k, alpha);
            if w * w * b.norm_squared() < PRUNE_FLOOR {
                continue;
            }
            branches.push(permute(b, k, dim).scale(w));
        }
    }
    if branches.is_empty() {
        branches.push(CVector::zeros(dim));
    }
    Ok(MixedState::from_branches(branches).expect("equal dims by construction"))
}

/// Single-qubit amplitude damping with upward exponent `gamma0` and downward
/// exponent `gamma1`: `{sqrt(p)|1><0|, sqrt(1-p)|0><0| + sqrt(1-q)|1><1|,
/// sqrt(q)|0><1|}`.
pub fn amplitude_damping_1q(gamma0: f64, gamma1: f64) -> Result<KrausChannel, ChannelError> {
    require_nonnegative(gamma0, "gamma0")?;
    require_nonnegative(gamma1, "gamma1")?;
    let p = 1.0 - (-gamma0).exp();
    let q = 1.0 - (-gamma1).exp();
    let zero = Complex::new(0.0, 0.0);
    let up = CMatrix::from_row_slice(2, 2, &[zero, zero, Complex::new(p.sqrt(), 0.0), zero]);
    let stay = CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new((1.0 - p).sqrt(), 0.0),
            zero,
            zero,
            Complex::new((1.0 - q).sqrt(), 0.0),
        ],
    );
    let down = CMatrix::from_row_slice(2, 2, &[zero, Complex::new(q.sqrt(), 0.0), zero, zero]);
    Ok(KrausChannel::new(
        "amplitude-damping-1q",
        vec![up, stay, down],
    ))
}

/// Stationary state `diag(q, p)/(p+q)` of amplitude damping and the matching
/// reservoir temperature `k_B T / Delta E = 1 / ln(q/p)`.
///
/// IEEE arithmetic carries the limits: `q = p` gives `+inf` (infinite
/// temperature), `p = 0` gives `+0`, `q = 0` gives `-0`.
pub fn amplitude_damping_stationary(
    gamma0: f64,
    gamma1: f64,
) -> Result<(CMatrix, f64), ChannelError> {
    require_nonnegative(gamma0, "gamma0")?;
    require_nonnegative(gamma1, "gamma1")?;
    let p = 1.0 - (-gamma0).exp();
    let q = 1.0 - (-gamma1).exp();
    if p + q == 0.0 {
        return Err(ChannelError::UndefinedStationaryState);
    }
    let state = CMatrix::from_diagonal(&CVector::from_vec(vec![
        Complex::new(q / (p + q), 0.0),
        Complex::new(p / (p + q), 0.0),
    ]));
    let temperature = 1.0 / (q / p).ln();
    Ok((state, temperature))
}

/// Balanced loss of a dual-rail qubit `a|01> + b|10>` on the two-mode space.
///
/// One operator is proportional to the identity; the two loss operators send
/// `|01>` and `|10>` to the vacuum `|00>` through distinguishable
/// environment records, so they stay separate. Completeness holds on the
/// declared support `span{|01>, |10>}`.
pub fn dual_rail_channel(gamma: f64) -> Result<KrausChannel, ChannelError> {
    require_nonnegative(gamma, "gamma")?;
    let keep = (-gamma).exp();
    let lose = (1.0 - keep).sqrt();
    let mut a1 = CMatrix::zeros(4, 4);
    a1[(0, 1)] = Complex::new(lose, 0.0); // |00><01|
    let mut a2 = CMatrix::zeros(4, 4);
    a2[(0, 2)] = Complex::new(lose, 0.0); // |00><10|
    Ok(KrausChannel::with_support(
        "dual-rail",
        vec![identity(4).scale(keep.sqrt()), a1, a2],
        Some(vec![1, 2]),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{
        basis_ket, is_hermitian, max_abs_diff, partial_trace, tensor_product_vec, CVector,
    };
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
        let v = CVector::from_fn(dim, |_, _| {
            Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        v.scale(1.0 / v.norm())
    }

    fn random_density(dim: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        // mixture of a few random pure states
        let mut rho = CMatrix::zeros(dim, dim);
        let weights = [0.5, 0.3, 0.2];
        for w in weights {
            let psi = random_state(dim, rng);
            rho += (&psi * psi.adjoint()).scale(w);
        }
        rho
    }

    #[test]
    fn dephasing_reproduces_offdiagonal_decay() {
        // rho_in of a pure (a, b) qubit maps to the same matrix with the
        // off-diagonals scaled by e^{-lambda}
        let lambda = 0.47;
        let ch = phase_damping_1q(lambda, PhaseDampingBasis::ComputationalDephasing).unwrap();
        let a = Complex::new(0.6, 0.0);
        let b = Complex::new(0.48, 0.64);
        let psi = CVector::from_vec(vec![a, b]);
        let rho = &psi * psi.adjoint();
        let out = ch.apply_to_density(&rho).unwrap();
        let e = (-lambda).exp();
        assert!((out[(0, 0)] - rho[(0, 0)]).norm() < 1e-14);
        assert!((out[(1, 1)] - rho[(1, 1)]).norm() < 1e-14);
        assert!((out[(0, 1)] - rho[(0, 1)] * e).norm() < 1e-14);
        assert!((out[(1, 0)] - rho[(1, 0)] * e).norm() < 1e-14);
    }

    #[test]
    fn dephasing_equals_interferometer_trace() {
        // a controlled rotation of a single-excitation two-mode environment,
        // traced out, gives exactly the dephased density matrix
        let lambda = 0.31_f64;
        let theta = (-lambda).exp().acos();
        // joint space: system qubit (high) x two env qubits; env starts |01>
        let mut rot = identity(4);
        rot[(1, 1)] = Complex::new(theta.cos(), 0.0);
        rot[(1, 2)] = Complex::new(-theta.sin(), 0.0);
        rot[(2, 1)] = Complex::new(theta.sin(), 0.0);
        rot[(2, 2)] = Complex::new(theta.cos(), 0.0);
        let p1 = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex::new(0.0, 0.0),
            Complex::new(1.0, 0.0),
        ]));
        let p0 = identity(2) - &p1;
        let u = tensor_product(&p0, &identity(4)) + tensor_product(&p1, &rot);
        assert!(crate::qmath::is_unitary(&u, 1e-12));

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_state(2, &mut rng);
        let env = basis_ket(4, 1); // |01>
        let joint = tensor_product_vec(&psi, &env);
        let rho_joint = &u * (&joint * joint.adjoint()) * u.adjoint();
        let traced = partial_trace(&rho_joint, 3, &[0, 1]).unwrap();

        let ch = phase_damping_1q(lambda, PhaseDampingBasis::ComputationalDephasing).unwrap();
        let direct = ch.apply_to_density(&(&psi * psi.adjoint())).unwrap();
        assert!(max_abs_diff(&traced, &direct) < 1e-12);
    }

    #[test]
    fn unital_channel_fixes_maximally_mixed() {
        let alpha: f64 = 0.8;
        let ch = KrausChannel::new(
            "phase-flip",
            vec![
                identity(2).scale(alpha.sqrt()),
                pauli_z().scale((1.0 - alpha).sqrt()),
            ],
        );
        let rho = identity(2).scale(0.5);
        let out = ch.apply_to_density(&rho).unwrap();
        assert!(max_abs_diff(&out, &rho) < 1e-15);
    }

    #[test]
    fn amplitude_damping_matches_master_equation_form() {
        let g0 = 0.23;
        let g1 = 0.57;
        let ch = amplitude_damping_1q(g0, g1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho = random_density(2, &mut rng);
        let out = ch.apply_to_density(&rho).unwrap();
        let (e0, e1) = ((-g0).exp(), (-g1).exp());
        let offdiag = (-(g0 + g1) / 2.0).exp();
        assert!((out[(0, 0)] - (rho[(0, 0)] * e0 + rho[(1, 1)] * (1.0 - e1))).norm() < 1e-14);
        assert!((out[(1, 1)] - (rho[(0, 0)] * (1.0 - e0) + rho[(1, 1)] * e1)).norm() < 1e-14);
        assert!((out[(0, 1)] - rho[(0, 1)] * offdiag).norm() < 1e-14);
        assert!((out[(1, 0)] - rho[(1, 0)] * offdiag).norm() < 1e-14);
    }

    #[test]
    fn mixed_state_branches_of_dephasing() {
        let lambda = 0.42;
        let ch = phase_damping_1q(lambda, PhaseDampingBasis::ComputationalDephasing).unwrap();
        let a = Complex::new(0.8, 0.0);
        let b = Complex::new(0.0, 0.6);
        let out = ch
            .apply_to_mixed(&MixedState::pure(CVector::from_vec(vec![a, b])))
            .unwrap();
        let e = (-lambda).exp();
        assert_eq!(out.branches().len(), 2);
        assert!((out.branches()[0][0] - a).norm() < 1e-15);
        assert!((out.branches()[0][1] - b * e).norm() < 1e-15);
        assert!((out.branches()[1][0]).norm() < 1e-15);
        assert!((out.branches()[1][1] - b * (1.0 - e * e).sqrt()).norm() < 1e-15);
        assert!((out.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_damping_leaves_single_branch() {
        let ch = phase_damping_1q(0.0, PhaseDampingBasis::ComputationalDephasing).unwrap();
        let psi = CVector::from_vec(vec![Complex::new(0.6, 0.0), Complex::new(0.8, 0.0)]);
        let out = ch.apply_to_mixed(&MixedState::pure(psi.clone())).unwrap();
        assert_eq!(out.branches().len(), 1);
        assert!((&out.branches()[0] - &psi).norm() < 1e-15);
    }

    #[test]
    fn bitflip_branches_swap_amplitudes() {
        // sqrt(alpha) [a,b] (+) sqrt(1-alpha) [b,a]
        let lambda = 0.9;
        let alpha = alpha_from_lambda(lambda);
        let ch = phase_damping_1q(lambda, PhaseDampingBasis::BellBitflip).unwrap();
        let a = Complex::new(0.28, 0.4);
        let b = Complex::new(0.6, -0.5);
        let out = ch
            .apply_to_mixed(&MixedState::pure(CVector::from_vec(vec![a, b])))
            .unwrap();
        assert!((out.branches()[0][0] - a * alpha.sqrt()).norm() < 1e-15);
        assert!((out.branches()[1][0] - b * (1.0 - alpha).sqrt()).norm() < 1e-15);
        assert!((out.branches()[1][1] - a * (1.0 - alpha).sqrt()).norm() < 1e-15);
    }

    #[test]
    fn bitflip_probability_is_one_minus_alpha() {
        let lambda = 0.6;
        let alpha = alpha_from_lambda(lambda);
        let ch = phase_damping_1q(lambda, PhaseDampingBasis::BellBitflip).unwrap();
        let psi = MixedState::pure(basis_ket(2, 0));
        let out = ch.apply_to_mixed(&psi).unwrap();
        assert!((out.branches()[1].norm_squared() - (1.0 - alpha)).abs() < 1e-14);
    }

    #[test]
    fn dephasing_equals_phase_flip_decomposition() {
        // the two decompositions differ by an environment-basis rotation
        // only, so they induce the same map on every density matrix
        let lambda = 0.37;
        let alpha = alpha_from_lambda(lambda);
        let deph = phase_damping_1q(lambda, PhaseDampingBasis::ComputationalDephasing).unwrap();
        let flip = KrausChannel::new(
            "phase-flip",
            vec![
                identity(2).scale(alpha.sqrt()),
                pauli_z().scale((1.0 - alpha).sqrt()),
            ],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let rho = random_density(2, &mut rng);
            let a = deph.apply_to_density(&rho).unwrap();
            let b = flip.apply_to_density(&rho).unwrap();
            assert!(max_abs_diff(&a, &b) < 1e-12);
        }
    }

    #[test]
    fn dephasing_and_bitflip_forms_agree_up_to_basis_change() {
        // the bit-flip form is the dephasing map conjugated by the
        // computational<->Bell basis change (Hadamard per qubit)
        let lambda = 0.52;
        let deph = phase_damping_1q(lambda, PhaseDampingBasis::ComputationalDephasing).unwrap();
        let flip = phase_damping_1q(lambda, PhaseDampingBasis::BellBitflip).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let h = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(s, 0.0),
                Complex::new(s, 0.0),
                Complex::new(s, 0.0),
                Complex::new(-s, 0.0),
            ],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let rho = random_density(2, &mut rng);
            let via_flip = &h * flip.apply_to_density(&(&h * &rho * &h)).unwrap() * &h;
            let direct = deph.apply_to_density(&rho).unwrap();
            assert!(max_abs_diff(&via_flip, &direct) < 1e-12);
        }
    }

    #[test]
    fn nq_damping_single_qubit_case() {
        let alpha: f64 = 0.83;
        let ch = phase_damping_nq(1, alpha).unwrap();
        assert!(max_abs_diff(&ch.operators()[0], &identity(2).scale(alpha.sqrt())) < 1e-15);
        assert!(max_abs_diff(&ch.operators()[1], &pauli_x().scale((1.0 - alpha).sqrt())) < 1e-15);
    }

    #[test]
    fn nq_damping_two_qubit_operators() {
        // prefactors alpha, sqrt(alpha(1-alpha)) twice, (1-alpha) with Pauli
        // patterns II, IX, XI, XX (k counts the low qubit first)
        let alpha: f64 = 0.77;
        let ch = phase_damping_nq(2, alpha).unwrap();
        let beta = 1.0 - alpha;
        let cases: [(f64, CMatrix); 4] = [
            (alpha, tensor_product(&identity(2), &identity(2))),
            ((alpha * beta).sqrt(), tensor_product(&identity(2), &pauli_x())),
            ((alpha * beta).sqrt(), tensor_product(&pauli_x(), &identity(2))),
            (beta, tensor_product(&pauli_x(), &pauli_x())),
        ];
        for (op, (w, pattern)) in ch.operators().iter().zip(cases.iter()) {
            assert!(max_abs_diff(op, &pattern.scale(*w)) < 1e-14);
        }
    }

    #[test]
    fn nq_damping_rejects_bad_sizes() {
        assert!(phase_damping_nq(0, 0.8).is_err());
        assert!(phase_damping_nq(11, 0.8).is_err());
        assert!(phase_damping_nq(2, 0.3).is_err());
    }

    #[test]
    fn flip_count_probabilities() {
        let alpha: f64 = 0.9;
        assert!((flip_count_prob(3, 0, alpha).unwrap() - alpha.powi(3)).abs() < 1e-15);
        assert!((flip_count_prob(3, 1, alpha).unwrap() - 3.0 * alpha * alpha * 0.1).abs() < 1e-15);
        assert_eq!(flip_count_prob(2, 0, 1.0).unwrap(), 1.0);
        assert_eq!(flip_count_prob(2, 1, 1.0).unwrap(), 0.0);
        assert!(flip_count_prob(2, 3, 0.9).is_err());
        let total: f64 = (0..=4).map(|m| flip_count_prob(4, m, 0.71).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn flip_count_matches_branch_norms() {
        let alpha = 0.84;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let psi = MixedState::pure(random_state(8, &mut rng));
        let out = phase_damping_apply_fast(&psi, alpha).unwrap();
        let mut by_weight = [0.0f64; 4];
        for (k, b) in out.branches().iter().enumerate() {
            by_weight[hamming(k) as usize] += b.norm_squared();
        }
        for (m, total) in by_weight.iter().enumerate() {
            assert!((total - flip_count_prob(3, m, alpha).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_damping_equals_explicit_kraus() {
        let alpha = 0.7;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let psi = MixedState::pure(random_state(8, &mut rng));
        let fast = phase_damping_apply_fast(&psi, alpha).unwrap();
        let explicit = phase_damping_nq(3, alpha)
            .unwrap()
            .apply_to_mixed(&psi)
            .unwrap();
        for (a, b) in fast.branches().iter().zip(explicit.branches().iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fast_damping_alpha_one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let psi = random_state(8, &mut rng);
        let out = phase_damping_apply_fast(&MixedState::pure(psi.clone()), 1.0).unwrap();
        assert_eq!(out.branches().len(), 1);
        assert!((&out.branches()[0] - &psi).norm() < 1e-15);
    }

    #[test]
    fn fast_damping_codeword_branch_structure() {
        // a|000> + b|111> in flip labels: branch k carries a|k> + b|~k>
        let alpha = 0.8;
        let a = Complex::new(0.6, 0.0);
        let b = Complex::new(0.8, 0.0);
        let mut psi = CVector::zeros(8);
        psi[0] = a;
        psi[7] = b;
        let out = phase_damping_apply_fast(&MixedState::pure(psi), alpha).unwrap();
        assert_eq!(out.branches().len(), 8);
        for (k, branch) in out.branches().iter().enumerate() {
            let w = flip_weight(3, k, alpha);
            for i in 0..8 {
                let expect = if i == k {
                    a * w
                } else if i == 7 - k {
                    b * w
                } else {
                    Complex::new(0.0, 0.0)
                };
                assert!((branch[i] - expect).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn dephasing_fast_is_conjugated_xor_fast() {
        // R per qubit maps flip labels to the computational register; the
        // sign-flip path must match XOR damping conjugated through it
        let alpha = 0.76;
        let s = 1.0 / 2f64.sqrt();
        let r1 = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex::new(s, 0.0),
                Complex::new(s, 0.0),
                Complex::new(-s, 0.0),
                Complex::new(s, 0.0),
            ],
        );
        let r3 = tensor_product(&tensor_product(&r1, &r1), &r1);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let v = random_state(8, &mut rng);
        let direct = dephasing_apply_fast(&MixedState::pure(v.clone()), alpha).unwrap();
        let labels = MixedState::pure(r3.adjoint() * &v);
        let xor = phase_damping_apply_fast(&labels, alpha).unwrap();
        let back: Vec<CVector> = xor.branches().iter().map(|b| &r3 * b).collect();
        for (a, b) in direct.branches().iter().zip(back.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn amplitude_damping_zero_is_identity_channel() {
        let ch = amplitude_damping_1q(0.0, 0.0).unwrap();
        assert!(ch.operators()[0].iter().all(|z| z.norm() == 0.0));
        assert!(max_abs_diff(&ch.operators()[1], &identity(2)) < 1e-15);
        assert!(ch.operators()[2].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn ground_state_is_fixed_point_at_zero_temperature() {
        let ch = amplitude_damping_1q(0.0, 0.45).unwrap();
        let ground = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
        ]));
        let out = ch.apply_to_density(&ground).unwrap();
        assert!(max_abs_diff(&out, &ground) < 1e-15);
    }

    #[test]
    fn stationary_state_is_fixed_point() {
        let (g0, g1) = (0.35, 0.6);
        let ch = amplitude_damping_1q(g0, g1).unwrap();
        let (rho, _) = amplitude_damping_stationary(g0, g1).unwrap();
        let out = ch.apply_to_density(&rho).unwrap();
        assert!(max_abs_diff(&out, &rho) < 1e-12);
    }

    #[test]
    fn stationary_temperature_limits() {
        let (rho, t) = amplitude_damping_stationary(0.0, 0.4).unwrap();
        let ground = CMatrix::from_diagonal(&CVector::from_vec(vec![
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
        ]));
        assert!(max_abs_diff(&rho, &ground) < 1e-15);
        assert_eq!(t, 0.0);
        assert!(!t.is_sign_negative());

        // q = 0: population inverted, temperature approaches zero from below
        let (_, t) = amplitude_damping_stationary(0.4, 0.0).unwrap();
        assert_eq!(t, 0.0);
        assert!(t.is_sign_negative());

        // p = q: infinite temperature
        let (rho, t) = amplitude_damping_stationary(0.3, 0.3).unwrap();
        assert!(t.is_infinite() && t > 0.0);
        assert!(max_abs_diff(&rho, &identity(2).scale(0.5)) < 1e-15);

        assert_eq!(
            amplitude_damping_stationary(0.0, 0.0),
            Err(ChannelError::UndefinedStationaryState)
        );
    }

    #[test]
    fn stationary_temperature_direct_value() {
        // q/p = e gives k_B T = Delta E
        let p: f64 = 0.2;
        let q = p * std::f64::consts::E;
        let g0 = -(1.0 - p).ln();
        let g1 = -(1.0 - q).ln();
        let (_, t) = amplitude_damping_stationary(g0, g1).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_rail_branches() {
        let gamma = 0.5;
        let ch = dual_rail_channel(gamma).unwrap();
        let a = Complex::new(0.6, 0.0);
        let b = Complex::new(0.0, 0.8);
        let mut psi = CVector::zeros(4);
        psi[1] = a;
        psi[2] = b;
        let out = ch.apply_to_mixed(&MixedState::pure(psi)).unwrap();
        let keep = (-gamma).exp();
        // surviving branch keeps the state, scaled by sqrt(e^{-gamma})
        assert!((out.branches()[0][1] - a * keep.sqrt()).norm() < 1e-14);
        assert!((out.branches()[0][2] - b * keep.sqrt()).norm() < 1e-14);
        // both loss branches land in the vacuum
        assert!((out.branches()[1][0] - a * (1.0 - keep).sqrt()).norm() < 1e-14);
        assert!((out.branches()[2][0] - b * (1.0 - keep).sqrt()).norm() < 1e-14);
        assert!((out.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_rail_zero_loss_is_identity_on_support() {
        let ch = dual_rail_channel(0.0).unwrap();
        assert!(max_abs_diff(&ch.operators()[0], &identity(4)) < 1e-15);
        assert!(ch.completeness_residual() < 1e-15);
    }

    #[test]
    fn dual_rail_support_completeness() {
        for gamma in [0.01, 0.3, 2.0] {
            let ch = dual_rail_channel(gamma).unwrap();
            assert!(ch.completeness_residual() < 1e-12, "gamma = {gamma}");
        }
    }

    #[test]
    fn dual_rail_has_identity_proportional_operator() {
        let ch = dual_rail_channel(0.7).unwrap();
        let a0 = &ch.operators()[0];
        let scale = a0[(0, 0)];
        assert!(max_abs_diff(a0, &identity(4).map(|z| z * scale)) < 1e-15);
    }

    #[test]
    fn amplitude_damping_span_excludes_identity() {
        // least-squares projection of I onto span{A_k} leaves a residual
        let ch = amplitude_damping_1q(0.3, 0.8).unwrap();
        let ops = ch.operators();
        let mut gram = CMatrix::zeros(3, 3);
        let mut rhs = CVector::zeros(3);
        let eye = identity(2);
        for i in 0..3 {
            for j in 0..3 {
                gram[(i, j)] = (ops[i].adjoint() * &ops[j]).trace();
            }
            rhs[i] = (ops[i].adjoint() * &eye).trace();
        }
        let coef = gram.lu().solve(&rhs).unwrap();
        let mut proj = CMatrix::zeros(2, 2);
        for i in 0..3 {
            proj += ops[i].map(|z| z * coef[i]);
        }
        let residual = max_abs_diff(&proj, &eye);
        assert!(residual > 0.05, "residual = {residual}");
    }

    #[test]
    fn m_step_damping_composes_to_single_application() {
        // applying the per-step channel M times equals one application at
        // alpha(M lambda): the semigroup behind storage for M timesteps
        let lambda = 0.07;
        let m = 4;
        let per_step = dephasing_nq(2, alpha_from_lambda(lambda)).unwrap();
        let combined = dephasing_nq(2, alpha_from_lambda(m as f64 * lambda)).unwrap();
        let s1 = per_step.superoperator();
        let mut iterated = identity(16);
        for _ in 0..m {
            iterated = &s1 * iterated;
        }
        assert!(max_abs_diff(&iterated, &combined.superoperator()) < 1e-10);
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let ch = amplitude_damping_1q(0.2, 0.5).unwrap();
        let s = ch.superoperator();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let rho = random_density(2, &mut rng);
        let direct = ch.apply_to_density(&rho).unwrap();
        let vec_in = CVector::from_fn(4, |i, _| rho[(i % 2, i / 2)]);
        let vec_out = &s * vec_in;
        for col in 0..2 {
            for row in 0..2 {
                assert!((vec_out[col * 2 + row] - direct[(row, col)]).norm() < 1e-13);
            }
        }
    }

    proptest! {
        #[test]
        fn completeness_and_trace_preservation(
            lambda in 0.0f64..2.0,
            n in 1usize..4,
            seed in 0u64..256,
        ) {
            let alpha = alpha_from_lambda(lambda);
            let ch = phase_damping_nq(n, alpha).unwrap();
            prop_assert!(ch.completeness_residual() < 1e-10);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random_density(1 << n, &mut rng);
            let out = ch.apply_to_density(&rho).unwrap();
            prop_assert!((out.trace().re - rho.trace().re).abs() < 1e-10);
            prop_assert!(is_hermitian(&out, 1e-12));
        }

        #[test]
        fn mixed_and_density_paths_agree(
            lambda in 0.0f64..1.5,
            g1 in 0.0f64..1.5,
            seed in 0u64..256,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random_state(2, &mut rng);
            let ms = MixedState::pure(psi.clone());
            let rho = &psi * psi.adjoint();
            for ch in [
                phase_damping_1q(lambda, PhaseDampingBasis::ComputationalDephasing).unwrap(),
                phase_damping_1q(lambda, PhaseDampingBasis::BellBitflip).unwrap(),
                amplitude_damping_1q(0.0, g1).unwrap(),
            ] {
                let via_mixed = ch.apply_to_mixed(&ms).unwrap().density_matrix();
                let via_density = ch.apply_to_density(&rho).unwrap();
                prop_assert!(max_abs_diff(&via_mixed, &via_density) < 1e-10);
            }
        }
    }
}
