//! Logic gates with simultaneous decoherence.
//!
//! A noisy gate is built from the joint Hamiltonian of the system qubits and
//! one single-mode environment qubit per system qubit. Exponentiating the
//! joint Hamiltonian over one timestep and projecting onto the environment
//! basis (environment prepared in `|0>`) yields Kraus operators that act on
//! the system alone:
//!
//! `A_k = <k_env| exp(i H) |0_env>`
//!
//! The decoherence per timestep `lambda` fixes the environment coupling
//! angle `chi` so that an idle qubit under the same coupling loses coherence
//! (phase damping) or excited-state amplitude (amplitude damping) by exactly
//! `e^{-lambda}` per timestep.

use crate::channels::KrausChannel;
use crate::qmath::{
    embed_operator, identity, min_fidelity_over_inputs, pauli_x, pauli_y, pauli_z,
    unitary_from_hamiltonian, BlochPoint, CMatrix, CVector, Complex,
};
use crate::qmath::{tensor_product, tensor_product_vec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Seed for the entangled-input sample used by the full-Hilbert-space
/// two-qubit fidelity search; fixed so runs are reproducible.
pub const DEFAULT_ENTANGLED_SEED: u64 = 17;

#[derive(Debug, Error, PartialEq)]
pub enum GateError {
    #[error("invalid decoherence per timestep: {0}")]
    BadLambda(f64),
}

/// Which environment coupling the gate carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingKind {
    /// `(chi/2)(1 - sigma_z^s) sigma_y^e`: dephases without energy exchange.
    Phase,
    /// `(chi/2)(sigma_-^s sigma_+^e + sigma_+^s sigma_-^e)` with
    /// `sigma_+- = sigma_x +- i sigma_y`: excitation exchange with a cold
    /// reservoir.
    Amplitude,
}

/// A logic gate with simultaneous decoherence: its Kraus operators, the
/// noiseless gate they degrade to at `chi = 0`, and the noise parameters.
#[derive(Debug, Clone)]
pub struct NoisyGate {
    pub kraus: KrausChannel,
    pub ideal: CMatrix,
    pub kind: DampingKind,
    /// Environment coupling angle, in `[0, pi/2)`.
    pub chi: f64,
    /// Decoherence per timestep.
    pub lambda: f64,
}

/// Coupling angle reproducing decoherence `lambda` per idle timestep.
///
/// Phase damping: `chi = arccos(e^{-lambda})` (so `lambda = -ln|cos chi|`).
/// Amplitude damping: half that angle, because the raising/lowering
/// convention doubles the effective flip-flop rate; calibrated so the idle
/// channel's `<1|A_0|1>` survival amplitude equals `e^{-lambda}`.
pub fn chi_from_lambda(lambda: f64, kind: DampingKind) -> Result<f64, GateError> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(GateError::BadLambda(lambda));
    }
    let chi = (-lambda).exp().acos();
    Ok(match kind {
        DampingKind::Phase => chi,
        DampingKind::Amplitude => chi / 2.0,
    })
}

/// The pi/4 rotation `(1/sqrt(2)) [[1, 1], [-1, 1]]`.
///
/// Maps `|0> -> |->`, `|1> -> |+>`: flips between the computational and the
/// Bell basis.
pub fn ideal_rotation() -> CMatrix {
    let s = 1.0 / 2f64.sqrt();
    CMatrix::from_row_slice(
        2,
        2,
        &[
            Complex::new(s, 0.0),
            Complex::new(s, 0.0),
            Complex::new(-s, 0.0),
            Complex::new(s, 0.0),
        ],
    )
}

/// Inverse of [`ideal_rotation`].
pub fn ideal_rotation_inv() -> CMatrix {
    ideal_rotation().adjoint()
}

/// Controlled-not with the high qubit as control: swaps the lower block.
pub fn ideal_cnot() -> CMatrix {
    let mut c = CMatrix::zeros(4, 4);
    c[(0, 0)] = Complex::new(1.0, 0.0);
    c[(1, 1)] = Complex::new(1.0, 0.0);
    c[(2, 3)] = Complex::new(1.0, 0.0);
    c[(3, 2)] = Complex::new(1.0, 0.0);
    c
}

/// `(pi/4)(1 - sigma_z^a)(sigma_x^b - 1)` on (control, target); its
/// exponential is exactly [`ideal_cnot`].
fn cnot_hamiltonian() -> CMatrix {
    let active = identity(2) - pauli_z(); // 2 |1><1|
    let flip = pauli_x() - identity(2);
    tensor_product(&active, &flip).scale(std::f64::consts::PI / 4.0)
}

/// Coupling of one system qubit to one environment qubit.
fn env_coupling(kind: DampingKind, chi: f64, sys: usize, env: usize, total: usize) -> CMatrix {
    match kind {
        DampingKind::Phase => {
            let h = tensor_product(&(identity(2) - pauli_z()), &pauli_y()).scale(chi / 2.0);
            embed_operator(&h, &[sys, env], total).expect("valid embedding")
        }
        DampingKind::Amplitude => {
            let sp = pauli_x() + pauli_y().map(|z| z * Complex::i());
            let sm = pauli_x() - pauli_y().map(|z| z * Complex::i());
            let h = (tensor_product(&sm, &sp) + tensor_product(&sp, &sm)).scale(chi / 2.0);
            embed_operator(&h, &[sys, env], total).expect("valid embedding")
        }
    }
}

/// Project the joint unitary onto environment basis states. System qubits
/// are the high bits, environments the low bits, environment starts in
/// `|0..0>`.
fn extract_kraus(u: &CMatrix, sys_qubits: usize, env_qubits: usize) -> Vec<CMatrix> {
    let sdim = 1usize << sys_qubits;
    let edim = 1usize << env_qubits;
    (0..edim)
        .map(|k| CMatrix::from_fn(sdim, sdim, |i, j| u[(i * edim + k, j * edim)]))
        .collect()
}

fn build_gate(
    lambda: f64,
    kind: DampingKind,
    logic: CMatrix,
    ideal: CMatrix,
    sys_qubits: usize,
    label: &str,
) -> Result<NoisyGate, GateError> {
    let chi = chi_from_lambda(lambda, kind)?;
    let total = 2 * sys_qubits;
    let mut h = logic;
    for q in 0..sys_qubits {
        // system qubit (total-1-q) pairs with environment qubit (sys_qubits-1-q)
        h += env_coupling(kind, chi, total - 1 - q, sys_qubits - 1 - q, total);
    }
    let u = unitary_from_hamiltonian(&h, 1.0).expect("joint Hamiltonian is Hermitian");
    let kraus = KrausChannel::new(label, extract_kraus(&u, sys_qubits, sys_qubits));
    Ok(NoisyGate {
        kraus,
        ideal,
        kind,
        chi,
        lambda,
    })
}

/// Noisy pi/4 rotation: one system qubit, one environment qubit.
pub fn noisy_rotation(lambda: f64, kind: DampingKind) -> Result<NoisyGate, GateError> {
    let logic = embed_operator(&pauli_y().scale(std::f64::consts::PI / 4.0), &[1], 2)
        .expect("valid embedding");
    build_gate(lambda, kind, logic, ideal_rotation(), 1, "noisy-rotation")
}

/// Noisy inverse rotation.
pub fn noisy_rotation_inv(lambda: f64, kind: DampingKind) -> Result<NoisyGate, GateError> {
    let logic = embed_operator(&pauli_y().scale(-std::f64::consts::PI / 4.0), &[1], 2)
        .expect("valid embedding");
    build_gate(
        lambda,
        kind,
        logic,
        ideal_rotation_inv(),
        1,
        "noisy-rotation-inv",
    )
}

/// Noisy controlled-not: two system qubits (control high), two environments.
pub fn noisy_cnot(lambda: f64, kind: DampingKind) -> Result<NoisyGate, GateError> {
    let logic = embed_operator(&cnot_hamiltonian(), &[3, 2], 4).expect("valid embedding");
    build_gate(lambda, kind, logic, ideal_cnot(), 2, "noisy-cnot")
}

/// The gate-off limit: decoherence of one idle qubit for one timestep under
/// the same environment coupling as the gates.
pub fn idle_qubit(lambda: f64, kind: DampingKind) -> Result<NoisyGate, GateError> {
    build_gate(lambda, kind, CMatrix::zeros(4, 4), identity(2), 1, "idle")
}

/// `F(psi) = sum_k |<psi| ideal^dag A_k |psi>|^2` for one input.
pub fn fidelity_at(gate: &NoisyGate, psi: &CVector) -> f64 {
    gate.kraus
        .operators()
        .iter()
        .map(|a| {
            let overlap = (psi.adjoint() * gate.ideal.adjoint() * a * psi)[(0, 0)];
            overlap.norm_sqr()
        })
        .sum()
}

fn real_state_1q(t: f64) -> CVector {
    CVector::from_vec(vec![
        Complex::new((t / 2.0).cos(), 0.0),
        Complex::new((t / 2.0).sin(), 0.0),
    ])
}

fn min_over_real_angles<F>(eval: F, dims: usize) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    use std::f64::consts::PI;
    let points = 64usize;
    let mut best_args = vec![0.0; dims];
    let mut best = f64::INFINITY;
    let mut scan = vec![0usize; dims];
    loop {
        let args: Vec<f64> = scan
            .iter()
            .map(|&i| 2.0 * PI * i as f64 / points as f64)
            .collect();
        let f = eval(&args);
        if f < best {
            best = f;
            best_args = args;
        }
        // odometer over the grid
        let mut d = 0;
        while d < dims {
            scan[d] += 1;
            if scan[d] < points {
                break;
            }
            scan[d] = 0;
            d += 1;
        }
        if d == dims {
            break;
        }
    }
    // pattern-search refinement
    let mut step = 2.0 * PI / points as f64;
    while step > 1e-12 {
        let mut improved = false;
        for d in 0..dims {
            for sign in [-1.0, 1.0] {
                let mut cand = best_args.clone();
                cand[d] = (cand[d] + sign * step).rem_euclid(2.0 * PI);
                let f = eval(&cand);
                if f < best {
                    best = f;
                    best_args = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Worst-case gate fidelity over real-amplitude inputs.
///
/// One-qubit gates scan the real great circle; two-qubit gates scan products
/// of two real states. This is the benchmark domain the printed slope
/// coefficients refer to; see [`gate_fidelity_hilbert`] for the
/// unrestricted search.
pub fn gate_fidelity(gate: &NoisyGate) -> f64 {
    match gate.ideal.nrows() {
        2 => min_over_real_angles(|args| fidelity_at(gate, &real_state_1q(args[0])), 1),
        4 => min_over_real_angles(
            |args| {
                let psi = tensor_product_vec(&real_state_1q(args[0]), &real_state_1q(args[1]));
                fidelity_at(gate, &psi)
            },
            2,
        ),
        d => unreachable!("no gate of dimension {d}"),
    }
}

/// Worst-case gate fidelity over the full Hilbert space of inputs.
///
/// One-qubit gates search the whole Bloch sphere. Two-qubit gates search all
/// product states (four angles) plus a seeded 1000-sample set of
/// Haar-distributed entangled states; the overall minimum is returned. For
/// the amplitude-damped controlled-not this dips below [`gate_fidelity`]
/// because the worst input carries a complex relative phase.
pub fn gate_fidelity_hilbert(gate: &NoisyGate, seed: u64) -> f64 {
    match gate.ideal.nrows() {
        2 => {
            let (_, f) = min_fidelity_over_inputs(|p| fidelity_at(gate, &p.state()), 1e-12);
            f
        }
        4 => {
            let product = min_over_product_states(gate);
            let sampled = min_over_entangled_sample(gate, seed, 1000);
            product.min(sampled)
        }
        d => unreachable!("no gate of dimension {d}"),
    }
}

fn min_over_product_states(gate: &NoisyGate) -> f64 {
    use std::f64::consts::PI;
    let eval = |args: &[f64]| {
        let p1 = BlochPoint::new(args[0].clamp(0.0, PI), args[1]);
        let p2 = BlochPoint::new(args[2].clamp(0.0, PI), args[3]);
        let psi = tensor_product_vec(&p1.state(), &p2.state());
        fidelity_at(gate, &psi)
    };
    // coarse 4-angle grid
    let mut best = f64::INFINITY;
    let mut best_args = [0.0f64; 4];
    let nt = 9;
    let np = 8;
    for i1 in 0..nt {
        for j1 in 0..np {
            for i2 in 0..nt {
                for j2 in 0..np {
                    let args = [
                        PI * i1 as f64 / (nt - 1) as f64,
                        2.0 * PI * j1 as f64 / np as f64,
                        PI * i2 as f64 / (nt - 1) as f64,
                        2.0 * PI * j2 as f64 / np as f64,
                    ];
                    let f = eval(&args);
                    if f < best {
                        best = f;
                        best_args = args;
                    }
                }
            }
        }
    }
    let mut step = PI / (nt - 1) as f64;
    while step > 1e-12 {
        let mut improved = false;
        for d in 0..4 {
            for sign in [-1.0, 1.0] {
                let mut cand = best_args;
                cand[d] += sign * step;
                if d % 2 == 1 {
                    cand[d] = cand[d].rem_euclid(2.0 * PI);
                }
                let f = eval(&cand);
                if f < best {
                    best = f;
                    best_args = cand;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

fn min_over_entangled_sample(gate: &NoisyGate, seed: u64, count: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    for _ in 0..count {
        let psi = random_haar_state(4, &mut rng);
        best = best.min(fidelity_at(gate, &psi));
    }
    best
}

/// Haar-distributed pure state: a normalized complex Gaussian vector.
pub fn random_haar_state(dim: usize, rng: &mut ChaCha8Rng) -> CVector {
    let v = CVector::from_fn(dim, |_, _| Complex::new(gaussian(rng), gaussian(rng)));
    let n = v.norm();
    v.scale(1.0 / n)
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller from two uniforms
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}
