//! The three-qubit phase-damping code and its storage-cycle simulator.
//!
//! A single qubit `a|0> + b|1>` is encoded as `a|---> + b|+++>` on three
//! physical qubits. The register layout puts the data on qubit 2 (the most
//! significant bit) and the two syndrome ancillas on qubits 1 and 0. One
//! pass through the correction circuit takes five timesteps:
//!
//! * T1: inverse rotations on all three qubits (Bell -> computational),
//! * T2: two controlled-nots from the data qubit onto the ancillas,
//!   computing the syndrome in place,
//! * T3: ideal measurement of the ancillas, classically conditioned
//!   correction, ancilla reset,
//! * T4: two controlled-nots re-entangling the register,
//! * T5: rotations back into the Bell basis.
//!
//! Between passes the register idles for `M` timesteps of phase damping.
//! The simulator composes every step as a superoperator on the 8x8 density
//! matrix, so one cycle evaluation is a handful of 64x64 matrix products no
//! matter how large `M` is.
//!
//! Noise placement differs per mode, calibrated against the reference
//! behaviour of each model:
//!
//! * `Ideal` - noiseless gates, storage damping only; the worst-case
//!   fidelity reproduces the closed form of [`f_ideal`] exactly.
//! * `LumpedPhase` - ideal gates with a full register dephasing inserted
//!   after every timestep; the cycle runs store -> decode -> correct ->
//!   re-encode and scores the re-encoded state against the ideal codeword.
//! * `ContinuousPhase` - every gate replaced by its noisy counterpart (the
//!   two controlled-nots of a timestep applied sequentially); the
//!   measurement timestep is noise-free and the cycle scores the data qubit
//!   right after correction.
//! * `ContinuousAmplitude` - noisy gates with amplitude coupling, the data
//!   qubit idles through the measurement timestep, and the cycle runs to the
//!   re-encoded state like the lumped model.

use crate::channels::{alpha_from_lambda, dephasing_nq, phase_damping_1q, PhaseDampingBasis};
use crate::noisy_gates::{
    idle_qubit, ideal_cnot, ideal_rotation, ideal_rotation_inv, noisy_cnot, noisy_rotation,
    noisy_rotation_inv, DampingKind,
};
use crate::qmath::{
    embed_operator, min_fidelity_over_inputs, partial_trace, refine_bloch, tensor_product,
    tensor_product_vec, BlochPoint, CMatrix, CVector, Complex,
};

/// Index of the data qubit (most significant bit of the register).
pub const DATA_QUBIT: usize = 2;
/// Ancilla qubits receiving the in-place syndrome, high bit first.
pub const SYNDROME_QUBITS: [usize; 2] = [1, 0];
/// Gate timesteps per correction pass.
pub const CIRCUIT_TIMESTEPS: usize = 5;

/// Syndrome-to-correction mapping for the two measured ancilla bits.
///
/// Bit complements of a codeword share a syndrome, so the measurement never
/// collapses the stored superposition.
pub struct SyndromeTable;

impl SyndromeTable {
    /// The qubit flipped by the classical controller, if any.
    pub fn action(syndrome: u8) -> Option<usize> {
        match syndrome & 0b11 {
            0b00 => None,        // no error
            0b01 => Some(0),     // flip first bit
            0b10 => Some(1),     // flip second bit
            _ => Some(2),        // flip third bit (the data qubit)
        }
    }

    /// Syndrome measured when the stored codeword had its Bell labels
    /// flipped on the qubits set in `pattern`.
    pub fn syndrome_of_flips(pattern: u8) -> u8 {
        let k2 = (pattern >> 2) & 1;
        let k1 = (pattern >> 1) & 1;
        let k0 = pattern & 1;
        ((k1 ^ k2) << 1) | (k0 ^ k2)
    }
}

/// Noise model for one pass through the circuit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMode {
    Ideal,
    LumpedPhase,
    ContinuousPhase,
    ContinuousAmplitude,
}

impl CycleMode {
    /// Whether the cycle scores the re-encoded state after T5 rather than
    /// the corrected data qubit after T3.
    fn scores_after_reencode(self) -> bool {
        matches!(self, CycleMode::LumpedPhase | CycleMode::ContinuousAmplitude)
    }
}

/// One simulation configuration: decoherence per timestep, storage length,
/// noise mode, and how many correction cycles to chain.
#[derive(Debug, Clone, Copy)]
pub struct CycleConfig {
    pub lambda: f64,
    pub storage_steps: usize,
    pub mode: CycleMode,
    pub cycles: usize,
}

impl CycleConfig {
    pub fn new(lambda: f64, storage_steps: usize, mode: CycleMode) -> Self {
        Self {
            lambda,
            storage_steps,
            mode,
            cycles: 1,
        }
    }

    pub fn with_cycles(mut self, cycles: usize) -> Self {
        assert!(cycles >= 1, "at least one cycle");
        self.cycles = cycles;
        self
    }

    /// Timesteps elapsed over all configured cycles.
    pub fn elapsed_timesteps(&self) -> usize {
        self.cycles * (self.storage_steps + CIRCUIT_TIMESTEPS)
    }
}

/// Worst-case result of a cycle simulation with its benchmarks.
#[derive(Debug, Clone, Copy)]
pub struct CycleResult {
    /// Minimum fidelity of the simulated cycle over all pure inputs.
    pub f_cycle: f64,
    /// Benchmark: an isolated qubit idling for the same elapsed time.
    pub f_single: f64,
    /// Benchmark: the same cycle with a noiseless circuit.
    pub f_ideal: f64,
    /// Effective decoherence rate; `None` when `f_cycle <= 1/2` puts the
    /// cycle outside the exponential-decay model.
    pub lambda_eff: Option<f64>,
    /// The minimizing input state.
    pub min_input: BlochPoint,
    /// Timesteps spanned by the simulated cycles.
    pub elapsed_timesteps: usize,
}

/// `(2 - e^{-3 M lambda} + 3 e^{-M lambda}) / 4`: worst-case fidelity of one
/// noiseless correction cycle after `M` storage steps.
pub fn f_ideal(lambda: f64, storage_steps: usize) -> f64 {
    let x = storage_steps as f64 * lambda;
    (2.0 - (-3.0 * x).exp() + 3.0 * (-x).exp()) / 4.0
}

/// `(1 + e^{-(M+5) lambda}) / 2`: worst-case fidelity of an isolated qubit
/// idling for the cycle's full duration.
pub fn f_single(lambda: f64, storage_steps: usize) -> f64 {
    let t = (storage_steps + CIRCUIT_TIMESTEPS) as f64;
    (1.0 + (-t * lambda).exp()) / 2.0
}

/// `-ln(2F - 1) / elapsed`; `None` once `F <= 1/2` (no longer describable as
/// exponential decay of a stored qubit).
pub fn lambda_eff_from_fidelity(fidelity: f64, elapsed_timesteps: usize) -> Option<f64> {
    let arg = 2.0 * fidelity - 1.0;
    if arg <= 0.0 {
        None
    } else {
        Some(-arg.ln() / elapsed_timesteps as f64)
    }
}

// ---------------------------------------------------------------------------
// superoperator plumbing (column-stacked density matrices)

fn sop_identity() -> CMatrix {
    CMatrix::identity(64, 64)
}

fn sop_from_ops(ops: &[CMatrix]) -> CMatrix {
    let dim = ops[0].nrows();
    let mut s = CMatrix::zeros(dim * dim, dim * dim);
    for a in ops {
        s += tensor_product(&a.map(|z| z.conj()), a);
    }
    s
}

fn sop_unitary(u: &CMatrix) -> CMatrix {
    sop_from_ops(std::slice::from_ref(u))
}

fn vec_density(rho: &CMatrix) -> CVector {
    let d = rho.nrows();
    CVector::from_fn(d * d, |i, _| rho[(i % d, i / d)])
}

fn unvec_density(v: &CVector) -> CMatrix {
    let d = (v.len() as f64).sqrt() as usize;
    CMatrix::from_fn(d, d, |r, c| v[c * d + r])
}

// ---------------------------------------------------------------------------
// circuit pieces

fn rotation_all(u1: &CMatrix) -> CMatrix {
    let mut u = CMatrix::identity(8, 8);
    for q in [DATA_QUBIT, 1, 0] {
        u = embed_operator(u1, &[q], 3).expect("valid embedding") * u;
    }
    u
}

fn cnot_pair_unitary() -> CMatrix {
    let c = ideal_cnot();
    let first = embed_operator(&c, &[DATA_QUBIT, 1], 3).expect("valid embedding");
    let second = embed_operator(&c, &[DATA_QUBIT, 0], 3).expect("valid embedding");
    second * first
}

/// Measurement, classically conditioned correction, and ancilla reset as one
/// deterministic channel: `K_s = X_{c(s)} . (|00><s| on the ancillas)`.
fn measure_correct_superop() -> CMatrix {
    let x_data = embed_operator(&crate::qmath::pauli_x(), &[DATA_QUBIT], 3)
        .expect("valid embedding");
    let mut ops = Vec::with_capacity(4);
    for s in 0..4u8 {
        let mut k = CMatrix::zeros(8, 8);
        for data_bit in 0..2usize {
            let from = (data_bit << 2) | s as usize;
            let to = data_bit << 2;
            k[(to, from)] = Complex::new(1.0, 0.0);
        }
        if SyndromeTable::action(s) == Some(DATA_QUBIT) {
            k = &x_data * k;
        }
        ops.push(k);
    }
    sop_from_ops(&ops)
}

/// Full-register dephasing for one timestep at decoherence `lambda`.
fn damp_all_superop(lambda: f64) -> CMatrix {
    dephasing_nq(3, alpha_from_lambda(lambda))
        .expect("valid parameters")
        .superoperator()
}

fn embedded_gate_superop(ops: &[CMatrix], qubits: &[usize]) -> CMatrix {
    let embedded: Vec<CMatrix> = ops
        .iter()
        .map(|a| embed_operator(a, qubits, 3).expect("valid embedding"))
        .collect();
    sop_from_ops(&embedded)
}

/// The five timestep superoperators of one circuit pass under a gate model.
struct CircuitSteps {
    t1: CMatrix,
    t2: CMatrix,
    t3: CMatrix,
    t4: CMatrix,
    t5: CMatrix,
}

fn circuit_steps(lambda: f64, mode: CycleMode) -> CircuitSteps {
    let measure = measure_correct_superop();
    match mode {
        CycleMode::Ideal => CircuitSteps {
            t1: sop_unitary(&rotation_all(&ideal_rotation_inv())),
            t2: sop_unitary(&cnot_pair_unitary()),
            t3: measure,
            t4: sop_unitary(&cnot_pair_unitary()),
            t5: sop_unitary(&rotation_all(&ideal_rotation())),
        },
        CycleMode::LumpedPhase => {
            let damp = damp_all_superop(lambda);
            CircuitSteps {
                t1: &damp * sop_unitary(&rotation_all(&ideal_rotation_inv())),
                t2: &damp * sop_unitary(&cnot_pair_unitary()),
                t3: &damp * measure,
                t4: &damp * sop_unitary(&cnot_pair_unitary()),
                t5: &damp * sop_unitary(&rotation_all(&ideal_rotation())),
            }
        }
        CycleMode::ContinuousPhase | CycleMode::ContinuousAmplitude => {
            let kind = if mode == CycleMode::ContinuousPhase {
                DampingKind::Phase
            } else {
                DampingKind::Amplitude
            };
            let rot = noisy_rotation(lambda, kind).expect("valid lambda");
            let rot_inv = noisy_rotation_inv(lambda, kind).expect("valid lambda");
            let cn = noisy_cnot(lambda, kind).expect("valid lambda");

            let mut t1 = sop_identity();
            let mut t5 = sop_identity();
            for q in [DATA_QUBIT, 1, 0] {
                t1 = embedded_gate_superop(rot_inv.kraus.operators(), &[q]) * t1;
                t5 = embedded_gate_superop(rot.kraus.operators(), &[q]) * t5;
            }
            let mut cn_pair = sop_identity();
            for target in [1usize, 0] {
                cn_pair =
                    embedded_gate_superop(cn.kraus.operators(), &[DATA_QUBIT, target]) * cn_pair;
            }
            // the measurement itself is ideal; in the amplitude model the
            // data qubit decoheres while the ancillas are read out
            let t3 = if mode == CycleMode::ContinuousAmplitude {
                let idle = idle_qubit(lambda, kind).expect("valid lambda");
                &measure * embedded_gate_superop(idle.kraus.operators(), &[DATA_QUBIT])
            } else {
                measure
            };
            CircuitSteps {
                t1,
                t2: cn_pair.clone(),
                t3,
                t4: cn_pair,
                t5,
            }
        }
    }
}

/// Precomposed maps for one configuration.
struct CycleEngine {
    /// Noisy (or ideal) encode: T4 then T5.
    encode: CMatrix,
    /// Storage damping followed by decode and correction: store, T1, T2, T3.
    store_decode: CMatrix,
    /// T4 and T5 again for modes scored after the re-encode.
    reencode: CMatrix,
    mode: CycleMode,
}

impl CycleEngine {
    fn new(lambda: f64, storage_steps: usize, mode: CycleMode) -> Self {
        let steps = circuit_steps(lambda, mode);
        let store = dephasing_nq(3, alpha_from_lambda(storage_steps as f64 * lambda))
            .expect("valid parameters")
            .superoperator();
        let encode = &steps.t5 * &steps.t4;
        let store_decode = &steps.t3 * &steps.t2 * &steps.t1 * store;
        Self {
            reencode: encode.clone(),
            encode,
            store_decode,
            mode,
        }
    }

    /// Perfect codeword of the input, used both as the after-T5 scoring
    /// target and as the lumped/amplitude-mode initial state.
    fn codeword(input: BlochPoint) -> CVector {
        encode(&input.state())
    }

    /// Fidelity trajectory at each cycle boundary, one entry per cycle.
    fn trajectory(&self, input: BlochPoint, cycles: usize) -> Vec<f64> {
        let psi = input.state();
        let mut out = Vec::with_capacity(cycles);
        if self.mode.scores_after_reencode() {
            // start from the perfect codeword, score after each re-encode
            let cw = Self::codeword(input);
            let mut v = vec_density(&(&cw * cw.adjoint()));
            for _ in 0..cycles {
                v = &self.reencode * (&self.store_decode * v);
                let rho = unvec_density(&v);
                out.push((cw.adjoint() * &rho * &cw)[(0, 0)].re);
            }
        } else {
            // noisy initial encode, score the corrected data qubit
            let mut anc = CVector::zeros(4);
            anc[0] = Complex::new(1.0, 0.0);
            let full = tensor_product_vec(&psi, &anc);
            let mut v = &self.encode * vec_density(&(&full * full.adjoint()));
            for cycle in 0..cycles {
                v = &self.store_decode * v;
                let rho = unvec_density(&v);
                let data = partial_trace(&rho, 3, &SYNDROME_QUBITS).expect("8x8 by construction");
                out.push((psi.adjoint() * &data * &psi)[(0, 0)].re);
                if cycle + 1 < cycles {
                    v = &self.reencode * v;
                }
            }
        }
        out
    }

    fn single_cycle(&self, input: BlochPoint) -> f64 {
        self.trajectory(input, 1)[0]
    }
}

/// Fidelity of one correction cycle for one input state.
pub fn run_cycle(cfg: &CycleConfig, input: BlochPoint) -> f64 {
    CycleEngine::new(cfg.lambda, cfg.storage_steps, cfg.mode).single_cycle(input)
}

/// Ideal unitary encoding: `a|0> + b|1>` with two fresh ancillas becomes
/// `a|---> + b|+++>`.
pub fn encode(psi: &CVector) -> CVector {
    assert_eq!(psi.len(), 2, "single-qubit input");
    let mut anc = CVector::zeros(4);
    anc[0] = Complex::new(1.0, 0.0);
    let full = tensor_product_vec(psi, &anc);
    rotation_all(&ideal_rotation()) * cnot_pair_unitary() * full
}

/// One decode/correct pass (T1, T2, T3) under the given gate model; returns
/// the corrected 3-qubit density matrix with the ancillas reset to `|00>`.
pub fn decode_and_correct(rho: &CMatrix, gates: CycleMode) -> CMatrix {
    assert_eq!(rho.nrows(), 8, "three-qubit density matrix");
    let steps = circuit_steps(match gates {
        CycleMode::Ideal => 0.0,
        _ => unreachable!("noisy models need a lambda; use decode_and_correct_noisy"),
    }, gates);
    let v = &steps.t3 * &steps.t2 * &steps.t1 * vec_density(rho);
    unvec_density(&v)
}

/// [`decode_and_correct`] with a noisy gate model.
pub fn decode_and_correct_noisy(rho: &CMatrix, gates: CycleMode, lambda: f64) -> CMatrix {
    assert_eq!(rho.nrows(), 8, "three-qubit density matrix");
    let steps = circuit_steps(lambda, gates);
    let v = &steps.t3 * &steps.t2 * &steps.t1 * vec_density(rho);
    unvec_density(&v)
}

/// Worst-case cycle fidelity over all pure inputs, with its benchmarks.
pub fn f_cycle_min(cfg: &CycleConfig) -> CycleResult {
    let engine = CycleEngine::new(cfg.lambda, cfg.storage_steps, cfg.mode);
    let (min_input, f_cycle) = min_fidelity_over_inputs(|p| engine.single_cycle(p), 1e-10);
    let elapsed = cfg.storage_steps + CIRCUIT_TIMESTEPS;
    CycleResult {
        f_cycle,
        f_single: f_single(cfg.lambda, cfg.storage_steps),
        f_ideal: f_ideal(cfg.lambda, cfg.storage_steps),
        lambda_eff: lambda_eff_from_fidelity(f_cycle, elapsed),
        min_input,
        elapsed_timesteps: elapsed,
    }
}

/// One sampled storage length of a [`sweep_storage`] run.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub storage_steps: usize,
    pub f_cycle: f64,
    pub lambda_eff: Option<f64>,
}

/// Result of sweeping the storage time at fixed decoherence.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    /// Storage length with the smallest effective decoherence rate.
    pub m_opt: usize,
    pub lambda_eff_min: f64,
}

/// Effective decoherence rate as a function of storage time.
pub fn sweep_storage(lambda: f64, mode: CycleMode, storage_steps: &[usize]) -> SweepResult {
    assert!(!storage_steps.is_empty(), "empty sweep range");
    let points: Vec<SweepPoint> = storage_steps
        .iter()
        .map(|&m| {
            let result = f_cycle_min(&CycleConfig::new(lambda, m, mode));
            SweepPoint {
                storage_steps: m,
                f_cycle: result.f_cycle,
                lambda_eff: result.lambda_eff,
            }
        })
        .collect();
    let (m_opt, lambda_eff_min) = points
        .iter()
        .filter_map(|p| p.lambda_eff.map(|l| (p.storage_steps, l)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one in-model point");
    SweepResult {
        points,
        m_opt,
        lambda_eff_min,
    }
}

/// Worst-case fidelity at each cycle boundary of a chained run.
///
/// Each cycle feeds the corrected, re-encoded register into the next storage
/// period; entry `k` is the minimum over inputs of the fidelity after
/// `(k+1) * (M+5)` timesteps.
pub fn multi_cycle_fidelity(cfg: &CycleConfig) -> Vec<(usize, f64)> {
    multi_cycle_detail(cfg)
        .into_iter()
        .map(|(t, f, _)| (t, f))
        .collect()
}

/// [`multi_cycle_fidelity`] including the minimizing input of each boundary.
pub fn multi_cycle_detail(cfg: &CycleConfig) -> Vec<(usize, f64, BlochPoint)> {
    let engine = CycleEngine::new(cfg.lambda, cfg.storage_steps, cfg.mode);
    let period = cfg.storage_steps + CIRCUIT_TIMESTEPS;
    let cycles = cfg.cycles;

    // shared coarse grid of input trajectories
    let n_theta = 33;
    let n_phi = 32;
    let mut best: Vec<(BlochPoint, f64)> =
        vec![(BlochPoint::new(0.0, 0.0), f64::INFINITY); cycles];
    for it in 0..n_theta {
        let theta = std::f64::consts::PI * it as f64 / (n_theta - 1) as f64;
        for ip in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * ip as f64 / n_phi as f64;
            let p = BlochPoint::new(theta, phi);
            for (k, f) in engine.trajectory(p, cycles).into_iter().enumerate() {
                if f < best[k].1 {
                    best[k] = (p, f);
                }
            }
        }
    }
    // refine the minimizer of each cycle boundary separately
    best.into_iter()
        .enumerate()
        .map(|(k, start)| {
            let (p, f) = refine_bloch(|p| engine.trajectory(p, k + 1)[k], start, 1e-10);
            ((k + 1) * period, f, p)
        })
        .collect()
}

/// First time the fidelity curve crosses below `threshold`, linearly
/// interpolated between cycle boundaries; `None` if it never does.
pub fn lifetime(curve: &[(usize, f64)], threshold: f64) -> Option<f64> {
    let mut prev: Option<(usize, f64)> = None;
    for &(t, f) in curve {
        if f < threshold {
            return Some(match prev {
                None => t as f64,
                Some((t0, f0)) => {
                    let frac = (f0 - threshold) / (f0 - f);
                    t0 as f64 + frac * (t - t0) as f64
                }
            });
        }
        prev = Some((t, f));
    }
    None
}

/// Worst-case fidelity of the bare phase-damping channel after `steps`
/// timesteps, found numerically; the closed form is [`f_single`] with the
/// same exposure.
pub fn single_qubit_min_fidelity(lambda: f64, steps: usize) -> f64 {
    let ch = phase_damping_1q(
        steps as f64 * lambda,
        PhaseDampingBasis::ComputationalDephasing,
    )
    .expect("valid lambda");
    let (_, f) = min_fidelity_over_inputs(
        |p| {
            let psi = p.state();
            let rho = ch
                .apply_to_density(&(&psi * psi.adjoint()))
                .expect("2x2 by construction");
            (psi.adjoint() * rho * psi)[(0, 0)].re
        },
        1e-10,
    );
    f
}
