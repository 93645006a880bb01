//! Command-line harness for the decoherence simulator.
//!
//! Four subcommands emit machine-readable tables on stdout (CSV by default,
//! JSON with `--format json`) and diagnostics on stderr:
//!
//! * `channel-check`  - completeness and trace-preservation residuals of one
//!   channel, with a sample input/output density-matrix pair.
//! * `gate-fidelity`  - worst-case gate fidelity across a decoherence grid,
//!   with the extrapolated zero-decoherence slope.
//! * `cycle`          - the three-qubit correction cycle, one row per cycle
//!   boundary.
//! * `sweep`          - effective decoherence rate as a function of storage
//!   time, with the optimum in a footer line.
//!
//! Runs are deterministic: the same command line and `--seed` produce
//! byte-identical table bodies.

use clap::{Parser, Subcommand, ValueEnum};
use pqsim::channels::{
    amplitude_damping_1q, amplitude_damping_stationary, dual_rail_channel, phase_damping_nq,
    KrausChannel,
};
use pqsim::error_model::ErrorModelParams;
use pqsim::noisy_gates::{
    gate_fidelity, gate_fidelity_hilbert, noisy_cnot, noisy_rotation, DampingKind,
    DEFAULT_ENTANGLED_SEED,
};
use pqsim::qec3::{
    f_ideal, lambda_eff_from_fidelity, multi_cycle_detail, sweep_storage, CycleConfig, CycleMode,
};
use pqsim::qmath::{CMatrix, CVector, Complex};
use serde::Serialize;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "pqsim", version, about = "Kraus-operator decoherence simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for the entangled-input sample of the full-Hilbert gate search.
    #[arg(long, global = true, default_value_t = DEFAULT_ENTANGLED_SEED)]
    seed: u64,
    /// Output encoding for the table body on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelName {
    /// N-qubit phase damping (bit-flip picture).
    Phase,
    /// Single-qubit amplitude damping.
    Amplitude,
    /// Dual-rail photon loss.
    DualRail,
}

#[derive(Clone, Copy, ValueEnum)]
enum GateName {
    R,
    Cn,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DampingName {
    Phase,
    Amplitude,
}

impl From<DampingName> for DampingKind {
    fn from(d: DampingName) -> Self {
        match d {
            DampingName::Phase => DampingKind::Phase,
            DampingName::Amplitude => DampingKind::Amplitude,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeName {
    Ideal,
    LumpedPhase,
    ContinuousPhase,
    ContinuousAmplitude,
}

impl From<ModeName> for CycleMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Ideal => CycleMode::Ideal,
            ModeName::LumpedPhase => CycleMode::LumpedPhase,
            ModeName::ContinuousPhase => CycleMode::ContinuousPhase,
            ModeName::ContinuousAmplitude => CycleMode::ContinuousAmplitude,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Verify completeness and trace preservation of a channel.
    ChannelCheck {
        #[arg(value_enum)]
        channel: ChannelName,
        /// Decoherence per timestep (phase channel).
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        /// Register size for the phase channel.
        #[arg(long, default_value_t = 1)]
        qubits: usize,
        /// Upward amplitude-damping exponent.
        #[arg(long, default_value_t = 0.0)]
        gamma0: f64,
        /// Downward amplitude-damping exponent.
        #[arg(long, default_value_t = 0.1)]
        gamma1: f64,
        /// Dual-rail loss exponent.
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
    },
    /// Worst-case gate fidelity across a decoherence grid.
    GateFidelity {
        #[arg(long, value_enum)]
        gate: GateName,
        #[arg(long, value_enum)]
        damping: DampingName,
        /// Comma-separated decoherence values.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "1e-5,3e-5,1e-4,3e-4,1e-3"
        )]
        lambdas: Vec<f64>,
        /// Search the full Hilbert space (product grid plus the seeded
        /// entangled sample) instead of real-amplitude inputs.
        #[arg(long, default_value_t = false)]
        hilbert: bool,
    },
    /// Simulate correction cycles of the three-qubit code.
    Cycle {
        #[arg(long, value_enum)]
        mode: ModeName,
        #[arg(long)]
        lambda: f64,
        /// Storage timesteps between corrections.
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        cycles: usize,
    },
    /// Effective decoherence rate versus storage time.
    Sweep {
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_enum)]
        mode: ModeName,
        #[arg(long)]
        m_min: usize,
        #[arg(long)]
        m_max: usize,
        #[arg(long, default_value_t = 1)]
        m_step: usize,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    parameters: serde_json::Value,
    seed: u64,
    version: &'a str,
    duration_ms: u128,
}

fn emit_manifest(command: &str, parameters: serde_json::Value, seed: u64, started: Instant) {
    let manifest = Manifest {
        command,
        parameters,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        duration_ms: started.elapsed().as_millis(),
    };
    eprintln!("{}", serde_json::to_string(&manifest).expect("serializable"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    match cli.command {
        Command::ChannelCheck {
            channel,
            lambda,
            qubits,
            gamma0,
            gamma1,
            gamma,
        } => {
            let code =
                run_channel_check(channel, lambda, qubits, gamma0, gamma1, gamma, cli.format);
            let params = serde_json::json!({
                "channel": match channel {
                    ChannelName::Phase => "phase",
                    ChannelName::Amplitude => "amplitude",
                    ChannelName::DualRail => "dual-rail",
                },
                "lambda": lambda, "qubits": qubits,
                "gamma0": gamma0, "gamma1": gamma1, "gamma": gamma,
            });
            emit_manifest("channel-check", params, cli.seed, started);
            code
        }
        Command::GateFidelity {
            gate,
            damping,
            lambdas,
            hilbert,
        } => {
            let code = run_gate_fidelity(gate, damping, &lambdas, hilbert, cli.seed, cli.format);
            let params = serde_json::json!({
                "gate": if matches!(gate, GateName::R) { "R" } else { "CN" },
                "damping": if damping == DampingName::Phase { "phase" } else { "amplitude" },
                "lambdas": lambdas, "hilbert": hilbert,
            });
            emit_manifest("gate-fidelity", params, cli.seed, started);
            code
        }
        Command::Cycle {
            mode,
            lambda,
            m,
            cycles,
        } => {
            let code = run_cycle_cmd(mode, lambda, m, cycles, cli.format);
            let params = serde_json::json!({
                "mode": mode_str(mode), "lambda": lambda, "m": m, "cycles": cycles,
            });
            emit_manifest("cycle", params, cli.seed, started);
            code
        }
        Command::Sweep {
            lambda,
            mode,
            m_min,
            m_max,
            m_step,
        } => {
            if m_min > m_max || m_step == 0 {
                eprintln!("error: need m-min <= m-max and a positive m-step");
                return ExitCode::from(2);
            }
            let code = run_sweep(lambda, mode, m_min, m_max, m_step, cli.format);
            let params = serde_json::json!({
                "mode": mode_str(mode), "lambda": lambda,
                "m_min": m_min, "m_max": m_max, "m_step": m_step,
            });
            emit_manifest("sweep", params, cli.seed, started);
            code
        }
    }
}

fn mode_str(mode: ModeName) -> &'static str {
    match mode {
        ModeName::Ideal => "ideal",
        ModeName::LumpedPhase => "lumped-phase",
        ModeName::ContinuousPhase => "continuous-phase",
        ModeName::ContinuousAmplitude => "continuous-amplitude",
    }
}

// ---------------------------------------------------------------------------
// channel-check

#[derive(Serialize)]
struct MatrixEntry {
    matrix: &'static str,
    i: usize,
    j: usize,
    re: f64,
    im: f64,
}

fn run_channel_check(
    channel: ChannelName,
    lambda: f64,
    qubits: usize,
    gamma0: f64,
    gamma1: f64,
    gamma: f64,
    format: Format,
) -> ExitCode {
    let built: Result<(KrausChannel, CVector), String> = match channel {
        ChannelName::Phase => phase_damping_nq(qubits, (1.0 + (-lambda).exp()) / 2.0)
            .map(|ch| {
                let dim = 1usize << qubits;
                // a register-wide superposition shows the damping structure
                let mut psi = CVector::zeros(dim);
                psi[0] = Complex::new(0.6, 0.0);
                psi[dim - 1] = Complex::new(0.0, 0.8);
                (ch, psi)
            })
            .map_err(|e| e.to_string()),
        ChannelName::Amplitude => amplitude_damping_1q(gamma0, gamma1)
            .map(|ch| {
                let psi =
                    CVector::from_vec(vec![Complex::new(0.6, 0.0), Complex::new(0.0, 0.8)]);
                (ch, psi)
            })
            .map_err(|e| e.to_string()),
        ChannelName::DualRail => dual_rail_channel(gamma)
            .map(|ch| {
                let mut psi = CVector::zeros(4);
                psi[1] = Complex::new(1.0 / 2f64.sqrt(), 0.0);
                psi[2] = Complex::new(1.0 / 2f64.sqrt(), 0.0);
                (ch, psi)
            })
            .map_err(|e| e.to_string()),
    };
    let (ch, psi) = match built {
        Ok(pair) => pair,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };

    let rho_in = &psi * psi.adjoint();
    let rho_out = ch.apply_to_density(&rho_in).expect("matching dimensions");
    let completeness = ch.completeness_residual();
    let trace_residual = (rho_out.trace().re - rho_in.trace().re).abs();

    // the amplitude channel also has a stationary state worth reporting
    let stationary = match channel {
        ChannelName::Amplitude => amplitude_damping_stationary(gamma0, gamma1).ok(),
        _ => None,
    };

    match format {
        Format::Csv => {
            println!("field,i,j,re,im");
            println!("completeness_residual,,,{completeness:e},");
            println!("trace_residual,,,{trace_residual:e},");
            print_matrix_csv("rho_in", &rho_in);
            print_matrix_csv("rho_out", &rho_out);
            if let Some((rho, temperature)) = &stationary {
                print_matrix_csv("stationary", rho);
                println!("temperature,,,{temperature},");
            }
        }
        Format::Json => {
            let mut entries: Vec<MatrixEntry> = Vec::new();
            collect_matrix(&mut entries, "rho_in", &rho_in);
            collect_matrix(&mut entries, "rho_out", &rho_out);
            if let Some((rho, _)) = &stationary {
                collect_matrix(&mut entries, "stationary", rho);
            }
            let body = serde_json::json!({
                "label": ch.label(),
                "completeness_residual": completeness,
                "trace_residual": trace_residual,
                "temperature": stationary.as_ref().map(|(_, t)| t),
                "matrices": entries,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&body).expect("serializable")
            );
        }
    }

    if completeness < 1e-10 && trace_residual < 1e-10 {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: residuals exceed 1e-10");
        ExitCode::FAILURE
    }
}

fn print_matrix_csv(name: &str, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            println!("{name},{i},{j},{},{}", m[(i, j)].re, m[(i, j)].im);
        }
    }
}

fn collect_matrix(out: &mut Vec<MatrixEntry>, name: &'static str, m: &CMatrix) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(MatrixEntry {
                matrix: name,
                i,
                j,
                re: m[(i, j)].re,
                im: m[(i, j)].im,
            });
        }
    }
}

// ---------------------------------------------------------------------------
// gate-fidelity

#[derive(Serialize)]
struct GateRow {
    lambda: f64,
    fidelity: f64,
    slope_estimate: f64,
}

fn run_gate_fidelity(
    gate: GateName,
    damping: DampingName,
    lambdas: &[f64],
    hilbert: bool,
    seed: u64,
    format: Format,
) -> ExitCode {
    let kind: DampingKind = damping.into();
    let eval = |lambda: f64| -> Result<f64, String> {
        let g = match gate {
            GateName::R => noisy_rotation(lambda, kind),
            GateName::Cn => noisy_cnot(lambda, kind),
        }
        .map_err(|e| e.to_string())?;
        Ok(if hilbert {
            gate_fidelity_hilbert(&g, seed)
        } else {
            gate_fidelity(&g)
        })
    };

    let mut rows = Vec::with_capacity(lambdas.len() + 1);
    for &lambda in lambdas {
        match eval(lambda) {
            Ok(f) => rows.push(GateRow {
                lambda,
                fidelity: f,
                slope_estimate: if lambda > 0.0 {
                    (1.0 - f) / lambda
                } else {
                    f64::NAN
                },
            }),
            Err(message) => {
                eprintln!("error: {message}");
                return ExitCode::from(2);
            }
        }
    }
    rows.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));

    // Richardson extrapolation to lambda -> 0 from the two smallest points
    let finite: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.lambda > 0.0)
        .map(|r| (r.lambda, r.slope_estimate))
        .collect();
    let extrapolated = if finite.len() >= 2 {
        let ((l1, s1), (l2, s2)) = (finite[0], finite[1]);
        (l2 * s1 - l1 * s2) / (l2 - l1)
    } else {
        f64::NAN
    };
    rows.push(GateRow {
        lambda: 0.0,
        fidelity: 1.0,
        slope_estimate: extrapolated,
    });

    match format {
        Format::Csv => {
            println!("lambda,fidelity,slope_estimate");
            for r in &rows {
                println!("{},{},{}", r.lambda, r.fidelity, r.slope_estimate);
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&rows).expect("serializable")
            );
        }
    }
    ExitCode::SUCCESS
}

// ---------------------------------------------------------------------------
// cycle

#[derive(Serialize)]
struct CycleRow {
    t: usize,
    f_cycle: f64,
    f_single: f64,
    f_ideal: f64,
    lambda_eff: f64,
    min_theta: f64,
    min_phi: f64,
}

fn run_cycle_cmd(
    mode: ModeName,
    lambda: f64,
    m: usize,
    cycles: usize,
    format: Format,
) -> ExitCode {
    if !(lambda.is_finite() && lambda >= 0.0) || cycles == 0 {
        eprintln!("error: lambda must be finite and nonnegative, cycles at least 1");
        return ExitCode::from(2);
    }
    let cfg = CycleConfig::new(lambda, m, mode.into()).with_cycles(cycles);
    let detail = multi_cycle_detail(&cfg);

    let single_cycle_ideal = f_ideal(lambda, m);
    let rows: Vec<CycleRow> = detail
        .iter()
        .enumerate()
        .map(|(k, &(t, f, p))| {
            // benchmarks accumulate multiplicatively over chained cycles
            let ideal_k = (1.0 + (2.0 * single_cycle_ideal - 1.0).powi(k as i32 + 1)) / 2.0;
            CycleRow {
                t,
                f_cycle: f,
                f_single: (1.0 + (-lambda * t as f64).exp()) / 2.0,
                f_ideal: ideal_k,
                lambda_eff: lambda_eff_from_fidelity(f, t).unwrap_or(f64::NAN),
                min_theta: p.theta,
                min_phi: p.phi,
            }
        })
        .collect();

    match format {
        Format::Csv => {
            println!("t,f_cycle,f_single,f_ideal,lambda_eff,min_theta,min_phi");
            for r in &rows {
                println!(
                    "{},{},{},{},{},{},{}",
                    r.t, r.f_cycle, r.f_single, r.f_ideal, r.lambda_eff, r.min_theta, r.min_phi
                );
            }
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&rows).expect("serializable")
            );
        }
    }
    ExitCode::SUCCESS
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Serialize)]
struct SweepRow {
    m: usize,
    lambda_eff: f64,
}

fn run_sweep(
    lambda: f64,
    mode: ModeName,
    m_min: usize,
    m_max: usize,
    m_step: usize,
    format: Format,
) -> ExitCode {
    let storage: Vec<usize> = (m_min..=m_max).step_by(m_step).collect();
    let sweep = sweep_storage(lambda, mode.into(), &storage);
    let rows: Vec<SweepRow> = sweep
        .points
        .iter()
        .map(|p| SweepRow {
            m: p.storage_steps,
            lambda_eff: p.lambda_eff.unwrap_or(f64::NAN),
        })
        .collect();

    match format {
        Format::Csv => {
            println!("M,lambda_eff");
            for r in &rows {
                println!("{},{}", r.m, r.lambda_eff);
            }
            println!(
                "M_opt={} lambda_eff_min={}",
                sweep.m_opt, sweep.lambda_eff_min
            );
        }
        Format::Json => {
            let body = serde_json::json!({
                "points": rows,
                "m_opt": sweep.m_opt,
                "lambda_eff_min": sweep.lambda_eff_min,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&body).expect("serializable")
            );
        }
    }

    // reference predictions from the fitted closed-form model
    let model = ErrorModelParams::three_bit_continuous_phase();
    eprintln!(
        "model: m_opt={} lambda_opt={:.6e} lambda_crit={:.4}",
        model.m_opt(lambda),
        model.lambda_opt(lambda, false),
        model.lambda_crit()
    );
    ExitCode::SUCCESS
}
