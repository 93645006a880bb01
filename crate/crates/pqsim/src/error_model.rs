//! Closed-form performance model of a periodically corrected qubit.
//!
//! Two error sources compete. Storing longer raises the chance of an
//! uncorrectable multi-flip error, `F_storage = 1 - alpha M^2 lambda^2`;
//! correcting more often spends more time in the noisy circuit,
//! `F_circuit = 1 - beta lambda + beta' lambda^2`. Their product defines an
//! effective decoherence rate with an interior optimum in the storage time:
//!
//! * `M_opt ~ sqrt(beta / (alpha lambda)) - N`
//! * `lambda_opt ~ 4 sqrt(alpha beta) lambda^{3/2}`
//! * `lambda_crit ~ 1 / (4 beta sqrt(alpha))`
//!
//! The parameters are either fitted from simulated fidelity curves
//! ([`fit_alpha_beta`]) or bounded from per-gate fidelity slopes
//! ([`beta_bound_from_gates`]).

use crate::noisy_gates::DampingKind;
use thiserror::Error;

/// Per-gate infidelity slope coefficients at small decoherence, used for the
/// additive circuit-error bound.
pub const ROTATION_SLOPE_PHASE: f64 = 0.40;
pub const CNOT_SLOPE_PHASE: f64 = 0.86;
pub const ROTATION_SLOPE_AMPLITUDE: f64 = 1.80;
pub const CNOT_SLOPE_AMPLITUDE: f64 = 2.20;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {need} points, got {got}")]
    NotEnoughPoints { need: usize, got: usize },
    #[error("all lambda values are equal; the fit is degenerate")]
    DegenerateLambdas,
}

/// Coefficients of the storage/circuit error model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorModelParams {
    /// Uncorrectable-error coefficient: `1 - F_storage = alpha M^2 lambda^2`.
    pub alpha: f64,
    /// Circuit-error coefficient: `1 - F_circuit = beta lambda - beta' lambda^2`.
    pub beta: f64,
    /// Second-order circuit coefficient; diagnostic only, zero in all
    /// closed-form outputs.
    pub beta_prime: f64,
    /// Timesteps the correction circuit occupies per cycle.
    pub circuit_timesteps: usize,
}

impl ErrorModelParams {
    pub fn new(alpha: f64, beta: f64, circuit_timesteps: usize) -> Self {
        Self {
            alpha,
            beta,
            beta_prime: 0.0,
            circuit_timesteps,
        }
    }

    /// Fitted parameters of the three-qubit circuit under continuous phase
    /// damping: `alpha = 0.75`, `beta = 3.92`, five circuit timesteps.
    pub fn three_bit_continuous_phase() -> Self {
        Self::new(0.75, 3.92, 5)
    }

    /// `1 - alpha M^2 lambda^2`.
    pub fn f_storage(&self, lambda: f64, storage_steps: usize) -> f64 {
        let m = storage_steps as f64;
        1.0 - self.alpha * m * m * lambda * lambda
    }

    /// `1 - beta lambda + beta' lambda^2`; `beta_prime` enters only here.
    pub fn f_circuit(&self, lambda: f64) -> f64 {
        1.0 - self.beta * lambda + self.beta_prime * lambda * lambda
    }

    /// Effective decoherence rate of one modeled cycle,
    /// `-(1/(M+N)) ln(2 F_circuit F_storage - 1)`; `None` outside the
    /// exponential-decay regime.
    pub fn model_lambda_eff(&self, lambda: f64, storage_steps: usize) -> Option<f64> {
        let f_cycle = self.f_circuit(lambda) * self.f_storage(lambda, storage_steps);
        let arg = 2.0 * f_cycle - 1.0;
        if arg <= 0.0 {
            return None;
        }
        let period = (storage_steps + self.circuit_timesteps) as f64;
        Some(-arg.ln() / period)
    }

    /// Storage time minimizing the effective rate:
    /// `max(0, round(sqrt(beta/(alpha lambda)) - N))`.
    pub fn m_opt(&self, lambda: f64) -> usize {
        assert!(lambda > 0.0, "m_opt needs positive lambda");
        let continuous = (self.beta / (self.alpha * lambda)).sqrt() - self.circuit_timesteps as f64;
        continuous.round().max(0.0) as usize
    }

    /// Minimum achievable effective decoherence rate,
    /// `4 sqrt(alpha beta) lambda^{3/2}`; the `empirical_halving` flag
    /// applies the observed factor-of-two reduction of chained cycles.
    pub fn lambda_opt(&self, lambda: f64, empirical_halving: bool) -> f64 {
        let base = 4.0 * (self.alpha * self.beta).sqrt() * lambda.powf(1.5);
        if empirical_halving {
            base / 2.0
        } else {
            base
        }
    }

    /// Fidelity of an optimally corrected qubit after `t` timesteps,
    /// `1 - 2 sqrt(alpha beta) lambda^{3/2} t` (halved under the empirical
    /// flag).
    pub fn f_opt_at_time(&self, lambda: f64, t: f64, empirical_halving: bool) -> f64 {
        1.0 - self.lambda_opt(lambda, empirical_halving) / 2.0 * t
    }

    /// Decoherence threshold `1/(4 beta sqrt(alpha))` above which correction
    /// stops helping; infinite for an error-free circuit.
    pub fn lambda_crit(&self) -> f64 {
        1.0 / (4.0 * self.beta * self.alpha.sqrt())
    }
}

/// Additive circuit-error bound from gate counts:
/// `r_count * c_R + cn_count * c_CN`.
pub fn beta_bound_from_gates(r_count: usize, cn_count: usize, kind: DampingKind) -> f64 {
    let (c_r, c_cn) = match kind {
        DampingKind::Phase => (ROTATION_SLOPE_PHASE, CNOT_SLOPE_PHASE),
        DampingKind::Amplitude => (ROTATION_SLOPE_AMPLITUDE, CNOT_SLOPE_AMPLITUDE),
    };
    r_count as f64 * c_r + cn_count as f64 * c_cn
}

fn check_curve(curve: &[(f64, f64)]) -> Result<(), FitError> {
    if curve.len() < 3 {
        return Err(FitError::NotEnoughPoints {
            need: 3,
            got: curve.len(),
        });
    }
    let first = curve[0].0;
    if curve.iter().all(|(l, _)| *l == first) {
        return Err(FitError::DegenerateLambdas);
    }
    Ok(())
}

/// Least-squares fit of the model coefficients from fidelity curves.
///
/// `alpha` comes from the ideal-circuit curve via `1 - F = alpha M^2
/// lambda^2` (regression through the origin in `lambda^2`). `beta` and
/// `beta_prime` come from the noisy curve after removing the fitted storage
/// contribution: `(1 - F_cycle) - alpha M^2 lambda^2 = beta lambda -
/// beta' lambda^2`.
pub fn fit_alpha_beta(
    ideal_curve: &[(f64, f64)],
    noisy_curve: &[(f64, f64)],
    storage_steps: usize,
    circuit_timesteps: usize,
) -> Result<ErrorModelParams, FitError> {
    check_curve(ideal_curve)?;
    check_curve(noisy_curve)?;
    let m = storage_steps as f64;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(lambda, f) in ideal_curve {
        let x = m * m * lambda * lambda;
        sxx += x * x;
        sxy += x * (1.0 - f);
    }
    let alpha = sxy / sxx;

    // normal equations for y = beta x1 + beta' x2, x1 = lambda, x2 = -lambda^2
    let mut a11 = 0.0;
    let mut a12 = 0.0;
    let mut a22 = 0.0;
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &(lambda, f) in noisy_curve {
        let y = (1.0 - f) - alpha * m * m * lambda * lambda;
        let x1 = lambda;
        let x2 = -lambda * lambda;
        a11 += x1 * x1;
        a12 += x1 * x2;
        a22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = a11 * a22 - a12 * a12;
    if det.abs() < f64::EPSILON * a11 * a22 {
        return Err(FitError::DegenerateLambdas);
    }
    let beta = (b1 * a22 - b2 * a12) / det;
    let beta_prime = (a11 * b2 - a12 * b1) / det;

    Ok(ErrorModelParams {
        alpha,
        beta,
        beta_prime,
        circuit_timesteps,
    })
}
