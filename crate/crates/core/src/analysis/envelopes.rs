//! Exponential decay envelopes implied by the stability results, and the
//! check of a sampled norm series against one.

use crate::error::{Error, Result};
use crate::kinetics::Params;
use crate::pde::ScalarField;
use crate::spectral::{lambda1, DEFAULT_EIGEN_TOL};

/// Default multiplicative slack when comparing a series to an envelope.
pub const DEFAULT_ENVELOPE_SLACK: f64 = 1e-3;

/// `amplitude · e^{−rate·(t − t_start)}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayEnvelope {
    pub amplitude: f64,
    pub rate: f64,
    pub t_start: f64,
}

impl DecayEnvelope {
    pub fn new(amplitude: f64, rate: f64, t_start: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "envelope amplitude must be finite and nonnegative (got {amplitude})"
            )));
        }
        if !(rate.is_finite() && t_start.is_finite()) {
            return Err(Error::InvalidArgument(
                "envelope rate and start must be finite".into(),
            ));
        }
        Ok(DecayEnvelope {
            amplitude,
            rate,
            t_start,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        self.amplitude * (-self.rate * (t - self.t_start)).exp()
    }
}

/// Envelopes for `‖T‖∞` and `‖Φ‖∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePair {
    pub tumor: DecayEnvelope,
    pub vasc: DecayEnvelope,
}

/// A result that only exists when a parameter condition holds.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate<T> {
    Applicable(T),
    Inapplicable(String),
}

impl<T> Gate<T> {
    pub fn is_applicable(&self) -> bool {
        matches!(self, Gate::Applicable(_))
    }

    pub fn applicable(self) -> Option<T> {
        match self {
            Gate::Applicable(v) => Some(v),
            Gate::Inapplicable(_) => None,
        }
    }
}

/// Whether vessel destruction dominates angiogenesis, `δ ≥ γ/K`.
pub fn destruction_dominates(p: &Params) -> bool {
    p.delta >= p.gamma / p.k
}

/// Envelopes valid when `δ ≥ γ/K` and `N₀ ≥ n0min > 0`.
///
/// `Φ ≤ Φ₀max·e^{−β₂·n0min·t}`, and `T ≤ M·e^{−μ t}` with
/// `μ = min(β₁, β₂)·n0min / 2` and `M = max(T₀max, ρ·Φ₀max / (β₁·n0min − μ))`.
pub fn destruction_dominated_envelopes(
    p: &Params,
    n0min: f64,
    phi0max: f64,
    t0max: f64,
) -> Result<Gate<EnvelopePair>> {
    if !(n0min > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "n0min must be positive (got {n0min})"
        )));
    }
    if !destruction_dominates(p) {
        return Ok(Gate::Inapplicable(format!(
            "delta = {} < gamma/K = {}",
            p.delta,
            p.gamma / p.k
        )));
    }
    let mu = 0.5 * p.beta1.min(p.beta2) * n0min;
    let m = t0max.max(p.rho * phi0max / (p.beta1 * n0min - mu));
    Ok(Gate::Applicable(EnvelopePair {
        tumor: DecayEnvelope::new(m, mu, 0.0)?,
        vasc: DecayEnvelope::new(phi0max, p.beta2 * n0min, 0.0)?,
    }))
}

/// Envelopes valid when `ρ < λ₁(−Δ + β₁·N₀)` and `N₀ > 0`.
///
/// `T ≤ T₀max·e^{−(λ₁−ρ) t}`; from `t_star` on, `Φ ≤ Φ(t_star)·e^{−μ*(t − t_star)}`
/// with `μ* = β₂·min N₀ / 2`.
pub fn eigenvalue_gated_envelopes(
    p: &Params,
    n0: &ScalarField,
    t0max: f64,
    phi_at_tstar: f64,
    t_star: f64,
) -> Result<Gate<EnvelopePair>> {
    let n0min = n0.min();
    if !(n0min > 0.0) {
        return Err(Error::InvalidArgument(
            "N0 must be positive everywhere".into(),
        ));
    }
    let b = ScalarField::from_values(
        *n0.grid(),
        n0.values().iter().map(|v| p.beta1 * v).collect(),
    )?;
    let l1 = lambda1(&b, DEFAULT_EIGEN_TOL)?.lambda1;
    if p.rho >= l1 {
        return Ok(Gate::Inapplicable(format!(
            "rho = {} >= lambda1 = {l1}",
            p.rho
        )));
    }
    Ok(Gate::Applicable(EnvelopePair {
        tumor: DecayEnvelope::new(t0max, l1 - p.rho, 0.0)?,
        vasc: DecayEnvelope::new(phi_at_tstar, 0.5 * p.beta2 * n0min, t_star)?,
    }))
}

/// First sample at which `(γ/K)·‖T‖∞ ≤ β₂·n0min / 2`, i.e. from which the
/// vasculature is guaranteed to decay at rate `μ*`.
pub fn eigen_t_star(p: &Params, n0min: f64, tumor_max: &[(f64, f64)]) -> Option<f64> {
    let target = 0.5 * p.beta2 * n0min;
    tumor_max
        .iter()
        .find(|(_, tm)| p.gamma / p.k * tm <= target)
        .map(|(t, _)| *t)
}

/// Envelopes valid when `N₀ ≥ K − ε` everywhere.
///
/// Rates `β₁(K−ε) − ρε/K` for `T` and `β₂(K−ε) − γε/K` for `Φ`; inapplicable
/// unless both are positive.
pub fn near_capacity_envelopes(
    p: &Params,
    eps: f64,
    t0max: f64,
    phi0max: f64,
) -> Result<Gate<EnvelopePair>> {
    if !(eps > 0.0 && eps < p.k) {
        return Err(Error::InvalidArgument(format!(
            "eps must lie in (0, K) = (0, {}) (got {eps})",
            p.k
        )));
    }
    let t_rate = p.beta1 * (p.k - eps) - p.rho * eps / p.k;
    let phi_rate = p.beta2 * (p.k - eps) - p.gamma * eps / p.k;
    if t_rate <= 0.0 || phi_rate <= 0.0 {
        return Ok(Gate::Inapplicable(format!(
            "decay rates not positive (T: {t_rate}, Phi: {phi_rate})"
        )));
    }
    Ok(Gate::Applicable(EnvelopePair {
        tumor: DecayEnvelope::new(t0max, t_rate, 0.0)?,
        vasc: DecayEnvelope::new(phi0max, phi_rate, 0.0)?,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub pass: bool,
    /// Largest `value / envelope` over the checked samples.
    pub worst_ratio: f64,
    pub t_worst: f64,
    pub samples: usize,
}

/// Compares `(t, value)` samples with `env`, skipping samples before `env.t_start`.
/// Passes iff every value is at most `env(t)·(1 + slack)`.
pub fn check_envelope(series: &[(f64, f64)], env: &DecayEnvelope, slack: f64) -> EnvelopeCheck {
    let mut out = EnvelopeCheck {
        pass: true,
        worst_ratio: 0.0,
        t_worst: env.t_start,
        samples: 0,
    };
    for &(t, v) in series.iter().filter(|(t, _)| *t >= env.t_start) {
        out.samples += 1;
        let bound = env.value(t);
        let ratio = if v <= 0.0 {
            0.0
        } else if bound > 0.0 {
            v / bound
        } else {
            f64::INFINITY
        };
        if ratio > out.worst_ratio {
            out.worst_ratio = ratio;
            out.t_worst = t;
        }
        if v > bound * (1.0 + slack) {
            out.pass = false;
        }
    }
    out
}
