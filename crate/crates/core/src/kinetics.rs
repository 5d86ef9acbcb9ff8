//! Reaction kinetics for the tumor (T), necrosis (N) and vasculature (Φ) densities.
//!
//! Every reaction term reaches the vascular fraction `P = Φ₊/(Φ₊+T₊)` only through
//! the two products
//!
//! ```text
//! hypoxic_tumor(Φ, T)  = T₊·√(1 − P²)
//! perfused_tumor(Φ, T) = T₊·P
//! ```
//!
//! which are globally Lipschitz and vanish at the origin, so the kinetics are
//! finite everywhere even though `P` itself has no limit at `(0, 0)`.

use crate::error::{Error, Result};

/// Reaction coefficients and the linear diffusion constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    /// Tumor proliferation rate (day⁻¹).
    pub rho: f64,
    /// Hypoxic death rate.
    pub alpha: f64,
    /// Tumor to necrosis conversion rate (day⁻¹).
    pub beta1: f64,
    /// Vasculature to necrosis conversion rate (day⁻¹).
    pub beta2: f64,
    /// Vasculature proliferation rate (day⁻¹).
    pub gamma: f64,
    /// Vasculature destruction by tumor (day⁻¹).
    pub delta: f64,
    /// Carrying capacity (cell/cm³).
    pub k: f64,
    /// Tumor diffusion coefficient (cm²/day).
    pub kappa0: f64,
}

impl Params {
    pub fn new(
        rho: f64,
        alpha: f64,
        beta1: f64,
        beta2: f64,
        gamma: f64,
        delta: f64,
        k: f64,
    ) -> Result<Self> {
        let p = Params {
            rho,
            alpha,
            beta1,
            beta2,
            gamma,
            delta,
            k,
            kappa0: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Vessel destruction outweighs angiogenesis (`δ ≥ γ/K`).
    pub fn destruction_dominant() -> Self {
        Params {
            rho: 1.0,
            alpha: 0.03,
            beta1: 0.03,
            beta2: 0.03,
            gamma: 0.003,
            delta: 0.3,
            k: 1.0,
            kappa0: 1.0,
        }
    }

    /// Strong angiogenesis, `δ < γ/K`.
    pub fn angiogenic() -> Self {
        Params {
            gamma: 0.3,
            delta: 0.03,
            ..Self::destruction_dominant()
        }
    }

    pub fn with_kappa0(mut self, kappa0: f64) -> Result<Self> {
        self.kappa0 = kappa0;
        self.validate()?;
        Ok(self)
    }

    /// All coefficients must be finite and strictly positive.
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("rho", self.rho),
            ("alpha", self.alpha),
            ("beta1", self.beta1),
            ("beta2", self.beta2),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("K", self.k),
            ("kappa0", self.kappa0),
        ];
        let bad: Vec<String> = named
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, v)| format!("{name} = {v} must be finite and > 0"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad.join(", ")))
        }
    }
}

/// Pointwise `(T, N, Φ)` densities.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateTriple {
    pub tumor: f64,
    pub necrosis: f64,
    pub vasc: f64,
}

impl StateTriple {
    pub const ZERO: StateTriple = StateTriple {
        tumor: 0.0,
        necrosis: 0.0,
        vasc: 0.0,
    };

    pub fn new(tumor: f64, necrosis: f64, vasc: f64) -> Self {
        StateTriple {
            tumor,
            necrosis,
            vasc,
        }
    }

    /// Total density `S = T + N + Φ`.
    pub fn sum(&self) -> f64 {
        self.tumor + self.necrosis + self.vasc
    }

    pub fn is_finite(&self) -> bool {
        self.tumor.is_finite() && self.necrosis.is_finite() && self.vasc.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.tumor, self.necrosis, self.vasc]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        StateTriple::new(a[0], a[1], a[2])
    }

    /// `self + h·rate`, componentwise.
    pub fn advanced(&self, rate: [f64; 3], h: f64) -> Self {
        StateTriple::new(
            self.tumor + h * rate[0],
            self.necrosis + h * rate[1],
            self.vasc + h * rate[2],
        )
    }

    pub fn max_abs_diff(&self, other: &StateTriple) -> f64 {
        (self.tumor - other.tumor)
            .abs()
            .max((self.necrosis - other.necrosis).abs())
            .max((self.vasc - other.vasc).abs())
    }
}

/// Which form of the reaction terms to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kinetics {
    /// The reaction functions as written, through the hypoxic/perfused products.
    Raw,
    /// Positive parts everywhere and `T` clamped to `[0, K]` in the necrosis and
    /// vasculature equations.
    #[default]
    Truncated,
}

#[inline]
fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// Vasculature volume fraction `Φ₊/(Φ₊+T₊)`, taken as 0 at the origin.
pub fn vascular_fraction(phi: f64, tumor: f64) -> f64 {
    let (phi, tumor) = (pos(phi), pos(tumor));
    let total = phi + tumor;
    if total > 0.0 {
        phi / total
    } else {
        0.0
    }
}

/// `T₊·√(1 − P²)`: the part of the tumor suffering from lack of vessels.
pub fn hypoxic_tumor(phi: f64, tumor: f64) -> f64 {
    let (phi, tumor) = (pos(phi), pos(tumor));
    let total = phi + tumor;
    if tumor == 0.0 {
        return 0.0;
    }
    // 1 − P² = (1 − P)(1 + P) = T(T + 2Φ)/(Φ + T)², evaluated without cancellation.
    tumor * (tumor * (tumor + 2.0 * phi)).sqrt() / total
}

/// `T₊·P`: the perfused part of the tumor.
pub fn perfused_tumor(phi: f64, tumor: f64) -> f64 {
    let (phi, tumor) = (pos(phi), pos(tumor));
    let total = phi + tumor;
    if total > 0.0 {
        tumor * phi / total
    } else {
        0.0
    }
}

/// Tumor reaction `ρ·D·(1 − S/K) − α·B − β₁·N·T`.
pub fn tumor_rate(s: &StateTriple, p: &Params) -> f64 {
    let d = perfused_tumor(s.vasc, s.tumor);
    let b = hypoxic_tumor(s.vasc, s.tumor);
    p.rho * d * (1.0 - s.sum() / p.k) - p.alpha * b - p.beta1 * s.necrosis * s.tumor
}

/// Necrosis reaction `α·B + β₁·N·T + δ·T·Φ + β₂·N·Φ`.
pub fn necrosis_rate(s: &StateTriple, p: &Params) -> f64 {
    let b = hypoxic_tumor(s.vasc, s.tumor);
    p.alpha * b
        + p.beta1 * s.necrosis * s.tumor
        + p.delta * s.tumor * s.vasc
        + p.beta2 * s.necrosis * s.vasc
}

/// Vasculature reaction `(γ/K)·B·Φ·(1 − S/K) − δ·T·Φ − β₂·N·Φ`.
pub fn vasc_rate(s: &StateTriple, p: &Params) -> f64 {
    let b = hypoxic_tumor(s.vasc, s.tumor);
    p.gamma / p.k * b * s.vasc * (1.0 - s.sum() / p.k)
        - p.delta * s.tumor * s.vasc
        - p.beta2 * s.necrosis * s.vasc
}

/// All three raw reaction rates.
pub fn reaction(s: &StateTriple, p: &Params) -> [f64; 3] {
    [tumor_rate(s, p), necrosis_rate(s, p), vasc_rate(s, p)]
}

/// State seen by the tumor equation of the truncated system.
fn clamp_for_tumor(s: &StateTriple) -> StateTriple {
    StateTriple::new(pos(s.tumor), pos(s.necrosis), pos(s.vasc))
}

/// State seen by the necrosis and vasculature equations of the truncated system.
fn clamp_for_ode(s: &StateTriple, k: f64) -> StateTriple {
    StateTriple::new(pos(s.tumor).min(k), pos(s.necrosis), pos(s.vasc))
}

/// One truncated reaction component; `component` is 1, 2 or 3.
pub fn truncated_rate(component: usize, s: &StateTriple, p: &Params) -> Result<f64> {
    match component {
        1 => Ok(tumor_rate(&clamp_for_tumor(s), p)),
        2 => Ok(necrosis_rate(&clamp_for_ode(s, p.k), p)),
        3 => Ok(vasc_rate(&clamp_for_ode(s, p.k), p)),
        other => Err(Error::InvalidArgument(format!(
            "reaction component must be 1, 2 or 3 (got {other})"
        ))),
    }
}

/// All three truncated reaction rates.
pub fn reaction_truncated(s: &StateTriple, p: &Params) -> [f64; 3] {
    let lower = clamp_for_tumor(s);
    let boxed = clamp_for_ode(s, p.k);
    [
        tumor_rate(&lower, p),
        necrosis_rate(&boxed, p),
        vasc_rate(&boxed, p),
    ]
}

impl Kinetics {
    pub fn rates(self, s: &StateTriple, p: &Params) -> [f64; 3] {
        match self {
            Kinetics::Raw => reaction(s, p),
            Kinetics::Truncated => reaction_truncated(s, p),
        }
    }
}

/// Right-hand side of the total density equation,
/// `(ρ·D + (γ/K)·B·Φ)·(1 − S/K)`.
pub fn sum_rhs(s: &StateTriple, p: &Params) -> f64 {
    let d = perfused_tumor(s.vasc, s.tumor);
    let b = hypoxic_tumor(s.vasc, s.tumor);
    (p.rho * d + p.gamma / p.k * b * s.vasc) * (1.0 - s.sum() / p.k)
}
