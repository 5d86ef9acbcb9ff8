//! Pointwise (diffusion-free) dynamics: fixed-step integration, equilibrium
//! classification and ω-limit estimation.

use crate::error::{Error, Result};
use crate::kinetics::{reaction, Kinetics, Params, StateTriple};

/// Default step for fixed-step integration (days).
pub const DEFAULT_DT: f64 = 0.01;
/// Default absolute tolerance for equilibrium classification.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OdeMethod {
    #[default]
    Rk4,
    Euler,
}

impl OdeMethod {
    pub fn name(self) -> &'static str {
        match self {
            OdeMethod::Rk4 => "rk4",
            OdeMethod::Euler => "euler",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<StateTriple>,
    pub method: OdeMethod,
    pub dt: f64,
}

impl OdeSolution {
    pub fn last(&self) -> (f64, StateTriple) {
        let i = self.times.len() - 1;
        (self.times[i], self.states[i])
    }
}

fn check_finite(t: f64, s: StateTriple) -> Result<StateTriple> {
    if s.is_finite() {
        Ok(s)
    } else {
        Err(Error::IntegrationFailure { t, state: s })
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "dt must be positive (got {dt})"
        )))
    }
}

/// One classical fourth-order Runge–Kutta step.
pub fn rk4_step(s: &StateTriple, dt: f64, p: &Params, kinetics: Kinetics) -> Result<StateTriple> {
    check_dt(dt)?;
    check_finite(dt, rk4_raw(s, dt, p, kinetics))
}

fn rk4_raw(s: &StateTriple, dt: f64, p: &Params, kinetics: Kinetics) -> StateTriple {
    let k1 = kinetics.rates(s, p);
    let k2 = kinetics.rates(&s.advanced(k1, 0.5 * dt), p);
    let k3 = kinetics.rates(&s.advanced(k2, 0.5 * dt), p);
    let k4 = kinetics.rates(&s.advanced(k3, dt), p);
    let mut incr = [0.0; 3];
    for i in 0..3 {
        incr[i] = (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0;
    }
    s.advanced(incr, dt)
}

/// One explicit Euler step; the reaction half of the IMEX scheme uses the same update.
pub fn euler_step(s: &StateTriple, dt: f64, p: &Params, kinetics: Kinetics) -> Result<StateTriple> {
    check_dt(dt)?;
    check_finite(dt, s.advanced(kinetics.rates(s, p), dt))
}

fn step_raw(method: OdeMethod, s: &StateTriple, dt: f64, p: &Params, k: Kinetics) -> StateTriple {
    match method {
        OdeMethod::Rk4 => rk4_raw(s, dt, p, k),
        OdeMethod::Euler => s.advanced(k.rates(s, p), dt),
    }
}

/// Checks `0 ≤ T₀, N₀, Φ₀ ≤ K`.
pub fn validate_initial(s0: &StateTriple, p: &Params) -> Result<()> {
    let comps = [("T0", s0.tumor), ("N0", s0.necrosis), ("Phi0", s0.vasc)];
    let bad: Vec<String> = comps
        .iter()
        .filter(|(_, v)| !(v.is_finite() && *v >= 0.0 && *v <= p.k))
        .map(|(name, v)| format!("{name} = {v} outside [0, {}]", p.k))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInitialData(bad.join(", ")))
    }
}

/// Fixed-step integrator configuration.
#[derive(Debug, Clone, Copy)]
pub struct Integrator {
    pub method: OdeMethod,
    pub kinetics: Kinetics,
    pub dt: f64,
}

impl Default for Integrator {
    fn default() -> Self {
        Integrator {
            method: OdeMethod::Rk4,
            kinetics: Kinetics::Truncated,
            dt: DEFAULT_DT,
        }
    }
}

impl Integrator {
    pub fn new(method: OdeMethod, kinetics: Kinetics, dt: f64) -> Self {
        Integrator {
            method,
            kinetics,
            dt,
        }
    }

    /// Number of steps needed to reach `t_end`; the last step is shortened when
    /// `t_end` is not a multiple of `dt`.
    fn plan(&self, t_end: f64) -> (usize, f64) {
        let n = (t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        let last = t_end - (n - 1) as f64 * self.dt;
        (n, last)
    }

    /// Streams the trajectory on `[0, t_end]` to `visit`, one call per accepted step
    /// (and once for the initial state). Returns the final state.
    pub fn run<F>(
        &self,
        s0: StateTriple,
        t_end: f64,
        p: &Params,
        mut visit: F,
    ) -> Result<StateTriple>
    where
        F: FnMut(f64, &StateTriple),
    {
        check_dt(self.dt)?;
        if !(t_end.is_finite() && t_end >= self.dt) {
            return Err(Error::InvalidArgument(format!(
                "t_end = {t_end} must be at least dt = {}",
                self.dt
            )));
        }
        validate_initial(&s0, p)?;
        let (n, last) = self.plan(t_end);
        let mut s = s0;
        visit(0.0, &s);
        for i in 0..n {
            let h = if i + 1 == n { last } else { self.dt };
            let t = if i + 1 == n {
                t_end
            } else {
                (i + 1) as f64 * self.dt
            };
            s = check_finite(t, step_raw(self.method, &s, h, p, self.kinetics))?;
            visit(t, &s);
        }
        Ok(s)
    }

    pub fn integrate(&self, s0: StateTriple, t_end: f64, p: &Params) -> Result<OdeSolution> {
        let mut times = Vec::new();
        let mut states = Vec::new();
        self.run(s0, t_end, p, |t, s| {
            times.push(t);
            states.push(*s);
        })?;
        Ok(OdeSolution {
            times,
            states,
            method: self.method,
            dt: self.dt,
        })
    }
}

/// RK4 with truncated kinetics from `s0` to `t_end`.
pub fn integrate(s0: StateTriple, t_end: f64, dt: f64, p: &Params) -> Result<OdeSolution> {
    Integrator::new(OdeMethod::Rk4, Kinetics::Truncated, dt).integrate(s0, t_end, p)
}

/// Constant equilibrium families of the reaction system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EquilibriumKind {
    /// `(0, 0, 0)`.
    Trivial,
    /// `(0, N, 0)` with `N > 0`.
    Necrotic,
    /// `(0, 0, Φ)` with `Φ > 0`.
    VesselOnly,
    NotEquilibrium,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumClass {
    pub kind: EquilibriumKind,
    /// `max |fᵢ|` of the raw kinetics at the state.
    pub residual: f64,
}

/// Classifies a state against the equilibrium families by its components. A
/// state whose components match a family but whose reaction residual exceeds
/// `tol` is reported as `NotEquilibrium`.
pub fn classify_equilibrium(s: &StateTriple, p: &Params, tol: f64) -> Result<EquilibriumClass> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "tol must be positive (got {tol})"
        )));
    }
    let residual = reaction(s, p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let small = |v: f64| v.abs() <= tol;
    let kind = match (small(s.tumor), small(s.necrosis), small(s.vasc)) {
        (true, true, true) => EquilibriumKind::Trivial,
        (true, false, true) if s.necrosis > 0.0 => EquilibriumKind::Necrotic,
        (true, true, false) if s.vasc > 0.0 => EquilibriumKind::VesselOnly,
        _ => EquilibriumKind::NotEquilibrium,
    };
    let kind = if residual > tol {
        EquilibriumKind::NotEquilibrium
    } else {
        kind
    };
    Ok(EquilibriumClass { kind, residual })
}

#[derive(Debug, Clone, Copy)]
pub struct OmegaLimit {
    pub state: StateTriple,
    /// Reaction residual and last-decade motion both below threshold.
    pub converged: bool,
    pub class: EquilibriumClass,
    /// `max |fᵢ|` at the final state.
    pub residual: f64,
    /// Largest distance between the final state and any state in the last tenth
    /// of the horizon.
    pub late_motion: f64,
}

pub const OMEGA_RESIDUAL_TOL: f64 = 1e-8;
pub const OMEGA_MOTION_TOL: f64 = 1e-6;

/// Integrates to `horizon` and reports where the trajectory settled.
pub fn omega_limit_estimate(
    s0: StateTriple,
    p: &Params,
    horizon: f64,
    dt: f64,
) -> Result<OmegaLimit> {
    validate_initial(&s0, p)?;
    if s0.sum() > p.k {
        return Err(Error::InvalidInitialData(format!(
            "S0 = {} exceeds K = {}",
            s0.sum(),
            p.k
        )));
    }
    let decade_start = 0.9 * horizon;
    let mut late = Vec::new();
    let fin =
        Integrator::new(OdeMethod::Rk4, Kinetics::Truncated, dt).run(s0, horizon, p, |t, s| {
            if t >= decade_start {
                late.push(*s);
            }
        })?;
    let late_motion = late.iter().fold(0.0f64, |m, s| m.max(s.max_abs_diff(&fin)));
    let residual = reaction(&fin, p).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let class = classify_equilibrium(&fin, p, DEFAULT_CLASSIFY_TOL)?;
    Ok(OmegaLimit {
        state: fin,
        converged: residual <= OMEGA_RESIDUAL_TOL && late_motion <= OMEGA_MOTION_TOL,
        class,
        residual,
        late_motion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> Params {
        Params::destruction_dominant()
    }

    #[test]
    fn equilibria_are_fixed_points_of_rk4() {
        let p = table();
        for s in [
            StateTriple::ZERO,
            StateTriple::new(0.0, 0.3, 0.0),
            StateTriple::new(0.0, 0.0, 0.7),
        ] {
            for kin in [Kinetics::Raw, Kinetics::Truncated] {
                assert_eq!(rk4_step(&s, 0.37, &p, kin).unwrap(), s);
            }
        }
    }

    #[test]
    fn rejects_bad_step_and_data() {
        let p = table();
        assert!(matches!(
            rk4_step(&StateTriple::ZERO, 0.0, &p, Kinetics::Raw),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            integrate(StateTriple::new(1.5, 0.0, 0.0), 1.0, 0.1, &p),
            Err(Error::InvalidInitialData(_))
        ));
        assert!(matches!(
            integrate(StateTriple::new(-0.1, 0.0, 0.0), 1.0, 0.1, &p),
            Err(Error::InvalidInitialData(_))
        ));
        assert!(integrate(StateTriple::ZERO, 0.01, 0.1, &p).is_err());
    }

    #[test]
    fn non_finite_state_is_an_integration_failure() {
        let p = table();
        let s = StateTriple::new(f64::NAN, 0.0, 0.0);
        assert!(matches!(
            rk4_step(&s, 0.1, &p, Kinetics::Raw),
            Err(Error::IntegrationFailure { .. })
        ));
    }

    #[test]
    fn trajectory_layout() {
        let p = table();
        let sol = integrate(StateTriple::new(0.2, 0.1, 0.3), 1.05, 0.1, &p).unwrap();
        assert_eq!(sol.times.len(), sol.states.len());
        assert_eq!(sol.times.len(), 12);
        assert!(sol.times.windows(2).all(|w| w[1] > w[0]));
        assert!((sol.last().0 - 1.05).abs() < 1e-15);
    }

    #[test]
    fn classification_examples() {
        let p = table();
        let tol = DEFAULT_CLASSIFY_TOL;
        let c = |s| classify_equilibrium(&s, &p, tol).unwrap().kind;
        assert_eq!(c(StateTriple::ZERO), EquilibriumKind::Trivial);
        assert_eq!(
            c(StateTriple::new(0.0, 0.3, 0.0)),
            EquilibriumKind::Necrotic
        );
        assert_eq!(
            c(StateTriple::new(0.0, 0.0, 0.4)),
            EquilibriumKind::VesselOnly
        );
        let off = classify_equilibrium(&StateTriple::new(0.1, 0.0, 0.0), &p, tol).unwrap();
        assert_eq!(off.kind, EquilibriumKind::NotEquilibrium);
        assert!((off.residual - p.alpha * 0.1).abs() < 1e-16);
        assert!(classify_equilibrium(&StateTriple::ZERO, &p, 0.0).is_err());
    }

    #[test]
    fn vessel_only_start_is_its_own_limit() {
        let p = table();
        let s0 = StateTriple::new(0.0, 0.0, 0.6);
        let lim = omega_limit_estimate(s0, &p, 50.0, 0.05).unwrap();
        assert!(lim.converged);
        assert_eq!(lim.state, s0);
        assert_eq!(lim.class.kind, EquilibriumKind::VesselOnly);
    }

    #[test]
    fn short_horizon_leaves_flag_unset() {
        let p = table();
        let lim = omega_limit_estimate(StateTriple::new(0.2, 0.1, 0.3), &p, 1.0, 0.01).unwrap();
        assert!(!lim.converged);
    }
}
