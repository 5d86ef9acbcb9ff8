//! First-order IMEX stepping: backward Euler for tumor diffusion, forward Euler
//! for the (truncated) reactions.

use super::cg::{cg_solve_in_place, default_max_iter, CgStats, CgWorkspace, DEFAULT_CG_TOL};
use super::grid::{Grid, GridState, ScalarField};
use super::laplacian::ShiftedLaplacian;
use crate::error::{Error, Result};
use crate::kinetics::{reaction_truncated, Params, StateTriple};

/// Necrosis level used to size the explicit reaction step: `2K + max N₀`.
pub fn working_necrosis_scale(p: &Params, n0_max: f64) -> f64 {
    2.0 * p.k + n0_max.max(0.0)
}

/// Largest admissible step, `0.5 / (ρ + α + (β₁+β₂+δ)·C_N + 2γ)`.
pub fn dt_max(p: &Params, necrosis_scale: f64) -> f64 {
    0.5 / (p.rho + p.alpha + (p.beta1 + p.beta2 + p.delta) * necrosis_scale + 2.0 * p.gamma)
}

/// Reusable IMEX stepper for one grid, parameter set and step size.
#[derive(Debug, Clone)]
pub struct ImexStepper {
    params: Params,
    dt: f64,
    cg_tol: f64,
    max_iter: usize,
    op: ShiftedLaplacian,
    ws: CgWorkspace,
    rhs: Vec<f64>,
    guess: Vec<f64>,
    previous_tumor: Option<Vec<f64>>,
    last_stats: CgStats,
}

impl ImexStepper {
    pub fn new(grid: Grid, params: Params, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive (got {dt})"
            )));
        }
        params.validate()?;
        let op = ShiftedLaplacian::implicit_diffusion(grid, dt * params.kappa0);
        Ok(ImexStepper {
            params,
            dt,
            cg_tol: DEFAULT_CG_TOL,
            max_iter: default_max_iter(&op),
            op,
            ws: CgWorkspace::default(),
            rhs: vec![0.0; grid.len()],
            guess: vec![0.0; grid.len()],
            previous_tumor: None,
            last_stats: CgStats {
                iterations: 0,
                residual: 0.0,
            },
        })
    }

    pub fn with_cg_tol(mut self, tol: f64) -> Self {
        self.cg_tol = tol;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn cg_tol(&self) -> f64 {
        self.cg_tol
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn last_stats(&self) -> CgStats {
        self.last_stats
    }

    /// Advances `state` by one step.
    pub fn step(&mut self, state: &mut GridState) -> Result<CgStats> {
        if state.grid() != &self.op.grid {
            return Err(Error::InvalidArgument(
                "state grid differs from stepper grid".into(),
            ));
        }
        let dt = self.dt;
        let p = self.params;
        {
            let GridState {
                tumor,
                necrosis,
                vasc,
                ..
            } = &mut *state;
            let t = tumor.values();
            let n = necrosis.values_mut();
            let phi = vasc.values_mut();
            for k in 0..t.len() {
                let rates = reaction_truncated(&StateTriple::new(t[k], n[k], phi[k]), &p);
                self.rhs[k] = t[k] + dt * rates[0];
                n[k] += dt * rates[1];
                phi[k] += dt * rates[2];
            }
        }

        // Linear extrapolation in time as the starting guess.
        let t_now = state.tumor.values();
        match &self.previous_tumor {
            Some(prev) => {
                for k in 0..t_now.len() {
                    self.guess[k] = 2.0 * t_now[k] - prev[k];
                }
            }
            None => self.guess.copy_from_slice(t_now),
        }
        let stats = cg_solve_in_place(
            &self.op,
            &self.rhs,
            &mut self.guess,
            self.cg_tol,
            self.max_iter,
            &mut self.ws,
        )?;
        let prev = self
            .previous_tumor
            .get_or_insert_with(|| vec![0.0; t_now.len()]);
        prev.copy_from_slice(t_now);
        state.tumor.values_mut().copy_from_slice(&self.guess);
        state.t += dt;
        if !state.is_finite() {
            let bad = (0..state.grid().len())
                .map(|k| state.cell(k))
                .find(|c| !c.is_finite())
                .unwrap_or_default();
            return Err(Error::IntegrationFailure {
                t: state.t,
                state: bad,
            });
        }
        self.last_stats = stats;
        Ok(stats)
    }
}

/// One IMEX step from `s`.
pub fn imex_step(s: &GridState, dt: f64, p: &Params) -> Result<GridState> {
    let mut next = s.clone();
    ImexStepper::new(*s.grid(), *p, dt)?.step(&mut next)?;
    Ok(next)
}

/// Sum of Gaussian bumps `A·exp(−|x − c|²/(2σ²))`, clamped to `[0, K]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub x: f64,
    pub y: f64,
    pub amplitude: f64,
    pub sigma: f64,
}

impl Bump {
    pub const DEFAULT_AMPLITUDE: f64 = 0.8;
    pub const DEFAULT_SIGMA: f64 = 0.3;

    pub fn at(x: f64, y: f64) -> Self {
        Bump {
            x,
            y,
            amplitude: Self::DEFAULT_AMPLITUDE,
            sigma: Self::DEFAULT_SIGMA,
        }
    }

    /// Default centers for one, two and three tumors.
    pub fn layout(count: usize) -> Vec<Bump> {
        match count {
            1 => vec![Bump::at(0.0, 0.0)],
            2 => vec![Bump::at(-1.0, 0.0), Bump::at(1.0, 0.0)],
            3 => vec![
                Bump::at(-1.0, -1.0),
                Bump::at(1.0, -1.0),
                Bump::at(0.0, 1.0),
            ],
            _ => Vec::new(),
        }
    }
}

pub fn bump_field(grid: Grid, bumps: &[Bump], k: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        let v: f64 = bumps
            .iter()
            .map(|b| {
                let r2 = (x - b.x).powi(2) + (y - b.y).powi(2);
                b.amplitude * (-r2 / (2.0 * b.sigma * b.sigma)).exp()
            })
            .sum();
        v.clamp(0.0, k)
    })
}
