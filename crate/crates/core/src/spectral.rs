//! Principal eigenvalue of `−Δ_h + diag(b)` under zero-flux boundaries.

use crate::error::{Error, Result};
use crate::kinetics::Params;
use crate::pde::cg::{cg_solve_in_place, default_max_iter, CgWorkspace};
use crate::pde::laplacian::{GridOperator, ShiftedLaplacian};
use crate::pde::ScalarField;

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const MAX_POWER_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    pub lambda1: f64,
    /// Nonnegative, max-norm 1.
    pub eigenfield: ScalarField,
    pub iterations: usize,
    /// `‖A v − λ₁ v‖₂` for the unit-2-norm eigenvector.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= n);
    n
}

/// Smallest eigenvalue of `−Δ_h + diag(b)` by shift-inverted power iteration.
///
/// The shift `σ = min(b) − 1` keeps `A − σ` positive definite with spectrum in
/// `[1, ∞)`, so each inner solve is a well-conditioned CG problem.
pub fn lambda1(b: &ScalarField, tol: f64) -> Result<EigenResult> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eigen tolerance must be positive (got {tol})"
        )));
    }
    if !b.is_finite() {
        return Err(Error::InvalidArgument("potential b must be finite".into()));
    }
    let grid = *b.grid();
    let n = grid.len();
    let shift = b.min() - 1.0;
    let shifted = ShiftedLaplacian::schrodinger(b, shift);
    let unshifted = ShiftedLaplacian::schrodinger(b, 0.0);
    let inner_tol = (1e-2 * tol).max(1e-13);
    let max_inner = default_max_iter(&shifted);
    let mut ws = CgWorkspace::default();

    let mut v = vec![1.0; n];
    normalize(&mut v);
    let mut av = vec![0.0; n];
    unshifted.apply(&v, &mut av);
    let mut lambda = dot(&v, &av);
    let mut w = vec![0.0; n];
    let mut residual = f64::INFINITY;

    for it in 1..=MAX_POWER_ITERATIONS {
        // (A − σ)⁻¹ v ≈ v / (λ − σ) near convergence.
        let scale = 1.0 / (lambda - shift);
        for k in 0..n {
            w[k] = v[k] * scale;
        }
        cg_solve_in_place(&shifted, &v, &mut w, inner_tol, max_inner, &mut ws)?;
        normalize(&mut w);
        std::mem::swap(&mut v, &mut w);
        unshifted.apply(&v, &mut av);
        let next = dot(&v, &av);
        residual = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - next * x).powi(2))
            .sum::<f64>()
            .sqrt();
        let change = (next - lambda).abs();
        lambda = next;
        if change <= tol && residual <= tol * (1.0 + lambda.abs()) {
            return Ok(EigenResult {
                lambda1: lambda,
                eigenfield: ground_state_field(grid, v)?,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::EigenFailure {
        iterations: MAX_POWER_ITERATIONS,
        residual,
    })
}

fn ground_state_field(grid: crate::pde::Grid, mut v: Vec<f64>) -> Result<ScalarField> {
    let sign = if v.iter().sum::<f64>() < 0.0 {
        -1.0
    } else {
        1.0
    };
    let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    v.iter_mut().for_each(|x| *x *= sign / peak);
    ScalarField::from_values(grid, v)
}

/// Outcome of testing `ρ < λ₁(−Δ + β₁·N₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoCondition {
    pub lambda1: f64,
    /// `λ₁ − ρ`.
    pub margin: f64,
    pub holds: bool,
}

pub fn check_rho_condition(p: &Params, n0: &ScalarField) -> Result<RhoCondition> {
    if n0.min() < 0.0 {
        return Err(Error::InvalidInitialData("N0 must be nonnegative".into()));
    }
    let b = ScalarField::from_values(
        *n0.grid(),
        n0.values().iter().map(|v| p.beta1 * v).collect(),
    )?;
    let lambda1 = lambda1(&b, DEFAULT_EIGEN_TOL)?.lambda1;
    let margin = lambda1 - p.rho;
    Ok(RhoCondition {
        lambda1,
        margin,
        holds: margin > 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::Grid;

    #[test]
    fn constant_potential_is_exact() {
        let g = Grid::square(24).unwrap();
        for c in [0.0, 0.03, 1.0, 5.0] {
            let r = lambda1(&ScalarField::constant(g, c), DEFAULT_EIGEN_TOL).unwrap();
            assert!((r.lambda1 - c).abs() <= 1e-8, "{c}: {}", r.lambda1);
            assert!(r
                .eigenfield
                .values()
                .iter()
                .all(|v| (v - 1.0).abs() < 1e-10));
        }
    }

    #[test]
    fn step_potential_within_variational_bounds() {
        let g = Grid::square(16).unwrap();
        let b = ScalarField::from_fn(g, |x, _| if x < 0.0 { 0.2 } else { 3.0 });
        let r = lambda1(&b, DEFAULT_EIGEN_TOL).unwrap();
        assert!(r.lambda1 > 0.2 && r.lambda1 < 3.0);
        assert!(r.residual <= DEFAULT_EIGEN_TOL * (1.0 + r.lambda1));
        assert!(r.eigenfield.min() >= -1e-10);
        assert!((r.eigenfield.max() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rho_condition_constant_cases() {
        let g = Grid::square(16).unwrap();
        let ones = ScalarField::constant(g, 1.0);
        let mut p = Params::destruction_dominant();
        let weak = check_rho_condition(&p, &ones).unwrap();
        assert!(!weak.holds);
        assert!((weak.lambda1 - 0.03).abs() < 1e-8);
        p.beta1 = 2.0;
        let strong = check_rho_condition(&p, &ones).unwrap();
        assert!(strong.holds);
        assert!((strong.margin - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let g = Grid::square(4).unwrap();
        assert!(lambda1(&ScalarField::zeros(g), 0.0).is_err());
        let neg = ScalarField::constant(g, -0.1);
        assert!(check_rho_condition(&Params::destruction_dominant(), &neg).is_err());
    }
}
