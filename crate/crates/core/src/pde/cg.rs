//! Conjugate gradients for the symmetric positive definite grid operators.

use super::grid::ScalarField;
use super::laplacian::GridOperator;
use crate::error::{Error, Result};

/// Default relative residual target.
pub const DEFAULT_CG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖ / ‖b‖` (from the recurrence).
    pub residual: f64,
}

/// Scratch vectors reused across solves of the same size.
#[derive(Debug, Default, Clone)]
pub struct CgWorkspace {
    b: Vec<f64>,
    r: Vec<f64>,
    p: Vec<f64>,
    ap: Vec<f64>,
}

impl CgWorkspace {
    fn resize(&mut self, n: usize) {
        self.b.resize(n, 0.0);
        self.r.resize(n, 0.0);
        self.p.resize(n, 0.0);
        self.ap.resize(n, 0.0);
    }
}

/// Power of two bringing `max |b|` into `[1, 2)`; exact, so it only changes
/// results when the unscaled dot products would under- or overflow.
fn unit_scale(b: &[f64]) -> f64 {
    let peak = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let e = peak.log2().floor().clamp(-1020.0, 1020.0) as i32;
    2f64.powi(-e)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Default iteration cap, `10·(nx·ny)`.
pub fn default_max_iter<O: GridOperator + ?Sized>(op: &O) -> usize {
    10 * op.grid().len()
}

/// Solves `A x = b` in place, starting from the guess already in `x`.
pub fn cg_solve_in_place<O: GridOperator + ?Sized>(
    op: &O,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    ws: &mut CgWorkspace,
) -> Result<CgStats> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "CG tolerance must be positive (got {tol})"
        )));
    }
    let n = b.len();
    assert_eq!(x.len(), n, "solution and right-hand side lengths differ");
    if b.iter().all(|v| *v == 0.0) {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(CgStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    ws.resize(n);
    let scale = unit_scale(b);
    for (bs, bv) in ws.b.iter_mut().zip(b) {
        *bs = bv * scale;
    }
    x.iter_mut().for_each(|v| *v *= scale);
    let result = cg_scaled(op, x, tol, max_iter, ws);
    x.iter_mut().for_each(|v| *v /= scale);
    result
}

fn cg_scaled<O: GridOperator + ?Sized>(
    op: &O,
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
    ws: &mut CgWorkspace,
) -> Result<CgStats> {
    let n = x.len();
    let CgWorkspace { b, r, p, ap } = ws;
    let b_norm = dot(b, b).sqrt();

    op.apply(x, ap);
    for k in 0..n {
        r[k] = b[k] - ap[k];
    }
    let mut rr = dot(r, r);
    let target = tol * b_norm;
    if rr.sqrt() <= target {
        return Ok(CgStats {
            iterations: 0,
            residual: rr.sqrt() / b_norm,
        });
    }
    p.copy_from_slice(r);

    for it in 1..=max_iter {
        op.apply(p, ap);
        let pap = dot(p, ap);
        if !(pap > 0.0) {
            return Err(Error::SolverFailure {
                iterations: it,
                residual: rr.sqrt() / b_norm,
            });
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(r, r);
        if rr_new.sqrt() <= target {
            return Ok(CgStats {
                iterations: it,
                residual: rr_new.sqrt() / b_norm,
            });
        }
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    Err(Error::SolverFailure {
        iterations: max_iter,
        residual: rr.sqrt() / b_norm,
    })
}

/// Solves `op · x = rhs` to relative residual `tol` from a zero initial guess.
pub fn cg_solve<O: GridOperator + ?Sized>(
    op: &O,
    rhs: &ScalarField,
    tol: f64,
) -> Result<ScalarField> {
    let mut x = vec![0.0; rhs.values().len()];
    let mut ws = CgWorkspace::default();
    cg_solve_in_place(op, rhs.values(), &mut x, tol, default_max_iter(op), &mut ws)?;
    ScalarField::from_values(*rhs.grid(), x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pde::grid::Grid;
    use crate::pde::laplacian::{Identity, ShiftedLaplacian};

    #[test]
    fn identity_returns_rhs() {
        let g = Grid::square(6).unwrap();
        let rhs = ScalarField::from_fn(g, |x, y| x - 3.0 * y);
        let x = cg_solve(&Identity { grid: g }, &rhs, 1e-12).unwrap();
        assert!(x.max_abs_diff(&rhs) < 1e-14);
    }

    #[test]
    fn constants_pass_through_implicit_diffusion() {
        let g = Grid::square(16).unwrap();
        let rhs = ScalarField::constant(g, 0.42);
        let op = ShiftedLaplacian::implicit_diffusion(g, 0.3);
        let x = cg_solve(&op, &rhs, 1e-12).unwrap();
        assert!(x.max_abs_diff(&rhs) < 1e-13);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::square(5).unwrap();
        let op = ShiftedLaplacian::implicit_diffusion(g, 1.0);
        let x = cg_solve(&op, &ScalarField::zeros(g), 1e-10).unwrap();
        assert_eq!(x.max_abs(), 0.0);
    }

    #[test]
    fn iteration_cap_is_a_solver_failure() {
        let g = Grid::square(32).unwrap();
        let op = ShiftedLaplacian::implicit_diffusion(g, 10.0);
        let rhs = ScalarField::from_fn(g, |x, y| (5.0 * x).sin() * (3.0 * y).cos());
        let mut x = vec![0.0; g.len()];
        let err = cg_solve_in_place(
            &op,
            rhs.values(),
            &mut x,
            1e-12,
            3,
            &mut CgWorkspace::default(),
        )
        .unwrap_err();
        match err {
            Error::SolverFailure {
                iterations,
                residual,
            } => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn tiny_and_huge_rhs_scale_exactly() {
        let g = Grid::square(12).unwrap();
        let op = ShiftedLaplacian::implicit_diffusion(g, 0.5);
        let rhs = ScalarField::from_fn(g, |x, y| 1.0 + 0.3 * (x * y).sin());
        let base = cg_solve(&op, &rhs, 1e-10).unwrap();
        for factor in [2f64.powi(-520), 2f64.powi(500)] {
            let scaled =
                ScalarField::from_values(g, rhs.values().iter().map(|v| v * factor).collect())
                    .unwrap();
            let x = cg_solve(&op, &scaled, 1e-10).unwrap();
            for (a, b) in x.values().iter().zip(base.values()) {
                assert_eq!(*a, b * factor);
            }
        }
    }

    #[test]
    fn deterministic() {
        let g = Grid::square(20).unwrap();
        let op = ShiftedLaplacian::implicit_diffusion(g, 0.05);
        let rhs = ScalarField::from_fn(g, |x, y| (-(x * x + y * y)).exp());
        let a = cg_solve(&op, &rhs, 1e-10).unwrap();
        let b = cg_solve(&op, &rhs, 1e-10).unwrap();
        assert_eq!(a, b);
    }
}
