//! Five-point Laplacian with homogeneous Neumann closure and the symmetric
//! grid operators built from it.
//!
//! The boundary closure reflects each edge cell into a ghost cell across the
//! boundary face (`u_ghost = u_edge`), so the face flux vanishes and the
//! assembled operator is symmetric with zero row sums.

use super::grid::{Grid, ScalarField};

/// `out = Δ_h x` on `grid`.
pub fn apply_laplacian(grid: &Grid, x: &[f64], out: &mut [f64]) {
    apply_scaled_neg_laplacian(grid, -1.0, x, out, |_| 0.0);
}

/// `Δ_h f` with reflecting (zero-flux) boundary closure.
pub fn laplacian_neumann(f: &ScalarField) -> ScalarField {
    let grid = *f.grid();
    let mut out = vec![0.0; grid.len()];
    apply_laplacian(&grid, f.values(), &mut out);
    ScalarField::from_values(grid, out).expect("laplacian of a finite field is finite")
}

/// `out[k] = diag(k)·x[k] + coeff·(−Δ_h x)[k]`.
#[inline]
fn apply_scaled_neg_laplacian<D: Fn(usize) -> f64>(
    grid: &Grid,
    coeff: f64,
    x: &[f64],
    out: &mut [f64],
    diag: D,
) {
    let (nx, ny) = (grid.nx, grid.ny);
    let cx = coeff / (grid.hx() * grid.hx());
    let cy = coeff / (grid.hy() * grid.hy());
    debug_assert_eq!(x.len(), nx * ny);
    debug_assert_eq!(out.len(), nx * ny);
    for j in 0..ny {
        let row = j * nx;
        let has_south = j > 0;
        let has_north = j + 1 < ny;
        for i in 0..nx {
            let k = row + i;
            let xk = x[k];
            let mut acc = 0.0;
            if i > 0 {
                acc += cx * (xk - x[k - 1]);
            }
            if i + 1 < nx {
                acc += cx * (xk - x[k + 1]);
            }
            if has_south {
                acc += cy * (xk - x[k - nx]);
            }
            if has_north {
                acc += cy * (xk - x[k + nx]);
            }
            out[k] = diag(k) * xk + acc;
        }
    }
}

/// Symmetric linear operator acting on grid-shaped vectors.
pub trait GridOperator {
    fn grid(&self) -> &Grid;
    fn apply(&self, x: &[f64], out: &mut [f64]);
}

/// The identity on a grid.
#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub grid: Grid,
}

impl GridOperator for Identity {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
}

/// Diagonal part of a [`ShiftedLaplacian`].
#[derive(Debug, Clone)]
pub enum Diagonal {
    Constant(f64),
    Field(Vec<f64>),
}

/// `diag + coeff·(−Δ_h)`. SPD when `coeff > 0` and the diagonal is positive.
#[derive(Debug, Clone)]
pub struct ShiftedLaplacian {
    pub grid: Grid,
    pub coeff: f64,
    pub diag: Diagonal,
}

impl ShiftedLaplacian {
    /// `I − dt·κ·Δ_h`, the implicit diffusion operator.
    pub fn implicit_diffusion(grid: Grid, dt_kappa: f64) -> Self {
        ShiftedLaplacian {
            grid,
            coeff: dt_kappa,
            diag: Diagonal::Constant(1.0),
        }
    }

    /// `−Δ_h + diag(b) − shift`.
    pub fn schrodinger(b: &ScalarField, shift: f64) -> Self {
        ShiftedLaplacian {
            grid: *b.grid(),
            coeff: 1.0,
            diag: Diagonal::Field(b.values().iter().map(|v| v - shift).collect()),
        }
    }
}

impl GridOperator for ShiftedLaplacian {
    fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        match &self.diag {
            Diagonal::Constant(c) => {
                let c = *c;
                apply_scaled_neg_laplacian(&self.grid, self.coeff, x, out, |_| c)
            }
            Diagonal::Field(d) => {
                apply_scaled_neg_laplacian(&self.grid, self.coeff, x, out, |k| d[k])
            }
        }
    }
}
