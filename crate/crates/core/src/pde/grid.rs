use crate::error::{Error, Result};
use crate::kinetics::StateTriple;

/// Uniform cell-centered grid over the rectangle `(x0, x1) × (y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, bounds: (f64, f64, f64, f64)) -> Result<Self> {
        let (x0, x1, y0, y1) = bounds;
        let mut issues = Vec::new();
        if nx < 3 || ny < 3 {
            issues.push(format!("grid must be at least 3x3 (got {nx}x{ny})"));
        }
        if !(x0.is_finite() && x1.is_finite() && x1 > x0) {
            issues.push(format!("need x1 > x0 (got {x0}, {x1})"));
        }
        if !(y0.is_finite() && y1.is_finite() && y1 > y0) {
            issues.push(format!("need y1 > y0 (got {y0}, {y1})"));
        }
        if !issues.is_empty() {
            return Err(Error::InvalidArgument(issues.join(", ")));
        }
        Ok(Grid {
            nx,
            ny,
            x0,
            x1,
            y0,
            y1,
        })
    }

    /// `n × n` grid on `(−2, 2)²`.
    pub fn square(n: usize) -> Result<Self> {
        Grid::new(n, n, (-2.0, 2.0, -2.0, 2.0))
    }

    pub fn hx(&self) -> f64 {
        (self.x1 - self.x0) / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        (self.y1 - self.y0) / self.ny as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index of cell `(i, j)`, `i` along x.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Center of cell `(i, j)`.
    pub fn center(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.x0 + (i as f64 + 0.5) * self.hx(),
            self.y0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    /// Cell containing the point `(x, y)`, clamped to the grid.
    pub fn locate(&self, x: f64, y: f64) -> (usize, usize) {
        let fi = ((x - self.x0) / self.hx()).floor();
        let fj = ((y - self.y0) / self.hy()).floor();
        let i = fi.clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = fj.clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }
}

/// Samples of one density over a grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        ScalarField::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "field value at index {pos} is not finite"
            )));
        }
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at cell centers.
    pub fn from_fn<F: Fn(f64, f64) -> f64>(grid: Grid, f: F) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let (x, y) = grid.center(i, j);
                values.push(f(x, y));
            }
        }
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Midpoint-rule integral over the domain.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// `(T, N, Φ)` fields on a shared grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub t: f64,
    pub tumor: ScalarField,
    pub necrosis: ScalarField,
    pub vasc: ScalarField,
}

impl GridState {
    pub fn new(
        t: f64,
        tumor: ScalarField,
        necrosis: ScalarField,
        vasc: ScalarField,
    ) -> Result<Self> {
        if tumor.grid() != necrosis.grid() || tumor.grid() != vasc.grid() {
            return Err(Error::InvalidArgument(
                "T, N and Phi must share one grid".into(),
            ));
        }
        if !(tumor.is_finite() && necrosis.is_finite() && vasc.is_finite()) {
            return Err(Error::InvalidArgument(
                "state contains non-finite values".into(),
            ));
        }
        Ok(GridState {
            t,
            tumor,
            necrosis,
            vasc,
        })
    }

    /// Spatially constant state.
    pub fn uniform(grid: Grid, s: StateTriple) -> Self {
        GridState {
            t: 0.0,
            tumor: ScalarField::constant(grid, s.tumor),
            necrosis: ScalarField::constant(grid, s.necrosis),
            vasc: ScalarField::constant(grid, s.vasc),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.tumor.grid()
    }

    pub fn cell(&self, idx: usize) -> StateTriple {
        StateTriple::new(
            self.tumor.values()[idx],
            self.necrosis.values()[idx],
            self.vasc.values()[idx],
        )
    }

    pub fn is_finite(&self) -> bool {
        self.tumor.is_finite() && self.necrosis.is_finite() && self.vasc.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_indexing() {
        let g = Grid::new(8, 4, (-2.0, 2.0, 0.0, 1.0)).unwrap();
        assert_eq!(g.hx(), 0.5);
        assert_eq!(g.hy(), 0.25);
        assert_eq!(g.index(3, 2), 19);
        assert_eq!(g.center(0, 0), (-1.75, 0.125));
        assert_eq!(g.locate(0.0, 0.0), (4, 0));
        assert_eq!(g.locate(10.0, -10.0), (7, 0));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(2, 5, (0.0, 1.0, 0.0, 1.0)).is_err());
        assert!(Grid::new(5, 5, (1.0, 1.0, 0.0, 1.0)).is_err());
        assert!(Grid::new(5, 5, (0.0, 1.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn field_checks() {
        let g = Grid::square(4).unwrap();
        assert!(ScalarField::from_values(g, vec![0.0; 15]).is_err());
        let mut v = vec![0.0; 16];
        v[3] = f64::NAN;
        assert!(ScalarField::from_values(g, v).is_err());
        let f = ScalarField::constant(g, 0.25);
        assert!((f.integral() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn state_requires_shared_grid() {
        let a = Grid::square(4).unwrap();
        let b = Grid::square(5).unwrap();
        let r = GridState::new(
            0.0,
            ScalarField::zeros(a),
            ScalarField::zeros(b),
            ScalarField::zeros(a),
        );
        assert!(r.is_err());
    }
}
