//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use gbm_core::pde::Grid;
use gbm_core::{Params, StateTriple};
use nalgebra::DMatrix;

/// Reaction terms transcribed literally, with `P = Φ/(Φ+T)` formed explicitly.
/// Valid for `T ≥ 0`, `Φ ≥ 0`, `(T, Φ) ≠ (0, 0)`.
pub fn literal_rates(s: &StateTriple, p: &Params) -> [f64; 3] {
    let (t, n, phi) = (s.tumor, s.necrosis, s.vasc);
    let pf = phi / (phi + t);
    let root = (1.0 - pf * pf).sqrt();
    let logistic = 1.0 - (t + n + phi) / p.k;
    let f1 = p.rho * t * pf * logistic - p.alpha * t * root - p.beta1 * n * t;
    let f2 = p.alpha * t * root + p.beta1 * n * t + p.delta * t * phi + p.beta2 * n * phi;
    let f3 = p.gamma / p.k * t * root * phi * logistic - p.delta * t * phi - p.beta2 * n * phi;
    [f1, f2, f3]
}

/// Magnitude scale of the literal terms, used to normalise comparisons.
pub fn literal_scale(s: &StateTriple, p: &Params) -> f64 {
    let (t, n, phi) = (s.tumor, s.necrosis, s.vasc);
    let logistic = (1.0 - (t + n + phi) / p.k).abs();
    let terms = [
        p.rho * t * logistic,
        p.alpha * t,
        p.beta1 * n * t,
        p.delta * t * phi,
        p.beta2 * n * phi,
        p.gamma / p.k * t * phi * logistic,
    ];
    terms.iter().map(|v| v.abs()).sum::<f64>().max(1.0)
}

fn axpy(s: [f64; 3], k: [f64; 3], h: f64) -> [f64; 3] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]]
}

fn rk4<F: Fn([f64; 3]) -> [f64; 3]>(f: &F, s: [f64; 3], h: f64) -> [f64; 3] {
    let k1 = f(s);
    let k2 = f(axpy(s, k1, 0.5 * h));
    let k3 = f(axpy(s, k2, 0.5 * h));
    let k4 = f(axpy(s, k3, h));
    let mut out = s;
    for i in 0..3 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Step-doubling RK4 with Richardson extrapolation: every accepted step has a
/// local error estimate below `tol`.
pub fn reference_solve<F: Fn([f64; 3]) -> [f64; 3]>(
    f: F,
    s0: [f64; 3],
    t_end: f64,
    tol: f64,
) -> [f64; 3] {
    let mut t = 0.0;
    let mut s = s0;
    let mut h = t_end.min(0.01);
    while t < t_end {
        h = h.min(t_end - t);
        let full = rk4(&f, s, h);
        let half = rk4(&f, rk4(&f, s, 0.5 * h), 0.5 * h);
        let err = (0..3).fold(0.0f64, |m, i| m.max((half[i] - full[i]).abs())) / 15.0;
        if err <= tol || h < 1e-12 {
            for i in 0..3 {
                s[i] = half[i] + (half[i] - full[i]) / 15.0;
            }
            t += h;
            if err < tol / 64.0 {
                h *= 2.0;
            }
        } else {
            h *= 0.5;
        }
    }
    s
}

/// Dense `−Δ_h` with reflecting boundaries, assembled from the stencil.
pub fn dense_neg_laplacian(g: &Grid) -> DMatrix<f64> {
    let (nx, ny) = (g.nx, g.ny);
    let cx = 1.0 / (g.hx() * g.hx());
    let cy = 1.0 / (g.hy() * g.hy());
    let n = nx * ny;
    let mut a = DMatrix::zeros(n, n);
    for j in 0..ny {
        for i in 0..nx {
            let k = j * nx + i;
            let mut neighbours = Vec::new();
            if i > 0 {
                neighbours.push((k - 1, cx));
            }
            if i + 1 < nx {
                neighbours.push((k + 1, cx));
            }
            if j > 0 {
                neighbours.push((k - nx, cy));
            }
            if j + 1 < ny {
                neighbours.push((k + nx, cy));
            }
            for (m, c) in neighbours {
                a[(k, k)] += c;
                a[(k, m)] -= c;
            }
        }
    }
    a
}

/// Least-squares slope of `log err` against `log h`.
pub fn observed_order(hs: &[f64], errs: &[f64]) -> f64 {
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
