//! In-loop invariant monitors and post-run checks on recorded series.

use super::report::{final_decade, RunReport, Verdict, Violation};
use crate::error::Result;
use crate::kinetics::Params;
use crate::pde::{GridState, Observer, StepView};

pub const DEFAULT_BOUNDS_TOL: f64 = 1e-8;
pub const DEFAULT_MONOTONE_TOL: f64 = 1e-10;

/// Upper bound on necrosis over `[0, horizon]`:
/// `C = e^{C₂·horizon}·(C₁/C₂ + K)` with `C₁ = αK + δK²`, `C₂ = (β₁+β₂)K`.
/// May be `+∞` for long horizons.
pub fn necrosis_bound(p: &Params, horizon: f64) -> f64 {
    let c1 = p.alpha * p.k + p.delta * p.k * p.k;
    let c2 = (p.beta1 + p.beta2) * p.k;
    (c2 * horizon).exp() * (c1 / c2 + p.k)
}

/// Largest excess of any cell over the box `T, Φ ∈ [0, K]`, `N ∈ [0, n_cap]`.
/// Nonpositive when the state is inside the box.
fn box_excess(v: f64, hi: f64) -> f64 {
    (-v).max(v - hi)
}

/// Cells of `s` outside `T, Φ ∈ [−tol, K+tol]`, `N ∈ [−tol, C(horizon)+tol]`.
pub fn apriori_bounds_monitor(s: &GridState, p: &Params, tol: f64, horizon: f64) -> Vec<Violation> {
    let n_cap = necrosis_bound(p, horizon);
    let mut out = Vec::new();
    for (name, field, hi) in [
        ("bounds_T", &s.tumor, p.k),
        ("bounds_N", &s.necrosis, n_cap),
        ("bounds_Phi", &s.vasc, p.k),
    ] {
        for (k, &v) in field.values().iter().enumerate() {
            let excess = box_excess(v, hi);
            if excess > tol {
                out.push(Violation {
                    t: s.t,
                    monitor: name.into(),
                    magnitude: excess,
                    cell: Some(k),
                });
            }
        }
    }
    out
}

/// Tracks the worst ratio of an in-loop monitor and turns it into a verdict.
#[derive(Debug, Clone)]
struct Worst {
    ratio: f64,
    t: f64,
}

impl Worst {
    fn new() -> Self {
        Worst { ratio: 0.0, t: 0.0 }
    }

    fn update(&mut self, ratio: f64, t: f64) {
        if ratio > self.ratio {
            self.ratio = ratio;
            self.t = t;
        }
    }
}

/// Per-step box check; emits violations and a `bounds` verdict.
#[derive(Debug, Clone)]
pub struct BoundsMonitor {
    tol: f64,
    horizon: f64,
    worst: Worst,
}

impl BoundsMonitor {
    pub fn new(tol: f64, horizon: f64) -> Self {
        BoundsMonitor {
            tol,
            horizon,
            worst: Worst::new(),
        }
    }
}

impl Observer for BoundsMonitor {
    fn observe(&mut self, view: &StepView<'_>, report: &mut RunReport) -> Result<()> {
        let s = view.state;
        let p = view.params;
        let n_cap = necrosis_bound(p, self.horizon);
        let excess = [(&s.tumor, p.k), (&s.necrosis, n_cap), (&s.vasc, p.k)]
            .iter()
            .flat_map(|(f, hi)| f.values().iter().map(move |&v| box_excess(v, *hi)))
            .fold(f64::NEG_INFINITY, f64::max);
        self.worst.update(excess.max(0.0) / self.tol, s.t);
        if excess > self.tol {
            for v in apriori_bounds_monitor(s, p, self.tol, self.horizon) {
                report.push_violation(v);
            }
        }
        Ok(())
    }

    fn finish(&mut self, _state: &GridState, report: &mut RunReport) -> Result<()> {
        let pass = report
            .violations
            .iter()
            .all(|v| !v.monitor.starts_with("bounds_"))
            && self.worst.ratio <= 1.0;
        report
            .verdicts
            .push(Verdict::new("bounds", pass, self.worst.ratio, self.worst.t));
        Ok(())
    }
}

/// Flags any cell whose necrosis drops by more than `tol` in one step.
#[derive(Debug, Clone)]
pub struct NecrosisMonotoneMonitor {
    tol: f64,
    worst: Worst,
    failed: bool,
}

impl NecrosisMonotoneMonitor {
    pub fn new(tol: f64) -> Self {
        NecrosisMonotoneMonitor {
            tol,
            worst: Worst::new(),
            failed: false,
        }
    }
}

impl Observer for NecrosisMonotoneMonitor {
    fn observe(&mut self, view: &StepView<'_>, report: &mut RunReport) -> Result<()> {
        let before = view.prev.necrosis.values();
        let after = view.state.necrosis.values();
        for (k, (a, b)) in before.iter().zip(after).enumerate() {
            let drop = a - b;
            self.worst.update(drop.max(0.0) / self.tol, view.state.t);
            if drop > self.tol {
                self.failed = true;
                report.push_violation(Violation {
                    t: view.state.t,
                    monitor: "necrosis_monotone".into(),
                    magnitude: drop,
                    cell: Some(k),
                });
            }
        }
        Ok(())
    }

    fn finish(&mut self, _state: &GridState, report: &mut RunReport) -> Result<()> {
        report.verdicts.push(Verdict::new(
            "necrosis_monotone",
            !self.failed,
            self.worst.ratio,
            self.worst.t,
        ));
        Ok(())
    }
}

/// Checks that necrosis stays below the level used to size the time step.
#[derive(Debug, Clone)]
pub struct NecrosisScaleMonitor {
    scale: f64,
    worst: Worst,
}

impl NecrosisScaleMonitor {
    pub fn new(scale: f64) -> Self {
        NecrosisScaleMonitor {
            scale,
            worst: Worst::new(),
        }
    }
}

impl Observer for NecrosisScaleMonitor {
    fn observe(&mut self, view: &StepView<'_>, report: &mut RunReport) -> Result<()> {
        let ratio = view.state.necrosis.max() / self.scale;
        self.worst.update(ratio, view.state.t);
        if ratio > 1.0 {
            report.push_violation(Violation {
                t: view.state.t,
                monitor: "dt_cap".into(),
                magnitude: ratio,
                cell: None,
            });
        }
        Ok(())
    }

    fn finish(&mut self, _state: &GridState, report: &mut RunReport) -> Result<()> {
        report.verdicts.push(Verdict::new(
            "dt_cap",
            self.worst.ratio <= 1.0,
            self.worst.ratio,
            self.worst.t,
        ));
        Ok(())
    }
}

fn non_increasing(samples: &[(f64, f64)], tol: f64) -> bool {
    samples.windows(2).all(|w| w[1].1 <= w[0].1 + tol)
}

/// Each monitored cell's `Φ` must be below `threshold` at the last sample at or
/// before `horizon` and non-increasing over the final decade.
pub fn phi_vanishing_check(cells: &[Vec<(f64, f64)>], threshold: f64, horizon: f64) -> Verdict {
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut t_worst = 0.0;
    for series in cells {
        let upto = series.partition_point(|(t, _)| *t <= horizon * (1.0 + 1e-12));
        let window = &series[..upto];
        let Some(&(t_last, last)) = window.last() else {
            pass = false;
            continue;
        };
        let ratio = last / threshold;
        if ratio > worst {
            worst = ratio;
            t_worst = t_last;
        }
        let scale = window.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        if last >= threshold || !non_increasing(final_decade(window), 1e-12 * scale) {
            pass = false;
        }
    }
    Verdict::new("phi_vanishing", pass, worst, t_worst)
}

/// `‖N‖∞` finite over the run with final-decade increase at most `tol`.
pub fn necrosis_saturation_check(necrosis_max: &[(f64, f64)], tol: f64) -> Verdict {
    let finite = necrosis_max.iter().all(|(_, v)| v.is_finite());
    let decade = final_decade(necrosis_max);
    let increase = match (decade.first(), decade.last()) {
        (Some(a), Some(b)) => b.1 - a.1,
        _ => 0.0,
    };
    let t_last = necrosis_max.last().map_or(0.0, |s| s.0);
    Verdict::new(
        "necrosis_saturation",
        finite && !necrosis_max.is_empty() && increase <= tol,
        increase.max(0.0) / tol,
        t_last,
    )
}

/// Final value at most `fraction` of the first, and non-increasing over the final decade.
pub fn final_decay_check(name: &str, series: &[(f64, f64)], fraction: f64) -> Verdict {
    let (Some(&(_, first)), Some(&(t_last, last))) = (series.first(), series.last()) else {
        return Verdict::new(name, false, f64::INFINITY, 0.0).with_note("empty series");
    };
    let bound = fraction * first;
    let ratio = if last <= 0.0 { 0.0 } else { last / bound };
    let monotone = non_increasing(final_decade(series), 1e-12 * first.abs());
    let mut v = Verdict::new(name, ratio <= 1.0 && monotone, ratio, t_last);
    if !monotone {
        v = v.with_note("not non-increasing over the final decade");
    }
    v
}

/// Relative spread `(max − min)/max` of `values` at most `rel`.
pub fn agreement_check(name: &str, values: &[f64], rel: f64) -> Verdict {
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = if hi > 0.0 { (hi - lo) / hi } else { 0.0 };
    Verdict::new(name, !values.is_empty() && spread <= rel, spread / rel, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::StateTriple;
    use crate::pde::{Grid, ScalarField};

    #[test]
    fn necrosis_bound_values() {
        let p = Params::destruction_dominant();
        let c0 = necrosis_bound(&p, 0.0);
        assert!((c0 - ((0.03 + 0.3) / 0.06 + 1.0)).abs() < 1e-12);
        assert!(necrosis_bound(&p, 1e5).is_infinite());
    }

    #[test]
    fn bounds_monitor_cases() {
        let p = Params::destruction_dominant();
        let g = Grid::square(4).unwrap();
        let inside = GridState::uniform(g, StateTriple::new(0.5, 0.2, 0.5));
        assert!(apriori_bounds_monitor(&inside, &p, 1e-8, 200.0).is_empty());
        let mut t = ScalarField::constant(g, 0.5);
        t.values_mut()[5] = p.k + 1e-3;
        let breach = GridState::new(0.0, t, ScalarField::zeros(g), ScalarField::zeros(g)).unwrap();
        let v = apriori_bounds_monitor(&breach, &p, 1e-8, 200.0);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].cell, Some(5));
        assert!((v[0].magnitude - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn phi_vanishing_cases() {
        let zero = vec![(0.0, 0.0), (10.0, 0.0)];
        assert!(phi_vanishing_check(&[zero], 1e-2, 10.0).pass);
        let decaying: Vec<(f64, f64)> = (0..=100)
            .map(|k| (k as f64, 0.5 * (-0.1 * k as f64).exp()))
            .collect();
        assert!(phi_vanishing_check(std::slice::from_ref(&decaying), 1e-2, 100.0).pass);
        assert!(!phi_vanishing_check(&[decaying], 1e-2, 20.0).pass);
        let bumpy = vec![(0.0, 0.5), (9.0, 0.001), (9.5, 0.002), (10.0, 0.001)];
        assert!(!phi_vanishing_check(&[bumpy], 1e-2, 10.0).pass);
    }

    #[test]
    fn decay_and_agreement() {
        let s: Vec<(f64, f64)> = (0..=10)
            .map(|k| (k as f64, 1.0 / (1.0 + k as f64)))
            .collect();
        assert!(final_decay_check("T", &s, 0.1).pass);
        assert!(!final_decay_check("T", &s, 0.05).pass);
        assert!(agreement_check("n", &[1.0, 0.97, 0.99], 0.05).pass);
        assert!(!agreement_check("n", &[1.0, 0.9], 0.05).pass);
        let sat = [(0.0, 0.0), (90.0, 1.0), (100.0, 1.00001)];
        assert!(necrosis_saturation_check(&sat, 1e-4).pass);
    }
}
