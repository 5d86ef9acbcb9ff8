//! Time loop with pluggable observers.

use std::path::PathBuf;

use super::grid::GridState;
use super::imex::ImexStepper;
use super::io::write_snapshot;
use crate::analysis::{NormSample, ProbeSeries, RunReport};
use crate::error::{Error, Result};
use crate::kinetics::Params;

/// What an observer sees after each step (and once for the initial state).
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    /// 0 for the initial state.
    pub step: usize,
    pub prev: &'a GridState,
    pub state: &'a GridState,
    pub params: &'a Params,
    pub dt: f64,
}

pub trait Observer {
    fn observe(&mut self, view: &StepView<'_>, report: &mut RunReport) -> Result<()>;

    /// Called once with the final state.
    fn finish(&mut self, _state: &GridState, _report: &mut RunReport) -> Result<()> {
        Ok(())
    }
}

/// Fires at `t = 0, interval, 2·interval, ...`; an interval of 0 fires every step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cadence {
    interval: f64,
    next: f64,
}

impl Cadence {
    pub fn every(interval: f64) -> Self {
        Cadence {
            interval: interval.max(0.0),
            next: f64::NEG_INFINITY,
        }
    }

    pub fn every_step() -> Self {
        Cadence::every(0.0)
    }

    pub fn due(&mut self, t: f64) -> bool {
        if self.interval == 0.0 {
            return true;
        }
        // Tolerate round-off in t = n·dt.
        let slack = 1e-9 * self.interval;
        if self.next == f64::NEG_INFINITY || t + slack >= self.next {
            let k = ((t + slack) / self.interval).floor() + 1.0;
            self.next = k * self.interval;
            true
        } else {
            false
        }
    }
}

/// Appends a [`NormSample`] to the report at each cadence tick and at the end.
#[derive(Debug, Clone)]
pub struct NormRecorder {
    cadence: Cadence,
}

impl NormRecorder {
    pub fn new(cadence: Cadence) -> Self {
        NormRecorder { cadence }
    }
}

impl Observer for NormRecorder {
    fn observe(&mut self, view: &StepView<'_>, report: &mut RunReport) -> Result<()> {
        if self.cadence.due(view.state.t) {
            report.series.push(NormSample::of(view.state));
        }
        Ok(())
    }

    fn finish(&mut self, state: &GridState, report: &mut RunReport) -> Result<()> {
        if report.series.last().is_none_or(|s| s.t < state.t) {
            report.series.push(NormSample::of(state));
        }
        Ok(())
    }
}

/// Records `(T, N, Φ)` at a fixed set of cells.
#[derive(Debug, Clone)]
pub struct ProbeRecorder {
    cells: Vec<(usize, usize)>,
    cadence: Cadence,
    first: usize,
    last_t: f64,
}

impl ProbeRecorder {
    pub fn new(cells: Vec<(usize, usize)>, cadence: Cadence) -> Self {
        ProbeRecorder {
            cells,
            cadence,
            first: usize::MAX,
            last_t: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, state: &GridState, report: &mut RunReport) -> Result<()> {
        let grid = *state.grid();
        if self.first == usize::MAX {
            for &(i, j) in &self.cells {
                if i >= grid.nx || j >= grid.ny {
                    return Err(Error::InvalidArgument(format!(
                        "probe cell ({i}, {j}) outside {}x{} grid",
                        grid.nx, grid.ny
                    )));
                }
            }
            self.first = report.probes.len();
            report
                .probes
                .extend(self.cells.iter().map(|&cell| ProbeSeries {
                    cell,
                    samples: Vec::new(),
                }));
        }
        for (offset, &(i, j)) in self.cells.iter().enumerate() {
            let s = state.cell(grid.index(i, j));
            report.probes[self.first + offset]
                .samples
                .push((state.t, s));
        }
        self.last_t = state.t;
        Ok(())
    }
}

impl Observer for ProbeRecorder {
    fn observe(&mut self, view: &StepView<'_>, report: &mut RunReport) -> Result<()> {
        if self.cadence.due(view.state.t) {
            self.record(view.state, report)?;
        }
        Ok(())
    }

    fn finish(&mut self, state: &GridState, report: &mut RunReport) -> Result<()> {
        if self.last_t < state.t {
            self.record(state, report)?;
        }
        Ok(())
    }
}

/// Writes `T_<t>.txt`, `N_<t>.txt` and `Phi_<t>.txt` snapshots into a directory.
#[derive(Debug, Clone)]
pub struct SnapshotWriter {
    dir: PathBuf,
    cadence: Cadence,
    written: Vec<PathBuf>,
}

impl SnapshotWriter {
    pub fn new(dir: impl Into<PathBuf>, cadence: Cadence) -> Self {
        SnapshotWriter {
            dir: dir.into(),
            cadence,
            written: Vec::new(),
        }
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn write(&mut self, state: &GridState) -> Result<()> {
        std::fs::create_dir_all(&self.dir)?;
        let stamp = format!("{:010.3}", state.t);
        for (name, field) in [
            ("T", &state.tumor),
            ("N", &state.necrosis),
            ("Phi", &state.vasc),
        ] {
            let path = self.dir.join(format!("{name}_{stamp}.txt"));
            write_snapshot(&path, field, state.t)?;
            self.written.push(path);
        }
        Ok(())
    }
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, view: &StepView<'_>, _report: &mut RunReport) -> Result<()> {
        if self.cadence.due(view.state.t) {
            self.write(view.state)?;
        }
        Ok(())
    }
}

/// Keeps a copy of the first state at or after `at`.
#[derive(Debug, Clone)]
pub struct StateCapture {
    pub at: f64,
    pub captured: Option<GridState>,
}

impl StateCapture {
    pub fn new(at: f64) -> Self {
        StateCapture { at, captured: None }
    }
}

impl Observer for StateCapture {
    fn observe(&mut self, view: &StepView<'_>, _report: &mut RunReport) -> Result<()> {
        if self.captured.is_none() && view.state.t + 1e-9 * view.dt >= self.at {
            self.captured = Some(view.state.clone());
        }
        Ok(())
    }
}

/// Final state plus everything recorded along the way.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: GridState,
    pub report: RunReport,
}

/// Checks the initial box `0 ≤ T₀, N₀, Φ₀ ≤ K`.
pub fn validate_initial_state(s: &GridState, p: &Params) -> Result<()> {
    let mut issues = Vec::new();
    for (name, field) in [("T0", &s.tumor), ("N0", &s.necrosis), ("Phi0", &s.vasc)] {
        let (lo, hi) = (field.min(), field.max());
        if lo < 0.0 || hi > p.k {
            issues.push(format!("{name} range [{lo}, {hi}] leaves [0, {}]", p.k));
        }
    }
    if issues.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInitialData(issues.join("; ")))
    }
}

/// Number of `dt` steps needed to reach `t_end` from `t0`.
pub fn step_count(t0: f64, t_end: f64, dt: f64) -> usize {
    let n = (t_end - t0) / dt;
    (n - 1e-9 * n.abs().max(1.0)).ceil().max(0.0) as usize
}

/// Advances `initial` to `t_end` with the IMEX scheme, calling every observer on
/// the initial state and after each step.
pub fn run_simulation(
    initial: GridState,
    t_end: f64,
    dt: f64,
    p: &Params,
    observers: &mut [&mut dyn Observer],
) -> Result<RunOutcome> {
    validate_initial_state(&initial, p)?;
    if !(t_end.is_finite() && t_end >= initial.t) {
        return Err(Error::InvalidArgument(format!(
            "t_end {t_end} precedes the initial time {}",
            initial.t
        )));
    }
    let mut stepper = ImexStepper::new(*initial.grid(), *p, dt)?;
    let t0 = initial.t;
    let steps = step_count(t0, t_end, dt);
    let mut report = RunReport::default();
    let mut prev = initial.clone();
    let mut state = initial;

    let view = StepView {
        step: 0,
        prev: &prev,
        state: &state,
        params: p,
        dt,
    };
    for obs in observers.iter_mut() {
        obs.observe(&view, &mut report)?;
    }

    for step in 1..=steps {
        prev.clone_from(&state);
        let stats = stepper.step(&mut state).map_err(|e| Error::Step {
            t: prev.t,
            source: Box::new(e),
        })?;
        state.t = t0 + step as f64 * dt;
        report.steps = step;
        report.cg_iterations += stats.iterations;
        let view = StepView {
            step,
            prev: &prev,
            state: &state,
            params: p,
            dt,
        };
        for obs in observers.iter_mut() {
            obs.observe(&view, &mut report).map_err(|e| Error::Step {
                t: state.t,
                source: Box::new(e),
            })?;
        }
    }
    for obs in observers.iter_mut() {
        obs.finish(&state, &mut report)?;
    }
    report.violations.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(RunOutcome { state, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::StateTriple;
    use crate::pde::grid::{Grid, ScalarField};

    #[test]
    fn cadence_ticks() {
        let mut c = Cadence::every(1.0);
        let ticks: Vec<f64> = (0..=300)
            .map(|k| k as f64 * 0.01)
            .filter(|&t| c.due(t))
            .collect();
        assert_eq!(ticks.len(), 4);
        assert!((ticks[1] - 1.0).abs() < 1e-12);
        assert!((ticks[3] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn step_counting() {
        assert_eq!(step_count(0.0, 1.0, 0.1), 10);
        assert_eq!(step_count(0.0, 1.05, 0.1), 11);
        assert_eq!(step_count(0.0, 200.0, 0.01), 20_000);
        assert_eq!(step_count(5.0, 5.0, 0.1), 0);
    }

    #[test]
    fn rejects_out_of_box_start() {
        let g = Grid::square(4).unwrap();
        let s = GridState::uniform(g, StateTriple::new(1.5, 0.0, 0.5));
        let err =
            run_simulation(s, 1.0, 0.1, &Params::destruction_dominant(), &mut []).unwrap_err();
        assert!(matches!(err, Error::InvalidInitialData(_)));
    }

    #[test]
    fn records_series_and_probes() {
        let g = Grid::square(8).unwrap();
        let p = Params::destruction_dominant();
        let s = GridState::new(
            0.0,
            ScalarField::from_fn(g, |x, y| 0.5 * (-(x * x + y * y)).exp()),
            ScalarField::zeros(g),
            ScalarField::constant(g, 0.5),
        )
        .unwrap();
        let mut norms = NormRecorder::new(Cadence::every(0.5));
        let mut probes = ProbeRecorder::new(vec![(4, 4)], Cadence::every(0.5));
        let mut capture = StateCapture::new(1.0);
        let out = run_simulation(
            s,
            2.0,
            0.1,
            &p,
            &mut [&mut norms, &mut probes, &mut capture],
        )
        .unwrap();
        assert_eq!(out.report.steps, 20);
        assert_eq!(out.report.series.len(), 5);
        assert_eq!(out.report.probes[0].samples.len(), 5);
        assert!((out.state.t - 2.0).abs() < 1e-12);
        let c = capture.captured.unwrap();
        assert!((c.t - 1.0).abs() < 1e-9);
    }
}
