use std::fmt::Write as _;

use crate::kinetics::StateTriple;
use crate::pde::GridState;

/// Norms and masses of one sampled state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub t: f64,
    pub tumor_max: f64,
    pub tumor_min: f64,
    pub necrosis_max: f64,
    pub vasc_max: f64,
    pub mass_tumor: f64,
    pub mass_necrosis: f64,
    pub mass_vasc: f64,
}

impl NormSample {
    pub fn of(state: &GridState) -> Self {
        NormSample {
            t: state.t,
            tumor_max: state.tumor.max(),
            tumor_min: state.tumor.min(),
            necrosis_max: state.necrosis.max(),
            vasc_max: state.vasc.max(),
            mass_tumor: state.tumor.integral(),
            mass_necrosis: state.necrosis.integral(),
            mass_vasc: state.vasc.integral(),
        }
    }
}

pub const SERIES_HEADER: &str = "t,Tmax,Tmin,Nmax,Phimax,massT,massN,massPhi";
pub const VERDICT_HEADER: &str = "monitor,verdict,worst_ratio,t_worst";

/// One breach recorded by an in-loop monitor.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub t: f64,
    pub monitor: String,
    pub magnitude: f64,
    /// Row-major cell index, when the breach is tied to a cell.
    pub cell: Option<usize>,
}

/// Outcome of one monitor or envelope check.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub monitor: String,
    pub pass: bool,
    /// Largest observed value/bound ratio (1 is the boundary).
    pub worst_ratio: f64,
    pub t_worst: f64,
    /// Free-form note, e.g. why a check was not applicable.
    pub note: String,
}

impl Verdict {
    pub fn new(monitor: impl Into<String>, pass: bool, worst_ratio: f64, t_worst: f64) -> Self {
        Verdict {
            monitor: monitor.into(),
            pass,
            worst_ratio,
            t_worst,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

/// Samples of one cell over time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeSeries {
    pub cell: (usize, usize),
    pub samples: Vec<(f64, StateTriple)>,
}

impl ProbeSeries {
    pub fn vasc(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|(t, s)| (*t, s.vasc)).collect()
    }
}

/// Everything a simulation run produced apart from its final state.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub series: Vec<NormSample>,
    pub probes: Vec<ProbeSeries>,
    /// Sorted by time.
    pub violations: Vec<Violation>,
    /// Total number of violations, including those dropped past the storage cap.
    pub violation_count: usize,
    pub verdicts: Vec<Verdict>,
    pub steps: usize,
    pub cg_iterations: usize,
}

impl RunReport {
    pub const MAX_STORED_VIOLATIONS: usize = 10_000;

    pub fn push_violation(&mut self, v: Violation) {
        self.violation_count += 1;
        if self.violations.len() < Self::MAX_STORED_VIOLATIONS {
            debug_assert!(self.violations.last().is_none_or(|last| last.t <= v.t));
            self.violations.push(v);
        }
    }

    pub fn violations_of<'a>(
        &'a self,
        monitor: &'a str,
    ) -> impl Iterator<Item = &'a Violation> + 'a {
        self.violations.iter().filter(move |v| v.monitor == monitor)
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    /// `(t, value)` pairs of one series column.
    pub fn column(&self, f: impl Fn(&NormSample) -> f64) -> Vec<(f64, f64)> {
        self.series.iter().map(|s| (s.t, f(s))).collect()
    }

    pub fn series_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.series.len() + 1));
        out.push_str(SERIES_HEADER);
        out.push('\n');
        for s in &self.series {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                s.t,
                s.tumor_max,
                s.tumor_min,
                s.necrosis_max,
                s.vasc_max,
                s.mass_tumor,
                s.mass_necrosis,
                s.mass_vasc
            );
        }
        out
    }

    pub fn verdicts_csv(&self) -> String {
        let mut out = String::from(VERDICT_HEADER);
        out.push('\n');
        for v in &self.verdicts {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                v.monitor,
                if v.pass { "pass" } else { "fail" },
                v.worst_ratio,
                v.t_worst
            );
        }
        out
    }

    pub fn summary_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "steps: {}  cg iterations: {}  violations: {}",
            self.steps, self.cg_iterations, self.violation_count
        );
        for v in &self.verdicts {
            let _ = write!(
                out,
                "[{}] {:<24} worst ratio {:.6e} at t = {}",
                if v.pass { "PASS" } else { "FAIL" },
                v.monitor,
                v.worst_ratio,
                v.t_worst
            );
            if !v.note.is_empty() {
                let _ = write!(out, "  ({})", v.note);
            }
            out.push('\n');
        }
        out
    }
}

/// Samples in the last tenth of the covered time span.
pub fn final_decade<T: Copy>(samples: &[(f64, T)]) -> &[(f64, T)] {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return samples;
    };
    let cutoff = last.0 - 0.1 * (last.0 - first.0);
    let start = samples.partition_point(|(t, _)| *t < cutoff);
    &samples[start..]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let mut r = RunReport::default();
        r.verdicts.push(Verdict::new("bounds", true, 0.5, 2.0));
        r.verdicts.push(Verdict::new("envelope", false, 1.5, 3.0));
        assert_eq!(
            r.verdicts_csv(),
            "monitor,verdict,worst_ratio,t_worst\nbounds,pass,0.5,2\nenvelope,fail,1.5,3\n"
        );
        assert!(!r.all_pass());
        assert!(r.series_csv().starts_with(SERIES_HEADER));
    }

    #[test]
    fn decade_window() {
        let s: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64, 0.0)).collect();
        let d = final_decade(&s);
        assert_eq!(d.first().unwrap().0, 90.0);
        assert_eq!(d.len(), 11);
        assert!(final_decade::<f64>(&[]).is_empty());
    }

    #[test]
    fn violation_cap() {
        let mut r = RunReport::default();
        for i in 0..(RunReport::MAX_STORED_VIOLATIONS + 5) {
            r.push_violation(Violation {
                t: i as f64,
                monitor: "m".into(),
                magnitude: 1.0,
                cell: None,
            });
        }
        assert_eq!(r.violations.len(), RunReport::MAX_STORED_VIOLATIONS);
        assert_eq!(r.violation_count, RunReport::MAX_STORED_VIOLATIONS + 5);
    }
}
