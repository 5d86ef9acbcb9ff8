//! Runs a scenario with its monitors and evaluates the post-run checks.

use std::fmt::Write as _;
use std::path::Path;

use super::config::{Check, ScenarioConfig};
use crate::analysis::{
    check_envelope, destruction_dominated_envelopes, eigen_t_star, eigenvalue_gated_envelopes,
    final_decay_check, near_capacity_envelopes, necrosis_saturation_check, phi_vanishing_check,
    BoundsMonitor, DecayEnvelope, EnvelopePair, Gate, NecrosisMonotoneMonitor,
    NecrosisScaleMonitor, NormSample, RunReport, Verdict,
};
use crate::error::Result;
use crate::pde::imex::working_necrosis_scale;
use crate::pde::io::write_atomic;
use crate::pde::{
    run_simulation, Cadence, GridState, NormRecorder, Observer, ProbeRecorder, SnapshotWriter,
    StateCapture,
};

/// A finished run together with the states the checks need.
#[derive(Debug, Clone)]
pub struct Execution {
    pub initial: GridState,
    /// State at the configured warm-up time (the initial state when it is 0).
    pub warm: GridState,
    pub state: GridState,
    pub report: RunReport,
}

/// Runs `cfg`, evaluating the in-loop monitors listed in `checks`.
/// Snapshots go to `snapshot_dir` when it is given and the cadence is positive.
pub fn execute(
    cfg: &ScenarioConfig,
    checks: &[Check],
    snapshot_dir: Option<&Path>,
) -> Result<Execution> {
    let initial = cfg.initial_state()?;
    let series_cadence = if cfg.output.series_every > 0.0 {
        Cadence::every(cfg.output.series_every)
    } else {
        Cadence::every_step()
    };
    let mut norms = NormRecorder::new(series_cadence);
    let mut cells = cfg.probe_cells();
    if cells.is_empty() {
        cells.push((cfg.grid.nx / 2, cfg.grid.ny / 2));
    }
    let mut probes = ProbeRecorder::new(cells, series_cadence);
    let mut capture = StateCapture::new(cfg.warmup);
    let mut bounds = BoundsMonitor::new(cfg.checks.bounds_tol, cfg.t_end);
    let mut monotone = NecrosisMonotoneMonitor::new(cfg.checks.monotone_tol);
    let mut scale =
        NecrosisScaleMonitor::new(working_necrosis_scale(&cfg.params, initial.necrosis.max()));
    let mut snapshots = snapshot_dir
        .filter(|_| cfg.output.snapshot_every > 0.0)
        .map(|d| {
            SnapshotWriter::new(
                d.join("snapshots"),
                Cadence::every(cfg.output.snapshot_every),
            )
        });

    let mut observers: Vec<&mut dyn Observer> = vec![&mut norms, &mut probes, &mut capture];
    if checks.contains(&Check::Bounds) {
        observers.push(&mut bounds);
    }
    if checks.contains(&Check::NecrosisMonotone) {
        observers.push(&mut monotone);
    }
    if checks.contains(&Check::DtCap) {
        observers.push(&mut scale);
    }
    if let Some(s) = snapshots.as_mut() {
        observers.push(s);
    }
    let outcome = run_simulation(
        initial.clone(),
        cfg.t_end,
        cfg.dt,
        &cfg.params,
        &mut observers,
    )?;
    let warm = capture.captured.unwrap_or_else(|| outcome.state.clone());
    Ok(Execution {
        initial,
        warm,
        state: outcome.state,
        report: outcome.report,
    })
}

fn shifted(env: DecayEnvelope, t0: f64) -> DecayEnvelope {
    DecayEnvelope {
        t_start: env.t_start + t0,
        ..env
    }
}

type Column = fn(&NormSample) -> f64;

fn envelope_verdicts(
    name: &str,
    pair: EnvelopePair,
    series: &[NormSample],
    slack: f64,
) -> Vec<Verdict> {
    let columns: [(&str, DecayEnvelope, Column); 2] = [
        ("T", pair.tumor, |s| s.tumor_max),
        ("Phi", pair.vasc, |s| s.vasc_max),
    ];
    columns
        .into_iter()
        .map(|(label, env, col)| {
            let data: Vec<(f64, f64)> = series.iter().map(|s| (s.t, col(s))).collect();
            let c = check_envelope(&data, &env, slack);
            let mut v = Verdict::new(
                format!("{name}_{label}"),
                c.pass && c.samples > 0,
                c.worst_ratio,
                c.t_worst,
            )
            .with_note(format!(
                "amplitude {:.6e}, rate {:.6e}, from t = {}",
                env.amplitude, env.rate, env.t_start
            ));
            if c.samples == 0 {
                v = v.with_note("no samples after the envelope start");
            }
            v
        })
        .collect()
}

/// Verdicts for a gated envelope pair built from the state at `warmup`.
/// Envelopes constructed relative to `t = 0` are moved to start at `warmup`;
/// the eigenvalue-gated vasculature envelope already carries an absolute start.
fn gated(
    name: &str,
    gate: Result<Gate<EnvelopePair>>,
    warmup: f64,
    shift_vasc: bool,
    series: &[NormSample],
    slack: f64,
) -> Vec<Verdict> {
    match gate {
        Ok(Gate::Applicable(pair)) => {
            let pair = EnvelopePair {
                tumor: shifted(pair.tumor, warmup),
                vasc: if shift_vasc {
                    shifted(pair.vasc, warmup)
                } else {
                    pair.vasc
                },
            };
            envelope_verdicts(name, pair, series, slack)
        }
        Ok(Gate::Inapplicable(why)) => {
            vec![Verdict::new(name, false, f64::NAN, warmup)
                .with_note(format!("inapplicable: {why}"))]
        }
        Err(e) => vec![Verdict::new(name, false, f64::NAN, warmup).with_note(e.to_string())],
    }
}

/// Post-run checks of `cfg.checks.monitors` on a finished execution.
pub fn evaluate(cfg: &ScenarioConfig, exec: &Execution) -> Vec<Verdict> {
    let c = &cfg.checks;
    let p = &cfg.params;
    let series = &exec.report.series;
    let warm = &exec.warm;
    let tw = warm.t;
    let mut out = Vec::new();
    for check in &c.monitors {
        match check {
            Check::Bounds | Check::NecrosisMonotone | Check::DtCap => {}
            Check::PhiVanishing => {
                let cells: Vec<Vec<(f64, f64)>> =
                    exec.report.probes.iter().map(|pr| pr.vasc()).collect();
                out.push(phi_vanishing_check(&cells, c.phi_threshold, cfg.t_end));
            }
            Check::NecrosisSaturation => {
                out.push(necrosis_saturation_check(
                    &exec.report.column(|s| s.necrosis_max),
                    c.saturation_tol,
                ));
            }
            Check::Decay => {
                out.push(final_decay_check(
                    "decay_T",
                    &exec.report.column(|s| s.tumor_max),
                    c.decay_fraction,
                ));
                out.push(final_decay_check(
                    "decay_Phi",
                    &exec.report.column(|s| s.vasc_max),
                    c.decay_fraction,
                ));
            }
            Check::EnvelopeDestruction => {
                let n0min = warm.necrosis.min();
                let gate =
                    destruction_dominated_envelopes(p, n0min, warm.vasc.max(), warm.tumor.max());
                out.extend(gated(
                    "envelope_destruction",
                    gate,
                    tw,
                    true,
                    series,
                    c.slack,
                ));
            }
            Check::EnvelopeEigen => {
                let n0min = warm.necrosis.min();
                let after: Vec<(f64, f64)> = series
                    .iter()
                    .filter(|s| s.t >= tw)
                    .map(|s| (s.t, s.tumor_max))
                    .collect();
                match eigen_t_star(p, n0min, &after) {
                    Some(t_star) => {
                        let phi = series
                            .iter()
                            .find(|s| s.t == t_star)
                            .map_or(0.0, |s| s.vasc_max);
                        let gate = eigenvalue_gated_envelopes(
                            p,
                            &warm.necrosis,
                            warm.tumor.max(),
                            phi,
                            t_star,
                        );
                        out.extend(gated("envelope_eigen", gate, tw, false, series, c.slack));
                    }
                    None => out.push(
                        Verdict::new("envelope_eigen", false, f64::NAN, tw)
                            .with_note("vasculature decay threshold never reached"),
                    ),
                }
            }
            Check::EnvelopeCapacity => {
                let n0min = warm.necrosis.min();
                let eps = c.capacity_eps.unwrap_or(p.k - n0min);
                if n0min < p.k - eps {
                    out.push(
                        Verdict::new("envelope_capacity", false, f64::NAN, tw)
                            .with_note(format!("min N0 = {n0min} below K - eps = {}", p.k - eps)),
                    );
                    continue;
                }
                let gate = near_capacity_envelopes(p, eps, warm.tumor.max(), warm.vasc.max());
                out.extend(gated("envelope_capacity", gate, tw, true, series, c.slack));
            }
        }
    }
    out
}

/// Runs every configured check; the verdicts end up in the returned report.
pub fn verify(cfg: &ScenarioConfig, snapshot_dir: Option<&Path>) -> Result<Execution> {
    let mut exec = execute(cfg, &cfg.checks.monitors, snapshot_dir)?;
    let post = evaluate(cfg, &exec);
    exec.report.verdicts.extend(post);
    Ok(exec)
}

/// Gnuplot commands plotting the norm series on a log scale.
pub fn gnuplot_script(name: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# gnuplot -p plot.gp");
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set title '{name}'");
    let _ = writeln!(s, "set xlabel 't (day)'");
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(s, "set key outside");
    let _ = writeln!(
        s,
        "plot 'series.csv' using 1:2 with lines title 'max T', \\\n     '' using 1:4 with lines title 'max N', \\\n     '' using 1:5 with lines title 'max Phi'"
    );
    s
}

pub fn probes_csv(report: &RunReport) -> String {
    let mut s = String::from("t,i,j,T,N,Phi\n");
    for probe in &report.probes {
        for (t, st) in &probe.samples {
            let _ = writeln!(
                s,
                "{t},{},{},{},{},{}",
                probe.cell.0, probe.cell.1, st.tumor, st.necrosis, st.vasc
            );
        }
    }
    s
}

/// Writes series, probes, verdicts, summary and optionally a plot script to `dir`.
pub fn write_outputs(cfg: &ScenarioConfig, exec: &Execution, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_atomic(&dir.join("series.csv"), &exec.report.series_csv())?;
    write_atomic(&dir.join("probes.csv"), &probes_csv(&exec.report))?;
    write_atomic(&dir.join("verdicts.csv"), &exec.report.verdicts_csv())?;
    write_atomic(&dir.join("summary.txt"), &exec.report.summary_text())?;
    if cfg.output.plot {
        write_atomic(&dir.join("plot.gp"), &gnuplot_script(&cfg.name))?;
    }
    Ok(())
}
