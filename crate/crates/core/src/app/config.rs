//! Scenario configuration: flat `key = value` lines grouped under `[section]`
//! headers. `#` starts a comment.
//!
//! ```text
//! name = destructive_one_tumor
//!
//! [params]
//! preset = destruction_dominant   # or angiogenic; explicit keys override
//! rho = 1
//!
//! [grid]
//! nx = 128
//! ny = 128
//! x0 = -2                         # x0, x1, y0, y1 default to (-2, 2)²
//!
//! [initial]
//! bump = 0 0 0.8 0.3              # x y [amplitude [sigma]], repeatable
//!                                 # or T0 = constant | file:path
//! N0 = 0                          # constant, or file:path to a snapshot
//! Phi0 = 0.5
//!
//! [time]
//! t_end = 2000
//! dt = 0.05
//! warmup = 0
//!
//! [output]
//! dir = out/destructive_one_tumor
//! series_every = 1
//! snapshot_every = 100            # 0 disables snapshots
//! probe = 0 0                     # x y, repeatable
//! plot = true
//!
//! [checks]
//! monitors = bounds, necrosis_monotone, dt_cap, phi_vanishing
//! slack = 1e-3
//! ```
//!
//! Required: the seven reaction parameters (or a preset), `grid.nx`, `grid.ny`,
//! `time.dt`, a tumor datum (`bump` or `T0`), `initial.N0` and `initial.Phi0`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{ConfigIssue, Error, Result};
use crate::kinetics::Params;
use crate::pde::imex::{bump_field, dt_max, working_necrosis_scale, Bump};
use crate::pde::io::read_snapshot;
use crate::pde::{Grid, GridState, ScalarField};

pub const DEFAULT_T_END: f64 = 2000.0;
pub const DEFAULT_PHI_THRESHOLD: f64 = 1e-2;
pub const DEFAULT_DECAY_FRACTION: f64 = 0.1;
pub const DEFAULT_SATURATION_TOL: f64 = 1e-4;

/// A named check that `verify` can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Check {
    Bounds,
    NecrosisMonotone,
    DtCap,
    PhiVanishing,
    NecrosisSaturation,
    Decay,
    EnvelopeDestruction,
    EnvelopeEigen,
    EnvelopeCapacity,
}

impl Check {
    pub const ALL: [Check; 9] = [
        Check::Bounds,
        Check::NecrosisMonotone,
        Check::DtCap,
        Check::PhiVanishing,
        Check::NecrosisSaturation,
        Check::Decay,
        Check::EnvelopeDestruction,
        Check::EnvelopeEigen,
        Check::EnvelopeCapacity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Bounds => "bounds",
            Check::NecrosisMonotone => "necrosis_monotone",
            Check::DtCap => "dt_cap",
            Check::PhiVanishing => "phi_vanishing",
            Check::NecrosisSaturation => "necrosis_saturation",
            Check::Decay => "decay",
            Check::EnvelopeDestruction => "envelope_destruction",
            Check::EnvelopeEigen => "envelope_eigen",
            Check::EnvelopeCapacity => "envelope_capacity",
        }
    }

    /// Checks evaluated inside the time loop.
    pub fn in_loop(self) -> bool {
        matches!(self, Check::Bounds | Check::NecrosisMonotone | Check::DtCap)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown check '{s}'"))
    }
}

/// Initial necrosis or vasculature.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldSpec {
    Constant(f64),
    Field(ScalarField),
}

impl FieldSpec {
    fn to_field(&self, grid: Grid, name: &str) -> Result<ScalarField> {
        match self {
            FieldSpec::Constant(c) => Ok(ScalarField::constant(grid, *c)),
            FieldSpec::Field(f) if *f.grid() == grid => Ok(f.clone()),
            FieldSpec::Field(_) => Err(Error::InvalidInitialData(format!(
                "{name} file grid differs from the run grid"
            ))),
        }
    }

    fn max(&self) -> f64 {
        match self {
            FieldSpec::Constant(c) => *c,
            FieldSpec::Field(f) => f.max(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TumorSpec {
    Bumps(Vec<Bump>),
    Constant(f64),
    Field(ScalarField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub tumor: TumorSpec,
    pub necrosis: FieldSpec,
    pub vasc: FieldSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub series_every: f64,
    pub snapshot_every: f64,
    /// Monitored points `(x, y)`.
    pub probes: Vec<(f64, f64)>,
    pub plot: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChecksSpec {
    pub monitors: Vec<Check>,
    pub slack: f64,
    pub bounds_tol: f64,
    pub monotone_tol: f64,
    pub phi_threshold: f64,
    pub decay_fraction: f64,
    pub saturation_tol: f64,
    pub capacity_eps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: Params,
    pub grid: Grid,
    pub initial: InitialSpec,
    pub t_end: f64,
    pub dt: f64,
    /// Time from which envelope checks start.
    pub warmup: f64,
    pub output: OutputSpec,
    pub checks: ChecksSpec,
}

impl ScenarioConfig {
    /// Step-size cap for this configuration.
    pub fn dt_max(&self) -> f64 {
        dt_max(
            &self.params,
            working_necrosis_scale(&self.params, self.initial.necrosis.max()),
        )
    }

    pub fn initial_state(&self) -> Result<GridState> {
        let g = self.grid;
        let tumor = match &self.initial.tumor {
            TumorSpec::Bumps(b) => bump_field(g, b, self.params.k),
            TumorSpec::Constant(c) => ScalarField::constant(g, *c),
            TumorSpec::Field(f) if *f.grid() == g => f.clone(),
            TumorSpec::Field(_) => {
                return Err(Error::InvalidInitialData(
                    "T0 file grid differs from the run grid".into(),
                ))
            }
        };
        GridState::new(
            0.0,
            tumor,
            self.initial.necrosis.to_field(g, "N0")?,
            self.initial.vasc.to_field(g, "Phi0")?,
        )
    }

    /// Probe cells on the configured grid.
    pub fn probe_cells(&self) -> Vec<(usize, usize)> {
        let mut cells: Vec<(usize, usize)> = self
            .output
            .probes
            .iter()
            .map(|&(x, y)| self.grid.locate(x, y))
            .collect();
        cells.dedup();
        cells
    }

    /// Applies command-line overrides and re-validates the step size.
    pub fn with_overrides(
        mut self,
        dt: Option<f64>,
        t_end: Option<f64>,
        grid: Option<(usize, usize)>,
    ) -> Result<Self> {
        let mut issues = Vec::new();
        if let Some(dt) = dt {
            self.dt = dt;
        }
        if let Some(t) = t_end {
            self.t_end = t;
        }
        if let Some((nx, ny)) = grid {
            match Grid::new(
                nx,
                ny,
                (self.grid.x0, self.grid.x1, self.grid.y0, self.grid.y1),
            ) {
                Ok(g) => self.grid = g,
                Err(e) => issues.push(issue(None, e.to_string())),
            }
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            issues.push(issue(
                None,
                format!("dt must be positive (got {})", self.dt),
            ));
        } else if self.dt > self.dt_max() {
            issues.push(issue(
                None,
                format!("dt = {} exceeds dt_max = {}", self.dt, self.dt_max()),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            issues.push(issue(
                None,
                format!("t_end must be positive (got {})", self.t_end),
            ));
        }
        if issues.is_empty() {
            Ok(self)
        } else {
            Err(Error::Config(issues))
        }
    }
}

fn issue(line: Option<usize>, message: impl Into<String>) -> ConfigIssue {
    ConfigIssue {
        line,
        message: message.into(),
    }
}

#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("", &["name"]),
    (
        "params",
        &[
            "preset", "rho", "alpha", "beta1", "beta2", "gamma", "delta", "K", "kappa0",
        ],
    ),
    ("grid", &["nx", "ny", "x0", "x1", "y0", "y1"]),
    ("initial", &["bump", "T0", "N0", "Phi0"]),
    ("time", &["t_end", "dt", "warmup"]),
    (
        "output",
        &["dir", "series_every", "snapshot_every", "probe", "plot"],
    ),
    (
        "checks",
        &[
            "monitors",
            "slack",
            "bounds_tol",
            "monotone_tol",
            "phi_threshold",
            "decay_fraction",
            "saturation_tol",
            "capacity_eps",
        ],
    ),
];

const REPEATABLE: &[&str] = &["initial.bump", "output.probe"];

/// Collects entries keyed by `section.key`, reporting syntax problems.
fn tokenize(text: &str, issues: &mut Vec<ConfigIssue>) -> BTreeMap<String, Vec<Entry>> {
    let mut map: BTreeMap<String, Vec<Entry>> = BTreeMap::new();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            match rest.strip_suffix(']') {
                Some(name)
                    if SECTIONS
                        .iter()
                        .any(|(s, _)| *s == name.trim() && !s.is_empty()) =>
                {
                    section = name.trim().to_string();
                }
                Some(name) => {
                    issues.push(issue(
                        Some(line),
                        format!("unknown section [{}]", name.trim()),
                    ));
                    section = format!("?{}", name.trim());
                }
                None => issues.push(issue(
                    Some(line),
                    format!("malformed section header '{content}'"),
                )),
            }
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(issue(
                Some(line),
                format!("expected 'key = value', found '{content}'"),
            ));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if section.starts_with('?') {
            continue;
        }
        let known = SECTIONS
            .iter()
            .find(|(s, _)| *s == section)
            .is_some_and(|(_, keys)| keys.contains(&key));
        let full = if section.is_empty() {
            key.to_string()
        } else {
            format!("{section}.{key}")
        };
        if !known {
            issues.push(issue(Some(line), format!("unknown key '{full}'")));
            continue;
        }
        let slot = map.entry(full.clone()).or_default();
        if !slot.is_empty() && !REPEATABLE.contains(&full.as_str()) {
            issues.push(issue(
                Some(line),
                format!(
                    "duplicate key '{full}' (first set on line {})",
                    slot[0].line
                ),
            ));
            continue;
        }
        slot.push(Entry {
            line,
            value: value.to_string(),
        });
    }
    map
}

struct Reader<'a> {
    map: &'a BTreeMap<String, Vec<Entry>>,
    issues: &'a mut Vec<ConfigIssue>,
    base: Option<&'a Path>,
}

impl Reader<'_> {
    fn entry(&self, key: &str) -> Option<&Entry> {
        self.map.get(key).and_then(|v| v.first())
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.entry(key).map(|e| e.line)
    }

    fn parse<T: FromStr>(&mut self, key: &str) -> Option<T> {
        let e = self.entry(key)?;
        match e.value.parse::<T>() {
            Ok(v) => Some(v),
            Err(_) => {
                let (line, value) = (e.line, e.value.clone());
                self.issues.push(issue(
                    Some(line),
                    format!("cannot parse '{value}' for '{key}'"),
                ));
                None
            }
        }
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        let v: f64 = self.parse(key)?;
        if v.is_finite() {
            Some(v)
        } else {
            let line = self.line(key);
            self.issues
                .push(issue(line, format!("'{key}' must be finite")));
            None
        }
    }

    fn positive(&mut self, key: &str) -> Option<f64> {
        let v = self.number(key)?;
        if v > 0.0 {
            Some(v)
        } else {
            let line = self.line(key);
            self.issues
                .push(issue(line, format!("'{key}' must be positive (got {v})")));
            None
        }
    }

    fn non_negative(&mut self, key: &str) -> Option<f64> {
        let v = self.number(key)?;
        if v >= 0.0 {
            Some(v)
        } else {
            let line = self.line(key);
            self.issues.push(issue(
                line,
                format!("'{key}' must be nonnegative (got {v})"),
            ));
            None
        }
    }

    fn missing(&mut self, key: &str) {
        self.issues
            .push(issue(None, format!("missing required key '{key}'")));
    }

    fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        match self.base {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn file_field(&mut self, key: &str, path: &str, line: usize) -> Option<ScalarField> {
        match read_snapshot(&self.resolve(path)) {
            Ok((f, _)) => Some(f),
            Err(e) => {
                self.issues.push(issue(
                    Some(line),
                    format!("cannot read '{key}' from '{path}': {e}"),
                ));
                None
            }
        }
    }

    fn field_spec(&mut self, key: &str, k: f64) -> Option<FieldSpec> {
        let Some(e) = self.entry(key).cloned() else {
            self.missing(key);
            return None;
        };
        let spec = match e.value.strip_prefix("file:") {
            Some(path) => FieldSpec::Field(self.file_field(key, path.trim(), e.line)?),
            None => FieldSpec::Constant(self.number(key)?),
        };
        let (lo, hi) = match &spec {
            FieldSpec::Constant(c) => (*c, *c),
            FieldSpec::Field(f) => (f.min(), f.max()),
        };
        if lo < 0.0 || hi > k {
            self.issues.push(issue(
                Some(e.line),
                format!("'{key}' range [{lo}, {hi}] leaves the admissible box [0, {k}]"),
            ));
            return None;
        }
        Some(spec)
    }
}

type ParamSlot = fn(&mut Params) -> &mut f64;

fn parse_params(r: &mut Reader<'_>) -> Option<Params> {
    let base = match r.entry("params.preset").map(|e| (e.line, e.value.clone())) {
        Some((_, name)) if name == "destruction_dominant" => Some(Params::destruction_dominant()),
        Some((_, name)) if name == "angiogenic" => Some(Params::angiogenic()),
        Some((line, name)) => {
            r.issues.push(issue(
                Some(line),
                format!("unknown preset '{name}' (expected destruction_dominant or angiogenic)"),
            ));
            return None;
        }
        None => None,
    };
    let fields: [(&str, ParamSlot); 8] = [
        ("params.rho", |p| &mut p.rho),
        ("params.alpha", |p| &mut p.alpha),
        ("params.beta1", |p| &mut p.beta1),
        ("params.beta2", |p| &mut p.beta2),
        ("params.gamma", |p| &mut p.gamma),
        ("params.delta", |p| &mut p.delta),
        ("params.K", |p| &mut p.k),
        ("params.kappa0", |p| &mut p.kappa0),
    ];
    let mut p = base.unwrap_or(Params {
        rho: f64::NAN,
        alpha: f64::NAN,
        beta1: f64::NAN,
        beta2: f64::NAN,
        gamma: f64::NAN,
        delta: f64::NAN,
        k: f64::NAN,
        kappa0: 1.0,
    });
    let mut ok = true;
    for (key, slot) in fields {
        if r.entry(key).is_some() {
            match r.positive(key) {
                Some(v) => *slot(&mut p) = v,
                None => ok = false,
            }
        } else if slot(&mut p).is_nan() {
            r.missing(key);
            ok = false;
        }
    }
    ok.then_some(p)
}

fn parse_grid(r: &mut Reader<'_>) -> Option<Grid> {
    let mut dims = [0usize; 2];
    let mut ok = true;
    for (slot, key) in dims.iter_mut().zip(["grid.nx", "grid.ny"]) {
        if r.entry(key).is_none() {
            r.missing(key);
            ok = false;
        } else {
            match r.parse::<usize>(key) {
                Some(v) => *slot = v,
                None => ok = false,
            }
        }
    }
    let mut bounds = [-2.0, 2.0, -2.0, 2.0];
    for (slot, key) in bounds
        .iter_mut()
        .zip(["grid.x0", "grid.x1", "grid.y0", "grid.y1"])
    {
        if r.entry(key).is_some() {
            match r.number(key) {
                Some(v) => *slot = v,
                None => ok = false,
            }
        }
    }
    if !ok {
        return None;
    }
    match Grid::new(
        dims[0],
        dims[1],
        (bounds[0], bounds[1], bounds[2], bounds[3]),
    ) {
        Ok(g) => Some(g),
        Err(e) => {
            let line = r.line("grid.nx");
            r.issues.push(issue(line, e.to_string()));
            None
        }
    }
}

fn parse_bump(value: &str, k: f64) -> std::result::Result<Bump, String> {
    let nums: Vec<f64> = value
        .split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("cannot parse '{t}' in bump"))
        })
        .collect::<std::result::Result<_, _>>()?;
    if !(2..=4).contains(&nums.len()) {
        return Err(format!(
            "bump needs 'x y [amplitude [sigma]]', found '{value}'"
        ));
    }
    let mut b = Bump::at(nums[0], nums[1]);
    if let Some(&a) = nums.get(2) {
        b.amplitude = a;
    }
    if let Some(&s) = nums.get(3) {
        b.sigma = s;
    }
    if !(b.amplitude >= 0.0 && b.amplitude <= k) {
        return Err(format!(
            "bump amplitude {} leaves the admissible box [0, {k}]",
            b.amplitude
        ));
    }
    if !(b.sigma > 0.0) || nums.iter().any(|v| !v.is_finite()) {
        return Err(format!("bump '{value}' needs finite values and sigma > 0"));
    }
    Ok(b)
}

fn parse_initial(r: &mut Reader<'_>, k: f64) -> Option<InitialSpec> {
    let bumps = r.map.get("initial.bump").cloned().unwrap_or_default();
    let tumor = match (bumps.is_empty(), r.entry("initial.T0").cloned()) {
        (false, Some(e)) => {
            r.issues.push(issue(
                Some(e.line),
                "give either 'bump' lines or 'T0', not both",
            ));
            None
        }
        (true, None) => {
            r.missing("initial.bump' or 'initial.T0");
            None
        }
        (false, None) => {
            let mut out = Vec::new();
            let mut ok = true;
            for e in &bumps {
                match parse_bump(&e.value, k) {
                    Ok(b) => out.push(b),
                    Err(msg) => {
                        r.issues.push(issue(Some(e.line), msg));
                        ok = false;
                    }
                }
            }
            ok.then_some(TumorSpec::Bumps(out))
        }
        (true, Some(_)) => match r.field_spec("initial.T0", k)? {
            FieldSpec::Field(f) => Some(TumorSpec::Field(f)),
            FieldSpec::Constant(c) => Some(TumorSpec::Constant(c)),
        },
    };
    let necrosis = r.field_spec("initial.N0", k);
    let vasc = r.field_spec("initial.Phi0", k);
    Some(InitialSpec {
        tumor: tumor?,
        necrosis: necrosis?,
        vasc: vasc?,
    })
}

fn parse_output(r: &mut Reader<'_>) -> Option<OutputSpec> {
    let mut out = OutputSpec {
        dir: r.entry("output.dir").map(|e| PathBuf::from(&e.value)),
        series_every: 1.0,
        snapshot_every: 0.0,
        probes: Vec::new(),
        plot: false,
    };
    let mut ok = true;
    if r.entry("output.series_every").is_some() {
        match r.non_negative("output.series_every") {
            Some(v) => out.series_every = v,
            None => ok = false,
        }
    }
    if r.entry("output.snapshot_every").is_some() {
        match r.non_negative("output.snapshot_every") {
            Some(v) => out.snapshot_every = v,
            None => ok = false,
        }
    }
    if r.entry("output.plot").is_some() {
        match r.parse::<bool>("output.plot") {
            Some(v) => out.plot = v,
            None => ok = false,
        }
    }
    for e in r.map.get("output.probe").cloned().unwrap_or_default() {
        let nums: Vec<f64> = e
            .value
            .split_whitespace()
            .filter_map(|t| t.parse().ok())
            .collect();
        if nums.len() == 2 && e.value.split_whitespace().count() == 2 {
            out.probes.push((nums[0], nums[1]));
        } else {
            r.issues.push(issue(
                Some(e.line),
                format!("probe needs 'x y', found '{}'", e.value),
            ));
            ok = false;
        }
    }
    ok.then_some(out)
}

fn parse_checks(r: &mut Reader<'_>) -> Option<ChecksSpec> {
    let mut c = ChecksSpec {
        monitors: vec![Check::Bounds, Check::NecrosisMonotone, Check::DtCap],
        slack: crate::analysis::DEFAULT_ENVELOPE_SLACK,
        bounds_tol: crate::analysis::DEFAULT_BOUNDS_TOL,
        monotone_tol: crate::analysis::DEFAULT_MONOTONE_TOL,
        phi_threshold: DEFAULT_PHI_THRESHOLD,
        decay_fraction: DEFAULT_DECAY_FRACTION,
        saturation_tol: DEFAULT_SATURATION_TOL,
        capacity_eps: None,
    };
    let mut ok = true;
    if let Some(e) = r.entry("checks.monitors").cloned() {
        let mut list = Vec::new();
        for name in e.value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name.parse::<Check>() {
                Ok(check) if !list.contains(&check) => list.push(check),
                Ok(_) => {}
                Err(msg) => {
                    r.issues.push(issue(Some(e.line), msg));
                    ok = false;
                }
            }
        }
        c.monitors = list;
    }
    let slots: [(&str, &mut f64); 6] = [
        ("checks.slack", &mut c.slack),
        ("checks.bounds_tol", &mut c.bounds_tol),
        ("checks.monotone_tol", &mut c.monotone_tol),
        ("checks.phi_threshold", &mut c.phi_threshold),
        ("checks.decay_fraction", &mut c.decay_fraction),
        ("checks.saturation_tol", &mut c.saturation_tol),
    ];
    for (key, slot) in slots {
        if r.entry(key).is_some() {
            match r.positive(key) {
                Some(v) => *slot = v,
                None => ok = false,
            }
        }
    }
    if r.entry("checks.capacity_eps").is_some() {
        match r.positive("checks.capacity_eps") {
            Some(v) => c.capacity_eps = Some(v),
            None => ok = false,
        }
    }
    ok.then_some(c)
}

/// Parses and validates a configuration; relative `file:` paths resolve against
/// the working directory.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    parse_config_in(text, None)
}

/// Like [`parse_config`], resolving relative `file:` paths against `base`.
pub fn parse_config_in(text: &str, base: Option<&Path>) -> Result<ScenarioConfig> {
    let mut issues = Vec::new();
    let map = tokenize(text, &mut issues);
    let mut r = Reader {
        map: &map,
        issues: &mut issues,
        base,
    };
    let name = r
        .entry("name")
        .map(|e| e.value.clone())
        .unwrap_or_else(|| "scenario".to_string());
    let params = parse_params(&mut r);
    let grid = parse_grid(&mut r);
    let k = params.map_or(f64::INFINITY, |p| p.k);
    let initial = parse_initial(&mut r, k);

    let t_end = if r.entry("time.t_end").is_some() {
        r.positive("time.t_end")
    } else {
        Some(DEFAULT_T_END)
    };
    let dt = if r.entry("time.dt").is_some() {
        r.positive("time.dt")
    } else {
        r.missing("time.dt");
        None
    };
    let warmup = if r.entry("time.warmup").is_some() {
        r.non_negative("time.warmup")
    } else {
        Some(0.0)
    };
    if let (Some(p), Some(init), Some(dt)) = (params, &initial, dt) {
        let cap = dt_max(&p, working_necrosis_scale(&p, init.necrosis.max()));
        if dt > cap {
            let line = r.line("time.dt");
            r.issues
                .push(issue(line, format!("dt = {dt} exceeds dt_max = {cap}")));
        }
    }
    if let (Some(t), Some(w)) = (t_end, warmup) {
        if w >= t {
            let line = r.line("time.warmup");
            r.issues
                .push(issue(line, format!("warmup {w} must precede t_end {t}")));
        }
    }
    let output = parse_output(&mut r);
    let checks = parse_checks(&mut r);
    if let (Some(TumorSpec::Field(f)), Some(g)) = (initial.as_ref().map(|i| &i.tumor), grid) {
        if *f.grid() != g {
            let line = r.line("initial.T0");
            r.issues
                .push(issue(line, "T0 file grid differs from [grid]"));
        }
    }

    if !issues.is_empty() {
        issues.sort_by_key(|i| i.line.unwrap_or(usize::MAX));
        return Err(Error::Config(issues));
    }
    let (
        Some(params),
        Some(grid),
        Some(initial),
        Some(t_end),
        Some(dt),
        Some(warmup),
        Some(output),
        Some(checks),
    ) = (params, grid, initial, t_end, dt, warmup, output, checks)
    else {
        return Err(Error::Config(vec![issue(None, "incomplete configuration")]));
    };
    Ok(ScenarioConfig {
        name,
        params,
        grid,
        initial,
        t_end,
        dt,
        warmup,
        output,
        checks,
    })
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_in(&text, path.parent())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "\
[params]
preset = destruction_dominant
[grid]
nx = 16
ny = 16
[initial]
bump = 0 0
N0 = 0
Phi0 = 0.5
[time]
dt = 0.05
";

    fn issues(text: &str) -> Vec<ConfigIssue> {
        match parse_config(text).unwrap_err() {
            Error::Config(v) => v,
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimal_config_uses_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.params, Params::destruction_dominant());
        assert_eq!(c.t_end, DEFAULT_T_END);
        assert_eq!(c.grid, Grid::square(16).unwrap());
        assert_eq!(
            c.checks.monitors,
            vec![Check::Bounds, Check::NecrosisMonotone, Check::DtCap]
        );
        let s = c.initial_state().unwrap();
        assert!(s.tumor.max() > 0.5 && s.tumor.max() <= 0.8);
    }

    #[test]
    fn empty_file_lists_required_keys() {
        let v = issues("");
        let text: Vec<String> = v.iter().map(|i| i.message.clone()).collect();
        for key in [
            "params.rho",
            "params.alpha",
            "params.beta1",
            "params.beta2",
            "params.gamma",
            "params.delta",
            "params.K",
            "grid.nx",
            "grid.ny",
            "initial.bump",
            "initial.N0",
            "initial.Phi0",
            "time.dt",
        ] {
            assert!(
                text.iter().any(|m| m.contains(key)),
                "missing {key}: {text:?}"
            );
        }
    }

    #[test]
    fn out_of_box_bump_is_rejected_with_line() {
        let text = MINIMAL.replace("bump = 0 0", "bump = 0 0 1.5");
        let v = issues(&text);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].line, Some(7));
        assert!(v[0].message.contains("amplitude"));
    }

    #[test]
    fn collects_every_problem() {
        let text = MINIMAL.replace("dt = 0.05", "dt = 1.0\ncolour = red") + "[extra]\nfoo = 1\n";
        let v = issues(&text);
        assert!(v
            .iter()
            .any(|i| i.message.contains("dt_max") && i.line == Some(11)));
        assert!(v
            .iter()
            .any(|i| i.message.contains("time.colour") && i.line == Some(12)));
        assert!(v.iter().any(|i| i.message.contains("[extra]")));
    }

    #[test]
    fn overrides_recheck_dt() {
        let c = parse_config(MINIMAL).unwrap();
        assert!(c.clone().with_overrides(Some(5.0), None, None).is_err());
        let c = c.with_overrides(None, Some(10.0), Some((8, 10))).unwrap();
        assert_eq!((c.grid.nx, c.grid.ny), (8, 10));
        assert_eq!(c.t_end, 10.0);
    }
}
