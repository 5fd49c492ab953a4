//! Named run configurations and their CSV/JSON artifacts.
//!
//! Configs are flat `key = value` tables (a TOML subset). Every artifact starts
//! with its resolved parameters, so feeding an artifact's header back through
//! [`rerun_from_header`] reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::dephasing::{
    decoherence_time, information_timeseries, log_time_grid, pointer_basis_time, BathSpec,
    DephasingRun,
};
use crate::error::{Error, Result};
use crate::info::BellDiagonalParams;
use crate::linalg::{ComplexMatrix, DensityOperator};
use crate::nm::{
    ln_nm_analytic, ln_nm_equilibrium, nm_numeric, nm_surface, NMParams, DEFAULT_PHASE_STEP,
};
use crate::oracle::{DEFAULT_CONFIGURATION_CAP, DEFAULT_EPS_TRUNC};
use crate::states::{appendix_grid, closed_form_i3_interaction};
use crate::verify::{verify_all, VerifyOptions};

pub const ARTIFACT_VERSION: &str = concat!("triflow ", env!("CARGO_PKG_VERSION"));

/// Gaussian width, either literal or a multiple of the mode count (`"10N"`, `"N"`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DeltaWidth {
    Absolute(f64),
    PerMode(f64),
}

impl DeltaWidth {
    pub fn resolve(self, modes: usize) -> f64 {
        match self {
            DeltaWidth::Absolute(d) => d,
            DeltaWidth::PerMode(m) => m * modes as f64,
        }
    }
}

impl fmt::Display for DeltaWidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeltaWidth::Absolute(d) => write!(f, "{d}"),
            DeltaWidth::PerMode(m) if *m == 1.0 => write!(f, "\"N\""),
            DeltaWidth::PerMode(m) => write!(f, "\"{m}N\""),
        }
    }
}

impl FromStr for DeltaWidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || {
            Error::Config(format!(
                "deltaWidth {s:?} is neither a number nor a multiple of N"
            ))
        };
        if let Some(m) = s.strip_suffix('N') {
            let m = m.trim().trim_end_matches('*').trim();
            let mult = if m.is_empty() {
                1.0
            } else {
                m.parse::<f64>().map_err(|_| bad())?
            };
            return Ok(DeltaWidth::PerMode(mult));
        }
        s.parse::<f64>()
            .map(DeltaWidth::Absolute)
            .map_err(|_| bad())
    }
}

/// `start:stop:count`, inclusive and evenly spaced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Linspace {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        let mut v: Vec<f64> = (0..self.count)
            .map(|i| self.start + step * i as f64)
            .collect();
        v[self.count - 1] = self.stop;
        v
    }
}

impl FromStr for Linspace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("grid {s:?} must be start:stop:count"));
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let g = Linspace {
            start: a.parse().map_err(|_| bad())?,
            stop: b.parse().map_err(|_| bad())?,
            count: n.parse().map_err(|_| bad())?,
        };
        if g.count == 0 || !g.start.is_finite() || !g.stop.is_finite() {
            return Err(bad());
        }
        Ok(g)
    }
}

impl fmt::Display for Linspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

/// `first:last` inclusive integer range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeRange {
    pub first: usize,
    pub last: usize,
}

impl ModeRange {
    pub fn values(&self) -> Vec<usize> {
        (self.first..=self.last).collect()
    }
}

impl FromStr for ModeRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "mode range {s:?} must be first:last with 1 <= first <= last"
            ))
        };
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let r = ModeRange {
            first: a.trim().parse().map_err(|_| bad())?,
            last: b.trim().parse().map_err(|_| bad())?,
        };
        if r.first == 0 || r.last < r.first {
            return Err(bad());
        }
        Ok(r)
    }
}

impl fmt::Display for ModeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.first, self.last)
    }
}

/// Every tunable parameter. Defaults are the fig1a bath and state.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub modes: usize,
    pub omega0: f64,
    pub beta: f64,
    pub g0: f64,
    pub delta_width: DeltaWidth,
    pub g_a: f64,
    pub g_b: f64,
    pub hbar: f64,
    pub c: [f64; 3],
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_decade: usize,
    /// Final time of the witness average.
    pub t: f64,
    pub max_phase_step: f64,
    pub beta_grid: Linspace,
    pub modes_grid: ModeRange,
    pub grid: usize,
    pub eps_trunc: f64,
    pub modes_cap: usize,
    pub configuration_cap: usize,
    pub seed: u64,
    pub pure_samples: usize,
    pub mixed_samples: usize,
    pub oracle_times: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            modes: 10,
            omega0: 1.0,
            beta: 1.0,
            g0: 0.1,
            delta_width: DeltaWidth::PerMode(10.0),
            g_a: 1.0,
            g_b: 2.0,
            hbar: 1.0,
            c: [-0.8; 3],
            t_min: 1e-2,
            t_max: 1e4,
            points_per_decade: 600,
            t: 1e4,
            max_phase_step: DEFAULT_PHASE_STEP,
            beta_grid: Linspace {
                start: 0.05,
                stop: 5.0,
                count: 60,
            },
            modes_grid: ModeRange { first: 1, last: 60 },
            grid: 101,
            eps_trunc: DEFAULT_EPS_TRUNC,
            modes_cap: 3,
            configuration_cap: DEFAULT_CONFIGURATION_CAP,
            seed: 0,
            pure_samples: 1000,
            mixed_samples: 2000,
            oracle_times: 30,
        }
    }
}

fn value_f64(key: &str, v: &toml::Value) -> Result<f64> {
    match v {
        toml::Value::Float(x) => Ok(*x),
        toml::Value::Integer(i) => Ok(*i as f64),
        toml::Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{key}: {s:?} is not a number"))),
        other => Err(Error::Config(format!(
            "{key}: expected a number, got {other}"
        ))),
    }
}

fn value_usize(key: &str, v: &toml::Value) -> Result<usize> {
    let x = value_f64(key, v)?;
    if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
        return Err(Error::Config(format!(
            "{key}: {x} is not a non-negative integer"
        )));
    }
    Ok(x as usize)
}

fn value_str(key: &str, v: &toml::Value) -> Result<String> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        other => Err(Error::Config(format!(
            "{key}: expected a string, got {other}"
        ))),
    }
}

impl RunConfig {
    /// Applies every key of `table`; unknown keys are rejected.
    pub fn apply(&mut self, table: &toml::Table) -> Result<()> {
        for (key, v) in table {
            self.set(key, v)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, v: &toml::Value) -> Result<()> {
        let f = || value_f64(key, v);
        let u = || value_usize(key, v);
        match key {
            "N" => self.modes = u()?,
            "omega0" => self.omega0 = f()?,
            "beta" => self.beta = f()?,
            "g0" => self.g0 = f()?,
            "deltaWidth" => self.delta_width = value_str(key, v)?.parse()?,
            "gA" => self.g_a = f()?,
            "gB" => self.g_b = f()?,
            "hbar" => self.hbar = f()?,
            "c1" => self.c[0] = f()?,
            "c2" => self.c[1] = f()?,
            "c3" => self.c[2] = f()?,
            "tMin" => self.t_min = f()?,
            "tMax" => self.t_max = f()?,
            "pointsPerDecade" => self.points_per_decade = u()?,
            "t" => self.t = f()?,
            "maxPhaseStep" => self.max_phase_step = f()?,
            "betaGrid" => self.beta_grid = value_str(key, v)?.parse()?,
            "modesGrid" => self.modes_grid = value_str(key, v)?.parse()?,
            "grid" => self.grid = u()?,
            "epsTrunc" => self.eps_trunc = f()?,
            "modesCap" => self.modes_cap = u()?,
            "configurationCap" => self.configuration_cap = u()?,
            "seed" => self.seed = u()? as u64,
            "pureSamples" => self.pure_samples = u()?,
            "mixedSamples" => self.mixed_samples = u()?,
            "oracleTimes" => self.oracle_times = u()?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Parses a `key=value` override; the value is read as TOML, falling back to a bare string.
    pub fn set_from_str(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} lacks '='")))?;
        self.set(key.trim(), &parse_value(raw))
    }

    pub fn bath(&self) -> Result<BathSpec> {
        BathSpec {
            modes: self.modes,
            omega0: self.omega0,
            beta: self.beta,
            g0: self.g0,
            delta_width: self.delta_width.resolve(self.modes),
            g_a: self.g_a,
            g_b: self.g_b,
            hbar: self.hbar,
        }
        .validated()
    }

    pub fn initial(&self) -> Result<BellDiagonalParams> {
        BellDiagonalParams::new(self.c[0], self.c[1], self.c[2])
    }

    fn entry(&self, key: &str) -> String {
        let c = |x: f64| x.to_string();
        match key {
            "N" => self.modes.to_string(),
            "omega0" => c(self.omega0),
            "beta" => c(self.beta),
            "g0" => c(self.g0),
            "deltaWidth" => self.delta_width.to_string(),
            "gA" => c(self.g_a),
            "gB" => c(self.g_b),
            "hbar" => c(self.hbar),
            "c1" => c(self.c[0]),
            "c2" => c(self.c[1]),
            "c3" => c(self.c[2]),
            "tMin" => c(self.t_min),
            "tMax" => c(self.t_max),
            "pointsPerDecade" => self.points_per_decade.to_string(),
            "t" => c(self.t),
            "maxPhaseStep" => c(self.max_phase_step),
            "betaGrid" => format!("\"{}\"", self.beta_grid),
            "modesGrid" => format!("\"{}\"", self.modes_grid),
            "grid" => self.grid.to_string(),
            "epsTrunc" => c(self.eps_trunc),
            "modesCap" => self.modes_cap.to_string(),
            "configurationCap" => self.configuration_cap.to_string(),
            "seed" => self.seed.to_string(),
            "pureSamples" => self.pure_samples.to_string(),
            "mixedSamples" => self.mixed_samples.to_string(),
            "oracleTimes" => self.oracle_times.to_string(),
            _ => unreachable!("no config key {key}"),
        }
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let raw = raw.trim();
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

/// Reads a flat config file.
pub fn parse_config(text: &str) -> Result<toml::Table> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
    if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table() || v.is_array()) {
        return Err(Error::Config(format!(
            "{k}: nested values are not supported"
        )));
    }
    Ok(table)
}

const BATH_KEYS: [&str; 8] = [
    "N",
    "omega0",
    "beta",
    "g0",
    "deltaWidth",
    "gA",
    "gB",
    "hbar",
];
const STATE_KEYS: [&str; 3] = ["c1", "c2", "c3"];
const GRID_KEYS: [&str; 3] = ["tMin", "tMax", "pointsPerDecade"];

/// What gets computed and how it is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Job {
    Dephase,
    Nm,
    NmSurface,
    Appendix,
    Verify,
    Fig1a,
    Fig1c,
    Fig1e,
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
}

/// Names accepted by `triflow scenario`.
pub const SCENARIOS: [Job; 8] = [
    Job::Fig1a,
    Job::Fig1c,
    Job::Fig1e,
    Job::Fig2a,
    Job::Fig2b,
    Job::Fig3,
    Job::Fig4,
    Job::Verify,
];

impl Job {
    pub fn name(self) -> &'static str {
        match self {
            Job::Dephase => "dephase",
            Job::Nm => "nm",
            Job::NmSurface => "nm-surface",
            Job::Appendix => "appendix",
            Job::Verify => "verify",
            Job::Fig1a => "fig1a",
            Job::Fig1c => "fig1c",
            Job::Fig1e => "fig1e",
            Job::Fig2a => "fig2a",
            Job::Fig2b => "fig2b",
            Job::Fig3 => "fig3",
            Job::Fig4 => "fig4",
        }
    }

    pub fn scenario(name: &str) -> Result<Self> {
        SCENARIOS
            .into_iter()
            .find(|j| j.name() == name)
            .ok_or_else(|| Error::UnknownScenario(name.to_string()))
    }

    /// Built-in parameters before file and flag overrides.
    pub fn defaults(self) -> RunConfig {
        let base = RunConfig::default();
        let fig1e = RunConfig {
            beta: 0.1,
            delta_width: DeltaWidth::PerMode(1.0),
            ..base.clone()
        };
        match self {
            Job::Fig1c => RunConfig { beta: 0.1, ..base },
            Job::Fig1e => fig1e,
            Job::Fig2a => RunConfig {
                c: [-0.6; 3],
                ..fig1e
            },
            Job::Fig2b => RunConfig {
                c: [-0.6, -0.6, -0.5],
                ..fig1e
            },
            Job::Fig3 => RunConfig { t: 1e6, ..base },
            _ => base,
        }
    }

    fn kind(self) -> Kind {
        match self {
            Job::Dephase => Kind::Dephase {
                markers: false,
                pointer: false,
            },
            Job::Fig1a | Job::Fig1c | Job::Fig1e => Kind::Dephase {
                markers: true,
                pointer: false,
            },
            Job::Fig2a | Job::Fig2b => Kind::Dephase {
                markers: true,
                pointer: true,
            },
            Job::Nm => Kind::Nm,
            Job::NmSurface | Job::Fig3 => Kind::Surface,
            Job::Appendix => Kind::Appendix,
            Job::Fig4 => Kind::Fig4,
            Job::Verify => Kind::Verify,
        }
    }

    /// Config keys that determine this job's output.
    fn keys(self) -> Vec<&'static str> {
        match self.kind() {
            Kind::Dephase { .. } => [&BATH_KEYS[..], &STATE_KEYS, &GRID_KEYS].concat(),
            Kind::Nm => [&BATH_KEYS[..], &["t", "maxPhaseStep"]].concat(),
            Kind::Surface => [&BATH_KEYS[..], &["betaGrid", "modesGrid", "t"]].concat(),
            Kind::Appendix | Kind::Fig4 => vec!["grid"],
            Kind::Verify => [
                &BATH_KEYS[..],
                &[
                    "epsTrunc",
                    "modesCap",
                    "configurationCap",
                    "seed",
                    "pureSamples",
                    "mixedSamples",
                    "oracleTimes",
                ],
            ]
            .concat(),
        }
    }
}

impl FromStr for Job {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Job::Dephase, Job::Nm, Job::NmSurface, Job::Appendix]
            .into_iter()
            .chain(SCENARIOS)
            .find(|j| j.name() == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Dephase { markers: bool, pointer: bool },
    Nm,
    Surface,
    Appendix,
    Fig4,
    Verify,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub job: Job,
    pub format: Format,
    pub text: String,
    /// False only for a failed verification.
    pub passed: bool,
}

/// Floats in data rows: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "nan".to_string())
}

struct Csv {
    out: String,
}

impl Csv {
    fn new(job: Job, cfg: &RunConfig, notes: &[(&str, String)]) -> Self {
        let mut out = String::new();
        for (k, v) in header_entries(job, cfg, notes) {
            writeln!(out, "# {k}={v}").unwrap();
        }
        Self { out }
    }

    fn row<S: AsRef<str>>(&mut self, cells: impl IntoIterator<Item = S>) {
        let cells: Vec<String> = cells.into_iter().map(|c| c.as_ref().to_string()).collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }
}

/// `@`-prefixed entries are informational; the rest are config keys.
fn header_entries(job: Job, cfg: &RunConfig, notes: &[(&str, String)]) -> Vec<(String, String)> {
    let mut v = vec![
        ("@version".to_string(), ARTIFACT_VERSION.to_string()),
        ("@job".to_string(), job.name().to_string()),
    ];
    v.extend(
        job.keys()
            .into_iter()
            .map(|k| (k.to_string(), cfg.entry(k))),
    );
    v.extend(notes.iter().map(|(k, val)| (format!("@{k}"), val.clone())));
    v
}

fn header_json(job: Job, cfg: &RunConfig, notes: &[(&str, String)]) -> Value {
    let map: Map<String, Value> = header_entries(job, cfg, notes)
        .into_iter()
        .map(|(k, v)| (k, Value::String(v)))
        .collect();
    Value::Object(map)
}

/// Resolves the config for `job`: built-in defaults, then `file`, then `overrides`.
pub fn resolve_config(
    job: Job,
    file: Option<&toml::Table>,
    overrides: &[String],
) -> Result<RunConfig> {
    let mut cfg = job.defaults();
    if let Some(t) = file {
        cfg.apply(t)?;
    }
    for o in overrides {
        cfg.set_from_str(o)?;
    }
    Ok(cfg)
}

pub fn run_job(job: Job, cfg: &RunConfig) -> Result<Artifact> {
    let csv = |text| {
        Ok(Artifact {
            job,
            format: Format::Csv,
            text,
            passed: true,
        })
    };
    match job.kind() {
        Kind::Dephase { markers, pointer } => csv(dephase_csv(job, cfg, markers, pointer)?),
        Kind::Surface => csv(surface_csv(job, cfg)?),
        Kind::Appendix => csv(appendix_csv(job, cfg)?),
        Kind::Fig4 => csv(fig4_csv(job, cfg)?),
        Kind::Nm => {
            let p = NMParams {
                bath: cfg.bath()?,
                t_final: cfg.t,
                max_phase_step: cfg.max_phase_step,
            }
            .validated()?;
            let ln_eq = ln_nm_equilibrium(&p.bath);
            let ln_an = ln_nm_analytic(&p);
            let v = json!({
                "metadata": header_json(job, cfg, &[]),
                "lnNmAnalytic": ln_an,
                "nmAnalytic": ln_an.exp(),
                "nmNumeric": nm_numeric(&p),
                "lnNmEquilibrium": ln_eq,
                "nmEquilibrium": ln_eq.exp(),
            });
            Ok(Artifact {
                job,
                format: Format::Json,
                text: pretty(&v),
                passed: true,
            })
        }
        Kind::Verify => {
            let report = verify_all(&VerifyOptions::from_config(cfg)?)?;
            let mut v = serde_json::to_value(&report).map_err(|e| Error::Config(e.to_string()))?;
            v.as_object_mut()
                .expect("report serializes to an object")
                .insert("metadata".into(), header_json(job, cfg, &[]));
            Ok(Artifact {
                job,
                format: Format::Json,
                text: pretty(&v),
                passed: report.passed,
            })
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn dephase_csv(job: Job, cfg: &RunConfig, markers: bool, pointer: bool) -> Result<String> {
    let bath = cfg.bath()?;
    let initial = cfg.initial()?;
    let grid = log_time_grid(cfg.t_min, cfg.t_max, cfg.points_per_decade)?;
    let series = information_timeseries(&DephasingRun::new(bath, initial, grid)?)?;
    let mut notes = Vec::new();
    let mut marker_cells = Vec::new();
    if markers {
        let d = decoherence_time(&bath).ok();
        notes.push(("tDApprox", fmt_opt(d.map(|d| d.t_d_approx))));
        marker_cells.push(fmt_opt(d.map(|d| d.t_d)));
        if pointer {
            let pb = pointer_basis_time(&initial, &bath)?;
            notes.push(("tPBApprox", fmt_opt(pb.map(|p| p.t_pb_approx))));
            marker_cells.push(fmt_opt(pb.map(|p| p.t_pb)));
        }
    }
    let mut csv = Csv::new(job, cfg, &notes);
    let mut head = vec![
        "t",
        "thetaMinusAbs",
        "thetaPlusAbs",
        "c1p",
        "c2p",
        "c3p",
        "IAB",
        "I3",
        "discord",
        "accessible",
        "concurrence",
        "conservationResidual",
    ];
    if markers {
        head.push("tD");
    }
    if pointer {
        head.push("tPB");
    }
    csv.row(head);
    for p in &series.points {
        let mut cells: Vec<String> = [
            p.t,
            p.theta_minus_abs,
            p.theta_plus_abs,
            p.c_prime.c1,
            p.c_prime.c2,
            p.c_prime.c3,
            p.i_ab,
            p.i3,
            p.discord,
            p.accessible,
            p.concurrence,
            p.conservation_residual,
        ]
        .into_iter()
        .map(fmt_f64)
        .collect();
        cells.extend(marker_cells.iter().cloned());
        csv.row(cells);
    }
    Ok(csv.out)
}

fn surface_csv(job: Job, cfg: &RunConfig) -> Result<String> {
    let s = nm_surface(
        &cfg.beta_grid.values(),
        &cfg.modes_grid.values(),
        &cfg.bath()?,
        cfg.t,
    )?;
    let mut csv = Csv::new(job, cfg, &[("deltaRule", "10N".to_string())]);
    csv.row(["N", "beta", "deltaWidth", "nm", "lnNm"]);
    for (i, &n) in s.modes.iter().enumerate() {
        for (j, &beta) in s.betas.iter().enumerate() {
            csv.row([
                n.to_string(),
                fmt_f64(beta),
                fmt_f64(10.0 * n as f64),
                fmt_f64(s.nm[i][j]),
                fmt_f64(s.ln_nm[i][j]),
            ]);
        }
    }
    Ok(csv.out)
}

fn appendix_csv(job: Job, cfg: &RunConfig) -> Result<String> {
    let rows = appendix_grid(cfg.grid)?;
    let mut csv = Csv::new(job, cfg, &[]);
    csv.row([
        "x",
        "I3_closed",
        "frakI_closed",
        "I3_numeric",
        "frakI_numeric",
        "bound_min_pairwise",
    ]);
    for r in rows {
        csv.row(
            [
                r.x,
                r.i3_closed,
                r.interaction_closed,
                r.i3_numeric,
                r.interaction_numeric,
                r.bound_min_pairwise,
            ]
            .map(fmt_f64),
        );
    }
    Ok(csv.out)
}

fn fig4_csv(job: Job, cfg: &RunConfig) -> Result<String> {
    let rows = appendix_grid(cfg.grid)?;
    let mut csv = Csv::new(
        job,
        cfg,
        &[("crossing", fmt_f64(crate::states::monogamy_crossing()))],
    );
    csv.row([
        "x",
        "I3_over_4",
        "frakI",
        "I3_minus_frakI",
        "bound_min_pairwise",
    ]);
    for r in rows {
        let c = closed_form_i3_interaction(r.x)?;
        csv.row(
            [
                r.x,
                c.i3 / 4.0,
                c.interaction,
                c.i3 - c.interaction,
                r.bound_min_pairwise,
            ]
            .map(fmt_f64),
        );
    }
    Ok(csv.out)
}

impl Artifact {
    /// Same content as JSON: `{metadata, columns, rows}` for tables, unchanged otherwise.
    pub fn into_format(self, format: Format) -> Result<Self> {
        match (self.format, format) {
            (Format::Csv, Format::Json) => {
                let metadata: Map<String, Value> = read_header(&self.text)?
                    .into_iter()
                    .map(|(k, v)| (k, Value::String(v)))
                    .collect();
                let mut lines = self.text.lines().filter(|l| !l.starts_with('#'));
                let columns: Vec<&str> = lines
                    .next()
                    .map(|l| l.split(',').collect())
                    .unwrap_or_default();
                let rows: Vec<Vec<Value>> = lines
                    .map(|l| {
                        l.split(',')
                            .map(|c| {
                                c.parse::<f64>()
                                    .ok()
                                    .and_then(serde_json::Number::from_f64)
                                    .map_or(Value::Null, Value::Number)
                            })
                            .collect()
                    })
                    .collect();
                let v = json!({ "metadata": metadata, "columns": columns, "rows": rows });
                Ok(Self {
                    format,
                    text: pretty(&v),
                    ..self
                })
            }
            (Format::Json, Format::Csv) => Err(Error::Config(format!(
                "{} output is JSON only",
                self.job.name()
            ))),
            _ => Ok(self),
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

/// Header entries of an artifact (CSV `# k=v` lines or the JSON `metadata` object).
pub fn read_header(text: &str) -> Result<BTreeMap<String, String>> {
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let meta = v
            .get("metadata")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Config("no metadata".into()))?;
        return Ok(meta
            .iter()
            .map(|(k, v)| (k.clone(), v.as_str().unwrap_or_default().to_string()))
            .collect());
    }
    Ok(text
        .lines()
        .map_while(|l| l.strip_prefix("# "))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect())
}

/// Re-runs the job recorded in an artifact header with exactly its parameters.
pub fn rerun_from_header(text: &str) -> Result<Artifact> {
    let header = read_header(text)?;
    let job: Job = header
        .get("@job")
        .ok_or_else(|| Error::Config("header lacks @job".into()))?
        .parse()?;
    let mut cfg = job.defaults();
    for (k, v) in header.iter().filter(|(k, _)| !k.starts_with('@')) {
        cfg.set(k, &parse_value(v))?;
    }
    run_job(job, &cfg)
}

#[derive(Serialize, Deserialize)]
struct StateFile {
    dims: Vec<usize>,
    entries: Vec<[f64; 2]>,
}

/// State file: `{"dims": [...], "entries": [[re, im], ...]}`, row-major.
pub fn parse_state_file(text: &str) -> Result<DensityOperator> {
    let f: StateFile =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("state file: {e}")))?;
    let dim: usize = f.dims.iter().product();
    let entries: Vec<Complex64> = f
        .entries
        .iter()
        .map(|[re, im]| Complex64::new(*re, *im))
        .collect();
    DensityOperator::new(ComplexMatrix::from_row_major(dim, &entries)?, f.dims)
}

pub fn state_file_json(rho: &DensityOperator) -> String {
    let f = StateFile {
        dims: rho.dims().to_vec(),
        entries: rho
            .matrix()
            .row_major_entries()
            .iter()
            .map(|z| [z.re, z.im])
            .collect(),
    };
    serde_json::to_string(&f).expect("state file serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(job: Job) -> RunConfig {
        RunConfig {
            t_min: 0.01,
            t_max: 10.0,
            points_per_decade: 20,
            ..job.defaults()
        }
    }

    #[test]
    fn delta_width_forms() {
        assert_eq!(
            "10N".parse::<DeltaWidth>().unwrap(),
            DeltaWidth::PerMode(10.0)
        );
        assert_eq!("N".parse::<DeltaWidth>().unwrap(), DeltaWidth::PerMode(1.0));
        assert_eq!(
            "2.5*N".parse::<DeltaWidth>().unwrap(),
            DeltaWidth::PerMode(2.5)
        );
        assert_eq!(
            "100".parse::<DeltaWidth>().unwrap(),
            DeltaWidth::Absolute(100.0)
        );
        assert!("tenN".parse::<DeltaWidth>().is_err());
        assert_eq!(DeltaWidth::PerMode(10.0).resolve(10), 100.0);
        for d in [
            DeltaWidth::PerMode(1.0),
            DeltaWidth::PerMode(10.0),
            DeltaWidth::Absolute(7.5),
        ] {
            let mut c = RunConfig::default();
            c.set("deltaWidth", &parse_value(&d.to_string())).unwrap();
            assert_eq!(c.delta_width, d);
        }
    }

    #[test]
    fn config_layers() {
        let file = parse_config("N = 4\nbeta = 0.5\ndeltaWidth = \"N\"\nc3 = -0.5\n").unwrap();
        let cfg = resolve_config(
            Job::Fig1a,
            Some(&file),
            &["beta=2".into(), "deltaWidth=7".into()],
        )
        .unwrap();
        assert_eq!(cfg.modes, 4);
        assert_eq!(cfg.beta, 2.0);
        assert_eq!(cfg.delta_width, DeltaWidth::Absolute(7.0));
        assert_eq!(cfg.c, [-0.8, -0.8, -0.5]);
        assert!(parse_config("bogus = 1")
            .and_then(|t| RunConfig::default().apply(&t))
            .is_err());
        assert!(parse_config("[section]\nx = 1").is_err());
        assert!(RunConfig::default().set_from_str("N=-3").is_err());
        assert_eq!(
            Job::scenario("fig9"),
            Err(Error::UnknownScenario("fig9".into()))
        );
    }

    #[test]
    fn scenario_defaults() {
        let e = Job::Fig1e.defaults();
        assert_eq!((e.beta, e.bath().unwrap().delta_width), (0.1, 10.0));
        assert_eq!(Job::Fig1a.defaults().bath().unwrap().delta_width, 100.0);
        assert_eq!(Job::Fig1c.defaults().beta, 0.1);
        assert_eq!(Job::Fig2b.defaults().c, [-0.6, -0.6, -0.5]);
        assert_eq!(Job::Fig3.defaults().t, 1e6);
        for j in SCENARIOS {
            assert_eq!(Job::scenario(j.name()).unwrap(), j);
            assert_eq!(j.name().parse::<Job>().unwrap(), j);
        }
    }

    #[test]
    fn grids() {
        let g: Linspace = "0.05:5:60".parse().unwrap();
        let v = g.values();
        assert_eq!((v.len(), v[0], v[59]), (60, 0.05, 5.0));
        assert_eq!("1:60".parse::<ModeRange>().unwrap().values().len(), 60);
        assert!("0:3".parse::<ModeRange>().is_err());
        assert!("1:2".parse::<Linspace>().is_err());
    }

    #[test]
    fn dephase_artifact_shape() {
        let a = run_job(Job::Fig2b, &quick(Job::Fig2b)).unwrap();
        let data: Vec<&str> = a.text.lines().filter(|l| !l.starts_with('#')).collect();
        assert!(data[0].ends_with("conservationResidual,tD,tPB"));
        assert_eq!(data.len(), 1 + 61);
        let first: Vec<&str> = data[1].split(',').collect();
        assert_eq!(first.len(), 14);
        assert_eq!(first[0], "1.0000000000000000e-2");
        let h = read_header(&a.text).unwrap();
        assert_eq!(h["@job"], "fig2b");
        assert_eq!(h["c3"], "-0.5");
        assert_eq!(h["deltaWidth"], "\"N\"");
    }

    #[test]
    fn artifacts_round_trip_through_their_headers() {
        let mut jobs = vec![
            (Job::Fig1a, quick(Job::Fig1a)),
            (Job::Fig2a, quick(Job::Fig2a)),
            (
                Job::Dephase,
                RunConfig {
                    c: [0.3, -0.2, 0.1],
                    delta_width: DeltaWidth::Absolute(3.5),
                    ..quick(Job::Dephase)
                },
            ),
        ];
        jobs.push((
            Job::Nm,
            RunConfig {
                t: 50.0,
                ..Job::Nm.defaults()
            },
        ));
        jobs.push((
            Job::Fig3,
            RunConfig {
                beta_grid: "0.5:2:4".parse().unwrap(),
                modes_grid: "1:3".parse().unwrap(),
                ..Job::Fig3.defaults()
            },
        ));
        jobs.push((
            Job::Fig4,
            RunConfig {
                grid: 11,
                ..Job::Fig4.defaults()
            },
        ));
        jobs.push((
            Job::Appendix,
            RunConfig {
                grid: 5,
                ..Job::Appendix.defaults()
            },
        ));
        for (job, cfg) in jobs {
            let a = run_job(job, &cfg).unwrap();
            let b = run_job(job, &cfg).unwrap();
            assert_eq!(a.text, b.text, "{job:?} not deterministic");
            assert_eq!(
                rerun_from_header(&a.text).unwrap().text,
                a.text,
                "{job:?} header does not reproduce"
            );
        }
    }

    #[test]
    fn json_view_of_tables() {
        let a = run_job(
            Job::Appendix,
            &RunConfig {
                grid: 3,
                ..RunConfig::default()
            },
        )
        .unwrap();
        let j = a.clone().into_format(Format::Json).unwrap();
        let v: Value = serde_json::from_str(&j.text).unwrap();
        assert_eq!(v["columns"][0], "x");
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert_eq!(v["rows"][2][0].as_f64(), Some(1.0));
        assert_eq!(rerun_from_header(&j.text).unwrap().text, a.text);
        let nm = run_job(
            Job::Nm,
            &RunConfig {
                t: 10.0,
                ..RunConfig::default()
            },
        )
        .unwrap();
        assert!(nm.into_format(Format::Csv).is_err());
    }

    #[test]
    fn state_file_round_trip() {
        let rho = crate::linalg::random_state(&[2, 2, 2], crate::linalg::Purity::Mixed, 5).unwrap();
        let back = parse_state_file(&state_file_json(&rho)).unwrap();
        assert_eq!(back.matrix(), rho.matrix());
        assert_eq!(back.dims(), rho.dims());
        assert!(parse_state_file("{\"dims\":[2],\"entries\":[[1,0],[0,0],[0,0],[1,0]]}").is_err());
    }
}
