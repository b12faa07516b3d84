//! Scenario configuration: TOML text with `scenario` plus the sections
//! `[schedule]`, `[noise]`, `[simulation]`, `[output]` and `[calibration]`.
//! Every key is optional in the text; presets fill the gaps.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::basis_index;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig1,
    Chevron,
    Fig3,
    Fig3a,
    Fig3b,
    Fig4,
    Table1,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::Fig1,
        Scenario::Chevron,
        Scenario::Fig3,
        Scenario::Fig3a,
        Scenario::Fig3b,
        Scenario::Fig4,
        Scenario::Table1,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Chevron => "chevron",
            Scenario::Fig3 => "fig3",
            Scenario::Fig3a => "fig3a",
            Scenario::Fig3b => "fig3b",
            Scenario::Fig4 => "fig4",
            Scenario::Table1 => "table1",
            Scenario::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Scenario::Fig1 => "chirped single-qubit drives seen in the constant and the chirp-following frame",
            Scenario::Chevron => "chevron maps, generalized-Rabi fits and coupler polynomial refits",
            Scenario::Fig3 => "uncoupled and coupled passage (j = 0 and j = 1.7 MHz) with correlator traces",
            Scenario::Fig3a => "uncoupled passage, j = 0",
            Scenario::Fig3b => "coupled passage, j = 1.7 MHz",
            Scenario::Fig4 => "t_ad sweep 5/10/20/30 us with crossing report",
            Scenario::Table1 => "t_ad sweep with zero-time extrapolation of E00 and E11",
            Scenario::Custom => "user-specified schedule",
        }
    }

    /// Runs the time-dependent two-qubit protocol.
    pub fn is_protocol(self) -> bool {
        !matches!(self, Scenario::Fig1 | Scenario::Chevron)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s.trim())
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ramp {
    Linear,
    Calibrated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub z1: f64,
    pub z2: f64,
    pub x1: f64,
    pub x2: f64,
    pub j: f64,
    pub zz: f64,
    pub t_ad: Vec<f64>,
    pub ramp: Ramp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub t1_us: [f64; 2],
    pub t2_us: [f64; 2],
    pub nth: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub dt_us: f64,
    pub n_samples: usize,
    /// Shots per tomography setting; 0 gives exact expectation values.
    pub shots: u32,
    pub seed: u64,
    pub n_grid: usize,
    pub initial_states: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: String,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub b1: f64,
    pub b3: f64,
    /// Coupler amplitude reached at the end of a calibrated ramp.
    pub final_amplitude: f64,
    pub c2: [f64; 2],
    pub c4: [f64; 2],
    pub f_idle: [f64; 2],
    pub amplitudes: Vec<f64>,
    /// Chevron detuning axis spans `[-detuning_span, detuning_span]` MHz.
    pub detuning_span: f64,
    pub t_max_us: f64,
    pub n_detuning: usize,
    pub n_time: usize,
}

/// Fully defaulted configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub schedule: ScheduleConfig,
    pub noise: NoiseConfig,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
    pub calibration: CalibrationConfig,
}

impl ScenarioConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    /// Malformed TOML or a value of the wrong type; the message carries the
    /// line and column.
    Parse(String),
    Invalid(Vec<Violation>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(m) => write!(f, "config parse error: {m}"),
            ConfigError::Invalid(v) => {
                writeln!(f, "config has {} violation(s):", v.len())?;
                for x in v {
                    writeln!(f, "  {x}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum PerQubit {
    Both(f64),
    Each([f64; 2]),
}

impl PerQubit {
    fn pair(self) -> [f64; 2] {
        match self {
            PerQubit::Both(v) => [v, v],
            PerQubit::Each(p) => p,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    schedule: Option<RawSchedule>,
    noise: Option<RawNoise>,
    simulation: Option<RawSimulation>,
    output: Option<RawOutput>,
    calibration: Option<RawCalibration>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    z1: Option<f64>,
    z2: Option<f64>,
    x1: Option<f64>,
    x2: Option<f64>,
    j: Option<f64>,
    zz: Option<f64>,
    t_ad: Option<TadValue>,
    ramp: Option<Ramp>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum TadValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    enabled: Option<bool>,
    t1_us: Option<PerQubit>,
    t2_us: Option<PerQubit>,
    nth: Option<PerQubit>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    dt_us: Option<f64>,
    n_samples: Option<i64>,
    shots: Option<i64>,
    seed: Option<i64>,
    n_grid: Option<i64>,
    initial_states: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    format: Option<Format>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    b1: Option<f64>,
    b3: Option<f64>,
    final_amplitude: Option<f64>,
    c2: Option<PerQubit>,
    c4: Option<PerQubit>,
    f_idle: Option<PerQubit>,
    amplitudes: Option<Vec<f64>>,
    detuning_span: Option<f64>,
    t_max_us: Option<f64>,
    n_detuning: Option<i64>,
    n_time: Option<i64>,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub scenario: Option<Scenario>,
    pub seed: Option<u64>,
    pub out_dir: Option<String>,
}

pub const DEFAULT_DT_US: f64 = crate::dynamics::DEFAULT_DT_US;

fn preset_schedule(scenario: Scenario) -> Option<ScheduleConfig> {
    let fig3 = |j| ScheduleConfig {
        z1: 2.5,
        z2: 1.5,
        x1: 2.0,
        x2: 4.1,
        j,
        zz: 0.2,
        t_ad: vec![10.0],
        ramp: Ramp::Linear,
    };
    let fig4 = ScheduleConfig {
        z1: 2.5,
        z2: 1.5,
        x1: 1.0,
        x2: 7.3,
        j: 1.3,
        zz: 0.2,
        t_ad: vec![5.0, 10.0, 20.0, 30.0],
        ramp: Ramp::Linear,
    };
    match scenario {
        Scenario::Fig1 => Some(ScheduleConfig {
            z1: 3.0,
            z2: 3.0,
            x1: 2.7,
            x2: 2.7,
            j: 0.0,
            zz: 0.0,
            t_ad: vec![10.0],
            ramp: Ramp::Linear,
        }),
        Scenario::Chevron => Some(ScheduleConfig { t_ad: vec![10.0], ..fig3(0.0) }),
        Scenario::Fig3 | Scenario::Fig3b => Some(fig3(1.7)),
        Scenario::Fig3a => Some(fig3(0.0)),
        Scenario::Fig4 | Scenario::Table1 => Some(fig4),
        Scenario::Custom => None,
    }
}

fn default_states(scenario: Scenario) -> Vec<String> {
    let v: &[&str] = match scenario {
        Scenario::Fig1 => &["11"],
        Scenario::Table1 => &["00", "11"],
        Scenario::Fig3a | Scenario::Fig3b | Scenario::Fig3 => &["01", "00", "10", "11"],
        _ => &["00", "01", "10", "11"],
    };
    v.iter().map(|s| s.to_string()).collect()
}

fn default_calibration() -> CalibrationConfig {
    CalibrationConfig {
        b1: 1.6,
        b3: 1.2,
        final_amplitude: 0.8,
        c2: [-40.0, -25.0],
        c4: [-10.0, -6.0],
        f_idle: [6163.0, 5066.0],
        amplitudes: vec![0.3, 0.45, 0.6, 0.75, 0.9],
        detuning_span: 8.0,
        t_max_us: 4.0,
        n_detuning: 33,
        n_time: 400,
    }
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { field: field.into(), message: message.into() });
    }

    fn finite(&mut self, field: &str, v: f64) {
        if !v.is_finite() {
            self.push(field, format!("must be finite, got {v}"));
        }
    }

    fn positive(&mut self, field: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.push(field, format!("must be positive and finite, got {v}"));
        }
    }

    fn count(&mut self, field: &str, v: Option<i64>, default: usize, min: i64) -> usize {
        match v {
            None => default,
            Some(n) if n >= min => n as usize,
            Some(n) => {
                self.push(field, format!("must be at least {min}, got {n}"));
                default
            }
        }
    }
}

/// Parse, default and validate configuration text.
pub fn validate_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    validate_config_with(text, &Overrides::default())
}

pub fn validate_config_with(text: &str, overrides: &Overrides) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string().trim().to_string()))?;
    let mut ck = Checker { violations: Vec::new() };

    let scenario = match (overrides.scenario, raw.scenario.as_deref()) {
        (Some(s), _) => Some(s),
        (None, Some(name)) => match name.parse::<Scenario>() {
            Ok(s) => Some(s),
            Err(e) => {
                ck.push("scenario", format!("{e}; expected one of {}", names()));
                None
            }
        },
        (None, None) => {
            ck.push("scenario", format!("missing required field (one of {})", names()));
            None
        }
    };
    let Some(scenario) = scenario else {
        return Err(ConfigError::Invalid(ck.violations));
    };

    let schedule = build_schedule(scenario, raw.schedule.unwrap_or_default(), &mut ck);
    let noise = build_noise(scenario, raw.noise.unwrap_or_default(), &mut ck);
    let simulation = build_simulation(scenario, raw.simulation.unwrap_or_default(), overrides, &schedule, &mut ck);
    let raw_out = raw.output.unwrap_or_default();
    let output = OutputConfig {
        dir: overrides.out_dir.clone().or(raw_out.dir).unwrap_or_else(|| format!("out/{scenario}")),
        format: raw_out.format.unwrap_or(Format::Csv),
    };
    if output.dir.trim().is_empty() {
        ck.push("output.dir", "must not be empty");
    }
    let calibration = build_calibration(raw.calibration.unwrap_or_default(), &mut ck);

    if scenario == Scenario::Table1 {
        let mut t = schedule.t_ad.clone();
        t.sort_by(f64::total_cmp);
        t.dedup();
        if t.len() < 3 {
            ck.push("schedule.t_ad", "table1 extrapolation needs at least three distinct values");
        }
    }

    if ck.violations.is_empty() {
        Ok(ScenarioConfig { scenario, schedule, noise, simulation, output, calibration })
    } else {
        Err(ConfigError::Invalid(ck.violations))
    }
}

fn names() -> String {
    Scenario::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}

fn build_schedule(scenario: Scenario, raw: RawSchedule, ck: &mut Checker) -> ScheduleConfig {
    let preset = preset_schedule(scenario);
    let mut pick = |name: &str, v: Option<f64>, fallback: Option<f64>| -> f64 {
        match v.or(fallback) {
            Some(x) => {
                ck.finite(&format!("schedule.{name}"), x);
                x
            }
            None => {
                ck.push(format!("schedule.{name}"), "missing required field for the custom scenario");
                0.0
            }
        }
    };
    let p = preset.as_ref();
    let z1 = pick("z1", raw.z1, p.map(|s| s.z1));
    let z2 = pick("z2", raw.z2, p.map(|s| s.z2));
    let x1 = pick("x1", raw.x1, p.map(|s| s.x1));
    let x2 = pick("x2", raw.x2, p.map(|s| s.x2));
    let j = pick("j", raw.j, p.map(|s| s.j));
    let zz = pick("zz", raw.zz, Some(p.map_or(0.0, |s| s.zz)));

    let t_ad = match (raw.t_ad, p) {
        (Some(TadValue::One(t)), _) => vec![t],
        (Some(TadValue::Many(v)), _) => {
            if v.is_empty() {
                ck.push("schedule.t_ad", "must not be empty");
            }
            v
        }
        (None, Some(s)) => s.t_ad.clone(),
        (None, None) => {
            ck.push("schedule.t_ad", "missing required field for the custom scenario");
            vec![]
        }
    };
    for (i, &t) in t_ad.iter().enumerate() {
        if !(t > 0.0 && t.is_finite()) {
            ck.push(format!("schedule.t_ad[{i}]"), format!("must be positive and finite, got {t}"));
        }
    }
    ScheduleConfig { z1, z2, x1, x2, j, zz, t_ad, ramp: raw.ramp.unwrap_or(Ramp::Linear) }
}

fn build_noise(scenario: Scenario, raw: RawNoise, ck: &mut Checker) -> NoiseConfig {
    let enabled_default = matches!(
        scenario,
        Scenario::Fig3 | Scenario::Fig3a | Scenario::Fig3b | Scenario::Fig4 | Scenario::Table1
    );
    let n = NoiseConfig {
        enabled: raw.enabled.unwrap_or(enabled_default),
        t1_us: raw.t1_us.map_or([50.0; 2], PerQubit::pair),
        t2_us: raw.t2_us.map_or([40.0; 2], PerQubit::pair),
        nth: raw.nth.map_or([0.01; 2], PerQubit::pair),
    };
    for q in 0..2 {
        ck.positive(&format!("noise.t1_us[{q}]"), n.t1_us[q]);
        ck.positive(&format!("noise.t2_us[{q}]"), n.t2_us[q]);
        if n.t2_us[q] > 2.0 * n.t1_us[q] {
            ck.push(format!("noise.t2_us[{q}]"), format!("T2 = {} exceeds 2*T1 = {}", n.t2_us[q], 2.0 * n.t1_us[q]));
        }
        if !(n.nth[q] >= 0.0 && n.nth[q].is_finite()) {
            ck.push(format!("noise.nth[{q}]"), format!("must be non-negative, got {}", n.nth[q]));
        }
    }
    n
}

fn build_simulation(
    scenario: Scenario,
    raw: RawSimulation,
    overrides: &Overrides,
    schedule: &ScheduleConfig,
    ck: &mut Checker,
) -> SimulationConfig {
    let dt_us = raw.dt_us.unwrap_or(DEFAULT_DT_US);
    ck.positive("simulation.dt_us", dt_us);
    let t_min = schedule.t_ad.iter().cloned().filter(|t| *t > 0.0).fold(f64::INFINITY, f64::min);
    if t_min.is_finite() && dt_us >= t_min / 100.0 {
        ck.push("simulation.dt_us", format!("dt too large: {dt_us} us must be below min(t_ad)/100 = {} us", t_min / 100.0));
    }
    let n_samples = ck.count("simulation.n_samples", raw.n_samples, 200, 1);
    let n_grid = ck.count("simulation.n_grid", raw.n_grid, crate::analysis::DEFAULT_GRID, 3);
    let shots = match raw.shots {
        None => 0,
        Some(s) if (0..=u32::MAX as i64).contains(&s) => s as u32,
        Some(s) => {
            ck.push("simulation.shots", format!("must be between 0 and {}, got {s}", u32::MAX));
            0
        }
    };
    let seed = match (overrides.seed, raw.seed) {
        (Some(s), _) if s <= i64::MAX as u64 => s,
        (Some(s), _) => {
            ck.push("simulation.seed", format!("must not exceed {}, got {s}", i64::MAX));
            0
        }
        (None, Some(s)) if s >= 0 => s as u64,
        (None, Some(s)) => {
            ck.push("simulation.seed", format!("must be non-negative, got {s}"));
            0
        }
        (None, None) => 0,
    };
    let initial_states = raw.initial_states.unwrap_or_else(|| default_states(scenario));
    if initial_states.is_empty() {
        ck.push("simulation.initial_states", "must not be empty");
    }
    for (i, s) in initial_states.iter().enumerate() {
        if basis_index(s).is_err() {
            ck.push(format!("simulation.initial_states[{i}]"), format!("unknown basis state {s:?}; use 00, 01, 10 or 11"));
        }
    }
    SimulationConfig { dt_us, n_samples, shots, seed, n_grid, initial_states }
}

fn build_calibration(raw: RawCalibration, ck: &mut Checker) -> CalibrationConfig {
    let d = default_calibration();
    let c = CalibrationConfig {
        b1: raw.b1.unwrap_or(d.b1),
        b3: raw.b3.unwrap_or(d.b3),
        final_amplitude: raw.final_amplitude.unwrap_or(d.final_amplitude),
        c2: raw.c2.map_or(d.c2, PerQubit::pair),
        c4: raw.c4.map_or(d.c4, PerQubit::pair),
        f_idle: raw.f_idle.map_or(d.f_idle, PerQubit::pair),
        amplitudes: raw.amplitudes.unwrap_or(d.amplitudes),
        detuning_span: raw.detuning_span.unwrap_or(d.detuning_span),
        t_max_us: raw.t_max_us.unwrap_or(d.t_max_us),
        n_detuning: ck.count("calibration.n_detuning", raw.n_detuning, d.n_detuning, 3),
        n_time: ck.count("calibration.n_time", raw.n_time, d.n_time, 8),
    };
    for (name, v) in [("b1", c.b1), ("b3", c.b3), ("final_amplitude", c.final_amplitude)] {
        ck.finite(&format!("calibration.{name}"), v);
    }
    for q in 0..2 {
        ck.finite(&format!("calibration.c2[{q}]"), c.c2[q]);
        ck.finite(&format!("calibration.c4[{q}]"), c.c4[q]);
        ck.finite(&format!("calibration.f_idle[{q}]"), c.f_idle[q]);
    }
    ck.positive("calibration.detuning_span", c.detuning_span);
    ck.positive("calibration.t_max_us", c.t_max_us);
    for (i, &a) in c.amplitudes.iter().enumerate() {
        if !(a > 0.0 && a.is_finite()) {
            ck.push(format!("calibration.amplitudes[{i}]"), format!("must be positive, got {a}"));
        }
    }
    c
}
