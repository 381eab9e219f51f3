//! Strict TOML configuration with per-scenario defaults.
//!
//! Parsing happens in two passes. Serde rejects unknown keys and malformed
//! values; then [`ScenarioConfig::validate`] checks ranges. Every issue
//! carries the dotted field path and, when it can be found, the line in the
//! source document.

use std::fmt;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::euclid::KernelMethod;
use crate::pathsum::DEFAULT_ENUMERATION_CAP;
use crate::state::{Boundary, GridSpec, PhysicsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FreePacket,
    Harmonic,
    TwoSlitAnalog,
    PathsumCheck,
    MeasuresReport,
    EuclidGround,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::FreePacket,
        ScenarioKind::Harmonic,
        ScenarioKind::TwoSlitAnalog,
        ScenarioKind::PathsumCheck,
        ScenarioKind::MeasuresReport,
        ScenarioKind::EuclidGround,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FreePacket => "free_packet",
            ScenarioKind::Harmonic => "harmonic",
            ScenarioKind::TwoSlitAnalog => "two_slit_analog",
            ScenarioKind::PathsumCheck => "pathsum_check",
            ScenarioKind::MeasuresReport => "measures_report",
            ScenarioKind::EuclidGround => "euclid_ground",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::FreePacket => "spreading free Gaussian: densities, Bohmian ensemble, time-slicing errors",
            ScenarioKind::Harmonic => "packet in a harmonic well: observables over one period and trajectories",
            ScenarioKind::TwoSlitAnalog => "two converging packets interfering, trajectories split by packet of origin",
            ScenarioKind::PathsumCheck => "exhaustive path sum against matrix evolution on a random finite instance",
            ScenarioKind::MeasuresReport => "positive-part and modulus path measures against the Born endpoint",
            ScenarioKind::EuclidGround => "imaginary-time iteration and ground-state energy",
        }
    }

    fn uses_grid(self) -> bool {
        !matches!(self, ScenarioKind::PathsumCheck | ScenarioKind::MeasuresReport)
    }

    fn uses_bohm(self) -> bool {
        matches!(self, ScenarioKind::FreePacket | ScenarioKind::Harmonic | ScenarioKind::TwoSlitAnalog)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub boundary: Boundary,
}

impl GridConfig {
    pub fn spec(&self) -> crate::Result<GridSpec> {
        GridSpec::new(self.x_min, self.x_max, self.n_points, self.boundary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub mass: f64,
}

fn one() -> f64 {
    1.0
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

impl PhysicsConfig {
    pub fn params(&self) -> crate::Result<PhysicsParams> {
        PhysicsParams::new(self.hbar, self.mass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Free,
    Harmonic { omega: f64, #[serde(default)] center: f64 },
}

/// Initial wave function. Momenta are `hbar k`; widths are the standard
/// deviation of `|psi|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Gaussian {
        center: f64,
        width: f64,
        #[serde(default)]
        momentum: f64,
    },
    TwoGaussians {
        centers: [f64; 2],
        widths: [f64; 2],
        momenta: [f64; 2],
        #[serde(default)]
        relative_phase: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionConfig {
    /// Spacing of emitted density frames.
    pub dt: f64,
    pub steps: usize,
    /// Slice counts for the time-sliced kernel comparison (free_packet only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slices: Vec<usize>,
}

impl EvolutionConfig {
    pub fn t_span(&self) -> f64 {
        self.dt * self.steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BohmConfig {
    pub count: usize,
    pub ode_dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// Trajectories written to the data table, spread evenly over the ensemble.
    #[serde(default = "default_recorded")]
    pub record_trajectories: usize,
}

fn default_recorded() -> usize {
    100
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsumConfig {
    pub space_size: usize,
    pub s: usize,
    #[serde(default = "default_cap")]
    pub cap: u64,
    #[serde(default)]
    pub seed: u64,
}

fn default_cap() -> u64 {
    DEFAULT_ENUMERATION_CAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasuresInstance {
    /// `[[1, 1], [1, -1]] / sqrt 2` acting on `exp(i phase) (1, 0)`.
    Hadamard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasuresConfig {
    pub instance: MeasuresInstance,
    pub s: usize,
    #[serde(default)]
    pub phase: f64,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EuclidConfig {
    pub dtau: f64,
    pub steps: usize,
    pub tol: f64,
    #[serde(default)]
    pub method: KernelMethod,
    /// Also build the split-operator kernel and report its distance to the exact one.
    #[serde(default)]
    pub trotter_check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableFormat {
    Csv,
    Tsv,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Tsv => "tsv",
        }
    }

    pub fn delimiter(self) -> u8 {
        match self {
            TableFormat::Csv => b',',
            TableFormat::Tsv => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<TableFormat>,
}

fn default_dir() -> String {
    "results".into()
}

fn default_formats() -> Vec<TableFormat> {
    vec![TableFormat::Csv]
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), formats: default_formats() }
    }
}

/// A fully resolved scenario description.
///
/// Sections the scenario needs are always `Some` after [`parse_config`];
/// sections it ignores keep whatever the document provided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub physics: PhysicsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bohm: Option<BohmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathsum: Option<PathsumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measures: Option<MeasuresConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub euclid: Option<EuclidConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

/// One problem found in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub issues: Vec<ConfigIssue>,
}

impl ConfigError {
    fn single(line: Option<usize>, field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { issues: vec![ConfigIssue { line, field: field.into(), message: message.into() }] }
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.issues.iter().any(|i| i.field == field)
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

impl ScenarioConfig {
    /// The documented default configuration of a scenario.
    pub fn defaults(kind: ScenarioKind) -> Self {
        let mut cfg = Self {
            scenario: kind,
            grid: None,
            physics: PhysicsConfig::default(),
            potential: None,
            initial_state: None,
            evolution: None,
            bohm: None,
            pathsum: None,
            measures: None,
            euclid: None,
            output: OutputConfig::default(),
        };
        cfg.fill_defaults();
        cfg
    }

    fn fill_defaults(&mut self) {
        use ScenarioKind::*;
        let kind = self.scenario;
        if kind.uses_grid() && self.grid.is_none() {
            self.grid = Some(match kind {
                FreePacket => GridConfig { x_min: -25.0, x_max: 25.0, n_points: 512, boundary: Boundary::Periodic },
                Harmonic => GridConfig { x_min: -10.0, x_max: 10.0, n_points: 256, boundary: Boundary::Periodic },
                TwoSlitAnalog => GridConfig { x_min: -16.0, x_max: 16.0, n_points: 512, boundary: Boundary::Dirichlet },
                _ => GridConfig { x_min: -8.0, x_max: 8.0, n_points: 128, boundary: Boundary::Dirichlet },
            });
        }
        if kind.uses_grid() && self.potential.is_none() {
            self.potential = Some(match kind {
                Harmonic | EuclidGround => PotentialConfig::Harmonic { omega: 1.0, center: 0.0 },
                _ => PotentialConfig::Free,
            });
        }
        if kind.uses_grid() && self.initial_state.is_none() {
            self.initial_state = Some(match kind {
                FreePacket => InitialState::Gaussian { center: -2.0, width: 1.0, momentum: 1.0 },
                Harmonic => InitialState::Gaussian { center: 2.0, width: FRAC_1_SQRT_2, momentum: 0.0 },
                TwoSlitAnalog => InitialState::TwoGaussians {
                    centers: [-8.0, 8.0],
                    widths: [1.0, 1.0],
                    momenta: [3.0, -3.0],
                    relative_phase: 0.0,
                },
                _ => InitialState::Gaussian { center: 1.0, width: 1.0, momentum: 0.0 },
            });
        }
        if kind.uses_bohm() && self.evolution.is_none() {
            self.evolution = Some(match kind {
                FreePacket => EvolutionConfig { dt: 0.05, steps: 70, slices: vec![16, 32] },
                Harmonic => EvolutionConfig { dt: TAU / 100.0, steps: 100, slices: Vec::new() },
                _ => EvolutionConfig { dt: 0.02, steps: 160, slices: Vec::new() },
            });
        }
        if kind.uses_bohm() && self.bohm.is_none() {
            self.bohm = Some(match kind {
                FreePacket => BohmConfig { count: 4000, ode_dt: 0.01, seed: 1, record_trajectories: 100 },
                Harmonic => BohmConfig { count: 2000, ode_dt: TAU / 400.0, seed: 1, record_trajectories: 100 },
                _ => BohmConfig { count: 2000, ode_dt: 0.005, seed: 1, record_trajectories: 100 },
            });
        }
        if kind == PathsumCheck && self.pathsum.is_none() {
            self.pathsum = Some(PathsumConfig { space_size: 3, s: 4, cap: DEFAULT_ENUMERATION_CAP, seed: 7 });
        }
        if kind == MeasuresReport && self.measures.is_none() {
            self.measures = Some(MeasuresConfig { instance: MeasuresInstance::Hadamard, s: 2, phase: 0.0, cap: DEFAULT_ENUMERATION_CAP });
        }
        if kind == EuclidGround && self.euclid.is_none() {
            self.euclid = Some(EuclidConfig { dtau: 0.05, steps: 1000, tol: 1e-9, method: KernelMethod::Eigen, trotter_check: true });
        }
    }

    /// The seed driving this scenario's randomness.
    pub fn seed(&self) -> Option<u64> {
        match self.scenario {
            ScenarioKind::PathsumCheck => self.pathsum.map(|p| p.seed),
            k if k.uses_bohm() => self.bohm.map(|b| b.seed),
            _ => None,
        }
    }

    /// Replaces the seed of every section that has one.
    pub fn set_seed(&mut self, seed: u64) {
        if let Some(b) = self.bohm.as_mut() {
            b.seed = seed;
        }
        if let Some(p) = self.pathsum.as_mut() {
            p.seed = seed;
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Range and consistency checks; issues carry dotted field names.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut bad = |field: &str, message: String| out.push(ConfigIssue { line: None, field: field.into(), message });
        let positive = |x: f64| x.is_finite() && x > 0.0;

        if let Some(g) = &self.grid {
            if !(g.x_min.is_finite() && g.x_max.is_finite()) {
                bad("grid.x_max", "grid bounds must be finite".into());
            } else if g.x_max <= g.x_min {
                bad("grid.x_max", format!("x_max ({}) must exceed x_min ({})", g.x_max, g.x_min));
            }
            if g.n_points < 3 {
                bad("grid.n_points", format!("need at least 3 points, got {}", g.n_points));
            }
        }
        if !positive(self.physics.hbar) {
            bad("physics.hbar", format!("must be positive, got {}", self.physics.hbar));
        }
        if !positive(self.physics.mass) {
            bad("physics.mass", format!("must be positive, got {}", self.physics.mass));
        }
        if let Some(PotentialConfig::Harmonic { omega, center }) = self.potential {
            if !positive(omega) {
                bad("potential.omega", format!("must be positive, got {omega}"));
            }
            if !center.is_finite() {
                bad("potential.center", "must be finite".into());
            }
        }
        if let Some(init) = &self.initial_state {
            let (centers, widths, momenta): (Vec<f64>, Vec<f64>, Vec<f64>) = match *init {
                InitialState::Gaussian { center, width, momentum } => (vec![center], vec![width], vec![momentum]),
                InitialState::TwoGaussians { centers, widths, momenta, relative_phase } => {
                    if !relative_phase.is_finite() {
                        bad("initial_state.relative_phase", "must be finite".into());
                    }
                    (centers.to_vec(), widths.to_vec(), momenta.to_vec())
                }
            };
            let plural = matches!(init, InitialState::TwoGaussians { .. });
            let name = |s: &str, p: &str| format!("initial_state.{}", if plural { p } else { s });
            for &w in &widths {
                if !positive(w) {
                    bad(&name("width", "widths"), format!("must be positive, got {w}"));
                }
            }
            for &p in &momenta {
                if !p.is_finite() {
                    bad(&name("momentum", "momenta"), "must be finite".into());
                }
            }
            if let Some(g) = &self.grid {
                for &c in &centers {
                    if !(c >= g.x_min && c <= g.x_max) {
                        bad(&name("center", "centers"), format!("{c} lies outside [{}, {}]", g.x_min, g.x_max));
                    }
                }
            }
        }
        if let Some(e) = &self.evolution {
            if !positive(e.dt) {
                bad("evolution.dt", format!("must be positive, got {}", e.dt));
            }
            if e.steps == 0 {
                bad("evolution.steps", "must be at least 1".into());
            }
            if e.slices.contains(&0) {
                bad("evolution.slices", "slice counts must be at least 1".into());
            }
            if !e.slices.is_empty() && self.scenario != ScenarioKind::FreePacket {
                bad("evolution.slices", "only used by free_packet".into());
            }
        }
        if let Some(b) = &self.bohm {
            if b.count == 0 {
                bad("bohm.count", "must be at least 1".into());
            }
            if !positive(b.ode_dt) {
                bad("bohm.ode_dt", format!("must be positive, got {}", b.ode_dt));
            } else if let Some(e) = &self.evolution {
                let ratio = e.dt / b.ode_dt;
                if positive(e.dt) && (ratio < 0.5 || (ratio - ratio.round()).abs() > 1e-9 * ratio) {
                    bad("bohm.ode_dt", format!("must divide evolution.dt ({}) into whole steps", e.dt));
                }
            }
        }
        if let Some(p) = &self.pathsum {
            if p.space_size == 0 {
                bad("pathsum.space_size", "must be at least 1".into());
            }
            if p.s == 0 {
                bad("pathsum.s", "must be at least 1".into());
            }
            if p.cap == 0 {
                bad("pathsum.cap", "must be at least 1".into());
            }
        }
        if let Some(m) = &self.measures {
            if m.s == 0 {
                bad("measures.s", "must be at least 1".into());
            }
            if !m.phase.is_finite() {
                bad("measures.phase", "must be finite".into());
            }
            if m.cap == 0 {
                bad("measures.cap", "must be at least 1".into());
            }
        }
        if let Some(e) = &self.euclid {
            if !positive(e.dtau) {
                bad("euclid.dtau", format!("must be positive, got {}", e.dtau));
            }
            if e.steps < 2 {
                bad("euclid.steps", "must be at least 2".into());
            }
            if !positive(e.tol) {
                bad("euclid.tol", format!("must be positive, got {}", e.tol));
            }
        }
        if self.output.formats.is_empty() {
            bad("output.formats", "at least one format is required".into());
        }
        if self.output.dir.is_empty() {
            bad("output.dir", "must not be empty".into());
        }
        out
    }
}

/// Parses, fills defaults and validates a configuration document.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start));
        ConfigError::single(line, field_hint(e.message()), e.message().trim().to_string())
    })?;
    cfg.fill_defaults();
    let mut issues = cfg.validate();
    if issues.is_empty() {
        return Ok(cfg);
    }
    for issue in &mut issues {
        issue.line = locate(text, &issue.field);
    }
    Err(ConfigError { issues })
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn field_hint(message: &str) -> String {
    // serde messages quote the offending key: "unknown field `foo`, expected ..."
    message.split('`').nth(1).map_or_else(|| "document".to_string(), str::to_string)
}

/// Line of `key` inside `[section]`, for a dotted `section.key` path.
fn locate(text: &str, field: &str) -> Option<usize> {
    let (section, key) = field.split_once('.').unwrap_or(("", field));
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            if current == section {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    header
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_gets_defaults() {
        let cfg = parse_config("scenario = \"free_packet\"\n").unwrap();
        assert_eq!(cfg, ScenarioConfig::defaults(ScenarioKind::FreePacket));
        assert!(cfg.grid.is_some() && cfg.bohm.is_some() && cfg.evolution.is_some());
        assert!(cfg.pathsum.is_none());
        assert_eq!(cfg.output.formats, vec![TableFormat::Csv]);
    }

    #[test]
    fn reversed_bounds_name_the_field() {
        let doc = "scenario = \"free_packet\"\n\n[grid]\nx_min = 5.0\nx_max = -5.0\nn_points = 64\nboundary = \"periodic\"\n";
        let err = parse_config(doc).unwrap_err();
        assert!(err.mentions("grid.x_max"));
        assert_eq!(err.issues[0].line, Some(5));
        assert!(err.to_string().contains("line 5: grid.x_max"));
    }

    #[test]
    fn unknown_keys_are_rejected_with_line() {
        let doc = "scenario = \"harmonic\"\n[physics]\nhbar = 1.0\nplanck = 2.0\n";
        let err = parse_config(doc).unwrap_err();
        assert_eq!(err.issues[0].field, "planck");
        assert_eq!(err.issues[0].line, Some(4));
        assert!(parse_config("scenario = \"harmonic\"\nextra = 1\n").is_err());
        assert!(parse_config("scenario = \"no_such\"\n").is_err());
    }

    #[test]
    fn every_default_round_trips() {
        for kind in ScenarioKind::ALL {
            let cfg = ScenarioConfig::defaults(kind);
            assert!(cfg.validate().is_empty(), "{kind}: {:?}", cfg.validate());
            let text = cfg.to_toml();
            assert_eq!(parse_config(&text).unwrap(), cfg, "{kind}\n{text}");
        }
    }

    #[test]
    fn explicit_document_round_trips() {
        let doc = r#"
scenario = "two_slit_analog"

[grid]
x_min = -10.0
x_max = 10.0
n_points = 200
boundary = "dirichlet"

[initial_state]
kind = "two_gaussians"
centers = [-4.0, 4.0]
widths = [0.8, 0.8]
momenta = [2.0, -2.0]
relative_phase = 0.5

[evolution]
dt = 0.1
steps = 20

[bohm]
count = 50
ode_dt = 0.01
seed = 3

[output]
dir = "elsewhere"
formats = ["csv", "tsv"]
"#;
        let cfg = parse_config(doc).unwrap();
        assert_eq!(cfg.bohm.unwrap().record_trajectories, 100);
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn ode_step_must_divide_frame_step() {
        let doc = "scenario = \"free_packet\"\n[evolution]\ndt = 0.05\nsteps = 10\n[bohm]\ncount = 10\node_dt = 0.03\n";
        let err = parse_config(doc).unwrap_err();
        assert!(err.mentions("bohm.ode_dt"));
        assert_eq!(err.issues[0].line, Some(7));
    }

    #[test]
    fn several_issues_are_collected() {
        let doc = "scenario = \"euclid_ground\"\n[physics]\nmass = -1.0\n[euclid]\ndtau = 0.0\nsteps = 1\ntol = 1e-9\n";
        let err = parse_config(doc).unwrap_err();
        for f in ["physics.mass", "euclid.dtau", "euclid.steps"] {
            assert!(err.mentions(f), "{err}");
        }
    }

    #[test]
    fn seed_override_reaches_sections() {
        let mut cfg = ScenarioConfig::defaults(ScenarioKind::PathsumCheck);
        cfg.set_seed(99);
        assert_eq!(cfg.seed(), Some(99));
        assert_eq!(ScenarioConfig::defaults(ScenarioKind::MeasuresReport).seed(), None);
    }
}
