//! Experiment configuration in TOML.
//!
//! One file describes one experiment. Sections and defaults:
//!
//! ```toml
//! seed = 0                       # default 0
//!
//! [grid]                         # required
//! dim = 1
//! n = 16
//! steps = 64
//! horizon = 0.6
//!
//! [material]                     # default: kind = "constant", value = 1.0
//! kind = "linear"                # rho = base + slope * x0
//! base = 1.0
//! slope = 0.2
//!
//! [dictionary]                   # required: a preset or explicit entries
//! preset = "quadratic_slabs"     # quadratic_slabs | mixed_slabs | stability | stability_nonquadratic
//!
//! # [[dictionary.entries]]
//! # energy = { family = "saturating", a = 1.0, eps = 0.5 }
//! # weight = { kind = "constant", value = 1.0 }   # default
//! # bounds = { kappa = [..2], mu = [..8] }         # default: certified
//!
//! [coefficients]                 # required
//! alpha = [1.0, 1.5, 0.8]
//! alpha0 = [1.0, 1.0, 1.0]       # optional, inversion start (default alpha)
//! # thresholds = { kappa = [..2], mu = [..7] }
//!
//! [initial]                      # default: both zero
//! displacement = { preset = "sine_modes", amplitude = 1.0 }
//! velocity = { preset = "scaled_displacement", factor = -0.5 }
//!
//! [force]                        # default: preset = "zero"
//! preset = "pulse"
//! amplitude = 5.0
//! centre = 0.7
//!
//! [solver]
//! cfl_safety = 0.5               # default
//! adjoint = "discrete"           # default
//!
//! [inversion]                    # see InversionConfig; all optional
//! [verify]                       # all optional
//! [output]
//! plots = true                   # default
//! ```
//!
//! Loading checks types and ranges and that referenced files exist, and
//! reports every problem found. It does not check the CFL condition: that
//! depends on the coefficients in use and is enforced by the solvers.
//! File paths are relative to the config file.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adjoint::AdjointMethod;
use crate::dictionary::{AdmissibilityThresholds, BoundConstants, CoefficientVector, EnergyDictionary, EnergyEntry, EnergyFamily, SpatialWeight};
use crate::error::{ConfigIssue, Error, Result};
use crate::forward::{ProblemSetup, CFL_SAFETY};
use crate::grid::{Grid, MaterialField, SpaceTimeField};
use crate::inversion::InversionConfig;
use crate::scenarios;
use crate::verify::{DEFAULT_LIPSCHITZ_STEPS, DEFAULT_TAYLOR_STEPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub n: usize,
    pub steps: usize,
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DensityConfig {
    Constant { value: f64 },
    /// `rho = base + slope * x0`.
    Linear { base: f64, slope: f64 },
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionaryPreset {
    QuadraticSlabs,
    MixedSlabs,
    Stability,
    StabilityNonquadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryConfig {
    pub energy: EnergyFamily,
    #[serde(default)]
    pub weight: SpatialWeight,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundConstants>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DictionaryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<DictionaryPreset>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub entries: Vec<EntryConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientsConfig {
    pub alpha: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<AdmissibilityThresholds>,
}

/// Spatial initial data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum NodeData {
    #[default]
    Zero,
    /// First two sine modes per axis, see [`scenarios::smooth_displacement`].
    SineModes { amplitude: f64 },
    /// `amplitude * prod sin(pi x_a)` in the first component.
    StandingWave { amplitude: f64 },
    /// `factor` times the initial displacement; velocity only.
    ScaledDisplacement { factor: f64 },
    /// CSV, one row per interior node, one column per component.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default)]
    pub displacement: NodeData,
    #[serde(default)]
    pub velocity: NodeData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForceConfig {
    #[default]
    Zero,
    /// See [`scenarios::pulse_force`].
    Pulse { amplitude: f64, centre: f64 },
    /// Field binary on the experiment grid.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub adjoint: AdjointMethod,
}

fn default_cfl() -> f64 {
    CFL_SAFETY
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl_safety: CFL_SAFETY,
            adjoint: AdjointMethod::Discrete,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Taylor and Gronwall direction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Vec<f64>>,
    #[serde(default = "default_taylor_steps")]
    pub taylor_steps: Vec<f64>,
    #[serde(default = "default_lipschitz_steps")]
    pub lipschitz_steps: Vec<f64>,
    /// Random pairs for the adjoint certificate.
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Random directions for the Lipschitz test.
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_taylor_steps() -> Vec<f64> {
    DEFAULT_TAYLOR_STEPS.to_vec()
}
fn default_lipschitz_steps() -> Vec<f64> {
    DEFAULT_LIPSCHITZ_STEPS.to_vec()
}
fn default_trials() -> usize {
    20
}
fn default_directions() -> usize {
    3
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            direction: None,
            taylor_steps: default_taylor_steps(),
            lipschitz_steps: default_lipschitz_steps(),
            trials: default_trials(),
            directions: default_directions(),
        }
    }
}

impl VerifyConfig {
    /// Configured direction or `h_K = (-1)^K (0.5 + 0.1 K)`.
    pub fn direction_or_default(&self, len: usize) -> Vec<f64> {
        self.direction.clone().unwrap_or_else(|| {
            (0..len)
                .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * (0.5 + 0.1 * k as f64))
                .collect()
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_plots")]
    pub plots: bool,
}

fn default_plots() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { plots: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub grid: GridConfig,
    #[serde(default)]
    pub material: DensityConfig,
    pub dictionary: DictionaryConfig,
    pub coefficients: CoefficientsConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub force: ForceConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub inversion: InversionConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative file paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

const SECTIONS: [&str; 11] = [
    "seed",
    "grid",
    "material",
    "dictionary",
    "coefficients",
    "initial",
    "force",
    "solver",
    "inversion",
    "verify",
    "output",
];

struct Issues(Vec<ConfigIssue>);

impl Issues {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(ConfigIssue {
            path: path.into(),
            message: message.into(),
        });
    }

    fn check(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.push(path, message);
        }
    }
}

fn section<T: DeserializeOwned>(table: &toml::Table, key: &str, issues: &mut Issues) -> Option<T> {
    let value = table.get(key)?;
    match value.clone().try_into::<T>() {
        Ok(v) => Some(v),
        Err(e) => {
            issues.push(key, e.message().trim().to_string());
            None
        }
    }
}

fn required<T: DeserializeOwned>(table: &toml::Table, key: &str, issues: &mut Issues) -> Option<T> {
    if !table.contains_key(key) {
        issues.push(key, "missing required section");
        return None;
    }
    section(table, key, issues)
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| {
        Error::Config(vec![ConfigIssue {
            path: path.display().to_string(),
            message: e.to_string(),
        }])
    })?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_config(&text, &base)
}

/// Parses and validates config text; relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ExperimentConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Config(vec![ConfigIssue {
            path: "<document>".into(),
            message: e.message().trim().to_string(),
        }])
    })?;
    let mut issues = Issues(Vec::new());
    for key in table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            issues.push(key.clone(), "unknown key");
        }
    }
    let seed = section::<u64>(&table, "seed", &mut issues);
    let grid = required::<GridConfig>(&table, "grid", &mut issues);
    let material = section::<DensityConfig>(&table, "material", &mut issues);
    let dictionary = read_dictionary(&table, &mut issues);
    let coefficients = required::<CoefficientsConfig>(&table, "coefficients", &mut issues);
    let initial = section::<InitialConfig>(&table, "initial", &mut issues);
    let force = section::<ForceConfig>(&table, "force", &mut issues);
    let solver = section::<SolverConfig>(&table, "solver", &mut issues);
    let inversion = section::<InversionConfig>(&table, "inversion", &mut issues);
    let verify = section::<VerifyConfig>(&table, "verify", &mut issues);
    let output = section::<OutputConfig>(&table, "output", &mut issues);

    let parse_failed = !issues.0.is_empty();
    let (Some(grid), Some(dictionary), Some(coefficients)) = (grid, dictionary, coefficients) else {
        return Err(Error::Config(issues.0));
    };
    let config = ExperimentConfig {
        seed: seed.unwrap_or_default(),
        grid,
        material: material.unwrap_or_default(),
        dictionary,
        coefficients,
        initial: initial.unwrap_or_default(),
        force: force.unwrap_or_default(),
        solver: solver.unwrap_or_default(),
        inversion: inversion.unwrap_or_default(),
        verify: verify.unwrap_or_default(),
        output: output.unwrap_or_default(),
        base_dir: base_dir.to_path_buf(),
    };
    config.validate_into(&mut issues);
    if parse_failed || !issues.0.is_empty() {
        return Err(Error::Config(issues.0));
    }
    Ok(config)
}

fn read_dictionary(table: &toml::Table, issues: &mut Issues) -> Option<DictionaryConfig> {
    let Some(value) = table.get("dictionary") else {
        issues.push("dictionary", "missing required section");
        return None;
    };
    let Some(t) = value.as_table() else {
        issues.push("dictionary", "expected a table");
        return None;
    };
    let mut out = DictionaryConfig::default();
    let mut ok = true;
    for key in t.keys() {
        if key != "preset" && key != "entries" {
            issues.push(format!("dictionary.{key}"), "unknown key");
            ok = false;
        }
    }
    if let Some(p) = t.get("preset") {
        match p.clone().try_into::<DictionaryPreset>() {
            Ok(p) => out.preset = Some(p),
            Err(e) => {
                issues.push("dictionary.preset", e.message().trim().to_string());
                ok = false;
            }
        }
    }
    if let Some(entries) = t.get("entries") {
        match entries.as_array() {
            Some(arr) => {
                for (i, e) in arr.iter().enumerate() {
                    match e.clone().try_into::<EntryConfig>() {
                        Ok(e) => out.entries.push(e),
                        Err(err) => {
                            issues.push(format!("dictionary.entries[{i}]"), err.message().trim().to_string());
                            ok = false;
                        }
                    }
                }
            }
            None => {
                issues.push("dictionary.entries", "expected an array of tables");
                ok = false;
            }
        }
    }
    ok.then_some(out)
}

/// Writes the config as TOML.
pub fn save_config(path: impl AsRef<Path>, config: &ExperimentConfig) -> Result<()> {
    fs::write(path, config_to_string(config)?)?;
    Ok(())
}

pub fn config_to_string(config: &ExperimentConfig) -> Result<String> {
    // TOML integers are signed 64-bit
    if config.seed > i64::MAX as u64 {
        return Err(Error::invalid(format!("seed {} does not fit a TOML integer", config.seed)));
    }
    toml::to_string(config).map_err(|e| Error::invalid(format!("cannot serialize config: {e}")))
}

impl ExperimentConfig {
    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut issues = Issues(Vec::new());
        self.validate_into(&mut issues);
        if issues.0.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues.0))
        }
    }

    fn validate_into(&self, issues: &mut Issues) {
        let g = &self.grid;
        issues.check((1..=3).contains(&g.dim), "grid.dim", format!("must be 1, 2 or 3, got {}", g.dim));
        issues.check(g.n >= 2, "grid.n", format!("must be at least 2, got {}", g.n));
        issues.check(g.steps >= 2, "grid.steps", format!("must be at least 2, got {}", g.steps));
        issues.check(
            g.horizon.is_finite() && g.horizon > 0.0,
            "grid.horizon",
            format!("must be positive, got {}", g.horizon),
        );
        match self.material {
            DensityConfig::Constant { value } => {
                issues.check(value.is_finite() && value > 0.0, "material.value", "density must be positive")
            }
            DensityConfig::Linear { base, slope } => issues.check(
                base.is_finite() && slope.is_finite() && base > 0.0 && base + slope > 0.0,
                "material",
                "linear density must stay positive on [0, 1]",
            ),
        }

        let dim = g.dim.clamp(1, 3);
        let dict_len = match self.build_dictionary_with(dim) {
            Ok(d) => Some(d.len()),
            Err(list) => {
                issues.0.extend(list);
                None
            }
        };

        let check_vec = |issues: &mut Issues, v: &[f64], path: &str| {
            if let Some(n) = dict_len {
                issues.check(v.len() == n, path, format!("expected {n} values, got {}", v.len()));
            }
            for (i, x) in v.iter().enumerate() {
                issues.check(x.is_finite() && *x > 0.0, format!("{path}[{i}]"), format!("must be positive, got {x}"));
            }
        };
        check_vec(issues, &self.coefficients.alpha, "coefficients.alpha");
        if let Some(a0) = &self.coefficients.alpha0 {
            check_vec(issues, a0, "coefficients.alpha0");
        }
        if let Some(t) = &self.coefficients.thresholds {
            if let Err(m) = t.validate() {
                issues.push("coefficients.thresholds", m);
            }
        }

        self.validate_node_data(&self.initial.displacement, "initial.displacement", false, issues);
        self.validate_node_data(&self.initial.velocity, "initial.velocity", true, issues);
        match &self.force {
            ForceConfig::Zero => {}
            ForceConfig::Pulse { amplitude, centre } => {
                issues.check(amplitude.is_finite(), "force.amplitude", "must be finite");
                issues.check((0.0..=1.0).contains(centre), "force.centre", "must lie in [0, 1]");
            }
            ForceConfig::File { path } => {
                issues.check(self.resolve(path).is_file(), "force.path", format!("file {} not found", path.display()))
            }
        }
        issues.check(
            self.solver.cfl_safety.is_finite() && self.solver.cfl_safety > 0.0,
            "solver.cfl_safety",
            "must be positive",
        );
        if let Err(e) = self.inversion.validate() {
            issues.push("inversion", e.to_string());
        }
        let v = &self.verify;
        for (name, steps) in [("verify.taylor_steps", &v.taylor_steps), ("verify.lipschitz_steps", &v.lipschitz_steps)] {
            issues.check(steps.len() >= 2, name, "need at least two values");
            issues.check(steps.iter().all(|s| s.is_finite() && *s > 0.0), name, "values must be positive");
        }
        issues.check(v.trials >= 1, "verify.trials", "must be at least 1");
        issues.check(v.directions >= 1, "verify.directions", "must be at least 1");
        if let (Some(h), Some(n)) = (&v.direction, dict_len) {
            issues.check(h.len() == n, "verify.direction", format!("expected {n} values, got {}", h.len()));
        }
    }

    fn validate_node_data(&self, data: &NodeData, path: &str, velocity: bool, issues: &mut Issues) {
        match data {
            NodeData::Zero => {}
            NodeData::SineModes { amplitude } | NodeData::StandingWave { amplitude } => {
                issues.check(amplitude.is_finite(), format!("{path}.amplitude"), "must be finite")
            }
            NodeData::ScaledDisplacement { factor } => {
                issues.check(velocity, format!("{path}.preset"), "scaled_displacement is only valid for the velocity");
                issues.check(factor.is_finite(), format!("{path}.factor"), "must be finite");
            }
            NodeData::File { path: p } => issues.check(
                self.resolve(p).is_file(),
                format!("{path}.path"),
                format!("file {} not found", p.display()),
            ),
        }
    }

    fn build_dictionary_with(&self, dim: usize) -> std::result::Result<EnergyDictionary, Vec<ConfigIssue>> {
        let issue = |path: String, message: String| ConfigIssue { path, message };
        let d = &self.dictionary;
        match (d.preset, d.entries.is_empty()) {
            (Some(_), false) => Err(vec![issue("dictionary".into(), "give either a preset or entries, not both".into())]),
            (None, true) => Err(vec![issue("dictionary".into(), "needs a preset or at least one entry".into())]),
            (Some(p), true) => {
                let built = match p {
                    DictionaryPreset::QuadraticSlabs => scenarios::quadratic_slabs(dim),
                    DictionaryPreset::MixedSlabs => scenarios::mixed_slabs(dim),
                    DictionaryPreset::Stability => scenarios::stability_dictionary(dim, false),
                    DictionaryPreset::StabilityNonquadratic => scenarios::stability_dictionary(dim, true),
                };
                built.map_err(|e| vec![issue("dictionary.preset".into(), e.to_string())])
            }
            (None, false) => {
                let mut entries = Vec::new();
                let mut errs = Vec::new();
                for (i, e) in d.entries.iter().enumerate() {
                    let built = match &e.bounds {
                        Some(b) => EnergyEntry::with_bounds(dim, e.energy, e.weight.clone(), *b),
                        None => EnergyEntry::new(dim, e.energy, e.weight.clone()),
                    };
                    match built {
                        Ok(x) => entries.push(x),
                        Err(err) => errs.push(issue(format!("dictionary.entries[{i}]"), err.to_string())),
                    }
                }
                if !errs.is_empty() {
                    return Err(errs);
                }
                EnergyDictionary::new(dim, entries).map_err(|e| vec![issue("dictionary".into(), e.to_string())])
            }
        }
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid.dim, self.grid.n, self.grid.horizon, self.grid.steps)
    }

    pub fn build_dictionary(&self) -> Result<EnergyDictionary> {
        self.build_dictionary_with(self.grid.dim).map_err(Error::Config)
    }

    pub fn build_material(&self, grid: &Grid) -> Result<MaterialField> {
        match self.material {
            DensityConfig::Constant { value } => MaterialField::constant(grid, value),
            DensityConfig::Linear { base, slope } => MaterialField::from_fn(grid, |x| base + slope * x[0]),
        }
    }

    fn node_data(&self, grid: &Grid, data: &NodeData, displacement: Option<&Array2<f64>>) -> Result<Array2<f64>> {
        let d = grid.dim();
        Ok(match data {
            NodeData::Zero => Array2::zeros((grid.nodes(), d)),
            NodeData::SineModes { amplitude } => scenarios::smooth_displacement(grid, *amplitude),
            NodeData::StandingWave { amplitude } => Array2::from_shape_fn((grid.nodes(), d), |(node, c)| {
                let x = grid.node_position(node);
                if c == 0 {
                    amplitude * x[..d].iter().map(|v| (std::f64::consts::PI * v).sin()).product::<f64>()
                } else {
                    0.0
                }
            }),
            NodeData::ScaledDisplacement { factor } => match displacement {
                Some(u0) => u0.mapv(|v| factor * v),
                None => return Err(Error::invalid("scaled_displacement is only valid for the velocity")),
            },
            NodeData::File { path } => crate::io::read_node_csv(self.resolve(path), grid)?,
        })
    }

    pub fn build_force(&self, grid: &Grid) -> Result<SpaceTimeField> {
        match &self.force {
            ForceConfig::Zero => Ok(SpaceTimeField::zeros(grid)),
            ForceConfig::Pulse { amplitude, centre } => Ok(scenarios::pulse_force(grid, *amplitude, *centre)),
            ForceConfig::File { path } => crate::io::load_field(self.resolve(path), grid),
        }
    }

    /// Full problem at `coefficients.alpha`.
    pub fn build_setup(&self) -> Result<ProblemSetup> {
        let grid = self.build_grid()?;
        let material = self.build_material(&grid)?;
        let dict = self.build_dictionary()?;
        let u0 = self.node_data(&grid, &self.initial.displacement, None)?;
        let u1 = self.node_data(&grid, &self.initial.velocity, Some(&u0))?;
        let force = self.build_force(&grid)?;
        ProblemSetup::new(grid, material, dict, CoefficientVector::new(self.coefficients.alpha.clone())?)?
            .with_initial(u0, u1)?
            .with_force(force)?
            .with_cfl_safety(self.solver.cfl_safety)
    }

    pub fn alpha0(&self) -> Vec<f64> {
        self.coefficients
            .alpha0
            .clone()
            .unwrap_or_else(|| self.coefficients.alpha.clone())
    }

    /// Inversion settings, with `coefficients.thresholds` as the fallback
    /// admissible set.
    pub fn inversion_config(&self) -> InversionConfig {
        let mut c = self.inversion.clone();
        if c.thresholds.is_none() {
            c.thresholds = self.coefficients.thresholds;
        }
        c
    }
}

#[cfg(test)]
mod tests;
