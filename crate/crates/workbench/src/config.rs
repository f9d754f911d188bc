//! Run configuration: a TOML file with an explicit schema version.
//!
//! ```toml
//! schema_version = 1
//! method = "third-mv-fft"
//! seed = 42
//! realizations = 200
//!
//! [grid]
//! variates = 3
//! bins = 100
//! cutoff = 2.0
//!
//! [targets]
//! source = "wind-example"
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use srm_core::pure_spectrum::InteractionWeight;
use srm_core::spectral_models::{FrequencyGrid, OffsetRule};
use srm_core::srm_simulators::{Method, SamplingPlan};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error{}: {message}", location.map(|(l, c)| format!(" at line {l}, column {c}")).unwrap_or_default())]
    Parse { location: Option<(usize, usize)>, message: String },
    #[error("invalid config: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<FieldError>),
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SampleFormat {
    #[default]
    Bin,
    Csv,
}

impl std::str::FromStr for SampleFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bin" => Ok(SampleFormat::Bin),
            "csv" => Ok(SampleFormat::Csv),
            _ => Err(format!("unknown format {s:?}, expected bin or csv")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetSource {
    WindExample,
    /// CSV tables sampled at the grid's frequencies.
    Tabulated { spectrum: PathBuf, bispectrum: Option<PathBuf> },
}

/// Report tolerances. Relative errors divide by `max(|target|, floor * RMS^order)`
/// for single-record checks.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub mean: f64,
    pub second: f64,
    pub third: f64,
    pub floor: f64,
    pub ensemble_relative: f64,
    pub ensemble_absolute: f64,
    pub reference_second_relative: f64,
    pub reference_third_relative: f64,
    pub reference_third_absolute: f64,
    pub baseline_third: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            mean: 1e-10,
            second: 1e-8,
            third: 1e-6,
            floor: 1e-3,
            ensemble_relative: 0.05,
            ensemble_absolute: 0.15,
            reference_second_relative: 0.02,
            reference_third_relative: 0.10,
            reference_third_absolute: 0.15,
            baseline_third: 0.1,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    variates: usize,
    bins: usize,
    cutoff: Option<f64>,
    delta_omega: Option<f64>,
    offset_rule: Option<OffsetRule>,
    block_len: Option<usize>,
    blocks: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    #[serde(default = "default_out_dir")]
    dir: PathBuf,
    #[serde(default)]
    format: SampleFormat,
    #[serde(default = "default_true")]
    plots: bool,
}

impl Default for RawOutput {
    fn default() -> Self {
        RawOutput { dir: default_out_dir(), format: SampleFormat::Bin, plots: true }
    }
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("srm3-out")
}

fn default_true() -> bool {
    true
}

fn default_realizations() -> u32 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: u32,
    method: Method,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_realizations")]
    realizations: u32,
    interaction_weight: Option<InteractionWeight>,
    grid: RawGrid,
    targets: TargetSource,
    #[serde(default)]
    output: RawOutput,
    #[serde(default)]
    tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: SampleFormat,
    pub plots: bool,
}

/// A validated configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub grid: FrequencyGrid,
    pub block_len: usize,
    /// Blocks per record; `None` covers one fundamental period.
    pub blocks: Option<u64>,
    pub targets: TargetSource,
    pub method: Method,
    pub seed: u64,
    pub realizations: u32,
    pub interaction_weight: InteractionWeight,
    pub output: OutputConfig,
    pub tolerances: Tolerances,
}

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub realizations: Option<u32>,
    pub method: Option<Method>,
    pub out: Option<PathBuf>,
    pub format: Option<SampleFormat>,
}

fn default_rule(method: Method) -> OffsetRule {
    match method {
        Method::SecondOrder => OffsetRule::SecondOrderClassic,
        Method::ThirdOrderUnivariate => OffsetRule::UnivariateErgodic,
        Method::ThirdOrderMultivariate | Method::ThirdOrderMultivariateFft => OffsetRule::MultivariateDoubleIndex,
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
    (line, column)
}

/// Parses and validates a config. Relative paths stay relative.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
        location: e.span().map(|s| line_column(text, s.start)),
        message: e.message().to_string(),
    })?;
    validate(raw)
}

/// Reads a config file and resolves table paths against its directory.
/// Every referenced file must exist.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
    let mut config = parse_config(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    if let TargetSource::Tabulated { spectrum, bispectrum } = &mut config.targets {
        let mut errors = Vec::new();
        for (field, p) in [("targets.spectrum", Some(spectrum)), ("targets.bispectrum", bispectrum.as_mut())] {
            let Some(p) = p else { continue };
            if p.is_relative() {
                *p = base.join(&*p);
            }
            if !p.is_file() {
                errors.push(FieldError { field: field.into(), message: format!("file {} does not exist", p.display()) });
            }
        }
        if !errors.is_empty() {
            return Err(ConfigError::Invalid(errors));
        }
    }
    if config.output.dir.is_relative() {
        config.output.dir = base.join(&config.output.dir);
    }
    Ok(config)
}

fn validate(raw: RawConfig) -> Result<RunConfig, ConfigError> {
    let mut errors = Vec::new();
    let mut fail = |field: &str, message: String| errors.push(FieldError { field: field.into(), message });
    if raw.schema_version != SCHEMA_VERSION {
        fail("schema_version", format!("unsupported version {}, expected {SCHEMA_VERSION}", raw.schema_version));
    }
    let g = &raw.grid;
    if g.variates == 0 {
        fail("grid.variates", "must be at least 1".into());
    }
    if g.bins == 0 {
        fail("grid.bins", "must be at least 1".into());
    }
    let delta_omega = match (g.cutoff, g.delta_omega) {
        (Some(_), Some(_)) => {
            fail("grid", "give either cutoff or delta_omega, not both".into());
            None
        }
        (None, None) => {
            fail("grid", "one of cutoff or delta_omega is required".into());
            None
        }
        (Some(c), None) if !(c.is_finite() && c > 0.0) => {
            fail("grid.cutoff", format!("must be positive, got {c}"));
            None
        }
        (None, Some(d)) if !(d.is_finite() && d > 0.0) => {
            fail("grid.delta_omega", format!("must be positive, got {d}"));
            None
        }
        (Some(c), None) => Some(c / g.bins.max(1) as f64),
        (None, Some(d)) => Some(d),
    };
    if raw.method == Method::ThirdOrderUnivariate && g.variates != 1 {
        fail("method", format!("third-uv needs one variate, grid has {}", g.variates));
    }
    if raw.targets == TargetSource::WindExample && g.variates != 3 {
        fail("targets.source", format!("the wind example has three variates, grid has {}", g.variates));
    }
    if raw.realizations == 0 {
        fail("realizations", "must be at least 1".into());
    }
    let rule = g.offset_rule.unwrap_or(default_rule(raw.method));
    if rule == OffsetRule::UnivariateErgodic && g.variates != 1 {
        fail("grid.offset_rule", "univariate-ergodic needs one variate".into());
    }
    if g.blocks == Some(0) {
        fail("grid.blocks", "must be at least 1".into());
    }
    let mut grid = None;
    if let (Some(dw), true) = (delta_omega, g.variates > 0 && g.bins > 0) {
        match FrequencyGrid::new(g.variates, g.bins, dw, rule) {
            Ok(fg) => grid = Some(fg),
            Err(e) => fail("grid", e.to_string()),
        }
    }
    let block_len = g.block_len.unwrap_or(2 * g.bins);
    if let Some(fg) = &grid {
        if let Err(e) = SamplingPlan::new(fg, block_len, 1) {
            fail("grid.block_len", e.to_string());
        }
    }
    let weight = raw.interaction_weight.unwrap_or(match raw.targets {
        TargetSource::WindExample => InteractionWeight::DeltaOmegaSquared,
        TargetSource::Tabulated { .. } => InteractionWeight::DeltaOmega,
    });
    if !errors.is_empty() {
        return Err(ConfigError::Invalid(errors));
    }
    Ok(RunConfig {
        grid: grid.expect("grid validated"),
        block_len,
        blocks: g.blocks,
        targets: raw.targets,
        method: raw.method,
        seed: raw.seed,
        realizations: raw.realizations,
        interaction_weight: weight,
        output: OutputConfig { dir: raw.output.dir, format: raw.output.format, plots: raw.output.plots },
        tolerances: raw.tolerances,
    })
}

impl RunConfig {
    /// Wind example on the double-indexed grid with `N = 100`, cutoff 2 rad/s.
    pub fn wind_example(method: Method, realizations: u32) -> RunConfig {
        let text = format!(
            "schema_version = 1\nmethod = \"{method}\"\nrealizations = {realizations}\n\
             [grid]\nvariates = 3\nbins = 100\ncutoff = 2.0\noffset_rule = \"multivariate-double-index\"\n\
             [targets]\nsource = \"wind-example\"\n"
        );
        parse_config(&text).expect("builtin config is valid")
    }

    /// Applies command-line overrides and re-checks method compatibility.
    pub fn apply(&mut self, o: &Overrides) -> Result<(), ConfigError> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(r) = o.realizations {
            if r == 0 {
                return Err(ConfigError::Invalid(vec![FieldError {
                    field: "realizations".into(),
                    message: "must be at least 1".into(),
                }]));
            }
            self.realizations = r;
        }
        if let Some(method) = o.method {
            if method == Method::ThirdOrderUnivariate && self.grid.variates() != 1 {
                return Err(ConfigError::Invalid(vec![FieldError {
                    field: "method".into(),
                    message: format!("third-uv needs one variate, grid has {}", self.grid.variates()),
                }]));
            }
            self.method = method;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(f) = o.format {
            self.output.format = f;
        }
        Ok(())
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        let plan = match self.blocks {
            Some(b) => SamplingPlan::new(&self.grid, self.block_len, b),
            None => SamplingPlan::full_period(&self.grid, self.block_len),
        };
        plan.expect("block length validated")
    }
}
