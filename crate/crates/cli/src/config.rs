//! Experiment configuration: a TOML (or JSON) document with `[model]`,
//! `[experiment]` and `[runtime]` tables. Unknown keys are rejected.

use std::fmt;
use std::path::{Path, PathBuf};

use minami_lab::{Background, DisorderDensity, LatticeBox, MagneticField, Model};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    /// Dotted path of the offending field, empty for document-level errors.
    pub path: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub runtime: RuntimeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    pub sides: Vec<usize>,
    pub background: BackgroundConfig,
    pub density: DensityConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackgroundConfig {
    Laplacian {},
    Periodic {
        period: Vec<usize>,
        values: Vec<f64>,
    },
    /// Landau gauge: `flux` per plaquette in the first two axes plus a
    /// constant phase per axis.
    Magnetic {
        #[serde(default)]
        flux: f64,
        #[serde(default)]
        phases: Vec<f64>,
    },
    Decaying {
        amplitude: f64,
        rate: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radius: Option<f64>,
    },
    Zero {},
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DensityConfig {
    Uniform { low: f64, high: f64 },
    Piecewise { breakpoints: Vec<f64>, weights: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Minami,
    Wegner,
    Ids,
    Dos,
    Spacing,
    Fracmoment,
    Identities,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::Minami => "minami",
            ExperimentKind::Wegner => "wegner",
            ExperimentKind::Ids => "ids",
            ExperimentKind::Dos => "dos",
            ExperimentKind::Spacing => "spacing",
            ExperimentKind::Fracmoment => "fracmoment",
            ExperimentKind::Identities => "identities",
        }
    }
}

/// Parameters of every experiment kind; each kind reads the ones it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ExperimentKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// `[Re z, Im z]`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[f64; 2]>,
    /// Site-index subsets Δ (lexicographic order, last axis fastest).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsets: Option<Vec<Vec<usize>>>,
    /// `[lo, hi)`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energies: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    /// Side lengths (all axes) of a box-size schedule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub triples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub draws: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    JsonLines,
    Csv,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::JsonLines => "jsonl",
            Format::Csv => "csv",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

pub const DEFAULT_SAMPLES: usize = 1000;
pub const DEFAULT_WINDOW: f64 = 5.0;
pub const DEFAULT_SPACING_BANDWIDTH: f64 = 0.1;
pub const DEFAULT_TRIPLES: usize = 1000;
pub const DEFAULT_DRAWS: usize = 100;

fn from_toml(text: &str) -> Result<Config, ConfigError> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." {
            // syntax errors: keep the line/column report
            ConfigError::new("", inner.to_string().trim().to_string())
        } else {
            ConfigError::new(path, inner.message().trim().to_string())
        }
    })
}

fn from_json(text: &str) -> Result<Config, ConfigError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ConfigError::new("", format!("invalid JSON: {e}")))?;
    // a result record carries its resolved config under "config"
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("schema") && map.contains_key("config") => {
            map.remove("config").unwrap()
        }
        v => v,
    };
    let value = json_to_toml(value, "")?;
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::new(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

// serde_json's arbitrary-precision numbers do not survive the buffering
// done by internally tagged enums, so JSON goes through a TOML value.
fn json_to_toml(value: serde_json::Value, path: &str) -> Result<toml::Value, ConfigError> {
    use serde_json::Value as J;
    Ok(match value {
        J::Null => return Err(ConfigError::new(path, "null is not allowed")),
        J::Bool(b) => toml::Value::Boolean(b),
        J::String(s) => toml::Value::String(s),
        J::Number(n) => match (n.as_i64(), n.as_f64()) {
            (Some(i), _) => toml::Value::Integer(i),
            (None, Some(x)) => toml::Value::Float(x),
            _ => return Err(ConfigError::new(path, format!("number {n} out of range"))),
        },
        J::Array(items) => toml::Value::Array(
            items
                .into_iter()
                .enumerate()
                .map(|(i, v)| json_to_toml(v, &format!("{path}[{i}]")))
                .collect::<Result<_, _>>()?,
        ),
        J::Object(map) => toml::Value::Table(
            map.into_iter()
                .map(|(k, v)| {
                    let child = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                    json_to_toml(v, &child).map(|v| (k, v))
                })
                .collect::<Result<_, _>>()?,
        ),
    })
}

/// Parses TOML, a JSON config echo, or the first line of a JSON-lines
/// result file.
pub fn parse(text: &str) -> Result<Config, ConfigError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let first = trimmed.lines().next().unwrap_or("");
        // JSON-lines: one complete object per line
        if serde_json::from_str::<serde_json::Value>(first).is_ok() {
            return from_json(first);
        }
        return from_json(trimmed);
    }
    from_toml(text)
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::new("", format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

impl ModelConfig {
    pub fn build(&self) -> Result<Model, ConfigError> {
        self.build_with_sides(&self.sides)
    }

    pub fn build_with_sides(&self, sides: &[usize]) -> Result<Model, ConfigError> {
        if self.dimension == 0 {
            return Err(ConfigError::new("model.dimension", "must be at least 1"));
        }
        if sides.len() != self.dimension {
            return Err(ConfigError::new(
                "model.sides",
                format!("expected {} side lengths, got {}", self.dimension, sides.len()),
            ));
        }
        let lattice = LatticeBox::new(sides.to_vec()).map_err(|e| ConfigError::new("model.sides", e.to_string()))?;
        let background = match &self.background {
            BackgroundConfig::Laplacian {} => Background::Laplacian,
            BackgroundConfig::Periodic { period, values } => Background::PeriodicPotential {
                period: period.clone(),
                values: values.clone(),
            },
            BackgroundConfig::Magnetic { flux, phases } => Background::Magnetic(MagneticField::Landau {
                flux: *flux,
                axis_phases: if phases.is_empty() {
                    vec![0.0; self.dimension]
                } else {
                    phases.clone()
                },
            }),
            BackgroundConfig::Decaying {
                amplitude,
                rate,
                radius,
            } => Background::DecayingHopping {
                amplitude: *amplitude,
                rate: *rate,
                radius: *radius,
            },
            BackgroundConfig::Zero {} => Background::Zero,
        };
        let density = match &self.density {
            DensityConfig::Uniform { low, high } => DisorderDensity::uniform(*low, *high),
            DensityConfig::Piecewise { breakpoints, weights } => {
                DisorderDensity::piecewise_constant(breakpoints.clone(), weights.clone())
            }
        }
        .map_err(|e| ConfigError::new("model.density", e.to_string()))?;
        Model::new(lattice, background, density).map_err(|e| ConfigError::new("model.background", e.to_string()))
    }
}

/// A fully validated experiment with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Minami { samples: usize, z: [f64; 2], subsets: Vec<Vec<usize>> },
    Wegner { samples: usize, interval: [f64; 2], levels: Vec<usize> },
    Ids { samples: usize, energies: Vec<f64> },
    Dos { samples: usize, energies: Vec<f64>, h: f64 },
    Spacing { samples: usize, energy: f64, window: f64, h: f64, sizes: Option<Vec<usize>> },
    Fracmoment { samples: usize, energy: f64, eps: f64, s: f64 },
    Identities { triples: usize, draws: usize },
}

impl Experiment {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Experiment::Minami { .. } => ExperimentKind::Minami,
            Experiment::Wegner { .. } => ExperimentKind::Wegner,
            Experiment::Ids { .. } => ExperimentKind::Ids,
            Experiment::Dos { .. } => ExperimentKind::Dos,
            Experiment::Spacing { .. } => ExperimentKind::Spacing,
            Experiment::Fracmoment { .. } => ExperimentKind::Fracmoment,
            Experiment::Identities { .. } => ExperimentKind::Identities,
        }
    }

    pub fn samples(&self) -> Option<usize> {
        match self {
            Experiment::Minami { samples, .. }
            | Experiment::Wegner { samples, .. }
            | Experiment::Ids { samples, .. }
            | Experiment::Dos { samples, .. }
            | Experiment::Spacing { samples, .. }
            | Experiment::Fracmoment { samples, .. } => Some(*samples),
            Experiment::Identities { .. } => None,
        }
    }

    /// The experiment table that reproduces `self`.
    pub fn echo(&self) -> ExperimentConfig {
        let mut e = ExperimentConfig {
            kind: Some(self.kind()),
            samples: self.samples(),
            ..Default::default()
        };
        match self.clone() {
            Experiment::Minami { z, subsets, .. } => {
                e.z = Some(z);
                e.subsets = Some(subsets);
            }
            Experiment::Wegner { interval, levels, .. } => {
                e.interval = Some(interval);
                e.levels = Some(levels);
            }
            Experiment::Ids { energies, .. } => e.energies = Some(energies),
            Experiment::Dos { energies, h, .. } => {
                e.energies = Some(energies);
                e.h = Some(h);
            }
            Experiment::Spacing {
                energy,
                window,
                h,
                sizes,
                ..
            } => {
                e.energy = Some(energy);
                e.window = Some(window);
                e.h = Some(h);
                e.sizes = sizes;
            }
            Experiment::Fracmoment { energy, eps, s, .. } => {
                e.energy = Some(energy);
                e.eps = Some(eps);
                e.s = Some(s);
            }
            Experiment::Identities { triples, draws } => {
                e.triples = Some(triples);
                e.draws = Some(draws);
            }
        }
        e
    }
}

fn required<T: Clone>(value: &Option<T>, field: &str, kind: ExperimentKind) -> Result<T, ConfigError> {
    value
        .clone()
        .ok_or_else(|| ConfigError::new(format!("experiment.{field}"), format!("required for kind = \"{}\"", kind.as_str())))
}

fn positive(value: f64, field: &str) -> Result<f64, ConfigError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::new(format!("experiment.{field}"), format!("must be positive and finite, got {value}")))
    }
}

fn finite(value: f64, field: &str) -> Result<f64, ConfigError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::new(format!("experiment.{field}"), "must be finite"))
    }
}

/// Command-line overrides, applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Everything a run needs, validated before any computation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub model_config: Option<ModelConfig>,
    pub model: Option<Model>,
    pub experiment: Experiment,
    pub seed: u64,
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Resolved {
    /// The config echo carried by every record. Execution details that do
    /// not affect results (workers, output location and format) are left out.
    pub fn echo(&self) -> Config {
        Config {
            model: self.model_config.clone(),
            experiment: self.experiment.echo(),
            runtime: RuntimeConfig {
                seed: Some(self.seed),
                ..Default::default()
            },
        }
    }
}

pub fn resolve(mut config: Config, overrides: &Overrides) -> Result<Resolved, ConfigError> {
    if let Some(kind) = overrides.experiment {
        config.experiment.kind = Some(kind);
    }
    if let Some(samples) = overrides.samples {
        config.experiment.samples = Some(samples);
    }
    let rt = &config.runtime;
    let seed = overrides.seed.or(rt.seed).unwrap_or(0);
    let workers = overrides.workers.or(rt.workers).unwrap_or(1);
    if workers == 0 {
        return Err(ConfigError::new("runtime.workers", "must be at least 1"));
    }
    let out = overrides.out.clone().or_else(|| rt.out.clone());
    let format = overrides.format.or(rt.format).unwrap_or(Format::JsonLines);

    let e = &config.experiment;
    let kind = e
        .kind
        .ok_or_else(|| ConfigError::new("experiment.kind", "missing (one of minami, wegner, ids, dos, spacing, fracmoment, identities)"))?;
    let samples = e.samples.unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(ConfigError::new("experiment.samples", "must be at least 1"));
    }

    let model = match (&config.model, kind) {
        (Some(m), _) => Some(m.build()?),
        (None, ExperimentKind::Identities) => None,
        (None, _) => return Err(ConfigError::new("model", "missing [model] table")),
    };
    let sites = model.as_ref().map_or(0, |m| m.lattice().len());

    let experiment = match kind {
        ExperimentKind::Minami => {
            let z = required(&e.z, "z", kind)?;
            finite(z[0], "z")?;
            positive(z[1], "z[1]")?;
            let subsets = required(&e.subsets, "subsets", kind)?;
            if subsets.is_empty() {
                return Err(ConfigError::new("experiment.subsets", "must list at least one subset"));
            }
            for (k, subset) in subsets.iter().enumerate() {
                let path = format!("experiment.subsets[{k}]");
                if subset.is_empty() {
                    return Err(ConfigError::new(path, "subset is empty"));
                }
                let mut sorted = subset.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != subset.len() {
                    return Err(ConfigError::new(path, "repeated site index"));
                }
                if let Some(&bad) = subset.iter().find(|&&i| i >= sites) {
                    return Err(ConfigError::new(path, format!("site index {bad} outside the box of {sites} sites")));
                }
            }
            Experiment::Minami { samples, z, subsets }
        }
        ExperimentKind::Wegner => {
            let interval = required(&e.interval, "interval", kind)?;
            if !(interval[0].is_finite() && interval[1].is_finite() && interval[0] < interval[1]) {
                return Err(ConfigError::new("experiment.interval", "need finite lo < hi"));
            }
            let levels = e.levels.clone().unwrap_or_else(|| vec![1, 2, 3]);
            if levels.is_empty() || levels.contains(&0) {
                return Err(ConfigError::new("experiment.levels", "levels must be nonempty and at least 1"));
            }
            Experiment::Wegner {
                samples,
                interval,
                levels,
            }
        }
        ExperimentKind::Ids | ExperimentKind::Dos => {
            let energies = required(&e.energies, "energies", kind)?;
            if energies.is_empty() {
                return Err(ConfigError::new("experiment.energies", "must be nonempty"));
            }
            for &x in &energies {
                finite(x, "energies")?;
            }
            if kind == ExperimentKind::Ids {
                Experiment::Ids { samples, energies }
            } else {
                let h = positive(required(&e.h, "h", kind)?, "h")?;
                Experiment::Dos { samples, energies, h }
            }
        }
        ExperimentKind::Spacing => {
            let energy = finite(required(&e.energy, "energy", kind)?, "energy")?;
            let window = positive(e.window.unwrap_or(DEFAULT_WINDOW), "window")?;
            let h = positive(e.h.unwrap_or(DEFAULT_SPACING_BANDWIDTH), "h")?;
            if let Some(sizes) = &e.sizes {
                if sizes.is_empty() || sizes.contains(&0) {
                    return Err(ConfigError::new("experiment.sizes", "sizes must be nonempty and positive"));
                }
                let m = config.model.as_ref().expect("model present");
                for &side in sizes {
                    m.build_with_sides(&vec![side; m.dimension])?;
                }
            }
            Experiment::Spacing {
                samples,
                energy,
                window,
                h,
                sizes: e.sizes.clone(),
            }
        }
        ExperimentKind::Fracmoment => {
            let energy = finite(required(&e.energy, "energy", kind)?, "energy")?;
            let eps = positive(required(&e.eps, "eps", kind)?, "eps")?;
            let s = required(&e.s, "s", kind)?;
            if !(s > 0.0 && s < 1.0) {
                return Err(ConfigError::new("experiment.s", format!("must lie in (0, 1), got {s}")));
            }
            Experiment::Fracmoment {
                samples,
                energy,
                eps,
                s,
            }
        }
        ExperimentKind::Identities => Experiment::Identities {
            triples: e.triples.unwrap_or(DEFAULT_TRIPLES),
            draws: e.draws.unwrap_or(DEFAULT_DRAWS),
        },
    };
    Ok(Resolved {
        model_config: config.model,
        model,
        experiment,
        seed,
        workers,
        out,
        format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINAMI: &str = r#"
[model]
dimension = 1
sides = [32]
background = { kind = "laplacian" }
density = { kind = "uniform", low = 0.0, high = 1.0 }

[experiment]
kind = "minami"
samples = 100
z = [0.5, 0.1]
subsets = [[16], [15, 16]]

[runtime]
seed = 7
"#;

    #[test]
    fn parses_and_resolves() {
        let r = resolve(parse(MINAMI).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(r.seed, 7);
        assert_eq!(r.workers, 1);
        assert_eq!(r.format, Format::JsonLines);
        assert_eq!(r.model.as_ref().unwrap().lattice().len(), 32);
        assert!(matches!(r.experiment, Experiment::Minami { samples: 100, .. }));
    }

    #[test]
    fn echo_round_trips_through_json() {
        let r = resolve(parse(MINAMI).unwrap(), &Overrides::default()).unwrap();
        let json = serde_json::to_string(&r.echo()).unwrap();
        let again = resolve(parse(&json).unwrap(), &Overrides::default()).unwrap();
        assert_eq!(again.experiment, r.experiment);
        assert_eq!(again.model_config, r.model_config);
        assert_eq!(again.seed, r.seed);
    }

    #[test]
    fn overrides_win() {
        let o = Overrides {
            seed: Some(3),
            samples: Some(5),
            workers: Some(4),
            format: Some(Format::Csv),
            ..Default::default()
        };
        let r = resolve(parse(MINAMI).unwrap(), &o).unwrap();
        assert_eq!((r.seed, r.workers, r.format), (3, 4, Format::Csv));
        assert_eq!(r.experiment.samples(), Some(5));
    }

    #[test]
    fn errors_name_the_field() {
        let missing = MINAMI.replace("density = { kind = \"uniform\", low = 0.0, high = 1.0 }\n", "");
        let err = parse(&missing).unwrap_err();
        assert!(err.to_string().contains("model") && err.to_string().contains("density"), "{err}");

        let unknown = MINAMI.replace("samples = 100", "samples = 100\nbogus = 1");
        let err = parse(&unknown).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");

        let bad_bg = MINAMI.replace("kind = \"laplacian\"", "kind = \"laplacian\", rate = 1.0");
        assert!(parse(&bad_bg).is_err());

        let no_z = MINAMI.replace("z = [0.5, 0.1]\n", "");
        let err = resolve(parse(&no_z).unwrap(), &Overrides::default()).unwrap_err();
        assert_eq!(err.path, "experiment.z");

        let outside = MINAMI.replace("[15, 16]", "[15, 32]");
        let err = resolve(parse(&outside).unwrap(), &Overrides::default()).unwrap_err();
        assert_eq!(err.path, "experiment.subsets[1]");

        let bad_density = MINAMI.replace("high = 1.0", "high = -1.0");
        let err = resolve(parse(&bad_density).unwrap(), &Overrides::default()).unwrap_err();
        assert_eq!(err.path, "model.density");
    }

    #[test]
    fn identities_need_no_model() {
        let o = Overrides {
            experiment: Some(ExperimentKind::Identities),
            ..Default::default()
        };
        let r = resolve(Config::default(), &o).unwrap();
        assert!(r.model.is_none());
        assert_eq!(
            r.experiment,
            Experiment::Identities {
                triples: DEFAULT_TRIPLES,
                draws: DEFAULT_DRAWS
            }
        );
        assert!(resolve(Config::default(), &Overrides::default()).is_err());
    }
}
