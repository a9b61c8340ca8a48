//! Scenario files: parsing, overrides, defaults and per-field provenance.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use netlq::coding::ChannelSpec;
use netlq::design::{grid_by_step, ConstraintSet, EnvelopeOptions, SearchWindow};
use netlq::lqcore::{CostParams, PlantParams};
use netlq::sim::{ControllerConfig, EncoderConfig, NoiseLaw, Scenario};

use crate::failure::Failure;

/// Evenly spaced grid `lo, lo + step, ..., hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

const MAX_GRID_POINTS: f64 = 1e6;

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        grid_by_step(self.lo, self.hi, self.step)
    }

    pub fn window(&self) -> SearchWindow {
        SearchWindow { lo: self.lo, hi: self.hi, step: self.step }
    }

    fn check(&self, path: &str) -> Result<(), Failure> {
        let ok = self.lo.is_finite()
            && self.hi.is_finite()
            && self.lo <= self.hi
            && self.step > 0.0
            && (self.hi - self.lo) / self.step < MAX_GRID_POINTS;
        if ok {
            Ok(())
        } else {
            Err(Failure::schema(path, "grid needs finite lo <= hi, step > 0 and at most 1e6 points"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: String,
    pub values: Vec<f64>,
}

/// Settings of the figure and design subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Experiment {
    pub seed: u64,
    pub paths: usize,
    /// `u0` axis of the dual-effect figure.
    pub u0_grid: Grid,
    /// Example 1 quantizer: cells split at `±theta`.
    pub theta: f64,
    /// Time-0 binary threshold and observed label of the two-step figures.
    pub delta0: f64,
    pub z0: usize,
    /// Time-1 threshold of the estimation figure.
    pub delta1: f64,
    /// `u0` values compared in the two-step figures.
    pub u0_values: Vec<f64>,
    pub delta1_grid: Grid,
    pub alpha_grid: Grid,
    pub xhat_grid: Grid,
    /// Feasible time-1 thresholds.
    pub encoder_set: ConstraintSet,
    /// Finite control set.
    pub control_set: ConstraintSet,
    /// Interval control set.
    pub interval_set: ConstraintSet,
    pub envelope: EnvelopeOptions,
    pub sweep: Option<SweepSpec>,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            seed: 0,
            paths: 100_000,
            u0_grid: Grid { lo: -4.0, hi: 1.0, step: 0.01 },
            theta: 1.6,
            delta0: 0.0,
            z0: 1,
            delta1: 0.0,
            u0_values: vec![-1.0, 0.0, 1.0],
            delta1_grid: Grid { lo: -4.0, hi: 4.0, step: 0.05 },
            alpha_grid: Grid { lo: -3.0, hi: 3.0, step: 0.05 },
            xhat_grid: Grid { lo: -3.0, hi: 3.0, step: 0.01 },
            encoder_set: ConstraintSet::Interval { lo: -1.0, hi: 1.0 },
            control_set: ConstraintSet::Finite { values: vec![-1.0, 0.0, 1.0] },
            interval_set: ConstraintSet::Interval { lo: -2.0, hi: 2.0 },
            envelope: EnvelopeOptions::default(),
            sweep: None,
        }
    }
}

impl Experiment {
    fn check(&self) -> Result<(), Failure> {
        self.u0_grid.check("experiment.u0_grid")?;
        self.delta1_grid.check("experiment.delta1_grid")?;
        self.alpha_grid.check("experiment.alpha_grid")?;
        self.xhat_grid.check("experiment.xhat_grid")?;
        if self.paths == 0 {
            return Err(Failure::schema("experiment.paths", "must be >= 1"));
        }
        if !(1..=2).contains(&self.z0) {
            return Err(Failure::schema("experiment.z0", "must be 1 or 2"));
        }
        if !(self.theta > 0.0) {
            return Err(Failure::schema("experiment.theta", "must be > 0"));
        }
        if self.u0_values.is_empty() {
            return Err(Failure::schema("experiment.u0_values", "must be nonempty"));
        }
        for (name, set) in [
            ("encoder_set", &self.encoder_set),
            ("control_set", &self.control_set),
            ("interval_set", &self.interval_set),
        ] {
            set.validate().map_err(|e| Failure::schema(format!("experiment.{name}"), e.to_string()))?;
        }
        Ok(())
    }
}

fn default_channel() -> ChannelSpec {
    ChannelSpec::FixedRate { n: 1 }
}

fn default_encoder() -> EncoderConfig {
    EncoderConfig::StateQuantizer { thresholds: vec![vec![]] }
}

fn default_controller() -> ControllerConfig {
    ControllerConfig::Ce
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub plant: PlantParams,
    pub cost: CostParams,
    #[serde(default = "default_channel")]
    pub channel: ChannelSpec,
    #[serde(default = "default_encoder")]
    pub encoder: EncoderConfig,
    #[serde(default = "default_controller")]
    pub controller: ControllerConfig,
    #[serde(default)]
    pub noise: NoiseLaw,
    #[serde(default)]
    pub experiment: Experiment,
}

impl ScenarioFile {
    pub fn scenario(&self) -> Scenario {
        Scenario {
            plant: self.plant,
            cost: self.cost,
            channel: self.channel.clone(),
            encoder: self.encoder.clone(),
            controller: self.controller.clone(),
            noise: self.noise.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    File,
    Default,
    Override,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::File => "file",
            Source::Default => "default",
            Source::Override => "override",
        })
    }
}

/// One resolved leaf of the configuration.
#[derive(Debug, Clone, Serialize)]
pub struct Field {
    pub path: String,
    pub value: Value,
    pub source: Source,
}

/// A fully resolved scenario with its canonical form and provenance.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub file: ScenarioFile,
    /// Canonical JSON of the resolved configuration (sorted keys).
    pub canonical: Value,
    pub fields: Vec<Field>,
    /// SHA-256 of the canonical JSON, hex.
    pub hash: String,
}

/// A `--set key=value` override. Values parse as JSON, else as a string.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub path: Vec<String>,
    pub value: Value,
}

impl Override {
    pub fn parse(spec: &str) -> Result<Override, Failure> {
        let (key, raw) = spec
            .split_once('=')
            .ok_or_else(|| Failure::schema("--set", format!("expected key=value, got {spec:?}")))?;
        let path: Vec<String> = key.trim().split('.').map(str::to_string).collect();
        if path.iter().any(String::is_empty) {
            return Err(Failure::schema("--set", format!("malformed key {key:?}")));
        }
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
        Ok(Override { path, value })
    }

    fn dotted(&self) -> String {
        self.path.join(".")
    }

    fn apply(&self, doc: &mut Value) -> Result<(), Failure> {
        let mut node = doc;
        for (k, seg) in self.path.iter().enumerate() {
            let last = k + 1 == self.path.len();
            node = match node {
                Value::Array(items) => {
                    let i: usize = seg
                        .parse()
                        .ok()
                        .filter(|&i| i < items.len())
                        .ok_or_else(|| Failure::schema(self.dotted(), format!("no array element {seg}")))?;
                    &mut items[i]
                }
                other => {
                    if !other.is_object() {
                        *other = Value::Object(Map::new());
                    }
                    let map = other.as_object_mut().expect("object");
                    map.entry(seg.clone()).or_insert(Value::Null)
                }
            };
            if last {
                *node = self.value.clone();
            }
        }
        Ok(())
    }
}

fn lookup<'a>(doc: &'a Value, path: &str) -> Option<&'a Value> {
    path.split('.').try_fold(doc, |node, seg| match node {
        Value::Object(m) => m.get(seg),
        Value::Array(v) => seg.parse::<usize>().ok().and_then(|i| v.get(i)),
        _ => None,
    })
}

fn is_scalar(v: &Value) -> bool {
    !(v.is_object() || v.is_array())
}

/// Leaves of `doc`; arrays of scalars count as one leaf.
fn leaves(doc: &Value, prefix: &str, out: &mut Vec<(String, Value)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match doc {
        Value::Object(m) if !m.is_empty() => m.iter().for_each(|(k, v)| leaves(v, &join(k), out)),
        Value::Array(v) if !v.is_empty() && !v.iter().all(is_scalar) => {
            v.iter().enumerate().for_each(|(i, x)| leaves(x, &join(&i.to_string()), out))
        }
        _ => out.push((prefix.to_string(), doc.clone())),
    }
}

fn related(a: &str, b: &str) -> bool {
    let prefix = |p: &str, q: &str| q == p || q.starts_with(&format!("{p}."));
    prefix(a, b) || prefix(b, a)
}

/// Reads, overrides, deserializes and checks a scenario file.
pub fn resolve(path: &Path, overrides: &[Override]) -> Result<Resolved, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let file_doc: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::schema("", format!("not valid JSON: {e}")))?;
    if !file_doc.is_object() {
        return Err(Failure::schema("", "top level must be an object"));
    }
    let mut merged = file_doc.clone();
    for o in overrides {
        o.apply(&mut merged)?;
    }
    let file: ScenarioFile = serde_path_to_error::deserialize(&merged).map_err(|e| {
        let p = e.path().to_string();
        Failure::schema(if p == "." { String::new() } else { p }, e.into_inner().to_string())
    })?;
    file.scenario().validate().map_err(Failure::from)?;
    file.experiment.check()?;

    let canonical = serde_json::to_value(&file).expect("scenario serializes");
    let mut flat = Vec::new();
    leaves(&canonical, "", &mut flat);
    let fields = flat
        .into_iter()
        .map(|(path, value)| {
            let source = if overrides.iter().any(|o| related(&o.dotted(), &path)) {
                Source::Override
            } else if lookup(&file_doc, &path).is_some() {
                Source::File
            } else {
                Source::Default
            };
            Field { path, value, source }
        })
        .collect();
    let hash = Sha256::digest(serde_json::to_vec(&canonical).expect("json")).iter().map(|b| format!("{b:02x}")).collect();
    Ok(Resolved { file, canonical, fields, hash })
}
