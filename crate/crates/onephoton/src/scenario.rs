//! Scenario files: a flat TOML document with `[model]`, `[field]`, `[time]`
//! and optional `[analysis]`/`[output]` sections. Unknown keys are rejected,
//! missing required keys are named, and every validated scenario can be
//! serialized back out with its defaults filled in.

use num_complex::Complex64 as C64;
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario value for {key}: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid {
        key,
        message: message.into(),
    }
}

/// Bright/dark model parameters for [`crate::molecule::build_bright_dark_model`].
#[derive(Debug, Clone, Serialize)]
pub struct ModelParams {
    pub delta: f64,
    pub coupling: f64,
    pub n_dark: u32,
    pub dark_spread: f64,
    pub dipole: f64,
}

/// Which radiation field drives the scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    Coherent { alphas: Vec<C64> },
    Thermal { temperature: f64 },
    Number { occupations: Vec<u32> },
}

impl FieldKind {
    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::Coherent { .. } => "coherent",
            FieldKind::Thermal { .. } => "thermal",
            FieldKind::Number { .. } => "number",
        }
    }
}

impl Serialize for FieldKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(2))?;
        map.serialize_entry("kind", self.name())?;
        match self {
            FieldKind::Coherent { alphas } => {
                let pairs: Vec<[f64; 2]> = alphas.iter().map(|a| [a.re, a.im]).collect();
                map.serialize_entry("alphas", &pairs)?;
            }
            FieldKind::Thermal { temperature } => {
                map.serialize_entry("temperature", temperature)?;
            }
            FieldKind::Number { occupations } => {
                map.serialize_entry("occupations", occupations)?;
            }
        }
        map.end()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldParams {
    #[serde(flatten)]
    pub kind: FieldKind,
    pub n_cut: u32,
    pub volume: f64,
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeGridParams {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGridParams {
    /// Number of grid points, without materializing them. Saturates instead
    /// of overflowing on absurd ranges.
    pub fn n_points(&self) -> usize {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor();
        (count as usize).saturating_add(1)
    }

    /// Uniform grid start, start+step, ... up to stop (inclusive within one
    /// part in 10⁹ of a step).
    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points())
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisParams {
    pub oracle: bool,
    pub frequency_threshold: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputParams {
    pub dir: String,
}

/// A fully validated scenario with all defaults applied.
#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub model: ModelParams,
    pub field: FieldParams,
    pub time: TimeGridParams,
    pub analysis: AnalysisParams,
    pub output: OutputParams,
}

impl Scenario {
    pub fn n_cut(&self) -> u32 {
        self.field.n_cut
    }

    pub fn volume(&self) -> f64 {
        self.field.volume
    }

    pub fn z(&self) -> f64 {
        self.field.z
    }

    /// The scenario as a runnable TOML document, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("scenario serializes")
    }
}

// raw deserialization layer: structure and key checking only

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    seed: Option<u64>,
    model: RawModel,
    field: RawField,
    time: RawTime,
    analysis: Option<RawAnalysis>,
    output: Option<RawOutput>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    delta: f64,
    coupling: Option<f64>,
    n_dark: Option<u32>,
    dark_spread: Option<f64>,
    dipole: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    kind: String,
    alphas: Option<Vec<ComplexSpec>>,
    temperature: Option<f64>,
    occupations: Option<Vec<u32>>,
    n_cut: Option<u32>,
    volume: Option<f64>,
    z: Option<f64>,
}

/// A complex number written either as a bare float or an `[re, im]` pair.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
}

impl From<&ComplexSpec> for C64 {
    fn from(spec: &ComplexSpec) -> C64 {
        match spec {
            ComplexSpec::Real(re) => C64::new(*re, 0.0),
            ComplexSpec::Pair([re, im]) => C64::new(*re, *im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    start: f64,
    stop: f64,
    step: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    oracle: Option<bool>,
    frequency_threshold: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
}

pub const DEFAULT_N_CUT: u32 = 4;
pub const DEFAULT_FREQUENCY_THRESHOLD: f64 = 0.01;
pub const DEFAULT_OUTPUT_DIR: &str = "out";

/// Ceiling on the number of time-grid points a scenario may request.
pub const MAX_TIME_POINTS: usize = 10_000_000;

fn require_finite(key: &'static str, value: f64) -> Result<f64, ScenarioError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, format!("must be finite, got {value}")))
    }
}

/// Parses and validates a scenario document. Unknown keys are rejected,
/// missing keys are named, and out-of-range values are reported with the
/// offending value.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario = toml::from_str(text)?;

    let delta = require_finite("model.delta", raw.model.delta)?;
    if delta <= 0.0 {
        return Err(invalid(
            "model.delta",
            format!("bright-state energy must be positive, got {delta}"),
        ));
    }
    let coupling = require_finite("model.coupling", raw.model.coupling.unwrap_or(0.0))?;
    let dark_spread = require_finite("model.dark_spread", raw.model.dark_spread.unwrap_or(0.0))?;
    if dark_spread < 0.0 {
        return Err(invalid(
            "model.dark_spread",
            format!("must be non-negative, got {dark_spread}"),
        ));
    }
    let dipole = require_finite("model.dipole", raw.model.dipole.unwrap_or(1.0))?;
    if dipole == 0.0 {
        return Err(invalid("model.dipole", "must be nonzero"));
    }
    let model = ModelParams {
        delta,
        coupling,
        n_dark: raw.model.n_dark.unwrap_or(0),
        dark_spread,
        dipole,
    };

    let n_cut = raw.field.n_cut.unwrap_or(DEFAULT_N_CUT);
    let volume = require_finite("field.volume", raw.field.volume.unwrap_or(1.0))?;
    if volume <= 0.0 {
        return Err(invalid(
            "field.volume",
            format!("must be positive, got {volume}"),
        ));
    }
    let z = require_finite("field.z", raw.field.z.unwrap_or(0.0))?;

    let reject_key = |present: bool, key: &'static str, kind: &str| {
        if present {
            Err(invalid(key, format!("not valid for field kind \"{kind}\"")))
        } else {
            Ok(())
        }
    };
    let kind = match raw.field.kind.as_str() {
        "coherent" => {
            reject_key(
                raw.field.temperature.is_some(),
                "field.temperature",
                "coherent",
            )?;
            reject_key(
                raw.field.occupations.is_some(),
                "field.occupations",
                "coherent",
            )?;
            let specs = raw
                .field
                .alphas
                .ok_or_else(|| invalid("field.alphas", "required for field kind \"coherent\""))?;
            if specs.is_empty() {
                return Err(invalid("field.alphas", "must not be empty"));
            }
            let alphas: Vec<C64> = specs.iter().map(C64::from).collect();
            for (i, a) in alphas.iter().enumerate() {
                if !a.re.is_finite() || !a.im.is_finite() {
                    return Err(invalid(
                        "field.alphas",
                        format!("entry {i} must be finite, got {a}"),
                    ));
                }
            }
            FieldKind::Coherent { alphas }
        }
        "thermal" => {
            reject_key(raw.field.alphas.is_some(), "field.alphas", "thermal")?;
            reject_key(
                raw.field.occupations.is_some(),
                "field.occupations",
                "thermal",
            )?;
            let temperature = raw.field.temperature.ok_or_else(|| {
                invalid("field.temperature", "required for field kind \"thermal\"")
            })?;
            let temperature = require_finite("field.temperature", temperature)?;
            if temperature < 0.0 {
                return Err(invalid(
                    "field.temperature",
                    format!("must be non-negative, got {temperature}"),
                ));
            }
            FieldKind::Thermal { temperature }
        }
        "number" => {
            reject_key(raw.field.alphas.is_some(), "field.alphas", "number")?;
            reject_key(
                raw.field.temperature.is_some(),
                "field.temperature",
                "number",
            )?;
            let occupations = raw.field.occupations.ok_or_else(|| {
                invalid("field.occupations", "required for field kind \"number\"")
            })?;
            if occupations.is_empty() {
                return Err(invalid("field.occupations", "must not be empty"));
            }
            for (mode, &n) in occupations.iter().enumerate() {
                if n > n_cut {
                    return Err(invalid(
                        "field.occupations",
                        format!("mode {mode} holds {n} photons, above n_cut = {n_cut}"),
                    ));
                }
            }
            FieldKind::Number { occupations }
        }
        other => {
            return Err(invalid(
                "field.kind",
                format!("expected \"coherent\", \"thermal\" or \"number\", got \"{other}\""),
            ));
        }
    };
    let field = FieldParams {
        kind,
        n_cut,
        volume,
        z,
    };

    let start = require_finite("time.start", raw.time.start)?;
    let stop = require_finite("time.stop", raw.time.stop)?;
    let step = require_finite("time.step", raw.time.step)?;
    if start < 0.0 {
        return Err(invalid(
            "time.start",
            format!("must be non-negative (t₀ = 0 is the end of the pulse), got {start}"),
        ));
    }
    if step <= 0.0 {
        return Err(invalid(
            "time.step",
            format!("must be positive, got {step}"),
        ));
    }
    if stop <= start {
        return Err(invalid(
            "time.stop",
            format!("must exceed time.start = {start}, got {stop}"),
        ));
    }
    let time = TimeGridParams { start, stop, step };
    let points = time.n_points();
    if points < 2 {
        return Err(invalid(
            "time.step",
            format!("grid from {start} to {stop} at step {step} holds fewer than 2 points"),
        ));
    }
    if points > MAX_TIME_POINTS {
        return Err(invalid(
            "time.step",
            format!(
                "grid from {start} to {stop} at step {step} holds {points} points, \
                 above the cap of {MAX_TIME_POINTS}"
            ),
        ));
    }

    let analysis = raw.analysis.unwrap_or(RawAnalysis {
        oracle: None,
        frequency_threshold: None,
    });
    let frequency_threshold = require_finite(
        "analysis.frequency_threshold",
        analysis
            .frequency_threshold
            .unwrap_or(DEFAULT_FREQUENCY_THRESHOLD),
    )?;
    if frequency_threshold <= 0.0 {
        return Err(invalid(
            "analysis.frequency_threshold",
            format!("must be positive, got {frequency_threshold}"),
        ));
    }
    let analysis = AnalysisParams {
        oracle: analysis.oracle.unwrap_or(true),
        frequency_threshold,
    };

    let output = OutputParams {
        dir: raw
            .output
            .and_then(|o| o.dir)
            .unwrap_or_else(|| DEFAULT_OUTPUT_DIR.to_string()),
    };

    Ok(Scenario {
        seed: raw.seed,
        model,
        field,
        time,
        analysis,
        output,
    })
}

/// Shipped example scenarios, also used as acceptance fixtures. Each entry is
/// (name, TOML text).
pub const EXAMPLE_SCENARIOS: &[(&str, &str)] = &[
    (
        "pulsed-two-level",
        include_str!("../../../scenarios/pulsed-two-level.toml"),
    ),
    (
        "pulsed-bright-dark",
        include_str!("../../../scenarios/pulsed-bright-dark.toml"),
    ),
    (
        "thermal-bright-dark",
        include_str!("../../../scenarios/thermal-bright-dark.toml"),
    ),
    (
        "number-state-single-mode",
        include_str!("../../../scenarios/number-state-single-mode.toml"),
    ),
    (
        "oracle-crosscheck",
        include_str!("../../../scenarios/oracle-crosscheck.toml"),
    ),
];

/// Looks up a shipped example by name.
pub fn example_scenario(name: &str) -> Option<&'static str> {
    EXAMPLE_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[model]
delta = 1.0

[field]
kind = "coherent"
alphas = [1.0]

[time]
start = 0.0
stop = 10.0
step = 0.5
"#;

    #[test]
    fn minimal_scenario_gets_defaults() {
        let scenario = parse_scenario(MINIMAL).unwrap();
        assert_eq!(scenario.n_cut(), DEFAULT_N_CUT);
        assert_eq!(scenario.volume(), 1.0);
        assert_eq!(scenario.z(), 0.0);
        assert!(scenario.analysis.oracle);
        assert_eq!(
            scenario.analysis.frequency_threshold,
            DEFAULT_FREQUENCY_THRESHOLD
        );
        assert_eq!(scenario.output.dir, "out");
        assert_eq!(scenario.model.coupling, 0.0);
        assert_eq!(scenario.model.n_dark, 0);
        match &scenario.field.kind {
            FieldKind::Coherent { alphas } => {
                assert_eq!(alphas, &vec![C64::new(1.0, 0.0)]);
            }
            other => panic!("wrong kind: {other:?}"),
        }
        assert_eq!(scenario.time.times().len(), 21);
    }

    #[test]
    fn echo_round_trips() {
        let scenario = parse_scenario(MINIMAL).unwrap();
        let echoed = scenario.to_toml();
        let again = parse_scenario(&echoed).unwrap();
        assert_eq!(again.n_cut(), scenario.n_cut());
        assert_eq!(again.field.kind, scenario.field.kind);
        assert_eq!(again.time.times(), scenario.time.times());
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let text = MINIMAL.replace("[field]", "typo_key = 1\n[field]");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("typo_key"), "error was: {err}");
    }

    #[test]
    fn thermal_without_temperature_names_the_key() {
        let text = MINIMAL
            .replace("kind = \"coherent\"", "kind = \"thermal\"")
            .replace("alphas = [1.0]", "");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("field.temperature"), "error was: {err}");
    }

    #[test]
    fn zero_step_names_the_grid() {
        let text = MINIMAL.replace("step = 0.5", "step = 0.0");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(
            err.contains("time.step") && err.contains("0"),
            "error was: {err}"
        );
    }

    #[test]
    fn oversized_time_grids_are_rejected_without_allocating() {
        let text = MINIMAL.replace("stop = 10.0", "stop = 1.0e300");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("cap"), "error was: {err}");
    }

    #[test]
    fn kind_specific_keys_are_policed() {
        let text = MINIMAL.replace("alphas = [1.0]", "alphas = [1.0]\ntemperature = 0.5");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("field.temperature"), "error was: {err}");

        let text = MINIMAL.replace("kind = \"coherent\"", "kind = \"squeezed\"");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("squeezed"), "error was: {err}");
    }

    #[test]
    fn complex_alphas_accept_pairs() {
        let text = MINIMAL.replace("alphas = [1.0]", "alphas = [[0.0, 2.0], 1.0]");
        let scenario = parse_scenario(&text).unwrap();
        match &scenario.field.kind {
            FieldKind::Coherent { alphas } => {
                assert_eq!(alphas[0], C64::new(0.0, 2.0));
                assert_eq!(alphas[1], C64::new(1.0, 0.0));
            }
            other => panic!("wrong kind: {other:?}"),
        }
    }

    #[test]
    fn number_occupations_respect_the_cut() {
        let text = MINIMAL
            .replace("kind = \"coherent\"", "kind = \"number\"")
            .replace("alphas = [1.0]", "occupations = [9]\nn_cut = 3");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(
            err.contains("9") && err.contains("n_cut"),
            "error was: {err}"
        );
    }

    #[test]
    fn shipped_examples_parse() {
        for (name, text) in EXAMPLE_SCENARIOS {
            let scenario = parse_scenario(text)
                .unwrap_or_else(|e| panic!("example {name} failed to parse: {e}"));
            // fixtures keep the oracle within its documented size
            assert!(scenario.n_cut() <= 4, "{name} has n_cut > 4");
        }
        assert!(example_scenario("pulsed-two-level").is_some());
        assert!(example_scenario("missing").is_none());
    }
}
