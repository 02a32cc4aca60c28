//! The experiment file format and the built-in presets.
//!
//! A file is line-oriented: `[section]` headers, `key = value` pairs,
//! full-line `#` comments, blank lines ignored. Sections are `[circuit]`,
//! `[device M1]`, `[device M2]`, `[stimulus]`, `[solver]`, in any order.
//! Numeric values take one optional case-sensitive SI suffix: k = 1e3,
//! M = 1e6, m = 1e-3, u = 1e-6, n = 1e-9. Unknown sections and keys are
//! hard errors: a typo in a device parameter must not silently run a
//! different experiment.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::circuit::{simulate, PulseTrain, SimulateError, SolverConfig, Topology, Trajectory};
use crate::device::{DriftModel, InvalidParam, MemristorParams, Polarity, StepMethod};

const SECTION_NAMES: [&str; 5] = ["circuit", "device M1", "device M2", "stimulus", "solver"];

fn allowed_keys(section: &str) -> &'static [&'static str] {
    match section {
        "circuit" => &["topology", "label"],
        "device M1" | "device M2" => &[
            "r_on", "r_off", "r_init", "q0", "polarity", "model", "window_p",
        ],
        "stimulus" => &["amplitude", "width", "period", "count", "baseline"],
        "solver" => &["dt", "method", "record_stride"],
        other => unreachable!("not a section name: {other}"),
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    /// Structural problem: malformed line, unknown section or key.
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    /// A value violates a field's constraint.
    #[error("invalid {field}: {constraint}")]
    Validation {
        field: &'static str,
        constraint: &'static str,
    },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("missing section [{section}]")]
    MissingSection { section: &'static str },
}

impl From<InvalidParam> for ParseError {
    fn from(e: InvalidParam) -> Self {
        ParseError::Validation {
            field: e.field,
            constraint: e.constraint,
        }
    }
}

/// A number with an optional SI suffix. Shrinking suffixes divide by
/// exact powers of ten (1e-3 itself is not representable), so the result
/// rounds once: `300n` is bit-identical to the literal 3e-7.
fn parse_number(text: &str) -> Option<f64> {
    let scaled = |scale: f64, shrink: bool| {
        text[..text.len() - 1]
            .parse::<f64>()
            .ok()
            .map(|v| if shrink { v / scale } else { v * scale })
    };
    match text.as_bytes().last() {
        Some(b'k') => scaled(1e3, false),
        Some(b'M') => scaled(1e6, false),
        Some(b'm') => scaled(1e3, true),
        Some(b'u') => scaled(1e6, true),
        Some(b'n') => scaled(1e9, true),
        _ => text.parse().ok(),
    }
}

const NUMBER_CONSTRAINT: &str = "must be a number, optionally with one SI suffix k M m u n";

type Section = HashMap<&'static str, (usize, String)>;

/// Group `key = value` lines under their section headers, enforcing the
/// section and key allowlists. Lines are 1-based in errors.
fn collect_sections(text: &str) -> Result<HashMap<&'static str, Section>, ParseError> {
    let mut sections: HashMap<&'static str, Section> = HashMap::new();
    let mut current: Option<&'static str> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with('[') {
            let name = t
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| ParseError::Syntax {
                    line,
                    message: "section header must look like [name]".to_string(),
                })?;
            let canon = SECTION_NAMES
                .iter()
                .copied()
                .find(|&s| s == name)
                .ok_or_else(|| ParseError::Syntax {
                    line,
                    message: format!("unknown section [{name}]"),
                })?;
            if sections.contains_key(canon) {
                return Err(ParseError::Syntax {
                    line,
                    message: format!("duplicate section [{canon}]"),
                });
            }
            sections.insert(canon, Section::new());
            current = Some(canon);
            continue;
        }
        let section = current.ok_or_else(|| ParseError::Syntax {
            line,
            message: "key before any [section] header".to_string(),
        })?;
        let (key_text, value) = t.split_once('=').ok_or_else(|| ParseError::Syntax {
            line,
            message: "expected `key = value`".to_string(),
        })?;
        let (key_text, value) = (key_text.trim(), value.trim());
        let key = allowed_keys(section)
            .iter()
            .copied()
            .find(|&k| k == key_text)
            .ok_or_else(|| ParseError::Syntax {
                line,
                message: format!("unknown key `{key_text}` in [{section}]"),
            })?;
        let map = sections.get_mut(section).expect("section was inserted");
        if map.contains_key(key) {
            return Err(ParseError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        map.insert(key, (line, value.to_string()));
    }
    Ok(sections)
}

fn require<'a>(map: &'a Section, key: &'static str) -> Result<&'a str, ParseError> {
    map.get(key)
        .map(|(_, v)| v.as_str())
        .ok_or(ParseError::Validation {
            field: key,
            constraint: "is required",
        })
}

fn take_f64(map: &Section, key: &'static str) -> Result<f64, ParseError> {
    parse_number(require(map, key)?).ok_or(ParseError::Validation {
        field: key,
        constraint: NUMBER_CONSTRAINT,
    })
}

fn take_f64_or(map: &Section, key: &'static str, default: f64) -> Result<f64, ParseError> {
    match map.get(key) {
        None => Ok(default),
        Some(_) => take_f64(map, key),
    }
}

fn take_u32(map: &Section, key: &'static str) -> Result<u32, ParseError> {
    require(map, key)?
        .parse()
        .map_err(|_| ParseError::Validation {
            field: key,
            constraint: "must be a whole number",
        })
}

fn take_u32_or(map: &Section, key: &'static str, default: u32) -> Result<u32, ParseError> {
    match map.get(key) {
        None => Ok(default),
        Some(_) => take_u32(map, key),
    }
}

fn device_from(map: &Section) -> Result<MemristorParams, ParseError> {
    let polarity = match require(map, "polarity")? {
        "+1" | "1" => Polarity::Positive,
        "-1" => Polarity::Negative,
        _ => {
            return Err(ParseError::Validation {
                field: "polarity",
                constraint: "must be +1 or -1",
            })
        }
    };
    let model = match require(map, "model")? {
        "linear" => DriftModel::LinearDrift,
        "biolek" => DriftModel::BiolekWindow,
        _ => {
            return Err(ParseError::Validation {
                field: "model",
                constraint: "must be linear or biolek",
            })
        }
    };
    Ok(MemristorParams::new(
        take_f64(map, "r_on")?,
        take_f64(map, "r_off")?,
        take_f64(map, "r_init")?,
        take_f64(map, "q0")?,
        polarity,
        model,
        take_u32_or(map, "window_p", 2)?,
    )?)
}

/// A fully validated simulation setup: circuit, stimulus, solver, label.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    topology: Topology,
    stimulus: PulseTrain,
    solver: SolverConfig,
    label: String,
}

impl Experiment {
    /// Checks the cross-component constraints on top of the per-component
    /// ones: topology invariants, and dt fine enough to resolve the pulse
    /// width. The label is trimmed and must stay on one line so that
    /// serialized experiments remain parseable.
    pub fn new(
        topology: Topology,
        stimulus: PulseTrain,
        solver: SolverConfig,
        label: &str,
    ) -> Result<Self, InvalidParam> {
        topology.validate()?;
        if solver.dt() > stimulus.width() / 10.0 {
            return Err(InvalidParam {
                field: "dt",
                constraint: "must be <= stimulus width / 10",
            });
        }
        let label = label.trim();
        if label.contains(['\n', '\r']) {
            return Err(InvalidParam {
                field: "label",
                constraint: "must be a single line",
            });
        }
        Ok(Experiment {
            topology,
            stimulus,
            solver,
            label: label.to_string(),
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn stimulus(&self) -> &PulseTrain {
        &self.stimulus
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn devices(&self) -> Vec<&MemristorParams> {
        self.topology.devices()
    }

    pub fn run(&self) -> Result<Trajectory, SimulateError> {
        simulate(&self.topology, &self.stimulus, &self.solver)
    }
}

/// Parse and fully validate an experiment file. Omitted optional keys
/// take their defaults: window_p = 2, baseline = 0, method = rk4,
/// record_stride = 1, label empty.
pub fn parse_experiment(text: &str) -> Result<Experiment, ParseError> {
    let sections = collect_sections(text)?;
    let need = |name: &'static str| {
        sections
            .get(name)
            .ok_or(ParseError::MissingSection { section: name })
    };

    let circuit = need("circuit")?;
    let label = circuit.get("label").map_or("", |(_, v)| v.as_str());
    let topology = match require(circuit, "topology")? {
        "single" => {
            if sections.contains_key("device M2") {
                return Err(ParseError::Validation {
                    field: "topology",
                    constraint: "single topology takes no [device M2] section",
                });
            }
            Topology::Single(device_from(need("device M1")?)?)
        }
        "series" => Topology::series(
            device_from(need("device M1")?)?,
            device_from(need("device M2")?)?,
        )?,
        _ => {
            return Err(ParseError::Validation {
                field: "topology",
                constraint: "must be single or series",
            })
        }
    };

    let stim = need("stimulus")?;
    let stimulus = PulseTrain::new(
        take_f64(stim, "amplitude")?,
        take_f64(stim, "width")?,
        take_f64(stim, "period")?,
        take_u32(stim, "count")?,
        take_f64_or(stim, "baseline", 0.0)?,
    )?;

    let solver_map = need("solver")?;
    let method = match solver_map.get("method").map(|(_, v)| v.as_str()) {
        None => StepMethod::Rk4,
        Some("euler") => StepMethod::Euler,
        Some("rk4") => StepMethod::Rk4,
        Some(_) => {
            return Err(ParseError::Validation {
                field: "method",
                constraint: "must be euler or rk4",
            })
        }
    };
    let solver = SolverConfig::new(
        take_f64(solver_map, "dt")?,
        method,
        take_u32_or(solver_map, "record_stride", 1)?,
    )?;

    Ok(Experiment::new(topology, stimulus, solver, label)?)
}

/// Shortest text that `parse_number` maps back to exactly v: an integer
/// in [1, 1000) with an SI suffix when that reproduces the bits, else
/// the plain shortest decimal form.
fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    for (scale, grow, suffix) in [
        (1e6, false, "M"),
        (1e3, false, "k"),
        (1.0, false, ""),
        (1e3, true, "m"),
        (1e6, true, "u"),
        (1e9, true, "n"),
    ] {
        let scaled = if grow { v * scale } else { v / scale };
        if scaled.abs() >= 1.0 && scaled.abs() < 1000.0 && scaled.fract() == 0.0 {
            let candidate = format!("{}{}", scaled as i64, suffix);
            if parse_number(&candidate) == Some(v) {
                return candidate;
            }
        }
    }
    format!("{v}")
}

/// Render an experiment as a file that parses back to an equal value.
/// Every applied default is written out explicitly.
pub fn serialize_experiment(exp: &Experiment) -> String {
    let mut out = String::new();
    let kind = match exp.topology() {
        Topology::Single(_) => "single",
        Topology::SeriesPair { .. } => "series",
    };
    let _ = writeln!(out, "[circuit]");
    let _ = writeln!(out, "topology = {kind}");
    if exp.label().is_empty() {
        let _ = writeln!(out, "label =");
    } else {
        let _ = writeln!(out, "label = {}", exp.label());
    }
    for (i, dev) in exp.devices().iter().enumerate() {
        let _ = writeln!(out, "\n[device M{}]", i + 1);
        let _ = writeln!(out, "r_on = {}", format_number(dev.r_on()));
        let _ = writeln!(out, "r_off = {}", format_number(dev.r_off()));
        let _ = writeln!(out, "r_init = {}", format_number(dev.r_init()));
        let _ = writeln!(out, "q0 = {}", format_number(dev.q0()));
        let polarity = match dev.polarity() {
            Polarity::Positive => "+1",
            Polarity::Negative => "-1",
        };
        let _ = writeln!(out, "polarity = {polarity}");
        let model = match dev.model() {
            DriftModel::LinearDrift => "linear",
            DriftModel::BiolekWindow => "biolek",
        };
        let _ = writeln!(out, "model = {model}");
        let _ = writeln!(out, "window_p = {}", dev.window_p());
    }
    let stim = exp.stimulus();
    let _ = writeln!(out, "\n[stimulus]");
    let _ = writeln!(out, "amplitude = {}", format_number(stim.amplitude()));
    let _ = writeln!(out, "width = {}", format_number(stim.width()));
    let _ = writeln!(out, "period = {}", format_number(stim.period()));
    let _ = writeln!(out, "count = {}", stim.count());
    let _ = writeln!(out, "baseline = {}", format_number(stim.baseline()));
    let solver = exp.solver();
    let _ = writeln!(out, "\n[solver]");
    let _ = writeln!(out, "dt = {}", format_number(solver.dt()));
    let method = match solver.method() {
        StepMethod::Euler => "euler",
        StepMethod::Rk4 => "rk4",
    };
    let _ = writeln!(out, "method = {method}");
    let _ = writeln!(out, "record_stride = {}", solver.record_stride());
    out
}

/// Names accepted by `preset`, in canonical order: the three series
/// pairs spanning the swing-ratio regimes, then the single device.
pub const PRESET_NAMES: [&str; 4] = ["alpha_small", "alpha_one", "alpha_large", "single_fig1"];

/// Charge scale shared by all presets. Sized so the default 50-pulse
/// train moves a device through a large fraction of its state range at
/// the preset resistances (microamp currents): small enough that regime
/// shapes show within one run, large enough that no pair device rails
/// before the train ends.
pub const PRESET_Q0: f64 = 3e-7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error(
    "unknown preset `{name}` (expected one of alpha_small, alpha_one, alpha_large, single_fig1)"
)]
pub struct UnknownPreset {
    pub name: String,
}

/// A built-in experiment: series pairs with swing ratios well below,
/// at, and well above 1, or the single device started at its highest
/// resistance. All use the default stimulus and solver and carry their
/// preset name as label.
pub fn preset(name: &str) -> Result<Experiment, UnknownPreset> {
    let dev = |r_on, r_off, r_init, polarity| {
        MemristorParams::new(
            r_on,
            r_off,
            r_init,
            PRESET_Q0,
            polarity,
            DriftModel::LinearDrift,
            2,
        )
        .expect("preset device parameters are valid")
    };
    let pair = |m1, m2| Topology::series(m1, m2).expect("preset polarities are opposite");
    let topology = match name {
        "alpha_small" => pair(
            dev(100.0, 10e3, 9e3, Polarity::Positive),
            dev(100.0, 1e6, 9e3, Polarity::Negative),
        ),
        "alpha_one" => pair(
            dev(100.0, 400e3, 399e3, Polarity::Positive),
            dev(100.0, 400e3, 1e3, Polarity::Negative),
        ),
        "alpha_large" => pair(
            dev(100.0, 1e6, 950e3, Polarity::Positive),
            dev(100.0, 10e3, 1e3, Polarity::Negative),
        ),
        "single_fig1" => Topology::Single(dev(100.0, 100e3, 100e3, Polarity::Positive)),
        _ => {
            return Err(UnknownPreset {
                name: name.to_string(),
            })
        }
    };
    Ok(Experiment::new(
        topology,
        PulseTrain::default(),
        SolverConfig::default(),
        name,
    )
    .expect("preset experiments are valid"))
}
