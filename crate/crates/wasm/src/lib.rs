//! Browser bindings for the demo page: list presets, fetch preset files,
//! and run experiment text into a JSON summary ready for plotting.
//!
//! All logic lives in `_impl` functions that compile and test on any
//! target; the `#[wasm_bindgen]` wrappers only translate errors, so the
//! host test suite exercises exactly what the browser calls.

use memsyn::analysis::{
    alpha, classify_regime, linearity_r2, per_pulse_deltas, pre_saturation_window, DEFAULT_TOL_REL,
};
use memsyn::expfile::PRESET_NAMES;
use memsyn::{parse_experiment, preset, serialize_experiment, Topology};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Everything the page needs from one run. Trace arrays are decimated to
/// roughly `max_points` entries; the analysis fields are computed from
/// the full-resolution trajectory first.
#[derive(Serialize)]
struct RunResponse {
    label: String,
    series: bool,
    alpha: Option<f64>,
    regime: Option<String>,
    r2: Option<f64>,
    final_m1: f64,
    total_q: f64,
    sample_count: usize,
    t: Vec<f64>,
    v: Vec<f64>,
    m1: Vec<f64>,
    m2: Option<Vec<f64>>,
    m_total: Vec<f64>,
    deltas: Vec<f64>,
}

fn preset_names_impl() -> String {
    serde_json::to_string(&PRESET_NAMES).expect("a string array serializes")
}

fn preset_text_impl(name: &str) -> Result<String, String> {
    preset(name)
        .map(|exp| serialize_experiment(&exp))
        .map_err(|e| e.to_string())
}

fn run_experiment_impl(text: &str, max_points: Option<u32>) -> Result<String, String> {
    let exp = parse_experiment(text).map_err(|e| e.to_string())?;
    let traj = exp.run().map_err(|e| e.to_string())?;

    let (deltas, regime, r2) = match per_pulse_deltas(&traj, exp.stimulus()) {
        Ok(series) => (
            series.deltas.iter().map(|d| d.delta_m1).collect(),
            classify_regime(&series, DEFAULT_TOL_REL)
                .ok()
                .map(|r| r.to_string()),
            linearity_r2(&traj, pre_saturation_window(&series, exp.stimulus())).ok(),
        ),
        Err(_) => (Vec::new(), None, None),
    };
    let pair_alpha = match exp.topology() {
        Topology::SeriesPair { m1, m2 } => Some(alpha(m1, m2)),
        Topology::Single(_) => None,
    };

    let n = traj.samples.len();
    let max = max_points.unwrap_or(4000).max(2) as usize;
    let stride = n.div_ceil(max).max(1);
    let mut keep: Vec<usize> = (0..n).step_by(stride).collect();
    if keep.last() != Some(&(n - 1)) {
        keep.push(n - 1);
    }

    let col = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { keep.iter().map(|&k| f(k)).collect() };
    let last = traj.samples.last().expect("a run records at least t = 0");
    let resp = RunResponse {
        label: exp.label().to_string(),
        series: pair_alpha.is_some(),
        alpha: pair_alpha,
        regime,
        r2,
        final_m1: last.m1,
        total_q: last.q,
        sample_count: n,
        t: col(&|k| traj.samples[k].t),
        v: col(&|k| traj.samples[k].v),
        m1: col(&|k| traj.samples[k].m1),
        m2: traj.samples[0]
            .m2
            .map(|_| col(&|k| traj.samples[k].m2.expect("pair column present throughout"))),
        m_total: col(&|k| traj.samples[k].m_total),
        deltas,
    };
    serde_json::to_string(&resp).map_err(|e| e.to_string())
}

/// JSON array of the built-in preset names.
#[wasm_bindgen]
pub fn preset_names() -> String {
    preset_names_impl()
}

/// The experiment file text for a preset.
#[wasm_bindgen]
pub fn preset_text(name: &str) -> Result<String, JsError> {
    preset_text_impl(name).map_err(|e| JsError::new(&e))
}

/// Parses and runs experiment text, returning the JSON `RunResponse`.
#[wasm_bindgen]
pub fn run_experiment_json(text: &str, max_points: Option<u32>) -> Result<String, JsError> {
    run_experiment_impl(text, max_points).map_err(|e| JsError::new(&e))
}
