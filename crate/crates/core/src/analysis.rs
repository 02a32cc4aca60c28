//! Trajectory analysis: per-pulse memristance deltas, update-regime
//! classification, the swing ratio, least-squares linearity, and
//! constant-voltage closed forms used to cross-check the solver.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::circuit::{PulseTrain, Topology, Trajectory};
use crate::device::{DriftModel, MemristorParams};

/// A pulse counts as saturated when its |delta| falls to this fraction of
/// the first pulse's |delta|.
pub const SATURATION_FLOOR_REL: f64 = 1e-3;

/// Default relative band around the mean delta for the Linear regime.
pub const DEFAULT_TOL_REL: f64 = 0.05;

/// Change of m1 across one pulse window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseDelta {
    pub pulse_index: u32,
    pub delta_m1: f64,
}

/// One entry per stimulus pulse, saturated pulses included.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseDeltaSeries {
    pub deltas: Vec<PulseDelta>,
}

/// Shape of the per-pulse update magnitudes over the train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Accelerating,
    Linear,
    Decelerating,
    Saturated,
    Mixed,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Accelerating => "Accelerating",
            Regime::Linear => "Linear",
            Regime::Decelerating => "Decelerating",
            Regime::Saturated => "Saturated",
            Regime::Mixed => "Mixed",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("trajectory ends at {trajectory_end} s but the stimulus spans {required} s")]
pub struct StimulusMismatch {
    pub trajectory_end: f64,
    pub required: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("classification needs at least 3 non-saturated pulses, found {found}")]
pub struct TooFewPulses {
    pub found: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("need at least {required} samples in the window, found {found}")]
pub struct TooFewSamples {
    pub found: usize,
    pub required: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("closed form leaves its validity range at t = {t} s (a device state would exit [0, 1])")]
pub struct OutOfValidity {
    pub t: f64,
}

/// Change in m1 from the start to the end of each pulse window, read at
/// the nearest recorded samples. Requires the trajectory to cover the
/// stimulus (to within half a sample spacing at the end).
pub fn per_pulse_deltas(
    traj: &Trajectory,
    stim: &PulseTrain,
) -> Result<PulseDeltaSeries, StimulusMismatch> {
    let spacing = traj.sample_spacing();
    let required = stim.total_duration();
    if traj.end_time() < required - 0.5 * spacing {
        return Err(StimulusMismatch {
            trajectory_end: traj.end_time(),
            required,
        });
    }
    let m1_at = |t: f64| traj.samples[traj.nearest_sample_index(t)].m1;
    let deltas = (0..stim.count())
        .map(|k| {
            let start = f64::from(k) * stim.period();
            PulseDelta {
                pulse_index: k,
                delta_m1: m1_at(start + stim.width()) - m1_at(start),
            }
        })
        .collect();
    Ok(PulseDeltaSeries { deltas })
}

/// Absolute floor below which a pulse delta counts as saturated,
/// SATURATION_FLOOR_REL of the first pulse's magnitude.
pub fn saturation_floor(series: &PulseDeltaSeries) -> f64 {
    series
        .deltas
        .first()
        .map_or(0.0, |d| SATURATION_FLOOR_REL * d.delta_m1.abs())
}

/// First pulse whose |delta| is at or below the saturation floor.
pub fn first_saturated_index(series: &PulseDeltaSeries) -> Option<usize> {
    let floor = saturation_floor(series);
    series.deltas.iter().position(|d| d.delta_m1.abs() <= floor)
}

/// Time window from zero to the start of the first saturated pulse, or
/// the whole train when nothing saturates. Used for linearity fits.
pub fn pre_saturation_window(series: &PulseDeltaSeries, stim: &PulseTrain) -> Range<f64> {
    let end = match first_saturated_index(series) {
        Some(k) => k as f64 * stim.period(),
        None => stim.total_duration(),
    };
    0.0..end
}

/// Classify the per-pulse update pattern over the non-saturated pulses:
/// all |delta| within tol_rel of their mean is Linear, strictly growing
/// beyond that band is Accelerating, strictly shrinking is Decelerating,
/// everything at the floor is Saturated, anything else is Mixed.
///
/// When a saturated tail exists, the pulse immediately before it is also
/// excluded: that pulse is truncated by the device hitting its rail
/// mid-pulse, so its delta says nothing about the update trend.
pub fn classify_regime(series: &PulseDeltaSeries, tol_rel: f64) -> Result<Regime, TooFewPulses> {
    let mags: Vec<f64> = series.deltas.iter().map(|d| d.delta_m1.abs()).collect();
    if mags.is_empty() {
        return Err(TooFewPulses { found: 0 });
    }
    let active = match first_saturated_index(series) {
        Some(0) => return Ok(Regime::Saturated),
        Some(k) => &mags[..k - 1],
        None => &mags[..],
    };
    if active.len() < 3 {
        return Err(TooFewPulses {
            found: active.len(),
        });
    }
    let mean = active.iter().sum::<f64>() / active.len() as f64;
    if active.iter().all(|&d| (d - mean).abs() <= tol_rel * mean) {
        return Ok(Regime::Linear);
    }
    if active.windows(2).all(|w| w[1] > w[0]) {
        return Ok(Regime::Accelerating);
    }
    if active.windows(2).all(|w| w[1] < w[0]) {
        return Ok(Regime::Decelerating);
    }
    Ok(Regime::Mixed)
}

/// Swing ratio delta_r(m1) / delta_r(m2). Values well below 1 give
/// decelerating updates, near 1 linear, well above 1 accelerating.
pub fn alpha(m1: &MemristorParams, m2: &MemristorParams) -> f64 {
    m1.delta_r() / m2.delta_r()
}

/// Closed-form memristance of a single LinearDrift device under constant
/// voltage v: M(t) = sqrt(r_init^2 - 2 eta delta_r v t / q0), valid while
/// the state stays inside [0, 1].
///
/// Panics if the device is not LinearDrift (the windowed model has no
/// elementary closed form).
pub fn oracle_single_const_v(
    params: &MemristorParams,
    v: f64,
    t: f64,
) -> Result<f64, OutOfValidity> {
    assert!(
        params.model() == DriftModel::LinearDrift,
        "closed form requires LinearDrift"
    );
    let radicand = params.r_init() * params.r_init()
        - 2.0 * params.polarity().value() * params.delta_r() * v * t / params.q0();
    if radicand < params.r_on() * params.r_on() || radicand > params.r_off() * params.r_off() {
        return Err(OutOfValidity { t });
    }
    Ok(radicand.sqrt())
}

/// Closed-form (m_total, m1) for an opposite-polarity LinearDrift series
/// pair with equal q0 under constant voltage v, with eta the polarity of
/// m1:
///
///   m_total(t) = sqrt((r01 + r02)^2 - 2 eta (dR1 - dR2) v t / q0)
///   q(t)       = 2 v t / (r01 + r02 + m_total(t))
///   m1(t)      = r01 - eta dR1 q(t) / q0
///
/// Valid while both states stay inside [0, 1]. Panics if a precondition
/// on the pair (models, polarities, equal q0) is violated.
pub fn oracle_series_const_v(
    m1: &MemristorParams,
    m2: &MemristorParams,
    v: f64,
    t: f64,
) -> Result<(f64, f64), OutOfValidity> {
    assert!(
        m1.model() == DriftModel::LinearDrift && m2.model() == DriftModel::LinearDrift,
        "closed form requires LinearDrift"
    );
    assert!(
        m1.polarity() != m2.polarity(),
        "closed form requires opposite polarities"
    );
    assert!(m1.q0() == m2.q0(), "closed form requires equal q0");

    let eta = m1.polarity().value();
    let q0 = m1.q0();
    let m0 = m1.r_init() + m2.r_init();
    let radicand = m0 * m0 - 2.0 * eta * (m1.delta_r() - m2.delta_r()) * v * t / q0;
    if radicand <= 0.0 {
        return Err(OutOfValidity { t });
    }
    let m_total = radicand.sqrt();
    // conjugate form of q = q0 (m0 - m_total) / (eta (dR1 - dR2)); exact
    // and stable even when the swings match
    let q = 2.0 * v * t / (m0 + m_total);
    for (dev, sign) in [(m1, eta), (m2, -eta)] {
        let x = dev.initial_state().x + sign * q / dev.q0();
        if !(-1e-12..=1.0 + 1e-12).contains(&x) {
            return Err(OutOfValidity { t });
        }
    }
    Ok((m_total, m1.r_init() - eta * m1.delta_r() * q / q0))
}

/// Simulated time at which the constant-voltage closed forms stop being
/// valid because some device state reaches 0 or 1. Infinity when no rail
/// is ever hit (zero drive).
pub fn oracle_validity_end(topology: &Topology, v: f64) -> f64 {
    if v == 0.0 {
        return f64::INFINITY;
    }
    // charge to move a device from its initial state to the rail the
    // drive pushes it toward
    let rail_charge = |dev: &MemristorParams| -> f64 {
        let moving_up = dev.polarity().value() * v.signum() > 0.0;
        let dx = if moving_up {
            1.0 - dev.initial_state().x
        } else {
            dev.initial_state().x
        };
        dev.q0() * dx
    };
    // t(q) from integrating v dt = M dq along the unclamped solution
    match topology {
        Topology::Single(p) => {
            let q = v.signum() * rail_charge(p);
            (p.r_init() * q - p.polarity().value() * p.delta_r() * q * q / (2.0 * p.q0())) / v
        }
        Topology::SeriesPair { m1, m2 } => {
            let q = v.signum() * rail_charge(m1).min(rail_charge(m2));
            let m0 = m1.r_init() + m2.r_init();
            let eta = m1.polarity().value();
            (m0 * q - eta * (m1.delta_r() - m2.delta_r()) * q * q / (2.0 * m1.q0())) / v
        }
    }
}

/// Coefficient of determination of an ordinary least-squares line fit to
/// m1 over samples whose t lies in the window (end exclusive). Data with
/// zero variance is a perfect fit by convention.
pub fn linearity_r2(traj: &Trajectory, window: Range<f64>) -> Result<f64, TooFewSamples> {
    const MIN_SAMPLES: usize = 10;
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| window.contains(&s.t))
        .map(|s| (s.t, s.m1))
        .collect();
    if pts.len() < MIN_SAMPLES {
        return Err(TooFewSamples {
            found: pts.len(),
            required: MIN_SAMPLES,
        });
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_m = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut stt, mut stm, mut smm) = (0.0, 0.0, 0.0);
    for (t, m) in &pts {
        let a = t - mean_t;
        let b = m - mean_m;
        stt += a * a;
        stm += a * b;
        smm += b * b;
    }
    if smm == 0.0 {
        return Ok(1.0);
    }
    Ok((stm * stm / (stt * smm)).min(1.0))
}
