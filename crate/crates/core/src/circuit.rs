//! Circuit level: topologies, the rectangular pulse-train stimulus, and
//! the fixed-step transient solver producing sampled trajectories.

use thiserror::Error;

use crate::device::{InvalidParam, MemristorParams, MemristorState, NonFiniteState, StepMethod};

/// One device across the source, or two in series with opposite
/// polarities so one moves toward r_on while the other moves toward
/// r_off under the same current.
#[derive(Debug, Clone, PartialEq)]
pub enum Topology {
    Single(MemristorParams),
    SeriesPair {
        m1: MemristorParams,
        m2: MemristorParams,
    },
}

impl Topology {
    /// Series pair constructor enforcing opposite polarities.
    pub fn series(m1: MemristorParams, m2: MemristorParams) -> Result<Self, InvalidParam> {
        let topology = Topology::SeriesPair { m1, m2 };
        topology.validate()?;
        Ok(topology)
    }

    /// Re-checks the cross-device invariant. Variants are public, so the
    /// solver and the experiment builder call this before trusting one.
    pub fn validate(&self) -> Result<(), InvalidParam> {
        if let Topology::SeriesPair { m1, m2 } = self {
            if m1.polarity() == m2.polarity() {
                return Err(InvalidParam {
                    field: "polarity",
                    constraint: "series devices must have opposite polarities",
                });
            }
        }
        Ok(())
    }

    /// Devices in circuit order (m1 first).
    pub fn devices(&self) -> Vec<&MemristorParams> {
        match self {
            Topology::Single(p) => vec![p],
            Topology::SeriesPair { m1, m2 } => vec![m1, m2],
        }
    }

    pub fn initial_states(&self) -> Vec<MemristorState> {
        self.devices().iter().map(|d| d.initial_state()).collect()
    }
}

/// Rectangular pulse train: `count` pulses of `amplitude` and `width`
/// seconds, one per `period`, with `baseline` volts elsewhere. Pulse k
/// occupies [k * period, k * period + width).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTrain {
    amplitude: f64,
    width: f64,
    period: f64,
    count: u32,
    baseline: f64,
}

impl PulseTrain {
    pub fn new(
        amplitude: f64,
        width: f64,
        period: f64,
        count: u32,
        baseline: f64,
    ) -> Result<Self, InvalidParam> {
        if !amplitude.is_finite() {
            return Err(InvalidParam {
                field: "amplitude",
                constraint: "must be finite",
            });
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(InvalidParam {
                field: "width",
                constraint: "must be finite and > 0",
            });
        }
        if !(period.is_finite() && period >= width) {
            return Err(InvalidParam {
                field: "period",
                constraint: "must be finite and >= width",
            });
        }
        if count < 1 {
            return Err(InvalidParam {
                field: "count",
                constraint: "must be >= 1",
            });
        }
        if !baseline.is_finite() {
            return Err(InvalidParam {
                field: "baseline",
                constraint: "must be finite",
            });
        }
        Ok(Self {
            amplitude,
            width,
            period,
            count,
            baseline,
        })
    }

    /// Constant drive: a single pulse spanning the whole duration.
    pub fn constant(volts: f64, duration: f64) -> Result<Self, InvalidParam> {
        Self::new(volts, duration, duration, 1, volts)
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn count(&self) -> u32 {
        self.count
    }

    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    /// Total simulated span, count * period.
    pub fn total_duration(&self) -> f64 {
        self.period * f64::from(self.count)
    }

    /// Source voltage at time t: amplitude inside each pulse window
    /// [k*period, k*period + width), baseline between pulses, before 0,
    /// and after the train.
    ///
    /// Edges are resolved with a 1e-9 relative guard in period units:
    /// a t carrying ordinary f64 round-off (solver times are k*dt) lands
    /// on the nominal edge instead of one sample to either side. The
    /// guard assumes fewer than ~1e6 pulses and more than ~1e-9 period
    /// per step, both far beyond any runnable configuration.
    pub fn source_voltage_at(&self, t: f64) -> f64 {
        const EDGE_GUARD: f64 = 1e-9;
        let u = t / self.period;
        let pulse = (u + EDGE_GUARD).floor();
        if t < 0.0 || pulse >= f64::from(self.count) {
            return self.baseline;
        }
        // just below a pulse start the guarded offset is slightly
        // negative, which correctly reads as inside the pulse
        let offset = (u - pulse) * self.period;
        if offset < self.width * (1.0 - EDGE_GUARD) {
            self.amplitude
        } else {
            self.baseline
        }
    }
}

impl Default for PulseTrain {
    /// The stimulus used by the built-in presets: 50 pulses of 1 V and
    /// 1 ms, one every 2 ms, 0 V between pulses.
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            width: 1e-3,
            period: 2e-3,
            count: 50,
            baseline: 0.0,
        }
    }
}

/// Fixed-step solver settings. `record_stride` keeps every k-th sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    dt: f64,
    method: StepMethod,
    record_stride: u32,
}

impl SolverConfig {
    pub fn new(dt: f64, method: StepMethod, record_stride: u32) -> Result<Self, InvalidParam> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(InvalidParam {
                field: "dt",
                constraint: "must be finite and > 0",
            });
        }
        if record_stride < 1 {
            return Err(InvalidParam {
                field: "record_stride",
                constraint: "must be >= 1",
            });
        }
        Ok(Self {
            dt,
            method,
            record_stride,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn method(&self) -> StepMethod {
        self.method
    }

    pub fn record_stride(&self) -> u32 {
        self.record_stride
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 2e-6,
            method: StepMethod::Rk4,
            record_stride: 1,
        }
    }
}

/// One recorded instant. x2 and m2 are None for the Single topology; q is
/// the charge common to every device in the circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub v: f64,
    pub i: f64,
    pub x1: f64,
    pub m1: f64,
    pub x2: Option<f64>,
    pub m2: Option<f64>,
    pub m_total: f64,
    pub q: f64,
}

/// Uniformly sampled solver output together with the inputs that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub topology: Topology,
    pub stimulus: PulseTrain,
    pub solver: SolverConfig,
    pub samples: Vec<Sample>,
}

impl Trajectory {
    /// Time between recorded samples, dt * record_stride.
    pub fn sample_spacing(&self) -> f64 {
        self.solver.dt() * f64::from(self.solver.record_stride())
    }

    /// Index of the recorded sample nearest to time t.
    pub fn nearest_sample_index(&self, t: f64) -> usize {
        let idx = (t / self.sample_spacing()).round().max(0.0) as usize;
        idx.min(self.samples.len().saturating_sub(1))
    }

    /// Time of the last recorded sample.
    pub fn end_time(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulateError {
    /// Inputs violate a constraint (coarse dt, matched polarities).
    #[error(transparent)]
    Config(#[from] InvalidParam),
    /// A device state became non-finite at simulation time t.
    #[error("at t = {t} s: {source}")]
    NonFinite { t: f64, source: NonFiniteState },
}

/// Probe pair on a series circuit: T12 spans the whole update path,
/// T23 reads m1 alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminals {
    T12,
    T23,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("terminals 2-3 are only defined for a series pair")]
pub struct InvalidTerminals;

/// Resistance seen across the given terminals. `states` holds one entry
/// per device in topology order.
pub fn readout_resistance(
    topology: &Topology,
    states: &[MemristorState],
    terminals: Terminals,
) -> Result<f64, InvalidTerminals> {
    match (topology, terminals) {
        (Topology::Single(p), Terminals::T12) => Ok(p.memristance(&states[0])),
        (Topology::Single(_), Terminals::T23) => Err(InvalidTerminals),
        (Topology::SeriesPair { m1, m2 }, Terminals::T12) => {
            Ok(m1.memristance(&states[0]) + m2.memristance(&states[1]))
        }
        (Topology::SeriesPair { m1, .. }, Terminals::T23) => Ok(m1.memristance(&states[0])),
    }
}

/// Current drawn from the source at voltage v: the circuit is purely
/// resistive at any instant, so this is v over the series memristance.
/// Finite because every memristance is at least r_on > 0.
pub fn instantaneous_current(topology: &Topology, states: &[MemristorState], v: f64) -> f64 {
    let m_total: f64 = topology
        .devices()
        .iter()
        .zip(states)
        .map(|(d, s)| d.memristance(s))
        .sum();
    v / m_total
}

/// Fixed-step transient simulation over the stimulus' full duration
/// (count * period). Each step reads the source voltage, computes the
/// current from the present memristances, then advances every device
/// with that current frozen, so series devices accumulate identical
/// charge. Samples record the state before the step at their time.
pub fn simulate(
    topology: &Topology,
    stimulus: &PulseTrain,
    solver: &SolverConfig,
) -> Result<Trajectory, SimulateError> {
    topology.validate()?;
    if solver.dt() > stimulus.width() / 10.0 {
        return Err(InvalidParam {
            field: "dt",
            constraint: "must be <= stimulus width / 10",
        }
        .into());
    }

    let devices = topology.devices();
    let dt = solver.dt();
    let stride = u64::from(solver.record_stride());
    let n_steps = (stimulus.total_duration() / dt).round() as u64;

    let mut states = topology.initial_states();
    let mut samples = Vec::with_capacity((n_steps / stride + 2) as usize);
    let mut ms = [0.0f64; 2];

    for k in 0..=n_steps {
        let t = k as f64 * dt;
        let v = stimulus.source_voltage_at(t);
        let mut m_total = 0.0;
        for (j, dev) in devices.iter().enumerate() {
            ms[j] = dev.memristance(&states[j]);
            m_total += ms[j];
        }
        let i = v / m_total;
        if k % stride == 0 {
            samples.push(Sample {
                t,
                v,
                i,
                x1: states[0].x,
                m1: ms[0],
                x2: states.get(1).map(|s| s.x),
                m2: (devices.len() > 1).then(|| ms[1]),
                m_total,
                q: states[0].q,
            });
        }
        if k == n_steps {
            break;
        }
        for (j, dev) in devices.iter().enumerate() {
            states[j] = dev
                .step_state(&states[j], i, dt, solver.method())
                .map_err(|source| SimulateError::NonFinite { t, source })?;
        }
    }

    Ok(Trajectory {
        topology: topology.clone(),
        stimulus: *stimulus,
        solver: *solver,
        samples,
    })
}
