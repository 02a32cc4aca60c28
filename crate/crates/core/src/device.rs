//! Single-device model: static parameters, dynamic state, memristance,
//! drift rate with an optional boundary window, and one-step integration.

use thiserror::Error;

/// A construction-time parameter constraint was violated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {field}: {constraint}")]
pub struct InvalidParam {
    pub field: &'static str,
    pub constraint: &'static str,
}

/// Integration produced a non-finite state component.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("integration produced a non-finite state (x = {x}, q = {q})")]
pub struct NonFiniteState {
    pub x: f64,
    pub q: f64,
}

/// Device orientation. Positive means positive current drives the state x
/// up (memristance falls toward r_on); Negative is the mirror image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    /// The sign as a factor: +1.0 or -1.0.
    pub fn value(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn opposite(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }
}

/// Dopant drift law. LinearDrift moves the boundary in direct proportion
/// to charge; BiolekWindow multiplies the rate by a window that vanishes
/// at the boundary the current is pushing toward.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriftModel {
    LinearDrift,
    BiolekWindow,
}

/// One-step integration scheme. The device current is frozen over the
/// step either way; Rk4 only refines the x dependence of the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepMethod {
    Euler,
    Rk4,
}

/// Dynamic state of one device: normalized boundary position x in [0, 1]
/// (x = 0 is r_off, x = 1 is r_on) and signed accumulated charge q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorState {
    pub x: f64,
    pub q: f64,
}

/// Static parameters of one memristor. Immutable after construction;
/// `new` enforces 0 < r_on < r_off, r_on <= r_init <= r_off, q0 > 0,
/// window_p >= 1. q0 is the charge that sweeps the boundary across the
/// whole device; geometry and mobility are absorbed into it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorParams {
    r_on: f64,
    r_off: f64,
    r_init: f64,
    q0: f64,
    polarity: Polarity,
    model: DriftModel,
    window_p: u32,
}

impl MemristorParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        r_on: f64,
        r_off: f64,
        r_init: f64,
        q0: f64,
        polarity: Polarity,
        model: DriftModel,
        window_p: u32,
    ) -> Result<Self, InvalidParam> {
        if !(r_on.is_finite() && r_on > 0.0) {
            return Err(InvalidParam {
                field: "r_on",
                constraint: "must be finite and > 0",
            });
        }
        if !(r_off.is_finite() && r_off > r_on) {
            return Err(InvalidParam {
                field: "r_off",
                constraint: "must be finite and > r_on",
            });
        }
        if !(r_init.is_finite() && r_on <= r_init && r_init <= r_off) {
            return Err(InvalidParam {
                field: "r_init",
                constraint: "must satisfy r_on <= r_init <= r_off",
            });
        }
        if !(q0.is_finite() && q0 > 0.0) {
            return Err(InvalidParam {
                field: "q0",
                constraint: "must be finite and > 0",
            });
        }
        if window_p < 1 {
            return Err(InvalidParam {
                field: "window_p",
                constraint: "must be >= 1",
            });
        }
        Ok(Self {
            r_on,
            r_off,
            r_init,
            q0,
            polarity,
            model,
            window_p,
        })
    }

    pub fn r_on(&self) -> f64 {
        self.r_on
    }

    pub fn r_off(&self) -> f64 {
        self.r_off
    }

    pub fn r_init(&self) -> f64 {
        self.r_init
    }

    pub fn q0(&self) -> f64 {
        self.q0
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn model(&self) -> DriftModel {
        self.model
    }

    pub fn window_p(&self) -> u32 {
        self.window_p
    }

    /// Same device with a different drift law.
    pub fn with_model(self, model: DriftModel) -> Self {
        Self { model, ..self }
    }

    /// Memristance swing r_off - r_on, computed exactly.
    pub fn delta_r(&self) -> f64 {
        self.r_off - self.r_on
    }

    /// State corresponding to r_init, with no accumulated charge.
    pub fn initial_state(&self) -> MemristorState {
        MemristorState {
            x: (self.r_off - self.r_init) / self.delta_r(),
            q: 0.0,
        }
    }

    /// Instantaneous memristance r_off - delta_r * x, clamped to
    /// [r_on, r_off] so rounding can never leave the physical range.
    pub fn memristance(&self, state: &MemristorState) -> f64 {
        (self.r_off - self.delta_r() * state.x).clamp(self.r_on, self.r_off)
    }

    /// Boundary window multiplying dx/dt: 1 - (x - step(-i))^(2p), where
    /// step(u) = 1 for u >= 0. The current sign selects which boundary
    /// suppresses motion; zero current counts as non-negative. LinearDrift
    /// is the constant window 1.
    pub fn window(&self, state: &MemristorState, current: f64) -> f64 {
        match self.model {
            DriftModel::LinearDrift => 1.0,
            DriftModel::BiolekWindow => {
                let step = if -current >= 0.0 { 1.0 } else { 0.0 };
                let d = state.x - step;
                // (d*d)^p = d^(2p) while keeping the base non-negative.
                1.0 - (d * d).powf(f64::from(self.window_p))
            }
        }
    }

    /// Time derivatives (dx/dt, dq/dt) under the given device current.
    pub fn state_derivative(&self, state: &MemristorState, current: f64) -> (f64, f64) {
        let dx_dt = self.polarity.value() * current / self.q0 * self.window(state, current);
        (dx_dt, current)
    }

    /// Advance one step of length dt with the current frozen across the
    /// step. x is clamped to [0, 1] afterwards; q advances by current * dt
    /// exactly. Intermediate Rk4 stages evaluate the rate at clamped x so
    /// the window is never fed an out-of-range state.
    pub fn step_state(
        &self,
        state: &MemristorState,
        current: f64,
        dt: f64,
        method: StepMethod,
    ) -> Result<MemristorState, NonFiniteState> {
        debug_assert!(dt > 0.0);
        let rate = |x: f64| -> f64 {
            let probe = MemristorState {
                x: x.clamp(0.0, 1.0),
                q: state.q,
            };
            self.state_derivative(&probe, current).0
        };
        let x = match method {
            StepMethod::Euler => state.x + dt * rate(state.x),
            StepMethod::Rk4 => {
                let k1 = rate(state.x);
                let k2 = rate(state.x + 0.5 * dt * k1);
                let k3 = rate(state.x + 0.5 * dt * k2);
                let k4 = rate(state.x + dt * k3);
                state.x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            }
        };
        let q = state.q + current * dt;
        if !x.is_finite() || !q.is_finite() {
            return Err(NonFiniteState { x, q });
        }
        Ok(MemristorState {
            x: x.clamp(0.0, 1.0),
            q,
        })
    }
}
