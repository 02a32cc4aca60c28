//! Transient simulation of charge-controlled memristors, single or as a
//! series pair of opposite polarity, driven by voltage pulse trains.
//!
//! A lone memristor updates faster with every identical pulse: falling
//! resistance raises the current, which moves the state faster. Putting
//! a second, opposed device in series couples the two swings through the
//! shared charge; the ratio of the two resistance swings then sets
//! whether per-pulse updates shrink, stay level, or keep growing.
//!
//! ```
//! use memsyn::analysis::{classify_regime, per_pulse_deltas, Regime, DEFAULT_TOL_REL};
//! use memsyn::preset;
//!
//! let exp = preset("alpha_small")?;
//! let traj = exp.run()?;
//! let deltas = per_pulse_deltas(&traj, exp.stimulus())?;
//! let regime = classify_regime(&deltas, DEFAULT_TOL_REL)?;
//! assert_eq!(regime, Regime::Decelerating);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod analysis;
pub mod circuit;
pub mod device;
pub mod expfile;

pub use circuit::{simulate, PulseTrain, Sample, SolverConfig, Terminals, Topology, Trajectory};
pub use device::{DriftModel, InvalidParam, MemristorParams, MemristorState, Polarity, StepMethod};
pub use expfile::{parse_experiment, preset, serialize_experiment, Experiment};
