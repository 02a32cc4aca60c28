//! Support code for the `memsyn` binary: the CSV trajectory format.

pub mod csvio;
