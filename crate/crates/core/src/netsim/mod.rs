//! Bit-level Monte Carlo of repetition-code error correction.
//!
//! A register of `3^(n+1)` bits is corrected by layers of MAJ3 gates
//! ("restorative phases"), wired either along the axes of a side-3 hypercube
//! in a fixed cyclic order or into fresh random triples each phase.

mod estimate;
mod gate;
mod register;
mod schedule;

pub use estimate::{
    estimate_logical_rate, restorative_phase, Chain, Readout, RunOptions, StopRule, TrialStats,
};
pub use gate::{amp, apply_maj3, maj1, majority, GateNoise};
pub use register::{code_size, CodeRegister};
pub use schedule::{axis_triples, Schedule, ScheduleKind};
