//! Two-qubit open-system dynamics under amplitude damping, phase damping and
//! their composite, with Wootters concurrence along trajectories and the
//! classification of initial states by whether their entanglement dies in
//! finite time.
//!
//! Basis order everywhere is `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩` (see [`qstate`]).

#![allow(clippy::needless_range_loop)]

pub mod channels;
pub mod classify;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod linalg;
pub mod qstate;
pub mod sampling;
pub mod verify;

pub use channels::{ChannelKind, ChannelParams, KrausSet, NoiseRates};
pub use classify::{EsdVerdict, Subspace, SubspaceLabel, Verdict};
pub use dynamics::{EsdOutcome, EsdTimeResult, Trajectory};
pub use entanglement::ConcurrenceResult;
pub use error::{Error, Result};
pub use qstate::DensityMatrix;
