use thiserror::Error;

use crate::channels::ChannelKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m_ij - conj(m_ji)| = {deviation:e}")]
    NotHermitian { deviation: f64 },
    #[error("trace is not one: |tr - 1| = {deviation:e}")]
    TraceNotOne { deviation: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },
    #[error("unknown preset state '{0}'")]
    UnknownPreset(String),
    #[error("Werner parameter p = {0} outside [0, 1]")]
    WernerParamOutOfRange(f64),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("rate {name} = {value} must be a finite non-negative number")]
    InvalidRate { name: &'static str, value: f64 },
    #[error("Kraus operators are not complete: max |sum K'K - 1| = {deviation:e}")]
    Incomplete { deviation: f64 },
    #[error("channel produced an invalid state (implementation bug): {0}")]
    InternalChannelError(Box<Error>),
    #[error("eigensolver did not converge")]
    EigFailure,
    #[error("state is not in the subspace with vanishing |↑↑⟩ population (rho11 = {rho11:e})")]
    NotInSubspaceI { rho11: f64 },
    #[error("no analytic {kind} verdict for this state; use the numerical crossing search")]
    Undecided { kind: ChannelKind },
    #[error("all rates relevant to the {0} channel are zero; the state never evolves")]
    AllRatesZero(ChannelKind),
    #[error("integration would need {steps:e} steps")]
    StepUnderflow { steps: f64 },
    #[error("time grid must start at 0 and be strictly increasing")]
    BadTimeGrid,
}
