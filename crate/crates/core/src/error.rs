use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Every failure mode of the numerical core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    NotHermitian {
        defect: f64,
    },
    NotNormal {
        defect: f64,
    },
    SpectraOverlap {
        separation: f64,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    InvalidParam(String),
    EmptyBand,
    NoComplement,
    GapZero {
        gap: f64,
    },
    /// The perturbation is too strong for the requested construction:
    /// `2 * v_norm >= gap`.
    GapTooSmall {
        v_norm: f64,
        gap: f64,
    },
    SeriesDiverging {
        order: usize,
    },
    NegativeInput(f64),
    ConvergenceViolated {
        lhs: f64,
        rhs: f64,
    },
    BandNotRankOne {
        rank: usize,
    },
    ThresholdNeverCrossed {
        crossings: usize,
    },
    StepTooLarge {
        drift: f64,
    },
    NoDfs,
    DfsViolation {
        jump: usize,
        residual: f64,
    },
    NotSaturated {
        variation: f64,
    },
    SingularS {
        smallest_singular_value: f64,
    },
    Decomposition(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotHermitian { defect } => {
                write!(f, "matrix is not Hermitian (relative defect {defect:.3e})")
            }
            Error::NotNormal { defect } => {
                write!(f, "matrix is not normal (relative defect {defect:.3e})")
            }
            Error::SpectraOverlap { separation } => {
                write!(f, "spectra overlap (separation {separation:.3e})")
            }
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range 1..={len}")
            }
            Error::InvalidParam(msg) => write!(f, "invalid parameter: {msg}"),
            Error::EmptyBand => f.write_str("no eigenvalue inside the band window"),
            Error::NoComplement => f.write_str("every eigenvalue lies inside the band window"),
            Error::GapZero { gap } => write!(f, "band is not gapped (gap {gap:.3e})"),
            Error::GapTooSmall { v_norm, gap } => {
                write!(f, "requires 2|V| < gap, got |V| = {v_norm:.6e}, gap = {gap:.6e}")
            }
            Error::SeriesDiverging { order } => {
                write!(f, "V' series diverging at order {order}")
            }
            Error::NegativeInput(x) => write!(f, "negative input {x}"),
            Error::ConvergenceViolated { lhs, rhs } => {
                write!(f, "convergence condition violated: {lhs:.6e} >= {rhs:.6e}")
            }
            Error::BandNotRankOne { rank } => {
                write!(f, "single-state band has rank {rank}, expected 1")
            }
            Error::ThresholdNeverCrossed { crossings } => {
                write!(f, "only {crossings} sites crossed the threshold, need at least 2")
            }
            Error::StepTooLarge { drift } => {
                write!(f, "norm drift {drift:.3e} exceeds 1e-4; reduce the step")
            }
            Error::NoDfs => f.write_str("H0 has no gapped kernel (no decoherence-free subspace)"),
            Error::DfsViolation { jump, residual } => {
                write!(f, "jump operator {jump} does not annihilate the DFS (|J P| = {residual:.3e})")
            }
            Error::NotSaturated { variation } => {
                write!(f, "trace not saturated (relative variation {variation:.3e})")
            }
            Error::SingularS { smallest_singular_value } => {
                write!(f, "transform is singular (smallest singular value {smallest_singular_value:.3e})")
            }
            Error::Decomposition(what) => write!(f, "{what} failed to converge"),
        }
    }
}

impl core::error::Error for Error {}
