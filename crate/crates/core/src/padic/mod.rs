//! Fixed-precision p-adic arithmetic.
//!
//! Every [`PadicNumber`] carries its own absolute precision: a unit
//! `u · p^v` is known modulo `p^(v + rel)` with `rel <= N`, and a zero is
//! known only modulo `p^abs`. Operations propagate precision the usual way,
//! so cancellation shows up as a zero with reduced `abs` rather than as
//! invented digits.

mod mahler;
mod number;
mod roots;
mod series;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith;

pub use mahler::{mahler_fit, stirling_first_kind, DecayProfile, MahlerSeries, DECAY_WINDOW};
pub use number::{PadicNumber, EXACT_ZERO_PREC};
pub use roots::{Cluster, RootScan, ZpRoot};
pub use series::{StrassmanBound, TailBound, TateSeries};

/// Maximum degree of an untruncated composition.
pub const COMPOSE_DEGREE_CAP: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("invalid p-adic context: {0}")]
    InvalidContext(String),
    #[error("division by zero at working precision")]
    DivisionByZero,
    #[error("requested {wanted} digits but only {known} are known")]
    PrecisionLoss { wanted: i64, known: i64 },
    #[error("argument is not a p-adic integer")]
    NonIntegralArgument,
    #[error("series has a coefficient of negative valuation")]
    NonIntegral,
    #[error("composition degree {0} exceeds the cap")]
    TruncationOverflow(usize),
    #[error("series vanishes at working precision")]
    ZeroSeries,
    #[error("{0} root cluster(s) could not be separated at working precision")]
    PrecisionExhausted(usize),
    #[error("operands live in different p-adic contexts")]
    ContextMismatch,
}

impl PadicError {
    pub fn name(&self) -> &'static str {
        match self {
            PadicError::InvalidContext(_) => "InvalidContext",
            PadicError::DivisionByZero => "DivisionByZero",
            PadicError::PrecisionLoss { .. } => "PrecisionLoss",
            PadicError::NonIntegralArgument => "NonIntegralArgument",
            PadicError::NonIntegral => "NonIntegral",
            PadicError::TruncationOverflow(_) => "TruncationOverflow",
            PadicError::ZeroSeries => "ZeroSeries",
            PadicError::PrecisionExhausted(_) => "PrecisionExhausted",
            PadicError::ContextMismatch => "ContextMismatch",
        }
    }
}

/// A prime `p >= 5` and a working precision of `N >= 4` digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicContext {
    p: u64,
    n: u32,
}

impl PadicContext {
    pub fn new(p: u64, n: u32) -> Result<Self, PadicError> {
        if p < 5 || !arith::is_prime(p) {
            return Err(PadicError::InvalidContext(format!("p = {p} must be a prime >= 5")));
        }
        if n < 4 {
            return Err(PadicError::InvalidContext(format!("N = {n} must be at least 4")));
        }
        Ok(PadicContext { p, n })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn digits(&self) -> u32 {
        self.n
    }

    /// Same prime, different precision.
    pub fn with_digits(&self, n: u32) -> Result<Self, PadicError> {
        Self::new(self.p, n)
    }

    pub fn pow(&self, k: u32) -> BigInt {
        num_traits::pow(BigInt::from(self.p), k as usize)
    }

    pub fn modulus(&self) -> BigInt {
        self.pow(self.n)
    }
}
