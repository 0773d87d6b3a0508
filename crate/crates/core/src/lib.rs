//! p-adic interpolation of orbits of rational maps on the projective line.
//!
//! The crate is organised bottom-up:
//!
//! * [`poly`] and [`arith`]: exact integer polynomials and elementary number theory.
//! * [`ratmap`]: rational self-maps of `P^1(Q)`, fixed-point data and bad primes.
//! * [`orbit`]: exact orbit pairs `(A_n, B_n)` and their identities.
//! * [`padic`]: fixed-precision p-adic numbers, Tate series, Strassman bounds,
//!   root isolation and Mahler expansions.
//! * [`uniformize`]: good-prime search, local conjugates and per-class
//!   interpolation bundles.
//! * [`dml`]: return sets `{n : Φ^n(c) ∈ Y}` for split maps of `P^1 × P^1`.
//! * [`cli`]: job specifications, reports and the command-line front end.

pub mod arith;
pub mod cli;
pub mod dml;
pub mod orbit;
pub mod padic;
pub mod parse;
pub mod poly;
pub mod ratmap;
pub mod serde_big;
pub mod uniformize;

use thiserror::Error;

pub use orbit::{OrbitError, OrbitMode, OrbitPairs, Preperiodicity};
pub use padic::{PadicContext, PadicError, PadicNumber, TateSeries};
pub use parse::ParseError;
pub use poly::{BiPoly, IntPoly};
pub use dml::{DmlError, ReturnSetReport};
pub use uniformize::{GoodPrimeCertificate, InterpolationBundle, UniformizeError};
pub use ratmap::{BadPrimeSet, FixedPointData, FixedPointKind, MapError, Mobius, ProjPoint, RationalMap};

/// Exit code for a completed job.
pub const EXIT_OK: i32 = 0;
/// Exit code when some branch could not be decided within the configured limits.
pub const EXIT_INCONCLUSIVE: i32 = 2;
/// Exit code for malformed input or an unmet precondition.
pub const EXIT_USAGE: i32 = 64;
/// Exit code when an internal consistency check fails.
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Orbit(#[from] OrbitError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error(transparent)]
    Uniformize(#[from] UniformizeError),
    #[error(transparent)]
    Dml(#[from] DmlError),
    #[error("{0}")]
    Usage(String),
}

impl Error {
    /// Machine-readable error name.
    pub fn name(&self) -> &'static str {
        match self {
            Error::Map(e) => e.name(),
            Error::Parse(_) => "ParseError",
            Error::Orbit(e) => e.name(),
            Error::Padic(e) => e.name(),
            Error::Uniformize(e) => e.name(),
            Error::Dml(e) => e.name(),
            Error::Usage(_) => "UsageError",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.name() {
            "SizeLimit" | "NoPrimeFound" | "NoCommonPrime" | "DecayFailure"
            | "PrecisionExhausted" | "TruncationOverflow" | "PoleCollision" => EXIT_INCONCLUSIVE,
            "SharedFactor" | "IndeterminatePoint" | "IndeterminateOrbit" | "IdentityViolation"
            | "CertificateInvalid" | "ValidationFailed" | "ProgressionRefuted" | "StrassmanViolation"
            | "Internal" => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        }
    }
}
