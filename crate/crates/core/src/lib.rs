//! Exact lifetime distributions of parallel, series and (n−k)-out-of-n systems
//! whose components are coupled by an Archimedean copula and whose marginals are
//! transformations `T(α_i, F)` of a common baseline `F`, together with the
//! dominance machinery (super-additivity, majorization, Schur scans) used to
//! compare two such systems in the usual stochastic order.
//!
//! Module map:
//!
//! * [`copula`]: generators ψ, inverses φ, auxiliary functions and the
//!   iterated forward difference.
//! * [`transform`]: baseline CDFs and the PHR / PRHR / odds-Marshall-Olkin
//!   transformations.
//! * [`system`]: closed-form system CDFs and their parameter derivatives.
//! * [`ordering`]: dominance verdicts, V-function monotonicity, extremal
//!   allocations.
//! * [`mc`]: seeded frailty sampler used as an independent oracle.
//!
//! Dependence convention: parallel and general (n−k)-out-of-n systems put the
//! copula on the component CDFs; series systems (`k = n − 1`) put it on the
//! component survival functions. The Monte Carlo sampler follows the same
//! convention.

pub mod copula;
mod error;
pub mod exec;
pub mod mc;
pub(crate) mod numeric;
pub mod ordering;
pub mod system;
pub mod transform;

pub use crate::copula::{Family, FdStencil, GeneratorSpec, UnitInterval};
pub use crate::error::{Error, Result};
pub use crate::exec::Execution;
pub use crate::ordering::{DominanceVerdict, Justification, Relation};
pub use crate::system::{EvalPoint, SystemSpec};
pub use crate::transform::{BaselineSpec, Model, TabulatedCdf, TransformSpec};

/// Lower/upper clamp applied to interior copula arguments in [`EvalMode::Safe`].
pub const SAFE_CLAMP: f64 = 1e-12;

/// How copula arguments are conditioned before the inverse generator is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EvalMode {
    /// Interior arguments are clamped to `[1e-12, 1 - 1e-12]`; exact 0 and 1 are
    /// kept and resolved by continuity. Derivatives at a boundary return 0.
    #[default]
    Safe,
    /// No clamping. Singular points surface as domain errors.
    Raw,
}

impl EvalMode {
    /// Reads `COPULA_ORDER_SAFE_MODE` (`0` selects raw mode, anything else safe).
    pub fn from_env() -> Self {
        match std::env::var("COPULA_ORDER_SAFE_MODE") {
            Ok(v) if v.trim() == "0" => EvalMode::Raw,
            _ => EvalMode::Safe,
        }
    }

    /// Conditions a probability given with its complement, returning `(u, 1 − u)`.
    pub(crate) fn condition_pair(self, u: f64, ubar: f64) -> (f64, f64) {
        match self {
            EvalMode::Raw => (u, ubar),
            EvalMode::Safe => {
                if u <= 0.0 {
                    (0.0, 1.0)
                } else if ubar <= 0.0 {
                    (1.0, 0.0)
                } else if u < SAFE_CLAMP {
                    (SAFE_CLAMP, 1.0 - SAFE_CLAMP)
                } else if ubar < SAFE_CLAMP {
                    (1.0 - SAFE_CLAMP, SAFE_CLAMP)
                } else {
                    (u, ubar)
                }
            }
        }
    }
}
