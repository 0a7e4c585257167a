use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::system::SystemSpec;
use crate::EvalMode;

/// Sign pattern of a sampled curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SignClass {
    Zero,
    Nonnegative,
    Nonpositive,
    SignChanging,
}

/// Classifies `values`; entries within `tol` of zero count as zero.
pub fn classify_signs(values: &[f64], tol: f64) -> SignClass {
    let pos = values.iter().any(|&v| v > tol);
    let neg = values.iter().any(|&v| v < -tol);
    match (pos, neg) {
        (true, true) => SignClass::SignChanging,
        (true, false) => SignClass::Nonnegative,
        (false, true) => SignClass::Nonpositive,
        (false, false) => SignClass::Zero,
    }
}

/// `D_{ℓm}(x) = (α_ℓ − α_m)(∂F/∂α_ℓ − ∂F/∂α_m)` sampled on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct SchurCurve {
    pub pair: (usize, usize),
    pub xs: Vec<f64>,
    pub values: Vec<f64>,
    pub class: SignClass,
    pub min: f64,
    pub max: f64,
}

/// Tolerance used to classify Schur curves.
pub const SCHUR_SIGN_TOL: f64 = 1e-12;

/// Evaluates the Schur condition curve for the pair `(ℓ, m)` (0-based) of the
/// system CDF, using the same structure dispatch as [`SystemSpec::cdf`].
pub fn schur_scan(
    spec: &SystemSpec,
    xs: &[f64],
    pair: (usize, usize),
    mode: EvalMode,
    exec: Execution,
) -> Result<SchurCurve> {
    let (l, m) = pair;
    if l >= spec.n() || m >= spec.n() || l == m {
        return Err(Error::Usage(format!(
            "pair ({l}, {m}) must be two distinct indices below {}",
            spec.n()
        )));
    }
    let diff = spec.params()[l] - spec.params()[m];
    let values = exec.try_map(xs, |&x| -> Result<f64> {
        if diff == 0.0 {
            return Ok(0.0);
        }
        let dl = spec.cdf_dparam(x, l, mode)?;
        let dm = spec.cdf_dparam(x, m, mode)?;
        Ok(diff * (dl - dm))
    })?;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(SchurCurve {
        pair,
        xs: xs.to_vec(),
        class: classify_signs(&values, SCHUR_SIGN_TOL),
        values,
        min,
        max,
    })
}
