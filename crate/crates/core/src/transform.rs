//! Baseline distributions and the transformation models `T(β, F)`.
//!
//! * PHR: `T = 1 − (1 − F)^β`
//! * PRHR: `T = F^β`
//! * OMO: `T = βF^θ / (βF^θ + F̄^θ)`, i.e. odds `Λ_T = β Λ_F^θ`
//!
//! Everything is evaluated from `log F` and `log F̄`, so that neither tail
//! loses precision.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::logistic;
use crate::{EvalMode, SAFE_CLAMP};

/// A piecewise-linear CDF through user-supplied `(x, F(x))` knots.
///
/// Below the first knot the CDF is 0; from the last knot on it is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct TabulatedCdf {
    xs: Vec<f64>,
    fs: Vec<f64>,
}

impl TabulatedCdf {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Parse("tabulated CDF needs at least two points".into()));
        }
        for (i, &(x, f)) in points.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::Parse(format!("row {}: x is not finite", i + 1)));
            }
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Parse(format!("row {}: F = {f} outside [0, 1]", i + 1)));
            }
            if i > 0 {
                let (px, pf) = points[i - 1];
                if x <= px {
                    return Err(Error::Parse(format!("row {}: x is not strictly increasing", i + 1)));
                }
                if f < pf {
                    return Err(Error::Parse(format!("row {}: F decreases", i + 1)));
                }
            }
        }
        let (xs, fs) = points.into_iter().unzip();
        Ok(TabulatedCdf { xs, fs })
    }

    /// Reads a two-column `x,F` CSV with a header row.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(i as u64 + 2);
            if rec.len() != 2 {
                return Err(Error::Parse(format!("line {line}: expected 2 columns, found {}", rec.len())));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("line {line}: `{s}` is not a number")))
            };
            points.push((parse(&rec[0])?, parse(&rec[1])?));
        }
        Self::new(points)
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.fs.iter().copied())
    }

    fn cdf(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x < self.xs[0] {
            return 0.0;
        }
        if x >= self.xs[n - 1] {
            return 1.0;
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let (x0, x1, f0, f1) = (self.xs[i], self.xs[i + 1], self.fs[i], self.fs[i + 1]);
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Generalized inverse `inf{x : F(x) ≥ p}`.
    fn quantile(&self, p: f64) -> f64 {
        let n = self.xs.len();
        if p <= self.fs[0] {
            return self.xs[0];
        }
        if p > self.fs[n - 1] {
            return self.xs[n - 1];
        }
        let i = self.fs.partition_point(|&f| f < p);
        let (x0, x1, f0, f1) = (self.xs[i - 1], self.xs[i], self.fs[i - 1], self.fs[i]);
        x0 + (x1 - x0) * (p - f0) / (f1 - f0)
    }
}

impl TryFrom<Vec<(f64, f64)>> for TabulatedCdf {
    type Error = Error;
    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        TabulatedCdf::new(v)
    }
}

impl From<TabulatedCdf> for Vec<(f64, f64)> {
    fn from(t: TabulatedCdf) -> Self {
        t.xs.into_iter().zip(t.fs).collect()
    }
}

/// The baseline distribution `F` shared by all components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BaselineRepr", into = "BaselineRepr")]
pub enum BaselineSpec {
    StdExponential,
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Uniform01,
    Tabulated(TabulatedCdf),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
enum BaselineRepr {
    StdExponential,
    Exponential { rate: f64 },
    Weibull { shape: f64, scale: f64 },
    Uniform01,
    Tabulated { points: TabulatedCdf },
}

impl TryFrom<BaselineRepr> for BaselineSpec {
    type Error = Error;
    fn try_from(r: BaselineRepr) -> Result<Self> {
        match r {
            BaselineRepr::StdExponential => Ok(BaselineSpec::StdExponential),
            BaselineRepr::Exponential { rate } => BaselineSpec::exponential(rate),
            BaselineRepr::Weibull { shape, scale } => BaselineSpec::weibull(shape, scale),
            BaselineRepr::Uniform01 => Ok(BaselineSpec::Uniform01),
            BaselineRepr::Tabulated { points } => Ok(BaselineSpec::Tabulated(points)),
        }
    }
}

impl From<BaselineSpec> for BaselineRepr {
    fn from(b: BaselineSpec) -> Self {
        match b {
            BaselineSpec::StdExponential => BaselineRepr::StdExponential,
            BaselineSpec::Exponential { rate } => BaselineRepr::Exponential { rate },
            BaselineSpec::Weibull { shape, scale } => BaselineRepr::Weibull { shape, scale },
            BaselineSpec::Uniform01 => BaselineRepr::Uniform01,
            BaselineSpec::Tabulated(points) => BaselineRepr::Tabulated { points },
        }
    }
}

fn positive(param: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::range(param, v, "finite and > 0"))
    }
}

impl BaselineSpec {
    pub fn exponential(rate: f64) -> Result<Self> {
        Ok(BaselineSpec::Exponential {
            rate: positive("rate", rate)?,
        })
    }

    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        Ok(BaselineSpec::Weibull {
            shape: positive("shape", shape)?,
            scale: positive("scale", scale)?,
        })
    }

    /// Cumulative hazard `−log F̄(x)` for the exponential-type families.
    fn hazard(&self, x: f64) -> Option<f64> {
        match *self {
            BaselineSpec::StdExponential => Some(x.max(0.0)),
            BaselineSpec::Exponential { rate } => Some(rate * x.max(0.0)),
            BaselineSpec::Weibull { shape, scale } => Some((x.max(0.0) / scale).powf(shape)),
            _ => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            BaselineSpec::Uniform01 => x.clamp(0.0, 1.0),
            BaselineSpec::Tabulated(t) => t.cdf(x),
            _ => -(-self.hazard(x).unwrap()).exp_m1(),
        }
    }

    pub fn sf(&self, x: f64) -> f64 {
        match self {
            BaselineSpec::Uniform01 => 1.0 - x.clamp(0.0, 1.0),
            BaselineSpec::Tabulated(t) => 1.0 - t.cdf(x),
            _ => (-self.hazard(x).unwrap()).exp(),
        }
    }

    pub fn log_cdf(&self, x: f64) -> f64 {
        match self {
            BaselineSpec::Uniform01 | BaselineSpec::Tabulated(_) => self.cdf(x).ln(),
            _ => {
                let h = self.hazard(x).unwrap();
                if h > std::f64::consts::LN_2 {
                    (-(-h).exp()).ln_1p()
                } else {
                    (-(-h).exp_m1()).ln()
                }
            }
        }
    }

    pub fn log_sf(&self, x: f64) -> f64 {
        match self {
            BaselineSpec::Uniform01 | BaselineSpec::Tabulated(_) => (-self.cdf(x)).ln_1p(),
            _ => -self.hazard(x).unwrap(),
        }
    }

    /// `F⁻¹(p)`; `p = 1` maps to the upper support end (possibly ∞).
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match *self {
            BaselineSpec::StdExponential => -(-p).ln_1p(),
            BaselineSpec::Exponential { rate } => -(-p).ln_1p() / rate,
            BaselineSpec::Weibull { shape, scale } => scale * (-(-p).ln_1p()).powf(1.0 / shape),
            BaselineSpec::Uniform01 => p,
            BaselineSpec::Tabulated(ref t) => t.quantile(p),
        }
    }

    /// Quantile from a log-survival value, accurate deep in the upper tail.
    pub(crate) fn quantile_from_log_sf(&self, lsf: f64) -> f64 {
        let h = -lsf;
        match *self {
            BaselineSpec::StdExponential => h,
            BaselineSpec::Exponential { rate } => h / rate,
            BaselineSpec::Weibull { shape, scale } => scale * h.powf(1.0 / shape),
            _ => self.quantile(-lsf.exp_m1()),
        }
    }

    /// Support `[lo, hi]` (hi may be infinite).
    pub fn support(&self) -> (f64, f64) {
        match self {
            BaselineSpec::Uniform01 => (0.0, 1.0),
            BaselineSpec::Tabulated(t) => (t.xs[0], *t.xs.last().unwrap()),
            _ => (0.0, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "PHR")]
    Phr,
    #[serde(rename = "PRHR")]
    Prhr,
    #[serde(rename = "OMO")]
    Omo,
}

/// A transformation model; `theta` is present exactly for OMO.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TransformRepr", into = "TransformRepr")]
pub struct TransformSpec {
    model: Model,
    theta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransformRepr {
    model: Model,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

impl TryFrom<TransformRepr> for TransformSpec {
    type Error = Error;
    fn try_from(r: TransformRepr) -> Result<Self> {
        match (r.model, r.theta) {
            (Model::Omo, Some(theta)) => TransformSpec::omo(theta),
            (Model::Omo, None) => Err(Error::Usage("OMO model requires theta".into())),
            (_, Some(theta)) => Err(Error::range("theta", theta, "absent unless model is OMO")),
            (Model::Phr, None) => Ok(TransformSpec::phr()),
            (Model::Prhr, None) => Ok(TransformSpec::prhr()),
        }
    }
}

impl From<TransformSpec> for TransformRepr {
    fn from(t: TransformSpec) -> Self {
        TransformRepr {
            model: t.model,
            theta: t.theta(),
        }
    }
}

/// `T` and `T̄ = 1 − T`, each computed without cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValue {
    pub cdf: f64,
    pub sf: f64,
}

impl TransformSpec {
    pub fn phr() -> Self {
        TransformSpec {
            model: Model::Phr,
            theta: 1.0,
        }
    }

    pub fn prhr() -> Self {
        TransformSpec {
            model: Model::Prhr,
            theta: 1.0,
        }
    }

    pub fn omo(theta: f64) -> Result<Self> {
        Ok(TransformSpec {
            model: Model::Omo,
            theta: positive("theta", theta)?,
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn theta(&self) -> Option<f64> {
        (self.model == Model::Omo).then_some(self.theta)
    }

    /// +1 if `T` increases with the parameter (PHR, OMO), −1 if it decreases (PRHR).
    pub fn param_direction(&self) -> f64 {
        match self.model {
            Model::Prhr => -1.0,
            Model::Phr | Model::Omo => 1.0,
        }
    }

    /// `T` and `T̄` from `log F` and `log F̄`.
    pub fn apply_logs(&self, param: f64, lcdf: f64, lsf: f64) -> TransformValue {
        match self.model {
            Model::Phr => {
                let l = param * lsf;
                TransformValue {
                    cdf: -l.exp_m1(),
                    sf: l.exp(),
                }
            }
            Model::Prhr => {
                let l = param * lcdf;
                TransformValue {
                    cdf: l.exp(),
                    sf: -l.exp_m1(),
                }
            }
            Model::Omo => {
                let lo = self.log_odds(param, lcdf, lsf);
                TransformValue {
                    cdf: logistic(lo),
                    sf: logistic(-lo),
                }
            }
        }
    }

    fn log_odds(&self, param: f64, lcdf: f64, lsf: f64) -> f64 {
        let d = lcdf - lsf;
        if d.is_nan() {
            // both logs infinite cannot happen for a proper F; keep the sign of F
            return if lcdf == 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        param.ln() + self.theta * d
    }

    /// `T` and `T̄` at a baseline probability `f = F(x)`.
    pub fn apply_prob(&self, param: f64, f: f64) -> TransformValue {
        self.apply_logs(param, f.ln(), (-f).ln_1p())
    }

    pub fn apply(&self, b: &BaselineSpec, param: f64, x: f64) -> Result<TransformValue> {
        positive("param", param)?;
        Ok(self.apply_logs(param, b.log_cdf(x), b.log_sf(x)))
    }

    /// `T(β, F)(x)`.
    pub fn cdf(&self, b: &BaselineSpec, param: f64, x: f64) -> Result<f64> {
        Ok(self.apply(b, param, x)?.cdf)
    }

    /// `T̄(β, F)(x) = 1 − T(β, F)(x)`, computed directly.
    pub fn sf(&self, b: &BaselineSpec, param: f64, x: f64) -> Result<f64> {
        Ok(self.apply(b, param, x)?.sf)
    }

    /// `∂T/∂β` from `log F`, `log F̄`. Exact limits at `F ∈ {0, 1}` for PHR and PRHR.
    pub fn dparam_logs(&self, param: f64, lcdf: f64, lsf: f64) -> f64 {
        match self.model {
            Model::Phr => {
                let sf = (param * lsf).exp();
                if sf == 0.0 {
                    0.0
                } else {
                    -sf * lsf
                }
            }
            Model::Prhr => {
                let cdf = (param * lcdf).exp();
                if cdf == 0.0 {
                    0.0
                } else {
                    cdf * lcdf
                }
            }
            Model::Omo => {
                let lo = self.log_odds(param, lcdf, lsf);
                logistic(lo) * logistic(-lo) / param
            }
        }
    }

    /// `∂T/∂β` at `x`. For OMO at `F(x) ∈ {0, 1}` raw mode fails with a domain
    /// error and safe mode evaluates at the clamped probability.
    pub fn cdf_dparam(&self, b: &BaselineSpec, param: f64, x: f64, mode: EvalMode) -> Result<f64> {
        positive("param", param)?;
        let (lcdf, lsf) = (b.log_cdf(x), b.log_sf(x));
        if self.model == Model::Omo && (lcdf == f64::NEG_INFINITY || lsf == f64::NEG_INFINITY) {
            match mode {
                EvalMode::Raw => {
                    return Err(Error::Domain(format!(
                        "OMO parameter derivative at a support endpoint (x = {x})"
                    )))
                }
                EvalMode::Safe => {
                    let f = if lcdf == f64::NEG_INFINITY { SAFE_CLAMP } else { 1.0 - SAFE_CLAMP };
                    return Ok(self.dparam_logs(param, f.ln(), (-f).ln_1p()));
                }
            }
        }
        Ok(self.dparam_logs(param, lcdf, lsf))
    }

    /// `∂T/∂β` at a baseline probability.
    pub fn dparam_prob(&self, param: f64, f: f64) -> f64 {
        self.dparam_logs(param, f.ln(), (-f).ln_1p())
    }

    /// The baseline probability `p` with `T(β, p) = u`.
    pub fn inverse_prob(&self, param: f64, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self.model {
            Model::Phr => -((-u).ln_1p() / param).exp_m1(),
            Model::Prhr => u.powf(1.0 / param),
            Model::Omo => {
                if u >= 1.0 {
                    return 1.0;
                }
                // Λ_F = (Λ_u / β)^{1/θ}, F = Λ_F / (1 + Λ_F)
                let lam = ((u.ln() - (-u).ln_1p() - param.ln()) / self.theta).exp();
                lam / (1.0 + lam)
            }
        }
    }

    /// `x` with `T(β, F)(x) = u`.
    pub fn quantile(&self, b: &BaselineSpec, param: f64, u: f64) -> f64 {
        match self.model {
            // x from log F̄ directly: log F̄ = log(1 − u) / β
            Model::Phr => b.quantile_from_log_sf((-u.clamp(0.0, 1.0)).ln_1p() / param),
            _ => b.quantile(self.inverse_prob(param, u)),
        }
    }
}
