//! Archimedean generators and the copulas they induce.
//!
//! A generator ψ: [0, ∞] → [0, 1] is decreasing with ψ(0) = 1 and ψ(∞) = 0; its
//! inverse φ maps [0, 1] back to [0, ∞]. The copula is
//! `C(v_1, …, v_n) = ψ(φ(v_1) + ⋯ + φ(v_n))`.
//!
//! `f64::INFINITY` is the sentinel for φ(0) of strict generators. ψ maps it to
//! exactly 0, and sums containing it stay infinite.

mod fd;
mod jet;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use jet::Jet;

pub use fd::{forward_difference, forward_difference_iterated, FdStencil, MAX_INCREMENTS};
pub(crate) use fd::expansion as fd_expansion;

/// Sentinel for φ(0) of strict generators.
pub const T_INFINITY: f64 = f64::INFINITY;

/// A value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
#[repr(transparent)]
pub struct UnitInterval(f64);

impl UnitInterval {
    pub const ZERO: UnitInterval = UnitInterval(0.0);
    pub const ONE: UnitInterval = UnitInterval(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&value) {
            Ok(UnitInterval(value))
        } else {
            Err(Error::range("u", value, "in [0, 1]"))
        }
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            UnitInterval(0.0)
        } else {
            UnitInterval(value.clamp(0.0, 1.0))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for UnitInterval {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        UnitInterval::new(v)
    }
}

impl From<UnitInterval> for f64 {
    fn from(u: UnitInterval) -> f64 {
        u.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Independence,
    Clayton,
    Frank,
    Gumbel,
    #[serde(rename = "amh")]
    Amh,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Independence => "independence",
            Family::Clayton => "clayton",
            Family::Frank => "frank",
            Family::Gumbel => "gumbel",
            Family::Amh => "amh",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An Archimedean family together with its dependence parameter γ.
///
/// Admissible ranges: Clayton γ ≥ −1, γ ≠ 0; Frank γ ≠ 0; Gumbel γ ≥ 1;
/// AMH γ ∈ (−1, 1); Independence takes no parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeneratorRepr", into = "GeneratorRepr")]
pub struct GeneratorSpec {
    family: Family,
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorRepr {
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

impl TryFrom<GeneratorRepr> for GeneratorSpec {
    type Error = Error;
    fn try_from(r: GeneratorRepr) -> Result<Self> {
        GeneratorSpec::new(r.family, r.gamma)
    }
}

impl From<GeneratorSpec> for GeneratorRepr {
    fn from(g: GeneratorSpec) -> Self {
        GeneratorRepr {
            family: g.family,
            gamma: g.gamma(),
        }
    }
}

impl GeneratorSpec {
    pub fn new(family: Family, gamma: Option<f64>) -> Result<Self> {
        let g = match (family, gamma) {
            (Family::Independence, None) => 0.0,
            (Family::Independence, Some(v)) => {
                return Err(Error::range("gamma", v, "absent for the independence family"))
            }
            (_, None) => {
                return Err(Error::Usage(format!("family `{family}` requires a gamma")));
            }
            (_, Some(v)) => v,
        };
        let ok = g.is_finite()
            && match family {
                Family::Independence => true,
                Family::Clayton => g >= -1.0 && g != 0.0,
                Family::Frank => g != 0.0,
                Family::Gumbel => g >= 1.0,
                Family::Amh => g > -1.0 && g < 1.0,
            };
        if !ok {
            let expected = match family {
                Family::Independence => "absent",
                Family::Clayton => "gamma >= -1 and gamma != 0",
                Family::Frank => "gamma != 0",
                Family::Gumbel => "gamma >= 1",
                Family::Amh => "gamma in (-1, 1)",
            };
            return Err(Error::range("gamma", g, expected));
        }
        Ok(GeneratorSpec { family, gamma: g })
    }

    pub fn independence() -> Self {
        GeneratorSpec {
            family: Family::Independence,
            gamma: 0.0,
        }
    }

    pub fn clayton(gamma: f64) -> Result<Self> {
        Self::new(Family::Clayton, Some(gamma))
    }

    pub fn frank(gamma: f64) -> Result<Self> {
        Self::new(Family::Frank, Some(gamma))
    }

    pub fn gumbel(gamma: f64) -> Result<Self> {
        Self::new(Family::Gumbel, Some(gamma))
    }

    pub fn amh(gamma: f64) -> Result<Self> {
        Self::new(Family::Amh, Some(gamma))
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// The dependence parameter; `None` for the independence family.
    pub fn gamma(&self) -> Option<f64> {
        match self.family {
            Family::Independence => None,
            _ => Some(self.gamma),
        }
    }

    /// Whether φ(0) = ∞. Only Clayton with γ < 0 has a finite φ(0) = −1/γ.
    pub fn is_strict(&self) -> bool {
        !(self.family == Family::Clayton && self.gamma < 0.0)
    }

    /// Families and parameters known to be completely monotone (Laplace
    /// transforms of a positive frailty), hence d-monotone for every d.
    pub fn is_completely_monotone(&self) -> bool {
        match self.family {
            Family::Independence | Family::Gumbel => true,
            Family::Clayton | Family::Frank => self.gamma > 0.0,
            Family::Amh => self.gamma >= 0.0,
        }
    }

    /// ψ(t) for `t ∈ [0, ∞]`.
    pub fn psi(&self, t: f64) -> f64 {
        debug_assert!(t >= 0.0 || t.is_nan(), "psi called with t = {t}");
        if t == T_INFINITY {
            return 0.0;
        }
        let g = self.gamma;
        match self.family {
            Family::Independence => (-t).exp(),
            Family::Clayton => {
                if 1.0 + g * t <= 0.0 {
                    0.0
                } else {
                    (-(g * t).ln_1p() / g).exp()
                }
            }
            Family::Frank => -frank_log_g(g, t) / g,
            Family::Gumbel => (-t.powf(1.0 / g)).exp(),
            Family::Amh => {
                let e = (-t).exp();
                (1.0 - g) * e / (1.0 - g * e)
            }
        }
    }

    /// φ(u) = ψ⁻¹(u); returns [`T_INFINITY`] at `u = 0` for strict generators.
    pub fn phi(&self, u: UnitInterval) -> f64 {
        self.phi_raw(u.get())
    }

    pub(crate) fn phi_raw(&self, u: f64) -> f64 {
        self.phi_comp(u, 1.0 - u)
    }

    /// φ(u) given both `u` and `ū = 1 − u`; the complement keeps precision as
    /// `u → 1`.
    pub(crate) fn phi_comp(&self, u: f64, ubar: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&u), "phi called with u = {u}");
        if u >= 1.0 || ubar <= 0.0 {
            return 0.0;
        }
        let g = self.gamma;
        if u <= 0.0 {
            return match self.family {
                Family::Clayton if g < 0.0 => -1.0 / g,
                _ => T_INFINITY,
            };
        }
        let ln_u = if u > 0.5 { (-ubar).ln_1p() } else { u.ln() };
        match self.family {
            Family::Independence => -ln_u,
            Family::Clayton => (-g * ln_u).exp_m1() / g,
            Family::Frank => {
                // φ(u) = −log q with q = expm1(−γu)/expm1(−γ); near u = 1 use
                // 1 − q = r, computed without cancellation.
                let q = (-g * u).exp_m1() / (-g).exp_m1();
                if q < 0.5 {
                    -q.ln()
                } else {
                    let r = if g > 0.0 {
                        (-g * u).exp() * (-g * ubar).exp_m1() / (-g).exp_m1()
                    } else {
                        (g * ubar).exp_m1() / g.exp_m1()
                    };
                    -(-r).ln_1p()
                }
            }
            Family::Gumbel => (-ln_u).powf(g),
            Family::Amh => (-g * ubar).ln_1p() - ln_u,
        }
    }

    /// ψ′(t). Gumbel with γ > 1 is singular at `t = 0`.
    pub fn psi_prime(&self, t: f64) -> Result<f64> {
        if t == T_INFINITY {
            return Ok(0.0);
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::range("t", t, ">= 0"));
        }
        let g = self.gamma;
        Ok(match self.family {
            Family::Independence => -(-t).exp(),
            Family::Clayton => {
                if 1.0 + g * t <= 0.0 {
                    0.0
                } else {
                    -(-(g + 1.0) / g * (g * t).ln_1p()).exp()
                }
            }
            Family::Frank => {
                let e = (-t).exp();
                e * (-g).exp_m1() / (g * frank_log_g(g, t).exp())
            }
            Family::Gumbel => {
                if t == 0.0 {
                    if g == 1.0 {
                        -1.0
                    } else {
                        return Err(Error::Domain(format!(
                            "gumbel(gamma={g}) generator derivative is singular at t = 0"
                        )));
                    }
                } else {
                    -(1.0 / g) * t.powf((1.0 - g) / g) * (-t.powf(1.0 / g)).exp()
                }
            }
            Family::Amh => {
                let e = (-t).exp();
                let d = 1.0 - g * e;
                -(1.0 - g) * e / (d * d)
            }
        })
    }

    /// ψ′(φ(u)) via its closed form in `u`.
    pub fn psi_prime_of_phi(&self, u: UnitInterval) -> Result<f64> {
        self.psi_prime_of_phi_raw(u.get())
    }

    pub(crate) fn psi_prime_of_phi_raw(&self, u: f64) -> Result<f64> {
        self.psi_prime_of_phi_comp(u, 1.0 - u)
    }

    /// ψ′(φ(u)) given both `u` and `ū = 1 − u`.
    pub(crate) fn psi_prime_of_phi_comp(&self, u: f64, ubar: f64) -> Result<f64> {
        let g = self.gamma;
        if u <= 0.0 && self.is_strict() {
            return Err(Error::Domain(format!(
                "{self}: psi'(phi(0)) is taken at the infinite sentinel"
            )));
        }
        Ok(match self.family {
            Family::Independence => -u,
            Family::Clayton => -u.powf(g + 1.0),
            Family::Frank => -(g * u).exp_m1() / g,
            Family::Gumbel => {
                if ubar <= 0.0 && g > 1.0 {
                    return Err(Error::Domain(format!(
                        "{self}: psi'(phi(1)) = psi'(0) is singular"
                    )));
                }
                let ln_u = if u > 0.5 { (-ubar).ln_1p() } else { u.ln() };
                -(u / g) * (-ln_u).powf(1.0 - g)
            }
            Family::Amh => -u * (1.0 - g * ubar) / (1.0 - g),
        })
    }

    /// φ′(u) = 1 / ψ′(φ(u)).
    pub(crate) fn phi_prime_raw(&self, u: f64) -> Result<f64> {
        let d = self.psi_prime_of_phi_raw(u)?;
        if d == 0.0 {
            return Err(Error::Domain(format!("{self}: phi' is unbounded at u = {u}")));
        }
        Ok(1.0 / d)
    }

    /// K(t) = −ψ(t)/ψ′(t).
    pub fn kappa(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::range("t", t, "finite and >= 0"));
        }
        let g = self.gamma;
        match self.family {
            Family::Independence => Ok(1.0),
            Family::Clayton => {
                let base = 1.0 + g * t;
                if base <= 0.0 {
                    Err(Error::Domain(format!("{self}: K undefined beyond the support")))
                } else {
                    Ok(base)
                }
            }
            Family::Frank => {
                let log_g = frank_log_g(g, t);
                let ec = (-t).exp() * (-g).exp_m1();
                Ok(log_g.exp() * log_g / ec)
            }
            Family::Gumbel => Ok(g * t.powf((g - 1.0) / g)),
            Family::Amh => Ok(1.0 - g * (-t).exp()),
        }
    }

    /// `[ψ(t), ψ′(t), …, ψ^{(order)}(t)]`, exact to rounding (Taylor-mode).
    pub fn psi_derivatives(&self, t: f64, order: usize) -> Result<Vec<f64>> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::range("t", t, "finite and >= 0"));
        }
        let g = self.gamma;
        let x = Jet::variable(t, order);
        let jet = match self.family {
            Family::Independence => (-x).exp(),
            Family::Clayton => {
                if 1.0 + g * t <= 0.0 {
                    Jet::zero(order)
                } else {
                    x.scale(g).offset(1.0).powf(-1.0 / g)
                }
            }
            Family::Frank => {
                let mut inner = (-x).exp().scale((-g).exp_m1());
                // the constant term carries the cancellation; take it from the stable form
                let head = frank_log_g(g, t).exp();
                let v0 = inner.value();
                inner = inner.offset(head - v0);
                inner.ln().scale(-1.0 / g)
            }
            Family::Gumbel => {
                if t == 0.0 && g > 1.0 && order > 0 {
                    return Err(Error::Domain(format!(
                        "{self}: derivatives are singular at t = 0"
                    )));
                }
                if t == 0.0 {
                    (-x).exp()
                } else {
                    (-x.powf(1.0 / g)).exp()
                }
            }
            Family::Amh => {
                let e = (-x).exp();
                let den = Jet::constant(1.0, order) - e.clone().scale(g);
                e.scale(1.0 - g) * den.recip()
            }
        };
        let mut ds = jet.derivatives();
        ds[0] = self.psi(t);
        Ok(ds)
    }

    /// Numerically checks d-monotonicity on `grid`: `(−1)^i ψ^{(i)} ≥ 0` for
    /// `i ≤ d − 2`, and `(−1)^{d−2} ψ^{(d−2)}` nonincreasing and convex
    /// (signs of orders `d − 1` and `d`). Grid-verified only.
    pub fn check_d_monotone(&self, d: usize, grid: &[f64]) -> Result<DMonotoneReport> {
        if d < 2 {
            return Err(Error::range("d", d as f64, ">= 2"));
        }
        if let Some(&t) = grid.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::range("grid point", t, "finite and > 0"));
        }
        let mut violations = Vec::new();
        for &t in grid {
            let ds = self.psi_derivatives(t, d)?;
            let mut scale = 0.0f64;
            for (i, &v) in ds.iter().enumerate() {
                scale = scale.max(v.abs());
                let signed = if i % 2 == 0 { v } else { -v };
                if signed < -1e-12 * scale.max(f64::MIN_POSITIVE) {
                    violations.push(DMonotoneViolation {
                        t,
                        order: i,
                        derivative: v,
                    });
                }
            }
        }
        Ok(DMonotoneReport {
            generator: *self,
            d,
            points_checked: grid.len(),
            violations,
        })
    }

    /// d-monotonicity by family membership, falling back to a grid check.
    pub fn is_d_monotone(&self, d: usize) -> bool {
        if self.is_completely_monotone() {
            return true;
        }
        let grid = log_grid(1e-3, 50.0, 120);
        self.check_d_monotone(d, &grid)
            .map(|r| r.passed())
            .unwrap_or(false)
    }

    /// C(u_1, …, u_n) = ψ(Σ φ(u_i)).
    pub fn copula(&self, u: &[UnitInterval]) -> Result<UnitInterval> {
        if u.is_empty() {
            return Err(Error::Usage("copula needs at least one argument".into()));
        }
        if u.iter().any(|v| v.get() == 0.0) {
            return Ok(UnitInterval::ZERO);
        }
        if self.family == Family::Independence {
            return Ok(UnitInterval::saturating(u.iter().map(|v| v.get()).product()));
        }
        let s: f64 = u.iter().map(|&v| self.phi(v)).sum();
        Ok(UnitInterval::saturating(self.psi(s)))
    }
}

/// `log(e^{−t}(e^{−γ} − 1) + 1)` without cancellation.
fn frank_log_g(g: f64, t: f64) -> f64 {
    if g > 0.0 {
        (-(-t).exp_m1() + (-t - g).exp()).ln()
    } else {
        ((-t).exp() * (-g).exp_m1()).ln_1p()
    }
}

/// `count` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gamma() {
            None => write!(f, "{}", self.family),
            Some(g) => write!(f, "{}(gamma={g})", self.family),
        }
    }
}

/// Parses `family` or `family:gamma`, e.g. `clayton:2`.
impl FromStr for GeneratorSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, gamma) = match s.split_once(':') {
            Some((n, g)) => {
                let g: f64 = g
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("invalid gamma in `{s}`")))?;
                (n.trim(), Some(g))
            }
            None => (s.trim(), None),
        };
        let family = match name.to_ascii_lowercase().as_str() {
            "independence" | "indep" => Family::Independence,
            "clayton" => Family::Clayton,
            "frank" => Family::Frank,
            "gumbel" => Family::Gumbel,
            "amh" => Family::Amh,
            other => return Err(Error::Parse(format!("unknown copula family `{other}`"))),
        };
        GeneratorSpec::new(family, gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DMonotoneViolation {
    pub t: f64,
    pub order: usize,
    pub derivative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DMonotoneReport {
    pub generator: GeneratorSpec,
    pub d: usize,
    pub points_checked: usize,
    pub violations: Vec<DMonotoneViolation>,
}

impl DMonotoneReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}
