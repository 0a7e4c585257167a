//! Comparison of two systems in the usual stochastic order.
//!
//! [`dominance`] first tries to justify an ordering analytically (coordinatewise
//! parameter order plus copula ordering, then majorization plus monotonicity
//! of the relevant V-function) and then compares the two CDFs pointwise. The
//! numeric comparison always has the last word: a theorem that disagrees with
//! it is dropped and the verdict is reported as numeric only.

mod extremal;
mod grid;
mod majorization;
mod monotone;
mod schur;
mod superadd;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::copula::GeneratorSpec;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::system::{Structure, SystemSpec};
use crate::EvalMode;

pub use extremal::{extremal_config, sample_box_member, BoxConstraint, ExtremalConfig};
pub use grid::{quantile_grid, DEFAULT_GRID_POINTS};
pub use majorization::{coordinatewise_le, majorizes, ParamVector};
pub use monotone::{
    check_cell, check_s_monotone, check_v_monotone, monotonicity_cells, v_function, CellReport,
    CellStructure, Direction, GammaRange, MonotoneReport, MonotoneViolation, MonotonicityCell,
    SFunction, VVariant, MONOTONE_TOL,
};
pub use schur::{classify_signs, schur_scan, SchurCurve, SignClass, SCHUR_SIGN_TOL};
pub use superadd::{
    check_superadditive, default_superadditivity_grid, SuperadditivityCounterexample,
    SuperadditivityReport,
};

/// Pointwise tie tolerance for CDF comparisons.
pub const TAU: f64 = 1e-9;

/// Relation of system A to system B. `Dominates` means `F_A ≤ F_B` everywhere,
/// i.e. A's lifetime is stochastically larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Dominates,
    DominatedBy,
    Crossing,
    Indistinguishable,
}

/// Which result backs a verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Justification {
    /// Parallel systems, coordinatewise-ordered parameters.
    #[serde(rename = "Thm-main0")]
    ParallelCoordinatewise,
    /// Parallel systems, majorized parameters.
    #[serde(rename = "Thm-main1")]
    ParallelMajorization,
    /// Series systems, coordinatewise-ordered parameters.
    #[serde(rename = "Thm-main0min")]
    SeriesCoordinatewise,
    /// Series systems, majorized parameters.
    #[serde(rename = "Thm-main1min")]
    SeriesMajorization,
    /// (n−k)-out-of-n systems sharing one generator, coordinatewise order.
    #[serde(rename = "Thm-koutofn-coordinatewise")]
    KOutOfNCoordinatewise,
    NumericOnly,
}

impl Justification {
    pub fn token(self) -> &'static str {
        match self {
            Justification::ParallelCoordinatewise => "Thm-main0",
            Justification::ParallelMajorization => "Thm-main1",
            Justification::SeriesCoordinatewise => "Thm-main0min",
            Justification::SeriesMajorization => "Thm-main1min",
            Justification::KOutOfNCoordinatewise => "Thm-koutofn-coordinatewise",
            Justification::NumericOnly => "NumericOnly",
        }
    }
}

impl fmt::Display for Justification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub f1: f64,
    pub f2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceVerdict {
    pub relation: Relation,
    pub justification: Justification,
    pub max_gap: f64,
    pub witnesses: Vec<Witness>,
}

/// A theorem-backed relation, before any numeric comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AnalyticVerdict {
    pub relation: Relation,
    pub justification: Justification,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DominanceOptions {
    pub mode: EvalMode,
    pub exec: Execution,
}

impl Default for DominanceOptions {
    fn default() -> Self {
        DominanceOptions {
            mode: EvalMode::Safe,
            exec: Execution::default(),
        }
    }
}

fn check_compatible(a: &SystemSpec, b: &SystemSpec) -> Result<()> {
    if a.n() != b.n() {
        return Err(Error::Usage(format!(
            "systems have {} and {} components",
            a.n(),
            b.n()
        )));
    }
    if a.k() != b.k() {
        return Err(Error::Usage(format!("systems have k = {} and k = {}", a.k(), b.k())));
    }
    if a.transform() != b.transform() {
        return Err(Error::Usage("systems use different transformation models".into()));
    }
    if a.baseline() != b.baseline() {
        return Err(Error::Usage("systems use different baselines".into()));
    }
    Ok(())
}

/// `φ_outer ∘ ψ_inner` is super-additive on the default grid.
fn superadditive(inner: &GeneratorSpec, outer: &GeneratorSpec) -> bool {
    if inner == outer {
        return true;
    }
    check_superadditive(inner, outer, &default_superadditivity_grid())
        .map(|r| r.passed)
        .unwrap_or(false)
}

/// The V-function of `gen` is monotone as required over the span of both
/// parameter vectors, at (a subsample of) the interior points of `xgrid`.
fn v_hypothesis(gen: &GeneratorSpec, a: &SystemSpec, b: &SystemSpec, variant: VVariant, xgrid: &[f64]) -> bool {
    let all = a.params().iter().chain(b.params());
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    let betas: Vec<f64> = if hi > lo {
        (0..64).map(|i| lo + (hi - lo) * i as f64 / 63.0).collect()
    } else {
        vec![lo]
    };
    let base = a.baseline();
    let interior: Vec<f64> = xgrid
        .iter()
        .copied()
        .filter(|&x| {
            let f = base.cdf(x);
            f > 0.0 && f < 1.0
        })
        .collect();
    let stride = (interior.len() / 25).max(1);
    let xs: Vec<f64> = interior.into_iter().step_by(stride).collect();
    if xs.is_empty() {
        return false;
    }
    check_v_monotone(gen, a.transform(), base, variant, &betas, &xs)
        .map(|r| r.passed)
        .unwrap_or(false)
}

/// The theorem-backed relation of A to B, if one applies.
///
/// Hypotheses that are only checkable numerically (super-additivity,
/// V-monotonicity, d-monotonicity outside completely monotone families) are
/// grid-verified.
pub fn analytic_verdict(a: &SystemSpec, b: &SystemSpec, xgrid: &[f64]) -> Result<Option<AnalyticVerdict>> {
    check_compatible(a, b)?;
    let (ga, gb) = (a.generator(), b.generator());
    let (pa, pb) = (a.params(), b.params());
    let increasing = a.transform().param_direction() > 0.0;
    let hit = |relation, justification| Some(AnalyticVerdict { relation, justification });
    use Relation::*;
    match a.structure() {
        Structure::Parallel => {
            let j = Justification::ParallelCoordinatewise;
            if coordinatewise_le(pa, pb) {
                if increasing && superadditive(ga, gb) {
                    return Ok(hit(Dominates, j));
                }
                if !increasing && superadditive(gb, ga) {
                    return Ok(hit(DominatedBy, j));
                }
            }
            if coordinatewise_le(pb, pa) {
                if increasing && superadditive(gb, ga) {
                    return Ok(hit(DominatedBy, j));
                }
                if !increasing && superadditive(ga, gb) {
                    return Ok(hit(Dominates, j));
                }
            }
            let j = Justification::ParallelMajorization;
            if majorizes(pa, pb)?
                && superadditive(ga, gb)
                && gb.is_d_monotone(3)
                && v_hypothesis(gb, a, b, VVariant::V, xgrid)
            {
                return Ok(hit(Dominates, j));
            }
            if majorizes(pb, pa)?
                && superadditive(gb, ga)
                && ga.is_d_monotone(3)
                && v_hypothesis(ga, a, b, VVariant::V, xgrid)
            {
                return Ok(hit(DominatedBy, j));
            }
        }
        Structure::Series => {
            let j = Justification::SeriesCoordinatewise;
            if coordinatewise_le(pa, pb) {
                if !increasing && superadditive(ga, gb) {
                    return Ok(hit(DominatedBy, j));
                }
                if increasing && superadditive(gb, ga) {
                    return Ok(hit(Dominates, j));
                }
            }
            if coordinatewise_le(pb, pa) {
                if !increasing && superadditive(gb, ga) {
                    return Ok(hit(Dominates, j));
                }
                if increasing && superadditive(ga, gb) {
                    return Ok(hit(DominatedBy, j));
                }
            }
            let j = Justification::SeriesMajorization;
            if majorizes(pb, pa)?
                && superadditive(ga, gb)
                && ga.is_d_monotone(3)
                && v_hypothesis(ga, a, b, VVariant::Vbar, xgrid)
            {
                return Ok(hit(DominatedBy, j));
            }
            if majorizes(pa, pb)?
                && superadditive(gb, ga)
                && gb.is_d_monotone(3)
                && v_hypothesis(gb, a, b, VVariant::Vbar, xgrid)
            {
                return Ok(hit(Dominates, j));
            }
        }
        Structure::KOutOfN => {
            if ga != gb || !ga.is_d_monotone(a.k() + 3) {
                return Ok(None);
            }
            let j = Justification::KOutOfNCoordinatewise;
            if coordinatewise_le(pa, pb) {
                return Ok(hit(if increasing { Dominates } else { DominatedBy }, j));
            }
            if coordinatewise_le(pb, pa) {
                return Ok(hit(if increasing { DominatedBy } else { Dominates }, j));
            }
        }
    }
    Ok(None)
}

/// Pointwise relation of two sampled CDFs, with tie tolerance [`TAU`].
pub fn numeric_relation(xs: &[f64], fa: &[f64], fb: &[f64]) -> (Relation, f64, Vec<Witness>) {
    let mut max_gap = 0.0f64;
    let mut hi: Option<(usize, f64)> = None;
    let mut lo: Option<(usize, f64)> = None;
    for i in 0..xs.len() {
        let g = fa[i] - fb[i];
        max_gap = max_gap.max(g.abs());
        if g > TAU && hi.is_none_or(|(_, v)| g > v) {
            hi = Some((i, g));
        }
        if g < -TAU && lo.is_none_or(|(_, v)| g < v) {
            lo = Some((i, g));
        }
    }
    let w = |i: usize| Witness {
        x: xs[i],
        f1: fa[i],
        f2: fb[i],
    };
    match (hi, lo) {
        (Some((i, _)), Some((j, _))) => {
            let (first, second) = if i < j { (i, j) } else { (j, i) };
            (Relation::Crossing, max_gap, vec![w(first), w(second)])
        }
        (None, Some((j, _))) => (Relation::Dominates, max_gap, vec![w(j)]),
        (Some((i, _)), None) => (Relation::DominatedBy, max_gap, vec![w(i)]),
        (None, None) => (Relation::Indistinguishable, max_gap, vec![]),
    }
}

/// Compares A to B on `xgrid`; see the module documentation.
pub fn dominance(a: &SystemSpec, b: &SystemSpec, xgrid: &[f64]) -> Result<DominanceVerdict> {
    dominance_with(a, b, xgrid, DominanceOptions::default())
}

pub fn dominance_with(
    a: &SystemSpec,
    b: &SystemSpec,
    xgrid: &[f64],
    opts: DominanceOptions,
) -> Result<DominanceVerdict> {
    check_compatible(a, b)?;
    if xgrid.is_empty() {
        return Err(Error::Usage("comparison grid is empty".into()));
    }
    let fa = a.curve(xgrid, opts.mode, opts.exec)?;
    let fb = b.curve(xgrid, opts.mode, opts.exec)?;
    let (relation, max_gap, witnesses) = numeric_relation(xgrid, &fa, &fb);
    let justification = match analytic_verdict(a, b, xgrid)? {
        Some(av) if av.relation == relation || relation == Relation::Indistinguishable => av.justification,
        _ => Justification::NumericOnly,
    };
    Ok(DominanceVerdict {
        relation,
        justification,
        max_gap,
        witnesses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BaselineSpec, TransformSpec};

    fn sys(k: usize, g: GeneratorSpec, t: TransformSpec, params: &[f64]) -> SystemSpec {
        SystemSpec::new(k, g, t, BaselineSpec::StdExponential, params.to_vec()).unwrap()
    }

    fn clayton(g: f64) -> GeneratorSpec {
        GeneratorSpec::clayton(g).unwrap()
    }

    fn grid(a: &SystemSpec, b: &SystemSpec) -> Vec<f64> {
        quantile_grid(&[a, b], DEFAULT_GRID_POINTS).unwrap()
    }

    #[test]
    fn parallel_coordinatewise_example() {
        let a = sys(0, clayton(1.0), TransformSpec::phr(), &[1.0, 2.0]);
        let b = sys(0, clayton(2.0), TransformSpec::phr(), &[2.0, 3.0]);
        let v = dominance(&a, &b, &grid(&a, &b)).unwrap();
        assert_eq!(v.relation, Relation::Dominates);
        assert_eq!(v.justification, Justification::ParallelCoordinatewise);
        assert_eq!(v.witnesses.len(), 1);
        let js = serde_json::to_value(&v).unwrap();
        assert_eq!(js["relation"], "Dominates");
        assert_eq!(js["justification"], "Thm-main0");
    }

    #[test]
    fn identical_specs() {
        let a = sys(1, clayton(1.0), TransformSpec::phr(), &[1.0, 2.5, 4.0]);
        let v = dominance(&a, &a, &grid(&a, &a)).unwrap();
        assert_eq!(v.relation, Relation::Indistinguishable);
        assert!(v.max_gap <= TAU);
        assert!(v.witnesses.is_empty());
    }

    #[test]
    fn koutofn_majorization_is_numeric_only() {
        let a = sys(1, clayton(1.0), TransformSpec::phr(), &[1.0, 2.5, 4.0]);
        let b = sys(1, clayton(1.0), TransformSpec::phr(), &[2.5, 2.5, 2.5]);
        assert_eq!(analytic_verdict(&a, &b, &grid(&a, &b)).unwrap(), None);
        let v = dominance(&a, &b, &grid(&a, &b)).unwrap();
        assert_eq!(v.justification, Justification::NumericOnly);
    }

    #[test]
    fn parallel_majorization_fires() {
        let a = sys(0, clayton(1.0), TransformSpec::phr(), &[1.0, 2.5, 4.0]);
        let b = sys(0, clayton(2.0), TransformSpec::phr(), &[2.5, 2.5, 2.5]);
        let g = grid(&a, &b);
        let av = analytic_verdict(&a, &b, &g).unwrap().unwrap();
        assert_eq!(av.relation, Relation::Dominates);
        assert_eq!(av.justification, Justification::ParallelMajorization);
        let v = dominance(&a, &b, &g).unwrap();
        assert_eq!(v.relation, Relation::Dominates);
    }

    #[test]
    fn series_coordinatewise_prhr() {
        let a = sys(2, clayton(1.0), TransformSpec::prhr(), &[1.0, 2.0, 0.5]);
        let b = sys(2, clayton(2.0), TransformSpec::prhr(), &[1.5, 2.0, 1.0]);
        let g = grid(&a, &b);
        let av = analytic_verdict(&a, &b, &g).unwrap().unwrap();
        assert_eq!(av.justification, Justification::SeriesCoordinatewise);
        assert_eq!(av.relation, Relation::DominatedBy);
        assert_eq!(dominance(&a, &b, &g).unwrap().relation, Relation::DominatedBy);
    }

    #[test]
    fn structural_mismatch_is_usage_error() {
        let a = sys(0, clayton(1.0), TransformSpec::phr(), &[1.0, 2.0]);
        let b = sys(0, clayton(1.0), TransformSpec::phr(), &[1.0, 2.0, 3.0]);
        assert!(matches!(dominance(&a, &b, &[1.0]), Err(Error::Usage(_))));
        let c = sys(0, clayton(1.0), TransformSpec::prhr(), &[1.0, 2.0]);
        assert!(matches!(dominance(&a, &c, &[1.0]), Err(Error::Usage(_))));
    }

    #[test]
    fn crossing_has_opposite_witnesses() {
        let xs = [0.0, 1.0, 2.0];
        let (r, gap, w) = numeric_relation(&xs, &[0.1, 0.5, 0.9], &[0.2, 0.5, 0.8]);
        assert_eq!(r, Relation::Crossing);
        assert!((gap - 0.1).abs() < 1e-12);
        assert_eq!(w.len(), 2);
        assert!((w[0].f1 - w[0].f2) * (w[1].f1 - w[1].f2) < 0.0);
    }

    #[test]
    fn justification_tokens() {
        let js = serde_json::to_string(&Justification::KOutOfNCoordinatewise).unwrap();
        assert_eq!(js, "\"Thm-koutofn-coordinatewise\"");
        let back: Justification = serde_json::from_str("\"Thm-main1min\"").unwrap();
        assert_eq!(back, Justification::SeriesMajorization);
        assert_eq!(Justification::NumericOnly.to_string(), "NumericOnly");
    }
}
