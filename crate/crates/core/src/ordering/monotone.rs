//! V-functions (generator-normalized parameter derivatives of `T`) and the
//! auxiliary S-functions whose monotonicity in `u ∈ (0, 1)` is used to argue
//! monotonicity of V in the parameter.

use serde::{Deserialize, Serialize};

use crate::copula::{Family, GeneratorSpec};
use crate::error::{Error, Result};
use crate::transform::{BaselineSpec, Model, TransformSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Increasing,
    Decreasing,
}

/// Which normalized derivative to evaluate.
///
/// * `V = (∂T/∂β) / ψ′∘φ(T)`
/// * `Vstar = −K∘φ(T) (∂T/∂β) / T`
/// * `Vbar = (∂T̄/∂β) / ψ′∘φ(T̄)`
/// * `VbarStar = −K∘φ(T̄) (∂T̄/∂β) / T̄`
///
/// `V ≡ Vstar` and `Vbar ≡ VbarStar` analytically; the starred forms go
/// through `K = −ψ/ψ′` instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VVariant {
    V,
    Vstar,
    Vbar,
    VbarStar,
}

impl VVariant {
    /// Direction in β required by the majorization theorems.
    pub fn required_direction(self) -> Direction {
        match self {
            VVariant::V | VVariant::Vstar => Direction::Increasing,
            VVariant::Vbar | VVariant::VbarStar => Direction::Decreasing,
        }
    }
}

/// Evaluates a V-function at `(β, x)`; requires `F(x) ∈ (0, 1)`.
pub fn v_function(
    gen: &GeneratorSpec,
    t: &TransformSpec,
    b: &BaselineSpec,
    beta: f64,
    x: f64,
    variant: VVariant,
) -> Result<f64> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::range("beta", beta, "finite and > 0"));
    }
    let (lcdf, lsf) = (b.log_cdf(x), b.log_sf(x));
    if !(lcdf.is_finite() && lsf.is_finite()) {
        return Err(Error::Domain(format!("V-function needs 0 < F(x) < 1 (x = {x})")));
    }
    let tv = t.apply_logs(beta, lcdf, lsf);
    let dt = t.dparam_logs(beta, lcdf, lsf);
    match variant {
        VVariant::V => Ok(dt / gen.psi_prime_of_phi_comp(tv.cdf, tv.sf)?),
        VVariant::Vbar => Ok(-dt / gen.psi_prime_of_phi_comp(tv.sf, tv.cdf)?),
        VVariant::Vstar => {
            let k = gen.kappa(gen.phi_comp(tv.cdf, tv.sf))?;
            Ok(-k * dt / tv.cdf)
        }
        VVariant::VbarStar => {
            let k = gen.kappa(gen.phi_comp(tv.sf, tv.cdf))?;
            Ok(k * dt / tv.sf)
        }
    }
}

/// A consecutive pair of samples that moves against the required direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneViolation {
    /// Fixed abscissa for V-scans; `None` for S-function scans.
    pub x: Option<f64>,
    pub at: (f64, f64),
    pub values: (f64, f64),
    /// Size of the step against the direction, relative to the larger magnitude.
    pub relative: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotoneReport {
    pub direction: Direction,
    pub points_checked: usize,
    pub tolerance: f64,
    pub passed: bool,
    pub worst: Option<MonotoneViolation>,
}

/// Relative tolerance for monotonicity scans.
pub const MONOTONE_TOL: f64 = 1e-12;

fn scan(
    args: &[f64],
    values: &[f64],
    x: Option<f64>,
    dir: Direction,
    tol: f64,
    worst: &mut Option<MonotoneViolation>,
) {
    for i in 1..values.len() {
        let (a, b) = (values[i - 1], values[i]);
        let step = match dir {
            Direction::Increasing => a - b,
            Direction::Decreasing => b - a,
        };
        let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
        let rel = if step.is_nan() { f64::INFINITY } else { step / scale };
        if rel > tol && worst.is_none_or(|w| rel > w.relative) {
            *worst = Some(MonotoneViolation {
                x,
                at: (args[i - 1], args[i]),
                values: (a, b),
                relative: rel,
            });
        }
    }
}

/// Checks that the V-function moves in `variant.required_direction()` along
/// `beta_grid` (sorted increasingly) at each `x` of `x_grid`.
pub fn check_v_monotone(
    gen: &GeneratorSpec,
    t: &TransformSpec,
    b: &BaselineSpec,
    variant: VVariant,
    beta_grid: &[f64],
    x_grid: &[f64],
) -> Result<MonotoneReport> {
    check_v_direction(gen, t, b, variant, variant.required_direction(), beta_grid, x_grid)
}

pub(crate) fn check_v_direction(
    gen: &GeneratorSpec,
    t: &TransformSpec,
    b: &BaselineSpec,
    variant: VVariant,
    dir: Direction,
    beta_grid: &[f64],
    x_grid: &[f64],
) -> Result<MonotoneReport> {
    let mut worst = None;
    for &x in x_grid {
        let vals = beta_grid
            .iter()
            .map(|&beta| v_function(gen, t, b, beta, x, variant))
            .collect::<Result<Vec<_>>>()?;
        scan(beta_grid, &vals, Some(x), dir, MONOTONE_TOL, &mut worst);
    }
    Ok(MonotoneReport {
        direction: dir,
        points_checked: beta_grid.len() * x_grid.len(),
        tolerance: MONOTONE_TOL,
        passed: worst.is_none(),
        worst,
    })
}

/// Auxiliary functions of `u ∈ (0, 1)`.
///
/// * `Se(u) = (1 − u) / ψ′∘φ(u)`
/// * `SeBar(u) = (1 − u) / ψ′∘φ(1 − u)`
/// * `Sc(u) = u / ψ′∘φ(u)`
/// * `SoBar(u) = u² / ψ′∘φ(u)`
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SFunction {
    Se,
    SeBar,
    Sc,
    SoBar,
}

impl SFunction {
    pub fn eval(self, gen: &GeneratorSpec, u: f64) -> Result<f64> {
        let w = 1.0 - u;
        Ok(match self {
            SFunction::Se => w / gen.psi_prime_of_phi_comp(u, w)?,
            SFunction::SeBar => w / gen.psi_prime_of_phi_comp(w, u)?,
            SFunction::Sc => u / gen.psi_prime_of_phi_comp(u, w)?,
            SFunction::SoBar => u * u / gen.psi_prime_of_phi_comp(u, w)?,
        })
    }
}

/// Checks `s` for monotonicity in `dir` along `grid ⊂ (0, 1)`.
pub fn check_s_monotone(
    gen: &GeneratorSpec,
    s: SFunction,
    dir: Direction,
    grid: &[f64],
) -> Result<MonotoneReport> {
    let vals = grid
        .iter()
        .map(|&u| s.eval(gen, u))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = None;
    scan(grid, &vals, None, dir, MONOTONE_TOL, &mut worst);
    Ok(MonotoneReport {
        direction: dir,
        points_checked: grid.len(),
        tolerance: MONOTONE_TOL,
        passed: worst.is_none(),
        worst,
    })
}

/// System structure a monotonicity cell refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CellStructure {
    Parallel,
    Series,
}

/// A parameter range `lo..hi` with inclusivity flags.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaRange {
    pub lo: f64,
    pub lo_inclusive: bool,
    pub hi: f64,
    pub hi_inclusive: bool,
}

impl GammaRange {
    const fn new(lo: f64, lo_inclusive: bool, hi: f64, hi_inclusive: bool) -> Self {
        GammaRange {
            lo,
            lo_inclusive,
            hi,
            hi_inclusive,
        }
    }
}

impl std::fmt::Display for GammaRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let l = if self.lo_inclusive { '[' } else { '(' };
        let r = if self.hi_inclusive { ']' } else { ')' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// One claimed monotonicity: for `model` under `structure`, every generator of
/// `family` with γ in `range` makes `s_function` move in `s_direction` on
/// `(0, 1)`, and hence the V-function `v_variant` monotone in β as the
/// majorization theorems require.
#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityCell {
    pub model: Model,
    pub structure: CellStructure,
    pub family: Family,
    pub range: GammaRange,
    pub s_function: SFunction,
    pub s_direction: Direction,
    pub v_variant: VVariant,
    /// Representative γ values inside `range`.
    pub gammas: Vec<f64>,
}

impl MonotonicityCell {
    pub fn label(&self) -> String {
        let st = match self.structure {
            CellStructure::Parallel => "parallel",
            CellStructure::Series => "series",
        };
        let m = match self.model {
            Model::Phr => "PHR",
            Model::Prhr => "PRHR",
            Model::Omo => "OMO",
        };
        format!("{m} {st} {} gamma in {}", self.family, self.range)
    }
}

const INF: f64 = f64::INFINITY;

/// Every monotonicity cell claimed for the three transformation models.
pub fn monotonicity_cells() -> Vec<MonotonicityCell> {
    use CellStructure::*;
    use Direction::*;
    use Family::*;
    let cell = |model, structure, family, range, s_function, s_direction, v_variant, gammas: &[f64]| {
        MonotonicityCell {
            model,
            structure,
            family,
            range,
            s_function,
            s_direction,
            v_variant,
            gammas: gammas.to_vec(),
        }
    };
    let r = GammaRange::new;
    vec![
        // PHR, parallel: Se increasing
        cell(Model::Phr, Parallel, Clayton, r(-1.0, true, INF, false), SFunction::Se, Increasing, VVariant::V, &[-1.0, -0.5, 0.5, 1.0, 3.0]),
        cell(Model::Phr, Parallel, Gumbel, r(1.0, true, INF, false), SFunction::Se, Increasing, VVariant::V, &[1.0, 1.5, 2.0, 4.0]),
        cell(Model::Phr, Parallel, Amh, r(-1.0, false, 1.0, false), SFunction::Se, Increasing, VVariant::V, &[-0.9, -0.3, 0.3, 0.9]),
        // PHR, series: SeBar decreasing
        cell(Model::Phr, Series, Clayton, r(0.0, false, INF, false), SFunction::SeBar, Decreasing, VVariant::Vbar, &[0.2, 1.0, 3.0]),
        cell(Model::Phr, Series, Frank, r(-INF, false, INF, false), SFunction::SeBar, Decreasing, VVariant::Vbar, &[-5.0, -1.0, 1.0, 5.0]),
        cell(Model::Phr, Series, Gumbel, r(1.0, true, INF, false), SFunction::SeBar, Decreasing, VVariant::Vbar, &[1.0, 1.5, 2.0, 4.0]),
        cell(Model::Phr, Series, Amh, r(0.0, false, 1.0, false), SFunction::SeBar, Decreasing, VVariant::Vbar, &[0.2, 0.5, 0.9]),
        // PRHR, parallel: Sc increasing
        cell(Model::Prhr, Parallel, Clayton, r(0.0, true, INF, false), SFunction::Sc, Increasing, VVariant::V, &[0.2, 1.0, 3.0]),
        cell(Model::Prhr, Parallel, Amh, r(0.0, true, 1.0, true), SFunction::Sc, Increasing, VVariant::V, &[0.0, 0.5, 0.9]),
        // OMO, parallel: V* increasing (argued directly in β)
        cell(Model::Omo, Parallel, Clayton, r(1.0, true, INF, false), SFunction::Sc, Increasing, VVariant::Vstar, &[1.0, 2.0, 5.0]),
        cell(Model::Omo, Parallel, Frank, r(0.0, true, INF, false), SFunction::Sc, Increasing, VVariant::Vstar, &[0.5, 2.0, 10.0]),
        cell(Model::Omo, Parallel, Gumbel, r(1.0, true, INF, false), SFunction::Sc, Increasing, VVariant::Vstar, &[1.0, 2.0, 4.0]),
        cell(Model::Omo, Parallel, Amh, r(-1.0, false, 1.0, false), SFunction::Sc, Increasing, VVariant::Vstar, &[-0.9, -0.3, 0.3, 0.9]),
        // OMO, series: SoBar decreasing
        cell(Model::Omo, Series, Clayton, r(-1.0, true, 1.0, true), SFunction::SoBar, Decreasing, VVariant::Vbar, &[-1.0, -0.5, 0.5, 1.0]),
    ]
}

/// Outcome of one cell at one γ.
#[derive(Debug, Clone, Serialize)]
pub struct CellReport {
    pub label: String,
    pub gamma: f64,
    /// `None` for OMO parallel cells, which are argued directly on V*.
    pub s_report: Option<MonotoneReport>,
    pub v_report: MonotoneReport,
    pub passed: bool,
}

/// Checks one cell at one γ: the S-function claim on `u_grid` (where the cell
/// argues through one) and the V-function requirement on `beta_grid × x_grid`.
pub fn check_cell(
    cell: &MonotonicityCell,
    gamma: f64,
    baseline: &BaselineSpec,
    theta: f64,
    u_grid: &[f64],
    beta_grid: &[f64],
    x_grid: &[f64],
) -> Result<CellReport> {
    let gen = GeneratorSpec::new(cell.family, Some(gamma))?;
    let transform = match cell.model {
        Model::Phr => TransformSpec::phr(),
        Model::Prhr => TransformSpec::prhr(),
        Model::Omo => TransformSpec::omo(theta)?,
    };
    let s_report = if cell.model == Model::Omo && cell.structure == CellStructure::Parallel {
        None
    } else {
        Some(check_s_monotone(&gen, cell.s_function, cell.s_direction, u_grid)?)
    };
    let v_report = check_v_monotone(&gen, &transform, baseline, cell.v_variant, beta_grid, x_grid)?;
    let passed = v_report.passed && s_report.as_ref().is_none_or(|r| r.passed);
    Ok(CellReport {
        label: cell.label(),
        gamma,
        s_report,
        v_report,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const E: BaselineSpec = BaselineSpec::StdExponential;

    fn u_grid() -> Vec<f64> {
        (1..=1000).map(|i| i as f64 / 1001.0).collect()
    }

    fn beta_grid() -> Vec<f64> {
        crate::copula::log_grid(0.05, 20.0, 200)
    }

    #[test]
    fn phr_clayton_v_matches_closed_form() {
        // V(β) = −x (1 − e^{−βx})^{−(1+γ)} e^{−βx}
        let gamma = 1.5;
        let gen = GeneratorSpec::clayton(gamma).unwrap();
        for &beta in &[0.3, 1.0, 2.7] {
            for &x in &[0.2, 1.0, 3.0] {
                let v = v_function(&gen, &TransformSpec::phr(), &E, beta, x, VVariant::V).unwrap();
                let e = -x * (1.0 - (-beta * x).exp()).powf(-(1.0 + gamma)) * (-beta * x).exp();
                assert!((v - e).abs() <= 1e-13 * e.abs(), "β={beta} x={x}");
            }
        }
    }

    #[test]
    fn independence_v_is_log_derivative() {
        let gen = GeneratorSpec::independence();
        for t in [TransformSpec::phr(), TransformSpec::prhr(), TransformSpec::omo(2.0).unwrap()] {
            let (beta, x) = (1.3, 0.8);
            let v = v_function(&gen, &t, &E, beta, x, VVariant::V).unwrap();
            let tv = t.cdf(&E, beta, x).unwrap();
            let dt = t.cdf_dparam(&E, beta, x, crate::EvalMode::Raw).unwrap();
            assert!((v + dt / tv).abs() < 1e-14);
        }
    }

    #[test]
    fn omo_amh_vstar_closed_form() {
        // V* = −(1−γ) F̄^θ / (β (β F^θ + (1−γ) F̄^θ))
        let (gamma, theta) = (0.4, 1.7);
        let gen = GeneratorSpec::amh(gamma).unwrap();
        let t = TransformSpec::omo(theta).unwrap();
        for &beta in &[0.5, 2.0] {
            for &x in &[0.3, 1.5] {
                let v = v_function(&gen, &t, &E, beta, x, VVariant::Vstar).unwrap();
                let (f, fb) = (E.cdf(x).powf(theta), E.sf(x).powf(theta));
                let e = -(1.0 - gamma) * fb / (beta * (beta * f + (1.0 - gamma) * fb));
                assert!((v - e).abs() <= 1e-13 * e.abs());
            }
        }
    }

    #[test]
    fn starred_forms_equal_plain_forms() {
        let gens = [
            GeneratorSpec::clayton(2.0).unwrap(),
            GeneratorSpec::frank(3.0).unwrap(),
            GeneratorSpec::gumbel(1.8).unwrap(),
            GeneratorSpec::amh(-0.4).unwrap(),
        ];
        let t = TransformSpec::omo(0.8).unwrap();
        for g in &gens {
            for &x in &[0.2, 1.0, 2.5] {
                let a = v_function(g, &t, &E, 1.4, x, VVariant::V).unwrap();
                let b = v_function(g, &t, &E, 1.4, x, VVariant::Vstar).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs(), "{g}");
                let a = v_function(g, &t, &E, 1.4, x, VVariant::Vbar).unwrap();
                let b = v_function(g, &t, &E, 1.4, x, VVariant::VbarStar).unwrap();
                assert!((a - b).abs() <= 1e-12 * a.abs(), "{g}");
            }
        }
    }

    #[test]
    fn s_function_examples() {
        let ug = u_grid();
        let r = check_s_monotone(&GeneratorSpec::clayton(0.5).unwrap(), SFunction::Se, Direction::Increasing, &ug).unwrap();
        assert!(r.passed);
        let r = check_s_monotone(&GeneratorSpec::gumbel(2.0).unwrap(), SFunction::SeBar, Direction::Decreasing, &ug).unwrap();
        assert!(r.passed);
        let r = check_s_monotone(&GeneratorSpec::amh(0.5).unwrap(), SFunction::Sc, Direction::Increasing, &ug).unwrap();
        assert!(r.passed);
    }

    #[test]
    fn s_function_closed_forms() {
        let g = 0.7;
        let c = GeneratorSpec::clayton(g).unwrap();
        for &u in &[0.1, 0.5, 0.9] {
            let se = SFunction::Se.eval(&c, u).unwrap();
            assert!((se - (u.powf(-g) - u.powf(-(g + 1.0)))).abs() < 1e-12);
            let sc = SFunction::Sc.eval(&c, u).unwrap();
            assert!((sc + u.powf(-g)).abs() < 1e-12);
            let so = SFunction::SoBar.eval(&c, u).unwrap();
            assert!((so + u.powf(1.0 - g)).abs() < 1e-12);
        }
    }

    #[test]
    fn parallel_phr_clayton_v_is_increasing() {
        let xs = [0.1, 0.7, 2.0];
        let r = check_v_monotone(
            &GeneratorSpec::clayton(0.5).unwrap(),
            &TransformSpec::phr(),
            &E,
            VVariant::V,
            &beta_grid(),
            &xs,
        )
        .unwrap();
        assert!(r.passed, "{:?}", r.worst);
    }

    #[test]
    fn series_phr_clayton_vbar_is_not_decreasing() {
        // V̄(β) = −log F̄(x) · F̄(x)^{−γβ}: increasing in β for γ > 0
        let xs = [0.5];
        let gamma = 1.0;
        let gen = GeneratorSpec::clayton(gamma).unwrap();
        let r = check_v_monotone(&gen, &TransformSpec::phr(), &E, VVariant::Vbar, &beta_grid(), &xs).unwrap();
        assert!(!r.passed);
        let v = v_function(&gen, &TransformSpec::phr(), &E, 2.0, 0.5, VVariant::Vbar).unwrap();
        let e = 0.5 * (0.5f64 * gamma * 2.0).exp();
        assert!((v - e).abs() < 1e-12 * e);
    }

    #[test]
    fn cells_are_well_formed() {
        let cells = monotonicity_cells();
        assert_eq!(cells.len(), 14);
        for c in &cells {
            for &g in &c.gammas {
                let r = c.range;
                let inside = (g > r.lo || (r.lo_inclusive && g == r.lo)) && (g < r.hi || (r.hi_inclusive && g == r.hi));
                assert!(inside, "{} gamma {g}", c.label());
            }
        }
    }
}
