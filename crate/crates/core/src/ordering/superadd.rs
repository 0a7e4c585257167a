use serde::Serialize;

use crate::copula::{log_grid, GeneratorSpec};
use crate::error::{Error, Result};

/// A pair `(x, y)` with `g(x + y) < g(x) + g(y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuperadditivityCounterexample {
    pub x: f64,
    pub y: f64,
    pub gap: f64,
}

/// Result of a grid check of `g = φ₂ ∘ ψ₁` for super-additivity.
#[derive(Debug, Clone, Serialize)]
pub struct SuperadditivityReport {
    pub gen1: GeneratorSpec,
    pub gen2: GeneratorSpec,
    pub pairs_checked: usize,
    pub passed: bool,
    /// Always `"grid-verified"`: a pass is a statement about the grid only.
    pub status: &'static str,
    pub counterexample: Option<SuperadditivityCounterexample>,
}

/// Default grid used by [`super::dominance`].
pub fn default_superadditivity_grid() -> Vec<f64> {
    log_grid(1e-4, 50.0, 60)
}

/// Checks `g(x + y) ≥ g(x) + g(y)` for every pair of grid points, where
/// `g = φ₂ ∘ ψ₁`. The worst violation (if any) is reported.
pub fn check_superadditive(
    gen1: &GeneratorSpec,
    gen2: &GeneratorSpec,
    grid: &[f64],
) -> Result<SuperadditivityReport> {
    if let Some(&v) = grid.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::range("grid point", v, "finite and >= 0"));
    }
    let g = |t: f64| gen2.phi_raw(gen1.psi(t).clamp(0.0, 1.0));
    let gv: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let mut worst: Option<SuperadditivityCounterexample> = None;
    let mut pairs = 0;
    for i in 0..grid.len() {
        for j in i..grid.len() {
            pairs += 1;
            let lhs = g(grid[i] + grid[j]);
            if lhs == f64::INFINITY {
                continue;
            }
            let rhs = gv[i] + gv[j];
            let gap = lhs - rhs;
            let tol = 1e-9 * (lhs.abs() + gv[i].abs() + gv[j].abs()) + 1e-12;
            if gap < -tol && worst.is_none_or(|w| gap < w.gap) {
                worst = Some(SuperadditivityCounterexample {
                    x: grid[i],
                    y: grid[j],
                    gap,
                });
            }
        }
    }
    Ok(SuperadditivityReport {
        gen1: *gen1,
        gen2: *gen2,
        pairs_checked: pairs,
        passed: worst.is_none(),
        status: "grid-verified",
        counterexample: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        (1..=200).map(|i| 0.1 * i as f64).collect()
    }

    #[test]
    fn independence_into_gumbel_passes() {
        let r = check_superadditive(
            &GeneratorSpec::independence(),
            &GeneratorSpec::gumbel(2.0).unwrap(),
            &grid(),
        )
        .unwrap();
        assert!(r.passed);
        assert_eq!(r.status, "grid-verified");
    }

    #[test]
    fn clayton_increasing_parameter_passes() {
        let r = check_superadditive(
            &GeneratorSpec::clayton(1.0).unwrap(),
            &GeneratorSpec::clayton(2.0).unwrap(),
            &grid(),
        )
        .unwrap();
        assert!(r.passed);
    }

    #[test]
    fn clayton_decreasing_parameter_fails() {
        // g(t) = ((1 + 2t)^{1/4} − 1)/0.5 is concave with g(0) = 0: strictly sub-additive
        let r = check_superadditive(
            &GeneratorSpec::clayton(2.0).unwrap(),
            &GeneratorSpec::clayton(0.5).unwrap(),
            &grid(),
        )
        .unwrap();
        assert!(!r.passed);
        let c = r.counterexample.unwrap();
        let g = |t: f64| ((1.0 + 2.0 * t).powf(0.25) - 1.0) / 0.5;
        let oracle = g(c.x + c.y) - g(c.x) - g(c.y);
        assert!((c.gap - oracle).abs() < 1e-9 * oracle.abs().max(1.0));
        assert!(oracle < 0.0);
    }

    #[test]
    fn rejects_negative_grid() {
        let g = GeneratorSpec::independence();
        assert!(check_superadditive(&g, &g, &[-1.0]).is_err());
    }
}
