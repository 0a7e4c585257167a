use crate::error::{Error, Result};
use crate::numeric::bisect_increasing;
use crate::system::SystemSpec;

/// Default number of grid points for curves and comparisons.
pub const DEFAULT_GRID_POINTS: usize = 400;

/// `points` quantile-spaced abscissae of the equal-weight mixture of every
/// component marginal of `specs`, at probabilities `(j + ½)/points`.
/// Support endpoints are never hit.
pub fn quantile_grid(specs: &[&SystemSpec], points: usize) -> Result<Vec<f64>> {
    if specs.is_empty() {
        return Err(Error::Usage("grid policy needs at least one system".into()));
    }
    if points == 0 {
        return Err(Error::range("grid points", 0.0, ">= 1"));
    }
    let mix = |x: f64| specs.iter().map(|s| s.mixture_cdf(x)).sum::<f64>() / specs.len() as f64;
    let (lo, mut hi) = specs[0].baseline().support();
    let p_max = (points as f64 - 0.5) / points as f64;
    if hi.is_infinite() {
        hi = lo + 1.0;
        while mix(hi) < p_max {
            hi = lo + 2.0 * (hi - lo);
            if hi > 1e300 {
                return Err(Error::Domain("mixture quantile does not converge".into()));
            }
        }
    }
    Ok((0..points)
        .map(|j| {
            let p = (j as f64 + 0.5) / points as f64;
            bisect_increasing(mix, p, lo, hi, 1e-13)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{BaselineSpec, GeneratorSpec, TransformSpec};

    #[test]
    fn single_exponential_component_hits_quantiles() {
        let s = SystemSpec::parallel(
            GeneratorSpec::independence(),
            TransformSpec::phr(),
            BaselineSpec::StdExponential,
            vec![1.0],
        )
        .unwrap();
        let g = quantile_grid(&[&s], 10).unwrap();
        assert_eq!(g.len(), 10);
        for (j, &x) in g.iter().enumerate() {
            let p = (j as f64 + 0.5) / 10.0;
            assert!((x + (-p).ln_1p()).abs() < 1e-10);
        }
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }
}
