use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Open01};

use crate::copula::{Family, GeneratorSpec};
use crate::error::{Error, Result};

/// Mixing variable `W` whose Laplace transform is the generator ψ.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Frailty {
    Unit,
    Gamma(Gamma<f64>),
    /// Positive stable with index `alpha ∈ (0, 1)`.
    Stable { alpha: f64 },
    /// Logarithmic series with `p = 1 − e^{−γ}`, stored as `γ`.
    LogSeries { gamma: f64 },
    /// Geometric on `{1, 2, …}` with success probability `1 − γ`.
    Geometric { ln_gamma: f64 },
}

impl Frailty {
    pub(crate) fn for_generator(gen: &GeneratorSpec) -> Result<Self> {
        let g = gen.gamma().unwrap_or(0.0);
        let unsupported = || Error::UnsupportedSampler(gen.to_string());
        match gen.family() {
            Family::Independence => Ok(Frailty::Unit),
            Family::Clayton if g > 0.0 => Gamma::new(1.0 / g, g)
                .map(Frailty::Gamma)
                .map_err(|_| unsupported()),
            Family::Gumbel if g == 1.0 => Ok(Frailty::Unit),
            Family::Gumbel => Ok(Frailty::Stable { alpha: 1.0 / g }),
            Family::Frank if g > 0.0 => Ok(Frailty::LogSeries { gamma: g }),
            Family::Amh if g == 0.0 => Ok(Frailty::Unit),
            Family::Amh if g > 0.0 && g < 1.0 => Ok(Frailty::Geometric { ln_gamma: g.ln() }),
            _ => Err(unsupported()),
        }
    }

    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Frailty::Unit => 1.0,
            Frailty::Gamma(ref d) => d.sample(rng),
            Frailty::Stable { alpha } => positive_stable(alpha, rng),
            Frailty::LogSeries { gamma } => log_series(gamma, rng) as f64,
            Frailty::Geometric { ln_gamma } => {
                let u: f64 = Open01.sample(rng);
                1.0 + (u.ln() / ln_gamma).floor()
            }
        }
    }
}

/// Chambers–Mallows–Stuck (Kanter form) draw with `E[e^{−sW}] = e^{−s^α}`.
fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = Open01.sample(rng);
    let theta = std::f64::consts::PI * u;
    let e: f64 = Exp1.sample(rng);
    let a = (alpha * theta).sin() / theta.sin().powf(1.0 / alpha);
    a * ((((1.0 - alpha) * theta).sin()) / e).powf((1.0 - alpha) / alpha)
}

/// Logarithmic series draw, `P(W = k) = p^k / (k γ)` with `p = 1 − e^{−γ}`
/// (Kemp's LK algorithm, an inversion in two stages that stays O(1) as p → 1).
fn log_series<R: Rng + ?Sized>(gamma: f64, rng: &mut R) -> u64 {
    let p = -(-gamma).exp_m1();
    let v: f64 = Open01.sample(rng);
    if v >= p {
        return 1;
    }
    let u: f64 = Open01.sample(rng);
    let q = -(-gamma * u).exp_m1();
    if v <= q * q {
        let k = (1.0 + v.ln() / q.ln()).floor();
        if k.is_finite() && k >= 1.0 {
            return k.min(u64::MAX as f64) as u64;
        }
        return 1;
    }
    if v <= q {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn log_series_pmf() {
        for gamma in [0.5f64, 3.0, 12.0] {
            let p = -(-gamma).exp_m1();
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let n = 200_000;
            let mut counts = [0usize; 4];
            for _ in 0..n {
                let k = log_series(gamma, &mut rng) as usize;
                if k <= 3 {
                    counts[k] += 1;
                }
            }
            for (k, &count) in counts.iter().enumerate().skip(1) {
                let pk = p.powi(k as i32) / (k as f64 * gamma);
                let emp = count as f64 / n as f64;
                let band = 4.0 * (pk * (1.0 - pk) / n as f64).sqrt();
                assert!((emp - pk).abs() <= band, "gamma={gamma} k={k}: {emp} vs {pk}");
            }
        }
    }

    #[test]
    fn stable_laplace_transform() {
        let alpha = 0.5;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        for s in [0.3f64, 1.0, 2.0] {
            let vals: Vec<f64> = (0..n).map(|_| (-s * positive_stable(alpha, &mut rng)).exp()).collect();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let expect = (-s.powf(alpha)).exp();
            assert!((mean - expect).abs() <= 4.0 * (var / n as f64).sqrt(), "s={s}: {mean} vs {expect}");
        }
    }

    #[test]
    fn geometric_mean() {
        let g = 0.6;
        let f = Frailty::for_generator(&GeneratorSpec::amh(g).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 100_000;
        let mean = (0..n).map(|_| f.sample(&mut rng)).sum::<f64>() / n as f64;
        let expect = 1.0 / (1.0 - g);
        let sd = (g / (1.0 - g).powi(2)).sqrt();
        assert!((mean - expect).abs() <= 4.0 * sd / (n as f64).sqrt());
    }

    #[test]
    fn unsupported_parameters() {
        for g in [
            GeneratorSpec::clayton(-0.5).unwrap(),
            GeneratorSpec::frank(-2.0).unwrap(),
            GeneratorSpec::amh(-0.3).unwrap(),
        ] {
            assert!(matches!(Frailty::for_generator(&g), Err(Error::UnsupportedSampler(_))));
        }
    }
}
