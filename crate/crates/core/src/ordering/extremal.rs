use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The set `A_{a,b,c} = {α ∈ [a, b]^n : Σα = c}` with `a < b`, `c ∈ [na, nb)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxConstraint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub n: usize,
}

impl BoxConstraint {
    pub fn new(a: f64, b: f64, c: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::range("a, b, c", f64::NAN, "finite"));
        }
        if a >= b {
            return Err(Error::range("a", a, "a < b"));
        }
        if n == 0 {
            return Err(Error::range("n", 0.0, ">= 1"));
        }
        let nf = n as f64;
        if !(c >= nf * a && c < nf * b) {
            return Err(Error::range("c", c, "in [n*a, n*b)"));
        }
        Ok(BoxConstraint { a, b, c, n })
    }

    /// Whether `alpha` lies in the set, sums compared to `1e−12` relative.
    pub fn contains(&self, alpha: &[f64]) -> bool {
        let sum: f64 = alpha.iter().sum();
        alpha.len() == self.n
            && alpha.iter().all(|&v| v >= self.a && v <= self.b)
            && (sum - self.c).abs() <= 1e-12 * self.c.abs().max(1.0)
    }
}

/// The most and least dispersed members of `A_{a,b,c}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalConfig {
    pub alpha_star: Vec<f64>,
    pub alpha_bar: Vec<f64>,
    pub q: usize,
    pub eta: f64,
}

/// `q = ⌊(c − na)/(b − a)⌋`, `η = c − qb − (n − q − 1)a`,
/// `α* = (a, …, a, η, b, …, b)` (`n − q − 1` copies of `a`, `q` of `b`) and
/// `ᾱ = (c/n, …, c/n)`.
pub fn extremal_config(bc: &BoxConstraint) -> Result<ExtremalConfig> {
    let bc = BoxConstraint::new(bc.a, bc.b, bc.c, bc.n)?;
    let (a, b, c, n) = (bc.a, bc.b, bc.c, bc.n);
    let nf = n as f64;
    let mut q = (((c - nf * a) / (b - a)).floor().max(0.0) as usize).min(n - 1);
    let eta_of = |q: usize| c - q as f64 * b - (n - q - 1) as f64 * a;
    // rounding in the floor can leave η a hair outside [a, b)
    while eta_of(q) >= b && q + 1 < n {
        q += 1;
    }
    while eta_of(q) < a && q > 0 && eta_of(q - 1) < b {
        q -= 1;
    }
    let eta = eta_of(q).clamp(a, b);
    let mut alpha_star = vec![a; n - q - 1];
    alpha_star.push(eta);
    alpha_star.extend(std::iter::repeat_n(b, q));
    Ok(ExtremalConfig {
        alpha_star,
        alpha_bar: vec![c / nf; n],
        q,
        eta,
    })
}

/// A uniformly distributed member of `A_{a,b,c}`, by rejection from the
/// scaled simplex on whichever side (`α − a` or `b − α`) has the smaller total.
pub fn sample_box_member<R: Rng + ?Sized>(bc: &BoxConstraint, rng: &mut R) -> Vec<f64> {
    let (a, b, c, n) = (bc.a, bc.b, bc.c, bc.n);
    let nf = n as f64;
    let (low_total, high_total) = (c - nf * a, nf * b - c);
    let from_low = low_total <= high_total;
    let total = if from_low { low_total } else { high_total };
    let width = b - a;
    loop {
        let e: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
        let s: f64 = e.iter().sum();
        let y: Vec<f64> = e.iter().map(|v| total * v / s).collect();
        if y.iter().all(|&v| v <= width) {
            let mut alpha: Vec<f64> = if from_low {
                y.iter().map(|v| a + v).collect()
            } else {
                y.iter().map(|v| b - v).collect()
            };
            // put any rounding residue on the coordinate with the most room
            let resid = c - alpha.iter().sum::<f64>();
            if let Some(i) = (0..n).max_by(|&i, &j| {
                let room = |k: usize| if resid >= 0.0 { b - alpha[k] } else { alpha[k] - a };
                room(i).total_cmp(&room(j))
            }) {
                alpha[i] = (alpha[i] + resid).clamp(a, b);
            }
            return alpha;
        }
    }
}
