//! Iterated forward differences `Δ_{h_1,…,h_m} g(a)`.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Largest number of increments accepted; the expansion visits `2^m` points.
pub const MAX_INCREMENTS: usize = 25;

/// Base point and positive increments of an iterated forward difference.
#[derive(Debug, Clone, PartialEq)]
pub struct FdStencil {
    base: f64,
    increments: Vec<f64>,
}

impl FdStencil {
    pub fn new(base: f64, increments: Vec<f64>) -> Result<Self> {
        if !(base.is_finite() && base >= 0.0) {
            return Err(Error::range("base", base, "finite and >= 0"));
        }
        if increments.is_empty() {
            return Err(Error::Usage("stencil needs at least one increment".into()));
        }
        if increments.len() > MAX_INCREMENTS {
            return Err(Error::Resource(format!(
                "{} increments exceed the cap of {MAX_INCREMENTS}",
                increments.len()
            )));
        }
        if let Some(&h) = increments.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::range("increment", h, "finite and > 0"));
        }
        Ok(FdStencil { base, increments })
    }

    pub fn base(&self) -> f64 {
        self.base
    }

    pub fn increments(&self) -> &[f64] {
        &self.increments
    }
}

/// `Σ_{L ⊆ {1..m}} (−1)^{m−|L|} g(a + Σ_{r∈L} h_r)`.
pub fn forward_difference<G: Fn(f64) -> f64>(g: G, stencil: &FdStencil) -> f64 {
    expansion(&g, stencil.base, &stencil.increments)
}

/// Naive `(Δ_{h_1} ∘ ⋯ ∘ Δ_{h_m}) g(a)`, evaluated recursively. Increments
/// are added to the base in the same order as [`forward_difference`].
pub fn forward_difference_iterated<G: Fn(f64) -> f64>(g: G, stencil: &FdStencil) -> f64 {
    fn rec<G: Fn(f64) -> f64>(g: &G, a: f64, hs: &[f64]) -> f64 {
        match hs.split_first() {
            None => g(a),
            Some((&h, rest)) => rec(g, a + h, rest) - rec(g, a, rest),
        }
    }
    rec(&g, stencil.base, &stencil.increments)
}

/// Signed subset expansion without stencil validation. Zero increments are
/// allowed (the difference then vanishes); partial sums are formed along the
/// depth-first path so each point carries at most `m` roundings.
pub(crate) fn expansion<G: Fn(f64) -> f64>(g: &G, base: f64, increments: &[f64]) -> f64 {
    fn rec<G: Fn(f64) -> f64>(
        g: &G,
        hs: &[f64],
        point: f64,
        excluded: usize,
        acc: &mut KahanSum,
    ) {
        match hs.split_first() {
            None => {
                let v = g(point);
                acc.add(if excluded.is_multiple_of(2) { v } else { -v });
            }
            Some((&h, rest)) => {
                rec(g, rest, point + h, excluded, acc);
                rec(g, rest, point, excluded + 1, acc);
            }
        }
    }
    let mut acc = KahanSum::default();
    rec(g, increments, base, 0, &mut acc);
    acc.value()
}
