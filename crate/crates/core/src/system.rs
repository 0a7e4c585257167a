//! System lifetime distributions.
//!
//! With `u_i = T(α_i, F)(x)` and `t_i = φ(u_i)`, the (n−k)-out-of-n lifetime
//! `X_{n−k:n}` has
//!
//! ```text
//! F_{n−k:n}(x) = Σ_{j=n−k}^{n} (−1)^{j−(n−k)} C(j−1, n−k−1) Σ_{|I|=j} ψ(Σ_{i∈I} t_i)
//! ```
//!
//! `k = 0` is the parallel system `ψ(Σ t_i)`; `k = n − 1` is the series system,
//! evaluated with the copula on the component survival functions:
//! `S(x) = ψ(Σ φ(1 − u_i))`.

use serde::{Deserialize, Serialize};

use crate::copula::{fd_expansion, Family, GeneratorSpec};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::{binomial, stable_sum, KahanSum};
use crate::transform::{BaselineSpec, TransformSpec};
use crate::EvalMode;

/// Largest supported number of components.
pub const MAX_COMPONENTS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Structure {
    Parallel,
    Series,
    KOutOfN,
}

/// A system of `n` components of which at least `n − k` must fail for the
/// system to fail (lifetime `X_{n−k:n}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemRepr", into = "SystemRepr")]
pub struct SystemSpec {
    k: usize,
    generator: GeneratorSpec,
    transform: TransformSpec,
    baseline: BaselineSpec,
    params: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    k: usize,
    generator: GeneratorSpec,
    transform: TransformSpec,
    baseline: BaselineSpec,
    params: Vec<f64>,
}

impl TryFrom<SystemRepr> for SystemSpec {
    type Error = Error;
    fn try_from(r: SystemRepr) -> Result<Self> {
        if let Some(n) = r.n {
            if n != r.params.len() {
                return Err(Error::Usage(format!(
                    "n = {n} but {} parameters were given",
                    r.params.len()
                )));
            }
        }
        SystemSpec::new(r.k, r.generator, r.transform, r.baseline, r.params)
    }
}

impl From<SystemSpec> for SystemRepr {
    fn from(s: SystemSpec) -> Self {
        SystemRepr {
            n: Some(s.params.len()),
            k: s.k,
            generator: s.generator,
            transform: s.transform,
            baseline: s.baseline,
            params: s.params,
        }
    }
}

/// Component CDF values and their generator inverses at one `x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalPoint {
    pub x: f64,
    pub u: Vec<f64>,
    pub t: Vec<f64>,
}

impl SystemSpec {
    /// Any admissible generator is accepted; the result is a distribution
    /// function only when ψ is n-monotone (e.g. not Frank γ < 0 for n ≥ 3).
    pub fn new(
        k: usize,
        generator: GeneratorSpec,
        transform: TransformSpec,
        baseline: BaselineSpec,
        params: Vec<f64>,
    ) -> Result<Self> {
        let n = params.len();
        if n == 0 {
            return Err(Error::Usage("a system needs at least one component".into()));
        }
        if n > MAX_COMPONENTS {
            return Err(Error::Resource(format!(
                "{n} components exceed the cap of {MAX_COMPONENTS}"
            )));
        }
        if k > n - 1 {
            return Err(Error::range("k", k as f64, "0 <= k <= n - 1"));
        }
        if let Some(&p) = params.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::range("params", p, "finite and > 0"));
        }
        Ok(SystemSpec {
            k,
            generator,
            transform,
            baseline,
            params,
        })
    }

    pub fn parallel(
        generator: GeneratorSpec,
        transform: TransformSpec,
        baseline: BaselineSpec,
        params: Vec<f64>,
    ) -> Result<Self> {
        Self::new(0, generator, transform, baseline, params)
    }

    pub fn series(
        generator: GeneratorSpec,
        transform: TransformSpec,
        baseline: BaselineSpec,
        params: Vec<f64>,
    ) -> Result<Self> {
        let k = params.len().saturating_sub(1);
        Self::new(k, generator, transform, baseline, params)
    }

    pub fn n(&self) -> usize {
        self.params.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.generator
    }

    pub fn transform(&self) -> &TransformSpec {
        &self.transform
    }

    pub fn baseline(&self) -> &BaselineSpec {
        &self.baseline
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn structure(&self) -> Structure {
        if self.k == 0 {
            Structure::Parallel
        } else if self.k == self.n() - 1 {
            Structure::Series
        } else {
            Structure::KOutOfN
        }
    }

    pub fn with_params(&self, params: Vec<f64>) -> Result<Self> {
        if params.len() != self.n() {
            return Err(Error::Usage("parameter vector length changed".into()));
        }
        Self::new(self.k, self.generator, self.transform, self.baseline.clone(), params)
    }

    pub fn with_k(&self, k: usize) -> Result<Self> {
        Self::new(k, self.generator, self.transform, self.baseline.clone(), self.params.clone())
    }

    pub fn with_generator(&self, generator: GeneratorSpec) -> Self {
        SystemSpec {
            generator,
            ..self.clone()
        }
    }

    fn component_index(&self, l: usize) -> Result<()> {
        if l >= self.n() {
            return Err(Error::range("component index", l as f64, "< n"));
        }
        Ok(())
    }

    /// `T(α_i, F)(x)` for component `i`.
    pub fn component_cdf(&self, i: usize, x: f64) -> f64 {
        self.transform
            .apply_logs(self.params[i], self.baseline.log_cdf(x), self.baseline.log_sf(x))
            .cdf
    }

    /// Equal-weight mixture of the component CDFs.
    pub fn mixture_cdf(&self, x: f64) -> f64 {
        let (lc, ls) = (self.baseline.log_cdf(x), self.baseline.log_sf(x));
        let s: f64 = self
            .params
            .iter()
            .map(|&p| self.transform.apply_logs(p, lc, ls).cdf)
            .sum();
        s / self.n() as f64
    }

    fn component_values(&self, x: f64) -> Vec<crate::transform::TransformValue> {
        let (lc, ls) = (self.baseline.log_cdf(x), self.baseline.log_sf(x));
        self.params
            .iter()
            .map(|&p| self.transform.apply_logs(p, lc, ls))
            .collect()
    }

    /// `u_i = T(α_i, F)(x)` (conditioned per `mode`) and `t_i = φ(u_i)`.
    pub fn eval_point(&self, x: f64, mode: EvalMode) -> EvalPoint {
        let (u, t) = self.points_with(x, mode, false);
        EvalPoint { x, u, t }
    }

    /// Conditioned probabilities and their φ-images; `survival` selects `T̄`.
    fn points_with(&self, x: f64, mode: EvalMode, survival: bool) -> (Vec<f64>, Vec<f64>) {
        let mut u = Vec::with_capacity(self.n());
        let mut t = Vec::with_capacity(self.n());
        for v in self.component_values(x) {
            let (p, q) = if survival { (v.sf, v.cdf) } else { (v.cdf, v.sf) };
            let (p, q) = mode.condition_pair(p, q);
            u.push(p);
            t.push(self.generator.phi_comp(p, q));
        }
        (u, t)
    }

    fn survival_point(&self, x: f64, mode: EvalMode) -> (Vec<f64>, Vec<f64>) {
        self.points_with(x, mode, true)
    }

    fn copula_of(&self, u: &[f64], t: &[f64]) -> f64 {
        if u.contains(&0.0) {
            return 0.0;
        }
        if self.generator.family() == Family::Independence {
            return u.iter().product();
        }
        let mut acc = KahanSum::default();
        for &ti in t {
            acc.add(ti);
        }
        let s = if t.contains(&f64::INFINITY) {
            f64::INFINITY
        } else {
            acc.value()
        };
        self.generator.psi(s).clamp(0.0, 1.0)
    }

    /// `F_{n:n}(x) = ψ(Σ φ(u_i))`.
    pub fn parallel_cdf(&self, x: f64, mode: EvalMode) -> f64 {
        let p = self.eval_point(x, mode);
        self.copula_of(&p.u, &p.t)
    }

    /// `P(X_{1:n} > x) = ψ(Σ φ(1 − u_i))`.
    pub fn series_survival(&self, x: f64, mode: EvalMode) -> f64 {
        let (v, s) = self.survival_point(x, mode);
        self.copula_of(&v, &s)
    }

    /// The system CDF, dispatching `k = 0` and `k = n − 1` to the closed forms.
    pub fn cdf(&self, x: f64, mode: EvalMode) -> Result<f64> {
        match self.structure() {
            Structure::Parallel => Ok(self.parallel_cdf(x, mode)),
            Structure::Series => Ok(1.0 - self.series_survival(x, mode)),
            Structure::KOutOfN => self.inclusion_exclusion_cdf(x, mode),
        }
    }

    /// The inclusion–exclusion sum, for any `k` (no dispatch).
    pub fn inclusion_exclusion_cdf(&self, x: f64, mode: EvalMode) -> Result<f64> {
        let p = self.eval_point(x, mode);
        Ok(self.ie_from_t(&p.t).clamp(0.0, 1.0))
    }

    fn ie_from_t(&self, t: &[f64]) -> f64 {
        let n = t.len();
        let m = n - self.k;
        let mut by_size = vec![KahanSum::default(); n + 1];
        let g = &self.generator;
        // depth-first subset walk; subsets that cannot reach size m are pruned
        fn walk(
            g: &GeneratorSpec,
            t: &[f64],
            i: usize,
            size: usize,
            sum: f64,
            m: usize,
            out: &mut [KahanSum],
        ) {
            if i == t.len() {
                if size >= m {
                    out[size].add(g.psi(sum));
                }
                return;
            }
            if size + (t.len() - i) < m {
                return;
            }
            walk(g, t, i + 1, size + 1, sum + t[i], m, out);
            walk(g, t, i + 1, size, sum, m, out);
        }
        walk(g, t, 0, 0, 0.0, m, &mut by_size);
        let mut terms: Vec<f64> = (m..=n)
            .map(|j| {
                let c = binomial((j - 1) as u32, (m - 1) as u32) as f64;
                let sign = if (j - m).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * c * by_size[j].value()
            })
            .collect();
        stable_sum(&mut terms)
    }

    /// System survival `1 − F`.
    pub fn survival(&self, x: f64, mode: EvalMode) -> Result<f64> {
        match self.structure() {
            Structure::Series => Ok(self.series_survival(x, mode)),
            _ => Ok(1.0 - self.cdf(x, mode)?),
        }
    }

    /// The system CDF over `xs`.
    pub fn curve(&self, xs: &[f64], mode: EvalMode, exec: Execution) -> Result<Vec<f64>> {
        exec.try_map(xs, |&x| self.cdf(x, mode))
    }

    /// `∂t_ℓ/∂α_ℓ = φ′(u_ℓ) ∂T_ℓ/∂α_ℓ` on the CDF side; `None` when the safe-mode
    /// boundary rule makes the derivative vanish.
    fn dt_cdf_side(&self, l: usize, x: f64, u_l: f64, mode: EvalMode) -> Result<Option<f64>> {
        if u_l <= 0.0 || u_l >= 1.0 {
            return match mode {
                EvalMode::Safe => Ok(None),
                EvalMode::Raw => Err(Error::Domain(format!("φ′ is singular at u = {u_l} (x = {x})"))),
            };
        }
        let dt = self
            .transform
            .cdf_dparam(&self.baseline, self.params[l], x, mode)?;
        if dt == 0.0 {
            return Ok(None);
        }
        let pp = self.generator.phi_prime_raw(u_l)?;
        Ok(Some(pp * dt))
    }

    /// `∂F_{n−k:n}/∂α_ℓ` by direct differentiation of the inclusion–exclusion
    /// sum: `t′_ℓ Σ_j (−1)^{j−(n−k)} C(j−1, n−k−1) Σ_{|I|=j, ℓ∈I} ψ′(Σ_I t)`.
    pub fn derivative_gen(&self, x: f64, l: usize, mode: EvalMode) -> Result<f64> {
        self.component_index(l)?;
        let p = self.eval_point(x, mode);
        let Some(dt) = self.dt_cdf_side(l, x, p.u[l], mode)? else {
            return Ok(0.0);
        };
        let n = self.n();
        let m = n - self.k;
        let others: Vec<f64> = (0..n).filter(|&i| i != l).map(|i| p.t[i]).collect();
        let mut by_size = vec![KahanSum::default(); n + 1];
        let mut err = None;
        let g = &self.generator;
        let mut visit = |size: usize, sum: f64| {
            if size + 1 >= m {
                match g.psi_prime(sum) {
                    Ok(v) => by_size[size + 1].add(v),
                    Err(e) => err = Some(e),
                }
            }
        };
        subsets(&others, p.t[l], &mut visit);
        if let Some(e) = err {
            return Err(e);
        }
        let mut terms: Vec<f64> = (m..=n)
            .map(|j| {
                let c = binomial((j - 1) as u32, (m - 1) as u32) as f64;
                let sign = if (j - m).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * c * by_size[j].value()
            })
            .collect();
        Ok(dt * stable_sum(&mut terms))
    }

    /// `∂F_{n−k:n}/∂α_ℓ` in forward-difference form:
    /// `(−1)^k t′_ℓ Σ_{J ⊆ N_ℓ, |J| = n−k−1} Δ_{(t_i)_{i ∈ N_ℓ∖J}} ψ′(t_ℓ + Σ_J t)`.
    pub fn derivative_fd_form(&self, x: f64, l: usize, mode: EvalMode) -> Result<f64> {
        self.component_index(l)?;
        let p = self.eval_point(x, mode);
        let Some(dt) = self.dt_cdf_side(l, x, p.u[l], mode)? else {
            return Ok(0.0);
        };
        let n = self.n();
        let size_j = n - self.k - 1;
        let others: Vec<usize> = (0..n).filter(|&i| i != l).collect();
        let g = &self.generator;
        // ψ′ errors only at Gumbel t = 0, which requires every u = 1
        let psi_p = |s: f64| g.psi_prime(s).unwrap_or(f64::NEG_INFINITY);
        if p.t[l] == 0.0 {
            g.psi_prime(0.0)?;
        }
        let mut acc = KahanSum::default();
        for_each_combination(others.len(), size_j, &mut |chosen: &[bool]| {
            let mut base = p.t[l];
            let mut incs = Vec::with_capacity(self.k);
            for (pos, &i) in others.iter().enumerate() {
                if chosen[pos] {
                    base += p.t[i];
                } else {
                    incs.push(p.t[i]);
                }
            }
            acc.add(fd_expansion(&psi_p, base, &incs));
        });
        let sign = if self.k.is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(sign * dt * acc.value())
    }

    /// `∂F/∂α_ℓ` for the parallel closed form: `ψ′(Σt) φ′(u_ℓ) ∂T_ℓ`.
    pub fn parallel_dparam(&self, x: f64, l: usize, mode: EvalMode) -> Result<f64> {
        self.component_index(l)?;
        let p = self.eval_point(x, mode);
        let Some(dt) = self.dt_cdf_side(l, x, p.u[l], mode)? else {
            return Ok(0.0);
        };
        let s = if p.t.iter().any(|v| v.is_infinite()) {
            f64::INFINITY
        } else {
            p.t.iter().sum()
        };
        Ok(self.generator.psi_prime(s)? * dt)
    }

    /// `∂F/∂α_ℓ` for the series closed form `F = 1 − ψ(Σ φ(v_i))`, `v_i = 1 − u_i`:
    /// `ψ′(Σs) φ′(v_ℓ) ∂T_ℓ`.
    pub fn series_dparam(&self, x: f64, l: usize, mode: EvalMode) -> Result<f64> {
        self.component_index(l)?;
        let (v, s) = self.survival_point(x, mode);
        if mode == EvalMode::Safe && (v[l] <= 0.0 || v[l] >= 1.0) {
            return Ok(0.0);
        }
        let dt = self
            .transform
            .cdf_dparam(&self.baseline, self.params[l], x, mode)?;
        if dt == 0.0 {
            return Ok(0.0);
        }
        let pp = self.generator.phi_prime_raw(v[l])?;
        let total = if s.iter().any(|t| t.is_infinite()) {
            f64::INFINITY
        } else {
            s.iter().sum()
        };
        Ok(self.generator.psi_prime(total)? * pp * dt)
    }

    /// `∂F_{n−k:n}/∂α_ℓ`, consistent with [`SystemSpec::cdf`] (same dispatch).
    pub fn cdf_dparam(&self, x: f64, l: usize, mode: EvalMode) -> Result<f64> {
        match self.structure() {
            Structure::Parallel => self.parallel_dparam(x, l, mode),
            Structure::Series => self.series_dparam(x, l, mode),
            Structure::KOutOfN => self.derivative_gen(x, l, mode),
        }
    }
}

/// Calls `visit(|I|, base + Σ_I t)` for every subset `I` of `t`.
fn subsets<F: FnMut(usize, f64)>(t: &[f64], base: f64, visit: &mut F) {
    fn rec<F: FnMut(usize, f64)>(t: &[f64], i: usize, size: usize, sum: f64, visit: &mut F) {
        if i == t.len() {
            visit(size, sum);
            return;
        }
        rec(t, i + 1, size + 1, sum + t[i], visit);
        rec(t, i + 1, size, sum, visit);
    }
    rec(t, 0, 0, base, visit);
}

/// Calls `f(mask)` for every `size`-subset of `0..len`.
fn for_each_combination<F: FnMut(&[bool])>(len: usize, size: usize, f: &mut F) {
    fn rec<F: FnMut(&[bool])>(mask: &mut Vec<bool>, i: usize, left: usize, f: &mut F) {
        if i == mask.len() {
            if left == 0 {
                f(mask);
            }
            return;
        }
        if left > mask.len() - i {
            return;
        }
        if left > 0 {
            mask[i] = true;
            rec(mask, i + 1, left - 1, f);
            mask[i] = false;
        }
        rec(mask, i + 1, left, f);
    }
    let mut mask = vec![false; len];
    rec(&mut mask, 0, size, f);
}
