//! Seeded Monte Carlo oracle.
//!
//! Rows are drawn with the frailty construction `U_i = ψ(E_i / W)`. Every row
//! owns its own ChaCha stream (`seed`, stream = row index), so a batch does
//! not depend on how rows are scheduled across threads.

mod frailty;

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::copula::GeneratorSpec;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::numeric::bisect_increasing;
use crate::system::{Structure, SystemSpec};
use crate::EvalMode;

use frailty::Frailty;

/// Upper bound on `count × n` for a single batch.
pub const MAX_DRAWS: usize = 200_000_000;

fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

fn check_size(n: usize, count: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::range("n", 0.0, ">= 1"));
    }
    if count == 0 {
        return Err(Error::range("samples", 0.0, ">= 1"));
    }
    if n.saturating_mul(count) > MAX_DRAWS {
        return Err(Error::Resource(format!("{count} × {n} draws exceeds {MAX_DRAWS}")));
    }
    Ok(())
}

fn copula_row(gen: &GeneratorSpec, frailty: &Frailty, n: usize, seed: u64, row: usize) -> Vec<f64> {
    let mut rng = row_rng(seed, row);
    let w = frailty.sample(&mut rng);
    (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(&mut rng);
            gen.psi(e / w)
        })
        .collect()
}

/// `count` rows of an `n`-dimensional sample from the copula of `gen`.
pub fn sample_copula(gen: &GeneratorSpec, n: usize, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    sample_copula_with(gen, n, count, seed, Execution::default())
}

pub fn sample_copula_with(
    gen: &GeneratorSpec,
    n: usize,
    count: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Vec<f64>>> {
    check_size(n, count)?;
    let frailty = Frailty::for_generator(gen)?;
    Ok(exec.map_range(count, |row| copula_row(gen, &frailty, n, seed, row)))
}

/// Component lifetimes and system lifetimes for one seeded run.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    /// Row-major `count × n` component lifetimes.
    pub lifetimes: Vec<f64>,
    /// Per-row `(n − k)`-th smallest lifetime.
    pub order_stats: Vec<f64>,
}

impl SampleBatch {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.lifetimes[i * self.n..(i + 1) * self.n]
    }

    /// Fraction of system lifetimes `≤ x`.
    pub fn empirical_cdf(&self, x: f64) -> f64 {
        let hits = self.order_stats.iter().filter(|&&v| v <= x).count();
        hits as f64 / self.count as f64
    }

    /// Writes the batch as CSV with header `row,x1,...,xn,order_stat`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["row".to_string()];
        header.extend((1..=self.n).map(|i| format!("x{i}")));
        header.push("order_stat".into());
        w.write_record(&header)?;
        for i in 0..self.count {
            let mut rec = vec![i.to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            rec.push(self.order_stats[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `count` systems described by `spec`.
pub fn sample_system(spec: &SystemSpec, count: usize, seed: u64) -> Result<SampleBatch> {
    sample_system_with(spec, count, seed, Execution::default())
}

pub fn sample_system_with(spec: &SystemSpec, count: usize, seed: u64, exec: Execution) -> Result<SampleBatch> {
    let n = spec.n();
    check_size(n, count)?;
    let gen = spec.generator();
    let frailty = Frailty::for_generator(gen)?;
    let survival = spec.structure() == Structure::Series;
    let (t, b, params) = (spec.transform(), spec.baseline(), spec.params());
    let rank = n - spec.k() - 1;
    let rows = exec.map_range(count, |row| {
        let v = copula_row(gen, &frailty, n, seed, row);
        let xs: Vec<f64> = v
            .iter()
            .zip(params)
            .map(|(&v, &p)| {
                let u = if survival { 1.0 - v } else { v };
                t.quantile(b, p, u)
            })
            .collect();
        let mut sorted = xs.clone();
        sorted.sort_by(f64::total_cmp);
        (xs, sorted[rank])
    });
    let mut lifetimes = Vec::with_capacity(count * n);
    let mut order_stats = Vec::with_capacity(count);
    for (xs, o) in rows {
        lifetimes.extend(xs);
        order_stats.push(o);
    }
    Ok(SampleBatch {
        seed,
        count,
        n,
        lifetimes,
        order_stats,
    })
}

/// Probability levels `0.05, 0.10, …, 0.95`.
pub fn default_probe_levels() -> Vec<f64> {
    (1..=19).map(|i| i as f64 * 0.05).collect()
}

/// `x` with `F(x) = p` for the exact system CDF.
pub fn system_quantile(spec: &SystemSpec, p: f64, mode: EvalMode) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::range("probability", p, "in (0, 1)"));
    }
    let (lo, sup) = spec.baseline().support();
    let mut hi = if sup.is_finite() { sup } else { lo.max(0.0) + 1.0 };
    while spec.cdf(hi, mode)? < p {
        if sup.is_finite() || hi > 1e300 {
            return Err(Error::Domain(format!("no quantile found for p = {p}")));
        }
        hi *= 2.0;
    }
    let f = |x: f64| spec.cdf(x, mode).unwrap_or(f64::NAN);
    Ok(bisect_increasing(f, p, lo, hi, 1e-12))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResult {
    pub level: f64,
    pub x: f64,
    pub closed_form: f64,
    pub empirical: f64,
    /// `|F̂ − F| / √(F(1 − F)/N)`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub seed: u64,
    pub z: f64,
    pub max_deviation: f64,
    pub passed: bool,
    pub probes: Vec<ProbeResult>,
}

/// Compares the empirical CDF of `batch` with `cdf` at the `(level, x)` probes.
pub fn validate_against<F>(batch: &SampleBatch, probes: &[(f64, f64)], cdf: F, z: f64) -> Result<ValidationReport>
where
    F: Fn(f64) -> Result<f64>,
{
    let nf = batch.count as f64;
    let mut results = Vec::with_capacity(probes.len());
    let mut max_dev = 0.0f64;
    for &(level, x) in probes {
        let f = cdf(x)?;
        let emp = batch.empirical_cdf(x);
        let sd = (f * (1.0 - f) / nf).sqrt();
        let deviation = if sd > 0.0 {
            (emp - f).abs() / sd
        } else if emp == f {
            0.0
        } else {
            f64::INFINITY
        };
        max_dev = max_dev.max(deviation);
        results.push(ProbeResult {
            level,
            x,
            closed_form: f,
            empirical: emp,
            deviation,
        });
    }
    Ok(ValidationReport {
        samples: batch.count,
        seed: batch.seed,
        z,
        max_deviation: max_dev,
        passed: max_dev <= z,
        probes: results,
    })
}

/// Samples `spec` and checks the empirical CDF against the closed form at
/// the exact-CDF quantiles `levels`.
pub fn validate_closed_form(
    spec: &SystemSpec,
    count: usize,
    seed: u64,
    levels: &[f64],
    z: f64,
) -> Result<ValidationReport> {
    if z.is_nan() || z <= 0.0 {
        return Err(Error::range("z", z, "> 0"));
    }
    let mode = EvalMode::Safe;
    let probes = levels
        .iter()
        .map(|&p| Ok((p, system_quantile(spec, p, mode)?)))
        .collect::<Result<Vec<_>>>()?;
    let batch = sample_system(spec, count, seed)?;
    validate_against(&batch, &probes, |x| spec.cdf(x, mode), z)
}

/// Kolmogorov–Smirnov distance between `sample` and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}
