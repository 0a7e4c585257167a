use crate::error::{Error, Result};

/// A parameter vector: nonempty, finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("parameter vector is empty".into()));
        }
        if let Some(&v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::range("params", v, "finite"));
        }
        Ok(ParamVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Whether `a` majorizes `b`: equal totals, and every prefix sum of the
/// increasingly ordered `a` is at most the matching prefix sum of `b`.
/// Sums are compared with a tolerance of `1e−12` times the coordinate scale.
pub fn majorizes(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::Usage(format!(
            "cannot compare vectors of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (a, b) = (ParamVector::new(a.to_vec())?, ParamVector::new(b.to_vec())?);
    let (sa, sb) = (sorted(a.values()), sorted(b.values()));
    let scale = sa
        .iter()
        .chain(sb.iter())
        .fold(1.0f64, |m, v| m.max(v.abs()))
        * sa.len() as f64;
    let tol = 1e-12 * scale;
    let (mut pa, mut pb) = (0.0, 0.0);
    for (x, y) in sa.iter().zip(&sb) {
        pa += x;
        pb += y;
        if pa > pb + tol {
            return Ok(false);
        }
    }
    Ok((pa - pb).abs() <= tol)
}

/// Whether `a_i ≤ b_i` for every coordinate.
pub fn coordinatewise_le(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x <= y)
}
