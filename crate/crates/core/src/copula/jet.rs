//! Truncated Taylor series ("jets") for exact higher derivatives of generators.
//!
//! A jet of order `d` stores `c_i = f^{(i)}(t) / i!` for `i = 0..=d`. Arithmetic
//! propagates all coefficients, so `ψ^{(i)}(t)` is available to rounding error
//! at any order, where central differences lose every digit past order 3.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Jet {
    c: Vec<f64>,
}

impl Jet {
    /// The independent variable `t` expanded to `order`.
    pub(crate) fn variable(t: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = t;
        if order >= 1 {
            c[1] = 1.0;
        }
        Jet { c }
    }

    pub(crate) fn constant(v: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = v;
        Jet { c }
    }

    pub(crate) fn zero(order: usize) -> Self {
        Jet::constant(0.0, order)
    }

    fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub(crate) fn value(&self) -> f64 {
        self.c[0]
    }

    /// Derivatives `f^{(i)}(t)` for `i = 0..=order`.
    pub(crate) fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(i, &ci)| {
                if i > 0 {
                    fact *= i as f64;
                }
                ci * fact
            })
            .collect()
    }

    pub(crate) fn scale(mut self, s: f64) -> Self {
        for ci in &mut self.c {
            *ci *= s;
        }
        self
    }

    pub(crate) fn offset(mut self, s: f64) -> Self {
        self.c[0] += s;
        self
    }

    pub(crate) fn exp(&self) -> Self {
        let d = self.order();
        let mut b = vec![0.0; d + 1];
        b[0] = self.c[0].exp();
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..=k {
                s += j as f64 * self.c[j] * b[k - j];
            }
            b[k] = s / k as f64;
        }
        Jet { c: b }
    }

    pub(crate) fn ln(&self) -> Self {
        let d = self.order();
        let a = &self.c;
        let mut b = vec![0.0; d + 1];
        b[0] = a[0].ln();
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..k {
                s += j as f64 * b[j] * a[k - j];
            }
            b[k] = (a[k] - s / k as f64) / a[0];
        }
        Jet { c: b }
    }

    /// `self^r` for a positive base.
    pub(crate) fn powf(&self, r: f64) -> Self {
        let d = self.order();
        let a = &self.c;
        let mut b = vec![0.0; d + 1];
        b[0] = a[0].powf(r);
        for k in 1..=d {
            let mut s = 0.0;
            for j in 1..=k {
                s += ((r + 1.0) * j as f64 - k as f64) * a[j] * b[k - j];
            }
            b[k] = s / (k as f64 * a[0]);
        }
        Jet { c: b }
    }

    pub(crate) fn recip(&self) -> Self {
        Jet::constant(1.0, self.order()) / self.clone()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a += b;
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        for (a, b) in self.c.iter_mut().zip(rhs.c) {
            *a -= b;
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let d = self.order();
        let c = (0..=d)
            .map(|k| (0..=k).map(|j| self.c[j] * rhs.c[k - j]).sum())
            .collect();
        Jet { c }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        let d = self.order();
        let b = &rhs.c;
        let mut q = vec![0.0; d + 1];
        for k in 0..=d {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= b[j] * q[k - j];
            }
            q[k] = s / b[0];
        }
        Jet { c: q }
    }
}
