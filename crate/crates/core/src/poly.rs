//! Dense univariate polynomials with exact rational coefficients.

use std::ops::{AddAssign, Mul};

use num_bigint::BigInt;
use num_traits::Zero;

use crate::rational::{to_f64, Q};

/// Coefficients in ascending powers of `t`. The empty vector is zero.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly(pub Vec<Q>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        Poly(vec![c]).trimmed()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.iter().rposition(|c| !c.is_zero())
    }

    pub fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * t + c)
    }

    /// `self * (a + b t)`.
    pub fn mul_linear(&self, a: &Q, b: &Q) -> Poly {
        if self.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + 1];
        for (k, c) in self.0.iter().enumerate() {
            out[k] += c * a;
            out[k + 1] += c * b;
        }
        Poly(out).trimmed()
    }

    pub fn scaled(&self, s: &Q) -> Poly {
        Poly(self.0.iter().map(|c| c * s).collect()).trimmed()
    }

    /// Coefficients of `t^k * self(t)`.
    pub fn shifted_degree(&self, k: usize) -> Poly {
        if self.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Q::zero(); k];
        out.extend(self.0.iter().cloned());
        Poly(out)
    }

    pub fn integrate(&self, lo: &Q, hi: &Q) -> Q {
        let anti = |t: &Q| {
            self.0.iter().enumerate().rev().fold(Q::zero(), |acc, (k, c)| {
                (acc + c / Q::from_integer(BigInt::from(k + 1))) * t
            })
        };
        anti(hi) - anti(lo)
    }

    /// Coefficients of `s ↦ self(s + x0)`.
    pub fn taylor_at(&self, x0: &Q) -> Poly {
        let mut c = self.0.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n - 1).rev() {
                let t = &c[j + 1] * x0;
                c[j] += t;
            }
        }
        Poly(c)
    }

    /// Floating coefficients in the local variable `t - x0`.
    pub fn local_f64(&self, x0: &Q) -> Vec<f64> {
        self.taylor_at(x0).0.iter().map(to_f64).collect()
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        if self.0.len() < rhs.0.len() {
            self.0.resize(rhs.0.len(), Q::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&rhs.0) {
            *a += b;
        }
        let trimmed = std::mem::take(self).trimmed();
        *self = trimmed;
    }
}

impl Mul<&Q> for &Poly {
    type Output = Poly;

    fn mul(self, rhs: &Q) -> Poly {
        self.scaled(rhs)
    }
}

pub fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}
