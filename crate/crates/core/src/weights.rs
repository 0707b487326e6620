//! Admissible weights `g`: positive, strictly increasing, log-convex.
//!
//! The built-in family is finite exponential mixtures `g(x) = Σ c_i e^{a_i x}`
//! with `c_i > 0`, `a_i >= 0` and some `a_i > 0`. It is closed under
//! differentiation and admissible by construction. Other weights enter as
//! [`PluginWeight`]s and are only guarded by sampling with
//! [`check_admissible`] on a finite working interval.

use std::fmt;
use std::sync::Arc;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{format_rational, to_f64, Q};

/// A smooth weight with two derivatives.
pub trait Weight: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;

    fn ln_value(&self, x: f64) -> f64 {
        self.value(x).ln()
    }

    /// `g^(order)(x) · e^{-shift}`, computed without overflow where possible.
    fn scaled(&self, order: usize, x: f64, shift: f64) -> f64 {
        let v = match order {
            0 => self.value(x),
            1 => self.d1(x),
            2 => self.d2(x),
            _ => f64::NAN,
        };
        v * (-shift).exp()
    }

    /// Whether admissibility holds by construction rather than by sampling.
    fn structurally_admissible(&self) -> bool {
        false
    }

    fn label(&self) -> String;
}

/// `g(x) = Σ c_i exp(a_i x)`.
#[derive(Clone, PartialEq)]
pub struct WeightFn {
    terms: Vec<(Q, Q)>,
    float_terms: Vec<(f64, f64)>,
}

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WeightFn({})", self.label())
    }
}

impl WeightFn {
    /// Validated mixture from `(c_i, a_i)` pairs.
    pub fn exp_mix(terms: Vec<(Q, Q)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::NotAdmissible("no terms".into()));
        }
        if let Some((c, _)) = terms.iter().find(|(c, _)| !c.is_positive()) {
            return Err(Error::NotAdmissible(format!(
                "coefficient {} is not positive",
                format_rational(c)
            )));
        }
        if let Some((_, a)) = terms.iter().find(|(_, a)| a.is_negative()) {
            return Err(Error::NotAdmissible(format!(
                "exponent {} is negative",
                format_rational(a)
            )));
        }
        if terms.iter().all(|(_, a)| a.is_zero()) {
            return Err(Error::NotAdmissible(
                "constant weight is not strictly increasing".into(),
            ));
        }
        Ok(Self::from_terms_unchecked(terms))
    }

    fn from_terms_unchecked(terms: Vec<(Q, Q)>) -> Self {
        let float_terms = terms.iter().map(|(c, a)| (to_f64(c), to_f64(a))).collect();
        WeightFn { terms, float_terms }
    }

    /// `g = exp`.
    pub fn exp() -> Self {
        let one = Q::from_integer(1.into());
        Self::from_terms_unchecked(vec![(one.clone(), one)])
    }

    pub fn terms(&self) -> &[(Q, Q)] {
        &self.terms
    }

    /// `g'` as a mixture with terms `(c_i a_i, a_i)`; constant terms drop out.
    pub fn derivative(&self) -> Result<Self> {
        let terms: Vec<(Q, Q)> = self
            .terms
            .iter()
            .filter(|(_, a)| !a.is_zero())
            .map(|(c, a)| (c * a, a.clone()))
            .collect();
        if terms.is_empty() {
            return Err(Error::EmptyDerivative);
        }
        Ok(Self::from_terms_unchecked(terms))
    }

    /// `x ↦ g(s x)` for `s > 0`.
    pub fn rescaled(&self, s: &Q) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::NotAdmissible("rescaling factor must be positive".into()));
        }
        Ok(Self::from_terms_unchecked(
            self.terms.iter().map(|(c, a)| (c.clone(), a * s)).collect(),
        ))
    }

    /// Smallest positive exponent; `g(x) >= c e^{a x}` for its term.
    pub fn min_positive_exponent(&self) -> Option<(f64, f64)> {
        self.float_terms
            .iter()
            .filter(|(_, a)| *a > 0.0)
            .copied()
            .min_by(|x, y| x.1.total_cmp(&y.1))
    }
}

impl Weight for WeightFn {
    fn value(&self, x: f64) -> f64 {
        self.float_terms.iter().map(|(c, a)| c * (a * x).exp()).sum()
    }

    fn d1(&self, x: f64) -> f64 {
        self.float_terms.iter().map(|(c, a)| c * a * (a * x).exp()).sum()
    }

    fn d2(&self, x: f64) -> f64 {
        self.float_terms.iter().map(|(c, a)| c * a * a * (a * x).exp()).sum()
    }

    fn ln_value(&self, x: f64) -> f64 {
        let exps: Vec<f64> = self.float_terms.iter().map(|(c, a)| c.ln() + a * x).collect();
        let m = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        m + exps.iter().map(|e| (e - m).exp()).sum::<f64>().ln()
    }

    fn scaled(&self, order: usize, x: f64, shift: f64) -> f64 {
        self.float_terms
            .iter()
            .map(|(c, a)| c * a.powi(order as i32) * (a * x - shift).exp())
            .sum()
    }

    fn structurally_admissible(&self) -> bool {
        true
    }

    fn label(&self) -> String {
        self.terms
            .iter()
            .map(|(c, a)| format!("{}*exp({}x)", format_rational(c), format_rational(a)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// User-supplied weight given by closures for `g`, `g'`, `g''`.
#[derive(Clone)]
pub struct PluginWeight {
    name: String,
    g: ScalarFn,
    g1: ScalarFn,
    g2: ScalarFn,
}

impl PluginWeight {
    pub fn new(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        PluginWeight {
            name: name.into(),
            g: Arc::new(g),
            g1: Arc::new(g1),
            g2: Arc::new(g2),
        }
    }
}

impl Weight for PluginWeight {
    fn value(&self, x: f64) -> f64 {
        (self.g)(x)
    }
    fn d1(&self, x: f64) -> f64 {
        (self.g1)(x)
    }
    fn d2(&self, x: f64) -> f64 {
        (self.g2)(x)
    }
    fn label(&self) -> String {
        self.name.clone()
    }
}

/// `g'` viewed as a weight in its own right; its second derivative is unavailable.
pub struct Derivative<'a>(pub &'a dyn Weight);

impl Weight for Derivative<'_> {
    fn value(&self, x: f64) -> f64 {
        self.0.d1(x)
    }
    fn d1(&self, x: f64) -> f64 {
        self.0.d2(x)
    }
    fn d2(&self, _x: f64) -> f64 {
        f64::NAN
    }
    fn scaled(&self, order: usize, x: f64, shift: f64) -> f64 {
        self.0.scaled(order + 1, x, shift)
    }
    fn label(&self) -> String {
        format!("d/dx[{}]", self.0.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub pass: bool,
    pub interval: (f64, f64),
    pub min_value: f64,
    pub min_derivative: f64,
    /// Minimum of `(g'' g - g'^2) / g^2` over the samples.
    pub log_convexity_margin: f64,
    pub failures: Vec<String>,
}

pub const ADMISSIBILITY_SAMPLES: usize = 64;

/// Samples `g > 0`, `g' > 0` and `g'' g - g'^2 >= -1e-12 g^2` at 64 Chebyshev
/// points of `[lo, hi]` plus both endpoints.
pub fn check_admissible(g: &dyn Weight, lo: f64, hi: f64) -> AdmissibilityReport {
    let n = ADMISSIBILITY_SAMPLES;
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let points = [lo, hi]
        .into_iter()
        .chain((0..n).map(|j| mid + half * (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n) as f64).cos()));
    let mut report = AdmissibilityReport {
        pass: true,
        interval: (lo, hi),
        min_value: f64::INFINITY,
        min_derivative: f64::INFINITY,
        log_convexity_margin: f64::INFINITY,
        failures: Vec::new(),
    };
    for x in points {
        let (v, d, dd) = (g.value(x), g.d1(x), g.d2(x));
        report.min_value = report.min_value.min(v);
        report.min_derivative = report.min_derivative.min(d);
        if !(v > 0.0) {
            report.failures.push(format!("g({x}) = {v} is not positive"));
        }
        if !(d > 0.0) {
            report.failures.push(format!("g'({x}) = {d} is not positive"));
        }
        let margin = (dd * v - d * d) / (v * v);
        if v > 0.0 {
            report.log_convexity_margin = report.log_convexity_margin.min(margin);
            if !(margin >= -1e-12) {
                report
                    .failures
                    .push(format!("log-convexity fails at {x}: margin {margin}"));
            }
        }
    }
    report.pass = report.failures.is_empty();
    report
}

/// Rejects a non-structural weight that fails sampling on `[lo, hi]`.
pub fn guard(g: &dyn Weight, lo: f64, hi: f64) -> Result<()> {
    if g.structurally_admissible() {
        return Ok(());
    }
    let report = check_admissible(g, lo, hi);
    if report.pass {
        Ok(())
    } else {
        Err(Error::NotAdmissible(report.failures.join("; ")))
    }
}

/// Weight on the polytope `g₀(α) = g'(-<α, ξ₀>)`, with `base = g'`.
#[derive(Debug, Clone)]
pub struct PolytopeWeight {
    pub base: WeightFn,
    pub xi0: Vec<f64>,
}

impl PolytopeWeight {
    pub fn new(base: WeightFn, xi0: Vec<f64>) -> Self {
        PolytopeWeight { base, xi0 }
    }

    pub fn eval(&self, alpha: &[f64]) -> f64 {
        let t: f64 = alpha.iter().zip(&self.xi0).map(|(a, x)| a * x).sum();
        self.base.value(-t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn mix(terms: &[(Q, Q)]) -> Result<WeightFn> {
        WeightFn::exp_mix(terms.to_vec())
    }

    #[test]
    fn exp_is_its_own_derivative() {
        let g = mix(&[(q(1), q(1))]).unwrap();
        for x in [-2.0, 0.0, 1.5] {
            assert_eq!(g.value(x), x.exp());
            assert_eq!(g.d1(x), x.exp());
            assert_eq!(g.d2(x), x.exp());
        }
        assert_eq!(g.derivative().unwrap(), g);
    }

    #[test]
    fn termwise_derivatives() {
        let g = mix(&[(q(1), q(1)), (q(2), qf(1, 2))]).unwrap();
        assert_eq!(g.derivative().unwrap().terms(), &[(q(1), q(1)), (q(1), qf(1, 2))]);
        let h = mix(&[(q(3), q(2))]).unwrap();
        assert_eq!(h.derivative().unwrap().terms(), &[(q(6), q(2))]);
        let with_const = mix(&[(q(5), q(0)), (q(1), q(1))]).unwrap();
        assert_eq!(with_const.derivative().unwrap().terms(), &[(q(1), q(1))]);
    }

    #[test]
    fn inadmissible_mixtures() {
        assert!(matches!(mix(&[(q(1), q(0))]), Err(Error::NotAdmissible(_))));
        assert!(matches!(mix(&[(q(-1), q(1))]), Err(Error::NotAdmissible(_))));
        assert!(matches!(mix(&[(q(1), q(-1))]), Err(Error::NotAdmissible(_))));
        assert!(matches!(mix(&[]), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn sampling_guard() {
        let exp = WeightFn::exp();
        let r = check_admissible(&exp, -10.0, 10.0);
        assert!(r.pass);
        assert!(r.log_convexity_margin.abs() < 1e-12);
        let linear = PluginWeight::new("x", |x| x, |_| 1.0, |_| 0.0);
        let r = check_admissible(&linear, -1.0, 1.0);
        assert!(!r.pass);
        assert!(r.min_value < 0.0);
        assert!(guard(&linear, -1.0, 1.0).is_err());
        let two = mix(&[(q(1), q(1)), (q(1), q(2))]).unwrap();
        assert!(check_admissible(&two, -5.0, 5.0).pass);
    }

    #[test]
    fn log_domain_evaluation_avoids_overflow() {
        let g = mix(&[(q(1), q(1)), (q(2), qf(1, 2))]).unwrap();
        let x = 900.0;
        assert!(g.value(x).is_infinite());
        assert!((g.ln_value(x) - 900.0).abs() < 1e-12);
        assert!((g.scaled(1, x, g.ln_value(x)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_view_shifts_orders() {
        let g = mix(&[(q(1), q(2))]).unwrap();
        let d = Derivative(&g);
        assert_eq!(d.value(0.3), g.d1(0.3));
        assert_eq!(d.scaled(1, 0.3, 0.0), g.d2(0.3));
    }
}
