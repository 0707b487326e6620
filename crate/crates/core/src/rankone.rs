//! `β̃^g` along the ray `{a·v : a > 0}` of one valuation.
//!
//! A profile is the DH measure of the filtration induced by `v` together with
//! its log discrepancy `A`. Rescaling `v` by `a` dilates the measure and
//! scales `A`, so `β̃(a) = log ∫ g(a (A − t)) dh(t)`, convex in `a`.
//!
//! Profiles are data. Whether conclusions drawn from them hold depends on the
//! supplied `dh` and `A`; nothing here checks that `v` is an lc place.

use num_traits::{One, Signed};

use crate::dhm::{pushforward_density, DhMeasure};
use crate::error::{Error, Result};
use crate::geom::Polytope;
use crate::quad::{integrate_against_vec, QuadConfig};
use crate::rational::{format_rational, to_f64, Q};
use crate::weights::{guard, Weight};

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub dh: DhMeasure,
    /// Log discrepancy of the valuation.
    pub a: Q,
    pub label: String,
}

impl Profile {
    pub fn new(dh: DhMeasure, a: Q, label: impl Into<String>) -> Result<Self> {
        if !dh.is_probability() {
            return Err(Error::InvalidDensity(format!(
                "profile mass is {}, expected 1",
                format_rational(&dh.total_mass())
            )));
        }
        if a.is_negative() {
            return Err(Error::InvalidDensity("negative log discrepancy".into()));
        }
        Ok(Profile {
            dh,
            a,
            label: label.into(),
        })
    }

    pub fn sup_support(&self) -> f64 {
        to_f64(&self.dh.support().1)
    }

    pub fn mean(&self) -> f64 {
        to_f64(&self.dh.moment(1).expect("first moment"))
    }
}

/// `(β̃, β̃', β̃'')` at `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaJet {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub quadrature_error: f64,
}

/// Evaluates `β̃` and its first two derivatives in `a`.
pub fn beta_jet(p: &Profile, g: &dyn Weight, a: f64, cfg: &QuadConfig) -> Result<BetaJet> {
    if !(a >= 0.0) || !a.is_finite() {
        return Err(Error::InvalidDensity(format!(
            "rescaling {a} is not a nonnegative real"
        )));
    }
    let big_a = to_f64(&p.a);
    let (lo, hi) = p.dh.support();
    let (lo, hi) = (to_f64(&lo), to_f64(&hi));
    if !g.structurally_admissible() {
        guard(g, a * (big_a - hi), a * (big_a - lo))?;
    }
    // g is increasing, so the integrand peaks at the bottom of the support.
    let shift = g.ln_value(a * (big_a - lo));
    let kernel = |t: f64, out: &mut [f64]| {
        let s = big_a - t;
        let x = a * s;
        out[0] = g.scaled(0, x, shift);
        out[1] = s * g.scaled(1, x, shift);
        out[2] = s * s * g.scaled(2, x, shift);
    };
    let mut sums = [0.0; 3];
    let mut err = 0.0;
    if let Some(d) = p.dh.density() {
        let out = integrate_against_vec(d, 3, cfg, kernel)?;
        sums.iter_mut().zip(&out.values).for_each(|(s, v)| *s += v);
        err += out.total_error();
    }
    for (t, m) in p.dh.atoms() {
        let mut buf = [0.0; 3];
        kernel(to_f64(t), &mut buf);
        let m = to_f64(m);
        sums.iter_mut().zip(buf).for_each(|(s, v)| *s += m * v);
    }
    let d1 = sums[1] / sums[0];
    // The kernel is constant at a = 0 and the profile has mass 1.
    let value = if a == 0.0 { shift } else { shift + sums[0].ln() };
    Ok(BetaJet {
        value,
        d1,
        d2: sums[2] / sums[0] - d1 * d1,
        quadrature_error: err / sums[0],
    })
}

/// `β̃^g(a) = log ∫ g(a (A − t)) dh(t)`; `a = 0` gives `log g(0)`.
pub fn beta_tilde(p: &Profile, g: &dyn Weight, a: f64, cfg: &QuadConfig) -> Result<f64> {
    Ok(beta_jet(p, g, a, cfg)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaMin {
    pub a_star: f64,
    pub value: f64,
    /// False when the infimum sits at the trivial rescale `a = 0`.
    pub interior: bool,
    pub derivative_at_zero: f64,
}

pub const A_MAX: f64 = 1e3;
const GOLDEN_STEPS: usize = 40;
const NEWTON_STEPS: usize = 50;

/// Minimizes `β̃` over `a ≥ 0`.
pub fn minimize_beta(p: &Profile, g: &dyn Weight, cfg: &QuadConfig) -> Result<BetaMin> {
    let big_a = to_f64(&p.a);
    let sup = p.sup_support();
    // A = sup still has a positive slope at 0 and so a trivial minimizer.
    if big_a > sup {
        return Err(Error::NonCoercive { a: big_a, sup });
    }
    let at0 = beta_jet(p, g, 0.0, cfg)?;
    if at0.d1 >= 0.0 {
        return Ok(BetaMin {
            a_star: 0.0,
            value: at0.value,
            interior: false,
            derivative_at_zero: at0.d1,
        });
    }
    let mut hi = 1.0;
    while beta_jet(p, g, hi, cfg)?.d1 < 0.0 {
        hi *= 2.0;
        if hi > A_MAX {
            return Err(Error::BracketNotClosed(A_MAX));
        }
    }
    let mut lo = 0.0;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (beta_tilde(p, g, x1, cfg)?, beta_tilde(p, g, x2, cfg)?);
    for _ in 0..GOLDEN_STEPS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = beta_tilde(p, g, x1, cfg)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = beta_tilde(p, g, x2, cfg)?;
        }
    }
    // Newton on β̃' = 0, falling back to bisection outside the bracket.
    let mut x = 0.5 * (lo + hi);
    let (mut blo, mut bhi) = (0.0, 2.0 * hi.max(1.0));
    for _ in 0..NEWTON_STEPS {
        let jet = beta_jet(p, g, x, cfg)?;
        if jet.d1 < 0.0 {
            blo = x;
        } else {
            bhi = x;
        }
        let newton = x - jet.d1 / jet.d2;
        if (newton - x).abs() <= 1e-15 * x.max(1.0) || jet.d1 == 0.0 {
            break;
        }
        x = if newton > blo && newton < bhi {
            newton
        } else {
            0.5 * (blo + bhi)
        };
    }
    Ok(BetaMin {
        a_star: x,
        value: beta_tilde(p, g, x, cfg)?,
        interior: true,
        derivative_at_zero: at0.d1,
    })
}

/// The profile of the toric valuation `wt_ξ`: the twist DH measure shifted by `a(ξ)`.
pub fn profile_from_toric(p: &Polytope, xi: &[Q]) -> Result<Profile> {
    let dh = pushforward_density(p, xi)?;
    let a = p.support_value(xi);
    let label = format!(
        "wt_xi, xi = ({})",
        xi.iter().map(format_rational).collect::<Vec<_>>().join(", ")
    );
    debug_assert!(dh.total_mass().is_one());
    Profile::new(dh.translated(&a), a, label)
}
