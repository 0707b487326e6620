//! `H^g` on torus twists and the invariants built from it.
//!
//! For a twist `a · F_{triv,ξ}(b)` the concave transform is `a<α, ξ> + b` and
//! the log canonical slope is `b`, so
//!
//! ```text
//! H^g = log ∫_P g(-a <α, ξ>) dν_P(α),
//! ```
//!
//! independent of `b`. Derivatives in `ξ` are taken under the integral with
//! `I(ξ) = ∫ g(-<α, ξ>) dν`:
//!
//! ```text
//! ∇H   = -∫ α g'  dν / I
//! ∇²H  =  ∫ α αᵀ g'' dν / I - ∇H ∇Hᵀ
//! ```
//!
//! The weighted quantities use `v^{g'} = ∫ g'(-<α, ξ>) dν`:
//!
//! ```text
//! S^{g',ξ}(η) = ∫ <α, η> g'(-<α, ξ>) dν / v^{g'},     D^{g',ξ}(η) = -S^{g',ξ}(η)
//! ```
//!
//! so `∂_η H(ξ) = (v^{g'} / v^g) · D^{g',ξ}(η)`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::Zero;

use crate::dhm::{pushforward_density, Order, Pushforward};
use crate::error::{Error, Result};
use crate::geom::Polytope;
use crate::quad::{integrate_against, QuadConfig};
use crate::rational::{dot, to_f64, Q};
use crate::weights::{guard, Derivative, PolytopeWeight, Weight};

/// The filtration `a · F_{triv,ξ}(b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Twist {
    pub xi: Vec<f64>,
    pub scale: f64,
    pub shift: f64,
}

impl Twist {
    pub fn new(xi: Vec<f64>) -> Self {
        Twist {
            xi,
            scale: 1.0,
            shift: 0.0,
        }
    }

    pub fn with_scale(mut self, a: f64) -> Self {
        self.scale = a;
        self
    }

    pub fn with_shift(mut self, b: f64) -> Self {
        self.shift = b;
        self
    }

    /// `G(α) = a <α, ξ> + b`.
    pub fn concave_transform(&self, alpha: &[f64]) -> f64 {
        self.scale * alpha.iter().zip(&self.xi).map(|(x, y)| x * y).sum::<f64>() + self.shift
    }

    /// Log canonical slope `μ = b`.
    pub fn slope(&self) -> f64 {
        self.shift
    }

    pub fn is_trivial(&self) -> bool {
        self.xi.iter().all(|x| *x == 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
    pub hessian_min_eig: f64,
    pub quadrature_error: f64,
}

fn check_dim(p: &Polytope, v: &[f64]) -> Result<()> {
    if v.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: v.len(),
        });
    }
    Ok(())
}

/// `[-λ_max - 1, A + 1]`: the arguments `-<α, ξ>` reached on `P`, padded.
pub fn working_interval(p: &Polytope, xi: &[f64]) -> (f64, f64) {
    let neg: Vec<f64> = xi.iter().map(|x| -x).collect();
    (-p.support_value_f64(&neg) - 1.0, p.support_value_f64(xi) + 1.0)
}

/// `H^g` of a twist, with the quadrature error bound on the value.
pub fn hg_with_error(p: &Polytope, g: &dyn Weight, twist: &Twist, cfg: &QuadConfig) -> Result<(f64, f64)> {
    check_dim(p, &twist.xi)?;
    if !(twist.scale > 0.0) {
        return Err(Error::Parse(format!(
            "twist scale must be positive, got {}",
            twist.scale
        )));
    }
    let a = twist.scale;
    let scaled: Vec<f64> = twist.xi.iter().map(|x| a * x).collect();
    let (lo, hi) = working_interval(p, &scaled);
    guard(g, lo, hi)?;
    if twist.is_trivial() {
        return Ok((g.ln_value(0.0), 0.0));
    }
    let pf = Pushforward::new(p, &scaled)?;
    let shift = g.ln_value(-pf.range().0);
    let m = pf.integrate(Order::Value, cfg, |_, t| g.scaled(0, -t, shift))?;
    Ok((shift + m.zeroth.ln(), m.error / m.zeroth))
}

pub fn hg(p: &Polytope, g: &dyn Weight, twist: &Twist, cfg: &QuadConfig) -> Result<f64> {
    hg_with_error(p, g, twist, cfg).map(|(v, _)| v)
}

/// `H^g` through the exact rational pushforward density and one 1-D quadrature.
pub fn hg_exact_density(p: &Polytope, g: &dyn Weight, xi: &[Q], scale: f64, cfg: &QuadConfig) -> Result<(f64, f64)> {
    if xi.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: xi.len(),
        });
    }
    if xi.iter().all(Zero::is_zero) {
        return Ok((g.ln_value(0.0), 0.0));
    }
    let xf: Vec<f64> = xi.iter().map(|x| scale * to_f64(x)).collect();
    let (lo, hi) = working_interval(p, &xf);
    guard(g, lo, hi)?;
    let dh = pushforward_density(p, xi)?;
    let density = dh.density().expect("continuous");
    let t_min = to_f64(density.support().0);
    let shift = g.ln_value(-scale * t_min);
    let (v, e) = integrate_against(density, |t| g.scaled(0, -scale * t, shift), cfg.rel_tol, cfg)?;
    Ok((shift + v.ln(), e / v))
}

fn min_eigenvalue(h: &[Vec<f64>]) -> f64 {
    let n = h.len();
    if n == 0 {
        return f64::INFINITY;
    }
    let m = DMatrix::from_fn(n, n, |i, j| h[i][j]);
    SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Value, gradient and Hessian of `ξ ↦ H^g(ξ)`.
pub fn hg_grad_hess(p: &Polytope, g: &dyn Weight, xi: &[f64], cfg: &QuadConfig) -> Result<InvariantReport> {
    check_dim(p, xi)?;
    let (lo, hi) = working_interval(p, xi);
    guard(g, lo, hi)?;
    let pf = Pushforward::new(p, xi)?;
    let shift = g.ln_value(-pf.range().0);
    let m = pf.integrate(Order::Hessian, cfg, |k, t| g.scaled(k, -t, shift))?;
    let i0 = m.zeroth;
    let gradient: Vec<f64> = m.first.iter().map(|x| -x / i0).collect();
    let r = p.dim();
    let hessian: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| m.second[i][j] / i0 - gradient[i] * gradient[j])
                .collect()
        })
        .collect();
    Ok(InvariantReport {
        value: shift + i0.ln(),
        hessian_min_eig: min_eigenvalue(&hessian),
        gradient,
        hessian,
        quadrature_error: m.error / i0,
    })
}

/// Weighted barycenter `b^{g'} = ∫ α g'(-<α,ξ>) dν / v^{g'}` and `ln v^{g'}`.
pub fn weighted_barycenter(p: &Polytope, gp: &dyn Weight, xi: &[f64], cfg: &QuadConfig) -> Result<(Vec<f64>, f64)> {
    check_dim(p, xi)?;
    let pf = Pushforward::new(p, xi)?;
    let shift = gp.ln_value(-pf.range().0);
    let m = pf.integrate(Order::Gradient, cfg, |_, t| gp.scaled(0, -t, shift))?;
    Ok((m.first.iter().map(|x| x / m.zeroth).collect(), shift + m.zeroth.ln()))
}

/// `S^{g',ξ}(η)`.
pub fn s_weighted(p: &Polytope, gp: &dyn Weight, xi: &[f64], eta: &[f64], cfg: &QuadConfig) -> Result<f64> {
    check_dim(p, eta)?;
    let (b, _) = weighted_barycenter(p, gp, xi, cfg)?;
    Ok(b.iter().zip(eta).map(|(x, y)| x * y).sum())
}

/// `D^{g',ξ}(η) = μ(F_η) - S^{g',ξ}(η)` with `μ(F_η) = 0`.
pub fn ding(p: &Polytope, gp: &dyn Weight, xi: &[f64], eta: &[f64], cfg: &QuadConfig) -> Result<f64> {
    s_weighted(p, gp, xi, eta, cfg).map(|s| -s)
}

/// `D^{g',ξ}(e_i)` for every basis direction.
pub fn ding_residuals(p: &Polytope, gp: &dyn Weight, xi: &[f64], cfg: &QuadConfig) -> Result<Vec<f64>> {
    let (b, _) = weighted_barycenter(p, gp, xi, cfg)?;
    Ok(b.into_iter().map(|x| -x).collect())
}

/// `ln v^g` where `v^g = ∫ g(-<α, ξ>) dν`; equals `H^g(ξ)`.
pub fn ln_volume_weighted(p: &Polytope, g: &dyn Weight, xi: &[f64], cfg: &QuadConfig) -> Result<f64> {
    hg(p, g, &Twist::new(xi.to_vec()), cfg)
}

/// Finite-level `S_m = Σ g'(-<α,ξ>/m) <α,η>/m / N_m` over `α ∈ mP ∩ M`.
pub fn s_finite_level(p: &Polytope, gp: &dyn Weight, xi: &[f64], eta: &[f64], m: u32) -> Result<f64> {
    check_dim(p, xi)?;
    check_dim(p, eta)?;
    let mf = f64::from(m);
    let linear = |a: &[i64], v: &[f64]| a.iter().zip(v).map(|(x, y)| *x as f64 * y).sum::<f64>() / mf;
    // max over P of -<α, ξ> bounds the argument at every lattice point.
    let shift = gp.ln_value(p.support_value_f64(xi));
    let (mut num, mut den) = (0.0, 0.0);
    p.for_each_lattice_point(m, |a| {
        let w = gp.scaled(0, -linear(a, xi), shift);
        num += w * linear(a, eta);
        den += w;
    });
    Ok(num / den)
}

/// `∫ α_i g₀(α) dν_P` for each coordinate; all vanish for a weight function.
pub fn weight_normalized(p: &Polytope, g0: &PolytopeWeight, cfg: &QuadConfig) -> Result<Vec<f64>> {
    check_dim(p, &g0.xi0)?;
    let pf = Pushforward::new(p, &g0.xi0)?;
    let m = pf.integrate(Order::Gradient, cfg, |_, t| g0.base.value(-t))?;
    Ok(m.first)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicReport {
    /// `(t, (1-t) H(ξ) + t H(η) - H((1-t) ξ + t η))`.
    pub residuals: Vec<(f64, f64)>,
    pub min_residual: f64,
    pub midpoint_residual: f64,
    pub convex: bool,
    /// Strictness at the midpoint, when `ξ ≠ η`.
    pub strict: Option<bool>,
}

pub const CONVEXITY_TOL: f64 = 1e-10;

/// Convexity of `H^g` along the linear geodesic `F_{triv,(1-t)ξ + tη}`.
pub fn geodesic_check(
    p: &Polytope,
    g: &dyn Weight,
    xi: &[f64],
    eta: &[f64],
    t_samples: &[f64],
    cfg: &QuadConfig,
) -> Result<GeodesicReport> {
    check_dim(p, xi)?;
    check_dim(p, eta)?;
    let h = |t: f64| {
        let point: Vec<f64> = xi.iter().zip(eta).map(|(a, b)| (1.0 - t) * a + t * b).collect();
        hg(p, g, &Twist::new(point), cfg)
    };
    let (h0, h1) = (h(0.0)?, h(1.0)?);
    let residual = |t: f64| -> Result<f64> { Ok((1.0 - t) * h0 + t * h1 - h(t)?) };
    let residuals = t_samples
        .iter()
        .map(|&t| residual(t).map(|r| (t, r)))
        .collect::<Result<Vec<_>>>()?;
    let midpoint_residual = residual(0.5)?;
    let min_residual = residuals.iter().map(|(_, r)| *r).fold(midpoint_residual, f64::min);
    Ok(GeodesicReport {
        residuals,
        min_residual,
        midpoint_residual,
        convex: min_residual >= -CONVEXITY_TOL,
        strict: (xi != eta).then_some(midpoint_residual > 0.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaReport {
    pub value: f64,
    /// Exact value when the weighted barycenter is exact (constant weight).
    pub exact: Option<Q>,
    pub argmin: Vec<BigInt>,
    /// `(facet normal, A / S)` in facet order.
    pub ratios: Vec<(Vec<BigInt>, f64)>,
    pub barycenter: Vec<f64>,
}

/// Toric-restricted `δ^{g',ξ}`: the minimum over facet normals `ρ_j` of
/// `c_j / (c_j + <b^{g'}, ρ_j>)`.
pub fn delta_toric(p: &Polytope, gp: &dyn Weight, xi: &[f64], cfg: &QuadConfig) -> Result<DeltaReport> {
    check_dim(p, xi)?;
    if xi.iter().all(|x| *x == 0.0) {
        return Ok(delta_toric_exact(p));
    }
    let (b, _) = weighted_barycenter(p, gp, xi, cfg)?;
    let ratios: Vec<(Vec<BigInt>, f64)> = p
        .facets()
        .iter()
        .map(|f| {
            let c = to_f64(&f.offset);
            let pairing: f64 = f
                .normal
                .iter()
                .zip(&b)
                .map(|(n, x)| to_f64(&Q::from_integer(n.clone())) * x)
                .sum();
            (f.normal.clone(), c / (c + pairing))
        })
        .collect();
    let best = ratios.iter().map(|(_, r)| *r).fold(f64::INFINITY, f64::min);
    let tie = 1e-12 * best.abs().max(1.0);
    let (argmin, value) = ratios
        .iter()
        .filter(|(_, r)| *r <= best + tie)
        .min_by(|a, b| a.0.cmp(&b.0))
        .map(|(n, _)| (n.clone(), best))
        .expect("polytope has facets");
    Ok(DeltaReport {
        value,
        exact: None,
        argmin,
        ratios,
        barycenter: b,
    })
}

/// Classical toric δ: constant weight, barycenter in exact arithmetic.
pub fn delta_toric_exact(p: &Polytope) -> DeltaReport {
    let b = p.barycenter();
    let exact: Vec<(Vec<BigInt>, Q)> = p
        .facets()
        .iter()
        .map(|f| {
            let s = &f.offset + dot(&b, &f.normal_q());
            (f.normal.clone(), &f.offset / s)
        })
        .collect();
    let best = exact.iter().map(|(_, r)| r.clone()).min().expect("polytope has facets");
    let argmin = exact
        .iter()
        .filter(|(_, r)| *r == best)
        .map(|(n, _)| n.clone())
        .min()
        .unwrap();
    DeltaReport {
        value: to_f64(&best),
        argmin,
        ratios: exact.iter().map(|(n, r)| (n.clone(), to_f64(r))).collect(),
        barycenter: b.iter().map(to_f64).collect(),
        exact: Some(best),
    }
}

/// `A(wt_ρ) / S^{g',ξ}(wt_ρ) = a(ρ) / (a(ρ) + <b^{g'}, ρ>)` for any `ρ ≠ 0`.
pub fn delta_ratio(p: &Polytope, gp: &dyn Weight, xi: &[f64], rho: &[f64], cfg: &QuadConfig) -> Result<f64> {
    check_dim(p, rho)?;
    let (b, _) = weighted_barycenter(p, gp, xi, cfg)?;
    let a = p.support_value_f64(rho);
    let pairing: f64 = b.iter().zip(rho).map(|(x, y)| x * y).sum();
    Ok(a / (a + pairing))
}

/// `H^g` gradient at `ξ` paired with `η`, expressed through the Ding invariant:
/// `(v^{g'} / v^g) · D^{g',ξ}(η)`.
pub fn derivative_via_ding(p: &Polytope, g: &dyn Weight, xi: &[f64], eta: &[f64], cfg: &QuadConfig) -> Result<f64> {
    let gp = Derivative(g);
    let (b, ln_vgp) = weighted_barycenter(p, &gp, xi, cfg)?;
    let ln_vg = ln_volume_weighted(p, g, xi, cfg)?;
    let d: f64 = -b.iter().zip(eta).map(|(x, y)| x * y).sum::<f64>();
    Ok((ln_vgp - ln_vg).exp() * d)
}

/// `v^g / v^{g'}` at `ξ`.
pub fn weight_ratio(p: &Polytope, g: &dyn Weight, xi: &[f64], cfg: &QuadConfig) -> Result<f64> {
    let gp = Derivative(g);
    let (_, ln_vgp) = weighted_barycenter(p, &gp, xi, cfg)?;
    let ln_vg = ln_volume_weighted(p, g, xi, cfg)?;
    Ok((ln_vg - ln_vgp).exp())
}
