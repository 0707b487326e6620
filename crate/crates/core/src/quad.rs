//! Exact simplex moments of linear forms, and adaptive Gauss-Kronrod
//! integration of smooth functions against piecewise-polynomial densities.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::geom::{factorial, Simplex};
use crate::poly::{horner, Poly};
use crate::rational::{dot, from_f64, to_f64, Q};

pub const DEFAULT_MAX_DEGREE: usize = 64;
pub const DEFAULT_MAX_EVALS: usize = 1_000_000;
pub const DEFAULT_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: DEFAULT_REL_TOL,
            max_evals: DEFAULT_MAX_EVALS,
        }
    }
}

/// Piecewise-polynomial density on `[breaks[0], breaks[k]]`; `polys[i]` is
/// in powers of `t` on `[breaks[i], breaks[i+1]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePoly {
    breaks: Vec<Q>,
    polys: Vec<Poly>,
    mass: Q,
}

impl PiecewisePoly {
    pub fn new(breaks: Vec<Q>, polys: Vec<Poly>) -> Result<Self> {
        if breaks.len() < 2 || polys.len() + 1 != breaks.len() {
            return Err(Error::InvalidDensity(format!(
                "{} breakpoints for {} pieces",
                breaks.len(),
                polys.len()
            )));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidDensity("breakpoints must increase strictly".into()));
        }
        for (i, p) in polys.iter().enumerate() {
            let (lo, hi) = (&breaks[i], &breaks[i + 1]);
            let n = p.degree().unwrap_or(0) + 2;
            let width = hi - lo;
            let samples = (0..n).map(|j| {
                let c = (std::f64::consts::PI * (2 * j + 1) as f64 / (2 * n) as f64).cos();
                let s = from_f64((1.0 + c) / 2.0).expect("finite");
                lo + &width * s
            });
            for t in [lo.clone(), hi.clone()].into_iter().chain(samples) {
                if p.eval(&t).is_negative() {
                    return Err(Error::InvalidDensity(format!(
                        "density negative at t = {}",
                        crate::rational::format_rational(&t)
                    )));
                }
            }
        }
        let mass = polys
            .iter()
            .enumerate()
            .fold(Q::zero(), |acc, (i, p)| acc + p.integrate(&breaks[i], &breaks[i + 1]));
        Ok(PiecewisePoly { breaks, polys, mass })
    }

    pub fn breaks(&self) -> &[Q] {
        &self.breaks
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn mass(&self) -> &Q {
        &self.mass
    }

    pub fn support(&self) -> (&Q, &Q) {
        (&self.breaks[0], self.breaks.last().unwrap())
    }

    /// Exact value; zero outside the support, right-continuous inside.
    pub fn eval(&self, t: &Q) -> Q {
        let (lo, hi) = self.support();
        if t < lo || t > hi {
            return Q::zero();
        }
        let i = self.breaks.partition_point(|b| b <= t).clamp(1, self.polys.len()) - 1;
        self.polys[i].eval(t)
    }

    /// `∫ t^k · density(t) dt`, exact.
    pub fn moment(&self, k: usize) -> Q {
        self.polys.iter().enumerate().fold(Q::zero(), |acc, (i, p)| {
            acc + p.shifted_degree(k).integrate(&self.breaks[i], &self.breaks[i + 1])
        })
    }

    /// `∫ |t - c| · density(t) dt`, exact.
    pub fn abs_moment(&self, c: &Q) -> Q {
        let mut total = Q::zero();
        for (i, p) in self.polys.iter().enumerate() {
            let (lo, hi) = (&self.breaks[i], &self.breaks[i + 1]);
            // p(t) (t - c) on each side of c
            let lin = p.mul_linear(&-c.clone(), &Q::from_integer(1.into()));
            if hi <= c {
                total -= lin.integrate(lo, hi);
            } else if lo >= c {
                total += lin.integrate(lo, hi);
            } else {
                total -= lin.integrate(lo, c);
                total += lin.integrate(c, hi);
            }
        }
        total
    }

    pub fn scaled(&self, s: &Q) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.clone(),
            polys: self.polys.iter().map(|p| p.scaled(s)).collect(),
            mass: &self.mass * s,
        }
    }

    /// Density of `t + shift`.
    pub fn translated(&self, shift: &Q) -> PiecewisePoly {
        PiecewisePoly {
            breaks: self.breaks.iter().map(|b| b + shift).collect(),
            polys: self.polys.iter().map(|p| p.taylor_at(&-shift.clone())).collect(),
            mass: self.mass.clone(),
        }
    }

    /// Density of `a t + b` for `a > 0`: `d((t - b)/a)/a`.
    pub fn affine_image(&self, a: &Q, b: &Q) -> PiecewisePoly {
        assert!(a.is_positive());
        let inv = a.recip();
        let polys = self
            .polys
            .iter()
            .map(|p| {
                let rescaled = Poly(
                    p.0.iter()
                        .enumerate()
                        .map(|(k, c)| c * num_traits::pow(inv.clone(), k) * &inv)
                        .collect(),
                );
                rescaled.taylor_at(&-b.clone())
            })
            .collect();
        PiecewisePoly {
            breaks: self.breaks.iter().map(|x| x * a + b).collect(),
            polys,
            mass: self.mass.clone(),
        }
    }
}

/// `∫_Δ ℓ(α)^k dα` for the affine form `ℓ(α) = <linear, α> + constant`.
///
/// Uses `vol(Δ) · k! r! / (k + r)! · h_k(ℓ(v_0), …, ℓ(v_r))` with `h_k` the
/// complete homogeneous symmetric polynomial.
pub fn linear_power_moment(simplex: &Simplex, linear: &[Q], constant: &Q, k: usize) -> Result<Q> {
    linear_power_moment_with_max(simplex, linear, constant, k, DEFAULT_MAX_DEGREE)
}

pub fn linear_power_moment_with_max(
    simplex: &Simplex,
    linear: &[Q],
    constant: &Q,
    k: usize,
    max_degree: usize,
) -> Result<Q> {
    if k > max_degree {
        return Err(Error::DegreeOverflow {
            degree: k,
            max: max_degree,
        });
    }
    let r = simplex.dim();
    let values: Vec<Q> = simplex.vertices.iter().map(|v| dot(v, linear) + constant).collect();
    let h = complete_homogeneous(&values, k);
    let coef = Q::new(factorial(k) * factorial(r), factorial(k + r));
    Ok(&simplex.volume * coef * h)
}

/// `h_k(x_0, …, x_n)` by `h_k(x_0..x_j) = h_k(x_0..x_{j-1}) + x_j h_{k-1}(x_0..x_j)`.
pub fn complete_homogeneous(xs: &[Q], k: usize) -> Q {
    let mut h = vec![Q::zero(); k + 1];
    h[0] = Q::from_integer(BigInt::from(1));
    for x in xs {
        for d in 1..=k {
            let t = &h[d - 1] * x;
            h[d] += t;
        }
    }
    h.swap_remove(k)
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const NODES_PER_PANEL: usize = 15;

#[derive(Debug, Clone)]
struct Panel {
    piece: usize,
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    abs: Vec<f64>,
    mag: Vec<f64>,
}

/// Result of a vector-valued adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadOutcome {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evals: usize,
}

impl QuadOutcome {
    pub fn total_error(&self) -> f64 {
        self.errors.iter().sum()
    }
}

fn kronrod_panel<F>(piece: usize, lo: f64, hi: f64, dim: usize, f: &F, buf: &mut [f64]) -> Panel
where
    F: Fn(usize, f64, &mut [f64], &mut [f64]),
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut abs = vec![0.0; dim];
    let mut mag = vec![0.0; dim];
    let mut add = |x: f64, wk: f64, wg: f64, buf: &mut [f64]| {
        buf.iter_mut().for_each(|b| *b = 0.0);
        let (out, m) = buf.split_at_mut(dim);
        f(piece, x, out, m);
        for c in 0..dim {
            kron[c] += wk * out[c];
            gauss[c] += wg * out[c];
            abs[c] += wk * out[c].abs();
            mag[c] += wk * m[c].max(out[c].abs());
        }
    };
    add(center, WGK[7], WG[3], buf);
    for j in 0..7 {
        let dx = half * XGK[j];
        let wg = if j % 2 == 1 { WG[j / 2] } else { 0.0 };
        add(center - dx, WGK[j], wg, buf);
        add(center + dx, WGK[j], wg, buf);
    }
    let error = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * half).abs()).collect();
    Panel {
        piece,
        lo,
        hi,
        value: kron.into_iter().map(|k| k * half).collect(),
        error,
        abs: abs.into_iter().map(|a| a * half).collect(),
        mag: mag.into_iter().map(|a| a * half).collect(),
    }
}

/// Relative rounding allowance against the magnitude of the summed terms.
pub const ROUNDOFF_FLOOR: f64 = 64.0 * f64::EPSILON;

/// Globally adaptive Gauss-Kronrod integration of a vector integrand over
/// the panels `intervals`, bisecting the panel with the worst relative error
/// until each component's bound is at most `rel_tol · ∫|f_c|`.
///
/// `f(piece, t, out)` writes the integrand components at `t` of panel
/// `piece` into `out`, which is zeroed before each call.
pub fn integrate_vector<F>(intervals: &[(f64, f64)], dim: usize, cfg: &QuadConfig, f: F) -> Result<QuadOutcome>
where
    F: Fn(usize, f64, &mut [f64]),
{
    integrate_vector_with_magnitude(intervals, dim, cfg, |piece, t, out, _| f(piece, t, out))
}

/// As [`integrate_vector`], for integrands computed as sums of cancelling
/// terms. `f(piece, t, out, mag)` also writes `mag[c] = Σ |term|` for each
/// component, and the bound for `c` may instead be `ROUNDOFF_FLOOR · ∫ mag_c`,
/// the accuracy the summation itself allows.
pub fn integrate_vector_with_magnitude<F>(
    intervals: &[(f64, f64)],
    dim: usize,
    cfg: &QuadConfig,
    f: F,
) -> Result<QuadOutcome>
where
    F: Fn(usize, f64, &mut [f64], &mut [f64]),
{
    let mut buf = vec![0.0; 2 * dim];
    let initial = intervals.iter().filter(|(lo, hi)| hi > lo).count() * NODES_PER_PANEL;
    if initial > cfg.max_evals {
        return Err(Error::ToleranceNotMet {
            bound: f64::INFINITY,
            target: cfg.rel_tol,
            evals: 0,
        });
    }
    let mut panels: Vec<Panel> = intervals
        .iter()
        .enumerate()
        .filter(|(_, (lo, hi))| hi > lo)
        .map(|(i, &(lo, hi))| kronrod_panel(i, lo, hi, dim, &f, &mut buf))
        .collect();
    let mut evals = initial;
    loop {
        let mut values = vec![0.0; dim];
        let mut errors = vec![0.0; dim];
        let mut abs = vec![0.0; dim];
        let mut mag = vec![0.0; dim];
        for p in &panels {
            for c in 0..dim {
                values[c] += p.value[c];
                errors[c] += p.error[c];
                abs[c] += p.abs[c];
                mag[c] += p.mag[c];
            }
        }
        let targets: Vec<f64> = abs
            .iter()
            .zip(&mag)
            .map(|(a, m)| (cfg.rel_tol * a).max(ROUNDOFF_FLOOR * m))
            .collect();
        if errors.iter().zip(&targets).all(|(e, t)| e <= t) {
            return Ok(QuadOutcome { values, errors, evals });
        }
        let worst = |p: &Panel| {
            p.error
                .iter()
                .zip(&targets)
                .map(|(e, t)| if *t > 0.0 { e / t } else { *e })
                .fold(0.0, f64::max)
        };
        let (idx, _) = panels.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, p)| {
            let w = worst(p);
            if w > best.1 {
                (i, w)
            } else {
                best
            }
        });
        let p = panels.swap_remove(idx);
        let mid = 0.5 * (p.lo + p.hi);
        let fail = || {
            let (bound, target) = errors
                .iter()
                .zip(&targets)
                .max_by(|a, b| (a.0 - a.1).total_cmp(&(b.0 - b.1)))
                .map(|(e, t)| (*e, *t))
                .unwrap_or((0.0, 0.0));
            Error::ToleranceNotMet { bound, target, evals }
        };
        if evals + 2 * NODES_PER_PANEL > cfg.max_evals || !(mid > p.lo && mid < p.hi) {
            return Err(fail());
        }
        panels.push(kronrod_panel(p.piece, p.lo, mid, dim, &f, &mut buf));
        panels.push(kronrod_panel(p.piece, mid, p.hi, dim, &f, &mut buf));
        // keep a deterministic panel order
        panels.sort_by(|a, b| a.lo.total_cmp(&b.lo).then(a.piece.cmp(&b.piece)));
        evals += 2 * NODES_PER_PANEL;
    }
}

/// Vector form of [`integrate_against`]: `f(t, out)` fills `dim` components.
pub fn integrate_against_vec<F>(density: &PiecewisePoly, dim: usize, cfg: &QuadConfig, f: F) -> Result<QuadOutcome>
where
    F: Fn(f64, &mut [f64]),
{
    let local: Vec<(f64, Vec<f64>)> = density
        .polys
        .iter()
        .enumerate()
        .map(|(i, p)| (to_f64(&density.breaks[i]), p.local_f64(&density.breaks[i])))
        .collect();
    let intervals: Vec<(f64, f64)> = density
        .breaks
        .windows(2)
        .map(|w| (to_f64(&w[0]), to_f64(&w[1])))
        .collect();
    integrate_vector(&intervals, dim, cfg, |piece, t, out| {
        let (x0, coeffs) = &local[piece];
        let w = horner(coeffs, t - x0);
        f(t, out);
        out.iter_mut().for_each(|o| *o *= w);
    })
}

/// `(∫ f(t) density(t) dt, error bound)`.
pub fn integrate_against<F>(density: &PiecewisePoly, f: F, rel_tol: f64, cfg: &QuadConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let rel_tol = rel_tol.max(1e-14);
    let cfg = QuadConfig { rel_tol, ..*cfg };
    let out = integrate_against_vec(density, 1, &cfg, |t, out| out[0] = f(t))?;
    Ok((out.values[0], out.errors[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf, qvec};

    fn uniform() -> PiecewisePoly {
        PiecewisePoly::new(vec![q(-1), q(1)], vec![Poly::constant(qf(1, 2))]).unwrap()
    }

    fn tent() -> PiecewisePoly {
        PiecewisePoly::new(
            vec![q(-2), q(0), q(2)],
            vec![Poly(vec![qf(1, 2), qf(1, 4)]), Poly(vec![qf(1, 2), qf(-1, 4)])],
        )
        .unwrap()
    }

    #[test]
    fn simplex_moments() {
        let seg = Simplex::new(vec![qvec(&[0]), qvec(&[1])]).unwrap();
        assert_eq!(linear_power_moment(&seg, &qvec(&[1]), &q(0), 2).unwrap(), qf(1, 3));
        let tri = Simplex::new(vec![qvec(&[0, 0]), qvec(&[1, 0]), qvec(&[0, 1])]).unwrap();
        assert_eq!(linear_power_moment(&tri, &qvec(&[1, 0]), &q(0), 1).unwrap(), qf(1, 6));
        assert_eq!(
            linear_power_moment(&tri, &qvec(&[3, -7]), &q(5), 0).unwrap(),
            tri.volume
        );
        // ∫∫ x y over the triangle = 1/24 via (x + y)^2 - (x - y)^2 = 4xy
        let plus = linear_power_moment(&tri, &qvec(&[1, 1]), &q(0), 2).unwrap();
        let minus = linear_power_moment(&tri, &qvec(&[1, -1]), &q(0), 2).unwrap();
        assert_eq!((plus - minus) / q(4), qf(1, 24));
    }

    #[test]
    fn degree_overflow() {
        let seg = Simplex::new(vec![qvec(&[0]), qvec(&[1])]).unwrap();
        let err = linear_power_moment(&seg, &qvec(&[1]), &q(0), 65).unwrap_err();
        assert!(matches!(err, Error::DegreeOverflow { degree: 65, max: 64 }));
    }

    #[test]
    fn exponential_against_uniform() {
        let (v, e) = integrate_against(&uniform(), |t| (-t).exp(), 1e-13, &QuadConfig::default()).unwrap();
        let exact = (1f64.exp() - (-1f64).exp()) / 2.0;
        assert!((v - exact).abs() <= 1e-12 * exact);
        assert!(e <= 1e-12 * exact);
        let (one, _) = integrate_against(&uniform(), |_| 1.0, 1e-13, &QuadConfig::default()).unwrap();
        assert!((one - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_integrand_on_tent_vanishes() {
        let (v, e) = integrate_against(&tent(), |t| t, 1e-13, &QuadConfig::default()).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(e < 1e-13);
        assert_eq!(*tent().mass(), q(1));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let cfg = QuadConfig {
            rel_tol: 1e-14,
            max_evals: 30,
        };
        let err = integrate_against(&uniform(), |t| (40.0 * t).sin().abs(), 1e-14, &cfg).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { .. }));
        let tiny = QuadConfig {
            rel_tol: 1e-13,
            max_evals: 10,
        };
        let err = integrate_against(&uniform(), |_| 1.0, 1e-13, &tiny).unwrap_err();
        assert!(matches!(err, Error::ToleranceNotMet { evals: 0, .. }));
    }

    #[test]
    fn negative_density_rejected() {
        let bad = PiecewisePoly::new(vec![q(0), q(1)], vec![Poly(vec![q(1), q(-3)])]);
        assert!(matches!(bad, Err(Error::InvalidDensity(_))));
    }

    #[test]
    fn abs_moment_of_tent() {
        assert_eq!(tent().abs_moment(&q(0)), qf(2, 3));
        assert_eq!(tent().moment(1), q(0));
        assert_eq!(uniform().moment(2), qf(1, 3));
    }

    #[test]
    fn affine_image_moves_moments() {
        let t = tent();
        let img = t.affine_image(&q(3), &qf(1, 2));
        assert_eq!(*img.mass(), q(1));
        assert_eq!(img.moment(1), q(3) * t.moment(1) + qf(1, 2));
        let sh = t.translated(&q(2));
        assert_eq!(sh.moment(1), q(2));
    }
}
