//! Duistermaat-Heckman measures of torus twists.
//!
//! For a coweight `ξ` the DH measure of the twisted trivial filtration is the
//! image of the normalized Lebesgue measure `ν_P` under `α ↦ <α, ξ>`. On each
//! simplex of the triangulation the image is `vol(Δ) · M(t | <v_0,ξ>, …, <v_r,ξ>)`,
//! an `M`-spline in the vertex values, so the exact density is a sum of
//! B-splines with rational polynomial pieces.
//!
//! [`Pushforward`] is the floating counterpart used inside the Newton loop.
//! It also pushes forward the signed measures `α_i dν` and `α_i α_j dν`: with
//! barycentric coordinates `λ` uniform on the simplex, `λ_m dλ` is (up to
//! `1/(r+1)`) again uniform on a simplex with the vertex `m` doubled, so its
//! image is the `M`-spline with the knot `t_m` repeated. Likewise `λ_m λ_n`
//! repeats `t_m` and `t_n`, with normalization `(1 + δ_mn)/((r+1)(r+2))`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::Polytope;
use crate::poly::Poly;
use crate::quad::{integrate_vector_with_magnitude, PiecewisePoly, QuadConfig};
use crate::rational::{dot, to_f64, Q};
use crate::spline::{distinct_sorted, mspline_eval, mspline_exact};

pub const MAX_MOMENT: usize = 64;

/// Probability normalization, or Lebesgue measure on `P` with mass `vol(P)`.
/// Switching to Lebesgue shifts every `H^g` by `log vol(P)` and changes no
/// minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    #[default]
    Probability,
    Lebesgue,
}

impl Normalization {
    pub fn factor(&self, p: &Polytope) -> Q {
        match self {
            Normalization::Probability => Q::one(),
            Normalization::Lebesgue => p.volume(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DhKind {
    Continuous,
    Discrete,
    Atom,
    Mixed,
}

/// A measure on the real line: piecewise-polynomial density plus point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DhMeasure {
    density: Option<PiecewisePoly>,
    /// `(location, mass)`, sorted by location, locations distinct.
    atoms: Vec<(Q, Q)>,
}

impl DhMeasure {
    pub fn new(density: Option<PiecewisePoly>, atoms: Vec<(Q, Q)>) -> Result<Self> {
        if atoms.iter().any(|(_, m)| m.is_negative()) {
            return Err(Error::InvalidDensity("negative atom mass".into()));
        }
        let mut merged: BTreeMap<Q, Q> = BTreeMap::new();
        for (t, m) in atoms {
            *merged.entry(t).or_insert_with(Q::zero) += m;
        }
        let atoms: Vec<(Q, Q)> = merged.into_iter().filter(|(_, m)| !m.is_zero()).collect();
        if density.is_none() && atoms.is_empty() {
            return Err(Error::InvalidDensity("empty measure".into()));
        }
        Ok(DhMeasure { density, atoms })
    }

    pub fn continuous(density: PiecewisePoly) -> Self {
        DhMeasure {
            density: Some(density),
            atoms: Vec::new(),
        }
    }

    pub fn atom(t: Q) -> Self {
        DhMeasure {
            density: None,
            atoms: vec![(t, Q::one())],
        }
    }

    pub fn discrete(atoms: Vec<(Q, Q)>) -> Result<Self> {
        Self::new(None, atoms)
    }

    pub fn density(&self) -> Option<&PiecewisePoly> {
        self.density.as_ref()
    }

    pub fn atoms(&self) -> &[(Q, Q)] {
        &self.atoms
    }

    pub fn kind(&self) -> DhKind {
        match (&self.density, self.atoms.len()) {
            (Some(_), 0) => DhKind::Continuous,
            (Some(_), _) => DhKind::Mixed,
            (None, 1) => DhKind::Atom,
            (None, _) => DhKind::Discrete,
        }
    }

    pub fn total_mass(&self) -> Q {
        let atoms = self.atoms.iter().fold(Q::zero(), |acc, (_, m)| acc + m);
        match &self.density {
            Some(d) => atoms + d.mass(),
            None => atoms,
        }
    }

    pub fn is_probability(&self) -> bool {
        self.total_mass().is_one()
    }

    /// Smallest closed interval carrying the measure.
    pub fn support(&self) -> (Q, Q) {
        let mut lo: Option<Q> = None;
        let mut hi: Option<Q> = None;
        let mut push = |a: &Q, b: &Q| {
            lo = Some(lo.take().map_or(a.clone(), |l| l.min(a.clone())));
            hi = Some(hi.take().map_or(b.clone(), |h| h.max(b.clone())));
        };
        if let Some(d) = &self.density {
            let (a, b) = d.support();
            push(a, b);
        }
        for (t, _) in &self.atoms {
            push(t, t);
        }
        (lo.unwrap(), hi.unwrap())
    }

    /// `∫ t^k dν`, exact.
    pub fn moment(&self, k: usize) -> Result<Q> {
        if k > MAX_MOMENT {
            return Err(Error::DegreeOverflow {
                degree: k,
                max: MAX_MOMENT,
            });
        }
        let mut total = self.density.as_ref().map_or_else(Q::zero, |d| d.moment(k));
        for (t, m) in &self.atoms {
            total += num_traits::pow(t.clone(), k) * m;
        }
        Ok(total)
    }

    pub fn scaled(&self, s: &Q) -> DhMeasure {
        DhMeasure {
            density: self.density.as_ref().map(|d| d.scaled(s)),
            atoms: self.atoms.iter().map(|(t, m)| (t.clone(), m * s)).collect(),
        }
    }

    /// Image under `t ↦ a t + b`, `a > 0`.
    pub fn affine_image(&self, a: &Q, b: &Q) -> DhMeasure {
        DhMeasure {
            density: self.density.as_ref().map(|d| d.affine_image(a, b)),
            atoms: self.atoms.iter().map(|(t, m)| (t * a + b, m.clone())).collect(),
        }
    }

    pub fn translated(&self, shift: &Q) -> DhMeasure {
        self.affine_image(&Q::one(), shift)
    }
}

fn check_dim(p: &Polytope, xi: &[impl Sized]) -> Result<()> {
    if xi.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: xi.len(),
        });
    }
    Ok(())
}

/// Exact continuous DH measure of the twist by `ξ ≠ 0`.
pub fn pushforward_density(p: &Polytope, xi: &[Q]) -> Result<DhMeasure> {
    check_dim(p, xi)?;
    if xi.iter().all(Zero::is_zero) {
        return Err(Error::ZeroTwist);
    }
    let values: Vec<Q> = p.vertices().iter().map(|v| dot(v, xi)).collect();
    let grid = distinct_sorted(values.iter().cloned());
    let tri = p.triangulation();
    let contributions: Vec<Vec<Poly>> = tri
        .cells
        .par_iter()
        .zip(tri.simplices.par_iter())
        .map(|(cell, simplex)| {
            let mut knots: Vec<Q> = cell.iter().map(|&i| values[i].clone()).collect();
            knots.sort();
            mspline_exact(&knots, &grid)
                .into_iter()
                .map(|poly| poly.scaled(&simplex.volume))
                .collect()
        })
        .collect();
    let inv_vol = tri.volume().recip();
    let mut polys = vec![Poly::zero(); grid.len() - 1];
    for c in &contributions {
        for (acc, piece) in polys.iter_mut().zip(c) {
            *acc += piece;
        }
    }
    let polys = polys.into_iter().map(|poly| poly.scaled(&inv_vol)).collect();
    let density = PiecewisePoly::new(grid, polys)?;
    debug_assert!(density.mass().is_one());
    Ok(DhMeasure::continuous(density))
}

/// Level-`m` DH measure: mass `1/#(mP ∩ M)` at `<α, ξ>/m` for each lattice point.
pub fn discrete_dh(p: &Polytope, xi: &[Q], m: u32) -> Result<DhMeasure> {
    check_dim(p, xi)?;
    let den = xi.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let nums: Vec<BigInt> = xi
        .iter()
        .map(|x| (x * Q::from_integer(den.clone())).to_integer())
        .collect();
    let small: Option<Vec<i128>> = nums.iter().map(|n| i128::try_from(n).ok()).collect();
    let mut counts: BTreeMap<BigInt, u64> = BTreeMap::new();
    let mut total = 0u64;
    match small {
        Some(nums) => {
            let mut fast: BTreeMap<i128, u64> = BTreeMap::new();
            p.for_each_lattice_point(m, |a| {
                let s: i128 = a.iter().zip(&nums).map(|(x, n)| i128::from(*x) * n).sum();
                *fast.entry(s).or_default() += 1;
                total += 1;
            });
            counts.extend(fast.into_iter().map(|(k, v)| (BigInt::from(k), v)));
        }
        None => p.for_each_lattice_point(m, |a| {
            let s: BigInt = a.iter().zip(&nums).map(|(x, n)| n * x).sum();
            *counts.entry(s).or_default() += 1;
            total += 1;
        }),
    }
    let scale = den * m;
    let total = BigInt::from(total);
    let atoms = counts
        .into_iter()
        .map(|(s, c)| (Q::new(s, scale.clone()), Q::new(BigInt::from(c), total.clone())))
        .collect();
    DhMeasure::discrete(atoms)
}

/// `d₁` between two twists: `∫_P |<α, ξ - η>| dν_P`, exact.
pub fn d1(p: &Polytope, xi: &[Q], eta: &[Q]) -> Result<Q> {
    check_dim(p, xi)?;
    check_dim(p, eta)?;
    let diff: Vec<Q> = xi.iter().zip(eta).map(|(a, b)| a - b).collect();
    if diff.iter().all(Zero::is_zero) {
        return Ok(Q::zero());
    }
    let measure = pushforward_density(p, &diff)?;
    Ok(measure.density().expect("continuous").abs_moment(&Q::zero()))
}

/// How many derivatives of the coweight the integrals must support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Value,
    Gradient,
    Hessian,
}

#[derive(Debug, Clone)]
struct SplineCell {
    lo: f64,
    hi: f64,
    base: Vec<f64>,
    single: Vec<Vec<f64>>,
    /// `(m, n)` with `m <= n`, row-major over the upper triangle.
    double: Vec<Vec<f64>>,
    /// `coef1[m][i] = w/(r+1) · v_{m,i}`.
    coef1: Vec<Vec<f64>>,
    /// `coef2[pair][ij]`, `ij` over the upper triangle of `(i, j)`.
    coef2: Vec<Vec<f64>>,
    weight: f64,
}

#[derive(Debug, Clone)]
struct AtomCell {
    t: f64,
    weight: f64,
    mean: Vec<f64>,
    second: Vec<f64>,
}

/// Floating pushforward of `ν_P`, `α_i ν_P` and `α_i α_j ν_P` under `<·, ξ>`.
#[derive(Debug, Clone)]
pub struct Pushforward {
    dim: usize,
    cells: Vec<SplineCell>,
    atoms: Vec<AtomCell>,
    breaks: Vec<f64>,
}

/// `∫ K_0 dν`, `∫ α_i K_1 dν`, `∫ α_i α_j K_2 dν`.
#[derive(Debug, Clone)]
pub struct TiltedMoments {
    pub zeroth: f64,
    pub first: Vec<f64>,
    pub second: Vec<Vec<f64>>,
    pub error: f64,
    pub evals: usize,
}

fn upper_index(i: usize, j: usize, n: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

impl Pushforward {
    pub fn new(p: &Polytope, xi: &[f64]) -> Result<Self> {
        check_dim(p, xi)?;
        let r = p.dim();
        let verts = p.vertices_f64();
        let values: Vec<f64> = verts
            .iter()
            .map(|v| v.iter().zip(xi).map(|(a, b)| a * b).sum())
            .collect();
        let tri = p.triangulation();
        let total = to_f64(&tri.volume());
        let scale = 1.0 + values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let rf = r as f64;
        let (mut cells, mut atoms) = (Vec::new(), Vec::new());
        for (cell, simplex) in tri.cells.iter().zip(&tri.simplices) {
            let weight = to_f64(&simplex.volume) / total;
            let t: Vec<f64> = cell.iter().map(|&i| values[i]).collect();
            let v: Vec<&Vec<f64>> = cell.iter().map(|&i| &verts[i]).collect();
            let (lo, hi) = t
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            if hi - lo <= 1e-12 * scale {
                let sums: Vec<f64> = (0..r).map(|i| v.iter().map(|x| x[i]).sum()).collect();
                let mut second = vec![0.0; r * (r + 1) / 2];
                for i in 0..r {
                    for j in i..r {
                        let diag: f64 = v.iter().map(|x| x[i] * x[j]).sum();
                        second[upper_index(i, j, r)] = (sums[i] * sums[j] + diag) / ((rf + 1.0) * (rf + 2.0));
                    }
                }
                atoms.push(AtomCell {
                    t: t.iter().sum::<f64>() / (rf + 1.0),
                    weight,
                    mean: sums.iter().map(|s| s / (rf + 1.0)).collect(),
                    second,
                });
                continue;
            }
            let sorted = |extra: &[f64]| {
                let mut k: Vec<f64> = t.iter().chain(extra).copied().collect();
                k.sort_by(f64::total_cmp);
                k
            };
            let single = (0..=r).map(|m| sorted(&[t[m]])).collect();
            let mut double = Vec::new();
            let mut coef2 = Vec::new();
            let c2 = weight / ((rf + 1.0) * (rf + 2.0));
            for m in 0..=r {
                for n in m..=r {
                    double.push(sorted(&[t[m], t[n]]));
                    let mut row = vec![0.0; r * (r + 1) / 2];
                    for i in 0..r {
                        for j in i..r {
                            let c = if m == n {
                                2.0 * v[m][i] * v[m][j]
                            } else {
                                v[m][i] * v[n][j] + v[n][i] * v[m][j]
                            };
                            row[upper_index(i, j, r)] = c2 * c;
                        }
                    }
                    coef2.push(row);
                }
            }
            let coef1 = (0..=r)
                .map(|m| (0..r).map(|i| weight / (rf + 1.0) * v[m][i]).collect())
                .collect();
            cells.push(SplineCell {
                lo,
                hi,
                base: sorted(&[]),
                single,
                double,
                coef1,
                coef2,
                weight,
            });
        }
        let mut breaks: Vec<f64> = cells.iter().flat_map(|c| c.base.iter().copied()).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        Ok(Pushforward {
            dim: r,
            cells,
            atoms,
            breaks,
        })
    }

    /// Range of `<α, ξ>` over `P`.
    pub fn range(&self) -> (f64, f64) {
        let lo = self.cells.iter().map(|c| c.lo).chain(self.atoms.iter().map(|a| a.t));
        let hi = self.cells.iter().map(|c| c.hi).chain(self.atoms.iter().map(|a| a.t));
        (lo.fold(f64::INFINITY, f64::min), hi.fold(f64::NEG_INFINITY, f64::max))
    }

    /// Integrates `kernel(order, t)` against the pushforwards up to `order`.
    pub fn integrate<K>(&self, order: Order, cfg: &QuadConfig, kernel: K) -> Result<TiltedMoments>
    where
        K: Fn(usize, f64) -> f64 + Sync,
    {
        let r = self.dim;
        let n1 = if order >= Order::Gradient { r } else { 0 };
        let n2 = if order >= Order::Hessian { r * (r + 1) / 2 } else { 0 };
        let dim = 1 + n1 + n2;
        let intervals: Vec<(f64, f64)> = self.breaks.windows(2).map(|w| (w[0], w[1])).collect();
        let out = integrate_vector_with_magnitude(&intervals, dim, cfg, |_, t, out, mag| {
            let mut dens = vec![0.0; dim];
            let mut size = vec![0.0; dim];
            for c in &self.cells {
                if t < c.lo || t >= c.hi {
                    continue;
                }
                let s = c.weight * mspline_eval(&c.base, t);
                dens[0] += s;
                size[0] += s.abs();
                if n1 > 0 {
                    for (m, knots) in c.single.iter().enumerate() {
                        let s = mspline_eval(knots, t);
                        for i in 0..r {
                            dens[1 + i] += c.coef1[m][i] * s;
                            size[1 + i] += (c.coef1[m][i] * s).abs();
                        }
                    }
                }
                if n2 > 0 {
                    for (pair, knots) in c.double.iter().enumerate() {
                        let s = mspline_eval(knots, t);
                        for ij in 0..n2 {
                            dens[1 + n1 + ij] += c.coef2[pair][ij] * s;
                            size[1 + n1 + ij] += (c.coef2[pair][ij] * s).abs();
                        }
                    }
                }
            }
            let ks = [
                kernel(0, t),
                if n1 > 0 { kernel(1, t) } else { 0.0 },
                if n2 > 0 { kernel(2, t) } else { 0.0 },
            ];
            for c in 0..dim {
                let k = ks[if c == 0 {
                    0
                } else if c <= n1 {
                    1
                } else {
                    2
                }];
                out[c] = dens[c] * k;
                mag[c] = size[c] * k.abs();
            }
        })?;
        let mut values = out.values.clone();
        for a in &self.atoms {
            values[0] += a.weight * kernel(0, a.t);
            if n1 > 0 {
                let k1 = kernel(1, a.t);
                for i in 0..r {
                    values[1 + i] += a.weight * a.mean[i] * k1;
                }
            }
            if n2 > 0 {
                let k2 = kernel(2, a.t);
                for ij in 0..n2 {
                    values[1 + n1 + ij] += a.weight * a.second[ij] * k2;
                }
            }
        }
        let second = (0..if n2 > 0 { r } else { 0 })
            .map(|i| (0..r).map(|j| values[1 + n1 + upper_index(i, j, r)]).collect())
            .collect();
        Ok(TiltedMoments {
            zeroth: values[0],
            first: values[1..1 + n1].to_vec(),
            second,
            error: out.total_error(),
            evals: out.evals,
        })
    }
}
