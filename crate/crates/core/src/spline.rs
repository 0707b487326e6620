//! Normalized B-splines (`M`-splines) with possibly repeated knots.
//!
//! `M(t | τ_0, …, τ_n)` is the density of `Σ λ_k τ_k` for `λ` uniform on the
//! standard `n`-simplex. It is the divided difference
//! `n [τ_0, …, τ_n] (· − t)_+^{n−1}`; coincident knots are handled by the
//! Curry-Schoenberg recurrence with the convention that spans of length zero
//! contribute nothing.

use num_traits::{One, Zero};

use crate::poly::Poly;
use crate::rational::Q;

/// Exact `M`-spline on the intervals of `grid`, which must be sorted,
/// distinct, and contain every knot. Returns one polynomial per interval.
pub fn mspline_exact(knots: &[Q], grid: &[Q]) -> Vec<Poly> {
    debug_assert!(knots.windows(2).all(|w| w[0] <= w[1]));
    let n = knots.len() - 1;
    let cells = grid.len() - 1;
    let mut level: Vec<Vec<Poly>> = (0..n)
        .map(|i| {
            let (lo, hi) = (&knots[i], &knots[i + 1]);
            if lo == hi {
                return vec![Poly::zero(); cells];
            }
            let height = (hi - lo).recip();
            (0..cells)
                .map(|g| {
                    if &grid[g] >= lo && &grid[g + 1] <= hi {
                        Poly::constant(height.clone())
                    } else {
                        Poly::zero()
                    }
                })
                .collect()
        })
        .collect();
    for k in 2..=n {
        let kq = Q::from_integer(k.into());
        let km1 = Q::from_integer((k - 1).into());
        level = (0..=n - k)
            .map(|i| {
                let (lo, hi) = (&knots[i], &knots[i + k]);
                if lo == hi {
                    return vec![Poly::zero(); cells];
                }
                let f = &kq / (&km1 * (hi - lo));
                (0..cells)
                    .map(|g| {
                        // (t - lo) M_i + (hi - t) M_{i+1}
                        let mut p = level[i][g].mul_linear(&-lo.clone(), &Q::one());
                        p += &level[i + 1][g].mul_linear(hi, &-Q::one());
                        p.scaled(&f)
                    })
                    .collect()
            })
            .collect();
    }
    level.swap_remove(0)
}

const MAX_KNOTS: usize = 16;

/// Pointwise `M`-spline value by the de Boor-Cox recurrence. `knots` sorted,
/// at least two distinct; right-continuous, zero outside `[τ_0, τ_n)`.
pub fn mspline_eval(knots: &[f64], x: f64) -> f64 {
    let n = knots.len() - 1;
    assert!(n < MAX_KNOTS, "too many knots");
    let (first, last) = (knots[0], knots[n]);
    if x < first || x >= last || last == first {
        return 0.0;
    }
    let mut b = [0.0_f64; MAX_KNOTS];
    for i in 0..n {
        b[i] = if knots[i] <= x && x < knots[i + 1] { 1.0 } else { 0.0 };
    }
    for k in 2..=n {
        for i in 0..=n - k {
            let mut v = 0.0;
            let d1 = knots[i + k - 1] - knots[i];
            if d1 > 0.0 {
                v += (x - knots[i]) / d1 * b[i];
            }
            let d2 = knots[i + k] - knots[i + 1];
            if d2 > 0.0 {
                v += (knots[i + k] - x) / d2 * b[i + 1];
            }
            b[i] = v;
        }
    }
    n as f64 / (last - first) * b[0]
}

/// Sorted distinct values.
pub fn distinct_sorted(values: impl IntoIterator<Item = Q>) -> Vec<Q> {
    let mut v: Vec<Q> = values.into_iter().collect();
    v.sort();
    v.dedup();
    v
}

pub fn is_zero_piecewise(pieces: &[Poly]) -> bool {
    pieces.iter().all(|p| p.0.iter().all(Zero::is_zero))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf, to_f64};

    fn integral(pieces: &[Poly], grid: &[Q]) -> Q {
        pieces
            .iter()
            .enumerate()
            .fold(Q::zero(), |acc, (g, p)| acc + p.integrate(&grid[g], &grid[g + 1]))
    }

    #[test]
    fn hat_function() {
        let knots = [q(-1), q(0), q(1)];
        let grid = knots.to_vec();
        let m = mspline_exact(&knots, &grid);
        // density of (λ0 * -1 + λ1 * 0 + λ2 * 1) is 1 - |t|
        assert_eq!(m[0].eval(&qf(-1, 2)), qf(1, 2));
        assert_eq!(m[1].eval(&qf(1, 4)), qf(3, 4));
        assert_eq!(integral(&m, &grid), q(1));
    }

    #[test]
    fn repeated_knots_keep_unit_mass() {
        let knots = [q(0), q(0), q(0), q(1), q(2), q(2)];
        let grid = vec![q(0), q(1), q(2)];
        let m = mspline_exact(&knots, &grid);
        assert_eq!(integral(&m, &grid), q(1));
        let kf: Vec<f64> = knots.iter().map(to_f64).collect();
        for x in [0.1, 0.5, 0.99, 1.3, 1.9] {
            let g = if x < 1.0 { 0 } else { 1 };
            let exact = to_f64(&m[g].eval(&Q::from_float(x).unwrap()));
            assert!((mspline_eval(&kf, x) - exact).abs() < 1e-13 * (1.0 + exact.abs()));
        }
    }

    #[test]
    fn fully_repeated_interior() {
        // all but one knot coincide: density n (1 - t)^(n-1) on [0, 1]
        let knots = [q(0), q(0), q(0), q(1)];
        let grid = vec![q(0), q(1)];
        let m = mspline_exact(&knots, &grid);
        assert_eq!(m[0].eval(&qf(1, 2)), qf(3, 4));
        assert!((mspline_eval(&[0.0, 0.0, 0.0, 1.0], 0.5) - 0.75).abs() < 1e-15);
    }
}
