//! Independent exact routes used only by unit tests.

use num_traits::Zero;

use crate::geom::Polytope;
use crate::quad::linear_power_moment;
use crate::rational::{q, Q};

/// `∫_P α_i α_j dα / vol(P)` from simplex moments of linear forms, using
/// `4 α_i α_j = (α_i + α_j)^2 - (α_i - α_j)^2`.
pub fn coordinate_second_moment(p: &Polytope, i: usize, j: usize) -> Q {
    let r = p.dim();
    let mut plus = vec![Q::zero(); r];
    let mut minus = vec![Q::zero(); r];
    plus[i] += q(1);
    plus[j] += q(1);
    minus[i] += q(1);
    minus[j] -= q(1);
    let tri = p.triangulation();
    let total = tri.simplices.iter().fold(Q::zero(), |acc, s| {
        acc + linear_power_moment(s, &plus, &Q::zero(), 2).unwrap()
            - linear_power_moment(s, &minus, &Q::zero(), 2).unwrap()
    });
    total / q(4) / tri.volume()
}

/// `∫_P α_i dα / vol(P)` from first moments of the coordinate forms.
pub fn coordinate_mean(p: &Polytope, i: usize) -> Q {
    let mut e = vec![Q::zero(); p.dim()];
    e[i] = q(1);
    let tri = p.triangulation();
    tri.simplices.iter().fold(Q::zero(), |acc, s| {
        acc + linear_power_moment(s, &e, &Q::zero(), 1).unwrap()
    }) / tri.volume()
}
