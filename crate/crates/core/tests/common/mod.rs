#![allow(dead_code)]

use hgsoliton::rational::parse_rational;
use hgsoliton::{Polytope, WeightFn, Q};

pub fn polytope(points: &[&[&str]]) -> Polytope {
    let pts: Vec<Vec<Q>> = points
        .iter()
        .map(|p| p.iter().map(|x| parse_rational(x).unwrap()).collect())
        .collect();
    Polytope::from_points(&pts).unwrap()
}

pub fn segment() -> Polytope {
    polytope(&[&["-1"], &["1"]])
}

pub fn square() -> Polytope {
    polytope(&[&["-1", "-1"], &["1", "-1"], &["1", "1"], &["-1", "1"]])
}

pub fn blp2() -> Polytope {
    polytope(&[&["-1", "0"], &["0", "-1"], &["2", "-1"], &["-1", "2"]])
}

/// A small corpus: dimensions 1 to 3, lattice and half-integral vertices.
pub fn corpus() -> Vec<Polytope> {
    vec![
        segment(),
        polytope(&[&["-1/2"], &["3/2"]]),
        square(),
        blp2(),
        polytope(&[&["-1/2", "-1/2"], &["3/2", "-1/2"], &["-1/2", "3/2"]]),
        polytope(&[
            &["-1", "-1", "-1"],
            &["3", "-1", "-1"],
            &["-1", "3", "-1"],
            &["-1", "-1", "3"],
        ]),
        polytope(&[
            &["-1", "-1", "-1"],
            &["1", "-1", "-1"],
            &["-1", "1", "-1"],
            &["1", "1", "-1"],
            &["-1", "-1", "1"],
            &["1", "-1", "1"],
            &["-1", "1", "1"],
            &["1", "1", "0"],
            &["1", "0", "1"],
            &["0", "1", "1"],
        ]),
    ]
}

pub fn weights() -> Vec<WeightFn> {
    use hgsoliton::rational::{q, qf};
    vec![
        WeightFn::exp(),
        WeightFn::exp_mix(vec![(q(1), q(1)), (q(2), qf(1, 2))]).unwrap(),
        WeightFn::exp_mix(vec![(q(1), q(2)), (q(1), qf(1, 3))]).unwrap(),
    ]
}

pub fn cube_like() -> Polytope {
    corpus().pop().unwrap()
}
