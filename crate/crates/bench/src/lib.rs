//! Fixtures shared by the benchmarks: one polytope per dimension and the
//! weights they are timed against.

use hgsoliton::rational::{parse_rational, q, qf};
use hgsoliton::{Polytope, WeightFn, Q};

fn polytope(points: &[&[&str]]) -> Polytope {
    let pts: Vec<Vec<Q>> = points
        .iter()
        .map(|p| p.iter().map(|x| parse_rational(x).expect("fixture")).collect())
        .collect();
    Polytope::from_points(&pts).expect("fixture polytope")
}

/// `(name, polytope, generic coweight)` in increasing dimension.
pub fn fixtures() -> Vec<(&'static str, Polytope, Vec<Q>)> {
    vec![
        ("segment", polytope(&[&["-1"], &["1"]]), vec![qf(1, 3)]),
        (
            "blowup",
            polytope(&[&["-1", "0"], &["0", "-1"], &["2", "-1"], &["-1", "2"]]),
            vec![qf(1, 2), qf(-1, 5)],
        ),
        (
            "hexagon",
            polytope(&[
                &["1", "0"],
                &["1", "1"],
                &["0", "1"],
                &["-1", "0"],
                &["-1", "-1"],
                &["0", "-1"],
            ]),
            vec![qf(2, 7), qf(1, 3)],
        ),
        (
            "simplex3",
            polytope(&[
                &["-1", "-1", "-1"],
                &["3", "-1", "-1"],
                &["-1", "3", "-1"],
                &["-1", "-1", "3"],
            ]),
            vec![qf(1, 4), qf(-1, 3), qf(1, 5)],
        ),
        (
            "cut-cube",
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
            vec![qf(1, 3), qf(1, 5), qf(-1, 7)],
        ),
    ]
}

pub fn weights() -> Vec<(&'static str, WeightFn)> {
    vec![
        ("exp", WeightFn::exp()),
        (
            "mix",
            WeightFn::exp_mix(vec![(q(1), q(1)), (q(2), qf(1, 2))]).expect("admissible mixture"),
        ),
    ]
}
