mod common;

use hgsoliton::invariants::{
    delta_ratio, delta_toric, derivative_via_ding, geodesic_check, hg, hg_exact_density, hg_grad_hess, s_finite_level,
    s_weighted,
};
use hgsoliton::rational::{qf, to_f64_vec};
use hgsoliton::solver::minimize_hg;
use hgsoliton::weights::Derivative;
use hgsoliton::{QuadConfig, SolverOptions, Twist, Weight, Q};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn random_real(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.gen_range(-radius..radius)).collect()
}

#[test]
fn shift_does_not_change_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let p = common::blp2();
    let g = hgsoliton::WeightFn::exp();
    let xi = vec![0.3, -0.2];
    let base = hg(&p, &g, &Twist::new(xi.clone()), &cfg()).unwrap();
    for _ in 0..20 {
        let b = rng.gen_range(-50.0..50.0);
        let twist = Twist::new(xi.clone()).with_shift(b);
        assert_eq!(twist.slope(), b);
        assert_eq!(hg(&p, &g, &twist, &cfg()).unwrap(), base);
    }
}

#[test]
fn scale_acts_through_the_weight() {
    for p in common::corpus() {
        for g in common::weights() {
            for (num, den) in [(1i32, 2i32), (2, 1), (5, 3)] {
                let a = qf(num.into(), den.into());
                let af = f64::from(num) / f64::from(den);
                let xi: Vec<f64> = (0..p.dim()).map(|i| 0.2 - 0.15 * i as f64).collect();
                let lhs = hg(&p, &g, &Twist::new(xi.clone()).with_scale(af), &cfg()).unwrap();
                let rhs = hg(&p, &g.rescaled(&a).unwrap(), &Twist::new(xi), &cfg()).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "{lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn float_and_exact_pipelines_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for p in common::corpus() {
        let g = hgsoliton::WeightFn::exp();
        let xi: Vec<Q> = (0..p.dim()).map(|_| qf(rng.gen_range(-6..=6), 7)).collect();
        let (exact, _) = hg_exact_density(&p, &g, &xi, 1.0, &cfg()).unwrap();
        let float = hg(&p, &g, &Twist::new(to_f64_vec(&xi)), &cfg()).unwrap();
        assert!((exact - float).abs() <= 1e-11 * exact.abs().max(1.0));
    }
}

#[test]
fn derivatives_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for p in common::corpus() {
        for g in common::weights() {
            let xi = random_real(&mut rng, p.dim(), 0.6);
            let rep = hg_grad_hess(&p, &g, &xi, &cfg()).unwrap();
            let h = |x: &[f64]| hg(&p, &g, &Twist::new(x.to_vec()), &cfg()).unwrap();
            let grad = |x: &[f64]| hg_grad_hess(&p, &g, x, &cfg()).unwrap().gradient;
            for i in 0..p.dim() {
                let shifted = |s: f64| {
                    let mut x = xi.clone();
                    x[i] += s;
                    x
                };
                let fd = (h(&shifted(1e-5)) - h(&shifted(-1e-5))) / 2e-5;
                assert!(
                    (fd - rep.gradient[i]).abs() <= 1e-7,
                    "gradient {i}: {fd} vs {}",
                    rep.gradient[i]
                );
                let (gp, gm) = (grad(&shifted(1e-4)), grad(&shifted(-1e-4)));
                for j in 0..p.dim() {
                    let fd = (gp[j] - gm[j]) / 2e-4;
                    assert!(
                        (fd - rep.hessian[i][j]).abs() <= 1e-5,
                        "hessian {i}{j}: {fd} vs {}",
                        rep.hessian[i][j]
                    );
                }
            }
            assert!(rep.hessian_min_eig >= -1e-10);
        }
    }
}

#[test]
fn derivative_matches_ding() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for p in common::corpus() {
        for g in common::weights() {
            let xi = random_real(&mut rng, p.dim(), 0.8);
            let eta = random_real(&mut rng, p.dim(), 1.0);
            let grad = hg_grad_hess(&p, &g, &xi, &cfg()).unwrap().gradient;
            let directional: f64 = grad.iter().zip(&eta).map(|(a, b)| a * b).sum();
            let via_ding = derivative_via_ding(&p, &g, &xi, &eta, &cfg()).unwrap();
            assert!((directional - via_ding).abs() <= 1e-9, "{directional} vs {via_ding}");
        }
    }
}

#[test]
fn geodesics_are_convex() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for p in common::corpus() {
        let g = &common::weights()[1];
        let xi = random_real(&mut rng, p.dim(), 1.0);
        let eta = random_real(&mut rng, p.dim(), 1.0);
        let rep = geodesic_check(&p, g, &xi, &eta, &[0.1, 0.3, 0.7, 0.9], &cfg()).unwrap();
        assert!(rep.convex, "{:?}", rep.residuals);
        assert_eq!(rep.strict, Some(true));
    }
}

#[test]
fn finite_level_converges_at_first_order() {
    let p = common::blp2();
    let g = hgsoliton::WeightFn::exp();
    let gp = Derivative(&g);
    let (xi, eta) = ([0.3, -0.1], [1.0, 0.5]);
    let limit = s_weighted(&p, &gp, &xi, &eta, &cfg()).unwrap();
    let err = |m| (s_finite_level(&p, &gp, &xi, &eta, m).unwrap() - limit).abs();
    let (e25, e50, e100) = (err(25), err(50), err(100));
    assert!(e50 <= 0.6 * e25 && e100 <= 0.6 * e50, "{e25} {e50} {e100}");
}

#[test]
fn delta_is_a_lower_bound_and_sharp_at_the_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let opts = SolverOptions::default();
    for p in common::corpus() {
        for g in common::weights() {
            let gp = Derivative(&g);
            let xi = random_real(&mut rng, p.dim(), 0.5);
            let rep = delta_toric(&p, &gp, &xi, &cfg()).unwrap();
            for _ in 0..5 {
                let rho = random_real(&mut rng, p.dim(), 3.0);
                let r = delta_ratio(&p, &gp, &xi, &rho, &cfg()).unwrap();
                assert!(rep.value <= r + 1e-12, "{} > {r}", rep.value);
            }
            let cert = minimize_hg(&p, &g, &opts).unwrap();
            if cert.xi0.iter().any(|x| x.abs() > 1e-9) {
                let r = delta_ratio(&p, &gp, &cert.xi0, &cert.xi0, &cfg()).unwrap();
                assert!((r - 1.0).abs() <= 1e-8, "ratio at the minimizer: {r}");
            }
        }
    }
}

#[test]
fn mismatched_dimensions_are_rejected() {
    let g = hgsoliton::WeightFn::exp();
    let err = hg(&common::cube_like(), &g, &Twist::new(vec![0.0, 0.0]), &cfg()).unwrap_err();
    assert!(matches!(
        err,
        hgsoliton::Error::DimensionMismatch { expected: 3, found: 2 }
    ));
    let _ = g.label();
}
