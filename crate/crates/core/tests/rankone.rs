mod common;

use hgsoliton::dhm::pushforward_density;
use hgsoliton::invariants::hg;
use hgsoliton::rankone::{beta_jet, beta_tilde, minimize_beta, profile_from_toric};
use hgsoliton::rational::{q, qf, to_f64_vec};
use hgsoliton::{DhMeasure, Profile, QuadConfig, Twist, Weight, Q};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg() -> QuadConfig {
    QuadConfig::default()
}

fn random_xi(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Q> {
    loop {
        let xi: Vec<Q> = (0..dim)
            .map(|_| qf(rng.gen_range(-6..=6), rng.gen_range(1..=4)))
            .collect();
        if xi.iter().any(|x| !x.is_zero()) {
            return xi;
        }
    }
}

/// Profiles with `A` strictly below the top of the support.
fn profiles(rng: &mut ChaCha8Rng) -> Vec<Profile> {
    let mut out = Vec::new();
    for p in common::corpus() {
        let dh = pushforward_density(&p, &random_xi(rng, p.dim())).unwrap();
        let (lo, hi) = dh.support();
        let a = (&lo * q(2) + &hi) / q(3) - &lo;
        out.push(Profile::new(dh.translated(&-lo), a, "sample").unwrap());
    }
    out
}

#[test]
fn toric_profiles_reproduce_h() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let corpus = common::corpus();
    for i in 0..20 {
        let p = &corpus[i % corpus.len()];
        let g = &common::weights()[i % 3];
        let xi = random_xi(&mut rng, p.dim());
        let profile = profile_from_toric(p, &xi).unwrap();
        let beta = beta_tilde(&profile, g, 1.0, &cfg()).unwrap();
        let h = hg(p, g, &Twist::new(to_f64_vec(&xi)), &cfg()).unwrap();
        assert!((beta - h).abs() <= 1e-10 * h.abs().max(1.0), "{beta} vs {h}");
    }
}

#[test]
fn beta_is_convex_in_the_rescaling() {
    let mut rng = ChaCha8Rng::seed_from_u64(62);
    for profile in profiles(&mut rng) {
        for g in common::weights() {
            for _ in 0..5 {
                let (x, y): (f64, f64) = (rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0));
                let b = |a| beta_tilde(&profile, &g, a, &cfg()).unwrap();
                let residual = (b(x) + b(y)) / 2.0 - b((x + y) / 2.0);
                assert!(residual >= -1e-10, "{residual}");
                if (x - y).abs() > 1e-3 {
                    assert!(residual > 0.0);
                }
            }
            assert!(beta_jet(&profile, &g, 1.5, &cfg()).unwrap().d2 > 0.0);
        }
    }
}

#[test]
fn beta_grows_in_the_tail_and_is_bounded_below() {
    let mut rng = ChaCha8Rng::seed_from_u64(63);
    for profile in profiles(&mut rng) {
        let big_a = hgsoliton::rational::to_f64(&profile.a);
        let sup = profile.sup_support();
        for g in common::weights() {
            let tail: Vec<f64> = [10.0, 20.0, 40.0]
                .iter()
                .map(|&a| beta_tilde(&profile, &g, a, &cfg()).unwrap())
                .collect();
            assert!(tail[0] < tail[1] && tail[1] < tail[2], "{tail:?}");
            for a in [0.0, 0.5, 2.0, 10.0, 40.0] {
                let b = beta_tilde(&profile, &g, a, &cfg()).unwrap();
                assert!(
                    b >= g.ln_value(a * (big_a - sup)),
                    "a = {a}: {b} vs {}",
                    g.ln_value(a * (big_a - sup))
                );
            }
            let min = minimize_beta(&profile, &g, &cfg()).unwrap();
            assert!(min.a_star > 0.0 && min.interior);
            assert!(min.value <= tail[0]);
        }
    }
}

#[test]
fn atoms_are_integrated_exactly() {
    let dh = DhMeasure::discrete(vec![(q(0), qf(1, 4)), (q(2), qf(3, 4))]).unwrap();
    let profile = Profile::new(dh, q(1), "two atoms").unwrap();
    let g = hgsoliton::WeightFn::exp();
    let expected = (0.25 * 1f64.exp() + 0.75 * (-1f64).exp()).ln();
    assert!((beta_tilde(&profile, &g, 1.0, &cfg()).unwrap() - expected).abs() < 1e-15);
}

#[test]
fn profiles_must_be_probability_measures() {
    let dh = DhMeasure::discrete(vec![(q(0), qf(1, 2))]);
    assert!(dh.is_err() || Profile::new(dh.unwrap(), q(0), "half").is_err());
    let point = DhMeasure::atom(q(1));
    assert!(Profile::new(point, q(-1), "negative").is_err());
}
