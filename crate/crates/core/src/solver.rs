//! Certified minimization of the strictly convex `ξ ↦ H^g(ξ)`.
//!
//! `H^g` is coercive on `N_R` exactly when the origin is interior to `P`, and
//! strictly convex, so its minimizer `ξ₀` is unique. Damped Newton with Armijo
//! backtracking starts from `ξ = 0`. The certificate records the gradient
//! norm, the Hessian spectrum bound, the Ding residuals `D^{g',ξ₀}(e_i)` and
//! the toric δ at the minimizer.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geom::Polytope;
use crate::invariants::{
    delta_toric, delta_toric_exact, ding_residuals, hg, hg_grad_hess, weight_normalized, weight_ratio, DeltaReport,
    Twist,
};
use crate::quad::QuadConfig;
use crate::rational::{format_f64, format_rational};
use crate::weights::{Derivative, PolytopeWeight, Weight, WeightFn};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub quad: QuadConfig,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-10,
            max_iter: 100,
            quad: QuadConfig::default(),
        }
    }
}

const ARMIJO_SLOPE: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_BACKTRACKS: usize = 60;
const HESSIAN_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonCert {
    pub xi0: Vec<f64>,
    pub hg_value: f64,
    pub grad_norm: f64,
    pub hessian_min_eig: f64,
    /// `D^{g',ξ₀}(e_i)`.
    pub ding_residuals: Vec<f64>,
    /// `v^g / v^{g'}` at `ξ₀`; the Ding residuals are bounded by `tol` times this.
    pub weight_ratio: f64,
    pub delta_at_min: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `H^g` at every iterate, starting point first.
    pub history: Vec<f64>,
    pub quadrature_error: f64,
}

impl SolitonCert {
    /// SHA-256 over the certificate fields in their 17-digit decimal form.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |s: String| {
            h.update(s.as_bytes());
            h.update(b";");
        };
        self.xi0.iter().for_each(|x| put(format_f64(*x)));
        put(format_f64(self.hg_value));
        put(format_f64(self.grad_norm));
        put(format_f64(self.hessian_min_eig));
        self.ding_residuals.iter().for_each(|x| put(format_f64(*x)));
        put(format_f64(self.delta_at_min));
        put(self.iterations.to_string());
        put(self.converged.to_string());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// `NotCoercive` unless every facet offset is positive.
pub fn check_coercive(p: &Polytope) -> Result<()> {
    match p.facets().iter().position(|f| f.offset <= num_traits::Zero::zero()) {
        Some(j) => Err(Error::NotCoercive {
            facet: j,
            offset: format_rational(&p.facets()[j].offset),
        }),
        None => Ok(()),
    }
}

pub fn minimize_hg(p: &Polytope, g: &dyn Weight, opts: &SolverOptions) -> Result<SolitonCert> {
    minimize_hg_from(p, g, &vec![0.0; p.dim()], opts)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Damped Newton from an arbitrary starting coweight.
pub fn minimize_hg_from(p: &Polytope, g: &dyn Weight, start: &[f64], opts: &SolverOptions) -> Result<SolitonCert> {
    check_coercive(p)?;
    if start.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: start.len(),
        });
    }
    let r = p.dim();
    let cfg = &opts.quad;
    let mut x = start.to_vec();
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut report = hg_grad_hess(p, g, &x, cfg)?;
    history.push(report.value);
    let mut converged = norm(&report.gradient) <= opts.tol;
    let mut quad_err = report.quadrature_error;
    while !converged && iterations < opts.max_iter {
        let mut h = DMatrix::from_fn(r, r, |i, j| report.hessian[i][j]);
        if report.hessian_min_eig < HESSIAN_FLOOR {
            h += DMatrix::identity(r, r) * HESSIAN_FLOOR;
        }
        let grad = DVector::from_column_slice(&report.gradient);
        let Some(step) = h
            .clone()
            .cholesky()
            .map(|c| c.solve(&-&grad))
            .or_else(|| h.lu().solve(&-&grad))
        else {
            break;
        };
        let slope = grad.dot(&step);
        let trial = |s: f64| -> Vec<f64> { x.iter().zip(step.iter()).map(|(a, d)| a + s * d).collect() };
        // Below this predicted decrease H^g cannot resolve the Armijo test;
        // the full Newton step is taken.
        let resolvable = -slope > 1e-12 * report.value.abs().max(1.0);
        let mut s = 1.0;
        let mut accepted = None;
        if resolvable {
            for _ in 0..MAX_BACKTRACKS {
                let cand = trial(s);
                let v = hg(p, g, &Twist::new(cand.clone()), cfg)?;
                if v <= report.value + ARMIJO_SLOPE * s * slope {
                    accepted = Some(cand);
                    break;
                }
                s *= BACKTRACK;
            }
        } else {
            accepted = Some(trial(1.0));
        }
        let Some(next) = accepted else {
            break;
        };
        x = next;
        iterations += 1;
        report = hg_grad_hess(p, g, &x, cfg)?;
        history.push(report.value);
        quad_err = quad_err.max(report.quadrature_error);
        converged = norm(&report.gradient) <= opts.tol;
    }
    let gp = Derivative(g);
    let ding = ding_residuals(p, &gp, &x, cfg)?;
    let delta = delta_toric(p, &gp, &x, cfg)?;
    let cert = SolitonCert {
        hg_value: report.value,
        grad_norm: norm(&report.gradient),
        hessian_min_eig: report.hessian_min_eig,
        ding_residuals: ding,
        weight_ratio: weight_ratio(p, g, &x, cfg)?,
        delta_at_min: delta.value,
        iterations,
        converged: converged && report.hessian_min_eig > 0.0,
        history,
        quadrature_error: quad_err,
        xi0: x,
    };
    if cert.converged {
        Ok(cert)
    } else {
        Err(Error::NoConvergence(Box::new(cert)))
    }
}

#[derive(Debug, Clone)]
pub struct PolystableReport {
    pub cert: SolitonCert,
    /// `∫ α_i g'(-<α, ξ₀>) dν_P`.
    pub weight_residuals: Vec<f64>,
    pub delta_at_min: DeltaReport,
    /// Constant-weight δ at `ξ = 0`, exact.
    pub classical_delta: DeltaReport,
    pub passed: bool,
    pub verdict: String,
}

pub const CERTIFICATE_TOL: f64 = 1e-9;

/// Minimizes `H^g` and checks that `g₀ = g'(-<·, ξ₀>)` is a weight function.
pub fn polystable_report(p: &Polytope, g: &WeightFn, opts: &SolverOptions) -> Result<PolystableReport> {
    let cert = minimize_hg(p, g, opts)?;
    let gp = g.derivative()?;
    let g0 = PolytopeWeight::new(gp.clone(), cert.xi0.clone());
    let weight_residuals = weight_normalized(p, &g0, &opts.quad)?;
    let delta_at_min = delta_toric(p, &gp, &cert.xi0, &opts.quad)?;
    let classical_delta = delta_toric_exact(p);
    let passed = cert.converged
        && weight_residuals.iter().all(|r| r.abs() <= CERTIFICATE_TOL)
        && cert.ding_residuals.iter().all(|r| r.abs() <= CERTIFICATE_TOL);
    let verdict = if passed {
        "g'-weighted K-polystable toric data".to_string()
    } else {
        "not certified".to_string()
    };
    Ok(PolystableReport {
        cert,
        weight_residuals,
        delta_at_min,
        classical_delta,
        passed,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub id: String,
    pub weight: String,
    pub xi0: Option<Vec<f64>>,
    pub hg_value: Option<f64>,
    pub digest: Option<String>,
    pub error: Option<String>,
}

/// One solve per weight, in input order; failures are recorded per row.
pub fn weight_sweep(p: &Polytope, family: &[(String, WeightFn)], opts: &SolverOptions) -> Vec<SweepRow> {
    family
        .par_iter()
        .map(|(id, g)| match minimize_hg(p, g, opts) {
            Ok(cert) => SweepRow {
                id: id.clone(),
                weight: g.label(),
                digest: Some(cert.digest()),
                hg_value: Some(cert.hg_value),
                xi0: Some(cert.xi0),
                error: None,
            },
            Err(e) => SweepRow {
                id: id.clone(),
                weight: g.label(),
                xi0: None,
                hg_value: None,
                digest: None,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn square() -> Polytope {
        Polytope::from_i64(&[&[-1, -1], &[1, -1], &[1, 1], &[-1, 1]]).unwrap()
    }

    fn blp2() -> Polytope {
        Polytope::from_i64(&[&[-1, 0], &[0, -1], &[2, -1], &[-1, 2]]).unwrap()
    }

    /// Root of `tanh c = (2c² + 2c)/(c² + 2c + 2)` by bisection.
    fn soliton_constant() -> f64 {
        let f = |c: f64| c.tanh() - (2.0 * c * c + 2.0 * c) / (c * c + 2.0 * c + 2.0);
        let (mut lo, mut hi) = (0.1, 2.0);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn symmetric_polytope_minimizer_is_origin() {
        let cert = minimize_hg(&square(), &WeightFn::exp(), &SolverOptions::default()).unwrap();
        assert_eq!(cert.xi0, vec![0.0, 0.0]);
        assert!(cert.grad_norm <= 1e-12);
        assert_eq!(cert.iterations, 0);
    }

    #[test]
    fn blowup_soliton() {
        let c = soliton_constant();
        assert!((c - 0.527_62).abs() < 1e-5);
        let cert = minimize_hg(&blp2(), &WeightFn::exp(), &SolverOptions::default()).unwrap();
        assert!(
            (cert.xi0[0] - c).abs() < 1e-8 && (cert.xi0[1] - c).abs() < 1e-8,
            "{:?}",
            cert.xi0
        );
        assert!(cert.iterations <= 20);
        assert!(cert.ding_residuals.iter().all(|d| d.abs() < 1e-9));
        assert!((cert.delta_at_min - 1.0).abs() < 1e-8);
        assert!(cert.history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn shifted_polytope_is_not_coercive() {
        let p = Polytope::from_i64(&[&[1, 1], &[3, 1], &[1, 3]]).unwrap();
        assert!(matches!(
            minimize_hg(&p, &WeightFn::exp(), &SolverOptions::default()),
            Err(Error::NotCoercive { .. })
        ));
    }

    #[test]
    fn iteration_cap_returns_certificate() {
        let opts = SolverOptions {
            max_iter: 1,
            tol: 1e-14,
            ..SolverOptions::default()
        };
        match minimize_hg(&blp2(), &WeightFn::exp(), &opts) {
            Err(Error::NoConvergence(cert)) => {
                assert!(!cert.converged);
                assert_eq!(cert.iterations, 1);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn polystability_report_on_blowup() {
        let rep = polystable_report(&blp2(), &WeightFn::exp(), &SolverOptions::default()).unwrap();
        assert!(rep.passed, "{rep:?}");
        assert_eq!(rep.classical_delta.exact, Some(qf(6, 7)));
        assert!((rep.delta_at_min.value - 1.0).abs() < 1e-8);
    }

    #[test]
    fn sweep_keeps_input_order() {
        let fam = vec![
            ("exp".to_string(), WeightFn::exp()),
            (
                "mix".to_string(),
                WeightFn::exp_mix(vec![(q(1), q(1)), (q(1), qf(1, 2))]).unwrap(),
            ),
        ];
        let rows = weight_sweep(&blp2(), &fam, &SolverOptions::default());
        assert_eq!(rows[0].id, "exp");
        assert_eq!(rows[1].id, "mix");
        let a = rows[0].xi0.as_ref().unwrap();
        let b = rows[1].xi0.as_ref().unwrap();
        assert!((a[0] - a[1]).abs() < 1e-10 && (b[0] - b[1]).abs() < 1e-10);
        assert!((a[0] - b[0]).abs() > 1e-3);
    }
}
