//! Generalized `H^g` invariants of toric log Fano polytopes.
//!
//! The crate evaluates the functional
//!
//! ```text
//! H^g(ξ) = log ∫_P g(-<α, ξ>) dν_P(α)
//! ```
//!
//! over coweights `ξ`, where `ν_P` is the normalized Lebesgue measure on a
//! moment polytope `P` and `g` is a positive, strictly increasing, log-convex
//! weight. Its unique minimizer `ξ₀` is the soliton candidate; the weighted
//! Ding invariant, the toric δ-invariant and the rank-one `β̃^g` profiles are
//! the certificates and diagnostics around it.
//!
//! Module map:
//!
//! * [`geom`]: exact rational polytopes, triangulations, lattice points.
//! * [`quad`]: simplex moments of linear forms and adaptive Gauss-Kronrod
//!   integration against piecewise-polynomial densities.
//! * [`weights`]: exponential-mixture weights and plugin weights.
//! * [`dhm`]: Duistermaat-Heckman pushforward measures and `d₁`.
//! * [`invariants`]: `H^g`, its derivatives, `S`, Ding, δ, geodesics.
//! * [`solver`]: certified damped Newton minimization of `H^g`.
//! * [`rankone`]: `β̃^g` along the rescaling ray of one valuation.
//! * [`io`]: JSON file schemas shared with the command line front end.

pub mod dhm;
pub mod error;
pub mod geom;
pub mod invariants;
pub mod io;
pub mod linalg;
pub mod poly;
pub mod quad;
pub mod rankone;
pub mod rational;
pub mod solver;
pub mod spline;
pub mod weights;

#[cfg(test)]
pub(crate) mod oracle;

pub use dhm::{DhMeasure, Normalization};
pub use error::{Error, Result};
pub use geom::{Facet, Polytope, Simplex, Triangulation};
pub use invariants::{InvariantReport, Twist};
pub use quad::{PiecewisePoly, QuadConfig};
pub use rankone::Profile;
pub use rational::Q;
pub use solver::{SolitonCert, SolverOptions};
pub use weights::{PluginWeight, PolytopeWeight, Weight, WeightFn};
