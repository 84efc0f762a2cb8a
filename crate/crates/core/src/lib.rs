//! Simulation and estimation toolkit for non-uniformly expanding
//! dynamical systems.
//!
//! The crate provides, on top of a small family of built-in interval,
//! circle, cylinder and torus maps:
//!
//! - orbit diagnostics: Birkhoff averages, the expansion statistic
//!   `log ||Df^{-1}||`, truncated-distance recurrence, hyperbolic-time
//!   detection, Lyapunov spectra, Jacobian cocycles and dynamical-ball
//!   volumes ([`diagnostics`], [`balls`]);
//! - empirical physical measures, basin counting and local-entropy
//!   estimation ([`measures`]);
//! - Monte-Carlo estimation of deviation-set, tail-set and
//!   escape-survivor volumes with exponential-rate fits and exact
//!   combinatorial oracles ([`deviations`]);
//! - exact variational rate bounds `sup { h - integral of J }` for
//!   finite Markov models via pressure and Legendre duality
//!   ([`variational`]);
//! - cone-field tracking and centre-unstable diagnostics for the torus
//!   diffeomorphisms ([`ph`]).
//!
//! Every Monte-Carlo driver draws per-start randomness from
//! counter-based streams ([`rng`]) and shards work over threads without
//! changing any output bit ([`parallel`]).

pub mod arcs;
pub mod balls;
pub mod deviations;
pub mod diagnostics;
pub mod error;
pub mod geom;
pub mod measures;
pub mod observable;
pub mod parallel;
pub mod ph;
pub mod rng;
pub mod stats;
pub mod systems;
pub mod variational;

pub use error::{Error, Result};
pub use geom::{Deriv, DomainSpec, Mat2, Point, RegionSpec, Vec2};
pub use observable::Observable;
pub use systems::{build_system, DynamicalSystem, FamilyId, Orbit, Params};
