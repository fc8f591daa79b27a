//! Constrained convex minimization by structured projections.
//!
//! The feasible region `C = C_1 ∩ … ∩ C_m` of a constrained problem is often
//! hard to project onto directly while the individual sets `C_i` are easy.
//! This crate replaces the single projection onto `C` with *string-averaged*
//! projections onto the `C_i`: each iteration applies sequences ("strings") of
//! individual projections in parallelizable groups and convex-combines their
//! end points. Strings and weights may change from one iteration to the next.
//!
//! Two iterative engines are provided:
//!
//! * [`dsap::dsap_run`] — dynamic string-averaging projections for pure
//!   feasibility seeking, with optional norm-controlled perturbations for
//!   studying resilience to computational errors.
//! * [`sapsm::sapsm_run`] — a projected subgradient method that interlaces a
//!   normalized subgradient descent step with one string-averaging sweep,
//!   minimizing a convex objective over `C`.
//!
//! Reference computations (a Dykstra projector onto the full intersection,
//! a classical projected subgradient baseline, and a brute-force small-instance
//! minimizer) live in [`oracle`]. Declarative problem files, trace emission and
//! seeded reproducibility are handled by [`config`] and [`trace`].

pub mod config;
pub mod dsap;
mod error;
mod lp;
pub mod objective;
pub mod oracle;
pub mod rng;
pub mod sapsm;
pub mod sets;
pub mod strings;
pub mod trace;
pub mod vector;

pub use error::Error;
pub use vector::Vector;
