//! Solvers for myopic equilibria: games where each action's payoff is an
//! arbitrary continuous function of the whole mixed-strategy profile.
//!
//! The crate covers the full pipeline built on that notion:
//!
//! - [`simplex`]: the nearest-point retraction onto the probability simplex
//!   and its face decomposition, the geometric engine behind every solver.
//! - [`myopic`]: payoff families, the equilibrium residual, the fixed-point
//!   map `x -> retract(w(x) + x)`, and multistart solvers for single-valued
//!   families and finitely generated correspondences.
//! - [`structure`]: the homeomorphism between a function space of payoff
//!   families and its equilibrium graph, with the accompanying homotopy.
//! - [`matrix`]: zero-sum matrix game values by linear programming, convex
//!   envelopes over the prior simplex, individual-rationality checks, a
//!   Blackwell approachability simulation, and a Nash oracle for tests.
//! - [`tree`]: truncated game trees whose endpoints carry continuation-payoff
//!   correspondences instead of terminal payoffs, and the perturbation
//!   scheme that solves the induced composite games.
//! - [`neyman`]: weighted finitely many stages followed by an undiscounted
//!   repeated game with incomplete information on one side; builds the
//!   truncated tree, constructs continuation payoffs from joint plans, and
//!   verifies the solved equilibrium.
//! - [`expr`], [`document`], [`report`], [`cli`]: the expression grammar for
//!   payoff functions, the TOML document formats, machine-readable reports,
//!   and the command-line front end.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod cli;
pub mod document;
pub mod error;
pub mod expr;
pub mod matrix;
pub mod myopic;
pub mod neyman;
pub mod profile;
pub mod report;
pub mod simplex;
pub mod structure;
pub mod tree;

pub use error::{Error, Result};
pub use myopic::{
    aggregate_payoffs, best_response_map, equilibrium_residual, solve_myopic,
    solve_myopic_correspondence, PayoffCorrespondence, PayoffFamily, SolveReport, SolverConfig,
};
pub use profile::{Layout, MixedProfile};
pub use simplex::{face_decompose, product_retract, project_simplex, SimplexPoint};
