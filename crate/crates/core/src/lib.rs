//! Galerkin boundary elements for the Laplace hypersingular equation on
//! multiscreens: non-manifold triangulated surfaces (3D) and segment
//! graphs (2D), with a two-level substructuring preconditioner.
//!
//! The pipeline is
//! [`mesh`] → [`multiscreen::inflate`] → [`assembly::assemble_w`] →
//! [`precond::SchwarzPreconditioner`] → [`solver::pcg`] →
//! [`potential::eval_dl`].

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod jump;
pub mod linalg;
pub mod mesh;
pub mod multiscreen;
pub mod oracle_volume;
pub mod plot;
pub mod potential;
pub mod precond;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
