//! Finite-dimensional 3D fluid algebras.
//!
//! A fluid algebra is a vector space with an alternating trilinear form,
//! a symmetric nondegenerate linking form and a metric. Its Euler
//! evolution `(dX/dt, Z) = {X, DX, Z}` conserves energy `(X, X)` and
//! helicity `(X, DX)`, and transports vorticity. This crate provides the
//! algebra, the dynamics built on it, integrators that respect the
//! invariants, concrete instances (rigid bodies, Lie algebras, a spectral
//! truncation on the flat torus, random algebras) and an identity checker.

pub mod algebra;
pub mod cli;
pub mod diagnostics;
pub mod dynamics;
pub mod instances;
pub mod integrators;
pub mod io;
pub mod rng;

pub use algebra::{validate, AlgebraError, FluidAlgebra, Role, StateVector, TripleEntry, TripleTensor, Vector};
