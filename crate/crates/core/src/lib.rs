//! Spectral-Galerkin simulation and property verification for the
//! non-autonomous nonlocal pseudo-parabolic equation
//! `u_t − ε(t)Δu_t − a(l(u))Δu = f(u) + ξh(x, t)` with Dirichlet data.

pub mod error;
pub mod integrator;
pub mod model;
pub mod pullback;
pub mod spectral;
pub mod split;

pub use error::{Error, Result};
