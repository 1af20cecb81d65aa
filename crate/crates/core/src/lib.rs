//! Compressive Fourier collocation (CFC) for steady-state periodic
//! diffusion-reaction equations
//!
//! ```text
//!     -div(a grad u) + rho u = f   on the d-dimensional torus [0,1)^d
//! ```
//!
//! The solution is sought as a sparse expansion in a rescaled Fourier system.
//! A small number of random collocation points turns the PDE into an
//! underdetermined complex linear system, which is solved with sparse recovery
//! (OMP, adaptive lower OMP, square-root LASSO).
//!
//! Module map:
//!
//! * [`multiindex`]: hyperbolic crosses, lower sets and reduced margins in `Z^d`.
//! * [`basis`]: Fourier modes, rescaling factors and the operator applied to a mode.
//! * [`problem`]: diffusion coefficients, exact solutions, manufactured forcing.
//! * [`collocation`]: sample plans and assembly of the collocation system.
//! * [`recovery`]: least squares, OMP, adaptive lower OMP, SR-LASSO.
//! * [`analysis`]: Gram matrices, Riesz constants and related diagnostics.
//! * [`evaluation`]: Monte Carlo relative L2 errors and geometric statistics.

pub mod analysis;
pub mod basis;
pub mod collocation;
pub mod error;
pub mod evaluation;
mod linalg;
pub mod multiindex;
pub mod problem;
pub mod recovery;
pub mod rng;

pub use error::{CfcError, Result};
pub use num_complex::Complex64;
