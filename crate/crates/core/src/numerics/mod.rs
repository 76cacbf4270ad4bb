//! Foundation layer: double-double and extended-range scalars, symmetric
//! eigen-decomposition, quadrature and seeded random streams.

pub mod dd;
pub mod ext;
pub mod jacobi;
pub mod quad;
pub mod rng;

pub use dd::Dd;
pub use ext::{ExtReal, LogMag};
pub use jacobi::{jacobi_spectrum, Spectrum, SymMatrix};
pub use quad::{adaptive_quad, GaussLegendre, Support};
pub use rng::RngStream;
