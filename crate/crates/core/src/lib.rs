//! Inverse scattering solver for the Korteweg–de Vries equation
//! `q_t - 6 q q_x + q_xxx = 0`.
//!
//! The solution is written as `q(x, t) = -2 d^2/dx^2 log det(I + H(x, t))` where `H` is a
//! Hankel integral operator built from scattering data of the initial potential. The crate
//! covers the whole pipeline: potentials ([`potential`]), direct scattering for short-range and
//! step-like data ([`scattering`]), the Hankel operator and its Fredholm determinant
//! ([`hankel`]), and an independent spectral PDE solver used as a cross-check ([`oracle`]).

pub mod error;
pub mod hankel;
pub mod numeric;
pub mod oracle;
pub mod potential;
pub mod scattering;
pub mod soliton;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use potential::{Catalog, Potential};
pub use scattering::ScatteringData;
