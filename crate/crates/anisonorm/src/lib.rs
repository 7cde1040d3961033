//! Anisotropic norm analysis of finite-horizon linear discrete
//! time-varying systems.
//!
//! The crate computes the a-anisotropic norm — the worst-case RMS gain
//! over random inputs whose anisotropy (an entropy-theoretic distance
//! from isotropic Gaussian white noise) is bounded by `a` — and decides
//! the threshold inequality `|||F|||_a <= γ` two independent ways:
//!
//! * [`dense`]: everything defined directly on the stacked input-output
//!   operator; serves as the oracle path.
//! * [`riccati`]: a forward difference Riccati recursion whose
//!   log-determinant inequality decides the same bound recursively in
//!   time, with the H-infinity bounded real lemma as its limit.
//!
//! Supporting modules: [`system`] (realizations, stacking, simulation),
//! [`anisotropy`] (Gaussian entropy functionals), [`gramians`]
//! (Lyapunov recursions and the outerness criterion), [`format`] and
//! [`cli`] (file formats and the command-line front end).

pub mod anisotropy;
pub mod cli;
pub mod dense;
pub mod error;
pub mod format;
pub mod gramians;
mod linalg;
pub mod riccati;
pub mod scalar;
pub mod system;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision aliases for the main analysis types.
pub type LdtvSystem64 = system::LdtvSystem<f64>;
pub type StackedOperator64 = system::StackedOperator<f64>;
pub type GramOperator64 = dense::GramOperator<f64>;
pub type GaussianLaw64 = anisotropy::GaussianLaw<f64>;
pub type RiccatiTrace64 = riccati::RiccatiTrace<f64>;
pub type AnbrlVerdict64 = riccati::AnbrlVerdict<f64>;
pub type SpectralFactor64 = riccati::SpectralFactor<f64>;
pub type GramianSet64 = gramians::GramianSet<f64>;
