//! Joint activity and data detection (JADD) for grant-free codebook NOMA.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`] generates codebooks, Rayleigh channels, activity patterns and noisy observations.
//! * [`solvers`] holds the proximal operators and the three ADMM variants with their diagnostics.
//! * [`support`] turns an ADMM estimate into an active-user set and symbol decisions.
//! * [`baselines`] provides the oracle least-squares, oracle ADMM and block subspace pursuit detectors.
//! * [`dynamic`] runs the two-step frame detector that reuses support from the previous slot.
//! * [`harness`] drives Monte Carlo sweeps, FLOP accounting and CSV persistence.
//!
//! User indices are zero-based throughout.

pub mod baselines;
pub mod dynamic;
pub mod error;
pub mod harness;
pub mod model;
pub mod rng;
pub mod solvers;
pub mod support;

pub use error::{JaddError, Result};

/// Complex scalar used everywhere.
pub type Cx = nalgebra::Complex<f64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<Cx>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<Cx>;
/// Ordered user set. Ordering keeps every output deterministic.
pub type UserSet = std::collections::BTreeSet<usize>;
/// Map from user index to codeword index.
pub type SymbolMap = std::collections::BTreeMap<usize, usize>;
