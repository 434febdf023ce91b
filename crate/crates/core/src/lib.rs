//! Fidelity witnesses for pure fermionic Gaussian states.
//!
//! The crate works in the Majorana representation of `L` fermionic modes.
//! States enter through their `2L × 2L` real antisymmetric covariance
//! matrices, Gaussian unitaries through their special-orthogonal mode
//! rotations. On top of that it provides:
//!
//! - [`flo`]: skew-symmetric linear algebra (exponentials, Pfaffians,
//!   covariance conjugation, ground states, Gaussian overlaps).
//! - [`spin`]: the Jordan-Wigner layer for open XY / transverse-field Ising
//!   chains, including sudden quenches and Trotterized evolutions.
//! - [`witness`]: evaluation of the fidelity witness from covariance
//!   matrices, sample-complexity bounds, mismatch content and the robust
//!   certification decision.
//! - [`measurement`]: simulated single-shot measurements with the
//!   importance-sampling and the entrywise (commuting-band) estimators.
//! - [`oracle`]: a dense Hilbert-space reference used to cross-check all of
//!   the above for small `L`.
//! - [`experiments`]: sweeps and fits used by the command-line driver.
//!
//! Indices are 0-based throughout the library API. Files exchanged with
//! other tools (measurement records) use 1-based Majorana indices.
//!
//! ```
//! use fermion_witness::flo::{fock_covariance, FockString};
//! use fermion_witness::witness::witness_value;
//!
//! let target = fock_covariance(&FockString::zeros(3));
//! let report = witness_value(&target, &target).unwrap();
//! assert!((report.f_w - 1.0).abs() < 1e-12);
//! ```

pub mod error;
pub mod experiments;
pub mod flo;
pub mod io;
pub mod measurement;
pub mod oracle;
pub mod spin;
pub mod witness;

pub use error::{Error, Result};
