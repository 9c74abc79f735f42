//! Steady-state photon statistics for coherently driven one- and two-atom
//! cavity QED.
//!
//! The crate builds the rotating-frame Hamiltonian and collapse operators of
//! a single cavity mode coupled to up to two two-level atoms, assembles the
//! Lindblad superoperator, solves for the stationary state and reports
//! `<a†a>`, `g2(0)` and `g3(0)`. The [`dressed`] module provides the
//! closed-form dressed-state ladder together with a numeric diagonalization
//! that cross-checks it, and [`sweep`] runs detuning scans with truncation
//! convergence checks.

pub mod cli;
pub mod config;
pub mod dressed;
pub mod error;
pub mod hilbert;
pub mod liouvillian;
pub mod model;
pub mod observables;
pub mod presets;
pub mod sweep;

pub use error::{Error, Result};
pub use hilbert::{HilbertLayout, OperatorMatrix};
pub use liouvillian::{DensityMatrix, Liouvillian, SteadyState};
pub use model::{Coupling, SystemConfig};
pub use observables::{Correlation, PhotonStatistics};
pub use sweep::{SweepResult, SweepRow, SweepSpec};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
