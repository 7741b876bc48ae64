//! Half-line Jacobi matrices with conditionally summable parameters and their
//! spectral measures.
//!
//! The crate connects three descriptions of the same object:
//!
//! * Jacobi parameters `(a_n, b_n)` and their tail sums `(λ_n, κ_n)`;
//! * real Verblunsky coefficients `α_n` of a conjugation-invariant measure on
//!   the unit circle (forward Geronimus relations, and a fixed-point solver
//!   for the inverse direction);
//! * spectral measures on `[-2, 2]` and the unit circle, linked by the Szegő
//!   mapping `x = 2 cos θ`, together with m/M-functions, coefficient
//!   stripping, resonance classification and top-row surgery.
//!
//! Each formula is paired with a brute-force route (eigendecomposition of
//! truncations, moment orthogonalization, Toeplitz recursions) so the two can
//! be checked against each other.

pub mod error;
pub mod geronimus;
pub mod harmonic;
pub mod jacobi;
pub mod measures;
pub mod opuc;
pub mod seqspace;

pub use error::{Error, Result};
pub use geronimus::{JacobiParams, SolverOptions, VerblunskySeq};
pub use harmonic::FourierSeries;
pub use measures::{CircleMeasure, IntervalMeasure};
pub use seqspace::{DecaySeq, SpaceSpec};
