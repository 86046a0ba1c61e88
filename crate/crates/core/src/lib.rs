//! Rudin–Shapiro polynomials on the unit circle.
//!
//! The pair `P_k`, `Q_k` is built by the doubling recursion
//! `P_{k+1}(z) = P_k(z) + z^{2^k} Q_k(z)`, `Q_{k+1}(z) = P_k(z) - z^{2^k} Q_k(z)`
//! starting from `P_0 = Q_0 = 1`. Both have `n = 2^k` coefficients in `{-1, +1}`.
//!
//! The crate is organised around the quantity `R_k(t) = |P_k(e^{it})|^2`:
//!
//! * [`sequence`] builds the coefficient pairs and checks coefficient-level facts,
//! * [`eval`] samples polynomials on equispaced circle grids (FFT) and at single
//!   points (double-double Horner), and computes exact autocorrelations,
//! * [`crossing`] certifies lower bounds on the number of solutions of
//!   `R_k(t) = level` and replays the sign-change argument behind them,
//! * [`distribution`] measures the value distribution of `R_k / 2n` and
//!   `P_k / sqrt(2n)`, the moments `M_q` and the Mahler measure,
//! * [`report`] and [`cli`] expose all of it as versioned JSON/CSV output.

pub mod cli;
pub mod crossing;
pub mod distribution;
pub mod error;
pub mod eval;
pub mod report;
pub mod roots;
pub mod sequence;
pub mod tolerance;

mod dd;

pub use crate::error::{Error, Result};
pub use crate::eval::{Autocorrelation, ComplexGrid, RealGrid};
pub use crate::sequence::{build_rs_pair, grs_coefficient, Budget, RsPair, SignSequence};
