//! Secrecy-rate beamforming for integrated satellite-terrestrial downlinks.
//!
//! A multi-beam satellite shares spectrum with one base station (BS) per
//! beam. Each beam holds a satellite user (SU), a terrestrial user (TU) and a
//! passive eavesdropper. The interference that the two systems already cause
//! each other is shaped by joint beamforming so that it hurts the
//! eavesdropper more than the legitimate users.
//!
//! Crate layout:
//!
//! * [`chanmodel`] draws satellite and terrestrial channel realizations.
//! * [`ratemodel`] evaluates SINRs and secrecy rates.
//! * [`conic`] is a first-order conic solver (zero, nonnegative, PSD and
//!   exponential cones) used by the successive convex approximation.
//! * [`sca`] builds the convexified subproblem, runs the SCA loop, extracts
//!   rank-one beamformers and checks tightness of the relaxation.
//! * [`benchmarks`] holds the MRT/artificial-noise power-allocation scheme and
//!   the zero-forcing baseline.
//! * [`harness`] runs seeded Monte-Carlo sweeps and writes CSV and gnuplot
//!   output.

pub mod benchmarks;
pub mod chanmodel;
pub mod config;
pub mod conic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod ratemodel;
pub mod sca;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
