//! Simulation core for single-photon quantum illumination with
//! polarization-path entanglement.
//!
//! A single photon is entangled between its polarization (`h`/`v`) and the
//! path it travels (reference path 0 / signal path 1). The signal path
//! illuminates an object of reflectivity `eta`; the receiver rotates
//! polarization (and optionally interferes the paths) before a five-detector
//! readout, and a CHSH correlation built from the four joint
//! polarization-path outcomes decides whether the object is present.
//!
//! The crate is split along the physics:
//!
//! * [`state`] — exact 4x4 density-matrix algebra on the fixed
//!   `(h0, h1, v0, v1)` basis: states, 2x2 polarization operators,
//!   path-controlled embedding, marginals, validation.
//! * [`protocol`] — the illumination protocol itself: reflectivity (loss)
//!   channel, the two receiver schemes, CHSH correlations and the angle
//!   optimizer, the classical baseline, a path-controlled depolarizing
//!   channel, thermal background mixtures, and interference visibility.
//! * [`photonsim`] — event-level Monte Carlo: Poisson pair/background
//!   generation, windowed coincidence counting across five detectors, and
//!   probability / CHSH estimators with uncertainty.
//!
//! Everything is deterministic: stochastic paths are seeded explicitly and
//! produce bit-identical results for identical configurations.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature enables `std::error::Error` integration and native float math.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod photonsim;
pub mod protocol;
pub mod state;

mod eig;
mod math;

use core::fmt;

/// Errors surfaced by state constructors, channels, and estimators.
///
/// All variants are domain/contract violations: no IO happens in this crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter fell outside its documented closed range
    /// (NaN fails every range check and lands here too).
    OutOfRange {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },
    /// A matrix failed a state invariant (hermiticity, positivity, trace).
    InvalidState(&'static str),
    /// An operation needed population that the state does not have
    /// (e.g. post-selection or visibility on a (near-)zero block).
    DegenerateState(&'static str),
    /// A detector stream violated its sorted-ascending contract.
    UnsortedStream { detector: u8 },
    /// An estimator denominator was zero (no heralds / no detections).
    ZeroDenominator(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::OutOfRange {
                name,
                value,
                min,
                max,
            } => write!(f, "{name} = {value} outside [{min}, {max}]"),
            Error::InvalidState(what) => write!(f, "invalid state: {what}"),
            Error::DegenerateState(what) => write!(f, "degenerate state: {what}"),
            Error::UnsortedStream { detector } => {
                write!(f, "detector {detector} stream is not sorted ascending")
            }
            Error::ZeroDenominator(what) => write!(f, "zero denominator: {what}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_range(name: &'static str, value: f64, min: f64, max: f64) -> Result<()> {
    // `!(..)` so that NaN fails the check instead of sneaking through.
    if !(value >= min && value <= max) {
        return Err(Error::OutOfRange {
            name,
            value,
            min,
            max,
        });
    }
    Ok(())
}
