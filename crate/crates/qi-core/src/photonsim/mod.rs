//! Event-level Monte Carlo of the tabletop experiment.
//!
//! Where [`crate::protocol`] computes exact outcome weights, this module
//! simulates what the hardware records: five detectors (four outcome
//! detectors plus the herald) each producing a timestamp stream, from which
//! coincidence counting recovers probabilities - including the artifacts a
//! real counter suffers, such as accidental coincidences from background
//! light piling into the coincidence window.
//!
//! Detector numbering follows the bench layout: detectors 1..4 watch the
//! outcomes `v1, h1, v0, h0` in that order, detector 5 is the herald fired
//! by the partner photon of each emitted pair. Stream index `i` in the
//! `[Vec<f64>; 5]` arrays is detector `i + 1`.
//!
//! Everything is deterministic given the experiment seed: per-setting,
//! per-repeat sub-seeds are derived by hashing, so any single run can be
//! regenerated in isolation.

pub mod coincidence;
pub mod estimate;
pub mod events;

pub use coincidence::{count_coincidences, count_coincidences_reference, CoincidenceTable};
pub use estimate::{
    estimate_probabilities, estimate_s, poisson_correlation_sigma, Denominator, SEstimate,
};
pub use events::{generate_events, generate_events_at, sub_seed};

use crate::protocol::{
    depolarizing_channel, reflectivity_channel, AngleQuad, Scheme, SchemeConfig,
};
use crate::state::PolPathState;
use crate::{check_range, math, Error, Result};

/// Stream index of the herald detector (detector 5).
pub const HERALD: usize = 4;

/// Stream index watching each outcome, in `(h0, h1, v0, v1)` order:
/// `h0` is detector 4, `h1` detector 2, `v0` detector 3, `v1` detector 1.
pub const OUTCOME_DETECTOR: [usize; 4] = [3, 1, 2, 0];

/// Full description of one simulated experiment.
///
/// Rates are in hertz, times in seconds, angles in radians. The quad holds
/// the four CHSH settings; [`events::generate_events_at`] picks one of them
/// per run. The `scheme` field's normalization only affects analytic
/// comparisons - recorded events are inherently per-trial, and the
/// estimator's [`Denominator`] choice plays the post-selection role.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentConfig {
    /// Entangled-pair emission rate at the source.
    pub pair_rate: f64,
    /// Total background rate entering through the object port.
    pub noise_rate: f64,
    /// Acquisition time per run.
    pub duration: f64,
    /// Full width of the coincidence window.
    pub coincidence_window: f64,
    /// Object reflectivity.
    pub eta: f64,
    /// Depolarization strength of the return path.
    pub depolarization_p: f64,
    /// Receiver layout and plate convention.
    pub scheme: SchemeConfig,
    /// The four CHSH settings.
    pub quad: AngleQuad,
    /// Detection probability of the herald arm.
    pub herald_efficiency: f64,
    /// Detection probability of the outcome detectors.
    pub signal_efficiency: f64,
    /// Root seed; all randomness derives from it.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            pair_rate: 4.45e5,
            noise_rate: 0.0,
            duration: 1e-3,
            coincidence_window: 2e-9,
            eta: 1.0,
            depolarization_p: 0.0,
            scheme: SchemeConfig::default(),
            quad: AngleQuad::standard_optimal(),
            herald_efficiency: 0.25,
            signal_efficiency: 0.25,
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("pair_rate", self.pair_rate, 0.0, 1e12)?;
        check_range("noise_rate", self.noise_rate, 0.0, 1e12)?;
        check_range("duration", self.duration, 1e-9, 1e4)?;
        check_range("coincidence_window", self.coincidence_window, 1e-12, 1e-3)?;
        check_range("eta", self.eta, 0.0, 1.0)?;
        check_range("depolarization_p", self.depolarization_p, 0.0, 1.0)?;
        check_range("herald_efficiency", self.herald_efficiency, 0.0, 1.0)?;
        check_range("signal_efficiency", self.signal_efficiency, 0.0, 1.0)?;
        self.quad.validate()
    }

    /// The exact state reaching the receiver: entangled probe through the
    /// reflectivity channel, then depolarization.
    pub fn channel_state(&self) -> Result<PolPathState> {
        let probe = PolPathState::entangled();
        let lossy = reflectivity_channel(&probe, self.eta)?;
        depolarizing_channel(&lossy, self.depolarization_p)
    }

    /// Streams background light can reach: the signal-path pair when the
    /// path is read out directly, all four outcome detectors once a beam
    /// splitter mixes the arms.
    pub(crate) fn noise_detectors(&self) -> &'static [usize] {
        match self.scheme.scheme {
            Scheme::NonInterferometric => &[0, 1],
            Scheme::Interferometric => &[0, 1, 2, 3],
        }
    }
}

/// Background rate calibrated against the surviving signal rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCalibration {
    /// Background rate to configure.
    pub noise_rate: f64,
    /// Detected signal rate it was calibrated against.
    pub signal_rate: f64,
    /// `signal_rate / noise_rate`.
    pub snr: f64,
    /// The same in decibels.
    pub snr_db: f64,
}

/// Finds the background rate at which detected signal makes up
/// `signal_fraction` of all object-port detections.
///
/// The signal anchor is the rate of genuine outcome-detector clicks:
/// emission rate times the channel's surviving trace times the detector
/// efficiency (the receiver only redistributes weight between detectors, so
/// the anchor does not depend on the settings). At `signal_fraction = 1`
/// the background rate is zero and the SNR infinite.
pub fn signal_fraction_to_noise_rate(
    cfg: &ExperimentConfig,
    signal_fraction: f64,
) -> Result<NoiseCalibration> {
    cfg.validate()?;
    check_range("signal_fraction", signal_fraction, 1e-9, 1.0)?;
    let signal_rate = cfg.pair_rate * cfg.channel_state()?.trace() * cfg.signal_efficiency;
    if signal_rate <= 0.0 {
        return Err(Error::ZeroDenominator(
            "no surviving signal rate to calibrate noise against",
        ));
    }
    let noise_rate = signal_rate * (1.0 - signal_fraction) / signal_fraction;
    let snr = if noise_rate > 0.0 {
        signal_rate / noise_rate
    } else {
        f64::INFINITY
    };
    let snr_db = 10.0 * math::log10(snr);
    Ok(NoiseCalibration {
        noise_rate,
        signal_rate,
        snr,
        snr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation_catches_out_of_range_fields() {
        let ok = ExperimentConfig::default();
        ok.validate().unwrap();

        let cases: [(&str, fn(&mut ExperimentConfig)); 7] = [
            ("pair_rate", |c| c.pair_rate = -1.0),
            ("noise_rate", |c| c.noise_rate = f64::NAN),
            ("duration", |c| c.duration = 0.0),
            ("coincidence_window", |c| c.coincidence_window = 1.0),
            ("eta", |c| c.eta = 1.5),
            ("herald_efficiency", |c| c.herald_efficiency = -0.2),
            ("signal_efficiency", |c| c.signal_efficiency = 2.0),
        ];
        for (name, mutate) in cases {
            let mut cfg = ExperimentConfig::default();
            mutate(&mut cfg);
            assert!(cfg.validate().is_err(), "{name} should fail validation");
        }
    }

    #[test]
    fn channel_state_trace_follows_reflectivity() {
        let mut cfg = ExperimentConfig::default();
        for eta in [0.0f64, 0.3, 0.7, 1.0] {
            cfg.eta = eta;
            let tr = cfg.channel_state().unwrap().trace();
            assert!((tr - 0.5 * (1.0 + eta)).abs() < 1e-12);
        }
        // depolarization must not change the trace
        cfg.eta = 0.6;
        cfg.depolarization_p = 0.4;
        assert!((cfg.channel_state().unwrap().trace() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn noise_calibration_matches_hand_numbers() {
        let cfg = ExperimentConfig {
            eta: 0.7,
            signal_efficiency: 1.0,
            ..ExperimentConfig::default()
        };
        // signal rate: 4.45e5 * 0.85 = 3.7825e5
        let cal = signal_fraction_to_noise_rate(&cfg, 0.02).unwrap();
        assert!((cal.signal_rate - 3.7825e5).abs() < 1e-6);
        assert!((cal.noise_rate - 3.7825e5 * 49.0).abs() < 1e-3);
        assert!((cal.snr - 0.02 / 0.98).abs() < 1e-12);
        assert!((cal.snr_db - 10.0 * (0.02f64 / 0.98).log10()).abs() < 1e-9);

        // unit fraction: clean experiment
        let clean = signal_fraction_to_noise_rate(&cfg, 1.0).unwrap();
        assert_eq!(clean.noise_rate, 0.0);
        assert!(clean.snr.is_infinite());

        // efficiency scales the anchor linearly
        let half = ExperimentConfig {
            signal_efficiency: 0.5,
            ..cfg
        };
        let cal_half = signal_fraction_to_noise_rate(&half, 0.02).unwrap();
        assert!((cal_half.noise_rate - 0.5 * cal.noise_rate).abs() < 1e-6);

        // degenerate: nothing comes back at all
        let dead = ExperimentConfig {
            pair_rate: 0.0,
            ..cfg
        };
        assert!(matches!(
            signal_fraction_to_noise_rate(&dead, 0.5),
            Err(Error::ZeroDenominator(_))
        ));
        assert!(signal_fraction_to_noise_rate(&cfg, 0.0).is_err());
        assert!(signal_fraction_to_noise_rate(&cfg, 1.2).is_err());
    }
}
