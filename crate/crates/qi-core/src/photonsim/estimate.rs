//! Turning coincidence counts back into probabilities and CHSH values.

use super::{count_coincidences, generate_events_at, sub_seed, CoincidenceTable, ExperimentConfig};
use crate::protocol::ProbVector;
use crate::{check_range, math, Error, Result};
use alloc::vec::Vec;

/// What the coincidence counts are divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    /// Herald clicks: per-trial semantics, where channel loss and detector
    /// inefficiency show up as missing weight. The default.
    Heralds,
    /// Total outcome coincidences: post-selected semantics, where
    /// efficiencies common to all four detectors cancel.
    Detected,
    /// Herald clicks plus outcome coincidences.
    HeraldsPlusDetected,
}

impl Denominator {
    fn count(&self, table: &CoincidenceTable) -> u64 {
        match self {
            Denominator::Heralds => table.heralds,
            Denominator::Detected => table.detected(),
            Denominator::HeraldsPlusDetected => table.heralds + table.detected(),
        }
    }
}

/// Outcome-probability estimates from one coincidence table.
///
/// Counts map back to outcomes through the detector layout: detector 1
/// watches `v1`, 2 `h1`, 3 `v0`, 4 `h0`.
pub fn estimate_probabilities(
    table: &CoincidenceTable,
    denominator: Denominator,
) -> Result<ProbVector> {
    let denom = denominator.count(table);
    if denom == 0 {
        return Err(Error::ZeroDenominator(
            "no events to normalize probability estimates by",
        ));
    }
    let d = denom as f64;
    Ok(ProbVector {
        h0: table.pairs[3] as f64 / d,
        h1: table.pairs[1] as f64 / d,
        v0: table.pairs[2] as f64 / d,
        v1: table.pairs[0] as f64 / d,
    })
}

/// Counting-error-only standard error of the correlation estimate from a
/// single coincidence table.
///
/// Every count is treated as an independent Poisson variable and the error
/// is propagated through the ratio estimator by the delta method. This is
/// the honest error bar for a one-shot acquisition (e.g. a replayed
/// time-tag dump) where no repeat-to-repeat spread exists; with many
/// repeats the sample spread reported by [`estimate_s`] is preferred.
pub fn poisson_correlation_sigma(
    table: &CoincidenceTable,
    denominator: Denominator,
) -> Result<f64> {
    let probs = estimate_probabilities(table, denominator)?;
    let e = probs.correlation();
    let d = denominator.count(table) as f64;
    // pairs order is (v1, h1, v0, h0); E = p_h0 - p_h1 - p_v0 + p_v1
    let signs = [1.0, -1.0, -1.0, 1.0];
    let counts_in_denominator = !matches!(denominator, Denominator::Heralds);
    let heralds_in_denominator = !matches!(denominator, Denominator::Detected);
    let mut var = 0.0;
    for (&c, sign) in table.pairs.iter().zip(signs) {
        let slope = if counts_in_denominator {
            (sign - e) / d
        } else {
            sign / d
        };
        var += c as f64 * slope * slope;
    }
    if heralds_in_denominator {
        let slope = -e / d;
        var += table.heralds as f64 * slope * slope;
    }
    Ok(math::sqrt(var))
}

/// A Monte Carlo CHSH estimate with its run-to-run spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SEstimate {
    /// Mean of the per-repeat `S` values.
    pub s: f64,
    /// Sample standard deviation of the per-repeat `S` values (zero and
    /// flagged degenerate when there is only one repeat).
    pub s_sigma: f64,
    /// Mean per-repeat correlation at each of the four settings.
    pub correlations: [f64; 4],
    /// Sample standard deviation of each correlation.
    pub correlation_sigmas: [f64; 4],
    /// Coincidence counts per setting, summed over repeats.
    pub tables: [CoincidenceTable; 4],
    pub repeats: u32,
    /// True when `repeats == 1`, i.e. the sigmas carry no information.
    pub sigma_degenerate: bool,
}

fn mean_and_sample_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    (mean, math::sqrt((ss / (n - 1.0)).max(0.0)))
}

/// Runs the full simulated experiment: for every repeat, one acquisition
/// per CHSH setting (each under its own derived sub-seed), coincidence
/// counting, probability estimation, and the CHSH combination. Repeats are
/// independent, so the sample spread of the per-repeat `S` values is an
/// honest error bar.
pub fn estimate_s(
    cfg: &ExperimentConfig,
    repeats: u32,
    denominator: Denominator,
) -> Result<SEstimate> {
    cfg.validate()?;
    check_range("repeats", f64::from(repeats), 1.0, 1e6)?;

    let mut s_values = Vec::with_capacity(repeats as usize);
    let mut e_values: [Vec<f64>; 4] = Default::default();
    let mut tables = [CoincidenceTable::default(); 4];

    for repeat in 0..repeats {
        let mut e = [0.0f64; 4];
        for setting in 0..4 {
            let seed = sub_seed(cfg.seed, setting as u32, repeat);
            let streams = generate_events_at(cfg, setting, seed)?;
            let table = count_coincidences(&streams, cfg.coincidence_window)?;
            let probs = estimate_probabilities(&table, denominator)?;
            e[setting] = probs.correlation();
            e_values[setting].push(e[setting]);
            tables[setting].accumulate(&table);
        }
        s_values.push(math::abs(e[0] - e[1] + e[2] + e[3]));
    }

    let (s, s_sigma) = mean_and_sample_std(&s_values);
    let mut correlations = [0.0f64; 4];
    let mut correlation_sigmas = [0.0f64; 4];
    for setting in 0..4 {
        let (m, sd) = mean_and_sample_std(&e_values[setting]);
        correlations[setting] = m;
        correlation_sigmas[setting] = sd;
    }

    Ok(SEstimate {
        s,
        s_sigma,
        correlations,
        correlation_sigmas,
        tables,
        repeats,
        sigma_degenerate: repeats == 1,
    })
}
