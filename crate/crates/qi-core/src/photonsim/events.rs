//! Timestamp-stream generation: Poisson pair emission, outcome sampling
//! through the exact receiver weights, and background light.

use super::{ExperimentConfig, HERALD, OUTCOME_DETECTOR};
use crate::protocol::{apply_receiver, probabilities, Normalization, SchemeConfig};
use crate::{check_range, math, Result};
use alloc::vec::Vec;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// One round of the splitmix64 mixer.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic per-run seed for `(setting, repeat)` under a root seed.
/// Distinct inputs give independent-looking streams; the same inputs always
/// give the same stream, so any single run can be regenerated in isolation.
pub fn sub_seed(seed: u64, setting: u32, repeat: u32) -> u64 {
    let a = splitmix64(seed);
    let b = splitmix64(a ^ u64::from(setting));
    splitmix64(b ^ u64::from(repeat).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Uniform draw in `[0, 1)` with 53 random bits.
fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    ((rng.next_u64() >> 11) as f64) * SCALE
}

/// Exponential inter-arrival gap for a Poisson process of the given rate.
/// Uses `-ln(1 - u)` so `u = 0` is harmless and `u = 1` cannot occur.
fn exp_gap(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    -math::ln(1.0 - uniform01(rng)) / rate
}

/// Simulates one acquisition at the quad's first setting pair with the
/// root seed. See [`generate_events_at`] for the full picture.
pub fn generate_events(cfg: &ExperimentConfig) -> Result<[Vec<f64>; 5]> {
    generate_events_at(cfg, 0, cfg.seed)
}

/// Simulates one acquisition: five sorted timestamp streams (seconds),
/// index `i` being detector `i + 1`.
///
/// Pairs are emitted as a Poisson process at `pair_rate`. For each pair the
/// herald fires with probability `herald_efficiency` at the emission time;
/// the outcome side is sampled from the exact per-trial receiver weights at
/// the chosen setting, scaled by `signal_efficiency`, and lands a quarter
/// coincidence window later (the optical delay of the longer arm) - `no
/// outcome` absorbs the channel loss and detector inefficiency. Background
/// light is an independent Poisson process at `noise_rate`, split uniformly
/// over the detectors it can reach. The draw order per pair is fixed
/// (gap, herald, outcome), so streams are bit-reproducible for a seed.
pub fn generate_events_at(
    cfg: &ExperimentConfig,
    setting_index: usize,
    seed: u64,
) -> Result<[Vec<f64>; 5]> {
    cfg.validate()?;
    check_range("setting_index", setting_index as f64, 0.0, 3.0)?;
    let (theta, delta) = cfg.quad.settings()[setting_index];

    let per_trial = SchemeConfig {
        normalization: Normalization::PerTrial,
        ..cfg.scheme
    };
    let after = apply_receiver(&cfg.channel_state()?, &per_trial, theta, delta);
    let weights = probabilities(&after, Normalization::PerTrial)?;
    let detect = [
        weights.h0 * cfg.signal_efficiency,
        weights.h1 * cfg.signal_efficiency,
        weights.v0 * cfg.signal_efficiency,
        weights.v1 * cfg.signal_efficiency,
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut streams: [Vec<f64>; 5] = Default::default();
    let delay = 0.25 * cfg.coincidence_window;

    if cfg.pair_rate > 0.0 {
        let mut t = exp_gap(&mut rng, cfg.pair_rate);
        while t < cfg.duration {
            if uniform01(&mut rng) < cfg.herald_efficiency {
                streams[HERALD].push(t);
            }
            let u = uniform01(&mut rng);
            let mut cum = 0.0;
            for (outcome, &p) in detect.iter().enumerate() {
                cum += p;
                if u < cum {
                    streams[OUTCOME_DETECTOR[outcome]].push(t + delay);
                    break;
                }
            }
            t += exp_gap(&mut rng, cfg.pair_rate);
        }
    }

    if cfg.noise_rate > 0.0 {
        let eligible = cfg.noise_detectors();
        let mut t = exp_gap(&mut rng, cfg.noise_rate);
        while t < cfg.duration {
            let pick = ((uniform01(&mut rng) * eligible.len() as f64) as usize)
                .min(eligible.len() - 1);
            streams[eligible[pick]].push(t);
            t += exp_gap(&mut rng, cfg.noise_rate);
        }
    }

    for stream in &mut streams {
        stream.sort_unstable_by(f64::total_cmp);
    }
    Ok(streams)
}
