//! Windowed coincidence counting between each outcome detector and the
//! herald.

use crate::{check_range, math, Error, Result};
use alloc::vec;
use alloc::vec::Vec;

/// Coincidence counts from one acquisition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CoincidenceTable {
    /// Herald coincidences per outcome detector (detectors 1..4, i.e. the
    /// outcomes `v1, h1, v0, h0` in stream order).
    pub pairs: [u64; 4],
    /// Raw click counts per stream, heralds included (diagnostics).
    pub singles: [u64; 5],
    /// Herald clicks.
    pub heralds: u64,
}

impl CoincidenceTable {
    /// Total outcome-detector coincidences.
    pub fn detected(&self) -> u64 {
        self.pairs.iter().sum()
    }

    /// Entry-wise sum, for accumulating repeats.
    pub fn accumulate(&mut self, other: &CoincidenceTable) {
        for (a, b) in self.pairs.iter_mut().zip(other.pairs.iter()) {
            *a += b;
        }
        for (a, b) in self.singles.iter_mut().zip(other.singles.iter()) {
            *a += b;
        }
        self.heralds += other.heralds;
    }
}

fn validate_streams(streams: &[Vec<f64>; 5], window: f64) -> Result<f64> {
    check_range("coincidence_window", window, 1e-15, 1e3)?;
    for (i, stream) in streams.iter().enumerate() {
        let sorted = stream.windows(2).all(|w| w[0] <= w[1]);
        if !sorted || stream.iter().any(|t| t.is_nan()) {
            return Err(Error::UnsortedStream {
                detector: i as u8 + 1,
            });
        }
    }
    Ok(0.5 * window)
}

/// Boundary-inclusive window test. Timestamps are often rounded
/// representations (an integer-nanosecond tag file read back as seconds),
/// so a pair that lies mathematically on the window edge can come out a few
/// ulps past it after the products and the subtraction round; the edge is
/// therefore accepted up to that noise floor, which is attoseconds at
/// laboratory time scales and far below any physical timing jitter.
fn compatible(outcome: f64, herald: f64, half: f64) -> bool {
    let magnitude = if math::abs(outcome) > math::abs(herald) {
        math::abs(outcome)
    } else {
        math::abs(herald)
    };
    math::abs(outcome - herald) <= half + 4.0 * f64::EPSILON * magnitude
}

/// Maximum pairing between one outcome stream and the herald stream where a
/// pair `(t, h)` is allowed when `|t - h| <= half`, each click used at most
/// once.
///
/// Both streams are sorted, so the greedy sweep is optimal: pairing the
/// earliest compatible clicks never blocks a later pairing (an exchange
/// argument - any maximum matching can be rewritten to use the earliest
/// compatible pair first without shrinking).
fn greedy_pairs(outcome: &[f64], herald: &[f64], half: f64) -> u64 {
    let (mut i, mut k, mut n) = (0usize, 0usize, 0u64);
    while i < outcome.len() && k < herald.len() {
        if compatible(outcome[i], herald[k], half) {
            n += 1;
            i += 1;
            k += 1;
        } else if outcome[i] < herald[k] {
            i += 1;
        } else {
            k += 1;
        }
    }
    n
}

/// Counts herald coincidences for all four outcome detectors.
///
/// `window` is the full window width: clicks match when they lie within
/// half of it on either side. Streams must be sorted ascending (as
/// [`super::generate_events`] produces them); a stream that is not sorted -
/// or contains NaN - is reported with its detector number.
pub fn count_coincidences(streams: &[Vec<f64>; 5], window: f64) -> Result<CoincidenceTable> {
    let half = validate_streams(streams, window)?;
    let herald = &streams[4];
    let mut table = CoincidenceTable::default();
    for (j, stream) in streams.iter().take(4).enumerate() {
        table.pairs[j] = greedy_pairs(stream, herald, half);
    }
    for (j, stream) in streams.iter().enumerate() {
        table.singles[j] = stream.len() as u64;
    }
    table.heralds = herald.len() as u64;
    Ok(table)
}

/// Reference implementation of [`count_coincidences`] by exhaustive dynamic
/// programming over each (outcome, herald) stream pair: `O(n * m)` time and
/// memory against the streaming matcher's `O(n + m)`. Intended for
/// cross-validation in tests, not production use.
pub fn count_coincidences_reference(
    streams: &[Vec<f64>; 5],
    window: f64,
) -> Result<CoincidenceTable> {
    let half = validate_streams(streams, window)?;
    let herald = &streams[4];
    let mut table = CoincidenceTable::default();
    for (j, stream) in streams.iter().take(4).enumerate() {
        table.pairs[j] = dp_pairs(stream, herald, half);
    }
    for (j, stream) in streams.iter().enumerate() {
        table.singles[j] = stream.len() as u64;
    }
    table.heralds = herald.len() as u64;
    Ok(table)
}

/// Textbook maximum-matching recurrence on suffixes:
/// `best(i, k) = max(best(i+1, k), best(i, k+1), [compatible] 1 + best(i+1, k+1))`.
fn dp_pairs(outcome: &[f64], herald: &[f64], half: f64) -> u64 {
    let (n, m) = (outcome.len(), herald.len());
    if n == 0 || m == 0 {
        return 0;
    }
    let mut best = vec![0u64; (n + 1) * (m + 1)];
    let at = |i: usize, k: usize| i * (m + 1) + k;
    for i in (0..n).rev() {
        for k in (0..m).rev() {
            let mut b = best[at(i + 1, k)].max(best[at(i, k + 1)]);
            if compatible(outcome[i], herald[k], half) {
                b = b.max(1 + best[at(i + 1, k + 1)]);
            }
            best[at(i, k)] = b;
        }
    }
    best[at(0, 0)]
}
