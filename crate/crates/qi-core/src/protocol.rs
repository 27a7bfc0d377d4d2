//! The illumination protocol on exact states: loss and noise channels, the
//! two receiver layouts, correlation functions, the CHSH combination, and
//! angle optimization.
//!
//! Conventions used throughout:
//!
//! * A measurement *setting* is an angle in radians; the polarization plate
//!   realizing it is either a proper rotation or a half-wave reflection
//!   (see [`WaveplateConvention`]). Path mixing is always a proper rotation.
//! * The correlation for one pair of settings is
//!   `E = P(h0) + P(v1) - P(h1) - P(v0)`.
//! * The CHSH combination over a quad of settings
//!   `(theta, delta), (theta, delta'), (theta', delta), (theta', delta')`
//!   is `S = |E1 - E2 + E3 + E4|`.
//! * Per-trial statistics keep the outcome weights sub-normalized when the
//!   channel is lossy (the missing weight is the photon that never came
//!   back); post-selected statistics renormalize each setting's outcomes to
//!   the detected subset.

use crate::state::{
    loss_operator, BasisLabel, PathSelector, PolOperator, PolPathState, DEGENERATE_TRACE,
};
use crate::{check_range, math, Error, Result};
use alloc::vec::Vec;
use core::f64::consts::PI;

/// How the receiver couples the path qubit into the detected statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Both measurement plates stack on polarization; the path is read out
    /// directly by which detector pair fires. No interferometric stability
    /// is required, which is the practical appeal of this layout.
    NonInterferometric,
    /// The first setting rotates polarization, the second mixes the two
    /// paths on a beam splitter before detection.
    Interferometric,
}

/// The 2x2 family a polarization setting is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveplateConvention {
    /// Proper rotation by the setting angle (determinant +1).
    Rotation,
    /// Half-wave-plate reflection: the plate sits at half the setting angle
    /// so both conventions rotate the analysis basis by the same amount and
    /// differ only in a sign pattern (determinant -1).
    HwpReflection,
}

/// Whether outcome weights are kept per emitted trial or renormalized to
/// the detected subset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    PerTrial,
    PostSelected,
}

/// Full receiver configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub convention: WaveplateConvention,
    pub normalization: Normalization,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            scheme: Scheme::NonInterferometric,
            convention: WaveplateConvention::Rotation,
            normalization: Normalization::PerTrial,
        }
    }
}

/// The four CHSH settings: primed and unprimed angles for each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleQuad {
    pub theta: f64,
    pub delta: f64,
    pub theta_p: f64,
    pub delta_p: f64,
}

impl AngleQuad {
    pub const fn new(theta: f64, delta: f64, theta_p: f64, delta_p: f64) -> Self {
        AngleQuad {
            theta,
            delta,
            theta_p,
            delta_p,
        }
    }

    /// The canonical maximizing quad `(0, pi/8, 3pi/4, 3pi/8)`: it reaches
    /// `2 sqrt(2)` on the clean entangled probe under every receiver variant
    /// and stays optimal for the whole lossy family.
    pub fn standard_optimal() -> Self {
        AngleQuad::new(0.0, PI / 8.0, 0.75 * PI, 3.0 * PI / 8.0)
    }

    /// Setting pairs in CHSH order:
    /// `(t, d), (t, d'), (t', d), (t', d')`.
    pub fn settings(&self) -> [(f64, f64); 4] {
        [
            (self.theta, self.delta),
            (self.theta, self.delta_p),
            (self.theta_p, self.delta),
            (self.theta_p, self.delta_p),
        ]
    }

    /// Every plate is periodic in pi; fold all four angles into `[0, pi)`.
    pub fn canonicalized(&self) -> AngleQuad {
        AngleQuad {
            theta: math::rem_euclid(self.theta, PI),
            delta: math::rem_euclid(self.delta, PI),
            theta_p: math::rem_euclid(self.theta_p, PI),
            delta_p: math::rem_euclid(self.delta_p, PI),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta", self.theta),
            ("delta", self.delta),
            ("theta_p", self.theta_p),
            ("delta_p", self.delta_p),
        ] {
            check_range(name, v, -1e12, 1e12)?;
        }
        Ok(())
    }
}

/// Outcome weights for the four detector classes under one setting pair.
///
/// Per-trial weights sum to the state's trace (at most 1, less when the
/// channel is lossy); post-selected weights sum to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbVector {
    pub h0: f64,
    pub h1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl ProbVector {
    pub fn sum(&self) -> f64 {
        self.h0 + self.h1 + self.v0 + self.v1
    }

    /// `E = P(h0) + P(v1) - P(h1) - P(v0)`.
    pub fn correlation(&self) -> f64 {
        self.h0 + self.v1 - self.h1 - self.v0
    }
}

/// `S` together with the four correlations it was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChshValue {
    pub s: f64,
    /// `E` at `(t,d), (t,d'), (t',d), (t',d')` in that order.
    pub correlations: [f64; 4],
}

/// Result of an angle search: the maximizing quad and its CHSH value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizedAngles {
    pub quad: AngleQuad,
    pub value: ChshValue,
}

/// Object of reflectivity `eta` in the signal arm: `T rho T^dagger` with
/// `T = |h><h| (x) |0><0| + sqrt(eta) |v><v| (x) |1><1|`.
///
/// `T` is not a unitary and not trace preserving: the `h1` and `v0`
/// populations (absent from the ideal probe) are discarded entirely, and
/// the returning signal amplitude is damped by `sqrt(eta)`. On the
/// entangled probe this leaves the sub-normalized pure state
/// `(|h0> - sqrt(eta) |v1>) / sqrt(2)` of trace `(1 + eta) / 2`.
pub fn reflectivity_channel(rho: &PolPathState, eta: f64) -> Result<PolPathState> {
    let t = loss_operator(eta)?;
    Ok(rho.conjugated_by(&t))
}

/// Isotropic depolarization of the returning signal arm with strength
/// `p in [0, 1]`: mixes `rho` with the three signal-path-controlled Pauli
/// conjugations,
/// `(1 - p) rho + (p/3) sum_i f_i rho f_i^dagger`,
/// `f_i = 1 (x) |0><0| + sigma_i (x) |1><1|`.
///
/// At `p = 3/4` the signal-path polarization is fully randomized; beyond
/// that the coherence changes sign and partially revives.
pub fn depolarizing_channel(rho: &PolPathState, p: f64) -> Result<PolPathState> {
    check_range("p", p, 0.0, 1.0)?;
    let paulis = [
        PolOperator::pauli_x(),
        PolOperator::pauli_y(),
        PolOperator::pauli_z(),
    ];
    let mut out = rho.scale(1.0 - p);
    for sigma in &paulis {
        let term = rho.apply_pol(sigma, PathSelector::SignalOnly);
        out = out.add(&term.scale(p / 3.0));
    }
    Ok(out)
}

/// Convex mixture with unpolarized signal-path background:
/// `(1 - q) rho + q (I_pol / 2) (x) |1><1|`.
///
/// The background term carries zero correlation under either receiver, so
/// per-trial `S` scales exactly as `(1 - q)` times the clean value.
pub fn thermal_mixture(rho: &PolPathState, q: f64) -> Result<PolPathState> {
    check_range("q", q, 0.0, 1.0)?;
    Ok(rho
        .scale(1.0 - q)
        .add(&PolPathState::unpolarized_signal().scale(q)))
}

/// The polarization plate realizing one measurement setting under the given
/// convention. Under `HwpReflection` the physical plate angle is half the
/// setting, so both conventions rotate the analysis basis by the same
/// amount (their matrix entries agree in magnitude entry-by-entry).
pub fn measurement_plate(convention: WaveplateConvention, setting: f64) -> PolOperator {
    match convention {
        WaveplateConvention::Rotation => PolOperator::rotator(setting),
        WaveplateConvention::HwpReflection => PolOperator::hwp(0.5 * setting),
    }
}

/// Runs the receiver optics for one setting pair, returning the state seen
/// by the four detectors.
///
/// Non-interferometric: both plates stack on polarization (their settings
/// add) across both paths; the path is read out as-is. Interferometric:
/// the `theta` plate acts on polarization, then a path rotation by `delta`
/// interferes the two arms.
pub fn apply_receiver(
    rho: &PolPathState,
    cfg: &SchemeConfig,
    theta: f64,
    delta: f64,
) -> PolPathState {
    match cfg.scheme {
        Scheme::NonInterferometric => {
            let plate = measurement_plate(cfg.convention, theta + delta);
            rho.apply_pol(&plate, PathSelector::Both)
        }
        Scheme::Interferometric => {
            let plate = measurement_plate(cfg.convention, theta);
            rho.apply_pol(&plate, PathSelector::Both)
                .apply_to_path(&PolOperator::rotator(delta))
        }
    }
}

/// Outcome weights of a (post-receiver) state under the chosen
/// normalization. Post-selection fails on a state with no detectable
/// population.
pub fn probabilities(rho: &PolPathState, normalization: Normalization) -> Result<ProbVector> {
    let d = rho.diagonal();
    let raw = ProbVector {
        h0: d[BasisLabel::H0.index()],
        h1: d[BasisLabel::H1.index()],
        v0: d[BasisLabel::V0.index()],
        v1: d[BasisLabel::V1.index()],
    };
    match normalization {
        Normalization::PerTrial => Ok(raw),
        Normalization::PostSelected => {
            let total = raw.sum();
            if total < DEGENERATE_TRACE {
                return Err(Error::DegenerateState(
                    "no detectable population to post-select on",
                ));
            }
            Ok(ProbVector {
                h0: raw.h0 / total,
                h1: raw.h1 / total,
                v0: raw.v0 / total,
                v1: raw.v1 / total,
            })
        }
    }
}

/// Correlation `E` for one setting pair under the configured receiver.
pub fn correlation(
    rho: &PolPathState,
    cfg: &SchemeConfig,
    theta: f64,
    delta: f64,
) -> Result<f64> {
    check_range("theta", theta, -1e12, 1e12)?;
    check_range("delta", delta, -1e12, 1e12)?;
    let after = apply_receiver(rho, cfg, theta, delta);
    Ok(probabilities(&after, cfg.normalization)?.correlation())
}

/// CHSH value `S = |E1 - E2 + E3 + E4|` over the quad's four setting pairs.
pub fn chsh_s(rho: &PolPathState, quad: &AngleQuad, cfg: &SchemeConfig) -> Result<ChshValue> {
    quad.validate()?;
    let settings = quad.settings();
    let mut correlations = [0.0f64; 4];
    for (slot, &(t, d)) in correlations.iter_mut().zip(settings.iter()) {
        let after = apply_receiver(rho, cfg, t, d);
        *slot = probabilities(&after, cfg.normalization)?.correlation();
    }
    let s = math::abs(correlations[0] - correlations[1] + correlations[2] + correlations[3]);
    Ok(ChshValue { s, correlations })
}

/// Exhaustive-grid CHSH maximization followed by local refinement.
///
/// The grid covers `[0, pi)` in steps of about `resolution` per angle (each
/// plate is pi-periodic). Ties on the grid keep the lexicographically first
/// quad in `(theta, delta, theta_p, delta_p)` index order; a coordinate
/// descent then polishes the winner to about 1e-6 radians. The search is
/// fully deterministic.
pub fn optimize_angles(
    rho: &PolPathState,
    cfg: &SchemeConfig,
    resolution: f64,
) -> Result<OptimizedAngles> {
    check_range("resolution", resolution, PI / 128.0, PI / 4.0)?;
    let n = math::round(PI / resolution) as usize;
    // Receivers only conjugate by unitaries, so the trace - and with it the
    // feasibility of post-selection - is fixed before any angle is chosen.
    if cfg.normalization == Normalization::PostSelected && rho.trace() < DEGENERATE_TRACE {
        return Err(Error::DegenerateState(
            "no detectable population to post-select on",
        ));
    }

    let step = PI / n as f64;
    let mut table = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let after = apply_receiver(rho, cfg, i as f64 * step, j as f64 * step);
            table.push(probabilities(&after, cfg.normalization)?.correlation());
        }
    }

    let mut best_s = f64::NEG_INFINITY;
    let mut best = [0usize; 4];
    for ia in 0..n {
        let row_a = &table[ia * n..(ia + 1) * n];
        for ib in 0..n {
            let e1 = row_a[ib];
            for iap in 0..n {
                let row_ap = &table[iap * n..(iap + 1) * n];
                let e13 = e1 + row_ap[ib];
                for ibp in 0..n {
                    let s = math::abs(e13 - row_a[ibp] + row_ap[ibp]);
                    if s > best_s {
                        best_s = s;
                        best = [ia, ib, iap, ibp];
                    }
                }
            }
        }
    }

    let mut quad = AngleQuad::new(
        best[0] as f64 * step,
        best[1] as f64 * step,
        best[2] as f64 * step,
        best[3] as f64 * step,
    );
    let mut current = best_s;

    // Coordinate descent: try +-h on each angle, keep strict improvements,
    // halve h when a full cycle stalls.
    let mut h = 0.5 * step;
    while h > 1e-6 {
        let mut improved = false;
        for k in 0..4 {
            for sign in [1.0f64, -1.0] {
                let mut candidate = quad;
                let slot = match k {
                    0 => &mut candidate.theta,
                    1 => &mut candidate.delta,
                    2 => &mut candidate.theta_p,
                    _ => &mut candidate.delta_p,
                };
                *slot += sign * h;
                let s = chsh_s(rho, &candidate, cfg)?.s;
                if s > current {
                    current = s;
                    quad = candidate;
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }

    let quad = quad.canonicalized();
    let value = chsh_s(rho, &quad, cfg)?;
    Ok(OptimizedAngles { quad, value })
}

/// Polarization fringe visibility of the signal arm: sweep an analyzer over
/// the signal path's 2x2 polarization block `B` and return
/// `(max - min) / (max + min)` of the transmitted intensity, which reduces
/// to `sqrt((B_hh - B_vv)^2 + 4 Re(B_hv)^2) / tr(B)`.
///
/// Fails when the signal arm carries no population.
pub fn visibility(rho: &PolPathState) -> Result<f64> {
    let b = rho.path_block(crate::state::PathLabel::Signal);
    let total = b[0][0].re + b[1][1].re;
    if total < DEGENERATE_TRACE {
        return Err(Error::DegenerateState("signal arm carries no population"));
    }
    let diff = b[0][0].re - b[1][1].re;
    let cross = 2.0 * b[0][1].re;
    Ok(math::sqrt(diff * diff + cross * cross) / total)
}

/// Depolarization strength that produces a target signal-arm visibility on
/// the lossy entangled probe. Inverts `V(p) = 1 - 4p/3` on the physical
/// branch `p in [0, 3/4]` (visibility is independent of reflectivity, so no
/// `eta` argument is needed).
pub fn depolarization_for_visibility(v: f64) -> Result<f64> {
    check_range("visibility", v, 0.0, 1.0)?;
    Ok(0.75 * (1.0 - v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_4, FRAC_PI_8, SQRT_2};

    const TOL: f64 = 1e-12;

    fn ni_cfg(convention: WaveplateConvention, normalization: Normalization) -> SchemeConfig {
        SchemeConfig {
            scheme: Scheme::NonInterferometric,
            convention,
            normalization,
        }
    }

    fn int_cfg(convention: WaveplateConvention, normalization: Normalization) -> SchemeConfig {
        SchemeConfig {
            scheme: Scheme::Interferometric,
            convention,
            normalization,
        }
    }

    fn lossy_probe(eta: f64) -> PolPathState {
        reflectivity_channel(&PolPathState::entangled(), eta).unwrap()
    }

    /// The quad that maximizes every receiver variant at unit reflectivity.
    fn optimal_quad() -> AngleQuad {
        let q = AngleQuad::standard_optimal();
        assert_eq!(
            (q.theta, q.delta, q.theta_p, q.delta_p),
            (0.0, FRAC_PI_8, 0.75 * PI, 3.0 * FRAC_PI_8)
        );
        q
    }

    const ETAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];
    const ANGLES: [f64; 6] = [0.0, 0.17, 0.5, 1.1, 2.0, 2.9];

    #[test]
    fn lossy_probe_matches_closed_form() {
        for &eta in &ETAS {
            let rho = lossy_probe(eta);
            let d = rho.diagonal();
            assert!((d[0] - 0.5).abs() < TOL);
            assert!((d[3] - eta / 2.0).abs() < TOL);
            assert!(d[1].abs() < TOL && d[2].abs() < TOL);
            let coh = rho.entry(BasisLabel::H0, BasisLabel::V1);
            assert!((coh.re + math::sqrt(eta) / 2.0).abs() < TOL);
            assert!((rho.trace() - (1.0 + eta) / 2.0).abs() < TOL);
            rho.validate().unwrap();
        }
    }

    #[test]
    fn lossy_probe_negativity_is_sqrt_eta_over_two() {
        for &eta in &ETAS {
            let n = lossy_probe(eta).negativity();
            assert!((n - math::sqrt(eta) / 2.0).abs() < 1e-10, "eta={eta}");
        }
    }

    #[test]
    fn non_interferometric_correlation_closed_form() {
        for &eta in &ETAS {
            let rho = lossy_probe(eta);
            for &t in &ANGLES {
                for &d in &ANGLES {
                    let expected = 0.5 * (1.0 + eta) * math::cos(2.0 * (t + d));
                    for conv in [WaveplateConvention::Rotation, WaveplateConvention::HwpReflection]
                    {
                        let e = correlation(&rho, &ni_cfg(conv, Normalization::PerTrial), t, d)
                            .unwrap();
                        assert!((e - expected).abs() < TOL, "eta={eta} t={t} d={d}");
                    }
                    // post-selection divides the trace back out
                    if eta > 0.0 {
                        let e = correlation(
                            &rho,
                            &ni_cfg(WaveplateConvention::Rotation, Normalization::PostSelected),
                            t,
                            d,
                        )
                        .unwrap();
                        assert!((e - math::cos(2.0 * (t + d))).abs() < TOL);
                    }
                }
            }
        }
    }

    #[test]
    fn interferometric_correlation_closed_form() {
        for &eta in &ETAS {
            let rho = lossy_probe(eta);
            let root = math::sqrt(eta);
            for &t in &ANGLES {
                for &d in &ANGLES {
                    let symmetric = 0.5 * (1.0 + eta) * math::cos(2.0 * t) * math::cos(2.0 * d);
                    let cross = root * math::sin(2.0 * t) * math::sin(2.0 * d);
                    let e_rot = correlation(
                        &rho,
                        &int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
                        t,
                        d,
                    )
                    .unwrap();
                    assert!((e_rot - (symmetric - cross)).abs() < TOL);
                    let e_hwp = correlation(
                        &rho,
                        &int_cfg(WaveplateConvention::HwpReflection, Normalization::PerTrial),
                        t,
                        d,
                    )
                    .unwrap();
                    assert!((e_hwp - (symmetric + cross)).abs() < TOL);
                }
            }
        }
    }

    #[test]
    fn chsh_maximum_curves_in_eta() {
        for &eta in &ETAS {
            let rho = lossy_probe(eta);
            let ni = optimize_angles(
                &rho,
                &ni_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
                PI / 64.0,
            )
            .unwrap();
            let expected_ni = SQRT_2 * (1.0 + eta);
            assert!(
                (ni.value.s - expected_ni).abs() < 1e-9,
                "eta={eta}: ni {} vs {}",
                ni.value.s,
                expected_ni
            );

            let int = optimize_angles(
                &rho,
                &int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
                PI / 64.0,
            )
            .unwrap();
            let a = 0.5 * (1.0 + eta);
            let expected_int = 2.0 * math::sqrt(a * a + eta);
            assert!(
                (int.value.s - expected_int).abs() < 1e-9,
                "eta={eta}: int {} vs {}",
                int.value.s,
                expected_int
            );

            // the non-interferometric layout is never worse, and they agree
            // exactly at unit reflectivity
            assert!(ni.value.s >= int.value.s - 1e-9);
            if (eta - 1.0).abs() < TOL {
                assert!((ni.value.s - 2.0 * SQRT_2).abs() < 1e-9);
                assert!((int.value.s - 2.0 * SQRT_2).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn chsh_crosses_two_at_sqrt2_minus_one() {
        let eta = SQRT_2 - 1.0;
        let rho = lossy_probe(eta);
        let s = chsh_s(&rho, &optimal_quad(), &SchemeConfig::default())
            .unwrap()
            .s;
        assert!((s - 2.0).abs() < 1e-12);
        // strictly monotone in eta around the crossing
        let below = chsh_s(&lossy_probe(eta - 0.01), &optimal_quad(), &SchemeConfig::default())
            .unwrap()
            .s;
        let above = chsh_s(&lossy_probe(eta + 0.01), &optimal_quad(), &SchemeConfig::default())
            .unwrap()
            .s;
        assert!(below < 2.0 && above > 2.0);
    }

    #[test]
    fn optimal_quad_hits_tsirelson_at_unit_reflectivity() {
        let rho = PolPathState::entangled();
        for conv in [WaveplateConvention::Rotation, WaveplateConvention::HwpReflection] {
            for norm in [Normalization::PerTrial, Normalization::PostSelected] {
                let v = chsh_s(&rho, &optimal_quad(), &ni_cfg(conv, norm)).unwrap();
                assert!(
                    (v.s - 2.0 * SQRT_2).abs() < TOL,
                    "conv={conv:?} norm={norm:?} s={}",
                    v.s
                );
            }
        }
        let v = chsh_s(
            &rho,
            &optimal_quad(),
            &int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
        )
        .unwrap();
        assert!((v.s - 2.0 * SQRT_2).abs() < TOL);
    }

    #[test]
    fn post_selected_chsh_is_independent_of_reflectivity() {
        let cfg = ni_cfg(WaveplateConvention::Rotation, Normalization::PostSelected);
        for &eta in &[0.05, 0.3, 0.7, 1.0] {
            let v = chsh_s(&lossy_probe(eta), &optimal_quad(), &cfg).unwrap();
            assert!((v.s - 2.0 * SQRT_2).abs() < TOL, "eta={eta}");
        }
    }

    /// Halving the textbook rotation settings - reading them as if they were
    /// physical half-wave-plate angles - collapses the CHSH value to a small
    /// pinned number instead of 2*sqrt(2).
    #[test]
    fn halved_settings_quad_gives_pinned_small_s() {
        let halved = AngleQuad::new(0.0, PI / 16.0, 3.0 * PI / 16.0, 5.0 * PI / 16.0);
        let expected = 0.3065629648763765; // cos(pi/8) + sin(pi/8) - 1
        let rho = PolPathState::entangled();
        for conv in [WaveplateConvention::Rotation, WaveplateConvention::HwpReflection] {
            for norm in [Normalization::PerTrial, Normalization::PostSelected] {
                let v = chsh_s(&rho, &halved, &ni_cfg(conv, norm)).unwrap();
                assert!(
                    (v.s - expected).abs() < TOL,
                    "conv={conv:?} norm={norm:?} s={}",
                    v.s
                );
            }
        }
        // the rotation-convention interferometric receiver agrees at eta = 1
        let v = chsh_s(
            &rho,
            &halved,
            &int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
        )
        .unwrap();
        assert!((v.s - expected).abs() < TOL);
    }

    #[test]
    fn classical_probe_correlations() {
        let classical = PolPathState::classical_signal();
        // without the channel: E = -sin 2(t+d) under rotation plates,
        // +sin 2(t+d) under half-wave reflections, -sin 2t cos 2d split
        for &t in &ANGLES {
            for &d in &ANGLES {
                let e = correlation(
                    &classical,
                    &ni_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
                    t,
                    d,
                )
                .unwrap();
                assert!((e + math::sin(2.0 * (t + d))).abs() < TOL);
                let e = correlation(
                    &classical,
                    &ni_cfg(WaveplateConvention::HwpReflection, Normalization::PerTrial),
                    t,
                    d,
                )
                .unwrap();
                assert!((e - math::sin(2.0 * (t + d))).abs() < TOL);
                let e = correlation(
                    &classical,
                    &int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
                    t,
                    d,
                )
                .unwrap();
                assert!((e + math::sin(2.0 * t) * math::cos(2.0 * d)).abs() < TOL);
            }
        }
    }

    #[test]
    fn classical_probe_through_channel_stays_below_two() {
        // the loss operator transmits only the v component of the classical
        // probe, so E collapses to (eta/2) cos 2(t+d) and S at the entangled
        // probe's optimal settings is sqrt(2) * eta
        for &eta in &[0.3, 0.7, 1.0] {
            let through = reflectivity_channel(&PolPathState::classical_signal(), eta).unwrap();
            let d = through.diagonal();
            assert!((d[3] - eta / 2.0).abs() < TOL);
            assert!(d[0].abs() < TOL && d[1].abs() < TOL && d[2].abs() < TOL);

            for &t in &ANGLES[..3] {
                for &dd in &ANGLES[..3] {
                    let e = correlation(&through, &SchemeConfig::default(), t, dd).unwrap();
                    assert!((e - 0.5 * eta * math::cos(2.0 * (t + dd))).abs() < TOL);
                }
            }
            let v = chsh_s(&through, &optimal_quad(), &SchemeConfig::default()).unwrap();
            assert!((v.s - SQRT_2 * eta).abs() < TOL);
            assert!(v.s < 2.0);
        }
        // pinned headline number at unit reflectivity
        let through = reflectivity_channel(&PolPathState::classical_signal(), 1.0).unwrap();
        let v = chsh_s(&through, &optimal_quad(), &SchemeConfig::default()).unwrap();
        assert!((v.s - 1.4142135623730951).abs() < TOL);
    }

    #[test]
    fn classical_probe_optimum_depends_on_the_channel() {
        // Without the channel the definite-path probe's correlation is a
        // full-amplitude sinusoid in (t + d) - a single-party expectation in
        // disguise - so cherry-picked settings push the CHSH combination all
        // the way to 2*sqrt(2). This is why a fair baseline comparison must
        // send the classical probe through the same reflectivity channel.
        let raw = PolPathState::classical_signal();
        let best = optimize_angles(&raw, &SchemeConfig::default(), PI / 64.0).unwrap();
        assert!((best.value.s - 2.0 * SQRT_2).abs() < 1e-9);

        // Through the channel the surviving amplitude is eta/2, so even
        // re-optimized settings only reach sqrt(2) * eta < 2.
        for &eta in &[0.6, 1.0] {
            let through = reflectivity_channel(&raw, eta).unwrap();
            let best = optimize_angles(&through, &SchemeConfig::default(), PI / 64.0).unwrap();
            assert!(
                (best.value.s - SQRT_2 * eta).abs() < 1e-9,
                "eta={eta}: {}",
                best.value.s
            );
        }
    }

    #[test]
    fn depolarizing_channel_closed_forms() {
        for &eta in &[0.4, 1.0] {
            let rho = lossy_probe(eta);
            for &p in &[0.0, 0.2, 0.5, 0.75, 1.0] {
                let d = depolarizing_channel(&rho, p).unwrap();
                d.validate().unwrap();
                assert!((d.trace() - rho.trace()).abs() < TOL);

                // populations
                let diag = d.diagonal();
                assert!((diag[0] - 0.5).abs() < TOL);
                assert!((diag[1] - eta * p / 3.0).abs() < TOL);
                assert!(diag[2].abs() < TOL);
                assert!((diag[3] - 0.5 * eta * (1.0 - 2.0 * p / 3.0)).abs() < TOL);

                // signature coherence shrinks linearly and flips sign at 3/4
                let coh = d.entry(BasisLabel::H0, BasisLabel::V1);
                let expected = -0.5 * math::sqrt(eta) * (1.0 - 4.0 * p / 3.0);
                assert!((coh.re - expected).abs() < TOL && coh.im.abs() < TOL);

                // correlation keeps the cos shape with a damped amplitude
                let amp = 0.5 * (1.0 + eta) - 2.0 * p * eta / 3.0;
                for &t in &ANGLES[..4] {
                    let e = correlation(&d, &SchemeConfig::default(), t, 0.1).unwrap();
                    assert!((e - amp * math::cos(2.0 * (t + 0.1))).abs() < TOL);
                }
            }
        }
        assert!(depolarizing_channel(&PolPathState::entangled(), -0.1).is_err());
        assert!(depolarizing_channel(&PolPathState::entangled(), 1.5).is_err());
    }

    #[test]
    fn depolarization_degrades_chsh_linearly() {
        let rho = lossy_probe(0.8);
        let cfg = SchemeConfig::default();
        let mut last = f64::INFINITY;
        for &p in &[0.0, 0.15, 0.3, 0.45, 0.6, 0.75] {
            let d = depolarizing_channel(&rho, p).unwrap();
            let s = chsh_s(&d, &optimal_quad(), &cfg).unwrap().s;
            let expected = 2.0 * SQRT_2 * (0.5 * 1.8 - 2.0 * p * 0.8 / 3.0);
            assert!((s - expected).abs() < TOL, "p={p}");
            assert!(s < last);
            last = s;
        }
    }

    #[test]
    fn visibility_tracks_depolarization() {
        for &eta in &[0.3, 0.7, 1.0] {
            let rho = lossy_probe(eta);
            for &p in &[0.0, 0.1, 0.375, 0.5, 0.75, 0.9, 1.0] {
                let v = visibility(&depolarizing_channel(&rho, p).unwrap()).unwrap();
                let expected = math::abs(1.0 - 4.0 * p / 3.0);
                // independent of eta, V-shaped in p with the zero at 3/4
                assert!((v - expected).abs() < TOL, "eta={eta} p={p}");
            }
        }
        // clean probe: unit visibility
        assert!((visibility(&lossy_probe(0.5)).unwrap() - 1.0).abs() < TOL);
        // unpolarized background: zero visibility
        assert!(visibility(&PolPathState::unpolarized_signal()).unwrap() < TOL);
        // no signal-arm population at all: error, not NaN
        let empty = reflectivity_channel(&PolPathState::entangled(), 0.0).unwrap();
        assert!(matches!(
            visibility(&empty),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn visibility_inverse_round_trips() {
        let rho = lossy_probe(0.6);
        for &target in &[0.0, 0.2, 0.5, 0.8, 1.0] {
            let p = depolarization_for_visibility(target).unwrap();
            assert!((0.0..=0.75).contains(&p));
            let v = visibility(&depolarizing_channel(&rho, p).unwrap()).unwrap();
            assert!((v - target).abs() < TOL);
        }
        assert!(depolarization_for_visibility(-0.1).is_err());
        assert!(depolarization_for_visibility(1.1).is_err());
    }

    #[test]
    fn thermal_mixture_rescales_chsh_linearly() {
        let rho = lossy_probe(0.9);
        let cfg = SchemeConfig::default();
        let s0 = chsh_s(&rho, &optimal_quad(), &cfg).unwrap().s;
        for &q in &[0.0, 0.25, 0.5, 0.9, 1.0] {
            let mixed = thermal_mixture(&rho, q).unwrap();
            mixed.validate().unwrap();
            let s = chsh_s(&mixed, &optimal_quad(), &cfg).unwrap().s;
            assert!((s - (1.0 - q) * s0).abs() < TOL, "q={q}");
        }
        // the background alone is exactly uncorrelated under both receivers
        let noise = PolPathState::unpolarized_signal();
        for &t in &ANGLES[..4] {
            for &d in &ANGLES[..4] {
                let e_ni = correlation(&noise, &SchemeConfig::default(), t, d).unwrap();
                assert!(e_ni.abs() < TOL);
                let e_int = correlation(
                    &noise,
                    &int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial),
                    t,
                    d,
                )
                .unwrap();
                assert!(e_int.abs() < TOL);
            }
        }
    }

    #[test]
    fn per_trial_weights_sum_to_trace_and_post_selected_to_one() {
        let rho = lossy_probe(0.35);
        let after = apply_receiver(&rho, &SchemeConfig::default(), 0.4, 0.9);
        let per_trial = probabilities(&after, Normalization::PerTrial).unwrap();
        assert!((per_trial.sum() - rho.trace()).abs() < TOL);
        let post = probabilities(&after, Normalization::PostSelected).unwrap();
        assert!((post.sum() - 1.0).abs() < TOL);
    }

    #[test]
    fn tsirelson_ceiling_scales_with_trace() {
        // |S| can never exceed 2*sqrt(2) * trace for any state or settings
        let states = [
            lossy_probe(0.1),
            lossy_probe(0.77),
            depolarizing_channel(&lossy_probe(0.5), 0.3).unwrap(),
            thermal_mixture(&lossy_probe(1.0), 0.4).unwrap(),
            reflectivity_channel(&PolPathState::classical_signal(), 0.6).unwrap(),
            PolPathState::maximally_mixed(),
        ];
        let quads = [
            optimal_quad(),
            AngleQuad::new(0.3, 1.2, 2.1, 0.7),
            AngleQuad::new(1.0, 0.0, 0.5, 2.5),
        ];
        for rho in &states {
            let ceiling = 2.0 * SQRT_2 * rho.trace() + 1e-9;
            for quad in &quads {
                for scheme in [Scheme::NonInterferometric, Scheme::Interferometric] {
                    for conv in
                        [WaveplateConvention::Rotation, WaveplateConvention::HwpReflection]
                    {
                        let cfg = SchemeConfig {
                            scheme,
                            convention: conv,
                            normalization: Normalization::PerTrial,
                        };
                        let v = chsh_s(rho, quad, &cfg).unwrap();
                        assert!(v.s <= ceiling, "{scheme:?} {conv:?} s={} tr={}", v.s, rho.trace());
                    }
                }
            }
        }
    }

    #[test]
    fn optimizer_result_lies_on_the_known_maximizer_family() {
        let best = optimize_angles(&PolPathState::entangled(), &SchemeConfig::default(), PI / 64.0)
            .unwrap();
        assert!((best.value.s - 2.0 * SQRT_2).abs() < 1e-9);
        // every maximizer satisfies cos 2(t+d) = +-1/sqrt(2) with the CHSH
        // sign pattern; check the correlation pattern directly
        let e = best.value.correlations;
        let target = 0.5 * SQRT_2;
        assert!((e[0].abs() - target).abs() < 1e-6);
        assert!((e[1].abs() - target).abs() < 1e-6);
        assert!((e[2].abs() - target).abs() < 1e-6);
        assert!((e[3].abs() - target).abs() < 1e-6);
        assert!((math::abs(e[0] - e[1] + e[2] + e[3]) - 2.0 * SQRT_2).abs() < 1e-9);
        // angles come back canonicalized
        for a in [best.quad.theta, best.quad.delta, best.quad.theta_p, best.quad.delta_p] {
            assert!((0.0..PI).contains(&a));
        }
    }

    #[test]
    fn optimizer_is_deterministic() {
        let rho = depolarizing_channel(&lossy_probe(0.6), 0.2).unwrap();
        let cfg = int_cfg(WaveplateConvention::Rotation, Normalization::PerTrial);
        let a = optimize_angles(&rho, &cfg, PI / 32.0).unwrap();
        let b = optimize_angles(&rho, &cfg, PI / 32.0).unwrap();
        assert_eq!(a.quad, b.quad);
        assert_eq!(a.value.s, b.value.s);
    }

    #[test]
    fn optimizer_rejects_bad_inputs() {
        let rho = PolPathState::entangled();
        assert!(optimize_angles(&rho, &SchemeConfig::default(), 0.0).is_err());
        assert!(optimize_angles(&rho, &SchemeConfig::default(), f64::NAN).is_err());
        assert!(optimize_angles(&rho, &SchemeConfig::default(), PI).is_err());

        // post-selection on a state with no population is refused up front
        let empty = reflectivity_channel(&PolPathState::classical_signal(), 0.0).unwrap();
        let cfg = ni_cfg(WaveplateConvention::Rotation, Normalization::PostSelected);
        assert!(matches!(
            optimize_angles(&empty, &cfg, PI / 16.0),
            Err(Error::DegenerateState(_))
        ));
    }

    #[test]
    fn quad_canonicalization_wraps_into_zero_pi() {
        let quad = AngleQuad::new(-FRAC_PI_4, PI + 0.1, 7.0, -0.001);
        let c = quad.canonicalized();
        for a in [c.theta, c.delta, c.theta_p, c.delta_p] {
            assert!((0.0..PI).contains(&a));
        }
        // canonicalization never changes the physics
        let rho = lossy_probe(0.5);
        let cfg = SchemeConfig::default();
        let before = chsh_s(&rho, &quad, &cfg).unwrap();
        let after = chsh_s(&rho, &c, &cfg).unwrap();
        assert!((before.s - after.s).abs() < 1e-10);

        assert!(AngleQuad::new(f64::NAN, 0.0, 0.0, 0.0).validate().is_err());
        assert!(AngleQuad::new(0.0, f64::INFINITY, 0.0, 0.0).validate().is_err());
    }
}
