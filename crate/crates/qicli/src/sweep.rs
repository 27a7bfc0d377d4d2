//! Sweep orchestration: a validated grid of parameter values is turned into
//! one output row per value (and per engine), all in grid order.

use anyhow::{bail, Result};
use qi_core::photonsim::{
    estimate_s, signal_fraction_to_noise_rate, Denominator, ExperimentConfig,
};
use qi_core::protocol::{
    chsh_s, depolarization_for_visibility, optimize_angles, thermal_mixture, AngleQuad,
    Normalization, Scheme, SchemeConfig, WaveplateConvention,
};
use serde::Serialize;

use crate::audit;

/// What is being swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Object reflectivity in [0, 1].
    Eta,
    /// Signal fraction in (0, 1]: the share of object-port detections that
    /// is returned signal rather than background.
    Noise,
    /// Polarization visibility in [0, 1], realized by a depolarizing
    /// return path.
    Visibility,
    /// Reflectivities at which the reference quad is compared with the
    /// optimizer's.
    AngleAudit,
}

impl SweepKind {
    fn value_name(self) -> &'static str {
        match self {
            SweepKind::Eta => "reflectivity",
            SweepKind::Noise => "signal fraction",
            SweepKind::Visibility => "visibility",
            SweepKind::AngleAudit => "reflectivity",
        }
    }

    fn domain(self) -> (f64, f64, &'static str) {
        match self {
            SweepKind::Noise => (f64::MIN_POSITIVE, 1.0, "(0, 1]"),
            _ => (0.0, 1.0, "[0, 1]"),
        }
    }

    /// The grid used when none is given on the command line.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepKind::Eta => (0..=10).map(|i| f64::from(i) / 10.0).collect(),
            SweepKind::Noise => vec![1.0, 0.5, 0.1, 0.05, 0.03, 0.02],
            SweepKind::Visibility => vec![1.0, 0.8, 0.6, 0.4, 0.2],
            SweepKind::AngleAudit => vec![1.0, 0.7, 0.3],
        }
    }

    /// The engine used when none is given on the command line.
    pub fn default_engine(self) -> Engine {
        match self {
            SweepKind::Noise => Engine::Montecarlo,
            _ => Engine::Analytic,
        }
    }
}

/// Which rows to compute per grid value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Montecarlo,
    Both,
}

impl Engine {
    pub fn wants_analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn wants_montecarlo(self) -> bool {
        matches!(self, Engine::Montecarlo | Engine::Both)
    }
}

/// A fully specified sweep; [`run_sweep`] validates it before any work.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    pub base: ExperimentConfig,
    pub engine: Engine,
    /// Monte Carlo repeats per grid value.
    pub repeats: u32,
    /// Optimizer grid resolution, radians.
    pub resolution: f64,
    pub denominator: Denominator,
    /// Evaluate analytic rows at `base.quad` instead of optimizing.
    pub fixed_quad: bool,
}

/// One output row. Every row restates the full receiver configuration so
/// no number in the file is ambiguous.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub sweep_kind: String,
    pub sweep_value: f64,
    pub scheme: &'static str,
    pub convention: &'static str,
    pub normalization: &'static str,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "S_sigma")]
    pub s_sigma: f64,
    pub theta: f64,
    pub delta: f64,
    pub theta_p: f64,
    pub delta_p: f64,
    #[serde(rename = "E1")]
    pub e1: f64,
    #[serde(rename = "E2")]
    pub e2: f64,
    #[serde(rename = "E3")]
    pub e3: f64,
    #[serde(rename = "E4")]
    pub e4: f64,
    pub seed: u64,
}

impl SweepRow {
    pub(crate) fn new(
        sweep_kind: impl Into<String>,
        sweep_value: f64,
        cfg: &SchemeConfig,
        s: f64,
        s_sigma: f64,
        quad: &AngleQuad,
        correlations: [f64; 4],
        seed: u64,
    ) -> Self {
        SweepRow {
            sweep_kind: sweep_kind.into(),
            sweep_value,
            scheme: scheme_label(cfg.scheme),
            convention: convention_label(cfg.convention),
            normalization: normalization_label(cfg.normalization),
            s,
            s_sigma,
            theta: quad.theta,
            delta: quad.delta,
            theta_p: quad.theta_p,
            delta_p: quad.delta_p,
            e1: correlations[0],
            e2: correlations[1],
            e3: correlations[2],
            e4: correlations[3],
            seed,
        }
    }
}

pub fn scheme_label(s: Scheme) -> &'static str {
    match s {
        Scheme::NonInterferometric => "ni",
        Scheme::Interferometric => "int",
    }
}

pub fn convention_label(c: WaveplateConvention) -> &'static str {
    match c {
        WaveplateConvention::Rotation => "rotation",
        WaveplateConvention::HwpReflection => "hwp",
    }
}

pub fn normalization_label(n: Normalization) -> &'static str {
    match n {
        Normalization::PerTrial => "per-trial",
        Normalization::PostSelected => "post-selected",
    }
}

/// Rows plus human-readable commentary (printed to stderr, never mixed
/// into the data).
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub notes: Vec<String>,
}

fn validate_spec(spec: &SweepSpec) -> Result<()> {
    spec.base.validate()?;
    if spec.grid.is_empty() {
        bail!("sweep grid is empty");
    }
    let (lo, hi, desc) = spec.kind.domain();
    for &v in &spec.grid {
        if !v.is_finite() || v < lo || v > hi {
            bail!("{} {v} is outside {desc}", spec.kind.value_name());
        }
    }
    let increasing = spec.grid.windows(2).all(|w| w[0] < w[1]);
    let decreasing = spec.grid.windows(2).all(|w| w[0] > w[1]);
    if spec.grid.len() > 1 && !increasing && !decreasing {
        bail!("sweep grid must be strictly monotone");
    }
    if spec.engine.wants_montecarlo() {
        if spec.kind == SweepKind::AngleAudit {
            bail!("the angle audit is analytic; drop the Monte Carlo engine");
        }
        if spec.repeats == 0 {
            bail!("repeats must be at least 1");
        }
    }
    if spec.engine.wants_analytic() && !spec.fixed_quad {
        let (rlo, rhi) = (std::f64::consts::PI / 128.0, std::f64::consts::PI / 4.0);
        if !(spec.resolution >= rlo && spec.resolution <= rhi) {
            bail!("resolution {} is outside [{rlo:.6}, {rhi:.6}]", spec.resolution);
        }
    }
    Ok(())
}

/// Runs the sweep: one row per grid value and engine, in grid order with
/// the analytic row (when both engines run) first.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    validate_spec(spec)?;
    if spec.kind == SweepKind::AngleAudit {
        return audit::run_audit(spec);
    }

    let mut rows = Vec::new();
    let mut notes = Vec::new();

    if spec.kind == SweepKind::Noise && spec.engine.wants_analytic() {
        notes.push(
            "analytic noise rows mix an unpolarized signal-path term into the state \
             (weight 1 - fraction); Monte Carlo rows flood the detectors with Poisson \
             background instead, so the two models agree only at fraction 1"
                .to_owned(),
        );
    }

    for &value in &spec.grid {
        if spec.engine.wants_analytic() {
            rows.push(analytic_row(spec, value)?);
        }
        if spec.engine.wants_montecarlo() {
            let (row, note) = montecarlo_row(spec, value)?;
            rows.push(row);
            if let Some(note) = note {
                notes.push(note);
            }
        }
    }

    if spec.kind == SweepKind::Eta && spec.engine.wants_analytic() {
        notes.push(eta_report(spec)?);
    }

    Ok(SweepOutput { rows, notes })
}

/// The channel state an analytic row evaluates, for a given sweep value.
fn analytic_state(spec: &SweepSpec, value: f64) -> Result<qi_core::state::PolPathState> {
    let mut cfg = spec.base;
    match spec.kind {
        SweepKind::Eta | SweepKind::AngleAudit => {
            cfg.eta = value;
            Ok(cfg.channel_state()?)
        }
        SweepKind::Noise => {
            let state = cfg.channel_state()?;
            Ok(thermal_mixture(&state, 1.0 - value)?)
        }
        SweepKind::Visibility => {
            cfg.depolarization_p = depolarization_for_visibility(value)?;
            Ok(cfg.channel_state()?)
        }
    }
}

fn kind_tag(kind: SweepKind, engine_tag: &str) -> String {
    let base = match kind {
        SweepKind::Eta => "eta",
        SweepKind::Noise => "noise",
        SweepKind::Visibility => "visibility",
        SweepKind::AngleAudit => "angle-audit",
    };
    format!("{base}:{engine_tag}")
}

fn analytic_row(spec: &SweepSpec, value: f64) -> Result<SweepRow> {
    let state = analytic_state(spec, value)?;
    let scheme = spec.base.scheme;
    let (quad, chsh) = if spec.fixed_quad {
        (spec.base.quad, chsh_s(&state, &spec.base.quad, &scheme)?)
    } else {
        let opt = optimize_angles(&state, &scheme, spec.resolution)?;
        (opt.quad, opt.value)
    };
    Ok(SweepRow::new(
        kind_tag(spec.kind, "analytic"),
        value,
        &scheme,
        chsh.s,
        0.0,
        &quad,
        chsh.correlations,
        spec.base.seed,
    ))
}

fn montecarlo_row(spec: &SweepSpec, value: f64) -> Result<(SweepRow, Option<String>)> {
    let mut cfg = spec.base;
    let mut note = None;
    match spec.kind {
        SweepKind::Eta => cfg.eta = value,
        SweepKind::Noise => {
            let cal = signal_fraction_to_noise_rate(&cfg, value)?;
            cfg.noise_rate = cal.noise_rate;
            note = Some(if cal.noise_rate == 0.0 {
                format!("signal fraction {value:.4}: no background (SNR infinite)")
            } else {
                format!(
                    "signal fraction {value:.4}: SNR {:.4} ({:+.2} dB), background {:.6e}/s",
                    cal.snr, cal.snr_db, cal.noise_rate
                )
            });
        }
        SweepKind::Visibility => cfg.depolarization_p = depolarization_for_visibility(value)?,
        SweepKind::AngleAudit => unreachable!("audit rows are built in the audit module"),
    }
    let est = estimate_s(&cfg, spec.repeats, spec.denominator)?;
    let row = SweepRow::new(
        kind_tag(spec.kind, "mc"),
        value,
        &cfg.scheme,
        est.s,
        est.s_sigma,
        &cfg.quad,
        est.correlations,
        cfg.seed,
    );
    Ok((row, note))
}

/// Where the analytic per-trial curve crosses the classical bound S = 2,
/// found by bisection on the same optimizer the rows use. `None` when the
/// curve does not cross inside [0, 1].
pub fn eta_crossing(spec: &SweepSpec) -> Result<Option<f64>> {
    let s_at = |eta: f64| -> Result<f64> { Ok(analytic_row(spec, eta)?.s) };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let f_lo = s_at(lo)? - 2.0;
    let f_hi = s_at(hi)? - 2.0;
    if f_lo == 0.0 {
        return Ok(Some(lo));
    }
    if f_hi == 0.0 {
        return Ok(Some(hi));
    }
    if f_lo * f_hi > 0.0 {
        return Ok(None);
    }
    for _ in 0..25 {
        let mid = 0.5 * (lo + hi);
        let f_mid = s_at(mid)? - 2.0;
        if f_mid == 0.0 {
            return Ok(Some(mid));
        }
        if f_lo * f_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// The normalization commentary attached to every analytic reflectivity
/// sweep: per-trial is the reading that decays with loss.
fn eta_report(spec: &SweepSpec) -> Result<String> {
    match spec.base.scheme.normalization {
        Normalization::PerTrial => match eta_crossing(spec)? {
            Some(eta) => Ok(format!(
                "per-trial normalization is the loss-sensitive reading: \
                 S decreases toward low reflectivity and crosses 2 at eta = {eta:.4}"
            )),
            None => Ok(
                "per-trial normalization is the loss-sensitive reading, but S does not \
                 cross 2 inside [0, 1] for this configuration"
                    .to_owned(),
            ),
        },
        Normalization::PostSelected => Ok(
            "post-selected normalization discards lost trials, so S is \
             reflectivity-independent; rerun with --normalization per-trial for the \
             loss-sensitive curve"
                .to_owned(),
        ),
    }
}
