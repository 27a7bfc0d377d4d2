//! Flag surface: subcommands, shared options, and the mappings from flag
//! literals to the core enums.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qi_core::photonsim::Denominator;
use qi_core::protocol::{Normalization, Scheme, WaveplateConvention};

use crate::emit::Format;
use crate::sweep::Engine;

#[derive(Debug, Parser)]
#[command(
    name = "qicli",
    version,
    about = "CHSH sweeps, angle audits, Monte Carlo runs, and time-tag replay \
             for a polarization-path quantum-illumination simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the object reflectivity and report the CHSH value per point
    SweepEta(SweepArgs),
    /// Sweep the signal fraction under a background flood (reflectivity fixed)
    SweepNoise(SweepArgs),
    /// Sweep the polarization visibility via a depolarizing return path
    SweepVisibility(SweepArgs),
    /// Evaluate the reference setting quad against the optimizer's choice
    /// across plate conventions and normalizations
    AngleAudit(AuditArgs),
    /// Run one simulated experiment at the configured parameters
    McRun(McRunArgs),
    /// Recount externally recorded time-tag files (one per CHSH setting)
    Replay(ReplayArgs),
}

/// Options shared by every subcommand. Flags override config-file values,
/// which override the built-in defaults.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Receiver layout: direct path readout (ni) or path interferometer (int)
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,

    /// What a plate angle does to polarization: a rotation by the angle, or
    /// a half-wave-style reflection about it
    #[arg(long, value_enum)]
    pub convention: Option<ConventionArg>,

    /// Probability normalization: per emitted pair, or per detected photon
    #[arg(long, value_enum)]
    pub normalization: Option<NormalizationArg>,

    /// Denominator for Monte Carlo probability estimates
    #[arg(long, value_enum)]
    pub denominator: Option<DenominatorArg>,

    /// Root seed; every stochastic quantity derives from it
    #[arg(long)]
    pub seed: Option<u64>,

    /// Output file (stdout when omitted); written atomically
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Output format
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,

    /// Flat `key = value` config file; unknown keys are rejected
    #[arg(long)]
    pub config: Option<PathBuf>,

    /// Entangled-pair emission rate, pairs/s
    #[arg(long)]
    pub pair_rate: Option<f64>,

    /// Background rate entering through the object port, photons/s
    #[arg(long)]
    pub noise_rate: Option<f64>,

    /// Acquisition time per setting, seconds
    #[arg(long)]
    pub duration: Option<f64>,

    /// Full coincidence-window width, seconds
    #[arg(long)]
    pub coincidence_window: Option<f64>,

    /// Object reflectivity in [0, 1]
    #[arg(long)]
    pub eta: Option<f64>,

    /// Depolarization strength of the return path in [0, 1]
    #[arg(long)]
    pub depolarization_p: Option<f64>,

    /// First unprimed plate angle, radians
    #[arg(long)]
    pub theta: Option<f64>,

    /// Second unprimed plate angle, radians
    #[arg(long)]
    pub delta: Option<f64>,

    /// First primed plate angle, radians
    #[arg(long)]
    pub theta_p: Option<f64>,

    /// Second primed plate angle, radians
    #[arg(long)]
    pub delta_p: Option<f64>,

    /// Herald-arm detection probability in [0, 1]
    #[arg(long)]
    pub herald_efficiency: Option<f64>,

    /// Outcome-detector detection probability in [0, 1]
    #[arg(long)]
    pub signal_efficiency: Option<f64>,
}

/// Sweep-shaped subcommands: a grid of values plus engine selection.
#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Comma-separated sweep values (reflectivities, signal fractions, or
    /// visibilities depending on the subcommand); must be monotone
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid: Option<Vec<f64>>,

    /// Which rows to compute per grid value
    #[arg(long, value_enum)]
    pub engine: Option<EngineArg>,

    /// Monte Carlo repeats per grid value (ignored by analytic rows)
    #[arg(long, default_value_t = 20)]
    pub repeats: u32,

    /// Optimizer grid resolution, radians
    #[arg(long, default_value_t = std::f64::consts::PI / 32.0)]
    pub resolution: f64,

    /// Evaluate analytic rows at the configured quad instead of optimizing
    #[arg(long)]
    pub fixed_quad: bool,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Comma-separated reflectivities to audit at
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub grid: Option<Vec<f64>>,

    /// Optimizer grid resolution, radians
    #[arg(long, default_value_t = std::f64::consts::PI / 32.0)]
    pub resolution: f64,
}

#[derive(Debug, Args)]
pub struct McRunArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Independent repeats of the four-setting acquisition
    #[arg(long, default_value_t = 20)]
    pub repeats: u32,

    /// Error-bar model: spread over repeats, or propagated counting error
    #[arg(long, value_enum, default_value_t = SigmaArg::Sample)]
    pub sigma: SigmaArg,

    /// Also write the repeat-0 event streams as `<PREFIX>-s1..4.tags`
    #[arg(long, value_name = "PREFIX")]
    pub export_tags: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Four time-tag files, one per CHSH setting in `(t,d), (t,d'), (t',d),
    /// (t',d')` order; lines are `detector_id<TAB>timestamp_ns`, sorted
    #[arg(num_args = 4, value_name = "TAGS")]
    pub tags: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Ni,
    Int,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Rotation,
    Hwp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormalizationArg {
    PerTrial,
    PostSelected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DenominatorArg {
    Heralds,
    Detected,
    PaperSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Analytic,
    Montecarlo,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaArg {
    Sample,
    Poisson,
}

impl From<SchemeArg> for Scheme {
    fn from(v: SchemeArg) -> Self {
        match v {
            SchemeArg::Ni => Scheme::NonInterferometric,
            SchemeArg::Int => Scheme::Interferometric,
        }
    }
}

impl From<ConventionArg> for WaveplateConvention {
    fn from(v: ConventionArg) -> Self {
        match v {
            ConventionArg::Rotation => WaveplateConvention::Rotation,
            ConventionArg::Hwp => WaveplateConvention::HwpReflection,
        }
    }
}

impl From<NormalizationArg> for Normalization {
    fn from(v: NormalizationArg) -> Self {
        match v {
            NormalizationArg::PerTrial => Normalization::PerTrial,
            NormalizationArg::PostSelected => Normalization::PostSelected,
        }
    }
}

impl From<DenominatorArg> for Denominator {
    fn from(v: DenominatorArg) -> Self {
        match v {
            DenominatorArg::Heralds => Denominator::Heralds,
            DenominatorArg::Detected => Denominator::Detected,
            DenominatorArg::PaperSum => Denominator::HeraldsPlusDetected,
        }
    }
}

impl From<FormatArg> for Format {
    fn from(v: FormatArg) -> Self {
        match v {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

impl From<EngineArg> for Engine {
    fn from(v: EngineArg) -> Self {
        match v {
            EngineArg::Analytic => Engine::Analytic,
            EngineArg::Montecarlo => Engine::Montecarlo,
            EngineArg::Both => Engine::Both,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flag_literals_match_the_interface_contract() {
        let cli = Cli::try_parse_from([
            "qicli",
            "sweep-eta",
            "--scheme",
            "ni",
            "--convention",
            "rotation",
            "--normalization",
            "per-trial",
            "--denominator",
            "paper-sum",
            "--seed",
            "7",
            "--format",
            "json",
        ])
        .unwrap();
        let Command::SweepEta(args) = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(args.common.scheme, Some(SchemeArg::Ni));
        assert_eq!(args.common.convention, Some(ConventionArg::Rotation));
        assert_eq!(args.common.normalization, Some(NormalizationArg::PerTrial));
        assert_eq!(args.common.denominator, Some(DenominatorArg::PaperSum));
        assert_eq!(args.common.seed, Some(7));
        assert_eq!(args.common.format, FormatArg::Json);

        for (cmd, ok) in [
            ("per-trial", true),
            ("post-selected", true),
            ("per_trial", false),
            ("postselected", false),
        ] {
            let r = Cli::try_parse_from(["qicli", "mc-run", "--normalization", cmd]);
            assert_eq!(r.is_ok(), ok, "--normalization {cmd}");
        }
        assert!(Cli::try_parse_from(["qicli", "sweep-eta", "--denominator", "papersum"]).is_err());
    }

    #[test]
    fn grids_parse_as_comma_lists() {
        let cli = Cli::try_parse_from(["qicli", "sweep-noise", "--grid", "1.0,0.5,0.02"]).unwrap();
        let Command::SweepNoise(args) = cli.command else {
            panic!("wrong subcommand");
        };
        assert_eq!(args.grid, Some(vec![1.0, 0.5, 0.02]));
    }
}
