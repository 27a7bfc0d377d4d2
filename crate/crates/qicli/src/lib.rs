//! Command-line front end for the quantum-illumination simulator: parameter
//! sweeps, an angle audit, Monte Carlo runs with time-tag export, and replay
//! of recorded tag files. All data goes to stdout or `--out` as CSV/JSON;
//! commentary goes to stderr.

pub mod audit;
pub mod cli;
pub mod config;
pub mod emit;
pub mod sweep;
pub mod tagfile;

use std::path::PathBuf;

use anyhow::{bail, Result};
use qi_core::photonsim::{
    count_coincidences, estimate_probabilities, estimate_s, generate_events_at,
    poisson_correlation_sigma, sub_seed, CoincidenceTable, Denominator,
};

use cli::{AuditArgs, Cli, Command, McRunArgs, ReplayArgs, SigmaArg, SweepArgs};
use sweep::{Engine, SweepKind, SweepOutput, SweepRow, SweepSpec};

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SweepEta(args) => parameter_sweep(SweepKind::Eta, args),
        Command::SweepNoise(args) => parameter_sweep(SweepKind::Noise, args),
        Command::SweepVisibility(args) => parameter_sweep(SweepKind::Visibility, args),
        Command::AngleAudit(args) => angle_audit(args),
        Command::McRun(args) => mc_run(args),
        Command::Replay(args) => replay(args),
    }
}

fn finish(output: SweepOutput, common: &cli::CommonArgs) -> Result<()> {
    for note in &output.notes {
        eprintln!("{note}");
    }
    emit::emit(&output.rows, common.format.into(), common.out.as_deref())
}

fn parameter_sweep(kind: SweepKind, args: SweepArgs) -> Result<()> {
    let resolved = config::resolve(&args.common)?;
    let spec = SweepSpec {
        kind,
        grid: args.grid.unwrap_or_else(|| kind.default_grid()),
        base: resolved.cfg,
        engine: args
            .engine
            .map(Engine::from)
            .unwrap_or_else(|| kind.default_engine()),
        repeats: args.repeats,
        resolution: args.resolution,
        denominator: resolved.denominator,
        fixed_quad: args.fixed_quad,
    };
    finish(sweep::run_sweep(&spec)?, &args.common)
}

fn angle_audit(args: AuditArgs) -> Result<()> {
    let resolved = config::resolve(&args.common)?;
    let spec = SweepSpec {
        kind: SweepKind::AngleAudit,
        grid: args
            .grid
            .unwrap_or_else(|| SweepKind::AngleAudit.default_grid()),
        base: resolved.cfg,
        engine: Engine::Analytic,
        repeats: 1,
        resolution: args.resolution,
        denominator: resolved.denominator,
        fixed_quad: false,
    };
    finish(sweep::run_sweep(&spec)?, &args.common)
}

fn mc_run(args: McRunArgs) -> Result<()> {
    let resolved = config::resolve(&args.common)?;
    let cfg = resolved.cfg;
    let est = estimate_s(&cfg, args.repeats, resolved.denominator)?;

    let mut notes = Vec::new();
    let s_sigma = match args.sigma {
        SigmaArg::Sample => {
            if est.sigma_degenerate {
                notes.push(
                    "single repeat: the sample sigma is zero by construction; \
                     rerun with --sigma poisson or --repeats > 1"
                        .to_owned(),
                );
            }
            est.s_sigma
        }
        SigmaArg::Poisson => {
            notes.push(
                "poisson sigma: counting error propagated through the pooled \
                 coincidence counts of all repeats"
                    .to_owned(),
            );
            pooled_poisson_sigma(&est.tables, resolved.denominator)?
        }
    };

    if let Some(prefix) = &args.export_tags {
        for setting in 0..4 {
            let streams = generate_events_at(&cfg, setting, sub_seed(cfg.seed, setting as u32, 0))?;
            let path = tag_path(prefix, setting);
            tagfile::export_streams(&streams, &path)?;
            let clicks: usize = streams.iter().map(Vec::len).sum();
            notes.push(format!(
                "wrote {} ({} clicks, setting {} of the first repeat)",
                path.display(),
                clicks,
                setting + 1
            ));
        }
    }

    let row = SweepRow::new(
        "mc-run",
        cfg.eta,
        &cfg.scheme,
        est.s,
        s_sigma,
        &cfg.quad,
        est.correlations,
        cfg.seed,
    );
    finish(
        SweepOutput {
            rows: vec![row],
            notes,
        },
        &args.common,
    )
}

fn replay(args: ReplayArgs) -> Result<()> {
    if args.tags.len() != 4 {
        bail!("replay wants exactly four tag files, one per CHSH setting");
    }
    let resolved = config::resolve(&args.common)?;
    let cfg = resolved.cfg;

    let mut notes = Vec::new();
    let mut correlations = [0.0f64; 4];
    let mut tables: Vec<CoincidenceTable> = Vec::with_capacity(4);
    for (setting, path) in args.tags.iter().enumerate() {
        let streams = tagfile::import_streams(path)?;
        let table = count_coincidences(&streams, cfg.coincidence_window)?;
        let probs = estimate_probabilities(&table, resolved.denominator)?;
        correlations[setting] = probs.correlation();
        notes.push(format!(
            "{}: {} heralds, {} coincidences, E = {:+.6}",
            path.display(),
            table.heralds,
            table.detected(),
            correlations[setting]
        ));
        tables.push(table);
    }
    let tables: [CoincidenceTable; 4] = tables.try_into().expect("four settings");

    let s = (correlations[0] - correlations[1] + correlations[2] + correlations[3]).abs();
    let s_sigma = pooled_poisson_sigma(&tables, resolved.denominator)?;

    let row = SweepRow::new(
        "replay",
        cfg.coincidence_window,
        &cfg.scheme,
        s,
        s_sigma,
        &cfg.quad,
        correlations,
        cfg.seed,
    );
    finish(
        SweepOutput {
            rows: vec![row],
            notes,
        },
        &args.common,
    )
}

/// Counting error of `S`: the four settings are independent acquisitions,
/// so their correlation variances add.
fn pooled_poisson_sigma(
    tables: &[CoincidenceTable; 4],
    denominator: Denominator,
) -> Result<f64> {
    let mut var = 0.0;
    for table in tables {
        let sigma = poisson_correlation_sigma(table, denominator)?;
        var += sigma * sigma;
    }
    Ok(var.sqrt())
}

/// `prefix` plus `-s<n>.tags`, e.g. `runs/day1` becomes `runs/day1-s3.tags`.
fn tag_path(prefix: &PathBuf, setting: usize) -> PathBuf {
    let mut name = prefix.clone().into_os_string();
    name.push(format!("-s{}.tags", setting + 1));
    PathBuf::from(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tag_paths_append_the_setting_suffix() {
        let prefix = PathBuf::from("runs/day1");
        assert_eq!(tag_path(&prefix, 0), PathBuf::from("runs/day1-s1.tags"));
        assert_eq!(tag_path(&prefix, 3), PathBuf::from("runs/day1-s4.tags"));
    }

    #[test]
    fn poisson_sigmas_add_in_quadrature_across_settings() {
        let table = CoincidenceTable {
            pairs: [10, 20, 30, 40],
            singles: [0; 5],
            heralds: 1000,
        };
        let single = poisson_correlation_sigma(&table, Denominator::Heralds).unwrap();
        let pooled =
            pooled_poisson_sigma(&[table, table, table, table], Denominator::Heralds).unwrap();
        assert!((pooled - 2.0 * single).abs() < 1e-15);
    }
}
