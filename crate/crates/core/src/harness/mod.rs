//! Experiment drivers behind the `sparsedom` command line tool.
//!
//! Each driver takes an [`ExperimentConfig`], evaluates its trials in
//! parallel (results are collected in trial order, so output does not depend
//! on the thread count) and returns a [`Report`] whose acceptance flags decide
//! the exit status.

pub mod config;
pub mod corpus;
mod domination;
mod modular;
mod norm;
pub mod report;
mod tables;

use crate::error::{Error, Result};
use crate::grid::Domain;

pub use config::{ExperimentConfig, ExperimentKind};
pub use domination::run_domination;
pub use modular::run_modular_bound;
pub use norm::{run_median_bound, run_norm_bound};
pub use report::{Report, Row, Summary};
pub use tables::{run_hp_comparison, run_weight_table, run_young_kit};

pub fn run(kind: ExperimentKind, cfg: &ExperimentConfig) -> Result<Report> {
    if let Some(k) = cfg.kind {
        if k != kind {
            return Err(Error::Config(format!(
                "kind: config describes a {:?} run but {:?} was requested",
                k.name(),
                kind.name()
            )));
        }
    }
    match kind {
        ExperimentKind::Domination => run_domination(cfg),
        ExperimentKind::Norm => run_norm_bound(cfg),
        ExperimentKind::Modular => run_modular_bound(cfg),
        ExperimentKind::Median => run_median_bound(cfg),
        ExperimentKind::HpCompare => run_hp_comparison(cfg),
        ExperimentKind::Weights => run_weight_table(cfg),
        ExperimentKind::Young => run_young_kit(cfg),
    }
}

/// The configured resolution and the next finer one.
fn resolutions(cfg: &ExperimentConfig) -> Result<[Domain; 2]> {
    let d = cfg.domain()?;
    Ok([d, d.with_level(d.level() + 1)?])
}

/// Fails with the trial digest when a row carries a non-finite value.
fn ensure_finite(row: &Row, digest: &str) -> Result<()> {
    for (what, v) in [("lhs", row.lhs), ("rhs", row.rhs), ("ratio", row.ratio)] {
        if !v.is_finite() {
            return Err(Error::Numerical {
                trial: row.trial,
                digest: digest.to_string(),
                reason: format!("{what} = {v} ({})", row.notes),
            });
        }
    }
    Ok(())
}

/// Attaches the trial index and digest to numerical errors raised inside it.
fn in_trial(trial: usize, digest: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::NonFinite { .. } | Error::ConjugateUnbracketed { .. } => Error::Numerical {
            trial,
            digest: digest.to_string(),
            reason: e.to_string(),
        },
        e => e,
    }
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}
