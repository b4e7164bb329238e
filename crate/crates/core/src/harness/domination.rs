use rayon::prelude::*;

use super::corpus::{hilbert_maximal, trial, Trial};
use super::report::{drift, Row, SummaryBuilder};
use super::{ensure_finite, in_trial, max_of, resolutions, ExperimentConfig, Report};
use crate::error::Result;
use crate::grid::{median, shifted_grids, Domain, DyadicGrid, GridFunction};
use crate::operators::{best_maximal, shifted_sparse_operator, Hilbert, Kernel};
use crate::sparse::{build_grid_families, SparseFamily};

/// Floor added to the dominating function so that `0/0` reads as 0.
pub const DOMINATION_FLOOR: f64 = 1e-12;

/// Stopping threshold of the sparse families.
pub const STOPPING_THRESHOLD: f64 = 2.0;

/// Smallest `m` with `2^m` times the smallest family cube covering the
/// domain, plus 2.
pub fn default_mmax(families: &[SparseFamily], cells: usize) -> u32 {
    let smallest = families
        .iter()
        .map(|f| f.smallest_width())
        .min()
        .unwrap_or(cells)
        .max(1);
    let mut m = 0;
    while (smallest << m) < cells {
        m += 1;
    }
    m + 2
}

/// Sparse families of `f` over every top cube of all three grids.
pub fn all_families(f: &GridFunction) -> Result<Vec<SparseFamily>> {
    let mut out = Vec::new();
    for g in shifted_grids(*f.domain()) {
        out.extend(build_grid_families(f, &g, STOPPING_THRESHOLD)?);
    }
    Ok(out)
}

/// `M f + Σ_S Σ_{m ≤ mmax} 2^{-mδ} T_{S,m}|f| + floor`, cell by cell.
pub fn dominating_function(f: &GridFunction, families: &[SparseFamily], mmax: u32, delta: f64) -> Vec<f64> {
    let abs = f.abs();
    let mut out = best_maximal(f).into_values();
    for fam in families {
        for m in 0..=mmax {
            let scale = 2f64.powf(-(m as f64) * delta);
            for (o, v) in out.iter_mut().zip(shifted_sparse_operator(&abs, fam, m).values()) {
                *o += scale * v;
            }
        }
    }
    for o in &mut out {
        *o += DOMINATION_FLOOR;
    }
    out
}

struct Outcome {
    row: Row,
    without_median: f64,
}

fn domination_trial(t: &Trial, cfg: &ExperimentConfig, domain: &Domain) -> Result<Outcome> {
    let kernel = Hilbert;
    let tf = hilbert_maximal(&t.f);
    let root = DyadicGrid::standard(*domain).cube(0, 0);
    let m0 = median(&tf, &root);
    let families = all_families(&t.f)?;
    let mmax = cfg.mmax.unwrap_or_else(|| default_mmax(&families, domain.cells()));
    let den = dominating_function(&t.f, &families, mmax, kernel.smoothness());
    let (mut best, mut at) = (f64::NEG_INFINITY, 0);
    let mut without_median: f64 = 0.0;
    for (i, (v, d)) in tf.values().iter().zip(&den).enumerate() {
        let r = (v - m0).abs() / d;
        if r > best {
            best = r;
            at = i;
        }
        without_median = without_median.max(v.abs() / d);
    }
    let notes = format!(
        "J={} {} digest={} families={} mmax={} x={}",
        domain.level(),
        t.shape.label(),
        t.digest,
        families.len(),
        mmax,
        domain.midpoint(at)
    );
    let row = Row {
        trial: t.index,
        lhs: (tf.values()[at] - m0).abs(),
        rhs: den[at],
        ratio: best,
        notes,
    };
    ensure_finite(&row, &t.digest)?;
    Ok(Outcome { row, without_median })
}

/// Pointwise sparse domination: for every trial `f`,
/// `R(f) = sup_x |T**f(x) - m_{Q₀}(T**f)| / (M f + Σ_S Σ_m 2^{-mδ} T_{S,m}|f| + 1e-12)`
/// with families over all three grids, at `J` and `J + 1`.
pub fn run_domination(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rows = Vec::new();
    let mut maxima = Vec::new();
    let mut median_helps = 0usize;
    let mut median_hurts = 0usize;
    for domain in resolutions(cfg)? {
        let outcomes: Vec<Outcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|i| {
                let t = trial(domain, cfg.seed, i);
                domination_trial(&t, cfg, &domain).map_err(in_trial(i, &t.digest))
            })
            .collect::<Result<_>>()?;
        maxima.push(max_of(outcomes.iter().map(|o| o.row.ratio)));
        for o in outcomes {
            if o.without_median >= o.row.ratio {
                median_helps += 1;
            } else {
                median_hurts += 1;
            }
            rows.push(o.row);
        }
    }
    let d = drift(maxima[0], maxima[1]);
    let mut summary = SummaryBuilder::default();
    summary
        .set("kernel", Hilbert.name())
        .set("J", cfg.domain.level)
        .set("max_ratio_next_J", maxima[1])
        .set("resolution_drift", d)
        .set("median_subtraction_not_larger", median_helps)
        .set("median_subtraction_larger", median_hurts);
    summary.flag("finite", maxima.iter().all(|m| m.is_finite()));
    if cfg.acceptance.check_drift {
        summary.flag("resolution_drift", d <= cfg.acceptance.drift);
    }
    Ok(Report {
        experiment: "domination".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(maxima[0], maxima[0]),
    })
}
