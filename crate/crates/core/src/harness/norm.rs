use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{hilbert_maximal, trial, weight_sweep, SweepWeight, Trial};
use super::report::{drift, Row, SummaryBuilder};
use super::{ensure_finite, in_trial, max_of, resolutions, ExperimentConfig, Report};
use crate::error::Result;
use crate::grid::{median, DyadicGrid, GridFunction};
use crate::operators::{best_maximal, weighted_dyadic_maximal};
use crate::spaces::{space_norm, SpaceSpec};
use crate::weights::Weight;

struct NormTrial {
    row: Row,
    maximal_ratio: f64,
    weighted_ratio: f64,
    weighted_ratio_squared: f64,
}

fn ratio_or_zero(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn norm_trial(t: &Trial, x: &SpaceSpec, w: &SweepWeight, w2: &Weight, bound: f64, level: u32) -> Result<NormTrial> {
    let weight = Some(&w.weight);
    let nf = space_norm(&t.f, x, weight)?;
    let notes = format!("J={level} {} {} digest={}", w.label, t.shape.label(), t.digest);
    if nf == 0.0 {
        return Ok(NormTrial {
            row: Row::new(t.index, 0.0, 0.0, format!("{notes} skipped: zero norm")),
            maximal_ratio: 0.0,
            weighted_ratio: 0.0,
            weighted_ratio_squared: 0.0,
        });
    }
    let tf = hilbert_maximal(&t.f);
    let nt = space_norm(&tf, x, weight)?;
    let row = Row::new(t.index, nt, bound * nf, notes);
    ensure_finite(&row, &t.digest)?;

    let grid = DyadicGrid::standard(*t.f.domain());
    let maximal_ratio = space_norm(&best_maximal(&t.f), x, weight)? / nf;
    let weighted_ratio = space_norm(&weighted_dyadic_maximal(&t.f, &w.weight, &grid), x, weight)? / nf;
    let nf2 = space_norm(&t.f, x, Some(w2))?;
    let weighted_ratio_squared =
        ratio_or_zero(space_norm(&weighted_dyadic_maximal(&t.f, w2, &grid), x, Some(w2))?, nf2);
    Ok(NormTrial {
        row,
        maximal_ratio,
        weighted_ratio,
        weighted_ratio_squared,
    })
}

#[derive(Debug, Clone, Serialize)]
struct WeightSummary {
    label: String,
    a: f64,
    ainf: f64,
    ap: f64,
    bound: f64,
    max_norm_ratio: f64,
    constant: f64,
    constant_next_j: f64,
    drift: f64,
    maximal_ratio: f64,
    maximal_ratio_over_ap: f64,
    weighted_dyadic_ratio: f64,
    weighted_dyadic_ratio_squared_weight: f64,
}

/// `[w]_{A∞} [w]_{A_p}^{1/p}`, or `[w]_{A∞}^{1/r} [w]_{A_p}^{1/p}` for an
/// `r`-convex quasi-Banach space.
pub fn norm_bound(x: &SpaceSpec, w: &Weight) -> Result<f64> {
    let (p, _) = x.boyd_indices();
    let ainf = w.ainf_characteristic_all();
    let ap = w.ap_characteristic(p)?;
    let ainf_part = if x.is_banach() {
        ainf
    } else {
        ainf.powf(1.0 / x.convexity())
    };
    Ok(ainf_part * ap.powf(1.0 / p))
}

/// Weighted norm bound: ratio `‖T**f‖_{X(w)} / ‖f‖_{X(w)}` against
/// `B(w) = [w]_{A∞}[w]_{A_p}^{1/p}` over the weight sweep, at `J` and `J + 1`.
/// Rows carry `lhs = ‖T**f‖`, `rhs = B(w)‖f‖`, so the row ratio is the
/// per-trial constant.
pub fn run_norm_bound(cfg: &ExperimentConfig) -> Result<Report> {
    let x = cfg.space_spec()?;
    let (p, q) = x.boyd_indices();
    let mut rows = Vec::new();
    let mut per_level: Vec<Vec<WeightSummary>> = Vec::new();
    for domain in resolutions(cfg)? {
        let mut level_summary = Vec::new();
        for w in weight_sweep(cfg, domain, p)? {
            let ap = w.weight.ap_characteristic(p)?;
            let ainf = w.weight.ainf_characteristic_all();
            let bound = norm_bound(&x, &w.weight)?;
            let w2 = w.weight.powf(2.0)?;
            let trials: Vec<NormTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|i| {
                    let t = trial(domain, cfg.seed, i);
                    norm_trial(&t, &x, &w, &w2, bound, domain.level()).map_err(in_trial(i, &t.digest))
                })
                .collect::<Result<_>>()?;
            let constant = max_of(trials.iter().map(|t| t.row.ratio));
            let maximal_ratio = max_of(trials.iter().map(|t| t.maximal_ratio));
            level_summary.push(WeightSummary {
                label: w.label.clone(),
                a: w.parameter,
                ainf,
                ap,
                bound,
                max_norm_ratio: max_of(trials.iter().map(|t| ratio_or_zero(t.row.lhs, t.row.rhs / bound))),
                constant,
                constant_next_j: f64::NAN,
                drift: f64::NAN,
                maximal_ratio,
                maximal_ratio_over_ap: maximal_ratio / ap.powf(1.0 / p),
                weighted_dyadic_ratio: max_of(trials.iter().map(|t| t.weighted_ratio)),
                weighted_dyadic_ratio_squared_weight: max_of(trials.iter().map(|t| t.weighted_ratio_squared)),
            });
            rows.extend(trials.into_iter().map(|t| t.row));
        }
        per_level.push(level_summary);
    }
    let next = per_level.pop().expect("two resolutions");
    let mut sweep = per_level.pop().expect("two resolutions");
    for (s, n) in sweep.iter_mut().zip(&next) {
        s.constant_next_j = n.constant;
        s.drift = drift(s.constant, n.constant);
    }
    let cmax = max_of(sweep.iter().map(|s| s.constant));
    let cmin = sweep.iter().map(|s| s.constant).fold(f64::INFINITY, f64::min);
    let spread = cmax / cmin;
    let worst_drift = max_of(sweep.iter().map(|s| s.drift));
    let mut by_ap = sweep.iter().collect::<Vec<_>>();
    by_ap.sort_by(|a, b| a.ap.total_cmp(&b.ap));
    let monotone = by_ap.windows(2).all(|w| w[1].max_norm_ratio >= w[0].max_norm_ratio);

    let mut summary = SummaryBuilder::default();
    summary
        .set("space", x.label())
        .set("p_X", p)
        .set("q_X", q)
        .set("convexity", x.convexity())
        .set("banach", x.is_banach())
        .set("J", cfg.domain.level)
        .set("weights", &sweep)
        .set("spread", spread)
        .set("resolution_drift", worst_drift)
        .set("norm_ratio_monotone_in_ap", monotone);
    summary.flag("finite", cmax.is_finite() && cmin > 0.0);
    summary.flag("spread", spread <= cfg.acceptance.spread);
    if cfg.acceptance.check_drift {
        summary.flag("resolution_drift", worst_drift <= cfg.acceptance.drift);
    }
    Ok(Report {
        experiment: "norm".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(cmax, cmax),
    })
}

struct MedianTrial {
    row: Row,
    decay_constant: f64,
}

fn median_trial(t: &Trial, w: &SweepWeight, p: f64, ap: f64, level: u32) -> Result<MedianTrial> {
    let x = SpaceSpec::lebesgue(p)?;
    let domain = *t.f.domain();
    let nf = space_norm(&t.f, &x, Some(&w.weight))?;
    let rhs = ap.powf(1.0 / p) * nf;
    let l1 = t.f.abs().integral();
    let tf = hilbert_maximal(&t.f);
    let grid = DyadicGrid::standard(domain);
    let (mut lhs, mut decay_constant): (f64, f64) = (0.0, 0.0);
    for q in grid.cubes() {
        let m = median(&tf, &q).abs();
        lhs = lhs.max(m * w.weight.mass(&q).powf(1.0 / p));
        if l1 > 0.0 {
            decay_constant = decay_constant.max(m * q.measure(&domain) / l1);
        }
    }
    let row = Row::new(
        t.index,
        lhs,
        rhs,
        format!("J={level} {} {} digest={}", w.label, t.shape.label(), t.digest),
    );
    ensure_finite(&row, &t.digest)?;
    Ok(MedianTrial { row, decay_constant })
}

/// `|m_Q(T**f)|` along the standard cubes containing the first cell, for
/// `f` the indicator of the first sixteenth of the domain, from the smallest
/// cube containing the support outward.
pub fn median_decay_profile(domain: crate::grid::Domain) -> Vec<(f64, f64)> {
    let f = GridFunction::indicator(domain, domain.lo(), domain.lo() + domain.len() / 16.0);
    let tf = hilbert_maximal(&f);
    let grid = DyadicGrid::standard(domain);
    (0..=4.min(domain.level()))
        .rev()
        .filter_map(|k| grid.containing(0, k))
        .map(|q| (q.measure(&domain), median(&tf, &q).abs()))
        .collect()
}

/// Median bound: `|m_Q(T**f)| w(Q)^{1/p} ≤ C [w]_{A_p}^{1/p} ‖f‖_{L^p(w)}`
/// over all standard cubes `Q`, plus the decay of `|m_Q(T**f)|` against
/// `‖f‖₁/|Q|`.
pub fn run_median_bound(cfg: &ExperimentConfig) -> Result<Report> {
    let p = cfg.space.p;
    if !(p > 1.0) {
        return Err(crate::error::Error::Config(format!(
            "space.p: the median bound needs p > 1, got {p}"
        )));
    }
    let mut rows = Vec::new();
    let mut constants: Vec<Vec<(String, f64)>> = Vec::new();
    let mut decay_constant: f64 = 0.0;
    for domain in resolutions(cfg)? {
        let mut level = Vec::new();
        for w in weight_sweep(cfg, domain, p)? {
            let ap = w.weight.ap_characteristic(p)?;
            let trials: Vec<MedianTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|i| {
                    let t = trial(domain, cfg.seed, i);
                    median_trial(&t, &w, p, ap, domain.level()).map_err(in_trial(i, &t.digest))
                })
                .collect::<Result<_>>()?;
            level.push((w.label.clone(), max_of(trials.iter().map(|t| t.row.ratio))));
            decay_constant = decay_constant.max(max_of(trials.iter().map(|t| t.decay_constant)));
            rows.extend(trials.into_iter().map(|t| t.row));
        }
        constants.push(level);
    }
    let profile = median_decay_profile(cfg.domain()?);
    let decay_ok = profile.windows(2).all(|w| w[1].1 <= w[0].1);
    let worst_drift = max_of(constants[0].iter().zip(&constants[1]).map(|(a, b)| drift(a.1, b.1)));
    let c = max_of(constants[0].iter().map(|c| c.1));
    let mut summary = SummaryBuilder::default();
    summary
        .set("p", p)
        .set("J", cfg.domain.level)
        .set("constants", &constants[0])
        .set("constants_next_J", &constants[1])
        .set("resolution_drift", worst_drift)
        .set("decay_constant", decay_constant)
        .set("decay_profile", &profile);
    summary.flag("finite", c.is_finite());
    summary.flag("decay", decay_ok);
    if cfg.acceptance.check_drift {
        summary.flag("resolution_drift", worst_drift <= cfg.acceptance.drift);
    }
    Ok(Report {
        experiment: "median".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(c, c),
    })
}
