use rayon::prelude::*;
use serde::Serialize;

use super::corpus::{hilbert_maximal, trial, weight_sweep, Trial};
use super::domination::{all_families, default_mmax};
use super::report::{drift, Row, SummaryBuilder};
use super::{ensure_finite, in_trial, max_of, resolutions, ExperimentConfig, Report};
use crate::error::Result;
use crate::grid::GridFunction;
use crate::operators::{best_maximal, shifted_sparse_operator, Hilbert, Kernel};
use crate::spaces::modular;
use crate::weights::Weight;
use crate::young::NFunction;

/// Label, parameter, A∞, A_{i_φ}^{1/i_φ} and worst c1 for one weight at one resolution.
type LevelEntry = (String, f64, f64, f64, f64);

/// Smallest `c ≥ 1` with `ρ(Mf) ≤ c ρ(c s |f|)`, by bisection.
pub fn fit_maximal_constant(phi: &NFunction, w: &Weight, f: &GridFunction, s: f64) -> Result<f64> {
    let lhs = modular(&best_maximal(f), phi, Some(w))?;
    if lhs == 0.0 {
        return Ok(1.0);
    }
    let abs = f.abs();
    let side = |c: f64| -> Result<f64> { Ok(c * modular(&abs.scale(c * s), phi, Some(w))?) };
    if side(1.0)? >= lhs {
        return Ok(1.0);
    }
    let mut hi = 2.0;
    while side(hi)? < lhs {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if side(mid)? >= lhs {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// The weight-dependent part of the modular bound:
/// `[w]_{A∞}^{1+αC'}`, times `([w]_{A_i}^{1/i})^{C'}` when
/// `C₀ [w]_{A_i}^{1/i} ≥ 2`.
pub fn modular_bound_shape(ainf: f64, ai_root: f64, c_prime: f64, alpha: f64, c0: f64) -> (f64, bool) {
    let base = ainf.powf(1.0 + alpha * c_prime);
    if c0 * ai_root < 2.0 {
        (base, false)
    } else {
        (base * ai_root.powf(c_prime), true)
    }
}

#[derive(Debug, Clone, Serialize)]
struct WeightSummary {
    label: String,
    a: f64,
    ainf: f64,
    a_lower_index: f64,
    c1: f64,
    c1_next_j: f64,
    drift: f64,
    second_case: bool,
    bound_shape: f64,
    constant: f64,
}

struct ModularTrial {
    row: Row,
    c0: f64,
}

#[allow(clippy::too_many_arguments)]
fn modular_trial(
    t: &Trial,
    phi: &NFunction,
    w: &Weight,
    label: &str,
    ai_root: f64,
    level: u32,
    fit: bool,
) -> Result<ModularTrial> {
    let rf = modular(&t.f, phi, Some(w))?;
    let notes = format!("J={level} {label} {} digest={}", t.shape.label(), t.digest);
    if rf == 0.0 {
        return Ok(ModularTrial {
            row: Row::new(t.index, 0.0, 0.0, format!("{notes} skipped: zero modular")),
            c0: 1.0,
        });
    }
    let rt = modular(&hilbert_maximal(&t.f), phi, Some(w))?;
    let row = Row::new(t.index, rt, rf, notes);
    ensure_finite(&row, &t.digest)?;
    let c0 = if fit {
        fit_maximal_constant(phi, w, &t.f, ai_root)?
    } else {
        1.0
    };
    Ok(ModularTrial { row, c0 })
}

/// Per-`m` check of `ρ(T_{S,m}|f|) ≤ C [w]_{A∞}^{1+αC'} ρ(Mf)`: the largest
/// empirical `C` for each `m`, over trials, families and weights.
fn sparse_modular_profile(
    cfg: &ExperimentConfig,
    phi: &NFunction,
    weights: &[(Weight, f64)],
    exponent: f64,
) -> Result<Vec<f64>> {
    let domain = cfg.domain()?;
    let per_trial: Vec<Vec<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let t = trial(domain, cfg.seed, i);
            sparse_profile_trial(&t, cfg, phi, weights, exponent).map_err(in_trial(i, &t.digest))
        })
        .collect::<Result<_>>()?;
    let len = per_trial.iter().map(Vec::len).max().unwrap_or(0);
    Ok((0..len)
        .map(|m| max_of(per_trial.iter().filter_map(|v| v.get(m).copied())))
        .collect())
}

fn sparse_profile_trial(
    t: &Trial,
    cfg: &ExperimentConfig,
    phi: &NFunction,
    weights: &[(Weight, f64)],
    exponent: f64,
) -> Result<Vec<f64>> {
    let domain = t.f.domain();
    let families = all_families(&t.f)?;
    let mmax = cfg.mmax.unwrap_or_else(|| default_mmax(&families, domain.cells()));
    let abs = t.f.abs();
    let mf = best_maximal(&t.f);
    let mut out = vec![0.0f64; mmax as usize + 1];
    for (w, ainf) in weights {
        let rm = modular(&mf, phi, Some(w))?;
        if rm == 0.0 {
            continue;
        }
        let scale = ainf.powf(exponent) * rm;
        for m in 0..=mmax {
            for fam in &families {
                let r = modular(&shifted_sparse_operator(&abs, fam, m), phi, Some(w))? / scale;
                out[m as usize] = out[m as usize].max(r);
            }
        }
    }
    Ok(out)
}

/// Modular inequality `ρ_w^φ(T**f) ≤ c₁ ρ_w^φ(f)`: the smallest empirical
/// `c₁` per weight at `J` and `J + 1`, compared with the two-case bound shape
/// using a fitted maximal-function constant `C₀`.
pub fn run_modular_bound(cfg: &ExperimentConfig) -> Result<Report> {
    let phi = cfg.nfunction()?;
    let idx = phi.dilation_indices();
    let delta2 = phi.delta2_data();
    let i_phi = idx.lower;
    if !(i_phi > 1.0) || !idx.upper.is_finite() {
        return Err(crate::error::Error::Config(format!(
            "phi: the modular bound needs 1 < i_φ ≤ I_φ < ∞, got ({}, {})",
            idx.lower, idx.upper
        )));
    }
    let mut rows = Vec::new();
    let mut levels: Vec<Vec<LevelEntry>> = Vec::new();
    let mut c0: f64 = 1.0;
    let mut profile_weights = Vec::new();
    for (k, domain) in resolutions(cfg)?.into_iter().enumerate() {
        let mut level = Vec::new();
        for w in weight_sweep(cfg, domain, i_phi)? {
            let ainf = w.weight.ainf_characteristic_all();
            let ai_root = w.weight.ap_characteristic(i_phi)?.powf(1.0 / i_phi);
            let trials: Vec<ModularTrial> = (0..cfg.trials)
                .into_par_iter()
                .map(|i| {
                    let t = trial(domain, cfg.seed, i);
                    modular_trial(&t, &phi, &w.weight, &w.label, ai_root, domain.level(), k == 0)
                        .map_err(in_trial(i, &t.digest))
                })
                .collect::<Result<_>>()?;
            if k == 0 {
                c0 = c0.max(trials.iter().map(|t| t.c0).fold(1.0, f64::max));
                profile_weights.push((w.weight.clone(), ainf));
            }
            level.push((
                w.label.clone(),
                w.parameter,
                ainf,
                ai_root,
                max_of(trials.iter().map(|t| t.row.ratio)),
            ));
            rows.extend(trials.into_iter().map(|t| t.row));
        }
        levels.push(level);
    }
    let exponent = 1.0 + cfg.alpha * delta2.c_prime;
    let mut sweep: Vec<WeightSummary> = levels[0]
        .iter()
        .zip(&levels[1])
        .map(|(a, b)| {
            let (shape, second) = modular_bound_shape(a.2, a.3, delta2.c_prime, cfg.alpha, c0);
            WeightSummary {
                label: a.0.clone(),
                a: a.1,
                ainf: a.2,
                a_lower_index: a.3.powf(i_phi),
                c1: a.4,
                c1_next_j: b.4,
                drift: drift(a.4, b.4),
                second_case: second,
                bound_shape: shape,
                constant: a.4 / shape,
            }
        })
        .collect();
    sweep.sort_by(|x, y| x.a.total_cmp(&y.a));
    let monotone = sweep.windows(2).all(|w| w[1].c1 >= w[0].c1 * (1.0 - 1e-12));
    let worst_drift = max_of(sweep.iter().map(|s| s.drift));
    let c1_max = max_of(sweep.iter().map(|s| s.c1));
    let constant = max_of(sweep.iter().map(|s| s.constant));
    let per_m = sparse_modular_profile(cfg, &phi, &profile_weights, exponent)?;
    let delta = Hilbert.smoothness();
    let per_m_weighted: Vec<f64> = per_m
        .iter()
        .enumerate()
        .map(|(m, c)| c * 2f64.powf(-(m as f64) * delta))
        .collect();

    let mut summary = SummaryBuilder::default();
    summary
        .set("phi", phi.kind())
        .set("i_phi", i_phi)
        .set("I_phi", idx.upper)
        .set("C_prime", delta2.c_prime)
        .set("alpha", cfg.alpha)
        .set("C0_fit", c0)
        .set("J", cfg.domain.level)
        .set("weights", &sweep)
        .set("resolution_drift", worst_drift)
        .set("sparse_constant_per_m", &per_m)
        .set("sparse_constant_per_m_weighted", &per_m_weighted);
    summary.flag("finite", c1_max.is_finite() && constant.is_finite());
    summary.flag("monotone_in_a", monotone);
    if cfg.acceptance.check_drift {
        summary.flag("resolution_drift", worst_drift <= cfg.acceptance.drift);
    }
    Ok(Report {
        experiment: "modular".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(c1_max, constant),
    })
}
