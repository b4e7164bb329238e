use rayon::prelude::*;
use serde::Serialize;

use super::corpus::function_digest;
use super::corpus::weight_sweep;
use super::report::{Row, SummaryBuilder};
use super::{ensure_finite, in_trial, max_of, ExperimentConfig, Report};
use crate::error::Result;
use crate::grid::{shifted_grids, Domain};
use crate::weights::{dual_weight, openness_step, power_weight};
use crate::young::{inequality_kit, Shape};

/// Exponents `0, 0.1, …, 0.9`.
pub fn default_comparison_exponents() -> Vec<f64> {
    (0..10).map(|k| k as f64 / 10.0).collect()
}

#[derive(Debug, Clone, Serialize)]
struct ComparisonPoint {
    a: f64,
    a2: f64,
    ainf: f64,
    ainf_inverse: f64,
    ours: f64,
    comparison: f64,
}

/// Least-squares `c` in `y ≈ c x` and the largest relative residual.
pub fn proportional_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let sxy: f64 = points.iter().map(|(x, y)| x * y).sum();
    let sxx: f64 = points.iter().map(|(x, _)| x * x).sum();
    let c = sxy / sxx;
    let err = max_of(points.iter().map(|(x, y)| (c * x - y).abs() / y));
    (c, err)
}

fn comparison_point(a: f64, domain: Domain) -> Result<ComparisonPoint> {
    let w = power_weight(a, domain)?;
    let inv = power_weight(-a, domain)?;
    let a2 = w.ap_characteristic(2.0)?;
    let ainf = w.ainf_characteristic_all();
    let ainf_inverse = inv.ainf_characteristic_all();
    Ok(ComparisonPoint {
        a,
        a2,
        ainf,
        ainf_inverse,
        ours: a2.sqrt() * ainf,
        comparison: a2.sqrt() * (ainf + ainf_inverse).sqrt(),
    })
}

/// Power weights `|x|^a`: `[w]_{A₂}^{1/2}[w]_{A∞}` against
/// `[w]_{A₂}^{1/2}([w]_{A∞} + [w⁻¹]_{A∞})^{1/2}`, and a fit of `[w]_{A₂}`
/// by `c/(1 - a²)` on `a ∈ [0.1, 0.8]`.
pub fn run_hp_comparison(cfg: &ExperimentConfig) -> Result<Report> {
    let domain = cfg.domain()?;
    let exps = cfg
        .weight
        .a
        .as_ref()
        .map(|a| a.to_vec())
        .unwrap_or_else(default_comparison_exponents);
    let points: Vec<ComparisonPoint> = exps
        .par_iter()
        .enumerate()
        .map(|(k, &a)| comparison_point(a, domain).map_err(in_trial(k, &format!("a={a}"))))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (k, pt) in points.iter().enumerate() {
        let row = Row::new(
            k,
            pt.ours,
            pt.comparison,
            format!("a={} A2={} Ainf={} Ainf_inv={}", pt.a, pt.a2, pt.ainf, pt.ainf_inverse),
        );
        ensure_finite(&row, &format!("a={}", pt.a))?;
        rows.push(row);
    }
    let fit_points: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| (0.1 - 1e-12..=0.8 + 1e-12).contains(&p.a))
        .map(|p| (1.0 / (1.0 - p.a * p.a), p.a2))
        .collect();
    let (c, fit_error) = if fit_points.is_empty() {
        (f64::NAN, 0.0)
    } else {
        proportional_fit(&fit_points)
    };
    let ours_below = points
        .iter()
        .filter(|p| p.a > 0.0 && p.a < 1.0)
        .all(|p| p.ours < p.comparison);
    let mut summary = SummaryBuilder::default();
    summary
        .set("J", domain.level())
        .set("curve", &points)
        .set("a2_fit_constant", c)
        .set("a2_fit_max_relative_error", fit_error);
    summary.flag("ours_below_comparison", ours_below);
    summary.flag("a2_fit", fit_error <= cfg.acceptance.fit);
    let max_ratio = max_of(rows.iter().map(|r| r.ratio));
    Ok(Report {
        experiment: "hp-compare".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(max_ratio, c),
    })
}

/// Exponents tabulated by the weight table and checked by the openness step.
pub const TABLE_EXPONENTS: [f64; 3] = [1.5, 2.0, 3.0];

#[derive(Debug, Clone, Serialize)]
struct WeightRow {
    label: String,
    a1: f64,
    ainf_per_grid: Vec<f64>,
    ainf: f64,
    ap: Vec<(f64, f64)>,
    openness_eps: Vec<(f64, f64)>,
}

/// Characteristic table for the configured weights, with the openness step
/// at `p ∈ {1.5, 2, 3}` as rows (`lhs = [w]_{A_{p-ε}}`, `rhs = 2^{p-1}[w]_{A_p}`).
pub fn run_weight_table(cfg: &ExperimentConfig) -> Result<Report> {
    let domain = cfg.domain()?;
    let weights = weight_sweep(cfg, domain, cfg.space.p)?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    let (mut at_least_one, mut nonincreasing, mut dual_ok, mut ainf_below_ap) = (true, true, true, true);
    let mut openness_ok = true;
    for (k, w) in weights.iter().enumerate() {
        let digest = function_digest(w.weight.values());
        let numerical = in_trial(k, &digest);
        let grids = shifted_grids(domain);
        let per_grid: Vec<f64> = grids.iter().map(|g| w.weight.ainf_characteristic(g)).collect();
        let ainf = w.weight.ainf_characteristic_all();
        let mut ap = Vec::new();
        let mut eps = Vec::new();
        for &p in &TABLE_EXPONENTS {
            let v = w.weight.ap_characteristic(p).map_err(&numerical)?;
            at_least_one &= v >= 1.0;
            ainf_below_ap &= ainf <= v;
            let conj = p / (p - 1.0);
            let dual = dual_weight(&w.weight, p)
                .and_then(|d| d.ap_characteristic(conj))
                .map_err(&numerical)?;
            dual_ok &= (dual - v.powf(conj - 1.0)).abs() <= 1e-12 * dual;
            let step = openness_step(&w.weight, p, 1).map_err(&numerical)?;
            openness_ok &= step.ok;
            let row = Row::new(
                k,
                step.lhs,
                step.rhs,
                format!("{} p={p} eps={} p-eps={}", w.label, step.eps, step.p_minus_eps),
            );
            ensure_finite(&row, &digest)?;
            rows.push(row);
            ap.push((p, v));
            eps.push((p, step.eps));
        }
        nonincreasing &= ap.windows(2).all(|x| x[1].1 <= x[0].1);
        table.push(WeightRow {
            label: w.label.clone(),
            a1: w.weight.a1_characteristic(),
            ainf_per_grid: per_grid,
            ainf,
            ap,
            openness_eps: eps,
        });
    }
    let mut summary = SummaryBuilder::default();
    summary
        .set("J", domain.level())
        .set("table", &table)
        .set("ainf_at_most_ap", ainf_below_ap);
    summary
        .flag("openness", openness_ok)
        .flag("ap_at_least_one", at_least_one)
        .flag("ap_nonincreasing_in_p", nonincreasing)
        .flag("dual_symmetry", dual_ok);
    let max_ratio = max_of(rows.iter().map(|r| r.ratio));
    Ok(Report {
        experiment: "weights".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(max_ratio, max_ratio),
    })
}

/// Inequality kit for the configured N-function; one row per inequality with
/// `lhs` the worst sampled ratio and `rhs = 1 + tolerance`.
pub fn run_young_kit(cfg: &ExperimentConfig) -> Result<Report> {
    let phi = cfg.nfunction()?;
    let digest = cfg.digest();
    let kit = inequality_kit(&phi).map_err(in_trial(0, &digest))?;
    let idx = phi.dilation_indices();
    let rows: Vec<Row> = kit
        .checks
        .iter()
        .enumerate()
        .map(|(k, c)| {
            Row::new(
                k,
                c.worst_ratio,
                1.0 + c.tolerance,
                format!("{} samples={}", c.name, c.samples),
            )
        })
        .collect();
    let mut summary = SummaryBuilder::default();
    summary
        .set("phi", phi.kind())
        .set("i_phi", idx.lower)
        .set("I_phi", idx.upper)
        .set("delta2_C", kit.delta2.c)
        .set("C_prime", kit.delta2.c_prime)
        .set("in_delta2", kit.delta2.in_delta2)
        .set("max_inverse_product_ratio", kit.max_inverse_product_ratio)
        .set("min_inverse_product_ratio", kit.min_inverse_product_ratio)
        .set("conjugate", phi.complementary().kind());
    for c in &kit.checks {
        summary.flag(c.name, c.ok);
    }
    if let Shape::Power { exp, .. } = phi.shape() {
        summary.flag("growth_exponent_is_p", kit.delta2.c_prime == *exp);
    }
    let max_ratio = max_of(rows.iter().map(|r| r.lhs));
    Ok(Report {
        experiment: "young".into(),
        config_digest: cfg.digest(),
        rows,
        summary: summary.finish(max_ratio, kit.max_inverse_product_ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn proportional_fit_exact_line() {
        let (c, err) = proportional_fit(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]);
        assert!((c - 2.0).abs() < 1e-15 && err < 1e-15);
    }
}
