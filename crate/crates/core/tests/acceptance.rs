//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_bigint::{BigInt, Sign};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sparsedom::harness::corpus::trial;
use sparsedom::harness::{run_hp_comparison, run_modular_bound, run_norm_bound, ExperimentConfig, Report};
use sparsedom::operators::truncation_term;
use sparsedom::sparse::build_grid_families;
use sparsedom::young::inequality_kit;
use sparsedom::{
    carleson_check, distribution, maximal_truncated, openness_step, power_weight, rearrangement, shifted_grids,
    space_norm, verify_sparsity, Domain, GridFunction, Hilbert, NFunction, SpaceSpec, Weight,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const SEED: u64 = 1;

fn weight_corpus(domain: Domain) -> Vec<(String, Weight)> {
    let mut out = vec![("unit".to_string(), Weight::unit(domain))];
    for a in [0.3, 0.6, 0.9, -0.3, -0.6] {
        out.push((format!("|x|^{a}"), power_weight(a, domain).unwrap()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for k in 0..4 {
        let pieces: Vec<f64> = (0..16).map(|_| 4f64.powf(rng.random_range(-1.0..=1.0))).collect();
        let n = domain.cells();
        let values = (0..n).map(|i| pieces[i * 16 / n]).collect();
        out.push((format!("random-{k}"), Weight::from_values(domain, values).unwrap()));
    }
    out
}

// 1. Every family of the 1000-trial corpus is sparse.
fn sparsity() -> Outcome {
    let domain = Domain::new(-1.0, 2.0, 10).unwrap();
    let start = Instant::now();
    let (mut families, mut worst_eta, mut bad) = (0usize, 0f64, 0usize);
    for i in 0..1000 {
        let f = trial(domain, SEED, i).f;
        for g in shifted_grids(domain) {
            for fam in build_grid_families(&f, &g, 2.0).unwrap() {
                let cert = verify_sparsity(&fam);
                families += 1;
                worst_eta = worst_eta.max(cert.eta);
                bad += usize::from(!cert.ok);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad == 0 && secs < 10.0,
        format!("{families} families, {bad} failures, max eta {worst_eta}, {secs:.2}s at J=10"),
    )
}

// 2. Carleson packing for every family, weight and cube of the family's grid.
fn carleson() -> Outcome {
    let domain = Domain::new(-1.0, 2.0, 10).unwrap();
    let weights = weight_corpus(domain);
    let (mut checks, mut bad, mut worst) = (0usize, 0usize, 0f64);
    for i in 0..48 {
        let f = trial(domain, SEED, i).f;
        for g in shifted_grids(domain) {
            let cubes: Vec<_> = g.cubes().collect();
            for fam in build_grid_families(&f, &g, 2.0).unwrap() {
                for (_, w) in &weights {
                    for r in cubes.iter().filter(|r| fam.root().contains(r)) {
                        let c = carleson_check(&fam, w, r).unwrap();
                        checks += 1;
                        bad += usize::from(!c.ok);
                        worst = worst.max(c.lhs / c.rhs);
                    }
                }
            }
        }
    }
    outcome(
        bad == 0,
        format!("{checks} checks, {bad} failures, max lhs/rhs {worst:.4}"),
    )
}

// 3. Openness step with the exponent formula recomputed from scratch.
fn openness() -> Outcome {
    let domain = Domain::new(-1.0, 2.0, 10).unwrap();
    let (mut bad, mut worst_eps) = (0usize, 0f64);
    let mut count = 0usize;
    for (_, w) in weight_corpus(domain) {
        for p in [1.5, 2.0, 3.0] {
            let step = openness_step(&w, p, 1).unwrap();
            let sigma_values: Vec<f64> = w
                .values()
                .values()
                .iter()
                .map(|v| v.powf(1.0 - p / (p - 1.0)))
                .collect();
            let sigma = Weight::from_values(domain, sigma_values).unwrap();
            let eps = (p - 1.0) / (1.0 + 4.0 * sigma.ainf_characteristic_all());
            let err = (step.eps - eps).abs();
            worst_eps = worst_eps.max(err);
            bad += usize::from(!step.ok || err > 1e-12);
            count += 1;
        }
    }
    let unit = openness_step(&Weight::unit(domain), 2.0, 1).unwrap();
    let unit_ok = (unit.eps - 0.2).abs() <= 1e-12 && unit.ok;
    outcome(
        bad == 0 && unit_ok,
        format!(
            "{count} steps, {bad} failures, max |eps - formula| {worst_eps:e}, unit weight eps {}",
            unit.eps
        ),
    )
}

/// `x` as an integer multiple of `2^-1074`.
fn to_fixed(x: f64) -> BigInt {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mant, shift) = if exp == 0 {
        (frac, 0)
    } else {
        (frac | (1u64 << 52), exp - 1)
    };
    let m = BigInt::from(mant) << shift as usize;
    if x < 0.0 {
        -m
    } else {
        m
    }
}

/// Correctly rounded (ties to even) value of `n · 2^-1074`, for results in
/// the normal range.
fn from_fixed(n: &BigInt) -> f64 {
    let (sign, mag) = n.clone().into_parts();
    if sign == Sign::NoSign {
        return 0.0;
    }
    let bits = mag.bits();
    let shift = bits.saturating_sub(53);
    let mut q = &mag >> shift;
    if shift > 0 {
        let rem = &mag - (&q << shift);
        let half = num_bigint::BigUint::from(1u8) << (shift - 1);
        if rem > half || (rem == half && q.bit(0)) {
            q += 1u8;
        }
    }
    let mut x = q.to_u64_digits().first().copied().unwrap_or(0) as f64;
    let mut k = shift as i64 - 1074;
    let step = f64::from_bits(((1023 - 1000) as u64) << 52);
    while k < -1000 {
        x *= step;
        k += 1000;
    }
    x *= f64::from_bits(((1023 + k) as u64) << 52);
    if sign == Sign::Minus {
        -x
    } else {
        x
    }
}

/// `max |Σ_{k1 ≤ |i-j| < k2} K f h|` over every annulus, summed exactly and
/// rounded once.
fn brute_force_maximal(f: &GridFunction) -> Vec<f64> {
    let n = f.len();
    (0..n)
        .map(|i| {
            let mut best = BigInt::from(0);
            for k1 in 1..n {
                let mut s = BigInt::from(0);
                for d in k1..n {
                    for j in [i.checked_sub(d), i.checked_add(d).filter(|&j| j < n)]
                        .into_iter()
                        .flatten()
                    {
                        s += to_fixed(truncation_term(f, &Hilbert, i, j));
                    }
                    if s.magnitude() > best.magnitude() {
                        best = s.clone();
                    }
                }
            }
            from_fixed(&best).abs()
        })
        .collect()
}

// 4. T** against the brute force, and the closed form at J = 10.
fn oracle() -> Outcome {
    let mut compared = 0usize;
    let mut mismatches = 0usize;
    for (lo, len) in [(0.0, 1.0), (-1.0, 2.0), (0.0, 4.0)] {
        for j in 3..=6 {
            let domain = Domain::new(lo, len, j).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(u64::from(j));
            let mut fs: Vec<GridFunction> = (0..12).map(|i| trial(domain, SEED, i).f).collect();
            fs.push(
                GridFunction::new(
                    domain,
                    (0..domain.cells()).map(|_| rng.random_range(-3.0..3.0)).collect(),
                )
                .unwrap(),
            );
            for f in fs {
                let fast = maximal_truncated(&f, &Hilbert);
                let slow = brute_force_maximal(&f);
                compared += 1;
                mismatches += usize::from(fast.values().iter().zip(&slow).any(|(a, b)| a.to_bits() != b.to_bits()));
            }
        }
    }
    let domain = Domain::new(0.0, 4.0, 10).unwrap();
    let h = domain.cell_width();
    let tf = maximal_truncated(&GridFunction::indicator(domain, 0.0, 1.0), &Hilbert);
    let at_two = tf.values()[domain.cell_of(2.0).unwrap()];
    let err = (at_two - 2f64.ln()).abs();
    outcome(
        mismatches == 0 && err <= 2.0 * h,
        format!("{compared} functions at J<=6, {mismatches} bit mismatches; T**chi(2) = {at_two}, |err| {err:.2e} <= 2h = {:.2e}", 2.0 * h),
    )
}

fn config(text: &str) -> ExperimentConfig {
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    cfg.validate().unwrap();
    cfg
}

fn flags(report: &Report, names: &[&str]) -> bool {
    names
        .iter()
        .all(|n| report.summary.acceptance.get(*n).copied().unwrap_or(false))
}

fn number(report: &Report, key: &str) -> f64 {
    report.characteristic(key).and_then(|v| v.as_f64()).unwrap_or(f64::NAN)
}

// 5. Empirical norm constant: spread ≤ 2 across the power sweep and drift
// ≤ 25% from J = 10 to J = 11.
fn norm_shape() -> Outcome {
    let base = "kind = \"norm\"\nseed = 1\ntrials = 32\ndomain.lo = -1.0\ndomain.len = 2.0\ndomain.J = 10\n\
                weight.kind = \"power\"\nacceptance.spread = 2.0\nacceptance.drift = 0.25\n";
    let spaces = [
        ("L^1.5", "space.family = \"lebesgue\"\nspace.p = 1.5"),
        ("L^2", "space.family = \"lebesgue\"\nspace.p = 2.0"),
        ("L^3", "space.family = \"lebesgue\"\nspace.p = 3.0"),
        ("L^(2,1)", "space.family = \"lorentz\"\nspace.p = 2.0\nspace.q = 1.0"),
        ("L^(2,3)", "space.family = \"lorentz\"\nspace.p = 2.0\nspace.q = 3.0"),
        (
            "Orlicz t^2",
            "space.family = \"orlicz\"\nphi.kind = \"power\"\nphi.p = 2.0",
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, extra) in spaces {
        let report = run_norm_bound(&config(&format!("{base}{extra}\n"))).unwrap();
        let ok = flags(&report, &["finite", "spread", "resolution_drift"]);
        pass &= ok;
        parts.push(format!(
            "{name} spread {:.3} drift {:.3}{}",
            number(&report, "spread"),
            number(&report, "resolution_drift"),
            if ok { "" } else { " (fail)" }
        ));
    }
    outcome(pass, parts.join("; "))
}

// 6. Modular constant c1: finite, drift ≤ 25%, non-decreasing in a.
fn modular_bound() -> Outcome {
    let base = "kind = \"modular\"\nseed = 1\ntrials = 32\ndomain.lo = -1.0\ndomain.len = 2.0\ndomain.J = 10\n\
                weight.kind = \"power\"\nalpha = 1.0\nacceptance.drift = 0.25\n";
    let phis = [
        ("t^1.5", "phi.kind = \"power\"\nphi.p = 1.5"),
        ("t^2", "phi.kind = \"power\"\nphi.p = 2.0"),
        (
            "t^2/t^3",
            "phi.kind = \"piecewise\"\nphi.p = 2.0\nphi.q = 3.0\nphi.knot = 1.0",
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, extra) in phis {
        let report = run_modular_bound(&config(&format!("{base}{extra}\n"))).unwrap();
        let ok = flags(&report, &["finite", "resolution_drift", "monotone_in_a"]);
        pass &= ok;
        let c1: Vec<String> = report
            .characteristic("weights")
            .and_then(|w| w.as_array())
            .map(|ws| {
                ws.iter()
                    .map(|w| format!("{:.2}", w["c1"].as_f64().unwrap_or(f64::NAN)))
                    .collect()
            })
            .unwrap_or_default();
        parts.push(format!(
            "{name} c1 [{}] drift {:.3}{}",
            c1.join(", "),
            number(&report, "resolution_drift"),
            if ok { "" } else { " (fail)" }
        ));
    }
    outcome(pass, parts.join("; "))
}

// 7. Young kit on analytic and numeric conjugates.
fn young_kit() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for p in [1.5, 2.0, 3.0] {
        let kit = inequality_kit(&NFunction::power(p).unwrap()).unwrap();
        let ok = kit.all_ok && kit.delta2.c_prime == p;
        pass &= ok;
        parts.push(format!(
            "t^{p} C'={}{}",
            kit.delta2.c_prime,
            if ok { "" } else { " (fail)" }
        ));
    }
    let half = inequality_kit(&NFunction::power_over_p(2.0).unwrap()).unwrap();
    let attained = (half.max_inverse_product_ratio - 2.0).abs() <= 1e-12;
    pass &= half.all_ok && attained;
    parts.push(format!("t^2/2 upper ratio {}", half.max_inverse_product_ratio));
    let piecewise = inequality_kit(&NFunction::piecewise(2.0, 3.0, 1.0).unwrap()).unwrap();
    pass &= piecewise.all_ok;
    let worst = piecewise.checks.iter().map(|c| c.worst_ratio).fold(0.0, f64::max);
    parts.push(format!(
        "t^2/t^3 numeric conjugate ok={} worst ratio {worst}",
        piecewise.all_ok
    ));
    outcome(pass, parts.join("; "))
}

// 8. Rearrangements: exact equimeasurability, Lorentz(p,p) = L^p, Luxemburg
// norms of indicators.
fn rearrangements() -> Outcome {
    let domain = Domain::new(-1.0, 2.0, 10).unwrap();
    let weights = weight_corpus(domain);
    let (mut levels, mut mismatches) = (0usize, 0usize);
    let mut lorentz_err: f64 = 0.0;
    for i in 0..64 {
        let f = trial(domain, SEED, i).f;
        let mut thresholds: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
        thresholds.sort_by(f64::total_cmp);
        thresholds.dedup();
        let mids: Vec<f64> = thresholds.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        thresholds.extend(mids);
        thresholds.push(-1.0);
        for (_, w) in weights.iter().step_by(3) {
            let r = rearrangement(&f, Some(w)).unwrap();
            for &l in &thresholds {
                levels += 1;
                mismatches += usize::from(r.distribution(l).to_bits() != distribution(&f, Some(w), l).to_bits());
            }
        }
        for p in [1.5, 2.0, 3.0] {
            let a = space_norm(&f, &SpaceSpec::lorentz(p, p).unwrap(), None).unwrap();
            let b = space_norm(&f, &SpaceSpec::lebesgue(p).unwrap(), None).unwrap();
            if b > 0.0 {
                lorentz_err = lorentz_err.max((a - b).abs() / b);
            }
        }
    }
    let mut lux_err: f64 = 0.0;
    for (a, b) in [(0.0, 1.0), (-1.0, -0.5), (0.25, 0.375), (-1.0, 1.0), (0.1, 0.9)] {
        let chi = GridFunction::indicator(domain, a, b);
        let measure = chi.integral();
        for p in [1.5, 2.0, 3.0] {
            let x = SpaceSpec::orlicz(NFunction::power(p).unwrap());
            let v = space_norm(&chi, &x, None).unwrap();
            lux_err = lux_err.max((v - measure.powf(1.0 / p)).abs() / measure.powf(1.0 / p));
        }
    }
    outcome(
        mismatches == 0 && lorentz_err <= 1e-12 && lux_err <= 1e-10,
        format!(
            "{levels} levels, {mismatches} distribution mismatches; Lorentz(p,p) vs L^p {lorentz_err:.1e}; Luxemburg of indicators {lux_err:.1e}"
        ),
    )
}

// 9. The A_2 / A_∞ curve lies below the comparison curve at J = 12.
fn comparison() -> Outcome {
    let cfg = config(
        "kind = \"hp-compare\"\ndomain.lo = -1.0\ndomain.len = 2.0\ndomain.J = 12\nweight.kind = \"power\"\n\
         weight.a = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]\n",
    );
    let report = run_hp_comparison(&cfg).unwrap();
    let worst = report.rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    outcome(
        flags(&report, &["ours_below_comparison"]) && worst < 1.0,
        format!("max ours/comparison {worst:.4} over a in [0.1, 0.9]"),
    )
}

fn cli_rows(subcommand: &str, threads: usize, out: &Path) -> Vec<u8> {
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let config = manifest.join("../../configs").join(format!("{subcommand}.toml"));
    let status = Command::new(env!("CARGO_BIN_EXE_sparsedom"))
        .arg(subcommand)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(out)
        .args(["--resolution", "8", "--trials", "24", "--quiet", "--threads"])
        .arg(threads.to_string())
        .status()
        .unwrap();
    assert!(status.code().is_some_and(|c| c <= 1), "{subcommand} crashed: {status}");
    std::fs::read(out.join("rows.csv")).unwrap()
}

// 10. Byte-identical rows.csv across runs and thread counts.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for sub in ["domination", "norm", "modular"] {
        let runs: Vec<Vec<u8>> = [(1, "a"), (4, "b"), (1, "c")]
            .iter()
            .map(|(t, tag)| cli_rows(sub, *t, &dir.path().join(format!("{sub}-{tag}"))))
            .collect();
        let same = runs.windows(2).all(|w| w[0] == w[1]) && !runs[0].is_empty();
        pass &= same;
        parts.push(format!(
            "{sub} {} bytes {}",
            runs[0].len(),
            if same { "identical" } else { "DIFFER" }
        ));
    }
    outcome(pass, parts.join("; "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("sparsity certificates", sparsity),
        ("Carleson packing", carleson),
        ("openness step", openness),
        ("maximal truncated oracle", oracle),
        ("norm bound shape", norm_shape),
        ("modular bound", modular_bound),
        ("Young kit", young_kit),
        ("rearrangements", rearrangements),
        ("A2/Ainf comparison", comparison),
        ("determinism", determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {:<26} {} [{:.1}s] {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
