//! N-functions: evaluation and inverse, the complementary function, dilation
//! indices and Δ₂ data, plus a sampled check of the standard inequalities
//! relating `φ` and `φ̄`.

use std::sync::{Arc, OnceLock};

use crate::error::{invalid, Error, Result};

/// Bounds and resolution of the log grid used by numeric Legendre transforms
/// and by every sampled supremum in this module.
pub const LOG_GRID_MIN_EXP: i32 = -8;
pub const LOG_GRID_MAX_EXP: i32 = 8;
pub const LOG_GRID_PER_DECADE: usize = 64;

/// Dilation parameters `t = 2^{±1}, …, 2^{±16}` used for the dilation indices.
pub const DILATION_OCTAVES: i32 = 16;

fn log_grid() -> &'static [f64] {
    static GRID: OnceLock<Vec<f64>> = OnceLock::new();
    GRID.get_or_init(|| {
        let decades = (LOG_GRID_MAX_EXP - LOG_GRID_MIN_EXP) as usize;
        (0..=decades * LOG_GRID_PER_DECADE)
            .map(|i| 10f64.powf(LOG_GRID_MIN_EXP as f64 + i as f64 / LOG_GRID_PER_DECADE as f64))
            .collect()
    })
}

#[derive(Debug, Clone)]
pub enum Shape {
    /// `coef · t^exp`.
    Power { coef: f64, exp: f64 },
    /// `t^lower` on `[0, knot]`, continued as `knot^{lower-upper} t^upper`.
    PiecewisePower { knot: f64, lower: f64, upper: f64 },
    /// `e^t - 1 - t`; an N-function outside Δ₂.
    Exponential,
    /// Numeric Legendre transform of another N-function.
    Conjugate(Arc<NFunction>),
}

#[derive(Debug, Clone)]
pub struct NFunction {
    shape: Shape,
    table: OnceLock<Arc<Vec<(f64, f64)>>>,
    indices: OnceLock<DilationIndices>,
    delta2: OnceLock<Delta2>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DilationIndices {
    pub lower: f64,
    pub upper: f64,
    /// Smallest and largest dilation parameter sampled (equal to `(0, ∞)`
    /// when the indices are closed-form).
    pub t_range: (f64, f64),
    pub analytic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delta2 {
    /// `sup φ(2t)/φ(t)`.
    pub c: f64,
    /// `log₂ C`.
    pub c_prime: f64,
    pub in_delta2: bool,
}

impl NFunction {
    fn from_shape(shape: Shape) -> Self {
        Self {
            shape,
            table: OnceLock::new(),
            indices: OnceLock::new(),
            delta2: OnceLock::new(),
        }
    }

    /// `t^p`, `p > 1`.
    pub fn power(p: f64) -> Result<Self> {
        Self::scaled_power(1.0, p)
    }

    /// `t^p / p`, `p > 1`.
    pub fn power_over_p(p: f64) -> Result<Self> {
        Self::scaled_power(1.0 / p, p)
    }

    pub fn scaled_power(coef: f64, exp: f64) -> Result<Self> {
        if !(exp > 1.0) || !exp.is_finite() {
            return Err(invalid(
                "phi.p",
                format!("N-function power needs exponent > 1, got {exp}"),
            ));
        }
        if !(coef > 0.0) || !coef.is_finite() {
            return Err(invalid("phi.coef", format!("need a positive coefficient, got {coef}")));
        }
        Ok(Self::from_shape(Shape::Power { coef, exp }))
    }

    /// `t^lower` below `knot`, `∝ t^upper` above, with `1 < lower ≤ upper`.
    pub fn piecewise(lower: f64, upper: f64, knot: f64) -> Result<Self> {
        if !(lower > 1.0) || !(upper >= lower) || !upper.is_finite() {
            return Err(invalid(
                "phi",
                format!("need 1 < lower ≤ upper < ∞, got {lower}, {upper}"),
            ));
        }
        if !(knot > 0.0) || !knot.is_finite() {
            return Err(invalid("phi.knot", format!("need a positive knot, got {knot}")));
        }
        Ok(Self::from_shape(Shape::PiecewisePower { knot, lower, upper }))
    }

    pub fn exponential() -> Self {
        Self::from_shape(Shape::Exponential)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn kind(&self) -> &'static str {
        match self.shape {
            Shape::Power { .. } => "power",
            Shape::PiecewisePower { .. } => "piecewise",
            Shape::Exponential => "exponential",
            Shape::Conjugate(_) => "numeric-conjugate",
        }
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.shape, Shape::Conjugate(_))
    }

    /// `φ(t)`. For numeric conjugates whose supremum leaves the Legendre grid
    /// this returns the grid maximum, a lower bound; use [`Self::try_value`] to
    /// detect that case.
    pub fn value(&self, t: f64) -> f64 {
        match self.try_value(t) {
            Ok(v) => v,
            Err(_) => self.conjugate_grid_max(t).0,
        }
    }

    pub fn try_value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Ok(0.0);
        }
        Ok(match &self.shape {
            Shape::Power { coef, exp } => coef * t.powf(*exp),
            Shape::PiecewisePower { knot, lower, upper } => {
                if t <= *knot {
                    t.powf(*lower)
                } else {
                    knot.powf(lower - upper) * t.powf(*upper)
                }
            }
            Shape::Exponential => {
                if t < 1e-4 {
                    t * t * (0.5 + t * (1.0 / 6.0 + t / 24.0))
                } else {
                    t.exp_m1() - t
                }
            }
            Shape::Conjugate(_) => return self.legendre(t),
        })
    }

    fn table(&self) -> &[(f64, f64)] {
        let Shape::Conjugate(base) = &self.shape else {
            return &[];
        };
        self.table
            .get_or_init(|| Arc::new(log_grid().iter().map(|&t| (t, base.value(t))).collect()))
    }

    fn conjugate_grid_max(&self, s: f64) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, &(t, phi)) in self.table().iter().enumerate() {
            let v = s * t - phi;
            if v > best.0 {
                best = (v, i);
            }
        }
        best
    }

    /// `sup_t {s t - φ(t)}`: scan the log grid, then golden-section search on
    /// the two cells around the grid maximiser (the objective is concave).
    fn legendre(&self, s: f64) -> Result<f64> {
        let Shape::Conjugate(base) = &self.shape else {
            unreachable!("legendre on an analytic shape")
        };
        let table = self.table();
        let (grid_best, idx) = self.conjugate_grid_max(s);
        if idx == 0 || idx == table.len() - 1 {
            return Err(Error::ConjugateUnbracketed { s, boundary_index: idx });
        }
        let objective = |t: f64| s * t - base.value(t);
        let (mut a, mut b) = (table[idx - 1].0, table[idx + 1].0);
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (objective(c), objective(d));
        for _ in 0..200 {
            if (b - a) <= 1e-15 * b {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = objective(d);
            }
        }
        Ok(grid_best.max(fc).max(fd))
    }

    /// `φ⁻¹(u)`: closed form for powers, monotone bisection otherwise.
    pub fn inverse(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Ok(0.0);
        }
        match &self.shape {
            Shape::Power { coef, exp } => Ok((u / coef).powf(1.0 / exp)),
            Shape::PiecewisePower { knot, lower, upper } => {
                if u <= knot.powf(*lower) {
                    Ok(u.powf(1.0 / lower))
                } else {
                    Ok((u * knot.powf(upper - lower)).powf(1.0 / upper))
                }
            }
            _ => self.inverse_by_bisection(u),
        }
    }

    fn inverse_by_bisection(&self, u: f64) -> Result<f64> {
        let (mut lo, mut hi) = (1.0f64, 1.0f64);
        while self.try_value(lo)? > u {
            lo /= 2.0;
            if lo < 1e-300 {
                return Err(invalid("u", format!("cannot bracket φ⁻¹({u})")));
            }
        }
        while self.try_value(hi)? < u {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(invalid("u", format!("cannot bracket φ⁻¹({u})")));
            }
        }
        for _ in 0..400 {
            let mid = (lo * hi).sqrt();
            if !(mid > lo && mid < hi) {
                break;
            }
            if self.try_value(mid)? < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Complementary function `φ̄(s) = sup_t {s t - φ(t)}`. Closed form for
    /// scaled powers, numeric Legendre transform otherwise.
    pub fn complementary(&self) -> NFunction {
        match self.shape {
            Shape::Power { coef, exp } => {
                let conj = exp / (exp - 1.0);
                let c = (1.0 / conj) * (coef * exp).powf(-1.0 / (exp - 1.0));
                NFunction::from_shape(Shape::Power { coef: c, exp: conj })
            }
            _ => NFunction::from_shape(Shape::Conjugate(Arc::new(self.clone()))),
        }
    }

    /// `h_φ(t) = sup_s φ(st)/φ(s)` sampled over the log grid of `s`.
    pub fn dilation_function(&self, t: f64) -> f64 {
        let mut sup: f64 = 0.0;
        for &s in log_grid() {
            let (Ok(num), Ok(den)) = (self.try_value(s * t), self.try_value(s)) else {
                continue;
            };
            if den > 0.0 {
                let r = num / den;
                if r.is_nan() {
                    continue;
                }
                sup = sup.max(r);
            }
        }
        sup
    }

    /// Lower and upper dilation indices `(i_φ, I_φ)`.
    pub fn dilation_indices(&self) -> DilationIndices {
        *self.indices.get_or_init(|| match self.shape {
            Shape::Power { exp, .. } => DilationIndices {
                lower: exp,
                upper: exp,
                t_range: (0.0, f64::INFINITY),
                analytic: true,
            },
            Shape::PiecewisePower { lower, upper, .. } => DilationIndices {
                lower,
                upper,
                t_range: (0.0, f64::INFINITY),
                analytic: true,
            },
            _ => self.dilation_indices_numeric(),
        })
    }

    /// Sampled indices: `i_φ = sup_{t<1} log h_φ(t)/log t`,
    /// `I_φ = inf_{t>1} log h_φ(t)/log t`.
    pub fn dilation_indices_numeric(&self) -> DilationIndices {
        let mut lower = f64::NEG_INFINITY;
        let mut upper = f64::INFINITY;
        for k in 1..=DILATION_OCTAVES {
            let small = 2f64.powi(-k);
            let large = 2f64.powi(k);
            lower = lower.max(self.dilation_function(small).ln() / small.ln());
            upper = upper.min(self.dilation_function(large).ln() / large.ln());
        }
        DilationIndices {
            lower,
            upper,
            t_range: (2f64.powi(-DILATION_OCTAVES), 2f64.powi(DILATION_OCTAVES)),
            analytic: false,
        }
    }

    /// Doubling constant and growth exponent.
    pub fn delta2_data(&self) -> Delta2 {
        *self.delta2.get_or_init(|| match self.shape {
            Shape::Power { exp, .. } => Delta2 {
                c: 2f64.powf(exp),
                c_prime: exp,
                in_delta2: true,
            },
            Shape::PiecewisePower { lower, upper, .. } => {
                let _ = lower;
                Delta2 {
                    c: 2f64.powf(upper),
                    c_prime: upper,
                    in_delta2: true,
                }
            }
            _ => self.delta2_numeric(),
        })
    }

    /// Sampled doubling constant. The supremum counts as finite when it has
    /// stopped growing over the top two decades of the grid.
    pub fn delta2_numeric(&self) -> Delta2 {
        let cutoff = 10f64.powi(LOG_GRID_MAX_EXP - 2);
        let (mut partial, mut full): (f64, f64) = (0.0, 0.0);
        for &t in log_grid() {
            let (Ok(num), Ok(den)) = (self.try_value(2.0 * t), self.try_value(t)) else {
                continue;
            };
            if !(den > 0.0) {
                continue;
            }
            let r = num / den;
            let r = if r.is_nan() { f64::INFINITY } else { r };
            full = full.max(r);
            if t <= cutoff {
                partial = partial.max(r);
            }
        }
        let stable = full.is_finite() && (full - partial) <= 1e-6 * full;
        let upper = self.dilation_indices().upper;
        Delta2 {
            c: full,
            c_prime: full.log2(),
            in_delta2: stable && upper.is_finite(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KitCheck {
    pub name: &'static str,
    pub samples: usize,
    /// Largest `lhs / rhs` seen; the inequality holds when this is ≤ 1 + tol.
    pub worst_ratio: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KitReport {
    pub checks: Vec<KitCheck>,
    /// `max_t φ⁻¹(t) φ̄⁻¹(t) / t`; the upper constant 2 is attained by `t²/2`.
    pub max_inverse_product_ratio: f64,
    pub min_inverse_product_ratio: f64,
    pub delta2: Delta2,
    pub all_ok: bool,
}

fn log_samples(lo_exp: f64, hi_exp: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * i as f64 / (count - 1) as f64))
        .collect()
}

fn check(name: &'static str, tolerance: f64, ratios: impl IntoIterator<Item = f64>) -> KitCheck {
    let mut samples = 0;
    let mut worst = f64::NEG_INFINITY;
    let mut finite = true;
    for r in ratios {
        samples += 1;
        finite &= r.is_finite();
        worst = worst.max(r);
    }
    KitCheck {
        name,
        samples,
        worst_ratio: worst,
        tolerance,
        ok: finite && worst <= 1.0 + tolerance,
    }
}

/// Checks on log-sampled arguments:
///
/// * Young's inequality `st ≤ φ(s) + φ̄(t)` on a 100 × 100 grid of `[1e-3, 1e3]²`;
/// * `t ≤ φ⁻¹(t) φ̄⁻¹(t) ≤ 2t` on `[1e-6, 1e6]`;
/// * `φ(λt) ≤ 2^{C'} λ^{C'} φ(t)` for `λ ∈ {2, 4, 8}`, only when `φ ∈ Δ₂`;
/// * `φ̄(φ(t)/t) ≤ φ(t)`.
///
/// Arguments where `φ(8t)` overflows are dropped. Tolerances are relative: `1e-12` with a closed-form `φ̄`, `1e-8` with a
/// numeric one.
pub fn inequality_kit(phi: &NFunction) -> Result<KitReport> {
    let conj = phi.complementary();
    let tol = if conj.is_numeric() { 1e-8 } else { 1e-12 };

    let grid = log_samples(-3.0, 3.0, 100);
    let conj_at: Vec<f64> = grid.iter().map(|&t| conj.try_value(t)).collect::<Result<_>>()?;
    let young = check(
        "young",
        tol,
        grid.iter().flat_map(|&s| {
            let phi_s = phi.value(s);
            grid.iter().zip(&conj_at).map(move |(&t, &ct)| s * t / (phi_s + ct))
        }),
    );

    let ts: Vec<f64> = log_samples(-6.0, 6.0, 61)
        .into_iter()
        .filter(|&t| phi.value(8.0 * t).is_finite())
        .collect();
    let mut products = Vec::with_capacity(ts.len());
    for &t in &ts {
        products.push(phi.inverse(t)? * conj.inverse(t)? / t);
    }
    let lower = check("inverse_product_lower", tol, products.iter().map(|&r| 1.0 / r));
    let upper = check("inverse_product_upper", tol, products.iter().map(|&r| r / 2.0));

    let delta2 = phi.delta2_data();
    let cp = delta2.c_prime;
    let growth = delta2.in_delta2.then(|| {
        check(
            "doubling_growth",
            tol,
            [2.0f64, 4.0, 8.0].iter().flat_map(|&lambda| {
                ts.iter()
                    .map(move |&t| phi.value(lambda * t) / (2f64.powf(cp) * lambda.powf(cp) * phi.value(t)))
            }),
        )
    });

    let mut conj_of_slope = Vec::with_capacity(ts.len());
    for &t in &ts {
        let phi_t = phi.value(t);
        conj_of_slope.push(conj.try_value(phi_t / t)? / phi_t);
    }
    let slope = check("conjugate_of_slope", tol, conj_of_slope);

    let checks: Vec<KitCheck> = [Some(young), Some(lower), Some(upper), growth, Some(slope)]
        .into_iter()
        .flatten()
        .collect();
    let all_ok = checks.iter().all(|c| c.ok);
    Ok(KitReport {
        checks,
        max_inverse_product_ratio: products.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        min_inverse_product_ratio: products.iter().copied().fold(f64::INFINITY, f64::min),
        delta2,
        all_ok,
    })
}
