//! Distribution functions, decreasing rearrangements and the Lebesgue,
//! Lorentz and Orlicz norms computed from them.

use crate::error::{invalid, Result};
use crate::exact::ExactSum;
use crate::grid::GridFunction;
use crate::weights::Weight;
use crate::young::{NFunction, Shape};

/// Dilations `2^{-8}, …, 2^8` probed by the numeric Boyd estimator.
pub const BOYD_OCTAVES: i32 = 8;

#[derive(Debug, Clone)]
pub enum SpaceSpec {
    Lebesgue { p: f64 },
    Lorentz { p: f64, q: f64 },
    Orlicz(NFunction),
}

impl SpaceSpec {
    pub fn lebesgue(p: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(invalid("space.p", format!("need 0 < p < ∞, got {p}")));
        }
        Ok(Self::Lebesgue { p })
    }

    pub fn lorentz(p: f64, q: f64) -> Result<Self> {
        if !(p > 0.0) || !p.is_finite() {
            return Err(invalid("space.p", format!("need 0 < p < ∞, got {p}")));
        }
        if !(q > 0.0) || !q.is_finite() {
            return Err(invalid("space.q", format!("need 0 < q < ∞, got {q}")));
        }
        Ok(Self::Lorentz { p, q })
    }

    pub fn orlicz(phi: NFunction) -> Self {
        Self::Orlicz(phi)
    }

    pub fn family(&self) -> &'static str {
        match self {
            Self::Lebesgue { .. } => "lebesgue",
            Self::Lorentz { .. } => "lorentz",
            Self::Orlicz(_) => "orlicz",
        }
    }

    /// Closed-form Boyd indices `(p_X, q_X)`.
    pub fn boyd_indices(&self) -> (f64, f64) {
        match self {
            Self::Lebesgue { p } | Self::Lorentz { p, .. } => (*p, *p),
            Self::Orlicz(phi) => {
                let idx = phi.dilation_indices();
                (idx.lower, idx.upper)
            }
        }
    }

    /// Convexity parameter `r`.
    pub fn convexity(&self) -> f64 {
        match self {
            Self::Lebesgue { p } => p.min(1.0),
            Self::Lorentz { p, q } => p.min(*q).min(1.0),
            Self::Orlicz(_) => 1.0,
        }
    }

    /// Whether the formula defines a norm rather than a quasi-norm.
    pub fn is_banach(&self) -> bool {
        match self {
            Self::Lebesgue { p } => *p >= 1.0,
            Self::Lorentz { p, q } => (*p > 1.0 && *q >= 1.0) || (*p == 1.0 && *q == 1.0),
            Self::Orlicz(_) => true,
        }
    }

    /// The space `X^r` normed by `‖|f|^r‖_X^{1/r}`, in closed form.
    pub fn power(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid("r", format!("need 0 < r < ∞, got {r}")));
        }
        match self {
            Self::Lebesgue { p } => Self::lebesgue(p * r),
            Self::Lorentz { p, q } => Self::lorentz(p * r, q * r),
            Self::Orlicz(phi) => match phi.shape() {
                Shape::Power { coef, exp } => Ok(Self::Orlicz(NFunction::scaled_power(*coef, exp * r)?)),
                Shape::PiecewisePower { knot, lower, upper } => Ok(Self::Orlicz(NFunction::piecewise(
                    lower * r,
                    upper * r,
                    knot.powf(1.0 / r),
                )?)),
                _ => Err(invalid("r", format!("no closed form for X^r with {} φ", phi.kind()))),
            },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Self::Lebesgue { p } => format!("L^{p}"),
            Self::Lorentz { p, q } => format!("L^({p},{q})"),
            Self::Orlicz(phi) => format!("L^phi[{}]", phi.kind()),
        }
    }
}

/// Decreasing rearrangement as a step function on `[0, total)`: value
/// `values[k]` on `[ends[k-1], ends[k])`, values strictly decreasing and
/// non-negative.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement {
    values: Vec<f64>,
    lengths: Vec<f64>,
    ends: Vec<f64>,
}

impl Rearrangement {
    /// Builds a rearrangement from `(value, mass)` atoms.
    pub fn from_atoms(atoms: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().map(|(v, m)| (v.abs(), m)).collect();
        atoms.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut out = Self {
            values: Vec::new(),
            lengths: Vec::new(),
            ends: Vec::new(),
        };
        let mut cumulative = ExactSum::new();
        let mut i = 0;
        while i < atoms.len() {
            let v = atoms[i].0;
            let mut step = ExactSum::new();
            while i < atoms.len() && atoms[i].0 == v {
                step.add(atoms[i].1);
                i += 1;
            }
            cumulative.add_sum(&step);
            out.values.push(v);
            out.lengths.push(step.value());
            out.ends.push(cumulative.value());
        }
        out
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn ends(&self) -> &[f64] {
        &self.ends
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn total_measure(&self) -> f64 {
        self.ends.last().copied().unwrap_or(0.0)
    }

    /// `f*(t)`, right-continuous, zero past the total measure.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.ends.partition_point(|&e| e <= t);
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// Lebesgue measure of `{f* > λ}`.
    pub fn distribution(&self, lambda: f64) -> f64 {
        let k = self.values.partition_point(|&v| v > lambda);
        if k == 0 {
            0.0
        } else {
            self.ends[k - 1]
        }
    }

    /// `D_t f*(s) = f*(s/t)`.
    pub fn dilate(&self, t: f64) -> Self {
        Self {
            values: self.values.clone(),
            lengths: self.lengths.iter().map(|l| l * t).collect(),
            ends: self.ends.iter().map(|e| e * t).collect(),
        }
    }

    fn starts(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(0.0).chain(self.ends.iter().copied())
    }

    /// Norm of the rearrangement in the unweighted space `X` on `[0, ∞)`.
    pub fn norm(&self, x: &SpaceSpec) -> f64 {
        match x {
            SpaceSpec::Lebesgue { p } => {
                let mut s = ExactSum::new();
                for (v, l) in self.values.iter().zip(&self.lengths) {
                    if *v > 0.0 {
                        s.add(v.powf(*p) * l);
                    }
                }
                s.value().powf(1.0 / p)
            }
            SpaceSpec::Lorentz { p, q } => {
                let e = q / p;
                let mut s = ExactSum::new();
                for ((v, a), b) in self.values.iter().zip(self.starts()).zip(&self.ends) {
                    if *v > 0.0 {
                        s.add(v.powf(*q) * (p / q) * (b.powf(e) - a.powf(e)));
                    }
                }
                s.value().powf(1.0 / q)
            }
            SpaceSpec::Orlicz(phi) => self.luxemburg(phi),
        }
    }

    /// `∫ φ(f*/λ)`.
    pub fn orlicz_integral(&self, phi: &NFunction, lambda: f64) -> f64 {
        let mut s = ExactSum::new();
        for (v, l) in self.values.iter().zip(&self.lengths) {
            if *v > 0.0 {
                s.add(phi.value(v / lambda) * l);
            }
        }
        s.value()
    }

    /// `inf{λ > 0 : ∫ φ(f*/λ) ≤ 1}` by geometric bisection; zero for `f ≡ 0`.
    pub fn luxemburg(&self, phi: &NFunction) -> f64 {
        let top = self.values.first().copied().unwrap_or(0.0);
        if !(top > 0.0) {
            return 0.0;
        }
        let (mut lo, mut hi) = (top, top);
        while self.orlicz_integral(phi, hi) > 1.0 {
            hi *= 2.0;
        }
        while self.orlicz_integral(phi, lo) <= 1.0 {
            lo /= 2.0;
        }
        while hi / lo - 1.0 > 1e-14 {
            let mid = (lo * hi).sqrt();
            if !(mid > lo && mid < hi) {
                break;
            }
            if self.orlicz_integral(phi, mid) <= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn cell_mass(w: Option<&Weight>, cell: usize, h: f64) -> f64 {
    match w {
        Some(w) => w.values().values()[cell] * h,
        None => h,
    }
}

/// `w({|f| > λ})` as an exact sum of cell masses.
pub fn distribution(f: &GridFunction, w: Option<&Weight>, lambda: f64) -> f64 {
    let h = f.domain().cell_width();
    let mut s = ExactSum::new();
    for (i, v) in f.values().iter().enumerate() {
        if v.abs() > lambda {
            s.add(cell_mass(w, i, h));
        }
    }
    s.value()
}

/// `f*_w`: cell values sorted by magnitude, each cell contributing its
/// `w`-mass as length.
pub fn rearrangement(f: &GridFunction, w: Option<&Weight>) -> Result<Rearrangement> {
    if let Some(w) = w {
        f.check_compatible(w.values())?;
    }
    let h = f.domain().cell_width();
    Ok(Rearrangement::from_atoms(
        f.values().iter().enumerate().map(|(i, v)| (*v, cell_mass(w, i, h))),
    ))
}

/// `‖f‖_{X(w)} = ‖f*_w‖_X`.
pub fn space_norm(f: &GridFunction, x: &SpaceSpec, w: Option<&Weight>) -> Result<f64> {
    Ok(rearrangement(f, w)?.norm(x))
}

/// `‖|f|^r‖_{X(w)}^{1/r}`, the norm of `f` in `X^r(w)`.
pub fn power_norm(f: &GridFunction, x: &SpaceSpec, r: f64, w: Option<&Weight>) -> Result<f64> {
    let fr = f.map(|v| v.abs().powf(r))?;
    Ok(space_norm(&fr, x, w)?.powf(1.0 / r))
}

/// `Σ φ(|f|) w h`.
pub fn modular(f: &GridFunction, phi: &NFunction, w: Option<&Weight>) -> Result<f64> {
    if let Some(w) = w {
        f.check_compatible(w.values())?;
    }
    let h = f.domain().cell_width();
    let mut s = ExactSum::new();
    for (i, v) in f.values().iter().enumerate() {
        s.add(phi.value(v.abs()) * cell_mass(w, i, h));
    }
    Ok(s.value())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoydEstimate {
    pub lower: f64,
    pub upper: f64,
    /// `(t, h_X(t))` for every probed dilation.
    pub dilation_norms: Vec<(f64, f64)>,
}

/// Probe rearrangements for [`boyd_indices_numeric`]: an indicator, a
/// harmonic staircase and a geometric staircase with long tail.
pub fn default_boyd_probes() -> Vec<Rearrangement> {
    vec![
        Rearrangement::from_atoms([(1.0, 1.0)]),
        Rearrangement::from_atoms((1..=16).map(|k| (1.0 / k as f64, 1.0))),
        Rearrangement::from_atoms((0..12).map(|k| (2f64.powi(-k), 2f64.powi(k)))),
        Rearrangement::from_atoms((0..12).map(|k| (2f64.powi(k), 2f64.powi(-2 * k)))),
    ]
}

/// Numeric Boyd indices: `h_X(t) = max_probe ‖D_t f*‖/‖f*‖`,
/// `p_X = sup_{t>1} log t / log h_X(t)`, `q_X = inf_{t<1} log t / log h_X(t)`.
pub fn boyd_indices_numeric(x: &SpaceSpec, probes: &[Rearrangement]) -> BoydEstimate {
    let norms: Vec<f64> = probes.iter().map(|r| r.norm(x)).collect();
    let mut dilation_norms = Vec::new();
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for k in (-BOYD_OCTAVES..=BOYD_OCTAVES).filter(|&k| k != 0) {
        let t = 2f64.powi(k);
        let h = probes
            .iter()
            .zip(&norms)
            .filter(|(_, n)| **n > 0.0)
            .map(|(r, n)| r.dilate(t).norm(x) / n)
            .fold(0.0, f64::max);
        dilation_norms.push((t, h));
        let ratio = t.ln() / h.ln();
        if k > 0 {
            if h > 1.0 {
                lower = lower.max(ratio);
            }
        } else if h < 1.0 {
            upper = upper.min(ratio);
        }
    }
    BoydEstimate {
        lower,
        upper,
        dilation_norms,
    }
}
