//! Weights and their Muckenhoupt characteristics.
//!
//! Every supremum over cubes ranges over the in-domain cubes of the three
//! shifted grids, so each characteristic is an exact finite maximum.

use std::collections::HashMap;
use std::sync::RwLock;

use crate::error::{invalid, Error, Result};
use crate::grid::{shifted_grids, Domain, DyadicCube, DyadicGrid, GridFunction};
use crate::operators::best_maximal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Characteristic {
    Ap(u64),
    A1,
    AinfGrid(u8),
    AinfAll,
}

/// A strictly positive cell-wise constant weight.
///
/// Characteristics are memoised. The cache is published under a lock, so
/// concurrent readers see either nothing or a complete value.
#[derive(Debug)]
pub struct Weight {
    values: GridFunction,
    cache: RwLock<HashMap<Characteristic, f64>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Self {
            values: self.values.clone(),
            cache: RwLock::new(self.cache.read().expect("cache lock").clone()),
        }
    }
}

impl PartialEq for Weight {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values
    }
}

impl Weight {
    pub fn new(values: GridFunction) -> Result<Self> {
        if let Some((cell, &value)) = values.values().iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
            return Err(Error::NonPositiveWeight { cell, value });
        }
        Ok(Self {
            values,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn from_values(domain: Domain, values: Vec<f64>) -> Result<Self> {
        Self::new(GridFunction::new(domain, values)?)
    }

    /// `w ≡ 1`.
    pub fn unit(domain: Domain) -> Self {
        Self::new(GridFunction::constant(domain, 1.0).expect("finite")).expect("positive")
    }

    pub fn values(&self) -> &GridFunction {
        &self.values
    }

    pub fn domain(&self) -> &Domain {
        self.values.domain()
    }

    /// `w(Q)`.
    pub fn mass(&self, q: &DyadicCube) -> f64 {
        self.values.values()[q.cells()].iter().sum::<f64>() * self.domain().cell_width()
    }

    pub fn total_mass(&self) -> f64 {
        self.values.integral()
    }

    /// Cell-wise `w^e`.
    pub fn powf(&self, e: f64) -> Result<Weight> {
        Weight::new(self.values.map(|v| v.powf(e))?)
    }

    fn cached(&self, key: Characteristic, compute: impl FnOnce() -> f64) -> f64 {
        if let Some(&v) = self.cache.read().expect("cache lock").get(&key) {
            return v;
        }
        let v = compute();
        self.cache.write().expect("cache lock").entry(key).or_insert(v);
        v
    }

    /// `[w]_{A_p} = sup_Q ⟨w⟩_Q ⟨w^{1-p'}⟩_Q^{p-1}`.
    pub fn ap_characteristic(&self, p: f64) -> Result<f64> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(invalid("p", format!("A_p needs 1 < p < ∞, got {p}")));
        }
        Ok(self.cached(Characteristic::Ap(p.to_bits()), || {
            let dual: Vec<f64> = self.values.values().iter().map(|&v| v.powf(-1.0 / (p - 1.0))).collect();
            let mut sup: f64 = 0.0;
            for grid in shifted_grids(*self.domain()) {
                let sw = grid.level_sums(self.values.values());
                let ss = grid.level_sums(&dual);
                for k in grid.levels() {
                    let width = grid.width_at(k) as f64;
                    for (a, b) in sw.at(k).iter().zip(ss.at(k)) {
                        sup = sup.max((a / width) * (b / width).powf(p - 1.0));
                    }
                }
            }
            sup
        }))
    }

    /// `[w]_{A_1} = sup_x Mw(x) / w(x)`, with `M` the three-grid maximal function.
    pub fn a1_characteristic(&self) -> f64 {
        self.cached(Characteristic::A1, || {
            let mw = best_maximal(&self.values);
            mw.values()
                .iter()
                .zip(self.values.values())
                .map(|(m, w)| m / w)
                .fold(0.0, f64::max)
        })
    }

    /// Fujii–Wilson `[w]_{A_∞} = sup_R w(R)⁻¹ ∫_R M(w χ_R)` over the cubes of
    /// `grid`, with `M` the dyadic maximal function of the same grid.
    ///
    /// For `x ∈ R` only cubes `Q ⊆ R` matter in `M(w χ_R)(x)`, so one pass from
    /// the cells upward keeps a running maximum of the averages of every cube
    /// containing each cell.
    pub fn ainf_characteristic(&self, grid: &DyadicGrid) -> f64 {
        self.cached(Characteristic::AinfGrid(grid.shift()), || {
            let w = self.values.values();
            let sums = grid.level_sums(w);
            let mut running = w.to_vec();
            let mut sup: f64 = 1.0;
            for k in grid.levels().rev() {
                for (j, q) in grid.cubes_at_level(k).enumerate() {
                    let mass = sums.at(k)[j];
                    let avg = mass / q.width as f64;
                    let mut acc = 0.0;
                    for x in q.cells() {
                        if avg > running[x] {
                            running[x] = avg;
                        }
                        acc += running[x];
                    }
                    sup = sup.max(acc / mass);
                }
            }
            sup
        })
    }

    /// Largest Fujii–Wilson characteristic over the three grids.
    pub fn ainf_characteristic_all(&self) -> f64 {
        self.cached(Characteristic::AinfAll, || {
            shifted_grids(*self.domain())
                .iter()
                .map(|g| self.ainf_characteristic(g))
                .fold(1.0, f64::max)
        })
    }
}

/// `σ = w^{1-p'}`.
pub fn dual_weight(w: &Weight, p: f64) -> Result<Weight> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid("p", format!("dual weight needs 1 < p < ∞, got {p}")));
    }
    w.powf(-1.0 / (p - 1.0))
}

/// `|x|^a` with every cell holding the exact cell average, so `w(Q)` is exact
/// for every cube including the one touching the origin.
pub fn power_weight(a: f64, domain: Domain) -> Result<Weight> {
    if !(a > -1.0) || !a.is_finite() {
        return Err(Error::NonIntegrablePower(a));
    }
    if a == 0.0 {
        return Ok(Weight::unit(domain));
    }
    let antiderivative = |x: f64| x.signum() * x.abs().powf(a + 1.0) / (a + 1.0);
    let values = (0..domain.cells())
        .map(|i| {
            let (l, r) = domain.cell_bounds(i);
            (antiderivative(r) - antiderivative(l)) / (r - l)
        })
        .collect();
    Weight::from_values(domain, values)
}

/// Result of the openness step `w ∈ A_p ⇒ w ∈ A_{p-ε}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpennessStep {
    pub eps: f64,
    pub p_minus_eps: f64,
    pub sigma_ainf: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `ε = (p-1)/(1 + 2^{n+1}[σ]_{A_∞})` and the check
/// `[w]_{A_{p-ε}} ≤ 2^{p-1}[w]_{A_p}`.
pub fn openness_step(w: &Weight, p: f64, n: u32) -> Result<OpennessStep> {
    if n == 0 {
        return Err(invalid("n", "dimension must be at least 1"));
    }
    let sigma = dual_weight(w, p)?;
    let sigma_ainf = sigma.ainf_characteristic_all();
    let eps = openness_eps(p, n, sigma_ainf);
    let p_minus_eps = p - eps;
    let lhs = w.ap_characteristic(p_minus_eps)?;
    let rhs = 2f64.powf(p - 1.0) * w.ap_characteristic(p)?;
    Ok(OpennessStep {
        eps,
        p_minus_eps,
        sigma_ainf,
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-9),
    })
}

pub fn openness_eps(p: f64, n: u32, sigma_ainf: f64) -> f64 {
    (p - 1.0) / (1.0 + 2f64.powi(n as i32 + 1) * sigma_ainf)
}
