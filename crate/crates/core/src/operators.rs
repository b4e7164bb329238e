//! The maximal truncated singular integral, dyadic maximal functions and the
//! sparse operators built from a [`SparseFamily`].

use rayon::prelude::*;

use crate::exact::ExactSum;
use crate::grid::{average, shifted_grids, DyadicCube, DyadicGrid, GridFunction};
use crate::sparse::SparseFamily;
use crate::weights::Weight;

/// A standard kernel in one dimension.
pub trait Kernel: Sync {
    fn eval(&self, x: f64, y: f64) -> f64;

    /// Constant `c` of the size and smoothness bounds.
    fn size_constant(&self) -> f64;

    /// Hölder exponent `δ ∈ (0, 1]` of the smoothness bound.
    fn smoothness(&self) -> f64;

    fn name(&self) -> &str;
}

/// `K(x, y) = 1 / (x - y)`.
///
/// The size quotient `|K|·|x-y|` is exactly 1, but the smoothness quotient
/// `|K(x,y) - K(x',y)|·|x-y|²/|x-x'| = |x-y|/|x'-y|` reaches 2 when
/// `|x-x'| = |x-y|/2`, so the shared constant is 2.
#[derive(Debug, Clone, Copy, Default)]
pub struct Hilbert;

impl Kernel for Hilbert {
    fn eval(&self, x: f64, y: f64) -> f64 {
        1.0 / (x - y)
    }

    fn size_constant(&self) -> f64 {
        2.0
    }

    fn smoothness(&self) -> f64 {
        1.0
    }

    fn name(&self) -> &str {
        "hilbert"
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCheck {
    pub max_size_quotient: f64,
    pub max_smoothness_quotient: f64,
    pub ok: bool,
}

/// Samples the size and smoothness quotients of `kernel` on a deterministic
/// set of pairs and triples with `|x - x'| ≤ |x - y| / 2`.
pub fn check_kernel(kernel: &dyn Kernel, samples: usize) -> KernelCheck {
    let delta = kernel.smoothness();
    let mut size_q: f64 = 0.0;
    let mut smooth_q: f64 = 0.0;
    // low-discrepancy points in [-4, 4)
    let point = |i: usize, stride: f64| ((i as f64 * stride).fract() - 0.5) * 8.0;
    for i in 0..samples {
        let x = point(i, 0.618_033_988_749_895);
        let y = point(i, 0.414_213_562_373_095_1) + 1e-3;
        if x == y {
            continue;
        }
        let r = (x - y).abs();
        size_q = size_q.max(kernel.eval(x, y).abs() * r);
        for frac in [0.5, 0.25, 1e-3] {
            for sign in [1.0, -1.0] {
                let xp = x + sign * frac * r;
                let dk = (kernel.eval(x, y) - kernel.eval(xp, y)).abs();
                let q = dk * r.powf(1.0 + delta) / (frac * r).powf(delta);
                smooth_q = smooth_q.max(q);
            }
        }
    }
    let c = kernel.size_constant() * (1.0 + 1e-9);
    KernelCheck {
        max_size_quotient: size_q,
        max_smoothness_quotient: smooth_q,
        ok: size_q <= c && smooth_q <= c,
    }
}

/// Contribution of cell `j` to the truncated integral at the midpoint of
/// cell `i`: `K(x_i, y_j) · f_j · h`.
#[inline]
pub fn truncation_term(f: &GridFunction, kernel: &dyn Kernel, i: usize, j: usize) -> f64 {
    let d = f.domain();
    kernel.eval(d.midpoint(i), d.midpoint(j)) * f.values()[j] * d.cell_width()
}

/// `Σ_{k1 ≤ |i - j| < k2} K(x_i, y_j) f_j h`, correctly rounded. Truncation
/// radii are `ε = k·h`.
pub fn truncated_integral(f: &GridFunction, kernel: &dyn Kernel, i: usize, k1: usize, k2: usize) -> f64 {
    let n = f.len();
    let mut acc = ExactSum::new();
    for j in 0..n {
        let dist = i.abs_diff(j);
        if dist >= k1.max(1) && dist < k2 {
            acc.add(truncation_term(f, kernel, i, j));
        }
    }
    acc.value()
}

/// `T**f` at every cell midpoint.
///
/// With `G(ε) = Σ_{|x-y| ≥ ε} K(x, y) f(y) h` the truncated integral over the
/// annulus `ε₁ ≤ |x-y| < ε₂` is `G(ε₁) - G(ε₂)`, and `G` only changes at
/// `ε = k·h`. One outward-to-inward pass over `k = N, …, 1` therefore yields
/// `T**f(x) = max G - min G`. The partial sums are kept exactly and the
/// result is rounded once, so it equals the largest correctly rounded
/// annulus sum bit for bit. The cell containing `x` never contributes.
pub fn maximal_truncated(f: &GridFunction, kernel: &dyn Kernel) -> GridFunction {
    let n = f.len();
    let values: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| maximal_truncated_at(f, kernel, i))
        .collect();
    GridFunction::new(*f.domain(), values).expect("finite kernel sums")
}

fn maximal_truncated_at(f: &GridFunction, kernel: &dyn Kernel, i: usize) -> f64 {
    use std::cmp::Ordering::Greater;
    use std::cmp::Ordering::Less;

    let n = f.len();
    let vals = f.values();
    // G at k = N is the empty sum.
    let mut g = ExactSum::new();
    let mut hi = ExactSum::new();
    let mut lo = ExactSum::new();
    let (mut hi_r, mut lo_r) = (0.0f64, 0.0f64);
    for k in (1..n).rev() {
        let mut changed = false;
        if i >= k && vals[i - k] != 0.0 {
            g.add(truncation_term(f, kernel, i, i - k));
            changed = true;
        }
        if i + k < n && vals[i + k] != 0.0 {
            g.add(truncation_term(f, kernel, i, i + k));
            changed = true;
        }
        if !changed {
            continue;
        }
        let r = g.value();
        if r > hi_r || (r == hi_r && g.cmp_exact(&hi) == Greater) {
            hi = g.clone();
            hi_r = r;
        }
        if r < lo_r || (r == lo_r && g.cmp_exact(&lo) == Less) {
            lo = g.clone();
            lo_r = r;
        }
    }
    hi.difference(&lo)
}

/// Dyadic maximal function of one grid: at each cell, the largest average of
/// `|f|` over in-domain cubes of `grid` containing it.
pub fn dyadic_maximal(f: &GridFunction, grid: &DyadicGrid) -> GridFunction {
    let abs = f.abs();
    let sums = grid.level_sums(abs.values());
    let mut out = abs.values().to_vec();
    for k in grid.levels() {
        for (j, q) in grid.cubes_at_level(k).enumerate() {
            let avg = sums.at(k)[j] / q.width as f64;
            for x in q.cells() {
                if avg > out[x] {
                    out[x] = avg;
                }
            }
        }
    }
    GridFunction::new(*f.domain(), out).expect("finite averages")
}

/// Cell-wise maximum of the dyadic maximal functions of the three grids.
pub fn best_maximal(f: &GridFunction) -> GridFunction {
    let grids = shifted_grids(*f.domain());
    let mut out = dyadic_maximal(f, &grids[0]).into_values();
    for g in &grids[1..] {
        for (o, v) in out.iter_mut().zip(dyadic_maximal(f, g).values()) {
            *o = o.max(*v);
        }
    }
    GridFunction::new(*f.domain(), out).expect("finite averages")
}

/// `M^D_w f(x) = sup_{x ∈ Q ∈ D} w(Q)⁻¹ ∫_Q |f| w`.
pub fn weighted_dyadic_maximal(f: &GridFunction, w: &Weight, grid: &DyadicGrid) -> GridFunction {
    let wv = w.values().values();
    let fw: Vec<f64> = f.values().iter().zip(wv).map(|(a, b)| a.abs() * b).collect();
    let num = grid.level_sums(&fw);
    let den = grid.level_sums(wv);
    let mut out: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    for k in grid.levels() {
        for (j, q) in grid.cubes_at_level(k).enumerate() {
            let avg = num.at(k)[j] / den.at(k)[j];
            for x in q.cells() {
                if avg > out[x] {
                    out[x] = avg;
                }
            }
        }
    }
    GridFunction::new(*f.domain(), out).expect("finite averages")
}

/// `A f = Σ_{Q ∈ S} f_Q χ_Q`.
pub fn sparse_operator(f: &GridFunction, family: &SparseFamily) -> GridFunction {
    let mut out = vec![0.0; f.len()];
    for q in family.cubes() {
        let avg = average(f, q);
        for x in q.cells() {
            out[x] += avg;
        }
    }
    GridFunction::new(*f.domain(), out).expect("finite averages")
}

/// Average of `f` (extended by zero) over the concentric dilate `2^m Q`,
/// divided by the full dilate measure.
pub fn dilate_average(f: &GridFunction, q: &DyadicCube, m: u32) -> f64 {
    if m == 0 {
        return average(f, q);
    }
    let vals = f.values();
    let n = vals.len() as f64;
    let half = q.width as f64 * 2f64.powi(m as i32) / 2.0;
    let c = q.center();
    let a = (c - half).max(0.0);
    let b = (c + half).min(n);
    if b <= a {
        return 0.0;
    }
    // ∫ over [a, b) in cell units
    let first_full = a.ceil() as usize;
    let last_full = b.floor() as usize;
    let mut mass = 0.0;
    if first_full > last_full {
        // inside a single cell
        mass += (b - a) * vals[a.floor() as usize];
    } else {
        if (first_full as f64) > a {
            mass += (first_full as f64 - a) * vals[first_full - 1];
        }
        mass += vals[first_full..last_full].iter().sum::<f64>();
        if (last_full as f64) < b {
            mass += (b - last_full as f64) * vals[last_full];
        }
    }
    mass / (2.0 * half)
}

/// `T_{S,m} f = Σ_{Q ∈ S} f_{2^m Q} χ_Q`.
pub fn shifted_sparse_operator(f: &GridFunction, family: &SparseFamily, m: u32) -> GridFunction {
    let mut out = vec![0.0; f.len()];
    for q in family.cubes() {
        let avg = dilate_average(f, q, m);
        for x in q.cells() {
            out[x] += avg;
        }
    }
    GridFunction::new(*f.domain(), out).expect("finite averages")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    #[test]
    fn hilbert_satisfies_standard_bounds() {
        let check = check_kernel(&Hilbert, 2000);
        assert!(check.ok, "{check:?}");
        assert!((check.max_size_quotient - 1.0).abs() < 1e-9);
        // attained at |x - x'| = |x - y| / 2 on the near side
        assert!((check.max_smoothness_quotient - 2.0).abs() < 1e-9);
    }

    #[test]
    fn t_star_star_of_zero_is_zero() {
        let d = Domain::new(0.0, 1.0, 6).unwrap();
        let z = GridFunction::zeros(d);
        assert!(maximal_truncated(&z, &Hilbert).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dyadic_maximal_examples() {
        let d = Domain::new(0.0, 8.0, 5).unwrap();
        let f = GridFunction::indicator(d, 0.0, 1.0);
        let g = DyadicGrid::standard(d);
        let mf = dyadic_maximal(&f, &g);
        assert_eq!(mf.values()[d.cell_of(3.0).unwrap()], 0.25);
        for (m, v) in mf.values().iter().zip(f.values()) {
            assert!(m >= v);
        }
        let c = GridFunction::constant(d, -1.5).unwrap();
        for grid in shifted_grids(d) {
            assert!(dyadic_maximal(&c, &grid).values().iter().all(|&v| v == 1.5));
        }
    }

    #[test]
    fn weighted_maximal_examples() {
        let d = Domain::new(0.0, 1.0, 5).unwrap();
        let f = GridFunction::from_sampler(d, |x| (7.0 * x).cos()).unwrap();
        let unit = Weight::unit(d);
        let w = crate::weights::power_weight(0.7, d).unwrap();
        for g in shifted_grids(d) {
            let a = weighted_dyadic_maximal(&f, &unit, &g);
            let b = dyadic_maximal(&f, &g);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-14 * y.max(1.0));
            }
            let q = g.cube(2, 0);
            let ind = GridFunction::indicator(d, d.cell_bounds(q.start).0, d.cell_bounds(q.end() - 1).1);
            let m = weighted_dyadic_maximal(&ind, &w, &g);
            for x in q.cells() {
                assert!((m.values()[x] - 1.0).abs() < 1e-14);
            }
            let one = GridFunction::constant(d, 1.0).unwrap();
            let m = weighted_dyadic_maximal(&one, &w, &g);
            assert!(m.values().iter().all(|v| (v - 1.0).abs() < 1e-14));
        }
    }

    #[test]
    fn dilate_average_examples() {
        let d = Domain::new(0.0, 1.0, 4).unwrap();
        let g = DyadicGrid::standard(d);
        let one = GridFunction::constant(d, 1.0).unwrap();
        let root = g.cube(0, 0);
        assert_eq!(dilate_average(&one, &root, 1), 0.5);
        assert_eq!(dilate_average(&one, &root, 3), 1.0 / 8.0);
        // a single cell dilated by 2 covers half of each neighbour
        let f = GridFunction::new(d, (0..16).map(|i| i as f64).collect()).unwrap();
        let cell = g.cube(4, 5);
        assert_eq!(dilate_average(&f, &cell, 1), (0.5 * 4.0 + 5.0 + 0.5 * 6.0) / 2.0);
        let f = GridFunction::from_sampler(d, |x| x * x).unwrap();
        for q in g.cubes() {
            assert_eq!(dilate_average(&f, &q, 0), average(&f, &q));
        }
    }
}
