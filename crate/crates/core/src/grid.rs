//! Discretized interval, cell-wise constant functions and the three shifted
//! dyadic grids.
//!
//! Everything is measured in cells: a domain of refinement level `J` holds
//! `N = 2^J` cells of width `h = len / N`, and a dyadic cube of level `k` is a
//! run of `2^(J-k)` consecutive cells. The shifted grids translate level `k` by
//! `(-1)^k · t · 2^(J-k) / 3` cells (`t = 0, 1, 2`), rounded to the nearest
//! cell; the alternating sign keeps consecutive levels nested.

use crate::error::{Error, Result};

/// Largest supported refinement level.
pub const MAX_LEVEL: u32 = 24;

/// Number of shifted grids in one dimension.
pub const GRID_COUNT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    lo: f64,
    len: f64,
    level: u32,
}

impl Domain {
    pub fn new(lo: f64, len: f64, level: u32) -> Result<Self> {
        if !lo.is_finite() || !len.is_finite() || len <= 0.0 {
            return Err(Error::InvalidDomain(format!(
                "need finite lo and len > 0, got lo = {lo}, len = {len}"
            )));
        }
        if level == 0 || level > MAX_LEVEL {
            return Err(Error::InvalidDomain(format!(
                "refinement level must be in 1..={MAX_LEVEL}, got {level}"
            )));
        }
        Ok(Self { lo, len, level })
    }

    /// `[0, 1)` at the given level.
    pub fn unit(level: u32) -> Result<Self> {
        Self::new(0.0, 1.0, level)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn hi(&self) -> f64 {
        self.lo + self.len
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells(&self) -> usize {
        1usize << self.level
    }

    pub fn cell_width(&self) -> f64 {
        self.len / self.cells() as f64
    }

    pub fn midpoint(&self, cell: usize) -> f64 {
        self.lo + (cell as f64 + 0.5) * self.cell_width()
    }

    pub fn cell_bounds(&self, cell: usize) -> (f64, f64) {
        let h = self.cell_width();
        (self.lo + cell as f64 * h, self.lo + (cell + 1) as f64 * h)
    }

    /// Cell containing `x`, if `x` lies in `[lo, lo + len)`.
    pub fn cell_of(&self, x: f64) -> Option<usize> {
        let pos = ((x - self.lo) / self.cell_width()).floor();
        if pos >= 0.0 && pos < self.cells() as f64 {
            Some(pos as usize)
        } else {
            None
        }
    }

    /// The same interval one level finer or coarser.
    pub fn with_level(&self, level: u32) -> Result<Self> {
        Self::new(self.lo, self.len, level)
    }

    pub(crate) fn same_cells(&self, other: &Domain) -> bool {
        self.lo == other.lo && self.len == other.len && self.level == other.level
    }
}

/// A function constant on every cell of a [`Domain`], extended by zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.cells() {
            return Err(Error::LengthMismatch {
                expected: domain.cells(),
                got: values.len(),
            });
        }
        if let Some((cell, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { cell, value });
        }
        Ok(Self { domain, values })
    }

    /// Samples `sampler` at every cell midpoint.
    pub fn from_sampler(domain: Domain, sampler: impl Fn(f64) -> f64) -> Result<Self> {
        let values = (0..domain.cells()).map(|i| sampler(domain.midpoint(i))).collect();
        Self::new(domain, values)
    }

    pub fn constant(domain: Domain, c: f64) -> Result<Self> {
        Self::new(domain, vec![c; domain.cells()])
    }

    pub fn zeros(domain: Domain) -> Self {
        Self {
            domain,
            values: vec![0.0; domain.cells()],
        }
    }

    /// Midpoint-sampled indicator of `[a, b)`.
    pub fn indicator(domain: Domain, a: f64, b: f64) -> Self {
        let values = (0..domain.cells())
            .map(|i| {
                let x = domain.midpoint(i);
                if a <= x && x < b {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Self { domain, values }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.domain, self.values.iter().map(|&v| op(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        Self {
            domain: self.domain,
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            domain: self.domain,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    /// `∫ f` over the domain.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.domain.cell_width()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub(crate) fn check_compatible(&self, other: &GridFunction) -> Result<()> {
        if self.domain.same_cells(&other.domain) {
            Ok(())
        } else {
            Err(Error::Incompatible(format!(
                "grid functions live on different domains ({:?} vs {:?})",
                self.domain, other.domain
            )))
        }
    }
}

/// One dyadic interval of a shifted grid, as a run of whole cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicCube {
    pub grid: u8,
    pub level: u32,
    pub start: usize,
    pub width: usize,
}

impl DyadicCube {
    pub fn end(&self) -> usize {
        self.start + self.width
    }

    pub fn cells(&self) -> std::ops::Range<usize> {
        self.start..self.end()
    }

    pub fn contains_cell(&self, cell: usize) -> bool {
        self.start <= cell && cell < self.end()
    }

    /// `other ⊆ self`.
    pub fn contains(&self, other: &DyadicCube) -> bool {
        self.start <= other.start && other.end() <= self.end()
    }

    pub fn measure(&self, domain: &Domain) -> f64 {
        self.width as f64 * domain.cell_width()
    }

    pub fn is_cell(&self) -> bool {
        self.width == 1
    }

    pub fn children(&self) -> Option<[DyadicCube; 2]> {
        if self.width < 2 {
            return None;
        }
        let half = self.width / 2;
        let child = |start| DyadicCube {
            grid: self.grid,
            level: self.level + 1,
            start,
            width: half,
        };
        Some([child(self.start), child(self.start + half)])
    }

    /// Centre in cell coordinates.
    pub fn center(&self) -> f64 {
        self.start as f64 + self.width as f64 / 2.0
    }
}

/// One of the three shifted dyadic grids, restricted to cubes lying inside the
/// domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicGrid {
    domain: Domain,
    shift: u8,
}

impl DyadicGrid {
    pub fn new(domain: Domain, shift: u8) -> Result<Self> {
        if shift as usize >= GRID_COUNT {
            return Err(crate::error::invalid("shift", format!("{shift} not in 0..3")));
        }
        Ok(Self { domain, shift })
    }

    /// The unshifted lattice.
    pub fn standard(domain: Domain) -> Self {
        Self { domain, shift: 0 }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shift(&self) -> u8 {
        self.shift
    }

    /// Shift of the grid as a fraction of the domain length.
    pub fn shift_fraction(&self) -> f64 {
        self.shift as f64 / 3.0
    }

    pub fn width_at(&self, level: u32) -> usize {
        1usize << (self.domain.level - level)
    }

    /// Offset in cells of level-`level` cube boundaries, in `0..width`.
    pub fn offset(&self, level: u32) -> usize {
        let width = self.width_at(level) as i64;
        let scaled = self.shift as i64 * width;
        let (q, r) = (scaled / 3, scaled % 3);
        let magnitude = q + i64::from(r == 2);
        let signed = if level.is_multiple_of(2) { magnitude } else { -magnitude };
        signed.rem_euclid(width) as usize
    }

    /// Start of the first level-`level` cube and how many lie in the domain.
    pub fn layout(&self, level: u32) -> (usize, usize) {
        let offset = self.offset(level);
        let width = self.width_at(level);
        let n = self.domain.cells();
        let count = if offset + width <= n { (n - offset) / width } else { 0 };
        (offset, count)
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<u32> {
        0..=self.domain.level
    }

    pub fn cube(&self, level: u32, index: usize) -> DyadicCube {
        let (first, _) = self.layout(level);
        let width = self.width_at(level);
        DyadicCube {
            grid: self.shift,
            level,
            start: first + index * width,
            width,
        }
    }

    pub fn cubes_at_level(&self, level: u32) -> impl Iterator<Item = DyadicCube> + '_ {
        let (_, count) = self.layout(level);
        (0..count).map(move |j| self.cube(level, j))
    }

    /// Every in-domain cube, coarse levels first.
    pub fn cubes(&self) -> impl Iterator<Item = DyadicCube> + '_ {
        self.levels().flat_map(move |k| self.cubes_at_level(k))
    }

    /// The level-`level` cube containing `cell`, if it lies in the domain.
    pub fn containing(&self, cell: usize, level: u32) -> Option<DyadicCube> {
        let (first, count) = self.layout(level);
        if cell < first {
            return None;
        }
        let j = (cell - first) / self.width_at(level);
        (j < count).then(|| self.cube(level, j))
    }

    /// The in-domain cube one level up containing `cube`.
    pub fn parent(&self, cube: &DyadicCube) -> Option<DyadicCube> {
        if cube.level == 0 || cube.grid != self.shift {
            return None;
        }
        self.containing(cube.start, cube.level - 1).filter(|p| p.contains(cube))
    }

    /// Coarsest in-domain cubes of the grid.
    pub fn top_cubes(&self) -> Vec<DyadicCube> {
        for k in self.levels() {
            let cubes: Vec<_> = self.cubes_at_level(k).collect();
            if !cubes.is_empty() {
                return cubes;
            }
        }
        Vec::new()
    }

    pub fn owns(&self, cube: &DyadicCube) -> bool {
        cube.grid == self.shift
            && cube.level <= self.domain.level
            && cube.width == self.width_at(cube.level)
            && self.containing(cube.start, cube.level) == Some(*cube)
    }

    /// Per-level sums of `values` over every in-domain cube, combined
    /// pairwise from the cells upward.
    pub fn level_sums(&self, values: &[f64]) -> LevelSums {
        debug_assert_eq!(values.len(), self.domain.cells());
        let top = self.domain.level;
        let mut levels = vec![Vec::new(); top as usize + 1];
        levels[top as usize] = values.to_vec();
        for k in (0..top).rev() {
            let (first, count) = self.layout(k);
            let (child_first, _) = self.layout(k + 1);
            let child_width = self.width_at(k + 1);
            let finer = &levels[k as usize + 1];
            let sums = (0..count)
                .map(|j| {
                    let start = first + j * 2 * child_width;
                    let c = (start - child_first) / child_width;
                    finer[c] + finer[c + 1]
                })
                .collect();
            levels[k as usize] = sums;
        }
        LevelSums { levels }
    }
}

/// Sums over the cubes of one grid, indexed by level and position.
#[derive(Debug, Clone)]
pub struct LevelSums {
    levels: Vec<Vec<f64>>,
}

impl LevelSums {
    pub fn at(&self, level: u32) -> &[f64] {
        &self.levels[level as usize]
    }

    pub fn get(&self, grid: &DyadicGrid, cube: &DyadicCube) -> f64 {
        let (first, _) = grid.layout(cube.level);
        self.levels[cube.level as usize][(cube.start - first) / cube.width]
    }
}

/// The three shifted grids `t = 0, 1, 2`.
pub fn shifted_grids(domain: Domain) -> [DyadicGrid; GRID_COUNT] {
    [0u8, 1, 2].map(|shift| DyadicGrid { domain, shift })
}

/// Cell-weighted mean of `f` over `q`.
pub fn average(f: &GridFunction, q: &DyadicCube) -> f64 {
    let n = f.len();
    let end = q.end().min(n);
    let start = q.start.min(end);
    f.values[start..end].iter().sum::<f64>() / q.width as f64
}

/// Median value `sup{λ : max(|{f > λ} ∩ Q|, |{f < λ} ∩ Q|) ≤ |Q|/2}`.
///
/// With equal cell measures the supremum is the smallest cell value `v` with
/// `#{f ≤ v} > |Q|/2`, which is the upper median of the sorted values.
pub fn median(f: &GridFunction, q: &DyadicCube) -> f64 {
    let mut vals: Vec<f64> = f.values[q.cells()].to_vec();
    let k = vals.len() / 2;
    let (_, m, _) = vals.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    *m
}
