//! Sparse families of dyadic cubes.
//!
//! A family `S` is sparse when every `Q ∈ S` keeps at least half of its
//! measure outside the strictly smaller members of `S`; that leftover is the
//! exceptional set `E(Q)`, stored as a cell mask over `Q`.

use crate::error::{Error, Result};
use crate::grid::{DyadicCube, DyadicGrid, GridFunction};
use crate::weights::Weight;

/// Decides whether a descendant becomes a stopping cube of its ancestor.
pub trait StoppingRule {
    fn stops(&self, ancestor_avg: f64, candidate_avg: f64) -> bool;
}

/// Calderón–Zygmund stopping: `⟨|f|⟩_P > threshold · ⟨|f|⟩_Q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageStopping {
    pub threshold: f64,
}

impl StoppingRule for AverageStopping {
    fn stops(&self, ancestor_avg: f64, candidate_avg: f64) -> bool {
        candidate_avg > self.threshold * ancestor_avg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseFamily {
    grid: DyadicGrid,
    root: DyadicCube,
    cubes: Vec<DyadicCube>,
    exceptional: Vec<Vec<bool>>,
}

impl SparseFamily {
    /// Wraps an explicit set of cubes of `grid` inside `root` and derives the
    /// exceptional sets. The result is not checked for sparsity; see
    /// [`verify_sparsity`].
    pub fn from_cubes(grid: DyadicGrid, root: DyadicCube, cubes: Vec<DyadicCube>) -> Result<Self> {
        if !grid.owns(&root) {
            return Err(Error::Incompatible(format!(
                "root {root:?} is not a cube of grid {}",
                grid.shift()
            )));
        }
        let mut cubes = cubes;
        for q in &cubes {
            if !grid.owns(q) || !root.contains(q) {
                return Err(Error::Incompatible(format!(
                    "{q:?} is not a cube of the grid inside the root"
                )));
            }
        }
        if !cubes.contains(&root) {
            cubes.push(root);
        }
        cubes.sort_by_key(|q| (q.start, std::cmp::Reverse(q.width)));
        cubes.dedup();
        let finest = finest_member_width(&cubes, grid.domain().cells());
        let exceptional = cubes
            .iter()
            .map(|q| q.cells().map(|x| finest[x] == q.width).collect())
            .collect();
        Ok(Self {
            grid,
            root,
            cubes,
            exceptional,
        })
    }

    pub fn grid(&self) -> &DyadicGrid {
        &self.grid
    }

    pub fn root(&self) -> &DyadicCube {
        &self.root
    }

    /// Members ordered by left endpoint, larger cubes first.
    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    /// Cell mask of `E(Q)` over the cells of the `index`-th member.
    pub fn exceptional(&self, index: usize) -> &[bool] {
        &self.exceptional[index]
    }

    pub fn smallest_width(&self) -> usize {
        self.cubes.iter().map(|q| q.width).min().unwrap_or(self.root.width)
    }
}

/// For each cell, the width of the smallest member containing it
/// (`usize::MAX` when none does).
fn finest_member_width(cubes: &[DyadicCube], cells: usize) -> Vec<usize> {
    let mut finest = vec![usize::MAX; cells];
    for q in cubes {
        for x in q.cells() {
            finest[x] = finest[x].min(q.width);
        }
    }
    finest
}

/// Stopping-time construction from `root` with the rule
/// `⟨|f|⟩_P > threshold · ⟨|f|⟩_Q`, recursing down to single cells.
pub fn build_sparse_family(
    f: &GridFunction,
    grid: &DyadicGrid,
    root: DyadicCube,
    threshold: f64,
) -> Result<SparseFamily> {
    if !(threshold >= 2.0) {
        return Err(crate::error::invalid(
            "threshold",
            format!("need threshold ≥ 2, got {threshold}"),
        ));
    }
    build_sparse_family_with(f, grid, root, &AverageStopping { threshold })
}

pub fn build_sparse_family_with<R: StoppingRule>(
    f: &GridFunction,
    grid: &DyadicGrid,
    root: DyadicCube,
    rule: &R,
) -> Result<SparseFamily> {
    if !f.domain().same_cells(grid.domain()) {
        return Err(Error::Incompatible(
            "function and grid live on different domains".into(),
        ));
    }
    if !grid.owns(&root) {
        return Err(Error::Incompatible(format!(
            "root {root:?} is not a cube of grid {}",
            grid.shift()
        )));
    }
    let mut prefix = Vec::with_capacity(f.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in f.values() {
        acc += v.abs();
        prefix.push(acc);
    }
    let avg = |q: &DyadicCube| (prefix[q.end()] - prefix[q.start]) / q.width as f64;

    let mut cubes = vec![root];
    let mut pending = vec![root];
    while let Some(q) = pending.pop() {
        let q_avg = avg(&q);
        if q_avg == 0.0 {
            continue;
        }
        // maximal descendants meeting the stopping rule
        let mut search: Vec<DyadicCube> = q.children().map(Vec::from).unwrap_or_default();
        while let Some(p) = search.pop() {
            if rule.stops(q_avg, avg(&p)) {
                cubes.push(p);
                pending.push(p);
            } else if let Some(children) = p.children() {
                search.extend(children);
            }
        }
    }
    SparseFamily::from_cubes(*grid, root, cubes)
}

/// One family per coarsest in-domain cube of `grid`.
pub fn build_grid_families(f: &GridFunction, grid: &DyadicGrid, threshold: f64) -> Result<Vec<SparseFamily>> {
    grid.top_cubes()
        .into_iter()
        .map(|root| build_sparse_family(f, grid, root, threshold))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparsityCertificate {
    /// `max_Q |∪_{P ⊊ Q} P| / |Q|`.
    pub eta: f64,
    /// `min_Q |E(Q)| / |Q|`.
    pub min_exceptional_fraction: f64,
    pub disjoint: bool,
    pub masks_consistent: bool,
    pub ok: bool,
}

/// Recomputes the covered fractions from the member list and checks the stored
/// exceptional masks cell by cell.
pub fn verify_sparsity(family: &SparseFamily) -> SparsityCertificate {
    let cells = family.grid.domain().cells();
    let finest = finest_member_width(&family.cubes, cells);
    let mut eta: f64 = 0.0;
    let mut min_fraction: f64 = 1.0;
    let mut owner = vec![false; cells];
    let mut disjoint = true;
    let mut masks_consistent = true;
    for (q, mask) in family.cubes.iter().zip(&family.exceptional) {
        let covered = q.cells().filter(|&x| finest[x] < q.width).count();
        eta = eta.max(covered as f64 / q.width as f64);
        let mut size = 0usize;
        for (x, &in_e) in q.cells().zip(mask) {
            let expected = finest[x] >= q.width;
            masks_consistent &= in_e == expected;
            if in_e {
                size += 1;
                disjoint &= !owner[x];
                owner[x] = true;
            }
        }
        min_fraction = min_fraction.min(size as f64 / q.width as f64);
    }
    SparsityCertificate {
        eta,
        min_exceptional_fraction: min_fraction,
        disjoint,
        masks_consistent,
        ok: eta <= 0.5 && min_fraction >= 0.5 && disjoint && masks_consistent,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `Σ_{Q ∈ S, Q ⊆ R} w(Q) ≤ 2 [w]_{A_∞} w(R)` with the Fujii–Wilson
/// characteristic of the family's own grid.
pub fn carleson_check(family: &SparseFamily, w: &Weight, r: &DyadicCube) -> Result<CarlesonCheck> {
    if !family.grid.owns(r) {
        return Err(Error::Incompatible(format!("{r:?} is not a cube of the family's grid")));
    }
    if !w.domain().same_cells(family.grid.domain()) {
        return Err(Error::Incompatible(
            "weight and family live on different domains".into(),
        ));
    }
    let lhs: f64 = family.cubes.iter().filter(|q| r.contains(q)).map(|q| w.mass(q)).sum();
    let rhs = 2.0 * w.ainf_characteristic(&family.grid) * w.mass(r);
    Ok(CarlesonCheck {
        lhs,
        rhs,
        ok: lhs <= rhs * (1.0 + 1e-9),
    })
}
