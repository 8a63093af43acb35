//! Length-resolved walk sums `a_m(y) = Σ_{|γ|=m, γ: x→y ⊂ Λ} ρ(γ)`.
//!
//! Weights are accumulated as unsigned fixed-point integers so that the
//! reduction is associative: the table does not depend on traversal order,
//! on how the tree is split into subtasks, or on the number of threads.

use rayon::prelude::*;

use super::enclosure::mul_down;
use super::grid::Grid;
use crate::error::{Error, Result};
use crate::lattice::{BoundingBox, Domain, Point, SignedPermutation};

/// Fractional bits of the fixed-point walk weights.
pub(crate) const FRAC_BITS: i32 = 64;

/// Optional pruning of the DFS tree.
///
/// A node of length `m` and weight `β^m ρ` is not expanded when
/// `β^m ρ Σ_{j=1}^{N-m} (2dβ)^j < tol`. Its weight is still counted, and
/// its continuations are charged to the tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pruning {
    pub beta: f64,
    pub tol: f64,
}

/// Coefficient tables of one source inside one domain.
#[derive(Debug)]
pub struct WalkSums {
    pub(crate) domain: Domain,
    pub(crate) source: Point,
    pub(crate) lambda: f64,
    pub(crate) cutoff: usize,
    pub(crate) grid: Grid,
    pub(crate) mask: Vec<bool>,
    /// `coeffs[m * cells + i]`, scaled by `2^-scale_bits`.
    pub(crate) coeffs: Vec<u128>,
    /// Weights of nodes whose subtree was pruned, same layout.
    pub(crate) pruned: Option<Vec<u128>>,
    pub(crate) scale_bits: i32,
    /// Whether every walk weight is represented without rounding.
    pub(crate) exact_weights: bool,
    /// Largest number of neighbours a site has inside the domain.
    pub(crate) degree: usize,
    /// Largest coincidence count a walk of length `cutoff` can have.
    pub(crate) max_coincidences: usize,
    pub(crate) nodes: u64,
}

impl WalkSums {
    pub fn cells(&self) -> usize {
        self.grid.len()
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    /// `a_m` at a cell as a float (rounded to nearest).
    pub(crate) fn coeff(&self, m: usize, idx: usize) -> f64 {
        to_f64(self.coeffs[m * self.cells() + idx], self.scale_bits)
    }

    pub(crate) fn pruned_coeff(&self, m: usize, idx: usize) -> f64 {
        match &self.pruned {
            Some(p) => to_f64(p[m * self.cells() + idx], self.scale_bits),
            None => 0.0,
        }
    }

    /// Relative rounding allowance for floating-point evaluations of the
    /// tables at any `β`.
    pub(crate) fn rel_pad(&self) -> f64 {
        let k = if self.exact_weights { 0 } else { self.max_coincidences };
        4.0 * (self.cutoff + k + 8) as f64 * f64::EPSILON
    }

    /// Absolute allowance for the truncation of weights to fixed point.
    /// Only walks with a coincidence, hence of length at least two, carry a
    /// rounded weight; each loses less than `2^-64 β^{|γ|}`, and walks whose
    /// weight rounds to zero are dropped with their continuations.
    pub(crate) fn abs_pad(&self, beta: f64) -> f64 {
        if self.exact_weights {
            return 0.0;
        }
        let g = self.growth(beta);
        2.0 * 2f64.powi(-FRAC_BITS) * g * g / (1.0 - g)
    }

    /// `βΔ`; the number of walks of length `m` is at most `Δ^m`.
    pub(crate) fn growth(&self, beta: f64) -> f64 {
        self.degree as f64 * beta
    }

    pub(crate) fn has_pruned(&self) -> bool {
        self.pruned.is_some()
    }
}

fn to_f64(v: u128, scale_bits: i32) -> f64 {
    if v == 0 {
        0.0
    } else {
        v as f64 * 2f64.powi(-scale_bits)
    }
}

/// Enumerates all walks of length `≤ cutoff` from `source` inside `domain`.
///
/// `symmetries` may list lattice symmetries that fix `source` and preserve
/// `domain`; they only save work.
pub fn compute(
    domain: &Domain,
    source: &Point,
    lambda: f64,
    cutoff: usize,
    pruning: Option<Pruning>,
    symmetries: &[SignedPermutation],
) -> Result<WalkSums> {
    let d = domain.dim();
    if source.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: source.dim(),
        });
    }
    if !domain.contains_point(source) {
        return Err(Error::OutsideDomain {
            point: source.clone(),
            domain: domain.to_string(),
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!(
            "lambda must lie in [0, 1], got {lambda}"
        )));
    }
    let window = BoundingBox::around(source, cutoff as i64);
    let inner = match domain.bounding_box() {
        Some(bb) => bb.intersect(&window).expect("source lies in both boxes"),
        None => window,
    };
    let grid = Grid::new(&inner)?;
    let mask = grid.mask(domain);
    let src = grid.index(source).expect("source inside window");
    let bits = cutoff as f64 * ((2 * d) as f64).log2();
    let max_coincidences = cutoff * (cutoff + 1) / 2;

    let base = WalkSums {
        domain: domain.clone(),
        source: source.clone(),
        lambda,
        cutoff,
        coeffs: Vec::new(),
        pruned: None,
        scale_bits: 0,
        exact_weights: true,
        max_coincidences,
        degree: domain.max_degree(),
        nodes: 0,
        grid,
        mask,
    };

    if lambda == 0.0 {
        if bits >= 127.0 {
            return Err(Error::TooLarge(format!(
                "walk counts of length {cutoff} in dimension {d} overflow 128 bits"
            )));
        }
        return Ok(count_walks(base, src));
    }
    if bits >= (127 - FRAC_BITS) as f64 {
        return Err(Error::TooLarge(format!(
            "fixed-point walk sums of length {cutoff} in dimension {d} overflow 128 bits"
        )));
    }
    Ok(enumerate_walks(base, src, pruning, symmetries))
}

/// `λ = 0`: every walk has weight one, so the tables are walk counts and
/// follow from the transfer recursion.
fn count_walks(mut s: WalkSums, src: usize) -> WalkSums {
    let cells = s.grid.len();
    let offs = s.grid.offsets();
    let mut coeffs = vec![0u128; (s.cutoff + 1) * cells];
    coeffs[src] = 1;
    for m in 1..=s.cutoff {
        let (prev, cur) = coeffs.split_at_mut(m * cells);
        let prev = &prev[(m - 1) * cells..];
        for i in 0..cells {
            if !s.mask[i] {
                continue;
            }
            let mut acc = 0u128;
            for &o in &offs {
                let j = (i as isize + o) as usize;
                if s.mask[j] {
                    acc += prev[j];
                }
            }
            cur[i] = acc;
        }
    }
    s.nodes = coeffs.iter().map(|&c| c as u64).fold(0u64, u64::saturating_add);
    s.coeffs = coeffs;
    s
}

struct Ctx<'a> {
    offs: &'a [isize],
    mask: &'a [bool],
    table: &'a [u128],
    /// A node of length `m` and coincidence count `k` is pruned when
    /// `k ≥ prune_at[m]`.
    prune_at: Option<&'a [usize]>,
    cells: usize,
    cutoff: usize,
}

/// Occupancy marker of cells outside the domain.
const BLOCKED: u8 = u8::MAX;

struct Acc {
    coeffs: Vec<u128>,
    pruned: Vec<u128>,
    /// Visits per cell, or `BLOCKED`.
    occ: Vec<u8>,
    nodes: u64,
}

impl Acc {
    fn new(ctx: &Ctx) -> Acc {
        let n = (ctx.cutoff + 1) * ctx.cells;
        Acc {
            coeffs: vec![0; n],
            pruned: if ctx.prune_at.is_some() { vec![0; n] } else { Vec::new() },
            occ: ctx.mask.iter().map(|&m| if m { 0 } else { BLOCKED }).collect(),
            nodes: 0,
        }
    }

    /// Adds `other`, with cells relabelled by `perm`.
    fn add_mapped(&mut self, other: &Acc, perm: Option<&[usize]>) {
        let cells = self.occ.len();
        match perm {
            None => {
                for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
                    *a += b;
                }
                for (a, b) in self.pruned.iter_mut().zip(&other.pruned) {
                    *a += b;
                }
            }
            Some(p) => {
                for (i, &v) in other.coeffs.iter().enumerate() {
                    if v != 0 {
                        let (m, c) = (i / cells, i % cells);
                        self.coeffs[m * cells + p[c]] += v;
                    }
                }
                for (i, &v) in other.pruned.iter().enumerate() {
                    if v != 0 {
                        let (m, c) = (i / cells, i % cells);
                        self.pruned[m * cells + p[c]] += v;
                    }
                }
            }
        }
        self.nodes += other.nodes;
    }

    fn clear(&mut self) {
        self.coeffs.iter_mut().for_each(|v| *v = 0);
        self.pruned.iter_mut().for_each(|v| *v = 0);
        self.nodes = 0;
    }

    fn merge(mut self, other: Acc) -> Acc {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        for (a, b) in self.pruned.iter_mut().zip(&other.pruned) {
            *a += b;
        }
        self.nodes += other.nodes;
        self
    }
}

/// Records the step into `nb` at length `m` with `k` coincidences and
/// reports whether the node should be expanded.
#[inline(always)]
fn visit(ctx: &Ctx, acc: &mut Acc, nb: usize, m: usize, k: usize) -> bool {
    let w = ctx.table[k];
    if w == 0 {
        return false;
    }
    acc.coeffs[m * ctx.cells + nb] += w;
    acc.nodes += 1;
    if m == ctx.cutoff {
        return false;
    }
    if let Some(p) = ctx.prune_at {
        if k >= p[m] {
            acc.pruned[m * ctx.cells + nb] += w;
            return false;
        }
    }
    true
}

fn descend(ctx: &Ctx, acc: &mut Acc, pos: usize, m: usize, k: usize) {
    let next = m + 1;
    if next == ctx.cutoff {
        let base = next * ctx.cells;
        let row = &mut acc.coeffs[base..base + ctx.cells];
        let table = &ctx.table[k..];
        let mut count = 0;
        for &o in ctx.offs {
            let nb = (pos as isize + o) as usize;
            // SAFETY: `pos` is an interior cell, so its neighbours lie in
            // the padded grid; `occ` is not BLOCKED, so it is at most the
            // walk length and `k + occ` is within the coincidence table.
            unsafe {
                let v = *acc.occ.get_unchecked(nb);
                if v == BLOCKED {
                    continue;
                }
                let w = *table.get_unchecked(v as usize);
                if w != 0 {
                    *row.get_unchecked_mut(nb) += w;
                    count += 1;
                }
            }
        }
        acc.nodes += count;
        return;
    }
    for &o in ctx.offs {
        let nb = (pos as isize + o) as usize;
        let v = acc.occ[nb];
        if v == BLOCKED {
            continue;
        }
        let k2 = k + v as usize;
        if visit(ctx, acc, nb, next, k2) {
            acc.occ[nb] += 1;
            descend(ctx, acc, nb, next, k2);
            acc.occ[nb] -= 1;
        }
    }
}

/// Lower bounds on `(1-λ)^k` in fixed point, for `k ≤ kmax`. The flag
/// tells whether the entries are exact.
fn weight_table(lambda: f64, kmax: usize) -> (Vec<u128>, bool) {
    let mut q = 1.0 - lambda;
    if 1.0 - q < lambda {
        q = q.next_down();
    }
    let scale = 2f64.powi(FRAC_BITS);
    let mut table = Vec::with_capacity(kmax + 1);
    let mut p = 1.0f64;
    for k in 0..=kmax {
        if k > 0 {
            p = mul_down(p, q);
        }
        let v = (p * scale).floor();
        table.push(if v >= 1.0 { v as u128 } else { 0 });
    }
    (table, lambda == 1.0)
}

fn prune_thresholds(p: &Pruning, d: usize, lambda: f64, cutoff: usize, kmax: usize) -> Vec<usize> {
    let growth = 2.0 * d as f64 * p.beta;
    let q = 1.0 - lambda;
    (0..=cutoff)
        .map(|m| {
            let remaining: f64 = (1..=cutoff - m).map(|j| growth.powi(j as i32)).sum();
            let bound = p.beta.powi(m as i32) * remaining;
            // smallest k with bound * q^k < tol
            (0..=kmax + 1)
                .find(|&k| bound * q.powi(k as i32) < p.tol)
                .unwrap_or(kmax + 1)
        })
        .collect()
}

/// Number of prefixes at which the DFS tree is split into subtasks.
fn split_target() -> usize {
    (8 * rayon::current_num_threads()).max(64)
}

/// Where each cell goes under `g`, which must fix the source and preserve
/// the domain.
fn cell_permutation(grid: &Grid, g: &SignedPermutation) -> Vec<usize> {
    (0..grid.len())
        .map(|i| {
            grid.index(&g.apply(&grid.point(i)))
                .expect("symmetry preserves the window")
        })
        .collect()
}

fn enumerate_walks(
    mut s: WalkSums,
    src: usize,
    pruning: Option<Pruning>,
    symmetries: &[SignedPermutation],
) -> WalkSums {
    let d = s.domain.dim();
    let cells = s.grid.len();
    let offs = s.grid.offsets();
    let (table, exact) = weight_table(s.lambda, s.max_coincidences);
    let thresholds = pruning.map(|p| prune_thresholds(&p, d, s.lambda, s.cutoff, s.max_coincidences));
    let ctx = Ctx {
        offs: &offs,
        mask: &s.mask,
        table: &table,
        prune_at: thresholds.as_deref(),
        cells,
        cutoff: s.cutoff,
    };

    let mut head = Acc::new(&ctx);
    head.coeffs[src] = table[0];
    head.nodes = 1;

    // breadth-first expansion of the first levels; prefixes stay in
    // canonical depth-first order
    let mut level: Vec<(Vec<usize>, usize)> = Vec::new();
    if ctx.prune_at.is_some_and(|p| p[0] == 0) && s.cutoff > 0 {
        head.pruned[src] = table[0];
    } else if s.cutoff > 0 {
        level.push((vec![src], 0));
    }
    let mut depth = 0;
    while !level.is_empty() && level.len() < split_target() && depth < s.cutoff {
        let mut next = Vec::new();
        for (path, k) in &level {
            let pos = *path.last().expect("non-empty prefix");
            for &o in &offs {
                let nb = (pos as isize + o) as usize;
                if !s.mask[nb] {
                    continue;
                }
                let k2 = k + path.iter().filter(|&&p| p == nb).count();
                if visit(&ctx, &mut head, nb, depth + 1, k2) {
                    let mut p2 = path.clone();
                    p2.push(nb);
                    next.push((p2, k2));
                }
            }
        }
        level = next;
        depth += 1;
    }

    // subtrees related by a symmetry fixing the source have tables related
    // by the same symmetry, so only one prefix per orbit is descended
    let perms: Vec<Vec<usize>> = symmetries
        .iter()
        .filter(|g| !g.is_identity())
        .map(|g| cell_permutation(&s.grid, g))
        .collect();
    let mut orbits: Vec<(usize, Vec<Option<usize>>)> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, (path, _)) in level.iter().enumerate() {
        if !seen.insert(path.clone()) {
            continue;
        }
        let mut images = vec![None];
        for (j, perm) in perms.iter().enumerate() {
            if seen.insert(path.iter().map(|&c| perm[c]).collect::<Vec<_>>()) {
                images.push(Some(j));
            }
        }
        orbits.push((i, images));
    }

    let total = orbits
        .par_iter()
        .fold(
            || (Acc::new(&ctx), Acc::new(&ctx)),
            |(mut acc, mut sub), (i, images)| {
                let (path, k) = &level[*i];
                for &p in path {
                    sub.occ[p] += 1;
                }
                descend(&ctx, &mut sub, *path.last().expect("non-empty prefix"), depth, *k);
                for &p in path {
                    sub.occ[p] -= 1;
                }
                for image in images {
                    match image {
                        None => acc.add_mapped(&sub, None),
                        Some(j) => acc.add_mapped(&sub, Some(&perms[*j])),
                    }
                }
                sub.clear();
                (acc, sub)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(|| Acc::new(&ctx), Acc::merge)
        .merge(head);

    s.coeffs = total.coeffs;
    s.pruned = if pruning.is_some() { Some(total.pruned) } else { None };
    s.scale_bits = FRAC_BITS;
    s.exact_weights = exact;
    s.nodes = total.nodes;
    s
}
