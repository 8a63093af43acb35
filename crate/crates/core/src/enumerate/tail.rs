//! Upper bound on the contribution of walks longer than the cutoff.
//!
//! Every walk of length `> N` is an enumerated frontier walk (length `N`, or
//! a pruned node) followed by `k ≥ 1` further steps inside the domain. The
//! weight `ρ` cannot increase under extension, so the tail at `y` is at most
//! `Σ_{k≥1} ((β A_Λ)^k F)(y)`, where `A_Λ` is the adjacency matrix of the
//! domain and `F` the β-weighted frontier. The series is summed for a
//! finite number of steps and the remainder bounded by `(2dβ)^j` decay.

use super::enclosure::up;
use super::grid::Grid;
use super::sums::WalkSums;
use crate::lattice::{BoundingBox, Domain, Point};

/// Cell budget of the grid used for the tail iteration.
const TAIL_CELLS: u128 = 1 << 20;
/// Maximal number of extension steps summed explicitly.
const MAX_STEPS: usize = 400;
/// Relative size of the remainder at which the iteration stops.
const STOP_RATIO: f64 = 1e-10;

#[derive(Debug)]
pub(crate) struct TailField {
    grid: Grid,
    partial: Vec<f64>,
    /// Pointwise bound on the unsummed remainder.
    rem_inf: f64,
    /// Bound on the total mass of the unsummed remainder.
    rem_l1: f64,
}

impl TailField {
    /// A zero tail, used when nothing survives the cutoff.
    fn zero(grid: Grid) -> TailField {
        let n = grid.len();
        TailField {
            grid,
            partial: vec![0.0; n],
            rem_inf: 0.0,
            rem_l1: 0.0,
        }
    }

    /// Requires `β Δ < 1` with `Δ` the largest degree inside the domain.
    pub fn build(sums: &WalkSums, beta: f64) -> TailField {
        let d = sums.domain.dim();
        let growth = sums.degree as f64 * beta;
        debug_assert!(growth < 1.0);
        let n = sums.cutoff;
        let (grid, steps) = tail_grid(&sums.domain, &sums.source, n, d);
        let mask = grid.mask(&sums.domain);

        let mut v = vec![0.0f64; grid.len()];
        let mut any = false;
        let sub = sums.grid.inner().clone();
        for p in sub.points() {
            let i = sums.grid.index(&p).expect("interior point");
            if !sums.mask[i] {
                continue;
            }
            let mut f = beta.powi(n as i32) * sums.coeff(n, i);
            if sums.has_pruned() {
                for m in 0..n {
                    f += beta.powi(m as i32) * sums.pruned_coeff(m, i);
                }
            }
            if f > 0.0 {
                any = true;
                v[grid.index(&p).expect("tail grid covers the window")] = f;
            }
        }
        if !any {
            return TailField::zero(grid);
        }

        let offs = grid.offsets();
        let mut partial = vec![0.0f64; grid.len()];
        let mut next = vec![0.0f64; grid.len()];
        let mut l1 = 0.0;
        let mut linf = 0.0;
        let mut total = 0.0;
        let mut done = 0;
        for step in 1..=steps {
            l1 = 0.0;
            linf = 0.0f64;
            let support = BoundingBox::around(&sums.source, (n + step) as i64)
                .intersect(grid.inner())
                .expect("source lies in the grid");
            for (start, len) in grid.runs(&support) {
                for i in start..start + len {
                    if !mask[i] {
                        continue;
                    }
                    let mut s = 0.0;
                    for &o in &offs {
                        s += v[(i as isize + o) as usize];
                    }
                    let val = beta * s;
                    next[i] = val;
                    partial[i] += val;
                    l1 += val;
                    linf = linf.max(val);
                }
            }
            std::mem::swap(&mut v, &mut next);
            total += l1;
            done = step;
            if l1 == 0.0 || l1 * growth / (1.0 - growth) <= STOP_RATIO * total {
                break;
            }
        }

        let c = growth / (1.0 - growth);
        // each step adds 2d terms and multiplies once; bound the accumulated
        // relative rounding error generously
        let inflate = (1.0 + 4.0 * ((2 * d + 2) * (done + 2)) as f64 * f64::EPSILON)
            * (1.0 + sums.rel_pad());
        for p in partial.iter_mut() {
            *p *= inflate;
        }
        TailField {
            grid,
            partial,
            rem_inf: up(linf * c * inflate),
            rem_l1: up(l1 * c * inflate),
        }
    }

    /// Pointwise tail bound at `p`.
    pub fn at(&self, p: &Point) -> f64 {
        let local = self.grid.index(p).map_or(0.0, |i| self.partial[i]);
        up(local + self.rem_inf)
    }

    /// Bound on `Σ_y w(y) tail(y)` for weights `0 ≤ w ≤ wmax`.
    pub fn weighted_sum(&self, w: &dyn Fn(&Point) -> f64, wmax: f64) -> f64 {
        let mut s = 0.0;
        for (i, &v) in self.partial.iter().enumerate() {
            if v > 0.0 {
                s += w(&self.grid.point(i)) * v;
            }
        }
        let s = s * (1.0 + 4.0 * self.grid.len() as f64 * f64::EPSILON);
        up(s + wmax * self.rem_l1)
    }

    /// Largest pointwise tail.
    pub fn sup(&self) -> f64 {
        let m = self.partial.iter().copied().fold(0.0, f64::max);
        up(m + self.rem_inf)
    }

    /// Interior of the grid; outside it only the remainder survives.
    pub fn window(&self) -> &BoundingBox {
        self.grid.inner()
    }

    pub fn remainder_mass(&self) -> f64 {
        self.rem_l1
    }
}

/// Grid for the tail and the number of extension steps it can hold: the
/// whole domain when it is small enough, otherwise the largest box around
/// the source within the cell budget.
fn tail_grid(domain: &Domain, source: &Point, n: usize, d: usize) -> (Grid, usize) {
    let mut r = MAX_STEPS as i64;
    while r > 1 && ((2 * (n as i64 + r) + 3) as u128).pow(d as u32) > TAIL_CELLS {
        r -= 1;
    }
    let window = BoundingBox::around(source, n as i64 + r);
    match domain.bounding_box() {
        Some(bb) => {
            let padded: u128 = bb.lo.iter().zip(&bb.hi).map(|(l, h)| (h - l + 3) as u128).product();
            if padded <= TAIL_CELLS || bb.intersect(&window).as_ref() == Some(&bb) {
                (Grid::new(&bb).expect("within budget"), MAX_STEPS)
            } else {
                let inner = bb.intersect(&window).expect("source lies in the domain");
                (Grid::new(&inner).expect("within budget"), r as usize)
            }
        }
        None => (Grid::new(&window).expect("within budget"), r as usize),
    }
}
