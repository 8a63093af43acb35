use std::sync::Arc;

use super::enclosure::{add_up, up, Enclosure};
use super::sums::WalkSums;
use super::tail::TailField;
use crate::lattice::{Domain, Point, SignedPermutation};

/// Tables of one source evaluated at one `β`.
#[derive(Debug)]
pub(crate) struct RowData {
    sums: Arc<WalkSums>,
    beta: f64,
    /// `Σ_{m≥1} β^m a_m` per cell.
    rest: Vec<f64>,
    tail: Option<TailField>,
    rel: f64,
    abs: f64,
}

impl RowData {
    pub fn new(sums: Arc<WalkSums>, beta: f64) -> RowData {
        let cells = sums.cells();
        let mut rest = vec![0.0; cells];
        let mut pw = 1.0;
        for m in 1..=sums.cutoff {
            pw *= beta;
            if pw == 0.0 {
                break;
            }
            let base = m * cells;
            for (i, r) in rest.iter_mut().enumerate() {
                let c = sums.coeffs[base + i];
                if c != 0 {
                    *r += pw * sums.coeff(m, i);
                }
            }
        }
        let rigorous = sums.growth(beta) < 1.0;
        let tail = rigorous.then(|| TailField::build(&sums, beta));
        let abs = if rigorous { sums.abs_pad(beta) } else { 0.0 };
        RowData {
            rel: sums.rel_pad(),
            abs,
            tail,
            rest,
            beta,
            sums,
        }
    }

    fn cutoff(&self) -> usize {
        self.sums.cutoff
    }

    /// Lower and upper bounds on the part of the sum over walks of length
    /// at most the cutoff, at a point of the table's coordinates.
    fn partial(&self, p: &Point) -> (f64, f64) {
        let a0 = if *p == self.sums.source { 1.0 } else { 0.0 };
        let r = match self.sums.grid.index(p) {
            Some(i) if self.sums.mask[i] => self.rest[i],
            _ => 0.0,
        };
        if r == 0.0 {
            return (a0, a0);
        }
        let lo = r * (1.0 - self.rel);
        let hi = r * (1.0 + self.rel);
        ((a0 + lo).next_down().max(a0), (a0 + hi).next_up())
    }

    fn get(&self, p: &Point) -> Enclosure {
        let n = self.cutoff();
        if !self.sums.domain.contains_point(p) {
            return Enclosure::new(0.0, 0.0, n, true);
        }
        let (lo, hi) = self.partial(p);
        match &self.tail {
            None => Enclosure::unbounded(lo, n),
            Some(t) => {
                let upper = add_up(hi, add_up(t.at(p), self.abs));
                Enclosure::new(lo, upper, n, true)
            }
        }
    }

    fn window_points(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        let g = &self.sums.grid;
        g.inner()
            .points()
            .map(move |p| (g.index(&p).expect("interior point"), p))
            .filter(move |(i, _)| self.sums.mask[*i])
    }
}

/// `G^Λ_β(x, ·)` for one source `x`, valid at every endpoint.
///
/// The tables may be shared with a symmetric image of the source; `map`
/// carries endpoints into the stored coordinates.
#[derive(Clone, Debug)]
pub struct Row {
    data: Arc<RowData>,
    map: SignedPermutation,
    source: Point,
    domain: Domain,
}

impl Row {
    pub(crate) fn new(data: Arc<RowData>, map: SignedPermutation, source: Point, domain: Domain) -> Row {
        Row {
            data,
            map,
            source,
            domain,
        }
    }

    pub fn source(&self) -> &Point {
        &self.source
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn beta(&self) -> f64 {
        self.data.beta
    }

    pub fn cutoff(&self) -> usize {
        self.data.cutoff()
    }

    pub fn is_rigorous(&self) -> bool {
        self.data.tail.is_some()
    }

    /// Number of DFS nodes visited to build the underlying tables.
    pub fn nodes(&self) -> u64 {
        self.data.sums.nodes()
    }

    /// Enclosure of `G(x, y)`; exactly zero when `y` is outside the domain.
    pub fn get(&self, y: &Point) -> Enclosure {
        self.data.get(&self.map.apply(y))
    }

    /// Bounds on the contribution of walks of length at most the cutoff.
    pub fn partial(&self, y: &Point) -> (f64, f64) {
        let p = self.map.apply(y);
        if !self.data.sums.domain.contains_point(&p) {
            return (0.0, 0.0);
        }
        self.data.partial(&p)
    }

    /// Upper bound on the contribution of longer walks; `+∞` when not
    /// rigorous.
    pub fn tail_at(&self, y: &Point) -> f64 {
        let p = self.map.apply(y);
        if !self.data.sums.domain.contains_point(&p) {
            return 0.0;
        }
        match &self.data.tail {
            Some(t) => add_up(t.at(&p), self.data.abs),
            None => f64::INFINITY,
        }
    }

    /// Every endpoint reachable within the cutoff, in lexicographic order.
    pub fn entries(&self) -> Vec<(Point, Enclosure)> {
        let inv = self.map.inverse();
        let mut out: Vec<(Point, Enclosure)> = self
            .data
            .window_points()
            .map(|(_, p)| (inv.apply(&p), self.data.get(&p)))
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Enclosure of `Σ_y w(y) G(x, y)` over the domain, for weights with
    /// `0 ≤ w ≤ wmax`.
    pub fn weighted_sum(&self, w: &dyn Fn(&Point) -> f64, wmax: f64) -> Enclosure {
        let inv = self.map.inverse();
        let wt = |p: &Point| w(&inv.apply(p));
        let d = &self.data;
        let mut lo = 0.0;
        let mut hi = 0.0;
        let mut terms = 0usize;
        for (_, p) in d.window_points() {
            let wv = wt(&p);
            if wv == 0.0 {
                continue;
            }
            let (a, b) = d.partial(&p);
            if b == 0.0 {
                continue;
            }
            lo += wv * a;
            hi += wv * b;
            terms += 1;
        }
        let slack = 4.0 * (terms + 2) as f64 * f64::EPSILON;
        let exact_sum = terms <= 1 && d.rest.iter().all(|&r| r == 0.0);
        let (lo, hi) = if exact_sum {
            (lo, hi)
        } else {
            ((lo * (1.0 - slack)).next_down(), (hi * (1.0 + slack)).next_up())
        };
        let n = self.cutoff();
        match &d.tail {
            None => Enclosure::unbounded(lo, n),
            Some(t) => {
                let extra = add_up(t.weighted_sum(&wt, wmax), up(wmax * d.abs));
                let upper = add_up(hi, extra);
                Enclosure::new(lo, upper, n, true)
            }
        }
    }

    /// Enclosure of `sup { G(x, y) : y ∈ Λ, keep(y) }`. Endpoints outside
    /// the enumeration window are covered by the largest tail value.
    pub fn max_where(&self, keep: &dyn Fn(&Point) -> bool) -> Enclosure {
        let n = self.cutoff();
        let d = &self.data;
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for (p, e) in self.entries() {
            if keep(&p) {
                lo = lo.max(e.lower);
                hi = hi.max(e.upper);
            }
        }
        match &d.tail {
            None => Enclosure::unbounded(lo, n),
            Some(t) => Enclosure::new(lo, hi.max(add_up(t.sup(), d.abs)), n, true),
        }
    }

    /// Enclosure of `sup { G(x, y) : y ∈ Λ, |y - x| > r }`.
    pub fn max_beyond(&self, r: i64) -> Enclosure {
        let src = self.source.clone();
        self.max_where(&move |p| p.sub(&src).sup_norm() > r)
    }

    /// Enclosure of `Σ_y G(x, y)`.
    pub fn total(&self) -> Enclosure {
        self.weighted_sum(&|_| 1.0, 1.0)
    }

    /// Lower bound `Σ_{y ∈ window} lower(G(x,y))^2` and a certified upper
    /// bound on the full `Σ_y G(x,y)^2` when rigorous.
    pub fn square_sum(&self, window: Option<i64>) -> (f64, Option<f64>) {
        let d = &self.data;
        let inv = self.map.inverse();
        let mut lower = 0.0;
        for (_, p) in d.window_points() {
            let y = inv.apply(&p);
            if window.is_some_and(|r| y.sub(&self.source).sup_norm() > r) {
                continue;
            }
            let (a, _) = d.partial(&p);
            lower += a * a;
        }
        if d.rest.iter().any(|&r| r != 0.0) {
            lower = (lower * (1.0 - 1e-14)).next_down().max(0.0);
        }
        let Some(t) = &d.tail else {
            return (lower, None);
        };
        let mut upper = 0.0;
        let tw = t.window().clone();
        for p in tw.points() {
            if !d.sums.domain.contains_point(&p) {
                continue;
            }
            let (_, b) = d.partial(&p);
            let u = b + t.at(&p) + d.abs;
            upper += u * u;
        }
        for (_, p) in d.window_points() {
            if !tw.contains(&p) {
                let (_, b) = d.partial(&p);
                let u = b + t.at(&p) + d.abs;
                upper += u * u;
            }
        }
        let outside = t.sup() * t.remainder_mass();
        let exact = outside == 0.0 && d.abs == 0.0 && d.rest.iter().all(|&r| r == 0.0) && t.sup() == 0.0;
        let upper = if exact { upper } else { ((upper + outside) * (1.0 + 1e-12)).next_up() };
        (lower, Some(upper))
    }
}
