//! Geometry of the hypercubic lattice: points, nearest-neighbour adjacency and
//! the regions walks are confined to.
//!
//! Domains are predicates with an optional finite extent. Infinite regions
//! (half-spaces) are never materialised; callers bound the part they look at
//! with a window, which for walk sums is exact because a walk of length `N`
//! started at `x` never leaves `Λ_N(x)`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A site of `Z^d`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<i64>);

impl Point {
    pub fn new(coords: Vec<i64>) -> Self {
        Point(coords)
    }

    pub fn origin(d: usize) -> Self {
        Point(vec![0; d])
    }

    /// The unit vector `e_j` (zero-based axis).
    pub fn unit(d: usize, axis: usize) -> Self {
        let mut c = vec![0; d];
        c[axis] = 1;
        Point(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    /// ℓ∞ norm `max_j |x_j|`.
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scale(&self, k: i64) -> Point {
        Point(self.0.iter().map(|a| a * k).collect())
    }

    pub fn is_adjacent(&self, other: &Point) -> bool {
        self.dim() == other.dim() && self.sub(other).l1_norm() == 1
    }

    /// The `2d` nearest neighbours in canonical order `+e1, -e1, +e2, ..., -ed`.
    pub fn neighbors(&self) -> Vec<Point> {
        let d = self.dim();
        let mut out = Vec::with_capacity(2 * d);
        for axis in 0..d {
            for step in [1, -1] {
                let mut c = self.0.clone();
                c[axis] += step;
                out.push(Point(c));
            }
        }
        out
    }

    /// Parses `a,b,c`. The single token `0` is accepted as the origin of `Z^d`.
    pub fn parse(s: &str, d: usize) -> Result<Point> {
        let s = s.trim();
        if s == "0" || s == "origin" {
            return Ok(Point::origin(d));
        }
        let coords = s
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::InvalidPoint(s.to_string()))?;
        if coords.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: coords.len(),
            });
        }
        Ok(Point(coords))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Free functional form of [`Point::neighbors`].
pub fn neighbors(p: &Point) -> Vec<Point> {
    p.neighbors()
}

/// Axis-aligned integer box `lo ≤ x ≤ hi` (inclusive, componentwise).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundingBox {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl BoundingBox {
    pub fn around(center: &Point, radius: i64) -> Self {
        BoundingBox {
            lo: center.0.iter().map(|c| c - radius).collect(),
            hi: center.0.iter().map(|c| c + radius).collect(),
        }
    }

    pub fn intersect(&self, other: &BoundingBox) -> Option<BoundingBox> {
        let lo: Vec<i64> = self.lo.iter().zip(&other.lo).map(|(a, b)| *a.max(b)).collect();
        let hi: Vec<i64> = self.hi.iter().zip(&other.hi).map(|(a, b)| *a.min(b)).collect();
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            None
        } else {
            Some(BoundingBox { lo, hi })
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(c, (l, h))| l <= c && c <= h)
    }

    /// Lexicographic iteration over all points of the box.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let d = self.lo.len();
        let mut cur = self.lo.clone();
        let mut done = self.lo.iter().zip(&self.hi).any(|(l, h)| l > h);
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = Point(cur.clone());
            // odometer, last axis fastest
            let mut axis = d;
            loop {
                if axis == 0 {
                    done = true;
                    break;
                }
                axis -= 1;
                if cur[axis] < self.hi[axis] {
                    cur[axis] += 1;
                    break;
                }
                cur[axis] = self.lo[axis];
            }
            Some(out)
        })
    }

    pub fn volume(&self) -> u128 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1).max(0) as u128)
            .product()
    }
}

/// Regions of `Z^d` used as walk domains and as the sets `S` of the Simon–Lieb
/// decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// `Λ_n(center) = {x : |x - center| ≤ n}`.
    Box { center: Point, radius: u64 },
    /// `H_n = {x : x_1 ≥ -n}`.
    HalfSpace { dim: usize, n: u64 },
    /// `Λ_n^+ = {x ∈ Λ_n : x_1 > 0}`.
    PositiveBox { dim: usize, n: u64 },
    /// Block `{x : a ≤ x ≤ b}` with `a ≤ 0 ≤ b`.
    Block { lower: Point, upper: Point },
    Explicit { dim: usize, points: BTreeSet<Point> },
    Intersection { dim: usize, parts: Vec<Domain> },
    /// The whole lattice.
    Full { dim: usize },
}

impl Domain {
    pub fn lambda_n(d: usize, n: u64) -> Domain {
        Domain::Box {
            center: Point::origin(d),
            radius: n,
        }
    }

    pub fn half_space(d: usize, n: u64) -> Domain {
        Domain::HalfSpace { dim: d, n }
    }

    pub fn full(d: usize) -> Domain {
        Domain::Full { dim: d }
    }

    pub fn explicit<I: IntoIterator<Item = Point>>(d: usize, pts: I) -> Result<Domain> {
        let points: BTreeSet<Point> = pts.into_iter().collect();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        Ok(Domain::Explicit { dim: d, points })
    }

    pub fn block(lower: Point, upper: Point) -> Result<Domain> {
        if lower.dim() != upper.dim() {
            return Err(Error::DimensionMismatch {
                expected: lower.dim(),
                found: upper.dim(),
            });
        }
        if lower.0.iter().any(|&a| a > 0) || upper.0.iter().any(|&b| b < 0) {
            return Err(Error::InvalidParameter(format!(
                "block corners must satisfy a ≤ 0 ≤ b, got {lower} and {upper}"
            )));
        }
        Ok(Domain::Block { lower, upper })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { center, .. } => center.dim(),
            Domain::HalfSpace { dim, .. }
            | Domain::PositiveBox { dim, .. }
            | Domain::Explicit { dim, .. }
            | Domain::Intersection { dim, .. }
            | Domain::Full { dim } => *dim,
            Domain::Block { lower, .. } => lower.dim(),
        }
    }

    /// Membership without the dimension check. Callers must have validated `p`.
    pub fn contains_point(&self, p: &Point) -> bool {
        match self {
            Domain::Box { center, radius } => p.sub(center).sup_norm() <= *radius as i64,
            Domain::HalfSpace { n, .. } => p.0[0] >= -(*n as i64),
            Domain::PositiveBox { n, .. } => p.sup_norm() <= *n as i64 && p.0[0] > 0,
            Domain::Block { lower, upper } => p
                .0
                .iter()
                .zip(lower.0.iter().zip(&upper.0))
                .all(|(c, (a, b))| a <= c && c <= b),
            Domain::Explicit { points, .. } => points.contains(p),
            Domain::Intersection { parts, .. } => parts.iter().all(|s| s.contains_point(p)),
            Domain::Full { .. } => true,
        }
    }

    pub fn contains(&self, p: &Point) -> Result<bool> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        Ok(self.contains_point(p))
    }

    /// Smallest box known to contain the domain, or `None` if it is infinite.
    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let d = self.dim();
        match self {
            Domain::Box { center, radius } => Some(BoundingBox::around(center, *radius as i64)),
            Domain::HalfSpace { .. } | Domain::Full { .. } => None,
            Domain::PositiveBox { n, .. } => {
                let n = *n as i64;
                let mut bb = BoundingBox::around(&Point::origin(d), n);
                bb.lo[0] = 1;
                if n < 1 {
                    // empty set; return a degenerate box that contains nothing
                    bb.hi[0] = 0;
                }
                Some(bb)
            }
            Domain::Block { lower, upper } => Some(BoundingBox {
                lo: lower.0.clone(),
                hi: upper.0.clone(),
            }),
            Domain::Explicit { points, .. } => {
                let mut it = points.iter();
                let first = it.next()?;
                let mut lo = first.0.clone();
                let mut hi = first.0.clone();
                for p in it {
                    for j in 0..d {
                        lo[j] = lo[j].min(p.0[j]);
                        hi[j] = hi[j].max(p.0[j]);
                    }
                }
                Some(BoundingBox { lo, hi })
            }
            Domain::Intersection { parts, .. } => {
                let mut acc: Option<BoundingBox> = None;
                for part in parts {
                    if let Some(bb) = part.bounding_box() {
                        acc = Some(match acc {
                            None => bb,
                            Some(a) => match a.intersect(&bb) {
                                Some(x) => x,
                                None => {
                                    let mut e = BoundingBox::around(&Point::origin(d), 0);
                                    e.hi[0] = -1;
                                    e
                                }
                            },
                        });
                    }
                }
                acc
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.bounding_box().is_some()
    }

    /// All points of a finite domain in lexicographic order.
    pub fn points(&self) -> Option<Vec<Point>> {
        let bb = self.bounding_box()?;
        Some(bb.points().filter(|p| self.contains_point(p)).collect())
    }

    /// Points of the domain inside `window`, lexicographic order.
    pub fn points_in(&self, window: &BoundingBox) -> Vec<Point> {
        let bb = match self.bounding_box() {
            Some(bb) => match bb.intersect(window) {
                Some(x) => x,
                None => return Vec::new(),
            },
            None => window.clone(),
        };
        bb.points().filter(|p| self.contains_point(p)).collect()
    }

    /// Largest number of neighbours a site of the domain has inside it.
    pub fn max_degree(&self) -> usize {
        let d = self.dim();
        match self {
            Domain::Box { radius, .. } if *radius >= 1 => 2 * d,
            Domain::Full { .. } | Domain::HalfSpace { .. } => 2 * d,
            _ => match self.bounding_box() {
                Some(bb) if bb.volume() <= 1 << 22 => bb
                    .points()
                    .filter(|p| self.contains_point(p))
                    .map(|p| 2 * d - self.exit_degree(&p))
                    .max()
                    .unwrap_or(0),
                _ => 2 * d,
            },
        }
    }

    /// Number of neighbours of `p` lying outside the domain.
    pub fn exit_degree(&self, p: &Point) -> usize {
        p.neighbors().iter().filter(|z| !self.contains_point(z)).count()
    }

    /// Whether the signed permutation maps the domain onto itself.
    pub fn is_preserved_by(&self, g: &SignedPermutation) -> bool {
        if g.is_identity() {
            return true;
        }
        match self {
            Domain::Box { center, .. } => g.apply(center) == *center,
            Domain::HalfSpace { .. } | Domain::PositiveBox { .. } => {
                g.perm[0] == 0 && g.signs[0] == 1
            }
            Domain::Full { .. } => true,
            Domain::Block { lower, upper } => {
                let bb = BoundingBox {
                    lo: lower.0.clone(),
                    hi: upper.0.clone(),
                };
                let a = g.apply(lower);
                let b = g.apply(upper);
                let lo: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| *x.min(y)).collect();
                let hi: Vec<i64> = a.0.iter().zip(&b.0).map(|(x, y)| *x.max(y)).collect();
                lo == bb.lo && hi == bb.hi
            }
            Domain::Explicit { points, .. } => points.iter().all(|p| points.contains(&g.apply(p))),
            Domain::Intersection { parts, .. } => parts.iter().all(|s| s.is_preserved_by(g)),
        }
    }

    /// Parses the textual syntax `box:C:R`, `halfspace:N`, `posbox:N`,
    /// `block:A:B`, `set:P;Q;...`, `full`, and intersections joined by `&`.
    pub fn parse(spec: &str, d: usize) -> Result<Domain> {
        let bad = |reason: &str| Error::InvalidDomainSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        if d == 0 {
            return Err(bad("dimension must be at least 1"));
        }
        if spec.contains('&') {
            let parts = spec
                .split('&')
                .map(|s| Domain::parse(s, d))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Domain::Intersection { dim: d, parts });
        }
        let fields: Vec<&str> = spec.trim().split(':').collect();
        let pt = |s: &str| Point::parse(s, d).map_err(|e| bad(&e.to_string()));
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| bad("expected a non-negative integer"));
        match fields.as_slice() {
            ["box", c, r] => Ok(Domain::Box {
                center: pt(c)?,
                radius: num(r)?,
            }),
            ["box", r] => Ok(Domain::lambda_n(d, num(r)?)),
            ["halfspace", n] => Ok(Domain::HalfSpace { dim: d, n: num(n)? }),
            ["posbox", n] => Ok(Domain::PositiveBox { dim: d, n: num(n)? }),
            ["block", a, b] => Domain::block(pt(a)?, pt(b)?).map_err(|e| bad(&e.to_string())),
            ["set", list] => {
                let pts = list
                    .split(';')
                    .filter(|s| !s.trim().is_empty())
                    .map(pt)
                    .collect::<Result<Vec<_>>>()?;
                if pts.is_empty() {
                    return Err(bad("explicit set is empty"));
                }
                Domain::explicit(d, pts)
            }
            ["full"] => Ok(Domain::full(d)),
            _ => Err(bad("unknown domain kind or wrong number of fields")),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Box { center, radius } => write!(f, "box:{center}:{radius}"),
            Domain::HalfSpace { n, .. } => write!(f, "halfspace:{n}"),
            Domain::PositiveBox { n, .. } => write!(f, "posbox:{n}"),
            Domain::Block { lower, upper } => write!(f, "block:{lower}:{upper}"),
            Domain::Explicit { points, .. } => {
                let parts: Vec<String> = points.iter().map(|p| p.to_string()).collect();
                write!(f, "set:{}", parts.join(";"))
            }
            Domain::Intersection { parts, .. } => {
                let parts: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", parts.join("&"))
            }
            Domain::Full { .. } => write!(f, "full"),
        }
    }
}

/// All ordered pairs `(y, z)` with `y ∈ S`, `z ∈ within \ S`, `y ∼ z`.
///
/// Pairs come out in lexicographic order of `y`, then canonical neighbour
/// order of `z`. Fails when both `S` and `within` are infinite.
pub fn exit_edges(s: &Domain, within: &Domain) -> Result<Vec<(Point, Point)>> {
    let window = match (s.bounding_box(), within.bounding_box()) {
        (Some(a), _) => a,
        (None, Some(b)) => {
            // y must be adjacent to a point of `within`
            BoundingBox {
                lo: b.lo.iter().map(|v| v - 1).collect(),
                hi: b.hi.iter().map(|v| v + 1).collect(),
            }
        }
        (None, None) => return Err(Error::UnboundedEdgeSet(s.to_string())),
    };
    exit_edges_in(s, within, &window)
}

/// [`exit_edges`] with `y` restricted to an explicit window.
pub fn exit_edges_in(
    s: &Domain,
    within: &Domain,
    window: &BoundingBox,
) -> Result<Vec<(Point, Point)>> {
    if s.dim() != within.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: within.dim(),
        });
    }
    let mut out = Vec::new();
    for y in s.points_in(window) {
        for z in y.neighbors() {
            if !s.contains_point(&z) && within.contains_point(&z) {
                out.push((y.clone(), z));
            }
        }
    }
    Ok(out)
}

/// A symmetry of `Z^d` fixing the origin: `(g x)_i = signs[i] * x_{perm[i]}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    pub perm: Vec<usize>,
    pub signs: Vec<i64>,
}

impl SignedPermutation {
    pub fn identity(d: usize) -> Self {
        SignedPermutation {
            perm: (0..d).collect(),
            signs: vec![1; d],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p) && self.signs.iter().all(|&s| s == 1)
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point(
            self.perm
                .iter()
                .zip(&self.signs)
                .map(|(&j, &s)| s * p.0[j])
                .collect(),
        )
    }

    pub fn inverse(&self) -> Self {
        let d = self.perm.len();
        let mut perm = vec![0; d];
        let mut signs = vec![1; d];
        for i in 0..d {
            perm[self.perm[i]] = i;
            signs[self.perm[i]] = self.signs[i];
        }
        SignedPermutation { perm, signs }
    }

    /// The hyperoctahedral group of `Z^d`, identity first.
    pub fn all(d: usize) -> Vec<SignedPermutation> {
        let mut perms = vec![Vec::new()];
        for _ in 0..d {
            let mut next = Vec::new();
            for p in &perms {
                for j in 0..d {
                    if !p.contains(&j) {
                        let mut q = p.clone();
                        q.push(j);
                        next.push(q);
                    }
                }
            }
            perms = next;
        }
        let mut out = Vec::new();
        for perm in perms {
            for mask in 0..(1u32 << d) {
                let signs = (0..d)
                    .map(|i| if mask & (1 << i) != 0 { -1 } else { 1 })
                    .collect();
                out.push(SignedPermutation {
                    perm: perm.clone(),
                    signs,
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Point {
        Point(c.to_vec())
    }

    #[test]
    fn max_degree_of_small_domains() {
        let pair = Domain::explicit(2, [Point::new(vec![0, 0]), Point::new(vec![1, 0])]).unwrap();
        assert_eq!(pair.max_degree(), 1);
        assert_eq!(Domain::lambda_n(3, 0).max_degree(), 0);
        assert_eq!(Domain::lambda_n(3, 1).max_degree(), 6);
        assert_eq!(Domain::PositiveBox { dim: 2, n: 1 }.max_degree(), 2);
    }

    #[test]
    fn neighbor_order_is_canonical() {
        assert_eq!(p(&[0]).neighbors(), vec![p(&[1]), p(&[-1])]);
        assert_eq!(
            p(&[0, 0]).neighbors(),
            vec![p(&[1, 0]), p(&[-1, 0]), p(&[0, 1]), p(&[0, -1])]
        );
        let nb = p(&[5, 0, -2]).neighbors();
        assert_eq!(nb.len(), 6);
        for q in &nb {
            assert_eq!(q.sub(&p(&[5, 0, -2])).l1_norm(), 1);
        }
    }

    #[test]
    fn membership_examples() {
        assert!(Domain::lambda_n(2, 2).contains(&p(&[2, -2])).unwrap());
        assert!(!Domain::half_space(2, 0).contains(&p(&[-1, 5])).unwrap());
        let pos = Domain::PositiveBox { dim: 2, n: 3 };
        assert!(!pos.contains(&p(&[0, 1])).unwrap());
        assert!(pos.contains(&p(&[1, -3])).unwrap());
        assert!(matches!(
            Domain::lambda_n(2, 2).contains(&p(&[0, 0, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn exit_edge_examples() {
        let single = Domain::explicit(2, [Point::origin(2)]).unwrap();
        let e = exit_edges(&single, &Domain::lambda_n(2, 2)).unwrap();
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|(y, _)| *y == Point::origin(2)));

        let e = exit_edges(&Domain::lambda_n(1, 1), &Domain::lambda_n(1, 3)).unwrap();
        assert_eq!(e, vec![(p(&[-1]), p(&[-2])), (p(&[1]), p(&[2]))]);

        let e = exit_edges(&Domain::lambda_n(2, 1), &Domain::lambda_n(2, 5)).unwrap();
        assert_eq!(e.len(), brute_force_boundary_edges(&Domain::lambda_n(2, 1), 2));
        assert_eq!(e.len(), 12);
    }

    #[test]
    fn unbounded_edge_set_is_an_error() {
        let h = Domain::half_space(2, 0);
        assert!(matches!(
            exit_edges(&h, &Domain::full(2)),
            Err(Error::UnboundedEdgeSet(_))
        ));
    }

    // independent count: edges with exactly one endpoint in S, by double loop
    fn brute_force_boundary_edges(s: &Domain, d: usize) -> usize {
        let pts = s.points().unwrap();
        let bb = s.bounding_box().unwrap();
        let big = BoundingBox {
            lo: bb.lo.iter().map(|v| v - 1).collect(),
            hi: bb.hi.iter().map(|v| v + 1).collect(),
        };
        let all: Vec<Point> = big.points().collect();
        let mut count = 0;
        for a in &pts {
            for b in &all {
                if a.sub(b).l1_norm() == 1 && !s.contains_point(b) {
                    count += 1;
                }
            }
        }
        let _ = d;
        count
    }

    #[test]
    fn parse_round_trip() {
        for (s, d) in [
            ("box:0,0:3", 2),
            ("halfspace:2", 2),
            ("posbox:4", 3),
            ("block:-1,-2:3,1", 2),
            ("set:0,0;1,0", 2),
            ("box:0,0:3&halfspace:1", 2),
        ] {
            let dom = Domain::parse(s, d).unwrap();
            assert_eq!(Domain::parse(&dom.to_string(), d).unwrap(), dom);
        }
        assert_eq!(Domain::parse("box:0:3", 2).unwrap(), Domain::lambda_n(2, 3));
        assert!(Domain::parse("blob:3", 2).is_err());
        assert!(Domain::parse("block:1,0:2,2", 2).is_err());
    }

    #[test]
    fn symmetry_group_sizes() {
        assert_eq!(SignedPermutation::all(2).len(), 8);
        assert_eq!(SignedPermutation::all(3).len(), 48);
        let b = Domain::lambda_n(2, 3);
        assert!(SignedPermutation::all(2).iter().all(|g| b.is_preserved_by(g)));
        let h = Domain::half_space(2, 1);
        assert_eq!(
            SignedPermutation::all(2).iter().filter(|g| h.is_preserved_by(g)).count(),
            2
        );
        for g in SignedPermutation::all(3) {
            let x = p(&[1, -2, 3]);
            assert_eq!(g.inverse().apply(&g.apply(&x)), x);
        }
    }

    proptest::proptest! {
        #[test]
        fn exit_edges_match_boundary_count(cells in proptest::collection::btree_set((-3i64..=3, -3i64..=3), 1..12)) {
            let s = Domain::explicit(2, cells.iter().map(|&(a, b)| Point(vec![a, b]))).unwrap();
            let edges = exit_edges(&s, &Domain::lambda_n(2, 10)).unwrap();
            proptest::prop_assert_eq!(edges.len(), brute_force_boundary_edges(&s, 2));
            for (y, z) in &edges {
                proptest::prop_assert!(s.contains_point(y));
                proptest::prop_assert!(!s.contains_point(z));
                proptest::prop_assert!(y.is_adjacent(z));
            }
        }
    }
}
