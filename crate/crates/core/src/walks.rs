//! Walks and the interaction weight `ρ(γ) = ∏_{s<t} (1 - λ·1[γ(s) = γ(t)])`.
//!
//! Every coincidence pair contributes one factor `(1 - λ)`, so
//! `ρ(γ) = (1 - λ)^K` with `K = Σ_p C(m_p, 2)` and `m_p` the number of visits
//! to `p`. Walks keep an occupancy table so that `K` is maintained in O(1)
//! per step.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::lattice::Point;

/// The triple `(d, λ, β)` every quantity depends on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub d: usize,
    pub lambda: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(d: usize, lambda: f64, beta: f64) -> Result<Self> {
        let p = ModelParams { d, lambda, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in [0,1], got {}",
                self.lambda
            )));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be finite and non-negative, got {}",
                self.beta
            )));
        }
        Ok(())
    }

    /// `2dβ`, the per-step growth bound of the walk count.
    pub fn growth(&self) -> f64 {
        2.0 * self.d as f64 * self.beta
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        ModelParams { beta, ..*self }
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        ModelParams { lambda, ..*self }
    }
}

/// A finite nearest-neighbour path `γ(0), ..., γ(|γ|)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Walk {
    sites: Vec<Point>,
    occupancy: HashMap<Point, u32>,
    coincidences: u64,
}

impl Walk {
    /// The zero-length walk at `start`.
    pub fn new(start: Point) -> Self {
        let mut occupancy = HashMap::new();
        occupancy.insert(start.clone(), 1);
        Walk {
            sites: vec![start],
            occupancy,
            coincidences: 0,
        }
    }

    pub fn from_sites(sites: Vec<Point>) -> Result<Self> {
        let mut it = sites.into_iter();
        let first = it
            .next()
            .ok_or_else(|| Error::InvalidParameter("a walk needs at least one site".into()))?;
        let mut w = Walk::new(first);
        for p in it {
            w.push(p)?;
        }
        Ok(w)
    }

    pub fn push(&mut self, next: Point) -> Result<()> {
        let last = self.end();
        if !last.is_adjacent(&next) {
            return Err(Error::NotAdjacent {
                from: last.clone(),
                to: next,
            });
        }
        let m = self.occupancy.entry(next.clone()).or_insert(0);
        self.coincidences += u64::from(*m);
        *m += 1;
        self.sites.push(next);
        Ok(())
    }

    /// Number of steps `|γ|`.
    pub fn len(&self) -> usize {
        self.sites.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> &Point {
        &self.sites[0]
    }

    pub fn end(&self) -> &Point {
        self.sites.last().expect("walk has at least one site")
    }

    pub fn sites(&self) -> &[Point] {
        &self.sites
    }

    pub fn visits(&self, p: &Point) -> u32 {
        self.occupancy.get(p).copied().unwrap_or(0)
    }

    /// `K = #{(s,t) : s < t, γ(s) = γ(t)}`.
    pub fn coincidences(&self) -> u64 {
        self.coincidences
    }

    pub fn is_self_avoiding(&self) -> bool {
        self.coincidences == 0
    }

    pub fn reversed(&self) -> Walk {
        let mut sites = self.sites.clone();
        sites.reverse();
        Walk::from_sites(sites).expect("reversal of a valid walk is valid")
    }

    /// `w1 ∘ (yz) ∘ w2`: the sites of `w1` followed by those of `w2`.
    pub fn concat(w1: &Walk, w2: &Walk) -> Result<Walk> {
        let mut out = w1.clone();
        for p in &w2.sites {
            out.push(p.clone())?;
        }
        Ok(out)
    }
}

impl Serialize for Walk {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sites.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Walk {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sites = Vec::<Point>::deserialize(d)?;
        Walk::from_sites(sites).map_err(serde::de::Error::custom)
    }
}

/// `(1 - λ)^k`, exact for `k = 0` and for `λ ∈ {0, 1}`.
pub fn penalty(lambda: f64, k: u64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let q = 1.0 - lambda;
    if q == 0.0 {
        return 0.0;
    }
    if k <= i32::MAX as u64 {
        q.powi(k as i32)
    } else {
        q.powf(k as f64)
    }
}

pub fn rho(w: &Walk, lambda: f64) -> f64 {
    penalty(lambda, w.coincidences())
}

/// Factor by which `ρ` changes when `next` is appended to `w`.
pub fn extend_factor(w: &Walk, next: &Point, lambda: f64) -> Result<f64> {
    if !w.end().is_adjacent(next) {
        return Err(Error::NotAdjacent {
            from: w.end().clone(),
            to: next.clone(),
        });
    }
    Ok(penalty(lambda, u64::from(w.visits(next))))
}

/// Number of index pairs `0 ≤ i ≤ |w1|`, `1 ≤ j ≤ |w2|` with `w1(i) = w2(j)`.
pub fn cross_intersections(w1: &Walk, w2: &Walk) -> u64 {
    w2.sites[1..]
        .iter()
        .map(|p| u64::from(w1.visits(p)))
        .sum()
}

fn check_bridge(w1: &Walk, edge: &(Point, Point), w2: &Walk) -> Result<()> {
    let (y, z) = edge;
    if w1.end() != y || w2.start() != z {
        return Err(Error::EndpointMismatch(format!(
            "w1 ends at {}, w2 starts at {}, edge is ({y}, {z})",
            w1.end(),
            w2.start()
        )));
    }
    if !y.is_adjacent(z) {
        return Err(Error::NotAdjacent {
            from: y.clone(),
            to: z.clone(),
        });
    }
    Ok(())
}

/// Bounds `ρ(w1)ρ(w2)(1 - λI) ≤ ρ(w1∘(yz)∘w2) ≤ ρ(w1)ρ(w2)`, with `I` from
/// [`cross_intersections`]. The lower bound may be negative.
pub fn split_weight_bounds(
    w1: &Walk,
    edge: &(Point, Point),
    w2: &Walk,
    lambda: f64,
) -> Result<(f64, f64)> {
    check_bridge(w1, edge, w2)?;
    let product = rho(w1, lambda) * rho(w2, lambda);
    let i = cross_intersections(w1, w2) as f64;
    Ok((product * (1.0 - lambda * i), product))
}

/// `ρ` in exact rational arithmetic.
pub fn rho_exact(w: &Walk, lambda: &BigRational) -> BigRational {
    rational_penalty(lambda, w.coincidences())
}

fn rational_penalty(lambda: &BigRational, k: u64) -> BigRational {
    let q = BigRational::one() - lambda;
    let mut acc = BigRational::one();
    for _ in 0..k {
        acc *= &q;
        if acc.is_zero() {
            break;
        }
    }
    acc
}

/// [`split_weight_bounds`] in exact rational arithmetic.
pub fn split_weight_bounds_exact(
    w1: &Walk,
    edge: &(Point, Point),
    w2: &Walk,
    lambda: &BigRational,
) -> Result<(BigRational, BigRational)> {
    check_bridge(w1, edge, w2)?;
    let product = rho_exact(w1, lambda) * rho_exact(w2, lambda);
    let i = BigRational::from_integer(BigInt::from(cross_intersections(w1, w2)));
    let lower = &product * (BigRational::one() - lambda * i);
    Ok((lower, product))
}

/// The exact dyadic rational equal to a finite `f64`.
pub fn exact_rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}
