//! Monte Carlo estimates of length-truncated walk sums.
//!
//! For each length `n` the contribution `β^n Σ_{|γ|=n} ρ(γ) 1{γ: x → y ⊂ Λ}`
//! is estimated from fresh walks of exactly `n` steps, weighted by the
//! inverse of their proposal probability.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Domain, Point};
use crate::srw::{MeanEstimate, RandomSource};
use crate::walks::{penalty, ModelParams};

/// How walk steps are proposed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// Each step uniform among the `2d` neighbours.
    Uniform,
    /// Immediate reversals are proposed with relative weight `1 - λ`
    /// instead of `1`; they are never proposed at `λ = 1`.
    Nonreversing,
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Strategy> {
        match s {
            "uniform" => Ok(Strategy::Uniform),
            "nonreversing" => Ok(Strategy::Nonreversing),
            _ => Err(Error::InvalidParameter(format!(
                "unknown strategy `{s}` (expected uniform or nonreversing)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LengthContribution {
    pub n: usize,
    pub contribution: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    /// Walks sampled per length.
    pub samples: u64,
    pub strategy: Strategy,
    pub per_length: Vec<LengthContribution>,
}

/// Stream id of sample `i` at length `n`; the strategy gets its own bit so
/// the two estimators are independent.
fn stream_id(strategy: Strategy, n: usize, i: u64) -> u64 {
    let tag = match strategy {
        Strategy::Uniform => 0,
        Strategy::Nonreversing => 1u64 << 63,
    };
    tag | ((n as u64) << 40) | i
}

/// One weighted walk of `n` steps from `x`; returns its contribution to the
/// length-`n` term.
fn sample_walk<R: Rng>(
    rng: &mut R,
    params: &ModelParams,
    domain: &Domain,
    x: &Point,
    y: &Point,
    n: usize,
    strategy: Strategy,
    sites: &mut Vec<Vec<i64>>,
) -> f64 {
    let d = params.d;
    let q = 1.0 - params.lambda;
    sites.clear();
    sites.push(x.0.clone());
    let mut weight = 1.0f64;
    let mut coincidences = 0u64;
    let mut last: Option<usize> = None;
    for _ in 0..n {
        let dir = match (strategy, last) {
            (Strategy::Nonreversing, Some(prev)) => {
                let rev = prev ^ 1;
                let total = (2 * d - 1) as f64 + q;
                let u = rng.gen::<f64>() * total;
                let dir = if u < q {
                    rev
                } else {
                    let k = ((u - q) as usize).min(2 * d - 2);
                    if k >= rev {
                        k + 1
                    } else {
                        k
                    }
                };
                let p = (if dir == rev { q } else { 1.0 }) / total;
                weight *= params.beta / p;
                dir
            }
            _ => {
                weight *= params.beta * (2 * d) as f64;
                rng.gen_range(0..2 * d)
            }
        };
        let mut next = sites.last().expect("walk has a start").clone();
        next[dir / 2] += if dir % 2 == 0 { 1 } else { -1 };
        let np = Point(next);
        if !domain.contains_point(&np) {
            return 0.0;
        }
        coincidences += sites.iter().filter(|s| **s == np.0).count() as u64;
        sites.push(np.0);
        last = Some(dir);
        if q == 0.0 && coincidences > 0 {
            return 0.0;
        }
    }
    if sites.last().expect("walk has a start") != &y.0 {
        return 0.0;
    }
    weight * penalty(params.lambda, coincidences)
}

/// Unbiased estimate of `Σ_{n ≤ nmax} β^n Σ_{|γ|=n} ρ(γ) 1{γ: x → y ⊂ Λ}`
/// with `samples` fresh walks per length.
pub fn estimate_green_mc(
    params: &ModelParams,
    domain: &Domain,
    x: &Point,
    y: &Point,
    nmax: usize,
    samples: u64,
    rng: &RandomSource,
    strategy: Strategy,
) -> Result<McEstimate> {
    params.validate()?;
    for p in [x, y] {
        if !domain.contains(p)? {
            return Err(Error::OutsideDomain {
                point: p.clone(),
                domain: domain.to_string(),
            });
        }
    }
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let mut per_length = Vec::with_capacity(nmax + 1);
    per_length.push(LengthContribution {
        n: 0,
        contribution: if x == y { 1.0 } else { 0.0 },
        std_error: 0.0,
    });
    for n in 1..=nmax {
        // parity and distance rule out some lengths entirely
        let dist = x.sub(y).l1_norm() as usize;
        if dist > n || (n - dist) % 2 == 1 {
            per_length.push(LengthContribution {
                n,
                contribution: 0.0,
                std_error: 0.0,
            });
            continue;
        }
        let values: Vec<f64> = (0..samples)
            .into_par_iter()
            .map_init(Vec::new, |sites, i| {
                let mut r = rng.stream(stream_id(strategy, n, i));
                sample_walk(&mut r, params, domain, x, y, n, strategy, sites)
            })
            .collect();
        let est = MeanEstimate::from_samples(&values);
        per_length.push(LengthContribution {
            n,
            contribution: est.mean,
            std_error: est.std_error,
        });
    }
    let mean = per_length.iter().map(|c| c.contribution).sum();
    let std_error = per_length.iter().map(|c| c.std_error * c.std_error).sum::<f64>().sqrt();
    Ok(McEstimate {
        mean,
        std_error,
        samples,
        strategy,
        per_length,
    })
}
