//! Length-truncated walk sums with certified enclosures.
//!
//! Walks are enumerated once per (domain, source, λ, N); the resulting
//! length-resolved tables are evaluated at any `β` afterwards. The tail of
//! walks longer than `N` is bounded by extending the frontier with simple
//! random walk steps, which is rigorous whenever `2dβ < 1`.

mod enclosure;
mod grid;
mod row;
mod sums;
mod tail;

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;

pub use enclosure::{sum_enclosures, Enclosure};
pub use row::Row;
pub use sums::{Pruning, WalkSums};

use crate::error::{Error, Result};
use crate::lattice::{Domain, Point, SignedPermutation};
use crate::walks::ModelParams;
use row::RowData;

type SumsKey = (Domain, Point);
type RowKey = (Domain, Point, u64);

/// Cached enumerations for one `λ` and one cutoff `N`.
///
/// Sources related by a lattice symmetry preserving the domain share their
/// tables.
#[derive(Debug)]
pub struct Enumerator {
    lambda: f64,
    cutoff: usize,
    pruning: Option<Pruning>,
    sums: Mutex<HashMap<SumsKey, Arc<WalkSums>>>,
    rows: Mutex<HashMap<RowKey, Arc<RowData>>>,
}

impl Enumerator {
    pub fn new(lambda: f64, cutoff: usize) -> Result<Enumerator> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        Ok(Enumerator {
            lambda,
            cutoff,
            pruning: None,
            sums: Mutex::new(HashMap::new()),
            rows: Mutex::new(HashMap::new()),
        })
    }

    /// Enables pruning of branches whose remaining contribution is below
    /// `tol`; pruned mass moves to the upper bound.
    pub fn with_pruning(mut self, pruning: Pruning) -> Result<Enumerator> {
        if !(pruning.tol >= 0.0 && pruning.beta >= 0.0) {
            return Err(Error::InvalidParameter(
                "pruning tolerance and reference beta must be non-negative".into(),
            ));
        }
        self.pruning = Some(pruning);
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Symmetry `g` of the domain with `g(source)` lexicographically minimal.
    fn canonical(domain: &Domain, source: &Point) -> SignedPermutation {
        let d = domain.dim();
        if d > 4 {
            return SignedPermutation::identity(d);
        }
        let mut best = SignedPermutation::identity(d);
        let mut best_pt = source.clone();
        for g in SignedPermutation::all(d) {
            let img = g.apply(source);
            if img < best_pt && domain.is_preserved_by(&g) {
                best_pt = img;
                best = g;
            }
        }
        best
    }

    fn sums(&self, domain: &Domain, rep: &Point) -> Result<Arc<WalkSums>> {
        let key = (domain.clone(), rep.clone());
        if let Some(s) = self.sums.lock().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let stabilizer: Vec<SignedPermutation> = if domain.dim() <= 4 {
            SignedPermutation::all(domain.dim())
                .into_iter()
                .filter(|g| g.apply(rep) == *rep && domain.is_preserved_by(g))
                .collect()
        } else {
            Vec::new()
        };
        let s = Arc::new(sums::compute(
            domain,
            rep,
            self.lambda,
            self.cutoff,
            self.pruning,
            &stabilizer,
        )?);
        self.sums.lock().expect("cache lock").insert(key, s.clone());
        Ok(s)
    }

    /// `G^Λ_β(x, ·)` as a row of enclosures.
    pub fn row(&self, beta: f64, domain: &Domain, source: &Point) -> Result<Row> {
        check_beta(beta)?;
        if source.dim() != domain.dim() {
            return Err(Error::DimensionMismatch {
                expected: domain.dim(),
                found: source.dim(),
            });
        }
        if !domain.contains_point(source) {
            return Err(Error::OutsideDomain {
                point: source.clone(),
                domain: domain.to_string(),
            });
        }
        let g = Self::canonical(domain, source);
        let rep = g.apply(source);
        let key = (domain.clone(), rep.clone(), beta.to_bits());
        let cached = self.rows.lock().expect("cache lock").get(&key).cloned();
        let data = match cached {
            Some(d) => d,
            None => {
                let d = Arc::new(RowData::new(self.sums(domain, &rep)?, beta));
                self.rows.lock().expect("cache lock").insert(key, d.clone());
                d
            }
        };
        Ok(Row::new(data, g, source.clone(), domain.clone()))
    }

    pub fn green(&self, beta: f64, domain: &Domain, x: &Point, y: &Point) -> Result<Enclosure> {
        if !domain.contains(y)? {
            return Err(Error::OutsideDomain {
                point: y.clone(),
                domain: domain.to_string(),
            });
        }
        Ok(self.row(beta, domain, x)?.get(y))
    }

    /// `φ_β(S) = β Σ_{y∈S, z∉S, y∼z} G^S_β(0, y)`.
    pub fn phi(&self, beta: f64, s: &Domain) -> Result<Enclosure> {
        let origin = Point::origin(s.dim());
        let row = self.row(beta, s, &origin)?;
        let wmax = 2.0 * s.dim() as f64 * beta;
        Ok(row.weighted_sum(&|y| beta * s.exit_degree(y) as f64, wmax))
    }

    /// `χ = Σ_x G_β(0, x)` on `Z^d`.
    pub fn chi(&self, beta: f64, d: usize) -> Result<Enclosure> {
        Ok(self.row(beta, &Domain::full(d), &Point::origin(d))?.total())
    }

    /// Bubble `Σ_x G_β(0, x)^2` on `Z^d`.
    pub fn bubble(&self, beta: f64, d: usize, window: u64) -> Result<BubbleBound> {
        let row = self.row(beta, &Domain::full(d), &Point::origin(d))?;
        let (lower, upper) = row.square_sum(Some(window as i64));
        Ok(BubbleBound {
            lower,
            upper,
            window,
            truncation_n: self.cutoff,
        })
    }

    /// Drops all cached tables.
    pub fn clear(&self) {
        self.sums.lock().expect("cache lock").clear();
        self.rows.lock().expect("cache lock").clear();
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta must be finite and non-negative, got {beta}"
        )));
    }
    Ok(())
}

/// Bounds on the bubble diagram.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BubbleBound {
    /// `Σ_{x ∈ Λ_R} lower(G(0,x))^2`.
    pub lower: f64,
    /// Upper bound on the full sum over `Z^d`, when rigorous.
    pub upper: Option<f64>,
    pub window: u64,
    pub truncation_n: usize,
}

fn enumerator(params: &ModelParams, n: usize) -> Result<Enumerator> {
    params.validate()?;
    Enumerator::new(params.lambda, n)
}

/// Enclosure of `G^Λ_β(x, y)` from walks of length at most `n`.
pub fn green(params: &ModelParams, domain: &Domain, x: &Point, y: &Point, n: usize) -> Result<Enclosure> {
    enumerator(params, n)?.green(params.beta, domain, x, y)
}

/// All of `G^Λ_β(x, ·)` from one enumeration.
pub fn green_row(params: &ModelParams, domain: &Domain, x: &Point, n: usize) -> Result<Row> {
    enumerator(params, n)?.row(params.beta, domain, x)
}

pub fn phi(params: &ModelParams, s: &Domain, n: usize) -> Result<Enclosure> {
    enumerator(params, n)?.phi(params.beta, s)
}

pub fn chi_truncated(params: &ModelParams, n: usize) -> Result<Enclosure> {
    enumerator(params, n)?.chi(params.beta, params.d)
}

pub fn bubble_truncated(params: &ModelParams, n: usize, r: u64) -> Result<BubbleBound> {
    enumerator(params, n)?.bubble(params.beta, params.d, r)
}
