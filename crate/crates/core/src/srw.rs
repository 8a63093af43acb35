//! Simple random walk (`λ = 0`) baselines: exact Green functions by linear
//! solves, gambler's-ruin hitting probabilities, half-space visit counts,
//! merging couplings and exit times.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Domain, Point};

/// Largest number of unknowns solved by dense LU.
pub const DENSE_LIMIT: usize = 3000;

/// Seeded source of independent random streams.
///
/// Stream `i` is ChaCha8 keyed by `seed` with stream id `i`, so any trial
/// can be replayed on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
}

impl RandomSource {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        RandomSource { seed }
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }
}

/// `G(x, y) = Σ_n β^n #{walks x → y of length n inside Λ}` on a finite
/// domain.
#[derive(Clone, Debug)]
pub struct GreenMatrix {
    pub points: Vec<Point>,
    index: HashMap<Point, usize>,
    pub values: DMatrix<f64>,
}

impl GreenMatrix {
    pub fn get(&self, x: &Point, y: &Point) -> Option<f64> {
        Some(self.values[(*self.index.get(x)?, *self.index.get(y)?)])
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn finite_points(domain: &Domain) -> Result<Vec<Point>> {
    domain
        .points()
        .ok_or_else(|| Error::InvalidParameter(format!("domain {domain} is not finite")))
}

fn adjacency(points: &[Point]) -> (HashMap<Point, usize>, Vec<Vec<usize>>) {
    let index: HashMap<Point, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
    let adj = points
        .iter()
        .map(|p| p.neighbors().iter().filter_map(|q| index.get(q).copied()).collect())
        .collect();
    (index, adj)
}

/// Certifies that `β A_Λ` has spectral radius below one.
///
/// Uses the degree bound first, then the Collatz–Wielandt bound
/// `ρ(A) ≤ max_i (A v)_i / v_i` for a power-iterated positive `v`.
fn check_spectral(beta: f64, adj: &[Vec<usize>]) -> Result<()> {
    let maxdeg = adj.iter().map(Vec::len).max().unwrap_or(0);
    if beta * (maxdeg as f64) < 1.0 {
        return Ok(());
    }
    let n = adj.len();
    let mut v = vec![1.0f64; n];
    let mut upper = f64::INFINITY;
    let mut lower = 0.0f64;
    for _ in 0..500 {
        let w: Vec<f64> = adj.iter().map(|nb| nb.iter().map(|&j| v[j]).sum::<f64>() + 1e-300).collect();
        upper = w.iter().zip(&v).map(|(a, b)| a / b).fold(0.0, f64::max);
        lower = w.iter().zip(&v).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min);
        let norm = w.iter().cloned().fold(0.0, f64::max);
        v = w.iter().map(|x| x / norm).collect();
        if beta * upper * (1.0 + 1e-12) < 1.0 {
            return Ok(());
        }
        if beta * lower >= 1.0 {
            break;
        }
    }
    Err(Error::Singular(format!(
        "cannot certify spectral radius of beta*A below one (beta = {beta}, radius in [{lower}, {upper}])"
    )))
}

/// Solves `(I − βA_Λ) G = I` by dense LU.
pub fn green_exact(d: usize, beta: f64, domain: &Domain) -> Result<GreenMatrix> {
    if domain.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: domain.dim(),
        });
    }
    let points = finite_points(domain)?;
    let n = points.len();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{n} unknowns exceed the dense limit {DENSE_LIMIT}; use green_column"
        )));
    }
    let (index, adj) = adjacency(&points);
    check_spectral(beta, &adj)?;
    let mut m = DMatrix::<f64>::identity(n, n);
    for (i, nb) in adj.iter().enumerate() {
        for &j in nb {
            m[(i, j)] -= beta;
        }
    }
    let values = m
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("I - beta*A is singular".into()))?;
    Ok(GreenMatrix { points, index, values })
}

/// `G(x, ·)` on a finite domain by summing the Neumann series
/// `Σ_n (βA)^n e_x` until the increment is below `tol` relative.
pub fn green_column(d: usize, beta: f64, domain: &Domain, x: &Point, tol: f64) -> Result<HashMap<Point, f64>> {
    if domain.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: domain.dim(),
        });
    }
    let points = finite_points(domain)?;
    let (index, adj) = adjacency(&points);
    let src = *index.get(x).ok_or_else(|| Error::OutsideDomain {
        point: x.clone(),
        domain: domain.to_string(),
    })?;
    check_spectral(beta, &adj)?;
    let n = points.len();
    let mut term = vec![0.0; n];
    term[src] = 1.0;
    let mut sum = term.clone();
    for _ in 0..1_000_000 {
        let next: Vec<f64> = adj.iter().map(|nb| beta * nb.iter().map(|&j| term[j]).sum::<f64>()).collect();
        let inc: f64 = next.iter().sum();
        let total: f64 = sum.iter().sum();
        for (s, t) in sum.iter_mut().zip(&next) {
            *s += t;
        }
        term = next;
        if inc <= tol * total {
            break;
        }
    }
    Ok(points.into_iter().zip(sum).collect())
}

/// `P_0[τ^n ≤ steps]` for the exit time `τ^n` of `H_n = {x_1 ≥ -n}`.
///
/// The first coordinate moves `±1` with probability `1/(2d)` each and holds
/// otherwise; the DP tracks its law on the reachable range.
pub fn gambler_ruin_truncated(d: usize, n: u64, steps: u64) -> Result<f64> {
    Ok(gambler_ruin_curve(d, n, steps)?.last().copied().unwrap_or(0.0))
}

/// `P_0[τ^n ≤ t]` for `t = 0..=steps`.
pub fn gambler_ruin_curve(d: usize, n: u64, steps: u64) -> Result<Vec<f64>> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let p = 1.0 / (2 * d) as f64;
    let hold = 1.0 - 2.0 * p;
    let n = n as usize;
    let steps = steps as usize;
    // index j ↔ first coordinate j - n; index 0 is the last site inside
    let width = n + steps + 2;
    let mut mass = vec![0.0f64; width];
    mass[n] = 1.0;
    let mut exited = 0.0f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    let mut hi = n;
    for _ in 0..steps {
        exited += p * mass[0];
        let mut next = vec![0.0f64; width];
        for j in 0..=hi {
            let m = mass[j];
            if m == 0.0 {
                continue;
            }
            next[j] += hold * m;
            next[j + 1] += p * m;
            if j > 0 {
                next[j - 1] += p * m;
            }
        }
        mass = next;
        hi += 1;
        out.push(exited.min(1.0));
    }
    Ok(out)
}

struct LogFactorials(Vec<f64>);

impl LogFactorials {
    fn new(n: usize) -> Self {
        let mut v = Vec::with_capacity(n + 1);
        v.push(0.0);
        let mut acc = 0.0;
        for i in 1..=n {
            acc += (i as f64).ln();
            v.push(acc);
        }
        LogFactorials(v)
    }

    fn binom(&self, n: usize, k: usize) -> f64 {
        self.0[n] - self.0[k] - self.0[n - k]
    }
}

/// `P[±1 walk of s steps ends at t]` for `s = 0..=smax`.
fn one_dim_endpoint(lf: &LogFactorials, smax: usize, t: i64) -> Vec<f64> {
    let t = t.unsigned_abs() as usize;
    (0..=smax)
        .map(|s| {
            if s < t || (s - t) % 2 == 1 {
                0.0
            } else {
                (lf.binom(s, (s + t) / 2) - s as f64 * std::f64::consts::LN_2).exp()
            }
        })
        .collect()
}

/// `P[SRW in Z^m of s steps ends at y]` for `s = 0..=smax`.
fn endpoint_law(lf: &LogFactorials, smax: usize, y: &[i64]) -> Vec<f64> {
    match y.len() {
        0 => (0..=smax).map(|s| if s == 0 { 1.0 } else { 0.0 }).collect(),
        1 => one_dim_endpoint(lf, smax, y[0]),
        2 => {
            // rotating by 45° makes the two coordinates independent ±1 walks
            let a = one_dim_endpoint(lf, smax, y[0] + y[1]);
            let b = one_dim_endpoint(lf, smax, y[0] - y[1]);
            a.iter().zip(&b).map(|(u, v)| u * v).collect()
        }
        m => {
            let first = one_dim_endpoint(lf, smax, y[0]);
            let rest = endpoint_law(lf, smax, &y[1..]);
            let (pl, ql) = ((1.0 / m as f64).ln(), ((m - 1) as f64 / m as f64).ln());
            (0..=smax)
                .map(|s| {
                    (0..=s)
                        .filter(|&i| first[i] > 0.0 && rest[s - i] > 0.0)
                        .map(|i| (lf.binom(s, i) + i as f64 * pl + (s - i) as f64 * ql).exp() * first[i] * rest[s - i])
                        .sum()
                })
                .collect()
        }
    }
}

/// `E_0[Σ_{ℓ < τ^0 ∧ steps} 1[X_ℓ = x]]` in the half-space `H_0`.
///
/// Given the number `j` of first-coordinate steps among the first `ℓ`, the
/// first coordinate is a ±1 walk that must stay non-negative and the rest
/// is an independent walk in `Z^{d-1}`, so the sum factorises over `j`.
pub fn halfspace_visits(d: usize, x: &Point, steps: u64) -> Result<f64> {
    if d <= 2 {
        return Err(Error::InvalidParameter(format!(
            "half-space visit estimate requires d > 2, got d = {d}"
        )));
    }
    if x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: x.dim(),
        });
    }
    if x.0[0] < 0 {
        return Err(Error::OutsideDomain {
            point: x.clone(),
            domain: Domain::half_space(d, 0).to_string(),
        });
    }
    let steps = steps as usize;
    if steps == 0 {
        return Ok(0.0);
    }
    let lmax = steps - 1;
    let lf = LogFactorials::new(lmax + 1);
    let x1 = x.0[0] as usize;

    // q1[j]: ±1 walk of j steps from 0 staying ≥ 0 and ending at x1
    let mut q1 = vec![0.0f64; lmax + 1];
    let mut law = vec![0.0f64; lmax + 2];
    law[0] = 1.0;
    for j in 0..=lmax {
        if x1 <= j {
            q1[j] = law[x1];
        }
        if j == lmax {
            break;
        }
        let mut next = vec![0.0f64; lmax + 2];
        for (i, &m) in law.iter().enumerate().take(j + 1) {
            if m == 0.0 {
                continue;
            }
            next[i + 1] += 0.5 * m;
            if i > 0 {
                next[i - 1] += 0.5 * m;
            }
        }
        law = next;
    }
    let qp = endpoint_law(&lf, lmax, &x.0[1..]);

    let (pl, ql) = ((1.0 / d as f64).ln(), ((d - 1) as f64 / d as f64).ln());
    let mut total = 0.0;
    for (j, &a) in q1.iter().enumerate() {
        if a == 0.0 {
            continue;
        }
        for (s, &b) in qp.iter().enumerate().take(lmax - j + 1) {
            if b == 0.0 {
                continue;
            }
            let w = (lf.binom(j + s, j) + j as f64 * pl + s as f64 * ql).exp();
            total += w * a * b;
        }
    }
    Ok(total)
}

/// One uniformly random step: axis and sign.
fn random_step<R: Rng>(rng: &mut R, d: usize) -> (usize, i64) {
    let r = rng.gen_range(0..2 * d);
    (r / 2, if r % 2 == 0 { 1 } else { -1 })
}

/// Steps of `X^u` and `X^v` for the current displacement `D = X^u − X^v`.
///
/// Two axes with odd displacement are paired by swapping them in `X^v`'s
/// axis choice; once every axis is even, the first nonzero axis is reflected
/// and all others move in lockstep. Each marginal remains a simple random
/// walk.
fn coupled_step(diff: &[i64], axis: usize, sign: i64) -> (usize, i64) {
    let odd: Vec<usize> = (0..diff.len()).filter(|&a| diff[a] % 2 != 0).collect();
    if odd.len() >= 2 {
        let (a, b) = (odd[0], odd[1]);
        let other = if axis == a {
            b
        } else if axis == b {
            a
        } else {
            axis
        };
        return (other, sign);
    }
    match (0..diff.len()).find(|&a| diff[a] != 0 && diff[a] % 2 == 0) {
        Some(a) if axis == a => (axis, -sign),
        _ => (axis, sign),
    }
}

/// Survival curve `P[X^u_t ≠ X^v_t for all t ≤ n]` of the merging coupling.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergeStats {
    pub trials: u64,
    pub horizon: u64,
    /// `survival[n]` for `n = 0..=horizon`.
    pub survival: Vec<f64>,
    /// Binomial standard errors of `survival`.
    pub std_error: Vec<f64>,
}

/// Runs the coupling from `u` and `v` for `horizon` steps, `trials` times.
pub fn coupling_merge_stats(u: &Point, v: &Point, horizon: u64, trials: u64, rng: &RandomSource) -> Result<MergeStats> {
    if u.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let d = u.dim();
    let merge_times: Vec<Option<u64>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream(i);
            let mut diff: Vec<i64> = u.sub(v).0;
            if diff.iter().all(|&c| c == 0) {
                return Some(0);
            }
            for t in 1..=horizon {
                let (axis, sign) = random_step(&mut r, d);
                let (axis_v, sign_v) = coupled_step(&diff, axis, sign);
                diff[axis] += sign;
                diff[axis_v] -= sign_v;
                if diff.iter().all(|&c| c == 0) {
                    return Some(t);
                }
            }
            None
        })
        .collect();
    let mut merged_at = vec![0u64; horizon as usize + 1];
    for t in merge_times.into_iter().flatten() {
        merged_at[t as usize] += 1;
    }
    let mut survival = Vec::with_capacity(horizon as usize + 1);
    let mut std_error = Vec::with_capacity(horizon as usize + 1);
    let mut merged = 0u64;
    for count in merged_at {
        merged += count;
        let p = (trials - merged) as f64 / trials as f64;
        survival.push(p);
        std_error.push((p * (1.0 - p) / trials as f64).sqrt());
    }
    Ok(MergeStats {
        trials,
        horizon,
        survival,
        std_error,
    })
}

/// Mean and standard error of a Monte Carlo sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

impl MeanEstimate {
    pub fn from_samples(xs: &[f64]) -> MeanEstimate {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        MeanEstimate {
            mean,
            std_error: (var / n).sqrt(),
            samples: xs.len() as u64,
        }
    }
}

/// Mean exit time of `Λ_{L-1}` for simple random walk from `start`.
pub fn exit_time_mean(d: usize, l: u64, start: &Point, trials: u64, rng: &RandomSource) -> Result<MeanEstimate> {
    if start.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: start.dim(),
        });
    }
    if l == 0 || start.sup_norm() > l as i64 - 1 {
        return Err(Error::InvalidParameter(format!(
            "start {start} must lie in the box of radius L-1 = {}",
            l as i64 - 1
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let times: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream(i);
            let mut pos = start.0.clone();
            let mut t = 0u64;
            loop {
                let (axis, sign) = random_step(&mut r, d);
                pos[axis] += sign;
                t += 1;
                if pos[axis].abs() >= l as i64 {
                    return t as f64;
                }
            }
        })
        .collect();
    Ok(MeanEstimate::from_samples(&times))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Point {
        Point::new(c.to_vec())
    }

    #[test]
    fn green_exact_small_examples() {
        let single = Domain::explicit(2, [p(&[0, 0])]).unwrap();
        let g = green_exact(2, 0.3, &single).unwrap();
        assert_eq!(g.get(&p(&[0, 0]), &p(&[0, 0])), Some(1.0));
        let pair = Domain::explicit(2, [p(&[0, 0]), p(&[1, 0])]).unwrap();
        let g = green_exact(2, 0.25, &pair).unwrap();
        assert!((g.get(&p(&[0, 0]), &p(&[0, 0])).unwrap() - 16.0 / 15.0).abs() < 1e-14);
        assert!((g.get(&p(&[0, 0]), &p(&[1, 0])).unwrap() - 4.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn green_exact_rejects_supercritical_beta() {
        let pair = Domain::explicit(1, [p(&[0]), p(&[1])]).unwrap();
        assert!(matches!(green_exact(1, 1.0, &pair), Err(Error::Singular(_))));
        assert!(green_exact(1, 0.9, &pair).is_ok());
    }

    #[test]
    fn column_matches_dense_solve() {
        let dom = Domain::lambda_n(2, 3);
        let g = green_exact(2, 0.24, &dom).unwrap();
        let x = p(&[1, -2]);
        let col = green_column(2, 0.24, &dom, &x, 1e-15).unwrap();
        for (y, v) in &col {
            let want = g.get(&x, y).unwrap();
            assert!((v - want).abs() <= 1e-12 * want.max(1e-3), "{y}: {v} vs {want}");
        }
    }

    #[test]
    fn one_dimensional_green_function() {
        // on Z the Green function is r^|n| / sqrt(1 - 4β²)
        let beta: f64 = 0.2;
        let dom = Domain::lambda_n(1, 60);
        let g = green_exact(1, beta, &dom).unwrap();
        let r = (1.0 - (1.0 - 4.0 * beta * beta).sqrt()) / (2.0 * beta);
        for n in 0..5 {
            let want = r.powi(n) / (1.0 - 4.0 * beta * beta).sqrt();
            assert!((g.get(&p(&[0]), &p(&[n as i64])).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn gambler_ruin_first_step() {
        assert_eq!(gambler_ruin_truncated(2, 0, 1).unwrap(), 0.25);
        assert_eq!(gambler_ruin_truncated(2, 0, 0).unwrap(), 0.0);
        let curve = gambler_ruin_curve(3, 2, 500).unwrap();
        assert!(curve.windows(2).all(|w| w[0] <= w[1]));
        assert!(*curve.last().unwrap() <= 1.0);
        // from n = 2 at least three steps are needed
        assert_eq!(curve[2], 0.0);
        assert!(curve[3] > 0.0);
    }

    #[test]
    fn halfspace_visits_basic() {
        assert!(halfspace_visits(2, &p(&[1, 0]), 100).is_err());
        assert_eq!(halfspace_visits(3, &p(&[50, 0, 0]), 20).unwrap(), 0.0);
        // the walk sits at the origin at time 0
        let v0 = halfspace_visits(3, &p(&[0, 0, 0]), 1).unwrap();
        assert!((v0 - 1.0).abs() < 1e-12);
        let a = halfspace_visits(3, &p(&[1, 0, 0]), 2000).unwrap();
        let b = halfspace_visits(3, &p(&[2, 0, 0]), 2000).unwrap();
        assert!(a > b && b > 0.0);
    }

    /// Brute force over all step sequences for tiny horizons.
    #[test]
    fn halfspace_visits_brute_force() {
        let d = 3;
        let steps = 7u64;
        for x in [p(&[0, 0, 0]), p(&[1, 0, 0]), p(&[1, 1, 0]), p(&[0, 1, -1])] {
            let mut total = 0.0;
            let mut stack = vec![(vec![0i64; d], 0u64, 1.0f64)];
            while let Some((pos, t, w)) = stack.pop() {
                if pos == x.0 {
                    total += w;
                }
                if t + 1 >= steps {
                    continue;
                }
                for axis in 0..d {
                    for s in [1, -1] {
                        let mut q = pos.clone();
                        q[axis] += s;
                        if q[0] >= 0 {
                            stack.push((q, t + 1, w / (2 * d) as f64));
                        }
                    }
                }
            }
            let got = halfspace_visits(d, &x, steps).unwrap();
            assert!((got - total).abs() < 1e-12, "{x}: {got} vs {total}");
        }
    }

    #[test]
    fn coupling_identical_starts_merge_immediately() {
        let s = coupling_merge_stats(&p(&[1, 0]), &p(&[1, 0]), 10, 50, &RandomSource::new(1)).unwrap();
        assert!(s.survival.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn coupling_merges_odd_axis_pairs() {
        let s = coupling_merge_stats(&p(&[1, 0]), &p(&[0, 1]), 2000, 400, &RandomSource::new(3)).unwrap();
        assert!(s.survival.windows(2).all(|w| w[0] >= w[1]));
        assert!(*s.survival.last().unwrap() < 0.2);
    }

    #[test]
    fn coupling_marginals_are_simple_random_walks() {
        // X^v's first coordinate after n steps has mean v_1 and variance n/d
        let d = 2;
        let n = 64;
        let trials = 20000;
        let src = RandomSource::new(11);
        let u = p(&[1, 0]);
        let v = p(&[-1, 0]);
        let finals: Vec<f64> = (0..trials)
            .map(|i| {
                let mut r = src.stream(i);
                let mut diff = u.sub(&v).0;
                let mut yv = v.0.clone();
                for _ in 0..n {
                    let (axis, sign) = random_step(&mut r, d);
                    let (axis_v, sign_v) = coupled_step(&diff, axis, sign);
                    diff[axis] += sign;
                    diff[axis_v] -= sign_v;
                    yv[axis_v] += sign_v;
                }
                yv[0] as f64
            })
            .collect();
        let est = MeanEstimate::from_samples(&finals);
        assert!((est.mean - (-1.0)).abs() < 4.0 * est.std_error);
        let var = finals.iter().map(|x| (x + 1.0).powi(2)).sum::<f64>() / trials as f64;
        let want = n as f64 / d as f64;
        let se = want * (2.0 / trials as f64).sqrt();
        assert!((var - want).abs() < 4.0 * se, "{var} vs {want}");
    }

    #[test]
    fn exit_time_examples() {
        let src = RandomSource::new(5);
        let e = exit_time_mean(2, 1, &p(&[0, 0]), 100, &src).unwrap();
        assert_eq!((e.mean, e.std_error), (1.0, 0.0));
        let a = exit_time_mean(2, 3, &p(&[0, 0]), 4000, &src).unwrap();
        let b = exit_time_mean(2, 6, &p(&[0, 0]), 4000, &src).unwrap();
        assert!(a.mean < b.mean);
        assert!(exit_time_mean(2, 2, &p(&[2, 0]), 10, &src).is_err());
    }

    #[test]
    fn streams_are_reproducible() {
        let src = RandomSource::new(42);
        let a: Vec<u32> = (0..5).map(|_| 0).scan(src.stream(7), |r, _| Some(r.gen())).collect();
        let b: Vec<u32> = (0..5).map(|_| 0).scan(src.stream(7), |r, _| Some(r.gen())).collect();
        let c: Vec<u32> = (0..5).map(|_| 0).scan(src.stream(8), |r, _| Some(r.gen())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }
}
