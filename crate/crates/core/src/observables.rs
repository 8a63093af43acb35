//! Derived quantities: sharp lengths, a correlation length fit, the error
//! amplitude and the averaged half-space lower bound.

use serde::Serialize;
use serde_json::{json, Value};

use crate::enumerate::{sum_enclosures, Enclosure, Enumerator};
use crate::error::{Error, Result};
use crate::lattice::{exit_edges, Domain, Point};
use crate::verifier::{compare, Orientation, Verdict};
use crate::walks::ModelParams;

/// `e^{-2}`, the threshold defining the sharp length.
pub const SHARP_THRESHOLD: f64 = 0.1353352832366127;

/// Outcome of a sharp-length scan over `k = 1..=kmax`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SharpOutcome {
    /// First `k` with `upper(φ_β(Λ_k)) ≤ threshold`, all earlier scales
    /// certified above it.
    Value { k: u64 },
    ExceedsKmax { kmax: u64 },
    /// The enclosure at scale `k` straddles the threshold.
    Inconclusive { k: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhiAtScale {
    pub k: u64,
    pub phi: Enclosure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpLengthResult {
    pub outcome: SharpOutcome,
    pub threshold: f64,
    pub phi_trace: Vec<PhiAtScale>,
}

impl SharpLengthResult {
    pub fn value(&self) -> Option<u64> {
        match self.outcome {
            SharpOutcome::Value { k } => Some(k),
            _ => None,
        }
    }
}

/// Scans `φ_β(Λ_k)` for `k = 1..=kmax` against `threshold`.
pub fn sharp_length_with(en: &Enumerator, beta: f64, d: usize, threshold: f64, kmax: u64) -> Result<SharpLengthResult> {
    if kmax == 0 {
        return Err(Error::InvalidParameter("kmax must be at least 1".into()));
    }
    let mut phi_trace = Vec::new();
    for k in 1..=kmax {
        let phi = en.phi(beta, &Domain::lambda_n(d, k))?;
        phi_trace.push(PhiAtScale { k, phi });
        let outcome = if phi.upper <= threshold {
            SharpOutcome::Value { k }
        } else if phi.lower > threshold {
            continue;
        } else {
            SharpOutcome::Inconclusive { k }
        };
        return Ok(SharpLengthResult {
            outcome,
            threshold,
            phi_trace,
        });
    }
    Ok(SharpLengthResult {
        outcome: SharpOutcome::ExceedsKmax { kmax },
        threshold,
        phi_trace,
    })
}

/// Threshold `1 - ε`; the value of `ε` that reproduces the sharp length
/// maps to `e^{-2}` exactly.
pub fn eps_threshold(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if epsilon == 1.0 - SHARP_THRESHOLD {
        Ok(SHARP_THRESHOLD)
    } else {
        Ok(1.0 - epsilon)
    }
}

/// `L_β = inf{k ≥ 1 : φ_β(Λ_k) ≤ e^{-2}}`.
pub fn sharp_length(params: &ModelParams, kmax: u64, n: usize) -> Result<SharpLengthResult> {
    params.validate()?;
    sharp_length_with(&Enumerator::new(params.lambda, n)?, params.beta, params.d, SHARP_THRESHOLD, kmax)
}

/// `L_β(ε) = inf{k ≥ 1 : φ_β(Λ_k) ≤ 1 - ε}`.
pub fn sharp_length_eps(params: &ModelParams, epsilon: f64, kmax: u64, n: usize) -> Result<SharpLengthResult> {
    params.validate()?;
    let threshold = eps_threshold(epsilon)?;
    sharp_length_with(&Enumerator::new(params.lambda, n)?, params.beta, params.d, threshold, kmax)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    pub n: u64,
    pub g_lower: f64,
    pub neg_log: f64,
    pub residual: f64,
}

/// Least-squares fit of `-log lower(G_β(0, n e_1)) ≈ intercept + n/ξ`.
///
/// This is an estimate from truncated sums, not the limit defining the
/// correlation length.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct XiFit {
    pub slope: f64,
    pub intercept: f64,
    /// `1/slope` when the slope is positive.
    pub xi: Option<f64>,
    pub points: Vec<DecayPoint>,
    pub estimate_only: bool,
}

pub fn correlation_length_with(en: &Enumerator, beta: f64, d: usize, n_list: &[u64]) -> Result<XiFit> {
    if let Some(&n) = n_list.iter().find(|&&n| n as usize > en.cutoff()) {
        return Err(Error::InvalidParameter(format!(
            "distance {n} exceeds the cutoff N = {}",
            en.cutoff()
        )));
    }
    let mut ns: Vec<u64> = n_list.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 {
        return Err(Error::DegenerateFit("at least two distinct distances are needed".into()));
    }
    let row = en.row(beta, &Domain::full(d), &Point::origin(d))?;
    let mut pts = Vec::with_capacity(ns.len());
    for &n in &ns {
        let g = row.get(&Point::unit(d, 0).scale(n as i64)).lower;
        if g <= 0.0 {
            return Err(Error::DegenerateFit(format!("lower bound of G(0, {n} e1) is zero")));
        }
        pts.push((n as f64, -g.ln(), g));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let points = ns
        .iter()
        .zip(&pts)
        .map(|(&n, &(x, y, g))| DecayPoint {
            n,
            g_lower: g,
            neg_log: y,
            residual: y - (intercept + slope * x),
        })
        .collect();
    Ok(XiFit {
        slope,
        intercept,
        xi: (slope > 0.0).then(|| 1.0 / slope),
        points,
        estimate_only: true,
    })
}

pub fn correlation_length_estimate(params: &ModelParams, n_list: &[u64], n: usize) -> Result<XiFit> {
    params.validate()?;
    correlation_length_with(&Enumerator::new(params.lambda, n)?, params.beta, params.d, n_list)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorAmplitudeResult {
    /// `(u, E(u))` for `u ∈ S` in lexicographic order.
    pub per_u: Vec<(Point, Enclosure)>,
    pub total: Enclosure,
}

/// `E(u) = Σ_{y∈S, z∈Λ∖S, y∼z} G^S(0,u) G^S(u,y) β G^Λ(z,u)` for every
/// `u` of a finite `S`, and their sum.
pub fn error_amplitude_with(en: &Enumerator, beta: f64, s: &Domain, lambda: &Domain) -> Result<ErrorAmplitudeResult> {
    let d = lambda.dim();
    if s.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: s.dim(),
        });
    }
    let pts = s
        .points()
        .ok_or_else(|| Error::InvalidParameter(format!("S = {s} must be finite")))?;
    let origin = Point::origin(d);
    if !s.contains_point(&origin) {
        return Err(Error::OutsideDomain {
            point: origin,
            domain: s.to_string(),
        });
    }
    if let Some(p) = pts.iter().find(|p| !lambda.contains_point(p)) {
        return Err(Error::OutsideDomain {
            point: p.clone(),
            domain: lambda.to_string(),
        });
    }
    let edges = exit_edges(s, lambda)?;
    let from_origin = en.row(beta, s, &origin)?;
    let mut per_u = Vec::with_capacity(pts.len());
    for u in pts {
        let g0u = from_origin.get(&u);
        if edges.is_empty() || g0u.upper == 0.0 || beta == 0.0 {
            per_u.push((u, Enclosure::zero()));
            continue;
        }
        let in_s = en.row(beta, s, &u)?;
        // G^Λ(z, u) = G^Λ(u, z): reversal preserves the weight
        let in_l = en.row(beta, lambda, &u)?;
        let terms: Vec<Enclosure> = edges
            .iter()
            .map(|(y, z)| in_s.get(y).mul(&in_l.get(z)))
            .collect();
        per_u.push((u, g0u.mul(&sum_enclosures(&terms)).scale(beta)));
    }
    let total = sum_enclosures(per_u.iter().map(|(_, e)| e));
    Ok(ErrorAmplitudeResult { per_u, total })
}

pub fn error_amplitude(params: &ModelParams, s: &Domain, lambda: &Domain, n: usize) -> Result<ErrorAmplitudeResult> {
    params.validate()?;
    error_amplitude_with(&Enumerator::new(params.lambda, n)?, params.beta, s, lambda)
}

/// `A_n = {x : x_1 = |x| = n}`.
pub fn face_points(d: usize, n: u64) -> Vec<Point> {
    let n = n as i64;
    let mut lo = vec![-n; d];
    let mut hi = vec![n; d];
    lo[0] = n;
    hi[0] = n;
    crate::lattice::BoundingBox { lo, hi }.points().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Precondition {
    Met,
    Unmet,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct AvgLowerReport {
    pub n: u64,
    pub epsilon: f64,
    pub face_size: u64,
    /// `|A_n|^{-1} Σ_{x∈A_n} G^H(0,x)`.
    pub average: Enclosure,
    /// `(1-ε)/(2dβ|A_n|)`.
    pub chain_value: f64,
    /// `φ_β(Λ_n)/(2dβ|A_n|)`.
    pub phi_ratio: Option<Enclosure>,
    /// Whether `n < L_β(ε)`, i.e. `φ_β(Λ_k) > 1 - ε` for all `1 ≤ k ≤ n`.
    pub precondition: Precondition,
    pub verdict: Verdict,
    pub note: Option<String>,
    pub instance: Value,
}

/// Averaged half-space lower bound `avg_{A_n} G^H(0,·) ≥ (1-ε)/(2dβ|A_n|)`
/// under `n < L_β(ε)`.
pub fn halfspace_avg_lower_check_with(
    en: &Enumerator,
    beta: f64,
    d: usize,
    n: u64,
    epsilon: f64,
) -> Result<AvgLowerReport> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let threshold = eps_threshold(epsilon)?;
    let mut precondition = Precondition::Met;
    let mut phi_n = Enclosure::zero();
    for k in 1..=n {
        let phi = en.phi(beta, &Domain::lambda_n(d, k))?;
        if phi.upper <= threshold {
            precondition = Precondition::Unmet;
            break;
        }
        if phi.lower <= threshold {
            precondition = Precondition::Unknown;
        }
        phi_n = phi;
    }
    let face = face_points(d, n);
    let size = face.len() as u64;
    let row = en.row(beta, &Domain::half_space(d, 0), &Point::origin(d))?;
    let values: Vec<Enclosure> = face.iter().map(|x| row.get(x)).collect();
    let average = sum_enclosures(&values).scale(1.0 / size as f64);
    let denom = 2.0 * d as f64 * beta * size as f64;
    let chain_value = (1.0 - epsilon) / denom;
    let phi_ratio = (precondition != Precondition::Unmet && beta > 0.0).then(|| phi_n.scale(1.0 / denom));
    let cmp = compare(&average, &Enclosure::exact(chain_value), Orientation::Ge);
    let (verdict, note) = match (precondition, cmp) {
        (Precondition::Unmet, _) => (Verdict::Holds, Some("precondition n < L_beta(eps) unmet; vacuous".to_string())),
        (_, Verdict::Holds) => (Verdict::Holds, None),
        (Precondition::Met, Verdict::Fails) => (Verdict::Fails, None),
        _ => (Verdict::Inconclusive, None),
    };
    Ok(AvgLowerReport {
        n,
        epsilon,
        face_size: size,
        average,
        chain_value,
        phi_ratio,
        precondition,
        verdict,
        note,
        instance: json!({
            "check": "avg-lower",
            "d": d,
            "lambda": en.lambda(),
            "beta": beta,
            "n": n,
            "epsilon": epsilon,
            "N": en.cutoff(),
        }),
    })
}

pub fn halfspace_avg_lower_check(params: &ModelParams, n: u64, epsilon: f64, cutoff: usize) -> Result<AvgLowerReport> {
    params.validate()?;
    halfspace_avg_lower_check_with(&Enumerator::new(params.lambda, cutoff)?, params.beta, params.d, n, epsilon)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> Point {
        Point::new(c.to_vec())
    }

    #[test]
    fn threshold_constant_is_e_minus_two() {
        assert_eq!(SHARP_THRESHOLD, (-2.0f64).exp());
    }

    #[test]
    fn small_beta_has_unit_sharp_length() {
        let params = ModelParams::new(2, 0.5, 0.01).unwrap();
        let r = sharp_length(&params, 5, 10).unwrap();
        assert_eq!(r.outcome, SharpOutcome::Value { k: 1 });
        assert_eq!(r.phi_trace.len(), 1);
    }

    #[test]
    fn eps_at_sharp_value_reproduces_sharp_length() {
        let en = Enumerator::new(0.5, 10).unwrap();
        for beta in [0.05, 0.15, 0.2] {
            let a = sharp_length_with(&en, beta, 2, SHARP_THRESHOLD, 4).unwrap();
            let b = sharp_length_with(&en, beta, 2, eps_threshold(1.0 - SHARP_THRESHOLD).unwrap(), 4).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn eps_near_one_exceeds_kmax() {
        let params = ModelParams::new(2, 0.5, 0.1).unwrap();
        let r = sharp_length_eps(&params, 0.999, 2, 8).unwrap();
        assert_eq!(r.outcome, SharpOutcome::ExceedsKmax { kmax: 2 });
    }

    #[test]
    fn one_dimensional_decay_rate() {
        let beta: f64 = 0.2;
        let params = ModelParams::new(1, 0.0, beta).unwrap();
        let fit = correlation_length_estimate(&params, &(1..=10).collect::<Vec<_>>(), 40).unwrap();
        let r = (1.0 - (1.0 - 4.0 * beta * beta).sqrt()) / (2.0 * beta);
        let want = -r.ln();
        assert!((fit.slope - want).abs() < 0.05 * want, "{} vs {want}", fit.slope);
        assert!(fit.xi.unwrap() > 0.0);
    }

    #[test]
    fn fit_rejects_distances_beyond_cutoff() {
        let params = ModelParams::new(2, 0.5, 0.1).unwrap();
        assert!(correlation_length_estimate(&params, &[1, 20], 8).is_err());
        assert!(matches!(
            correlation_length_estimate(&params, &[3], 8),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn error_amplitude_vanishes_at_beta_zero() {
        let params = ModelParams::new(2, 0.5, 0.0).unwrap();
        let r = error_amplitude(&params, &Domain::lambda_n(2, 1), &Domain::lambda_n(2, 2), 6).unwrap();
        assert_eq!((r.total.lower, r.total.upper), (0.0, 0.0));
    }

    #[test]
    fn error_amplitude_single_site() {
        // S = {0}: E(0) = β Σ_{z∼0} G^Λ(z, 0)
        let en = Enumerator::new(0.5, 10).unwrap();
        let beta = 0.1;
        let s = Domain::explicit(2, [p(&[0, 0])]).unwrap();
        let l = Domain::lambda_n(2, 2);
        let r = error_amplitude_with(&en, beta, &s, &l).unwrap();
        let direct: Vec<Enclosure> = p(&[0, 0])
            .neighbors()
            .iter()
            .map(|z| en.row(beta, &l, z).unwrap().get(&p(&[0, 0])))
            .collect();
        let want = sum_enclosures(&direct).scale(beta);
        assert!(r.total.lower <= want.upper && want.lower <= r.total.upper);
        assert!(r.total.width() < 1e-6);
    }

    #[test]
    fn error_amplitude_total_is_sum_and_monotone_in_beta() {
        let en = Enumerator::new(0.5, 10).unwrap();
        let s = Domain::lambda_n(2, 1);
        let l = Domain::lambda_n(2, 2);
        let mut prev = 0.0;
        for beta in [0.02, 0.05, 0.1] {
            let r = error_amplitude_with(&en, beta, &s, &l).unwrap();
            let sum = sum_enclosures(r.per_u.iter().map(|(_, e)| e));
            assert_eq!(sum, r.total);
            assert!(r.total.lower >= prev);
            prev = r.total.lower;
        }
    }

    #[test]
    fn face_size_matches_formula() {
        for d in [2usize, 3] {
            for n in 1..=4u64 {
                let brute = crate::lattice::BoundingBox::around(&Point::origin(d), n as i64)
                    .points()
                    .filter(|x| x.0[0] == n as i64 && x.sup_norm() == n as i64)
                    .count();
                assert_eq!(face_points(d, n).len(), brute);
                assert_eq!(brute as u64, (2 * n + 1).pow(d as u32 - 1));
            }
        }
    }

    #[test]
    fn avg_lower_vacuous_at_beta_zero() {
        let en = Enumerator::new(0.5, 6).unwrap();
        let r = halfspace_avg_lower_check_with(&en, 0.0, 2, 1, 0.5).unwrap();
        assert_eq!(r.precondition, Precondition::Unmet);
        assert!(r.note.is_some());
        assert_eq!(r.face_size, 3);
    }

    #[test]
    fn avg_lower_example_holds() {
        let en = Enumerator::new(0.5, 12).unwrap();
        let r = halfspace_avg_lower_check_with(&en, 0.2, 2, 1, 0.8).unwrap();
        assert_eq!(r.precondition, Precondition::Met);
        assert_eq!(r.verdict, Verdict::Holds);
    }
}
