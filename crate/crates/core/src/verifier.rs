//! Checks of the Simon–Lieb type inequalities, the weight sandwich, the
//! half-space bootstrap conditions and iterated decay on concrete instances.
//!
//! Every comparison is made between enclosures and yields a three-valued
//! [`Verdict`]; an inconclusive comparison is never reported as a pass.

use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::enumerate::{sum_enclosures, Enclosure, Enumerator};
use crate::error::{Error, Result};
use crate::lattice::{exit_edges, Domain, Point};
use crate::observables::{error_amplitude_with, sharp_length_with, SharpOutcome, SHARP_THRESHOLD};
use crate::srw::{green_column, RandomSource};
use crate::walks::{
    cross_intersections, exact_rational, rho, rho_exact, split_weight_bounds, split_weight_bounds_exact,
    ModelParams, Walk,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fails
    }
}

/// Which side must be the smaller one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    #[serde(rename = "lhs <= rhs")]
    Le,
    #[serde(rename = "lhs >= rhs")]
    Ge,
}

/// Verdict on `small ≤ large` given an enclosure of `large - small`.
fn verdict_from_gap(gap: &Enclosure) -> Verdict {
    if gap.lower >= 0.0 {
        Verdict::Holds
    } else if gap.upper < 0.0 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

/// Verdict on `lhs ≤ rhs` (or `≥`) from independent enclosures.
pub fn compare(lhs: &Enclosure, rhs: &Enclosure, orientation: Orientation) -> Verdict {
    match orientation {
        Orientation::Le => verdict_from_gap(&rhs.sub(lhs)),
        Orientation::Ge => verdict_from_gap(&lhs.sub(rhs)),
    }
}

/// Verdict on the strict inequality `value < threshold`.
pub fn compare_strict(value: &Enclosure, threshold: f64) -> Verdict {
    if value.upper < threshold {
        Verdict::Holds
    } else if value.lower >= threshold {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub orientation: Orientation,
    pub lhs: Enclosure,
    pub rhs: Enclosure,
    /// Lower end of the enclosure of the slack (larger side minus smaller
    /// side); positive means certified slack.
    pub margin: f64,
    /// Width of the slack enclosure.
    pub gap_width: f64,
    pub instance: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerdictReport {
    fn new(lhs: Enclosure, rhs: Enclosure, orientation: Orientation, slack: Enclosure, instance: Value) -> Self {
        VerdictReport {
            verdict: verdict_from_gap(&slack),
            orientation,
            lhs,
            rhs,
            margin: slack.lower,
            gap_width: slack.width(),
            instance,
            note: None,
        }
    }
}

fn check_origin_and_subset(s: &Domain, lambda: &Domain, x: &Point) -> Result<()> {
    let d = lambda.dim();
    if s.dim() != d || x.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if s.dim() != d { s.dim() } else { x.dim() },
        });
    }
    let origin = Point::origin(d);
    if !s.contains_point(&origin) {
        return Err(Error::OutsideDomain {
            point: origin,
            domain: s.to_string(),
        });
    }
    if !lambda.contains_point(x) {
        return Err(Error::OutsideDomain {
            point: x.clone(),
            domain: lambda.to_string(),
        });
    }
    if let Some(pts) = s.points() {
        if let Some(p) = pts.iter().find(|p| !lambda.contains_point(p)) {
            return Err(Error::InvalidParameter(format!(
                "S must be contained in Lambda, but {p} is not in {lambda}"
            )));
        }
    }
    Ok(())
}

fn sl_instance(check: &str, en: &Enumerator, beta: f64, s: &Domain, lambda: &Domain, x: &Point) -> Value {
    json!({
        "check": check,
        "d": lambda.dim(),
        "lambda": en.lambda(),
        "beta": beta,
        "S": s.to_string(),
        "Lambda": lambda.to_string(),
        "x": x.to_string(),
        "N": en.cutoff(),
    })
}

/// `G^S(0,x)` and `β Σ_{y∈S, z∈Λ∖S, y∼z} G^S(0,y) G^Λ(z,x)`.
fn sl_terms(en: &Enumerator, beta: f64, s: &Domain, lambda: &Domain, x: &Point) -> Result<(Enclosure, Enclosure)> {
    let origin = Point::origin(lambda.dim());
    let row_s = en.row(beta, s, &origin)?;
    let main = row_s.get(x);
    let mut terms = Vec::new();
    for (y, z) in exit_edges(s, lambda)? {
        let gs = row_s.get(&y);
        if gs.upper == 0.0 {
            continue;
        }
        let gl = en.row(beta, lambda, &z)?.get(x);
        terms.push(gs.mul(&gl));
    }
    let boundary = sum_enclosures(&terms).scale(beta);
    Ok((main, boundary))
}

/// `G^Λ(0,x) ≤ G^S(0,x) + β Σ_{y∈S, z∈Λ∖S, y∼z} G^S(0,y) G^Λ(z,x)`.
pub fn check_simon_lieb_upper_with(
    en: &Enumerator,
    beta: f64,
    s: &Domain,
    lambda: &Domain,
    x: &Point,
) -> Result<VerdictReport> {
    check_origin_and_subset(s, lambda, x)?;
    let origin = Point::origin(lambda.dim());
    let lhs = en.row(beta, lambda, &origin)?.get(x);
    let (main, boundary) = sl_terms(en, beta, s, lambda, x)?;
    let rhs = main.add(&boundary);
    // with S = Λ both sides are the same enclosed number
    let slack = if s == lambda { boundary } else { rhs.sub(&lhs) };
    Ok(VerdictReport::new(
        lhs,
        rhs,
        Orientation::Le,
        slack,
        sl_instance("sl-upper", en, beta, s, lambda, x),
    ))
}

/// The reversed inequality, with the error term
/// `-λ Σ_{u∈S} E^{S,Λ}(u) G^Λ(u,x)`.
pub fn check_simon_lieb_reversed_with(
    en: &Enumerator,
    beta: f64,
    s: &Domain,
    lambda: &Domain,
    x: &Point,
) -> Result<VerdictReport> {
    check_origin_and_subset(s, lambda, x)?;
    let origin = Point::origin(lambda.dim());
    let lhs = en.row(beta, lambda, &origin)?.get(x);
    let (main, boundary) = sl_terms(en, beta, s, lambda, x)?;
    let lam = en.lambda();
    let error = if lam == 0.0 {
        Enclosure::zero()
    } else {
        let amp = error_amplitude_with(en, beta, s, lambda)?;
        let mut terms = Vec::new();
        for (u, e) in &amp.per_u {
            if e.upper == 0.0 {
                continue;
            }
            terms.push(e.mul(&en.row(beta, lambda, u)?.get(x)));
        }
        sum_enclosures(&terms).scale(lam)
    };
    let rhs = main.add(&boundary).sub(&error);
    let slack = if s == lambda {
        boundary.sub(&error).neg()
    } else {
        lhs.sub(&rhs)
    };
    Ok(VerdictReport::new(
        lhs,
        rhs,
        Orientation::Ge,
        slack,
        sl_instance("sl-reversed", en, beta, s, lambda, x),
    ))
}

pub fn check_simon_lieb_upper(
    params: &ModelParams,
    s: &Domain,
    lambda: &Domain,
    x: &Point,
    n: usize,
) -> Result<VerdictReport> {
    params.validate()?;
    check_simon_lieb_upper_with(&Enumerator::new(params.lambda, n)?, params.beta, s, lambda, x)
}

pub fn check_simon_lieb_reversed(
    params: &ModelParams,
    s: &Domain,
    lambda: &Domain,
    x: &Point,
    n: usize,
) -> Result<VerdictReport> {
    params.validate()?;
    check_simon_lieb_reversed_with(&Enumerator::new(params.lambda, n)?, params.beta, s, lambda, x)
}

/// Aggregate of the weight sandwich over random concatenations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SandwichReport {
    pub trials: u64,
    pub d: usize,
    pub lambda: f64,
    pub max_len: usize,
    pub seed: u64,
    /// Violations of `lower ≤ ρ ≤ upper` at relative tolerance `1e-12`.
    pub violations: u64,
    /// Violations in exact rational arithmetic.
    pub exact_violations: u64,
    /// Triples with no cross intersections, where `ρ` must equal the upper
    /// bound exactly.
    pub disjoint: u64,
    pub disjoint_not_equal: u64,
    pub tolerance: f64,
}

fn random_walk<R: Rng>(rng: &mut R, start: Point, len: usize) -> Walk {
    let d = start.dim();
    let mut w = Walk::new(start);
    for _ in 0..len {
        let r = rng.gen_range(0..2 * d);
        let mut c = w.end().0.clone();
        c[r / 2] += if r % 2 == 0 { 1 } else { -1 };
        w.push(Point(c)).expect("nearest-neighbour step");
    }
    w
}

/// Samples `(γ1, yz, γ2)` with `z` not visited by `γ1` and checks
/// `ρ(γ1)ρ(γ2)(1 - λI) ≤ ρ(γ1∘(yz)∘γ2) ≤ ρ(γ1)ρ(γ2)`.
pub fn check_weight_sandwich(
    params: &ModelParams,
    trials: u64,
    max_len: usize,
    rng: &RandomSource,
) -> Result<SandwichReport> {
    params.validate()?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    const TOL: f64 = 1e-12;
    let d = params.d;
    let lam = params.lambda;
    let lam_q = exact_rational(lam);
    let outcomes: Vec<(bool, bool, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut r = rng.stream(i);
            let l1 = r.gen_range(0..=max_len);
            let l2 = r.gen_range(0..=max_len);
            // γ1 stays in some S and z is its first exit, so z ∉ γ1
            let (w1, z) = loop {
                let w1 = random_walk(&mut r, Point::origin(d), l1);
                let free: Vec<Point> = w1.end().neighbors().into_iter().filter(|q| w1.visits(q) == 0).collect();
                if !free.is_empty() {
                    let z = free[r.gen_range(0..free.len())].clone();
                    break (w1, z);
                }
            };
            let w2 = random_walk(&mut r, z.clone(), l2);
            let edge = (w1.end().clone(), z);
            let joined = Walk::concat(&w1, &w2).expect("bridge is a lattice edge");

            let (lo, hi) = split_weight_bounds(&w1, &edge, &w2, lam).expect("valid bridge");
            let v = rho(&joined, lam);
            let tol = TOL * lo.abs().max(hi.abs()).max(v.abs());
            let float_bad = !(lo <= v + tol && v <= hi + tol);

            let (elo, ehi) = split_weight_bounds_exact(&w1, &edge, &w2, &lam_q).expect("valid bridge");
            let ev: BigRational = rho_exact(&joined, &lam_q);
            let exact_bad = !(elo <= ev && ev <= ehi);

            let disjoint = cross_intersections(&w1, &w2) == 0;
            let not_equal = disjoint && ev != ehi;
            (float_bad, exact_bad, disjoint, not_equal)
        })
        .collect();
    let count = |f: fn(&(bool, bool, bool, bool)) -> bool| outcomes.iter().filter(|o| f(o)).count() as u64;
    Ok(SandwichReport {
        trials,
        d,
        lambda: lam,
        max_len,
        seed: rng.seed,
        violations: count(|o| o.0),
        exact_violations: count(|o| o.1),
        disjoint: count(|o| o.2),
        disjoint_not_equal: count(|o| o.3),
        tolerance: TOL,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapRow {
    pub n: u64,
    /// `φ_β(H_n)`.
    pub phi: Enclosure,
    pub l1_threshold: f64,
    pub l1_verdict: Verdict,
    /// `(φ_β(H_n) - 1)/λ`, for `λ > 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_excess_over_lambda: Option<Enclosure>,
    /// `max G^{H_n}(0,x)` over `x_1 = -n`.
    pub g_max: Enclosure,
    pub linf_threshold: f64,
    pub linf_verdict: Verdict,
    /// The condition holds for every `C` above this value.
    pub c_min: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BootstrapReport {
    pub c: f64,
    pub rows: Vec<BootstrapRow>,
    /// Largest `c_min` over all `n`.
    pub c_min: f64,
    pub instance: Value,
}

impl BootstrapReport {
    pub fn any_fail(&self) -> bool {
        self.rows.iter().any(|r| r.l1_verdict.is_fail() || r.linf_verdict.is_fail())
    }
}

/// `φ_β(H_n) < 1 + 1/(2d)` and `G^{H_n}(0,x) < C/(1∨n)^{d-1}` on the face
/// `x_1 = -n`, for `n = 0..=nmax`.
pub fn check_bootstrap_conditions_with(
    en: &Enumerator,
    beta: f64,
    d: usize,
    c: f64,
    nmax: u64,
) -> Result<BootstrapReport> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("C must be positive, got {c}")));
    }
    let l1_threshold = 1.0 + 1.0 / (2 * d) as f64;
    let origin = Point::origin(d);
    let mut rows = Vec::new();
    for n in 0..=nmax {
        let h = Domain::half_space(d, n);
        let phi = en.phi(beta, &h)?;
        let lam = en.lambda();
        let excess = (lam > 0.0).then(|| phi.sub(&Enclosure::exact(1.0)).scale(1.0 / lam));
        let row = en.row(beta, &h, &origin)?;
        let face = -(n as i64);
        let g_max = row.max_where(&|p| p.0[0] == face);
        let scale = (n.max(1) as f64).powi(d as i32 - 1);
        let linf_threshold = c / scale;
        rows.push(BootstrapRow {
            n,
            l1_verdict: compare_strict(&phi, l1_threshold),
            phi,
            l1_threshold,
            phi_excess_over_lambda: excess,
            linf_verdict: compare_strict(&g_max, linf_threshold),
            c_min: g_max.upper * scale,
            g_max,
            linf_threshold,
        });
    }
    let c_min = rows.iter().map(|r| r.c_min).fold(0.0, f64::max);
    Ok(BootstrapReport {
        c,
        rows,
        c_min,
        instance: json!({
            "check": "bootstrap",
            "d": d,
            "lambda": en.lambda(),
            "beta": beta,
            "C": c,
            "nmax": nmax,
            "N": en.cutoff(),
        }),
    })
}

pub fn check_bootstrap_conditions(params: &ModelParams, c: f64, nmax: u64, n: usize) -> Result<BootstrapReport> {
    params.validate()?;
    check_bootstrap_conditions_with(&Enumerator::new(params.lambda, n)?, params.beta, params.d, c, nmax)
}

/// `G(0,x) ≤ φ_β(Λ_L)^k max{G(y,x) : y ∉ Λ_L(x)}` with `L = L_β` and
/// `k = ⌊|x|/(L+1)⌋ - 1`, on `Z^d`.
pub fn check_iterated_decay_with(
    en: &Enumerator,
    beta: f64,
    x: &Point,
    kmax: u64,
) -> Result<VerdictReport> {
    let d = x.dim();
    let sharp = sharp_length_with(en, beta, d, SHARP_THRESHOLD, kmax)?;
    let l = match sharp.outcome {
        SharpOutcome::Value { k } => k,
        SharpOutcome::ExceedsKmax { kmax } => {
            return Err(Error::Undecidable(format!("sharp length exceeds kmax = {kmax}")))
        }
        SharpOutcome::Inconclusive { k } => {
            return Err(Error::Undecidable(format!("phi enclosure straddles the threshold at k = {k}")))
        }
    };
    let norm = x.sup_norm() as u64;
    let k = (norm / (l + 1)) as i64 - 1;
    let full = Domain::full(d);
    let row = en.row(beta, &full, &Point::origin(d))?;
    let lhs = row.get(x);
    let mut instance = json!({
        "check": "iterated-decay",
        "d": d,
        "lambda": en.lambda(),
        "beta": beta,
        "x": x.to_string(),
        "N": en.cutoff(),
        "L": l,
        "k": k,
    });
    if k <= 0 {
        let mut report = VerdictReport::new(lhs, Enclosure::unbounded(0.0, en.cutoff()), Orientation::Le, Enclosure::zero(), instance);
        report.note = Some("vacuous: k <= 0".into());
        return Ok(report);
    }
    let phi = en.phi(beta, &Domain::lambda_n(d, l))?;
    // translation invariance: max over y ∉ Λ_L(x) of G(y,x) is the max of G(0,z) over |z| > L
    let far = row.max_beyond(l as i64);
    let rhs = phi.powi(k as u32).mul(&far);
    instance["phi"] = serde_json::to_value(phi)?;
    instance["max_far"] = serde_json::to_value(far)?;
    let slack = rhs.sub(&lhs);
    Ok(VerdictReport::new(lhs, rhs, Orientation::Le, slack, instance))
}

pub fn check_iterated_decay(params: &ModelParams, x: &Point, n: usize, kmax: u64) -> Result<VerdictReport> {
    params.validate()?;
    check_iterated_decay_with(&Enumerator::new(params.lambda, n)?, params.beta, x, kmax)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HarnackReport {
    pub min_inner: f64,
    pub max_inner: f64,
    /// `max / min` of `G(u, x)` over `u ∈ Λ_n`.
    pub ratio: f64,
    /// `max` of `G(u, x)` over `u ∈ Λ_{(1+α)n}`.
    pub max_outer: f64,
    pub outer_ratio: f64,
    pub outer_radius: u64,
    pub instance: Value,
}

/// Harnack-type ratio of the simple random walk Green function on the
/// ambient box `Λ_R`.
pub fn measure_harnack_ratio(
    d: usize,
    lambda: f64,
    beta: f64,
    n: u64,
    alpha: f64,
    x: &Point,
    ambient: u64,
) -> Result<HarnackReport> {
    if lambda != 0.0 {
        return Err(Error::InvalidParameter(
            "the Harnack measurement is only available at lambda = 0".into(),
        ));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be non-negative, got {alpha}")));
    }
    let outer_radius = ((1.0 + alpha) * n as f64).floor() as u64;
    if x.sup_norm() as u64 <= outer_radius {
        return Err(Error::InvalidParameter(format!(
            "x = {x} must lie outside the box of radius {outer_radius}"
        )));
    }
    let dom = Domain::lambda_n(d, ambient);
    if !dom.contains(x)? || ambient < outer_radius {
        return Err(Error::InvalidParameter(format!(
            "the ambient box of radius {ambient} must contain x and the outer box"
        )));
    }
    // G is symmetric, so one column from x gives G(u, x) for every u
    let col = green_column(d, beta, &dom, x, 1e-15)?;
    let mut min_inner = f64::INFINITY;
    let mut max_inner = 0.0f64;
    let mut max_outer = 0.0f64;
    for (u, v) in &col {
        let r = u.sup_norm() as u64;
        if r <= n {
            min_inner = min_inner.min(*v);
            max_inner = max_inner.max(*v);
        }
        if r <= outer_radius {
            max_outer = max_outer.max(*v);
        }
    }
    Ok(HarnackReport {
        min_inner,
        max_inner,
        ratio: max_inner / min_inner,
        max_outer,
        outer_ratio: max_outer / min_inner,
        outer_radius,
        instance: json!({
            "check": "harnack",
            "d": d,
            "lambda": lambda,
            "beta": beta,
            "n": n,
            "alpha": alpha,
            "x": x.to_string(),
            "ambient": dom.to_string(),
        }),
    })
}
