use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A certified interval `[lower, upper]` for an infinite walk sum.
///
/// When `rigorous` is false the upper end is `+∞` and `lower` is a partial
/// sum only. Arithmetic rounds outward unless the floating-point result is
/// exact.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Enclosure {
    pub lower: f64,
    #[serde(serialize_with = "ser_upper", deserialize_with = "de_upper")]
    pub upper: f64,
    pub truncation_n: usize,
    pub rigorous: bool,
}

fn ser_upper<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn de_upper<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}

/// Next float above a non-negative bound, keeping an exact zero.
pub(crate) fn up(x: f64) -> f64 {
    if x == 0.0 {
        x
    } else {
        x.next_up()
    }
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() || two_sum_err(a, b, s) == 0.0 {
        s
    } else {
        s.next_down()
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() || two_sum_err(a, b, s) == 0.0 {
        s
    } else {
        s.next_up()
    }
}

fn two_sum_err(a: f64, b: f64, s: f64) -> f64 {
    let bb = s - a;
    (a - (s - bb)) + (b - bb)
}

fn mul_exact(a: f64, b: f64) -> (f64, bool) {
    if a == 0.0 || b == 0.0 {
        return (0.0, true);
    }
    let p = a * b;
    if !p.is_finite() {
        return (p, true);
    }
    (p, a.mul_add(b, -p) == 0.0)
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    let (p, exact) = mul_exact(a, b);
    if exact {
        p
    } else {
        p.next_down()
    }
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    let (p, exact) = mul_exact(a, b);
    if exact {
        p
    } else {
        p.next_up()
    }
}

impl Enclosure {
    pub fn new(lower: f64, upper: f64, truncation_n: usize, rigorous: bool) -> Self {
        debug_assert!(lower <= upper, "enclosure [{lower}, {upper}] is inverted");
        Enclosure {
            lower,
            upper,
            truncation_n,
            rigorous,
        }
    }

    /// A value known exactly.
    pub fn exact(v: f64) -> Self {
        Enclosure::new(v, v, 0, true)
    }

    pub fn zero() -> Self {
        Enclosure::exact(0.0)
    }

    /// Partial sum with no tail control.
    pub fn unbounded(lower: f64, truncation_n: usize) -> Self {
        Enclosure::new(lower, f64::INFINITY, truncation_n, false)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    fn meta(&self, other: &Enclosure) -> (usize, bool) {
        let n = match (self.truncation_n, other.truncation_n) {
            (0, b) => b,
            (a, 0) => a,
            (a, b) => a.min(b),
        };
        (n, self.rigorous && other.rigorous)
    }

    pub fn add(&self, other: &Enclosure) -> Enclosure {
        let (n, r) = self.meta(other);
        Enclosure::new(
            add_down(self.lower, other.lower),
            add_up(self.upper, other.upper),
            n,
            r,
        )
    }

    pub fn sub(&self, other: &Enclosure) -> Enclosure {
        let (n, r) = self.meta(other);
        Enclosure::new(
            add_down(self.lower, -other.upper),
            add_up(self.upper, -other.lower),
            n,
            r,
        )
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure::new(-self.upper, -self.lower, self.truncation_n, self.rigorous)
    }

    /// Interval product. `0 · ∞` is taken as `0`.
    pub fn mul(&self, other: &Enclosure) -> Enclosure {
        let (n, r) = self.meta(other);
        let cands_lo = [
            mul_down(self.lower, other.lower),
            mul_down(self.lower, other.upper),
            mul_down(self.upper, other.lower),
            mul_down(self.upper, other.upper),
        ];
        let cands_hi = [
            mul_up(self.lower, other.lower),
            mul_up(self.lower, other.upper),
            mul_up(self.upper, other.lower),
            mul_up(self.upper, other.upper),
        ];
        let lo = cands_lo.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = cands_hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Enclosure::new(lo, hi, n, r)
    }

    pub fn scale(&self, k: f64) -> Enclosure {
        self.mul(&Enclosure::exact(k))
    }

    /// Integer power of a non-negative enclosure.
    pub fn powi(&self, k: u32) -> Enclosure {
        let mut acc = Enclosure::exact(1.0);
        acc.truncation_n = self.truncation_n;
        acc.rigorous = self.rigorous;
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Interval hull.
    pub fn hull(&self, other: &Enclosure) -> Enclosure {
        let (n, r) = self.meta(other);
        Enclosure::new(self.lower.min(other.lower), self.upper.max(other.upper), n, r)
    }

    /// Enclosure of `max(a, b)`.
    pub fn max(&self, other: &Enclosure) -> Enclosure {
        let (n, r) = self.meta(other);
        Enclosure::new(self.lower.max(other.lower), self.upper.max(other.upper), n, r)
    }
}

/// Interval sum of a sequence, exact on the empty sequence.
pub fn sum_enclosures<'a, I: IntoIterator<Item = &'a Enclosure>>(items: I) -> Enclosure {
    let mut acc = Enclosure::zero();
    let mut first = true;
    for e in items {
        if first {
            acc = *e;
            first = false;
        } else {
            acc = acc.add(e);
        }
    }
    acc
}
