//! Outward-rounded interval arithmetic over `f64`.
//!
//! Rounding mechanism: every primitive computes the round-to-nearest result
//! and an error-free transformation of it (`two_sum`, `fma` residuals). When
//! the residual is zero the result is kept exactly, otherwise the bound is
//! moved one ulp outward in the direction of the lost error. Exact inputs
//! therefore produce exact outputs (`[-2,5] + [-8,12]` is exactly
//! `[-10,17]`). Transcendental functions have no residual available and are
//! widened by [`LIBM_ULPS`] ulps on each side, except at their exact points
//! (`exp(0)`, `sin(0)`, `cos(0)`).

use std::fmt;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// Ulps of outward widening applied to `exp`, `sin` and `cos` results.
pub const LIBM_ULPS: u32 = 2;

#[inline]
fn next_up(x: f64) -> f64 {
    x.next_up()
}

#[inline]
fn next_down(x: f64) -> f64 {
    x.next_down()
}

fn widen_up(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| next_up(v))
}

fn widen_down(x: f64, ulps: u32) -> f64 {
    (0..ulps).fold(x, |v, _| next_down(v))
}

// Overflow to +inf on a lower bound (or -inf on an upper bound) would lose
// finite values, so clamp those to the largest finite magnitude.
#[inline]
fn fix_down(x: f64) -> f64 {
    if x == f64::INFINITY {
        f64::MAX
    } else {
        x
    }
}

#[inline]
fn fix_up(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        f64::MIN
    } else {
        x
    }
}

pub(crate) fn add_down(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { fix_down(s) } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err < 0.0 {
        next_down(s)
    } else {
        s
    }
}

pub(crate) fn add_up(a: f64, b: f64) -> f64 {
    let s = a + b;
    if !s.is_finite() {
        return if a.is_finite() && b.is_finite() { fix_up(s) } else { s };
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    if err > 0.0 {
        next_up(s)
    } else {
        s
    }
}

// Sign-exact `a*b - c` for `c` close to the rounded product. Uses the fma
// instruction when the target has one; otherwise Dekker's product, since the
// software fma fallback dominates the cost of interval multiplication.
#[inline]
fn fms(a: f64, b: f64, c: f64) -> f64 {
    if cfg!(target_feature = "fma") || a.abs() > 1e290 || b.abs() > 1e290 {
        return a.mul_add(b, -c);
    }
    const SPLIT: f64 = 134_217_729.0;
    let split = |x: f64| {
        let t = SPLIT * x;
        let hi = t - (t - x);
        (hi, x - hi)
    };
    let ph = a * b;
    let (ah, al) = split(a);
    let (bh, bl) = split(b);
    let pl = ((ah * bh - ph) + ah * bl + al * bh) + al * bl;
    (ph - c) + pl
}

pub(crate) fn mul_down(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() { fix_down(p) } else { p };
    }
    let err = fms(a, b, p);
    // Below the subnormal threshold the fma residual is not exact.
    if p.abs() < 1e-290 {
        return next_down(p);
    }
    if err < 0.0 {
        next_down(p)
    } else {
        p
    }
}

pub(crate) fn mul_up(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    let p = a * b;
    if !p.is_finite() {
        return if a.is_finite() && b.is_finite() { fix_up(p) } else { p };
    }
    if p.abs() < 1e-290 {
        return next_up(p);
    }
    let err = fms(a, b, p);
    if err > 0.0 {
        next_up(p)
    } else {
        p
    }
}

// Residual sign of a/b: a - q*b has the sign of (a/b - q) times sign(b).
fn div_residual(a: f64, b: f64, q: f64) -> f64 {
    let r = -fms(q, b, a);
    if b > 0.0 {
        r
    } else {
        -r
    }
}

pub(crate) fn div_down(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() || !a.is_finite() || !b.is_finite() {
        return if a.is_finite() && b.is_finite() { fix_down(q) } else { q };
    }
    if q.abs() < 1e-290 || a.abs() < 1e-290 {
        return next_down(q);
    }
    if div_residual(a, b, q) < 0.0 {
        next_down(q)
    } else {
        q
    }
}

pub(crate) fn div_up(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    let q = a / b;
    if !q.is_finite() || !a.is_finite() || !b.is_finite() {
        return if a.is_finite() && b.is_finite() { fix_up(q) } else { q };
    }
    if q.abs() < 1e-290 || a.abs() < 1e-290 {
        return next_up(q);
    }
    if div_residual(a, b, q) > 0.0 {
        next_up(q)
    } else {
        q
    }
}

fn sqrt_residual(r: f64, a: f64) -> f64 {
    if a < 1e-290 {
        r.mul_add(r, -a)
    } else {
        fms(r, r, a)
    }
}

fn sqrt_down(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    if sqrt_residual(r, a) > 0.0 {
        next_down(r)
    } else {
        r
    }
}

fn sqrt_up(a: f64) -> f64 {
    let r = a.sqrt();
    if r == 0.0 || !r.is_finite() {
        return r;
    }
    if sqrt_residual(r, a) < 0.0 {
        next_up(r)
    } else {
        r
    }
}

/// A closed real interval `[lo, hi]`, possibly unbounded, or the empty set.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl Interval {
    pub const EMPTY: Interval = Interval {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };
    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    /// Builds `[lo, hi]`. Returns the empty interval when `lo > hi` or a bound is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            Self::EMPTY
        } else {
            Interval { lo, hi }
        }
    }

    pub fn point(x: f64) -> Self {
        Self::new(x, x)
    }

    /// Smallest interval of floats containing the real denoted by `x` widened by
    /// one ulp on each side; used for decimal literals that are not exactly representable.
    pub fn around(x: f64) -> Self {
        Self::new(next_down(x), next_up(x))
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn is_bounded(&self) -> bool {
        !self.is_empty() && self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    /// `self ⊆ other`. The empty set is a subset of everything.
    pub fn subset(&self, other: &Interval) -> bool {
        self.is_empty() || (other.lo <= self.lo && self.hi <= other.hi)
    }

    /// `self` lies in the interior of `other`.
    pub fn interior(&self, other: &Interval) -> bool {
        self.is_empty()
            || ((other.lo < self.lo || other.lo == f64::NEG_INFINITY)
                && (self.hi < other.hi || other.hi == f64::INFINITY))
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            add_up(self.hi, -self.lo)
        }
    }

    pub fn midpoint(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        if self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY {
            return 0.0;
        }
        if self.lo == f64::NEG_INFINITY {
            return f64::MIN;
        }
        if self.hi == f64::INFINITY {
            return f64::MAX;
        }
        let m = 0.5 * self.lo + 0.5 * self.hi;
        m.clamp(self.lo, self.hi)
    }

    /// `max(|lo|, |hi|)`.
    pub fn magnitude(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        self.lo.abs().max(self.hi.abs())
    }

    /// `min |x|` over the interval.
    pub fn mignitude(&self) -> f64 {
        if self.is_empty() {
            return f64::NAN;
        }
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        if self.is_empty() {
            return *other;
        }
        if other.is_empty() {
            return *self;
        }
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    pub fn split(&self) -> (Interval, Interval) {
        let m = self.midpoint();
        (Interval::new(self.lo, m), Interval::new(m, self.hi))
    }

    /// Symmetric widening by `amount` (rounded outward).
    pub fn inflate(&self, amount: f64) -> Interval {
        if self.is_empty() {
            return *self;
        }
        Interval::new(add_down(self.lo, -amount), add_up(self.hi, amount))
    }

    pub fn abs(&self) -> Interval {
        if self.is_empty() {
            return *self;
        }
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            -*self
        } else {
            Interval::new(0.0, self.magnitude())
        }
    }

    pub fn sqr(&self) -> Interval {
        self.powi(2)
    }

    /// Integer power with the exact hull for even exponents.
    pub fn powi(&self, k: u32) -> Interval {
        if self.is_empty() {
            return *self;
        }
        if k == 0 {
            return Interval::ONE;
        }
        if k == 1 {
            return *self;
        }
        let pow_down = |x: f64| (1..k).fold(x, |acc, _| mul_down(acc, x));
        let pow_up = |x: f64| (1..k).fold(x, |acc, _| mul_up(acc, x));
        // |x|^k with directed rounding on non-negative magnitudes.
        let mag_down = |x: f64| pow_down(x.abs());
        let mag_up = |x: f64| pow_up(x.abs());
        if k.is_multiple_of(2) {
            if self.contains_zero() {
                Interval::new(0.0, mag_up(self.magnitude()))
            } else {
                let (small, large) = (self.mignitude(), self.magnitude());
                Interval::new(mag_down(small), mag_up(large))
            }
        } else {
            let lo = if self.lo >= 0.0 {
                mag_down(self.lo)
            } else {
                -mag_up(self.lo)
            };
            let hi = if self.hi >= 0.0 {
                mag_up(self.hi)
            } else {
                -mag_down(self.hi)
            };
            Interval::new(lo, hi)
        }
    }

    /// Square root over `self ∩ [0, ∞)`; empty when disjoint.
    pub fn sqrt(&self) -> Interval {
        let d = self.intersect(&Interval::new(0.0, f64::INFINITY));
        if d.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(sqrt_down(d.lo), sqrt_up(d.hi))
    }

    pub fn exp(&self) -> Interval {
        if self.is_empty() {
            return *self;
        }
        let lo = if self.lo == 0.0 {
            1.0
        } else {
            widen_down(self.lo.exp(), LIBM_ULPS).max(0.0)
        };
        let hi = if self.hi == 0.0 {
            1.0
        } else {
            widen_up(self.hi.exp(), LIBM_ULPS)
        };
        Interval::new(lo, hi)
    }

    pub fn sin(&self) -> Interval {
        self.trig(TrigKind::Sin)
    }

    pub fn cos(&self) -> Interval {
        self.trig(TrigKind::Cos)
    }

    fn trig(&self, kind: TrigKind) -> Interval {
        if self.is_empty() {
            return *self;
        }
        if !self.is_bounded() || self.width() >= 2.0 * std::f64::consts::PI {
            return Interval::new(-1.0, 1.0);
        }
        let eval = |x: f64| match kind {
            TrigKind::Sin => x.sin(),
            TrigKind::Cos => x.cos(),
        };
        let exact = |x: f64| match kind {
            TrigKind::Sin if x == 0.0 => Some(0.0),
            TrigKind::Cos if x == 0.0 => Some(1.0),
            _ => None,
        };
        let bound_down = |x: f64| exact(x).unwrap_or_else(|| widen_down(eval(x), LIBM_ULPS));
        let bound_up = |x: f64| exact(x).unwrap_or_else(|| widen_up(eval(x), LIBM_ULPS));
        // Extrema locations: sin peaks at pi/2 + 2k pi, cos at 2k pi.
        let peak_offset = match kind {
            TrigKind::Sin => std::f64::consts::FRAC_PI_2,
            TrigKind::Cos => 0.0,
        };
        let mut lo = bound_down(self.lo).min(bound_down(self.hi));
        let mut hi = bound_up(self.lo).max(bound_up(self.hi));
        if contains_phase(self.lo, self.hi, peak_offset) {
            hi = 1.0;
        }
        if contains_phase(self.lo, self.hi, peak_offset + std::f64::consts::PI) {
            lo = -1.0;
        }
        Interval::new(lo.max(-1.0), hi.min(1.0))
    }

    /// Multiplicative inverse; the whole line when `0 ∈ self`.
    pub fn recip(&self) -> Interval {
        Interval::ONE / *self
    }
}

#[derive(Clone, Copy)]
enum TrigKind {
    Sin,
    Cos,
}

// Whether [lo, hi] may contain offset + 2k*pi for some integer k. The test is
// slack by a relative margin, which can only widen the enclosure.
fn contains_phase(lo: f64, hi: f64, offset: f64) -> bool {
    let two_pi = 2.0 * std::f64::consts::PI;
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    let k = ((lo - offset - slack) / two_pi).ceil();
    let candidate = offset + k * two_pi;
    candidate <= hi + slack
}

impl Default for Interval {
    fn default() -> Self {
        Interval::ZERO
    }
}

impl From<f64> for Interval {
    fn from(x: f64) -> Self {
        Interval::point(x)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            write!(f, "[empty]")
        } else {
            write!(f, "[{:?}, {:?}]", self.lo, self.hi)
        }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        if self.is_empty() {
            return self;
        }
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        Interval::new(add_down(self.lo, rhs.lo), add_up(self.hi, rhs.hi))
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        // Sign cases pick the extreme products directly; only a straddle on
        // both sides needs four.
        let (lo, hi) = if a >= 0.0 {
            if c >= 0.0 {
                (mul_down(a, c), mul_up(b, d))
            } else if d <= 0.0 {
                (mul_down(b, c), mul_up(a, d))
            } else {
                (mul_down(b, c), mul_up(b, d))
            }
        } else if b <= 0.0 {
            if c >= 0.0 {
                (mul_down(a, d), mul_up(b, c))
            } else if d <= 0.0 {
                (mul_down(b, d), mul_up(a, c))
            } else {
                (mul_down(a, d), mul_up(a, c))
            }
        } else if c >= 0.0 {
            (mul_down(a, d), mul_up(b, d))
        } else if d <= 0.0 {
            (mul_down(b, c), mul_up(a, c))
        } else {
            (mul_down(a, d).min(mul_down(b, c)), mul_up(a, c).max(mul_up(b, d)))
        };
        Interval::new(lo, hi)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        if self.is_empty() || rhs.is_empty() {
            return Interval::EMPTY;
        }
        if rhs.contains_zero() {
            if rhs.is_point() && self == Interval::ZERO {
                return Interval::EMPTY;
            }
            return Interval::ENTIRE;
        }
        let (a, b, c, d) = (self.lo, self.hi, rhs.lo, rhs.hi);
        let (lo, hi) = if c > 0.0 {
            if a >= 0.0 {
                (div_down(a, d), div_up(b, c))
            } else if b <= 0.0 {
                (div_down(a, c), div_up(b, d))
            } else {
                (div_down(a, c), div_up(b, c))
            }
        } else if a >= 0.0 {
            (div_down(b, d), div_up(a, c))
        } else if b <= 0.0 {
            (div_down(b, c), div_up(a, d))
        } else {
            (div_down(b, d), div_up(a, d))
        };
        Interval::new(lo, hi)
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<f64> for Interval {
            type Output = Interval;
            fn $method(self, rhs: f64) -> Interval {
                $tr::$method(self, Interval::point(rhs))
            }
        }
        impl $tr<Interval> for f64 {
            type Output = Interval;
            fn $method(self, rhs: Interval) -> Interval {
                $tr::$method(Interval::point(self), rhs)
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        let mut t = s.serialize_tuple(2)?;
        if self.is_empty() {
            t.serialize_element(&f64::NAN)?;
            t.serialize_element(&f64::NAN)?;
        } else {
            t.serialize_element(&self.lo)?;
            t.serialize_element(&self.hi)?;
        }
        t.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let (lo, hi) = <(f64, f64)>::deserialize(d)?;
        Ok(Interval::new(lo, hi))
    }
}

/// An interval vector (a box). Empty when any component is empty.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntervalBox(Vec<Interval>);

impl IntervalBox {
    pub fn new(components: Vec<Interval>) -> Self {
        IntervalBox(components)
    }

    pub fn from_points(points: &[f64]) -> Self {
        IntervalBox(points.iter().map(|&x| Interval::point(x)).collect())
    }

    pub fn from_bounds(bounds: &[(f64, f64)]) -> Self {
        IntervalBox(bounds.iter().map(|&(lo, hi)| Interval::new(lo, hi)).collect())
    }

    pub fn filled(dim: usize, value: Interval) -> Self {
        IntervalBox(vec![value; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[Interval] {
        &self.0
    }

    pub fn components_mut(&mut self) -> &mut [Interval] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Interval> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval> {
        self.0.iter()
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().any(Interval::is_empty)
    }

    /// Largest component width.
    pub fn width(&self) -> f64 {
        self.0.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn midpoint(&self) -> Vec<f64> {
        self.0.iter().map(Interval::midpoint).collect()
    }

    /// Thin box at the midpoint.
    pub fn midpoint_box(&self) -> IntervalBox {
        IntervalBox::from_points(&self.midpoint())
    }

    /// Infinity norm: the largest component magnitude.
    pub fn inf_norm(&self) -> f64 {
        self.0.iter().map(Interval::magnitude).fold(0.0, f64::max)
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.0.iter().zip(x).all(|(i, &v)| i.contains(v))
    }

    pub fn subset(&self, other: &IntervalBox) -> bool {
        self.dim() == other.dim() && self.0.iter().zip(&other.0).all(|(a, b)| a.subset(b))
    }

    pub fn hull(&self, other: &IntervalBox) -> IntervalBox {
        assert_eq!(self.dim(), other.dim(), "box dimension mismatch");
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.hull(b)).collect())
    }

    pub fn intersect(&self, other: &IntervalBox) -> IntervalBox {
        assert_eq!(self.dim(), other.dim(), "box dimension mismatch");
        IntervalBox(self.0.iter().zip(&other.0).map(|(a, b)| a.intersect(b)).collect())
    }

    /// Splits component `k` at its midpoint.
    ///
    /// Panics if `k` is out of range or the component is unbounded or degenerate.
    pub fn bisect(&self, k: usize) -> (IntervalBox, IntervalBox) {
        let c = self.0[k];
        assert!(c.is_bounded() && c.width() > 0.0, "cannot bisect component {k} = {c}");
        let (left, right) = c.split();
        let mut a = self.clone();
        let mut b = self.clone();
        a.0[k] = left;
        b.0[k] = right;
        (a, b)
    }

    /// Product of component widths.
    pub fn volume(&self) -> f64 {
        self.0.iter().map(Interval::width).product()
    }
}

impl Index<usize> for IntervalBox {
    type Output = Interval;
    fn index(&self, i: usize) -> &Interval {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntervalBox {
    fn index_mut(&mut self, i: usize) -> &mut Interval {
        &mut self.0[i]
    }
}

impl FromIterator<Interval> for IntervalBox {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalBox(iter.into_iter().collect())
    }
}

impl fmt::Debug for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

impl fmt::Display for IntervalBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ; ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}
