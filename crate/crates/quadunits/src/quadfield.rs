//! Exact arithmetic in the ring of integers of a real quadratic field
//! `L = Q(sqrt(d))`, together with the fundamental unit and certified
//! real-embedding comparisons.
//!
//! Elements are stored uniformly in halved coordinates `(a + b sqrt(d)) / 2`,
//! with the parity invariant `a = b (mod 2)` when `d = 1 (mod 4)` and
//! `a, b` both even otherwise. Under the convention `sqrt(d) > 0`, every
//! comparison is decided by sign-tracked squaring in integer arithmetic;
//! no floating point enters any counting path.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::realarith::{self, BoundedReal};

/// Splitting behaviour of the rational prime 2 in `O_L`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSplitting {
    Inert,
    Split,
    Ramified,
}

impl fmt::Display for TwoSplitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TwoSplitting::Inert => write!(f, "inert"),
            TwoSplitting::Split => write!(f, "split"),
            TwoSplitting::Ramified => write!(f, "ramified"),
        }
    }
}

/// Sign of `A + B sqrt(d)` using only integer arithmetic.
///
/// On mixed signs the comparison reduces to `A^2` against `B^2 d`; equality
/// there is impossible for `B != 0` because `d` is squarefree and >= 2.
pub(crate) fn sign_a_plus_b_sqrt_d(a: &BigInt, b: &BigInt, d: i64) -> Ordering {
    match (a.sign(), b.sign()) {
        (num_bigint::Sign::NoSign, num_bigint::Sign::NoSign) => Ordering::Equal,
        (num_bigint::Sign::Minus, num_bigint::Sign::Minus)
        | (num_bigint::Sign::Minus, num_bigint::Sign::NoSign)
        | (num_bigint::Sign::NoSign, num_bigint::Sign::Minus) => Ordering::Less,
        (num_bigint::Sign::Plus, num_bigint::Sign::Plus)
        | (num_bigint::Sign::Plus, num_bigint::Sign::NoSign)
        | (num_bigint::Sign::NoSign, num_bigint::Sign::Plus) => Ordering::Greater,
        (num_bigint::Sign::Plus, num_bigint::Sign::Minus) => {
            // A > 0 > B: positive iff A^2 > B^2 d.
            if a * a > b * b * d {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
        (num_bigint::Sign::Minus, num_bigint::Sign::Plus) => {
            if b * b * d > a * a {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        }
    }
}

/// An element `(a + b sqrt(d)) / 2` of the ring of integers of `Q(sqrt(d))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuadInt {
    d: i64,
    a: BigInt,
    b: BigInt,
}

fn coords_valid(d: i64, a: &BigInt, b: &BigInt) -> bool {
    let two = BigInt::from(2);
    if d % 4 == 1 {
        (a - b) % &two == BigInt::zero()
    } else {
        (a % &two).is_zero() && (b % &two).is_zero()
    }
}

impl QuadInt {
    /// Builds `(a + b sqrt(d)) / 2`, enforcing the parity invariant for
    /// `d mod 4`.
    pub fn new(d: i64, a: impl Into<BigInt>, b: impl Into<BigInt>) -> Result<Self> {
        let a = a.into();
        let b = b.into();
        if !coords_valid(d, &a, &b) {
            return Err(Error::PreconditionViolated(format!(
                "({} + {} sqrt({}))/2 is not an algebraic integer",
                a, b, d
            )));
        }
        Ok(QuadInt { d, a, b })
    }

    pub(crate) fn new_unchecked(d: i64, a: BigInt, b: BigInt) -> Self {
        debug_assert!(coords_valid(d, &a, &b));
        QuadInt { d, a, b }
    }

    pub fn from_integer(d: i64, n: impl Into<BigInt>) -> Self {
        let n: BigInt = n.into();
        QuadInt { d, a: n * 2, b: BigInt::zero() }
    }

    pub fn zero(d: i64) -> Self {
        QuadInt::from_integer(d, 0)
    }

    pub fn one(d: i64) -> Self {
        QuadInt::from_integer(d, 1)
    }

    pub fn d(&self) -> i64 {
        self.d
    }

    /// Numerator of the rational coordinate (the element is `(a + b sqrt d)/2`).
    pub fn half_a(&self) -> &BigInt {
        &self.a
    }

    /// Numerator of the irrational coordinate.
    pub fn half_b(&self) -> &BigInt {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    /// The value as a rational integer, when it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.b.is_zero() {
            Some(&self.a >> 1)
        } else {
            None
        }
    }

    /// Image under the nontrivial automorphism `sqrt(d) -> -sqrt(d)`.
    pub fn conjugate(&self) -> Self {
        QuadInt { d: self.d, a: self.a.clone(), b: -&self.b }
    }

    /// `x + x'`; always a rational integer, equal to the `a` coordinate.
    pub fn trace(&self) -> BigInt {
        self.a.clone()
    }

    /// `x * x' = (a^2 - d b^2) / 4`; always a rational integer.
    pub fn norm(&self) -> BigInt {
        (&self.a * &self.a - &self.b * &self.b * self.d) >> 2
    }

    /// True iff the norm is +1 or -1.
    pub fn is_unit(&self) -> bool {
        let n = self.norm();
        n.magnitude() == &num_bigint::BigUint::from(1u8)
    }

    fn check_field(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            Err(Error::FieldMismatch { left: self.d, right: other.d })
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(QuadInt { d: self.d, a: &self.a + &other.a, b: &self.b + &other.b })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        Ok(QuadInt { d: self.d, a: &self.a - &other.a, b: &self.b - &other.b })
    }

    /// `((a1 a2 + d b1 b2)/2, (a1 b2 + a2 b1)/2)`; the halvings are exact by
    /// the parity invariant.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_field(other)?;
        let a = (&self.a * &other.a + &self.b * &other.b * self.d) >> 1;
        let b = (&self.a * &other.b + &other.a * &self.b) >> 1;
        debug_assert!(coords_valid(self.d, &a, &b));
        Ok(QuadInt { d: self.d, a, b })
    }

    /// Exact quotient `self / other` when it lies in `O_L`.
    pub fn div_exact(&self, other: &Self) -> Option<Self> {
        if self.d != other.d || other.is_zero() {
            return None;
        }
        let n = other.norm();
        // self / other = self * other' / norm(other)
        let prod = self.try_mul(&other.conjugate()).ok()?;
        let ra: BigInt = &prod.a % &n;
        let rb: BigInt = &prod.b % &n;
        if ra.is_zero() && rb.is_zero() {
            let a: BigInt = &prod.a / &n;
            let b: BigInt = &prod.b / &n;
            if coords_valid(self.d, &a, &b) {
                return Some(QuadInt { d: self.d, a, b });
            }
        }
        None
    }

    /// Scalar multiple by a rational integer.
    pub fn scale(&self, n: impl Into<BigInt>) -> Self {
        let n: BigInt = n.into();
        QuadInt { d: self.d, a: &self.a * &n, b: &self.b * &n }
    }

    /// Exact ordering in the real embedding fixed by `sqrt(d) > 0`.
    pub fn cmp_real(&self, other: &Self) -> Ordering {
        assert_eq!(self.d, other.d, "cmp_real across fields");
        sign_a_plus_b_sqrt_d(&(&self.a - &other.a), &(&self.b - &other.b), self.d)
    }

    /// Exact comparison against the rational `num / den` (`den > 0`).
    pub fn cmp_rational(&self, num: &BigInt, den: &BigInt) -> Ordering {
        assert!(den.is_positive(), "cmp_rational needs a positive denominator");
        // (a + b sqrt d)/2 - num/den has the sign of (a den - 2 num) + (b den) sqrt d.
        let a = &self.a * den - num * 2;
        let b = &self.b * den;
        sign_a_plus_b_sqrt_d(&a, &b, self.d)
    }

    /// Sign of the element in the real embedding.
    pub fn sign_real(&self) -> Ordering {
        sign_a_plus_b_sqrt_d(&self.a, &self.b, self.d)
    }

    /// Compares absolute values `|self|` and `|other|` exactly, via squares.
    pub fn abs_cmp(&self, other: &Self) -> Ordering {
        assert_eq!(self.d, other.d, "abs_cmp across fields");
        let sq_self = self.try_mul(self).expect("same field");
        let sq_other = other.try_mul(other).expect("same field");
        sq_self.cmp_real(&sq_other)
    }

    /// Key for the canonical tuple order: real value ascending, ties broken
    /// by the conjugate's real value.
    pub fn canonical_cmp(&self, other: &Self) -> Ordering {
        self.cmp_real(other)
            .then_with(|| self.conjugate().cmp_real(&other.conjugate()))
    }

    /// The raw `a/2+b/2*sqrt(d)` literal used in CSV output.
    pub fn csv_literal(&self) -> String {
        if self.b.is_negative() {
            format!("{}/2-{}/2*sqrt({})", self.a, self.b.magnitude(), self.d)
        } else {
            format!("{}/2+{}/2*sqrt({})", self.a, self.b, self.d)
        }
    }
}

impl fmt::Display for QuadInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let two = BigInt::from(2);
        let ra: BigInt = &self.a % &two;
        let rb: BigInt = &self.b % &two;
        if ra.is_zero() && rb.is_zero() {
            let x: BigInt = &self.a >> 1;
            let y: BigInt = &self.b >> 1;
            if y.is_zero() {
                return write!(f, "{}", x);
            }
            if x.is_zero() {
                return write!(f, "{}*sqrt({})", y, self.d);
            }
            if y.is_negative() {
                return write!(f, "{}-{}*sqrt({})", x, y.magnitude(), self.d);
            }
            return write!(f, "{}+{}*sqrt({})", x, y, self.d);
        }
        if self.b.is_negative() {
            write!(f, "({}-{}*sqrt({}))/2", self.a, self.b.magnitude(), self.d)
        } else {
            write!(f, "({}+{}*sqrt({}))/2", self.a, self.b, self.d)
        }
    }
}

impl Add for &QuadInt {
    type Output = QuadInt;
    fn add(self, rhs: &QuadInt) -> QuadInt {
        self.try_add(rhs).expect("field mismatch in +")
    }
}

impl Sub for &QuadInt {
    type Output = QuadInt;
    fn sub(self, rhs: &QuadInt) -> QuadInt {
        self.try_sub(rhs).expect("field mismatch in -")
    }
}

impl Mul for &QuadInt {
    type Output = QuadInt;
    fn mul(self, rhs: &QuadInt) -> QuadInt {
        self.try_mul(rhs).expect("field mismatch in *")
    }
}

impl Neg for &QuadInt {
    type Output = QuadInt;
    fn neg(self) -> QuadInt {
        QuadInt { d: self.d, a: -&self.a, b: -&self.b }
    }
}

/// A unit written as `sign * eta^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitExponent {
    pub sign: i8,
    pub m: i64,
}

impl UnitExponent {
    pub fn new(sign: i8, m: i64) -> Self {
        assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
        UnitExponent { sign, m }
    }
}

/// A validated real quadratic field `Q(sqrt(d))`.
#[derive(Debug, Clone)]
pub struct FieldDescriptor {
    d: i64,
    discriminant: i64,
    eta: QuadInt,
    eta_norm: i8,
    two_splitting: TwoSplitting,
    log_eta: BoundedReal,
}

impl PartialEq for FieldDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d
    }
}
impl Eq for FieldDescriptor {}

fn is_squarefree(d: i64) -> bool {
    let mut n = d;
    let mut p = 2i64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

/// Fundamental unit by the continued fraction of `omega`, where `omega` is
/// `sqrt(d)` for `d = 2, 3 (mod 4)` and `(1 + sqrt(d))/2` for `d = 1 (mod 4)`.
///
/// Complete quotients are `(P + sqrt d)/Q` with the exact recursion
/// `P' = aQ - P`, `Q' = (d - P'^2)/Q`; the period ends when the complete
/// quotient first repeats, and the convergent just before the period end
/// gives `eta = p - q * omega'`.
fn fundamental_unit(d: i64) -> QuadInt {
    let s = realarith::isqrt(&BigInt::from(d));
    let s: i64 = s.to_string().parse().expect("isqrt fits i64");
    let (p0, q0) = if d % 4 == 1 { (1i64, 2i64) } else { (0i64, 1i64) };

    let step = |p: i64, q: i64| -> (i64, i64, i64) {
        let a = (p + s).div_euclid(q);
        let p_next = a * q - p;
        let q_next = (d - p_next * p_next) / q;
        (a, p_next, q_next)
    };

    let (a0, mut pp, mut qq) = step(p0, q0);
    let first = (pp, qq);
    let mut conv_p_prev = BigInt::from(1);
    let mut conv_q_prev = BigInt::from(0);
    let mut conv_p = BigInt::from(a0);
    let mut conv_q = BigInt::from(1);

    loop {
        let (a, p_next, q_next) = step(pp, qq);
        pp = p_next;
        qq = q_next;
        if (pp, qq) == first {
            break;
        }
        let new_p = BigInt::from(a) * &conv_p + &conv_p_prev;
        let new_q = BigInt::from(a) * &conv_q + &conv_q_prev;
        conv_p_prev = std::mem::replace(&mut conv_p, new_p);
        conv_q_prev = std::mem::replace(&mut conv_q, new_q);
    }

    // eta = p - q * omega' in halved coordinates.
    if d % 4 == 1 {
        // omega' = (1 - sqrt d)/2, so eta = ((2p - q) + q sqrt d)/2.
        QuadInt::new_unchecked(d, &conv_p * 2 - &conv_q, conv_q)
    } else {
        // omega' = -sqrt d, so eta = p + q sqrt d.
        QuadInt::new_unchecked(d, conv_p * 2, conv_q * 2)
    }
}

/// Validates `d` and assembles the field data: fundamental unit, its norm,
/// the splitting of 2 and a certified `log eta`.
pub fn make_field(d: i64) -> Result<FieldDescriptor> {
    if d < 2 {
        return Err(Error::NotRealQuadratic(d));
    }
    if !is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    let eta = fundamental_unit(d);
    let norm = eta.norm();
    debug_assert!(eta.is_unit());
    let eta_norm = if norm == BigInt::from(1) { 1 } else { -1 };
    let two_splitting = splitting_of_two_for_d(d);
    let discriminant = if d % 4 == 1 { d } else { 4 * d };
    let log_eta = realarith::log_quad(eta.half_a(), eta.half_b(), d, 64);
    Ok(FieldDescriptor { d, discriminant, eta, eta_norm, two_splitting, log_eta })
}

pub(crate) fn splitting_of_two_for_d(d: i64) -> TwoSplitting {
    match d.rem_euclid(8) {
        5 => TwoSplitting::Inert,
        1 => TwoSplitting::Split,
        _ => TwoSplitting::Ramified,
    }
}

impl FieldDescriptor {
    pub fn d(&self) -> i64 {
        self.d
    }

    pub fn discriminant(&self) -> i64 {
        self.discriminant
    }

    /// The fundamental unit `eta > 1`.
    pub fn eta(&self) -> &QuadInt {
        &self.eta
    }

    pub fn eta_norm(&self) -> i8 {
        self.eta_norm
    }

    pub fn two_splitting(&self) -> TwoSplitting {
        self.two_splitting
    }

    /// `log eta` cached at 64-bit precision.
    pub fn log_eta(&self) -> &BoundedReal {
        &self.log_eta
    }

    /// `eta^-1`, exactly: `eta'` when the norm is +1, `-eta'` when it is -1.
    pub fn eta_inverse(&self) -> QuadInt {
        let conj = self.eta.conjugate();
        if self.eta_norm == 1 {
            conj
        } else {
            -&conj
        }
    }

    /// `sign * eta^m` by binary exponentiation.
    pub fn unit_from_exponent(&self, e: UnitExponent) -> QuadInt {
        let base = if e.m >= 0 { self.eta.clone() } else { self.eta_inverse() };
        let mut exp = e.m.unsigned_abs();
        let mut acc = QuadInt::one(self.d);
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.try_mul(&sq).expect("same field");
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.try_mul(&sq).expect("same field");
            }
        }
        if e.sign < 0 {
            -&acc
        } else {
            acc
        }
    }

    /// Inverse of [`unit_from_exponent`](Self::unit_from_exponent): writes a
    /// unit as `sign * eta^m`.
    pub fn unit_to_exponent(&self, u: &QuadInt) -> Result<UnitExponent> {
        if u.d() != self.d {
            return Err(Error::FieldMismatch { left: self.d, right: u.d() });
        }
        if !u.is_unit() {
            return Err(Error::NotAUnit);
        }
        let sign = match u.sign_real() {
            Ordering::Greater => 1i8,
            Ordering::Less => -1i8,
            Ordering::Equal => return Err(Error::NotAUnit),
        };
        let mut w = if sign < 0 { -u } else { u.clone() };
        let one = QuadInt::one(self.d);
        let (step, inverted) = match w.cmp_real(&one) {
            Ordering::Equal => return Ok(UnitExponent::new(sign, 0)),
            Ordering::Greater => (self.eta_inverse(), false),
            Ordering::Less => (self.eta.clone(), true),
        };
        let mut m: i64 = 0;
        while w.cmp_real(&one) != Ordering::Equal {
            w = w.try_mul(&step).expect("same field");
            m += 1;
            if m > 1_000_000 {
                return Err(Error::NotAUnit);
            }
        }
        Ok(UnitExponent::new(sign, if inverted { -m } else { m }))
    }

    /// Certified `log eta` at the requested precision (`precision_bits >= 32`).
    pub fn approx_log_eta(&self, precision_bits: u32) -> BoundedReal {
        realarith::log_quad(self.eta.half_a(), self.eta.half_b(), self.d, precision_bits)
    }
}
