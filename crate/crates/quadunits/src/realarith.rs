//! Directed-rounding fixed-point arithmetic used for the exact real
//! comparisons and the certified logarithm.
//!
//! Numbers are represented as `mantissa / 2^scale` with `BigInt` mantissas.
//! Every routine returns an enclosing interval `[lo, hi]` at the working
//! scale, so downstream bounds are rigorous rather than heuristic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Floor of the integer square root.
pub(crate) fn isqrt(n: &BigInt) -> BigInt {
    assert!(!n.is_negative(), "isqrt of negative number");
    n.sqrt()
}

/// Mantissa bounds `[lo, lo+1]` with `lo/2^scale <= sqrt(d) < (lo+1)/2^scale`.
pub(crate) fn sqrt_bounds(d: i64, scale: u32) -> (BigInt, BigInt) {
    let shifted = BigInt::from(d) << (2 * scale);
    let lo = isqrt(&shifted);
    let hi = &lo + 1;
    (lo, hi)
}

/// A positive real known to precision `|value - mantissa/2^scale| <= 2^error_exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundedReal {
    mantissa: BigInt,
    scale: u32,
    error_exp: i32,
}

impl BoundedReal {
    pub(crate) fn new(mantissa: BigInt, scale: u32, error_exp: i32) -> Self {
        BoundedReal { mantissa, scale, error_exp }
    }

    /// Nearest `f64`; rounding error of the conversion is below the stated bound
    /// for every precision this crate requests.
    pub fn to_f64(&self) -> f64 {
        // Split the shift to stay inside f64 exponent range for large scales.
        let bits = self.mantissa.bits() as i64;
        let excess = (bits - 64).max(0) as u32;
        let reduced = &self.mantissa >> excess;
        let approx = reduced.to_string().parse::<f64>().unwrap_or(0.0);
        approx * 2f64.powi(excess as i32 - self.scale as i32)
    }

    /// `2^error_exp`, the guaranteed absolute error bound.
    pub fn error_bound(&self) -> f64 {
        2f64.powi(self.error_exp)
    }

    pub fn error_exp(&self) -> i32 {
        self.error_exp
    }
}

/// Interval `[lo, hi]` of mantissas at a common scale.
#[derive(Debug, Clone)]
pub(crate) struct Interval {
    pub lo: BigInt,
    pub hi: BigInt,
}

impl Interval {
    fn add(&self, other: &Interval) -> Interval {
        Interval { lo: &self.lo + &other.lo, hi: &self.hi + &other.hi }
    }

    /// Product of non-negative intervals, rounded outward at `scale`.
    fn mul_nonneg(&self, other: &Interval, scale: u32) -> Interval {
        debug_assert!(!self.lo.is_negative() && !other.lo.is_negative());
        let lo = (&self.lo * &other.lo) >> scale;
        let hi = ((&self.hi * &other.hi) >> scale) + 1;
        Interval { lo, hi }
    }

    /// Quotient of non-negative / positive intervals, rounded outward.
    fn div_nonneg(&self, other: &Interval, scale: u32) -> Interval {
        debug_assert!(!self.lo.is_negative() && other.lo.is_positive());
        let lo = (&self.lo << scale).div_floor(&other.hi);
        let hi = (&self.hi << scale).div_floor(&other.lo) + 1;
        Interval { lo, hi }
    }

    fn scale_int(&self, n: i64) -> Interval {
        let n = BigInt::from(n);
        if n.is_negative() {
            Interval { lo: &self.hi * &n, hi: &self.lo * &n }
        } else {
            Interval { lo: &self.lo * &n, hi: &self.hi * &n }
        }
    }
}

/// `atanh(t)` for an interval `0 <= t < 1/2`, by the odd power series with a
/// rigorous geometric tail bound.
fn atanh_interval(t: &Interval, scale: u32) -> Interval {
    let one = BigInt::one() << scale;
    assert!(&t.hi * 2 < one, "atanh argument must stay below 1/2");

    let t_sq = t.mul_nonneg(t, scale);
    let mut pow = t.clone(); // t^(2j+1)
    let mut sum = t.clone();
    let mut j: u32 = 1;
    loop {
        pow = pow.mul_nonneg(&t_sq, scale);
        let denom = BigInt::from(2 * j + 1);
        let term = Interval {
            lo: pow.lo.div_floor(&denom),
            hi: pow.hi.div_floor(&denom) + 1,
        };
        sum = sum.add(&term);
        j += 1;
        // The tail after t^(2j+1) is below t^(2j+1) * t^2/(1-t^2), which for
        // t < 1/2 is below pow/3; stop once the power itself is a few ulps
        // and absorb that bound into the upper end.
        if pow.hi <= BigInt::from(4) {
            sum.hi += 6;
            break;
        }
    }
    sum
}

/// Enclosure of `ln 2` at the given scale, via `2 atanh(1/3)`.
fn ln2_interval(scale: u32) -> Interval {
    let one = BigInt::one() << scale;
    let third = Interval {
        lo: one.div_floor(&BigInt::from(3)),
        hi: one.div_floor(&BigInt::from(3)) + 1,
    };
    let a = atanh_interval(&third, scale);
    a.scale_int(2)
}

/// Enclosure of `ln(x)` for a positive interval `x` at the given scale.
///
/// The argument is first reduced to `[1, 2)` by a power of two, then
/// `ln y = 2 atanh((y-1)/(y+1))` is evaluated; the series argument stays
/// below 1/3 so convergence is a digit-and-a-half per term.
pub(crate) fn ln_interval(x: &Interval, scale: u32) -> Interval {
    assert!(x.lo.is_positive(), "ln of non-positive interval");
    let e = x.lo.bits() as i64 - 1 - scale as i64;
    let (y_lo, y_hi) = if e >= 0 {
        (&x.lo >> e as u32, (&x.hi >> e as u32) + 1)
    } else {
        let s = (-e) as u32;
        (&x.lo << s, &x.hi << s)
    };
    let one = BigInt::one() << scale;
    let num = Interval { lo: (&y_lo - &one).max(BigInt::zero()), hi: &y_hi - &one };
    let den = Interval { lo: &y_lo + &one, hi: &y_hi + &one };
    let t = num.div_nonneg(&den, scale);
    let a = atanh_interval(&t, scale).scale_int(2);
    let ln2 = ln2_interval(scale).scale_int(e);
    a.add(&ln2)
}

/// Certified `ln((a + b sqrt(d)) / 2)` for a value known to exceed 1.
///
/// Returns a midpoint with a proven error bound no worse than
/// `2^(-precision_bits + 4)`.
pub(crate) fn log_quad(a: &BigInt, b: &BigInt, d: i64, precision_bits: u32) -> BoundedReal {
    assert!(precision_bits >= 32, "precision_bits must be at least 32");
    let scale = precision_bits + 24;
    let (s_lo, s_hi) = sqrt_bounds(d, scale);
    // (a << scale + b * sqrt_bounds) / 2, rounded outward; b may be negative.
    let a_term = a << scale;
    let (bs_lo, bs_hi) = if b.is_negative() { (b * &s_hi, b * &s_lo) } else { (b * &s_lo, b * &s_hi) };
    let x = Interval {
        lo: (&a_term + bs_lo) >> 1,
        hi: ((&a_term + bs_hi) >> 1) + 1,
    };
    assert!(x.lo.is_positive(), "log_quad needs a value > 1");
    let ln = ln_interval(&x, scale);

    let width = &ln.hi - &ln.lo;
    let mid = (&ln.lo + &ln.hi) >> 1;
    // |mid - true| <= width/2 + 1 ulp at `scale`.
    let err_ulps: BigInt = (width >> 1) + 2;
    let error_exp = (err_ulps.bits() as i64 - scale as i64) as i32;
    let result = BoundedReal::new(mid, scale, error_exp);
    assert!(
        result.error_exp() <= -(precision_bits as i32) + 4,
        "certified log precision shortfall: got 2^{}",
        result.error_exp()
    );
    result
}
