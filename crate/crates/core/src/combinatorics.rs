//! Exact and log-space binomial arithmetic.
//!
//! `binom` is exact (arbitrary precision) and total: it returns zero outside
//! `0 <= k <= n` so summation identities need no guards. `ln_binom` is its
//! log-space twin for sizes where the exact value is too large to be useful.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// An exact nonnegative integer count.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BigCount(BigUint);

impl BigCount {
    pub fn zero() -> Self {
        BigCount(BigUint::zero())
    }

    pub fn one() -> Self {
        BigCount(BigUint::one())
    }

    pub fn from_u64(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }

    pub fn as_big(&self) -> &BigUint {
        &self.0
    }

    pub fn into_big(self) -> BigUint {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn to_u64(&self) -> Option<u64> {
        self.0.to_u64()
    }

    /// Nearest `f64`; `inf` when the value exceeds the `f64` range.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn ln(&self) -> LogValue {
        LogValue::from_big(&self.0)
    }

    /// `self - other`, or `None` when the difference would be negative.
    pub fn checked_sub(&self, other: &BigCount) -> Option<BigCount> {
        if self.0 >= other.0 {
            Some(BigCount(&self.0 - &other.0))
        } else {
            None
        }
    }
}

impl From<BigUint> for BigCount {
    fn from(v: BigUint) -> Self {
        BigCount(v)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl Serialize for BigCount {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

/// A nonnegative real held as its natural logarithm.
///
/// Zero is flagged explicitly instead of being encoded as `-inf`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogValue {
    pub ln_value: f64,
    pub is_zero: bool,
}

#[allow(clippy::should_implement_trait)]
impl LogValue {
    pub const ZERO: LogValue = LogValue {
        ln_value: f64::NEG_INFINITY,
        is_zero: true,
    };

    pub fn from_ln(ln_value: f64) -> Self {
        if ln_value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogValue {
                ln_value,
                is_zero: false,
            }
        }
    }

    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        if v == 0.0 {
            Self::ZERO
        } else {
            Self::from_ln(v.ln())
        }
    }

    pub fn from_big(v: &BigUint) -> Self {
        if v.is_zero() {
            Self::ZERO
        } else {
            Self::from_ln(ln_big(v))
        }
    }

    pub fn ln(&self) -> f64 {
        self.ln_value
    }

    /// Linear value; saturates to `inf` or `0` outside the `f64` range.
    pub fn value(&self) -> f64 {
        if self.is_zero {
            0.0
        } else {
            self.ln_value.exp()
        }
    }

    pub fn mul(self, other: LogValue) -> LogValue {
        if self.is_zero || other.is_zero {
            Self::ZERO
        } else {
            Self::from_ln(self.ln_value + other.ln_value)
        }
    }

    pub fn div(self, other: LogValue) -> LogValue {
        debug_assert!(!other.is_zero);
        if self.is_zero {
            Self::ZERO
        } else {
            Self::from_ln(self.ln_value - other.ln_value)
        }
    }

    pub fn add(self, other: LogValue) -> LogValue {
        if self.is_zero {
            return other;
        }
        if other.is_zero {
            return self;
        }
        let (hi, lo) = if self.ln_value >= other.ln_value {
            (self.ln_value, other.ln_value)
        } else {
            (other.ln_value, self.ln_value)
        };
        Self::from_ln(hi + (lo - hi).exp().ln_1p())
    }
}

/// Natural log of a positive big integer, accurate to about one ulp.
pub fn ln_big(v: &BigUint) -> f64 {
    assert!(!v.is_zero(), "ln of zero");
    let bits = v.bits();
    let shift = bits.saturating_sub(64);
    let top = (v >> shift).to_u64().expect("64-bit window") as f64;
    top.ln() + shift as f64 * LN_2
}

/// Exact `C(n, k)`; zero when `k < 0` or `k > n`.
pub fn binom(n: u64, k: i64) -> BigCount {
    if k < 0 || k as u64 > n {
        return BigCount::zero();
    }
    let k = k as u64;
    let m = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 1..=m {
        acc *= n - m + i;
        acc /= i;
    }
    BigCount(acc)
}

/// `binom` extended to a possibly negative upper index, which counts nothing.
pub(crate) fn binom_signed(n: i64, k: i64) -> BigCount {
    if n < 0 {
        BigCount::zero()
    } else {
        binom(n as u64, k)
    }
}

/// `C(n, k)` in machine arithmetic, `None` on overflow. Zero outside range.
pub fn binom_u64(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k {
        acc = acc * (n - k + i) as u128 / i as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

pub fn factorial(n: u64) -> BigCount {
    let mut acc = BigUint::one();
    for i in 2..=n {
        acc *= i;
    }
    BigCount(acc)
}

const STIRLING_MIN: u64 = 40;

// ln x! - (x ln x - x + ln(2 pi x)/2), truncated Stirling series.
fn stirling_tail(x: f64) -> f64 {
    let x2 = x * x;
    let x3 = x2 * x;
    let x5 = x3 * x2;
    let x7 = x5 * x2;
    1.0 / (12.0 * x) - 1.0 / (360.0 * x3) + 1.0 / (1260.0 * x5) - 1.0 / (1680.0 * x7)
}

/// Natural log of `C(n, k)`.
pub fn ln_binom(n: u64, k: i64) -> Result<LogValue> {
    if k < 0 || k as u64 > n {
        return Err(Error::Domain(format!(
            "ln_binom({n}, {k}) needs 0 <= k <= n"
        )));
    }
    let k = k as u64;
    let m = k.min(n - k);
    if m == 0 {
        return Ok(LogValue::from_ln(0.0));
    }
    if m < STIRLING_MIN {
        let base = (n - m) as f64;
        let ln: f64 = (1..=m).map(|i| ((base + i as f64) / i as f64).ln()).sum();
        return Ok(LogValue::from_ln(ln));
    }
    let (nf, kf, rf) = (n as f64, m as f64, (n - m) as f64);
    // k ln(n/k) + (n-k) ln(n/(n-k)), both terms nonnegative
    let main = kf * (nf / kf).ln() - rf * (-kf / nf).ln_1p();
    let half = 0.5 * (nf / (2.0 * PI * kf * rf)).ln();
    let tail = stirling_tail(nf) - stirling_tail(kf) - stirling_tail(rf);
    Ok(LogValue::from_ln(main + half + tail))
}

/// Structural constants of `K(n, r, s)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSpec {
    pub n: u32,
    pub r: u32,
    pub s: u32,
    /// `C(n, r)`: number of vertices.
    pub vertices: BigCount,
    /// `C(n-1, r-1)`: size of a star.
    pub star_size: BigCount,
    /// `C(n-r-1, r-1)`: sets of a star disjoint from a fixed set outside it.
    pub star_disjoint: BigCount,
    /// `C(r, s) C(n-r, r-s)`.
    pub degree: BigCount,
    pub edges: BigCount,
    /// `s = 0` and `n < 2r`: no two sets are disjoint.
    pub edgeless: bool,
}

impl GraphSpec {
    /// Vertex count as a dense index bound; fails beyond `2^31 - 1`.
    pub fn vertex_count(&self) -> Result<u32> {
        match self.vertices.to_u64() {
            Some(v) if v < (1u64 << 31) => Ok(v as u32),
            _ => Err(Error::Parameter(format!(
                "C({}, {}) = {} exceeds 2^31 - 1 vertices",
                self.n, self.r, self.vertices
            ))),
        }
    }

    pub fn star_size_u64(&self) -> Option<u64> {
        self.star_size.to_u64()
    }

    pub fn star_disjoint_u64(&self) -> Option<u64> {
        self.star_disjoint.to_u64()
    }

    /// Stability experiments need the classical Kneser adjacency and `n >= 2r`.
    pub fn require_stability_regime(&self) -> Result<()> {
        if self.s != 0 {
            return Err(Error::Infeasible(format!(
                "stability statistics are defined for s = 0, got s = {}",
                self.s
            )));
        }
        if self.edgeless {
            return Err(Error::Infeasible(format!(
                "n = {} < 2r = {}: K(n, r) has no edges",
                self.n,
                2 * self.r
            )));
        }
        Ok(())
    }
}

/// Constants `R, N, M`, per-vertex degree and edge count of `K(n, r, s)`.
pub fn graph_constants(n: u32, r: u32, s: u32) -> Result<GraphSpec> {
    if r == 0 {
        return Err(Error::Parameter("r must be at least 1".into()));
    }
    if r > n {
        return Err(Error::Parameter(format!("r = {r} exceeds n = {n}")));
    }
    if s >= r {
        return Err(Error::Parameter(format!("s = {s} must be below r = {r}")));
    }
    let (n64, r64, s64) = (n as u64, r as i64, s as i64);
    let vertices = binom(n64, r64);
    let star_size = binom(n64 - 1, r64 - 1);
    let star_disjoint = binom_signed(n as i64 - r64 - 1, r64 - 1);
    let degree =
        BigCount(binom(r as u64, s64).into_big() * binom(n64 - r as u64, r64 - s64).into_big());
    let edges = BigCount((vertices.as_big() * degree.as_big()) >> 1u32);
    Ok(GraphSpec {
        n,
        r,
        s,
        vertices,
        star_size,
        star_disjoint,
        degree,
        edges,
        edgeless: s == 0 && n < 2 * r,
    })
}

/// `N - M` through the telescoping sum `sum_{i=1}^{r} C(n-i-1, r-2)`.
pub fn nm_gap(n: u32, r: u32) -> Result<BigCount> {
    if r < 2 {
        return Err(Error::Parameter(format!("nm_gap needs r >= 2, got {r}")));
    }
    if n < r {
        return Err(Error::Parameter(format!(
            "nm_gap needs n >= r, got n = {n}, r = {r}"
        )));
    }
    let mut acc = BigUint::zero();
    for i in 1..=r as i64 {
        acc += binom_signed(n as i64 - i - 1, r as i64 - 2).into_big();
    }
    Ok(BigCount(acc))
}

/// `(n/k)^k <= C(n,k) <= n^k/k! <= (en/k)^k`, the first two exactly and the
/// last in log-space. Requires `1 <= k <= n`.
pub fn binomial_bounds_hold(n: u64, k: u64) -> bool {
    assert!(k >= 1 && k <= n);
    let c = binom(n, k as i64).into_big();
    let n_pow = BigUint::from(n).pow(k as u32);
    let k_pow = BigUint::from(k).pow(k as u32);
    let k_fact = factorial(k).into_big();
    let lower = n_pow <= &k_pow * &c;
    let middle = &c * &k_fact <= n_pow;
    // k^k <= e^k k!
    let upper = (k as f64) * (k as f64).ln() <= k as f64 + ln_big(&k_fact);
    lower && middle && upper
}

/// `D(n) = ln n! - (n + 1/2) ln n + n` for `n = 1..=max`, via
/// `D(m) - D(m+1) = (m + 1/2) ln(1 + 1/m) - 1 = sum_{j>=1} y^(2j) / (2j+1)`
/// with `y = 1/(2m+1)`, accumulated with compensated summation.
pub fn stirling_remainders(max: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max as usize);
    if max == 0 {
        return out;
    }
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    out.push(1.0);
    for m in 1..max {
        let y2 = 1.0 / ((2 * m + 1) as f64).powi(2);
        let mut term = y2;
        let mut delta = 0.0;
        let mut j = 1u32;
        loop {
            let add = term / (2 * j + 1) as f64;
            if add < delta * 1e-18 {
                break;
            }
            delta += add;
            term *= y2;
            j += 1;
        }
        // Kahan
        let y = delta - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
        out.push(1.0 - sum);
    }
    out
}

/// `sqrt(2 pi n) (n/e)^n <= n! <= e^(1/12n) sqrt(2 pi n) (n/e)^n` given the
/// remainder `D(n)` from [`stirling_remainders`].
pub fn stirling_bounds_hold(n: u64, remainder: f64) -> bool {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let excess = remainder - half_ln_2pi;
    excess >= 0.0 && excess <= 1.0 / (12.0 * n as f64)
}

/// `e^(x - x^2) <= 1 + x <= e^x` for `|x| <= 1/2`, strict away from zero.
pub fn exp_sandwich_holds(x: f64) -> bool {
    assert!(x.abs() <= 0.5);
    let ln1p = x.ln_1p();
    if x == 0.0 {
        ln1p == 0.0
    } else {
        x - x * x < ln1p && ln1p < x
    }
}
