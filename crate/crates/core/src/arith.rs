//! Small exact-arithmetic helpers shared by the enumeration, geometry and
//! decomposition code.

use num_bigint::BigUint;
use num_integer::Roots;
use num_traits::Pow;

/// Floor of the square root of a nonnegative integer.
pub fn isqrt(n: u64) -> u64 {
    n.sqrt()
}

/// Returns `Some(r)` with `r * r == n` when `n` is a perfect square.
pub fn exact_sqrt(n: i64) -> Option<i64> {
    if n < 0 {
        return None;
    }
    let r = isqrt(n as u64);
    ((r * r) as i64 == n).then_some(r as i64)
}

/// Smallest integer `r` with `r * r >= n`.
pub fn ceil_sqrt(n: u64) -> u64 {
    let r = isqrt(n);
    if r * r == n {
        r
    } else {
        r + 1
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

/// gcd of a slice, 0 for an all-zero slice.
pub fn gcd_all(values: &[i64]) -> i64 {
    values.iter().fold(0, |g, &v| gcd(g, v))
}

/// `|A|^s` as an exact big integer.
pub fn big_pow(base: u64, exp: u32) -> BigUint {
    Pow::pow(BigUint::from(base), exp)
}

/// Exact test of `x^den <= n^num`, i.e. `x <= n^(num/den)`.
pub fn root_le(x: u64, n: u64, num: u32, den: u32) -> bool {
    big_pow(x, den) <= big_pow(n, num)
}

/// Smallest integer `x >= 0` with `x^den >= n^num`, i.e. `ceil(n^(num/den))`.
///
/// A floating-point estimate seeds the search; the result is fixed up with exact
/// big-integer comparisons so it is correct for any exponent.
pub fn ceil_rational_power(n: u64, num: u32, den: u32) -> u64 {
    assert!(den > 0, "zero denominator");
    if n == 0 {
        return if num == 0 { 1 } else { 0 };
    }
    let target = big_pow(n, num);
    let ge = |x: u64| big_pow(x, den) >= target;
    let estimate = (n as f64).powf(num as f64 / den as f64).ceil();
    let mut x = if estimate.is_finite() && estimate < u64::MAX as f64 {
        estimate as u64
    } else {
        u64::MAX
    };
    while x > 0 && ge(x - 1) {
        x -= 1;
    }
    while !ge(x) {
        x += 1;
    }
    x
}

/// Serde adapter writing a big integer as a decimal string.
pub mod big_decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, ser: S) -> Result<S::Ok, S::Error> {
        ser.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(D::Error::custom)
    }
}

/// splitmix64 finalizer. Output is fixed across platforms and toolchains.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
