//! Helpers around [`BigRational`]: bit lengths, parsing, decimal rendering,
//! dyadic rounding and cheap logarithm bounds.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use thiserror::Error;

/// Exact rational number. Always kept in lowest terms with a positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn frac(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Bit length of an integer: number of binary digits of `|v|`, with `bl(0) = 1`.
pub fn int_bit_length(v: &BigInt) -> u64 {
    v.bits().max(1)
}

/// `bl(p/q) = bl(p) + bl(q)` for the reduced fraction.
pub fn bit_length(q: &Rational) -> u64 {
    int_bit_length(q.numer()) + int_bit_length(q.denom())
}

/// Parses `"p/q"` or `"p"` into a reduced rational.
pub fn parse_rational(s: &str) -> Result<Rational, RationalParseError> {
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| RationalParseError::Malformed(s.to_string()))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| RationalParseError::Malformed(s.to_string()))?;
    if den.is_zero() {
        return Err(RationalParseError::ZeroDenominator(s.to_string()));
    }
    Ok(Rational::new(num, den))
}

/// Renders as `"p/q"`, including `"/1"` for integers.
pub fn to_fraction_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Decimal approximation with `sig` significant digits (round half away from zero).
///
/// Plain notation is used for moderate exponents, scientific notation otherwise.
pub fn to_decimal_string(q: &Rational, sig: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let sig = sig.max(1);
    let neg = q.is_negative();
    let a = q.abs();
    // estimate e = floor(log10 a), then correct
    let mut e = ((a.numer().bits() as f64 - a.denom().bits() as f64) * std::f64::consts::LOG10_2)
        .floor() as i64;
    let ten = BigInt::from(10);
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::one(), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    loop {
        if a < pow10(e) {
            e -= 1;
        } else if a >= pow10(e + 1) {
            e += 1;
        } else {
            break;
        }
    }
    // digits = round(a * 10^(sig-1-e))
    let scaled = &a * pow10(sig as i64 - 1 - e);
    let two = BigInt::from(2);
    let (qt, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if &rem * &two >= *scaled.denom() {
        qt + BigInt::one()
    } else {
        qt
    };
    if digits.to_string().len() > sig {
        digits /= &ten;
        e += 1;
    }
    let ds = digits.to_string();
    let ds = format!("{:0>width$}", ds, width = sig);
    let body = if (-7..21).contains(&e) {
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if int_len >= ds.len() {
                format!("{}{}", ds, "0".repeat(int_len - ds.len()))
            } else {
                let (i, f) = ds.split_at(int_len);
                format!("{}.{}", i, f.trim_end_matches('0')).trim_end_matches('.').to_string()
            }
        } else {
            let zeros = "0".repeat((-e - 1) as usize);
            format!("0.{}{}", zeros, ds.trim_end_matches('0'))
        }
    } else {
        let (i, f) = ds.split_at(1);
        let f = f.trim_end_matches('0');
        if f.is_empty() {
            format!("{}e{}", i, e)
        } else {
            format!("{}.{}e{}", i, f, e)
        }
    };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

/// Floor of `log2 |q|` (for `q != 0`), up to an error of one.
fn log2_estimate(q: &Rational) -> i64 {
    q.numer().bits() as i64 - q.denom().bits() as i64
}

/// Rounds `q` to a dyadic rational with `bits` significant binary digits
/// (round to nearest). Zero stays zero.
pub fn round_to_bits(q: &Rational, bits: u32) -> Rational {
    if q.is_zero() {
        return q.clone();
    }
    let shift = bits as i64 - log2_estimate(q);
    round_to_quantum_exp(q, shift)
}

/// Rounds `q` to the nearest multiple of `2^-shift`.
pub fn round_to_quantum_exp(q: &Rational, shift: i64) -> Rational {
    let scaled = if shift >= 0 {
        q * Rational::from_integer(BigInt::one() << shift as usize)
    } else {
        q / Rational::from_integer(BigInt::one() << (-shift) as usize)
    };
    let two = BigInt::from(2);
    let (fl, rem) = scaled.numer().div_mod_floor(scaled.denom());
    let m = if &rem * &two >= *scaled.denom() {
        fl + BigInt::one()
    } else {
        fl
    };
    if shift >= 0 {
        Rational::new(m, BigInt::one() << shift as usize)
    } else {
        Rational::from_integer(m << (-shift) as usize)
    }
}

/// Smallest dyadic `≥ q` with about `bits` significant binary digits.
pub fn round_up_bits(q: &Rational, bits: u32) -> Rational {
    if q.is_zero() {
        return q.clone();
    }
    let shift = bits as i64 - log2_estimate(q);
    let scaled = q * pow2(shift);
    Rational::from_integer(scaled.ceil().to_integer()) * pow2(-shift)
}

/// Largest dyadic `≤ q` with about `bits` significant binary digits.
pub fn round_down_bits(q: &Rational, bits: u32) -> Rational {
    -round_up_bits(&-q, bits)
}

/// An upper bound on `ln(q)` for `q > 0`.
pub fn ln_upper(q: &Rational) -> f64 {
    assert!(q.is_positive(), "ln_upper of non-positive value");
    // q < 2^(bits(num) - bits(den) + 1)
    let e = q.numer().bits() as f64 - q.denom().bits() as f64 + 1.0;
    e * std::f64::consts::LN_2
}

/// Smallest power of two `2^k >= q` for positive `q`, as a rational.
pub fn pow2_ceil(q: &Rational) -> Rational {
    let mut k = log2_estimate(q) + 1;
    while pow2(k - 1) >= *q {
        k -= 1;
    }
    pow2(k)
}

pub fn pow2(k: i64) -> Rational {
    if k >= 0 {
        Rational::from_integer(BigInt::one() << k as usize)
    } else {
        Rational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Least common multiple of the denominators of `values` (1 for an empty slice).
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

pub fn is_integer(q: &Rational) -> bool {
    q.denom().is_one()
}

pub fn sign(q: &Rational) -> Sign {
    q.numer().sign()
}

pub fn rat_pow(q: &Rational, e: u32) -> Rational {
    num_traits::pow(q.clone(), e as usize)
}
