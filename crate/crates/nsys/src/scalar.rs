//! Exact rational scalars and their text representations.
//!
//! Every quantity in the core pipeline is a `Scalar` (an arbitrary-precision
//! rational, always reduced, denominator positive). Floating point appears
//! only at reporting edges: log-values, CSV export, deviation summaries.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact rational number used throughout the crate.
pub type Scalar = num_rational::BigRational;

/// Scalar from an integer.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// Scalar from a numerator/denominator pair. Panics on zero denominator.
pub fn rat(num: i64, den: i64) -> Scalar {
    Scalar::new(BigInt::from(num), BigInt::from(den))
}

/// Canonical text form: `numerator/denominator`, denominator always present.
pub fn format_rational(x: &Scalar) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parses `p/q` (or a bare integer `p`).
pub fn parse_rational(s: &str) -> Result<Scalar, Error> {
    let s = s.trim();
    let mk_err = || Error::Parse {
        what: format!("rational `{s}`"),
    };
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.trim().parse().map_err(|_| mk_err())?;
    let den: BigInt = den.trim().parse().map_err(|_| mk_err())?;
    if den.is_zero() {
        return Err(mk_err());
    }
    Ok(Scalar::new(num, den))
}

/// 10^exp as a positive integer.
pub fn pow10(exp: u64) -> BigInt {
    BigInt::from(10u32).pow(exp.try_into().expect("pow10 exponent out of range"))
}

/// n! as an unsigned big integer.
pub fn factorial(n: u64) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for k in 2..=n {
        acc *= BigUint::from(k);
    }
    acc
}

/// Lossy conversion for reporting. NaN never occurs for finite rationals.
pub fn to_f64(x: &Scalar) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Default number of significant digits used by human-facing tables.
pub const DISPLAY_SIG_DIGITS: u32 = 12;

/// Renders `x` with `sig` significant decimal digits.
///
/// The second element is true when the printed digits are exact; when the
/// value was rounded the string carries a trailing `~` so tables cannot be
/// mistaken for exact data.
pub fn decimal_string(x: &Scalar, sig: u32) -> String {
    let (s, exact) = decimal_digits(x, sig);
    if exact {
        s
    } else {
        format!("{s}~")
    }
}

/// Core of `decimal_string`; returns the bare string plus exactness.
pub fn decimal_digits(x: &Scalar, sig: u32) -> (String, bool) {
    assert!(sig > 0, "need at least one significant digit");
    if x.is_zero() {
        return ("0".to_string(), true);
    }
    let neg = x.is_negative();
    let num = x.numer().magnitude().clone();
    let den = x.denom().magnitude().clone();

    // Decimal exponent e with 10^e <= |x| < 10^(e+1).
    let mut e: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ten = BigUint::from(10u32);
    let scaled_ge = |e: i64| -> bool {
        // |x| >= 10^e  <=>  num * 10^max(0,-e) >= den * 10^max(0,e)
        let lhs = if e < 0 { &num * ten.pow((-e) as u32) } else { num.clone() };
        let rhs = if e > 0 { &den * ten.pow(e as u32) } else { den.clone() };
        lhs >= rhs
    };
    if scaled_ge(e + 1) {
        e += 1;
    } else if !scaled_ge(e) {
        e -= 1;
    }

    // First `sig` digits: round(|x| * 10^(sig-1-e)), half away from zero.
    let shift = sig as i64 - 1 - e;
    let (n, d) = if shift >= 0 {
        (&num * ten.pow(shift as u32), den.clone())
    } else {
        (num.clone(), &den * ten.pow((-shift) as u32))
    };
    let (q, r) = num_integer::Integer::div_rem(&n, &d);
    let mut digits = q;
    let exact = r.is_zero();
    if &r * 2u32 >= d {
        digits += 1u32;
    }
    let mut ds = digits.to_string();
    if ds.len() as u32 > sig {
        // Rounding carried into a new leading digit (e.g. 999.96 -> 1000).
        e += 1;
        ds.truncate(sig as usize);
    }

    // Lay the digits out: plain decimal for moderate exponents, otherwise
    // scientific notation.
    let body = if (-4..18).contains(&e) {
        let mut out = String::new();
        if e >= 0 {
            let int_len = (e + 1) as usize;
            if ds.len() <= int_len {
                out.push_str(&ds);
                out.extend(std::iter::repeat_n('0', int_len - ds.len()));
            } else {
                out.push_str(&ds[..int_len]);
                let frac = ds[int_len..].trim_end_matches('0');
                if !frac.is_empty() {
                    out.push('.');
                    out.push_str(frac);
                }
            }
        } else {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-e - 1) as usize));
            out.push_str(ds.trim_end_matches('0'));
        }
        out
    } else {
        let mantissa = ds.trim_end_matches('0');
        let (head, tail) = mantissa.split_at(1);
        if tail.is_empty() {
            format!("{head}e{e}")
        } else {
            format!("{head}.{tail}e{e}")
        }
    };
    let signed = if neg { format!("-{body}") } else { body };
    (signed, exact)
}

/// Exact sign as a plain integer (-1, 0, 1).
pub fn sign(x: &Scalar) -> i32 {
    match x.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["3/4", "-7/2", "5", "0/9", "-12"] {
            let x = parse_rational(s).unwrap();
            let y = parse_rational(&format_rational(&x)).unwrap();
            assert_eq!(x, y);
        }
        assert_eq!(format_rational(&rat(2, 4)), "1/2");
        assert_eq!(format_rational(&int(-3)), "-3/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("a/b").is_err());
    }

    #[test]
    fn decimal_rendering_marks_rounding() {
        assert_eq!(decimal_string(&rat(1, 2), 12), "0.5");
        assert_eq!(decimal_string(&rat(1, 3), 12), "0.333333333333~");
        assert_eq!(decimal_string(&rat(-1, 3), 3), "-0.333~");
        assert_eq!(decimal_string(&int(1_307_674_368_000), 12), "1307674368000");
        assert_eq!(decimal_string(&int(42), 12), "42");
        assert_eq!(decimal_string(&rat(1, 1_000_000), 3), "1e-6");
        assert_eq!(decimal_string(&rat(1, 10_000), 3), "0.0001");
        assert_eq!(decimal_string(&rat(2999, 1000), 2), "3~");
        assert_eq!(decimal_string(&int(0), 12), "0");
    }

    #[test]
    fn factorials_and_powers() {
        assert_eq!(factorial(0), BigUint::from(1u32));
        assert_eq!(factorial(5), BigUint::from(120u32));
        assert_eq!(pow10(3), BigInt::from(1000));
    }
}
