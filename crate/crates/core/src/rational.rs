//! Exact rational scalars.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    BigRational::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `7`, `-3/4` or `0.25`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.parse().ok()?;
        let d: BigInt = d.parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, dec)) = s.split_once('.') {
        if dec.is_empty() || !dec.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let neg = int.starts_with('-');
        let int_part: BigInt = if int.is_empty() || int == "-" {
            BigInt::zero()
        } else {
            int.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(dec.len() as u32);
        let frac_part: BigInt = dec.parse().ok()?;
        let mag = int_part.abs() * &scale + frac_part;
        let n = if neg { -mag } else { mag };
        return Some(BigRational::new(n, scale));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}

pub fn max_q(a: &Q, b: &Q) -> Q {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn min_q(a: &Q, b: &Q) -> Q {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

/// Small random rational: numerator in `-span..=span`, denominator in `1..=den`.
pub fn random_q<R: Rng + ?Sized>(rng: &mut R, span: i64, den: i64) -> Q {
    let n = rng.gen_range(-span..=span);
    let d = rng.gen_range(1..=den.max(1));
    frac(n, d)
}

/// The default scalar probe set used when instantiating scalar-indexed identities.
pub fn default_probes() -> Vec<Q> {
    vec![
        q(0),
        q(1),
        q(-1),
        q(2),
        q(-2),
        frac(1, 2),
        frac(-1, 2),
        frac(3, 7),
        frac(-3, 7),
    ]
}

pub fn is_unit(x: &Q) -> bool {
    x.is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_forms() {
        assert_eq!(parse_q("7"), Some(q(7)));
        assert_eq!(parse_q("-3/4"), Some(frac(-3, 4)));
        assert_eq!(parse_q("0.25"), Some(frac(1, 4)));
        assert_eq!(parse_q("-1.5"), Some(frac(-3, 2)));
        assert_eq!(parse_q("1/0"), None);
        assert_eq!(parse_q("x"), None);
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(fmt_q(&frac(6, 4)), "3/2");
        assert_eq!(fmt_q(&q(-2)), "-2");
    }
}
