//! Exact rationals used for every probability, fraction and threshold.

use num_rational::Ratio;
use num_traits::{One, Zero};

pub type Rational = Ratio<u64>;

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: u64 = n.trim().parse().ok()?;
            let d: u64 = d.trim().parse().ok()?;
            (d != 0).then(|| Rational::new(n, d))
        }
        None => s.parse::<u64>().ok().map(Rational::from_integer),
    }
}

pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// `ceil(log2(1/eps))` for `0 < eps ≤ 1`.
pub fn ceil_log2_inverse(eps: &Rational) -> u32 {
    assert!(!eps.is_zero() && *eps <= Rational::one());
    let inv = eps.recip();
    let c = inv.ceil().to_integer();
    ceil_log2(c)
}

/// `ceil(log2(v))` for `v ≥ 1`.
pub fn ceil_log2(v: u64) -> u32 {
    assert!(v >= 1);
    if v == 1 {
        0
    } else {
        64 - (v - 1).leading_zeros()
    }
}

/// `ceil(log2(r))` for a rational `r ≥ 1`.
pub fn ceil_log2_rational(r: &Rational) -> u32 {
    assert!(*r >= Rational::one());
    let mut k = 0u32;
    let mut pow = 1u128;
    let (num, den) = (*r.numer() as u128, *r.denom() as u128);
    while pow * den < num {
        pow <<= 1;
        k += 1;
    }
    k
}

/// `true` iff `0 < r ≤ 1`.
pub fn in_unit_interval(r: &Rational) -> bool {
    !r.is_zero() && *r <= Rational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2_inverse(&Rational::new(1, 16)), 4);
        assert_eq!(ceil_log2_inverse(&Rational::new(1, 3)), 2);
        assert_eq!(ceil_log2_inverse(&Rational::one()), 0);
        assert_eq!(ceil_log2_rational(&Rational::new(32, 1)), 5);
        assert_eq!(ceil_log2_rational(&Rational::new(33, 1)), 6);
        assert_eq!(ceil_log2_rational(&Rational::new(3, 2)), 1);
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_rational("1/4"), Some(Rational::new(1, 4)));
        assert_eq!(parse_rational("2/8"), Some(Rational::new(1, 4)));
        assert_eq!(parse_rational("3"), Some(Rational::from_integer(3)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(render(&Rational::new(6, 8)), "3/4");
    }
}
