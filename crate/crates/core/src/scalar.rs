//! Exact field scalars: arbitrary-precision rationals or prime-field residues.
//!
//! Every arithmetic result is exact. Rationals are kept in lowest terms with a
//! positive denominator; prime-field values are reduced representatives in
//! `[0, p)`. Mixing scalars from different fields is a programming error and
//! panics.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// The base field of a computation: the rationals or `F_p` for a prime `p`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize, Deserialize)]
pub enum FieldConfig {
    Q,
    Fp(u64),
}

impl FieldConfig {
    /// Checks that an `Fp` modulus is actually prime.
    pub fn validate(&self) -> Result<(), ScalarError> {
        match *self {
            FieldConfig::Q => Ok(()),
            FieldConfig::Fp(p) => {
                if is_prime_u64(p) {
                    Ok(())
                } else {
                    Err(ScalarError::NotPrime(p))
                }
            }
        }
    }

    /// 0 for `Q`, `p` for `F_p`.
    pub fn characteristic(&self) -> u64 {
        match *self {
            FieldConfig::Q => 0,
            FieldConfig::Fp(p) => p,
        }
    }
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FieldConfig::Q => write!(f, "Q"),
            FieldConfig::Fp(p) => write!(f, "F_{p}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("invalid scalar literal {literal:?}: {reason}")]
    Parse { literal: String, reason: String },
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("zero denominator in scalar literal {0:?}")]
    ZeroDenominator(String),
}

/// An exact element of the configured base field.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Fp { value: u64, prime: u64 },
}

impl Scalar {
    pub fn zero(field: FieldConfig) -> Self {
        Scalar::from_int(field, 0)
    }

    pub fn one(field: FieldConfig) -> Self {
        Scalar::from_int(field, 1)
    }

    pub fn from_int(field: FieldConfig, v: i64) -> Self {
        match field {
            FieldConfig::Q => Scalar::Rational(BigRational::from_integer(BigInt::from(v))),
            FieldConfig::Fp(p) => Scalar::Fp {
                value: (v as i128).rem_euclid(p as i128) as u64,
                prime: p,
            },
        }
    }

    pub fn field(&self) -> FieldConfig {
        match self {
            Scalar::Rational(_) => FieldConfig::Q,
            Scalar::Fp { prime, .. } => FieldConfig::Fp(*prime),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            Scalar::Fp { value, .. } => *value == 0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_one(),
            Scalar::Fp { value, .. } => *value == 1,
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a + b),
            (Scalar::Fp { value: a, prime: p }, Scalar::Fp { value: b, prime: q }) if p == q => {
                Scalar::Fp {
                    value: ((*a as u128 + *b as u128) % *p as u128) as u64,
                    prime: *p,
                }
            }
            _ => mixed_field_panic(self, other),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a - b),
            (Scalar::Fp { value: a, prime: p }, Scalar::Fp { value: b, prime: q }) if p == q => {
                Scalar::Fp {
                    value: ((*a as u128 + (*p - *b) as u128) % *p as u128) as u64,
                    prime: *p,
                }
            }
            _ => mixed_field_panic(self, other),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Scalar::Rational(a * b),
            (Scalar::Fp { value: a, prime: p }, Scalar::Fp { value: b, prime: q }) if p == q => {
                Scalar::Fp {
                    value: mul_mod(*a, *b, *p),
                    prime: *p,
                }
            }
            _ => mixed_field_panic(self, other),
        }
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Rational(a) => Scalar::Rational(-a),
            Scalar::Fp { value, prime } => Scalar::Fp {
                value: if *value == 0 { 0 } else { prime - value },
                prime: *prime,
            },
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Scalar> {
        match self {
            Scalar::Rational(a) => {
                if a.is_zero() {
                    None
                } else {
                    Some(Scalar::Rational(a.recip()))
                }
            }
            Scalar::Fp { value, prime } => {
                if *value == 0 {
                    None
                } else {
                    Some(Scalar::Fp {
                        value: inv_mod(*value, *prime),
                        prime: *prime,
                    })
                }
            }
        }
    }

    /// `self / other`; panics on division by zero.
    pub fn div(&self, other: &Scalar) -> Scalar {
        self.mul(&other.inv().expect("scalar division by zero"))
    }

    pub fn square(&self) -> Scalar {
        self.mul(self)
    }

    /// Parses a literal in the given field. Rationals accept `"a"` and
    /// `"a/b"`; prime fields additionally reduce (and invert `b`) mod `p`.
    pub fn parse(field: FieldConfig, text: &str) -> Result<Scalar, ScalarError> {
        let text = text.trim();
        let (num_str, den_str) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (text, None),
        };
        let parse_int = |s: &str| -> Result<BigInt, ScalarError> {
            BigInt::from_str(s).map_err(|e| ScalarError::Parse {
                literal: text.to_string(),
                reason: e.to_string(),
            })
        };
        let num = parse_int(num_str)?;
        let den = match den_str {
            Some(d) => parse_int(d)?,
            None => BigInt::one(),
        };
        if den.is_zero() {
            return Err(ScalarError::ZeroDenominator(text.to_string()));
        }
        match field {
            FieldConfig::Q => Ok(Scalar::Rational(BigRational::new(num, den))),
            FieldConfig::Fp(p) => {
                let reduce = |x: &BigInt| -> u64 {
                    let m = x % BigInt::from(p);
                    let m = if m.is_negative() { m + BigInt::from(p) } else { m };
                    u64::try_from(m).expect("residue fits in u64")
                };
                let n = reduce(&num);
                let d = reduce(&den);
                if d == 0 {
                    return Err(ScalarError::ZeroDenominator(text.to_string()));
                }
                Ok(Scalar::Fp {
                    value: mul_mod(n, inv_mod(d, p), p),
                    prime: p,
                })
            }
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Fp { value, .. } => write!(f, "{value}"),
        }
    }
}

fn mixed_field_panic(a: &Scalar, b: &Scalar) -> ! {
    panic!("scalar field mismatch: {} vs {}", a.field(), b.field())
}

macro_rules! ref_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar::$method(self, rhs)
            }
        }
    };
}
ref_binop!(Add, add);
ref_binop!(Sub, sub);
ref_binop!(Mul, mul);

impl std::ops::Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::neg(self)
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p is prime and a != 0 mod p, so a^(p-2) is the inverse.
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin, valid for all u64.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n == b {
            return true;
        }
        if n.is_multiple_of(b) {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0u32;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::Rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    #[test]
    fn rationals_are_normalized() {
        let x = q(2, 4);
        match &x {
            Scalar::Rational(r) => {
                assert_eq!(r.numer(), &BigInt::from(1));
                assert_eq!(r.denom(), &BigInt::from(2));
            }
            _ => unreachable!(),
        }
        // negative denominators flip to the numerator
        let y = q(1, -2);
        assert_eq!(y.to_string(), "-1/2");
        assert_eq!(q(-3, -6), q(1, 2));
    }

    #[test]
    fn fp_values_are_reduced() {
        let p = FieldConfig::Fp(7);
        assert_eq!(Scalar::from_int(p, 9), Scalar::from_int(p, 2));
        assert_eq!(Scalar::from_int(p, -1), Scalar::from_int(p, 6));
        let a = Scalar::from_int(p, 3);
        let b = Scalar::from_int(p, 5);
        assert_eq!(a.mul(&b), Scalar::from_int(p, 1)); // 15 = 1 mod 7
        assert_eq!(a.add(&b), Scalar::from_int(p, 1));
        assert_eq!(a.sub(&b), Scalar::from_int(p, 5)); // -2 = 5 mod 7
    }

    #[test]
    fn fp_inverses() {
        for p in [2u64, 3, 5, 7, 11, 101] {
            let f = FieldConfig::Fp(p);
            for v in 1..p.min(50) {
                let x = Scalar::from_int(f, v as i64);
                let inv = x.inv().unwrap();
                assert!(x.mul(&inv).is_one(), "{v} * {v}^-1 != 1 mod {p}");
            }
        }
        assert!(Scalar::zero(FieldConfig::Fp(5)).inv().is_none());
        assert!(Scalar::zero(FieldConfig::Q).inv().is_none());
    }

    #[test]
    fn parse_and_display() {
        let x = Scalar::parse(FieldConfig::Q, "3/4").unwrap();
        assert_eq!(x, q(3, 4));
        assert_eq!(x.to_string(), "3/4");
        assert_eq!(Scalar::parse(FieldConfig::Q, "-5").unwrap().to_string(), "-5");
        assert_eq!(Scalar::parse(FieldConfig::Q, "6/4").unwrap().to_string(), "3/2");
        assert!(Scalar::parse(FieldConfig::Q, "1/0").is_err());
        assert!(Scalar::parse(FieldConfig::Q, "x").is_err());
        // Fp: reduction and fraction inversion
        let f = FieldConfig::Fp(7);
        assert_eq!(Scalar::parse(f, "10").unwrap(), Scalar::from_int(f, 3));
        assert_eq!(Scalar::parse(f, "-1").unwrap(), Scalar::from_int(f, 6));
        assert_eq!(Scalar::parse(f, "1/2").unwrap(), Scalar::from_int(f, 4)); // 2*4=8=1
        assert!(Scalar::parse(f, "1/7").is_err());
    }

    #[test]
    fn primality() {
        assert!(FieldConfig::Fp(2).validate().is_ok());
        assert!(FieldConfig::Fp(7919).validate().is_ok());
        assert!(FieldConfig::Fp(1).validate().is_err());
        assert!(FieldConfig::Fp(0).validate().is_err());
        assert!(FieldConfig::Fp(91).validate().is_err()); // 7*13
        assert!(FieldConfig::Fp(4294967311).validate().is_ok()); // prime > 2^32
    }

    #[test]
    #[should_panic(expected = "field mismatch")]
    fn mixed_fields_panic() {
        let _ = Scalar::one(FieldConfig::Q).add(&Scalar::one(FieldConfig::Fp(5)));
    }

    proptest! {
        // Independent oracle: a/b + c/d must equal (ad + cb)/(bd), checked by
        // big-integer cross multiplication, without trusting Ratio's reduction.
        #[test]
        fn rational_add_cross_multiplication(a in -1000i64..1000, b in 1i64..1000,
                                             c in -1000i64..1000, d in 1i64..1000) {
            let sum = q(a, b).add(&q(c, d));
            let (p, qd) = match &sum {
                Scalar::Rational(r) => (r.numer().clone(), r.denom().clone()),
                _ => unreachable!(),
            };
            let lhs = p * BigInt::from(b) * BigInt::from(d);
            let rhs = (BigInt::from(a) * BigInt::from(d) + BigInt::from(c) * BigInt::from(b)) * qd;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn rational_mul_cross_multiplication(a in -1000i64..1000, b in 1i64..1000,
                                             c in -1000i64..1000, d in 1i64..1000) {
            let prod = q(a, b).mul(&q(c, d));
            let (p, qd) = match &prod {
                Scalar::Rational(r) => (r.numer().clone(), r.denom().clone()),
                _ => unreachable!(),
            };
            prop_assert_eq!(p * BigInt::from(b) * BigInt::from(d),
                            BigInt::from(a) * BigInt::from(c) * qd);
        }

        #[test]
        fn fp_field_axioms(p in prop::sample::select(vec![3u64, 5, 7, 11, 13]),
                           a in 0i64..100, b in 0i64..100) {
            let f = FieldConfig::Fp(p);
            let x = Scalar::from_int(f, a);
            let y = Scalar::from_int(f, b);
            prop_assert_eq!(x.add(&y), y.add(&x));
            prop_assert_eq!(x.mul(&y), y.mul(&x));
            prop_assert_eq!(x.sub(&y), y.sub(&x).neg());
            if !y.is_zero() {
                prop_assert_eq!(x.div(&y).mul(&y), x);
            }
        }
    }
}
