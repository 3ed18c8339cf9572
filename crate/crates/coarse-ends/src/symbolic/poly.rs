//! Single-variable polynomials with exact rational coefficients.
//!
//! These are the germs standing for parametric quantities in an unbounded
//! parameter t: boundedness is degree <= 0 and dominance is decided by
//! degree and leading-coefficient inspection. Coefficients are stored
//! ascending with no trailing zeros; the zero polynomial has an empty list
//! and degree None.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    coeffs: Vec<BigRational>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        Self::new(vec![c])
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(BigRational::from_integer(BigInt::from(c)))
    }

    /// The variable t.
    pub fn var() -> Self {
        Self::new(vec![BigRational::zero(), BigRational::one()])
    }

    /// Convenience constructor from ascending integer coefficients.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    /// Bounded as a germ: degree <= 0.
    pub fn is_bounded(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_integer())
    }

    pub fn eval(&self, t: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let mut acc = 0.0f64;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + rational_to_f64(c);
        }
        acc
    }

    pub fn scale(&self, s: &BigRational) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Substitution self(other(t)).
    pub fn compose(&self, other: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * other) + &Poly::constant(c.clone());
        }
        acc
    }

    /// self(t0 + s): the shift used by the ray nonnegativity test.
    pub fn shift(&self, t0: &BigRational) -> Poly {
        self.compose(&Poly::new(vec![t0.clone(), BigRational::one()]))
    }

    /// Formal derivative.
    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
                .collect(),
        )
    }

    /// Coefficients as f64, ascending.
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly::new((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut coeffs =
            vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        Poly::new(coeffs)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c)?,
                1 => write!(f, "{}*t", c)?,
                _ => write!(f, "{}*t^{}", c, i)?,
            }
        }
        Ok(())
    }
}

/// Parses "p/q" or "p" into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |x: &str| -> Result<BigInt> {
        x.parse::<BigInt>().map_err(|_| Error::Parse {
            line: 0,
            message: format!("not an integer: `{}`", x),
        })
    };
    if let Some((num, den)) = s.split_once('/') {
        let den = parse_int(den)?;
        if den.is_zero() {
            return Err(Error::Parse {
                line: 0,
                message: format!("zero denominator in `{}`", s),
            });
        }
        Ok(BigRational::new(parse_int(num)?, den))
    } else {
        Ok(BigRational::from_integer(parse_int(s)?))
    }
}

/// Renders a rational as "p/q" (or "p" when integral).
pub fn rational_to_string(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn rational_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // fall back to the ratio of approximations for extreme magnitudes
        let n = q.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = q.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let strings: Vec<String> = self.coeffs.iter().map(rational_to_string).collect();
        strings.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(deserializer)?;
        let coeffs = strings
            .iter()
            .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(Poly::new(coeffs))
    }
}

/// Field-attribute serde for exact rationals as "p/q" strings.
pub mod rat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(
        q: &BigRational,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        rational_to_string(q).serialize(serializer)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<BigRational, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Outcome of a symbolic nonnegativity check over a ray [t0, ∞).
#[derive(Debug, Clone, PartialEq)]
pub enum RayVerdict {
    /// Holds for every t >= t0.
    Proved,
    /// Fails at the returned sample point.
    Refuted { at: BigRational },
    /// Neither provable by the shifted-coefficient test nor refutable by
    /// sampling.
    Inconclusive,
}

/// Sample offsets used by the refutation pass: small integers, halves, and a
/// few large magnitudes to catch eventual sign changes.
fn sample_offsets() -> Vec<BigRational> {
    let mut offsets = Vec::new();
    for j in 0..=64i64 {
        offsets.push(BigRational::new(BigInt::from(j), BigInt::from(2)));
    }
    for large in [100i64, 1_000, 1_000_000] {
        offsets.push(BigRational::from_integer(BigInt::from(large)));
    }
    offsets
}

/// Is p(t) >= 0 for all t >= t0? Proof route: all coefficients of the
/// shifted polynomial p(t0 + s) nonnegative (then every term is >= 0 on
/// s >= 0). Refutation route: sampling.
pub fn nonneg_on_ray(p: &Poly, t0: &BigRational) -> RayVerdict {
    if p.is_zero() {
        return RayVerdict::Proved;
    }
    let shifted = p.shift(t0);
    if shifted.coeffs().iter().all(|c| !c.is_negative()) {
        return RayVerdict::Proved;
    }
    for s in sample_offsets() {
        let at = t0 + &s;
        if p.eval(&at).is_negative() {
            return RayVerdict::Refuted { at };
        }
    }
    RayVerdict::Inconclusive
}

/// Is p(t) > 0 for all t >= t0? Same routes with a strict constant term.
pub fn positive_on_ray(p: &Poly, t0: &BigRational) -> RayVerdict {
    if p.is_zero() {
        return RayVerdict::Refuted { at: t0.clone() };
    }
    let shifted = p.shift(t0);
    if shifted.coeffs().iter().all(|c| !c.is_negative()) && shifted.coeff(0).is_positive() {
        return RayVerdict::Proved;
    }
    for s in sample_offsets() {
        let at = t0 + &s;
        if !p.eval(&at).is_positive() {
            return RayVerdict::Refuted { at };
        }
    }
    RayVerdict::Inconclusive
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn canonical_form_trims_trailing_zeros() {
        let p = Poly::from_ints(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        // t^2 - t^2 cancels to the zero polynomial, which is bounded
        let t2 = &Poly::var() * &Poly::var();
        let diff = &t2 - &t2;
        assert!(diff.is_zero());
        assert_eq!(diff.degree(), None);
        assert!(diff.is_bounded());
    }

    #[test]
    fn boundedness_is_degree_at_most_zero() {
        assert!(Poly::from_int(5).is_bounded());
        assert!(!Poly::var().is_bounded());
    }

    #[test]
    fn arithmetic_and_eval() {
        // (t + 1)(t - 1) = t^2 - 1
        let a = Poly::from_ints(&[1, 1]);
        let b = Poly::from_ints(&[-1, 1]);
        let p = &a * &b;
        assert_eq!(p, Poly::from_ints(&[-1, 0, 1]));
        assert_eq!(p.eval(&q(3, 1)), q(8, 1));
        assert_eq!(p.eval_f64(3.0), 8.0);
        // compose: (t^2 - 1)(t+2) = (t+2)^2 - 1
        let c = p.compose(&Poly::from_ints(&[2, 1]));
        assert_eq!(c, Poly::from_ints(&[3, 4, 1]));
        assert_eq!(p.derivative(), Poly::from_ints(&[0, 2]));
    }

    #[test]
    fn rational_strings_round_trip() {
        for s in ["3/2", "-7/3", "4", "0", "-12"] {
            let r = parse_rational(s).unwrap();
            assert_eq!(rational_to_string(&r), s);
        }
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        // non-reduced input normalizes
        assert_eq!(rational_to_string(&parse_rational("6/4").unwrap()), "3/2");
    }

    #[test]
    fn poly_serde_round_trip() {
        let p = Poly::new(vec![q(3, 2), q(-1, 1), q(7, 5)]);
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"["3/2","-1","7/5"]"#);
        let back: Poly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn ray_nonnegativity() {
        let one = BigRational::one();
        // t^2 - t >= 0 on [1, ∞): shifted (1+s)^2 - (1+s) = s^2 + s
        let p = Poly::from_ints(&[0, -1, 1]);
        assert_eq!(nonneg_on_ray(&p, &one), RayVerdict::Proved);
        // t - 2 is negative at t = 1
        let p = Poly::from_ints(&[-2, 1]);
        assert!(matches!(nonneg_on_ray(&p, &one), RayVerdict::Refuted { .. }));
        // -t^2 eventually negative
        let p = Poly::from_ints(&[0, 0, -1]);
        assert!(matches!(nonneg_on_ray(&p, &one), RayVerdict::Refuted { .. }));
        // strictness: t - 1 >= 0 but not > 0 at t0 = 1
        let p = Poly::from_ints(&[-1, 1]);
        assert_eq!(nonneg_on_ray(&p, &one), RayVerdict::Proved);
        assert!(matches!(positive_on_ray(&p, &one), RayVerdict::Refuted { .. }));
        assert_eq!(positive_on_ray(&Poly::from_ints(&[1, 1]), &one), RayVerdict::Proved);
    }
}
