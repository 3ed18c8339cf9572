//! Bivariate polynomials in the parameter t and a step index k.
//!
//! Stored k-major: coefficient i is the polynomial in t multiplying k^i.
//! Chain schemas describe points as these, with k ranging over 0..m(t), so
//! the verifier needs nonnegativity over the quadrant {t >= t0, k >= 0} and
//! over the strip {t >= t0, 0 <= k <= m(t)}. Proof routes are exact
//! (shifted-coefficient tests plus endpoint and discriminant analysis up to
//! quadratic k-degree); everything else falls back to declared sampling.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::poly::{nonneg_on_ray, Poly, RayVerdict};

#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    /// coeffs[i] multiplies k^i.
    coeffs: Vec<Poly>,
}

impl Poly2 {
    pub fn new(mut coeffs: Vec<Poly>) -> Self {
        while coeffs.last().map_or(false, |c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn from_t(p: Poly) -> Self {
        Self::new(vec![p])
    }

    /// The step variable k.
    pub fn var_k() -> Self {
        Self::new(vec![Poly::zero(), Poly::from_int(1)])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn deg_k(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff_k(&self, i: usize) -> Poly {
        self.coeffs.get(i).cloned().unwrap_or_else(Poly::zero)
    }

    pub fn coeffs_k(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn eval(&self, t: &BigRational, k: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * k + c.eval(t);
        }
        acc
    }

    pub fn eval_f64(&self, t: f64, k: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * k + c.eval_f64(t);
        }
        acc
    }

    /// Substitute k := m(t), collapsing to a polynomial in t.
    pub fn subst_k(&self, m: &Poly) -> Poly {
        let mut acc = Poly::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * m) + c;
        }
        acc
    }

    /// Substitute a constant value for k.
    pub fn subst_k_value(&self, v: &BigRational) -> Poly {
        self.subst_k(&Poly::constant(v.clone()))
    }

    /// k := k + 1 (the displacement shift).
    pub fn shift_k_by_one(&self) -> Poly2 {
        // Horner in k with k replaced by (k + 1)
        let k_plus_one = Poly2::new(vec![Poly::from_int(1), Poly::from_int(1)]);
        let mut acc = Poly2::zero();
        for c in self.coeffs.iter().rev() {
            acc = &(&acc * &k_plus_one) + &Poly2::from_t(c.clone());
        }
        acc
    }

    pub fn has_integer_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| c.has_integer_coeffs())
    }

    /// All rational coefficients nonnegative (after shifting t by t0 this
    /// proves nonnegativity on the whole quadrant).
    fn all_coeffs_nonneg(&self) -> bool {
        self.coeffs
            .iter()
            .all(|p| p.coeffs().iter().all(|c| !c.is_negative()))
    }

    fn shift_t(&self, t0: &BigRational) -> Poly2 {
        Poly2::new(self.coeffs.iter().map(|c| c.shift(t0)).collect())
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly2::new((0..len).map(|i| &self.coeff_k(i) + &rhs.coeff_k(i)).collect())
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Poly2::new((0..len).map(|i| &self.coeff_k(i) - &rhs.coeff_k(i)).collect())
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        if self.is_zero() || rhs.is_zero() {
            return Poly2::zero();
        }
        let mut coeffs = vec![Poly::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] = &coeffs[i + j] + &(a * b);
            }
        }
        Poly2::new(coeffs)
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.coeffs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly2 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Poly2::new(Vec::<Poly>::deserialize(deserializer)?))
    }
}

/// Outcome of a constrained-domain nonnegativity check.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainVerdict {
    /// Established symbolically for the whole domain.
    Proved,
    /// No symbolic proof available; a dense sample plus leading-term
    /// dominance found no violation. Declared in reports.
    Sampled,
    /// A concrete violation (t, k, value as f64 for reporting).
    Refuted { t: String, k: String },
    /// Neither provable nor refutable; treated as a verification failure.
    Inconclusive,
}

impl DomainVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, DomainVerdict::Proved | DomainVerdict::Sampled)
    }

    pub fn sampled(&self) -> bool {
        matches!(self, DomainVerdict::Sampled)
    }
}

fn refuted(t: &BigRational, k: &BigRational) -> DomainVerdict {
    DomainVerdict::Refuted {
        t: super::poly::rational_to_string(t),
        k: super::poly::rational_to_string(k),
    }
}

/// q(t, k) >= 0 for all t >= t0 and 0 <= k <= m(t)?
///
/// Routes, in order:
/// 1. shifted-coefficient test on the quadrant (sound: ignores the upper
///    bound on k);
/// 2. exact analysis in the k-direction: constant and linear cases via
///    endpoints, quadratic case via concavity (endpoints) or the
///    discriminant of the unconstrained minimum;
/// 3. sampling with a leading-term dominance check, reported as Sampled.
pub fn nonneg_on_strip(q: &Poly2, t0: &BigRational, m: &Poly) -> DomainVerdict {
    if q.is_zero() {
        return DomainVerdict::Proved;
    }
    // quadrant proof ignores the k upper bound
    if q.shift_t(t0).all_coeffs_nonneg() {
        return DomainVerdict::Proved;
    }

    let endpoint_check = |p: &Poly| nonneg_on_ray(p, t0);
    let verdict = match q.deg_k() {
        None | Some(0) => endpoint_check(&q.coeff_k(0)).into_domain(t0, &BigRational::zero()),
        Some(1) => {
            // linear in k: minimum at an endpoint
            let at_zero = endpoint_check(&q.coeff_k(0));
            let at_m = endpoint_check(&q.subst_k(m));
            combine_endpoints(at_zero, at_m, m)
        }
        Some(2) => {
            let q2 = q.coeff_k(2);
            let q1 = q.coeff_k(1);
            let q0 = q.coeff_k(0);
            if let RayVerdict::Proved = nonneg_on_ray(&q2, t0) {
                // convex in k: the unconstrained real minimum bounds the
                // strip minimum from below; min = (4 q0 q2 - q1^2) / (4 q2)
                let four = Poly::from_int(4);
                let disc = &(&(&four * &q0) * &q2) - &(&q1 * &q1);
                match nonneg_on_ray(&disc, t0) {
                    RayVerdict::Proved => DomainVerdict::Proved,
                    _ => {
                        // convex min may still sit outside [0, m]; fall back
                        // to endpoints only when the vertex provably does
                        match vertex_outside_range(&q1, &q2, t0, m) {
                            true => combine_endpoints(
                                endpoint_check(&q0),
                                endpoint_check(&q.subst_k(m)),
                                m,
                            ),
                            false => DomainVerdict::Inconclusive,
                        }
                    }
                }
            } else if let RayVerdict::Proved = nonneg_on_ray(&(-&q2), t0) {
                // concave in k: minimum at an endpoint
                combine_endpoints(
                    endpoint_check(&q.coeff_k(0)),
                    endpoint_check(&q.subst_k(m)),
                    m,
                )
            } else {
                DomainVerdict::Inconclusive
            }
        }
        _ => DomainVerdict::Inconclusive,
    };
    match verdict {
        DomainVerdict::Inconclusive => sample_strip(q, t0, m),
        other => other,
    }
}

/// The convex vertex -q1 / (2 q2) lies left of 0 or right of m(t) for every
/// t >= t0 (then endpoint checks suffice).
fn vertex_outside_range(q1: &Poly, q2: &Poly, t0: &BigRational, m: &Poly) -> bool {
    // vertex <= 0  <=>  q1 >= 0 (given q2 > 0)
    if let RayVerdict::Proved = nonneg_on_ray(q1, t0) {
        return true;
    }
    // vertex >= m  <=>  -q1 - 2 m q2 >= 0
    let two = Poly::from_int(2);
    let expr = &(-q1) - &(&(&two * m) * q2);
    matches!(nonneg_on_ray(&expr, t0), RayVerdict::Proved)
}

fn combine_endpoints(
    a: RayVerdict,
    b: RayVerdict,
    m: &Poly,
) -> DomainVerdict {
    match (a, b) {
        (RayVerdict::Proved, RayVerdict::Proved) => DomainVerdict::Proved,
        (RayVerdict::Refuted { at }, _) => refuted(&at, &BigRational::zero()),
        (_, RayVerdict::Refuted { at }) => {
            let k = m.eval(&at);
            refuted(&at, &k)
        }
        _ => DomainVerdict::Inconclusive,
    }
}

impl RayVerdict {
    fn into_domain(self, _t0: &BigRational, k: &BigRational) -> DomainVerdict {
        match self {
            RayVerdict::Proved => DomainVerdict::Proved,
            RayVerdict::Refuted { at } => refuted(&at, k),
            RayVerdict::Inconclusive => DomainVerdict::Inconclusive,
        }
    }
}

/// Sampling fallback over the strip: a t-grid from t0 with every admissible
/// k (capped), plus eventual-positivity of the k-endpoint sections as the
/// dominance check.
fn sample_strip(q: &Poly2, t0: &BigRational, m: &Poly) -> DomainVerdict {
    const T_STEPS: i64 = 200;
    const EVAL_CAP: u64 = 1_000_000;
    let mut evaluated = 0u64;
    for dt in 0..=T_STEPS {
        let t = t0 + BigRational::from_integer(BigInt::from(dt * 5));
        let m_here = m.eval(&t);
        let top = m_here.to_integer().max(BigInt::zero());
        let step = {
            // visit every k when small, stride when huge
            let span: BigInt = top.clone() + 1;
            let max_per_t = (EVAL_CAP / (T_STEPS as u64 + 1)).max(8);
            let stride = &span / BigInt::from(max_per_t);
            if stride < BigInt::one() {
                BigInt::one()
            } else {
                stride
            }
        };
        let mut k = BigInt::zero();
        while k <= top {
            let kq = BigRational::from_integer(k.clone());
            if q.eval(&t, &kq).is_negative() {
                return refuted(&t, &kq);
            }
            evaluated += 1;
            if evaluated >= EVAL_CAP {
                break;
            }
            k += &step;
        }
        // always include the top endpoint
        let kq = BigRational::from_integer(top);
        if q.eval(&t, &kq).is_negative() {
            return refuted(&t, &kq);
        }
    }
    // leading-term dominance along the k-endpoints: both sections must be
    // eventually nonnegative for the sample to extend to all large t
    let low = q.coeff_k(0);
    let high = q.subst_k(m);
    let eventually_ok = |p: &Poly| p.is_zero() || p.leading().map_or(false, |c| c.is_positive());
    let low_ok = matches!(nonneg_on_ray(&low, t0), RayVerdict::Proved) || eventually_ok(&low);
    let high_ok = matches!(nonneg_on_ray(&high, t0), RayVerdict::Proved) || eventually_ok(&high);
    if low_ok && high_ok {
        DomainVerdict::Sampled
    } else {
        DomainVerdict::Inconclusive
    }
}
