//! The commutative coefficient ring `Z[q^{±1/2}, h]`.
//!
//! A [`Coefficient`] is a finite integer combination of monomials
//! `q^{r/2} h^d` with `r ∈ Z` and `d ∈ Z_{≥0}`, stored sparsely and kept in
//! canonical form (no zero terms). The half-integer power of `q` is tracked
//! through the integer `r`, so `q` itself is `q^{2/2}`. The bar-involution
//! sends `q^{r/2}` to `q^{-r/2}` and fixes `h`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A unit monomial `±q^{r/2}`, as extracted by [`Coefficient::as_unit_q_power`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitPower {
    /// `+1` or `-1`.
    pub sign: i8,
    /// The half-power `r` in `q^{r/2}`.
    pub half: i64,
}

impl UnitPower {
    /// The coefficient `sign · q^{half/2}`.
    pub fn to_coefficient(self) -> Coefficient {
        Coefficient::monomial(self.half, 0, BigInt::from(self.sign))
    }

    /// The multiplicative inverse `sign · q^{-half/2}`.
    pub fn inverse(self) -> UnitPower {
        UnitPower {
            sign: self.sign,
            half: -self.half,
        }
    }
}

/// An element of `Z[q^{±1/2}, h]` in canonical sparse form.
///
/// Keys are `(r, d)` pairs for the monomial `q^{r/2} h^d`; values are nonzero
/// arbitrary-precision integers. Equality is structural.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coefficient {
    terms: BTreeMap<(i64, u32), BigInt>,
}

impl Coefficient {
    /// The zero element.
    pub fn zero() -> Self {
        Coefficient {
            terms: BTreeMap::new(),
        }
    }

    /// The unit element `1`.
    pub fn one() -> Self {
        Coefficient::integer(1)
    }

    /// The constant `n`.
    pub fn integer(n: i64) -> Self {
        Coefficient::monomial(0, 0, BigInt::from(n))
    }

    /// The monomial `c · q^{r/2} h^d`.
    pub fn monomial(qhalf: i64, hdeg: u32, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((qhalf, hdeg), c);
        }
        Coefficient { terms }
    }

    /// `q^{r/2}`.
    pub fn q_half_power(r: i64) -> Self {
        Coefficient::monomial(r, 0, BigInt::one())
    }

    /// `q^k`.
    pub fn q_power(k: i64) -> Self {
        Coefficient::q_half_power(2 * k)
    }

    /// The indeterminate `h`.
    pub fn h() -> Self {
        Coefficient::monomial(0, 1, BigInt::one())
    }

    /// `h^d`.
    pub fn h_power(d: u32) -> Self {
        Coefficient::monomial(0, d, BigInt::one())
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&(0, 0))
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    /// Number of stored monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate over `((qhalf, hdeg), c)` in ascending key order.
    pub fn iter(&self) -> impl Iterator<Item = (&(i64, u32), &BigInt)> {
        self.terms.iter()
    }

    fn insert_term(&mut self, key: (i64, u32), c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// The bar-involution: `q^{r/2} ↦ q^{-r/2}`, `h` fixed.
    pub fn bar(&self) -> Coefficient {
        let terms = self
            .terms
            .iter()
            .map(|(&(r, d), c)| ((-r, d), c.clone()))
            .collect();
        Coefficient { terms }
    }

    /// True iff every stored integer is nonnegative.
    pub fn is_positive(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// Substitute `q^{1/2} = 1` and/or `h = 0` and recanonicalize.
    pub fn specialize(&self, q_to_one: bool, h_to_zero: bool) -> Coefficient {
        let mut out = Coefficient::zero();
        for (&(r, d), c) in &self.terms {
            if h_to_zero && d > 0 {
                continue;
            }
            let key = (if q_to_one { 0 } else { r }, d);
            out.insert_term(key, c.clone());
        }
        out
    }

    /// If this element is exactly `±q^{r/2}`, return the sign and `r`.
    pub fn as_unit_q_power(&self) -> Option<UnitPower> {
        if self.terms.len() != 1 {
            return None;
        }
        let (&(r, d), c) = self.terms.iter().next().unwrap();
        if d != 0 {
            return None;
        }
        if c.is_one() {
            Some(UnitPower { sign: 1, half: r })
        } else if (-c).is_one() {
            Some(UnitPower { sign: -1, half: r })
        } else {
            None
        }
    }

    /// The integer value of a constant element, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.is_zero() {
            return Some(BigInt::zero());
        }
        if self.terms.len() != 1 {
            return None;
        }
        self.terms.get(&(0, 0)).cloned()
    }
}

impl Add for &Coefficient {
    type Output = Coefficient;

    fn add(self, rhs: &Coefficient) -> Coefficient {
        let mut out = self.clone();
        for (&key, c) in &rhs.terms {
            out.insert_term(key, c.clone());
        }
        out
    }
}

impl Sub for &Coefficient {
    type Output = Coefficient;

    fn sub(self, rhs: &Coefficient) -> Coefficient {
        let mut out = self.clone();
        for (&key, c) in &rhs.terms {
            out.insert_term(key, -c);
        }
        out
    }
}

impl Mul for &Coefficient {
    type Output = Coefficient;

    fn mul(self, rhs: &Coefficient) -> Coefficient {
        let mut out = Coefficient::zero();
        for (&(r1, d1), c1) in &self.terms {
            for (&(r2, d2), c2) in &rhs.terms {
                out.insert_term((r1 + r2, d1 + d2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Coefficient {
    type Output = Coefficient;

    fn neg(self) -> Coefficient {
        let terms = self.terms.iter().map(|(&k, c)| (k, -c)).collect();
        Coefficient { terms }
    }
}

impl Add for Coefficient {
    type Output = Coefficient;
    fn add(self, rhs: Coefficient) -> Coefficient {
        &self + &rhs
    }
}

impl Sub for Coefficient {
    type Output = Coefficient;
    fn sub(self, rhs: Coefficient) -> Coefficient {
        &self - &rhs
    }
}

impl Mul for Coefficient {
    type Output = Coefficient;
    fn mul(self, rhs: Coefficient) -> Coefficient {
        &self * &rhs
    }
}

impl Neg for Coefficient {
    type Output = Coefficient;
    fn neg(self) -> Coefficient {
        -&self
    }
}

impl AddAssign<&Coefficient> for Coefficient {
    fn add_assign(&mut self, rhs: &Coefficient) {
        for (&key, c) in &rhs.terms {
            self.insert_term(key, c.clone());
        }
    }
}

/// Render one monomial `c · q^{r/2} h^d (· extra)` without a leading sign;
/// `c` must be positive. Shared by the ring and torus displays.
pub(crate) fn render_monomial(c: &BigInt, qhalf: i64, hdeg: u32, extra: Option<&str>) -> String {
    let mut parts: Vec<String> = Vec::new();
    if !c.is_one() {
        parts.push(c.to_string());
    }
    if qhalf != 0 {
        if qhalf % 2 == 0 {
            let k = qhalf / 2;
            if k == 1 {
                parts.push("q".to_string());
            } else {
                parts.push(format!("q^{}", k));
            }
        } else {
            parts.push(format!("q^({}/2)", qhalf));
        }
    }
    if hdeg == 1 {
        parts.push("h".to_string());
    } else if hdeg > 1 {
        parts.push(format!("h^{}", hdeg));
    }
    if let Some(x) = extra {
        parts.push(x.to_string());
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

impl fmt::Display for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (&(r, d), c)) in self.terms.iter().enumerate() {
            let body = render_monomial(&c.abs(), r, d, None);
            if i == 0 {
                if c.is_negative() {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
            } else if c.is_negative() {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermDto {
    qhalf: i64,
    hdeg: u32,
    c: String,
}

#[derive(Serialize, Deserialize)]
struct CoefficientDto {
    terms: Vec<TermDto>,
}

impl Serialize for Coefficient {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let dto = CoefficientDto {
            terms: self
                .terms
                .iter()
                .map(|(&(qhalf, hdeg), c)| TermDto {
                    qhalf,
                    hdeg,
                    c: c.to_string(),
                })
                .collect(),
        };
        dto.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Coefficient {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let dto = CoefficientDto::deserialize(deserializer)?;
        let mut out = Coefficient::zero();
        for t in dto.terms {
            let c: BigInt = t
                .c
                .parse()
                .map_err(|_| D::Error::custom(format!("invalid integer literal {:?}", t.c)))?;
            out.insert_term((t.qhalf, t.hdeg), c);
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(n: i64) -> Coefficient {
        Coefficient::integer(n)
    }

    fn qh(r: i64) -> Coefficient {
        Coefficient::q_half_power(r)
    }

    #[test]
    fn additive_inverse_cancels() {
        assert!((&qh(1) + &(-&qh(1))).is_zero());
    }

    #[test]
    fn add_keeps_distinct_terms() {
        let s = &qh(-1) + &qh(1);
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_string(), "q^(-1/2) + q^(1/2)");
    }

    #[test]
    fn add_collects_equal_terms() {
        let h2 = Coefficient::h_power(2);
        let s = &h2 + &h2;
        assert_eq!(s, Coefficient::monomial(0, 2, BigInt::from(2)));
        assert_eq!(s.to_string(), "2*h^2");
    }

    #[test]
    fn mul_adds_exponents() {
        assert_eq!(&qh(1) * &qh(1), Coefficient::q_power(1));
        assert_eq!(&Coefficient::h() * &Coefficient::h(), Coefficient::h_power(2));
        // (q^{-1/2} + q^{1/2}) * h
        let s = &(&qh(-1) + &qh(1)) * &Coefficient::h();
        let expected = &Coefficient::monomial(-1, 1, BigInt::one())
            + &Coefficient::monomial(1, 1, BigInt::one());
        assert_eq!(s, expected);
    }

    #[test]
    fn bar_flips_q_and_fixes_h() {
        let x = Coefficient::monomial(1, 1, BigInt::one());
        assert_eq!(x.bar(), Coefficient::monomial(-1, 1, BigInt::one()));
        // q^{-1} + h^2 + q is bar-symmetric
        let y = &(&Coefficient::q_power(-1) + &Coefficient::h_power(2)) + &Coefficient::q_power(1);
        assert_eq!(y.bar(), y);
    }

    #[test]
    fn positivity() {
        assert!((&qh(-1) + &qh(1)).is_positive());
        let mixed = &(&Coefficient::q_power(1) - &c(2)) + &Coefficient::q_power(-1);
        assert!(!mixed.is_positive());
        assert!(Coefficient::h_power(2).is_positive());
        assert!(Coefficient::zero().is_positive());
    }

    #[test]
    fn specialization() {
        let x = &(&Coefficient::q_power(1) + &Coefficient::q_power(-1)) + &Coefficient::h_power(2);
        assert_eq!(x.specialize(true, true), c(2));
        assert_eq!(
            Coefficient::monomial(1, 1, BigInt::one()).specialize(true, true),
            Coefficient::zero()
        );
        // q=1 only: h survives
        let y = Coefficient::monomial(3, 1, BigInt::from(2));
        assert_eq!(y.specialize(true, false), Coefficient::monomial(0, 1, BigInt::from(2)));
    }

    #[test]
    fn unit_q_power_detection() {
        assert_eq!(qh(3).as_unit_q_power(), Some(UnitPower { sign: 1, half: 3 }));
        assert_eq!(c(1).as_unit_q_power(), Some(UnitPower { sign: 1, half: 0 }));
        assert_eq!((-&qh(-2)).as_unit_q_power(), Some(UnitPower { sign: -1, half: -2 }));
        assert_eq!((&c(1) + &Coefficient::h()).as_unit_q_power(), None);
        assert_eq!(c(2).as_unit_q_power(), None);
        assert_eq!(Coefficient::h().as_unit_q_power(), None);
    }

    #[test]
    fn display_forms() {
        assert_eq!(c(0).to_string(), "0");
        assert_eq!(c(-3).to_string(), "-3");
        assert_eq!(Coefficient::q_power(-1).to_string(), "q^-1");
        assert_eq!(Coefficient::q_power(1).to_string(), "q");
        assert_eq!(Coefficient::monomial(1, 2, BigInt::from(-2)).to_string(), "-2*q^(1/2)*h^2");
        let s = &c(1) - &Coefficient::h();
        assert_eq!(s.to_string(), "1 - h");
    }

    #[test]
    fn json_round_trip_and_shape() {
        let x = &(&qh(-1) * &Coefficient::h()) + &c(-12);
        let js = serde_json::to_value(&x).unwrap();
        assert_eq!(
            js,
            serde_json::json!({"terms": [
                {"qhalf": -1, "hdeg": 1, "c": "1"},
                {"qhalf": 0, "hdeg": 0, "c": "-12"},
            ]})
        );
        let back: Coefficient = serde_json::from_value(js).unwrap();
        assert_eq!(back, x);
    }

    prop_compose! {
        pub(crate) fn arb_coefficient()(
            terms in proptest::collection::vec(((-6i64..=6, 0u32..=3), -9i64..=9), 0..5)
        ) -> Coefficient {
            let mut out = Coefficient::zero();
            for ((r, d), c) in terms {
                out.insert_term((r, d), BigInt::from(c));
            }
            out
        }
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_coefficient(), b in arb_coefficient(), c in arb_coefficient()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &Coefficient::one(), a.clone());
            prop_assert_eq!(&a + &Coefficient::zero(), a.clone());
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn bar_is_ring_involution(a in arb_coefficient(), b in arb_coefficient()) {
            prop_assert_eq!(a.bar().bar(), a.clone());
            prop_assert_eq!((&a * &b).bar(), &a.bar() * &b.bar());
            prop_assert_eq!((&a + &b).bar(), &a.bar() + &b.bar());
        }

        #[test]
        fn specialize_is_ring_homomorphism(a in arb_coefficient(), b in arb_coefficient()) {
            for (q1, h0) in [(true, false), (false, true), (true, true)] {
                prop_assert_eq!(
                    (&a * &b).specialize(q1, h0),
                    &a.specialize(q1, h0) * &b.specialize(q1, h0)
                );
                prop_assert_eq!(
                    (&a + &b).specialize(q1, h0),
                    &a.specialize(q1, h0) + &b.specialize(q1, h0)
                );
            }
        }

        #[test]
        fn positivity_is_closed_under_add_and_mul(
            a in proptest::collection::vec(((-6i64..=6, 0u32..=3), 0i64..=9), 0..5),
            b in proptest::collection::vec(((-6i64..=6, 0u32..=3), 0i64..=9), 0..5),
        ) {
            let build = |v: Vec<((i64, u32), i64)>| {
                let mut out = Coefficient::zero();
                for ((r, d), c) in v {
                    out.insert_term((r, d), BigInt::from(c));
                }
                out
            };
            let pa = build(a);
            let pb = build(b);
            prop_assert!(pa.is_positive() && pb.is_positive());
            prop_assert!((&pa + &pb).is_positive());
            prop_assert!((&pa * &pb).is_positive());
        }

        #[test]
        fn json_round_trip(a in arb_coefficient()) {
            let js = serde_json::to_string(&a).unwrap();
            let back: Coefficient = serde_json::from_str(&js).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
