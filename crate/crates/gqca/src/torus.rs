//! The skew quantum torus `T` over `Z[q^{±1/2}, h]`.
//!
//! `T` is generated by monomials `X(a)` for `a ∈ Z^m`, multiplying by
//!
//! ```text
//! X(a) X(b) = q^{Λ(a,b)/2} X(a+b)
//! ```
//!
//! where `Λ` is a skew-symmetric bilinear form on `Z^m` ([`SkewForm`]). A
//! [`TorusElement`] is a finite sum of coefficients times `X(a)`, stored
//! sparsely with exponents in lexicographic order. The module provides ring
//! arithmetic, the bar-involution (an anti-automorphism of `T`), rewriting to
//! and from the ordered standard form `X_1^{a_1} ... X_m^{a_m}`, pointed-term
//! analysis with respect to the componentwise partial order on exponents, and
//! exact one-sided division by pointed elements.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::coeff::{render_monomial, Coefficient, UnitPower};

/// Iteration cap for [`exact_divide`]; reaching it reports
/// [`DivisionError::NotExact`].
pub const DIVISION_ITERATION_CAP: usize = 100_000;

#[derive(Debug, Error)]
pub enum FormError {
    #[error("form matrix must be square, got {rows} rows and {cols} columns")]
    NotSquare { rows: usize, cols: usize },
    #[error("form matrix is not skew-symmetric at ({row},{col})")]
    NotSkewSymmetric { row: usize, col: usize },
}

/// A skew-symmetric integer matrix `Λ`, defining the bilinear form
/// `Λ(a,b) = aᵀ Λ b` on `Z^m`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SkewForm {
    entries: Vec<Vec<i64>>,
}

impl SkewForm {
    /// Validate and wrap a matrix; it must be square with `λ_ij = -λ_ji`.
    pub fn new(entries: Vec<Vec<i64>>) -> Result<Self, FormError> {
        let m = entries.len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != m {
                return Err(FormError::NotSquare {
                    rows: m,
                    cols: row.len(),
                });
            }
            for j in 0..=i {
                if entries[i][j] != -entries[j][i] {
                    return Err(FormError::NotSkewSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SkewForm { entries })
    }

    /// The rank-2 form `Λ = ((0,1),(-1,0))` of the Kronecker-type algebra.
    pub fn kronecker() -> Self {
        SkewForm {
            entries: vec![vec![0, 1], vec![-1, 0]],
        }
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entry(&self, row: usize, col: usize) -> i64 {
        self.entries[row][col]
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.entries
    }

    /// `Λ(a,b) = aᵀ Λ b`.
    ///
    /// Panics if either vector's rank differs from the form's.
    pub fn pairing(&self, a: &Exponent, b: &Exponent) -> i64 {
        assert_eq!(a.rank(), self.rank(), "pairing: rank mismatch in first argument");
        assert_eq!(b.rank(), self.rank(), "pairing: rank mismatch in second argument");
        let mut acc: i128 = 0;
        for i in 0..self.rank() {
            for j in 0..self.rank() {
                acc += a.0[i] as i128 * self.entries[i][j] as i128 * b.0[j] as i128;
            }
        }
        i64::try_from(acc).expect("pairing value exceeds i64")
    }

    /// The product `X(a) X(b) = q^{Λ(a,b)/2} X(a+b)` as a one-term element.
    pub fn mono_mul(&self, a: &Exponent, b: &Exponent) -> TorusElement {
        let half = self.pairing(a, b);
        TorusElement::monomial(self.clone(), a + b, Coefficient::q_half_power(half))
    }
}

/// An exponent vector `a ∈ Z^m`. Ordering is lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(Vec<i64>);

impl Exponent {
    pub fn new(entries: Vec<i64>) -> Self {
        Exponent(entries)
    }

    pub fn zero(rank: usize) -> Self {
        Exponent(vec![0; rank])
    }

    /// The standard unit vector with a `1` in position `index` (0-based).
    pub fn unit(rank: usize, index: usize) -> Self {
        let mut v = vec![0; rank];
        v[index] = 1;
        Exponent(v)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, index: usize) -> i64 {
        self.0[index]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Componentwise `[x]_+ = max(x, 0)`.
    pub fn positive_part(&self) -> Exponent {
        Exponent(self.0.iter().map(|&x| x.max(0)).collect())
    }

    pub fn scale(&self, k: i64) -> Exponent {
        Exponent(self.0.iter().map(|&x| x * k).collect())
    }

    /// True iff `self ≤ other` componentwise.
    pub fn le_componentwise(&self, other: &Exponent) -> bool {
        assert_eq!(self.rank(), other.rank(), "rank mismatch");
        self.0.iter().zip(&other.0).all(|(&a, &b)| a <= b)
    }
}

impl From<(i64, i64)> for Exponent {
    fn from((a, b): (i64, i64)) -> Self {
        Exponent(vec![a, b])
    }
}

impl From<Vec<i64>> for Exponent {
    fn from(v: Vec<i64>) -> Self {
        Exponent(v)
    }
}

impl Add for &Exponent {
    type Output = Exponent;
    fn add(self, rhs: &Exponent) -> Exponent {
        assert_eq!(self.rank(), rhs.rank(), "rank mismatch");
        Exponent(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Exponent {
    type Output = Exponent;
    fn sub(self, rhs: &Exponent) -> Exponent {
        assert_eq!(self.rank(), rhs.rank(), "rank mismatch");
        Exponent(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &Exponent {
    type Output = Exponent;
    fn neg(self) -> Exponent {
        Exponent(self.0.iter().map(|&x| -x).collect())
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x)?;
        }
        write!(f, ")")
    }
}

/// The pointed data of an element: the unique componentwise-minimal support
/// exponent together with its unit coefficient `±q^{r/2}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedForm {
    pub point: Exponent,
    pub unit: UnitPower,
}

#[derive(Debug, Error)]
pub enum NotPointedError {
    #[error("the zero element has no pointed form")]
    Zero,
    #[error("support has no unique minimal exponent; componentwise minimum {candidate} is not in the support")]
    NoMinimalTerm { candidate: Exponent },
    #[error("coefficient at minimal exponent {point} is not a unit ±q^(r/2): {coefficient}")]
    NonUnitCoefficient {
        point: Exponent,
        coefficient: Coefficient,
    },
}

#[derive(Debug, Error)]
pub enum DivisionError {
    #[error("divisor is not pointed: {0}")]
    DivisorNotPointed(#[from] NotPointedError),
    #[error("division not exact: iteration cap {cap} reached with {remainder_terms} remainder terms")]
    NotExact { cap: usize, remainder_terms: usize },
}

#[derive(Debug, Error)]
pub enum ElementParseError {
    #[error("invalid element JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("element rank {got} does not match form rank {expected}")]
    RankMismatch { expected: usize, got: usize },
}

/// Which side a division happens on: [`Side::Left`] solves `g·Q = f`,
/// [`Side::Right`] solves `Q·g = f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A finite sum `Σ c_a X(a)` in the quantum torus of a fixed [`SkewForm`].
///
/// Stored coefficients are never zero; all exponents share the form's rank.
/// Arithmetic between elements of different forms panics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusElement {
    form: SkewForm,
    terms: BTreeMap<Exponent, Coefficient>,
}

impl TorusElement {
    pub fn zero(form: SkewForm) -> Self {
        TorusElement {
            form,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(form: SkewForm) -> Self {
        let rank = form.rank();
        TorusElement::monomial(form, Exponent::zero(rank), Coefficient::one())
    }

    /// The single-term element `c · X(a)`.
    pub fn monomial(form: SkewForm, exponent: Exponent, coefficient: Coefficient) -> Self {
        assert_eq!(exponent.rank(), form.rank(), "monomial rank mismatch");
        let mut out = TorusElement::zero(form);
        out.add_term(exponent, coefficient);
        out
    }

    /// The scalar `c · X(0)`.
    pub fn scalar(form: SkewForm, coefficient: Coefficient) -> Self {
        let rank = form.rank();
        TorusElement::monomial(form, Exponent::zero(rank), coefficient)
    }

    pub fn form(&self) -> &SkewForm {
        &self.form
    }

    pub fn rank(&self) -> usize {
        self.form.rank()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterate `(exponent, coefficient)` pairs in lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Coefficient)> {
        self.terms.iter()
    }

    /// The coefficient at `a` (zero when absent).
    pub fn coefficient(&self, exponent: &Exponent) -> Coefficient {
        self.terms.get(exponent).cloned().unwrap_or_default()
    }

    /// The lexicographically least support exponent. It is always a minimal
    /// element of the support in the componentwise partial order.
    pub fn min_exponent(&self) -> Option<&Exponent> {
        self.terms.keys().next()
    }

    fn add_term(&mut self, exponent: Exponent, coefficient: Coefficient) {
        if coefficient.is_zero() {
            return;
        }
        assert_eq!(exponent.rank(), self.rank(), "term rank mismatch");
        match self.terms.entry(exponent) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coefficient);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = &*e.get() + &coefficient;
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn assert_same_form(&self, other: &TorusElement) {
        assert_eq!(
            self.form, other.form,
            "torus elements live over different skew forms"
        );
    }

    /// Multiply by a central scalar from `Z[q^{±1/2}, h]`.
    pub fn scalar_mul(&self, c: &Coefficient) -> TorusElement {
        let mut out = TorusElement::zero(self.form.clone());
        for (a, ca) in &self.terms {
            out.add_term(a.clone(), ca * c);
        }
        out
    }

    /// `self^n` for `n ≥ 0`; `power(x, 0) = 1`.
    pub fn power(&self, n: u32) -> TorusElement {
        let mut out = TorusElement::one(self.form.clone());
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// The bar-involution, applied coefficient-wise in the `X(a)` expansion.
    /// It is an anti-automorphism: `bar(x·y) = bar(y)·bar(x)`.
    pub fn bar(&self) -> TorusElement {
        let mut out = TorusElement::zero(self.form.clone());
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.bar());
        }
        out
    }

    /// True iff every coefficient lies in `Z_{≥0}[q^{±1/2}, h]`.
    pub fn is_positive(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }

    /// Specialize every coefficient (`q^{1/2} = 1` and/or `h = 0`).
    pub fn specialize(&self, q_to_one: bool, h_to_zero: bool) -> TorusElement {
        let mut out = TorusElement::zero(self.form.clone());
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c.specialize(q_to_one, h_to_zero));
        }
        out
    }

    /// Rewrite each term `c · X(a)` as a coefficient times the ordered word
    /// `X_1^{a_1} ... X_m^{a_m}`, using
    /// `X(a) = q^{(1/2) Σ_{i<j} λ_{ji} a_i a_j} X_1^{a_1} ... X_m^{a_m}`.
    pub fn to_standard_form(&self) -> Vec<(Coefficient, Vec<i64>)> {
        self.terms
            .iter()
            .map(|(a, c)| {
                let shift = standard_form_shift(&self.form, a);
                (c * &Coefficient::q_half_power(shift), a.entries().to_vec())
            })
            .collect()
    }

    /// Inverse of [`TorusElement::to_standard_form`].
    pub fn from_standard_form(form: SkewForm, items: &[(Coefficient, Vec<i64>)]) -> TorusElement {
        let mut out = TorusElement::zero(form);
        for (c, word) in items {
            let a = Exponent::new(word.clone());
            let shift = standard_form_shift(&out.form, &a);
            out.add_term(a, c * &Coefficient::q_half_power(-shift));
        }
        out
    }

    /// The pointed form: the unique componentwise-minimal support exponent
    /// and its unit coefficient. Errors if no such exponent exists or the
    /// minimal coefficient is not `±q^{r/2}`.
    pub fn pointed(&self) -> Result<PointedForm, NotPointedError> {
        let mut keys = self.terms.keys();
        let first = keys.next().ok_or(NotPointedError::Zero)?;
        let mut min = first.entries().to_vec();
        for a in keys {
            for (slot, &x) in min.iter_mut().zip(a.entries()) {
                if x < *slot {
                    *slot = x;
                }
            }
        }
        let candidate = Exponent::new(min);
        let coefficient = match self.terms.get(&candidate) {
            Some(c) => c,
            None => return Err(NotPointedError::NoMinimalTerm { candidate }),
        };
        match coefficient.as_unit_q_power() {
            Some(unit) => Ok(PointedForm {
                point: candidate,
                unit,
            }),
            None => Err(NotPointedError::NonUnitCoefficient {
                point: candidate,
                coefficient: coefficient.clone(),
            }),
        }
    }

    /// Parse an element from its JSON form, attaching the given skew form.
    pub fn from_json_with_form(
        form: SkewForm,
        value: &serde_json::Value,
    ) -> Result<TorusElement, ElementParseError> {
        let dto: TorusElementDto = serde_json::from_value(value.clone())?;
        if dto.rank != form.rank() {
            return Err(ElementParseError::RankMismatch {
                expected: form.rank(),
                got: dto.rank,
            });
        }
        let mut out = TorusElement::zero(form);
        for term in dto.terms {
            if term.exp.len() != out.rank() {
                return Err(ElementParseError::RankMismatch {
                    expected: out.rank(),
                    got: term.exp.len(),
                });
            }
            out.add_term(Exponent::new(term.exp), term.coeff);
        }
        Ok(out)
    }
}

fn standard_form_shift(form: &SkewForm, a: &Exponent) -> i64 {
    let m = form.rank();
    let mut acc: i128 = 0;
    for i in 0..m {
        for j in (i + 1)..m {
            acc += form.entry(j, i) as i128 * a.get(i) as i128 * a.get(j) as i128;
        }
    }
    i64::try_from(acc).expect("standard-form exponent exceeds i64")
}

impl Add for &TorusElement {
    type Output = TorusElement;

    fn add(self, rhs: &TorusElement) -> TorusElement {
        self.assert_same_form(rhs);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), c.clone());
        }
        out
    }
}

impl Sub for &TorusElement {
    type Output = TorusElement;

    fn sub(self, rhs: &TorusElement) -> TorusElement {
        self.assert_same_form(rhs);
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), -c);
        }
        out
    }
}

impl Mul for &TorusElement {
    type Output = TorusElement;

    fn mul(self, rhs: &TorusElement) -> TorusElement {
        self.assert_same_form(rhs);
        let mut out = TorusElement::zero(self.form.clone());
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                let half = self.form.pairing(a, b);
                out.add_term(a + b, &(ca * cb) * &Coefficient::q_half_power(half));
            }
        }
        out
    }
}

impl Neg for &TorusElement {
    type Output = TorusElement;

    fn neg(self) -> TorusElement {
        let mut out = TorusElement::zero(self.form.clone());
        for (a, c) in &self.terms {
            out.add_term(a.clone(), -c);
        }
        out
    }
}

impl Add for TorusElement {
    type Output = TorusElement;
    fn add(self, rhs: TorusElement) -> TorusElement {
        &self + &rhs
    }
}

impl Sub for TorusElement {
    type Output = TorusElement;
    fn sub(self, rhs: TorusElement) -> TorusElement {
        &self - &rhs
    }
}

impl Mul for TorusElement {
    type Output = TorusElement;
    fn mul(self, rhs: TorusElement) -> TorusElement {
        &self * &rhs
    }
}

impl Neg for TorusElement {
    type Output = TorusElement;
    fn neg(self) -> TorusElement {
        -&self
    }
}

/// Exact one-sided division with the default iteration cap.
///
/// `Side::Left` returns `Q` with `divisor·Q = dividend`; `Side::Right`
/// returns `Q` with `Q·divisor = dividend`. The divisor must be pointed with
/// a unit minimal coefficient; the product is re-verified before returning.
pub fn exact_divide(
    side: Side,
    divisor: &TorusElement,
    dividend: &TorusElement,
) -> Result<TorusElement, DivisionError> {
    exact_divide_with_cap(side, divisor, dividend, DIVISION_ITERATION_CAP)
}

/// [`exact_divide`] with an explicit iteration cap.
pub fn exact_divide_with_cap(
    side: Side,
    divisor: &TorusElement,
    dividend: &TorusElement,
    cap: usize,
) -> Result<TorusElement, DivisionError> {
    divisor.assert_same_form(dividend);
    let form = divisor.form().clone();
    let pivot = divisor.pointed()?;
    let unit_inv = pivot.unit.inverse().to_coefficient();

    let mut remainder = dividend.clone();
    let mut quotient = TorusElement::zero(form.clone());
    let mut steps = 0usize;
    while !remainder.is_zero() {
        if steps >= cap {
            return Err(DivisionError::NotExact {
                cap,
                remainder_terms: remainder.len(),
            });
        }
        steps += 1;
        // The lex-least exponent is componentwise minimal, so the divisor's
        // pointed term can cancel it exactly.
        let target = remainder.min_exponent().unwrap().clone();
        let c_target = remainder.coefficient(&target);
        let shift = &target - &pivot.point;
        let skew = match side {
            Side::Left => form.pairing(&pivot.point, &shift),
            Side::Right => form.pairing(&shift, &pivot.point),
        };
        let c = &(&c_target * &unit_inv) * &Coefficient::q_half_power(-skew);
        let step = TorusElement::monomial(form.clone(), shift, c);
        let product = match side {
            Side::Left => divisor * &step,
            Side::Right => &step * divisor,
        };
        remainder = &remainder - &product;
        quotient = &quotient + &step;
    }

    let check = match side {
        Side::Left => divisor * &quotient,
        Side::Right => &quotient * divisor,
    };
    assert_eq!(
        &check, dividend,
        "exact division failed its final re-verification"
    );
    Ok(quotient)
}

impl fmt::Display for TorusElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        // A lone scalar term prints as its coefficient.
        if self.terms.len() == 1 {
            let (a, c) = self.terms.iter().next().unwrap();
            if a.is_zero() {
                return write!(f, "{}", c);
            }
        }
        for (i, (a, c)) in self.terms.iter().enumerate() {
            let xpart = if a.is_zero() {
                None
            } else {
                Some(format!(
                    "X({})",
                    a.entries()
                        .iter()
                        .map(|x| x.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                ))
            };
            let (negative, body) = if c.len() == 1 {
                let (&(r, d), n) = c.iter().next().unwrap();
                (
                    num_traits::Signed::is_negative(n),
                    render_monomial(&num_traits::Signed::abs(n), r, d, xpart.as_deref()),
                )
            } else {
                match &xpart {
                    Some(x) => (false, format!("({})*{}", c, x)),
                    None => (false, format!("({})", c)),
                }
            };
            if i == 0 {
                if negative {
                    write!(f, "-{}", body)?;
                } else {
                    write!(f, "{}", body)?;
                }
            } else if negative {
                write!(f, " - {}", body)?;
            } else {
                write!(f, " + {}", body)?;
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TorusTermDto {
    exp: Vec<i64>,
    coeff: Coefficient,
}

#[derive(Serialize, Deserialize)]
struct TorusElementDto {
    rank: usize,
    terms: Vec<TorusTermDto>,
}

impl Serialize for TorusElement {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let dto = TorusElementDto {
            rank: self.rank(),
            terms: self
                .terms
                .iter()
                .map(|(a, c)| TorusTermDto {
                    exp: a.entries().to_vec(),
                    coeff: c.clone(),
                })
                .collect(),
        };
        dto.serialize(serializer)
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;

    /// Build a rank-2 Kronecker-torus element from `(exponent, coefficient)`
    /// pairs.
    pub fn element(terms: &[((i64, i64), Coefficient)]) -> TorusElement {
        let mut out = TorusElement::zero(SkewForm::kronecker());
        for ((a, b), c) in terms {
            out = &out
                + &TorusElement::monomial(SkewForm::kronecker(), (*a, *b).into(), c.clone());
        }
        out
    }

    pub fn one_term(a: i64, b: i64) -> TorusElement {
        TorusElement::monomial(SkewForm::kronecker(), (a, b).into(), Coefficient::one())
    }

    /// The Laurent expansion of the cluster variable `X_3`.
    pub fn x3() -> TorusElement {
        element(&[
            ((-1, 2), Coefficient::one()),
            ((-1, 1), Coefficient::h()),
            ((-1, 0), Coefficient::one()),
        ])
    }

    /// The Laurent expansion of the cluster variable `X_0`.
    pub fn x0() -> TorusElement {
        element(&[
            ((2, -1), Coefficient::one()),
            ((1, -1), Coefficient::h()),
            ((0, -1), Coefficient::one()),
        ])
    }

    /// The imaginary element `X_δ` in closed form.
    pub fn x_delta() -> TorusElement {
        element(&[
            ((-1, -1), Coefficient::one()),
            ((-1, 0), Coefficient::h()),
            ((0, -1), Coefficient::h()),
            ((-1, 1), Coefficient::one()),
            ((1, -1), Coefficient::one()),
        ])
    }
}
