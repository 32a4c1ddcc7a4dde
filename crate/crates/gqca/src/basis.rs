//! The positive bar-invariant basis and expansion into it.
//!
//! The basis consists of the identity, the normalized cluster monomials
//! `q^{-a1·a2/2} X_m^{a1} X_{m+1}^{a2}` over consecutive variables, and the
//! Chebyshev elements `F_n(X_δ)`. Every basis element is pointed, and the map
//! sending an element to its pointing exponent is a bijection onto `Z^2`:
//! `F_n` sits at `(-n,-n)` on the negative diagonal, and each pair of
//! consecutive variable pointing vectors spans one unimodular cone of the
//! complement. [`index_from_point`] inverts that bijection exactly, which is
//! what drives the greedy expansion: repeatedly look up the basis element
//! pointed at the remainder's minimal exponent and subtract it off.

use std::collections::BTreeMap;
use std::sync::Mutex;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::kronecker::{KroneckerAlgebra, VariableError, VerificationReport};
use crate::torus::TorusElement;

/// Iteration cap for [`Basis::expand`]; reaching it reports
/// [`ExpansionError::NotInSpan`].
pub const EXPANSION_ITERATION_CAP: usize = 10_000;

/// Canonical label of a basis element.
///
/// Canonical form: `(a1, a2) = (0, 0)` is [`BasisIndex::Identity`]; pure
/// powers `X_{m+1}^a` are stored as `ClusterMonomial { m: m+1, a1: a, a2: 0 }`,
/// so a stored monomial always has `a1 ≥ 1`; `Imaginary { n }` with `n ≥ 1`
/// labels `F_n(X_δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BasisIndex {
    Identity,
    #[serde(rename = "monomial")]
    ClusterMonomial { m: i64, a1: u32, a2: u32 },
    Imaginary { n: u32 },
}

impl BasisIndex {
    /// The canonical index of `q^{-a1·a2/2} X_m^{a1} X_{m+1}^{a2}`.
    pub fn monomial(m: i64, a1: u32, a2: u32) -> Self {
        match (a1, a2) {
            (0, 0) => BasisIndex::Identity,
            (0, a) => BasisIndex::ClusterMonomial {
                m: m + 1,
                a1: a,
                a2: 0,
            },
            _ => BasisIndex::ClusterMonomial { m, a1, a2 },
        }
    }

    /// The index of `F_n(X_δ)`, `n ≥ 1`.
    pub fn imaginary(n: u32) -> Self {
        assert!(n >= 1, "imaginary indices start at 1");
        BasisIndex::Imaginary { n }
    }

    /// The index of the single cluster variable `X_k`.
    pub fn variable(k: i64) -> Self {
        BasisIndex::ClusterMonomial { m: k, a1: 1, a2: 0 }
    }

    pub fn is_canonical(&self) -> bool {
        match *self {
            BasisIndex::Identity => true,
            BasisIndex::ClusterMonomial { a1, .. } => a1 >= 1,
            BasisIndex::Imaginary { n } => n >= 1,
        }
    }
}

impl std::fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            BasisIndex::Identity => write!(f, "1"),
            BasisIndex::ClusterMonomial { m, a1, a2 } => {
                if a1 == 1 {
                    write!(f, "X[{}]", m)?;
                } else {
                    write!(f, "X[{}]^{}", m, a1)?;
                }
                if a2 == 1 {
                    write!(f, "*X[{}]", m + 1)?;
                } else if a2 > 1 {
                    write!(f, "*X[{}]^{}", m + 1, a2)?;
                }
                Ok(())
            }
            BasisIndex::Imaginary { n } => write!(f, "F[{}]", n),
        }
    }
}

/// The pointing exponent of the cluster variable `X_k`:
/// `(2-k, 3-k)` for `k ≥ 2` and `(k, k-1)` for `k ≤ 1`.
pub fn variable_pointing(k: i64) -> (i64, i64) {
    if k >= 2 {
        (2 - k, 3 - k)
    } else {
        (k, k - 1)
    }
}

/// The pointing exponent of a basis element. Additive on monomial exponents.
pub fn pointing_exponent(index: &BasisIndex) -> (i64, i64) {
    match *index {
        BasisIndex::Identity => (0, 0),
        BasisIndex::Imaginary { n } => (-(n as i64), -(n as i64)),
        BasisIndex::ClusterMonomial { m, a1, a2 } => {
            let u = variable_pointing(m);
            let v = variable_pointing(m + 1);
            (
                a1 as i64 * u.0 + a2 as i64 * v.0,
                a1 as i64 * u.1 + a2 as i64 * v.1,
            )
        }
    }
}

/// The inverse of [`pointing_exponent`]: the unique canonical index pointed
/// at `p`. Total on `Z^2`.
pub fn index_from_point(p: (i64, i64)) -> BasisIndex {
    let (x, y) = p;
    if x == y && x < 0 {
        return BasisIndex::imaginary((-x) as u32);
    }
    if (x, y) == (0, 0) {
        return BasisIndex::Identity;
    }
    let window = x.abs() + y.abs() + 3;
    let mut hits: Vec<BasisIndex> = Vec::new();
    for m in -window..=window {
        let u = variable_pointing(m);
        let v = variable_pointing(m + 1);
        // consecutive pointing vectors always have determinant 1
        debug_assert_eq!(u.0 * v.1 - u.1 * v.0, 1);
        let a1 = x * v.1 - y * v.0;
        let a2 = u.0 * y - u.1 * x;
        if a1 >= 0 && a2 >= 0 && (a1 > 0 || a2 > 0) {
            let ix = BasisIndex::monomial(m, a1 as u32, a2 as u32);
            if !hits.contains(&ix) {
                hits.push(ix);
            }
        }
    }
    assert_eq!(
        hits.len(),
        1,
        "pointing bijection violated at {:?}: candidates {:?}",
        p,
        hits
    );
    hits[0]
}

/// A finite coordinate vector over the basis: `BasisIndex → Coefficient`
/// with no zero coordinates stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BasisExpansion {
    coords: BTreeMap<BasisIndex, Coefficient>,
}

impl BasisExpansion {
    pub fn new() -> Self {
        BasisExpansion::default()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn coordinate(&self, index: &BasisIndex) -> Coefficient {
        self.coords.get(index).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisIndex, &Coefficient)> {
        self.coords.iter()
    }

    pub fn insert(&mut self, index: BasisIndex, coefficient: Coefficient) {
        if coefficient.is_zero() {
            return;
        }
        match self.coords.entry(index) {
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

    pub fn add(&self, other: &BasisExpansion) -> BasisExpansion {
        let mut out = self.clone();
        for (ix, c) in &other.coords {
            out.insert(*ix, c.clone());
        }
        out
    }

    /// True iff every coordinate lies in `Z_{≥0}[q^{±1/2}, h]`.
    pub fn is_positive(&self) -> bool {
        self.coords.values().all(|c| c.is_positive())
    }
}

impl Serialize for BasisExpansion {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct CoordDto<'a> {
            index: &'a BasisIndex,
            coeff: &'a Coefficient,
        }
        #[derive(Serialize)]
        struct Dto<'a> {
            coords: Vec<CoordDto<'a>>,
        }
        Dto {
            coords: self
                .coords
                .iter()
                .map(|(index, coeff)| CoordDto { index, coeff })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BasisExpansion {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct CoordDto {
            index: BasisIndex,
            coeff: Coefficient,
        }
        #[derive(Deserialize)]
        struct Dto {
            coords: Vec<CoordDto>,
        }
        let dto = Dto::deserialize(deserializer)?;
        let mut out = BasisExpansion::new();
        for c in dto.coords {
            out.insert(c.index, c.coeff);
        }
        Ok(out)
    }
}

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("element is not in the basis span: iteration cap {cap} reached; remainder has {} terms", remainder.len())]
    NotInSpan {
        cap: usize,
        remainder: Box<TorusElement>,
    },
    #[error(transparent)]
    Variable(#[from] VariableError),
}

/// Expansion machinery over a [`KroneckerAlgebra`], with a cache of realized
/// basis elements.
pub struct Basis<'a> {
    algebra: &'a KroneckerAlgebra,
    cache: Mutex<BTreeMap<BasisIndex, TorusElement>>,
}

impl<'a> Basis<'a> {
    pub fn new(algebra: &'a KroneckerAlgebra) -> Self {
        Basis {
            algebra,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn algebra(&self) -> &KroneckerAlgebra {
        self.algebra
    }

    /// The Laurent expansion of a basis element in the initial torus.
    pub fn element(&self, index: &BasisIndex) -> Result<TorusElement, VariableError> {
        if let Some(x) = self.cache.lock().unwrap().get(index).cloned() {
            return Ok(x);
        }
        let out = match *index {
            BasisIndex::Identity => TorusElement::one(self.algebra.form().clone()),
            BasisIndex::Imaginary { n } => self.algebra.chebyshev(n as i64),
            BasisIndex::ClusterMonomial { m, a1, a2 } => {
                let first = self.algebra.cluster_var(m)?.power(a1);
                let second = self.algebra.cluster_var(m + 1)?.power(a2);
                (&first * &second)
                    .scalar_mul(&Coefficient::q_half_power(-(a1 as i64) * (a2 as i64)))
            }
        };
        self.cache.lock().unwrap().insert(*index, out.clone());
        Ok(out)
    }

    /// Greedy expansion of `z` into basis coordinates, with the default
    /// iteration cap. The result is re-verified by expansion before it is
    /// returned.
    pub fn expand(&self, z: &TorusElement) -> Result<BasisExpansion, ExpansionError> {
        self.expand_with_cap(z, EXPANSION_ITERATION_CAP)
    }

    /// [`Basis::expand`] with an explicit iteration cap.
    pub fn expand_with_cap(
        &self,
        z: &TorusElement,
        cap: usize,
    ) -> Result<BasisExpansion, ExpansionError> {
        let mut remainder = z.clone();
        let mut coords = BasisExpansion::new();
        let mut steps = 0usize;
        while !remainder.is_zero() {
            if steps >= cap {
                return Err(ExpansionError::NotInSpan {
                    cap,
                    remainder: Box::new(remainder),
                });
            }
            steps += 1;
            let target = remainder.min_exponent().unwrap().clone();
            let point = (target.get(0), target.get(1));
            let index = index_from_point(point);
            let element = self.element(&index)?;
            // The bijection guarantees the element is pointed exactly at the
            // target; a non-unit minimal coefficient would break the greedy
            // step and is surfaced loudly rather than assumed away.
            let pointed = element.pointed().unwrap_or_else(|e| {
                panic!("basis element {index} is not pointed with a unit minimal coefficient: {e}")
            });
            assert_eq!(
                (pointed.point.get(0), pointed.point.get(1)),
                point,
                "basis element {index} is pointed away from its bijection slot"
            );
            let coefficient =
                &remainder.coefficient(&target) * &pointed.unit.inverse().to_coefficient();
            remainder = &remainder - &element.scalar_mul(&coefficient);
            coords.insert(index, coefficient);
        }
        let rebuilt = self.realize(&coords)?;
        assert_eq!(
            &rebuilt, z,
            "basis expansion failed its final re-verification"
        );
        Ok(coords)
    }

    /// `Σ coords[ix] · element(ix)`.
    pub fn realize(&self, coords: &BasisExpansion) -> Result<TorusElement, VariableError> {
        let mut out = TorusElement::zero(self.algebra.form().clone());
        for (ix, c) in coords.iter() {
            out = &out + &self.element(ix)?.scalar_mul(c);
        }
        Ok(out)
    }

    /// Basis coordinates of the product of two basis elements.
    pub fn structure_constants(
        &self,
        left: &BasisIndex,
        right: &BasisIndex,
    ) -> Result<BasisExpansion, ExpansionError> {
        let product = &self.element(left)? * &self.element(right)?;
        self.expand(&product)
    }

    /// Report-producing check that `expand(element(ix)) = {ix: 1}`.
    pub fn verify_roundtrip(&self, index: &BasisIndex) -> Result<VerificationReport, ExpansionError> {
        let p = pointing_exponent(index);
        let element = self.element(index)?;
        let expansion = self.expand(&element)?;
        let mut expected = BasisExpansion::new();
        expected.insert(*index, Coefficient::one());
        let ok = expansion == expected && index_from_point(p) == *index;
        Ok(VerificationReport::flag(
            "basis-roundtrip",
            &[("px", p.0), ("py", p.1)],
            ok,
        ))
    }

    /// Report-producing positivity check of one structure-constant vector.
    pub fn verify_structure_positivity(
        &self,
        left: &BasisIndex,
        right: &BasisIndex,
    ) -> Result<VerificationReport, ExpansionError> {
        let lp = pointing_exponent(left);
        let rp = pointing_exponent(right);
        let constants = self.structure_constants(left, right)?;
        Ok(VerificationReport::flag(
            "structure-positivity",
            &[
                ("p1x", lp.0),
                ("p1y", lp.1),
                ("p2x", rp.0),
                ("p2y", rp.1),
            ],
            constants.is_positive(),
        ))
    }

    /// Report-producing check that `bar` fixes a basis element.
    pub fn verify_bar_invariance(
        &self,
        index: &BasisIndex,
    ) -> Result<VerificationReport, VariableError> {
        let element = self.element(index)?;
        let p = pointing_exponent(index);
        Ok(VerificationReport::compare(
            "bar-basis",
            &[("px", p.0), ("py", p.1)],
            &element.bar(),
            &element,
        ))
    }
}

/// True iff every coefficient of the Laurent expansion is positive.
///
/// Positivity is checked in the initial cluster; shifted windows of the
/// variable family provide further spot checks of the same property.
pub fn is_positive_element(z: &TorusElement) -> bool {
    z.is_positive()
}

/// Specialize every coordinate at `q = 1`, `h = 0`, yielding integers.
pub fn specialize_expansion(expansion: &BasisExpansion) -> BTreeMap<BasisIndex, BigInt> {
    let mut out = BTreeMap::new();
    for (ix, c) in expansion.iter() {
        let s = c
            .specialize(true, true)
            .as_integer()
            .expect("full specialization is always an integer");
        if s != BigInt::from(0) {
            out.insert(*ix, s);
        }
    }
    out
}
