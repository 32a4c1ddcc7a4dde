//! Exact symbolic computation in a generalized quantum cluster algebra of
//! Kronecker type.
//!
//! The crate implements, over the coefficient ring `Z[q^{±1/2}, h]`:
//!
//! - [`coeff`]: the commutative coefficient ring with bar-involution,
//!   positivity test and specialization at `q = 1`, `h = 0`;
//! - [`torus`]: the skew quantum torus of noncommutative Laurent monomials
//!   `X(a)`, `a ∈ Z^m`, with `X(a)X(b) = q^{Λ(a,b)/2} X(a+b)`, pointed-term
//!   analysis and exact one-sided division;
//! - [`seed`]: compatible pairs, exchange-matrix and Λ mutation, and one-step
//!   mutation of quantum seeds with polynomial exchange relations;
//! - [`kronecker`]: the rank-2 engine generating every cluster variable `X_k`
//!   from the exchange relation `X_{k-1}X_{k+1} = qX_k^2 + q^{1/2}hX_k + 1`,
//!   the imaginary element `X_δ`, Chebyshev elements `F_n(X_δ)`, and machine
//!   verification of the cluster multiplication formulas;
//! - [`basis`]: the positive bar-invariant basis indexed by `Z^2`, greedy
//!   expansion of algebra elements, and structure constants;
//! - [`expr`] and [`cli`]: an expression parser/evaluator and the `gqca`
//!   command-line front end.
//!
//! All arithmetic is exact: integer coefficients are arbitrary precision and
//! every identity check is a structural equality of canonical forms.

pub mod basis;
pub mod cache;
pub mod cli;
pub mod coeff;
pub mod expr;
pub mod kronecker;
pub mod seed;
pub mod torus;

pub use basis::{Basis, BasisExpansion, BasisIndex};
pub use coeff::{Coefficient, UnitPower};
pub use kronecker::{Formula, KroneckerAlgebra, VerificationReport};
pub use seed::{CompatiblePair, ExchangeMatrix, HVector, QuantumSeed};
pub use torus::{Exponent, SkewForm, Side, TorusElement};
