//! A small expression language over the algebra.
//!
//! Atoms: `X[k]` (cluster variable), `X(a1,a2)` (torus monomial), `F[n]`
//! (Chebyshev element), `Xd` (the imaginary element), `q`, `qh` (= `q^(1/2)`),
//! `h`, and integer literals. Operators `+ - * ^` with `^` binding tighter
//! than `*` tighter than `+`/`-`; multiplication is explicit and
//! order-sensitive. Exponents are integers, with two extensions: a negative
//! exponent inverts a unit monomial, and `q^(r/2)` accepts odd half-powers of
//! `q`. Everything the canonical text rendering emits parses back.

use num_bigint::BigInt;
use thiserror::Error;

use crate::coeff::Coefficient;
use crate::kronecker::{KroneckerAlgebra, VariableError};
use crate::torus::{Exponent, TorusElement};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Variable(#[from] VariableError),
    #[error("negative power of a non-invertible element; only unit monomials ±q^(r/2)*X(a) invert")]
    NotInvertible,
    #[error("half-integer power is only defined for scalar powers of q with an even result")]
    FractionalPower,
    #[error("exponent {0} is too large")]
    ExponentTooLarge(i64),
    #[error("monomial exponent must have {expected} entries, got {got}")]
    MonomialRank { expected: usize, got: usize },
}

/// Maximum absolute value accepted for `^` exponents.
pub const MAX_EXPONENT: i64 = 4096;

/// Abstract syntax of an expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expression {
    Variable(i64),
    Monomial(Vec<i64>),
    Chebyshev(i64),
    Delta,
    Q,
    QHalf,
    H,
    Integer(BigInt),
    Neg(Box<Expression>),
    Add(Box<Expression>, Box<Expression>),
    Sub(Box<Expression>, Box<Expression>),
    Mul(Box<Expression>, Box<Expression>),
    Pow {
        base: Box<Expression>,
        /// Exponent numerator; the exponent is `numerator` or `numerator/2`.
        numerator: i64,
        halved: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Ident(String),
    Int(BigInt),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
}

fn tokenize(input: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let token = match c {
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '^' => Token::Caret,
            '/' => Token::Slash,
            ',' => Token::Comma,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '[' => Token::LBracket,
            ']' => Token::RBracket,
            _ if c.is_ascii_digit() => {
                let mut j = i;
                while j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                    j += 1;
                }
                let literal = &input[i..j];
                i = j;
                out.push((
                    Token::Int(literal.parse().expect("digit run parses as integer")),
                    start,
                ));
                continue;
            }
            _ if c.is_ascii_alphabetic() => {
                let mut j = i;
                while j < bytes.len() && (bytes[j] as char).is_ascii_alphanumeric() {
                    j += 1;
                }
                let word = &input[i..j];
                i = j;
                out.push((Token::Ident(word.to_string()), start));
                continue;
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character {:?}", c),
                })
            }
        };
        out.push((token, start));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [(Token, usize)],
    pos: usize,
    input_len: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|&(_, p)| p)
            .unwrap_or(self.input_len)
    }

    fn advance(&mut self) -> Option<&Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t);
        self.pos += 1;
        t
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            position: self.position(),
            message: message.into(),
        }
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn parse_signed_int(&mut self) -> Result<i64, ParseError> {
        let negative = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        match self.advance().cloned() {
            Some(Token::Int(n)) => {
                let v: i64 = i64::try_from(&n).map_err(|_| ParseError {
                    position: self.tokens[self.pos - 1].1,
                    message: "integer literal out of range".to_string(),
                })?;
                Ok(if negative { -v } else { v })
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected an integer"))
            }
        }
    }

    fn parse_expr(&mut self) -> Result<Expression, ParseError> {
        let mut acc = if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            Expression::Neg(Box::new(self.parse_term()?))
        } else {
            self.parse_term()?
        };
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    acc = Expression::Add(Box::new(acc), Box::new(rhs));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    let rhs = self.parse_term()?;
                    acc = Expression::Sub(Box::new(acc), Box::new(rhs));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expression, ParseError> {
        let mut acc = self.parse_factor()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            let rhs = self.parse_factor()?;
            acc = Expression::Mul(Box::new(acc), Box::new(rhs));
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Expression, ParseError> {
        let base = self.parse_atom()?;
        if self.peek() != Some(&Token::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        // exponent: INT | -INT | ( INT ) | ( -INT ) | ( ±INT / 2 )
        let (numerator, halved) = if self.peek() == Some(&Token::LParen) {
            self.pos += 1;
            let n = self.parse_signed_int()?;
            let halved = if self.peek() == Some(&Token::Slash) {
                self.pos += 1;
                match self.advance().cloned() {
                    Some(Token::Int(two)) if two == BigInt::from(2) => true,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("only /2 denominators are supported"));
                    }
                }
            } else {
                false
            };
            self.expect(Token::RParen, "closing parenthesis in exponent")?;
            (n, halved)
        } else {
            (self.parse_signed_int()?, false)
        };
        Ok(Expression::Pow {
            base: Box::new(base),
            numerator,
            halved,
        })
    }

    fn parse_atom(&mut self) -> Result<Expression, ParseError> {
        match self.peek().cloned() {
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.parse_expr()?;
                self.expect(Token::RParen, "closing parenthesis")?;
                Ok(inner)
            }
            Some(Token::Int(n)) => {
                self.pos += 1;
                Ok(Expression::Integer(n))
            }
            Some(Token::Ident(word)) => {
                self.pos += 1;
                match word.as_str() {
                    "q" => Ok(Expression::Q),
                    "qh" => Ok(Expression::QHalf),
                    "h" => Ok(Expression::H),
                    "Xd" => Ok(Expression::Delta),
                    "X" => match self.peek() {
                        Some(Token::LBracket) => {
                            self.pos += 1;
                            let k = self.parse_signed_int()?;
                            self.expect(Token::RBracket, "closing bracket")?;
                            Ok(Expression::Variable(k))
                        }
                        Some(Token::LParen) => {
                            self.pos += 1;
                            let mut entries = vec![self.parse_signed_int()?];
                            while self.peek() == Some(&Token::Comma) {
                                self.pos += 1;
                                entries.push(self.parse_signed_int()?);
                            }
                            self.expect(Token::RParen, "closing parenthesis")?;
                            Ok(Expression::Monomial(entries))
                        }
                        _ => Err(self.error("expected [k] or (a1,a2) after X")),
                    },
                    "F" => {
                        self.expect(Token::LBracket, "[n] after F")?;
                        let n = self.parse_signed_int()?;
                        self.expect(Token::RBracket, "closing bracket")?;
                        Ok(Expression::Chebyshev(n))
                    }
                    other => {
                        self.pos -= 1;
                        Err(self.error(format!("unknown name {other:?}")))
                    }
                }
            }
            _ => Err(self.error("expected an expression atom")),
        }
    }
}

/// Parse an expression. Errors carry the byte position of the failure.
pub fn parse(input: &str) -> Result<Expression, ParseError> {
    let tokens = tokenize(input)?;
    let mut parser = Parser {
        tokens: &tokens,
        pos: 0,
        input_len: input.len(),
    };
    let expr = parser.parse_expr()?;
    if parser.pos != tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(expr)
}

/// Evaluate an expression in the initial torus of the given engine.
/// Multiplication is evaluated in the written order.
pub fn evaluate(expr: &Expression, algebra: &KroneckerAlgebra) -> Result<TorusElement, EvalError> {
    let form = algebra.form().clone();
    match expr {
        Expression::Variable(k) => Ok(algebra.cluster_var(*k)?),
        Expression::Monomial(entries) => {
            if entries.len() != form.rank() {
                return Err(EvalError::MonomialRank {
                    expected: form.rank(),
                    got: entries.len(),
                });
            }
            Ok(TorusElement::monomial(
                form,
                Exponent::new(entries.clone()),
                Coefficient::one(),
            ))
        }
        Expression::Chebyshev(n) => Ok(algebra.chebyshev(*n)),
        Expression::Delta => Ok(algebra.x_delta()),
        Expression::Q => Ok(TorusElement::scalar(form, Coefficient::q_power(1))),
        Expression::QHalf => Ok(TorusElement::scalar(form, Coefficient::q_half_power(1))),
        Expression::H => Ok(TorusElement::scalar(form, Coefficient::h())),
        Expression::Integer(n) => Ok(TorusElement::scalar(
            form,
            Coefficient::monomial(0, 0, n.clone()),
        )),
        Expression::Neg(inner) => Ok(-&evaluate(inner, algebra)?),
        Expression::Add(l, r) => Ok(&evaluate(l, algebra)? + &evaluate(r, algebra)?),
        Expression::Sub(l, r) => Ok(&evaluate(l, algebra)? - &evaluate(r, algebra)?),
        Expression::Mul(l, r) => Ok(&evaluate(l, algebra)? * &evaluate(r, algebra)?),
        Expression::Pow {
            base,
            numerator,
            halved,
        } => {
            if numerator.abs() > MAX_EXPONENT {
                return Err(EvalError::ExponentTooLarge(*numerator));
            }
            let base = evaluate(base, algebra)?;
            if *halved {
                return half_power(&base, *numerator);
            }
            if *numerator >= 0 {
                Ok(base.power(*numerator as u32))
            } else {
                Ok(invert_unit_monomial(&base)?.power((-numerator) as u32))
            }
        }
    }
}

/// Parse and evaluate in one step.
pub fn eval_str(input: &str, algebra: &KroneckerAlgebra) -> Result<TorusElement, EvalError> {
    let expr = parse(input)?;
    evaluate(&expr, algebra)
}

/// `(±q^{r/2} X(a))^{-1} = ±q^{-r/2} X(-a)`.
fn invert_unit_monomial(x: &TorusElement) -> Result<TorusElement, EvalError> {
    if x.len() != 1 {
        return Err(EvalError::NotInvertible);
    }
    let (a, c) = x.terms().next().unwrap();
    let unit = c.as_unit_q_power().ok_or(EvalError::NotInvertible)?;
    Ok(TorusElement::monomial(
        x.form().clone(),
        -a,
        unit.inverse().to_coefficient(),
    ))
}

/// `x^{n/2}` for a scalar `q`-power `x`, when the result stays in the ring.
fn half_power(x: &TorusElement, numerator: i64) -> Result<TorusElement, EvalError> {
    if x.len() != 1 {
        return Err(EvalError::FractionalPower);
    }
    let (a, c) = x.terms().next().unwrap();
    if !a.is_zero() {
        return Err(EvalError::FractionalPower);
    }
    let unit = c.as_unit_q_power().ok_or(EvalError::FractionalPower)?;
    if unit.sign != 1 || (unit.half * numerator) % 2 != 0 {
        return Err(EvalError::FractionalPower);
    }
    Ok(TorusElement::scalar(
        x.form().clone(),
        Coefficient::q_half_power(unit.half * numerator / 2),
    ))
}
