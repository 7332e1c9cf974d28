//! Parser for textual defining-function expressions.
//!
//! Grammar (conjugates are written `conj(zk)`, `abs2(x)` is sugar for
//! `x*conj(x)`, and only exact rational literals are accepted):
//!
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor ("*" factor)*
//! factor := atom ("^" nat)? | "-" factor
//! atom   := rational | "i" | var | "conj" "(" expr ")"
//!         | "abs2" "(" expr ")" | "(" expr ")"
//! var    := "z1".."z4"
//! rational := nat ("/" nat)?
//! ```

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::context::{BaseVar, VarContext};
use crate::error::AlgebraError;
use crate::rational::GaussRational;
use crate::series::Series;

/// Maximum accepted input size in bytes.
pub const MAX_INPUT_BYTES: usize = 64 * 1024;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    Lexical(char),
    #[error("unbalanced parentheses")]
    UnbalancedParen,
    #[error("exponent must be a nonnegative integer")]
    NegativeExponent,
    #[error("exponent must be an integer")]
    FractionalExponent,
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("unexpected token {0}")]
    UnexpectedToken(String),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("zero denominator in rational literal")]
    ZeroDenominator,
    #[error("input exceeds {MAX_INPUT_BYTES} bytes")]
    InputTooLarge,
}

/// A parse failure with 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at line {line}, column {col}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: u32,
    pub col: u32,
}

/// Errors while lowering an AST to a series.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LowerError {
    #[error("expression has a term of total degree {found}, beyond the truncation order {order}")]
    DegreeExceedsOrder { found: u32, order: u32 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// AST for defining-function expressions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Rational(BigRational),
    ImaginaryUnit,
    Var(usize), // 0..3 for z1..z4
    Conj(Box<Expr>),
    Abs2(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Nat(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Nat(n) => write!(f, "'{n}'"),
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Plus => write!(f, "'+'"),
            Tok::Minus => write!(f, "'-'"),
            Tok::Star => write!(f, "'*'"),
            Tok::Caret => write!(f, "'^'"),
            Tok::Slash => write!(f, "'/'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: u32,
    col: u32,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            chars: src.char_indices().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<(usize, char)> {
        let next = self.chars.next();
        if let Some((_, ch)) = next {
            if ch == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        next
    }

    fn tokenize(mut self) -> Result<Vec<Spanned>, ParseError> {
        let mut out = Vec::new();
        while let Some(&(start, ch)) = self.chars.peek() {
            if ch.is_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match ch {
                '+' => {
                    self.bump();
                    Tok::Plus
                }
                '-' => {
                    self.bump();
                    Tok::Minus
                }
                '*' => {
                    self.bump();
                    Tok::Star
                }
                '^' => {
                    self.bump();
                    Tok::Caret
                }
                '/' => {
                    self.bump();
                    Tok::Slash
                }
                '(' => {
                    self.bump();
                    Tok::LParen
                }
                ')' => {
                    self.bump();
                    Tok::RParen
                }
                c if c.is_ascii_digit() => {
                    let mut end = start;
                    while let Some(&(i, c2)) = self.chars.peek() {
                        if c2.is_ascii_digit() {
                            end = i;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let text = &self.src[start..=end];
                    Tok::Nat(text.parse::<BigInt>().expect("digits parse"))
                }
                c if c.is_ascii_alphabetic() => {
                    let mut end = start;
                    while let Some(&(i, c2)) = self.chars.peek() {
                        if c2.is_ascii_alphanumeric() {
                            end = i;
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    Tok::Ident(self.src[start..=end].to_string())
                }
                other => return Err(self.err(ParseErrorKind::Lexical(other))),
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    end_line: u32,
    end_col: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        let (line, col) = self.here();
        ParseError { kind, line, col }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, on_missing: ParseErrorKind) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if *t == tok => {
                self.bump();
                Ok(())
            }
            Some(t) => Err(self.err(ParseErrorKind::UnexpectedToken(t.to_string()))),
            None => Err(self.err(on_missing)),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while let Some(Tok::Star) = self.peek() {
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if let Some(Tok::Minus) = self.peek() {
            self.bump();
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        let atom = self.atom()?;
        if let Some(Tok::Caret) = self.peek() {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(atom), n));
        }
        Ok(atom)
    }

    /// Exponent after `^`: a natural number, optionally parenthesized so that
    /// `z1^(-1)` reports NegativeExponent rather than a generic token error.
    fn exponent(&mut self) -> Result<u32, ParseError> {
        let parens = matches!(self.peek(), Some(Tok::LParen));
        if parens {
            self.bump();
        }
        if matches!(self.peek(), Some(Tok::Minus)) {
            return Err(self.err(ParseErrorKind::NegativeExponent));
        }
        let n = match self.bump() {
            Some(Tok::Nat(n)) => n,
            Some(t) => return Err(self.err(ParseErrorKind::UnexpectedToken(t.to_string()))),
            None => return Err(self.err(ParseErrorKind::UnexpectedEnd)),
        };
        if matches!(self.peek(), Some(Tok::Slash)) {
            return Err(self.err(ParseErrorKind::FractionalExponent));
        }
        if parens {
            self.expect(Tok::RParen, ParseErrorKind::UnbalancedParen)?;
        }
        u32::try_from(&n).map_err(|_| self.err(ParseErrorKind::UnexpectedToken(format!("'{n}'"))))
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some(Tok::Nat(num)) => {
                if let Some(Tok::Slash) = self.peek() {
                    self.bump();
                    match self.bump() {
                        Some(Tok::Nat(den)) => {
                            if den == BigInt::from(0) {
                                return Err(self.err(ParseErrorKind::ZeroDenominator));
                            }
                            Ok(Expr::Rational(BigRational::new(num, den)))
                        }
                        Some(t) => Err(self.err(ParseErrorKind::UnexpectedToken(t.to_string()))),
                        None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
                    }
                } else {
                    Ok(Expr::Rational(BigRational::from_integer(num)))
                }
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "i" => Ok(Expr::ImaginaryUnit),
                "z1" => Ok(Expr::Var(0)),
                "z2" => Ok(Expr::Var(1)),
                "z3" => Ok(Expr::Var(2)),
                "z4" => Ok(Expr::Var(3)),
                "conj" => {
                    self.expect(Tok::LParen, ParseErrorKind::UnbalancedParen)?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, ParseErrorKind::UnbalancedParen)?;
                    Ok(Expr::Conj(Box::new(inner)))
                }
                "abs2" => {
                    self.expect(Tok::LParen, ParseErrorKind::UnbalancedParen)?;
                    let inner = self.expr()?;
                    self.expect(Tok::RParen, ParseErrorKind::UnbalancedParen)?;
                    Ok(Expr::Abs2(Box::new(inner)))
                }
                other => Err(ParseError {
                    kind: ParseErrorKind::UnknownIdentifier(other.to_string()),
                    line: self.toks[self.pos - 1].line,
                    col: self.toks[self.pos - 1].col,
                }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, ParseErrorKind::UnbalancedParen)?;
                Ok(inner)
            }
            Some(Tok::RParen) => Err(ParseError {
                kind: ParseErrorKind::UnbalancedParen,
                line: self.toks[self.pos - 1].line,
                col: self.toks[self.pos - 1].col,
            }),
            Some(t) => Err(self.err(ParseErrorKind::UnexpectedToken(t.to_string()))),
            None => Err(self.err(ParseErrorKind::UnexpectedEnd)),
        }
    }
}

/// Parse UTF-8 text into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.len() > MAX_INPUT_BYTES {
        return Err(ParseError {
            kind: ParseErrorKind::InputTooLarge,
            line: 1,
            col: 1,
        });
    }
    let lines = text.lines().count().max(1) as u32;
    let last_len = text.lines().last().map(|l| l.chars().count()).unwrap_or(0) as u32;
    let toks = Lexer::new(text).tokenize()?;
    let mut p = Parser {
        toks,
        pos: 0,
        end_line: lines,
        end_col: last_len + 1,
    };
    let e = p.expr()?;
    if let Some(t) = p.peek() {
        let kind = if *t == Tok::RParen {
            ParseErrorKind::UnbalancedParen
        } else {
            ParseErrorKind::UnexpectedToken(t.to_string())
        };
        return Err(p.err(kind));
    }
    Ok(e)
}

/// Upper bound on the total degree of the expanded expression.
fn degree_bound(e: &Expr) -> u32 {
    match e {
        Expr::Rational(_) | Expr::ImaginaryUnit => 0,
        Expr::Var(_) => 1,
        Expr::Conj(x) | Expr::Neg(x) => degree_bound(x),
        Expr::Abs2(x) => 2 * degree_bound(x),
        Expr::Add(a, b) | Expr::Sub(a, b) => degree_bound(a).max(degree_bound(b)),
        Expr::Mul(a, b) => degree_bound(a) + degree_bound(b),
        Expr::Pow(a, n) => degree_bound(a) * n,
    }
}

fn eval(e: &Expr, ctx: &Arc<VarContext>) -> Result<Series, AlgebraError> {
    match e {
        Expr::Rational(r) => Ok(Series::constant(ctx, GaussRational::from_rational(r.clone()))),
        Expr::ImaginaryUnit => Ok(Series::i(ctx)),
        Expr::Var(k) => Ok(Series::var(ctx, BaseVar::z(*k))),
        Expr::Conj(x) => Ok(eval(x, ctx)?.conj()),
        Expr::Abs2(x) => {
            let s = eval(x, ctx)?;
            s.mul(&s.conj())
        }
        Expr::Add(a, b) => eval(a, ctx)?.add(&eval(b, ctx)?),
        Expr::Sub(a, b) => eval(a, ctx)?.sub(&eval(b, ctx)?),
        Expr::Mul(a, b) => eval(a, ctx)?.mul(&eval(b, ctx)?),
        Expr::Neg(x) => Ok(eval(x, ctx)?.neg()),
        Expr::Pow(a, n) => eval(a, ctx)?.pow(*n),
    }
}

/// Exact expansion of the AST into `ctx`. The input denotes a polynomial, so
/// a nonzero term past the truncation order is an error, not a silent drop:
/// the expansion is carried out at a degree bound large enough to be exact
/// and then re-embedded.
pub fn to_series(e: &Expr, ctx: &Arc<VarContext>) -> Result<Series, LowerError> {
    let bound = degree_bound(e).max(ctx.order);
    let exact = if bound > ctx.order {
        let wide = VarContext::with_fiber_cap(bound, ctx.fiber_cap).map_err(AlgebraError::from)?;
        eval(e, &wide)?
    } else {
        return Ok(eval(e, ctx)?);
    };
    if exact.max_degree() > ctx.order {
        return Err(LowerError::DegreeExceedsOrder {
            found: exact.max_degree(),
            order: ctx.order,
        });
    }
    Ok(exact.reinterpret(ctx)?)
}

/// True iff the series is a fixed point of conjugation.
pub fn check_real(f: &Series) -> bool {
    f.is_real()
}

/// Canonical text of an AST; `parse(render(e))` is structurally `e`.
pub fn render(e: &Expr) -> String {
    fn prec(e: &Expr) -> u8 {
        match e {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
    fn go(e: &Expr, parent: u8, out: &mut String) {
        let p = prec(e);
        let need = p < parent;
        if need {
            out.push('(');
        }
        match e {
            Expr::Rational(r) => {
                if r.denom() == &BigInt::from(1) {
                    out.push_str(&r.numer().to_string());
                } else {
                    out.push_str(&format!("{}/{}", r.numer(), r.denom()));
                }
            }
            Expr::ImaginaryUnit => out.push('i'),
            Expr::Var(k) => out.push_str(&format!("z{}", k + 1)),
            Expr::Conj(x) => {
                out.push_str("conj(");
                go(x, 0, out);
                out.push(')');
            }
            Expr::Abs2(x) => {
                out.push_str("abs2(");
                go(x, 0, out);
                out.push(')');
            }
            Expr::Add(a, b) => {
                go(a, 1, out);
                out.push('+');
                go(b, 2, out);
            }
            Expr::Sub(a, b) => {
                go(a, 1, out);
                out.push('-');
                go(b, 2, out);
            }
            Expr::Mul(a, b) => {
                go(a, 2, out);
                out.push('*');
                go(b, 3, out);
            }
            Expr::Neg(x) => {
                out.push('-');
                go(x, 3, out);
            }
            Expr::Pow(a, n) => {
                go(a, 5, out);
                out.push('^');
                out.push_str(&n.to_string());
            }
        }
        if need {
            out.push(')');
        }
    }
    let mut s = String::new();
    go(e, 0, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> Arc<VarContext> {
        VarContext::default_ctx()
    }

    fn z(c: &Arc<VarContext>, k: usize) -> Series {
        Series::var(c, BaseVar::z(k))
    }

    fn zb(c: &Arc<VarContext>, k: usize) -> Series {
        Series::var(c, BaseVar::zbar(k))
    }

    #[test]
    fn quadric_parses_and_lowers() {
        let c = ctx();
        let e = parse("abs2(z1)+abs2(z2)-abs2(z3)-abs2(z4)").unwrap();
        let s = to_series(&e, &c).unwrap();
        let expect = z(&c, 0)
            .mul(&zb(&c, 0))
            .unwrap()
            .add(&z(&c, 1).mul(&zb(&c, 1)).unwrap())
            .unwrap()
            .sub(&z(&c, 2).mul(&zb(&c, 2)).unwrap())
            .unwrap()
            .sub(&z(&c, 3).mul(&zb(&c, 3)).unwrap())
            .unwrap();
        assert_eq!(s, expect);
        assert!(check_real(&s));
    }

    #[test]
    fn cubic_term_expands() {
        let c = ctx();
        let e = parse("abs2(z1)*(z1+conj(z1))").unwrap();
        let s = to_series(&e, &c).unwrap();
        let expect = z(&c, 0)
            .pow(2)
            .unwrap()
            .mul(&zb(&c, 0))
            .unwrap()
            .add(&z(&c, 0).mul(&zb(&c, 0).pow(2).unwrap()).unwrap())
            .unwrap();
        assert_eq!(s, expect);
    }

    #[test]
    fn imaginary_combination_is_real() {
        let c = ctx();
        let e = parse("(1/2)*i*(z1-conj(z1))").unwrap();
        let s = to_series(&e, &c).unwrap();
        let expect = z(&c, 0)
            .scale(&GaussRational::i().scale(&BigRational::new(1.into(), 2.into())))
            .add(&zb(&c, 0).scale(&(-GaussRational::i()).scale(&BigRational::new(1.into(), 2.into()))))
            .unwrap();
        assert_eq!(s, expect);
        assert!(check_real(&s));
        assert!(!check_real(&z(&c, 0)));
    }

    #[test]
    fn negative_exponent_rejected() {
        let err = parse("z1^(-1)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NegativeExponent);
        let err2 = parse("z1^(1/2)").unwrap_err();
        assert_eq!(err2.kind, ParseErrorKind::FractionalExponent);
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse("abs2(z1) @ 3").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Lexical('@'));
        assert_eq!((err.line, err.col), (1, 10));
        let err2 = parse("(z1+z2").unwrap_err();
        assert_eq!(err2.kind, ParseErrorKind::UnbalancedParen);
        let err3 = parse("z5+1").unwrap_err();
        assert_eq!(err3.kind, ParseErrorKind::UnknownIdentifier("z5".into()));
    }

    #[test]
    fn degree_overflow_reported_not_truncated() {
        let c = VarContext::new(3).unwrap();
        let e = parse("z1^4").unwrap();
        match to_series(&e, &c) {
            Err(LowerError::DegreeExceedsOrder { found: 4, order: 3 }) => {}
            other => panic!("expected degree error, got {other:?}"),
        }
        // cancellation past the order is fine: (z1^4 + z1) - z1^4
        let e2 = parse("z1^4+z1-z1^4").unwrap();
        let s = to_series(&e2, &c).unwrap();
        assert_eq!(s, Series::var(&c, BaseVar::Z1));
    }

    #[test]
    fn render_round_trips() {
        let texts = [
            "abs2(z1)+abs2(z2)-abs2(z3)-abs2(z4)",
            "abs2(z1)*(z1+conj(z1))",
            "(1/2)*i*(z1-conj(z1))",
            "-z1^3*conj(z2)+5/7",
        ];
        for t in texts {
            let e = parse(t).unwrap();
            let r = render(&e);
            let e2 = parse(&r).unwrap();
            assert_eq!(e, e2, "round trip failed for {t}: rendered {r}");
        }
    }
}
