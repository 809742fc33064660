//! Recursive-descent parser for the formula grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | power
//! power    := atom ('^' exponent)?
//! atom     := 'z' | number | '(' expr ')' | ('exp'|'sin'|'cos') '(' expr ')'
//! number   := decimal literal, optional trailing 'i' (e.g. 2, 0.5, 2.5i, i)
//! exponent := nonnegative integer, optionally parenthesized
//! ```
//!
//! `^` binds tighter than unary minus, so `-z^2` parses as `-(z^2)`.
//! There is no implicit multiplication: `2z` is a syntax error.

use super::Expr;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("invalid exponent at byte {offset}: {message}")]
    InvalidExponent { offset: usize, message: String },
    #[error("division by literal zero at byte {offset}")]
    DivisionByZero { offset: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number { value: f64, imaginary: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokenize(src: &'a str) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        while let Some(t) = lx.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(Tok, usize)>, ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let at = self.pos;
        let b = self.src[at];
        let tok = match b {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => return Ok(Some((self.lex_number(at)?, at))),
            b'a'..=b'z' | b'A'..=b'Z' => {
                let mut end = at;
                while end < self.src.len() && self.src[end].is_ascii_alphabetic() {
                    end += 1;
                }
                self.pos = end;
                let name = std::str::from_utf8(&self.src[at..end]).unwrap().to_string();
                return Ok(Some((Tok::Ident(name), at)));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: at,
                    message: format!("unexpected character `{}`", char::from(b)),
                })
            }
        };
        self.pos = at + 1;
        Ok(Some((tok, at)))
    }

    fn lex_number(&mut self, at: usize) -> Result<Tok, ParseError> {
        let mut end = at;
        let mut seen_dot = false;
        while end < self.src.len() {
            match self.src[end] {
                b'0'..=b'9' => end += 1,
                b'.' if !seen_dot => {
                    seen_dot = true;
                    end += 1;
                }
                _ => break,
            }
        }
        let text = std::str::from_utf8(&self.src[at..end]).unwrap();
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            offset: at,
            message: format!("malformed number `{text}`"),
        })?;
        let imaginary = end < self.src.len() && self.src[end] == b'i';
        if imaginary {
            end += 1;
        }
        self.pos = end;
        Ok(Tok::Number { value, imaginary })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    cursor: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.cursor).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.cursor).map(|&(_, o)| o).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.cursor).cloned();
        self.cursor += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<usize, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some((t, o)) if t == want => Ok(o),
            _ => Err(ParseError::Syntax { offset, message: format!("expected {what}") }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    let slash_at = self.offset();
                    self.bump();
                    let rhs = self.factor()?;
                    if matches!(&rhs, Expr::Const(c) if c.re == 0.0 && c.im == 0.0) {
                        return Err(ParseError::DivisionByZero { offset: slash_at });
                    }
                    lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Tok::Minus)) {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.factor()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let n = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        Ok(base)
    }

    // Exponents must be literal nonnegative integers. A parenthesized
    // integer is tolerated so that `z^(1.5)` reports an exponent problem
    // rather than a bare syntax error.
    fn exponent(&mut self) -> Result<u32, ParseError> {
        let parenthesized = matches!(self.peek(), Some(Tok::LParen));
        if parenthesized {
            self.bump();
        }
        let offset = self.offset();
        let n = match self.bump() {
            Some((Tok::Number { value, imaginary: false }, _)) => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(ParseError::InvalidExponent {
                        offset,
                        message: format!("`{value}` is not a nonnegative integer"),
                    });
                }
                if value > 10_000.0 {
                    return Err(ParseError::InvalidExponent {
                        offset,
                        message: format!("exponent {value} exceeds the supported limit of 10000"),
                    });
                }
                value as u32
            }
            Some((Tok::Minus, _)) => {
                return Err(ParseError::InvalidExponent {
                    offset,
                    message: "negative exponents are not supported".into(),
                })
            }
            _ => {
                return Err(ParseError::InvalidExponent {
                    offset,
                    message: "expected a nonnegative integer".into(),
                })
            }
        };
        if parenthesized {
            self.expect(Tok::RParen, "`)` after exponent")?;
        }
        Ok(n)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Some((Tok::Number { value, imaginary }, _)) => Ok(Expr::Const(if imaginary {
                Complex64::new(0.0, value)
            } else {
                Complex64::new(value, 0.0)
            })),
            Some((Tok::Ident(name), _)) => match name.as_str() {
                "z" => Ok(Expr::Z),
                // Bare `i` is the imaginary unit, a convenience beyond the
                // suffix form `1i`.
                "i" => Ok(Expr::Const(Complex64::new(0.0, 1.0))),
                "exp" | "sin" | "cos" => {
                    self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
                    let arg = Box::new(self.expr()?);
                    self.expect(Tok::RParen, "`)` closing function argument")?;
                    Ok(match name.as_str() {
                        "exp" => Expr::Exp(arg),
                        "sin" => Expr::Sin(arg),
                        _ => Expr::Cos(arg),
                    })
                }
                _ => Err(ParseError::UnknownIdentifier { offset, name }),
            },
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            _ => Err(ParseError::Syntax {
                offset,
                message: "expected `z`, a number, `(`, or a function name".into(),
            }),
        }
    }
}

/// Parse a formula in `z` into an expression tree.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::tokenize(src)?;
    let mut p = Parser { toks, cursor: 0, len: src.len() };
    let e = p.expr()?;
    if p.cursor < p.toks.len() {
        return Err(ParseError::Syntax {
            offset: p.offset(),
            message: "unexpected trailing input (note: multiplication must be explicit)".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Expr {
        Expr::Const(Complex64::new(re, im))
    }

    #[test]
    fn parses_the_classic_cubic() {
        let e = parse("z^3-1").unwrap();
        assert_eq!(e, Expr::Sub(Box::new(Expr::Pow(Box::new(Expr::Z), 3)), Box::new(c(1.0, 0.0))));
    }

    #[test]
    fn parses_products_and_functions() {
        let e = parse("z*exp(z)").unwrap();
        assert_eq!(
            e,
            Expr::Mul(Box::new(Expr::Z), Box::new(Expr::Exp(Box::new(Expr::Z))))
        );
    }

    #[test]
    fn whitespace_is_insignificant() {
        assert_eq!(parse(" z ^ 3 - 1 ").unwrap(), parse("z^3-1").unwrap());
    }

    #[test]
    fn power_binds_tighter_than_unary_minus() {
        let e = parse("-z^2").unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Z), 2))));
        // A parenthesized base flips it.
        let e = parse("(-z)^2").unwrap();
        assert_eq!(e, Expr::Pow(Box::new(Expr::Neg(Box::new(Expr::Z))), 2));
    }

    #[test]
    fn imaginary_literals() {
        assert_eq!(parse("2.5i").unwrap(), c(0.0, 2.5));
        assert_eq!(parse("i").unwrap(), c(0.0, 1.0));
        assert_eq!(
            parse("1+2i").unwrap(),
            Expr::Add(Box::new(c(1.0, 0.0)), Box::new(c(0.0, 2.0)))
        );
    }

    #[test]
    fn fractional_exponent_is_rejected() {
        match parse("z^(1.5)") {
            Err(ParseError::InvalidExponent { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected invalid exponent, got {other:?}"),
        }
        assert!(matches!(parse("z^2.5"), Err(ParseError::InvalidExponent { .. })));
        assert!(matches!(parse("z^-2"), Err(ParseError::InvalidExponent { .. })));
    }

    #[test]
    fn implicit_multiplication_is_a_syntax_error() {
        match parse("2z") {
            Err(ParseError::Syntax { offset, .. }) => assert_eq!(offset, 1),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_carries_its_offset() {
        match parse("z + tan(z)") {
            Err(ParseError::UnknownIdentifier { offset, name }) => {
                assert_eq!((offset, name.as_str()), (4, "tan"));
            }
            other => panic!("expected unknown identifier, got {other:?}"),
        }
    }

    #[test]
    fn division_by_literal_zero_is_rejected() {
        assert!(matches!(parse("1/0"), Err(ParseError::DivisionByZero { .. })));
        assert!(matches!(parse("z/(0)"), Err(ParseError::DivisionByZero { .. })));
        // A denominator that merely evaluates to zero is allowed here;
        // evaluation totalizes it to infinity instead.
        assert!(parse("1/(2-2)").is_ok());
    }

    #[test]
    fn unbalanced_parens_fail() {
        assert!(matches!(parse("(z+1"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("exp z"), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse(""), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn chained_carets_do_not_parse() {
        assert!(parse("z^2^3").is_err());
    }
}
