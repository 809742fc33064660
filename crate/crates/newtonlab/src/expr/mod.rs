//! Symbolic expressions in one complex variable.
//!
//! The tree is deliberately small: the variable `z`, complex constants, the
//! four field operations, negation, nonnegative integer powers, and the
//! entire functions `exp`, `sin`, `cos`. That is enough to express every
//! map this crate analyzes while keeping symbolic differentiation exact.

mod calculus;
mod eval;
mod parser;

pub use calculus::{derivative_expr, differentiate, simplify};
pub use eval::{evaluate, Tape};
pub use parser::{parse, ParseError};

use num_complex::Complex64;
use std::fmt;

/// Expression tree over the variable `z`.
///
/// Invariants upheld by the parser and the calculus routines:
/// * `Pow` exponents are nonnegative integers (the type enforces it);
/// * no `Div` node has a literal zero constant denominator;
/// * every `Const` holds finite components.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Z,
    Const(Complex64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
    Exp(Box<Expr>),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
}

impl Expr {
    /// Number of nodes in the tree. Handy for size guards and tests.
    pub fn node_count(&self) -> usize {
        match self {
            Expr::Z | Expr::Const(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
                1 + a.node_count()
            }
        }
    }

    /// True when the subtree contains no occurrence of `z`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Z => false,
            Expr::Const(_) => true,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
            Expr::Pow(a, _) | Expr::Neg(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
                a.is_constant()
            }
        }
    }
}

fn fmt_const(c: Complex64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if c.im == 0.0 {
        write!(f, "{}", c.re)
    } else if c.re == 0.0 {
        if c.im == 1.0 {
            write!(f, "i")
        } else {
            write!(f, "{}i", c.im)
        }
    } else if c.im < 0.0 {
        write!(f, "({}{}i)", c.re, c.im)
    } else {
        write!(f, "({}+{}i)", c.re, c.im)
    }
}

// Binding strength used to decide where parentheses are needed.
fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(..) => 3,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn fmt_at(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let p = prec(e);
    if p < min {
        write!(f, "(")?;
    }
    match e {
        Expr::Z => write!(f, "z")?,
        Expr::Const(c) => fmt_const(*c, f)?,
        Expr::Add(a, b) => {
            fmt_at(a, 1, f)?;
            write!(f, "+")?;
            fmt_at(b, 2, f)?;
        }
        Expr::Sub(a, b) => {
            fmt_at(a, 1, f)?;
            write!(f, "-")?;
            fmt_at(b, 2, f)?;
        }
        Expr::Mul(a, b) => {
            fmt_at(a, 2, f)?;
            write!(f, "*")?;
            fmt_at(b, 3, f)?;
        }
        Expr::Div(a, b) => {
            fmt_at(a, 2, f)?;
            write!(f, "/")?;
            fmt_at(b, 3, f)?;
        }
        Expr::Neg(a) => {
            write!(f, "-")?;
            fmt_at(a, 3, f)?;
        }
        Expr::Pow(a, n) => {
            fmt_at(a, 5, f)?;
            write!(f, "^{n}")?;
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            fmt_at(a, 0, f)?;
            write!(f, ")")?;
        }
        Expr::Sin(a) => {
            write!(f, "sin(")?;
            fmt_at(a, 0, f)?;
            write!(f, ")")?;
        }
        Expr::Cos(a) => {
            write!(f, "cos(")?;
            fmt_at(a, 0, f)?;
            write!(f, ")")?;
        }
    }
    if p < min {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips_through_parser() {
        for src in [
            "z^3-1",
            "z*exp(z)",
            "(z^2-1)/(z^2+1)",
            "-z^2+0.5i",
            "sin(z)*cos(z)-exp(-z)",
            "3.25*z^7-z/2",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed).unwrap_or_else(|err| {
                panic!("display of {src:?} printed unparseable {printed:?}: {err}")
            });
            assert_eq!(e, reparsed, "round trip of {src:?} via {printed:?}");
        }
    }

    #[test]
    fn constant_detection() {
        assert!(parse("2+3i").unwrap().is_constant());
        assert!(parse("exp(sin(1))").unwrap().is_constant());
        assert!(!parse("z").unwrap().is_constant());
        assert!(!parse("2*exp(z)").unwrap().is_constant());
    }
}
