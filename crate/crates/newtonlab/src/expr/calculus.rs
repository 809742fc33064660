//! Exact symbolic differentiation and conservative simplification.

use super::Expr;
use crate::extended::{near_zero, ExtendedComplex};
use num_complex::Complex64;

fn bx(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn konst(re: f64) -> Expr {
    Expr::Const(Complex64::new(re, 0.0))
}

/// d/dz, term by term. The result is not simplified; callers usually want
/// `simplify(differentiate(e))`.
pub fn differentiate(e: &Expr) -> Expr {
    match e {
        Expr::Z => konst(1.0),
        Expr::Const(_) => konst(0.0),
        Expr::Add(a, b) => Expr::Add(bx(differentiate(a)), bx(differentiate(b))),
        Expr::Sub(a, b) => Expr::Sub(bx(differentiate(a)), bx(differentiate(b))),
        Expr::Mul(a, b) => Expr::Add(
            bx(Expr::Mul(bx(differentiate(a)), b.clone())),
            bx(Expr::Mul(a.clone(), bx(differentiate(b)))),
        ),
        Expr::Div(a, b) => Expr::Div(
            bx(Expr::Sub(
                bx(Expr::Mul(bx(differentiate(a)), b.clone())),
                bx(Expr::Mul(a.clone(), bx(differentiate(b)))),
            )),
            bx(Expr::Pow(b.clone(), 2)),
        ),
        Expr::Pow(u, n) => {
            if *n == 0 {
                konst(0.0)
            } else {
                Expr::Mul(
                    bx(konst(*n as f64)),
                    bx(Expr::Mul(bx(Expr::Pow(u.clone(), n - 1)), bx(differentiate(u)))),
                )
            }
        }
        Expr::Neg(a) => Expr::Neg(bx(differentiate(a))),
        Expr::Exp(u) => Expr::Mul(bx(differentiate(u)), bx(Expr::Exp(u.clone()))),
        Expr::Sin(u) => Expr::Mul(bx(differentiate(u)), bx(Expr::Cos(u.clone()))),
        Expr::Cos(u) => Expr::Neg(bx(Expr::Mul(bx(differentiate(u)), bx(Expr::Sin(u.clone()))))),
    }
}

fn as_const(e: &Expr) -> Option<Complex64> {
    match e {
        Expr::Const(c) => Some(*c),
        _ => None,
    }
}

fn is_zero(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.re == 0.0 && c.im == 0.0)
}

fn is_one(e: &Expr) -> bool {
    matches!(e, Expr::Const(c) if c.re == 1.0 && c.im == 0.0)
}

// Fold a constant subcomputation only when the result stays finite; an
// overflowing fold would silently change what evaluation reports at every z.
fn fold(v: ExtendedComplex) -> Option<Expr> {
    v.finite().map(Expr::Const)
}

/// Simplify with rules that preserve evaluation *everywhere*, including at
/// poles of the extended semantics. In particular `0 * x` is not collapsed
/// unless `x` is itself a constant, since `x` may be infinite somewhere.
pub fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Z | Expr::Const(_) => e.clone(),
        Expr::Add(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                if let Some(c) = fold(crate::extended::sanitize(x + y)) {
                    return c;
                }
            }
            if is_zero(&a) {
                return b;
            }
            if is_zero(&b) {
                return a;
            }
            Expr::Add(bx(a), bx(b))
        }
        Expr::Sub(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                if let Some(c) = fold(crate::extended::sanitize(x - y)) {
                    return c;
                }
            }
            if is_zero(&b) {
                return a;
            }
            if is_zero(&a) {
                return simplify(&Expr::Neg(bx(b)));
            }
            Expr::Sub(bx(a), bx(b))
        }
        Expr::Mul(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                if let Some(c) = fold(crate::extended::sanitize(x * y)) {
                    return c;
                }
            }
            if is_one(&a) {
                return b;
            }
            if is_one(&b) {
                return a;
            }
            Expr::Mul(bx(a), bx(b))
        }
        Expr::Div(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            if let (Some(x), Some(y)) = (as_const(&a), as_const(&b)) {
                if !near_zero(y) {
                    if let Some(c) = fold(crate::extended::xc_div(
                        ExtendedComplex::Finite(x),
                        ExtendedComplex::Finite(y),
                    )) {
                        return c;
                    }
                }
            }
            if is_one(&b) {
                return a;
            }
            Expr::Div(bx(a), bx(b))
        }
        Expr::Pow(u, n) => {
            let u = simplify(u);
            if *n == 0 {
                return konst(1.0);
            }
            if *n == 1 {
                return u;
            }
            if let Some(x) = as_const(&u) {
                if let Some(c) = fold(crate::extended::xc_powu(ExtendedComplex::Finite(x), *n)) {
                    return c;
                }
            }
            Expr::Pow(bx(u), *n)
        }
        Expr::Neg(a) => {
            let a = simplify(a);
            if let Some(x) = as_const(&a) {
                return Expr::Const(-x);
            }
            if let Expr::Neg(inner) = a {
                return *inner;
            }
            Expr::Neg(bx(a))
        }
        Expr::Exp(a) => {
            let a = simplify(a);
            if let Some(x) = as_const(&a) {
                if let Some(c) = fold(crate::extended::xc_exp(ExtendedComplex::Finite(x))) {
                    return c;
                }
            }
            Expr::Exp(bx(a))
        }
        Expr::Sin(a) => {
            let a = simplify(a);
            if let Some(x) = as_const(&a) {
                if let Some(c) = fold(crate::extended::xc_sin(ExtendedComplex::Finite(x))) {
                    return c;
                }
            }
            Expr::Sin(bx(a))
        }
        Expr::Cos(a) => {
            let a = simplify(a);
            if let Some(x) = as_const(&a) {
                if let Some(c) = fold(crate::extended::xc_cos(ExtendedComplex::Finite(x))) {
                    return c;
                }
            }
            Expr::Cos(bx(a))
        }
    }
}

/// Convenience: simplified derivative.
pub fn derivative_expr(e: &Expr) -> Expr {
    simplify(&differentiate(e))
}
