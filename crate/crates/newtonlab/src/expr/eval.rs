//! Expression evaluation on the extended complex plane.
//!
//! Two evaluators share one set of arithmetic kernels: a recursive walk
//! over the tree (the readable reference) and a flat postorder [`Tape`]
//! (what orbit iteration actually runs, since pointer-chasing through
//! boxed nodes costs real time at hundreds of millions of evaluations).
//! Because both call the same kernels in the same order, they produce
//! bit-identical results; a test below holds them to that.

use super::Expr;
use crate::extended::{
    xc_add, xc_cos, xc_div, xc_exp, xc_mul, xc_neg, xc_powu, xc_sin, xc_sub, ExtendedComplex,
    Finite,
};
use num_complex::Complex64;
use std::cell::RefCell;

/// Evaluate `e` at the point `z`. Total: overflow, NaN, and division by
/// (near-)zero all land on [`ExtendedComplex::Infinity`].
pub fn evaluate(e: &Expr, z: Complex64) -> ExtendedComplex {
    match e {
        Expr::Z => Finite(z),
        Expr::Const(c) => Finite(*c),
        Expr::Add(a, b) => xc_add(evaluate(a, z), evaluate(b, z)),
        Expr::Sub(a, b) => xc_sub(evaluate(a, z), evaluate(b, z)),
        Expr::Mul(a, b) => xc_mul(evaluate(a, z), evaluate(b, z)),
        Expr::Div(a, b) => xc_div(evaluate(a, z), evaluate(b, z)),
        Expr::Pow(a, n) => xc_powu(evaluate(a, z), *n),
        Expr::Neg(a) => xc_neg(evaluate(a, z)),
        Expr::Exp(a) => xc_exp(evaluate(a, z)),
        Expr::Sin(a) => xc_sin(evaluate(a, z)),
        Expr::Cos(a) => xc_cos(evaluate(a, z)),
    }
}

#[derive(Debug, Clone, Copy)]
enum Op {
    Z,
    Const(Complex64),
    Add,
    Sub,
    Mul,
    Div,
    Pow(u32),
    Neg,
    Exp,
    Sin,
    Cos,
}

/// A stack-machine compilation of an [`Expr`], evaluated without touching
/// the tree. Cheap to evaluate repeatedly; compile once per formula.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    depth: usize,
}

thread_local! {
    static SCRATCH: RefCell<Vec<ExtendedComplex>> = const { RefCell::new(Vec::new()) };
}

impl Tape {
    pub fn compile(e: &Expr) -> Tape {
        let mut ops = Vec::with_capacity(e.node_count());
        fn emit(e: &Expr, ops: &mut Vec<Op>) {
            match e {
                Expr::Z => ops.push(Op::Z),
                Expr::Const(c) => ops.push(Op::Const(*c)),
                Expr::Add(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Add);
                }
                Expr::Sub(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Sub);
                }
                Expr::Mul(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Mul);
                }
                Expr::Div(a, b) => {
                    emit(a, ops);
                    emit(b, ops);
                    ops.push(Op::Div);
                }
                Expr::Pow(a, n) => {
                    emit(a, ops);
                    ops.push(Op::Pow(*n));
                }
                Expr::Neg(a) => {
                    emit(a, ops);
                    ops.push(Op::Neg);
                }
                Expr::Exp(a) => {
                    emit(a, ops);
                    ops.push(Op::Exp);
                }
                Expr::Sin(a) => {
                    emit(a, ops);
                    ops.push(Op::Sin);
                }
                Expr::Cos(a) => {
                    emit(a, ops);
                    ops.push(Op::Cos);
                }
            }
        }
        emit(e, &mut ops);
        // Maximum stack occupancy over the run, so eval can reserve once.
        let mut depth = 0usize;
        let mut cur = 0usize;
        for op in &ops {
            match op {
                Op::Z | Op::Const(_) => cur += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => cur -= 1,
                _ => {}
            }
            depth = depth.max(cur);
        }
        Tape { ops, depth }
    }

    pub fn eval(&self, z: Complex64) -> ExtendedComplex {
        SCRATCH.with(|cell| {
            let mut stack = cell.borrow_mut();
            stack.clear();
            stack.reserve(self.depth);
            for op in &self.ops {
                match op {
                    Op::Z => stack.push(Finite(z)),
                    Op::Const(c) => stack.push(Finite(*c)),
                    Op::Add => {
                        let b = stack.pop().unwrap();
                        let a = stack.pop().unwrap();
                        stack.push(xc_add(a, b));
                    }
                    Op::Sub => {
                        let b = stack.pop().unwrap();
                        let a = stack.pop().unwrap();
                        stack.push(xc_sub(a, b));
                    }
                    Op::Mul => {
                        let b = stack.pop().unwrap();
                        let a = stack.pop().unwrap();
                        stack.push(xc_mul(a, b));
                    }
                    Op::Div => {
                        let b = stack.pop().unwrap();
                        let a = stack.pop().unwrap();
                        stack.push(xc_div(a, b));
                    }
                    Op::Pow(n) => {
                        let a = stack.pop().unwrap();
                        stack.push(xc_powu(a, *n));
                    }
                    Op::Neg => {
                        let a = stack.pop().unwrap();
                        stack.push(xc_neg(a));
                    }
                    Op::Exp => {
                        let a = stack.pop().unwrap();
                        stack.push(xc_exp(a));
                    }
                    Op::Sin => {
                        let a = stack.pop().unwrap();
                        stack.push(xc_sin(a));
                    }
                    Op::Cos => {
                        let a = stack.pop().unwrap();
                        stack.push(xc_cos(a));
                    }
                }
            }
            stack.pop().unwrap()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::extended::Infinity;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn evaluates_polynomials_exactly() {
        let e = parse("z^2-1").unwrap();
        assert_eq!(evaluate(&e, c(2.0, 0.0)), Finite(c(3.0, 0.0)));
        assert_eq!(evaluate(&e, c(0.0, 1.0)), Finite(c(-2.0, 0.0)));
    }

    #[test]
    fn euler_identity() {
        let e = parse("exp(z)").unwrap();
        let v = evaluate(&e, c(0.0, std::f64::consts::PI)).finite().unwrap();
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn pole_evaluates_to_infinity() {
        let e = parse("1/z").unwrap();
        assert_eq!(evaluate(&e, c(0.0, 0.0)), Infinity);
        let e = parse("(z+1)/(z^2-1)").unwrap();
        assert_eq!(evaluate(&e, c(1.0, 0.0)), Infinity);
    }

    #[test]
    fn overflow_saturates() {
        let e = parse("exp(z^2)").unwrap();
        assert_eq!(evaluate(&e, c(100.0, 0.0)), Infinity);
    }

    // Deterministic random expressions for cross-checking the two
    // evaluators. Shapes mirror what differentiation produces.
    fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> Expr {
        if depth == 0 || rng.gen_range(0..10) < 2 {
            return if rng.gen_bool(0.5) {
                Expr::Z
            } else {
                Expr::Const(c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)))
            };
        }
        let shape = rng.gen_range(0..9);
        let a = Box::new(random_expr(rng, depth - 1));
        match shape {
            0 => Expr::Add(a, Box::new(random_expr(rng, depth - 1))),
            1 => Expr::Sub(a, Box::new(random_expr(rng, depth - 1))),
            2 => Expr::Mul(a, Box::new(random_expr(rng, depth - 1))),
            3 => Expr::Div(a, Box::new(random_expr(rng, depth - 1))),
            4 => Expr::Pow(a, rng.gen_range(0..5)),
            5 => Expr::Neg(a),
            6 => Expr::Exp(a),
            7 => Expr::Sin(a),
            _ => Expr::Cos(a),
        }
    }

    #[test]
    fn tape_matches_recursive_evaluation_bit_for_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7a9e);
        for _ in 0..400 {
            let e = random_expr(&mut rng, 4);
            let tape = Tape::compile(&e);
            for _ in 0..8 {
                let z = c(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                let a = evaluate(&e, z);
                let b = tape.eval(z);
                match (a, b) {
                    (Finite(x), Finite(y)) => {
                        assert!(
                            x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits(),
                            "tape diverged from tree on {e} at {z}: {x} vs {y}"
                        );
                    }
                    (Infinity, Infinity) => {}
                    _ => panic!("tape diverged from tree on {e} at {z}: {a:?} vs {b:?}"),
                }
            }
        }
    }

    #[test]
    fn simplify_preserves_evaluation_at_random_points() {
        use crate::expr::simplify;
        let mut rng = ChaCha8Rng::seed_from_u64(0x51a9);
        for _ in 0..300 {
            let e = random_expr(&mut rng, 4);
            let s = simplify(&e);
            for _ in 0..4 {
                let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
                match (evaluate(&e, z), evaluate(&s, z)) {
                    (Finite(x), Finite(y)) => {
                        let scale = 1.0 + x.norm();
                        assert!(
                            (x - y).norm() <= 1e-12 * scale,
                            "simplify changed value of {e} at {z}: {x} vs {y}"
                        );
                    }
                    (Infinity, Infinity) => {}
                    (x, y) => panic!("simplify changed finiteness of {e} at {z}: {x:?} vs {y:?}"),
                }
            }
        }
    }
}
