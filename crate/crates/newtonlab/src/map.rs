//! Evaluable maps on the extended plane, and Newton maps in particular.
//!
//! Everything downstream — orbit iteration, contour counts, the topology
//! audits — works against the [`ComplexMap`] trait, so a Newton map built
//! from a formula for `g`, a raw formula map, and hand-written test doubles
//! are interchangeable. `NewtonMap` is the centerpiece: given `g` it forms
//! `N(z) = z - g(z)/g'(z)` symbolically, classifies the shape of `g`, and
//! derives exact root/pole inventories where the shape allows it.

use crate::expr::{differentiate, evaluate, simplify, Expr, Tape};
use crate::extended::{near_zero, ExtendedComplex, Finite, Infinity};
use crate::poly::{
    degree, poly_derivative, poly_mul, poly_sub, polynomial_roots, PolyError, Root, RootSet,
};
use num_complex::Complex64;
use thiserror::Error;

/// Axis-aligned closed rectangle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Rect {
        assert!(re_min <= re_max && im_min <= im_max, "degenerate rectangle");
        Rect { re_min, re_max, im_min, im_max }
    }

    pub fn from_center_size(center: Complex64, width: f64, height: f64) -> Rect {
        Rect::new(
            center.re - width / 2.0,
            center.re + width / 2.0,
            center.im - height / 2.0,
            center.im + height / 2.0,
        )
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new((self.re_min + self.re_max) / 2.0, (self.im_min + self.im_max) / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn max_dim(&self) -> f64 {
        self.width().max(self.height())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Scale about the center by `factor`.
    pub fn inflate(&self, factor: f64) -> Rect {
        let c = self.center();
        Rect::from_center_size(c, self.width() * factor, self.height() * factor)
    }

    /// The four half-size quadrants, in reading order.
    pub fn quadrants(&self) -> [Rect; 4] {
        let c = self.center();
        [
            Rect::new(self.re_min, c.re, c.im, self.im_max),
            Rect::new(c.re, self.re_max, c.im, self.im_max),
            Rect::new(self.re_min, c.re, self.im_min, c.im),
            Rect::new(c.re, self.re_max, self.im_min, c.im),
        ]
    }
}

/// A pole location together with its order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub location: Complex64,
    pub multiplicity: u32,
}

/// A map of the extended plane that the rest of the crate can analyze.
///
/// Implementations must be deterministic: the same `z` always produces the
/// same value, with no interior randomness or iteration-order dependence.
pub trait ComplexMap: Sync {
    /// Totalized evaluation; poles and overflow report ∞.
    fn eval(&self, z: Complex64) -> ExtendedComplex;

    /// Derivative at `z`. The default is a central difference; maps with
    /// symbolic derivatives should override it.
    fn derivative_at(&self, z: Complex64) -> ExtendedComplex {
        let h = 1e-6 * (1.0 + z.norm());
        let step = Complex64::new(h, 0.0);
        match (self.eval(z + step), self.eval(z - step)) {
            (Finite(a), Finite(b)) => crate::extended::sanitize((a - b) / (2.0 * step)),
            _ => Infinity,
        }
    }

    /// Known poles inside `region`, with multiplicities.
    fn poles_in(&self, region: &Rect) -> Vec<Pole>;

    /// Human-readable description, used in reports and sidecars.
    fn description(&self) -> String;
}

#[derive(Debug, Error)]
pub enum MapError {
    #[error("g is constant, so g' vanishes identically and the Newton map is undefined")]
    ConstantFunction,
    #[error("g is a degree-1 polynomial; its Newton map collapses to a constant")]
    DegenerateLinear,
    #[error("root finding on g failed: {0}")]
    Roots(#[from] PolyError),
}

/// Structural classification of `g`, which decides how much of the Newton
/// map's anatomy is known exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    /// `g` is a polynomial of the given degree; `N` is rational and the
    /// root and pole inventories are exact.
    Polynomial { degree: usize },
    /// `g = P(z) * exp(Q(z))` with `P`, `Q` polynomials: `N` is again
    /// rational (`N = z - P/(P' + P Q')`) with exact inventories.
    RationalSpecial,
    /// Anything else; inventories are found numerically per window.
    Transcendental,
}

/// Numerator/denominator coefficients of a rational map, ascending.
#[derive(Debug, Clone)]
pub struct RationalForm {
    pub numerator: Vec<Complex64>,
    pub denominator: Vec<Complex64>,
}

/// The Newton map `N(z) = z - g(z)/g'(z)` of a formula `g`.
pub struct NewtonMap {
    g: Expr,
    g_prime: Expr,
    newton: Expr,
    kind: MapKind,
    tape: Tape,
    // d/dz N = g g'' / g'^2; falls back to differencing where it is 0/0.
    deriv_tape: Tape,
    g_tape: Tape,
    g_prime_tape: Tape,
    g_second_tape: Tape,
    roots: Option<RootSet>,
    poles: Option<Vec<Pole>>,
    rational: Option<RationalForm>,
}

const POLY_DEGREE_CAP: usize = 1024;

// Exact ascending coefficients, when the (simplified) tree is a polynomial.
fn extract_poly(e: &Expr) -> Option<Vec<Complex64>> {
    let guard = |v: Vec<Complex64>| if v.len() <= POLY_DEGREE_CAP + 1 { Some(v) } else { None };
    match e {
        Expr::Z => Some(vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]),
        Expr::Const(c) => Some(vec![*c]),
        Expr::Add(a, b) => guard(crate::poly::poly_add(&extract_poly(a)?, &extract_poly(b)?)),
        Expr::Sub(a, b) => guard(poly_sub(&extract_poly(a)?, &extract_poly(b)?)),
        Expr::Mul(a, b) => guard(poly_mul(&extract_poly(a)?, &extract_poly(b)?)),
        Expr::Div(a, b) => {
            if !b.is_constant() {
                return None;
            }
            let d = evaluate(b, Complex64::new(0.0, 0.0)).finite()?;
            if near_zero(d) {
                return None;
            }
            Some(extract_poly(a)?.iter().map(|&c| c / d).collect())
        }
        Expr::Pow(a, n) => {
            let base = extract_poly(a)?;
            if *n as usize * degree(&base) > POLY_DEGREE_CAP {
                return None;
            }
            let mut acc = vec![Complex64::new(1.0, 0.0)];
            for _ in 0..*n {
                acc = poly_mul(&acc, &base);
            }
            Some(acc)
        }
        Expr::Neg(a) => Some(extract_poly(a)?.iter().map(|&c| -c).collect()),
        Expr::Exp(_) | Expr::Sin(_) | Expr::Cos(_) => {
            if e.is_constant() {
                evaluate(e, Complex64::new(0.0, 0.0)).finite().map(|c| vec![c])
            } else {
                None
            }
        }
    }
}

// Match g = P * exp(Q) (either factor order, or a bare exp) with P, Q
// polynomials, returning their coefficients.
fn match_rational_special(e: &Expr) -> Option<(Vec<Complex64>, Vec<Complex64>)> {
    match e {
        Expr::Exp(q) => Some((vec![Complex64::new(1.0, 0.0)], extract_poly(q)?)),
        Expr::Mul(a, b) => {
            if let Expr::Exp(q) = &**b {
                return Some((extract_poly(a)?, extract_poly(q)?));
            }
            if let Expr::Exp(q) = &**a {
                return Some((extract_poly(b)?, extract_poly(q)?));
            }
            None
        }
        Expr::Neg(a) => {
            let (p, q) = match_rational_special(a)?;
            Some((p.iter().map(|&c| -c).collect(), q))
        }
        _ => None,
    }
}

// Zeros of `denominator_coeffs` that survive as genuine poles of N: a zero
// of g' that is also a zero of g is a removable point of N, not a pole.
fn poles_from_coeffs(
    dcoeffs: &[Complex64],
    roots: &RootSet,
) -> Result<Vec<Pole>, PolyError> {
    if degree(dcoeffs) < 1 {
        return Ok(Vec::new());
    }
    let zeros = polynomial_roots(dcoeffs)?;
    Ok(zeros
        .iter()
        .filter(|candidate| {
            roots
                .nearest(candidate.location)
                .map_or(true, |(_, dist)| dist > 1e-6)
        })
        .map(|r| Pole { location: r.location, multiplicity: r.multiplicity })
        .collect())
}

impl NewtonMap {
    /// Build the Newton map of `g`. Fails when `g` is constant or a
    /// degree-1 polynomial (both make `N` degenerate).
    pub fn new(g_raw: &Expr) -> Result<NewtonMap, MapError> {
        let g = simplify(g_raw);
        if g.is_constant() {
            return Err(MapError::ConstantFunction);
        }
        let g_prime = simplify(&differentiate(&g));
        if matches!(&g_prime, Expr::Const(c) if c.re == 0.0 && c.im == 0.0) {
            return Err(MapError::ConstantFunction);
        }
        let g_second = simplify(&differentiate(&g_prime));

        // N evaluates as z - g/g' directly: the quotient form keeps the
        // totalized pole behavior aligned with the defining formula.
        let newton = Expr::Sub(
            Box::new(Expr::Z),
            Box::new(Expr::Div(Box::new(g.clone()), Box::new(g_prime.clone()))),
        );
        // N' = g g'' / g'^2.
        let nderiv = Expr::Div(
            Box::new(Expr::Mul(Box::new(g.clone()), Box::new(g_second.clone()))),
            Box::new(Expr::Pow(Box::new(g_prime.clone()), 2)),
        );

        let (kind, roots, poles, rational) = if let Some(coeffs) = extract_poly(&g) {
            let coeffs = crate::poly::trim(&coeffs);
            let deg = degree(&coeffs);
            match deg {
                0 => return Err(MapError::ConstantFunction),
                1 => return Err(MapError::DegenerateLinear),
                _ => {}
            }
            let roots = polynomial_roots(&coeffs)?;
            let dcoeffs = poly_derivative(&coeffs);
            let poles = poles_from_coeffs(&dcoeffs, &roots)?;
            // N = (z g' - g) / g' exactly, at the coefficient level.
            let mut shifted = vec![Complex64::new(0.0, 0.0)];
            shifted.extend_from_slice(&dcoeffs);
            let rational = RationalForm {
                numerator: crate::poly::trim(&poly_sub(&shifted, &coeffs)),
                denominator: dcoeffs,
            };
            (MapKind::Polynomial { degree: deg }, Some(roots), Some(poles), Some(rational))
        } else if let Some((p, q)) = match_rational_special(&g) {
            let p = crate::poly::trim(&p);
            let q = crate::poly::trim(&q);
            // g = P e^Q  =>  g' = (P' + P Q') e^Q; the exponential cancels
            // in N, leaving N = z - P/R with R = P' + P Q'.
            let r = crate::poly::trim(&crate::poly::poly_add(
                &poly_derivative(&p),
                &poly_mul(&p, &poly_derivative(&q)),
            ));
            let roots = if degree(&p) >= 1 {
                polynomial_roots(&p)?
            } else {
                RootSet::default()
            };
            let poles = poles_from_coeffs(&r, &roots)?;
            let mut shifted = vec![Complex64::new(0.0, 0.0)];
            shifted.extend_from_slice(&r);
            let rational = RationalForm {
                numerator: crate::poly::trim(&poly_sub(&shifted, &p)),
                denominator: r,
            };
            (MapKind::RationalSpecial, Some(roots), Some(poles), Some(rational))
        } else {
            (MapKind::Transcendental, None, None, None)
        };

        Ok(NewtonMap {
            tape: Tape::compile(&newton),
            deriv_tape: Tape::compile(&nderiv),
            g_tape: Tape::compile(&g),
            g_prime_tape: Tape::compile(&g_prime),
            g_second_tape: Tape::compile(&g_second),
            g,
            g_prime,
            newton,
            kind,
            roots,
            poles,
            rational,
        })
    }

    /// Parse a formula for `g` and build its Newton map.
    pub fn from_formula(src: &str) -> Result<NewtonMap, crate::error::LabError> {
        let g = crate::expr::parse(src)?;
        Ok(NewtonMap::new(&g)?)
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn g_prime(&self) -> &Expr {
        &self.g_prime
    }

    pub fn newton_expr(&self) -> &Expr {
        &self.newton
    }

    /// Exact rational form of `N` (polynomial and `P exp(Q)` shapes only).
    pub fn rational_form(&self) -> Option<&RationalForm> {
        self.rational.as_ref()
    }

    /// The full root inventory, exact for polynomial and `P exp(Q)` shapes.
    /// `None` means the shape only admits windowed numeric search; use
    /// [`NewtonMap::roots_in`].
    pub fn roots(&self) -> Option<&RootSet> {
        self.roots.as_ref()
    }

    /// Roots of `g` relevant to a window. Exact inventories are returned
    /// whole (orbits started in a window may converge to a root outside
    /// it); transcendental shapes search an inflated window numerically.
    pub fn roots_in(&self, region: &Rect) -> RootSet {
        if let Some(rs) = &self.roots {
            return rs.clone();
        }
        let search = region.inflate(3.0);
        let zeros = newton_zero_search(&self.g_tape, &self.g_prime_tape, &search, 40);
        let roots = zeros
            .into_iter()
            .map(|w| {
                // Multiplicity m makes N'(root) = (m-1)/m, so m is read off
                // the derivative rather than from a fragile zero cluster.
                let m = match self.derivative_at(w) {
                    Finite(d) => {
                        let m = (1.0 / (1.0 - d.re)).round();
                        if m.is_finite() && (1.0..=64.0).contains(&m) { m as u32 } else { 1 }
                    }
                    Infinity => 1,
                };
                Root { location: w, multiplicity: m }
            })
            .collect();
        RootSet::new(roots)
    }

    pub fn g_at(&self, z: Complex64) -> ExtendedComplex {
        self.g_tape.eval(z)
    }

    pub fn g_prime_at(&self, z: Complex64) -> ExtendedComplex {
        self.g_prime_tape.eval(z)
    }
}

impl ComplexMap for NewtonMap {
    fn eval(&self, z: Complex64) -> ExtendedComplex {
        match self.tape.eval(z) {
            Finite(v) => Finite(v),
            Infinity => {
                // z - g/g' degenerates to 0/0 exactly at a multiple root of
                // g, where the singularity is removable with value z.
                match (self.g_tape.eval(z), self.g_prime_tape.eval(z)) {
                    (Finite(gv), Finite(dv))
                        if crate::extended::near_zero(gv)
                            && crate::extended::near_zero(dv) =>
                    {
                        Finite(z)
                    }
                    _ => Infinity,
                }
            }
        }
    }

    fn derivative_at(&self, z: Complex64) -> ExtendedComplex {
        // g g''/g'^2 is exact and well-conditioned near simple roots and
        // near multiple roots *except* at the numeric root point itself,
        // where it degenerates to 0/0; difference quotients rescue that.
        match self.deriv_tape.eval(z) {
            Finite(v) => Finite(v),
            Infinity => {
                let h = 1e-7 * (1.0 + z.norm());
                let step = Complex64::new(h, 0.0);
                match (self.tape.eval(z + step), self.tape.eval(z - step)) {
                    (Finite(a), Finite(b)) => {
                        crate::extended::sanitize((a - b) / (2.0 * step))
                    }
                    _ => Infinity,
                }
            }
        }
    }

    fn poles_in(&self, region: &Rect) -> Vec<Pole> {
        if let Some(poles) = &self.poles {
            return poles.iter().filter(|p| region.contains(p.location)).copied().collect();
        }
        // Transcendental: find zeros of g' in the window, drop the ones
        // that are zeros of g (removable in N), read multiplicity off the
        // argument principle for g'.
        let candidates =
            newton_zero_search(&self.g_prime_tape, &self.g_second_tape, region, 40);
        let mut out = Vec::new();
        for w in candidates {
            if !region.contains(w) {
                continue;
            }
            match self.g_tape.eval(w) {
                Finite(gv) if gv.norm() > 1e-6 * (1.0 + w.norm()) => {}
                _ => continue,
            }
            let mult = circle_winding(
                |z| self.g_prime_tape.eval(z).finite().filter(|v| v.norm() > 0.0),
                w,
                1e-5,
                96,
            )
            .unwrap_or(1)
            .max(1) as u32;
            out.push(Pole { location: w, multiplicity: mult });
        }
        sort_poles(&mut out);
        out
    }

    fn description(&self) -> String {
        format!("Newton map of g(z) = {}", self.g)
    }
}

/// A formula interpreted directly as the map to iterate and analyze.
pub struct FormulaMap {
    f: Expr,
    tape: Tape,
    deriv_tape: Tape,
    // (denominator, its derivative) for every non-constant Div denominator:
    // within this grammar those are the only pole sources.
    denominators: Vec<(Tape, Tape)>,
}

impl FormulaMap {
    pub fn new(f_raw: &Expr) -> FormulaMap {
        let f = simplify(f_raw);
        let f_prime = simplify(&differentiate(&f));
        let mut dens: Vec<Expr> = Vec::new();
        collect_denominators(&f, &mut dens);
        let denominators = dens
            .iter()
            .map(|d| {
                let dp = simplify(&differentiate(d));
                (Tape::compile(d), Tape::compile(&dp))
            })
            .collect();
        FormulaMap {
            tape: Tape::compile(&f),
            deriv_tape: Tape::compile(&f_prime),
            f,
            denominators,
        }
    }

    pub fn from_formula(src: &str) -> Result<FormulaMap, crate::expr::ParseError> {
        Ok(FormulaMap::new(&crate::expr::parse(src)?))
    }

    pub fn expr(&self) -> &Expr {
        &self.f
    }
}

fn collect_denominators(e: &Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Z | Expr::Const(_) => {}
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            collect_denominators(a, out);
            collect_denominators(b, out);
        }
        Expr::Div(a, b) => {
            collect_denominators(a, out);
            collect_denominators(b, out);
            if !b.is_constant() {
                let d = simplify(b);
                if !out.contains(&d) {
                    out.push(d);
                }
            }
        }
        Expr::Pow(a, _) | Expr::Neg(a) | Expr::Exp(a) | Expr::Sin(a) | Expr::Cos(a) => {
            collect_denominators(a, out);
        }
    }
}

impl ComplexMap for FormulaMap {
    fn eval(&self, z: Complex64) -> ExtendedComplex {
        self.tape.eval(z)
    }

    fn derivative_at(&self, z: Complex64) -> ExtendedComplex {
        self.deriv_tape.eval(z)
    }

    fn poles_in(&self, region: &Rect) -> Vec<Pole> {
        let mut candidates: Vec<Complex64> = Vec::new();
        for (d, dp) in &self.denominators {
            for w in newton_zero_search(d, dp, region, 32) {
                if region.contains(w)
                    && !candidates.iter().any(|&c| (c - w).norm() <= 1e-7)
                {
                    candidates.push(w);
                }
            }
        }
        let mut out = Vec::new();
        for w in candidates {
            // The winding of f around a small circle counts zeros minus
            // poles; an isolated pole of order m reads -m. (A zero of f
            // within the probe radius of the pole would mask it; such maps
            // are outside the supported desk scale.)
            let wind = circle_winding(
                |z| self.tape.eval(z).finite().filter(|v| v.norm() > 0.0),
                w,
                1e-5,
                96,
            );
            if let Some(m) = wind {
                if m < 0 {
                    out.push(Pole { location: w, multiplicity: (-m) as u32 });
                }
            }
        }
        sort_poles(&mut out);
        out
    }

    fn description(&self) -> String {
        format!("f(z) = {}", self.f)
    }
}

fn sort_poles(poles: &mut [Pole]) {
    poles.sort_by(|a, b| {
        (a.location.re, a.location.im)
            .partial_cmp(&(b.location.re, b.location.im))
            .expect("pole coordinates are finite")
    });
}

/// Damped-then-plain Newton search for zeros of `f` seeded on a uniform
/// grid over `region`. Deterministic; duplicates collapse at 1e-7.
fn newton_zero_search(f: &Tape, df: &Tape, region: &Rect, seeds_per_axis: usize)
    -> Vec<Complex64>
{
    let mut found: Vec<Complex64> = Vec::new();
    let accept = region.inflate(1.05);
    for sj in 0..seeds_per_axis {
        for si in 0..seeds_per_axis {
            let z0 = Complex64::new(
                region.re_min + (si as f64 + 0.5) / seeds_per_axis as f64 * region.width(),
                region.im_min + (sj as f64 + 0.5) / seeds_per_axis as f64 * region.height(),
            );
            let mut z = z0;
            let mut ok = false;
            for it in 0..90 {
                let fv = match f.eval(z) {
                    Finite(v) => v,
                    Infinity => break,
                };
                let scale = 1.0 + z.norm();
                if fv.norm() < 1e-11 * scale {
                    // Acceptable residual; keep polishing so approximants
                    // of a multiple zero collapse onto one point instead
                    // of a residual-wide cloud.
                    ok = true;
                }
                let dv = match df.eval(z) {
                    Finite(v) if v.norm() > 1e-290 => v,
                    _ => break,
                };
                let mut step = fv / dv;
                // Early damping tames wild seeds; full steps finish.
                if it < 8 {
                    step *= 0.5;
                }
                if !step.re.is_finite() || !step.im.is_finite() || step.norm() > 4.0 * scale {
                    break;
                }
                z -= step;
                if step.norm() < 1e-14 * scale {
                    break;
                }
                if !accept.inflate(8.0).contains(z) {
                    break;
                }
            }
            if ok && accept.contains(z) && !found.iter().any(|&w| (w - z).norm() <= 1e-7) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
    found
}

/// Winding number of `t -> eval(center + r e^{2πit})` around 0, from exact
/// angle sums of sampled values. `None` when any sample is missing (∞ or 0).
fn circle_winding(
    eval: impl Fn(Complex64) -> Option<Complex64>,
    center: Complex64,
    radius: f64,
    samples: usize,
) -> Option<i32> {
    let mut vals = Vec::with_capacity(samples);
    for k in 0..samples {
        let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
        vals.push(eval(center + Complex64::from_polar(radius, t))?);
    }
    let mut total = 0.0;
    for k in 0..samples {
        let a = vals[k];
        let b = vals[(k + 1) % samples];
        // Angle of b relative to a; |Δ| < π keeps the sum exact for
        // reasonably dense sampling.
        total += (b / a).arg();
    }
    Some((total / (2.0 * std::f64::consts::PI)).round() as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::poly::poly_eval;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn newton(src: &str) -> NewtonMap {
        NewtonMap::new(&parse(src).unwrap()).unwrap()
    }

    #[test]
    fn cubic_newton_map_anatomy() {
        let n = newton("z^3-1");
        assert_eq!(*n.kind(), MapKind::Polynomial { degree: 3 });
        let roots = n.roots().unwrap();
        assert_eq!(roots.len(), 3);
        assert_eq!(roots.total_multiplicity(), 3);
        // Single pole at the origin of order 2 (g' = 3z^2).
        let poles = n.poles_in(&Rect::new(-1.0, 1.0, -1.0, 1.0));
        assert_eq!(poles.len(), 1);
        assert_eq!(poles[0].multiplicity, 2);
        assert!(poles[0].location.norm() < 1e-12);
        // N(z) = (2z^3+1)/(3z^2) as exact coefficients.
        let rf = n.rational_form().unwrap();
        assert_eq!(rf.numerator, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(rf.denominator, vec![c(0.0, 0.0), c(0.0, 0.0), c(3.0, 0.0)]);
    }

    #[test]
    fn newton_map_values() {
        let n = newton("z^2-1");
        // N(z) = (z^2+1)/(2z).
        assert_eq!(n.eval(c(2.0, 0.0)), Finite(c(1.25, 0.0)));
        assert_eq!(n.eval(c(0.0, 0.0)), Infinity);
        // Roots are fixed: N(1) = 1 exactly.
        assert_eq!(n.eval(c(1.0, 0.0)), Finite(c(1.0, 0.0)));
        // Simple roots are superattracting: N'(1) = 0.
        let d = n.derivative_at(c(1.0, 0.0)).finite().unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn multiple_root_derivative_is_half() {
        // g = (z-1)^2: N'(root) = (m-1)/m = 1/2.
        let n = newton("(z-1)^2");
        let root = n.roots().unwrap().roots()[0];
        assert_eq!(root.multiplicity, 2);
        let d = n.derivative_at(root.location).finite().unwrap();
        assert!((d - c(0.5, 0.0)).norm() < 1e-5, "N' at double root = {d}");
    }

    #[test]
    fn z_exp_z_is_rational_special() {
        let n = newton("z*exp(z)");
        assert_eq!(*n.kind(), MapKind::RationalSpecial);
        let roots = n.roots().unwrap();
        assert_eq!(roots.len(), 1);
        assert!(roots.roots()[0].location.norm() < 1e-12);
        let poles = n.poles_in(&Rect::new(-2.0, 2.0, -2.0, 2.0));
        assert_eq!(poles.len(), 1);
        assert!((poles[0].location - c(-1.0, 0.0)).norm() < 1e-9);
        // N = z^2/(1+z) exactly.
        let rf = n.rational_form().unwrap();
        assert_eq!(rf.numerator, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert_eq!(rf.denominator, vec![c(1.0, 0.0), c(1.0, 0.0)]);
        // And the direct z - g/g' evaluation agrees with it.
        for &z in &[c(0.3, 0.2), c(-0.4, 1.1), c(2.0, -0.5)] {
            let direct = n.eval(z).finite().unwrap();
            let viara = poly_eval(&rf.numerator, z) / poly_eval(&rf.denominator, z);
            assert!((direct - viara).norm() < 1e-12 * (1.0 + viara.norm()));
        }
    }

    #[test]
    fn degenerate_functions_are_rejected() {
        assert!(matches!(
            NewtonMap::new(&parse("3+0i").unwrap()),
            Err(MapError::ConstantFunction)
        ));
        assert!(matches!(
            NewtonMap::new(&parse("2*z-7").unwrap()),
            Err(MapError::DegenerateLinear)
        ));
        assert!(matches!(
            NewtonMap::new(&parse("exp(2)").unwrap()),
            Err(MapError::ConstantFunction)
        ));
    }

    #[test]
    fn transcendental_kind_finds_roots_and_poles_numerically() {
        // g = sin(z): roots at k·π, poles of N at zeros of cos (k+1/2)π.
        let n = newton("sin(z)");
        assert_eq!(*n.kind(), MapKind::Transcendental);
        let region = Rect::new(-4.0, 4.0, -1.0, 1.0);
        let roots = n.roots_in(&region);
        let expect = [-std::f64::consts::PI, 0.0, std::f64::consts::PI];
        for want in expect {
            assert!(
                roots.iter().any(|r| (r.location - c(want, 0.0)).norm() < 1e-7),
                "missing root near {want}"
            );
        }
        let poles = n.poles_in(&region);
        for want in [-std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2] {
            let hit = poles
                .iter()
                .find(|p| (p.location - c(want, 0.0)).norm() < 1e-7)
                .unwrap_or_else(|| panic!("missing pole near {want}"));
            assert_eq!(hit.multiplicity, 1);
        }
    }

    #[test]
    fn formula_map_poles_and_values() {
        let f = FormulaMap::from_formula("z/2+1/z").unwrap();
        assert_eq!(f.eval(c(1.0, 0.0)), Finite(c(1.5, 0.0)));
        assert_eq!(f.eval(c(0.0, 0.0)), Infinity);
        let poles = f.poles_in(&Rect::new(-1.0, 1.0, -1.0, 1.0));
        assert_eq!(poles.len(), 1);
        assert!(poles[0].location.norm() < 1e-9);
        assert_eq!(poles[0].multiplicity, 1);
        // Fixed points at ±√2 are superattracting for this map.
        let s = 2.0f64.sqrt();
        let d = f.derivative_at(c(s, 0.0)).finite().unwrap();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn formula_map_higher_order_pole() {
        let f = FormulaMap::from_formula("1/z^2+6").unwrap();
        let poles = f.poles_in(&Rect::new(-1.0, 1.0, -1.0, 1.0));
        assert_eq!(poles.len(), 1);
        assert_eq!(poles[0].multiplicity, 2);
    }

    #[test]
    fn pole_of_n_matches_rational_form_prediction() {
        // For g = z^3 - 1 the finite preimages of ∞ under one N step are
        // the pole 0; points mapping onto the pole satisfy 2w^3 + 1 = 0.
        let n = newton("z^3-1");
        let w = (-0.5f64).cbrt();
        let image = n.eval(c(w, 0.0)).finite().unwrap();
        assert!(image.norm() < 1e-12, "N({w}) = {image} should be the pole 0");
        // The pole itself is exact; one N step from the rounded prepole
        // lands within ~1e-17 of it, so the following step merely blows up.
        assert_eq!(n.eval(c(0.0, 0.0)), Infinity);
        match n.eval(image) {
            Infinity => {}
            Finite(v) => assert!(v.norm() > 1e10, "step from near-pole stayed small: {v}"),
        }
    }

    #[test]
    fn rect_quadrants_tile_the_rect() {
        let r = Rect::new(-1.0, 3.0, -2.0, 2.0);
        let qs = r.quadrants();
        let area: f64 = qs.iter().map(|q| q.width() * q.height()).sum();
        assert!((area - r.width() * r.height()).abs() < 1e-12);
        for q in &qs {
            assert!(q.max_dim() <= r.max_dim() / 2.0 + 1e-12);
        }
    }
}
