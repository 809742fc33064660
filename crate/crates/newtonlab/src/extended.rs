//! Complex values extended with a single point at infinity.
//!
//! Every arithmetic kernel in this module is *total*: no input combination
//! produces a NaN component or panics. Overflow beyond a fixed modulus
//! cutoff collapses to [`ExtendedComplex::Infinity`], and dividing by a
//! denominator whose modulus is below a symmetric cutoff does the same.
//! This makes orbit iteration near poles well-defined without any special
//! casing at the call sites.

use num_complex::Complex64;

/// Values with modulus above this are treated as the point at infinity.
pub const INFINITY_CUTOFF: f64 = 1e300;

/// Denominators with modulus below this are treated as zero (quotient = ∞).
pub const NEAR_ZERO_CUTOFF: f64 = 1e-300;

/// A point of the Riemann sphere: either a finite complex number or ∞.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

pub use ExtendedComplex::{Finite, Infinity};

impl ExtendedComplex {
    pub fn is_finite(self) -> bool {
        matches!(self, Finite(_))
    }

    pub fn is_infinity(self) -> bool {
        matches!(self, Infinity)
    }

    /// The finite value, if there is one.
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Finite(z) => Some(z),
            Infinity => None,
        }
    }
}

impl From<Complex64> for ExtendedComplex {
    fn from(z: Complex64) -> Self {
        sanitize(z)
    }
}

/// Clamp a raw complex result onto the sphere: NaN components or modulus
/// beyond [`INFINITY_CUTOFF`] become ∞, everything else stays finite.
#[inline]
pub fn sanitize(z: Complex64) -> ExtendedComplex {
    let (ar, ai) = (z.re.abs(), z.im.abs());
    // Fast accept: both components comfortably below the cutoff means the
    // modulus is too (sqrt(2) * 7e299 < 1e300), and NaN fails the compare.
    if ar < 7.0e299 && ai < 7.0e299 {
        return Finite(z);
    }
    if z.re.is_nan() || z.im.is_nan() {
        return Infinity;
    }
    if ar.hypot(ai) > INFINITY_CUTOFF {
        Infinity
    } else {
        Finite(z)
    }
}

/// True when the modulus of `z` is below [`NEAR_ZERO_CUTOFF`].
#[inline]
pub fn near_zero(z: Complex64) -> bool {
    let (ar, ai) = (z.re.abs(), z.im.abs());
    // Modulus dominates each component, so either one being large settles it.
    if ar >= NEAR_ZERO_CUTOFF || ai >= NEAR_ZERO_CUTOFF {
        return false;
    }
    ar.hypot(ai) < NEAR_ZERO_CUTOFF
}

#[inline]
pub fn xc_add(a: ExtendedComplex, b: ExtendedComplex) -> ExtendedComplex {
    match (a, b) {
        (Finite(x), Finite(y)) => sanitize(x + y),
        _ => Infinity,
    }
}

#[inline]
pub fn xc_sub(a: ExtendedComplex, b: ExtendedComplex) -> ExtendedComplex {
    match (a, b) {
        (Finite(x), Finite(y)) => sanitize(x - y),
        _ => Infinity,
    }
}

#[inline]
pub fn xc_mul(a: ExtendedComplex, b: ExtendedComplex) -> ExtendedComplex {
    match (a, b) {
        (Finite(x), Finite(y)) => sanitize(x * y),
        _ => Infinity,
    }
}

#[inline]
pub fn xc_neg(a: ExtendedComplex) -> ExtendedComplex {
    match a {
        Finite(x) => Finite(-x),
        Infinity => Infinity,
    }
}

/// Totalized division. Finite / ∞ = 0; anything / (near-zero) = ∞; ∞ wins
/// otherwise. The finite/finite branch scales by the largest denominator
/// component so legitimate huge denominators do not overflow to NaN.
#[inline]
pub fn xc_div(a: ExtendedComplex, b: ExtendedComplex) -> ExtendedComplex {
    match (a, b) {
        (Finite(x), Finite(y)) => {
            if near_zero(y) {
                return Infinity;
            }
            let s = y.re.abs().max(y.im.abs());
            let (br, bi) = (y.re / s, y.im / s);
            let d = br * br + bi * bi;
            let re = (x.re * br + x.im * bi) / d / s;
            let im = (x.im * br - x.re * bi) / d / s;
            sanitize(Complex64::new(re, im))
        }
        (Finite(_), Infinity) => Finite(Complex64::new(0.0, 0.0)),
        (Infinity, _) => Infinity,
    }
}

#[inline]
pub fn xc_exp(a: ExtendedComplex) -> ExtendedComplex {
    match a {
        Finite(x) => sanitize(x.exp()),
        Infinity => Infinity,
    }
}

#[inline]
pub fn xc_sin(a: ExtendedComplex) -> ExtendedComplex {
    match a {
        Finite(x) => sanitize(x.sin()),
        Infinity => Infinity,
    }
}

#[inline]
pub fn xc_cos(a: ExtendedComplex) -> ExtendedComplex {
    match a {
        Finite(x) => sanitize(x.cos()),
        Infinity => Infinity,
    }
}

/// Integer power by repeated multiplication. `u^0 = 1` for every `u`,
/// including ∞, matching the convention that the exponent-zero power is
/// the constant function 1.
#[inline]
pub fn xc_powu(a: ExtendedComplex, n: u32) -> ExtendedComplex {
    if n == 0 {
        return Finite(Complex64::new(1.0, 0.0));
    }
    let mut acc = a;
    for _ in 1..n {
        acc = xc_mul(acc, a);
        if acc.is_infinity() {
            return Infinity;
        }
    }
    acc
}
