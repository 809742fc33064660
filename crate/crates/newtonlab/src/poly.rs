//! Dense complex polynomials: coefficient arithmetic and root finding.
//!
//! Coefficients are stored ascending (`coeffs[k]` multiplies `z^k`). The
//! root finder runs the Aberth–Ehrlich simultaneous iteration, deflates
//! exact roots at the origin first (so monomial factors keep their exact
//! multiplicity), and then clusters nearby approximants to recover
//! multiplicities of repeated roots.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("polynomial must have degree at least 1 (got {0})")]
    DegreeTooSmall(usize),
    #[error("root finding failed to converge: {0}")]
    NonConvergence(String),
}

/// A located root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: u32,
}

/// Roots sorted by (re, im), multiplicities summing to the degree.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RootSet {
    roots: Vec<Root>,
}

impl RootSet {
    /// Build from located roots; sorts into the canonical (re, im) order.
    pub fn new(mut roots: Vec<Root>) -> Self {
        roots.sort_by(|a, b| {
            (a.location.re, a.location.im)
                .partial_cmp(&(b.location.re, b.location.im))
                .expect("root coordinates are finite")
        });
        RootSet { roots }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Root> {
        self.roots.iter()
    }

    pub fn get(&self, i: usize) -> Option<&Root> {
        self.roots.get(i)
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    /// Index and distance of the root closest to `z`.
    pub fn nearest(&self, z: Complex64) -> Option<(usize, f64)> {
        self.roots
            .iter()
            .enumerate()
            .map(|(i, r)| (i, (r.location - z).norm()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("distances are finite"))
    }

    pub fn total_multiplicity(&self) -> u32 {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

impl<'a> IntoIterator for &'a RootSet {
    type Item = &'a Root;
    type IntoIter = std::slice::Iter<'a, Root>;
    fn into_iter(self) -> Self::IntoIter {
        self.roots.iter()
    }
}

/// Drop trailing (highest-degree) zero coefficients. `[0]` stays `[0]`.
pub fn trim(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut v = coeffs.to_vec();
    while v.len() > 1 && v.last().map_or(false, |c| c.re == 0.0 && c.im == 0.0) {
        v.pop();
    }
    v
}

pub fn degree(coeffs: &[Complex64]) -> usize {
    trim(coeffs).len().saturating_sub(1)
}

/// Horner evaluation.
pub fn poly_eval(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        acc = acc * z + c;
    }
    acc
}

/// Exact coefficient-level derivative.
pub fn poly_derivative(coeffs: &[Complex64]) -> Vec<Complex64> {
    if coeffs.len() <= 1 {
        return vec![Complex64::new(0.0, 0.0)];
    }
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub fn poly_add(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            a.get(k).copied().unwrap_or_default() + b.get(k).copied().unwrap_or_default()
        })
        .collect()
}

pub fn poly_sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default()
        })
        .collect()
}

pub fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn poly_scale(a: &[Complex64], s: Complex64) -> Vec<Complex64> {
    a.iter().map(|&c| c * s).collect()
}

const MAX_ABERTH_ITERS: usize = 400;
/// Approximants closer than this are treated as one root with multiplicity.
pub const ROOT_CLUSTER_TOL: f64 = 1e-7;

/// All roots of the polynomial with the given ascending coefficients.
///
/// The residual contract is `|p(r)| <= 1e-10 * max|coeff| * (1 + |r|)^deg`
/// for every reported root; failing it reports non-convergence rather than
/// returning a bad answer. Multiplicities come from clustering approximants
/// within [`ROOT_CLUSTER_TOL`], which resolves simple and double roots at
/// desk scale (higher multiplicities are limited by double precision).
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<RootSet, PolyError> {
    let trimmed = trim(coeffs);
    let deg = trimmed.len() - 1;
    if deg < 1 {
        return Err(PolyError::DegreeTooSmall(deg));
    }

    // Exact deflation of z = 0 roots: trailing zero constant terms.
    let mut low = 0usize;
    while low < deg && trimmed[low].re == 0.0 && trimmed[low].im == 0.0 {
        low += 1;
    }
    let mut found: Vec<Root> = Vec::new();
    if low > 0 {
        found.push(Root { location: Complex64::new(0.0, 0.0), multiplicity: low as u32 });
    }
    let reduced = &trimmed[low..];
    let rdeg = reduced.len() - 1;

    if rdeg > 0 {
        let lead = reduced[rdeg];
        let monic: Vec<Complex64> = reduced.iter().map(|&c| c / lead).collect();
        let approx = aberth(&monic)?;
        found.extend(cluster(&approx));
    }

    // Residual validation against the original coefficients.
    let maxc = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for r in &found {
        let residual = poly_eval(&trimmed, r.location).norm();
        let budget = 1e-10 * maxc * (1.0 + r.location.norm()).powi(deg as i32);
        if residual > budget {
            return Err(PolyError::NonConvergence(format!(
                "root {} has residual {residual:.3e} above budget {budget:.3e}",
                r.location
            )));
        }
    }
    Ok(RootSet::new(found))
}

// Aberth–Ehrlich on a monic polynomial with nonzero constant term.
fn aberth(monic: &[Complex64]) -> Result<Vec<Complex64>, PolyError> {
    let deg = monic.len() - 1;
    if deg == 1 {
        return Ok(vec![-monic[0]]);
    }
    let deriv = poly_derivative(monic);

    // Deterministic initial ring inside the Cauchy bound, rotated off the
    // axes so symmetric root patterns do not stall the iteration.
    let bound = 1.0 + monic[..deg].iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut zs: Vec<Complex64> = (0..deg)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.37) / deg as f64;
            Complex64::from_polar(0.8 * bound, t)
        })
        .collect();

    // Evaluation noise floor: once |p(z)| is at rounding level, the
    // approximant cannot improve and counts as converged (repeated roots
    // stall above the step tolerance long before reaching it).
    let abs_sum = |z: Complex64| -> f64 {
        let az = z.norm();
        let mut acc = 0.0;
        for &c in monic.iter().rev() {
            acc = acc * az + c.norm();
        }
        acc
    };

    let mut done = vec![false; deg];
    for _ in 0..MAX_ABERTH_ITERS {
        let mut moved = false;
        for i in 0..deg {
            if done[i] {
                continue;
            }
            let z = zs[i];
            let pv = poly_eval(monic, z);
            if pv.norm() <= 8.0 * (deg as f64) * f64::EPSILON * abs_sum(z) {
                done[i] = true;
                continue;
            }
            let dv = poly_eval(&deriv, z);
            if dv.norm() == 0.0 {
                // Sitting on a critical point: nudge and retry next sweep.
                zs[i] += Complex64::from_polar(1e-3 * (1.0 + z.norm()), 0.7 + i as f64);
                moved = true;
                continue;
            }
            let w = pv / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, &other) in zs.iter().enumerate() {
                if j != i {
                    let d = z - other;
                    if d.norm() > 1e-300 {
                        s += Complex64::new(1.0, 0.0) / d;
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() < 1e-12 { w } else { w / denom };
            zs[i] = z - step;
            if step.norm() > 1e-14 * (1.0 + zs[i].norm()) {
                moved = true;
            } else {
                done[i] = true;
            }
        }
        if !moved {
            // Final polish: a few plain Newton steps, kept only when they
            // lower the residual.
            for z in zs.iter_mut() {
                let mut best = *z;
                let mut best_res = poly_eval(monic, best).norm();
                let mut cur = best;
                for _ in 0..5 {
                    let dv = poly_eval(&deriv, cur);
                    if dv.norm() == 0.0 {
                        break;
                    }
                    cur -= poly_eval(monic, cur) / dv;
                    let res = poly_eval(monic, cur).norm();
                    if res < best_res {
                        best_res = res;
                        best = cur;
                    }
                }
                *z = best;
            }
            return Ok(zs);
        }
    }
    Err(PolyError::NonConvergence(format!(
        "Aberth iteration did not settle within {MAX_ABERTH_ITERS} sweeps"
    )))
}

// Greedy clustering of approximants into multiple roots.
fn cluster(approx: &[Complex64]) -> Vec<Root> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    for &z in approx {
        match groups
            .iter_mut()
            .find(|g| g.iter().any(|&w| (w - z).norm() <= ROOT_CLUSTER_TOL))
        {
            Some(g) => g.push(z),
            None => groups.push(vec![z]),
        }
    }
    groups
        .into_iter()
        .map(|g| {
            let n = g.len() as f64;
            let mean = g.iter().sum::<Complex64>() / n;
            Root { location: mean, multiplicity: g.len() as u32 }
        })
        .collect()
}
