//! Orbit iteration and basin-of-attraction rendering.
//!
//! An orbit stops for one of four reasons: it lands within `eps` of a known
//! root (converged), its modulus exceeds the escape radius for several
//! consecutive iterates (escaped), an iterate maps exactly to ∞ (hit-pole),
//! or the iteration budget runs out (undecided). Near-pole points are *not*
//! treated as pole hits — they legitimately take one large step and keep
//! going; only exact ∞ counts.
//!
//! Rendering walks a pixel grid in parallel. Work is partitioned by output
//! row, each cell is computed independently, and nothing about the result
//! depends on scheduling, so renders are byte-identical across worker
//! counts.

use crate::map::{ComplexMap, Rect};
use crate::poly::RootSet;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Convergence tolerance: orbit is done when within this of a root.
pub const DEFAULT_EPS: f64 = 1e-9;
/// Iteration budget for basin rendering.
pub const RENDER_MAX_ITER: u32 = 256;
/// Iteration budget for a single diagnostic orbit.
pub const ORBIT_MAX_ITER: u32 = 10_000;
/// Modulus beyond which an iterate counts toward escape.
pub const ESCAPE_RADIUS: f64 = 1e8;
/// Consecutive beyond-radius iterates required to call it escaped.
pub const ESCAPE_PERSISTENCE: u32 = 3;

#[derive(Debug, Error, PartialEq)]
pub enum DynamicsError {
    #[error("palette has {got} colors but the grid references root index {needed}")]
    PaletteTooSmall { needed: usize, got: usize },
    #[error("grid JSON is malformed: {0}")]
    MalformedGrid(String),
}

/// Per-cell outcome of basin iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellLabel {
    /// Converged to the root with this index in the accompanying root set.
    Root(u16),
    Escaped,
    HitPole,
    Undecided,
}

impl CellLabel {
    /// Signed code used in grid JSON: root index, or -1/-2/-3 for
    /// undecided/escaped/hit-pole.
    pub fn code(self) -> i32 {
        match self {
            CellLabel::Root(k) => k as i32,
            CellLabel::Undecided => -1,
            CellLabel::Escaped => -2,
            CellLabel::HitPole => -3,
        }
    }

    pub fn from_code(code: i32) -> Option<CellLabel> {
        match code {
            -1 => Some(CellLabel::Undecided),
            -2 => Some(CellLabel::Escaped),
            -3 => Some(CellLabel::HitPole),
            k if (0..=u16::MAX as i32).contains(&k) => Some(CellLabel::Root(k as u16)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrbitOutcome {
    Converged { root: usize },
    Escaped,
    HitPole,
    Undecided,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitResult {
    pub outcome: OrbitOutcome,
    /// Steps taken before stopping.
    pub iterations: u32,
    /// Last finite iterate; `None` exactly when the orbit hit ∞.
    pub final_point: Option<Complex64>,
}

#[derive(Debug, Clone, Copy)]
pub struct OrbitParams {
    pub max_iter: u32,
    pub eps: f64,
    pub escape_radius: f64,
    pub escape_persistence: u32,
}

impl Default for OrbitParams {
    fn default() -> Self {
        OrbitParams {
            max_iter: ORBIT_MAX_ITER,
            eps: DEFAULT_EPS,
            escape_radius: ESCAPE_RADIUS,
            escape_persistence: ESCAPE_PERSISTENCE,
        }
    }
}

impl OrbitParams {
    pub fn for_render(max_iter: u32, eps: f64) -> OrbitParams {
        OrbitParams { max_iter, eps, ..OrbitParams::default() }
    }
}

/// Iterate `map` from `z0` until convergence to a root in `roots`, escape,
/// a pole hit, or exhaustion. Convergence is checked before each step, so
/// starting on a root reports 0 iterations.
pub fn iterate_orbit(
    map: &dyn ComplexMap,
    z0: Complex64,
    roots: &RootSet,
    params: &OrbitParams,
) -> OrbitResult {
    let eps_sqr = params.eps * params.eps;
    let radius_sqr = params.escape_radius * params.escape_radius;
    let mut z = z0;
    let mut streak = 0u32;
    for k in 0..params.max_iter {
        let mut best = f64::INFINITY;
        let mut best_idx = 0usize;
        for (i, r) in roots.iter().enumerate() {
            let d = (r.location - z).norm_sqr();
            if d < best {
                best = d;
                best_idx = i;
            }
        }
        if best < eps_sqr {
            return OrbitResult {
                outcome: OrbitOutcome::Converged { root: best_idx },
                iterations: k,
                final_point: Some(z),
            };
        }
        if z.norm_sqr() > radius_sqr {
            streak += 1;
            if streak >= params.escape_persistence {
                return OrbitResult {
                    outcome: OrbitOutcome::Escaped,
                    iterations: k,
                    final_point: Some(z),
                };
            }
        } else {
            streak = 0;
        }
        match map.eval(z) {
            crate::extended::Finite(w) => z = w,
            crate::extended::Infinity => {
                return OrbitResult {
                    outcome: OrbitOutcome::HitPole,
                    iterations: k,
                    final_point: None,
                }
            }
        }
    }
    OrbitResult {
        outcome: OrbitOutcome::Undecided,
        iterations: params.max_iter,
        final_point: Some(z),
    }
}

/// A rendered basin grid: per-cell labels and iteration counts over a
/// rectangular window, row 0 at the top.
#[derive(Debug, Clone, PartialEq)]
pub struct BasinGrid {
    pub window: Rect,
    pub nx: usize,
    pub ny: usize,
    pub max_iter: u32,
    pub eps: f64,
    labels: Vec<CellLabel>,
    iterations: Vec<u32>,
}

impl BasinGrid {
    pub fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.nx && j < self.ny);
        j * self.nx + i
    }

    pub fn label(&self, i: usize, j: usize) -> CellLabel {
        self.labels[self.idx(i, j)]
    }

    pub fn iterations_at(&self, i: usize, j: usize) -> u32 {
        self.iterations[self.idx(i, j)]
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn iteration_counts(&self) -> &[u32] {
        &self.iterations
    }

    /// Center of pixel `(i, j)`: column `i` advances the real axis,
    /// row `j` descends the imaginary axis from the top.
    pub fn point_at(&self, i: usize, j: usize) -> Complex64 {
        let c = self.window.center();
        Complex64::new(
            c.re + ((i as f64 + 0.5) / self.nx as f64 - 0.5) * self.window.width(),
            c.im + (0.5 - (j as f64 + 0.5) / self.ny as f64) * self.window.height(),
        )
    }

    /// Pixel containing the point, if inside the window.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        if !self.window.contains(z) {
            return None;
        }
        let fx = (z.re - self.window.re_min) / self.window.width() * self.nx as f64;
        let fy = (self.window.im_max - z.im) / self.window.height() * self.ny as f64;
        let i = (fx.floor() as isize).clamp(0, self.nx as isize - 1) as usize;
        let j = (fy.floor() as isize).clamp(0, self.ny as isize - 1) as usize;
        Some((i, j))
    }

    /// Cell counts by outcome: (converged, escaped, hit_pole, undecided).
    pub fn tally(&self) -> (usize, usize, usize, usize) {
        let mut t = (0, 0, 0, 0);
        for l in &self.labels {
            match l {
                CellLabel::Root(_) => t.0 += 1,
                CellLabel::Escaped => t.1 += 1,
                CellLabel::HitPole => t.2 += 1,
                CellLabel::Undecided => t.3 += 1,
            }
        }
        t
    }

    /// Assemble a grid from parts (used by JSON loading and tests).
    pub fn from_parts(
        window: Rect,
        nx: usize,
        ny: usize,
        max_iter: u32,
        eps: f64,
        labels: Vec<CellLabel>,
        iterations: Vec<u32>,
    ) -> Result<BasinGrid, DynamicsError> {
        if labels.len() != nx * ny || iterations.len() != nx * ny {
            return Err(DynamicsError::MalformedGrid(format!(
                "expected {} cells, got {} labels / {} iteration counts",
                nx * ny,
                labels.len(),
                iterations.len()
            )));
        }
        Ok(BasinGrid { window, nx, ny, max_iter, eps, labels, iterations })
    }
}

/// Render basins of attraction over a window. Row-parallel and
/// scheduling-independent: identical inputs give identical grids.
pub fn render_basins(
    map: &dyn ComplexMap,
    roots: &RootSet,
    window: Rect,
    nx: usize,
    ny: usize,
    max_iter: u32,
    eps: f64,
) -> BasinGrid {
    assert!(nx > 0 && ny > 0, "empty render target");
    assert!(roots.len() <= u16::MAX as usize, "too many roots to label");
    let mut grid = BasinGrid {
        window,
        nx,
        ny,
        max_iter,
        eps,
        labels: vec![CellLabel::Undecided; nx * ny],
        iterations: vec![0; nx * ny],
    };
    let params = OrbitParams::for_render(max_iter, eps);
    let (labels, iterations) = (&mut grid.labels, &mut grid.iterations);
    labels
        .par_chunks_mut(nx)
        .zip(iterations.par_chunks_mut(nx))
        .enumerate()
        .for_each(|(j, (lrow, irow))| {
            for i in 0..nx {
                let c = window.center();
                let z0 = Complex64::new(
                    c.re + ((i as f64 + 0.5) / nx as f64 - 0.5) * window.width(),
                    c.im + (0.5 - (j as f64 + 0.5) / ny as f64) * window.height(),
                );
                let r = iterate_orbit(map, z0, roots, &params);
                lrow[i] = match r.outcome {
                    OrbitOutcome::Converged { root } => CellLabel::Root(root as u16),
                    OrbitOutcome::Escaped => CellLabel::Escaped,
                    OrbitOutcome::HitPole => CellLabel::HitPole,
                    OrbitOutcome::Undecided => CellLabel::Undecided,
                };
                irow[i] = r.iterations;
            }
        });
    grid
}

/// Color of cells that exhausted their budget (proxy for the Julia set).
pub const COLOR_UNDECIDED: [u8; 3] = [0, 0, 0];
/// Color of escaped cells.
pub const COLOR_ESCAPED: [u8; 3] = [255, 255, 255];
/// Color of cells whose orbit hit a pole exactly.
pub const COLOR_HIT_POLE: [u8; 3] = [128, 128, 128];

/// Encode the grid as a binary PPM (P6). Basin cells take the palette color
/// of their root, dimmed linearly with iteration count down to a 30% floor;
/// the special outcomes use fixed colors.
pub fn ppm_bytes(grid: &BasinGrid, palette: &[[u8; 3]]) -> Result<Vec<u8>, DynamicsError> {
    ppm_bytes_marked(grid, palette, None)
}

/// Same as [`ppm_bytes`], with an optional per-cell overlay painted on top
/// (used by audits to flag offending components).
pub fn ppm_bytes_marked(
    grid: &BasinGrid,
    palette: &[[u8; 3]],
    overlay: Option<(&[bool], [u8; 3])>,
) -> Result<Vec<u8>, DynamicsError> {
    if let Some((marks, _)) = overlay {
        assert_eq!(marks.len(), grid.labels.len(), "overlay size mismatch");
    }
    let mut needed = 0usize;
    for l in &grid.labels {
        if let CellLabel::Root(k) = l {
            needed = needed.max(*k as usize + 1);
        }
    }
    if needed > palette.len() {
        return Err(DynamicsError::PaletteTooSmall { needed: needed - 1, got: palette.len() });
    }

    let mut out = Vec::with_capacity(32 + grid.labels.len() * 3);
    out.extend_from_slice(format!("P6\n{} {}\n255\n", grid.nx, grid.ny).as_bytes());
    let denom = grid.max_iter.max(1) as f64;
    for (idx, l) in grid.labels.iter().enumerate() {
        let rgb = if let Some((marks, color)) = overlay {
            if marks[idx] {
                out.extend_from_slice(&color);
                continue;
            } else {
                *l
            }
        } else {
            *l
        };
        match rgb {
            CellLabel::Root(k) => {
                let base = palette[k as usize];
                let dim = (1.0 - 0.7 * grid.iterations[idx] as f64 / denom).max(0.3);
                out.extend(base.iter().map(|&c| (c as f64 * dim).round() as u8));
            }
            CellLabel::Escaped => out.extend_from_slice(&COLOR_ESCAPED),
            CellLabel::HitPole => out.extend_from_slice(&COLOR_HIT_POLE),
            CellLabel::Undecided => out.extend_from_slice(&COLOR_UNDECIDED),
        }
    }
    Ok(out)
}

/// Evenly spaced distinguishable colors for `n` basins.
pub fn default_palette(n: usize) -> Vec<[u8; 3]> {
    (0..n.max(1))
        .map(|k| {
            let h = k as f64 / n.max(1) as f64 * 360.0;
            hsv_to_rgb(h, 0.85, 0.95)
        })
        .collect()
}

fn hsv_to_rgb(h: f64, s: f64, v: f64) -> [u8; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [
        ((r + m) * 255.0).round() as u8,
        ((g + m) * 255.0).round() as u8,
        ((b + m) * 255.0).round() as u8,
    ]
}

// ---------------------------------------------------------------------
// Grid JSON: {"window": {...}, "nx", "ny", "max_iter", "eps",
// "labels": [i32 codes], "iterations": [u32], "roots": [[re,im]]? }

#[derive(Serialize, Deserialize)]
struct WindowJson {
    center: [f64; 2],
    width: f64,
    height: f64,
}

#[derive(Serialize, Deserialize)]
struct GridJson {
    window: WindowJson,
    nx: usize,
    ny: usize,
    max_iter: u32,
    eps: f64,
    labels: Vec<i32>,
    iterations: Vec<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    roots: Option<Vec<[f64; 2]>>,
}

/// Serialize a grid (and optionally the root locations it was labeled
/// against) to the interchange JSON.
pub fn grid_to_json(grid: &BasinGrid, roots: Option<&RootSet>) -> serde_json::Value {
    let j = GridJson {
        window: WindowJson {
            center: [grid.window.center().re, grid.window.center().im],
            width: grid.window.width(),
            height: grid.window.height(),
        },
        nx: grid.nx,
        ny: grid.ny,
        max_iter: grid.max_iter,
        eps: grid.eps,
        labels: grid.labels.iter().map(|l| l.code()).collect(),
        iterations: grid.iterations.clone(),
        roots: roots.map(|rs| rs.iter().map(|r| [r.location.re, r.location.im]).collect()),
    };
    serde_json::to_value(j).expect("grid serialization cannot fail")
}

/// Parse the interchange JSON back into a grid and optional root list.
pub fn grid_from_json(
    value: &serde_json::Value,
) -> Result<(BasinGrid, Option<Vec<Complex64>>), DynamicsError> {
    let j: GridJson = serde_json::from_value(value.clone())
        .map_err(|e| DynamicsError::MalformedGrid(e.to_string()))?;
    let labels = j
        .labels
        .iter()
        .map(|&code| {
            CellLabel::from_code(code)
                .ok_or_else(|| DynamicsError::MalformedGrid(format!("bad label code {code}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let window = Rect::from_center_size(
        Complex64::new(j.window.center[0], j.window.center[1]),
        j.window.width,
        j.window.height,
    );
    let grid = BasinGrid::from_parts(window, j.nx, j.ny, j.max_iter, j.eps, labels, j.iterations)?;
    let roots = j.roots.map(|v| v.iter().map(|p| Complex64::new(p[0], p[1])).collect());
    Ok((grid, roots))
}
