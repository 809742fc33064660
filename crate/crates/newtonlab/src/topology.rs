//! Grid-level connectivity audits of rendered basins.
//!
//! A rendered [`BasinGrid`](crate::dynamics::BasinGrid) decomposes the
//! window into basin cells (labeled by root) and a mask of cells that never
//! settled (undecided, escaped, or pole-hitting) — a pixel proxy for the
//! Julia set. This module labels the basin cells into connected components
//! and audits two properties that basin components of Newton maps are
//! expected to show at any resolution: no component fully encloses a hole,
//! and the component holding each root reaches the window border.
//!
//! Connectivity conventions: components use 4-connectivity, hole detection
//! floods the complement with 8-connectivity. The dual pairing prevents a
//! diagonal pixel chain from counting as both a connection and a
//! separation. A grid PASS is evidence at one resolution, not a proof;
//! the reports say "consistent with", never "verified".

use crate::dynamics::{BasinGrid, CellLabel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Components smaller than this are ignored by the connectivity verdict:
/// pixel dust along the basin boundaries would otherwise dominate.
pub const DEFAULT_MIN_CELLS: usize = 64;

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("root {index} at ({re}, {im}) lies outside the window")]
    RootOutsideWindow { index: usize, re: f64, im: f64 },
}

/// One 4-connected component of equal-label basin cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentReport {
    /// Deterministic id, assigned in raster scan order.
    pub id: usize,
    /// Root index the component's cells converged to.
    pub label: u16,
    pub cells: usize,
    pub touches_border: bool,
    /// Complement blobs fully enclosed by this component.
    pub hole_count: usize,
    /// Index of a root whose pixel lies in this component, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contains_root_index: Option<usize>,
}

/// Labeled grid: per-cell component ids (−1 for mask cells) plus the
/// component list.
#[derive(Debug, Clone)]
pub struct ComponentMap {
    pub nx: usize,
    pub ny: usize,
    /// Component id per cell, −1 on mask cells (undecided/escaped/pole).
    pub component_of: Vec<i32>,
    pub components: Vec<ComponentReport>,
}

impl ComponentMap {
    pub fn component_at(&self, i: usize, j: usize) -> Option<usize> {
        let id = self.component_of[j * self.nx + i];
        (id >= 0).then_some(id as usize)
    }
}

/// Decompose the basin cells of a grid into 4-connected components of
/// equal label. Mask cells (undecided, escaped, hit-pole) belong to no
/// component. Ids follow raster scan order, so the labeling is
/// deterministic. Hole counts are filled in for every component.
pub fn label_components(grid: &BasinGrid) -> ComponentMap {
    let (nx, ny) = (grid.nx, grid.ny);
    let labels = grid.labels();
    let mut component_of = vec![-1i32; nx * ny];
    let mut components: Vec<ComponentReport> = Vec::new();
    let mut bboxes: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut queue: Vec<usize> = Vec::new();

    for j in 0..ny {
        for i in 0..nx {
            let idx = j * nx + i;
            let root_label = match labels[idx] {
                CellLabel::Root(k) => k,
                _ => continue,
            };
            if component_of[idx] != -1 {
                continue;
            }
            let id = components.len() as i32;
            component_of[idx] = id;
            queue.clear();
            queue.push(idx);
            let mut cells = 0usize;
            let mut touches = false;
            let (mut i0, mut i1, mut j0, mut j1) = (i, i, j, j);
            while let Some(cur) = queue.pop() {
                cells += 1;
                let (cj, ci) = (cur / nx, cur % nx);
                i0 = i0.min(ci);
                i1 = i1.max(ci);
                j0 = j0.min(cj);
                j1 = j1.max(cj);
                if ci == 0 || ci == nx - 1 || cj == 0 || cj == ny - 1 {
                    touches = true;
                }
                let mut visit = |nidx: usize| {
                    if component_of[nidx] == -1 && labels[nidx] == CellLabel::Root(root_label) {
                        component_of[nidx] = id;
                        queue.push(nidx);
                    }
                };
                if ci > 0 {
                    visit(cur - 1);
                }
                if ci + 1 < nx {
                    visit(cur + 1);
                }
                if cj > 0 {
                    visit(cur - nx);
                }
                if cj + 1 < ny {
                    visit(cur + nx);
                }
            }
            components.push(ComponentReport {
                id: id as usize,
                label: root_label,
                cells,
                touches_border: touches,
                hole_count: 0,
                contains_root_index: None,
            });
            bboxes.push((i0, i1, j0, j1));
        }
    }

    for (id, bbox) in bboxes.iter().enumerate() {
        components[id].hole_count = holes_of_component(&component_of, nx, ny, id as i32, *bbox);
    }

    ComponentMap { nx, ny, component_of, components }
}

/// Enclosed holes of one component: flood the complement 8-connectedly
/// from outside and count the complement blobs never reached.
pub fn count_holes(cm: &ComponentMap, id: usize) -> usize {
    cm.components[id].hole_count
}

// Flood fill restricted to the component's bounding box padded by one
// ring. Anything in the complement outside the bounding box is connected
// around the box to the frame, so the pad ring is a faithful stand-in for
// "reachable from the grid frame".
fn holes_of_component(
    component_of: &[i32],
    nx: usize,
    ny: usize,
    id: i32,
    (i0, i1, j0, j1): (usize, usize, usize, usize),
) -> usize {
    let wnx = i1 - i0 + 3;
    let wny = j1 - j0 + 3;
    let member = |li: usize, lj: usize| -> bool {
        let gi = i0 as isize - 1 + li as isize;
        let gj = j0 as isize - 1 + lj as isize;
        if gi < 0 || gj < 0 || gi >= nx as isize || gj >= ny as isize {
            return false;
        }
        component_of[gj as usize * nx + gi as usize] == id
    };

    let mut reached = vec![false; wnx * wny];
    let mut queue: Vec<usize> = Vec::new();
    for lj in 0..wny {
        for li in 0..wnx {
            if (li == 0 || li == wnx - 1 || lj == 0 || lj == wny - 1) && !member(li, lj) {
                let lidx = lj * wnx + li;
                if !reached[lidx] {
                    reached[lidx] = true;
                    queue.push(lidx);
                }
            }
        }
    }
    let flood8 = |queue: &mut Vec<usize>, reached: &mut Vec<bool>| {
        while let Some(cur) = queue.pop() {
            let (lj, li) = (cur / wnx, cur % wnx);
            for dj in -1i32..=1 {
                for di in -1i32..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (li as i32 + di, lj as i32 + dj);
                    if ni < 0 || nj < 0 || ni >= wnx as i32 || nj >= wny as i32 {
                        continue;
                    }
                    let nidx = nj as usize * wnx + ni as usize;
                    if !reached[nidx] && !member(ni as usize, nj as usize) {
                        reached[nidx] = true;
                        queue.push(nidx);
                    }
                }
            }
        }
    };
    flood8(&mut queue, &mut reached);

    // Unreached complement cells group into the enclosed blobs.
    let mut holes = 0;
    for lj in 0..wny {
        for li in 0..wnx {
            let lidx = lj * wnx + li;
            if !reached[lidx] && !member(li, lj) {
                holes += 1;
                reached[lidx] = true;
                queue.push(lidx);
                flood8(&mut queue, &mut reached);
            }
        }
    }
    holes
}

fn attach_roots(cm: &mut ComponentMap, grid: &BasinGrid, roots: &[Complex64]) {
    for (k, &root) in roots.iter().enumerate() {
        if let Some((i, j)) = grid.cell_of(root) {
            if let Some(cid) = cm.component_at(i, j) {
                cm.components[cid].contains_root_index.get_or_insert(k);
            }
        }
    }
}

/// Merged verdict over a grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuditReport {
    pub components: Vec<ComponentReport>,
    pub pass: bool,
    pub notes: Vec<String>,
}

/// PASS iff no component with at least `min_cells` cells encloses a hole.
/// The report lists every audited component and calls out the holey ones.
pub fn audit_connectivity(
    grid: &BasinGrid,
    roots: &[Complex64],
    min_cells: usize,
) -> AuditReport {
    let mut cm = label_components(grid);
    attach_roots(&mut cm, grid, roots);
    let total = cm.components.len();
    let audited = cm.components.iter().filter(|c| c.cells >= min_cells).count();
    let holey: Vec<&ComponentReport> = cm
        .components
        .iter()
        .filter(|c| c.cells >= min_cells && c.hole_count > 0)
        .collect();
    let pass = holey.is_empty();

    let mut notes = vec![format!(
        "{total} basin components, {audited} with at least {min_cells} cells"
    )];
    if pass {
        notes.push(
            "no audited component encloses a hole; consistent with simply connected basin \
             components at this resolution"
                .to_string(),
        );
    } else {
        for c in &holey {
            notes.push(format!(
                "component {} (basin {}, {} cells) encloses {} hole(s); if unexpected, \
                 re-render at twice the resolution",
                c.id, c.label, c.cells, c.hole_count
            ));
        }
    }

    let components = cm
        .components
        .iter()
        .filter(|c| c.cells >= min_cells || c.hole_count > 0 || c.contains_root_index.is_some())
        .cloned()
        .collect();
    AuditReport { components, pass, notes }
}

/// PASS iff, for every root, the component containing the root's pixel
/// reaches the window border. Bounded-looking basins at one window size
/// may still touch the border of a larger window, so a FAIL recommends
/// enlarging the window rather than claiming boundedness.
pub fn audit_unboundedness(
    grid: &BasinGrid,
    roots: &[Complex64],
) -> Result<AuditReport, TopologyError> {
    for (k, &root) in roots.iter().enumerate() {
        if !grid.window.contains(root) {
            return Err(TopologyError::RootOutsideWindow { index: k, re: root.re, im: root.im });
        }
    }
    let mut cm = label_components(grid);
    attach_roots(&mut cm, grid, roots);

    let mut pass = true;
    let mut notes = Vec::new();
    let mut listed: Vec<usize> = Vec::new();
    for (k, &root) in roots.iter().enumerate() {
        let (i, j) = grid.cell_of(root).expect("root inside window");
        match cm.component_at(i, j) {
            None => {
                pass = false;
                notes.push(format!(
                    "root {k} at ({:.6}, {:.6}): pixel is unresolved (mask cell); increase \
                     the iteration budget or resolution",
                    root.re, root.im
                ));
            }
            Some(cid) => {
                let c = &cm.components[cid];
                if c.touches_border {
                    notes.push(format!(
                        "root {k} at ({:.6}, {:.6}): component {cid} ({} cells) reaches the \
                         window border",
                        root.re, root.im, c.cells
                    ));
                } else {
                    pass = false;
                    notes.push(format!(
                        "root {k} at ({:.6}, {:.6}): component {cid} ({} cells) is bounded in \
                         this window — enlarge the window (2x) and re-render",
                        root.re, root.im, c.cells
                    ));
                }
                if !listed.contains(&cid) {
                    listed.push(cid);
                }
            }
        }
    }
    let components = listed.into_iter().map(|cid| cm.components[cid].clone()).collect();
    Ok(AuditReport { components, pass, notes })
}

/// Combine audit phases over the same grid into one report: components
/// merged by id, overall pass only when every phase passed.
pub fn merge_audits(mut a: AuditReport, b: AuditReport) -> AuditReport {
    for c in b.components {
        if !a.components.iter().any(|existing| existing.id == c.id) {
            a.components.push(c);
        }
    }
    a.components.sort_by_key(|c| c.id);
    a.pass = a.pass && b.pass;
    a.notes.extend(b.notes);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::render_basins;
    use crate::map::{NewtonMap, Rect};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn newton(src: &str) -> NewtonMap {
        NewtonMap::new(&crate::expr::parse(src).unwrap()).unwrap()
    }

    fn grid_from_labels(nx: usize, ny: usize, labels: Vec<CellLabel>) -> BasinGrid {
        let n = labels.len();
        BasinGrid::from_parts(
            Rect::new(-2.0, 2.0, -2.0, 2.0),
            nx,
            ny,
            crate::dynamics::RENDER_MAX_ITER,
            crate::dynamics::DEFAULT_EPS,
            labels,
            vec![0; n],
        )
        .unwrap()
    }

    // Independent hole oracle: the Euler number of a 4-connected component
    // (with 8-connected complement) from 2×2 pixel patterns is
    // (Q1 − Q3 + 2·Qd) / 4, and a connected component has
    // holes = 1 − Euler number.
    fn euler_holes(cm: &ComponentMap, id: usize) -> i64 {
        let member = |i: isize, j: isize| -> bool {
            if i < 0 || j < 0 || i >= cm.nx as isize || j >= cm.ny as isize {
                return false;
            }
            cm.component_of[j as usize * cm.nx + i as usize] == id as i32
        };
        let (mut q1, mut q3, mut qd) = (0i64, 0i64, 0i64);
        for j in -1..cm.ny as isize {
            for i in -1..cm.nx as isize {
                let quad = [
                    member(i, j),
                    member(i + 1, j),
                    member(i, j + 1),
                    member(i + 1, j + 1),
                ];
                match quad.iter().filter(|&&m| m).count() {
                    1 => q1 += 1,
                    3 => q3 += 1,
                    2 => {
                        if quad[0] == quad[3] {
                            qd += 1; // diagonal pair
                        }
                    }
                    _ => {}
                }
            }
        }
        let four_euler = q1 - q3 + 2 * qd;
        assert_eq!(four_euler % 4, 0, "euler count must be divisible by 4");
        1 - four_euler / 4
    }

    #[test]
    fn quadratic_grid_splits_into_two_components() {
        let n = newton("z^2-1");
        let roots = n.roots().unwrap().clone();
        let grid = render_basins(&n, &roots, Rect::new(-2.0, 2.0, -2.0, 2.0), 4, 4, 64, 1e-9);
        let cm = label_components(&grid);
        assert_eq!(cm.components.len(), 2);
        for comp in &cm.components {
            assert_eq!(comp.cells, 8);
            assert!(comp.touches_border);
            assert_eq!(comp.hole_count, 0);
        }
        assert_ne!(cm.components[0].label, cm.components[1].label);
    }

    #[test]
    fn uniform_grid_is_one_border_touching_component() {
        let grid = grid_from_labels(8, 8, vec![CellLabel::Root(0); 64]);
        let cm = label_components(&grid);
        assert_eq!(cm.components.len(), 1);
        assert_eq!(cm.components[0].cells, 64);
        assert!(cm.components[0].touches_border);
        assert_eq!(cm.components[0].hole_count, 0);
    }

    #[test]
    fn checkerboard_is_sixteen_components_under_4_connectivity() {
        let labels: Vec<CellLabel> = (0..16)
            .map(|k| CellLabel::Root(((k % 4 + k / 4) % 2) as u16))
            .collect();
        let grid = grid_from_labels(4, 4, labels);
        let cm = label_components(&grid);
        assert_eq!(cm.components.len(), 16);
        for comp in &cm.components {
            assert_eq!(comp.cells, 1);
        }
    }

    #[test]
    fn solid_disk_has_no_holes_and_annulus_has_one() {
        let n = 24;
        let shape = |annulus: bool| -> Vec<CellLabel> {
            (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx % n, idx / n);
                    let d = (((i as f64 - 11.5).powi(2) + (j as f64 - 11.5).powi(2)) as f64)
                        .sqrt();
                    let inside = if annulus { (4.0..9.0).contains(&d) } else { d < 9.0 };
                    if inside { CellLabel::Root(0) } else { CellLabel::Undecided }
                })
                .collect()
        };
        let disk = label_components(&grid_from_labels(n, n, shape(false)));
        assert_eq!(disk.components.len(), 1);
        assert_eq!(disk.components[0].hole_count, 0);
        assert_eq!(euler_holes(&disk, 0), 0);

        let ring = label_components(&grid_from_labels(n, n, shape(true)));
        assert_eq!(ring.components.len(), 1);
        assert_eq!(ring.components[0].hole_count, 1);
        assert_eq!(euler_holes(&ring, 0), 1);
    }

    fn planted_annulus() -> BasinGrid {
        // Label-1 sea with a label-0 square ring; the blob inside the ring
        // is label 1 again but cut off from the sea.
        let n = 32;
        let labels: Vec<CellLabel> = (0..n * n)
            .map(|idx| {
                let (i, j) = ((idx % n) as i32, (idx / n) as i32);
                let d = (i - 16).abs().max((j - 16).abs());
                if (5..=9).contains(&d) {
                    CellLabel::Root(0)
                } else {
                    CellLabel::Root(1)
                }
            })
            .collect();
        grid_from_labels(n, n, labels)
    }

    #[test]
    fn planted_annulus_fails_connectivity() {
        let grid = planted_annulus();
        let report = audit_connectivity(&grid, &[], DEFAULT_MIN_CELLS);
        assert!(!report.pass);
        let holey: Vec<&ComponentReport> =
            report.components.iter().filter(|c| c.hole_count > 0).collect();
        // The ring encloses the inner blob; the sea encloses ring + blob.
        assert_eq!(holey.len(), 2);
        assert!(report.notes.iter().any(|s| s.contains("encloses")));
        let cm = label_components(&grid);
        for comp in &cm.components {
            assert_eq!(comp.hole_count as i64, euler_holes(&cm, comp.id), "component {}", comp.id);
        }
    }

    #[test]
    fn planted_enclosed_root_fails_unboundedness() {
        let grid = planted_annulus();
        // Root at the window center: its pixel is in the enclosed blob.
        let report = audit_unboundedness(&grid, &[c(0.0, 0.0)]).unwrap();
        assert!(!report.pass);
        assert!(report.notes.iter().any(|s| s.contains("enlarge the window")));
        assert_eq!(report.components.len(), 1);
        assert!(!report.components[0].touches_border);
        assert_eq!(report.components[0].contains_root_index, Some(0));
    }

    #[test]
    fn unboundedness_rejects_roots_outside_the_window() {
        let grid = planted_annulus();
        let err = audit_unboundedness(&grid, &[c(10.0, 0.0)]).unwrap_err();
        assert!(matches!(err, TopologyError::RootOutsideWindow { index: 0, .. }));
    }

    #[test]
    fn cubic_audit_passes_at_modest_resolution() {
        let n = newton("z^3-1");
        let roots = n.roots().unwrap().clone();
        let window = Rect::new(-2.0, 2.0, -2.0, 2.0);
        let grid = render_basins(&n, &roots, window, 128, 128, 256, 1e-9);
        let locations: Vec<Complex64> = roots.iter().map(|r| r.location).collect();

        let conn = audit_connectivity(&grid, &locations, DEFAULT_MIN_CELLS);
        assert!(conn.pass, "{:?}", conn.notes);

        let unb = audit_unboundedness(&grid, &locations).unwrap();
        assert!(unb.pass, "{:?}", unb.notes);
        assert_eq!(unb.components.len(), 3);

        let merged = merge_audits(conn, unb);
        assert!(merged.pass);

        // Euler cross-check against the flood-fill hole counter on every
        // audited component.
        let cm = label_components(&grid);
        for comp in cm.components.iter().filter(|c| c.cells >= DEFAULT_MIN_CELLS) {
            assert_eq!(
                comp.hole_count as i64,
                euler_holes(&cm, comp.id),
                "component {} of the cubic grid",
                comp.id
            );
        }
    }

    #[test]
    fn hole_counts_match_euler_on_random_grids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x70d0);
        for round in 0..20 {
            let n = 32;
            let labels: Vec<CellLabel> = (0..n * n)
                .map(|_| match rng.gen_range(0..3) {
                    0 => CellLabel::Root(0),
                    1 => CellLabel::Root(1),
                    _ => CellLabel::Undecided,
                })
                .collect();
            let cm = label_components(&grid_from_labels(n, n, labels));
            for comp in &cm.components {
                assert_eq!(
                    comp.hole_count as i64,
                    euler_holes(&cm, comp.id),
                    "round {round}, component {}",
                    comp.id
                );
            }
        }
    }

    #[test]
    fn component_resolution_growth_keeps_large_components_hole_free() {
        let n = newton("z^3-1");
        let roots = n.roots().unwrap().clone();
        let window = Rect::new(-2.0, 2.0, -2.0, 2.0);
        for res in [64usize, 128] {
            let grid = render_basins(&n, &roots, window, res, res, 256, 1e-9);
            let cm = label_components(&grid);
            for comp in cm.components.iter().filter(|c| c.cells >= 256) {
                assert_eq!(comp.hole_count, 0, "res {res}, component {}", comp.id);
            }
        }
    }

    #[test]
    fn audit_report_serializes_with_expected_shape() {
        let grid = planted_annulus();
        let report = audit_connectivity(&grid, &[c(0.0, 0.0)], 64);
        let value = serde_json::to_value(&report).unwrap();
        assert!(value["components"].is_array());
        assert!(value["pass"].is_boolean());
        assert!(value["notes"].is_array());
        let first = &value["components"][0];
        for key in ["id", "label", "cells", "touches_border", "hole_count"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
    }
}
