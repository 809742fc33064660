//! Command-line front door: render basins, isolate fixed points, run curve
//! analyses, and audit rendered grids, with JSON and PPM outputs.
//!
//! Exit codes are part of the contract: 0 for completed runs (including
//! analyses whose verdict is FAIL), 2 for parse/usage errors, 3 for I/O
//! errors, 4 when a precondition blocks an analysis (e.g. a pole sitting on
//! the curve). One command per process; all files are written atomically at
//! the end of the run.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use newtonlab::dynamics::{
    default_palette, grid_from_json, grid_to_json, ppm_bytes, ppm_bytes_marked,
};
use newtonlab::report::FixedPointRecord;
use newtonlab::topology::{
    audit_connectivity, audit_unboundedness, label_components, merge_audits, AuditReport,
    ComponentMap, DEFAULT_MIN_CELLS,
};
use newtonlab::{
    render_basins, ActionContext, ActionRegistry, BasinGrid, ComplexMap, Curve, FormulaMap,
    LabError, NewtonMap, Rect,
};
use num_complex::Complex64;

const MAX_RES: u32 = 16384;

#[derive(Parser)]
#[command(
    name = "newtonlab",
    version,
    about = "Newton's method in the complex plane: basins, contour counts, audits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render basins of attraction to a PPM image with a JSON sidecar.
    Render(RenderArgs),
    /// Isolate and classify every fixed point of a map in a window.
    FixedPoints(FixedPointsArgs),
    /// Run a named analysis on a closed curve loaded from a JSON file.
    Curve(CurveArgs),
    /// Render, label components, and audit connectivity and unboundedness.
    Audit(AuditArgs),
}

#[derive(Args)]
struct WindowArgs {
    /// Window center as "re,im".
    #[arg(long, value_parser = parse_complex, default_value = "0,0")]
    center: Complex64,
    /// Window extent as "WIDTHxHEIGHT" in plane units.
    #[arg(long, value_parser = parse_size, default_value = "4x4")]
    size: (f64, f64),
}

impl WindowArgs {
    fn rect(&self) -> Rect {
        Rect::from_center_size(self.center, self.size.0, self.size.1)
    }
}

#[derive(Args)]
struct RenderArgs {
    /// Formula for g; the rendered map is its Newton map N = z - g/g'.
    #[arg(long)]
    function: String,
    #[command(flatten)]
    window: WindowArgs,
    /// Pixels per side.
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..=MAX_RES as i64))]
    res: u32,
    #[arg(long, default_value_t = 256)]
    max_iter: u32,
    /// Convergence radius around each root.
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Output image path.
    #[arg(long, default_value = "render.ppm")]
    out: PathBuf,
    /// Sidecar JSON path (default: the image path with extension .json).
    #[arg(long)]
    sidecar: Option<PathBuf>,
    /// Also write the full labeled grid as JSON, reusable via `audit --grid`.
    #[arg(long)]
    grid_out: Option<PathBuf>,
}

#[derive(Args)]
struct FixedPointsArgs {
    /// Formula for g; fixed points of its Newton map are isolated.
    #[arg(long, conflicts_with = "map", required_unless_present = "map")]
    function: Option<String>,
    /// Formula for a map f iterated as-is (no Newton construction).
    #[arg(long)]
    map: Option<String>,
    #[command(flatten)]
    window: WindowArgs,
    /// Isolation tolerance: located points are separated beyond this.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Write the JSON list here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    /// Analysis to run; see `curve --help` for the list.
    #[arg(long)]
    action: String,
    /// Curve file: a JSON array of [re, im] samples.
    #[arg(long)]
    curve: PathBuf,
    /// Formula for g, analyzed through its Newton map.
    #[arg(long, conflicts_with = "map")]
    function: Option<String>,
    /// Formula for a map f analyzed as-is.
    #[arg(long)]
    map: Option<String>,
    /// Base point as "re,im" (winding).
    #[arg(long, value_parser = parse_complex)]
    point: Option<Complex64>,
    /// Iteration budget for the poles-in-loops search.
    #[arg(long, default_value_t = 10)]
    nmax: u32,
    /// Push-forward image-gap tolerance (default: scaled to the curve).
    #[arg(long)]
    tol: Option<f64>,
    /// Push-forward sample budget.
    #[arg(long, default_value_t = 1 << 15)]
    max_points: usize,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AuditArgs {
    /// Formula for g; its Newton map is rendered and audited.
    #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
    function: Option<String>,
    /// Audit a previously rendered grid JSON instead of rendering.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[command(flatten)]
    window: WindowArgs,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..=MAX_RES as i64))]
    res: u32,
    #[arg(long, default_value_t = 256)]
    max_iter: u32,
    #[arg(long, default_value_t = 1e-9)]
    eps: f64,
    /// Components smaller than this are not held to the connectivity bar.
    #[arg(long, default_value_t = DEFAULT_MIN_CELLS)]
    min_cells: usize,
    /// Write a PPM with holey components outlined.
    #[arg(long)]
    annotated: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

// ---------------------------------------------------------------------
// Exit-code discipline.

enum CliError {
    /// Unparseable input: formula, flag value, curve or grid JSON. Exit 2.
    Parse(String),
    /// Filesystem failure. Exit 3.
    Io(String),
    /// Analysis preconditions not met (pole on curve, unresolved boxes,
    /// root outside window). Exit 4.
    Blocked(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Io(_) => 3,
            CliError::Blocked(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Io(m) | CliError::Blocked(m) => m,
        }
    }
}

fn classify_lab_error(e: LabError) -> CliError {
    use newtonlab::contour::ContourError;
    match e {
        LabError::Parse(e) => CliError::Parse(e.to_string()),
        LabError::Map(e) => CliError::Parse(e.to_string()),
        LabError::Poly(e) => CliError::Parse(e.to_string()),
        LabError::Contour(ContourError::MalformedCurve(m)) => CliError::Parse(m),
        LabError::Contour(e) => CliError::Blocked(e.to_string()),
        LabError::Dynamics(e) => CliError::Parse(e.to_string()),
        LabError::Topology(e) => CliError::Blocked(e.to_string()),
    }
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {}", e.message());
        return ExitCode::from(e.code());
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Render(args) => cmd_render(args),
        Command::FixedPoints(args) => cmd_fixed_points(args),
        Command::Curve(args) => cmd_curve(args),
        Command::Audit(args) => cmd_audit(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}

/// NEWTONLAB_THREADS caps the worker count; unset means hardware default.
fn configure_threads() -> Result<(), CliError> {
    match std::env::var("NEWTONLAB_THREADS") {
        Err(_) => Ok(()),
        Ok(raw) => {
            let n: usize = raw
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| {
                    CliError::Parse(format!(
                        "NEWTONLAB_THREADS must be a positive integer, got {raw:?}"
                    ))
                })?;
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| CliError::Io(format!("thread pool: {e}")))
        }
    }
}

// ---------------------------------------------------------------------
// Subcommands.

fn cmd_render(args: RenderArgs) -> Result<(), CliError> {
    let map = NewtonMap::from_formula(&args.function).map_err(classify_lab_error)?;
    let window = args.window.rect();
    let roots = map.roots_in(&window);
    let res = args.res as usize;

    let started = std::time::Instant::now();
    let grid = render_basins(&map, &roots, window, res, res, args.max_iter, args.eps);
    let timing_ms = started.elapsed().as_millis() as u64;

    let palette = default_palette(roots.len());
    let image = ppm_bytes(&grid, &palette).map_err(|e| CliError::Parse(e.to_string()))?;
    write_atomic(&args.out, &image)?;

    let (converged, escaped, hit_pole, undecided) = grid.tally();
    let sidecar = serde_json::json!({
        "function": args.function,
        "map": map.description(),
        "window": {
            "center": [window.center().re, window.center().im],
            "width": window.width(),
            "height": window.height(),
        },
        "res": [res, res],
        "max_iter": args.max_iter,
        "eps": args.eps,
        "roots": roots.iter().map(|r| serde_json::json!({
            "re": r.location.re,
            "im": r.location.im,
            "multiplicity": r.multiplicity,
        })).collect::<Vec<_>>(),
        // Cell label k means "converged to roots[label_to_root[k]]".
        "label_to_root": (0..roots.len()).collect::<Vec<_>>(),
        "cells": {
            "converged": converged,
            "escaped": escaped,
            "hit_pole": hit_pole,
            "undecided": undecided,
        },
        "timing_ms": timing_ms,
    });
    let sidecar_path = args
        .sidecar
        .unwrap_or_else(|| args.out.with_extension("json"));
    write_atomic(&sidecar_path, pretty(&sidecar).as_bytes())?;

    if let Some(grid_path) = &args.grid_out {
        let grid_json = grid_to_json(&grid, Some(&roots));
        write_atomic(grid_path, pretty(&grid_json).as_bytes())?;
    }

    println!(
        "wrote {res}x{res} image to {} and sidecar to {}",
        args.out.display(),
        sidecar_path.display()
    );
    Ok(())
}

fn cmd_fixed_points(args: FixedPointsArgs) -> Result<(), CliError> {
    let map = build_map(&args.function, &args.map)?.expect("clap requires one of the two");
    let window = args.window.rect();
    if args.tol <= 0.0 {
        return Err(CliError::Parse("--tol must be positive".into()));
    }
    let found = newtonlab::contour::isolate_fixed_points(map.as_ref(), &window, args.tol)
        .map_err(|e| classify_lab_error(e.into()))?;
    let records: Vec<FixedPointRecord> = found.iter().map(FixedPointRecord::from).collect();
    let json = serde_json::to_value(records).expect("record serialization cannot fail");
    emit(args.out.as_deref(), &json)
}

fn cmd_curve(args: CurveArgs) -> Result<(), CliError> {
    let registry = ActionRegistry::standard();
    let action = registry.get(&args.action).ok_or_else(|| {
        CliError::Parse(format!(
            "unknown action {:?}; available: {}",
            args.action,
            registry.names().join(", ")
        ))
    })?;

    let raw = std::fs::read_to_string(&args.curve)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.curve.display())))?;
    let value: serde_json::Value = serde_json::from_str(&raw)
        .map_err(|e| CliError::Parse(format!("{}: {e}", args.curve.display())))?;
    let curve = Curve::from_json(&value).map_err(|e| classify_lab_error(e.into()))?;

    let map = build_map(&args.function, &args.map)?;
    let mut ctx = ActionContext::new(&curve);
    ctx.map = map.as_deref();
    ctx.point = args.point;
    ctx.n_max = args.nmax;
    ctx.push_tol = args.tol;
    ctx.max_points = args.max_points;

    let report = action.run(&ctx).map_err(|e| match e {
        newtonlab::actions::ActionError::MissingInput { .. } => CliError::Parse(e.to_string()),
        newtonlab::actions::ActionError::Lab(inner) => classify_lab_error(inner),
    })?;
    emit(args.out.as_deref(), &report)
}

fn cmd_audit(args: AuditArgs) -> Result<(), CliError> {
    let min_cells = args.min_cells;
    let (report, final_grid) = if let Some(grid_path) = &args.grid {
        let raw = std::fs::read_to_string(grid_path)
            .map_err(|e| CliError::Io(format!("{}: {e}", grid_path.display())))?;
        let value: serde_json::Value = serde_json::from_str(&raw)
            .map_err(|e| CliError::Parse(format!("{}: {e}", grid_path.display())))?;
        let (grid, stored_roots) =
            grid_from_json(&value).map_err(|e| CliError::Parse(e.to_string()))?;
        let mut report = match stored_roots {
            Some(roots) => run_audits(&grid, &roots, min_cells)?,
            None => {
                let mut r = run_audits(&grid, &[], min_cells)?;
                r.notes
                    .push("grid carries no root list; unboundedness not audited".into());
                r
            }
        };
        report.notes.insert(
            0,
            format!("audited stored grid {} at {}x{}", grid_path.display(), grid.nx, grid.ny),
        );
        (report, grid)
    } else {
        let function = args.function.as_deref().expect("clap requires it without --grid");
        let map = NewtonMap::from_formula(function).map_err(classify_lab_error)?;
        let window = args.window.rect();
        let roots = map.roots_in(&window);
        let root_points: Vec<Complex64> = roots.iter().map(|r| r.location).collect();

        let res = args.res as usize;
        let grid = render_basins(&map, &roots, window, res, res, args.max_iter, args.eps);
        let report = run_audits(&grid, &root_points, min_cells)?;

        // A hole in a large component contradicts what the audit expects of
        // a Newton map, but it can also be a resolution artifact; one
        // re-render at doubled resolution settles which, and only one.
        let connectivity_failed = report
            .components
            .iter()
            .any(|c| c.cells >= min_cells && c.hole_count > 0);
        if connectivity_failed && args.res * 2 <= MAX_RES {
            let res2 = res * 2;
            let grid2 =
                render_basins(&map, &roots, window, res2, res2, args.max_iter, args.eps);
            let mut retried = run_audits(&grid2, &root_points, min_cells)?;
            retried.notes.insert(
                0,
                format!(
                    "connectivity audit failed at {res}x{res}; re-rendered once at {res2}x{res2}"
                ),
            );
            (retried, grid2)
        } else {
            (report, grid)
        }
    };

    if let Some(annotated) = &args.annotated {
        let cm = label_components(&final_grid);
        let marks = holey_outline_marks(&cm);
        let labels = final_grid.labels();
        let mut max_label = 0usize;
        for l in labels {
            if let newtonlab::CellLabel::Root(k) = l {
                max_label = max_label.max(*k as usize + 1);
            }
        }
        let palette = default_palette(max_label);
        let image = ppm_bytes_marked(&final_grid, &palette, Some((&marks, [255, 0, 0])))
            .map_err(|e| CliError::Parse(e.to_string()))?;
        write_atomic(annotated, &image)?;
    }

    let json = serde_json::to_value(&report).expect("report serialization cannot fail");
    emit(args.out.as_deref(), &json)
}

/// Connectivity plus unboundedness, merged. Roots outside the window are
/// excluded from the unboundedness audit (with a note) rather than
/// rejected: the render is still meaningful, the per-root claim just has
/// no pixel to anchor to.
fn run_audits(
    grid: &BasinGrid,
    roots: &[Complex64],
    min_cells: usize,
) -> Result<AuditReport, CliError> {
    let connectivity = audit_connectivity(grid, roots, min_cells);
    let inside: Vec<Complex64> = roots
        .iter()
        .copied()
        .filter(|r| grid.window.contains(*r))
        .collect();
    let mut unboundedness = audit_unboundedness(grid, &inside)
        .map_err(|e| CliError::Blocked(e.to_string()))?;
    for (k, r) in roots.iter().enumerate() {
        if !grid.window.contains(*r) {
            unboundedness.notes.push(format!(
                "root {k} at ({}, {}) lies outside the window; unboundedness not audited for it",
                r.re, r.im
            ));
        }
    }
    Ok(merge_audits(connectivity, unboundedness))
}

/// Boundary cells of components that have holes, for the annotated image.
fn holey_outline_marks(cm: &ComponentMap) -> Vec<bool> {
    let holey: Vec<bool> = cm.components.iter().map(|c| c.hole_count > 0).collect();
    let (nx, ny) = (cm.nx, cm.ny);
    let mut marks = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let id = cm.component_of[j * nx + i];
            if id < 0 || !holey[id as usize] {
                continue;
            }
            let on_edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
            let differs = |ii: usize, jj: usize| cm.component_of[jj * nx + ii] != id;
            if on_edge
                || differs(i - 1, j)
                || differs(i + 1, j)
                || differs(i, j - 1)
                || differs(i, j + 1)
            {
                marks[j * nx + i] = true;
            }
        }
    }
    marks
}

// ---------------------------------------------------------------------
// Plumbing.

fn build_map(
    function: &Option<String>,
    map: &Option<String>,
) -> Result<Option<Box<dyn ComplexMap>>, CliError> {
    if let Some(src) = function {
        let n = NewtonMap::from_formula(src).map_err(classify_lab_error)?;
        Ok(Some(Box::new(n)))
    } else if let Some(src) = map {
        let f = FormulaMap::from_formula(src)
            .map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(Some(Box::new(f)))
    } else {
        Ok(None)
    }
}

fn parse_complex(raw: &str) -> Result<Complex64, String> {
    let (re, im) = raw
        .split_once(',')
        .ok_or_else(|| format!("expected \"re,im\", got {raw:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("bad real part: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("bad imaginary part: {e}"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err("coordinates must be finite".into());
    }
    Ok(Complex64::new(re, im))
}

fn parse_size(raw: &str) -> Result<(f64, f64), String> {
    let (w, h) = raw
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected \"WIDTHxHEIGHT\", got {raw:?}"))?;
    let w: f64 = w.trim().parse().map_err(|e| format!("bad width: {e}"))?;
    let h: f64 = h.trim().parse().map_err(|e| format!("bad height: {e}"))?;
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err("both dimensions must be positive and finite".into());
    }
    Ok((w, h))
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON rendering cannot fail");
    s.push('\n');
    s
}

/// Print to stdout, or write atomically when a path was given.
fn emit(out: Option<&Path>, value: &serde_json::Value) -> Result<(), CliError> {
    let text = pretty(value);
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => write_atomic(path, text.as_bytes()),
    }
}

/// Write via a temp file in the target directory plus rename, so readers
/// never observe a half-written file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io(&e))?;
    tmp.write_all(bytes).map_err(|e| io(&e))?;
    tmp.persist(path).map_err(|e| io(&e))?;
    Ok(())
}
