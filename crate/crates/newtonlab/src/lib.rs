//! A laboratory for Newton's method in the complex plane.
//!
//! Given a formula for a function `g`, this crate builds the Newton
//! iteration `N(z) = z − g(z)/g′(z)` symbolically, finds the roots and
//! poles that organize its dynamics, renders basins of attraction, and
//! verifies counting statements about fixed points along closed curves —
//! winding numbers, argument-principle counts, pole-capture searches, and
//! grid-level connectivity audits of the rendered basins.
//!
//! The layers, bottom up:
//!
//! - [`extended`]: totalized arithmetic on the plane plus a point at
//!   infinity, so pole encounters are values instead of NaNs.
//! - [`expr`]: formula parsing, symbolic differentiation, and two
//!   evaluators (a tree walker and a compiled tape) guaranteed to agree
//!   bit for bit.
//! - [`poly`]: polynomial root finding with multiplicities.
//! - [`map`]: the [`ComplexMap`](map::ComplexMap) strategy trait and its
//!   implementations — [`NewtonMap`](map::NewtonMap) built from `g`, and
//!   [`FormulaMap`](map::FormulaMap) for iterating arbitrary formulas.
//! - [`dynamics`]: orbit iteration and deterministic basin rendering.
//! - [`contour`]: sampled closed curves, winding numbers, push-forwards,
//!   fixed-point counting and isolation, and the curve-based verification
//!   procedures.
//! - [`topology`]: connected-component audits of rendered grids.
//! - [`actions`]: the named registry frontends use to dispatch curve
//!   analyses.

pub mod actions;
pub mod contour;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod extended;
pub mod map;
pub mod poly;
pub mod report;
pub mod topology;

pub use actions::{ActionContext, ActionRegistry, CurveAction};
pub use contour::{Curve, FixedPoint, Stability};
pub use dynamics::{render_basins, BasinGrid, CellLabel};
pub use error::LabError;
pub use expr::{parse, Expr};
pub use extended::ExtendedComplex;
pub use map::{ComplexMap, FormulaMap, NewtonMap, Pole, Rect};
pub use poly::{polynomial_roots, Root, RootSet};
pub use report::CheckReport;
