//! Named curve-analysis actions behind a common trait, so frontends can
//! dispatch `--action <name>` without knowing each operation's signature.
//!
//! Every action consumes an [`ActionContext`] — the curve plus whatever
//! optional inputs the frontend parsed — validates that its own required
//! inputs are present, and produces a JSON value. New analyses plug in by
//! implementing [`CurveAction`] and registering the boxed instance.

use crate::contour::checks::{
    check_index_hypotheses, check_map_out_twice, check_surround_and_map_out,
    poles_in_loops_search,
};
use crate::contour::{
    fixed_point_defect, push_forward, suggested_push_tolerance, winding_number, Curve,
};
use crate::error::LabError;
use crate::map::ComplexMap;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ActionError {
    #[error("action '{action}' requires {what}")]
    MissingInput { action: &'static str, what: &'static str },
    #[error(transparent)]
    Lab(#[from] LabError),
}

impl From<crate::contour::ContourError> for ActionError {
    fn from(e: crate::contour::ContourError) -> ActionError {
        ActionError::Lab(LabError::from(e))
    }
}

/// Inputs available to an action run. `map` and `point` are optional at
/// the type level; each action checks for what it needs.
pub struct ActionContext<'a> {
    pub map: Option<&'a dyn ComplexMap>,
    pub curve: &'a Curve,
    pub point: Option<Complex64>,
    /// Iteration budget for the pole-in-loops search.
    pub n_max: u32,
    /// Push-forward image-gap tolerance; `None` picks one from the curve size.
    pub push_tol: Option<f64>,
    /// Push-forward sample budget.
    pub max_points: usize,
}

impl<'a> ActionContext<'a> {
    pub fn new(curve: &'a Curve) -> ActionContext<'a> {
        ActionContext {
            map: None,
            curve,
            point: None,
            n_max: 10,
            push_tol: None,
            max_points: 1 << 15,
        }
    }

    fn require_map(&self, action: &'static str) -> Result<&'a dyn ComplexMap, ActionError> {
        self.map.ok_or(ActionError::MissingInput { action, what: "a map (--function or --map)" })
    }

    fn require_point(&self, action: &'static str) -> Result<Complex64, ActionError> {
        self.point.ok_or(ActionError::MissingInput { action, what: "a point (--point re,im)" })
    }

    fn tol(&self) -> f64 {
        self.push_tol.unwrap_or_else(|| suggested_push_tolerance(self.curve))
    }
}

/// One named curve analysis.
pub trait CurveAction: Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError>;
}

struct PushAction;

impl CurveAction for PushAction {
    fn name(&self) -> &'static str {
        "push"
    }
    fn summary(&self) -> &'static str {
        "image of the curve under the map, with adaptive refinement"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let map = ctx.require_map(self.name())?;
        let image = push_forward(map, ctx.curve, ctx.tol(), ctx.max_points)?;
        Ok(serde_json::json!({
            "samples": image.len(),
            "points": image.to_json(),
        }))
    }
}

struct WindingAction;

impl CurveAction for WindingAction {
    fn name(&self) -> &'static str {
        "winding"
    }
    fn summary(&self) -> &'static str {
        "winding number of the curve around a point"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let p = ctx.require_point(self.name())?;
        let w = winding_number(ctx.curve, p)?;
        Ok(serde_json::json!({
            "winding": w,
            "point": [p.re, p.im],
        }))
    }
}

struct DefectAction;

impl CurveAction for DefectAction {
    fn name(&self) -> &'static str {
        "defect"
    }
    fn summary(&self) -> &'static str {
        "fixed points minus poles inside the curve, by the displacement winding"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let map = ctx.require_map(self.name())?;
        let report = fixed_point_defect(map, ctx.curve)?;
        Ok(serde_json::json!({
            "defect": report.defect,
            "poles": report.poles_inside,
            "fixed": report.fixed_points_inside,
            "samples": report.curve.len(),
        }))
    }
}

struct PolesInLoopsAction;

impl CurveAction for PolesInLoopsAction {
    fn name(&self) -> &'static str {
        "poles-in-loops"
    }
    fn summary(&self) -> &'static str {
        "smallest n with a pole inside the n-th image of the curve"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let map = ctx.require_map(self.name())?;
        let result = poles_in_loops_search(map, ctx.curve, ctx.n_max)?;
        Ok(serde_json::to_value(result).expect("plain struct serializes"))
    }
}

struct CheckIndexAction;

impl CurveAction for CheckIndexAction {
    fn name(&self) -> &'static str {
        "check-index"
    }
    fn summary(&self) -> &'static str {
        "boundary traps its image => region holds poles+1 fixed points"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let map = ctx.require_map(self.name())?;
        let report = check_index_hypotheses(map, ctx.curve)?;
        Ok(serde_json::to_value(report).expect("report serializes"))
    }
}

struct CheckMapOutAction;

impl CurveAction for CheckMapOutAction {
    fn name(&self) -> &'static str {
        "check-mapout"
    }
    fn summary(&self) -> &'static str {
        "curve surrounds a pole and maps out => weakly repelling fixed point inside"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let map = ctx.require_map(self.name())?;
        let report = check_surround_and_map_out(map, ctx.curve)?;
        Ok(serde_json::to_value(report).expect("report serializes"))
    }
}

struct CheckMapOutTwiceAction;

impl CurveAction for CheckMapOutTwiceAction {
    fn name(&self) -> &'static str {
        "check-mapout2"
    }
    fn summary(&self) -> &'static str {
        "curve inside its image, second image outside => weakly repelling fixed point"
    }
    fn run(&self, ctx: &ActionContext<'_>) -> Result<serde_json::Value, ActionError> {
        let map = ctx.require_map(self.name())?;
        let report = check_map_out_twice(map, ctx.curve)?;
        Ok(serde_json::to_value(report).expect("report serializes"))
    }
}

/// Name-indexed collection of actions.
pub struct ActionRegistry {
    actions: Vec<Box<dyn CurveAction>>,
}

impl ActionRegistry {
    /// The built-in action set.
    pub fn standard() -> ActionRegistry {
        ActionRegistry {
            actions: vec![
                Box::new(PushAction),
                Box::new(WindingAction),
                Box::new(DefectAction),
                Box::new(PolesInLoopsAction),
                Box::new(CheckIndexAction),
                Box::new(CheckMapOutAction),
                Box::new(CheckMapOutTwiceAction),
            ],
        }
    }

    pub fn get(&self, name: &str) -> Option<&dyn CurveAction> {
        self.actions.iter().find(|a| a.name() == name).map(|a| a.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.actions.iter().map(|a| a.name()).collect()
    }
}
