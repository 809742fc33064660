//! JSON-friendly report shapes shared by the verification procedures and
//! the command-line frontend.

use crate::contour::FixedPoint;
use serde::{Deserialize, Serialize};

/// One named hypothesis of a verification procedure, with its outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Hypothesis {
    pub fn new(name: &str, pass: bool, detail: String) -> Hypothesis {
        Hypothesis { name: name.to_string(), pass, detail }
    }
}

/// A fixed point as it appears in reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPointRecord {
    pub re: f64,
    pub im: f64,
    pub multiplicity: u32,
    pub stability: String,
    /// N′ at the fixed point, as `[re, im]`.
    pub derivative: [f64; 2],
}

impl From<&FixedPoint> for FixedPointRecord {
    fn from(fp: &FixedPoint) -> FixedPointRecord {
        FixedPointRecord {
            re: fp.location.re,
            im: fp.location.im,
            multiplicity: fp.multiplicity,
            stability: fp.stability.as_str().to_string(),
            derivative: [fp.derivative.re, fp.derivative.im],
        }
    }
}

/// Outcome of a verification procedure: each hypothesis with its verdict,
/// a prose conclusion, and any fixed points that were located along the way.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckReport {
    pub hypotheses: Vec<Hypothesis>,
    pub conclusion: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poles_inside: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_fixed_points: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counted_fixed_points: Option<i64>,
    pub fixed_points: Vec<FixedPointRecord>,
}

impl CheckReport {
    /// Did every hypothesis hold?
    pub fn all_pass(&self) -> bool {
        self.hypotheses.iter().all(|h| h.pass)
    }
}
