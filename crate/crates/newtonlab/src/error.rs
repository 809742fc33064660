//! Crate-level error umbrella, for callers that thread several stages.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error(transparent)]
    Parse(#[from] crate::expr::ParseError),
    #[error(transparent)]
    Map(#[from] crate::map::MapError),
    #[error(transparent)]
    Poly(#[from] crate::poly::PolyError),
    #[error(transparent)]
    Contour(#[from] crate::contour::ContourError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Topology(#[from] crate::topology::TopologyError),
}
