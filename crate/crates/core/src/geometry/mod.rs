//! Parametrized surfaces, boundary curves, collars, height functions and quadrature.

pub mod clip;
pub mod collar;
pub mod dictionary;
pub mod extension;
pub mod manifold;
pub mod patch;
pub mod quadrature;
pub mod region;

pub use clip::clip_intervals;
pub use collar::{
    build_tangential_collar, height_function, shrink_tangential, BandNode, Breaks, CollarKind, HeightFunction,
    TangentialCollar,
};
pub use dictionary::{bspline_bump, dictionary, harmonics, TestFunction};
pub use extension::{extend_boundary_function, theta, Extension, GradientReport};
pub use manifold::{line_integral, Axis, BoundaryManifold, Curve, CurveNode, Edge};
pub use patch::{surface_integral, Frame, ParamDomain, Regularity, Shape, SurfacePatch};
pub use quadrature::{GaussLegendre, QuadratureRule};
pub use region::{
    build_transversal_collar, shift_transversal, with_fields, RegionKind, ShellNode, SolidRegion, TransversalCollar,
    TransversalField, VolumeNode,
};

pub type Vec3 = nalgebra::Vector3<f64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("non-finite integrand at ({}, {}, {})", point[0], point[1], point[2])]
    NonFinite { point: [f64; 3] },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("{name} = {value} outside {range}")]
    OutOfRange { name: &'static str, value: f64, range: &'static str },
    #[error("{0}")]
    Mismatch(String),
    #[error("transversal field fails ν·h ≤ −κ < 0 (κ = {kappa})")]
    NotTransversal { kappa: f64 },
    #[error("shift t = {t} leaves the collar neighborhood")]
    LeftCollar { t: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("sampling too coarse: {0}")]
    TooCoarse(String),
}
