//! Vector fields whose curl is a measure: catalog, decomposition, integration.

pub mod catalog;
pub mod deriv;
pub mod measure;
pub mod mollify;
pub mod sheet;

pub use catalog::{catalog, CatalogEntry, CatalogName, PlaneWave};
pub use deriv::{curl4, divergence4, gradient4, numeric_curl};
pub use measure::{
    integrate_measure, integrate_measure_on_boundary, total_variation, CurlMeasure, LinePart, MeasureRule, SheetPart,
};
pub use mollify::{mollifier_3d, mollify};
pub use sheet::{gluing_total_variation, make_vortex_sheet, PiecewiseField};

use crate::geometry::{GeometryError, SurfacePatch, Vec3};
use std::fmt;
use std::sync::Arc;

pub type VecFn = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
pub type ScalarFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("unknown catalog field `{0}`")]
    UnknownName(String),
    #[error("stencil of half-width {h} at ({}, {}, {}) touches the singular set", point[0], point[1], point[2])]
    StencilTouchesSingularity { point: [f64; 3], h: f64 },
    #[error("non-finite value at ({}, {}, {})", point[0], point[1], point[2])]
    NonFinite { point: [f64; 3] },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

/// Declared singular support, used for stencil checks and quadrature exclusion.
#[derive(Debug, Clone, PartialEq)]
pub enum Singular {
    Point(Vec3),
    /// Full line through `point` along `dir`.
    Line {
        point: Vec3,
        dir: Vec3,
    },
    /// Plane `{(x − point)·normal = 0}`.
    Plane {
        point: Vec3,
        normal: Vec3,
    },
    Surface(SurfacePatch),
}

impl Singular {
    pub fn distance(&self, x: &Vec3) -> f64 {
        match self {
            Singular::Point(p) => (x - p).norm(),
            Singular::Line { point, dir } => {
                let d = x - point;
                let e = dir.normalize();
                (d - e * d.dot(&e)).norm()
            }
            Singular::Plane { point, normal } => (x - point).dot(&normal.normalize()).abs(),
            Singular::Surface(p) => {
                let foot = p.project(x);
                let (u, v) = p.param_of(&foot);
                if p.param_margin(u, v) >= 0.0 {
                    (x - foot).norm()
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// `F ∈ CMᵖ`: an evaluable field, optionally with its classical curl off the singular set.
#[derive(Clone)]
pub struct VectorField {
    pub name: String,
    eval: VecFn,
    curl: Option<VecFn>,
    /// Integrability exponent; `f64::INFINITY` for bounded fields.
    pub p: f64,
    pub singular: Vec<Singular>,
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VectorField")
            .field("name", &self.name)
            .field("analytic_curl", &self.curl.is_some())
            .field("p", &self.p)
            .field("singular", &self.singular)
            .finish()
    }
}

impl VectorField {
    pub fn new(name: impl Into<String>, f: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), eval: Arc::new(f), curl: None, p: f64::INFINITY, singular: Vec::new() }
    }

    pub fn constant(c: Vec3) -> Self {
        Self::new("constant", move |_| c).with_curl(|_| Vec3::zeros())
    }

    pub fn zero() -> Self {
        Self::constant(Vec3::zeros())
    }

    pub fn with_curl(mut self, c: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.curl = Some(Arc::new(c));
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_singular(mut self, s: Singular) -> Self {
        self.singular.push(s);
        self
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        (self.eval)(x)
    }

    pub fn analytic_curl(&self, x: &Vec3) -> Option<Vec3> {
        self.curl.as_ref().map(|c| c(x))
    }

    pub fn has_analytic_curl(&self) -> bool {
        self.curl.is_some()
    }

    /// Classical curl: analytic when available, fourth-order differences otherwise.
    pub fn curl(&self, x: &Vec3) -> Vec3 {
        match &self.curl {
            Some(c) => c(x),
            None => curl4(&|y| self.eval(y), x, 1e-3),
        }
    }

    pub fn singular_distance(&self, x: &Vec3) -> f64 {
        self.singular.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min)
    }

    pub fn as_fn(&self) -> VecFn {
        self.eval.clone()
    }

    /// `F + G`, with analytic curl when both have one.
    pub fn plus(&self, other: &VectorField) -> VectorField {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        let mut out = VectorField::new(format!("{}+{}", self.name, other.name), move |x| a(x) + b(x));
        if let (Some(ca), Some(cb)) = (self.curl.clone(), other.curl.clone()) {
            out.curl = Some(Arc::new(move |x| ca(x) + cb(x)));
        }
        out.p = self.p.min(other.p);
        out.singular = self.singular.iter().chain(&other.singular).cloned().collect();
        out
    }
}

pub(crate) fn finite_or(x: &Vec3, v: f64) -> Result<f64, FieldError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(FieldError::NonFinite { point: [x.x, x.y, x.z] })
    }
}
