//! Stokes functionals along tangential and transversal variations, boundary pairings and
//! vorticity-flux masses, and identity checks for smooth data.

mod classical;
mod localizer;
mod manifold;

pub use classical::{
    faraday_face_check, normal_trace_ext, rankine_hugoniot_check, smooth_validators, FaradayCheck, RankineHugoniot,
    ValidatorReport,
};
pub use localizer::{
    boundary_pairing, boundary_pairing_mass, mass_representative_independence, stokes_density, stokes_tangential,
    vorticity_flux, vorticity_flux_cm1, StokesDensity, VorticityFlux,
};
pub use manifold::{
    gauss_green_manifold, interior_bumps, manifold_div_measure, stokes_transversal, DivOptions, ManifoldDivMeasure,
    TransversalStokes,
};

use crate::extrapolate::{richardson, spread};
use crate::fields::FieldError;
use crate::geometry::GeometryError;
use crate::selection::SelectionError;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StokesError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error("δ-sequence did not converge (oscillation {t_osc:.3e})")]
    NotConverged { t_osc: f64 },
    #[error("transversal maximal function is infinite at t = {t}")]
    InfiniteMaximal { t: f64 },
    #[error("field is not tangential (residual {residual:.3e})")]
    NotTangential { residual: f64 },
    #[error("precondition failed: {what} (residual {residual:.3e})")]
    Precondition { what: String, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    TangentialLocalizer,
    TransversalGaussGreen,
    MassPairing,
}

impl std::str::FromStr for Route {
    type Err = StokesError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tangential" | "tangential_localizer" => Ok(Route::TangentialLocalizer),
            "transversal" | "transversal_gauss_green" => Ok(Route::TransversalGaussGreen),
            "mass" | "mass_pairing" => Ok(Route::MassPairing),
            _ => Err(StokesError::Precondition { what: format!("unknown route `{s}`"), residual: f64::NAN }),
        }
    }
}

/// A functional evaluated along a δ-sequence with its limit diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct StokesResult {
    pub route: Route,
    /// `(δ, value)` pairs in decreasing `δ`.
    pub delta_values: Vec<(f64, f64)>,
    /// Present only when converged.
    pub extrapolated: Option<f64>,
    /// `sup − inf` of the last four raw values.
    pub t_osc: f64,
    pub converged: bool,
}

impl StokesResult {
    pub fn values(&self) -> Vec<f64> {
        self.delta_values.iter().map(|p| p.1).collect()
    }

    pub fn value(&self) -> Result<f64, StokesError> {
        self.extrapolated.ok_or(StokesError::NotConverged { t_osc: self.t_osc })
    }

    /// Result of a route without a δ-limit.
    pub fn exact(route: Route, value: f64) -> Self {
        Self { route, delta_values: Vec::new(), extrapolated: Some(value), t_osc: 0.0, converged: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StokesOptions {
    /// Ramp widths; values with `t + δ > 1` are dropped.
    pub deltas: Vec<f64>,
    /// Gauss points across the ramp per unbroken piece.
    pub ramp_order: usize,
    /// Nodes along the layer.
    pub layer_nodes: usize,
    /// Relative spread of the last three extrapolants accepted as convergence.
    pub tol: f64,
    /// Largest raw oscillation compatible with convergence.
    pub osc_tol: f64,
    /// Collar parameters at which the integrand jumps.
    pub breaks: Vec<f64>,
}

impl Default for StokesOptions {
    fn default() -> Self {
        Self {
            deltas: (2..=12).map(|j| 0.5f64.powi(j)).collect(),
            ramp_order: 8,
            layer_nodes: 64,
            tol: 1e-5,
            osc_tol: 0.05,
            breaks: Vec::new(),
        }
    }
}

/// Richardson levels applied to δ-sequences.
const RICHARDSON_LEVELS: usize = 2;

pub(crate) fn assemble(route: Route, delta_values: Vec<(f64, f64)>, opts: &StokesOptions) -> StokesResult {
    let values: Vec<f64> = delta_values.iter().map(|p| p.1).collect();
    let t_osc = spread(&values[values.len().saturating_sub(4)..]);
    let col = richardson(&values, RICHARDSON_LEVELS.min(values.len().saturating_sub(1)));
    let converged = col.len() >= 3 && {
        let tail = &col[col.len() - 3..];
        let last = tail[2];
        spread(tail) < opts.tol * last.abs().max(1.0) && t_osc <= opts.osc_tol && last.is_finite()
    };
    StokesResult { route, delta_values, extrapolated: converged.then(|| col[col.len() - 1]), t_osc, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_error_sequences_converge() {
        let dv: Vec<(f64, f64)> = (2..=12)
            .map(|j| {
                let d = 0.5f64.powi(j);
                (d, 3.0 - d + d * d)
            })
            .collect();
        let r = assemble(Route::TangentialLocalizer, dv, &StokesOptions::default());
        assert!(r.converged);
        assert!((r.extrapolated.unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn alternating_sequences_do_not() {
        let dv: Vec<(f64, f64)> = (2..=12).map(|j| (0.5f64.powi(j), if j % 2 == 0 { 1.0 } else { -1.0 })).collect();
        let r = assemble(Route::TangentialLocalizer, dv, &StokesOptions::default());
        assert!(!r.converged);
        assert_eq!(r.extrapolated, None);
        assert_eq!(r.t_osc, 2.0);
    }
}
