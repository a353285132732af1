use crate::spec::{parse_grid, Region, Surface};
use crate::CliError;
use curlflux::fields::catalog;
use curlflux::stokes::Route;
use curlflux::traces::Side;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Trace,
    Stokes,
    Maximal,
    Br,
    Validate,
    Example,
    Reproduce,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    /// Quadrature order per patch.
    pub order: usize,
    pub ramp_order: usize,
    pub layer_nodes: usize,
    /// Localizer widths `δ`; empty means `2^{-j}`, `j = 2..12`.
    pub deltas: Vec<f64>,
    /// Relative spread of the last extrapolants.
    pub tol: f64,
    pub osc_tol: f64,
    /// Points of the collar parameter grid.
    pub t_points: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self { order: 24, ramp_order: 8, layer_nodes: 64, deltas: Vec::new(), tol: 1e-5, osc_tol: 0.05, t_points: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BrParams {
    pub grid: String,
    /// `uniform`, `shear` or a constant vector `a,b,c`.
    pub gamma: String,
    /// Height of the `a sin(2πx) sin(2πy)` perturbation.
    pub amplitude: f64,
    /// Defaults to twice the marker spacing.
    pub delta_br: Option<f64>,
    pub dt: f64,
    pub steps: usize,
    /// Marker dump period in steps; zero keeps only the first and last frames.
    pub dump_every: usize,
}

impl Default for BrParams {
    fn default() -> Self {
        Self {
            grid: "16x16".into(),
            gamma: "uniform".into(),
            amplitude: 0.0,
            delta_br: None,
            dt: 0.05,
            steps: 10,
            dump_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default)]
    pub surface: Option<String>,
    #[serde(default)]
    pub region: Option<String>,
    #[serde(default)]
    pub route: Option<String>,
    #[serde(default)]
    pub side: Option<String>,
    /// `transversal` or `tangential` for maximal scans.
    #[serde(default)]
    pub direction: Option<String>,
    /// Example or reproduction name.
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub br: BrParams,
    /// Per-check tolerance overrides for `reproduce` and `validate`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            field: None,
            surface: None,
            region: None,
            route: None,
            side: None,
            direction: None,
            name: None,
            t: None,
            numerics: Numerics::default(),
            br: BrParams::default(),
            tolerances: BTreeMap::new(),
            output: None,
            format: Format::Csv,
        }
    }

    /// Keys present in the JSON file at `path` replace the corresponding values.
    pub fn overlay_file(&self, path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let over: Value = serde_json::from_str(&text).map_err(|e| CliError::config("config", e.to_string()))?;
        self.overlay(over)
    }

    pub fn overlay(&self, over: Value) -> Result<Self, CliError> {
        let mut base = serde_json::to_value(self).expect("config serializes");
        merge(&mut base, over);
        serde_path_to_error::deserialize(base).map_err(|e| {
            let path = e.path().to_string();
            CliError::config(&path, e.into_inner().to_string())
        })
    }

    /// Range and name checks before dispatch.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(f) = &self.field {
            catalog(f).map_err(|e| CliError::config("field", e.to_string()))?;
        }
        if let Some(s) = &self.surface {
            s.parse::<Surface>().map_err(|e| CliError::config("surface", e))?;
        }
        if let Some(r) = &self.region {
            r.parse::<Region>().map_err(|e| CliError::config("region", e))?;
        }
        if let Some(r) = &self.route {
            r.parse::<Route>().map_err(|e| CliError::config("route", e.to_string()))?;
        }
        if let Some(s) = &self.side {
            parse_side(s)?;
        }
        if let Some(d) = &self.direction {
            if d != "transversal" && d != "tangential" {
                return Err(CliError::config("direction", format!("expected transversal or tangential, got `{d}`")));
            }
        }
        if let Some(t) = self.t {
            if !t.is_finite() || t.abs() >= 1.0 {
                return Err(CliError::config("t", format!("collar parameter must lie in (-1, 1), got {t}")));
            }
        }
        let n = &self.numerics;
        if !(2..=256).contains(&n.order) {
            return Err(CliError::config("numerics.order", "must lie in 2..=256"));
        }
        if n.ramp_order < 2 || n.layer_nodes < 2 {
            return Err(CliError::config("numerics.ramp_order", "node counts must be at least 2"));
        }
        if n.deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(CliError::config("numerics.deltas", "widths must lie in (0, 1)"));
        }
        if !(n.tol > 0.0) || !(n.osc_tol > 0.0) {
            return Err(CliError::config("numerics.tol", "tolerances must be positive"));
        }
        if n.t_points == 0 {
            return Err(CliError::config("numerics.t_points", "must be positive"));
        }
        let b = &self.br;
        let (nx, ny) = parse_grid(&b.grid).map_err(|e| CliError::config("br.grid", e))?;
        if nx < 3 || ny < 3 {
            return Err(CliError::config("br.grid", "need at least 3x3 markers"));
        }
        parse_gamma(&b.gamma)?;
        if !(b.dt > 0.0) {
            return Err(CliError::config("br.dt", "must be positive"));
        }
        if b.delta_br.is_some_and(|d| !(d > 0.0)) {
            return Err(CliError::config("br.delta_br", "must be positive"));
        }
        if !b.amplitude.is_finite() {
            return Err(CliError::config("br.amplitude", "must be finite"));
        }
        for (k, v) in &self.tolerances {
            if !(*v >= 0.0) {
                return Err(CliError::config(&format!("tolerances.{k}"), "must be non-negative"));
            }
        }
        Ok(())
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

pub fn parse_side(s: &str) -> Result<Side, CliError> {
    match s {
        "interior" => Ok(Side::Interior),
        "exterior" => Ok(Side::Exterior),
        _ => Err(CliError::config("side", format!("expected interior or exterior, got `{s}`"))),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    Constant([f64; 3]),
    /// `(cos 2πy, 0, 0)`.
    Shear,
}

pub fn parse_gamma(s: &str) -> Result<Gamma, CliError> {
    match s {
        "uniform" => Ok(Gamma::Constant([1.0, 0.0, 0.0])),
        "shear" => Ok(Gamma::Shear),
        _ => {
            let parts: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
            match parts {
                Ok(p) if p.len() == 3 && p.iter().all(|v| v.is_finite()) => Ok(Gamma::Constant([p[0], p[1], p[2]])),
                _ => Err(CliError::config("br.gamma", format!("expected uniform, shear or a,b,c; got `{s}`"))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overlay_replaces_nested_keys() {
        let base = RunConfig::new(CommandKind::Stokes);
        let c = base.overlay(json!({"numerics": {"order": 12}, "field": "line_vortex"})).unwrap();
        assert_eq!(c.numerics.order, 12);
        assert_eq!(c.numerics.ramp_order, 8);
        assert_eq!(c.field.as_deref(), Some("line_vortex"));
    }

    #[test]
    fn errors_name_the_field_path() {
        let base = RunConfig::new(CommandKind::Stokes);
        match base.overlay(json!({"numerics": {"order": "many"}})) {
            Err(CliError::Config { path, .. }) => assert_eq!(path, "numerics.order"),
            other => panic!("{other:?}"),
        }
        let mut c = base.clone();
        c.field = Some("nope".into());
        assert!(matches!(c.validate(), Err(CliError::Config { path, .. }) if path == "field"));
        c.field = None;
        c.br.grid = "2x2".into();
        assert!(matches!(c.validate(), Err(CliError::Config { path, .. }) if path == "br.grid"));
    }
}
