use crate::config::{parse_gamma, CommandKind, Gamma, RunConfig};
use crate::reproduce::{annuli_closed_form, reproduce};
use crate::spec::{parse_grid, Region, Surface};
use crate::table::{Cell, ResultTable};
use crate::CliError;
use curlflux::birkhoff_rott::{diagnostics, evolve, SheetState};
use curlflux::fields::catalog::annuli_trace;
use curlflux::fields::{catalog, CatalogEntry, CatalogName, MeasureRule, VectorField};
use curlflux::geometry::*;
use curlflux::selection::{default_eps_grid, maximal_tangential, maximal_transversal, uniform_t_grid};
use curlflux::stokes::*;
use curlflux::traces::{estimate_trace_layerwise, trace_order_diagnostic, LayerOptions, Side};
use std::f64::consts::PI;

/// A finished command: its table and whether every check in it passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: ResultTable,
    pub passed: bool,
}

impl Outcome {
    fn ok(table: ResultTable) -> Self {
        Self { table, passed: true }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let mut out = match cfg.command {
        CommandKind::Trace => Outcome::ok(trace(cfg)?),
        CommandKind::Stokes => Outcome::ok(stokes(cfg)?),
        CommandKind::Maximal => Outcome::ok(maximal(cfg)?),
        CommandKind::Br => Outcome::ok(br(cfg)?),
        CommandKind::Validate => validate(cfg)?,
        CommandKind::Example => Outcome::ok(example(cfg)?),
        CommandKind::Reproduce => {
            let name = cfg.name.as_deref().ok_or_else(|| CliError::config("name", "reproduce needs a name"))?;
            let r = reproduce(name, &cfg.tolerances)?;
            Outcome { passed: r.passed(), table: r.table() }
        }
    };
    let t = &mut out.table;
    t.meta("tool", format!("curlflux {}", env!("CARGO_PKG_VERSION")));
    t.meta(
        "command",
        serde_json::to_value(cfg.command).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
    );
    for (key, v) in [("field", &cfg.field), ("surface", &cfg.surface), ("region", &cfg.region), ("route", &cfg.route)] {
        if let Some(v) = v {
            t.meta(key, v);
        }
    }
    if let Some(tv) = cfg.t {
        t.meta("t", tv);
    }
    let params = match cfg.command {
        CommandKind::Br => serde_json::to_string(&cfg.br).ok(),
        CommandKind::Reproduce => None,
        _ => serde_json::to_string(&cfg.numerics).ok(),
    };
    if let Some(p) = params {
        t.meta("parameters", p);
    }
    Ok(out)
}

fn field_entry(cfg: &RunConfig, default: &str) -> Result<CatalogEntry, CliError> {
    let name = cfg.field.as_deref().unwrap_or(default);
    catalog(name).map_err(|e| CliError::config("field", e.to_string()))
}

fn surface(cfg: &RunConfig) -> Result<Surface, CliError> {
    cfg.surface.as_deref().unwrap_or("disk:r=0.5,z=0.5").parse().map_err(|e| CliError::config("surface", e))
}

fn stokes_options(cfg: &RunConfig, breaks: Vec<f64>) -> StokesOptions {
    let n = &cfg.numerics;
    let mut o = StokesOptions {
        ramp_order: n.ramp_order,
        layer_nodes: n.layer_nodes,
        tol: n.tol,
        osc_tol: n.osc_tol,
        breaks,
        ..StokesOptions::default()
    };
    if !n.deltas.is_empty() {
        o.deltas = n.deltas.clone();
    }
    o
}

fn cylinder_of(s: &Surface) -> Result<SolidRegion, CliError> {
    s.cylinder().ok_or_else(|| CliError::config("surface", "this route needs a disk, the bottom face of a cylinder"))
}

fn trace(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let e = field_entry(cfg, "rigid_rotation")?;
    let region: Region =
        cfg.region.as_deref().unwrap_or("half_ball").parse().map_err(|e| CliError::config("region", e))?;
    let side = match cfg.side.as_deref() {
        Some(s) => crate::config::parse_side(s)?,
        None => Side::Interior,
    };
    let collar = build_transversal_collar(&region.solid())?;
    let opts = LayerOptions { nodes: cfg.numerics.order.min(32), ..LayerOptions::default() };
    let tr = estimate_trace_layerwise(&e.field, &collar, side, &opts)?;
    let mut t =
        ResultTable::new(&["patch", "x", "y", "z", "trace_x", "trace_y", "trace_z", "normal_residual", "converged"]);
    t.meta("max_residual", tr.max_residual());
    t.meta("converged_fraction", tr.converged_fraction());
    t.meta("sup_bound", tr.sup_bound);
    for s in &tr.samples {
        t.push(vec![
            s.patch.into(),
            s.x.x.into(),
            s.x.y.into(),
            s.x.z.into(),
            s.value.x.into(),
            s.value.y.into(),
            s.value.z.into(),
            s.residual.into(),
            s.converged.into(),
        ]);
    }
    Ok(t)
}

/// Vorticity flux through a flat surface by one route.
pub fn flux_by_route(
    e: &CatalogEntry,
    s: &Surface,
    route: Route,
    t: f64,
    opts: &StokesOptions,
) -> Result<(f64, Option<StokesResult>), CliError> {
    let rule = MeasureRule::default();
    let nu = Vec3::z();
    let field = e.field.clone();
    let trace = move |x: &Vec3| field.eval(x).cross(&nu);
    match route {
        Route::TangentialLocalizer => {
            let m = BoundaryManifold::new(s.patch());
            let collar = build_tangential_collar(&m)?;
            let mut opts = opts.clone();
            if e.name == CatalogName::Annuli {
                opts.breaks = collar.level_breaks(&e.breaks);
                let v = vorticity_flux(&annuli_trace, &collar, t, &opts)?;
                return Ok((v.flux, Some(v.result)));
            }
            let v = vorticity_flux(&trace, &collar, t, &opts)?;
            Ok((v.flux, Some(v.result)))
        }
        Route::TransversalGaussGreen => {
            let region = cylinder_of(s)?;
            let collar = build_transversal_collar(&region)?;
            let m = BoundaryManifold::new(region.boundary[0].clone());
            let r = stokes_transversal(&e.field, &e.curl, &m, &collar, t, &TestFunction::constant(1.0), &rule)?;
            Ok((r.result.value()?, Some(r.result)))
        }
        Route::MassPairing => {
            let region = cylinder_of(s)?;
            let m = BoundaryManifold::new(region.boundary[0].clone());
            let collar = build_tangential_collar(&m)?;
            let r = vorticity_flux_cm1(&e.curl, &region, &trace, &collar, t, opts, &rule)?;
            Ok((r.flux, None))
        }
    }
}

fn stokes(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let e = field_entry(cfg, "line_vortex")?;
    let s = surface(cfg)?;
    let route: Route = cfg
        .route
        .as_deref()
        .unwrap_or("tangential")
        .parse()
        .map_err(|e: StokesError| CliError::config("route", e.to_string()))?;
    let t = cfg.t.unwrap_or(0.0);
    let (flux, result) = flux_by_route(&e, &s, route, t, &stokes_options(cfg, Vec::new()))?;
    let mut table = ResultTable::new(&["route", "t", "flux", "converged", "t_osc"]);
    let (conv, osc) = result.as_ref().map_or((true, 0.0), |r| (r.converged, r.t_osc));
    table.push(vec![
        cfg.route.clone().unwrap_or("tangential".into()).into(),
        t.into(),
        flux.into(),
        conv.into(),
        osc.into(),
    ]);
    Ok(table)
}

fn maximal(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let e = field_entry(cfg, "line_vortex")?;
    let s = surface(cfg)?;
    let n = cfg.numerics.t_points;
    let mut table = ResultTable::new(&["t", "maximal", "maximal_plus", "maximal_minus"]);
    let scan = match cfg.direction.as_deref().unwrap_or("transversal") {
        "transversal" => {
            let region = cylinder_of(&s)?;
            let collar = build_transversal_collar(&region)?;
            let m = BoundaryManifold::new(region.boundary[0].clone());
            maximal_transversal(&e.curl, &m, &collar, &uniform_t_grid(n), &default_eps_grid(), &MeasureRule::default())?
        }
        _ => {
            let m = BoundaryManifold::new(s.patch());
            let collar = build_tangential_collar(&m)?;
            let grid: Vec<f64> = (0..n).map(|i| 0.9 * i as f64 / n as f64).collect();
            let breaks = collar.level_breaks(&e.breaks);
            let f = e.field.clone();
            let density = move |x: &Vec3| f.eval(x).cross(&Vec3::z()).norm();
            maximal_tangential(&density, &collar, &grid, &default_eps_grid(), &breaks, 8)?
        }
    };
    table.meta("collar_mass", scan.collar_mass);
    for i in 0..scan.t_grid.len() {
        table.push(vec![scan.t_grid[i].into(), scan.values[i].into(), scan.plus[i].into(), scan.minus[i].into()]);
    }
    Ok(table)
}

fn br(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let b = &cfg.br;
    let (nx, ny) = parse_grid(&b.grid).map_err(|e| CliError::config("br.grid", e))?;
    let spacing = (1.0 / nx as f64, 1.0 / ny as f64);
    let desing = b.delta_br.unwrap_or_else(|| SheetState::default_desing(spacing));
    let gamma = parse_gamma(&b.gamma)?;
    let a = b.amplitude;
    let sheet = SheetState::periodic_graph(
        nx,
        ny,
        1.0,
        1.0,
        |x, y| a * (2.0 * PI * x).sin() * (2.0 * PI * y).sin(),
        |x| match gamma {
            Gamma::Constant(g) => Vec3::new(g[0], g[1], g[2]),
            Gamma::Shear => Vec3::new((2.0 * PI * x.y).cos(), 0.0, 0.0),
        },
        desing,
    )?;
    let mut table = ResultTable::new(&["frame", "step", "time", "i", "j", "x", "y", "z"]);
    let mut frame = 0usize;
    let mut dump = |k: usize, s: &SheetState, table: &mut ResultTable| {
        for (idx, p) in s.markers.iter().enumerate() {
            table.push(vec![
                frame.into(),
                k.into(),
                s.time.into(),
                (idx % s.nx).into(),
                (idx / s.nx).into(),
                p.x.into(),
                p.y.into(),
                p.z.into(),
            ]);
        }
        frame += 1;
    };
    dump(0, &sheet, &mut table);
    let steps = b.steps;
    let every = b.dump_every;
    let (end, rep) = evolve(&sheet, b.dt, steps, |k, s| {
        if k == steps || (every > 0 && k % every == 0) {
            dump(k, s, &mut table);
        }
    })?;
    let d = diagnostics(&end);
    table.meta("delta_br", desing);
    let c = d.circulation.map(Cell::Float);
    table.meta("circulation", format!("{} {} {}", c.x, c.y, c.z));
    table.meta("area", d.area);
    table.meta("curvature_proxy", d.curvature_proxy);
    table.meta("tangential_residual", d.tangential_residual);
    table.meta("max_normal_drift", rep.max_normal_drift);
    table.meta("circulation_drift", rep.circulation_drift);
    table.meta("collision", rep.collision);
    Ok(table)
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = field_entry(cfg, "rigid_rotation")?.field;
    let region: Region =
        cfg.region.as_deref().unwrap_or("half_ball").parse().map_err(|e| CliError::config("region", e))?;
    let g = VectorField::new("g", |x| Vec3::new(x.y * x.z, x.x * x.x, x.x + x.z))
        .with_curl(|x| Vec3::new(0.0, x.y - 1.0, 2.0 * x.x - x.z));
    let phi = TestFunction::new("phi", |x| 1.0 + x.x * x.y - x.z, |x| Vec3::new(x.y, x.x, -1.0));
    let rep = smooth_validators(&f, &region.solid(), &phi, &g, cfg.numerics.order)?;
    let tol = cfg.tolerances.get("validate").copied().unwrap_or(1e-8);
    let mut table = ResultTable::new(&["identity", "residual", "tolerance", "pass"]);
    let mut passed = true;
    for (name, d) in [("D1", rep.d1), ("D2", rep.d2), ("D3", rep.d3), ("D4", rep.d4)] {
        let ok = d <= tol;
        passed &= ok;
        table.push(vec![name.into(), d.into(), tol.into(), ok.into()]);
    }
    Ok(Outcome { table, passed })
}

fn example(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    match cfg.name.as_deref().unwrap_or("annuli") {
        "annuli" => annuli_example(cfg),
        "line_vortex" => {
            let e = field_entry(cfg, "line_vortex")?;
            let s = surface(cfg)?;
            let opts = stokes_options(cfg, Vec::new());
            let mut table = ResultTable::new(&["route", "t", "flux"]);
            for (name, route, t) in [
                ("tangential", Route::TangentialLocalizer, 0.0),
                ("transversal", Route::TransversalGaussGreen, 0.25),
                ("mass", Route::MassPairing, 0.2),
            ] {
                let (flux, _) = flux_by_route(&e, &s, route, t, &opts)?;
                table.push(vec![name.into(), t.into(), flux.into()]);
            }
            Ok(table)
        }
        "newtonian" => {
            let f = catalog("newtonian")?.field;
            let face = SolidRegion::half_ball(Vec3::zeros(), 1.0).boundary[0].clone();
            let eps = [1e-1, 1e-2, 1e-3, 1e-4];
            let d = trace_order_diagnostic(&f, &face, &eps, 16);
            let mut table = ResultTable::new(&["eps", "total_variation", "half_log"]);
            table.meta("order_flag", format!("{:?}", d.order_flag));
            for (e, tv) in eps.iter().zip(&d.total_variation) {
                table.push(vec![(*e).into(), (*tv).into(), (0.5 * (1.0 / e).ln()).into()]);
            }
            Ok(table)
        }
        other => Err(CliError::config(
            "name",
            format!("unknown example `{other}`; expected annuli, line_vortex or newtonian"),
        )),
    }
}

fn annuli_example(cfg: &RunConfig) -> Result<ResultTable, CliError> {
    let t = cfg.t.unwrap_or(0.0);
    if !(0.0..1.0).contains(&t) {
        return Err(CliError::config("t", "tangential collar parameter must lie in [0, 1)"));
    }
    let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()));
    let collar = build_tangential_collar(&m)?;
    let breaks = collar.level_breaks(&catalog("annuli")?.breaks);
    let mut opts = stokes_options(cfg, breaks);
    if cfg.numerics.deltas.is_empty() {
        opts.deltas = (1..=10).map(|j| 0.5f64.powi(j)).collect();
    }
    let r = stokes_tangential(&annuli_trace, &collar, t, &TestFunction::constant(1.0), &opts)?;
    let mut table = ResultTable::new(&["j", "delta", "value", "integral", "closed_form"]);
    table.meta("verdict", if r.converged { "CONVERGENT" } else { "NON-CONVERGENT" });
    table.meta("t_osc", r.t_osc);
    if let Some(x) = r.extrapolated {
        table.meta("extrapolated", x);
    }
    for (d, v) in &r.delta_values {
        let j = -d.log2();
        let exact = if t == 0.0 && (j - j.round()).abs() < 1e-12 {
            Cell::Float(annuli_closed_form(j.round() as i32))
        } else {
            Cell::Text(String::new())
        };
        let jc = if (j - j.round()).abs() < 1e-12 { Cell::Int(j.round() as i64) } else { Cell::Float(j) };
        table.push(vec![jc, (*d).into(), (*v).into(), (-v).into(), exact]);
    }
    Ok(table)
}
