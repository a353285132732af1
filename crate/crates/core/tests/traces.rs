use approx::assert_abs_diff_eq;
use curlflux::fields::*;
use curlflux::geometry::*;
use curlflux::traces::*;
use std::f64::consts::PI;
use std::sync::Arc;

fn glued() -> VectorField {
    let face = SurfacePatch::disk(Vec3::zeros(), 2.0, Vec3::z());
    let (pf, _) = make_vortex_sheet(&VectorField::constant(Vec3::x()), &VectorField::zero(), &face).unwrap();
    pf.as_field()
}

#[test]
fn glued_constants_one_sided_traces() {
    let region = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let collar = build_transversal_collar(&region).unwrap();
    let f = glued();
    let opts = LayerOptions::default();
    let int = estimate_trace_layerwise(&f, &collar, Side::Interior, &opts).unwrap();
    let ext = estimate_trace_layerwise(&f, &collar, Side::Exterior, &opts).unwrap();
    for s in int.samples.iter().filter(|s| s.patch == 0) {
        assert!(s.converged);
        assert_abs_diff_eq!((s.value - Vec3::new(0.0, -1.0, 0.0)).norm(), 0.0, epsilon = 1e-12);
    }
    for s in ext.samples.iter().filter(|s| s.patch == 0) {
        assert_abs_diff_eq!(s.value.norm(), 0.0, epsilon = 1e-12);
    }
}

#[test]
fn smooth_field_trace_on_sphere() {
    let region = SolidRegion::ball(Vec3::zeros(), 1.0);
    let collar = build_transversal_collar(&region).unwrap();
    let f = catalog("rigid_rotation").unwrap().field;
    let tr = estimate_trace_layerwise(&f, &collar, Side::Interior, &LayerOptions::default()).unwrap();
    assert_eq!(tr.converged_fraction(), 1.0);
    assert!(tr.max_residual() <= 1e-6, "{}", tr.max_residual());
    for s in &tr.samples {
        assert_abs_diff_eq!((s.value - f.eval(&s.x).cross(&s.normal)).norm(), 0.0, epsilon = 1e-6);
    }
    assert!(tr.sup_bound <= 1.0 + 1e-9);
}

#[test]
fn rigid_rotation_pairing_matches_boundary_integral() {
    let region = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let e = catalog("rigid_rotation").unwrap();
    let rule = TraceRule::default();
    let lhs = trace_pairing(&e.field, &e.curl, &region, &|_| 1.0, Side::Interior, &rule).unwrap();
    let mut rhs = Vec3::zeros();
    for p in &region.boundary {
        let q = p.rule(16);
        for (n, w) in q.nodes.iter().zip(&q.weights) {
            let x = p.point(n[0], n[1]);
            rhs += e.field.eval(&x).cross(&p.normal(n[0], n[1])) * (w * p.metric_jacobian(n[0], n[1]));
        }
    }
    assert_abs_diff_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-8);
    assert_abs_diff_eq!(lhs.z, 4.0 * PI / 3.0, epsilon = 1e-8);
}

#[test]
fn pairing_is_supported_on_the_boundary() {
    let region = SolidRegion::ball(Vec3::zeros(), 1.0);
    let e = catalog("rigid_rotation").unwrap();
    let bump = |x: &Vec3| (1.0 - 4.0 * x.norm_squared()).max(0.0).powi(8) * (1.0 + x.x - x.z);
    let mut rule = TraceRule::default();
    rule.measure.volume = 48;
    let v = trace_pairing(&e.field, &e.curl, &region, &bump, Side::Interior, &rule).unwrap();
    assert!(v.norm() <= 1e-8, "{v}");
}

#[test]
fn newtonian_pairing_matches_principal_value() {
    let region = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let e = catalog("newtonian").unwrap();
    let phi = |x: &Vec3| (1.0 - x.norm_squared()).powi(2) * (1.0 + x.x + 2.0 * x.y);
    let v = trace_pairing(&e.field, &e.curl, &region, &phi, Side::Interior, &TraceRule::default()).unwrap();
    assert_abs_diff_eq!(v.x, -4.0 / 15.0, epsilon = 1e-3);
    assert_abs_diff_eq!(v.y, 2.0 / 15.0, epsilon = 1e-3);
    assert_abs_diff_eq!(v.z, 0.0, epsilon = 1e-3);
}

fn bottom_test(x: &Vec3) -> Vec3 {
    let r2 = x.x * x.x + x.y * x.y;
    Vec3::new(x.x, x.y, 0.0) * (1.0 - x.z).powi(3) * (1.0 - r2).powi(2)
}

#[test]
fn line_vortex_bottom_face_pairing() {
    let region = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
    let e = catalog("line_vortex").unwrap();
    let rule = TraceRule::default();
    let v = trace_pairing_vector(&e.field, &e.curl, &region, &bottom_test, Side::Interior, &rule).unwrap();
    assert_abs_diff_eq!(v, 1.0 / 6.0, epsilon = 1e-4);
    let collar = build_transversal_collar(&region).unwrap();
    let eps: Vec<f64> = (3..=7).map(|k| 0.5f64.powi(k)).collect();
    let lp = trace_pairing_via_layers(&e.field, &collar, &bottom_test, &eps, &rule).unwrap();
    assert_abs_diff_eq!(lp.extrapolated, 1.0 / 6.0, epsilon = 1e-4);
}

#[test]
fn layer_route_agrees_with_volume_route() {
    let region = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let collar = build_transversal_collar(&region).unwrap();
    let e = catalog("rigid_rotation").unwrap();
    let rule = TraceRule::default();
    let testvec = |x: &Vec3| Vec3::new(x.z, x.x * x.x, 1.0 + x.y);
    let vol = trace_pairing_vector(&e.field, &e.curl, &region, &testvec, Side::Interior, &rule).unwrap();
    let eps: Vec<f64> = (3..=7).map(|k| 0.5f64.powi(k)).collect();
    let lp = trace_pairing_via_layers(&e.field, &collar, &testvec, &eps, &rule).unwrap();
    assert!(lp.converged, "{lp:?}");
    assert_abs_diff_eq!(lp.extrapolated, vol, epsilon = 1e-4);
    let zero = trace_pairing_via_layers(&e.field, &collar, &|_| Vec3::zeros(), &eps, &rule).unwrap();
    assert_eq!(zero.extrapolated, 0.0);
}

#[test]
fn exterior_equals_interior_for_absolutely_continuous_curl() {
    let region = SolidRegion::ball(Vec3::zeros(), 1.0);
    let e = catalog("rigid_rotation").unwrap();
    let phi = |x: &Vec3| 1.0 + x.x * x.y;
    let rule = TraceRule::default();
    let a = trace_pairing(&e.field, &e.curl, &region, &phi, Side::Interior, &rule).unwrap();
    let b = trace_pairing(&e.field, &e.curl, &region, &phi, Side::Exterior, &rule).unwrap();
    assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
}

#[test]
fn tangentiality_defect_on_sphere() {
    let region = SolidRegion::ball(Vec3::zeros(), 1.0);
    let e = catalog("rigid_rotation").unwrap();
    let rule = TraceRule::default();
    let sphere = region.boundary[0].clone();
    let dict = dictionary(&sphere);
    let picks = ["Y00", "Y1x", "Y2xy", "Y2zz"];
    let mut tests: Vec<TestFunction> = dict.iter().filter(|t| picks.contains(&t.name.as_str())).cloned().collect();
    tests.push(dict[0].clone());
    assert_eq!(tests.len(), 5);
    for (i, t) in tests.iter().enumerate() {
        let f = t.as_fn();
        let dir = Vec3::new(1.0, 0.5 * i as f64, -0.3);
        let data: VecFn = Arc::new(move |x: &Vec3| (x * 2.0 + dir) * f(x));
        let d = tangentiality_defect(&e.field, &e.curl, &region, data, 0.1, Side::Interior, &rule).unwrap();
        assert!(d.defect <= 1e-3, "{}: {d:?}", t.name);
    }
    let normal: VecFn = Arc::new(|x: &Vec3| -x);
    let d = tangentiality_defect(&e.field, &e.curl, &region, normal, 0.1, Side::Interior, &rule).unwrap();
    assert!(d.full.abs() <= 1e-3, "{d:?}");
}

#[test]
fn tangentiality_defect_needs_one_patch() {
    let region = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let e = catalog("rigid_rotation").unwrap();
    let data: VecFn = Arc::new(|_| Vec3::x());
    let r = tangentiality_defect(&e.field, &e.curl, &region, data, 0.1, Side::Interior, &TraceRule::default());
    assert!(matches!(r, Err(TraceError::Unsupported(_))));
}

#[test]
fn newtonian_trace_has_logarithmic_variation() {
    let face = SolidRegion::half_ball(Vec3::zeros(), 1.0).boundary[0].clone();
    let f = catalog("newtonian").unwrap().field;
    let eps = [1e-1, 1e-2, 1e-3];
    let d = trace_order_diagnostic(&f, &face, &eps, 16);
    for (e, tv) in eps.iter().zip(&d.total_variation) {
        let exact = 0.5 * (1.0 / e).ln();
        assert!((tv - exact).abs() <= 0.01 * exact, "eps {e}: {tv} vs {exact}");
    }
    assert_eq!(d.order_flag, OrderFlag::OrderOneOnly);
    assert_abs_diff_eq!(d.log_slope, 0.5, epsilon = 5e-3);
}

#[test]
fn bounded_variation_traces_are_order_zero() {
    let eps = [1e-1, 1e-2, 1e-3, 1e-4];
    let cyl = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
    let lv = catalog("line_vortex").unwrap().field;
    let d = trace_order_diagnostic(&lv, &cyl.boundary[0], &eps, 16);
    assert_eq!(d.order_flag, OrderFlag::OrderZero);
    for (e, tv) in eps.iter().zip(&d.total_variation) {
        assert_abs_diff_eq!(*tv, 1.0 - e, epsilon = 1e-6);
    }
    for w in d.total_variation.windows(2) {
        assert!(w[1] >= w[0]);
    }
    let rr = catalog("rigid_rotation").unwrap().field;
    let d = trace_order_diagnostic(&rr, &cyl.boundary[0], &eps, 16);
    assert_eq!(d.order_flag, OrderFlag::OrderZero);
    assert_abs_diff_eq!(d.total_variation[3], 2.0 * PI / 3.0, epsilon = 1e-8);
}
