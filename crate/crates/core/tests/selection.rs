use approx::assert_abs_diff_eq;
use curlflux::fields::catalog::annuli_trace;
use curlflux::fields::*;
use curlflux::geometry::*;
use curlflux::selection::*;
use std::f64::consts::PI;

fn bottom_disk() -> (SolidRegion, BoundaryManifold, TransversalCollar) {
    let region = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
    let collar = build_transversal_collar(&region).unwrap();
    let m = BoundaryManifold::new(region.boundary[0].clone());
    (region, m, collar)
}

fn flat_sheet() -> CurlMeasure {
    CurlMeasure::zero().sheet(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()), |_| Vec3::y())
}

#[test]
fn line_vortex_transversal_maximal_function() {
    let (_, m, collar) = bottom_disk();
    let mu = catalog("line_vortex").unwrap().curl;
    let t = [-0.3, -0.1, 0.0, 0.2, 0.4];
    let scan = maximal_transversal(&mu, &m, &collar, &t, &default_eps_grid(), &MeasureRule::default()).unwrap();
    for i in 0..t.len() {
        assert_abs_diff_eq!(scan.values[i], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scan.plus[i], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(scan.minus[i], 1.0, epsilon = 1e-12);
    }
    assert_abs_diff_eq!(scan.collar_mass, 1.0, epsilon = 1e-12);
}

#[test]
fn concentrated_sheet_is_flagged() {
    let (_, m, collar) = bottom_disk();
    let mu = flat_sheet();
    let rule = MeasureRule::default();
    let scan = maximal_transversal(&mu, &m, &collar, &[0.0, 0.3], &default_eps_grid(), &rule).unwrap();
    assert_eq!(scan.values[0], f64::INFINITY);
    assert!(scan.values[1].is_finite());
    assert_abs_diff_eq!(single_layer_mass(&mu, &m, &collar, 0.0, &rule).unwrap(), PI, epsilon = 1e-10);
    assert_eq!(single_layer_mass(&mu, &m, &collar, 0.3, &rule).unwrap(), 0.0);
}

#[test]
fn zero_measure_scans_to_zero() {
    let (_, m, collar) = bottom_disk();
    let grid = uniform_t_grid(9);
    let scan =
        maximal_transversal(&CurlMeasure::zero(), &m, &collar, &grid, &default_eps_grid(), &MeasureRule::default())
            .unwrap();
    assert!(scan.values.iter().all(|v| *v == 0.0));
    let rep = good_set_scan(&scan, 0.5).unwrap();
    assert!(rep.bad.is_empty() && rep.holds);
}

#[test]
fn one_sided_values_are_dominated() {
    let (_, m, collar) = bottom_disk();
    let mu = catalog("line_vortex").unwrap().curl;
    let mut mu = mu;
    mu.sheets = flat_sheet().sheets;
    let scan = maximal_transversal(&mu, &m, &collar, &uniform_t_grid(11), &default_eps_grid(), &MeasureRule::default())
        .unwrap();
    for i in 0..scan.t_grid.len() {
        assert!(scan.plus[i] <= scan.values[i] && scan.minus[i] <= scan.values[i]);
        assert!(scan.values[i] >= 0.0);
    }
}

#[test]
fn good_sets_and_weak_type_bound() {
    let (_, m, collar) = bottom_disk();
    let lv = catalog("line_vortex").unwrap().curl;
    let grid = uniform_t_grid(11);
    let scan = maximal_transversal(&lv, &m, &collar, &grid, &default_eps_grid(), &MeasureRule::default()).unwrap();
    let rep = good_set_scan(&scan, 3.0).unwrap();
    assert!(rep.bad.is_empty());
    assert_eq!(rep.good.len(), 11);

    let sheet =
        maximal_transversal(&flat_sheet(), &m, &collar, &grid, &default_eps_grid(), &MeasureRule::default()).unwrap();
    for k in -4..=4 {
        let lambda = 2f64.powi(k);
        let rep = good_set_scan(&sheet, lambda).unwrap();
        assert!(rep.bad.contains(&0.0));
        assert!(rep.holds, "{rep:?}");
    }
    assert!(matches!(
        good_set_scan(&MaximalScan { t_grid: vec![0.0, 0.1, 0.3], values: vec![0.0; 3], ..sheet }, 1.0),
        Err(SelectionError::NonUniformGrid)
    ));
}

#[test]
fn tangential_maximal_function_on_disk() {
    let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()));
    let collar = build_tangential_collar(&m).unwrap();
    let t = [0.25, 0.3, 0.4];
    let scan = maximal_tangential(&|_| 1.0, &collar, &t, &default_eps_grid(), &[], 8).unwrap();
    for (i, &ti) in t.iter().enumerate() {
        assert_abs_diff_eq!(scan.values[i], 4.0 * PI * (1.0 - ti), epsilon = 1e-10);
    }
    let zero = maximal_tangential(&|_| 0.0, &collar, &t, &default_eps_grid(), &[], 8).unwrap();
    assert!(zero.values.iter().all(|v| *v == 0.0));
}

#[test]
fn annuli_trace_has_finite_tangential_maximal_function() {
    let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()));
    let collar = build_tangential_collar(&m).unwrap();
    let breaks = collar.level_breaks(&catalog("annuli").unwrap().breaks);
    let g = |x: &Vec3| annuli_trace(x).norm();
    let scan = maximal_tangential(&g, &collar, &[0.0], &default_eps_grid(), &breaks, 8).unwrap();
    assert!(scan.values[0].is_finite());
    assert!(scan.values[0] <= 4.0 * PI + 1e-9);
}
