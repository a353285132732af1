use approx::assert_abs_diff_eq;
use curlflux::fields::catalog::annuli_trace;
use curlflux::fields::*;
use curlflux::geometry::*;
use curlflux::stokes::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::f64::consts::PI;
use std::sync::Arc;

fn disk(z: f64, r: f64) -> (BoundaryManifold, TangentialCollar) {
    let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::new(0.0, 0.0, z), r, Vec3::z()));
    let c = build_tangential_collar(&m).unwrap();
    (m, c)
}

fn trace_of(f: &VectorField) -> impl Fn(&Vec3) -> Vec3 + Sync + '_ {
    move |x: &Vec3| f.eval(x).cross(&Vec3::z())
}

fn one() -> TestFunction {
    TestFunction::constant(1.0)
}

/// `(1 − r²/ρ²)⁴₊`, a polynomial in `r` on its support.
fn radial(rho: f64) -> TestFunction {
    TestFunction::new(
        "radial",
        move |x| (1.0 - x.norm_squared() / (rho * rho)).max(0.0).powi(4),
        move |x| x * (-8.0 * (1.0 - x.norm_squared() / (rho * rho)).max(0.0).powi(3) / (rho * rho)),
    )
}

fn dirac_field(x: &Vec3) -> Vec3 {
    Vec3::new(x.x, x.y, 0.0) / (2.0 * PI * (x.x * x.x + x.y * x.y))
}

/// `π(−1)^{j+1}(2/3 − (3/5) 2^{−j})`.
fn annuli_closed_form(j: i32) -> f64 {
    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
    PI * sign * (2.0 / 3.0 - 0.6 * 0.5f64.powi(j))
}

#[test]
fn rigid_rotation_flux_is_two_pi() {
    let (m, c) = disk(0.0, 1.0);
    let f = catalog("rigid_rotation").unwrap().field;
    let r = stokes_tangential(&trace_of(&f), &c, 0.0, &one(), &StokesOptions::default()).unwrap();
    assert!(r.converged);
    assert_abs_diff_eq!(r.value().unwrap(), 2.0 * PI, epsilon = 1e-8);
    let circ: f64 = m.boundary_nodes(64).iter().map(|n| n.w * f.eval(&n.x).dot(&n.tau)).sum();
    assert_abs_diff_eq!(r.value().unwrap() + circ, 0.0, epsilon = 1e-8);
}

#[test]
fn smooth_fields_match_the_classical_circulation() {
    let (m, c) = disk(0.0, 1.0);
    let fields = [
        catalog("rigid_rotation").unwrap().field,
        VectorField::new("poly", |x| Vec3::new(x.y * x.y, x.x * x.y + 1.0, x.x)),
    ];
    for f in &fields {
        for phi in &harmonics(Vec3::new(0.2, -0.1, 0.0), 1.0) {
            let r = stokes_tangential(&trace_of(f), &c, 0.0, phi, &StokesOptions::default()).unwrap();
            let circ: f64 = m.boundary_nodes(128).iter().map(|n| n.w * phi.eval(&n.x) * f.eval(&n.x).dot(&n.tau)).sum();
            assert!((r.value().unwrap() + circ).abs() <= 1e-6, "{} {}", f.name, phi.name);
        }
    }
}

#[test]
fn annuli_sequence_oscillates_at_zero() {
    let (_, c) = disk(0.0, 1.0);
    let breaks = c.level_breaks(&catalog("annuli").unwrap().breaks);
    let opts = StokesOptions {
        deltas: (1..=10).map(|j| 0.5f64.powi(j)).collect(),
        breaks: breaks.clone(),
        ..StokesOptions::default()
    };
    let r = stokes_tangential(&annuli_trace, &c, 0.0, &one(), &opts).unwrap();
    for (j, (_, v)) in (1..=10).zip(&r.delta_values) {
        assert_abs_diff_eq!(-v, annuli_closed_form(j), epsilon = 1e-6);
    }
    assert_abs_diff_eq!(annuli_closed_form(1), 11.0 * PI / 30.0, epsilon = 1e-14);
    assert_abs_diff_eq!(annuli_closed_form(2), -31.0 * PI / 60.0, epsilon = 1e-14);
    assert!(!r.converged);
    assert_eq!(r.extrapolated, None);
    assert!(r.t_osc >= 4.0 * PI / 3.0 - 0.1, "{}", r.t_osc);
    // The gap π(4/3 − 0.9·2^{−j}) clears 4π/3 − 0.1 from j = 5 on.
    for w in r.values()[4..].windows(2) {
        assert!((w[1] - w[0]).abs() >= 4.0 * PI / 3.0 - 0.1);
    }

    let later = StokesOptions { breaks, ..StokesOptions::default() };
    let r = stokes_tangential(&annuli_trace, &c, 0.3, &one(), &later).unwrap();
    assert!(r.converged, "{r:?}");
    assert!(r.value().unwrap().is_finite());
}

#[test]
fn support_stays_on_the_boundary_curve() {
    let (_, c) = disk(0.0, 1.0);
    let f = catalog("rigid_rotation").unwrap().field;
    let bump = bspline_bump(Vec3::new(0.1, 0.0, 0.0), 0.1);
    let r = stokes_tangential(&trace_of(&f), &c, 0.0, &bump, &StokesOptions::default()).unwrap();
    for (d, v) in &r.delta_values {
        if *d < 0.5 {
            assert_eq!(*v, 0.0);
        }
    }
}

#[test]
fn line_vortex_flux_through_axis_disk() {
    let (_, c) = disk(0.5, 0.5);
    let f = catalog("line_vortex").unwrap().field;
    let v = vorticity_flux(&trace_of(&f), &c, 0.0, &StokesOptions::default()).unwrap();
    assert_abs_diff_eq!(v.flux, 1.0, epsilon = 1e-3);
    assert!(v.cutoff_gap <= 1e-8);
    for t in [0.1, 0.3] {
        let v = vorticity_flux(&trace_of(&f), &c, t, &StokesOptions::default()).unwrap();
        assert_abs_diff_eq!(v.flux, 1.0, epsilon = 1e-3);
    }
}

#[test]
fn curl_free_and_constant_fields_carry_no_flux() {
    let (_, c) = disk(0.5, 0.4);
    let newton = catalog("newtonian").unwrap().field;
    let constant = VectorField::constant(Vec3::new(0.3, -1.0, 2.0));
    for f in [newton, constant] {
        let v = vorticity_flux(&trace_of(&f), &c, 0.1, &StokesOptions::default()).unwrap();
        assert_abs_diff_eq!(v.flux, 0.0, epsilon = 1e-10);
    }
}

#[test]
fn density_matches_minus_f_dot_tau() {
    let (m, c) = disk(0.0, 1.0);
    let r_grid: Vec<f64> = (3..=8).map(|k| 0.5f64.powi(k)).collect();
    let f = catalog("rigid_rotation").unwrap().field;
    let opts = StokesOptions::default();
    for k in 0..8 {
        let a = 2.0 * PI * k as f64 / 8.0 + 0.1;
        let x0 = Vec3::new(a.cos(), a.sin(), 0.0);
        let d = stokes_density(&trace_of(&f), &c, 0.0, &x0, &r_grid, &opts).unwrap();
        let tau = m.boundary[0].tau(a);
        assert!((d.limit.unwrap() + f.eval(&x0).dot(&tau)).abs() <= 1e-2, "{d:?}");
        assert_abs_diff_eq!(d.limit.unwrap(), 1.0, epsilon = 1e-6);
    }
    let x0 = Vec3::new(1.0, 0.0, 0.0);
    let parallel = VectorField::constant(Vec3::new(0.0, -2.0, 0.0));
    let d = stokes_density(&trace_of(&parallel), &c, 0.0, &x0, &r_grid, &opts).unwrap();
    assert_abs_diff_eq!(d.limit.unwrap(), -2.0, epsilon = 1e-3);
    let normal = VectorField::constant(Vec3::new(1.0, 0.0, 0.0));
    let d = stokes_density(&trace_of(&normal), &c, 0.0, &x0, &r_grid, &opts).unwrap();
    assert_abs_diff_eq!(d.limit.unwrap(), 0.0, epsilon = 1e-3);
}

#[test]
fn radial_field_has_dirac_divergence() {
    let (m, _) = disk(0.0, 1.0);
    let div = manifold_div_measure(Arc::new(dirac_field), &m, &DivOptions::default()).unwrap();
    assert_abs_diff_eq!(div.action(&radial(1.0)).unwrap(), 1.0, epsilon = 1e-10);
    // The support edge at r = 0.3 is not a quadrature break.
    assert_abs_diff_eq!(div.action(&radial(0.3)).unwrap(), 1.0, epsilon = 1e-3);
    assert!(div.bounded);
    assert_abs_diff_eq!(div.mass_bound, 1.0, epsilon = 1e-6);

    let rotation =
        manifold_div_measure(Arc::new(|x: &Vec3| Vec3::new(-x.y, x.x, 0.0)), &m, &DivOptions::default()).unwrap();
    for phi in dictionary(&m.patch).iter().take(6) {
        assert!(rotation.action(phi).unwrap().abs() <= 1e-8);
    }
    assert!(rotation.mass_bound <= 1e-8);
}

#[test]
fn annuli_trace_divergence_is_unbounded() {
    let (m, _) = disk(0.0, 1.0);
    let opts = DivOptions { mass_grids: vec![8, 16, 32, 64, 128], ..DivOptions::default() };
    let div = manifold_div_measure(Arc::new(annuli_trace), &m, &opts).unwrap();
    assert!(!div.bounded, "{div:?}");
    for w in div.mass_levels.windows(2) {
        assert!(w[1].1 > w[0].1);
    }
}

#[test]
fn non_tangential_fields_are_rejected() {
    let (m, _) = disk(0.0, 1.0);
    let r = manifold_div_measure(Arc::new(|_: &Vec3| Vec3::new(0.0, 0.1, 1.0)), &m, &DivOptions::default());
    assert!(matches!(r, Err(StokesError::NotTangential { .. })));
}

#[test]
fn gauss_green_on_the_disk() {
    let (m, _) = disk(0.0, 1.0);
    let smooth = manifold_div_measure(
        Arc::new(|x: &Vec3| Vec3::new(x.x * x.x + x.y, x.x * x.y, 0.0)),
        &m,
        &DivOptions::default(),
    )
    .unwrap();
    let phi = TestFunction::new("affine", |x| 1.0 + 0.5 * x.x, |_| Vec3::new(0.5, 0.0, 0.0));
    for p in [one(), phi] {
        let gg = gauss_green_manifold(&smooth, &p).unwrap();
        assert_abs_diff_eq!(gg, smooth.boundary_flux(&p, 128).unwrap(), epsilon = 1e-6);
    }
    let zero = manifold_div_measure(Arc::new(|_: &Vec3| Vec3::zeros()), &m, &DivOptions::default()).unwrap();
    assert_eq!(gauss_green_manifold(&zero, &one()).unwrap(), 0.0);
    let dirac = manifold_div_measure(Arc::new(dirac_field), &m, &DivOptions::default())
        .unwrap()
        .with_atoms(vec![(Vec3::zeros(), 1.0)])
        .with_density(|_| 0.0);
    assert_abs_diff_eq!(gauss_green_manifold(&dirac, &one()).unwrap(), -1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(dirac.boundary_flux(&one(), 64).unwrap(), -1.0, epsilon = 1e-12);
}

fn bottom_face() -> (SolidRegion, BoundaryManifold, TransversalCollar) {
    let region = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
    let collar = build_transversal_collar(&region).unwrap();
    let m = BoundaryManifold::new(region.boundary[0].clone());
    (region, m, collar)
}

#[test]
fn transversal_route_on_shifted_disks() {
    let (_, m, collar) = bottom_face();
    let rule = MeasureRule::default();
    let lv = catalog("line_vortex").unwrap();
    for t in [0.1, 0.25, 0.4] {
        let r = stokes_transversal(&lv.field, &lv.curl, &m, &collar, t, &one(), &rule).unwrap();
        assert_abs_diff_eq!(r.result.value().unwrap(), 1.0, epsilon = 1e-6);
        assert!(r.div_bounded);
        assert!(r.div_mass <= 1.5 * r.maximal_plus, "{r:?}");
    }
    let rr = catalog("rigid_rotation").unwrap();
    let r = stokes_transversal(&rr.field, &rr.curl, &m, &collar, 0.2, &one(), &rule).unwrap();
    assert_abs_diff_eq!(r.result.value().unwrap(), 2.0 * PI, epsilon = 1e-8);
}

#[test]
fn transversal_route_refuses_concentrated_layers() {
    let (_, m, collar) = bottom_face();
    let (pf, mu) = make_vortex_sheet(
        &VectorField::constant(Vec3::x()),
        &VectorField::zero(),
        &SurfacePatch::disk(Vec3::zeros(), 2.0, Vec3::z()),
    )
    .unwrap();
    let f = pf.as_field();
    let rule = MeasureRule::default();
    let r = stokes_transversal(&f, &mu, &m, &collar, 0.0, &one(), &rule);
    assert!(matches!(r, Err(StokesError::InfiniteMaximal { .. })));
    let r = stokes_transversal(&f, &mu, &m, &collar, 0.3, &one(), &rule).unwrap();
    assert_abs_diff_eq!(r.result.value().unwrap(), 0.0, epsilon = 1e-10);
}

#[test]
fn boundary_pairing_masses() {
    let (_, c) = disk(0.0, 1.0);
    let opts = StokesOptions::default();
    for t in [0.0, 0.2, 0.4] {
        let (_, mass) = boundary_pairing_mass(&dirac_field, &c, t, &one(), &opts).unwrap();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
    }
    let g = |x: &Vec3| Vec3::new(x.y * x.y, x.x + 1.0, 0.0);
    let phi = TestFunction::new("x+y", |x| x.x + 2.0 * x.y, |_| Vec3::new(1.0, 2.0, 0.0));
    let t = 0.25;
    let (pairing, _) = boundary_pairing_mass(&g, &c, t, &phi, &opts).unwrap();
    let layer = c.layer(t);
    let direct: f64 =
        layer.iter().flat_map(|cv| cv.nodes(128)).map(|n| n.w * phi.eval(&n.x) * g(&n.x).dot(&n.conormal)).sum();
    assert!((pairing.value().unwrap() - direct).abs() <= 1e-4);
    let (p0, m0) = boundary_pairing_mass(&|_| Vec3::zeros(), &c, t, &phi, &opts).unwrap();
    assert_eq!((p0.value().unwrap(), m0), (0.0, 0.0));
}

#[test]
fn masses_do_not_depend_on_the_representative() {
    let (_, c) = disk(0.0, 1.0);
    let opts = StokesOptions::default();
    let rotated = |x: &Vec3| dirac_field(x) + Vec3::new(-x.y, x.x, 0.0);
    for t in [0.0, 0.1, 0.2, 0.3, 0.45] {
        let d = mass_representative_independence(&dirac_field, &rotated, &c, t, &opts).unwrap();
        assert!(d <= 1e-6, "{t}: {d}");
        assert_eq!(mass_representative_independence(&dirac_field, &dirac_field, &c, t, &opts).unwrap(), 0.0);
    }
    let bad = |x: &Vec3| dirac_field(x) + Vec3::new(x.x, x.y, 0.0);
    let r = mass_representative_independence(&dirac_field, &bad, &c, 0.1, &opts);
    assert!(matches!(r, Err(StokesError::Precondition { .. })));

    let ring = BoundaryManifold::new(SurfacePatch::annulus(Vec3::zeros(), 0.5, 1.0, Vec3::z()));
    let rc = build_tangential_collar(&ring).unwrap();
    let g1 = |x: &Vec3| Vec3::new(x.x * x.y, 1.0, 0.0);
    let harmonic = |x: &Vec3| {
        let r2 = x.x * x.x + x.y * x.y;
        g1(x) + Vec3::new(-x.y, x.x, 0.0) / r2
    };
    let d = mass_representative_independence(&g1, &harmonic, &rc, 0.2, &opts).unwrap();
    assert!(d <= 1e-6, "{d}");
}

#[test]
fn vorticity_flux_by_mass_route() {
    let (region, m, _) = bottom_face();
    let c = build_tangential_collar(&m).unwrap();
    let opts = StokesOptions::default();
    let rule = MeasureRule::default();
    let lv = catalog("line_vortex").unwrap();
    let r = vorticity_flux_cm1(&lv.curl, &region, &dirac_field, &c, 0.2, &opts, &rule).unwrap();
    assert_abs_diff_eq!(r.flux, 1.0, epsilon = 1e-8);
    assert!(r.precondition_residual <= 1e-4);
    assert_abs_diff_eq!(r.cross_check, 1.0, epsilon = 1e-6);

    // Mismatched representative.
    let wrong = |x: &Vec3| dirac_field(x) * 2.0;
    let e = vorticity_flux_cm1(&lv.curl, &region, &wrong, &c, 0.2, &opts, &rule);
    assert!(matches!(e, Err(StokesError::Precondition { .. })));

    let half = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let face = BoundaryManifold::new(half.boundary[0].clone());
    let fc = build_tangential_collar(&face).unwrap();
    let rr = catalog("rigid_rotation").unwrap();
    let nu = half.boundary[0].normal(0.5, 0.0);
    let g = |x: &Vec3| rr.field.eval(x).cross(&nu);
    let r = vorticity_flux_cm1(&rr.curl, &half, &g, &fc, 0.0, &opts, &rule).unwrap();
    assert_abs_diff_eq!(r.flux, 2.0 * PI, epsilon = 1e-6);

    let newton = catalog("newtonian").unwrap().field;
    let (_, face_c) = disk(0.0, 1.0);
    let g = |x: &Vec3| newton.eval(x).cross(&Vec3::z());
    let (_, mass) = boundary_pairing_mass(&g, &face_c, 0.1, &one(), &opts).unwrap();
    assert!(mass.abs() <= 1e-6);
}

#[test]
fn normal_trace_of_curl_measures() {
    let rule = MeasureRule::default();
    let half = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let rr = catalog("rigid_rotation").unwrap();
    assert_eq!(normal_trace_ext(&rr.curl, &half, &one(), &rule).unwrap(), 0.0);
    let cyl = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
    let lv = catalog("line_vortex").unwrap();
    let ramp = TestFunction::new("ramp", |x| 1.0 - 0.5 * x.z, |_| Vec3::new(0.0, 0.0, -0.5));
    assert_abs_diff_eq!(normal_trace_ext(&lv.curl, &cyl, &ramp, &rule).unwrap(), 0.5, epsilon = 1e-12);
    assert_eq!(normal_trace_ext(&CurlMeasure::zero(), &cyl, &ramp, &rule).unwrap(), 0.0);
}

#[test]
fn appendix_identities_for_smooth_fields() {
    let half = SolidRegion::half_ball(Vec3::zeros(), 1.0);
    let rr = catalog("rigid_rotation").unwrap().field;
    let g = VectorField::new("g", |x| Vec3::new(x.y * x.z, x.x * x.x, x.x + x.z))
        .with_curl(|x| Vec3::new(0.0, x.y - 1.0, 2.0 * x.x - x.z));
    let phi = TestFunction::new("phi", |x| 1.0 + x.x * x.y - x.z, |x| Vec3::new(x.y, x.x, -1.0));
    let rep = smooth_validators(&rr, &half, &phi, &g, 24).unwrap();
    assert!(rep.max() <= 1e-8, "{rep:?}");

    let constant = VectorField::constant(Vec3::new(1.0, 2.0, 3.0));
    let rep = smooth_validators(&constant, &half, &phi, &g, 24).unwrap();
    assert!(rep.d1 <= 1e-12);

    let grad = VectorField::new("grad", |x| Vec3::new(x.y * x.z, x.x * x.z, x.x * x.y)).with_curl(|_| Vec3::zeros());
    let cyl = SolidRegion::cylinder(Vec3::zeros(), 1.0, 1.0);
    let rep = smooth_validators(&grad, &cyl, &phi, &g, 24).unwrap();
    assert!(rep.d4 <= 1e-8, "{rep:?}");
}

fn rect_face() -> BoundaryManifold {
    BoundaryManifold::new(SurfacePatch::rect(
        Vec3::new(-0.3, -0.5, 0.2),
        Vec3::new(2.0, 0.0, 0.0),
        Vec3::new(0.0, 1.0, 0.0),
    ))
}

#[test]
fn faraday_plane_wave() {
    let w = PlaneWave { k: 2.0 };
    for t in [0.0, 0.4, 1.3] {
        let c = faraday_face_check(&w.electric(t), &w.magnetic_rate(t), &rect_face(), 24).unwrap();
        assert!(c.residual <= 1e-8, "{c:?}");
    }
    let stat = faraday_face_check(&VectorField::constant(Vec3::x()), &VectorField::zero(), &rect_face(), 16).unwrap();
    assert!(stat.residual <= 1e-14);
}

#[test]
fn faraday_randomized_consistent_pairs() {
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..5 {
        let modes: Vec<(Vec3, f64, f64)> = (0..3)
            .map(|_| {
                let k =
                    Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                (k, rng.random_range(-1.0..1.0), rng.random_range(0.0..2.0 * PI))
            })
            .collect();
        let m1 = modes.clone();
        let m2 = modes.clone();
        let e = VectorField::new("e", move |x| {
            let mut out = Vec3::zeros();
            for (j, (k, a, p)) in m1.iter().enumerate() {
                out[j] = a * (k.dot(x) + p).sin();
            }
            out
        });
        let curl = move |x: &Vec3| {
            let mut jac = [[0.0; 3]; 3];
            for (j, (k, a, p)) in m2.iter().enumerate() {
                for l in 0..3 {
                    jac[j][l] = a * k[l] * (k.dot(x) + p).cos();
                }
            }
            Vec3::new(jac[2][1] - jac[1][2], jac[0][2] - jac[2][0], jac[1][0] - jac[0][1])
        };
        let dh = VectorField::new("dh", move |x| -curl(x));
        let c = faraday_face_check(&e, &dh, &rect_face(), 24).unwrap();
        assert!(c.residual <= 1e-6, "{c:?}");
    }
}

#[test]
fn rankine_hugoniot_residuals() {
    let face = SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z());
    let (pf, _) =
        make_vortex_sheet(&VectorField::constant(Vec3::x()), &VectorField::constant(-Vec3::x()), &face).unwrap();
    let rh = rankine_hugoniot_check(&pf, &|x| pf.jump_density(x), 8);
    assert_eq!(rh.normal, 0.0);
    assert!(rh.tangential <= 1e-10);

    let smooth = catalog("rigid_rotation").unwrap().field;
    let (pf, _) = make_vortex_sheet(&smooth, &smooth, &face).unwrap();
    let rh = rankine_hugoniot_check(&pf, &|_| Vec3::zeros(), 8);
    assert!(rh.normal <= 1e-12 && rh.tangential <= 1e-5);

    let eps = 0.03;
    let (pf, _) =
        make_vortex_sheet(&VectorField::constant(Vec3::new(1.0, 0.0, eps)), &VectorField::zero(), &face).unwrap();
    let rh = rankine_hugoniot_check(&pf, &|x| pf.jump_density(x), 8);
    assert_abs_diff_eq!(rh.normal, eps, epsilon = 1e-14);
}
