use approx::assert_relative_eq;
use curlflux::geometry::*;
use std::f64::consts::PI;

#[test]
fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
    let g = GaussLegendre::new(6);
    for k in 0..12 {
        let exact = (1.0f64.powi(k + 1) - (-0.5f64).powi(k + 1)) / (k + 1) as f64;
        assert_relative_eq!(g.integrate(-0.5, 1.0, |x| x.powi(k)), exact, epsilon = 1e-14);
    }
}

#[test]
fn areas_and_lengths_of_standard_patches() {
    let z = Vec3::z();
    let c = Vec3::new(0.3, -0.2, 1.0);
    assert_relative_eq!(SurfacePatch::disk(c, 0.7, z).area(16), PI * 0.49, epsilon = 1e-12);
    assert_relative_eq!(SurfacePatch::annulus(c, 0.5, 1.0, z).area(16), PI * 0.75, epsilon = 1e-12);
    assert_relative_eq!(SurfacePatch::sphere(c, 2.0, false).area(24), 16.0 * PI, epsilon = 1e-10);
    assert_relative_eq!(SurfacePatch::tube(c, 0.5, z, 3.0, false).area(16), 3.0 * PI, epsilon = 1e-12);
    let m = BoundaryManifold::new(SurfacePatch::annulus(c, 0.5, 1.0, Vec3::new(1.0, 1.0, 0.0)));
    assert_eq!(m.boundary.len(), 2);
    assert_relative_eq!(m.boundary_length(32), 3.0 * PI, epsilon = 1e-12);
    assert!(BoundaryManifold::new(SurfacePatch::sphere(c, 1.0, true)).is_closed());
}

#[test]
fn volumes_of_solid_regions() {
    let o = Vec3::zeros();
    assert_relative_eq!(SolidRegion::ball(o, 1.5).volume(16), 4.5 * PI, epsilon = 1e-9);
    assert_relative_eq!(SolidRegion::half_ball(o, 1.0).volume(16), 2.0 * PI / 3.0, epsilon = 1e-9);
    assert_relative_eq!(SolidRegion::cylinder(o, 0.5, 2.0).volume(16), 0.5 * PI, epsilon = 1e-9);
    assert_relative_eq!(SolidRegion::cuboid(o, Vec3::new(1.0, 2.0, 3.0)).volume(8), 6.0, epsilon = 1e-12);
}

#[test]
fn classical_stokes_on_a_tilted_disk() {
    // F = a × x / 2 has curl a.
    let a = Vec3::new(0.4, -1.0, 2.0);
    let normal = Vec3::new(1.0, 2.0, 2.0).normalize();
    let patch = SurfacePatch::disk(Vec3::new(0.1, 0.2, 0.3), 0.8, normal);
    let m = BoundaryManifold::new(patch.clone());
    let circulation: f64 = m.boundary_nodes(64).iter().map(|n| n.w * (a.cross(&n.x) / 2.0).dot(&n.tau)).sum();
    let flux = surface_integral(&patch, &|_| a.dot(&normal), &patch.rule(16)).unwrap();
    let oriented = patch.normal(0.5, 0.5).dot(&normal).signum();
    assert_relative_eq!(-circulation, oriented * flux, epsilon = 1e-12);
}

#[test]
fn boundary_frames_are_orthonormal() {
    let patch = SurfacePatch::cap(Vec3::zeros(), 1.0, Vec3::z(), 1.0, false);
    for c in &BoundaryManifold::new(patch).boundary {
        for n in c.nodes(8) {
            assert_relative_eq!(n.tau.norm(), 1.0, epsilon = 1e-12);
            assert_relative_eq!(n.normal.norm(), 1.0, epsilon = 1e-12);
            assert!(n.tau.dot(&n.normal).abs() < 1e-12);
            assert!(n.conormal.dot(&n.normal).abs() < 1e-12);
            assert!(n.conormal.dot(&n.tau).abs() < 1e-12);
        }
    }
}

#[test]
fn height_function_ramps_across_the_collar() {
    let m = BoundaryManifold::new(SurfacePatch::disk(Vec3::zeros(), 1.0, Vec3::z()));
    let collar = build_tangential_collar(&m).unwrap();
    let h = height_function(&collar, 0.1, 0.2).unwrap();
    let d = m.patch.domain();
    let mut seen = (false, false, false);
    for i in 0..=50 {
        let u = d.u.0 + (d.u.1 - d.u.0) * i as f64 / 50.0;
        let v = h.value(u, 0.3);
        assert!((0.0..=1.0).contains(&v));
        seen.0 |= v == 0.0;
        seen.1 |= v > 0.0 && v < 1.0;
        seen.2 |= v == 1.0;
    }
    assert_eq!(seen, (true, true, true));
    assert!(h.lipschitz_constant().is_finite());
    assert!(height_function(&collar, 0.6, 0.1).is_err());
    assert!(height_function(&collar, 0.3, 0.8).is_err());
}
