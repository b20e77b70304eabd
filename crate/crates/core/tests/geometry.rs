use std::f64::consts::PI;

use approx::assert_relative_eq;
use trispec::geometry::*;
use trispec::mesh::{mesh, uniform_node_count};
use trispec::Error;

const S3: f64 = 1.732_050_807_568_877_2;

#[test]
fn named_triangles() {
    let e = equilateral();
    assert_relative_eq!(e.sides()[0], 2.0, epsilon = 1e-15);
    assert_eq!(e.class(), TriangleClass::Equilateral);
    let f = right_plus();
    let right = (0..3).map(|i| f.angle(i)).any(|a| (a - PI / 2.0).abs() < 1e-12);
    assert!(right);
    assert_relative_eq!(f.diameter(), 4.0, epsilon = 1e-14);
    assert_relative_eq!(right_minus().diameter(), 4.0, epsilon = 1e-14);
    assert_relative_eq!(diameter(&e), 2.0, epsilon = 1e-15);
    assert_relative_eq!(diameter(&triangle_g()), 5.5796f64.sqrt(), epsilon = 1e-12);
    assert!(matches!(triangle(0.0, 0.0), Err(Error::Domain(_))));
    assert!(matches!(triangle(0.0, -1.0), Err(Error::Domain(_))));
    assert!(TriangleDomain::new(Point::new(0.0, 0.0), Point::new(1.0, 1.0), Point::new(2.0, 2.0)).is_err());
}

#[test]
fn apertures() {
    let (a, c) = aperture_and_class(&equilateral());
    assert_relative_eq!(a.unwrap(), PI / 3.0, epsilon = 1e-12);
    assert_eq!(c, TriangleClass::Equilateral);
    let (a, c) = aperture_and_class(&triangle_g());
    assert_relative_eq!(a.unwrap(), 2.0 * (1.0f64 / 2.14).atan(), epsilon = 1e-12);
    assert!((a.unwrap() - 0.8745).abs() < 1e-3);
    assert_eq!(c, TriangleClass::Subequilateral);
    let (a, c) = aperture_and_class(&triangle(0.3, 1.1).unwrap());
    assert!(a.is_none());
    assert_eq!(c, TriangleClass::Scalene);
    assert_eq!(triangle(0.0, 1.0).unwrap().class(), TriangleClass::Superequilateral);
}

#[test]
fn stretching() {
    let e = equilateral();
    let s = stretch(&e, 2.0, [0.0, 1.0]).unwrap();
    let want = triangle(0.0, 2.0 * S3).unwrap();
    for (p, q) in s.vertices().iter().zip(want.vertices()) {
        assert!(p.distance(q) < 1e-14);
    }
    let t = triangle(0.4, 0.9).unwrap();
    assert_relative_eq!(stretch(&t, 2.0, [0.6, 0.8]).unwrap().area(), 2.0 * t.area(), max_relative = 1e-14);
    let near = stretch(&e, 1.0 + 1e-12, [0.0, 1.0]).unwrap();
    for (p, q) in near.vertices().iter().zip(e.vertices()) {
        assert!(p.distance(q) < 1e-11);
    }
    assert!(matches!(stretch(&e, 1.0, [0.0, 1.0]), Err(Error::Domain(_))));
    assert!(stretch(&e, 2.0, [0.0, 0.0]).is_err());
}

#[test]
fn diameter_grows_only_after_slant_sides_reach_base() {
    // T(0, b) stretched vertically: diameter 2 while the slant side stays ≤ 2
    let b = 0.5;
    for f in [1.5, 2.0, 3.0, 3.4, 4.0, 8.0] {
        let s = stretch(&triangle(0.0, b).unwrap(), f, [0.0, 1.0]).unwrap();
        let slant = (1.0 + (b * f) * (b * f)).sqrt();
        assert_relative_eq!(s.diameter(), slant.max(2.0), max_relative = 1e-14);
        assert!(s.diameter() >= 2.0);
    }
}

#[test]
fn subequilateralization() {
    let g = triangle_g();
    let r = subequilateralize(&g);
    assert_eq!(r.stretch_factor, 1.0);
    assert!(!r.extremal);
    assert_relative_eq!(r.triangle.diameter(), g.diameter(), max_relative = 1e-14);

    let right = TriangleDomain::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)).unwrap();
    let r = subequilateralize(&right);
    assert_eq!(r.triangle.class(), TriangleClass::Equilateral);
    assert_relative_eq!(r.stretch_factor, S3, max_relative = 1e-14);

    let obtuse = TriangleDomain::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.2)).unwrap();
    let r = subequilateralize(&obtuse);
    let mut s = r.triangle.sides();
    s.sort_by(f64::total_cmp);
    assert_relative_eq!(s[1], 2.0, max_relative = 1e-13);
    assert_relative_eq!(s[2], 2.0, max_relative = 1e-13);
    assert_relative_eq!(r.triangle.diameter(), obtuse.diameter(), max_relative = 1e-14);

    assert!(subequilateralize(&equilateral()).extremal);
}

#[test]
fn mesh_examples() {
    let e = equilateral();
    for (level, elems, nodes) in [(0, 1, 3), (1, 4, 6), (5, 1024, 561)] {
        let m = mesh(&e, level).unwrap();
        assert_eq!((m.elements().len(), m.node_count()), (elems, nodes));
        assert!(m.is_conforming());
    }
    assert_eq!(uniform_node_count(9), 513 * 514 / 2);
    assert!(matches!(mesh(&e, 10), Err(Error::Resource(_))));
}
