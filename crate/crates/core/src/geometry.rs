//! Triangle domains and the constructions used on them.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{domain, Result};

/// Relative tolerance for calling two side lengths equal.
pub const ISOSCELES_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A 2×2 linear map plus translation, `p ↦ A p + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub matrix: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl Affine {
    pub fn linear(matrix: [[f64; 2]; 2]) -> Self {
        Self {
            matrix,
            offset: [0.0, 0.0],
        }
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::linear([[c, -s], [s, c]])
    }

    pub fn apply(&self, p: Point) -> Point {
        let a = &self.matrix;
        Point::new(
            a[0][0] * p.x + a[0][1] * p.y + self.offset[0],
            a[1][0] * p.x + a[1][1] * p.y + self.offset[1],
        )
    }

    pub fn determinant(&self) -> f64 {
        self.matrix[0][0] * self.matrix[1][1] - self.matrix[0][1] * self.matrix[1][0]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TriangleDomain {
    vertices: [Point; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TriangleClass {
    Equilateral,
    /// Isosceles with aperture below π/3.
    Subequilateral,
    /// Isosceles with aperture above π/3.
    Superequilateral,
    Scalene,
}

impl TriangleDomain {
    pub fn new(v1: Point, v2: Point, v3: Point) -> Result<Self> {
        let t = Self {
            vertices: [v1, v2, v3],
        };
        let scale = t.diameter();
        if !(scale.is_finite()) || !(t.area() > 1e-14 * scale * scale) {
            return Err(domain(format!(
                "vertices {v1}, {v2}, {v3} are collinear or non-finite"
            )));
        }
        Ok(t)
    }

    pub fn vertices(&self) -> [Point; 3] {
        self.vertices
    }

    /// Signed area, positive for counterclockwise vertex order.
    pub fn signed_area(&self) -> f64 {
        let [a, b, c] = self.vertices;
        0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Side lengths; side `i` is opposite vertex `i`.
    pub fn sides(&self) -> [f64; 3] {
        let [a, b, c] = self.vertices;
        [b.distance(c), c.distance(a), a.distance(b)]
    }

    pub fn diameter(&self) -> f64 {
        let s = self.sides();
        s[0].max(s[1]).max(s[2])
    }

    /// Interior angle at vertex `i`.
    pub fn angle(&self, i: usize) -> f64 {
        let v = self.vertices;
        let (p, q, r) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
        let (ux, uy) = (q.x - p.x, q.y - p.y);
        let (wx, wy) = (r.x - p.x, r.y - p.y);
        (ux * wy - uy * wx).abs().atan2(ux * wx + uy * wy)
    }

    /// Aperture (angle between the equal sides) when isosceles, and the
    /// classification.
    pub fn aperture_and_class(&self) -> (Option<f64>, TriangleClass) {
        let s = self.sides();
        let close = |a: f64, b: f64| (a - b).abs() <= ISOSCELES_TOLERANCE * a.max(b);
        if close(s[0], s[1]) && close(s[1], s[2]) {
            return (Some(PI / 3.0), TriangleClass::Equilateral);
        }
        // the apex is the vertex between the two equal sides, i.e. opposite the odd one
        let apex = if close(s[1], s[2]) {
            0
        } else if close(s[2], s[0]) {
            1
        } else if close(s[0], s[1]) {
            2
        } else {
            return (None, TriangleClass::Scalene);
        };
        let aperture = self.angle(apex);
        let class = if aperture < PI / 3.0 {
            TriangleClass::Subequilateral
        } else {
            TriangleClass::Superequilateral
        };
        (Some(aperture), class)
    }

    pub fn class(&self) -> TriangleClass {
        self.aperture_and_class().1
    }

    pub fn map(&self, a: &Affine) -> Result<TriangleDomain> {
        let [p, q, r] = self.vertices;
        TriangleDomain::new(a.apply(p), a.apply(q), a.apply(r))
    }

    /// `T(a, b)`: vertices `(−1, 0)`, `(1, 0)`, `(a, b)`.
    pub fn t(a: f64, b: f64) -> Result<TriangleDomain> {
        if !(b > 0.0) {
            return Err(domain(format!("T(a, b) needs b > 0, got b = {b}")));
        }
        TriangleDomain::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), Point::new(a, b))
    }

    /// Isosceles triangle with base 2 and apex angle `alpha`: `T(0, cot(α/2))`.
    pub fn isosceles_with_aperture(alpha: f64) -> Result<TriangleDomain> {
        if !(alpha > 0.0 && alpha < PI) {
            return Err(domain(format!("aperture must lie in (0, π), got {alpha}")));
        }
        TriangleDomain::t(0.0, 1.0 / (alpha / 2.0).tan())
    }
}

/// `T(a, b)`.
pub fn triangle(a: f64, b: f64) -> Result<TriangleDomain> {
    TriangleDomain::t(a, b)
}

/// `E = T(0, √3)`, equilateral with side 2.
pub fn equilateral() -> TriangleDomain {
    TriangleDomain::t(0.0, 3f64.sqrt()).expect("valid constant")
}

/// `F₊ = T(1, 2√3)`, a 30-60-90 right triangle.
pub fn right_plus() -> TriangleDomain {
    TriangleDomain::t(1.0, 2.0 * 3f64.sqrt()).expect("valid constant")
}

/// `F₋ = T(−1, 2√3)`.
pub fn right_minus() -> TriangleDomain {
    TriangleDomain::t(-1.0, 2.0 * 3f64.sqrt()).expect("valid constant")
}

pub const G_HEIGHT: f64 = 2.14;

/// `G = T(0, 2.14)`.
pub fn triangle_g() -> TriangleDomain {
    TriangleDomain::t(0.0, G_HEIGHT).expect("valid constant")
}

pub fn diameter(t: &TriangleDomain) -> f64 {
    t.diameter()
}

pub fn aperture_and_class(t: &TriangleDomain) -> (Option<f64>, TriangleClass) {
    t.aperture_and_class()
}

/// The linear map multiplying the component along the unit vector `axis` by `factor`.
pub fn stretch_map(factor: f64, axis: [f64; 2]) -> Result<Affine> {
    let norm = axis[0].hypot(axis[1]);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(domain("stretch axis must be a nonzero direction"));
    }
    let (ax, ay) = (axis[0] / norm, axis[1] / norm);
    let k = factor - 1.0;
    Ok(Affine::linear([
        [1.0 + k * ax * ax, k * ax * ay],
        [k * ax * ay, 1.0 + k * ay * ay],
    ]))
}

/// Stretches `t` by `factor > 1` along `axis`.
pub fn stretch(t: &TriangleDomain, factor: f64, axis: [f64; 2]) -> Result<TriangleDomain> {
    if !(factor > 1.0) {
        return Err(domain(format!("stretch factor must exceed 1, got {factor}")));
    }
    t.map(&stretch_map(factor, axis)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Subequilateralized {
    pub triangle: TriangleDomain,
    /// Factor applied perpendicular to the longest side (1 when nothing moved).
    pub stretch_factor: f64,
    /// The input was equilateral already.
    pub extremal: bool,
}

/// Stretches perpendicular to the longest side until a second side reaches
/// the diameter.
///
/// Inputs whose two longest sides already agree are returned unchanged.
/// Otherwise the result is placed with its longest side on the x-axis,
/// centered at the origin, apex above.
pub fn subequilateralize(t: &TriangleDomain) -> Subequilateralized {
    let s = t.sides();
    let d = t.diameter();
    let close = |a: f64, b: f64| (a - b).abs() <= ISOSCELES_TOLERANCE * a.max(b);
    let at_max: Vec<usize> = (0..3).filter(|&i| close(s[i], d)).collect();
    if at_max.len() == 3 {
        return Subequilateralized {
            triangle: *t,
            stretch_factor: 1.0,
            extremal: true,
        };
    }
    if at_max.len() == 2 {
        return Subequilateralized {
            triangle: *t,
            stretch_factor: 1.0,
            extremal: false,
        };
    }
    let base_side = at_max[0];
    let v = t.vertices();
    let apex = v[base_side];
    let (p, q) = (v[(base_side + 1) % 3], v[(base_side + 2) % 3]);
    let (ux, uy) = ((q.x - p.x) / d, (q.y - p.y) / d);
    let mid = Point::new(0.5 * (p.x + q.x), 0.5 * (p.y + q.y));
    let (rx, ry) = (apex.x - mid.x, apex.y - mid.y);
    // apex in the frame with the longest side along x, centered at its midpoint
    let a = rx * ux + ry * uy;
    let h = (ux * ry - uy * rx).abs();
    let target = (d * d - (a.abs() + 0.5 * d).powi(2)).max(0.0).sqrt();
    let out = TriangleDomain::new(
        Point::new(-0.5 * d, 0.0),
        Point::new(0.5 * d, 0.0),
        Point::new(a, target),
    )
    .expect("stretched triangle keeps positive height");
    Subequilateralized {
        triangle: out,
        stretch_factor: target / h,
        extremal: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn special_triangles() {
        let e = equilateral();
        assert_relative_eq!(e.diameter(), 2.0, max_relative = 1e-15);
        assert_eq!(e.class(), TriangleClass::Equilateral);
        assert_relative_eq!(right_plus().diameter(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(right_plus().angle(1), PI / 2.0, max_relative = 1e-14);
        assert_relative_eq!(right_minus().diameter(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(triangle_g().diameter(), 5.5796f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(triangle_g().diameter(), 2.3621, epsilon = 1e-4);
        assert!(triangle(0.0, 0.0).is_err());
        assert!(triangle(0.0, -1.0).is_err());
    }

    #[test]
    fn classification() {
        let (ap, class) = triangle_g().aperture_and_class();
        assert_eq!(class, TriangleClass::Subequilateral);
        assert_relative_eq!(ap.unwrap(), 2.0 * (1.0 / 2.14f64).atan(), max_relative = 1e-12);
        assert_relative_eq!(ap.unwrap(), 0.8745, epsilon = 1e-3);
        assert_eq!(triangle(0.3, 1.1).unwrap().aperture_and_class(), (None, TriangleClass::Scalene));
        assert_eq!(triangle(0.0, 1.0).unwrap().class(), TriangleClass::Superequilateral);
        let (ap, _) = TriangleDomain::isosceles_with_aperture(1.2).unwrap().aperture_and_class();
        assert_relative_eq!(ap.unwrap(), 1.2, max_relative = 1e-12);
    }

    #[test]
    fn stretching() {
        let e = equilateral();
        let up = stretch(&e, 2.0, [0.0, 1.0]).unwrap();
        assert_eq!(up.vertices()[2], Point::new(0.0, 2.0 * 3f64.sqrt()));
        assert_relative_eq!(up.area(), 2.0 * e.area(), max_relative = 1e-14);
        let near = stretch(&e, 1.0 + 1e-12, [0.0, 1.0]).unwrap();
        assert_relative_eq!(near.vertices()[2].y, e.vertices()[2].y, max_relative = 1e-11);
        assert!(stretch(&e, 1.0, [0.0, 1.0]).is_err());
        let slanted = stretch(&e, 3.0, [1.0, 1.0]).unwrap();
        assert_relative_eq!(slanted.area(), 3.0 * e.area(), max_relative = 1e-13);
    }

    #[test]
    fn subequilateral_reduction() {
        let g = triangle_g();
        let r = subequilateralize(&g);
        assert_eq!(r.triangle, g);
        assert!(!r.extremal);

        let right = TriangleDomain::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        let r = subequilateralize(&right);
        let v = r.triangle.vertices()[2];
        assert_relative_eq!(v.y, 3f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(v.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(r.stretch_factor, 3f64.sqrt(), max_relative = 1e-14);
        assert_eq!(r.triangle.class(), TriangleClass::Equilateral);

        let obtuse = TriangleDomain::new(Point::new(-1.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.2)).unwrap();
        let r = subequilateralize(&obtuse);
        let s = r.triangle.sides();
        let mut sorted = s;
        sorted.sort_by(f64::total_cmp);
        assert_relative_eq!(sorted[2], 2.0, max_relative = 1e-14);
        assert_relative_eq!(sorted[1], 2.0, max_relative = 1e-14);
        assert_relative_eq!(r.triangle.vertices()[2].y, 1.75f64.sqrt(), max_relative = 1e-14);
        assert_eq!(r.triangle.class(), TriangleClass::Subequilateral);

        assert!(subequilateralize(&equilateral()).extremal);
    }

    #[test]
    fn reduction_in_a_rotated_frame() {
        let t = TriangleDomain::new(Point::new(0.3, -0.2), Point::new(2.1, 1.4), Point::new(0.9, 0.2)).unwrap();
        let r = subequilateralize(&t);
        assert_relative_eq!(r.triangle.diameter(), t.diameter(), max_relative = 1e-13);
        assert!(r.stretch_factor > 1.0);
        assert!(matches!(r.triangle.class(), TriangleClass::Subequilateral | TriangleClass::Equilateral));
    }
}
