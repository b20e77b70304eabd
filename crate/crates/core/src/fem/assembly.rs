//! P1 stiffness and mass matrices.
//!
//! On an element with vertices `p₀, p₁, p₂` and area `A`, the hat function
//! gradients are `(bᵢ, cᵢ)/(2A)` with `bᵢ = y_{i+1} − y_{i+2}` and
//! `cᵢ = x_{i+2} − x_{i+1}`. Stiffness is exact with one-point quadrature;
//! the local mass matrix is `A/12 · [[2,1,1],[1,2,1],[1,1,2]]`.

use rayon::prelude::*;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::mesh::Mesh;

/// Elements smaller than this fraction of the domain area are rejected.
pub const DEGENERATE_AREA_FRACTION: f64 = 1e-14;

#[derive(Clone, Debug)]
pub struct FemOperators {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
}

/// `(b, c, area)` for element `e`.
pub(crate) fn element_geometry(mesh: &Mesh, e: usize) -> ([f64; 3], [f64; 3], f64) {
    let [i0, i1, i2] = mesh.elements()[e];
    let p = [mesh.nodes()[i0], mesh.nodes()[i1], mesh.nodes()[i2]];
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    (b, c, mesh.element_area(e))
}

/// Constant gradient of the P1 function with nodal values `u` on element `e`.
pub(crate) fn element_gradient(mesh: &Mesh, e: usize, u: &[f64]) -> (f64, f64) {
    let (b, c, area) = element_geometry(mesh, e);
    let idx = mesh.elements()[e];
    let (mut gx, mut gy) = (0.0, 0.0);
    for k in 0..3 {
        gx += b[k] * u[idx[k]];
        gy += c[k] * u[idx[k]];
    }
    (gx / (2.0 * area), gy / (2.0 * area))
}

pub fn assemble(mesh: &Mesh) -> Result<FemOperators> {
    let total = mesh.area();
    let ne = mesh.elements().len();
    if let Some(e) = (0..ne).find(|&e| !(mesh.element_area(e) > DEGENERATE_AREA_FRACTION * total)) {
        return Err(Error::Mesh(format!(
            "element {e} is degenerate (area {:.3e}, domain area {total:.3e})",
            mesh.element_area(e)
        )));
    }
    let chunk = 4096;
    let (kt, mt): (Vec<_>, Vec<_>) = (0..ne)
        .into_par_iter()
        .chunks(chunk)
        .map(|es| {
            let mut k = Vec::with_capacity(9 * es.len());
            let mut m = Vec::with_capacity(9 * es.len());
            for e in es {
                let (b, c, area) = element_geometry(mesh, e);
                let idx = mesh.elements()[e];
                for i in 0..3 {
                    for j in 0..3 {
                        k.push((idx[i], idx[j], (b[i] * b[j] + c[i] * c[j]) / (4.0 * area)));
                        let w = if i == j { 2.0 } else { 1.0 };
                        m.push((idx[i], idx[j], w * area / 12.0));
                    }
                }
            }
            (k, m)
        })
        .unzip();
    let n = mesh.node_count();
    Ok(FemOperators {
        stiffness: CsrMatrix::from_triplets(n, &kt.concat()),
        mass: CsrMatrix::from_triplets(n, &mt.concat()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{equilateral, triangle, Point};
    use crate::mesh::mesh;

    #[test]
    fn constants_in_kernel() {
        let m = mesh(&triangle(0.3, 0.8).unwrap(), 0).unwrap();
        let ops = assemble(&m).unwrap();
        let k1 = ops.stiffness.mul_vec(&[1.0, 1.0, 1.0]);
        assert!(k1.iter().all(|v| v.abs() < 1e-15));
        let m = mesh(&triangle(0.3, 0.8).unwrap(), 4).unwrap();
        let ops = assemble(&m).unwrap();
        let ones = vec![1.0; m.node_count()];
        assert!(ops.stiffness.mul_vec(&ones).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn mass_sums_to_area() {
        let t = triangle(-0.7, 1.9).unwrap();
        let m = mesh(&t, 3).unwrap();
        let ops = assemble(&m).unwrap();
        let total: f64 = ops.mass.mul_vec(&vec![1.0; m.node_count()]).iter().sum();
        assert!((total - t.area()).abs() < 1e-14);
        assert!(ops.stiffness.is_symmetric(1e-15) && ops.mass.is_symmetric(1e-15));
    }

    #[test]
    fn hand_assembled_level_one_equilateral() {
        // E has side 2; each of the four sub-triangles is equilateral with side 1.
        // Local stiffness: diagonal 1/√3, off-diagonal −1/(2√3). Local mass: (√3/4)/12 · [2 1 1; 1 2 1; 1 1 2].
        let m = mesh(&equilateral(), 1).unwrap();
        let ops = assemble(&m).unwrap();
        let s3 = 3f64.sqrt();
        let a = s3 / 4.0;
        let nodes = m.nodes();
        let find = |x: f64, y: f64| nodes.iter().position(|p| p.distance(Point::new(x, y)) < 1e-12).unwrap();
        let (v0, v1, v2) = (find(-1.0, 0.0), find(1.0, 0.0), find(0.0, s3));
        let (m01, m12, m02) = (find(0.0, 0.0), find(0.5, s3 / 2.0), find(-0.5, s3 / 2.0));
        // incidence: corners touch 1 element, midpoints touch 3
        for &c in &[v0, v1, v2] {
            assert!((ops.stiffness.get(c, c) - 1.0 / s3).abs() < 1e-14);
            assert!((ops.mass.get(c, c) - 2.0 * a / 12.0).abs() < 1e-15);
        }
        for &mid in &[m01, m12, m02] {
            assert!((ops.stiffness.get(mid, mid) - 3.0 / s3).abs() < 1e-14);
            assert!((ops.mass.get(mid, mid) - 6.0 * a / 12.0).abs() < 1e-15);
        }
        // corner-to-adjacent-midpoint: one shared element
        assert!((ops.stiffness.get(v0, m01) + 1.0 / (2.0 * s3)).abs() < 1e-14);
        assert!((ops.mass.get(v0, m01) - a / 12.0).abs() < 1e-15);
        // corner to far corner: no shared element
        assert_eq!(ops.stiffness.get(v0, v1), 0.0);
        // midpoint to midpoint: two shared elements (corner one and center one)
        assert!((ops.stiffness.get(m01, m12) + 2.0 / (2.0 * s3)).abs() < 1e-14);
        assert!((ops.mass.get(m01, m12) - 2.0 * a / 12.0).abs() < 1e-15);
        assert_eq!(ops.stiffness.dim(), 6);
    }

    #[test]
    fn degenerate_element_rejected() {
        let nodes = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(0.5, 0.0),
        ];
        let m = Mesh::from_parts(nodes, vec![[0, 1, 2], [0, 3, 1]], 0).unwrap();
        assert!(matches!(assemble(&m), Err(Error::Mesh(_))));
    }
}
