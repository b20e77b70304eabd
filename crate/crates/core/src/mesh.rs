//! Conforming triangulations.
//!
//! A single triangle refined `level` times by midpoint subdivision is the
//! barycentric lattice with `N = 2^level` intervals per side. Nodes are
//! numbered row by row, which keeps the FEM matrices banded with
//! half-bandwidth `N + 1`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Affine, Point, TriangleDomain};

pub const DEFAULT_MAX_LEVEL: u32 = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    nodes: Vec<Point>,
    elements: Vec<[usize; 3]>,
    level: u32,
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y))
}

/// Nodes of the closed-form lattice count `(2^l + 1)(2^l + 2)/2`.
pub fn uniform_node_count(level: u32) -> usize {
    let n = 1usize << level;
    (n + 1) * (n + 2) / 2
}

impl Mesh {
    /// Builds a mesh from raw parts, reorienting elements counterclockwise.
    pub fn from_parts(nodes: Vec<Point>, elements: Vec<[usize; 3]>, level: u32) -> Result<Self> {
        let mut elements = elements;
        for e in &mut elements {
            if e.iter().any(|&i| i >= nodes.len()) {
                return Err(Error::Mesh(format!("element {e:?} references a missing node")));
            }
            if signed_area(nodes[e[0]], nodes[e[1]], nodes[e[2]]) < 0.0 {
                e.swap(1, 2);
            }
        }
        Ok(Self {
            nodes,
            elements,
            level,
        })
    }

    /// Uniform refinement of `t`, `level` times.
    pub fn uniform(t: &TriangleDomain, level: u32, max_level: u32) -> Result<Self> {
        if level > max_level {
            return Err(Error::Resource(format!(
                "mesh level {level} exceeds the configured maximum {max_level}"
            )));
        }
        let [a, b, c] = t.vertices();
        let n = 1usize << level;
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(uniform_node_count(level));
        // row j holds n - j + 1 nodes
        let mut row_start = Vec::with_capacity(n + 2);
        for j in 0..=n {
            row_start.push(nodes.len());
            for i in 0..=(n - j) {
                let (s, r) = (i as f64 / nf, j as f64 / nf);
                nodes.push(Point::new(
                    a.x + s * (b.x - a.x) + r * (c.x - a.x),
                    a.y + s * (b.y - a.y) + r * (c.y - a.y),
                ));
            }
        }
        let idx = |i: usize, j: usize| row_start[j] + i;
        let mut elements = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..(n - j) {
                elements.push([idx(i, j), idx(i + 1, j), idx(i, j + 1)]);
                if i + 1 < n - j {
                    elements.push([idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                }
            }
        }
        Self::from_parts(nodes, elements, level)
    }

    /// One step of 4-way midpoint subdivision of an arbitrary conforming mesh.
    pub fn refined(&self) -> Mesh {
        let mut nodes = self.nodes.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |p: usize, q: usize, nodes: &mut Vec<Point>| {
            let key = (p.min(q), p.max(q));
            *midpoints.entry(key).or_insert_with(|| {
                let (a, b) = (nodes[p], nodes[q]);
                nodes.push(Point::new(0.5 * (a.x + b.x), 0.5 * (a.y + b.y)));
                nodes.len() - 1
            })
        };
        let mut elements = Vec::with_capacity(4 * self.elements.len());
        for &[p, q, r] in &self.elements {
            let pq = mid(p, q, &mut nodes);
            let qr = mid(q, r, &mut nodes);
            let rp = mid(r, p, &mut nodes);
            elements.extend([[p, pq, rp], [pq, q, qr], [rp, qr, r], [pq, qr, rp]]);
        }
        Mesh {
            nodes,
            elements,
            level: self.level + 1,
        }
    }

    /// Same connectivity, every node mapped by `a`.
    pub fn mapped(&self, a: &Affine) -> Result<Mesh> {
        let nodes = self.nodes.iter().map(|&p| a.apply(p)).collect();
        Mesh::from_parts(nodes, self.elements.clone(), self.level)
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 3]] {
        &self.elements
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_area(&self, e: usize) -> f64 {
        let [p, q, r] = self.elements[e];
        signed_area(self.nodes[p], self.nodes[q], self.nodes[r])
    }

    pub fn area(&self) -> f64 {
        (0..self.elements.len()).map(|e| self.element_area(e)).sum()
    }

    /// Edge → number of incident elements.
    pub fn edge_incidence(&self) -> HashMap<(usize, usize), usize> {
        let mut edges = HashMap::new();
        for &[p, q, r] in &self.elements {
            for (a, b) in [(p, q), (q, r), (r, p)] {
                *edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
            }
        }
        edges
    }

    /// Every edge is shared by one (boundary) or two (interior) elements,
    /// and every element is positively oriented.
    pub fn is_conforming(&self) -> bool {
        self.edge_incidence().values().all(|&c| c == 1 || c == 2)
            && (0..self.elements.len()).all(|e| self.element_area(e) > 0.0)
    }

    /// Plain-text OFF export: header, counts, node coordinates, element triples.
    pub fn to_off(&self) -> String {
        let mut s = String::from("OFF\n");
        let _ = writeln!(s, "{} {} 0", self.nodes.len(), self.elements.len());
        for p in &self.nodes {
            let _ = writeln!(s, "{:.17e} {:.17e} 0", p.x, p.y);
        }
        for e in &self.elements {
            let _ = writeln!(s, "3 {} {} {}", e[0], e[1], e[2]);
        }
        s
    }
}

/// Uniform mesh of `t` at `level` with the default level cap.
pub fn mesh(t: &TriangleDomain, level: u32) -> Result<Mesh> {
    Mesh::uniform(t, level, DEFAULT_MAX_LEVEL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{equilateral, triangle};

    #[test]
    fn counts() {
        let e = equilateral();
        for (level, elems, nodes) in [(0, 1, 3), (1, 4, 6), (5, 1024, 561)] {
            let m = mesh(&e, level).unwrap();
            assert_eq!(m.elements().len(), elems);
            assert_eq!(m.node_count(), nodes);
            assert_eq!(m.node_count(), uniform_node_count(level));
        }
        assert!(matches!(mesh(&e, 10), Err(Error::Resource(_))));
    }

    #[test]
    fn lattice_equals_repeated_subdivision() {
        let t = triangle(0.3, 1.1).unwrap();
        let mut sub = mesh(&t, 0).unwrap();
        for level in 1..=4 {
            sub = sub.refined();
            let lattice = mesh(&t, level).unwrap();
            assert_eq!(sub.node_count(), lattice.node_count());
            let key = |p: &Point| ((p.x * 1e9).round() as i64, (p.y * 1e9).round() as i64);
            let mut a: Vec<_> = sub.nodes().iter().map(key).collect();
            let mut b: Vec<_> = lattice.nodes().iter().map(key).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
            let tri_key = |m: &Mesh, e: &[usize; 3]| {
                let mut k: Vec<_> = e.iter().map(|&i| key(&m.nodes()[i])).collect();
                k.sort();
                k
            };
            let mut ea: Vec<_> = sub.elements().iter().map(|e| tri_key(&sub, e)).collect();
            let mut eb: Vec<_> = lattice.elements().iter().map(|e| tri_key(&lattice, e)).collect();
            ea.sort();
            eb.sort();
            assert_eq!(ea, eb);
        }
    }

    #[test]
    fn conformity_every_level() {
        let t = triangle(-0.4, 0.7).unwrap();
        for level in 0..=6 {
            let m = mesh(&t, level).unwrap();
            assert!(m.is_conforming());
            let n = 1usize << level;
            let boundary = m.edge_incidence().values().filter(|&&c| c == 1).count();
            assert_eq!(boundary, 3 * n);
            assert!((m.area() - t.area()).abs() < 1e-13 * t.area());
        }
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let t = TriangleDomain::new(Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 0.0)).unwrap();
        let m = mesh(&t, 3).unwrap();
        assert!(m.is_conforming());
    }

    #[test]
    fn affine_image_commutes() {
        let t = triangle(0.2, 1.3).unwrap();
        let a = Affine {
            matrix: [[1.5, 0.25], [-0.5, 2.0]],
            offset: [0.125, -3.0],
        };
        let lhs = mesh(&t, 3).unwrap().mapped(&a).unwrap();
        let rhs = mesh(&t.map(&a).unwrap(), 3).unwrap();
        assert_eq!(lhs.elements(), rhs.elements());
        for (p, q) in lhs.nodes().iter().zip(rhs.nodes()) {
            assert!(p.distance(*q) < 1e-13);
        }
    }

    #[test]
    fn off_export() {
        let off = mesh(&equilateral(), 1).unwrap().to_off();
        let mut lines = off.lines();
        assert_eq!(lines.next(), Some("OFF"));
        assert_eq!(lines.next(), Some("6 4 0"));
        assert_eq!(off.lines().filter(|l| l.starts_with("3 ")).count(), 4);
    }
}
