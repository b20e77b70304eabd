//! Compressed sparse rows and a banded Cholesky factorization.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for &(j, v) in row.iter() {
                if last == Some(j) {
                    *values.last_mut().expect("entry exists") += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                    last = Some(j);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `self + alpha * other`; both must share dimension.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, alpha * v)));
        }
        CsrMatrix::from_triplets(self.n, &t)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| self.row(i).all(|(j, v)| (v - self.get(j, i)).abs() <= tol))
    }

    /// Largest `|i − j|` over stored entries under the ordering `perm`
    /// (`perm[new] = old`).
    pub fn bandwidth(&self, perm: Option<&[usize]>) -> usize {
        let mut inv = vec![0; self.n];
        match perm {
            Some(p) => {
                for (new, &old) in p.iter().enumerate() {
                    inv[old] = new;
                }
            }
            None => inv.iter_mut().enumerate().for_each(|(i, v)| *v = i),
        }
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| (i, j)))
            .map(|(i, j)| inv[i].abs_diff(inv[j]))
            .max()
            .unwrap_or(0)
    }

    /// Reverse Cuthill–McKee ordering of the sparsity graph (`perm[new] = old`).
    pub fn reverse_cuthill_mckee(&self) -> Vec<usize> {
        let degree: Vec<usize> = (0..self.n).map(|i| self.row(i).count()).collect();
        let mut visited = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        let mut starts: Vec<usize> = (0..self.n).collect();
        starts.sort_by_key(|&i| degree[i]);
        for s in starts {
            if visited[s] {
                continue;
            }
            visited[s] = true;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                let mut nbrs: Vec<usize> = self.row(v).map(|(j, _)| j).filter(|&j| !visited[j]).collect();
                nbrs.sort_by_key(|&j| degree[j]);
                for j in nbrs {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        order.reverse();
        order
    }
}

/// `L Lᵀ` factorization of a symmetric positive-definite banded matrix.
#[derive(Clone, Debug)]
pub struct BandedCholesky {
    n: usize,
    bw: usize,
    /// row `i` holds `L[i][i-bw..=i]`, left-padded with zeros
    band: Vec<f64>,
    /// `perm[new] = old`
    perm: Option<Vec<usize>>,
}

impl BandedCholesky {
    /// Factors `a`, reordering with reverse Cuthill–McKee when that narrows the band.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let natural = a.bandwidth(None);
        let rcm = a.reverse_cuthill_mckee();
        let reordered = a.bandwidth(Some(&rcm));
        let (perm, bw) = if reordered < natural {
            (Some(rcm), reordered)
        } else {
            (None, natural)
        };
        let n = a.dim();
        let stride = bw + 1;
        let mut inv = vec![0; n];
        match &perm {
            Some(p) => p.iter().enumerate().for_each(|(new, &old)| inv[old] = new),
            None => inv.iter_mut().enumerate().for_each(|(i, v)| *v = i),
        }
        let mut band = vec![0.0; n * stride];
        for old_i in 0..n {
            let i = inv[old_i];
            for (old_j, v) in a.row(old_i) {
                let j = inv[old_j];
                if j <= i {
                    band[i * stride + bw - (i - j)] += v;
                }
            }
        }
        for i in 0..n {
            let jmin = i.saturating_sub(bw);
            for j in jmin..=i {
                let kmin = jmin.max(j.saturating_sub(bw));
                let mut sum = band[i * stride + bw - (i - j)];
                let ri = i * stride + bw - i;
                let rj = j * stride + bw - j;
                for k in kmin..j {
                    sum -= band[ri + k] * band[rj + k];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::Mesh(format!(
                            "matrix is not positive definite (pivot {sum:.3e} at row {i})"
                        )));
                    }
                    band[ri + i] = sum.sqrt();
                } else {
                    band[ri + j] = sum / band[rj + j];
                }
            }
        }
        Ok(Self { n, bw, band, perm })
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, bw, stride) = (self.n, self.bw, self.bw + 1);
        let mut y: Vec<f64> = match &self.perm {
            Some(p) => p.iter().map(|&old| b[old]).collect(),
            None => b.to_vec(),
        };
        for i in 0..n {
            let ri = i * stride + bw - i;
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.band[ri + k] * y[k];
            }
            y[i] = s / self.band[ri + i];
        }
        for i in (0..n).rev() {
            let ri = i * stride + bw - i;
            y[i] /= self.band[ri + i];
            let yi = y[i];
            for k in i.saturating_sub(bw)..i {
                y[k] -= self.band[ri + k] * yi;
            }
        }
        match &self.perm {
            Some(p) => {
                let mut x = vec![0.0; n];
                for (new, &old) in p.iter().enumerate() {
                    x[old] = y[new];
                }
                x
            }
            None => y,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 4.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn duplicates_are_summed() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, 5.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), 5.0);
        assert_eq!(a.get(0, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn cholesky_solves() {
        let a = tridiag(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b = a.mul_vec(&x);
        let f = BandedCholesky::factor(&a).unwrap();
        assert_eq!(f.bandwidth(), 1);
        let y = f.solve(&b);
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn scrambled_order_is_reordered() {
        // a path graph numbered so that neighbors are far apart
        let n = 40;
        let label = |i: usize| (i * 17) % n;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((label(i), label(i), 3.0));
            if i + 1 < n {
                t.push((label(i), label(i + 1), -1.0));
                t.push((label(i + 1), label(i), -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, &t);
        assert!(a.bandwidth(None) > 10);
        let f = BandedCholesky::factor(&a).unwrap();
        assert!(f.bandwidth() <= 2);
        let x: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let y = f.solve(&a.mul_vec(&x));
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_is_rejected() {
        let a = CsrMatrix::from_triplets(2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]);
        assert!(BandedCholesky::factor(&a).is_err());
    }
}
