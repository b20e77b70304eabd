//! Generalized symmetric eigensolvers for `K x = μ M x`.
//!
//! Small systems go through a dense reduction. Large ones use a block
//! Krylov space of the shift-inverted operator `(K + sM)⁻¹M`, kept
//! M-orthonormal with two passes of classical Gram–Schmidt, followed by
//! Rayleigh–Ritz on `K`. The constant mode is deflated analytically.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::assembly::FemOperators;
use super::sparse::{BandedCholesky, CsrMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Systems with at most this many unknowns are solved densely.
    pub dense_limit: usize,
    /// Required `‖Kx − μMx‖ / (μ‖Mx‖)` for each returned pair.
    pub tolerance: f64,
    pub block_size: usize,
    pub max_basis: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_limit: 300,
            tolerance: 1e-9,
            block_size: 4,
            max_basis: 800,
            seed: 0x5EED,
        }
    }
}

/// Eigenpairs in ascending order; `vectors[k]` is M-normalized.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Relative residual `‖Kx − μMx‖ / (max(μ, floor)·‖Mx‖)`.
fn relative_residual(ops: &FemOperators, x: &[f64], mu: f64, floor: f64) -> f64 {
    let kx = ops.stiffness.mul_vec(x);
    let mx = ops.mass.mul_vec(x);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(k, m)| k - mu * m).collect();
    norm(&r) / (mu.max(floor) * norm(&mx))
}

/// The `count` lowest eigenpairs, constant mode included.
pub fn solve(ops: &FemOperators, count: usize, shift: f64, opts: &SolverOptions) -> Result<EigenPairs> {
    let n = ops.stiffness.dim();
    if count + 2 > n {
        return Err(Error::Range {
            requested: count,
            available: n.saturating_sub(2),
        });
    }
    if n <= opts.dense_limit {
        dense(ops, count, shift)
    } else {
        krylov(ops, count, shift, opts)
    }
}

pub fn dense(ops: &FemOperators, count: usize, shift: f64) -> Result<EigenPairs> {
    let k = ops.stiffness.to_dense();
    let m = ops.mass.to_dense();
    let l = m
        .cholesky()
        .ok_or_else(|| Error::Mesh("mass matrix is not positive definite".into()))?
        .l();
    let x = l
        .solve_lower_triangular(&k)
        .ok_or_else(|| Error::Mesh("singular mass factor".into()))?;
    let a = l
        .solve_lower_triangular(&x.transpose())
        .ok_or_else(|| Error::Mesh("singular mass factor".into()))?;
    let a = (&a + a.transpose()) * 0.5;
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lt = l.transpose();
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    let mut residuals = Vec::with_capacity(count);
    for (rank, &i) in order.iter().take(count).enumerate() {
        let y: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let v = lt
            .solve_upper_triangular(&y)
            .ok_or_else(|| Error::Mesh("singular mass factor".into()))?;
        let mut v: Vec<f64> = v.iter().copied().collect();
        let mu = if rank == 0 { 0.0 } else { eig.eigenvalues[i].max(0.0) };
        let mnorm = dot(&v, &ops.mass.mul_vec(&v)).sqrt();
        v.iter_mut().for_each(|c| *c /= mnorm);
        residuals.push(relative_residual(ops, &v, mu, shift));
        values.push(mu);
        vectors.push(v);
    }
    fix_constant_mode(ops, &mut vectors[0]);
    residuals[0] = relative_residual(ops, &vectors[0], 0.0, shift);
    Ok(EigenPairs {
        values,
        vectors,
        residuals,
    })
}

/// Replaces the first vector with the exact M-normalized constant.
fn fix_constant_mode(ops: &FemOperators, v: &mut [f64]) {
    let ones = vec![1.0; v.len()];
    let area: f64 = ops.mass.mul_vec(&ones).iter().sum();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let c = sign / area.sqrt();
    v.iter_mut().for_each(|x| *x = c);
}

struct Basis<'a> {
    mass: &'a CsrMatrix,
    stiffness: &'a CsrMatrix,
    deflate: Vec<f64>,
    deflate_m: Vec<f64>,
    v: Vec<Vec<f64>>,
    mv: Vec<Vec<f64>>,
    kv: Vec<Vec<f64>>,
}

impl Basis<'_> {
    /// M-orthogonalizes `w` against the constant and the basis, twice.
    /// Returns false when `w` is numerically dependent.
    fn push(&mut self, mut w: Vec<f64>) -> bool {
        let start = dot(&w, &self.mass.mul_vec(&w)).sqrt();
        if !(start > 0.0) {
            return false;
        }
        for _ in 0..2 {
            let c = dot(&self.deflate_m, &w);
            axpy(-c, &self.deflate, &mut w);
            let coeffs: Vec<f64> = self.mv.iter().map(|mv| dot(mv, &w)).collect();
            for (c, v) in coeffs.iter().zip(&self.v) {
                axpy(-c, v, &mut w);
            }
        }
        let mw = self.mass.mul_vec(&w);
        let nrm = dot(&w, &mw).sqrt();
        if !(nrm > 1e-10 * start) {
            return false;
        }
        let inv = 1.0 / nrm;
        w.iter_mut().for_each(|x| *x *= inv);
        let mw: Vec<f64> = mw.into_iter().map(|x| x * inv).collect();
        self.kv.push(self.stiffness.mul_vec(&w));
        self.mv.push(mw);
        self.v.push(w);
        true
    }
}

pub fn krylov(ops: &FemOperators, count: usize, shift: f64, opts: &SolverOptions) -> Result<EigenPairs> {
    let n = ops.stiffness.dim();
    let nev = count - 1;
    let ones = vec![1.0; n];
    let area: f64 = ops.mass.mul_vec(&ones).iter().sum();
    let deflate: Vec<f64> = ones.iter().map(|_| 1.0 / area.sqrt()).collect();
    let deflate_m = ops.mass.mul_vec(&deflate);
    let mut values = vec![0.0];
    let mut vectors = vec![deflate.clone()];
    let mut residuals = vec![relative_residual(ops, &deflate, 0.0, shift)];
    if nev == 0 {
        return Ok(EigenPairs {
            values,
            vectors,
            residuals,
        });
    }
    let factor = BandedCholesky::factor(&ops.stiffness.add_scaled(&ops.mass, shift))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis = Basis {
        mass: &ops.mass,
        stiffness: &ops.stiffness,
        deflate,
        deflate_m,
        v: Vec::new(),
        mv: Vec::new(),
        kv: Vec::new(),
    };
    let p = opts.block_size.max(1);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let mut worst = f64::INFINITY;
    loop {
        let mut last = Vec::with_capacity(p);
        for w in block.drain(..) {
            let mut w = w;
            let mut tries = 0;
            while !basis.push(w) {
                tries += 1;
                if tries > 3 {
                    break;
                }
                w = factor.solve(&ops.mass.mul_vec(
                    &(0..n).map(|_| rng.random::<f64>() - 0.5).collect::<Vec<_>>(),
                ));
            }
            if tries <= 3 {
                last.push(basis.v.len() - 1);
            }
        }
        let m = basis.v.len();
        if m >= nev + p {
            let h = DMatrix::from_fn(m, m, |i, j| 0.5 * (dot(&basis.v[i], &basis.kv[j]) + dot(&basis.v[j], &basis.kv[i])));
            let eig = SymmetricEigen::new(h);
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
            let mut cand_vals = Vec::with_capacity(nev);
            let mut cand_vecs = Vec::with_capacity(nev);
            let mut cand_res = Vec::with_capacity(nev);
            worst = 0.0f64;
            for &i in order.iter().take(nev) {
                let theta = eig.eigenvalues[i].max(0.0);
                let mut x = vec![0.0; n];
                let mut kx = vec![0.0; n];
                let mut mx = vec![0.0; n];
                for (k, &c) in eig.eigenvectors.column(i).iter().enumerate() {
                    axpy(c, &basis.v[k], &mut x);
                    axpy(c, &basis.kv[k], &mut kx);
                    axpy(c, &basis.mv[k], &mut mx);
                }
                let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - theta * b).collect();
                let res = norm(&r) / (theta.max(shift) * norm(&mx));
                worst = worst.max(res);
                cand_vals.push(theta);
                cand_vecs.push(x);
                cand_res.push(res);
            }
            if worst <= opts.tolerance {
                values.extend(cand_vals);
                vectors.extend(cand_vecs);
                residuals.extend(cand_res);
                log::debug!("krylov: n={n} basis={m} worst residual {worst:.2e}");
                return Ok(EigenPairs {
                    values,
                    vectors,
                    residuals,
                });
            }
        }
        if last.is_empty() || m + p > opts.max_basis {
            return Err(Error::Solver {
                iterations: m / p,
                basis_dim: m,
                worst_residual: worst,
            });
        }
        block = last
            .iter()
            .map(|&k| factor.solve(&basis.mv[k]))
            .collect();
    }
}
