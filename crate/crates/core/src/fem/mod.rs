//! P1 finite elements for the Neumann eigenproblem `−Δu = μu`, `∂u/∂n = 0`.

pub mod assembly;
pub mod eigen;
pub mod extrapolate;
pub mod sparse;

use rayon::prelude::*;

pub use assembly::{assemble, FemOperators};
pub use eigen::SolverOptions;
pub use extrapolate::{richardson, Extrapolated};

use crate::error::{domain, Error, Result};
use crate::exact_spectra::{Provenance, Spectrum};
use crate::geometry::TriangleDomain;
use crate::mesh::{Mesh, DEFAULT_MAX_LEVEL};

/// Relative gap below which neighboring eigenvalues count as one eigenspace.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct EigenSolveResult {
    pub spectrum: Spectrum,
    /// Nodal coefficients, M-orthonormal.
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// `max |VᵀMV − I|`.
    pub mass_orthonormality_residual: f64,
    pub mesh_level: u32,
    pub mesh: Mesh,
}

fn shift_for(mesh: &Mesh) -> f64 {
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in mesh.nodes() {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y0 = y0.min(p.y);
        y1 = y1.max(p.y);
    }
    let d2 = (x1 - x0).powi(2) + (y1 - y0).powi(2);
    1.0 / d2
}

pub fn solve_neumann(mesh: &Mesh, count: usize) -> Result<EigenSolveResult> {
    solve_neumann_with(mesh, count, &SolverOptions::default())
}

pub fn solve_neumann_with(mesh: &Mesh, count: usize, opts: &SolverOptions) -> Result<EigenSolveResult> {
    if count == 0 {
        return Err(domain("count must be positive"));
    }
    let ops = assemble(mesh)?;
    let pairs = eigen::solve(&ops, count, shift_for(mesh), opts)?;
    let mut ortho = 0.0f64;
    let mv: Vec<Vec<f64>> = pairs.vectors.iter().map(|v| ops.mass.mul_vec(v)).collect();
    for (i, a) in pairs.vectors.iter().enumerate() {
        for (j, b) in mv.iter().enumerate() {
            let g: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((g - target).abs());
        }
    }
    let mut values = pairs.values;
    // Ritz values come out sorted; guard against last-bit reorderings
    for k in 1..values.len() {
        if values[k] < values[k - 1] {
            values[k] = values[k - 1];
        }
    }
    Ok(EigenSolveResult {
        spectrum: Spectrum::new(values, Provenance::Fem)?,
        vectors: pairs.vectors,
        residuals: pairs.residuals,
        mass_orthonormality_residual: ortho,
        mesh_level: mesh.level(),
        mesh: mesh.clone(),
    })
}

/// Extrapolated spectrum plus the per-level data behind it.
#[derive(Clone, Debug)]
pub struct Extrapolation {
    pub spectrum: Spectrum,
    pub levels: Vec<u32>,
    pub per_level: Vec<Spectrum>,
    pub orders: Vec<Option<f64>>,
    /// 1-based indices whose level sequence was not monotone.
    pub fallbacks: Vec<usize>,
}

pub fn solve_extrapolated(t: &TriangleDomain, count: usize, levels: &[u32]) -> Result<Extrapolation> {
    solve_extrapolated_with(t, count, levels, DEFAULT_MAX_LEVEL, &SolverOptions::default())
}

pub fn solve_extrapolated_with(
    t: &TriangleDomain,
    count: usize,
    levels: &[u32],
    max_level: u32,
    opts: &SolverOptions,
) -> Result<Extrapolation> {
    if levels.len() < 3 {
        return Err(domain("extrapolation needs at least three levels"));
    }
    if levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("levels must be strictly increasing"));
    }
    let per_level: Vec<Spectrum> = levels
        .par_iter()
        .map(|&l| {
            let m = Mesh::uniform(t, l, max_level)?;
            Ok(solve_neumann_with(&m, count, opts)?.spectrum)
        })
        .collect::<Result<_>>()?;
    let h: Vec<f64> = levels.iter().map(|&l| 0.5f64.powi(l as i32)).collect();
    let mut values = Vec::with_capacity(count);
    let mut errors = Vec::with_capacity(count);
    let mut orders = Vec::with_capacity(count);
    let mut fallbacks = Vec::new();
    for j in 0..count {
        let seq: Vec<f64> = per_level.iter().map(|s| s.values()[j]).collect();
        let e = richardson(&h, &seq);
        if e.fallback {
            log::warn!("eigenvalue {} is not monotone across levels {levels:?}: {seq:?}", j + 1);
            fallbacks.push(j + 1);
        }
        values.push(e.value);
        errors.push(e.error);
        orders.push(e.order);
    }
    // extrapolants of nearly equal eigenvalues may cross by rounding
    let mut idx: Vec<usize> = (0..count).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let spectrum = Spectrum::new(idx.iter().map(|&i| values[i]).collect(), Provenance::Extrapolated)?
        .with_error_estimates(idx.iter().map(|&i| errors[i]).collect())?;
    Ok(Extrapolation {
        spectrum,
        levels: levels.to_vec(),
        per_level,
        orders: idx.iter().map(|&i| orders[i]).collect(),
        fallbacks,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradientRatios {
    pub n: usize,
    /// `Σ∫u_y² / Σ∫|∇u|²`
    pub gamma: f64,
    /// `Σ∫u_x u_y / Σ∫|∇u|²`
    pub delta: f64,
    /// False when `μₙ` and `μₙ₊₁` are degenerate (or `μₙ₊₁` is unknown).
    pub eigenspace_complete: bool,
}

/// Component energies `(∫u_x², ∫u_y², ∫u_x u_y)` of a P1 function.
pub fn gradient_energies(mesh: &Mesh, u: &[f64]) -> (f64, f64, f64) {
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for e in 0..mesh.elements().len() {
        let (gx, gy) = assembly::element_gradient(mesh, e, u);
        let a = mesh.element_area(e);
        xx += a * gx * gx;
        yy += a * gy * gy;
        xy += a * gx * gy;
    }
    (xx, yy, xy)
}

pub fn gradient_ratios(r: &EigenSolveResult, n: usize) -> Result<GradientRatios> {
    if n < 2 {
        return Err(domain("gradient ratios need n ≥ 2"));
    }
    if n > r.vectors.len() {
        return Err(Error::Range {
            requested: n,
            available: r.vectors.len(),
        });
    }
    let (mut xx, mut yy, mut xy) = (0.0, 0.0, 0.0);
    for u in &r.vectors[..n] {
        let (a, b, c) = gradient_energies(&r.mesh, u);
        xx += a;
        yy += b;
        xy += c;
    }
    let total = xx + yy;
    let v = r.spectrum.values();
    let eigenspace_complete = n < v.len() && v[n] - v[n - 1] > DEGENERACY_TOLERANCE * v[n];
    Ok(GradientRatios {
        n,
        gamma: yy / total,
        delta: xy / total,
        eigenspace_complete,
    })
}
