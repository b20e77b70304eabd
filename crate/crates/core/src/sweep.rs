//! Parameter sweeps over isosceles apertures and rectangle aspect ratios,
//! and a golden-section search for the minimizer of `μ₄D²`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::exact_spectra::rectangle_spectrum;
use crate::fem::{solve_extrapolated_with, SolverOptions};
use crate::geometry::TriangleDomain;
use crate::mesh::DEFAULT_MAX_LEVEL;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    ApertureIsosceles,
    RectangleAspect,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SweepSolver {
    Exact,
    Fem { levels: Vec<u32> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub range: [f64; 2],
    pub samples: usize,
    /// Eigenvalue indices for aperture sweeps, sum indices for rectangles.
    pub n_values: Vec<usize>,
    pub solver: SweepSolver,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let [lo, hi] = self.range;
        if !(lo < hi) {
            return Err(domain(format!("empty range [{lo}, {hi}]")));
        }
        if self.samples < 2 {
            return Err(domain("a sweep needs at least two samples"));
        }
        if self.n_values.is_empty() || self.n_values.iter().any(|&n| n < 2) {
            return Err(domain("indices must be at least 2"));
        }
        match (self.family, &self.solver) {
            (Family::ApertureIsosceles, SweepSolver::Exact) => {
                Err(domain("exact spectra are only available for rectangles"))
            }
            (Family::RectangleAspect, SweepSolver::Fem { .. }) => {
                Err(domain("rectangle sweeps use the exact spectrum"))
            }
            (Family::ApertureIsosceles, SweepSolver::Fem { levels }) => {
                if !(lo > 0.0 && hi < PI) {
                    return Err(domain("apertures must lie in (0, π)"));
                }
                if levels.len() < 3 {
                    return Err(domain("extrapolation needs at least three levels"));
                }
                Ok(())
            }
            (Family::RectangleAspect, SweepSolver::Exact) => {
                if !(lo >= 1.0) {
                    return Err(domain("aspect ratios start at 1"));
                }
                Ok(())
            }
        }
    }

    pub fn points(&self) -> Vec<f64> {
        let [lo, hi] = self.range;
        (0..self.samples)
            .map(|i| lo + (hi - lo) * i as f64 / (self.samples - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub parameter: f64,
    /// One per requested index; `None` marks a failed sample.
    pub values: Vec<Option<f64>>,
    pub errors: Vec<Option<f64>>,
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub family: Family,
    pub n_values: Vec<usize>,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }

    /// Values of column `k`, skipping failed samples.
    pub fn column(&self, k: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| r.values[k].map(|v| (r.parameter, v)))
            .collect()
    }
}

/// Isosceles triangle with base `(±1, 0)` and apex height `cot(α/2)`.
pub fn aperture_triangle(alpha: f64) -> Result<TriangleDomain> {
    TriangleDomain::isosceles_with_aperture(alpha)
}

/// `μⱼD²` for each requested `j`, with error estimates.
pub fn aperture_values(alpha: f64, js: &[usize], levels: &[u32], opts: &SolverOptions) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = aperture_triangle(alpha)?;
    let count = js.iter().copied().max().unwrap_or(2);
    let max_level = levels.iter().copied().max().unwrap_or(0).max(DEFAULT_MAX_LEVEL);
    let x = solve_extrapolated_with(&t, count, levels, max_level, opts)?;
    let d2 = t.diameter().powi(2);
    let errs = x.spectrum.error_estimates().expect("extrapolated spectra carry estimates");
    Ok((
        js.iter().map(|&j| x.spectrum.values()[j - 1] * d2).collect(),
        js.iter().map(|&j| errs[j - 1] * d2).collect(),
    ))
}

/// `μⱼD²` across apertures. A failing sample yields a marked row; the sweep continues.
pub fn sweep_aperture(spec: &SweepSpec, opts: &SolverOptions) -> Result<SweepTable> {
    spec.validate()?;
    if spec.family != Family::ApertureIsosceles {
        return Err(domain("not an aperture sweep"));
    }
    let SweepSolver::Fem { levels } = &spec.solver else {
        unreachable!("validated above")
    };
    let k = spec.n_values.len();
    let rows = spec
        .points()
        .into_par_iter()
        .map(|alpha| match aperture_values(alpha, &spec.n_values, levels, opts) {
            Ok((v, e)) => SweepRow {
                parameter: alpha,
                values: v.into_iter().map(Some).collect(),
                errors: e.into_iter().map(Some).collect(),
                failure: None,
            },
            Err(err) => {
                log::warn!("aperture {alpha}: {err}");
                SweepRow {
                    parameter: alpha,
                    values: vec![None; k],
                    errors: vec![None; k],
                    failure: Some(err.to_string()),
                }
            }
        })
        .collect();
    Ok(SweepTable {
        family: spec.family,
        n_values: spec.n_values.clone(),
        rows,
    })
}

/// `MₙD²` of the `1 × 1/r` rectangle.
pub fn rectangle_normalized_sum(r: f64, n: usize) -> Result<f64> {
    let h = 1.0 / r;
    let s = rectangle_spectrum(1.0, h, n)?;
    Ok(s.eigenvalue_sum(n)? * (1.0 + h * h))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RectangleSweep {
    pub table: SweepTable,
    /// Indices `n` for which some sampled `r > 1` has `MₙD²` below the square's.
    pub beaten: Vec<usize>,
    /// For each beaten `n`, the sampled ratio with the smallest sum.
    pub best_ratio: Vec<(usize, f64, f64)>,
}

pub fn sweep_rectangle(spec: &SweepSpec) -> Result<RectangleSweep> {
    spec.validate()?;
    if spec.family != Family::RectangleAspect {
        return Err(domain("not a rectangle sweep"));
    }
    let rows: Vec<SweepRow> = spec
        .points()
        .into_iter()
        .map(|r| {
            let values = spec
                .n_values
                .iter()
                .map(|&n| rectangle_normalized_sum(r, n).map(Some))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                parameter: r,
                errors: vec![Some(0.0); values.len()],
                values,
                failure: None,
            })
        })
        .collect::<Result<_>>()?;
    let mut beaten = Vec::new();
    let mut best_ratio = Vec::new();
    for (k, &n) in spec.n_values.iter().enumerate() {
        let square = rectangle_normalized_sum(1.0, n)?;
        let best = rows
            .iter()
            .filter(|r| r.parameter > 1.0)
            .map(|r| (r.parameter, r.values[k].expect("exact")))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        if let Some((r, v)) = best {
            if v < square * (1.0 - 1e-12) {
                beaten.push(n);
                best_ratio.push((n, r, v));
            }
        }
    }
    Ok(RectangleSweep {
        table: SweepTable {
            family: spec.family,
            n_values: spec.n_values.clone(),
            rows,
        },
        beaten,
        best_ratio,
    })
}

pub const GOLDEN_TOLERANCE: f64 = 1e-4;
const BRACKET_PROBES: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub alpha: f64,
    pub value: f64,
    pub evaluations: usize,
}

/// Golden-section minimization of `f` on `[lo, hi]` after checking that some
/// interior probe lies below both endpoints.
pub fn golden_section<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) {
        return Err(Error::Bracket(format!("empty bracket [{lo}, {hi}]")));
    }
    let mut evals = 0;
    let mut eval = |x: f64| {
        evals += 1;
        f(x)
    };
    let probes: Vec<(f64, f64)> = (0..BRACKET_PROBES)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (BRACKET_PROBES - 1) as f64;
            eval(x).map(|v| (x, v))
        })
        .collect::<Result<_>>()?;
    let (fa, fb) = (probes[0].1, probes[BRACKET_PROBES - 1].1);
    let (ibest, &(_, vbest)) = probes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("probes");
    if ibest == 0 || ibest == BRACKET_PROBES - 1 || !(vbest < fa && vbest < fb) {
        return Err(Error::Bracket(format!(
            "no interior minimum in [{lo}, {hi}] (endpoint values {fa:.6}, {fb:.6})"
        )));
    }
    // narrow to the probe cell around the best sample
    let mut a = probes[ibest - 1].0;
    let mut b = probes[ibest + 1].0;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = eval(d)?;
        }
    }
    let (alpha, value) = if fc < fd { (c, fc) } else { (d, fd) };
    let (alpha, value) = if vbest < value { (probes[ibest].0, vbest) } else { (alpha, value) };
    Ok(Minimum {
        alpha,
        value,
        evaluations: evals,
    })
}

/// Minimizes the extrapolated `μ₄D²` over apertures in `bracket`.
pub fn minimize_mu4(bracket: [f64; 2], levels: &[u32], opts: &SolverOptions) -> Result<Minimum> {
    let [lo, hi] = bracket;
    if !(lo > 0.0 && hi < PI) {
        return Err(domain("apertures must lie in (0, π)"));
    }
    golden_section(
        |alpha| Ok(aperture_values(alpha, &[4], levels, opts)?.0[0]),
        lo,
        hi,
        GOLDEN_TOLERANCE,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let m = golden_section(|x| Ok((x - 0.3).powi(2) + 1.0), 0.0, 1.0, 1e-6).unwrap();
        assert!((m.alpha - 0.3).abs() < 1e-5);
        assert!((m.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kink_minimum() {
        let m = golden_section(|x| Ok((x - 0.61).abs()), 0.0, 1.0, 1e-6).unwrap();
        assert!((m.alpha - 0.61).abs() < 1e-5);
    }

    #[test]
    fn monotone_is_bracket_error() {
        assert!(matches!(
            golden_section(Ok, 0.0, 1.0, 1e-6),
            Err(Error::Bracket(_))
        ));
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec {
            family: Family::RectangleAspect,
            range: [1.0, 3.0],
            samples: 10,
            n_values: vec![2, 3],
            solver: SweepSolver::Exact,
        };
        assert!(s.validate().is_ok());
        s.samples = 1;
        assert!(s.validate().is_err());
        s.samples = 10;
        s.range = [3.0, 1.0];
        assert!(s.validate().is_err());
        s.range = [1.0, 3.0];
        s.family = Family::ApertureIsosceles;
        assert!(s.validate().is_err());
    }

    #[test]
    fn square_values() {
        let pi2 = PI * PI;
        assert!((rectangle_normalized_sum(1.0, 2).unwrap() - 2.0 * pi2).abs() < 1e-12);
        assert!((rectangle_normalized_sum(1.0, 5).unwrap() - 16.0 * pi2).abs() < 1e-11);
    }
}
