//! Eigenvalue counting on the unit equilateral triangle.
//!
//! `N(μ)` counts eigenvalues strictly below `μ`, i.e. lattice pairs with
//! `(16π²/9)(m² + mn + n²) < μ`. The two-sided Weyl-type bounds hold for
//! `μ > 48π²` and invert to per-index eigenvalue bounds for `j ≥ 26`
//! (`j ≥ 15` for the symmetric class).

use std::f64::consts::PI;

use log::warn;

use crate::error::{domain, Result};
use crate::exact_spectra::SymmetryClass;

/// Below this `μ` the counting bounds are not established.
pub const BOUND_VALIDITY_MU: f64 = 48.0 * PI * PI;
pub const MIN_INDEX_ALL: usize = 26;
pub const MIN_INDEX_SYMMETRIC: usize = 15;
pub const MIN_TAIL_INDEX: usize = 193;

/// Relative band around the threshold inside which a lattice value is
/// reported as a tie rather than assigned to one side.
pub const TIE_GUARD: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeCount {
    pub count: u64,
    /// Lattice values within the guard band of the threshold. They are
    /// counted as lying above it.
    pub near_ties: u64,
}

/// Exact count of class members with eigenvalue strictly below `mu`.
pub fn counting_function(mu: f64, class: SymmetryClass) -> Result<LatticeCount> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(domain(format!("mu must be a nonnegative number, got {mu}")));
    }
    // k < t  ⇔  (16π²/9) k < μ
    let t = 9.0 * mu / (16.0 * PI * PI);
    let band = TIE_GUARD * t.max(f64::MIN_POSITIVE);
    let below = |k: u64| (k as f64) < t - band;
    let tie = |k: u64| ((k as f64) - t).abs() <= band;

    let mut count = 0u64;
    let mut near_ties = 0u64;
    for m in 0u64.. {
        let mf = m as f64;
        // m² ≤ k(m, n) for every n, so no later row can contribute
        if mf * mf >= t + band {
            if tie(m * m) && class != SymmetryClass::Symmetric {
                near_ties += 1;
            }
            break;
        }
        let k = |n: u64| m * m + m * n + n * n;
        let (first, last) = match class {
            SymmetryClass::All => (0, u64::MAX),
            SymmetryClass::Symmetric => (m, u64::MAX),
            SymmetryClass::Antisymmetric if m == 0 => continue,
            SymmetryClass::Antisymmetric => (0, m - 1),
        };
        if !below(k(first)) {
            if tie(k(first)) {
                near_ties += 1;
            }
            continue;
        }
        // largest n with k(m, n) below the threshold: quadratic-formula guess, then exact correction
        let disc = (4.0 * t - 3.0 * mf * mf).max(0.0);
        let mut hi = ((disc.sqrt() - mf) / 2.0).floor().max(first as f64) as u64;
        while hi > first && !below(k(hi)) {
            hi -= 1;
        }
        while below(k(hi + 1)) {
            hi += 1;
        }
        if hi < last && tie(k(hi + 1)) {
            near_ties += 1;
        }
        count += hi.min(last) - first + 1;
    }
    if near_ties > 0 {
        warn!("counting_function: {near_ties} lattice value(s) within the tie guard band at mu = {mu}");
    }
    Ok(LatticeCount { count, near_ties })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingBound {
    pub mu: f64,
    /// Defined for the full spectrum only.
    pub lower: Option<f64>,
    pub upper: f64,
    pub class: SymmetryClass,
}

/// Closed-form Weyl-type bounds on `N(μ)` (full) or the upper bound on
/// `Nˢ(μ)` (symmetric), valid for `μ > 48π²`.
pub fn counting_bounds(mu: f64, class: SymmetryClass) -> Result<CountingBound> {
    if !(mu > BOUND_VALIDITY_MU) {
        return Err(domain(format!(
            "counting bounds hold only for mu > 48π² ≈ {BOUND_VALIDITY_MU:.4}, got {mu}"
        )));
    }
    let r = mu.sqrt();
    match class {
        SymmetryClass::All => Ok(CountingBound {
            mu,
            lower: Some(SQRT3 / (16.0 * PI) * mu + SQRT3 / (4.0 * PI) * r - 1.5),
            upper: SQRT3 / (16.0 * PI) * mu + (6.0 - SQRT3) / (4.0 * PI) * r + 1.5,
            class,
        }),
        SymmetryClass::Symmetric => Ok(CountingBound {
            mu,
            lower: None,
            upper: SQRT3 / (32.0 * PI) * mu + 3.0 / (4.0 * PI) * r + 1.25,
            class,
        }),
        SymmetryClass::Antisymmetric => Err(domain("no counting bound for the antisymmetric class")),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IndexBound {
    pub j: usize,
    pub lower: f64,
    /// Strict upper bound; full spectrum only.
    pub upper: Option<f64>,
}

/// Lower bound on `μⱼ(E₁)` obtained by inverting the counting upper bound.
fn full_lower(j: f64) -> f64 {
    let x = j - 1.5;
    let c = 13.0 - 4.0 * SQRT3;
    16.0 * PI / SQRT3 * x - 8.0 * (2.0 * SQRT3 - 1.0) * (4.0 * PI / SQRT3 * x + c).sqrt() + 8.0 * c
}

fn full_upper(j: f64) -> f64 {
    let x = j + 0.5;
    16.0 * PI / SQRT3 * x - 8.0 * (4.0 * PI / SQRT3 * x + 1.0).sqrt() + 8.0
}

fn symmetric_lower(j: f64) -> f64 {
    let x = j - 1.25;
    32.0 * PI / SQRT3 * x - 32.0 * (2.0 * SQRT3 * PI * x + 9.0).sqrt() + 96.0
}

/// Per-index eigenvalue bounds for the unit equilateral triangle.
pub fn invert_bounds(j: usize, class: SymmetryClass) -> Result<IndexBound> {
    match class {
        SymmetryClass::All => {
            if j < MIN_INDEX_ALL {
                return Err(domain(format!("index bounds need j >= {MIN_INDEX_ALL}, got {j}")));
            }
            Ok(IndexBound {
                j,
                lower: full_lower(j as f64),
                upper: Some(full_upper(j as f64)),
            })
        }
        SymmetryClass::Symmetric => {
            if j < MIN_INDEX_SYMMETRIC {
                return Err(domain(format!(
                    "symmetric index bounds need j >= {MIN_INDEX_SYMMETRIC}, got {j}"
                )));
            }
            Ok(IndexBound {
                j,
                lower: symmetric_lower(j as f64),
                upper: None,
            })
        }
        SymmetryClass::Antisymmetric => Err(domain("no index bound for the antisymmetric class")),
    }
}

/// Quotient of the symmetric lower bound by the full upper bound at index `j`.
pub fn tail_quotient(j: usize) -> f64 {
    symmetric_lower(j as f64) / full_upper(j as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailRatioReport {
    pub jmin: usize,
    pub jmax: usize,
    pub min_quotient: f64,
    pub argmin: usize,
    pub quotient_at_jmax: f64,
    /// Every quotient exceeds 11/6.
    pub all_exceed: bool,
    /// The quotient is nondecreasing over the whole range.
    pub monotone: bool,
    /// Indices where the quotient fails to exceed 11/6 (truncated to the first few).
    pub failures: Vec<usize>,
}

impl TailRatioReport {
    pub fn passed(&self) -> bool {
        self.all_exceed && self.monotone
    }
}

/// Checks `μⱼˢ/μⱼ > 11/6` through the inverted bounds for every `j` in
/// `jmin..=jmax`.
pub fn verify_tail_ratio(jmin: usize, jmax: usize) -> Result<TailRatioReport> {
    if jmin < MIN_TAIL_INDEX {
        return Err(domain(format!(
            "tail ratio check needs jmin >= {MIN_TAIL_INDEX}, got {jmin}"
        )));
    }
    if jmax < jmin {
        return Err(domain(format!("empty range {jmin}..={jmax}")));
    }
    let target = 11.0 / 6.0;
    let mut min_quotient = f64::INFINITY;
    let mut argmin = jmin;
    let mut monotone = true;
    let mut failures = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    let mut last = 0.0;
    for j in jmin..=jmax {
        let q = tail_quotient(j);
        if q < min_quotient {
            min_quotient = q;
            argmin = j;
        }
        if q < prev {
            monotone = false;
        }
        if !(q > target) && failures.len() < 16 {
            failures.push(j);
        }
        prev = q;
        last = q;
    }
    Ok(TailRatioReport {
        jmin,
        jmax,
        min_quotient,
        argmin,
        quotient_at_jmax: last,
        all_exceed: failures.is_empty(),
        monotone,
        failures,
    })
}
