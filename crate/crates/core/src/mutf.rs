//! The transformation inequality for eigenvalue sums and the scalar
//! threshold chains built on it.
//!
//! For the linear map of `T(a,b)` onto `T(c,d)` that fixes `(±1, 0)`,
//! `Mₙ(a,b) > C·Mₙ(c,d)` follows once
//! `(1/d²)[((a−c)² + d²)(1−γ) + 2b(a−c)δ + b²γ] < 1/C`,
//! where `γ, δ` are the gradient ratios of the first `n` eigenfunctions
//! of `T(a,b)`.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::counting::{verify_tail_ratio, TailRatioReport, MIN_TAIL_INDEX};
use crate::error::{domain, Error, Result};
use crate::exact_spectra::{
    equilateral_spectrum, ratio_table, termwise_ratio_failures, RatioBound, Spectrum, SymmetryClass,
};
use crate::fem::{gradient_ratios, solve_extrapolated_with, solve_neumann_with, SolverOptions};
use crate::geometry::{equilateral, triangle, triangle_g, TriangleDomain};
use crate::mesh::{Mesh, DEFAULT_MAX_LEVEL};

/// Margins smaller than this are reported as indeterminate rather than pass/fail.
pub const BORDERLINE: f64 = 1e-10;
/// The indices not covered by the comparison with `F±` in the 6/11 frame.
pub const EXCEPTIONAL_N: [usize; 5] = [4, 5, 7, 8, 9];
/// Multiple of the error estimate a margin must exceed before a threshold is certified.
pub const CERTIFICATION_FACTOR: f64 = 3.0;

const SQRT3: f64 = 1.732_050_807_568_877_2;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MutfReport {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub constant: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lhs: f64,
    /// `1/C`
    pub rhs: f64,
    /// `rhs − lhs`
    pub margin: f64,
    /// `margin > BORDERLINE`
    pub pass: bool,
    /// `|margin| ≤ BORDERLINE`
    pub indeterminate: bool,
}

/// Evaluates the sufficient condition for `Mₙ(a,b) > C·Mₙ(c,d)`.
pub fn transformation_condition(
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    constant: f64,
    gamma: f64,
    delta: f64,
) -> Result<MutfReport> {
    if !(b > 0.0 && d > 0.0 && constant > 0.0) {
        return Err(domain(format!("need b, d, C > 0 (got b={b}, d={d}, C={constant})")));
    }
    if !(0.0..=1.0).contains(&gamma) {
        return Err(domain(format!("gamma must lie in [0, 1], got {gamma}")));
    }
    if !delta.is_finite() || !a.is_finite() || !c.is_finite() {
        return Err(domain("non-finite parameter"));
    }
    let s = a - c;
    let lhs = ((s * s + d * d) * (1.0 - gamma) + 2.0 * b * s * delta + b * b * gamma) / (d * d);
    let rhs = 1.0 / constant;
    let margin = rhs - lhs;
    Ok(MutfReport {
        a,
        b,
        c,
        d,
        constant,
        gamma,
        delta,
        lhs,
        rhs,
        margin,
        pass: margin > BORDERLINE,
        indeterminate: margin.abs() <= BORDERLINE,
    })
}

/// Fraction of `MₙD²|_{F±}` that the subequilateral sum is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    /// 6/11, valid for all `n` outside the exceptional set.
    PartA,
    /// 5/8, used for the exceptional indices.
    PartB,
}

impl Frame {
    pub fn fraction(self) -> f64 {
        match self {
            Frame::PartA => 6.0 / 11.0,
            Frame::PartB => 5.0 / 8.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Equilateral,
    RightPlus,
    RightMinus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameReport {
    pub b: f64,
    pub frame: Frame,
    /// Target `E`, `C = 4/(1+b²)`.
    pub e_branch: MutfReport,
    /// Targets `F₊`, `F₋`, `C = fraction·16/(1+b²)`.
    pub f_plus: MutfReport,
    pub f_minus: MutfReport,
    /// First passing branch, preferring `E`, then the better `F` sign.
    pub passing: Option<Branch>,
}

impl FrameReport {
    pub fn pass(&self) -> bool {
        self.passing.is_some()
    }

    pub fn f_branch_pass(&self) -> bool {
        self.f_plus.pass || self.f_minus.pass
    }
}

/// Compares `T(0,b)` with `E` and with both `F±` in the given frame.
pub fn prop_frame(b: f64, gamma: f64, delta: f64, frame: Frame) -> Result<FrameReport> {
    if !(b > SQRT3) {
        return Err(domain(format!("b must exceed √3, got {b}")));
    }
    let q = 1.0 + b * b;
    let e_branch = transformation_condition(0.0, b, 0.0, SQRT3, 4.0 / q, gamma, delta)?;
    let cf = frame.fraction() * 16.0 / q;
    let f_plus = transformation_condition(0.0, b, 1.0, 2.0 * SQRT3, cf, gamma, delta)?;
    let f_minus = transformation_condition(0.0, b, -1.0, 2.0 * SQRT3, cf, gamma, delta)?;
    let passing = if e_branch.pass {
        Some(Branch::Equilateral)
    } else if f_plus.pass || f_minus.pass {
        Some(if f_plus.margin >= f_minus.margin {
            Branch::RightPlus
        } else {
            Branch::RightMinus
        })
    } else {
        None
    };
    Ok(FrameReport {
        b,
        frame,
        e_branch,
        f_plus,
        f_minus,
        passing,
    })
}

/// [`prop_frame`] in the 6/11 frame.
pub fn prop_a_frame(b: f64, gamma: f64, delta: f64) -> Result<FrameReport> {
    prop_frame(b, gamma, delta, Frame::PartA)
}

/// `13 − 19/(6 − 5γ)`: the smallest admissible `b²` in the 5/8 frame with `δ = 0`.
pub fn part_b_threshold_sq(gamma: f64) -> f64 {
    13.0 - 19.0 / (6.0 - 5.0 * gamma)
}

/// `(93 − 104γ)/(11 − 8γ)`: the same threshold in the 6/11 frame.
pub fn part_a_threshold_sq(gamma: f64) -> f64 {
    (93.0 - 104.0 * gamma) / (11.0 - 8.0 * gamma)
}

/// `sup_{γ ∈ [3/4, 1]} √(13 − 19/(6 − 5γ))`, attained at `γ = 3/4`.
pub fn gamma_worst_bound() -> f64 {
    part_b_threshold_sq(0.75).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GammaScan {
    pub points: usize,
    pub max_value: f64,
    pub argmax: f64,
    /// The root is strictly decreasing wherever the radicand is positive.
    pub strictly_decreasing: bool,
    /// Value of the radicand at `γ = 1`.
    pub radicand_at_one: f64,
}

/// Samples `γ ∈ [3/4, 1]` on `points` equally spaced values.
pub fn gamma_worst_scan(points: usize) -> Result<GammaScan> {
    if points < 2 {
        return Err(domain("need at least two grid points"));
    }
    let mut prev = f64::INFINITY;
    let mut decreasing = true;
    let (mut max_value, mut argmax) = (f64::NEG_INFINITY, 0.75);
    for k in 0..points {
        let g = 0.75 + 0.25 * k as f64 / (points - 1) as f64;
        let r = part_b_threshold_sq(g);
        if r <= 0.0 {
            continue;
        }
        let v = r.sqrt();
        if v > max_value {
            max_value = v;
            argmax = g;
        }
        if !(v < prev) {
            decreasing = false;
        }
        prev = v;
    }
    Ok(GammaScan {
        points,
        max_value,
        argmax,
        strictly_decreasing: decreasing,
        radicand_at_one: part_b_threshold_sq(1.0),
    })
}

/// `4b*²/(3(b*²+1)) · (b²+1)/(b² + b*²/3)`.
pub fn endpoint_right_side(b: f64, b_star: f64) -> f64 {
    let s = b_star * b_star;
    4.0 * s / (3.0 * (s + 1.0)) * (b * b + 1.0) / (b * b + s / 3.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EndpointReport {
    pub b_star: f64,
    pub k: f64,
    /// Right side at `b = √3`, its minimum over the interval.
    pub right_side_at_sqrt3: f64,
    pub increasing: bool,
    pub grid_points: usize,
    /// Every grid point satisfies `1 − γ + (b²/b*²)γ < (1/K)(b²+1)/(b*²+1)`.
    pub grid_all_pass: bool,
    /// For each sampled `b`, the worst `γ` is `3/4`.
    pub worst_at_three_quarters: bool,
    pub min_grid_margin: f64,
    pub pass: bool,
}

/// Checks the comparison of `T(0,b)` with the endpoint triangle `T(0,b*)` for
/// `b ∈ (√3, b*)` on a `grid × grid` scan of `(γ, b)`.
pub fn endpoint_threshold_check(b_star: f64, k: f64, grid: usize) -> Result<EndpointReport> {
    if !(k > 0.0 && k < 1.0) {
        return Err(domain(format!("K must lie in (0, 1), got {k}")));
    }
    if !(b_star > SQRT3) {
        return Err(domain(format!("b* must exceed √3, got {b_star}")));
    }
    if grid < 2 {
        return Err(domain("need at least a 2×2 grid"));
    }
    let r0 = endpoint_right_side(SQRT3, b_star);
    // open interval in b: interior points only
    let bs: Vec<f64> = (1..=grid)
        .map(|i| SQRT3 + (b_star - SQRT3) * i as f64 / (grid + 1) as f64)
        .collect();
    let increasing = std::iter::once(r0)
        .chain(bs.iter().map(|&b| endpoint_right_side(b, b_star)))
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| w[1] > w[0]);
    let s = b_star * b_star;
    let rows: Vec<(f64, bool)> = bs
        .par_iter()
        .map(|&b| {
            let rhs = (b * b + 1.0) / (k * (s + 1.0));
            let mut min_margin = f64::INFINITY;
            let mut worst_gamma = 0.0;
            for gi in 0..grid {
                let g = 0.75 + 0.25 * gi as f64 / (grid - 1) as f64;
                let lhs = 1.0 - g + b * b / s * g;
                let m = rhs - lhs;
                if m < min_margin {
                    min_margin = m;
                    worst_gamma = g;
                }
            }
            (min_margin, worst_gamma == 0.75)
        })
        .collect();
    let min_grid_margin = rows.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let grid_all_pass = min_grid_margin > 0.0;
    let worst_at_three_quarters = rows.iter().all(|r| r.1);
    Ok(EndpointReport {
        b_star,
        k,
        right_side_at_sqrt3: r0,
        increasing,
        grid_points: grid * grid,
        grid_all_pass,
        worst_at_three_quarters,
        min_grid_margin,
        pass: k < r0 && increasing && grid_all_pass && worst_at_three_quarters,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdTable {
    pub k: f64,
    /// `n → (1/K)·MₙD²|_E`, rounded up at the second decimal.
    pub entries: BTreeMap<usize, f64>,
}

/// Rounds half-up at two decimals, then moves up one cent if still below `x`.
pub fn round_up_cents(x: f64) -> f64 {
    let mut cents = (x * 100.0 + 0.5).floor();
    if cents / 100.0 < x {
        cents += 1.0;
    }
    cents / 100.0
}

pub fn exceptional_thresholds(k: f64) -> Result<ThresholdTable> {
    if !(k > 0.0 && k <= 1.0) {
        return Err(domain(format!("K must lie in (0, 1], got {k}")));
    }
    let nmax = *EXCEPTIONAL_N.iter().max().expect("non-empty");
    let e = equilateral_spectrum(nmax, 2.0, SymmetryClass::All)?;
    let d2 = 4.0;
    let entries = EXCEPTIONAL_N
        .iter()
        .map(|&n| Ok((n, round_up_cents(e.eigenvalue_sum(n)? * d2 / k))))
        .collect::<Result<_>>()?;
    Ok(ThresholdTable { k, entries })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalRow {
    pub n: usize,
    /// `MₙD²|_G`
    pub value: f64,
    /// Summed error estimate, scaled by `D²`.
    pub error: f64,
    pub threshold: Option<f64>,
    /// `value − 3·error − threshold`
    pub margin: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExceptionalReport {
    pub rows: Vec<ExceptionalRow>,
    pub pass: bool,
}

/// Certifies `MₙD²|_G > threshold(n)` with margin `3×` the error estimate.
/// Rows for indices outside the table (such as `n = 6`) are informational.
pub fn verify_exceptional(g_spectrum: &Spectrum, thresholds: &ThresholdTable) -> Result<ExceptionalReport> {
    verify_exceptional_on(&triangle_g(), g_spectrum, thresholds)
}

pub fn verify_exceptional_on(
    t: &TriangleDomain,
    spectrum: &Spectrum,
    thresholds: &ThresholdTable,
) -> Result<ExceptionalReport> {
    if spectrum.error_estimates().is_none() {
        return Err(Error::Uncertified(
            "spectrum carries no error estimates; refusing to certify thresholds".into(),
        ));
    }
    let nmax = thresholds.entries.keys().copied().max().unwrap_or(2);
    if spectrum.len() < nmax {
        return Err(Error::Range {
            requested: nmax,
            available: spectrum.len(),
        });
    }
    let d2 = t.diameter().powi(2);
    let mut rows = Vec::new();
    for n in 2..=nmax {
        let value = spectrum.eigenvalue_sum(n)? * d2;
        let error = spectrum.error_sum(n).unwrap_or(0.0) * d2;
        let threshold = thresholds.entries.get(&n).copied();
        let margin = threshold.map(|th| value - CERTIFICATION_FACTOR * error - th);
        rows.push(ExceptionalRow {
            n,
            value,
            error,
            threshold,
            margin,
            pass: margin.map(|m| m > 0.0),
        });
    }
    let pass = rows.iter().all(|r| r.pass != Some(false));
    Ok(ExceptionalReport { rows, pass })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub jmax: usize,
    /// `n` where the required bound fails (empty when the comparison holds).
    pub failures: Vec<usize>,
    /// `n` where the ratio equals its bound exactly.
    pub equality_at: Vec<usize>,
    /// `j ∈ 28..=jmax` with `6μⱼˢ ≤ 11μⱼ`.
    pub termwise_failures: Vec<usize>,
    /// The cumulative 6/11 inequality at `n = 27`.
    pub cumulative_27: bool,
    pub tail: TailRatioReport,
    pub pass: bool,
}

/// Highest index the tail scan evaluates explicitly.
pub const TAIL_SCAN_MAX: usize = 1_000_000;

/// `6/11·MₙD²|_{F±} ≥ MₙD²|_E` for `n = 3, 6, 10, 11, …` and the 5/8 version
/// for the exceptional `n`, via the symmetric spectrum of the equilateral triangle.
pub fn comparison_lemma_check() -> Result<ComparisonReport> {
    let jmax = 200;
    let rows = ratio_table(jmax)?;
    let failures = rows.iter().filter(|r| !r.holds).map(|r| r.j).collect();
    let equality_at = rows.iter().filter(|r| r.equality).map(|r| r.j).collect();
    let termwise_failures = termwise_ratio_failures(28, jmax)?;
    let r27 = rows.iter().find(|r| r.j == 27).expect("row 27 present");
    debug_assert_eq!(r27.bound, Some(RatioBound::ElevenSixths));
    let cumulative_27 = 6 * r27.symmetric_sum > 11 * r27.full_sum;
    let tail = verify_tail_ratio(MIN_TAIL_INDEX, TAIL_SCAN_MAX)?;
    let pass = rows.iter().all(|r| r.holds) && termwise_failures.is_empty() && cumulative_27 && tail.passed();
    Ok(ComparisonReport {
        jmax,
        failures,
        equality_at,
        termwise_failures,
        cumulative_27,
        tail,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoundnessRow {
    pub b: f64,
    pub n: usize,
    pub target: Branch,
    pub frame: Frame,
    pub condition: MutfReport,
    /// `Mₙ(0,b)` on the source mesh.
    pub source_sum: f64,
    /// `C·Mₙ(c,d)` on the mapped mesh.
    pub scaled_target_sum: f64,
    /// `source_sum − scaled_target_sum`
    pub gap: f64,
    /// Passing condition implies positive gap (up to `tol`).
    pub consistent: bool,
}

/// Solves `T(0,b)` and its images `E`, `F±` on meshes of equal connectivity and
/// checks that every passing condition is matched by the discrete sums.
pub fn soundness_cross_check(bs: &[f64], ns: &[usize], level: u32, opts: &SolverOptions) -> Result<Vec<SoundnessRow>> {
    let nmax = ns.iter().copied().max().unwrap_or(2);
    let count = nmax + 1;
    let targets = [(Branch::Equilateral, 0.0, SQRT3), (Branch::RightPlus, 1.0, 2.0 * SQRT3), (Branch::RightMinus, -1.0, 2.0 * SQRT3)];
    let per_b: Vec<Vec<SoundnessRow>> = bs
        .par_iter()
        .map(|&b| {
            let src_t = triangle(0.0, b)?;
            let src_mesh = Mesh::uniform(&src_t, level, DEFAULT_MAX_LEVEL)?;
            let src = solve_neumann_with(&src_mesh, count, opts)?;
            let mut rows = Vec::new();
            for &(branch, c, d) in &targets {
                let tgt_t = triangle(c, d)?;
                let tgt = solve_neumann_with(&Mesh::uniform(&tgt_t, level, DEFAULT_MAX_LEVEL)?, count, opts)?;
                for &n in ns {
                    let g = gradient_ratios(&src, n)?;
                    let frames: &[Frame] = match branch {
                        Branch::Equilateral => &[Frame::PartA],
                        _ => &[Frame::PartA, Frame::PartB],
                    };
                    for &frame in frames {
                        let q = 1.0 + b * b;
                        let constant = match branch {
                            Branch::Equilateral => 4.0 / q,
                            _ => frame.fraction() * 16.0 / q,
                        };
                        let condition = transformation_condition(0.0, b, c, d, constant, g.gamma, g.delta)?;
                        let source_sum = src.spectrum.eigenvalue_sum(n)?;
                        let scaled_target_sum = constant * tgt.spectrum.eigenvalue_sum(n)?;
                        let gap = source_sum - scaled_target_sum;
                        let tol = 1e-9 * source_sum;
                        rows.push(SoundnessRow {
                            b,
                            n,
                            target: branch,
                            frame,
                            condition,
                            source_sum,
                            scaled_target_sum,
                            gap,
                            consistent: !condition.pass || gap > -tol,
                        });
                    }
                }
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(per_b.concat())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremRow {
    pub b: f64,
    pub n: usize,
    pub subequilateral: f64,
    pub equilateral: f64,
    pub error: f64,
    pub pass: bool,
}

/// Extrapolated `MₙD²|_{T(0,b)} > MₙD²|_E` for each `b` and `n`.
pub fn theorem_check(bs: &[f64], ns: &[usize], levels: &[u32], opts: &SolverOptions) -> Result<Vec<TheoremRow>> {
    let nmax = ns.iter().copied().max().unwrap_or(2);
    let exact = equilateral_spectrum(nmax, 2.0, SymmetryClass::All)?;
    let max_level = levels.iter().copied().max().unwrap_or(0).max(DEFAULT_MAX_LEVEL);
    let per_b: Vec<Vec<TheoremRow>> = bs
        .par_iter()
        .map(|&b| {
            let t = triangle(0.0, b)?;
            let x = solve_extrapolated_with(&t, nmax, levels, max_level, opts)?;
            let d2 = t.diameter().powi(2);
            ns.iter()
                .map(|&n| {
                    let sub = x.spectrum.eigenvalue_sum(n)? * d2;
                    let err = x.spectrum.error_sum(n).unwrap_or(0.0) * d2;
                    let eq = exact.eigenvalue_sum(n)? * 4.0;
                    Ok(TheoremRow {
                        b,
                        n,
                        subequilateral: sub,
                        equilateral: eq,
                        error: err,
                        pass: sub - err > eq,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_b.concat())
}

/// `MₙD²` of `E`, for reference.
pub fn equilateral_normalized_sum(n: usize) -> Result<f64> {
    let t = equilateral();
    Ok(equilateral_spectrum(n, 2.0, SymmetryClass::All)?.eigenvalue_sum(n)? * t.diameter().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_is_borderline() {
        for g in [0.0, 0.3, 0.75, 1.0] {
            let r = transformation_condition(0.2, 1.5, 0.2, 1.5, 1.0, g, 0.1).unwrap();
            assert_relative_eq!(r.lhs, 1.0, epsilon = 1e-15);
            assert!(!r.pass && r.indeterminate);
        }
    }

    #[test]
    fn lhs_matches_quadratic_form() {
        let (a, b, c, d, g, dl) = (0.3, 2.0, -1.0, 2.5, 0.4, -0.2);
        let r = transformation_condition(a, b, c, d, 0.5, g, dl).unwrap();
        let want = (((a - c) * (a - c) + d * d) * (1.0 - g) + 2.0 * b * (a - c) * dl + b * b * g) / (d * d);
        assert_eq!(r.lhs, want);
        assert_eq!(r.rhs, 2.0);
        assert!(transformation_condition(a, b, c, d, 0.5, 1.2, dl).is_err());
        assert!(transformation_condition(a, 0.0, c, d, 0.5, g, dl).is_err());
    }

    #[test]
    fn frames() {
        let r = prop_a_frame(2.5, 0.5, 0.0).unwrap();
        assert_eq!(r.passing, Some(Branch::Equilateral));
        let r = prop_a_frame(4.0, 1.0, 0.0).unwrap();
        assert!(!r.e_branch.pass && r.f_branch_pass());
        assert!(16.0 > part_a_threshold_sq(1.0));
        let r = prop_frame(2.2, 0.75, 0.0, Frame::PartB).unwrap();
        assert!(r.f_branch_pass());
        let r = prop_frame(2.12, 0.75, 0.0, Frame::PartB).unwrap();
        assert!(!r.pass());
        assert!(prop_a_frame(1.7, 0.5, 0.0).is_err());
    }

    #[test]
    fn delta_sign_helps_one_side() {
        let r = prop_frame(2.05, 0.8, 0.1, Frame::PartB).unwrap();
        // c = −1 turns 2b(a−c)δ positive, c = +1 negative
        assert!(r.f_plus.lhs < r.f_minus.lhs);
    }

    #[test]
    fn gamma_scan() {
        let s = gamma_worst_scan(10_000).unwrap();
        assert!(s.strictly_decreasing);
        assert_eq!(s.argmax, 0.75);
        assert_relative_eq!(s.max_value, gamma_worst_bound());
        assert_eq!(s.radicand_at_one, -6.0);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_up_cents(157.9137), 157.92);
        assert_eq!(round_up_cents(90.7237), 90.73);
        assert_eq!(round_up_cents(1.5), 1.5);
        assert_eq!(round_up_cents(1.2351), 1.24);
    }

    #[test]
    fn missing_errors_refused() {
        let s = equilateral_spectrum(9, 2.0, SymmetryClass::All).unwrap();
        let th = exceptional_thresholds(0.967).unwrap();
        assert!(matches!(verify_exceptional(&s, &th), Err(Error::Uncertified(_))));
    }
}
