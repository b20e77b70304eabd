//! The full verification run and its flat `key = value` configuration.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::counting::{
    counting_bounds, counting_function, invert_bounds, tail_quotient, verify_tail_ratio, BOUND_VALIDITY_MU,
    MIN_INDEX_ALL, MIN_INDEX_SYMMETRIC, MIN_TAIL_INDEX,
};
use crate::error::{Error, Result};
use crate::exact_spectra::{
    equilateral_modes, ratio_table, IndexPair, SymmetryClass, EQUILATERAL_UNIT,
};
use crate::fem::{solve_extrapolated_with, solve_neumann_with, SolverOptions};
use crate::geometry::{stretch_map, triangle_g, Point, TriangleDomain};
use crate::mesh::Mesh;
use crate::mutf::{
    comparison_lemma_check, endpoint_threshold_check, exceptional_thresholds, gamma_worst_bound, gamma_worst_scan,
    verify_exceptional,
};
use crate::sweep::aperture_values;

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    /// Constant in the endpoint comparison.
    pub k: f64,
    pub b_star: f64,
    /// Levels for the `G` solve.
    pub levels: Vec<u32>,
    pub max_level: u32,
    /// Levels for aperture sweeps.
    pub sweep_levels: Vec<u32>,
    pub corollary_samples: usize,
    pub stretch_triangles: usize,
    pub stretch_level: u32,
    pub grid: usize,
    pub tail_max: usize,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            k: 0.967,
            b_star: 2.14,
            levels: vec![5, 6, 7],
            max_level: 9,
            sweep_levels: vec![4, 5, 6],
            corollary_samples: 34,
            stretch_triangles: 20,
            stretch_level: 4,
            grid: 200,
            tail_max: 1_000_000,
            seed: 2011,
        }
    }
}

/// Keys accepted in a config file, with their defaults in the `--help` text.
pub const CONFIG_KEYS: &[(&str, &str)] = &[
    ("k", "0.967  constant K in the endpoint comparison"),
    ("b_star", "2.14   endpoint height b*"),
    ("levels", "5,6,7  refinement levels for the G solve"),
    ("max_level", "9      largest mesh level allowed"),
    ("sweep_levels", "4,5,6  refinement levels for aperture sweeps"),
    ("corollary_samples", "34     apertures in the mu3 sweep, π/3 included"),
    ("stretch_triangles", "20     random triangles in the stretching check"),
    ("stretch_level", "4      mesh level in the stretching check"),
    ("grid", "200    side of the (gamma, b) grid"),
    ("tail_max", "1000000 largest index in the tail scan"),
    ("seed", "2011   RNG seed"),
];

fn parse_levels(v: &str) -> Result<Vec<u32>> {
    v.split(',')
        .map(|s| s.trim().parse::<u32>().map_err(|e| Error::Config(format!("bad level {s:?}: {e}"))))
        .collect()
}

fn parse<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| Error::Config(format!("{key}: cannot parse {v:?}: {e}")))
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Config::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "k" => c.k = parse(key, value)?,
                "b_star" => c.b_star = parse(key, value)?,
                "levels" => c.levels = parse_levels(value)?,
                "max_level" => c.max_level = parse(key, value)?,
                "sweep_levels" => c.sweep_levels = parse_levels(value)?,
                "corollary_samples" => c.corollary_samples = parse(key, value)?,
                "stretch_triangles" => c.stretch_triangles = parse(key, value)?,
                "stretch_level" => c.stretch_level = parse(key, value)?,
                "grid" => c.grid = parse(key, value)?,
                "tail_max" => c.tail_max = parse(key, value)?,
                "seed" => c.seed = parse(key, value)?,
                other => return Err(Error::Config(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The configured levels, shifted down so the finest does not exceed `max_level`.
    pub fn capped(levels: &[u32], max_level: u32) -> Vec<u32> {
        let top = levels.iter().copied().max().unwrap_or(0);
        if top <= max_level {
            return levels.to_vec();
        }
        let shift = top - max_level;
        levels.iter().filter(|&&l| l >= shift).map(|&l| l - shift).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Error => "ERROR",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: Status,
    /// Smallest margin observed, when the check has one.
    pub margin: Option<f64>,
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let margin = c.margin.map_or_else(String::new, |m| format!(" margin={m:.6e}"));
            s.push_str(&format!(
                "[{}] {:<28} {:>8.2?}{margin}  {}\n",
                c.status, c.name, c.elapsed, c.detail
            ));
        }
        s.push_str(if self.passed() { "all checks passed\n" } else { "verification FAILED\n" });
        s
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.name.to_string(),
                    c.status.to_string(),
                    c.margin.map_or_else(String::new, |m| m.to_string()),
                    c.detail.clone(),
                ]
            })
            .collect()
    }
}

pub const REPORT_HEADER: [&str; 4] = ["check", "status", "margin", "detail"];

type Outcome = Result<(bool, Option<f64>, String)>;

fn run(name: &'static str, f: impl FnOnce() -> Outcome) -> CheckResult {
    let t0 = Instant::now();
    let (status, margin, detail) = match f() {
        Ok((ok, m, d)) => (if ok { Status::Pass } else { Status::Fail }, m, d),
        Err(e) => (Status::Error, None, e.to_string()),
    };
    log::info!("{name}: {status}");
    CheckResult {
        name,
        status,
        margin,
        detail,
        elapsed: t0.elapsed(),
    }
}

/// Eigenvalue multiples of `E₁` found by sorting every pair with `m, n ≤ bound`.
pub fn brute_force_multiples(count: usize, class: SymmetryClass, bound: u32) -> Vec<u64> {
    let mut v: Vec<u64> = (0..=bound)
        .flat_map(|m| (0..=bound).map(move |n| (m, n)))
        .filter(|&(m, n)| class.contains(m, n))
        .map(|(m, n)| IndexPair(m, n).equilateral_multiple())
        .collect();
    v.sort_unstable();
    v.truncate(count);
    v
}

pub fn check_exact_spectra() -> Outcome {
    let first: Vec<u64> = equilateral_modes(10, SymmetryClass::All)?.iter().map(|p| p.equilateral_multiple()).collect();
    let mut ok = first == [0, 1, 1, 3, 4, 4, 7, 7, 9, 9];
    for class in [SymmetryClass::All, SymmetryClass::Symmetric] {
        let got: Vec<u64> = equilateral_modes(200, class)?.iter().map(|p| p.equilateral_multiple()).collect();
        ok &= got == brute_force_multiples(200, class, 60);
    }
    Ok((ok, None, format!("first ten multiples {first:?}; 200 full and symmetric match enumeration")))
}

pub fn check_ratio_lemma() -> Outcome {
    let rows = ratio_table(200)?;
    let fails: Vec<usize> = rows.iter().filter(|r| !r.holds).map(|r| r.j).collect();
    let eq: Vec<usize> = rows.iter().filter(|r| r.equality).map(|r| r.j).collect();
    let ok = fails.is_empty() && eq == [4];
    Ok((ok, None, format!("failures {fails:?}, equality at {eq:?}")))
}

pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

pub fn check_counting() -> Outcome {
    let mut ok = true;
    let mut worst = f64::INFINITY;
    // open at the left end
    for mu in log_spaced(BOUND_VALIDITY_MU * (1.0 + 1e-9), 1e7, 50) {
        let full = counting_function(mu, SymmetryClass::All)?.count as f64;
        let sym = counting_function(mu, SymmetryClass::Symmetric)?.count as f64;
        let b = counting_bounds(mu, SymmetryClass::All)?;
        let bs = counting_bounds(mu, SymmetryClass::Symmetric)?;
        let lower = b.lower.expect("full class has a lower bound");
        ok &= lower < full && full < b.upper && sym < bs.upper;
        worst = worst.min(full - lower).min(b.upper - full).min(bs.upper - sym);
    }
    let n0 = counting_function(BOUND_VALIDITY_MU + 1.0, SymmetryClass::All)?.count;
    let s0 = counting_function(BOUND_VALIDITY_MU + 1.0, SymmetryClass::Symmetric)?.count;
    ok &= n0 == 22 && s0 == 13;
    let full = equilateral_modes(200, SymmetryClass::All)?;
    let sym = equilateral_modes(200, SymmetryClass::Symmetric)?;
    for j in MIN_INDEX_ALL..=200 {
        let mu = full[j - 1].equilateral_multiple() as f64 * EQUILATERAL_UNIT;
        let b = invert_bounds(j, SymmetryClass::All)?;
        ok &= b.lower <= mu && mu < b.upper.expect("full class has an upper bound");
    }
    for j in MIN_INDEX_SYMMETRIC..=200 {
        let mu = sym[j - 1].equilateral_multiple() as f64 * EQUILATERAL_UNIT;
        ok &= invert_bounds(j, SymmetryClass::Symmetric)?.lower <= mu;
    }
    Ok((
        ok,
        Some(worst),
        format!("N(48π²+1) = {n0}, Nˢ(48π²+1) = {s0}; 50 sandwich points; inversions for j ≤ 200"),
    ))
}

pub fn check_tail(tail_max: usize) -> Outcome {
    let r = verify_tail_ratio(MIN_TAIL_INDEX, tail_max)?;
    let target = 11.0 / 6.0;
    let spots = [MIN_TAIL_INDEX, 1_000, 1_000_000];
    let spot_ok = spots.iter().all(|&j| tail_quotient(j) > target);
    Ok((
        r.passed() && spot_ok,
        Some(r.min_quotient - target),
        format!(
            "min quotient {:.6} at j={} over {}..={}, monotone={}",
            r.min_quotient, r.argmin, r.jmin, r.jmax, r.monotone
        ),
    ))
}

pub fn check_comparison() -> Outcome {
    let c = comparison_lemma_check()?;
    Ok((
        c.pass,
        Some(c.tail.min_quotient - 11.0 / 6.0),
        format!(
            "n ≤ {}: failures {:?}, equality {:?}, term-wise failures {:?}, n=27 cumulative {}",
            c.jmax, c.failures, c.equality_at, c.termwise_failures, c.cumulative_27
        ),
    ))
}

pub fn check_endpoint(cfg: &Config) -> Outcome {
    let r = endpoint_threshold_check(cfg.b_star, cfg.k, cfg.grid)?;
    Ok((
        r.pass,
        Some(r.right_side_at_sqrt3 - cfg.k),
        format!(
            "right side at √3 = {:.6} vs K = {}; {} grid points pass={}",
            r.right_side_at_sqrt3, cfg.k, r.grid_points, r.grid_all_pass
        ),
    ))
}

pub fn check_gamma_worst() -> Outcome {
    let v = gamma_worst_bound();
    let s = gamma_worst_scan(10_000)?;
    let ok = (v - 2.1344).abs() < 1e-3 && s.strictly_decreasing && s.argmax == 0.75;
    Ok((ok, None, format!("sup = {v:.6}, decreasing={}", s.strictly_decreasing)))
}

pub fn check_exceptional(cfg: &Config, opts: &SolverOptions) -> Outcome {
    let levels = Config::capped(&cfg.levels, cfg.max_level);
    let g = triangle_g();
    let th = exceptional_thresholds(cfg.k)?;
    let x = match solve_extrapolated_with(&g, 9, &levels, cfg.max_level, opts) {
        Ok(x) => x,
        Err(e) => {
            return Ok((
                false,
                None,
                format!("insufficient margin: cannot resolve 9 eigenpairs on levels {levels:?} ({e})"),
            ))
        }
    };
    let r = verify_exceptional(&x.spectrum, &th)?;
    let margin = r.rows.iter().filter_map(|r| r.margin).fold(f64::INFINITY, f64::min);
    let detail = r
        .rows
        .iter()
        .filter(|r| r.n >= 4)
        .map(|r| match r.threshold {
            Some(t) => format!("n={} {:.2}>{:.2}", r.n, r.value, t),
            None => format!("n={} {:.2}", r.n, r.value),
        })
        .collect::<Vec<_>>()
        .join(", ");
    let detail = if r.pass { detail } else { format!("insufficient margin: {detail}") };
    Ok((r.pass, Some(margin), format!("levels {levels:?}: {detail}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorollaryRow {
    pub alpha: f64,
    pub value: f64,
    pub error: f64,
}

/// `μ₃D²` over the aperture grid of the figure, `[π/7, 2π/3]`.
pub fn mu3_corollary_rows(samples: usize, levels: &[u32], opts: &SolverOptions) -> Result<Vec<CorollaryRow>> {
    use rayon::prelude::*;
    let (lo, hi) = (PI / 7.0, 2.0 * PI / 3.0);
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let alpha = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let (v, e) = aperture_values(alpha, &[3], levels, opts)?;
            Ok(CorollaryRow {
                alpha,
                value: v[0],
                error: e[0],
            })
        })
        .collect()
}

pub fn check_mu3(cfg: &Config, opts: &SolverOptions) -> Outcome {
    let levels = Config::capped(&cfg.sweep_levels, cfg.max_level);
    let rows = mu3_corollary_rows(cfg.corollary_samples.max(3), &levels, opts)?;
    let floor = EQUILATERAL_UNIT;
    let margin = rows.iter().map(|r| r.value + r.error - floor).fold(f64::INFINITY, f64::min);
    let closest = rows
        .iter()
        .min_by(|a, b| (a.value - floor).total_cmp(&(b.value - floor)))
        .expect("rows");
    let ok = margin >= 0.0 && (closest.alpha - PI / 3.0).abs() < 0.1;
    Ok((
        ok,
        Some(margin),
        format!(
            "min μ₃D² − 16π²/9 = {:.3e} at α = {:.4}",
            closest.value - floor,
            closest.alpha
        ),
    ))
}

/// A triangle with vertices uniform in the unit square and no angle below 10°.
pub fn random_triangle(rng: &mut impl Rng) -> TriangleDomain {
    loop {
        let p: Vec<Point> = (0..3).map(|_| Point::new(rng.random(), rng.random())).collect();
        if let Ok(t) = TriangleDomain::new(p[0], p[1], p[2]) {
            if (0..3).all(|i| t.angle(i) > 10f64.to_radians()) {
                return t;
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StretchRow {
    pub triangle: usize,
    pub factor: f64,
    pub j: usize,
    pub original: f64,
    pub stretched: f64,
}

/// Discrete eigenvalues before and after stretching `y` by each factor, on
/// the mapped mesh.
pub fn stretching_rows(triangles: usize, factors: &[f64], level: u32, seed: u64, opts: &SolverOptions) -> Result<Vec<StretchRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let count = 10;
    let mut rows = Vec::new();
    for k in 0..triangles {
        let t = random_triangle(&mut rng);
        let m = Mesh::uniform(&t, level, level)?;
        let base = solve_neumann_with(&m, count, opts)?;
        for &f in factors {
            let s = solve_neumann_with(&m.mapped(&stretch_map(f, [0.0, 1.0])?)?, count, opts)?;
            for j in 2..=count {
                rows.push(StretchRow {
                    triangle: k,
                    factor: f,
                    j,
                    original: base.spectrum.mu(j)?,
                    stretched: s.spectrum.mu(j)?,
                });
            }
        }
    }
    Ok(rows)
}

pub fn check_stretching(cfg: &Config, opts: &SolverOptions) -> Outcome {
    let rows = stretching_rows(cfg.stretch_triangles, &[1.1, 2.0, 5.0], cfg.stretch_level, cfg.seed, opts)?;
    let margin = rows
        .iter()
        .map(|r| (r.original * (1.0 + 1e-8) - r.stretched) / r.original)
        .fold(f64::INFINITY, f64::min);
    Ok((
        margin >= 0.0,
        Some(margin),
        format!("{} comparisons, {} triangles, factors 1.1/2/5", rows.len(), cfg.stretch_triangles),
    ))
}

/// Every check, in order.
pub fn verify_all(cfg: &Config) -> VerifyReport {
    let opts = SolverOptions {
        seed: cfg.seed,
        ..SolverOptions::default()
    };
    let checks = vec![
        run("exact spectra", check_exact_spectra),
        run("ratio lemma", check_ratio_lemma),
        run("counting bounds", check_counting),
        run("tail ratio", || check_tail(cfg.tail_max)),
        run("comparison lemma", check_comparison),
        run("endpoint threshold", || check_endpoint(cfg)),
        run("gamma worst bound", check_gamma_worst),
        run("exceptional thresholds", || check_exceptional(cfg, &opts)),
        run("mu3 corollary", || check_mu3(cfg, &opts)),
        run("stretching", || check_stretching(cfg, &opts)),
    ];
    VerifyReport { checks }
}

/// Parses a config by path; `None` gives the defaults.
pub fn verify_all_from(path: Option<&Path>) -> Result<VerifyReport> {
    let cfg = match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    Ok(verify_all(&cfg))
}

/// Map form of a config, for printing.
pub fn config_entries(cfg: &Config) -> BTreeMap<&'static str, String> {
    let levels = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    BTreeMap::from([
        ("k", cfg.k.to_string()),
        ("b_star", cfg.b_star.to_string()),
        ("levels", levels(&cfg.levels)),
        ("max_level", cfg.max_level.to_string()),
        ("sweep_levels", levels(&cfg.sweep_levels)),
        ("corollary_samples", cfg.corollary_samples.to_string()),
        ("stretch_triangles", cfg.stretch_triangles.to_string()),
        ("stretch_level", cfg.stretch_level.to_string()),
        ("grid", cfg.grid.to_string()),
        ("tail_max", cfg.tail_max.to_string()),
        ("seed", cfg.seed.to_string()),
    ])
}
