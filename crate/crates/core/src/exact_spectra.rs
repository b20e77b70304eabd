//! Closed-form Neumann spectra.
//!
//! The equilateral triangle of side `s` has eigenvalues
//! `(16π²/9)(m² + mn + n²) / s²` for `m, n ≥ 0`. Pairs with `m ≤ n` carry
//! eigenfunctions symmetric across a bisector, pairs with `m > n` carry
//! antisymmetric ones. All comparisons are made on the integer multiple
//! `m² + mn + n²`; the transcendental factor is applied once at the end.
//!
//! Rectangles `w × h` have eigenvalues `π²(p²/w² + q²/h²)` for `p, q ≥ 0`.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};

/// `16π²/9`: the first nonzero Neumann eigenvalue of the unit equilateral triangle.
pub const EQUILATERAL_UNIT: f64 = 16.0 * PI * PI / 9.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymmetryClass {
    All,
    /// Index pairs with `m ≤ n`.
    Symmetric,
    /// Index pairs with `m > n`.
    Antisymmetric,
}

impl SymmetryClass {
    pub fn contains(self, m: u32, n: u32) -> bool {
        match self {
            SymmetryClass::All => true,
            SymmetryClass::Symmetric => m <= n,
            SymmetryClass::Antisymmetric => m > n,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Exact,
    Fem,
    Extrapolated,
}

/// A lattice label: `(m, n)` for the equilateral triangle, `(p, q)` for rectangles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexPair(pub u32, pub u32);

impl IndexPair {
    /// `m² + mn + n²`, the eigenvalue in units of [`EQUILATERAL_UNIT`].
    pub fn equilateral_multiple(self) -> u64 {
        let (m, n) = (u64::from(self.0), u64::from(self.1));
        m * m + m * n + n * n
    }
}

/// A sorted list of Neumann eigenvalues, indexed from 1.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    labels: Option<Vec<IndexPair>>,
    provenance: Provenance,
    error_estimates: Option<Vec<f64>>,
}

impl Spectrum {
    /// Builds a spectrum from values that must already be nondecreasing.
    pub fn new(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if values.is_empty() {
            return Err(domain("empty spectrum"));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(domain(format!("non-finite eigenvalue at index {}", bad + 1)));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(domain("eigenvalues must be nondecreasing"));
        }
        Ok(Self {
            values,
            labels: None,
            provenance,
            error_estimates: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<IndexPair>) -> Result<Self> {
        if labels.len() != self.values.len() {
            return Err(domain("label count differs from value count"));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_error_estimates(mut self, errors: Vec<f64>) -> Result<Self> {
        if self.provenance == Provenance::Exact {
            return Err(domain("exact spectra carry no error estimates"));
        }
        if errors.len() != self.values.len() {
            return Err(domain("error estimate count differs from value count"));
        }
        if errors.iter().any(|e| !(*e >= 0.0)) {
            return Err(domain("error estimates must be nonnegative"));
        }
        self.error_estimates = Some(errors);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[IndexPair]> {
        self.labels.as_deref()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn error_estimates(&self) -> Option<&[f64]> {
        self.error_estimates.as_deref()
    }

    /// The `j`-th eigenvalue, counting from `j = 1` (which is 0 for Neumann spectra).
    pub fn mu(&self, j: usize) -> Result<f64> {
        if j == 0 || j > self.values.len() {
            return Err(Error::Range {
                requested: j,
                available: self.values.len(),
            });
        }
        Ok(self.values[j - 1])
    }

    /// `μ₂ + … + μₙ`.
    pub fn eigenvalue_sum(&self, n: usize) -> Result<f64> {
        eigenvalue_sum(self, n)
    }

    /// Sum of the error estimates over indices `2..=n`, if any are attached.
    pub fn error_sum(&self, n: usize) -> Option<f64> {
        let errs = self.error_estimates.as_ref()?;
        if n < 2 || n > errs.len() {
            return None;
        }
        Some(errs[1..n].iter().sum())
    }

    /// Multiplies every value (and error estimate) by `factor`.
    pub fn scaled(&self, factor: f64) -> Spectrum {
        Spectrum {
            values: self.values.iter().map(|v| v * factor).collect(),
            labels: self.labels.clone(),
            provenance: self.provenance,
            error_estimates: self
                .error_estimates
                .as_ref()
                .map(|e| e.iter().map(|x| x * factor.abs()).collect()),
        }
    }

    /// The first `count` entries.
    pub fn truncated(&self, count: usize) -> Spectrum {
        let count = count.min(self.values.len());
        Spectrum {
            values: self.values[..count].to_vec(),
            labels: self.labels.as_ref().map(|l| l[..count].to_vec()),
            provenance: self.provenance,
            error_estimates: self.error_estimates.as_ref().map(|e| e[..count].to_vec()),
        }
    }
}

/// `(16π²/9)(m² + mn + n²)/side²`.
pub fn equilateral_eigenvalue(m: u32, n: u32, side: f64) -> Result<f64> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(domain(format!("side length must be positive, got {side}")));
    }
    Ok(EQUILATERAL_UNIT * IndexPair(m, n).equilateral_multiple() as f64 / (side * side))
}

/// Every lattice pair of `class` with `m² + mn + n² ≤ bound`.
fn lattice_pairs_up_to(bound: u64, class: SymmetryClass) -> Vec<IndexPair> {
    let mut out = Vec::new();
    let mut m: u64 = 0;
    while m * m <= bound {
        let mut n: u64 = 0;
        while m * m + m * n + n * n <= bound {
            if class.contains(m as u32, n as u32) {
                out.push(IndexPair(m as u32, n as u32));
            }
            n += 1;
        }
        m += 1;
    }
    out
}

/// The first `count` equilateral lattice labels of `class`, sorted by
/// eigenvalue with ties broken lexicographically in `(m, n)`.
///
/// The search bound doubles until more than `count` pairs lie at or below it.
/// Since `m² + mn + n²` is increasing in each index, every pair not visited
/// has a strictly larger multiple, so the returned prefix is exhaustive.
pub fn equilateral_modes(count: usize, class: SymmetryClass) -> Result<Vec<IndexPair>> {
    if count == 0 {
        return Err(domain("count must be at least 1"));
    }
    let mut bound: u64 = 16;
    let mut pairs = loop {
        let pairs = lattice_pairs_up_to(bound, class);
        if pairs.len() > count {
            break pairs;
        }
        bound *= 2;
    };
    pairs.sort_by(|a, b| {
        a.equilateral_multiple()
            .cmp(&b.equilateral_multiple())
            .then(a.cmp(b))
    });
    pairs.truncate(count);
    Ok(pairs)
}

pub fn equilateral_spectrum(count: usize, side: f64, class: SymmetryClass) -> Result<Spectrum> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(domain(format!("side length must be positive, got {side}")));
    }
    let modes = equilateral_modes(count, class)?;
    let scale = EQUILATERAL_UNIT / (side * side);
    let values = modes
        .iter()
        .map(|p| scale * p.equilateral_multiple() as f64)
        .collect();
    Spectrum::new(values, Provenance::Exact)?.with_labels(modes)
}

/// First `count` values of `π²(p²/width² + q²/height²)`, ascending.
pub fn rectangle_spectrum(width: f64, height: f64, count: usize) -> Result<Spectrum> {
    if !(width > 0.0 && height > 0.0) || !width.is_finite() || !height.is_finite() {
        return Err(domain(format!(
            "rectangle sides must be positive, got {width} x {height}"
        )));
    }
    if count == 0 {
        return Err(domain("count must be at least 1"));
    }
    let value = |p: u32, q: u32| {
        let (p, q) = (f64::from(p), f64::from(q));
        PI * PI * (p * p / (width * width) + q * q / (height * height))
    };
    let longest = width.max(height);
    // bound chosen so that the first sweep usually suffices
    let mut bound = PI * PI / (longest * longest) * (count as f64 + 4.0);
    loop {
        let pmax = (width * bound.sqrt() / PI).floor() as u32;
        let qmax = (height * bound.sqrt() / PI).floor() as u32;
        let mut modes: Vec<(f64, IndexPair)> = (0..=pmax)
            .flat_map(|p| (0..=qmax).map(move |q| (p, q)))
            .map(|(p, q)| (value(p, q), IndexPair(p, q)))
            .filter(|(v, _)| *v <= bound)
            .collect();
        if modes.len() > count {
            modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            modes.truncate(count);
            let (values, labels): (Vec<_>, Vec<_>) = modes.into_iter().unzip();
            return Spectrum::new(values, Provenance::Exact)?.with_labels(labels);
        }
        bound *= 2.0;
    }
}

/// `Mₙ = μ₂ + … + μₙ`; the zero eigenvalue is omitted.
pub fn eigenvalue_sum(s: &Spectrum, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(domain(format!("eigenvalue sums start at n = 2, got {n}")));
    }
    if n > s.len() {
        return Err(Error::Range {
            requested: n,
            available: s.len(),
        });
    }
    Ok(s.values[1..n].iter().sum())
}

/// `Mₙ · D²`, the scale-invariant eigenvalue sum.
pub fn normalized_sum(s: &Spectrum, diameter: f64, n: usize) -> Result<f64> {
    if !(diameter > 0.0) {
        return Err(domain(format!("diameter must be positive, got {diameter}")));
    }
    Ok(eigenvalue_sum(s, n)? * diameter * diameter)
}

/// Which inequality the symmetric-to-full ratio must satisfy at a given `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RatioBound {
    /// `Mⱼˢ > (11/6) Mⱼ`, strict.
    ElevenSixths,
    /// `Mⱼˢ ≥ (8/5) Mⱼ`.
    EightFifths,
}

impl RatioBound {
    pub fn for_index(j: usize) -> Option<RatioBound> {
        match j {
            3 | 6 => Some(RatioBound::ElevenSixths),
            4 | 5 | 7 | 8 | 9 => Some(RatioBound::EightFifths),
            j if j >= 10 => Some(RatioBound::ElevenSixths),
            _ => None,
        }
    }

    /// `(numerator, denominator)` of the bound.
    pub fn fraction(self) -> (u64, u64) {
        match self {
            RatioBound::ElevenSixths => (11, 6),
            RatioBound::EightFifths => (8, 5),
        }
    }

    pub fn value(self) -> f64 {
        let (p, q) = self.fraction();
        p as f64 / q as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub j: usize,
    /// `Mⱼˢ` in units of `16π²/9`.
    pub symmetric_sum: u64,
    /// `Mⱼ` in units of `16π²/9`.
    pub full_sum: u64,
    pub ratio: f64,
    pub bound: Option<RatioBound>,
    /// The bound holds (strictly for 11/6, non-strictly for 8/5).
    pub holds: bool,
    /// The ratio equals the bound exactly.
    pub equality: bool,
}

/// Symmetric-to-full eigenvalue sum ratios of the unit equilateral triangle
/// for `j = 2..=jmax`, compared exactly in integer arithmetic.
pub fn ratio_table(jmax: usize) -> Result<Vec<RatioRow>> {
    if jmax < 2 {
        return Err(domain(format!("jmax must be at least 2, got {jmax}")));
    }
    let full = equilateral_modes(jmax, SymmetryClass::All)?;
    let sym = equilateral_modes(jmax, SymmetryClass::Symmetric)?;
    let mut rows = Vec::with_capacity(jmax - 1);
    let (mut fs, mut ss) = (0u64, 0u64);
    for j in 2..=jmax {
        fs += full[j - 1].equilateral_multiple();
        ss += sym[j - 1].equilateral_multiple();
        let bound = RatioBound::for_index(j);
        let (holds, equality) = match bound {
            Some(b) => {
                let (p, q) = b.fraction();
                let lhs = q * ss;
                let rhs = p * fs;
                let holds = match b {
                    RatioBound::ElevenSixths => lhs > rhs,
                    RatioBound::EightFifths => lhs >= rhs,
                };
                (holds, lhs == rhs)
            }
            None => (true, false),
        };
        rows.push(RatioRow {
            j,
            symmetric_sum: ss,
            full_sum: fs,
            ratio: ss as f64 / fs as f64,
            bound,
            holds,
            equality,
        });
    }
    Ok(rows)
}

/// Term-wise comparison `6 μⱼˢ > 11 μⱼ` on the unit equilateral triangle, for
/// `j` in `jmin..=jmax`. Returns the indices where it fails.
pub fn termwise_ratio_failures(jmin: usize, jmax: usize) -> Result<Vec<usize>> {
    if jmin < 1 || jmin > jmax {
        return Err(domain(format!("invalid index range {jmin}..={jmax}")));
    }
    let full = equilateral_modes(jmax, SymmetryClass::All)?;
    let sym = equilateral_modes(jmax, SymmetryClass::Symmetric)?;
    Ok((jmin..=jmax)
        .filter(|&j| {
            6 * sym[j - 1].equilateral_multiple() <= 11 * full[j - 1].equilateral_multiple()
        })
        .collect())
}

/// Compares two label lists as multisets within each block of equal
/// equilateral multiples. Returns the 1-based indices where the multiple
/// differs or where a tie block holds different pairs.
pub fn diff_tie_blocks(expected: &[IndexPair], actual: &[IndexPair]) -> Vec<usize> {
    let mut diffs = Vec::new();
    let len = expected.len().min(actual.len());
    let mut start = 0;
    while start < len {
        let k = actual[start].equilateral_multiple();
        let mut end = start + 1;
        while end < len && actual[end].equilateral_multiple() == k {
            end += 1;
        }
        let mut a: Vec<_> = actual[start..end].to_vec();
        let mut e: Vec<_> = expected[start..end].to_vec();
        a.sort();
        e.sort();
        // equal lengths, so a differing multiset always has an expected pair missing from `a`
        if a != e {
            diffs.extend((start..end).filter(|&i| !a.contains(&expected[i])).map(|i| i + 1));
        }
        start = end;
    }
    if expected.len() != actual.len() {
        diffs.push(len + 1);
    }
    diffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn multiples(count: usize, class: SymmetryClass) -> Vec<u64> {
        equilateral_modes(count, class)
            .unwrap()
            .iter()
            .map(|p| p.equilateral_multiple())
            .collect()
    }

    #[test]
    fn single_eigenvalues() {
        assert_eq!(equilateral_eigenvalue(0, 0, 1.0).unwrap(), 0.0);
        assert_relative_eq!(equilateral_eigenvalue(1, 0, 1.0).unwrap(), 17.545963, epsilon = 1e-6);
        assert_relative_eq!(
            equilateral_eigenvalue(1, 1, 2.0).unwrap(),
            3.0 * EQUILATERAL_UNIT / 4.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(equilateral_eigenvalue(1, 1, 2.0).unwrap(), 13.1595, epsilon = 1e-4);
        assert!(equilateral_eigenvalue(1, 0, 0.0).is_err());
        assert!(equilateral_eigenvalue(1, 0, -1.0).is_err());
    }

    #[test]
    fn first_multiples() {
        assert_eq!(multiples(6, SymmetryClass::All), vec![0, 1, 1, 3, 4, 4]);
        assert_eq!(multiples(5, SymmetryClass::Symmetric), vec![0, 1, 3, 4, 7]);
        assert_eq!(
            multiples(10, SymmetryClass::All),
            vec![0, 1, 1, 3, 4, 4, 7, 7, 9, 9]
        );
        let modes = equilateral_modes(3, SymmetryClass::All).unwrap();
        assert_eq!(modes, vec![IndexPair(0, 0), IndexPair(0, 1), IndexPair(1, 0)]);
    }

    #[test]
    fn symmetric_and_antisymmetric_merge() {
        let full = multiples(200, SymmetryClass::All);
        let mut merged = multiples(200, SymmetryClass::Symmetric);
        merged.extend(multiples(200, SymmetryClass::Antisymmetric));
        merged.sort();
        assert_eq!(&merged[..200], &full[..]);
    }

    #[test]
    fn rectangle_examples() {
        let pi2 = PI * PI;
        let sq = rectangle_spectrum(1.0, 1.0, 6).unwrap();
        let expect = [0.0, pi2, pi2, 2.0 * pi2, 4.0 * pi2, 4.0 * pi2];
        for (v, e) in sq.values().iter().zip(expect) {
            assert_relative_eq!(*v, e, max_relative = 1e-14);
        }
        let long = rectangle_spectrum(2.0, 1.0, 2).unwrap();
        assert_relative_eq!(long.values()[1], pi2 / 4.0, max_relative = 1e-14);
        assert!(rectangle_spectrum(0.0, 1.0, 2).is_err());
    }

    #[test]
    fn sums() {
        let e = equilateral_spectrum(9, 1.0, SymmetryClass::All).unwrap();
        assert_relative_eq!(eigenvalue_sum(&e, 4).unwrap(), 5.0 * EQUILATERAL_UNIT, max_relative = 1e-14);
        assert_relative_eq!(eigenvalue_sum(&e, 4).unwrap(), 87.7298, epsilon = 1e-4);
        assert_relative_eq!(eigenvalue_sum(&e, 9).unwrap(), 36.0 * EQUILATERAL_UNIT, max_relative = 1e-14);
        assert_eq!(eigenvalue_sum(&e, 2).unwrap(), e.mu(2).unwrap());
        assert!(matches!(eigenvalue_sum(&e, 10), Err(Error::Range { .. })));
        assert!(eigenvalue_sum(&e, 1).is_err());

        let side2 = equilateral_spectrum(4, 2.0, SymmetryClass::All).unwrap();
        assert_relative_eq!(normalized_sum(&side2, 2.0, 4).unwrap(), 87.7298, epsilon = 1e-4);
        let sq = rectangle_spectrum(1.0, 1.0, 5).unwrap();
        assert_relative_eq!(
            normalized_sum(&sq, 2f64.sqrt(), 5).unwrap(),
            16.0 * PI * PI,
            max_relative = 1e-14
        );
    }

    #[test]
    fn ratio_examples() {
        let rows = ratio_table(6).unwrap();
        let row = |j: usize| rows.iter().find(|r| r.j == j).unwrap();
        assert_eq!((row(3).symmetric_sum, row(3).full_sum), (4, 2));
        assert!(row(3).holds);
        assert_eq!((row(4).symmetric_sum, row(4).full_sum), (8, 5));
        assert!(row(4).equality && row(4).holds);
        assert_eq!((row(6).symmetric_sum, row(6).full_sum), (24, 13));
        assert!(row(6).holds);
        assert_eq!(row(2).bound, None);
    }

    #[test]
    fn tie_block_diff_ignores_order_within_ties() {
        let actual = equilateral_modes(6, SymmetryClass::All).unwrap();
        let mut expected = actual.clone();
        expected.swap(1, 2);
        assert!(diff_tie_blocks(&expected, &actual).is_empty());
        expected[5] = IndexPair(3, 3);
        assert_eq!(diff_tie_blocks(&expected, &actual), vec![6]);
    }

    #[test]
    fn spectrum_rejects_unsorted() {
        assert!(Spectrum::new(vec![0.0, 2.0, 1.0], Provenance::Fem).is_err());
        let exact = Spectrum::new(vec![0.0, 1.0], Provenance::Exact).unwrap();
        assert!(exact.with_error_estimates(vec![0.0, 0.0]).is_err());
    }
}
