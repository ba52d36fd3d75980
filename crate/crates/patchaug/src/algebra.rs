//! Subsequence algebra: selectors, selector families, coverage, and exact
//! reconstruction.
//!
//! A selector picks an ordered index subset out of a length-`d` sequence.
//! A family of selectors that covers every index supports exact
//! reconstruction of the sequence from its zero-filled projections: sum the
//! projections and divide elementwise by the per-index coverage count.
//!
//! The ratio `|family| / min coverage` bounds how much a mean per-selector
//! L1 discrepancy can amplify at the whole-sequence level. For the family
//! of all length-`d'` subsequences it collapses to `d/d'`; for all
//! `n'×n'` windows of an `n×n` grid it is `(n−n'+1)²` because corner
//! cells are covered exactly once.

use crate::error::{Error, Result};

/// Upper bound on the number of selectors `enumerate_all_subsequences`
/// will materialize.
pub const DEFAULT_ENUMERATION_CAP: usize = 1_000_000;

/// A length-`d` real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    values: Vec<f64>,
}

impl Sequence {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::DimensionMismatch("sequence must have length >= 1".into()));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sequence entry {i} is not finite")));
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// An ordered index subset of `[0, seq_len)`, the sparse form of a binary
/// selection matrix with one 1 per row and at most one 1 per column.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Selector {
    indices: Vec<usize>,
    seq_len: usize,
}

impl Selector {
    /// Indices must be strictly increasing and lie in `[0, seq_len)`.
    pub fn new(indices: Vec<usize>, seq_len: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSelector("selector must pick at least one index".into()));
        }
        if !indices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidSelector("indices must be strictly increasing".into()));
        }
        let last = *indices.last().expect("non-empty");
        if last >= seq_len {
            return Err(Error::InvalidSelector(format!(
                "index {last} out of range for sequence length {seq_len}"
            )));
        }
        Ok(Self { indices, seq_len })
    }

    /// Selects every index of a length-`seq_len` sequence.
    pub fn identity(seq_len: usize) -> Result<Self> {
        Self::new((0..seq_len).collect(), seq_len)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Length of the sequences this selector applies to.
    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    /// Length of the subsequence this selector produces.
    pub fn sub_len(&self) -> usize {
        self.indices.len()
    }
}

/// A non-empty set of distinct selectors sharing the same sequence length
/// and subsequence length.
///
/// Construction checks only those structural constraints; whether the
/// family covers every index (the condition for reconstruction) is a
/// separate question answered by [`validate_family`], so that deliberately
/// incomplete families can be built and inspected.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectorFamily {
    selectors: Vec<Selector>,
    seq_len: usize,
    sub_len: usize,
}

impl SelectorFamily {
    pub fn new(selectors: Vec<Selector>) -> Result<Self> {
        let first = selectors
            .first()
            .ok_or_else(|| Error::InvalidFamily("family must contain at least one selector".into()))?;
        let seq_len = first.seq_len();
        let sub_len = first.sub_len();
        for sel in &selectors {
            if sel.seq_len() != seq_len || sel.sub_len() != sub_len {
                return Err(Error::InvalidFamily(format!(
                    "all selectors must share dimensions ({seq_len}, {sub_len}); found ({}, {})",
                    sel.seq_len(),
                    sel.sub_len()
                )));
            }
        }
        let mut sorted: Vec<&Selector> = selectors.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidFamily("duplicate selectors".into()));
        }
        Ok(Self { selectors, seq_len, sub_len })
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.selectors
    }

    /// Number of selectors in the family.
    pub fn len(&self) -> usize {
        self.selectors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn seq_len(&self) -> usize {
        self.seq_len
    }

    pub fn sub_len(&self) -> usize {
        self.sub_len
    }

    /// One selector per line, space-separated indices. Debug format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for sel in &self.selectors {
            let line: Vec<String> = sel.indices().iter().map(|i| i.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Parses the [`to_text`](Self::to_text) format. Blank lines are skipped.
    pub fn from_text(text: &str, seq_len: usize) -> Result<Self> {
        let mut selectors = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut indices = Vec::new();
            for tok in line.split_whitespace() {
                let idx: usize = tok.parse().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("invalid index `{tok}`"),
                })?;
                indices.push(idx);
            }
            selectors.push(Selector::new(indices, seq_len)?);
        }
        Self::new(selectors)
    }
}

/// Square grid dimensions for the 2D window family: `side × side` grids
/// with `patch_side × patch_side` windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    side: usize,
    patch_side: usize,
}

impl GridShape {
    pub fn new(side: usize, patch_side: usize) -> Result<Self> {
        if side == 0 || patch_side == 0 {
            return Err(Error::Config("grid and patch sides must be positive".into()));
        }
        if patch_side > side {
            return Err(Error::Config(format!(
                "patch side {patch_side} exceeds grid side {side}"
            )));
        }
        Ok(Self { side, patch_side })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    /// Sequence length of the row-major vectorized grid.
    pub fn seq_len(&self) -> usize {
        self.side * self.side
    }

    /// Number of contiguous windows: `(side − patch_side + 1)²`.
    pub fn num_patches(&self) -> usize {
        let span = self.side - self.patch_side + 1;
        span * span
    }
}

/// Extracts the subsequence `x[sel]`.
pub fn apply_selector(sel: &Selector, x: &Sequence) -> Result<Sequence> {
    check_len(sel, x)?;
    let values = sel.indices().iter().map(|&i| x.values()[i]).collect();
    Sequence::new(values)
}

/// Scatters the selected entries back into a length-`d` vector, zero
/// elsewhere.
pub fn project(sel: &Selector, x: &Sequence) -> Result<Sequence> {
    check_len(sel, x)?;
    let mut values = vec![0.0; x.len()];
    for &i in sel.indices() {
        values[i] = x.values()[i];
    }
    Sequence::new(values)
}

fn check_len(sel: &Selector, x: &Sequence) -> Result<()> {
    if sel.seq_len() != x.len() {
        return Err(Error::DimensionMismatch(format!(
            "selector expects length {}, sequence has length {}",
            sel.seq_len(),
            x.len()
        )));
    }
    Ok(())
}

/// Per-index count of the selectors containing that index.
pub fn coverage(fam: &SelectorFamily) -> Vec<usize> {
    let mut counts = vec![0usize; fam.seq_len()];
    for sel in fam.selectors() {
        for &i in sel.indices() {
            counts[i] += 1;
        }
    }
    counts
}

/// True iff every index is contained in at least one selector.
pub fn validate_family(fam: &SelectorFamily) -> bool {
    coverage(fam).iter().all(|&c| c >= 1)
}

/// Recovers the original sequence from its per-selector projections:
/// elementwise sum divided by coverage.
///
/// `projections` must be full-length projections aligned with
/// `fam.selectors()` order.
pub fn reconstruct(fam: &SelectorFamily, projections: &[Sequence]) -> Result<Sequence> {
    if projections.len() != fam.len() {
        return Err(Error::DimensionMismatch(format!(
            "expected {} projections, got {}",
            fam.len(),
            projections.len()
        )));
    }
    let d = fam.seq_len();
    let counts = coverage(fam);
    if let Some(index) = counts.iter().position(|&c| c == 0) {
        return Err(Error::CoverageZero { index });
    }
    let mut sum = vec![0.0; d];
    for p in projections {
        if p.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "projection has length {}, expected {d}",
                p.len()
            )));
        }
        for (s, v) in sum.iter_mut().zip(p.values()) {
            *s += v;
        }
    }
    for (s, &c) in sum.iter_mut().zip(&counts) {
        *s /= c as f64;
    }
    Sequence::new(sum)
}

/// The family of all `C(d, sub_len)` subsequences of length `sub_len`,
/// subject to [`DEFAULT_ENUMERATION_CAP`].
pub fn enumerate_all_subsequences(d: usize, sub_len: usize) -> Result<SelectorFamily> {
    enumerate_all_subsequences_with_cap(d, sub_len, DEFAULT_ENUMERATION_CAP)
}

/// As [`enumerate_all_subsequences`] with an explicit selector-count cap.
pub fn enumerate_all_subsequences_with_cap(
    d: usize,
    sub_len: usize,
    cap: usize,
) -> Result<SelectorFamily> {
    if sub_len == 0 || sub_len > d {
        return Err(Error::Config(format!(
            "subsequence length {sub_len} must lie in [1, {d}]"
        )));
    }
    let count = binomial(d, sub_len);
    if count > cap as u128 {
        return Err(Error::EnumerationTooLarge { requested: count, cap });
    }
    let mut selectors = Vec::with_capacity(count as usize);
    // Lexicographic combination walk.
    let mut comb: Vec<usize> = (0..sub_len).collect();
    loop {
        selectors.push(Selector::new(comb.clone(), d)?);
        // Advance to the next combination, rightmost movable index first.
        let mut i = sub_len;
        loop {
            if i == 0 {
                return SelectorFamily::new(selectors);
            }
            i -= 1;
            if comb[i] < d - (sub_len - i) {
                comb[i] += 1;
                for j in i + 1..sub_len {
                    comb[j] = comb[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// The family of all contiguous `patch_side × patch_side` windows of a
/// row-major vectorized `side × side` grid.
pub fn enumerate_2d_patches(shape: GridShape) -> Result<SelectorFamily> {
    let span = shape.side() - shape.patch_side() + 1;
    let mut selectors = Vec::with_capacity(span * span);
    for top in 0..span {
        for left in 0..span {
            let mut indices = Vec::with_capacity(shape.patch_side() * shape.patch_side());
            for r in 0..shape.patch_side() {
                for c in 0..shape.patch_side() {
                    indices.push((top + r) * shape.side() + (left + c));
                }
            }
            selectors.push(Selector::new(indices, shape.seq_len())?);
        }
    }
    SelectorFamily::new(selectors)
}

/// The amplification factor `|family| / min coverage`.
///
/// Errors if the family leaves any index uncovered.
pub fn bound_factor(fam: &SelectorFamily) -> Result<f64> {
    let counts = coverage(fam);
    let min = counts.iter().copied().min().expect("family is non-empty");
    if min == 0 {
        let index = counts.iter().position(|&c| c == 0).expect("min is zero");
        return Err(Error::CoverageZero { index });
    }
    Ok(fam.len() as f64 / min as f64)
}

/// Closed forms of the two special-case factors: `d/sub_len` for the
/// all-subsequence family and `(side − patch_side + 1)²` for the 2D window
/// family. Each equals `bound_factor` of the corresponding enumerated
/// family.
pub fn corollary_factors(d: usize, sub_len: usize, side: usize, patch_side: usize) -> (f64, f64) {
    let span = (side - patch_side + 1) as f64;
    (d as f64 / sub_len as f64, span * span)
}

/// `C(n, k)` in u128; callers cap the result well below overflow range.
pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
