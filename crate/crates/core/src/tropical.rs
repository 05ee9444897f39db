//! Min-plus matrices over the integers extended by `+inf`, the strict
//! entry-wise order, and pruning of finite matrix sets down to their
//! maximal elements.

use std::cmp::Ordering;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::ser::{SerializeSeq, Serializer};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TropError {
    #[error("integer overflow in min-plus arithmetic")]
    Overflow,
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("matrix of dimension {dim} needs {expected} entries, got {got}")]
    EntryCount { dim: usize, expected: usize, got: usize },
}

/// An integer or `+inf`.
///
/// Variant order makes the derived `Ord` put every finite value below `Inf`
/// and keeps `Inf < Inf` false.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtInt {
    Fin(i64),
    Inf,
}

impl ExtInt {
    pub fn is_finite(self) -> bool {
        matches!(self, ExtInt::Fin(_))
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            ExtInt::Fin(x) => Some(x),
            ExtInt::Inf => None,
        }
    }

    pub fn checked_add(self, other: ExtInt) -> Result<ExtInt, TropError> {
        match (self, other) {
            (ExtInt::Fin(a), ExtInt::Fin(b)) => a.checked_add(b).map(ExtInt::Fin).ok_or(TropError::Overflow),
            _ => Ok(ExtInt::Inf),
        }
    }

    pub fn checked_add_int(self, n: i64) -> Result<ExtInt, TropError> {
        self.checked_add(ExtInt::Fin(n))
    }
}

impl From<i64> for ExtInt {
    fn from(x: i64) -> Self {
        ExtInt::Fin(x)
    }
}

impl fmt::Display for ExtInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtInt::Fin(x) => write!(f, "{x}"),
            ExtInt::Inf => f.write_str("inf"),
        }
    }
}

impl Serialize for ExtInt {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtInt::Fin(x) => s.serialize_i64(*x),
            ExtInt::Inf => s.serialize_str("inf"),
        }
    }
}

/// Square matrix of [`ExtInt`], row-major.
///
/// The derived order is lexicographic over row-major entries with `+inf`
/// greatest; [`MatrixSet`] uses it as its canonical order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TropMatrix {
    dim: usize,
    entries: Vec<ExtInt>,
}

/// Entry-wise extremes of a matrix. `delta` and `norm` are `Inf` unless every entry is finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatrixStats {
    pub max: ExtInt,
    pub min: ExtInt,
    pub delta: ExtInt,
    pub norm: ExtInt,
}

impl TropMatrix {
    pub fn new(dim: usize, entries: Vec<ExtInt>) -> Result<Self, TropError> {
        if entries.len() != dim * dim {
            return Err(TropError::EntryCount {
                dim,
                expected: dim * dim,
                got: entries.len(),
            });
        }
        Ok(TropMatrix { dim, entries })
    }

    /// Convenience for finite matrices; panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let dim = rows.len();
        let entries: Vec<ExtInt> = rows
            .iter()
            .flat_map(|r| {
                let r = r.as_ref();
                assert_eq!(r.len(), dim, "matrix rows must be square");
                r.iter().map(|&x| ExtInt::Fin(x))
            })
            .collect();
        TropMatrix { dim, entries }
    }

    pub fn filled(dim: usize, value: ExtInt) -> Self {
        TropMatrix {
            dim,
            entries: vec![value; dim * dim],
        }
    }

    /// Min-plus identity: 0 on the diagonal, `+inf` elsewhere.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::filled(dim, ExtInt::Inf);
        for i in 0..dim {
            m.entries[i * dim + i] = ExtInt::Fin(0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> ExtInt {
        self.entries[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: ExtInt) {
        self.entries[row * self.dim + col] = value;
    }

    pub fn entries(&self) -> &[ExtInt] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.is_finite())
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ExtInt]> {
        self.entries.chunks(self.dim.max(1))
    }

    /// `(f * g)(u, w) = min_v f(u, v) + g(v, w)`.
    pub fn trop_mul(&self, other: &TropMatrix) -> Result<TropMatrix, TropError> {
        if self.dim != other.dim {
            return Err(TropError::DimMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut out = vec![ExtInt::Inf; n * n];
        for u in 0..n {
            for v in 0..n {
                let a = self.entries[u * n + v];
                if !a.is_finite() {
                    continue;
                }
                for w in 0..n {
                    let s = a.checked_add(other.entries[v * n + w])?;
                    let slot = &mut out[u * n + w];
                    if s < *slot {
                        *slot = s;
                    }
                }
            }
        }
        Ok(TropMatrix { dim: n, entries: out })
    }

    /// `f < g` iff the strict inequality holds at every entry.
    pub fn strictly_less(&self, other: &TropMatrix) -> bool {
        self.dim == other.dim && self.entries.iter().zip(&other.entries).all(|(a, b)| a < b)
    }

    /// Adds `n` to every finite entry.
    pub fn shift(&self, n: i64) -> Result<TropMatrix, TropError> {
        let entries = self
            .entries
            .iter()
            .map(|e| e.checked_add_int(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(TropMatrix { dim: self.dim, entries })
    }

    pub fn max(&self) -> ExtInt {
        self.entries.iter().copied().max().unwrap_or(ExtInt::Inf)
    }

    pub fn min(&self) -> ExtInt {
        self.entries.iter().copied().min().unwrap_or(ExtInt::Inf)
    }

    pub fn stats(&self) -> MatrixStats {
        let max = self.max();
        let min = self.min();
        let (delta, norm) = match (max, min) {
            (ExtInt::Fin(hi), ExtInt::Fin(lo)) if self.is_finite() => {
                let delta = hi.checked_sub(lo).map_or(ExtInt::Inf, ExtInt::Fin);
                let norm = hi.unsigned_abs().max(lo.unsigned_abs());
                (delta, i64::try_from(norm).map_or(ExtInt::Inf, ExtInt::Fin))
            }
            _ => (ExtInt::Inf, ExtInt::Inf),
        };
        MatrixStats { max, min, delta, norm }
    }

    /// Byte-stable encoding: `u32` dimension, then per entry a tag byte
    /// (`0` finite followed by big-endian `i64`, `1` for `+inf`).
    pub fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.dim as u32).to_be_bytes());
        for e in &self.entries {
            match e {
                ExtInt::Fin(x) => {
                    out.push(0);
                    out.extend_from_slice(&x.to_be_bytes());
                }
                ExtInt::Inf => out.push(1),
            }
        }
    }
}

impl fmt::Display for TropMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, row) in self.rows().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str("[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{e}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl Serialize for TropMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.dim))?;
        for row in self.rows() {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

/// Finite set of matrices of one dimension, kept sorted and deduplicated.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct MatrixSet {
    matrices: Vec<TropMatrix>,
}

impl FromIterator<TropMatrix> for MatrixSet {
    fn from_iter<I: IntoIterator<Item = TropMatrix>>(iter: I) -> Self {
        let mut matrices: Vec<TropMatrix> = iter.into_iter().collect();
        matrices.sort_unstable();
        matrices.dedup();
        MatrixSet { matrices }
    }
}

impl MatrixSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, TropMatrix> {
        self.matrices.iter()
    }

    pub fn as_slice(&self) -> &[TropMatrix] {
        &self.matrices
    }

    pub fn contains(&self, m: &TropMatrix) -> bool {
        self.matrices.binary_search(m).is_ok()
    }

    pub fn all_finite(&self) -> bool {
        self.matrices.iter().all(TropMatrix::is_finite)
    }

    /// Elements not strictly dominated by another element.
    pub fn dagger(&self) -> MatrixSet {
        if self.matrices.len() <= INDEXED_DAGGER_MIN {
            return self.dagger_by_scan();
        }
        let index = DominanceIndex::new(&self.matrices);
        let keep = self
            .matrices
            .iter()
            .enumerate()
            .filter(|&(i, f)| !f.is_finite() || !index.dominated(&self.matrices, i))
            .map(|(_, f)| f.clone())
            .collect();
        MatrixSet { matrices: keep }
    }

    /// [`dagger`](Self::dagger) by comparing every pair.
    pub fn dagger_by_scan(&self) -> MatrixSet {
        // f < g forces min f < min g and max f < max g; use that as a cheap filter.
        let bounds: Vec<(ExtInt, ExtInt)> = self.matrices.iter().map(|m| (m.min(), m.max())).collect();
        let keep = self
            .matrices
            .iter()
            .enumerate()
            .filter(|&(i, f)| {
                if !f.is_finite() {
                    return true;
                }
                let (fmin, fmax) = bounds[i];
                !self.matrices.iter().enumerate().any(|(j, g)| {
                    let (gmin, gmax) = bounds[j];
                    fmin < gmin && fmax < gmax && f.strictly_less(g)
                })
            })
            .map(|(_, f)| f.clone())
            .collect();
        MatrixSet { matrices: keep }
    }

    /// All pairwise products `f * g`.
    pub fn set_mul(&self, other: &MatrixSet) -> Result<MatrixSet, TropError> {
        let mut out = Vec::with_capacity(self.len() * other.len());
        for f in &self.matrices {
            for g in &other.matrices {
                out.push(f.trop_mul(g)?);
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Adds `n` to every finite entry of every element. Order is preserved.
    pub fn shift(&self, n: i64) -> Result<MatrixSet, TropError> {
        let matrices = self
            .matrices
            .iter()
            .map(|m| m.shift(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(MatrixSet { matrices })
    }

    pub fn union(&self, other: &MatrixSet) -> MatrixSet {
        self.matrices.iter().chain(&other.matrices).cloned().collect()
    }

    /// `max over A of max f - min over A of min g`; `None` for empty or non-finite sets.
    pub fn delta(&self) -> Option<i64> {
        if self.is_empty() || !self.all_finite() {
            return None;
        }
        let hi = self.matrices.iter().map(TropMatrix::max).max()?.finite()?;
        let lo = self.matrices.iter().map(TropMatrix::min).min()?.finite()?;
        hi.checked_sub(lo)
    }

    /// `u32` element count followed by each matrix in canonical order.
    pub fn write_canonical(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.matrices.len() as u32).to_be_bytes());
        for m in &self.matrices {
            m.write_canonical(out);
        }
    }
}

impl<'a> IntoIterator for &'a MatrixSet {
    type Item = &'a TropMatrix;
    type IntoIter = std::slice::Iter<'a, TropMatrix>;

    fn into_iter(self) -> Self::IntoIter {
        self.matrices.iter()
    }
}

/// Sets at or below this size are pruned by pairwise scan.
const INDEXED_DAGGER_MIN: usize = 64;
/// Bits spent on per-coordinate threshold sets in one [`DominanceIndex`].
const INDEX_BIT_BUDGET: usize = 1 << 29;

/// For a few coordinates, the set of elements strictly above each value on
/// that coordinate. Intersecting them yields candidate dominators.
struct DominanceIndex {
    // (coordinate, rank of each element, above[rank] = elements with larger rank)
    coords: Vec<(usize, Vec<usize>, Vec<FixedBitSet>)>,
    all_coords: bool,
}

impl DominanceIndex {
    fn new(ms: &[TropMatrix]) -> Self {
        let n = ms.len();
        let d = ms[0].entries.len();
        let mut columns: Vec<(usize, Vec<ExtInt>)> = (0..d)
            .map(|c| {
                let mut vals: Vec<ExtInt> = ms.iter().map(|m| m.entries[c]).collect();
                vals.sort_unstable();
                vals.dedup();
                (c, vals)
            })
            .collect();
        // fewest distinct values first: cheapest to index
        columns.sort_by_key(|(_, v)| v.len());
        let mut budget = INDEX_BIT_BUDGET;
        let mut coords = Vec::new();
        for (c, vals) in columns {
            let cost = vals.len() * n;
            if cost > budget && !coords.is_empty() {
                break;
            }
            budget = budget.saturating_sub(cost);
            let rank: Vec<usize> = ms.iter().map(|m| vals.binary_search(&m.entries[c]).unwrap()).collect();
            let mut by_rank: Vec<Vec<usize>> = vec![Vec::new(); vals.len()];
            for (j, &r) in rank.iter().enumerate() {
                by_rank[r].push(j);
            }
            let mut above = vec![FixedBitSet::with_capacity(n); vals.len()];
            for r in (0..vals.len().saturating_sub(1)).rev() {
                let mut set = above[r + 1].clone();
                for &j in &by_rank[r + 1] {
                    set.insert(j);
                }
                above[r] = set;
            }
            coords.push((c, rank, above));
        }
        let all_coords = coords.len() == d;
        DominanceIndex { coords, all_coords }
    }

    fn dominated(&self, ms: &[TropMatrix], i: usize) -> bool {
        let (first, rest) = self.coords.split_first().expect("at least one coordinate");
        let mut acc = first.2[first.1[i]].clone();
        for (_, rank, above) in rest {
            acc.intersect_with(&above[rank[i]]);
        }
        if self.all_coords {
            return acc.ones().next().is_some();
        }
        acc.ones().any(|j| ms[i].strictly_less(&ms[j]))
    }
}

/// Partial comparison under the strict entry-wise order.
pub fn compare_strict(f: &TropMatrix, g: &TropMatrix) -> Option<Ordering> {
    if f == g {
        Some(Ordering::Equal)
    } else if f.strictly_less(g) {
        Some(Ordering::Less)
    } else if g.strictly_less(f) {
        Some(Ordering::Greater)
    } else {
        None
    }
}
