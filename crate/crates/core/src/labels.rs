//! Appliance label sets and binary label matrices.

use alloc::vec;
use alloc::vec::Vec;

/// Set of appliance ids, kept sorted and unique.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LabelSet(Vec<usize>);

impl LabelSet {
    pub fn empty() -> Self {
        LabelSet(Vec::new())
    }

    /// Builds a set from ids in any order; duplicates collapse.
    pub fn from_ids(ids: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        LabelSet(v)
    }

    pub fn contains(&self, id: usize) -> bool {
        self.0.binary_search(&id).is_ok()
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest member, if any.
    pub fn max_id(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn is_superset_of(&self, other: &LabelSet) -> bool {
        other.0.iter().all(|id| self.contains(*id))
    }
}

impl FromIterator<usize> for LabelSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        LabelSet::from_ids(iter)
    }
}

/// Row-major binary matrix, one row per window and one column per appliance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl LabelMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        LabelMatrix { rows, cols, bits: vec![false; rows * cols] }
    }

    /// Ids `>= cols` are ignored.
    pub fn from_sets(sets: &[LabelSet], cols: usize) -> Self {
        let mut m = LabelMatrix::zeros(sets.len(), cols);
        for (r, set) in sets.iter().enumerate() {
            for &id in set.ids().iter().filter(|id| **id < cols) {
                m.set(r, id, true);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.bits[row * self.cols + col] = value;
    }

    pub fn row(&self, row: usize) -> &[bool] {
        &self.bits[row * self.cols..(row + 1) * self.cols]
    }

    pub fn row_set(&self, row: usize) -> LabelSet {
        LabelSet(self.row(row).iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i).collect())
    }

    /// Number of rows in which column `col` is set.
    pub fn count_column(&self, col: usize) -> usize {
        (0..self.rows).filter(|r| self.get(*r, col)).count()
    }

    /// Keeps the rows in `range`.
    pub fn slice_rows(&self, range: core::ops::Range<usize>) -> LabelMatrix {
        LabelMatrix {
            rows: range.len(),
            cols: self.cols,
            bits: self.bits[range.start * self.cols..range.end * self.cols].to_vec(),
        }
    }
}
