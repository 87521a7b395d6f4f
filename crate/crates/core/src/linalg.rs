//! Sparse exact linear algebra over the rationals.
//!
//! Rows are stored as sorted `(column, value)` lists without zeros. Everything
//! here is incremental row echelon reduction: rank, subspace membership and
//! nullspaces follow from it without a dense matrix ever being formed.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::scalar::Scalar;

pub type SparseRow = Vec<(usize, Scalar)>;

/// Builds a sparse row from arbitrary `(column, value)` pairs, summing
/// duplicates and dropping zeros.
pub fn sparse_row<I: IntoIterator<Item = (usize, Scalar)>>(entries: I) -> SparseRow {
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    for (c, v) in entries {
        *acc.entry(c).or_insert_with(Scalar::zero) += v;
    }
    acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// `a + factor * b` for sorted sparse rows.
fn axpy(a: &[(usize, Scalar)], factor: &Scalar, b: &[(usize, Scalar)]) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 < b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 < a[i].0);
        if take_a {
            out.push(a[i].clone());
            i += 1;
        } else if take_b {
            out.push((b[j].0, factor * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + factor * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Row echelon basis of a subspace of `Q^n`, keyed by leading column.
/// Every stored row has leading coefficient one.
#[derive(Debug, Clone, Default)]
pub struct Echelon {
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduces `row` against the current pivots until its leading column is
    /// free (or it vanishes).
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        while let Some((lead, coeff)) = row.first().cloned() {
            match self.pivots.get(&lead) {
                Some(p) => row = axpy(&row, &-coeff, p),
                None => break,
            }
        }
        row
    }

    /// Adds `row` to the span. Returns `true` if the rank grew.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let row = self.reduce(row);
        let Some((lead, coeff)) = row.first().cloned() else {
            return false;
        };
        let inv = Scalar::one() / coeff;
        let row = row.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        self.pivots.insert(lead, row);
        true
    }

    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Reduced row echelon form: each pivot column is zero outside its own row.
    pub fn into_reduced(self) -> BTreeMap<usize, SparseRow> {
        let mut done: BTreeMap<usize, SparseRow> = BTreeMap::new();
        for (lead, row) in self.pivots.into_iter().rev() {
            let mut row = row;
            // clear every later pivot column appearing in this row
            loop {
                let hit = row
                    .iter()
                    .skip(1)
                    .find(|(c, _)| done.contains_key(c))
                    .cloned();
                match hit {
                    Some((c, v)) => row = axpy(&row, &-v, &done[&c]),
                    None => break,
                }
            }
            done.insert(lead, row);
        }
        done
    }
}

pub fn rank<I: IntoIterator<Item = SparseRow>>(rows: I) -> usize {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    e.rank()
}

/// Basis of `{ x in Q^ncols : row . x = 0 for every row }`.
///
/// One basis vector per free column `j`: it has a one at `j` and is
/// determined on pivot columns by the reduced echelon form.
pub fn nullspace<I: IntoIterator<Item = SparseRow>>(rows: I, ncols: usize) -> Vec<SparseRow> {
    let mut e = Echelon::new();
    for r in rows {
        e.insert(r);
    }
    let rref = e.into_reduced();
    // column j -> list of (pivot col, coefficient of j in that pivot row)
    let mut by_free: BTreeMap<usize, Vec<(usize, Scalar)>> = BTreeMap::new();
    for (lead, row) in &rref {
        for (c, v) in row.iter().skip(1) {
            by_free.entry(*c).or_default().push((*lead, v.clone()));
        }
    }
    (0..ncols)
        .filter(|j| !rref.contains_key(j))
        .map(|j| {
            let mut v: SparseRow = by_free
                .remove(&j)
                .unwrap_or_default()
                .into_iter()
                .map(|(lead, coeff)| (lead, -coeff))
                .collect();
            v.push((j, Scalar::one()));
            v.sort_by_key(|(c, _)| *c);
            v
        })
        .collect()
}

pub fn dot(a: &[(usize, Scalar)], b: &[(usize, Scalar)]) -> Scalar {
    let (mut i, mut j) = (0, 0);
    let mut acc = Scalar::zero();
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += &a[i].1 * &b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::int;

    fn row(v: &[i64]) -> SparseRow {
        sparse_row(v.iter().enumerate().map(|(c, &x)| (c, int(x))))
    }

    #[test]
    fn rank_of_dependent_rows() {
        let rows = vec![row(&[1, 2, 3]), row(&[2, 4, 6]), row(&[0, 1, 1])];
        assert_eq!(rank(rows), 2);
        assert_eq!(rank(Vec::<SparseRow>::new()), 0);
    }

    #[test]
    fn nullspace_is_annihilated() {
        let rows = vec![row(&[1, 1, 0, 0]), row(&[0, 1, -1, 0]), row(&[1, 0, 1, 0])];
        let ns = nullspace(rows.clone(), 4);
        // rank 2, so 2 free columns
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for r in &rows {
                assert!(dot(r, v).is_zero());
            }
        }
        assert_eq!(rank(ns), 2);
    }

    #[test]
    fn membership() {
        let mut e = Echelon::new();
        e.insert(row(&[1, 0, 1]));
        e.insert(row(&[0, 1, 1]));
        assert!(e.contains(row(&[2, 3, 5])));
        assert!(!e.contains(row(&[0, 0, 1])));
    }

    #[test]
    fn sparse_row_merges_duplicates() {
        let r = sparse_row(vec![(3, int(1)), (1, int(2)), (3, int(-1))]);
        assert_eq!(r, vec![(1, int(2))]);
    }
}
