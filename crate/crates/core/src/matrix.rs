//! Trust matrices, incidence patterns and trust vectors.
//!
//! Orientation: `LocalTrustMatrix` stores `T` with `T[(i, j)]` the rating of
//! peer `j` given by peer `i`. The iterations work on the transposed view
//! (row `i` = ratings *received* by peer `i`), which is what
//! [`LocalTrustMatrix::received`] returns and what the analysis routines
//! accept for arbitrary nonnegative matrices.

use std::collections::VecDeque;
use std::ops::Index;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TrustError};

pub const MIN_RATING: f64 = 1.0;
pub const MAX_RATING: f64 = 10.0;

/// Validated `n x n` local trust matrix.
///
/// Entries are zero (no interaction) or a rating in `[1, 10]`; the diagonal is
/// zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct LocalTrustMatrix {
    entries: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl TryFrom<MatrixRepr> for LocalTrustMatrix {
    type Error = TrustError;

    fn try_from(repr: MatrixRepr) -> Result<Self> {
        if repr.entries.len() != repr.n {
            return Err(TrustError::DimensionMismatch {
                expected: repr.n,
                got: repr.entries.len(),
            });
        }
        Self::from_rows(&repr.entries)
    }
}

impl From<LocalTrustMatrix> for MatrixRepr {
    fn from(m: LocalTrustMatrix) -> Self {
        MatrixRepr {
            n: m.n(),
            entries: m.to_rows(),
        }
    }
}

impl LocalTrustMatrix {
    /// Validates a row-major square matrix. Never clamps.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        for (i, row) in rows.iter().enumerate() {
            let len = row.as_ref().len();
            if len != n {
                return Err(TrustError::NonSquare {
                    row: i,
                    len,
                    expected: n,
                });
            }
        }
        if n < 2 {
            return Err(TrustError::TooSmall(n));
        }
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.as_ref().iter().enumerate() {
                if !v.is_finite() {
                    return Err(TrustError::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(TrustError::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if v != 0.0 && !(MIN_RATING..=MAX_RATING).contains(&v) {
                    return Err(TrustError::OutOfScaleEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                if i == j && v != 0.0 {
                    return Err(TrustError::SelfRating { peer: i, value: v });
                }
            }
        }
        let entries = DMatrix::from_fn(n, n, |i, j| rows[i].as_ref()[j]);
        Ok(Self { entries })
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(TrustError::NonSquare {
                row: 0,
                len: m.ncols(),
                expected: m.nrows(),
            });
        }
        let rows: Vec<Vec<f64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    /// Rating of peer `ratee` given by peer `rater`.
    pub fn rating(&self, rater: usize, ratee: usize) -> f64 {
        self.entries[(rater, ratee)]
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `Tᵗ`: row `i` holds the ratings peer `i` received.
    pub fn received(&self) -> DMatrix<f64> {
        self.entries.transpose()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn incidence(&self) -> IncidenceMatrix {
        build_incidence(self)
    }
}

/// `C_ij = 1` iff `T_ji > 0`. Row `i` lists the raters of peer `i`.
pub fn build_incidence(t: &LocalTrustMatrix) -> IncidenceMatrix {
    IncidenceMatrix::from_pattern(&t.received())
}

/// 0/1 support pattern, stored as sorted per-row column lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncidenceMatrix {
    n: usize,
    rows: Vec<Vec<usize>>,
}

impl IncidenceMatrix {
    /// Support pattern of an arbitrary square matrix (nonzero → 1).
    pub fn from_pattern(m: &DMatrix<f64>) -> Self {
        let n = m.nrows();
        let rows = (0..n)
            .map(|i| (0..m.ncols()).filter(|&j| m[(i, j)] != 0.0).collect())
            .collect();
        Self { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(self.rows[i].binary_search(&j).is_ok())
    }

    /// Raters of peer `i` (the set `S_i`), ascending.
    pub fn raters(&self, i: usize) -> &[usize] {
        &self.rows[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        self.rows[i].len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| f64::from(self.get(i, j)))
    }

    /// First row with an empty support, if any.
    pub fn first_empty_row(&self) -> Option<usize> {
        self.rows.iter().position(Vec::is_empty)
    }

    pub fn is_irreducible(&self) -> bool {
        is_irreducible(self)
    }
}

/// Strong connectivity of the digraph with an edge `i → j` per nonzero entry.
///
/// Forward and backward reachability from vertex 0 must both cover all
/// vertices.
pub fn is_irreducible(c: &IncidenceMatrix) -> bool {
    let n = c.n;
    if n == 0 {
        return false;
    }
    let mut reverse = vec![Vec::new(); n];
    for (i, row) in c.rows.iter().enumerate() {
        for &j in row {
            reverse[j].push(i);
        }
    }
    reaches_all(&c.rows, n) && reaches_all(&reverse, n)
}

fn reaches_all(adj: &[Vec<usize>], n: usize) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                count += 1;
                queue.push_back(w);
            }
        }
    }
    count == n
}

/// Irreducibility of an arbitrary square matrix, by its support.
pub fn is_irreducible_matrix(m: &DMatrix<f64>) -> bool {
    is_irreducible(&IncidenceMatrix::from_pattern(m))
}

/// Strictly positive trust vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TrustVector(Vec<f64>);

impl TrustVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v > 0.0)) {
            return Err(TrustError::NonPositiveTrust { index, value });
        }
        Ok(Self(values))
    }

    /// The all-ones vector `e`.
    pub fn ones(n: usize) -> Self {
        Self(vec![1.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn scaled(&self, k: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| v * k).collect())
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `‖self − other‖∞`.
    pub fn distance_inf(&self, other: &TrustVector) -> f64 {
        inf_distance(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for TrustVector {
    type Error = TrustError;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TrustVector> for Vec<f64> {
    fn from(t: TrustVector) -> Self {
        t.0
    }
}

impl Index<usize> for TrustVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn inf_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}
