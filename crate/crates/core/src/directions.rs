//! Direction sets `M = (m_0, ..., m_n)`, a `d × (n+1)` matrix of nonzero
//! columns spanning `ℝ^d`.
//!
//! Columns keep their declared order because degree vectors are aligned with
//! them positionally.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const RANK_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DirectionSetJson", into = "DirectionSetJson")]
pub struct DirectionSet {
    d: usize,
    columns: Vec<Vec<f64>>,
    integer_columns: bool,
    sign_warnings: Vec<usize>,
}

/// Wire form: `{"d": 2, "columns": [[2, 0], [0, 3]]}`, one array per column.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DirectionSetJson {
    pub d: usize,
    pub columns: Vec<Vec<f64>>,
}

impl TryFrom<DirectionSetJson> for DirectionSet {
    type Error = Error;

    fn try_from(raw: DirectionSetJson) -> Result<Self> {
        DirectionSet::validate(raw.d, raw.columns)
    }
}

impl From<DirectionSet> for DirectionSetJson {
    fn from(m: DirectionSet) -> Self {
        Self { d: m.d, columns: m.columns }
    }
}

impl DirectionSet {
    /// Checks the direction-set invariants: `d >= 1`, every column a nonzero
    /// `d`-vector, and rank `d`. Columns whose first nonzero entry is negative
    /// are recorded in [`DirectionSet::sign_warnings`] rather than rejected.
    pub fn validate(d: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dimension d must be at least 1".into()));
        }
        if columns.len() < d {
            return Err(Error::RankDeficient { rank: rank(d, &columns), d });
        }
        for (j, col) in columns.iter().enumerate() {
            if col.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: col.len() });
            }
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("column {j} has a non-finite entry")));
            }
            if col.iter().all(|&v| v == 0.0) {
                return Err(Error::ZeroColumn(j));
            }
        }
        let r = rank(d, &columns);
        if r < d {
            return Err(Error::RankDeficient { rank: r, d });
        }
        let integer_columns = columns.iter().flatten().all(|v| v.fract() == 0.0);
        let sign_warnings = columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.iter().find(|&&v| v != 0.0).is_some_and(|&v| v < 0.0))
            .map(|(j, _)| j)
            .collect();
        Ok(Self { d, columns, integer_columns, sign_warnings })
    }

    pub fn identity(d: usize) -> Self {
        Self::diagonal(&vec![1.0; d]).expect("identity is a valid direction set")
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        let d = entries.len();
        let columns = entries
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut c = vec![0.0; d];
                c[j] = v;
                c
            })
            .collect();
        Self::validate(d, columns)
    }

    /// The bivariate three-direction mesh `[[1,0,1],[0,1,1]]`.
    pub fn three_direction() -> Self {
        Self::validate(2, vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).expect("valid")
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_plus_1(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn integer_columns(&self) -> bool {
        self.integer_columns
    }

    pub fn sign_warnings(&self) -> &[usize] {
        &self.sign_warnings
    }

    /// Fails with the first offending column if the positive-first-component
    /// convention (needed for time-domain truncated powers) is violated.
    pub fn require_cone_convention(&self) -> Result<()> {
        match self.sign_warnings.first() {
            Some(&j) => Err(Error::SignConvention(j)),
            None => Ok(()),
        }
    }

    pub fn is_square(&self) -> bool {
        self.columns.len() == self.d
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && self
                .columns
                .iter()
                .enumerate()
                .all(|(j, c)| c.iter().enumerate().all(|(i, &v)| i == j || v == 0.0))
    }

    /// `ω · m_j`.
    #[inline]
    pub fn dot(&self, j: usize, omega: &[f64]) -> f64 {
        self.columns[j].iter().zip(omega).map(|(a, b)| a * b).sum()
    }

    /// `M t` for a coefficient vector of length `n+1`.
    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for (col, &tj) in self.columns.iter().zip(t) {
            for (o, &c) in out.iter_mut().zip(col) {
                *o += c * tj;
            }
        }
        out
    }

    /// Row-major `d × d` copy of a square `M`.
    fn square_rows(&self) -> Result<Vec<Vec<f64>>> {
        if !self.is_square() {
            return Err(Error::NotSquare { d: self.d, columns: self.columns.len() });
        }
        Ok((0..self.d).map(|i| self.columns.iter().map(|c| c[i]).collect()).collect())
    }

    /// Determinant and row-major inverse of a square `M`.
    pub fn det_and_inverse(&self) -> Result<(f64, Vec<Vec<f64>>)> {
        let rows = self.square_rows()?;
        gauss_jordan(rows).ok_or(Error::RankDeficient { rank: rank(self.d, &self.columns), d: self.d })
    }

    /// The direction set with the last column removed, if it still spans.
    pub fn without_last(&self) -> Result<Self> {
        let mut cols = self.columns.clone();
        cols.pop();
        Self::validate(self.d, cols)
    }

    /// Images `M v` of the `2^{n+1}` vertices `v` of the unit cube, in binary
    /// counting order of `v`. Their convex hull is the support zonotope.
    pub fn support_box(&self) -> Vec<Vec<f64>> {
        let n = self.columns.len();
        assert!(n < 30, "too many directions to enumerate the cube");
        (0u32..1 << n)
            .map(|mask| {
                let t: Vec<f64> = (0..n).map(|j| f64::from((mask >> j) & 1)).collect();
                self.apply(&t)
            })
            .collect()
    }
}

/// Numerical rank of the `d × columns.len()` matrix.
fn rank(d: usize, columns: &[Vec<f64>]) -> usize {
    let mut a: Vec<Vec<f64>> = (0..d).map(|i| columns.iter().map(|c| c.get(i).copied().unwrap_or(0.0)).collect()).collect();
    let ncols = columns.len();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let mut r = 0;
    for col in 0..ncols {
        if r == d {
            break;
        }
        let (piv, val) = (r..d).map(|i| (i, a[i][col].abs())).fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if val <= RANK_TOL * scale {
            continue;
        }
        a.swap(r, piv);
        for i in r + 1..d {
            let f = a[i][col] / a[r][col];
            for k in col..ncols {
                a[i][k] -= f * a[r][k];
            }
        }
        r += 1;
    }
    r
}

/// Returns `(det, inverse)` or `None` for a singular matrix.
fn gauss_jordan(mut a: Vec<Vec<f64>>) -> Option<(f64, Vec<Vec<f64>>)> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale = a.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= RANK_TOL * scale {
            return None;
        }
        if piv != col {
            a.swap(piv, col);
            inv.swap(piv, col);
            det = -det;
        }
        let p = a[col][col];
        det *= p;
        for k in 0..n {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for k in 0..n {
                        a[i][k] -= f * a[col][k];
                        inv[i][k] -= f * inv[col][k];
                    }
                }
            }
        }
    }
    Some((det, inv))
}

/// `A x` for a row-major matrix.
pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}
