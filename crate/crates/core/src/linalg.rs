//! Dense exact linear algebra over `Rat`.
//!
//! Everything here is plain Gaussian elimination with exact pivots; there is
//! no conditioning concern, only cost, and the matrices involved stay small.

use crate::error::{Error, Result};
use crate::rat::Rat;
use num_bigint::BigInt;

pub type RatVec = Vec<Rat>;

pub fn rat_vec(ints: &[i64]) -> RatVec {
    ints.iter().map(|&v| Rat::from_int(v)).collect()
}

pub fn bigint_vec(ints: &[i64]) -> Vec<BigInt> {
    ints.iter().map(|&v| BigInt::from(v)).collect()
}

pub fn ints_to_rats(v: &[BigInt]) -> RatVec {
    v.iter().map(Rat::from).collect()
}

pub fn vec_add(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-major dense matrix of rationals.
#[derive(Clone, PartialEq, Eq)]
pub struct RatMat {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Rat::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<RatVec>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        for r in &rows {
            if r.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    got: r.len(),
                });
            }
        }
        Ok(RatMat {
            rows: nrows,
            cols: ncols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_int_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| rat_vec(r)).collect())
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Rat] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Rank by forward elimination with first-nonzero pivoting.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..m.cols {
            let pivot = (rank..m.rows).find(|&r| !m[(r, col)].is_zero());
            let Some(pr) = pivot else { continue };
            m.swap_rows(rank, pr);
            let inv = m[(rank, col)].recip();
            for r in rank + 1..m.rows {
                if m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &inv;
                for c in col..m.cols {
                    let delta = &factor * &m[(rank, c)];
                    m[(r, c)] -= &delta;
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    /// Solves the square system `self * x = b`; `None` when singular.
    pub fn solve_square(&self, b: &[Rat]) -> Option<RatVec> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(b.len(), self.rows);
        match self.solve(b) {
            SolveOutcome::Unique(x) => Some(x),
            _ => None,
        }
    }

    /// General solve of `self * x = b` by reduction to row echelon form.
    pub fn solve(&self, b: &[Rat]) -> SolveOutcome {
        assert_eq!(b.len(), self.rows);
        let mut m = self.clone();
        let mut rhs = b.to_vec();
        let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pr) = (rank..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, pr);
            rhs.swap(rank, pr);
            let inv = m[(rank, col)].recip();
            for r in 0..m.rows {
                if r == rank || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &inv;
                for c in col..m.cols {
                    let delta = &factor * &m[(rank, c)];
                    m[(r, c)] -= &delta;
                }
                let delta = &factor * &rhs[rank];
                rhs[r] -= &delta;
            }
            pivots.push((rank, col));
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        if rhs.iter().skip(rank).any(|v| !v.is_zero()) {
            return SolveOutcome::Infeasible;
        }
        if rank < m.cols {
            return SolveOutcome::Underdetermined;
        }
        let mut x = vec![Rat::zero(); m.cols];
        for &(r, c) in &pivots {
            x[c] = &rhs[r] / &m[(r, c)];
        }
        SolveOutcome::Unique(x)
    }

    /// Basis of the null space `{x : self * x = 0}`.
    pub fn null_space(&self) -> Vec<RatVec> {
        let mut m = self.clone();
        let mut pivots: Vec<(usize, usize)> = Vec::new();
        let mut rank = 0;
        for col in 0..m.cols {
            let Some(pr) = (rank..m.rows).find(|&r| !m[(r, col)].is_zero()) else {
                continue;
            };
            m.swap_rows(rank, pr);
            let inv = m[(rank, col)].recip();
            for r in 0..m.rows {
                if r == rank || m[(r, col)].is_zero() {
                    continue;
                }
                let factor = &m[(r, col)] * &inv;
                for c in col..m.cols {
                    let delta = &factor * &m[(rank, c)];
                    m[(r, c)] -= &delta;
                }
            }
            pivots.push((rank, col));
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        let pivot_cols: Vec<usize> = pivots.iter().map(|&(_, c)| c).collect();
        let mut basis = Vec::new();
        for free in 0..m.cols {
            if pivot_cols.contains(&free) {
                continue;
            }
            let mut v = vec![Rat::zero(); m.cols];
            v[free] = Rat::one();
            for &(r, c) in &pivots {
                v[c] = -(&m[(r, free)] / &m[(r, c)]);
            }
            basis.push(v);
        }
        basis
    }
}

pub enum SolveOutcome {
    Unique(RatVec),
    Infeasible,
    Underdetermined,
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (r, c): (usize, usize)) -> &Rat {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Rat {
        &mut self.data[r * self.cols + c]
    }
}

impl std::fmt::Debug for RatMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for r in 0..self.rows {
            writeln!(f, "{:?}", self.row(r))?;
        }
        Ok(())
    }
}

/// Whether the given points are affinely independent, i.e. none lies in the
/// affine hull of the others. Checked as linear independence after
/// homogenizing each point with a leading 1.
pub fn affinely_independent(points: &[Vec<Rat>]) -> Result<bool> {
    if points.is_empty() {
        return Ok(true);
    }
    let n = points[0].len();
    let mut rows = Vec::with_capacity(points.len());
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.len(),
            });
        }
        let mut row = Vec::with_capacity(n + 1);
        row.push(Rat::one());
        row.extend(p.iter().cloned());
        rows.push(row);
    }
    let m = RatMat::from_rows(rows)?;
    Ok(m.rank() == points.len())
}

pub fn affinely_independent_ints(points: &[Vec<BigInt>]) -> Result<bool> {
    let rat_points: Vec<RatVec> = points.iter().map(|p| ints_to_rats(p)).collect();
    affinely_independent(&rat_points)
}

/// Determinant of a square integer matrix by Bareiss fraction-free
/// elimination: every intermediate division is exact, so the result is an
/// integer computed without rationals.
pub fn determinant(rows: &[Vec<BigInt>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::from(1);
    }
    assert!(rows.iter().all(|r| r.len() == n), "determinant of non-square matrix");
    let mut m: Vec<Vec<BigInt>> = rows.to_vec();
    let mut sign = 1i8;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if m[k][k] == BigInt::from(0) {
            let Some(swap) = (k + 1..n).find(|&i| m[i][k] != BigInt::from(0)) else {
                return BigInt::from(0);
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = num / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}
