//! Total-unimodularity checking.
//!
//! A matrix is totally unimodular (TU) when every square submatrix has
//! determinant in {-1, 0, 1}. Polyhedra `{Ax <= b}` with TU `A` and integer
//! `b` are the first family the decomposition engine is complete for: all
//! their slice intersections are box-integral because stacking `[A; -A]`
//! with unit rows preserves total unimodularity.
//!
//! Checking is exhaustive up to a size cap and falls back to seeded random
//! submatrix sampling above it; sampled verdicts carry `exhaustive: false`
//! so callers can surface an "unverified" warning instead of a silent claim.

use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::caps::Caps;
use crate::linalg::determinant;
use crate::par;

/// A square submatrix with determinant outside {-1, 0, 1}. Row and column
/// index sets are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TuViolation {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub determinant: BigInt,
}

#[derive(Debug, Clone)]
pub struct TuReport {
    /// No violating submatrix among those examined.
    pub total_unimodular: bool,
    /// Every square submatrix was examined; a `true` verdict is a proof.
    pub exhaustive: bool,
    pub violation: Option<TuViolation>,
}

fn submatrix(a: &[Vec<BigInt>], rows: &[usize], cols: &[usize]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|&r| cols.iter().map(|&c| a[r][c].clone()).collect())
        .collect()
}

fn check_one(a: &[Vec<BigInt>], rows: &[usize], cols: &[usize]) -> Option<TuViolation> {
    let d = determinant(&submatrix(a, rows, cols));
    if d < BigInt::from(-1) || d > BigInt::from(1) {
        Some(TuViolation {
            rows: rows.to_vec(),
            cols: cols.to_vec(),
            determinant: d,
        })
    } else {
        None
    }
}

/// Decides total unimodularity of `a`. Exhaustive when both dimensions are
/// at most `caps.tu_exhaustive`, scanning sizes ascending and index sets in
/// lexicographic order, so a reported violation is the smallest one. Larger
/// matrices get `caps.tu_samples` seeded random probes: a found violation is
/// still a proof of non-TU, but a clean run is only evidence.
pub fn check_tu(a: &[Vec<BigInt>], caps: &Caps) -> TuReport {
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    if m == 0 || n == 0 {
        return TuReport {
            total_unimodular: true,
            exhaustive: true,
            violation: None,
        };
    }
    let exhaustive = m <= caps.tu_exhaustive && n <= caps.tu_exhaustive;
    let violation = if exhaustive {
        exhaustive_scan(a, m, n, caps)
    } else {
        sampled_scan(a, m, n, caps)
    };
    TuReport {
        total_unimodular: violation.is_none(),
        exhaustive,
        violation,
    }
}

fn exhaustive_scan(a: &[Vec<BigInt>], m: usize, n: usize, caps: &Caps) -> Option<TuViolation> {
    use itertools::Itertools;
    for size in 1..=m.min(n) {
        let row_sets: Vec<Vec<usize>> = (0..m).combinations(size).collect();
        let hit = par::find_map_first(caps.parallel, &row_sets, |rows| {
            (0..n)
                .combinations(size)
                .find_map(|cols| check_one(a, rows, &cols))
        });
        if hit.is_some() {
            return hit;
        }
    }
    None
}

fn sampled_scan(a: &[Vec<BigInt>], m: usize, n: usize, caps: &Caps) -> Option<TuViolation> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x1c9d_0f2a);
    let max_size = m.min(n);
    for _ in 0..caps.tu_samples {
        let size = 1 + rand::Rng::gen_range(&mut rng, 0..max_size);
        let mut rows = rand::seq::index::sample(&mut rng, m, size).into_vec();
        let mut cols = rand::seq::index::sample(&mut rng, n, size).into_vec();
        rows.sort_unstable();
        cols.sort_unstable();
        if let Some(v) = check_one(a, &rows, &cols) {
            return Some(v);
        }
    }
    None
}
