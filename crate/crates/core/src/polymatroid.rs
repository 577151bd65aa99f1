//! Polymatroids presented by a tabulated set function.
//!
//! A function `f : 2^E -> Z` on the subsets of `E = {0, …, n−1}` is stored as a
//! table indexed by bitmask (bit `i` ⇔ element `i`).  Three polyhedra are
//! associated with `f`:
//!
//! * the extended polymatroid `{ x : x(A) ≤ f(A) for all A ⊆ E }`,
//! * the polymatroid, which additionally requires `x ≥ 0`, and
//! * the base polytope, where the constraint for `E` itself holds with equality.
//!
//! Validation (submodularity, monotonicity, matroid-rank shape) is separate
//! from construction so that a table can be loaded first and judged afterwards.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::polyhedron::HPolyhedron;

/// Which member of the family induced by a set function to materialize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolymatroidKind {
    Extended,
    Polymatroid,
    Base,
}

/// A set function on `{0, …, n−1}`, tabulated over all `2^n` bitmasks.
///
/// Construction only enforces the shape of the table and `f(∅) = 0`; whether
/// the values are actually submodular is a property query, not an invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubmodularFn {
    n: usize,
    values: Vec<BigInt>,
}

impl SubmodularFn {
    pub fn new(n: usize, values: Vec<BigInt>, caps: &Caps) -> Result<Self> {
        if n > caps.ground_set {
            return Err(Error::CapExceeded(format!(
                "ground set of size {n} exceeds the cap of {}",
                caps.ground_set
            )));
        }
        if values.len() != 1usize << n {
            return Err(Error::invalid(format!(
                "set function on {n} elements needs {} values, got {}",
                1usize << n,
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::invalid("set function must vanish on the empty set"));
        }
        Ok(Self { n, values })
    }

    /// Tabulates `f` from a rank oracle on masks.
    pub fn from_fn(n: usize, f: impl Fn(usize) -> BigInt, caps: &Caps) -> Result<Self> {
        let values = (0..1usize << n).map(f).collect();
        Self::new(n, values, caps)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn full_mask(&self) -> usize {
        (1usize << self.n) - 1
    }

    pub fn value(&self, mask: usize) -> &BigInt {
        &self.values[mask]
    }

    /// Local submodularity: for every mask `A` and distinct `i, j ∉ A`,
    /// `f(A+i) + f(A+j) ≥ f(A+i+j) + f(A)`.  Equivalent to the subset form.
    pub fn is_submodular(&self) -> bool {
        self.submodularity_violation().is_none()
    }

    /// First `(A, i, j)` violating local submodularity, scanning masks then
    /// element pairs ascending.
    pub fn submodularity_violation(&self) -> Option<(usize, usize, usize)> {
        for mask in 0..=self.full_mask() {
            for i in 0..self.n {
                if mask >> i & 1 == 1 {
                    continue;
                }
                for j in i + 1..self.n {
                    if mask >> j & 1 == 1 {
                        continue;
                    }
                    let lhs = &self.values[mask | 1 << i] + &self.values[mask | 1 << j];
                    let rhs = &self.values[mask | 1 << i | 1 << j] + &self.values[mask];
                    if lhs < rhs {
                        return Some((mask, i, j));
                    }
                }
            }
        }
        None
    }

    /// Single-element steps never decrease; by chaining this covers all pairs
    /// of nested subsets.
    pub fn is_nondecreasing(&self) -> bool {
        for mask in 0..=self.full_mask() {
            for i in 0..self.n {
                if mask >> i & 1 == 0 && self.values[mask | 1 << i] < self.values[mask] {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the table is the rank function of a matroid: normalized,
    /// nondecreasing, submodular, and `f({i}) ≤ 1` for every element.  The
    /// singleton bound suffices because submodularity caps every later
    /// marginal by the one at the empty set.
    pub fn is_matroid_rank(&self) -> bool {
        let one = BigInt::one();
        (0..self.n).all(|i| self.values[1 << i] <= one)
            && self.is_nondecreasing()
            && self.is_submodular()
    }

    /// Masks of the bases of a matroid rank function: sets whose cardinality
    /// and value both equal `f(E)`.  Ascending mask order.
    pub fn bases(&self) -> Vec<usize> {
        let rank = self.values[self.full_mask()].clone();
        (0..=self.full_mask())
            .filter(|&m| BigInt::from(m.count_ones()) == rank && self.values[m] == rank)
            .collect()
    }
}

/// Builds the requested polyhedron from `f`.  One row per nonempty mask, in
/// ascending mask order, so the row for the full ground set comes last.
pub fn polymatroid_family(
    f: &SubmodularFn,
    kind: PolymatroidKind,
    caps: &Caps,
) -> Result<HPolyhedron> {
    let n = f.n();
    let full = f.full_mask();
    if full > caps.lp_rows {
        return Err(Error::CapExceeded(format!(
            "{full} subset rows exceed the cap of {}",
            caps.lp_rows
        )));
    }
    let mut a = Vec::with_capacity(full);
    let mut b = Vec::with_capacity(full);
    for mask in 1..=full {
        a.push(
            (0..n)
                .map(|i| BigInt::from(mask >> i & 1))
                .collect::<Vec<_>>(),
        );
        b.push(f.value(mask).clone());
    }
    let mut p = HPolyhedron::new(n, a, b)?;
    match kind {
        PolymatroidKind::Extended => {}
        PolymatroidKind::Polymatroid => {
            for i in 0..n {
                p.set_lower(i, BigInt::zero());
            }
        }
        PolymatroidKind::Base => {
            p = p.mark_eq_row(full - 1);
            for i in 0..n {
                // x(E) = f(E) and x(E−i) ≤ f(E−i) squeeze each coordinate.
                p.set_lower(i, f.value(full) - f.value(full & !(1 << i)));
                p.set_upper(i, f.value(1 << i).clone());
            }
        }
    }
    Ok(p)
}
