//! Inequality-description polyhedra over the integers.
//!
//! `P = {x : Ax <= b (eq rows hold with equality), lower <= x <= upper}`
//! with integer `A`, `b` and bounds in `Z ∪ {±∞}`. The calculus (scaling,
//! point reflection, intersection, face tightening) only ever rescales
//! right-hand sides or moves rows into the equality set; it never invents
//! rows, so row indices stay stable across derived systems and faces can be
//! carried around as tight-index sets.
//!
//! Crossed bounds (`lower > upper`) are a legal representation of the empty
//! set; emptiness always surfaces as `Error::Empty` from the LP layer.

use crate::error::{Error, Result};
use crate::linalg::{ints_to_rats, RatMat, RatVec};
use crate::lp::{self, LpStatus, Sense};
use crate::rat::Rat;
use crate::{caps::Caps, par};
use itertools::Itertools;
use num_bigint::BigInt;
use std::collections::BTreeSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HPolyhedron {
    n: usize,
    a: Vec<Vec<BigInt>>,
    b: Vec<BigInt>,
    eq_rows: BTreeSet<usize>,
    lower: Vec<Option<BigInt>>,
    upper: Vec<Option<BigInt>>,
}

impl HPolyhedron {
    pub fn new(n: usize, a: Vec<Vec<BigInt>>, b: Vec<BigInt>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                expected: a.len(),
                got: b.len(),
            });
        }
        for row in &a {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        Ok(HPolyhedron {
            n,
            a,
            b,
            eq_rows: BTreeSet::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        })
    }

    pub fn from_ints(a: &[Vec<i64>], b: &[i64]) -> Result<Self> {
        let n = a.first().map_or(0, |r| r.len());
        Self::new(
            n,
            a.iter()
                .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
            b.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    /// Whole space, no constraints.
    pub fn free_space(n: usize) -> Self {
        HPolyhedron {
            n,
            a: Vec::new(),
            b: Vec::new(),
            eq_rows: BTreeSet::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    pub fn mark_eq_row(mut self, i: usize) -> Self {
        assert!(i < self.a.len());
        self.eq_rows.insert(i);
        self
    }

    pub fn dim_ambient(&self) -> usize {
        self.n
    }

    pub fn num_rows(&self) -> usize {
        self.a.len()
    }

    pub fn row(&self, i: usize) -> (&[BigInt], &BigInt) {
        (&self.a[i], &self.b[i])
    }

    pub fn is_eq_row(&self, i: usize) -> bool {
        self.eq_rows.contains(&i)
    }

    pub fn lower(&self, i: usize) -> Option<&BigInt> {
        self.lower[i].as_ref()
    }

    pub fn upper(&self, i: usize) -> Option<&BigInt> {
        self.upper[i].as_ref()
    }

    pub fn set_lower(&mut self, i: usize, v: BigInt) {
        self.lower[i] = Some(v);
    }

    pub fn set_upper(&mut self, i: usize, v: BigInt) {
        self.upper[i] = Some(v);
    }

    pub fn is_bounded_box(&self) -> bool {
        (0..self.n).all(|i| self.lower[i].is_some() && self.upper[i].is_some())
    }

    /// `rP` for integer `r >= 1`: right-hand sides and bounds scale, the
    /// matrix does not.
    pub fn scale(&self, r: u64) -> Self {
        assert!(r >= 1, "scale factor must be positive");
        let r = BigInt::from(r);
        HPolyhedron {
            n: self.n,
            a: self.a.clone(),
            b: self.b.iter().map(|v| v * &r).collect(),
            eq_rows: self.eq_rows.clone(),
            lower: self
                .lower
                .iter()
                .map(|o| o.as_ref().map(|v| v * &r))
                .collect(),
            upper: self
                .upper
                .iter()
                .map(|o| o.as_ref().map(|v| v * &r))
                .collect(),
        }
    }

    /// `{w - x : x in P} = {y : -Ay <= b - Aw}`, bounds mirrored around `w`.
    pub fn reflect_shift(&self, w: &[BigInt]) -> Self {
        assert_eq!(w.len(), self.n);
        let a: Vec<Vec<BigInt>> = self
            .a
            .iter()
            .map(|row| row.iter().map(|v| -v).collect())
            .collect();
        let b: Vec<BigInt> = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, bi)| {
                let aw: BigInt = row.iter().zip(w).map(|(c, wi)| c * wi).sum();
                bi - aw
            })
            .collect();
        HPolyhedron {
            n: self.n,
            a,
            b,
            eq_rows: self.eq_rows.clone(),
            lower: self
                .upper
                .iter()
                .zip(w)
                .map(|(o, wi)| o.as_ref().map(|v| wi - v))
                .collect(),
            upper: self
                .lower
                .iter()
                .zip(w)
                .map(|(o, wi)| o.as_ref().map(|v| wi - v))
                .collect(),
        }
    }

    /// Stacks the two systems; `self`'s rows come first, so row indices of
    /// `other` shift by `self.num_rows()`.
    pub fn intersect(&self, other: &HPolyhedron) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: other.n,
            });
        }
        let offset = self.a.len();
        let mut a = self.a.clone();
        a.extend(other.a.iter().cloned());
        let mut b = self.b.clone();
        b.extend(other.b.iter().cloned());
        let mut eq_rows = self.eq_rows.clone();
        eq_rows.extend(other.eq_rows.iter().map(|&i| i + offset));
        let merge_lower = |x: &Option<BigInt>, y: &Option<BigInt>| match (x, y) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        let merge_upper = |x: &Option<BigInt>, y: &Option<BigInt>| match (x, y) {
            (Some(a), Some(b)) => Some(a.min(b).clone()),
            (Some(a), None) | (None, Some(a)) => Some(a.clone()),
            (None, None) => None,
        };
        Ok(HPolyhedron {
            n: self.n,
            a,
            b,
            eq_rows,
            lower: self
                .lower
                .iter()
                .zip(&other.lower)
                .map(|(x, y)| merge_lower(x, y))
                .collect(),
            upper: self
                .upper
                .iter()
                .zip(&other.upper)
                .map(|(x, y)| merge_upper(x, y))
                .collect(),
        })
    }

    /// Tightens coordinate `i` to the single value `v` (intersection
    /// semantics: may yield crossed bounds if `v` is outside).
    pub fn fix_coord(&self, i: usize, v: &BigInt) -> Self {
        let mut p = self.clone();
        p.lower[i] = Some(match &p.lower[i] {
            Some(l) => l.max(v).clone(),
            None => v.clone(),
        });
        p.upper[i] = Some(match &p.upper[i] {
            Some(u) => u.min(v).clone(),
            None => v.clone(),
        });
        p
    }

    /// Intersects with the box `lo <= x <= hi`.
    pub fn with_box(&self, lo: &[BigInt], hi: &[BigInt]) -> Self {
        assert_eq!(lo.len(), self.n);
        assert_eq!(hi.len(), self.n);
        let mut p = self.clone();
        for i in 0..self.n {
            p.lower[i] = Some(match &p.lower[i] {
                Some(l) => l.max(&lo[i]).clone(),
                None => lo[i].clone(),
            });
            p.upper[i] = Some(match &p.upper[i] {
                Some(u) => u.min(&hi[i]).clone(),
                None => hi[i].clone(),
            });
        }
        p
    }

    pub fn contains_rat(&self, x: &[Rat]) -> bool {
        self.first_violation(x).is_none()
    }

    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        self.contains_rat(&ints_to_rats(x))
    }

    /// Description of the first violated constraint, if any.
    pub fn first_violation(&self, x: &[Rat]) -> Option<String> {
        if x.len() != self.n {
            return Some(format!("point has {} coordinates, expected {}", x.len(), self.n));
        }
        for (i, (row, bi)) in self.a.iter().zip(&self.b).enumerate() {
            let lhs: Rat = row
                .iter()
                .zip(x)
                .map(|(c, xi)| Rat::from(c) * xi)
                .sum();
            let rhs = Rat::from(bi);
            if self.eq_rows.contains(&i) {
                if lhs != rhs {
                    return Some(format!("equality row {i} gives {lhs}, expected {rhs}"));
                }
            } else if lhs > rhs {
                return Some(format!("row {i} gives {lhs} > {rhs}"));
            }
        }
        for (i, xi) in x.iter().enumerate().take(self.n) {
            if let Some(l) = &self.lower[i] {
                if *xi < Rat::from(l) {
                    return Some(format!("coordinate {i} is {xi} < lower bound {l}"));
                }
            }
            if let Some(u) = &self.upper[i] {
                if *xi > Rat::from(u) {
                    return Some(format!("coordinate {i} is {xi} > upper bound {u}"));
                }
            }
        }
        None
    }

    /// Finds an integral vertex by fixing coordinates in ascending order to
    /// their exact minima. On a box-integer polytope every minimum is an
    /// integer; a fractional minimum is reported as `NotBoxIntegral` and
    /// identifies the offending coordinate.
    pub fn integral_vertex(&self) -> Result<Vec<BigInt>> {
        let mut cur = self.clone();
        let mut out: Vec<BigInt> = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let mut obj = vec![Rat::zero(); self.n];
            obj[i] = Rat::one();
            let res = lp::lp_solve(&cur, &obj, Sense::Min);
            match res.status {
                LpStatus::Infeasible => return Err(Error::Empty),
                LpStatus::Unbounded => return Err(Error::Unbounded),
                LpStatus::Optimal => {
                    let mu = res.optimum.expect("optimal LP carries optimum");
                    match mu.to_integer() {
                        Some(v) => {
                            cur = cur.fix_coord(i, &v);
                            out.push(v);
                        }
                        None => {
                            return Err(Error::NotBoxIntegral {
                                coord: i,
                                value: mu,
                            })
                        }
                    }
                }
            }
        }
        debug_assert!(self.contains_int(&out));
        Ok(out)
    }

    /// The smallest face containing `y`: exactly the constraints tight at
    /// `y` become equalities, so `y` lies in the relative interior.
    pub fn minimal_face_containing(&self, y: &[Rat]) -> Result<Face> {
        if let Some(reason) = self.first_violation(y) {
            return Err(Error::not_member(reason));
        }
        let mut tight_rows = BTreeSet::new();
        for (i, (row, bi)) in self.a.iter().zip(&self.b).enumerate() {
            if self.eq_rows.contains(&i) {
                continue;
            }
            let lhs: Rat = row.iter().zip(y).map(|(c, xi)| Rat::from(c) * xi).sum();
            if lhs == Rat::from(bi) {
                tight_rows.insert(i);
            }
        }
        let mut tight_lower = BTreeSet::new();
        let mut tight_upper = BTreeSet::new();
        for (i, yi) in y.iter().enumerate().take(self.n) {
            if let Some(l) = &self.lower[i] {
                if *yi == Rat::from(l) {
                    tight_lower.insert(i);
                }
            }
            if let Some(u) = &self.upper[i] {
                if *yi == Rat::from(u) {
                    tight_upper.insert(i);
                }
            }
        }
        Ok(Face {
            parent: self.clone(),
            tight_rows,
            tight_lower,
            tight_upper,
        })
    }

    /// Applies a tight-index set recorded on a scaled or reflected copy of
    /// this system (row indices match; for reflected systems the caller has
    /// already swapped bound sides).
    pub fn tighten(
        &self,
        rows: &BTreeSet<usize>,
        lower: &BTreeSet<usize>,
        upper: &BTreeSet<usize>,
    ) -> Self {
        let mut p = self.clone();
        p.eq_rows.extend(rows.iter().copied());
        for &i in lower {
            let l = p.lower[i].clone().expect("tight lower bound must be finite");
            p.upper[i] = Some(match &p.upper[i] {
                Some(u) => u.min(&l).clone(),
                None => l.clone(),
            });
        }
        for &i in upper {
            let u = p.upper[i].clone().expect("tight upper bound must be finite");
            p.lower[i] = Some(match &p.lower[i] {
                Some(l) => l.max(&u).clone(),
                None => u.clone(),
            });
        }
        p
    }

    /// Nonempty check via a zero-objective LP.
    pub fn is_empty(&self) -> bool {
        let obj = vec![Rat::zero(); self.n];
        lp::lp_solve(self, &obj, Sense::Min).status == LpStatus::Infeasible
    }

    /// Affine dimension: ambient dimension minus the rank of the implicit
    /// equality system (declared equalities, bounds pinned to a point, and
    /// inequality rows that hold with equality everywhere on `P`).
    pub fn dimension(&self) -> Result<usize> {
        self.projected_dimension(self.n)
    }

    /// Dimension of the image of the polyhedron under projection onto its
    /// first `m` coordinates.  An implicit equality `a·x = β` constrains the
    /// image only through the part of `a` supported on the first `m`
    /// coordinates, so the image dimension is `m` minus the number of
    /// independent equalities whose tail coordinates eliminate to zero —
    /// i.e. `m − (rank(E) − rank(E_tail))`.
    pub fn projected_dimension(&self, m: usize) -> Result<usize> {
        assert!(m <= self.n, "projection keeps at most n coordinates");
        if self.is_empty() {
            return Err(Error::Empty);
        }
        let eq_system = self.implicit_equalities();
        if eq_system.is_empty() {
            return Ok(m);
        }
        let tail_rank = if m == self.n {
            0
        } else {
            let tails: Vec<RatVec> = eq_system.iter().map(|r| r[m..].to_vec()).collect();
            RatMat::from_rows(tails)?.rank()
        };
        let total_rank = RatMat::from_rows(eq_system)?.rank();
        Ok(m - (total_rank - tail_rank))
    }

    /// Rows (matrix rows and pinned bounds) that hold with equality on all of
    /// the polyhedron, detected by optimizing each candidate.
    fn implicit_equalities(&self) -> Vec<RatVec> {
        let mut eq_system: Vec<RatVec> = Vec::new();
        let rat_row = |row: &[BigInt]| -> RatVec { ints_to_rats(row) };
        for (i, (row, bi)) in self.a.iter().zip(&self.b).enumerate() {
            if self.eq_rows.contains(&i) {
                eq_system.push(rat_row(row));
                continue;
            }
            // The row is implicit-equality iff a.x cannot go below b.
            let obj = rat_row(row);
            let res = lp::lp_solve(self, &obj, Sense::Min);
            if res.status == LpStatus::Optimal && res.optimum.as_ref() == Some(&Rat::from(bi)) {
                eq_system.push(rat_row(row));
            }
        }
        for i in 0..self.n {
            let pinned = match (&self.lower[i], &self.upper[i]) {
                (Some(l), Some(u)) if l == u => true,
                _ => {
                    let mut probe = false;
                    if let Some(l) = &self.lower[i] {
                        let mut obj = vec![Rat::zero(); self.n];
                        obj[i] = Rat::one();
                        let res = lp::lp_solve(self, &obj, Sense::Max);
                        probe = res.status == LpStatus::Optimal
                            && res.optimum.as_ref() == Some(&Rat::from(l));
                    }
                    if !probe {
                        if let Some(u) = &self.upper[i] {
                            let mut obj = vec![Rat::zero(); self.n];
                            obj[i] = Rat::one();
                            let res = lp::lp_solve(self, &obj, Sense::Min);
                            probe = res.status == LpStatus::Optimal
                                && res.optimum.as_ref() == Some(&Rat::from(u));
                        }
                    }
                    probe
                }
            };
            if pinned {
                let mut row = vec![Rat::zero(); self.n];
                row[i] = Rat::one();
                eq_system.push(row);
            }
        }
        eq_system
    }

    /// Candidate equality rows for vertex probing: every matrix row plus a
    /// unit row per finite bound.
    fn probe_rows(&self) -> Vec<(RatVec, Rat)> {
        let mut rows: Vec<(RatVec, Rat)> = Vec::new();
        for (row, bi) in self.a.iter().zip(&self.b) {
            rows.push((ints_to_rats(row), Rat::from(bi)));
        }
        for i in 0..self.n {
            for bound in [&self.lower[i], &self.upper[i]].into_iter().flatten() {
                let mut unit = vec![Rat::zero(); self.n];
                unit[i] = Rat::one();
                rows.push((unit, Rat::from(bound)));
            }
        }
        rows
    }

    /// All vertices, by exhaustive enumeration of square tight systems.
    pub fn vertices(&self, caps: &Caps) -> Result<Vec<RatVec>> {
        let rows = self.probe_rows();
        let combo_count = binomial(rows.len(), self.n);
        if combo_count > u128::from(caps.box_probes) {
            return Err(Error::CapExceeded(format!(
                "{combo_count} candidate tight systems exceed cap {}",
                caps.box_probes
            )));
        }
        let combos = (0..rows.len()).combinations(self.n);
        let mut seen: BTreeSet<Vec<Rat>> = BTreeSet::new();
        for combo in combos {
            let mat = RatMat::from_rows(combo.iter().map(|&i| rows[i].0.clone()).collect())?;
            let rhs: RatVec = combo.iter().map(|&i| rows[i].1.clone()).collect();
            if let Some(x) = mat.solve_square(&rhs) {
                if self.contains_rat(&x) {
                    seen.insert(x);
                }
            }
        }
        Ok(seen.into_iter().collect())
    }

    /// Exhaustive box-integrality check within `search_box`.
    ///
    /// A fractional vertex of `P ∩ [c,d]` for some integer box `[c,d]` inside
    /// the search box always has a nonsingular tight system made of matrix
    /// rows, own-bound rows, and coordinates pinned to integers, so probing
    /// exactly those systems is equivalent to enumerating all boxes.
    pub fn check_box_integral(
        &self,
        lo: &[BigInt],
        hi: &[BigInt],
        caps: &Caps,
    ) -> Result<BoxIntegrality> {
        assert_eq!(lo.len(), self.n);
        assert_eq!(hi.len(), self.n);
        let rows = self.probe_rows();
        let spans: Vec<Vec<BigInt>> = (0..self.n)
            .map(|i| {
                let mut vals = Vec::new();
                let mut v = lo[i].clone();
                while v <= hi[i] {
                    vals.push(v.clone());
                    v += 1;
                }
                vals
            })
            .collect();

        // Upfront probe count against the cap.
        let mut total: u128 = 0;
        for mask in 0u32..1 << self.n {
            let pinned: Vec<usize> = (0..self.n).filter(|i| mask >> i & 1 == 1).collect();
            if pinned.len() > self.n || self.n - pinned.len() > rows.len() {
                continue;
            }
            let assigns: u128 = pinned.iter().map(|&i| spans[i].len() as u128).product();
            let combos = binomial(rows.len(), self.n - pinned.len());
            total = total.saturating_add(assigns.saturating_mul(combos));
        }
        if total > caps.box_probes as u128 {
            return Err(Error::CapExceeded(format!(
                "{total} box-integrality probes exceed cap {}",
                caps.box_probes
            )));
        }

        let masks: Vec<u32> = (0..1u32 << self.n).collect();
        let witness = par::find_map_first(caps.parallel, &masks, |&mask| {
            self.box_probe_mask(mask, &rows, &spans, lo, hi)
        });
        Ok(BoxIntegrality {
            box_integral: witness.is_none(),
            witness,
        })
    }

    fn box_probe_mask(
        &self,
        mask: u32,
        rows: &[(RatVec, Rat)],
        spans: &[Vec<BigInt>],
        lo: &[BigInt],
        hi: &[BigInt],
    ) -> Option<BoxWitness> {
        let pinned: Vec<usize> = (0..self.n).filter(|i| mask >> i & 1 == 1).collect();
        if self.n - pinned.len() > rows.len() {
            return None;
        }
        let value_lists: Vec<&[BigInt]> = pinned.iter().map(|&i| spans[i].as_slice()).collect();
        for values in pin_assignments(&value_lists) {
            for combo in (0..rows.len()).combinations(self.n - pinned.len()) {
                let mut sys_rows: Vec<RatVec> = Vec::with_capacity(self.n);
                let mut rhs: RatVec = Vec::with_capacity(self.n);
                for &r in &combo {
                    sys_rows.push(rows[r].0.clone());
                    rhs.push(rows[r].1.clone());
                }
                for (slot, &i) in pinned.iter().enumerate() {
                    let mut unit = vec![Rat::zero(); self.n];
                    unit[i] = Rat::one();
                    sys_rows.push(unit);
                    rhs.push(Rat::from(values[slot]));
                }
                let mat = RatMat::from_rows(sys_rows).expect("square probe system");
                let Some(x) = mat.solve_square(&rhs) else { continue };
                if !self.contains_rat(&x) {
                    continue;
                }
                if (0..self.n).any(|i| x[i] < Rat::from(&lo[i]) || x[i] > Rat::from(&hi[i])) {
                    continue;
                }
                if x.iter().all(Rat::is_integer) {
                    continue;
                }
                let mut wlo = lo.to_vec();
                let mut whi = hi.to_vec();
                for (slot, &i) in pinned.iter().enumerate() {
                    wlo[i] = values[slot].clone();
                    whi[i] = values[slot].clone();
                }
                return Some(BoxWitness {
                    lo: wlo,
                    hi: whi,
                    vertex: x,
                });
            }
        }
        None
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let mut out: u128 = 1;
    for i in 0..k.min(n - k) {
        out = out.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    out
}

/// Cartesian product over a possibly-empty list of value lists; an empty list
/// of lists yields the single empty assignment.
fn pin_assignments<'a>(lists: &[&'a [BigInt]]) -> Box<dyn Iterator<Item = Vec<&'a BigInt>> + 'a> {
    if lists.is_empty() {
        Box::new(std::iter::once(Vec::new()))
    } else {
        let owned: Vec<&'a [BigInt]> = lists.to_vec();
        Box::new(owned.into_iter().map(|s| s.iter()).multi_cartesian_product())
    }
}

/// A face of `parent`, recorded as the set of constraints tight on it.
#[derive(Clone, Debug)]
pub struct Face {
    pub parent: HPolyhedron,
    pub tight_rows: BTreeSet<usize>,
    pub tight_lower: BTreeSet<usize>,
    pub tight_upper: BTreeSet<usize>,
}

impl Face {
    pub fn as_polyhedron(&self) -> HPolyhedron {
        self.parent
            .tighten(&self.tight_rows, &self.tight_lower, &self.tight_upper)
    }

    /// Re-applies the tight sets to a different materialization of the same
    /// row layout (e.g. the unscaled original of a scaled system).
    pub fn applied_to(&self, target: &HPolyhedron) -> HPolyhedron {
        target.tighten(&self.tight_rows, &self.tight_lower, &self.tight_upper)
    }

    /// Same, for a system whose bounds were produced by `reflect_shift`:
    /// a tight lower bound there corresponds to a tight upper bound on the
    /// original, and vice versa.
    pub fn applied_to_reflected(&self, target: &HPolyhedron) -> HPolyhedron {
        target.tighten(&self.tight_rows, &self.tight_upper, &self.tight_lower)
    }
}

#[derive(Clone, Debug)]
pub struct BoxIntegrality {
    pub box_integral: bool,
    pub witness: Option<BoxWitness>,
}

/// A sub-box of the search box together with a fractional vertex of the
/// polyhedron intersected with it.
#[derive(Clone, Debug)]
pub struct BoxWitness {
    pub lo: Vec<BigInt>,
    pub hi: Vec<BigInt>,
    pub vertex: RatVec,
}
