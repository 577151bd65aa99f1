//! Nearly totally unimodular systems.
//!
//! `A = Â + c·aᵀ` where `Â` is TU, `a` is one of its rows, and `c` is an
//! integer vector. The polyhedron served here is not `{Ax <= b}` but the
//! integer hull `P` of its lattice points, organized by level: an integer
//! point with `aᵀx = s` belongs to `P` exactly when `Âx <= b - s·c`, which
//! is the same as `Ax <= b`. Membership of `w` in the dilate `kP` reduces to
//! feasibility of one explicit TU system over the splitting level, and the
//! decomposition splits `w` across the two adjacent levels `q` and `q+1` of
//! `aᵀw = qk + r`, handing each side to the generic engine as a plain TU
//! instance.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::icp::{self, Decomposition};
use crate::linalg::{ints_to_rats, vec_sub};
use crate::lp;
use crate::polyhedron::HPolyhedron;
use crate::rat::Rat;
use crate::tu::{self, TuReport};

#[derive(Debug, Clone)]
pub struct NearlyTu {
    pub a_hat: Vec<Vec<BigInt>>,
    pub row_index: usize,
    pub c: Vec<BigInt>,
    pub b: Vec<BigInt>,
}

impl NearlyTu {
    pub fn new(
        a_hat: Vec<Vec<BigInt>>,
        row_index: usize,
        c: Vec<BigInt>,
        b: Vec<BigInt>,
    ) -> Result<Self> {
        let m = a_hat.len();
        if m == 0 {
            return Err(Error::invalid("nearly-TU system needs at least one row"));
        }
        let n = a_hat[0].len();
        if a_hat.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("ragged matrix"));
        }
        if row_index >= m {
            return Err(Error::invalid(format!(
                "row_index {row_index} out of range for {m} rows"
            )));
        }
        if c.len() != m || b.len() != m {
            return Err(Error::invalid(format!(
                "c and b must have one entry per row ({m})"
            )));
        }
        Ok(NearlyTu {
            a_hat,
            row_index,
            c,
            b,
        })
    }

    pub fn dim(&self) -> usize {
        self.a_hat[0].len()
    }

    /// The distinguished row `a`.
    pub fn a_row(&self) -> &[BigInt] {
        &self.a_hat[self.row_index]
    }

    /// The materialized matrix `A = Â + c·aᵀ`.
    pub fn full_matrix(&self) -> Vec<Vec<BigInt>> {
        let a = self.a_row().to_vec();
        self.a_hat
            .iter()
            .zip(&self.c)
            .map(|(row, ci)| row.iter().zip(&a).map(|(x, aj)| x + ci * aj).collect())
            .collect()
    }

    /// TU status of `Â`; a sampled (non-exhaustive) verdict is a warning,
    /// not a proof, and callers surface it as such.
    pub fn validate(&self, caps: &Caps) -> TuReport {
        tu::check_tu(&self.a_hat, caps)
    }

    /// The raw inequality polyhedron `{x : Ax <= b}` — integral for the
    /// instances of interest but generally not box-integral; used by the
    /// box-integrality checker, not by the decomposition path.
    pub fn inequality_polyhedron(&self) -> Result<HPolyhedron> {
        HPolyhedron::new(self.dim(), self.full_matrix(), self.b.clone())
    }

    /// Level slice `{y : Ây <= b - s·c, aᵀy = s}` as a TU system. Its
    /// integer points are exactly the integer points of `P` at level `s`.
    pub fn level_slice(&self, s: &BigInt) -> Result<HPolyhedron> {
        let rhs: Vec<BigInt> = self.b.iter().zip(&self.c).map(|(bi, ci)| bi - s * ci).collect();
        let mut rows = self.a_hat.clone();
        rows.push(self.a_row().to_vec());
        let mut b = rhs;
        b.push(s.clone());
        Ok(HPolyhedron::new(self.dim(), rows, b)?.mark_eq_row(self.a_hat.len()))
    }

    fn level_split(&self, w: &[BigInt], k: u64) -> (BigInt, u64) {
        let aw: BigInt = self.a_row().iter().zip(w).map(|(ai, wi)| ai * wi).sum();
        let kb = BigInt::from(k);
        let q = aw.div_floor(&kb);
        let r = (&aw - &q * &kb).to_u64().expect("0 <= r < k");
        (q, r)
    }

    /// The membership system for `w ∈ kP`: with `aᵀw = qk + r`,
    /// `0 <= r < k`, the point `y` ranges over `rP₁ ∩ (w - (k-r)P₂)` where
    /// `P₁`, `P₂` are the level slices at `q+1` and `q`. Feasibility of this
    /// single system decides membership.
    fn membership_system(&self, w: &[BigInt], k: u64) -> Result<HPolyhedron> {
        let (q, r) = self.level_split(w, k);
        let p2 = self.level_slice(&q)?;
        if r == 0 {
            // Degenerate split 0P₁ = {0}: feasible iff w ∈ kP₂.
            let zero = vec![BigInt::from(0); self.dim()];
            return Ok(p2.scale(k).reflect_shift(w).with_box(&zero, &zero));
        }
        let p1 = self.level_slice(&(&q + 1))?;
        p1.scale(r).intersect(&p2.scale(k - r).reflect_shift(w))
    }

    pub fn membership(&self, w: &[BigInt], k: u64) -> Result<Option<Vec<Rat>>> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        if k == 0 {
            return Err(Error::invalid("membership budget k must be positive"));
        }
        Ok(lp::feasible_point(&self.membership_system(w, k)?))
    }

    /// Membership of a single integer point in `P` itself.
    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        x.len() == self.dim()
            && self
                .full_matrix()
                .iter()
                .zip(&self.b)
                .all(|(row, bi)| row.iter().zip(x).map(|(a, v)| a * v).sum::<BigInt>() <= *bi)
    }

    /// Affinely independent decomposition of `w ∈ kP`. When `r = 0` the
    /// whole target lives at level `q` and the slice system handles it
    /// directly; otherwise a vertex of the membership system splits `w`
    /// between levels `q+1` (budget `r`) and `q` (budget `k-r`), and each
    /// side is a plain TU decomposition. Points from different levels are
    /// automatically distinct; independence of the merged family is
    /// re-verified by rank.
    pub fn decompose(&self, w: &[BigInt], k: u64) -> Result<Decomposition> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        if k == 0 {
            return Err(Error::invalid("decomposition budget k must be positive"));
        }
        let (q, r) = self.level_split(w, k);
        if r == 0 {
            // Whole target at level q; the engine box-clamps internally.
            return icp::icp_decompose(&self.level_slice(&q)?, w, k);
        }

        let system = self.membership_system(w, k)?;
        let Some(y0) = lp::feasible_point(&system) else {
            return Err(Error::not_member(format!(
                "the level-splitting system for budget {k} is infeasible"
            )));
        };

        // Feasible split point y0 bounds both participants: y0/r is in P₁
        // and (w - y0)/(k - r) is in P₂. One common box around both rational
        // points (a unit of slack for rounding) makes the slices bounded
        // without excluding any split of w.
        let rr = Rat::from_int(r as i64);
        let ss = Rat::from_int((k - r) as i64);
        let mut lo = Vec::with_capacity(w.len());
        let mut hi = Vec::with_capacity(w.len());
        for (wi, yi) in w.iter().zip(&y0) {
            let upper_part = yi / &rr;
            let lower_part = (Rat::from(wi) - yi) / &ss;
            lo.push(upper_part.floor().min(lower_part.floor()) - 1);
            hi.push(upper_part.ceil().max(lower_part.ceil()) + 1);
        }
        let p1 = self.level_slice(&(&q + 1))?.with_box(&lo, &hi);
        let p2 = self.level_slice(&q)?.with_box(&lo, &hi);

        let scaled_upper = p1.scale(r);
        let reflected_lower = p2.scale(k - r).reflect_shift(w);
        let y = scaled_upper.intersect(&reflected_lower)?.integral_vertex()?;
        let y_rat = ints_to_rats(&y);
        let upper_face = scaled_upper.minimal_face_containing(&y_rat)?.applied_to(&p1);
        let lower_face = reflected_lower
            .minimal_face_containing(&y_rat)?
            .applied_to_reflected(&p2);

        let upper = icp::icp_decompose(&upper_face, &y, r)?;
        let lower = icp::icp_decompose(&lower_face, &vec_sub(w, &y), k - r)?;

        let mut points = upper.points;
        let mut multiplicities = upper.multiplicities;
        points.extend(lower.points);
        multiplicities.extend(lower.multiplicities);
        if !crate::linalg::affinely_independent_ints(&points)? {
            return Err(Error::AffineDependence);
        }
        Ok(Decomposition {
            points,
            multiplicities,
            k,
        })
    }

}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::bigint_vec;

    /// A = [[-1,0],[0,-1],[1,2]], b = (0,0,2): the inequality polyhedron is
    /// integral but not box-integral, yet its integer hull decomposes at
    /// every budget through the level machinery.
    pub(crate) fn counterexample() -> NearlyTu {
        NearlyTu::new(
            vec![bigint_vec(&[-1, 0]), bigint_vec(&[0, -1]), bigint_vec(&[1, 1])],
            1,
            bigint_vec(&[0, 0, -1]),
            bigint_vec(&[0, 0, 2]),
        )
        .unwrap()
    }

    #[test]
    fn materialized_matrix_and_validation() {
        let inst = counterexample();
        assert_eq!(
            inst.full_matrix(),
            vec![bigint_vec(&[-1, 0]), bigint_vec(&[0, -1]), bigint_vec(&[1, 2])]
        );
        let rep = inst.validate(&Caps::default());
        assert!(rep.total_unimodular && rep.exhaustive);
    }

    #[test]
    fn point_membership_matches_materialized_inequalities() {
        let inst = counterexample();
        for x0 in -1..=3i64 {
            for x1 in -1..=3i64 {
                let x = bigint_vec(&[x0, x1]);
                let direct = x0 >= 0 && x1 >= 0 && x0 + 2 * x1 <= 2;
                assert_eq!(inst.contains_int(&x), direct, "at ({x0},{x1})");
                assert_eq!(
                    inst.membership(&x, 1).unwrap().is_some(),
                    direct,
                    "membership system at ({x0},{x1})"
                );
            }
        }
    }

    #[test]
    fn spec_level_split_example() {
        let inst = counterexample();
        let dec = inst.decompose(&bigint_vec(&[1, 1]), 2).unwrap();
        assert_eq!(dec.points, vec![bigint_vec(&[1, 0]), bigint_vec(&[0, 1])]);
        assert_eq!(dec.multiplicities, vec![1, 1]);
    }

    #[test]
    fn infeasible_target_is_not_member() {
        let inst = counterexample();
        assert!(inst.membership(&bigint_vec(&[3, 1]), 2).unwrap().is_none());
        let err = inst.decompose(&bigint_vec(&[3, 1]), 2).unwrap_err();
        assert!(matches!(err, Error::NotMember { .. }), "{err}");
    }

    #[test]
    fn succeeds_where_the_raw_inequality_engine_dead_ends() {
        // (2,1) = (2,0) + (0,1) spans two levels; the box-clamped engine on
        // the raw system {Ax <= b} cannot reach either participant.
        let inst = counterexample();
        let raw = inst.inequality_polyhedron().unwrap();
        assert!(icp::icp_decompose(&raw, &bigint_vec(&[2, 1]), 2).is_err());

        let dec = inst.decompose(&bigint_vec(&[2, 1]), 2).unwrap();
        assert_eq!(dec.points, vec![bigint_vec(&[2, 0]), bigint_vec(&[0, 1])]);
        assert_eq!(dec.multiplicities, vec![1, 1]);
    }

    #[test]
    fn divisible_level_delegates_to_a_single_slice() {
        // w = (2, 0), k = 2: aᵀw = 0 divisible by 2, so everything happens
        // at level 0.
        let inst = counterexample();
        let dec = inst.decompose(&bigint_vec(&[2, 0]), 2).unwrap();
        assert_eq!(dec.weighted_sum(), bigint_vec(&[2, 0]));
        assert_eq!(dec.total_multiplicity(), 2);
        for pt in &dec.points {
            assert!(inst.contains_int(pt));
        }
    }

    #[test]
    fn every_member_in_a_test_box_decomposes() {
        // Lattice-level ground truth: the integer points of P are
        // (0,0),(1,0),(2,0),(0,1); w ∈ kP iff w is a k-fold sum of them.
        let inst = counterexample();
        let points: Vec<Vec<BigInt>> = [[0, 0], [1, 0], [2, 0], [0, 1]]
            .iter()
            .map(|p| bigint_vec(p))
            .collect();
        for k in 1..=4u64 {
            let mut level: Vec<Vec<BigInt>> = vec![bigint_vec(&[0, 0])];
            for _ in 0..k {
                let mut next = std::collections::BTreeSet::new();
                for acc in &level {
                    for p in &points {
                        next.insert(crate::linalg::vec_add(acc, p));
                    }
                }
                level = next.into_iter().collect();
            }
            let reachable: std::collections::BTreeSet<Vec<BigInt>> = level.into_iter().collect();
            for x0 in 0..=8i64 {
                for x1 in 0..=8i64 {
                    let w = bigint_vec(&[x0, x1]);
                    let expected = reachable.contains(&w);
                    let got = inst.membership(&w, k).unwrap().is_some();
                    assert_eq!(got, expected, "k={k} w=({x0},{x1})");
                    if expected {
                        let dec = inst.decompose(&w, k).unwrap();
                        assert_eq!(dec.weighted_sum(), w);
                        assert_eq!(dec.total_multiplicity(), k);
                        for pt in &dec.points {
                            assert!(inst.contains_int(pt));
                        }
                        assert!(crate::linalg::affinely_independent_ints(&dec.points).unwrap());
                    }
                }
            }
        }
    }
}
