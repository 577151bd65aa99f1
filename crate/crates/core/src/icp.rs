//! Decomposition engines.
//!
//! Given an integral target `w` in the `k`-fold dilate of a polyhedron `P`,
//! these routines write `w` as a nonnegative integer combination of integer
//! points of `P` with multiplicities summing to `k`. Three entry points:
//!
//! * [`integer_decompose`] — any such combination (points may repeat across
//!   rounds, repeats merge into multiplicities);
//! * [`icp_decompose`] — the combination additionally uses affinely
//!   independent points, so at most `dim P + 1` distinct points appear;
//! * [`project_decompose`] — decomposes a target given only on a prefix of
//!   the coordinates, through a fiber of the coordinate projection.
//!
//! All three are complete for polyhedra whose slice intersections
//! ([`condition_intersection`]) are box-integral; outside that class they
//! fail honestly (`Empty` or `NotBoxIntegral`) rather than search. Exactness
//! is inherited from the LP layer: every pivot is rational, every produced
//! point integral by construction.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::linalg::{affinely_independent_ints, ints_to_rats, vec_sub};
use crate::lp;
use crate::polyhedron::HPolyhedron;
use crate::rat::Rat;

/// `w = sum multiplicities[i] * points[i]` with `sum multiplicities[i] = k`.
/// Points are distinct and listed in the order the engine produced them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub points: Vec<Vec<BigInt>>,
    pub multiplicities: Vec<u64>,
    pub k: u64,
}

impl Decomposition {
    pub fn weighted_sum(&self) -> Vec<BigInt> {
        let n = self.points.first().map_or(0, Vec::len);
        let mut acc = vec![BigInt::from(0); n];
        for (pt, &m) in self.points.iter().zip(&self.multiplicities) {
            let mb = BigInt::from(m);
            for (a, x) in acc.iter_mut().zip(pt) {
                *a += x * &mb;
            }
        }
        acc
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.multiplicities.iter().sum()
    }

    /// Number of distinct points used.
    pub fn support_size(&self) -> usize {
        self.points.len()
    }
}

/// The slice polyhedron `rP intersect (w - (k-r)P)`: its points are the ways
/// to split `w` into an `r`-fold part and a `(k-r)`-fold part. Degenerate
/// multiples use the conventions `0P = {0}` and `w - 0P = {w}`.
pub fn condition_intersection(p: &HPolyhedron, r: u64, k: u64, w: &[BigInt]) -> Result<HPolyhedron> {
    assert!(r <= k, "split {r} exceeds budget {k}");
    let zero = vec![BigInt::from(0); p.dim_ambient()];
    if r == 0 {
        return Ok(p.scale(k).reflect_shift(w).with_box(&zero, &zero));
    }
    if r == k {
        return Ok(p.scale(k).with_box(w, w));
    }
    p.scale(r).intersect(&p.scale(k - r).reflect_shift(w))
}

fn check_member(p: &HPolyhedron, w: &[BigInt], k: u64) -> Result<()> {
    if w.len() != p.dim_ambient() {
        return Err(Error::DimensionMismatch {
            expected: p.dim_ambient(),
            got: w.len(),
        });
    }
    if k == 0 {
        return Err(Error::invalid("decomposition budget k must be positive"));
    }
    let dilate = p.scale(k);
    if let Some(reason) = dilate.first_violation(&ints_to_rats(w)) {
        return Err(Error::not_member(format!(
            "target is outside the {k}-fold dilate: {reason}"
        )));
    }
    Ok(())
}

fn componentwise_div_box(w: &[BigInt], k: u64) -> (Vec<BigInt>, Vec<BigInt>) {
    let kb = BigInt::from(k);
    let lo = w.iter().map(|wi| num_integer::Integer::div_floor(wi, &kb)).collect();
    let hi = w.iter().map(|wi| num_integer::Integer::div_ceil(wi, &kb)).collect();
    (lo, hi)
}

/// Decomposes `w` in `kP` without the independence requirement: one integer
/// point is split off per round, always against the original `P`.
pub fn integer_decompose(p: &HPolyhedron, w: &[BigInt], k: u64) -> Result<Decomposition> {
    check_member(p, w, k)?;
    let mut remaining = w.to_vec();
    let mut parts: Vec<(Vec<BigInt>, u64)> = Vec::new();
    for level in (2..=k).rev() {
        // remaining/level sits in the slice, so it is nonempty whenever the
        // class assumption holds; an integral vertex then exists.
        let (lo, hi) = componentwise_div_box(&remaining, level);
        let slice = condition_intersection(p, 1, level, &remaining)?.with_box(&lo, &hi);
        let x = slice.integral_vertex()?;
        remaining = vec_sub(&remaining, &x);
        push_part(&mut parts, x, 1);
    }
    if !p.contains_int(&remaining) {
        return Err(Error::not_member(
            "residual point escaped the polyhedron; slices are not box-integral",
        ));
    }
    push_part(&mut parts, remaining, 1);
    let (points, multiplicities) = parts.into_iter().unzip();
    Ok(Decomposition {
        points,
        multiplicities,
        k,
    })
}

fn push_part(parts: &mut Vec<(Vec<BigInt>, u64)>, pt: Vec<BigInt>, mult: u64) {
    match parts.iter_mut().find(|(q, _)| *q == pt) {
        Some(entry) => entry.1 += mult,
        None => parts.push((pt, mult)),
    }
}

/// Decomposes `w` in `kP` using affinely independent integer points of `P`.
///
/// The target is first clamped to the box `[floor(w/k), ceil(w/k)]` — every
/// participant of some decomposition lives there — then split along the
/// first coordinate where `k` does not divide `w`, giving two parallel
/// hyperplane slices whose budgets `r` and `k - r` are both positive. A
/// vertex of the slice intersection splits `w` into two smaller instances on
/// the minimal faces through that vertex; points from the two sides differ
/// in the split coordinate, so the merged family stays distinct.
pub fn icp_decompose(p: &HPolyhedron, w: &[BigInt], k: u64) -> Result<Decomposition> {
    check_member(p, w, k)?;
    let mut parts = Vec::new();
    icp_rec(p, w, k, &mut parts)?;
    let (points, multiplicities): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    if !affinely_independent_ints(&points)? {
        return Err(Error::AffineDependence);
    }
    Ok(Decomposition {
        points,
        multiplicities,
        k,
    })
}

fn icp_rec(
    p: &HPolyhedron,
    w: &[BigInt],
    k: u64,
    out: &mut Vec<(Vec<BigInt>, u64)>,
) -> Result<()> {
    let (lo, hi) = componentwise_div_box(w, k);
    if lo == hi {
        // k divides w componentwise; w/k is the unique point in the box.
        out.push((lo, k));
        return Ok(());
    }
    let boxed = p.with_box(&lo, &hi);
    let split = (0..w.len()).find(|&i| lo[i] != hi[i]).expect("lo != hi");
    let q = &lo[split];
    let r = (&w[split] - q * BigInt::from(k))
        .to_u64()
        .expect("0 < r < k");
    let upper_slice = boxed.fix_coord(split, &hi[split]);
    let lower_slice = boxed.fix_coord(split, q);

    let scaled_upper = upper_slice.scale(r);
    let reflected_lower = lower_slice.scale(k - r).reflect_shift(w);
    let y = scaled_upper.intersect(&reflected_lower)?.integral_vertex()?;
    let y_rat = ints_to_rats(&y);

    // Recurse inside the minimal faces through y: constraints tight on the
    // scaled/reflected factors are tight, with the same indices, on the
    // unscaled slices (reflection swaps which bound side is active).
    let upper_face = scaled_upper
        .minimal_face_containing(&y_rat)?
        .applied_to(&upper_slice);
    let lower_face = reflected_lower
        .minimal_face_containing(&y_rat)?
        .applied_to_reflected(&lower_slice);

    icp_rec(&upper_face, &y, r, out)?;
    icp_rec(&lower_face, &vec_sub(w, &y), k - r, out)
}

/// Decomposes a target `w` specified only on the first `w.len()` coordinates:
/// finds an integer point of `kP` over `w`, decomposes it with the
/// independence guarantee, and projects the result.
pub fn project_decompose(p: &HPolyhedron, w: &[BigInt], k: u64) -> Result<Decomposition> {
    let n = p.dim_ambient();
    let m = w.len();
    if m == 0 || m > n {
        return Err(Error::DimensionMismatch { expected: n, got: m });
    }
    if k == 0 {
        return Err(Error::invalid("decomposition budget k must be positive"));
    }

    let fiber_of = |poly: &HPolyhedron| -> HPolyhedron {
        let mut f = poly.scale(k);
        for (i, wi) in w.iter().enumerate() {
            f = f.fix_coord(i, wi);
        }
        f
    };
    let Some(x_star) = lp::feasible_point(&fiber_of(p)) else {
        return Err(Error::not_member(format!(
            "no point of the {k}-fold dilate has the prescribed first {m} coordinates"
        )));
    };

    // Clamp P to a cube wide enough to keep x*/k inside: intersecting with
    // an integer box preserves the class assumption, and afterwards the
    // fiber is bounded, hence has vertices.
    let radius = x_star
        .iter()
        .map(|xi| (xi.abs() / Rat::from_int(k as i64)).ceil())
        .max()
        .unwrap()
        .max(BigInt::from(1));
    let cube_lo: Vec<BigInt> = vec![-radius.clone(); n];
    let cube_hi: Vec<BigInt> = vec![radius; n];
    let clamped = p.with_box(&cube_lo, &cube_hi);

    let dilate = clamped.scale(k);
    let target = fiber_of(&clamped).integral_vertex()?;
    let face = dilate
        .minimal_face_containing(&ints_to_rats(&target))?
        .applied_to(&clamped);
    let inner = icp_decompose(&face, &target, k)?;

    // The projection is injective on the affine hull of the face: a
    // direction of the face killed by the projection could be added to and
    // subtracted from `target` without leaving the fiber, contradicting that
    // `target` is a vertex of it. So the projected points below stay
    // distinct and affinely independent.
    let points: Vec<Vec<BigInt>> = inner
        .points
        .iter()
        .map(|pt| pt[..m].to_vec())
        .collect();
    if !affinely_independent_ints(&points)? {
        return Err(Error::AffineDependence);
    }
    Ok(Decomposition {
        points,
        multiplicities: inner.multiplicities,
        k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::bigint_vec;
    use crate::polyhedron::tests::{fractional_cut, triangle, unit_cube};

    fn assert_valid(p: &HPolyhedron, w: &[i64], dec: &Decomposition) {
        assert_eq!(dec.weighted_sum(), bigint_vec(w));
        assert_eq!(dec.total_multiplicity(), dec.k);
        for pt in &dec.points {
            assert!(p.contains_int(pt), "{pt:?} escaped the polyhedron");
        }
    }

    #[test]
    fn triangle_split_at_two() {
        let p = triangle();
        let dec = icp_decompose(&p, &bigint_vec(&[1, 1]), 2).unwrap();
        assert_eq!(dec.points, vec![bigint_vec(&[1, 0]), bigint_vec(&[0, 1])]);
        assert_eq!(dec.multiplicities, vec![1, 1]);
        assert_valid(&p, &[1, 1], &dec);
    }

    #[test]
    fn cube_target_with_divisible_coordinate() {
        let p = unit_cube(3);
        let dec = icp_decompose(&p, &bigint_vec(&[2, 1, 3]), 3).unwrap();
        assert_eq!(
            dec.points,
            vec![bigint_vec(&[1, 0, 1]), bigint_vec(&[0, 1, 1])]
        );
        assert_eq!(dec.multiplicities, vec![2, 1]);
        assert_valid(&p, &[2, 1, 3], &dec);
    }

    #[test]
    fn budget_one_returns_the_target() {
        let p = triangle();
        let dec = icp_decompose(&p, &bigint_vec(&[0, 1]), 1).unwrap();
        assert_eq!(dec.points, vec![bigint_vec(&[0, 1])]);
        assert_eq!(dec.multiplicities, vec![1]);
    }

    #[test]
    fn outside_the_dilate_is_rejected_up_front() {
        let p = triangle();
        let err = icp_decompose(&p, &bigint_vec(&[3, 0]), 2).unwrap_err();
        assert!(matches!(err, Error::NotMember { .. }), "{err}");
        let err = integer_decompose(&p, &bigint_vec(&[3, 0]), 2).unwrap_err();
        assert!(matches!(err, Error::NotMember { .. }), "{err}");
    }

    #[test]
    fn repeat_free_and_repeat_allowing_engines_agree_on_sums() {
        let p = unit_cube(2);
        let w = bigint_vec(&[1, 1]);
        let idp = integer_decompose(&p, &w, 2).unwrap();
        assert_eq!(
            idp.points,
            vec![bigint_vec(&[0, 0]), bigint_vec(&[1, 1])]
        );
        assert_valid(&p, &[1, 1], &idp);

        let icp = icp_decompose(&p, &w, 2).unwrap();
        assert_eq!(
            icp.points,
            vec![bigint_vec(&[1, 0]), bigint_vec(&[0, 1])]
        );
        assert_valid(&p, &[1, 1], &icp);
        assert!(affinely_independent_ints(&icp.points).unwrap());
    }

    #[test]
    fn multiplicities_merge_when_rounds_repeat_a_point() {
        let p = unit_cube(2);
        // (3, 3) at budget 3 forces the point (1, 1) every round.
        let dec = integer_decompose(&p, &bigint_vec(&[3, 3]), 3).unwrap();
        assert_eq!(dec.points, vec![bigint_vec(&[1, 1])]);
        assert_eq!(dec.multiplicities, vec![3]);
    }

    #[test]
    fn engine_is_honest_outside_its_class() {
        // (2, 1) = (2, 0) + (0, 1) is decomposable, but both participants
        // leave the clamp box [floor(w/2), ceil(w/2)]; for a box-integral
        // polyhedron that cannot happen, so the engine reports the dead end
        // instead of widening the search.
        let p = fractional_cut();
        let err = icp_decompose(&p, &bigint_vec(&[2, 1]), 2).unwrap_err();
        assert!(
            matches!(err, Error::Empty | Error::NotBoxIntegral { .. }),
            "{err}"
        );
    }

    #[test]
    fn projection_of_a_square_prefix() {
        let p = unit_cube(2);
        let dec = project_decompose(&p, &bigint_vec(&[1]), 2).unwrap();
        assert_eq!(dec.points, vec![bigint_vec(&[1]), bigint_vec(&[0])]);
        assert_eq!(dec.multiplicities, vec![1, 1]);
        assert_eq!(dec.k, 2);
    }

    #[test]
    fn projection_handles_unbounded_fibers() {
        // Quadrant: fibers of the first coordinate are unbounded rays.
        let p = HPolyhedron::from_ints(&[vec![-1, 0], vec![0, -1]], &[0, 0]).unwrap();
        let dec = project_decompose(&p, &bigint_vec(&[3]), 2).unwrap();
        assert_eq!(dec.weighted_sum(), bigint_vec(&[3]));
        assert_eq!(dec.total_multiplicity(), 2);
        assert!(affinely_independent_ints(&dec.points).unwrap());
    }

    #[test]
    fn full_dimensional_projection_matches_direct_engine() {
        for (p, w, k) in [
            (triangle(), vec![1, 1], 2),
            (unit_cube(3), vec![2, 1, 3], 3),
            (unit_cube(2), vec![3, 2], 4),
        ] {
            let w = bigint_vec(&w);
            let direct = icp_decompose(&p, &w, k).unwrap();
            let via_fiber = project_decompose(&p, &w, k).unwrap();
            assert_eq!(direct, via_fiber);
        }
    }

    #[test]
    fn slice_polyhedron_degenerate_budgets() {
        let p = triangle();
        let w = bigint_vec(&[1, 1]);
        let at_zero = condition_intersection(&p, 0, 2, &w).unwrap();
        assert!(at_zero.contains_int(&bigint_vec(&[0, 0])));
        assert!(!at_zero.contains_int(&bigint_vec(&[1, 0])));
        let at_k = condition_intersection(&p, 2, 2, &w).unwrap();
        assert!(at_k.contains_int(&w));
        assert!(!at_k.contains_int(&bigint_vec(&[0, 0])));
    }

    #[test]
    fn deep_recursion_on_a_long_box() {
        let p = unit_cube(4);
        let w = bigint_vec(&[5, 3, 8, 1]);
        let dec = icp_decompose(&p, &w, 9).unwrap();
        assert_valid(&p, &[5, 3, 8, 1], &dec);
        assert!(affinely_independent_ints(&dec.points).unwrap());
        assert!(dec.support_size() <= 5);
    }
}
