//! Brute-force reference procedures for small instances.
//!
//! Everything here works from first principles on explicit point sets —
//! convex-hull membership by feasibility of the convexity system, exhaustive
//! lattice scans, and decomposition by direct search over supports — so the
//! results can be compared against the structured decomposition engine
//! without sharing any of its machinery.

use std::collections::BTreeSet;
use std::time::Instant;

use itertools::Itertools;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::icp::Decomposition;
use crate::linalg::{affinely_independent_ints, ints_to_rats, RatMat, SolveOutcome};
use crate::lp::{self, Sense};
use crate::polyhedron::HPolyhedron;
use crate::rat::Rat;

/// A polytope given by a finite generating set (not necessarily vertices).
#[derive(Debug, Clone)]
pub struct Hull {
    pts: Vec<Vec<BigInt>>,
    n: usize,
}

impl Hull {
    pub fn new(pts: Vec<Vec<BigInt>>) -> Result<Self> {
        let Some(first) = pts.first() else {
            return Err(Error::invalid("a hull needs at least one point"));
        };
        let n = first.len();
        if pts.iter().any(|p| p.len() != n) {
            return Err(Error::invalid("hull points must share one dimension"));
        }
        Ok(Self { pts, n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn points(&self) -> &[Vec<BigInt>] {
        &self.pts
    }

    /// The dilation `k·P`, generated by the scaled points.
    pub fn dilate(&self, k: u64) -> Hull {
        Hull {
            pts: self
                .pts
                .iter()
                .map(|p| p.iter().map(|x| x * k).collect())
                .collect(),
            n: self.n,
        }
    }

    /// Membership via the convexity system: λ ≥ 0, Σλ = 1, Σλ·pᵢ = x.
    pub fn contains_int(&self, x: &[BigInt]) -> bool {
        assert_eq!(x.len(), self.n);
        let m = self.pts.len();
        let mut rows = vec![vec![BigInt::one(); m]];
        let mut rhs = vec![BigInt::one()];
        for j in 0..self.n {
            rows.push(self.pts.iter().map(|p| p[j].clone()).collect());
            rhs.push(x[j].clone());
        }
        let mut sys = HPolyhedron::new(m, rows, rhs).expect("convexity system is well formed");
        for i in 0..=self.n {
            sys = sys.mark_eq_row(i);
        }
        for i in 0..m {
            sys.set_lower(i, BigInt::zero());
        }
        lp::feasible_point(&sys).is_some()
    }

    pub fn bounding_box(&self) -> (Vec<BigInt>, Vec<BigInt>) {
        let mut lo = self.pts[0].clone();
        let mut hi = self.pts[0].clone();
        for p in &self.pts[1..] {
            for j in 0..self.n {
                if p[j] < lo[j] {
                    lo[j] = p[j].clone();
                }
                if p[j] > hi[j] {
                    hi[j] = p[j].clone();
                }
            }
        }
        (lo, hi)
    }

    /// All lattice points of the hull, in ascending lexicographic order.
    pub fn integer_points(&self, caps: &Caps) -> Result<Vec<Vec<BigInt>>> {
        let (lo, hi) = self.bounding_box();
        scan_box(&lo, &hi, caps, |x| self.contains_int(x))
    }

    /// Affine dimension of the generating set.
    pub fn dimension(&self) -> usize {
        if self.pts.len() <= 1 {
            return 0;
        }
        let rows: Vec<Vec<Rat>> = self.pts[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&self.pts[0])
                    .map(|(a, b)| Rat::from(&(a - b)))
                    .collect()
            })
            .collect();
        RatMat::from_rows(rows).expect("difference rows share a length").rank()
    }
}

/// Lattice scan of an integer box with a membership filter, lexicographic.
fn scan_box(
    lo: &[BigInt],
    hi: &[BigInt],
    caps: &Caps,
    keep: impl Fn(&[BigInt]) -> bool,
) -> Result<Vec<Vec<BigInt>>> {
    let mut volume = 1u128;
    for (l, h) in lo.iter().zip(hi) {
        let side = u128::try_from(h - l + 1u32).map_err(|_| Error::invalid("inverted box"))?;
        volume = volume.saturating_mul(side);
        if volume > u128::from(caps.lattice_volume) {
            return Err(Error::CapExceeded(format!(
                "lattice scan of more than {} points",
                caps.lattice_volume
            )));
        }
    }
    let mut out = Vec::new();
    let mut x = lo.to_vec();
    loop {
        if keep(&x) {
            out.push(x.clone());
        }
        // Odometer increment from the last coordinate.
        let mut i = x.len();
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if x[i] < hi[i] {
                x[i] += 1;
                break;
            }
            x[i] = lo[i].clone();
        }
    }
}

/// Lattice points of an H-polyhedron, by bounding it coordinate-wise with
/// exact LPs and scanning the box.  Errors on unbounded polyhedra.
pub fn enumerate_integer_points(p: &HPolyhedron, caps: &Caps) -> Result<Vec<Vec<BigInt>>> {
    let n = p.dim_ambient();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        let mut obj = vec![Rat::zero(); n];
        obj[i] = Rat::one();
        for (sense, out) in [(Sense::Min, &mut lo), (Sense::Max, &mut hi)] {
            let res = lp::lp_solve(p, &obj, sense);
            match res.status {
                lp::LpStatus::Optimal => {
                    let opt = res.optimum.expect("optimal LP carries its optimum");
                    out.push(match sense {
                        Sense::Min => opt.ceil(),
                        Sense::Max => opt.floor(),
                    });
                }
                lp::LpStatus::Infeasible => return Ok(Vec::new()),
                lp::LpStatus::Unbounded => return Err(Error::Unbounded),
            }
        }
    }
    if lo.iter().zip(&hi).any(|(l, h)| l > h) {
        return Ok(Vec::new());
    }
    scan_box(&lo, &hi, caps, |x| p.contains_int(x))
}

/// Smallest-support decomposition of `w` into `k` candidates by direct
/// search: supports ascending by size then lexicographically by index, each
/// solved for positive integer multiplicities.  `require_independent`
/// restricts to affinely independent supports.
pub fn min_decomposition(
    candidates: &[Vec<BigInt>],
    w: &[BigInt],
    k: u64,
    require_independent: bool,
    caps: &Caps,
) -> Result<Option<Decomposition>> {
    let n = w.len();
    let mut tmax = candidates.len().min(k as usize).min(caps.support_points);
    if require_independent {
        tmax = tmax.min(n + 1);
    }
    for t in 1..=tmax {
        for combo in (0..candidates.len()).combinations(t) {
            let support: Vec<Vec<BigInt>> =
                combo.iter().map(|&i| candidates[i].clone()).collect();
            if require_independent && !affinely_independent_ints(&support)? {
                continue;
            }
            if let Some(multiplicities) = positive_multiplicities(&support, w, k) {
                return Ok(Some(Decomposition {
                    points: support,
                    multiplicities,
                    k,
                }));
            }
        }
    }
    Ok(None)
}

/// Positive integer multiplicities with `Σ nᵢ·pᵢ = w` and `Σ nᵢ = k`, if any.
/// A support of affinely independent points pins them uniquely; otherwise all
/// compositions of `k` are tried in lexicographic order.
fn positive_multiplicities(support: &[Vec<BigInt>], w: &[BigInt], k: u64) -> Option<Vec<u64>> {
    let t = support.len();
    let mut rows: Vec<Vec<Rat>> = (0..w.len())
        .map(|j| support.iter().map(|p| Rat::from(&p[j])).collect())
        .collect();
    rows.push(vec![Rat::one(); t]);
    let mut rhs = ints_to_rats(w);
    rhs.push(Rat::from(BigInt::from(k)));
    let mat = RatMat::from_rows(rows).expect("multiplicity rows share a length");
    match mat.solve(&rhs) {
        SolveOutcome::Unique(x) => {
            let mut out = Vec::with_capacity(t);
            for xi in &x {
                let v = xi.to_integer()?;
                if !v.is_positive() {
                    return None;
                }
                out.push(u64::try_from(&v).ok()?);
            }
            Some(out)
        }
        SolveOutcome::Infeasible => None,
        SolveOutcome::Underdetermined => {
            compositions(k, t).find(|ns| {
                (0..w.len()).all(|j| {
                    let sum: BigInt = support.iter().zip(ns).map(|(p, &m)| &p[j] * m).sum();
                    sum == w[j]
                })
            })
        }
    }
}

/// Compositions of `k` into `t` positive parts, lexicographic.
fn compositions(k: u64, t: usize) -> impl Iterator<Item = Vec<u64>> {
    let mut state: Option<Vec<u64>> = if (t as u64) <= k && t > 0 {
        let mut first = vec![1; t];
        first[t - 1] = k - (t as u64 - 1);
        Some(first)
    } else {
        None
    };
    std::iter::from_fn(move || {
        let current = state.clone()?;
        // Advance: take from the tail, bump the rightmost bumpable slot.
        let cur = state.as_mut().expect("state present");
        let mut next = None;
        for i in (0..t.saturating_sub(1)).rev() {
            let tail: u64 = cur[i + 1..].iter().sum();
            if tail > (t - i - 1) as u64 {
                cur[i] += 1;
                let remaining = tail - 1;
                for cj in cur.iter_mut().take(t - 1).skip(i + 1) {
                    *cj = 1;
                }
                cur[t - 1] = remaining - (t - i - 2) as u64;
                next = Some(());
                break;
            }
        }
        if next.is_none() {
            state = None;
        }
        Some(current)
    })
}

/// First `(k, w)` with `w ∈ kP ∩ ℤⁿ` not a sum of `k` lattice points of `P`,
/// searching `k` upward and `w` lexicographically; `None` when the property
/// holds through `kmax`.
pub fn check_idp(
    generators: &[Vec<BigInt>],
    kmax: u64,
    caps: &Caps,
) -> Result<Option<(u64, Vec<BigInt>)>> {
    let hull = Hull::new(generators.to_vec())?;
    let cand = hull.integer_points(caps)?;
    let mut sums: BTreeSet<Vec<BigInt>> = cand.iter().cloned().collect();
    for k in 1..=kmax {
        if k > 1 {
            let mut next = BTreeSet::new();
            for s in &sums {
                for c in &cand {
                    next.insert(s.iter().zip(c).map(|(a, b)| a + b).collect());
                }
            }
            sums = next;
        }
        for target in hull.dilate(k).integer_points(caps)? {
            if !sums.contains(&target) {
                return Ok(Some((k, target)));
            }
        }
    }
    Ok(None)
}

/// Like [`check_idp`], but the decomposition must also use affinely
/// independent points.
///
/// Refutation is attempted first through the rank search: a target whose
/// minimal support exceeds `dim(P)+1` cannot have an affinely independent
/// decomposition at all, and the search reaches dilation factors whose full
/// lattice would be too large to sweep.  Only if that finds nothing does the
/// exhaustive per-target sweep run.
pub fn check_icp(
    generators: &[Vec<BigInt>],
    kmax: u64,
    caps: &Caps,
) -> Result<Option<(u64, Vec<BigInt>)>> {
    let hull = Hull::new(generators.to_vec())?;
    let refute = caratheodory_rank_search(generators, kmax, Some(hull.dimension() + 2), caps)?;
    if let Some(witness) = refute.witness {
        return Ok(Some((witness.k, witness.w)));
    }
    let cand = hull.integer_points(caps)?;
    for k in 1..=kmax {
        for target in hull.dilate(k).integer_points(caps)? {
            if min_decomposition(&cand, &target, k, true, caps)?.is_none() {
                return Ok(Some((k, target)));
            }
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankWitness {
    pub k: u64,
    pub w: Vec<BigInt>,
    pub min_t: usize,
}

#[derive(Debug, Clone)]
pub struct RankReport {
    /// For each examined `k`: the largest minimal support size over all
    /// decomposable targets in `kP`.
    pub worst_per_k: Vec<(u64, usize)>,
    pub witness: Option<RankWitness>,
    /// False when the wall-clock budget ran out first.
    pub completed: bool,
}

/// Worst-case minimal support sizes per dilation factor, with an optional
/// early stop once some target needs `target` distinct points.
///
/// For each `k` a table of reachable sums is built over the lattice points of
/// `P`, layered by support size, so the first layer containing a sum is its
/// minimal support size.  Only decomposable targets are ranked; missing
/// lattice points of `kP` are an integer-decomposition failure, not a rank.
pub fn caratheodory_rank_search(
    generators: &[Vec<BigInt>],
    kmax: u64,
    target: Option<usize>,
    caps: &Caps,
) -> Result<RankReport> {
    let deadline = Instant::now() + std::time::Duration::from_secs(caps.budget_secs);
    let hull = Hull::new(generators.to_vec())?;
    let cand = hull.integer_points(caps)?;
    let mut worst_per_k = Vec::new();
    for k in 1..=kmax {
        let tmax = cand.len().min(k as usize).min(caps.support_points);
        let outcome = match PackedLattice::new(&cand, k) {
            Some(packed) => rank_level_packed(&packed, k, tmax, target, deadline),
            None => rank_level_wide(&cand, k, tmax, target, deadline),
        };
        let Some((k_worst, hit)) = outcome else {
            return Ok(RankReport {
                worst_per_k,
                witness: None,
                completed: false,
            });
        };
        worst_per_k.push((k, k_worst));
        if let Some((w, min_t)) = hit {
            return Ok(RankReport {
                worst_per_k,
                witness: Some(RankWitness { k, w, min_t }),
                completed: true,
            });
        }
    }
    Ok(RankReport {
        worst_per_k,
        witness: None,
        completed: true,
    })
}

/// Candidates with small coordinates, shifted to be nonnegative and packed
/// into disjoint bit fields of a `u128` — one field per coordinate, sized so
/// that no sum of total multiplicity `k` can carry between fields.  Field
/// order (first coordinate highest) makes `u128` order agree with the
/// lexicographic order of the sums.
struct PackedLattice {
    offsets: Vec<i64>,
    shifts: Vec<u32>,
    masks: Vec<u128>,
    cands: Vec<u128>,
}

impl PackedLattice {
    fn new(cand: &[Vec<BigInt>], k: u64) -> Option<Self> {
        let first = cand.first()?;
        let n = first.len();
        let mut coords: Vec<Vec<i64>> = Vec::with_capacity(cand.len());
        for c in cand {
            coords.push(
                c.iter()
                    .map(i64::try_from)
                    .collect::<std::result::Result<_, _>>()
                    .ok()?,
            );
        }
        let mut offsets = Vec::with_capacity(n);
        let mut widths = Vec::with_capacity(n);
        for j in 0..n {
            let lo = coords.iter().map(|c| c[j]).min()?;
            let hi = coords.iter().map(|c| c[j]).max()?;
            let span = u128::try_from(hi - lo).ok()? * u128::from(k);
            offsets.push(lo);
            widths.push(128 - span.leading_zeros().min(127));
        }
        if widths.iter().sum::<u32>() > 127 {
            return None;
        }
        let mut shifts = vec![0u32; n];
        let mut masks = vec![0u128; n];
        let mut pos = 0;
        for j in (0..n).rev() {
            shifts[j] = pos;
            masks[j] = (1u128 << widths[j]) - 1;
            pos += widths[j];
        }
        let cands = coords
            .iter()
            .map(|c| {
                (0..n)
                    .map(|j| (u128::try_from(c[j] - offsets[j]).unwrap()) << shifts[j])
                    .sum()
            })
            .collect();
        Some(Self {
            offsets,
            shifts,
            masks,
            cands,
        })
    }

    /// Decodes a packed sum of total multiplicity `m` back to true coords.
    fn unpack(&self, v: u128, m: u64) -> Vec<BigInt> {
        (0..self.offsets.len())
            .map(|j| {
                let field = i128::try_from((v >> self.shifts[j]) & self.masks[j])
                    .expect("fields fit in 127 bits");
                BigInt::from(field + i128::from(self.offsets[j]) * i128::from(m))
            })
            .collect()
    }
}

type LevelHit = Option<(Vec<BigInt>, usize)>;

/// One dilation level of the rank search on packed candidates.  Returns
/// `None` when the deadline expires mid-level.
fn rank_level_packed(
    packed: &PackedLattice,
    k: u64,
    tmax: usize,
    target: Option<usize>,
    deadline: Instant,
) -> Option<(usize, LevelHit)> {
    use std::collections::HashSet;
    // layers[t][m]: packed sums over exactly t distinct candidates with
    // total multiplicity m.  Candidates enter one at a time, so each
    // support is generated exactly once.
    let mut layers: Vec<Vec<HashSet<u128>>> =
        vec![vec![HashSet::new(); k as usize + 1]; tmax + 1];
    layers[0][0].insert(0);
    for &c in &packed.cands {
        if Instant::now() >= deadline {
            return None;
        }
        for t in (1..=tmax).rev() {
            let (prev, cur) = layers.split_at_mut(t);
            for m in (t as u64..=k).rev() {
                for mult in 1..=m - (t as u64 - 1) {
                    let add = c * u128::from(mult);
                    let source = &prev[t - 1][(m - mult) as usize];
                    let cell = &mut cur[0][m as usize];
                    for &s in source {
                        cell.insert(s + add);
                    }
                }
            }
        }
    }
    // Minimal support size per target: first layer that reaches it, sums in
    // lexicographic order within a layer.
    let mut seen: HashSet<u128> = HashSet::new();
    let mut k_worst = 0;
    let mut hit: LevelHit = None;
    for (t, by_mult) in layers.iter().enumerate().take(tmax + 1).skip(1) {
        let mut layer: Vec<u128> = by_mult[k as usize].iter().copied().collect();
        layer.sort_unstable();
        for v in layer {
            if !seen.insert(v) {
                continue;
            }
            if t > k_worst {
                k_worst = t;
            }
            if hit.is_none() && target.is_some_and(|tgt| t >= tgt) {
                hit = Some((packed.unpack(v, k), t));
            }
        }
    }
    Some((k_worst, hit))
}

/// Fallback level for coordinates too large to pack: same layering on full
/// integer vectors.
fn rank_level_wide(
    cand: &[Vec<BigInt>],
    k: u64,
    tmax: usize,
    target: Option<usize>,
    deadline: Instant,
) -> Option<(usize, LevelHit)> {
    let n = cand.first().map_or(0, Vec::len);
    let mut layers: Vec<Vec<BTreeSet<Vec<BigInt>>>> =
        vec![vec![BTreeSet::new(); k as usize + 1]; tmax + 1];
    layers[0][0].insert(vec![BigInt::zero(); n]);
    for c in cand {
        if Instant::now() >= deadline {
            return None;
        }
        for t in (1..=tmax).rev() {
            let (prev, cur) = layers.split_at_mut(t);
            for m in (t as u64..=k).rev() {
                for mult in 1..=m - (t as u64 - 1) {
                    let mut fresh: Vec<Vec<BigInt>> = Vec::new();
                    for s in &prev[t - 1][(m - mult) as usize] {
                        fresh.push(s.iter().zip(c).map(|(a, b)| a + b * mult).collect());
                    }
                    cur[0][m as usize].extend(fresh);
                }
            }
        }
    }
    let mut seen: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    let mut k_worst = 0;
    let mut hit: LevelHit = None;
    for (t, by_mult) in layers.iter().enumerate().take(tmax + 1).skip(1) {
        for wv in &by_mult[k as usize] {
            if !seen.insert(wv.clone()) {
                continue;
            }
            if t > k_worst {
                k_worst = t;
            }
            if hit.is_none() && target.is_some_and(|tgt| t >= tgt) {
                hit = Some((wv.clone(), t));
            }
        }
    }
    Some((k_worst, hit))
}

/// Minimal support size of `w` as a `k`-fold sum of lattice points of the
/// hull, for re-checking pinned witnesses.
pub fn minimal_support_size(
    generators: &[Vec<BigInt>],
    w: &[BigInt],
    k: u64,
    caps: &Caps,
) -> Result<Option<usize>> {
    let hull = Hull::new(generators.to_vec())?;
    let cand = hull.integer_points(caps)?;
    Ok(min_decomposition(&cand, w, k, false, caps)?.map(|d| d.points.len()))
}
