//! Matroid rank functions from standard constructors.
//!
//! Each constructor materializes a full rank table over subset bitmasks and
//! hands it to the set-function machinery; decomposition then runs on the
//! base polytope like any other polymatroid.

use num_bigint::BigInt;

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gammoid::GammoidPresentation;
use crate::icp::{icp_decompose, Decomposition};
use crate::polymatroid::{polymatroid_family, PolymatroidKind, SubmodularFn};

#[derive(Debug, Clone)]
pub enum MatroidSpec {
    /// Rank `min(|A|, r)` on `n` elements.
    Uniform { n: usize, r: u64 },
    /// Disjoint blocks covering the ground set, each with a capacity.
    Partition {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<u64>,
    },
    /// Ground set = edge list of a multigraph; rank = spanning-forest size.
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    /// Bases given outright; checked against the exchange axiom.
    ExplicitBases { n: usize, bases: Vec<Vec<usize>> },
    /// Linkage matroid of a digraph presentation.
    Gammoid(GammoidPresentation),
}

impl MatroidSpec {
    pub fn ground_size(&self) -> usize {
        match self {
            MatroidSpec::Uniform { n, .. } => *n,
            MatroidSpec::Partition { blocks, .. } => blocks.iter().map(Vec::len).sum(),
            MatroidSpec::Graphic { edges, .. } => edges.len(),
            MatroidSpec::ExplicitBases { n, .. } => *n,
            MatroidSpec::Gammoid(g) => g.ground_size(),
        }
    }
}

/// Materializes the rank table of a constructor.  The result is checked to be
/// a matroid rank function, which also guards malformed explicit data.
pub fn rank_from_constructor(spec: &MatroidSpec, caps: &Caps) -> Result<SubmodularFn> {
    let n = spec.ground_size();
    if n > caps.ground_set {
        return Err(Error::CapExceeded(format!(
            "ground set of size {n} exceeds the cap of {}",
            caps.ground_set
        )));
    }
    let f = match spec {
        MatroidSpec::Uniform { n, r } => SubmodularFn::from_fn(
            *n,
            |m| BigInt::from((m.count_ones() as u64).min(*r)),
            caps,
        )?,
        MatroidSpec::Partition { blocks, capacities } => {
            if blocks.len() != capacities.len() {
                return Err(Error::invalid(format!(
                    "{} blocks but {} capacities",
                    blocks.len(),
                    capacities.len()
                )));
            }
            let mut owner = vec![usize::MAX; n];
            for (j, block) in blocks.iter().enumerate() {
                for &e in block {
                    if e >= n || owner[e] != usize::MAX {
                        return Err(Error::invalid(format!(
                            "blocks must partition 0..{n}; element {e} is misplaced"
                        )));
                    }
                    owner[e] = j;
                }
            }
            let block_masks: Vec<usize> = blocks
                .iter()
                .map(|block| block.iter().map(|&e| 1usize << e).sum())
                .collect();
            SubmodularFn::from_fn(
                n,
                |m| {
                    block_masks
                        .iter()
                        .zip(capacities)
                        .map(|(&bm, &cap)| BigInt::from(((m & bm).count_ones() as u64).min(cap)))
                        .sum()
                },
                caps,
            )?
        }
        MatroidSpec::Graphic { vertices, edges } => {
            for &(u, v) in edges {
                if u >= *vertices || v >= *vertices {
                    return Err(Error::invalid(format!(
                        "edge ({u}, {v}) leaves the vertex range 0..{vertices}"
                    )));
                }
            }
            SubmodularFn::from_fn(n, |m| BigInt::from(forest_rank(*vertices, edges, m)), caps)?
        }
        MatroidSpec::ExplicitBases { n, bases } => {
            let masks = validated_base_masks(*n, bases)?;
            SubmodularFn::from_fn(
                *n,
                |m| {
                    BigInt::from(
                        masks
                            .iter()
                            .map(|&b| (m & b).count_ones())
                            .max()
                            .unwrap_or(0),
                    )
                },
                caps,
            )?
        }
        MatroidSpec::Gammoid(g) => {
            let table = g.rank_table(caps)?;
            SubmodularFn::new(n, table.into_iter().map(BigInt::from).collect(), caps)?
        }
    };
    if !f.is_matroid_rank() {
        return Err(Error::invalid(
            "constructor produced a non-matroid rank table",
        ));
    }
    Ok(f)
}

/// Spanning-forest size of the edge subset `mask`: one per union of two
/// previously separate components.
fn forest_rank(vertices: usize, edges: &[(usize, usize)], mask: usize) -> u64 {
    let mut parent: Vec<usize> = (0..vertices).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut rank = 0;
    for (i, &(u, v)) in edges.iter().enumerate() {
        if mask >> i & 1 == 1 {
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru != rv {
                parent[ru] = rv;
                rank += 1;
            }
        }
    }
    rank
}

/// Bitmasks of the claimed bases after checking cardinality, range, and the
/// exchange axiom: for all bases B₁, B₂ and x ∈ B₁∖B₂ there is y ∈ B₂∖B₁
/// with B₁ − x + y again a base.
fn validated_base_masks(n: usize, bases: &[Vec<usize>]) -> Result<Vec<usize>> {
    if bases.is_empty() {
        return Err(Error::invalid("at least one base is required"));
    }
    let mut masks = Vec::with_capacity(bases.len());
    for base in bases {
        let mut mask = 0usize;
        for &e in base {
            if e >= n {
                return Err(Error::invalid(format!(
                    "base element {e} outside the ground set 0..{n}"
                )));
            }
            if mask >> e & 1 == 1 {
                return Err(Error::invalid(format!("base repeats element {e}")));
            }
            mask |= 1 << e;
        }
        if mask.count_ones() != bases[0].len() as u32 {
            return Err(Error::invalid("bases must share one cardinality"));
        }
        masks.push(mask);
    }
    masks.sort_unstable();
    masks.dedup();
    for &b1 in &masks {
        for &b2 in &masks {
            let mut leaving = b1 & !b2;
            while leaving != 0 {
                let x = leaving & leaving.wrapping_neg();
                leaving &= leaving - 1;
                let mut entering = b2 & !b1;
                let mut ok = false;
                while entering != 0 {
                    let y = entering & entering.wrapping_neg();
                    entering &= entering - 1;
                    if masks.binary_search(&((b1 & !x) | y)).is_ok() {
                        ok = true;
                        break;
                    }
                }
                if !ok {
                    return Err(Error::invalid(format!(
                        "exchange fails between bases {b1:#b} and {b2:#b}"
                    )));
                }
            }
        }
    }
    Ok(masks)
}

/// Writes `w` as a sum of `k` base incidence vectors with affinely
/// independent supports, by decomposing in the base polytope.
pub fn matroid_base_decompose(
    spec: &MatroidSpec,
    w: &[BigInt],
    k: u64,
    caps: &Caps,
) -> Result<Decomposition> {
    let f = rank_from_constructor(spec, caps)?;
    let base = polymatroid_family(&f, PolymatroidKind::Base, caps)?;
    icp_decompose(&base, w, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn table(spec: &MatroidSpec) -> Vec<u64> {
        let f = rank_from_constructor(spec, &Caps::default()).unwrap();
        (0..=f.full_mask())
            .map(|m| u64::try_from(f.value(m)).unwrap())
            .collect()
    }

    #[test]
    fn uniform_rank_is_capped_cardinality() {
        let spec = MatroidSpec::Uniform { n: 3, r: 2 };
        let expect: Vec<u64> = (0..8u32).map(|m| u64::from(m.count_ones().min(2))).collect();
        assert_eq!(table(&spec), expect);
    }

    #[test]
    fn partition_rank_sums_capped_blocks() {
        let spec = MatroidSpec::Partition {
            blocks: vec![vec![0, 1], vec![2]],
            capacities: vec![1, 1],
        };
        let t = table(&spec);
        assert_eq!(t[0b011], 1);
        assert_eq!(t[0b101], 2);
        assert_eq!(t[0b111], 2);

        let overlapping = MatroidSpec::Partition {
            blocks: vec![vec![0, 1], vec![1]],
            capacities: vec![1, 1],
        };
        assert!(rank_from_constructor(&overlapping, &Caps::default()).is_err());
    }

    #[test]
    fn triangle_graph_has_cycle_rank_two() {
        let spec = MatroidSpec::Graphic {
            vertices: 3,
            edges: vec![(0, 1), (0, 2), (1, 2)],
        };
        let t = table(&spec);
        assert_eq!(t[0b011], 2);
        assert_eq!(t[0b101], 2);
        assert_eq!(t[0b110], 2);
        assert_eq!(t[0b111], 2);
    }

    #[test]
    fn loops_never_contribute_rank() {
        let spec = MatroidSpec::Graphic {
            vertices: 2,
            edges: vec![(0, 0), (0, 1)],
        };
        assert_eq!(table(&spec), vec![0, 0, 1, 1]);
    }

    #[test]
    fn explicit_bases_recover_the_uniform_table() {
        let spec = MatroidSpec::ExplicitBases {
            n: 3,
            bases: vec![vec![0, 1], vec![0, 2], vec![1, 2]],
        };
        assert_eq!(
            table(&spec),
            table(&MatroidSpec::Uniform { n: 3, r: 2 })
        );
    }

    #[test]
    fn exchange_axiom_is_enforced() {
        // {0,1} and {2,3} admit no single-element exchange.
        let spec = MatroidSpec::ExplicitBases {
            n: 4,
            bases: vec![vec![0, 1], vec![2, 3]],
        };
        assert!(rank_from_constructor(&spec, &Caps::default()).is_err());
    }

    #[test]
    fn gammoid_constructor_uses_the_linkage_rank() {
        let spec = MatroidSpec::Gammoid(crate::gammoid::tests::two_of_three());
        assert_eq!(
            table(&spec),
            table(&MatroidSpec::Uniform { n: 3, r: 2 })
        );
    }

    #[test]
    fn base_sum_splits_into_distinct_bases() {
        let spec = MatroidSpec::Uniform { n: 3, r: 2 };
        let w = vec![BigInt::from(2), BigInt::from(2), BigInt::from(2)];
        let d = matroid_base_decompose(&spec, &w, 3, &Caps::default()).unwrap();
        assert_eq!(d.weighted_sum(), w);
        assert_eq!(d.support_size(), 3);
        assert!(d.multiplicities.iter().all(|&m| m == 1));
    }

    #[test]
    fn doubled_tree_sum_splits_into_complementary_trees() {
        // Complete graph on four vertices; w counts each edge once, i.e. the
        // sum of two edge-disjoint spanning trees.
        let spec = MatroidSpec::Graphic {
            vertices: 4,
            edges: vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)],
        };
        let f = rank_from_constructor(&spec, &Caps::default()).unwrap();
        let w = vec![BigInt::one(); 6];
        let d = matroid_base_decompose(&spec, &w, 2, &Caps::default()).unwrap();
        assert_eq!(d.weighted_sum(), w);
        assert_eq!(d.total_multiplicity(), 2);
        assert!(d.support_size() <= 4);
        for pt in &d.points {
            assert!(pt.iter().all(|x| x.is_zero() || x.is_one()));
            let mask: usize = (0..6).filter(|&e| pt[e].is_one()).map(|e| 1 << e).sum();
            assert_eq!(f.value(mask), &BigInt::from(3), "support is not spanning");
            assert_eq!(mask.count_ones(), 3, "support is not a tree");
        }
    }

    #[test]
    fn dilated_base_has_a_singleton_decomposition() {
        let spec = MatroidSpec::Partition {
            blocks: vec![vec![0, 1], vec![2, 3]],
            capacities: vec![1, 1],
        };
        let w = vec![
            BigInt::from(3),
            BigInt::zero(),
            BigInt::zero(),
            BigInt::from(3),
        ];
        let d = matroid_base_decompose(&spec, &w, 3, &Caps::default()).unwrap();
        assert_eq!(d.support_size(), 1);
        assert_eq!(d.multiplicities, vec![3]);
    }
}
