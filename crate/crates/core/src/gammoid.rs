//! Gammoids from digraph presentations, and the glued flow network that
//! realizes the intersection of two gammoids.
//!
//! A presentation is a digraph with a source set `U` and a ground set `S`;
//! a subset of `S` is independent when it can be reached from `U` by
//! vertex-disjoint directed paths.  Ranks are computed by unit-capacity
//! max-flow on the node-split digraph.
//!
//! Two presentations with a common rank `k` glue into a single circulation
//! network: routes through the first digraph, crosses to the second along one
//! arc per ground element, runs the second digraph backwards, and closes up
//! through a return arc forced to carry `k`.  Integer circulations of the
//! network correspond to common bases, with the element arcs recording which
//! base was used, so the network's flow polytope projects onto common-base
//! incidence vectors.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::icp::{project_decompose, Decomposition};
use crate::par;
use crate::polyhedron::HPolyhedron;

/// A digraph with distinguished source and ground vertex sets.
#[derive(Debug, Clone)]
pub struct GammoidPresentation {
    labels: Vec<String>,
    arcs: Vec<(usize, usize)>,
    sources: Vec<usize>,
    ground: Vec<usize>,
}

impl GammoidPresentation {
    pub fn new(
        vertices: Vec<String>,
        arcs: Vec<(String, String)>,
        sources: Vec<String>,
        ground: Vec<String>,
    ) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::invalid(format!("duplicate vertex label {v:?}")));
            }
        }
        let resolve = |label: &String| -> Result<usize> {
            index
                .get(label)
                .copied()
                .ok_or_else(|| Error::invalid(format!("unknown vertex label {label:?}")))
        };
        let arcs = arcs
            .iter()
            .map(|(u, v)| Ok((resolve(u)?, resolve(v)?)))
            .collect::<Result<Vec<_>>>()?;
        let mut seen = vec![false; vertices.len()];
        let mut resolve_set = |labels: &[String], what: &str| -> Result<Vec<usize>> {
            seen.iter_mut().for_each(|s| *s = false);
            labels
                .iter()
                .map(|l| {
                    let i = resolve(l)?;
                    if std::mem::replace(&mut seen[i], true) {
                        return Err(Error::invalid(format!("repeated {what} vertex {l:?}")));
                    }
                    Ok(i)
                })
                .collect()
        };
        let sources = resolve_set(&sources, "source")?;
        let ground = resolve_set(&ground, "ground")?;
        Ok(Self {
            labels: vertices,
            arcs,
            sources,
            ground,
        })
    }

    pub fn ground_size(&self) -> usize {
        self.ground.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn ground_labels(&self) -> Vec<&str> {
        self.ground.iter().map(|&i| self.labels[i].as_str()).collect()
    }

    /// Rank of a subset of the ground set, given as a bitmask over the ground
    /// ordering: the maximum number of vertex-disjoint paths from the sources
    /// into the chosen targets.
    pub fn rank_of(&self, mask: usize) -> u64 {
        // Node-split flow network: src, snk, then in/out per vertex.
        let vin = |v: usize| 2 + 2 * v;
        let vout = |v: usize| 3 + 2 * v;
        let mut net = UnitFlow::new(2 + 2 * self.vertex_count());
        for v in 0..self.vertex_count() {
            net.add_arc(vin(v), vout(v));
        }
        for &(u, v) in &self.arcs {
            net.add_arc(vout(u), vin(v));
        }
        for &u in &self.sources {
            net.add_arc(0, vin(u));
        }
        for (i, &t) in self.ground.iter().enumerate() {
            if mask >> i & 1 == 1 {
                net.add_arc(vout(t), 1);
            }
        }
        net.max_flow(0, 1)
    }

    /// Full rank table over all subsets of the ground set, mask-indexed.
    pub fn rank_table(&self, caps: &Caps) -> Result<Vec<u64>> {
        let n = self.ground_size();
        if n > caps.ground_set {
            return Err(Error::CapExceeded(format!(
                "ground set of size {n} exceeds the cap of {}",
                caps.ground_set
            )));
        }
        let masks: Vec<usize> = (0..1usize << n).collect();
        Ok(par::map_collect(caps.parallel, &masks, |&m| self.rank_of(m)))
    }

    pub fn rank(&self) -> u64 {
        self.rank_of((1usize << self.ground_size()) - 1)
    }
}

/// Unit-capacity max flow via shortest augmenting paths.  Deterministic:
/// breadth-first search scans arcs in insertion order.
struct UnitFlow {
    n: usize,
    heads: Vec<usize>,
    residual: Vec<u8>,
    adj: Vec<Vec<usize>>,
}

impl UnitFlow {
    fn new(n: usize) -> Self {
        Self {
            n,
            heads: Vec::new(),
            residual: Vec::new(),
            adj: vec![Vec::new(); n],
        }
    }

    fn add_arc(&mut self, u: usize, v: usize) {
        self.adj[u].push(self.heads.len());
        self.heads.push(v);
        self.residual.push(1);
        self.adj[v].push(self.heads.len());
        self.heads.push(u);
        self.residual.push(0);
    }

    fn max_flow(&mut self, src: usize, snk: usize) -> u64 {
        let mut total = 0;
        loop {
            let mut parent_arc = vec![usize::MAX; self.n];
            let mut visited = vec![false; self.n];
            visited[src] = true;
            let mut queue = std::collections::VecDeque::from([src]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adj[u] {
                    let v = self.heads[e];
                    if self.residual[e] > 0 && !visited[v] {
                        visited[v] = true;
                        parent_arc[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !visited[snk] {
                return total;
            }
            let mut v = snk;
            while v != src {
                let e = parent_arc[v];
                self.residual[e] -= 1;
                self.residual[e ^ 1] += 1;
                v = self.heads[e ^ 1];
            }
            total += 1;
        }
    }
}

/// The circulation network obtained by gluing two presentations of the same
/// rank.  Arc order: one element arc per ground element first (so the flow
/// polytope projects onto common-base incidence vectors), then split arcs,
/// both digraphs, entry and exit arcs, and the return arc last.
#[derive(Debug, Clone)]
pub struct GluedFlowNetwork {
    labels: Vec<String>,
    arcs: Vec<(usize, usize)>,
    element_count: usize,
    k: u64,
}

/// `phi` maps positions in `m1`'s ground ordering to positions in `m2`'s;
/// `None` means the identity.
pub fn glue(
    m1: &GammoidPresentation,
    m2: &GammoidPresentation,
    phi: Option<&[usize]>,
) -> Result<GluedFlowNetwork> {
    let n = m1.ground_size();
    if n != m2.ground_size() {
        return Err(Error::invalid(format!(
            "ground sets have sizes {n} and {}",
            m2.ground_size()
        )));
    }
    let identity: Vec<usize> = (0..n).collect();
    let phi = phi.unwrap_or(&identity);
    if phi.len() != n {
        return Err(Error::invalid("ground map has the wrong length"));
    }
    let mut hit = vec![false; n];
    for &j in phi {
        if j >= n || std::mem::replace(&mut hit[j], true) {
            return Err(Error::invalid("ground map is not a bijection"));
        }
    }
    let r1 = m1.rank();
    let r2 = m2.rank();
    if r1 != r2 {
        return Err(Error::RankMismatch {
            left: r1,
            right: r2,
        });
    }

    // Split-node ids: r = 0, s = 1, then in/out pairs, m1's vertices first.
    let off2 = 2 + 2 * m1.vertex_count();
    let vin1 = |v: usize| 2 + 2 * v;
    let vout1 = |v: usize| 3 + 2 * v;
    let vin2 = |v: usize| off2 + 2 * v;
    let vout2 = |v: usize| off2 + 2 * v + 1;

    let mut labels = vec!["r".to_string(), "s".to_string()];
    for v in &m1.labels {
        labels.push(format!("m1.{v}:in"));
        labels.push(format!("m1.{v}:out"));
    }
    for v in &m2.labels {
        labels.push(format!("m2.{v}:in"));
        labels.push(format!("m2.{v}:out"));
    }

    let mut arcs = Vec::new();
    for (i, &e) in m1.ground.iter().enumerate() {
        arcs.push((vout1(e), vin2(m2.ground[phi[i]])));
    }
    for v in 0..m1.vertex_count() {
        arcs.push((vin1(v), vout1(v)));
    }
    for v in 0..m2.vertex_count() {
        arcs.push((vin2(v), vout2(v)));
    }
    for &(u, v) in &m1.arcs {
        arcs.push((vout1(u), vin1(v)));
    }
    for &(v, u) in &m2.arcs {
        // The second digraph is traversed backwards.
        arcs.push((vout2(u), vin2(v)));
    }
    for &u in &m1.sources {
        arcs.push((0, vin1(u)));
    }
    for &u in &m2.sources {
        arcs.push((vout2(u), 1));
    }
    arcs.push((1, 0));

    Ok(GluedFlowNetwork {
        labels,
        arcs,
        element_count: n,
        k: r1,
    })
}

impl GluedFlowNetwork {
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn element_count(&self) -> usize {
        self.element_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arc_labels(&self) -> Vec<(String, String)> {
        self.arcs
            .iter()
            .map(|&(u, v)| (self.labels[u].clone(), self.labels[v].clone()))
            .collect()
    }

    /// Vertex/arc incidence matrix: +1 where an arc leaves, −1 where it
    /// enters.  A signed digraph incidence matrix, hence totally unimodular.
    pub fn incidence_matrix(&self) -> Vec<Vec<BigInt>> {
        let mut x = vec![vec![BigInt::zero(); self.arcs.len()]; self.labels.len()];
        for (j, &(u, v)) in self.arcs.iter().enumerate() {
            x[u][j] += 1;
            x[v][j] -= 1;
        }
        x
    }

    /// The circulation polytope: conservation at every node, arcs in `[0,1]`
    /// except the return arc, pinned to the common rank.
    pub fn flow_polytope(&self, caps: &Caps) -> Result<HPolyhedron> {
        if self.labels.len() > caps.lp_rows {
            return Err(Error::CapExceeded(format!(
                "{} conservation rows exceed the cap of {}",
                self.labels.len(),
                caps.lp_rows
            )));
        }
        let rows = self.incidence_matrix();
        let rhs = vec![BigInt::zero(); rows.len()];
        let mut p = HPolyhedron::new(self.arcs.len(), rows, rhs)?;
        for i in 0..self.labels.len() {
            p = p.mark_eq_row(i);
        }
        for j in 0..self.arcs.len() - 1 {
            p.set_lower(j, BigInt::zero());
            p.set_upper(j, BigInt::one());
        }
        let last = self.arcs.len() - 1;
        p.set_lower(last, BigInt::from(self.k));
        p.set_upper(last, BigInt::from(self.k));
        Ok(p)
    }

    /// Writes `w` (a sum of `k_budget` common-base incidence vectors) as such
    /// a sum with affinely independent parts, by decomposing in the flow
    /// polytope and projecting onto the element arcs.
    pub fn common_base_decompose(
        &self,
        w: &[BigInt],
        k_budget: u64,
        caps: &Caps,
    ) -> Result<Decomposition> {
        if w.len() != self.element_count {
            return Err(Error::DimensionMismatch {
                expected: self.element_count,
                got: w.len(),
            });
        }
        let q = self.flow_polytope(caps)?;
        project_decompose(&q, w, k_budget)
    }
}
