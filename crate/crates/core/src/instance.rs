//! Instance files: the JSON formats accepted by the CLI, their validation,
//! and dispatch onto the decomposition frontends.
//!
//! Seven shapes share a `"type"` discriminator: `tu` (an inequality system
//! with a totally unimodular matrix), `ntu` (a nearly totally unimodular
//! system `Â + c·aᵀ`), `polymatroid` (a submodular value table plus a kind),
//! `matroid` (a rank function given by a constructor), `gammoid_intersection`
//! (two digraph presentations glued into a flow network), `vertices` (an
//! explicit point list handled by the brute-force oracle), and `projection`
//! (any of the box-driven types above, restricted to its leading
//! coordinates).
//!
//! Loading validates structure eagerly — ragged matrices, unknown labels,
//! non-matroid rank tables, and rank-mismatched gammoid pairs are rejected
//! with a message — but leaves properties that the `check` command must be
//! able to report on (submodularity of a raw value table, total
//! unimodularity beyond the exhaustive cap) to the operations that need
//! them.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::gammoid::{glue, GammoidPresentation, GluedFlowNetwork};
use crate::icp::{icp_decompose, project_decompose, Decomposition};
use crate::lp;
use crate::matroid::{rank_from_constructor, MatroidSpec};
use crate::ntu::NearlyTu;
use crate::oracle::{enumerate_integer_points, min_decomposition, Hull};
use crate::polyhedron::HPolyhedron;
use crate::polymatroid::{polymatroid_family, PolymatroidKind, SubmodularFn};
use crate::tu::check_tu;

// ---------------------------------------------------------------------------
// Raw JSON layer

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InstanceFile {
    Tu {
        #[serde(rename = "A")]
        a: Vec<Vec<i64>>,
        b: Vec<i64>,
    },
    Ntu {
        #[serde(rename = "A_hat")]
        a_hat: Vec<Vec<i64>>,
        row_index: usize,
        c: Vec<i64>,
        b: Vec<i64>,
    },
    Polymatroid {
        kind: KindTag,
        n: usize,
        values: Vec<i64>,
    },
    Matroid {
        constructor: ConstructorJson,
    },
    GammoidIntersection {
        m1: GammoidJson,
        m2: GammoidJson,
        #[serde(default)]
        phi: Option<BTreeMap<String, String>>,
        k: u64,
    },
    Vertices {
        vertices: Vec<Vec<i64>>,
    },
    Projection {
        keep_coords: usize,
        inner: Box<InstanceFile>,
    },
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KindTag {
    Extended,
    Polymatroid,
    Base,
}

impl From<KindTag> for PolymatroidKind {
    fn from(t: KindTag) -> Self {
        match t {
            KindTag::Extended => PolymatroidKind::Extended,
            KindTag::Polymatroid => PolymatroidKind::Polymatroid,
            KindTag::Base => PolymatroidKind::Base,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructorJson {
    Uniform {
        n: usize,
        r: u64,
    },
    Partition {
        blocks: Vec<Vec<usize>>,
        capacities: Vec<u64>,
    },
    Graphic {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    ExplicitBases {
        n: usize,
        bases: Vec<Vec<usize>>,
    },
    Gammoid {
        digraph: DigraphJson,
        #[serde(rename = "U")]
        u: Vec<String>,
        #[serde(rename = "S")]
        s: Vec<String>,
    },
}

#[derive(Debug, Deserialize)]
pub struct DigraphJson {
    pub vertices: Vec<String>,
    pub arcs: Vec<(String, String)>,
}

#[derive(Debug, Deserialize)]
pub struct GammoidJson {
    pub digraph: DigraphJson,
    #[serde(rename = "U")]
    pub u: Vec<String>,
    #[serde(rename = "S")]
    pub s: Vec<String>,
}

impl GammoidJson {
    pub fn build(&self) -> Result<GammoidPresentation> {
        GammoidPresentation::new(
            self.digraph.vertices.clone(),
            self.digraph.arcs.clone(),
            self.u.clone(),
            self.s.clone(),
        )
    }
}

/// Parses raw bytes, mapping serde failures to line/column diagnostics.
pub fn parse_instance(bytes: &[u8]) -> Result<InstanceFile> {
    serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

// ---------------------------------------------------------------------------
// Semantic layer

/// A validated instance: parsed file, constructed frontend, and identity for
/// certificates (`id` is the file stem, `hash` the SHA-256 of the bytes).
pub struct Instance {
    id: String,
    hash: String,
    warnings: Vec<String>,
    frontend: Frontend,
}

pub enum Frontend {
    Tu {
        p: HPolyhedron,
    },
    Ntu {
        sys: NearlyTu,
    },
    Polymatroid {
        f: SubmodularFn,
        kind: PolymatroidKind,
    },
    Matroid {
        spec: MatroidSpec,
        f: SubmodularFn,
    },
    Glued {
        network: GluedFlowNetwork,
    },
    Vertices {
        hull: Hull,
    },
    Projection {
        keep: usize,
        inner: Box<Frontend>,
    },
}

impl Instance {
    pub fn load(path: &Path, caps: &Caps) -> Result<Instance> {
        let bytes = std::fs::read(path)?;
        let id = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "instance".to_string());
        Instance::from_bytes(&bytes, &id, caps)
    }

    pub fn from_bytes(bytes: &[u8], id: &str, caps: &Caps) -> Result<Instance> {
        let file = parse_instance(bytes)?;
        let mut warnings = Vec::new();
        let frontend = build_frontend(&file, caps, &mut warnings)?;
        let hash = format!("{:x}", Sha256::digest(bytes));
        Ok(Instance {
            id: id.to_string(),
            hash,
            warnings,
            frontend,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn frontend(&self) -> &Frontend {
        &self.frontend
    }

    /// Dimension of the space decompositions and enumerations live in.
    pub fn ambient_dim(&self) -> usize {
        self.frontend.ambient_dim()
    }

    /// Dimension of the instance polyhedron itself, for the support-size
    /// bound `t ≤ dim(P) + 1`.
    pub fn intrinsic_dim(&self, caps: &Caps) -> Result<usize> {
        self.frontend.intrinsic_dim(caps)
    }

    pub fn decompose(&self, w: &[BigInt], k: u64, caps: &Caps) -> Result<Decomposition> {
        if k == 0 {
            return Err(Error::invalid("k must be at least 1"));
        }
        if k > u64::from(caps.k_max) {
            return Err(Error::CapExceeded(format!(
                "k = {k} exceeds the k_max cap ({})",
                caps.k_max
            )));
        }
        if w.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: w.len(),
            });
        }
        self.frontend.decompose(w, k, caps)
    }

    /// Exact membership of an integer point in the instance polyhedron.
    pub fn contains(&self, x: &[BigInt], caps: &Caps) -> Result<bool> {
        if x.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                got: x.len(),
            });
        }
        self.frontend.contains(x, caps)
    }

    /// All integer points of the instance polyhedron, optionally clamped to
    /// a box, ascending lexicographically.
    pub fn enumerate(
        &self,
        bbox: Option<(&[BigInt], &[BigInt])>,
        caps: &Caps,
    ) -> Result<Vec<Vec<BigInt>>> {
        if let Some((lo, hi)) = bbox {
            if lo.len() != self.ambient_dim() || hi.len() != self.ambient_dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim(),
                    got: lo.len().max(hi.len()),
                });
            }
        }
        self.frontend.enumerate(bbox, caps)
    }

    /// Lattice points used as generators by the IDP/ICP/rank checkers.
    pub fn generators(&self, caps: &Caps) -> Result<Vec<Vec<BigInt>>> {
        self.frontend.enumerate(None, caps)
    }

    /// The inequality representation, for box-integrality checks.  Explicit
    /// vertex lists and projections have none.
    pub fn h_polyhedron(&self, caps: &Caps) -> Result<HPolyhedron> {
        self.frontend.h_polyhedron(caps)
    }

    /// The matrix whose total unimodularity the `tu` property check covers.
    pub fn tu_matrix(&self) -> Result<Vec<Vec<BigInt>>> {
        match &self.frontend {
            Frontend::Tu { p } => Ok((0..p.num_rows()).map(|i| p.row(i).0.to_vec()).collect()),
            Frontend::Ntu { sys } => Ok(sys.a_hat.clone()),
            Frontend::Glued { network } => Ok(network.incidence_matrix()),
            _ => Err(Error::invalid(
                "the tu property applies to tu, ntu, and gammoid_intersection instances",
            )),
        }
    }

    /// The value table the `submodular` property check covers.
    pub fn submodular_table(&self, caps: &Caps) -> Result<SubmodularFn> {
        match &self.frontend {
            Frontend::Polymatroid { f, .. } => Ok(f.clone()),
            Frontend::Matroid { spec, .. } => rank_from_constructor(spec, caps),
            _ => Err(Error::invalid(
                "the submodular property applies to polymatroid and matroid instances",
            )),
        }
    }
}

fn bigint_rows(a: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    a.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

fn bigint_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn build_frontend(
    file: &InstanceFile,
    caps: &Caps,
    warnings: &mut Vec<String>,
) -> Result<Frontend> {
    match file {
        InstanceFile::Tu { a, b } => {
            let rows = bigint_rows(a);
            let report = check_tu(&rows, caps);
            if let Some(v) = report.violation {
                return Err(Error::invalid(format!(
                    "matrix is not totally unimodular: rows {:?}, columns {:?} have determinant {}",
                    v.rows, v.cols, v.determinant
                )));
            }
            if !report.exhaustive {
                warnings.push("unverified-TU".to_string());
            }
            let n = rows.first().map_or(0, Vec::len);
            let p = HPolyhedron::new(n, rows, bigint_vec(b))?;
            Ok(Frontend::Tu { p })
        }
        InstanceFile::Ntu {
            a_hat,
            row_index,
            c,
            b,
        } => {
            let sys = NearlyTu::new(
                bigint_rows(a_hat),
                *row_index,
                bigint_vec(c),
                bigint_vec(b),
            )?;
            let report = sys.validate(caps);
            if let Some(v) = report.violation {
                return Err(Error::invalid(format!(
                    "base matrix is not totally unimodular: rows {:?}, columns {:?} have determinant {}",
                    v.rows, v.cols, v.determinant
                )));
            }
            if !report.exhaustive {
                warnings.push("unverified-TU".to_string());
            }
            Ok(Frontend::Ntu { sys })
        }
        InstanceFile::Polymatroid { kind, n, values } => {
            let f = SubmodularFn::new(*n, bigint_vec(values), caps)?;
            Ok(Frontend::Polymatroid {
                f,
                kind: (*kind).into(),
            })
        }
        InstanceFile::Matroid { constructor } => {
            let spec = build_matroid_spec(constructor)?;
            let f = rank_from_constructor(&spec, caps)?;
            Ok(Frontend::Matroid { spec, f })
        }
        InstanceFile::GammoidIntersection { m1, m2, phi, k } => {
            let g1 = m1.build()?;
            let g2 = m2.build()?;
            let phi_idx = resolve_phi(&g1, &g2, phi.as_ref())?;
            let network = glue(&g1, &g2, phi_idx.as_deref())?;
            if network.k() != *k {
                return Err(Error::invalid(format!(
                    "instance declares k = {k} but the common rank is {}",
                    network.k()
                )));
            }
            Ok(Frontend::Glued { network })
        }
        InstanceFile::Vertices { vertices } => {
            let hull = Hull::new(bigint_rows(vertices))?;
            Ok(Frontend::Vertices { hull })
        }
        InstanceFile::Projection { keep_coords, inner } => {
            if matches!(
                inner.as_ref(),
                InstanceFile::Ntu { .. }
                    | InstanceFile::Vertices { .. }
                    | InstanceFile::Projection { .. }
            ) {
                return Err(Error::invalid(
                    "projection wraps tu, polymatroid, matroid, or gammoid_intersection instances",
                ));
            }
            let inner = build_frontend(inner, caps, warnings)?;
            let limit = inner.ambient_dim();
            if *keep_coords == 0 || *keep_coords > limit {
                return Err(Error::invalid(format!(
                    "keep_coords must lie in 1..={limit}"
                )));
            }
            Ok(Frontend::Projection {
                keep: *keep_coords,
                inner: Box::new(inner),
            })
        }
    }
}

fn build_matroid_spec(c: &ConstructorJson) -> Result<MatroidSpec> {
    Ok(match c {
        ConstructorJson::Uniform { n, r } => MatroidSpec::Uniform { n: *n, r: *r },
        ConstructorJson::Partition { blocks, capacities } => MatroidSpec::Partition {
            blocks: blocks.clone(),
            capacities: capacities.clone(),
        },
        ConstructorJson::Graphic { vertices, edges } => MatroidSpec::Graphic {
            vertices: *vertices,
            edges: edges.clone(),
        },
        ConstructorJson::ExplicitBases { n, bases } => MatroidSpec::ExplicitBases {
            n: *n,
            bases: bases.clone(),
        },
        ConstructorJson::Gammoid { digraph, u, s } => MatroidSpec::Gammoid(
            GammoidPresentation::new(
                digraph.vertices.clone(),
                digraph.arcs.clone(),
                u.clone(),
                s.clone(),
            )?,
        ),
    })
}

/// Turns the label-level ground map into position indices for `glue`.
/// Omitted, it matches equal labels across the two ground sets.
fn resolve_phi(
    g1: &GammoidPresentation,
    g2: &GammoidPresentation,
    phi: Option<&BTreeMap<String, String>>,
) -> Result<Option<Vec<usize>>> {
    let from = g1.ground_labels();
    let to = g2.ground_labels();
    let position = |label: &str| -> Result<usize> {
        to.iter().position(|l| *l == label).ok_or_else(|| {
            Error::invalid(format!("{label:?} is not a ground element of the right matroid"))
        })
    };
    match phi {
        None => {
            if from == to {
                return Ok(None);
            }
            let idx = from
                .iter()
                .map(|l| position(l))
                .collect::<Result<Vec<_>>>()
                .map_err(|_| {
                    Error::invalid(
                        "phi omitted but the ground labels do not match; give an explicit map",
                    )
                })?;
            Ok(Some(idx))
        }
        Some(map) => {
            let idx = from
                .iter()
                .map(|l| {
                    let target = map.get(*l).ok_or_else(|| {
                        Error::invalid(format!("phi is missing ground element {l:?}"))
                    })?;
                    position(target)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some(idx))
        }
    }
}

impl Frontend {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Frontend::Tu { p } => p.dim_ambient(),
            Frontend::Ntu { sys } => sys.dim(),
            Frontend::Polymatroid { f, .. } => f.n(),
            Frontend::Matroid { f, .. } => f.n(),
            Frontend::Glued { network } => network.element_count(),
            Frontend::Vertices { hull } => hull.n(),
            Frontend::Projection { keep, .. } => *keep,
        }
    }

    fn intrinsic_dim(&self, caps: &Caps) -> Result<usize> {
        match self {
            Frontend::Vertices { hull } => Ok(hull.dimension()),
            Frontend::Ntu { sys } => sys.inequality_polyhedron()?.dimension(),
            Frontend::Glued { network } => network
                .flow_polytope(caps)?
                .projected_dimension(network.element_count()),
            Frontend::Projection { keep, inner } => {
                inner.h_polyhedron(caps)?.projected_dimension(*keep)
            }
            _ => self.h_polyhedron(caps)?.dimension(),
        }
    }

    /// Inequality representation in the full (pre-projection) space.
    fn h_polyhedron(&self, caps: &Caps) -> Result<HPolyhedron> {
        match self {
            Frontend::Tu { p } => Ok(p.clone()),
            Frontend::Ntu { sys } => sys.inequality_polyhedron(),
            Frontend::Polymatroid { f, kind } => {
                require_submodular(f)?;
                polymatroid_family(f, *kind, caps)
            }
            Frontend::Matroid { f, .. } => polymatroid_family(f, PolymatroidKind::Base, caps),
            Frontend::Glued { network } => network.flow_polytope(caps),
            Frontend::Vertices { .. } => Err(Error::invalid(
                "explicit-vertex instances have no inequality representation",
            )),
            Frontend::Projection { .. } => Err(Error::invalid(
                "projections have no inequality representation in the projected space",
            )),
        }
    }

    fn decompose(&self, w: &[BigInt], k: u64, caps: &Caps) -> Result<Decomposition> {
        match self {
            Frontend::Ntu { sys } => sys.decompose(w, k),
            Frontend::Glued { network } => network.common_base_decompose(w, k, caps),
            Frontend::Vertices { hull } => {
                let cand = hull.integer_points(caps)?;
                match min_decomposition(&cand, w, k, true, caps)? {
                    Some(d) => Ok(d),
                    None if !hull.dilate(k).contains_int(w) => Err(Error::not_member(format!(
                        "target is outside the {k}-fold dilation of the hull"
                    ))),
                    // Member, but every writing of it uses dependent points.
                    None => Err(Error::AffineDependence),
                }
            }
            Frontend::Projection { keep, inner } => {
                debug_assert_eq!(w.len(), *keep);
                let full = inner.h_polyhedron(caps)?;
                project_decompose(&full, w, k)
            }
            _ => icp_decompose(&self.h_polyhedron(caps)?, w, k),
        }
    }

    fn contains(&self, x: &[BigInt], caps: &Caps) -> Result<bool> {
        match self {
            Frontend::Tu { p } => Ok(p.contains_int(x)),
            Frontend::Ntu { sys } => Ok(sys.contains_int(x)),
            Frontend::Vertices { hull } => Ok(hull.contains_int(x)),
            Frontend::Glued { network } => {
                fiber_feasible(&network.flow_polytope(caps)?, x)
            }
            Frontend::Projection { inner, .. } => {
                fiber_feasible(&inner.h_polyhedron(caps)?, x)
            }
            _ => Ok(self.h_polyhedron(caps)?.contains_int(x)),
        }
    }

    fn enumerate(
        &self,
        bbox: Option<(&[BigInt], &[BigInt])>,
        caps: &Caps,
    ) -> Result<Vec<Vec<BigInt>>> {
        match self {
            Frontend::Vertices { hull } => {
                let mut pts = hull.integer_points(caps)?;
                if let Some((lo, hi)) = bbox {
                    pts.retain(|p| {
                        p.iter()
                            .zip(lo.iter().zip(hi))
                            .all(|(v, (l, h))| l <= v && v <= h)
                    });
                }
                Ok(pts)
            }
            Frontend::Glued { network } => {
                let full = network.flow_polytope(caps)?;
                enumerate_projected(&full, network.element_count(), bbox, caps)
            }
            Frontend::Projection { keep, inner } => {
                let full = inner.h_polyhedron(caps)?;
                enumerate_projected(&full, *keep, bbox, caps)
            }
            _ => {
                let mut p = self.h_polyhedron(caps)?;
                if let Some((lo, hi)) = bbox {
                    p = p.intersect(&box_polyhedron(p.dim_ambient(), lo, hi))?;
                }
                enumerate_integer_points(&p, caps)
            }
        }
    }
}

fn require_submodular(f: &SubmodularFn) -> Result<()> {
    if let Some((mask, i, j)) = f.submodularity_violation() {
        return Err(Error::invalid(format!(
            "values are not submodular: adding elements {i} and {j} to mask {mask:#b} \
             violates the exchange inequality"
        )));
    }
    Ok(())
}

/// Membership in a coordinate projection: fix the leading coordinates and
/// test the fiber for feasibility.  Rational feasibility is enough — the
/// callers' polyhedra have integral fibers by construction.
fn fiber_feasible(full: &HPolyhedron, x: &[BigInt]) -> Result<bool> {
    let mut fiber = full.clone();
    for (i, v) in x.iter().enumerate() {
        fiber = fiber.fix_coord(i, v);
    }
    Ok(lp::feasible_point(&fiber).is_some())
}

/// `{x : lo ≤ x_i ≤ hi for the leading coordinates}` in ambient dimension
/// `n`; the box may touch fewer coordinates than `n`.
fn box_polyhedron(n: usize, lo: &[BigInt], hi: &[BigInt]) -> HPolyhedron {
    let mut p = HPolyhedron::free_space(n);
    for i in 0..lo.len() {
        p.set_lower(i, lo[i].clone());
        p.set_upper(i, hi[i].clone());
    }
    p
}

/// Integer points of the projection of `full` onto its first `keep`
/// coordinates, deduplicated and sorted.  Correct because the callers'
/// polytopes have integer points over every integral fiber value.
fn enumerate_projected(
    full: &HPolyhedron,
    keep: usize,
    bbox: Option<(&[BigInt], &[BigInt])>,
    caps: &Caps,
) -> Result<Vec<Vec<BigInt>>> {
    let mut p = full.clone();
    if let Some((lo, hi)) = bbox {
        p = p.intersect(&box_polyhedron(full.dim_ambient(), lo, hi))?;
    }
    let mut pts: Vec<Vec<BigInt>> = enumerate_integer_points(&p, caps)?
        .into_iter()
        .map(|mut v| {
            v.truncate(keep);
            v
        })
        .collect();
    pts.sort_unstable();
    pts.dedup();
    Ok(pts)
}
