//! End-to-end acceptance: eight criteria, one verdict line each.
//!
//! Everything runs in one test so later criteria can reuse the certificate
//! sweep from the first and so the verdict lines come out in order.  A
//! failing criterion does not stop the others; the test fails at the end if
//! any line reads FAIL.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use icpkit::caps::Caps;
use icpkit::certificate::{build_certificate, RankFixture};
use icpkit::error::Error;
use icpkit::instance::{parse_instance, Frontend, Instance, InstanceFile};
use icpkit::oracle::{caratheodory_rank_search, min_decomposition, minimal_support_size};

const SEED: u64 = 0x1c9d_0f2a;
const SAMPLES_PER_K: usize = 10;
const KMAX_SWEEP: u64 = 5;

/// The decomposition corpus: every entry must decompose on sampled targets.
/// Explicit-vertex instances (bruns, odd_simplex, square) are oracle-side
/// artifacts and are covered by criteria 4 and the unit suites instead.
const CORPUS: &[&str] = &[
    // totally unimodular systems, n ≤ 5
    "tu_triangle",
    "tu_cube3",
    "tu_interval4",
    "tu_network5",
    "tu_simplex5",
    "tu_transport",
    // nearly totally unimodular systems, n ≤ 3
    "ntu_counterexample",
    "ntu_scaled",
    "ntu_simplex2",
    "ntu_band3",
    // submodular value tables and matroid constructors, n ≤ 6
    "pm_rank2_base",
    "pm_poly3",
    "pm_extended3",
    "u23",
    "graphic_k4",
    "partition_m",
    "explicit_pairs",
    "matroid_gammoid",
    // glued gammoid pairs, ≤ 8 presentation vertices
    "gi_single",
    "gi_ten_arc",
    "gi_free2",
    "gi_u23_pair",
    "gi_mixed",
    // coordinate projections
    "proj_cube2",
    "proj_base2",
    "proj_tree3",
];

const MATROID_FILES: &[&str] = &[
    "u23",
    "graphic_k4",
    "partition_m",
    "explicit_pairs",
    "matroid_gammoid",
];

const NTU_FILES: &[&str] = &["ntu_counterexample", "ntu_scaled", "ntu_simplex2", "ntu_band3"];

fn instances_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../instances")
}

fn load(name: &str, caps: &Caps) -> Result<Instance, String> {
    Instance::load(&instances_dir().join(format!("{name}.json")), caps)
        .map_err(|e| format!("loading {name}: {e}"))
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Everything criterion 1 computes that later criteria reuse.
struct Sweep {
    /// Per instance, in corpus order: serialized certificates in sample order.
    cert_json: Vec<(String, Vec<String>)>,
    /// Successful decompositions: (instance, k, target).
    successes: Vec<(String, u64, Vec<BigInt>)>,
    /// Full lattices of instances small enough for the oracle.
    lattices: BTreeMap<String, Vec<Vec<BigInt>>>,
    /// (instance, support size, ground size) for matroid-base certificates.
    matroid_supports: Vec<(String, usize, usize)>,
    elapsed: Duration,
}

/// Samples `w` as a sum of `k` lattice points, decomposes, and verifies the
/// certificate, for every corpus instance.
fn run_sweep(caps: &Caps) -> Result<Sweep, String> {
    let start = Instant::now();
    let mut cert_json = Vec::new();
    let mut successes = Vec::new();
    let mut lattices = BTreeMap::new();
    let mut matroid_supports = Vec::new();
    for (idx, name) in CORPUS.iter().enumerate() {
        let inst = load(name, caps)?;
        let pool = sample_pool(name, &inst, caps)?;
        if pool.is_empty() {
            return Err(format!("{name}: empty sample pool"));
        }
        if let Ok(latt) = inst.enumerate(None, caps) {
            if latt.len() <= 10_000 {
                lattices.insert(name.to_string(), latt);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED.wrapping_add(idx as u64));
        let mut json_here = Vec::new();
        for k in 1..=KMAX_SWEEP {
            for _ in 0..SAMPLES_PER_K {
                let w = sum_of_picks(&pool, k, &mut rng);
                let dec = inst
                    .decompose(&w, k, caps)
                    .map_err(|e| format!("{name}: decompose k={k} w={w:?} failed: {e}"))?;
                let cert = build_certificate(&inst, &dec, &w, k, caps)
                    .map_err(|e| format!("{name}: certificate build failed: {e}"))?;
                if !cert.ok() {
                    return Err(format!(
                        "{name}: certificate checks failed for k={k} w={w:?}: {}",
                        cert.to_json(false)
                    ));
                }
                if MATROID_FILES.contains(name) {
                    matroid_supports.push((name.to_string(), cert.checks.t, inst.ambient_dim()));
                }
                json_here.push(cert.to_json(false));
                successes.push((name.to_string(), k, w));
            }
        }
        cert_json.push((name.to_string(), json_here));
    }
    Ok(Sweep {
        cert_json,
        successes,
        lattices,
        matroid_supports,
        elapsed: start.elapsed(),
    })
}

/// Lattice points targets are sampled from.  The one unbounded instance (an
/// extended polymatroid) is clamped to a fixed window first.
fn sample_pool(name: &str, inst: &Instance, caps: &Caps) -> Result<Vec<Vec<BigInt>>, String> {
    let result = if name == "pm_extended3" {
        let lo = ints(&[-2, -2, -2]);
        let hi = ints(&[2, 2, 2]);
        inst.enumerate(Some((&lo, &hi)), caps)
    } else {
        inst.enumerate(None, caps)
    };
    result.map_err(|e| format!("{name}: enumerating sample pool: {e}"))
}

fn sum_of_picks(pool: &[Vec<BigInt>], k: u64, rng: &mut ChaCha8Rng) -> Vec<BigInt> {
    let n = pool[0].len();
    let mut w = vec![BigInt::from(0); n];
    for _ in 0..k {
        let p = &pool[rng.gen_range(0..pool.len())];
        for (acc, v) in w.iter_mut().zip(p) {
            *acc += v;
        }
    }
    w
}

fn criterion1(sweep: &Result<Sweep, String>) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    let total: usize = sweep.cert_json.iter().map(|(_, v)| v.len()).sum();
    if sweep.elapsed > Duration::from_secs(300) {
        return Err(format!(
            "sweep exceeded the five-minute budget: {:.1}s",
            sweep.elapsed.as_secs_f64()
        ));
    }
    Ok(format!(
        "{} instances, {} verified certificates in {:.1}s",
        CORPUS.len(),
        total,
        sweep.elapsed.as_secs_f64()
    ))
}

fn criterion2(sweep: &Result<Sweep, String>, caps: &Caps) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    let mut found = 0usize;
    for (name, k, w) in &sweep.successes {
        let Some(latt) = sweep.lattices.get(name) else {
            continue;
        };
        let dec = min_decomposition(latt, w, *k, true, caps)
            .map_err(|e| format!("{name}: oracle error: {e}"))?;
        if dec.is_none() {
            return Err(format!(
                "{name}: decompose succeeded for k={k} w={w:?} but the oracle found nothing"
            ));
        }
        found += 1;
    }
    // The converse direction: push a target past the lattice maximum and
    // expect NotMember from the engine and an empty oracle search alike.
    let mut refuted = 0usize;
    for name in sweep.lattices.keys() {
        let inst = load(name, caps)?;
        let latt = &sweep.lattices[name];
        let mut w = vec![BigInt::from(0); inst.ambient_dim()];
        for p in latt {
            for (acc, v) in w.iter_mut().zip(p) {
                if *v > *acc {
                    *acc = v.clone();
                }
            }
        }
        for v in w.iter_mut() {
            *v = &*v * 2;
        }
        w[0] += 1;
        match inst.decompose(&w, 2, caps) {
            Err(Error::NotMember { .. }) => {}
            other => {
                return Err(format!(
                    "{name}: expected NotMember for w={w:?}, got {other:?}"
                ))
            }
        }
        if min_decomposition(latt, &w, 2, true, caps)
            .map_err(|e| format!("{name}: oracle error: {e}"))?
            .is_some()
        {
            return Err(format!("{name}: oracle decomposed the outside target {w:?}"));
        }
        refuted += 1;
    }
    Ok(format!(
        "{found} successes re-found by the oracle, {refuted} rejections agreed on"
    ))
}

fn criterion3(sweep: &Result<Sweep, String>) -> Result<String, String> {
    let sweep = sweep.as_ref().map_err(Clone::clone)?;
    let mut worst = 0usize;
    for (name, t, n) in &sweep.matroid_supports {
        if *t > *n {
            return Err(format!("{name}: base decomposition used {t} > n = {n} bases"));
        }
        worst = worst.max(*t);
    }
    Ok(format!(
        "{} matroid certificates, largest support {worst}",
        sweep.matroid_supports.len()
    ))
}

fn run_cli(args: &[&str]) -> Result<(i32, serde_json::Value), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_icpkit"))
        .args(args)
        .output()
        .map_err(|e| format!("spawning the CLI: {e}"))?;
    let code = out.status.code().unwrap_or(-1);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let value = serde_json::from_str(stdout.trim()).map_err(|e| {
        format!(
            "CLI {:?} produced unparseable output ({e}): {stdout:?} / stderr {:?}",
            args,
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    Ok((code, value))
}

struct BrunsOutcome {
    summary: String,
    /// Serialized fixture from the discovery search, for the determinism rerun.
    fixture_json: String,
}

fn criterion4(caps: &Caps) -> Result<BrunsOutcome, String> {
    let bruns_path = instances_dir().join("bruns.json");
    let bruns = bruns_path.to_str().ok_or("non-utf8 path")?;

    // (a) integer decomposition property holds over the searched range
    let (code, report) = run_cli(&["check", bruns, "idp", "--kmax", "4"])?;
    if code != 0 || report["holds"] != serde_json::Value::Bool(true) {
        return Err(format!("idp check came back negative: exit {code}, {report}"));
    }

    // (b) the rank search must find a support of size 7 within budget,
    // and the pinned fixture must revalidate quickly afterwards
    let inst = Instance::load(&bruns_path, caps).map_err(|e| e.to_string())?;
    let gens = inst.generators(caps).map_err(|e| e.to_string())?;
    let search = caratheodory_rank_search(&gens, 20, Some(7), caps)
        .map_err(|e| format!("rank search error: {e}"))?;
    let witness = match search.witness {
        Some(w) => w,
        None => {
            return Err(format!(
                "witness not found within the configured budget (completed={})",
                search.completed
            ))
        }
    };
    if witness.min_t != 7 {
        return Err(format!("witness has minimal support {}, expected 7", witness.min_t));
    }
    let fixture = RankFixture {
        instance: inst.id().to_string(),
        k: witness.k,
        w: witness
            .w
            .iter()
            .map(|v| i64::try_from(v).map_err(|_| "witness coordinate overflow".to_string()))
            .collect::<Result<_, _>>()?,
        min_t: witness.min_t,
    };
    let fixture_path = instances_dir().join("fixtures/bruns_witness.json");
    let fixture_json = fixture.to_json();
    match std::fs::read(&fixture_path) {
        Ok(existing) => {
            if existing != fixture_json.as_bytes() {
                return Err(format!(
                    "pinned fixture differs from the search result: {} vs {}",
                    String::from_utf8_lossy(&existing),
                    fixture_json
                ));
            }
        }
        Err(_) => {
            std::fs::write(&fixture_path, &fixture_json)
                .map_err(|e| format!("writing fixture: {e}"))?;
        }
    }
    let revalidate_start = Instant::now();
    let pinned = RankFixture::from_json(
        &std::fs::read(&fixture_path).map_err(|e| format!("reading fixture: {e}"))?,
    )
    .map_err(|e| format!("parsing fixture: {e}"))?;
    let t = minimal_support_size(&gens, &ints(&pinned.w), pinned.k, caps)
        .map_err(|e| format!("revalidation error: {e}"))?;
    let revalidate_time = revalidate_start.elapsed();
    if t != Some(pinned.min_t) {
        return Err(format!(
            "fixture revalidation found minimal support {t:?}, pinned {}",
            pinned.min_t
        ));
    }
    if revalidate_time > Duration::from_secs(30) {
        return Err(format!(
            "fixture revalidation took {:.1}s, budget is 30s",
            revalidate_time.as_secs_f64()
        ));
    }

    // (c) the affinely independent version of the property fails
    let (code, report) = run_cli(&["check", bruns, "icp", "--kmax", "20"])?;
    if code != 5 || report["holds"] != serde_json::Value::Bool(false) {
        return Err(format!("icp check should fail with exit 5, got {code}: {report}"));
    }

    Ok(BrunsOutcome {
        summary: format!(
            "idp(≤4) holds, rank-7 witness at k={} w={:?}, revalidated in {:.1}s, icp refuted",
            witness.k, pinned.w, revalidate_time.as_secs_f64()
        ),
        fixture_json,
    })
}

fn criterion5(caps: &Caps) -> Result<String, String> {
    let inst = load("ntu_counterexample", caps)?;
    let p = inst.h_polyhedron(caps).map_err(|e| e.to_string())?;
    let check = p
        .check_box_integral(&ints(&[0, 0]), &ints(&[2, 1]), caps)
        .map_err(|e| e.to_string())?;
    if check.box_integral {
        return Err("the counterexample polytope passed the box-integrality check".into());
    }
    let witness = check.witness.ok_or("no fractional witness reported")?;
    let printed: Vec<String> = witness.vertex.iter().map(|r| r.to_string()).collect();
    if printed != ["1", "1/2"] {
        return Err(format!("expected fractional vertex (1, 1/2), got {printed:?}"));
    }

    // Decomposition still succeeds on every lattice point of every dilation,
    // in exact agreement with the oracle, over the [0,4]² window.
    let latt = inst.enumerate(None, caps).map_err(|e| e.to_string())?;
    let mut decomposed = 0usize;
    for k in 1..=4u64 {
        for x0 in 0..=4i64 {
            for x1 in 0..=4i64 {
                let w = ints(&[x0, x1]);
                let engine = inst.decompose(&w, k, caps);
                let oracle = min_decomposition(&latt, &w, k, true, caps)
                    .map_err(|e| e.to_string())?;
                match (&engine, &oracle) {
                    (Ok(dec), Some(_)) => {
                        let cert = build_certificate(&inst, dec, &w, k, caps)
                            .map_err(|e| e.to_string())?;
                        if !cert.ok() {
                            return Err(format!(
                                "certificate checks failed at k={k} w={w:?}"
                            ));
                        }
                        decomposed += 1;
                    }
                    (Err(Error::NotMember { .. }), None) => {}
                    _ => {
                        return Err(format!(
                            "engine and oracle disagree at k={k} w={w:?}: {:?} vs {:?}",
                            engine.as_ref().map(|d| &d.points),
                            oracle.as_ref().map(|d| &d.points),
                        ))
                    }
                }
            }
        }
    }
    Ok(format!(
        "box-integrality refuted by vertex (1, 1/2); {decomposed} decompositions agree with the oracle"
    ))
}

fn criterion6(caps: &Caps) -> Result<String, String> {
    let mut agreed = 0usize;
    for name in NTU_FILES {
        let inst = load(name, caps)?;
        let Frontend::Ntu { sys } = inst.frontend() else {
            return Err(format!("{name} is not an ntu instance"));
        };
        let latt = inst.enumerate(None, caps).map_err(|e| e.to_string())?;
        let n = inst.ambient_dim();
        let mut hi = vec![0i64; n];
        for p in &latt {
            for (h, v) in hi.iter_mut().zip(p) {
                *h = (*h).max(i64::try_from(v).map_err(|_| "coordinate overflow")?);
            }
        }
        let a = sys.full_matrix();
        let b = &sys.b;
        for k in 1..=4u64 {
            let mut w = vec![-1i64; n];
            loop {
                let wq = ints(&w);
                let claimed = sys
                    .membership(&wq, k)
                    .map_err(|e| format!("{name}: membership error: {e}"))?
                    .is_some();
                // Direct row arithmetic on Aw ≤ kb — no shared code with the
                // membership system above.
                let direct = a.iter().zip(b).all(|(row, bi)| {
                    let lhs: BigInt = row.iter().zip(&wq).map(|(c, x)| c * x).sum();
                    lhs <= bi * k
                });
                if claimed != direct {
                    return Err(format!(
                        "{name}: membership mismatch at k={k} w={w:?}: system {claimed}, rows {direct}"
                    ));
                }
                agreed += 1;
                // odometer over the widened box [-1, k·hi + 1]^n
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    w[i] += 1;
                    if w[i] <= (k as i64) * hi[i] + 1 {
                        break;
                    }
                    w[i] = -1;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }
    Ok(format!("{agreed} membership queries matched direct row arithmetic"))
}

fn criterion7(caps: &Caps) -> Result<String, String> {
    let mut detail = String::new();
    for name in ["gi_single", "gi_ten_arc"] {
        let bytes = std::fs::read(instances_dir().join(format!("{name}.json")))
            .map_err(|e| e.to_string())?;
        let InstanceFile::GammoidIntersection { m1, m2, k, .. } =
            parse_instance(&bytes).map_err(|e| e.to_string())?
        else {
            return Err(format!("{name} is not a gammoid intersection"));
        };
        let inst = load(name, caps)?;
        let Frontend::Glued { network } = inst.frontend() else {
            return Err(format!("{name} did not build a glued network"));
        };
        let arcs = network.arc_count();
        if arcs > 10 {
            return Err(format!("{name} has {arcs} arcs, expected at most 10"));
        }
        let inc = network.incidence_matrix();
        let elems = network.element_count();

        // Brute force: all 0/1 values on the unit arcs, the return arc pinned
        // to k, conservation checked row by row; record element supports.
        let mut flow_supports: BTreeSet<Vec<u8>> = BTreeSet::new();
        for bits in 0u32..(1 << (arcs - 1)) {
            let mut x = vec![BigInt::from(0); arcs];
            for (i, xi) in x.iter_mut().enumerate().take(arcs - 1) {
                *xi = BigInt::from((bits >> i) & 1);
            }
            x[arcs - 1] = BigInt::from(k);
            let conserved = inc.iter().all(|row| {
                row.iter()
                    .zip(&x)
                    .map(|(c, v)| c * v)
                    .sum::<BigInt>()
                    .is_zero()
            });
            if conserved {
                flow_supports.insert(
                    x[..elems]
                        .iter()
                        .map(|v| u8::from(!v.is_zero()))
                        .collect(),
                );
            }
        }

        // Independent path: common bases straight from the two rank tables.
        // Both corpus networks use the identity ground map, so a subset mask
        // means the same elements on both sides.
        let g1 = m1.build().map_err(|e| e.to_string())?;
        let g2 = m2.build().map_err(|e| e.to_string())?;
        let t1 = g1.rank_table(caps).map_err(|e| e.to_string())?;
        let t2 = g2.rank_table(caps).map_err(|e| e.to_string())?;
        let n = g1.ground_size();
        let mut common: BTreeSet<Vec<u8>> = BTreeSet::new();
        for mask in 0usize..(1 << n) {
            if mask.count_ones() as u64 == k && t1[mask] == k && t2[mask] == k {
                common.insert((0..n).map(|i| ((mask >> i) & 1) as u8).collect());
            }
        }
        if flow_supports != common {
            return Err(format!(
                "{name}: flow supports {flow_supports:?} != common bases {common:?}"
            ));
        }
        let _ = write!(detail, "{name}: {} bases over {arcs} arcs; ", common.len());
    }
    Ok(detail.trim_end_matches("; ").to_string())
}

fn criterion8(
    sweep: &Result<Sweep, String>,
    bruns: &Result<BrunsOutcome, String>,
    caps: &Caps,
) -> Result<String, String> {
    let first = sweep.as_ref().map_err(Clone::clone)?;
    let second = run_sweep(caps)?;
    if first.cert_json != second.cert_json {
        for ((name, a), (_, b)) in first.cert_json.iter().zip(&second.cert_json) {
            if a != b {
                return Err(format!("{name}: certificates differ between runs"));
            }
        }
        return Err("certificate sets differ between runs".into());
    }
    let total: usize = first.cert_json.iter().map(|(_, v)| v.len()).sum();

    let fixture_first = &bruns.as_ref().map_err(Clone::clone)?.fixture_json;
    let inst = load("bruns", caps)?;
    let gens = inst.generators(caps).map_err(|e| e.to_string())?;
    let search = caratheodory_rank_search(&gens, 20, Some(7), caps)
        .map_err(|e| format!("rank re-search error: {e}"))?;
    let witness = search.witness.ok_or("witness not found on the second search")?;
    let fixture_second = RankFixture {
        instance: inst.id().to_string(),
        k: witness.k,
        w: witness
            .w
            .iter()
            .map(|v| i64::try_from(v).map_err(|_| "witness coordinate overflow".to_string()))
            .collect::<Result<_, _>>()?,
        min_t: witness.min_t,
    }
    .to_json();
    if *fixture_first != fixture_second {
        return Err(format!(
            "fixture differs between runs: {fixture_first} vs {fixture_second}"
        ));
    }
    Ok(format!(
        "{total} certificates and the rank fixture byte-identical across two runs"
    ))
}

#[test]
fn acceptance() {
    let caps = Caps::default();
    let sweep = run_sweep(&caps);
    let bruns = criterion4(&caps);
    let verdicts: Vec<(&str, Result<String, String>)> = vec![
        ("1 certificate validity", criterion1(&sweep)),
        ("2 oracle agreement", criterion2(&sweep, &caps)),
        ("3 base-count bound", criterion3(&sweep)),
        (
            "4 rank-7 polytope",
            bruns.as_ref().map(|b| b.summary.clone()).map_err(Clone::clone),
        ),
        ("5 box-integrality counterexample", criterion5(&caps)),
        ("6 membership equivalence", criterion6(&caps)),
        ("7 glue soundness", criterion7(&caps)),
        ("8 determinism", criterion8(&sweep, &bruns, &caps)),
    ];
    let mut failed = false;
    for (name, verdict) in &verdicts {
        match verdict {
            Ok(detail) => println!("acceptance {name}: PASS — {detail}"),
            Err(reason) => {
                failed = true;
                println!("acceptance {name}: FAIL — {reason}");
            }
        }
    }
    assert!(!failed, "one or more acceptance criteria failed");
}
