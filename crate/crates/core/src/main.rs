//! Command-line front door: `icpkit decompose | check | enumerate`.
//!
//! Exit codes are part of the contract so harnesses can assert failure
//! modes: 0 success (property holds), 1 malformed input or resource cap,
//! 2 non-membership, 3 a polyhedron outside the box-integral class,
//! 4 an internal affine-independence failure, 5 a property check that
//! came back false.

use std::path::{Path, PathBuf};
use std::process::exit;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde::Serialize;

use icpkit::caps::Caps;
use icpkit::certificate::{build_certificate, InstanceRef, Timing};
use icpkit::error::{Error, Result};
use icpkit::instance::Instance;
use icpkit::oracle::{caratheodory_rank_search, check_icp, check_idp};
use icpkit::tu::check_tu;

#[derive(Parser)]
#[command(
    name = "icpkit",
    about = "Exact integer Carathéodory decompositions of polyhedra",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write w ∈ kP as a sum of k integer points of P with affinely
    /// independent support, and print the verified certificate.
    Decompose {
        instance: PathBuf,
        /// Target point, comma-separated integers.
        #[arg(long, value_name = "w1,w2,...", allow_hyphen_values = true)]
        w: String,
        /// Number of summands (the dilation factor).
        #[arg(long)]
        k: u64,
        /// Indented output instead of one line.
        #[arg(long)]
        pretty: bool,
        /// Include wall-clock timing in the certificate.  Off by default so
        /// equal runs stay byte-equal.
        #[arg(long)]
        timing: bool,
    },
    /// Decide a property of the instance and print a report.
    Check {
        instance: PathBuf,
        #[arg(value_enum)]
        property: Property,
        /// Largest dilation factor searched by idp/icp/rank (default 4).
        #[arg(long)]
        kmax: Option<u64>,
        /// Indented output instead of one line.
        #[arg(long)]
        pretty: bool,
    },
    /// List the integer points of the instance polyhedron, ascending
    /// lexicographically.
    Enumerate {
        instance: PathBuf,
        /// Clamp to a box first: lower and upper corner, colon-separated.
        #[arg(long = "box", value_name = "l1,l2,..:h1,h2,..", allow_hyphen_values = true)]
        bbox: Option<String>,
        /// Indented output instead of one line.
        #[arg(long)]
        pretty: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    /// Total unimodularity of the instance matrix.
    Tu,
    /// Submodularity of the value table.
    Submodular,
    /// Integrality of every box section of the polyhedron.
    BoxIntegral,
    /// Every point of kP ∩ ℤⁿ is a sum of k integer points of P.
    Idp,
    /// As idp, with affinely independent summands.
    Icp,
    /// Worst minimal support sizes per dilation factor.
    Rank,
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            exit(e.exit_code());
        }
    }
}

fn run(cli: &Cli) -> Result<i32> {
    let caps = Caps::from_env()?;
    match &cli.command {
        Command::Decompose {
            instance,
            w,
            k,
            pretty,
            timing,
        } => cmd_decompose(instance, w, *k, *pretty, *timing, &caps),
        Command::Check {
            instance,
            property,
            kmax,
            pretty,
        } => cmd_check(instance, *property, *kmax, *pretty, &caps),
        Command::Enumerate {
            instance,
            bbox,
            pretty,
        } => cmd_enumerate(instance, bbox.as_deref(), *pretty, &caps),
    }
}

fn cmd_decompose(
    path: &Path,
    w_arg: &str,
    k: u64,
    pretty: bool,
    timing: bool,
    caps: &Caps,
) -> Result<i32> {
    let inst = Instance::load(path, caps)?;
    let w = parse_int_list(w_arg)?;
    let start = Instant::now();
    let dec = inst.decompose(&w, k, caps)?;
    let mut cert = build_certificate(&inst, &dec, &w, k, caps)?;
    if timing {
        cert.timing = Some(Timing {
            total_ms: start.elapsed().as_millis(),
        });
    }
    println!("{}", cert.to_json(pretty));
    // A failed recheck means the engine broke an invariant, not the user.
    Ok(if cert.ok() { 0 } else { 4 })
}

// --- check reports -------------------------------------------------------
// One struct per property so field order is fixed by declaration.

#[derive(Serialize)]
struct TuOut {
    instance: InstanceRef,
    command: &'static str,
    property: &'static str,
    holds: bool,
    /// Whether every square submatrix was examined; `false` means a clean
    /// verdict is only sampled evidence.
    exhaustive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<TuViolationOut>,
}

#[derive(Serialize)]
struct TuViolationOut {
    rows: Vec<usize>,
    cols: Vec<usize>,
    determinant: i64,
}

#[derive(Serialize)]
struct SubmodularOut {
    instance: InstanceRef,
    command: &'static str,
    property: &'static str,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    violation: Option<SubmodularViolationOut>,
}

#[derive(Serialize)]
struct SubmodularViolationOut {
    mask: usize,
    i: usize,
    j: usize,
}

#[derive(Serialize)]
struct BoxIntegralOut {
    instance: InstanceRef,
    command: &'static str,
    property: &'static str,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<BoxWitnessOut>,
}

#[derive(Serialize)]
struct BoxWitnessOut {
    box_lo: Vec<i64>,
    box_hi: Vec<i64>,
    /// Fractional vertex coordinates, canonical "p/q" strings.
    vertex: Vec<String>,
}

#[derive(Serialize)]
struct DecompPropertyOut {
    instance: InstanceRef,
    command: &'static str,
    property: &'static str,
    kmax: u64,
    holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<CounterexampleOut>,
}

#[derive(Serialize)]
struct CounterexampleOut {
    k: u64,
    w: Vec<i64>,
}

#[derive(Serialize)]
struct RankOut {
    instance: InstanceRef,
    command: &'static str,
    property: &'static str,
    kmax: u64,
    /// Largest minimal support size seen anywhere in the searched range.
    lower_bound: usize,
    /// `[k, worst minimal support size in kP]` per examined factor.
    worst_per_k: Vec<(u64, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<RankWitnessOut>,
    /// False when the wall-clock budget ran out first.
    completed: bool,
}

#[derive(Serialize)]
struct RankWitnessOut {
    k: u64,
    w: Vec<i64>,
    min_t: usize,
}

fn cmd_check(
    path: &Path,
    property: Property,
    kmax: Option<u64>,
    pretty: bool,
    caps: &Caps,
) -> Result<i32> {
    let inst = Instance::load(path, caps)?;
    let header = InstanceRef::of(&inst);
    match property {
        Property::Tu => {
            let matrix = inst.tu_matrix()?;
            let report = check_tu(&matrix, caps);
            let out = TuOut {
                instance: header,
                command: "check",
                property: "tu",
                holds: report.total_unimodular,
                exhaustive: report.exhaustive,
                violation: report
                    .violation
                    .map(|v| {
                        Ok::<_, Error>(TuViolationOut {
                            rows: v.rows,
                            cols: v.cols,
                            determinant: to_i64(&v.determinant)?,
                        })
                    })
                    .transpose()?,
            };
            emit(&out, pretty);
            Ok(verdict(out.holds))
        }
        Property::Submodular => {
            let f = inst.submodular_table(caps)?;
            let violation = f.submodularity_violation();
            let out = SubmodularOut {
                instance: header,
                command: "check",
                property: "submodular",
                holds: violation.is_none(),
                violation: violation.map(|(mask, i, j)| SubmodularViolationOut { mask, i, j }),
            };
            emit(&out, pretty);
            Ok(verdict(out.holds))
        }
        Property::BoxIntegral => {
            let p = inst.h_polyhedron(caps)?;
            let points = inst.enumerate(None, caps)?;
            let (lo, hi) = integer_bounds(&points, p.dim_ambient());
            let result = p.check_box_integral(&lo, &hi, caps)?;
            let out = BoxIntegralOut {
                instance: header,
                command: "check",
                property: "box-integral",
                holds: result.box_integral,
                witness: result
                    .witness
                    .map(|w| {
                        Ok::<_, Error>(BoxWitnessOut {
                            box_lo: w.lo.iter().map(to_i64).collect::<Result<_>>()?,
                            box_hi: w.hi.iter().map(to_i64).collect::<Result<_>>()?,
                            vertex: w.vertex.iter().map(|r| r.to_string()).collect(),
                        })
                    })
                    .transpose()?,
            };
            emit(&out, pretty);
            Ok(verdict(out.holds))
        }
        Property::Idp | Property::Icp => {
            let kmax = effective_kmax(kmax, caps)?;
            let generators = inst.generators(caps)?;
            let (name, counterexample) = match property {
                Property::Idp => ("idp", check_idp(&generators, kmax, caps)?),
                _ => ("icp", check_icp(&generators, kmax, caps)?),
            };
            let out = DecompPropertyOut {
                instance: header,
                command: "check",
                property: name,
                kmax,
                holds: counterexample.is_none(),
                counterexample: counterexample
                    .map(|(k, w)| {
                        Ok::<_, Error>(CounterexampleOut {
                            k,
                            w: w.iter().map(to_i64).collect::<Result<_>>()?,
                        })
                    })
                    .transpose()?,
            };
            emit(&out, pretty);
            Ok(verdict(out.holds))
        }
        Property::Rank => {
            let kmax = effective_kmax(kmax, caps)?;
            let generators = inst.generators(caps)?;
            let target = inst.intrinsic_dim(caps)? + 2;
            let report = caratheodory_rank_search(&generators, kmax, Some(target), caps)?;
            let from_levels = report.worst_per_k.iter().map(|&(_, t)| t).max().unwrap_or(0);
            let from_witness = report.witness.as_ref().map_or(0, |w| w.min_t);
            let out = RankOut {
                instance: header,
                command: "check",
                property: "rank",
                kmax,
                lower_bound: from_levels.max(from_witness),
                worst_per_k: report.worst_per_k,
                witness: report
                    .witness
                    .map(|w| {
                        Ok::<_, Error>(RankWitnessOut {
                            k: w.k,
                            w: w.w.iter().map(to_i64).collect::<Result<_>>()?,
                            min_t: w.min_t,
                        })
                    })
                    .transpose()?,
                completed: report.completed,
            };
            emit(&out, pretty);
            Ok(0)
        }
    }
}

fn cmd_enumerate(path: &Path, bbox: Option<&str>, pretty: bool, caps: &Caps) -> Result<i32> {
    let inst = Instance::load(path, caps)?;
    let parsed = bbox.map(parse_box).transpose()?;
    let points = inst.enumerate(
        parsed.as_ref().map(|(lo, hi)| (lo.as_slice(), hi.as_slice())),
        caps,
    )?;
    let out: Vec<Vec<i64>> = points
        .iter()
        .map(|p| p.iter().map(to_i64).collect())
        .collect::<Result<_>>()?;
    emit(&out, pretty);
    Ok(0)
}

fn emit<T: Serialize>(value: &T, pretty: bool) {
    let s = if pretty {
        serde_json::to_string_pretty(value)
    } else {
        serde_json::to_string(value)
    }
    .expect("reports serialize");
    println!("{s}");
}

fn verdict(holds: bool) -> i32 {
    if holds {
        0
    } else {
        5
    }
}

fn effective_kmax(kmax: Option<u64>, caps: &Caps) -> Result<u64> {
    let kmax = kmax.unwrap_or(4);
    if kmax > u64::from(caps.k_max) {
        return Err(Error::CapExceeded(format!(
            "kmax = {kmax} exceeds the k_max cap ({})",
            caps.k_max
        )));
    }
    Ok(kmax)
}

fn parse_int_list(s: &str) -> Result<Vec<BigInt>> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<i64>()
                .map(BigInt::from)
                .map_err(|_| Error::invalid(format!("could not parse integer {:?}", part.trim())))
        })
        .collect()
}

fn parse_box(s: &str) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| Error::invalid("box must be lower:upper, each comma-separated"))?;
    let lo = parse_int_list(lo)?;
    let hi = parse_int_list(hi)?;
    if lo.len() != hi.len() {
        return Err(Error::invalid("box corners have different lengths"));
    }
    Ok((lo, hi))
}

/// Smallest integer box containing the given points (origin if none).
fn integer_bounds(points: &[Vec<BigInt>], n: usize) -> (Vec<BigInt>, Vec<BigInt>) {
    let mut lo = vec![BigInt::from(0); n];
    let mut hi = vec![BigInt::from(0); n];
    for (i, (l, h)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
        let mut coords = points.iter().map(|p| &p[i]);
        if let Some(first) = coords.next() {
            *l = first.clone();
            *h = first.clone();
            for c in coords {
                if *c < *l {
                    *l = c.clone();
                }
                if *c > *h {
                    *h = c.clone();
                }
            }
        }
    }
    (lo, hi)
}

fn to_i64(v: &BigInt) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::invalid("value exceeds the 64-bit output range"))
}
