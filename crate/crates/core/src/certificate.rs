//! Decomposition certificates: the verified artifact `decompose` prints,
//! plus the pinned-witness fixture the rank search writes.
//!
//! A certificate repeats the claim (`w`, `k`, the decomposition) together
//! with re-checked verdicts: the weighted sum, the multiplicity count, exact
//! membership of every support point, affine independence, and the support
//! bound `t ≤ dim(P) + 1`.  Checks are recomputed from the instance here,
//! not copied from the solver, so a certificate with `"status": "ok"` is
//! evidence independent of the decomposition path.  Field order is fixed by
//! declaration and all rationals print canonically, making equal runs
//! byte-equal.

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::caps::Caps;
use crate::error::{Error, Result};
use crate::icp::Decomposition;
use crate::instance::Instance;
use crate::linalg::affinely_independent_ints;
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceRef {
    pub id: String,
    pub hash: String,
}

impl InstanceRef {
    pub fn of(inst: &Instance) -> Self {
        InstanceRef {
            id: inst.id().to_string(),
            hash: inst.hash().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionOut {
    pub points: Vec<Vec<i64>>,
    pub multiplicities: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertChecks {
    pub sum_ok: bool,
    pub count_ok: bool,
    pub membership_ok: bool,
    pub affine_independent: bool,
    pub t: usize,
    pub dim_bound: bool,
}

impl CertChecks {
    pub fn all_ok(&self) -> bool {
        self.sum_ok
            && self.count_ok
            && self.membership_ok
            && self.affine_independent
            && self.dim_bound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub total_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub instance: InstanceRef,
    pub command: String,
    pub k: u64,
    pub w: Vec<i64>,
    pub decomposition: DecompositionOut,
    pub checks: CertChecks,
    pub warnings: Vec<String>,
    /// Present only on request (`--timing`); wall-clock measurements would
    /// otherwise break byte-determinism.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
    pub status: String,
}

impl Certificate {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn to_json(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(self).expect("certificate serializes")
        } else {
            serde_json::to_string(self).expect("certificate serializes")
        }
    }
}

/// Builds and verifies the certificate for a computed decomposition.
pub fn build_certificate(
    inst: &Instance,
    dec: &Decomposition,
    w: &[BigInt],
    k: u64,
    caps: &Caps,
) -> Result<Certificate> {
    let sum_ok = dec.weighted_sum() == w;
    let count_ok = dec.total_multiplicity() == k;
    let memberships = par::map_collect(caps.parallel, &dec.points, |x| inst.contains(x, caps));
    let mut membership_ok = true;
    for verdict in memberships {
        membership_ok &= verdict?;
    }
    let affine_independent = affinely_independent_ints(&dec.points)?;
    let t = dec.support_size();
    let dim_bound = t <= inst.intrinsic_dim(caps)? + 1;
    let checks = CertChecks {
        sum_ok,
        count_ok,
        membership_ok,
        affine_independent,
        t,
        dim_bound,
    };
    let status = if checks.all_ok() { "ok" } else { "checks_failed" };
    Ok(Certificate {
        instance: InstanceRef::of(inst),
        command: "decompose".to_string(),
        k,
        w: to_i64_vec(w)?,
        decomposition: DecompositionOut {
            points: dec
                .points
                .iter()
                .map(|p| to_i64_vec(p))
                .collect::<Result<_>>()?,
            multiplicities: dec.multiplicities.clone(),
        },
        checks,
        warnings: inst.warnings().to_vec(),
        timing: None,
        status: status.to_string(),
    })
}

/// A rank-search discovery pinned to a file, so later runs revalidate the
/// minimal support size directly instead of searching again.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankFixture {
    pub instance: String,
    pub k: u64,
    pub w: Vec<i64>,
    pub min_t: usize,
}

impl RankFixture {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("fixture serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<RankFixture> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }
}

fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            i64::try_from(x).map_err(|_| Error::invalid("value exceeds the 64-bit output range"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle_instance() -> Instance {
        let json = r#"{"type": "tu", "A": [[-1, 0], [0, -1], [1, 1]], "b": [0, 0, 2]}"#;
        Instance::from_bytes(json.as_bytes(), "triangle", &Caps::default()).unwrap()
    }

    #[test]
    fn verified_certificate_reports_ok_and_serializes_deterministically() {
        let caps = Caps::default();
        let inst = triangle_instance();
        let w: Vec<BigInt> = [3, 2].iter().map(|&v| BigInt::from(v)).collect();
        let dec = inst.decompose(&w, 3, &caps).unwrap();
        let cert = build_certificate(&inst, &dec, &w, 3, &caps).unwrap();
        assert!(cert.ok());
        assert!(cert.checks.all_ok());
        assert_eq!(cert.checks.t, dec.support_size());
        let a = cert.to_json(false);
        let b = build_certificate(&inst, &dec, &w, 3, &caps)
            .unwrap()
            .to_json(false);
        assert_eq!(a, b);
        // declared field order survives serialization
        assert!(a.starts_with(r#"{"instance":{"id":"triangle","hash":""#), "{a}");
        assert!(!a.contains("timing"));
        let back: Certificate = serde_json::from_str(&a).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn tampered_decomposition_fails_the_checks() {
        let caps = Caps::default();
        let inst = triangle_instance();
        let w: Vec<BigInt> = [3, 2].iter().map(|&v| BigInt::from(v)).collect();
        let mut dec = inst.decompose(&w, 3, &caps).unwrap();
        dec.multiplicities[0] += 1;
        let cert = build_certificate(&inst, &dec, &w, 3, &caps).unwrap();
        assert!(!cert.ok());
        assert_eq!(cert.status, "checks_failed");
        assert!(!cert.checks.sum_ok || !cert.checks.count_ok);
    }

    #[test]
    fn membership_is_rechecked_against_the_instance() {
        let caps = Caps::default();
        let inst = triangle_instance();
        let w: Vec<BigInt> = [4, 2].iter().map(|&v| BigInt::from(v)).collect();
        // Fake support outside P with a correct sum: (4,2) = 2·(2,1).
        let dec = Decomposition {
            points: vec![[2, 1].iter().map(|&v| BigInt::from(v)).collect()],
            multiplicities: vec![2],
            k: 2,
        };
        let cert = build_certificate(&inst, &dec, &w, 2, &caps).unwrap();
        assert!(cert.checks.sum_ok);
        assert!(!cert.checks.membership_ok);
        assert!(!cert.ok());
    }

    #[test]
    fn fixture_round_trips() {
        let fx = RankFixture {
            instance: "bruns".to_string(),
            k: 20,
            w: vec![9, 8, 8, 8, 8],
            min_t: 7,
        };
        let s = fx.to_json();
        assert_eq!(
            s,
            r#"{"instance":"bruns","k":20,"w":[9,8,8,8,8],"min_t":7}"#
        );
        assert_eq!(RankFixture::from_json(s.as_bytes()).unwrap(), fx);
    }
}
