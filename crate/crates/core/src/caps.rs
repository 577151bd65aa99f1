//! Resource caps for the exponential-cost operations.
//!
//! Defaults are desk-scale; the `ICPKIT_CAPS` environment variable overrides
//! individual fields as comma-separated `key=value` pairs, e.g.
//! `ICPKIT_CAPS=lattice_volume=50000,parallel=0`.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Caps {
    /// Maximum number of lattice points an enumeration box may contain.
    pub lattice_volume: u64,
    /// Largest matrix dimension checked exhaustively for total unimodularity.
    pub tu_exhaustive: usize,
    /// Random submatrices sampled when a matrix is above the exhaustive cap.
    pub tu_samples: u64,
    /// Largest k the oracle rank search will scan.
    pub k_max: u32,
    /// Maximum candidate tight systems probed per box-integrality check.
    pub box_probes: u64,
    /// Ground-set size cap for submodular function tables.
    pub ground_set: usize,
    /// Maximum constraint rows materialized into one LP.
    pub lp_rows: usize,
    /// Maximum support size tried by the oracle decomposition search.
    pub support_points: usize,
    /// Wall-clock budget (seconds) for open-ended witness searches.
    pub budget_secs: u64,
    /// Run data-parallel sweeps on the rayon pool (needs the `parallel`
    /// feature; ignored otherwise).
    pub parallel: bool,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            lattice_volume: 200_000,
            tu_exhaustive: 8,
            tu_samples: 2_000,
            k_max: 20,
            box_probes: 2_000_000,
            ground_set: 16,
            lp_rows: 4_096,
            support_points: 10,
            budget_secs: 240,
            parallel: cfg!(feature = "parallel"),
        }
    }
}

impl Caps {
    /// Defaults overridden by `ICPKIT_CAPS`, if set.
    pub fn from_env() -> Result<Self> {
        match std::env::var("ICPKIT_CAPS") {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Caps::default()),
        }
    }

    pub fn parse(spec: &str) -> Result<Self> {
        let mut caps = Caps::default();
        for item in spec.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("caps entry {item:?} is not key=value")))?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: std::num::ParseIntError| {
                Error::invalid(format!("caps entry {key}: bad value {value:?}: {e}"))
            };
            match key {
                "lattice_volume" => caps.lattice_volume = value.parse().map_err(bad)?,
                "tu_exhaustive" => caps.tu_exhaustive = value.parse().map_err(bad)?,
                "tu_samples" => caps.tu_samples = value.parse().map_err(bad)?,
                "k_max" => caps.k_max = value.parse().map_err(bad)?,
                "box_probes" => caps.box_probes = value.parse().map_err(bad)?,
                "ground_set" => caps.ground_set = value.parse().map_err(bad)?,
                "lp_rows" => caps.lp_rows = value.parse().map_err(bad)?,
                "support_points" => caps.support_points = value.parse().map_err(bad)?,
                "budget_secs" => caps.budget_secs = value.parse().map_err(bad)?,
                "parallel" => caps.parallel = value.parse::<u8>().map_err(bad)? != 0,
                _ => return Err(Error::invalid(format!("unknown caps key {key:?}"))),
            }
        }
        Ok(caps)
    }
}
