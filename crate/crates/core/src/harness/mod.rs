//! Experiment drivers, independent oracles, and test-instance generators.
//!
//! Every numerical claim in a report names the oracle or congruence that
//! produced it, and reports are byte-deterministic functions of their inputs
//! (including seeds): no clocks, no unordered maps.

pub mod experiment;
pub mod generate;
pub mod oracle;

use serde::Serialize;

use crate::domain::DomainSpec;
use crate::error::Result;

/// Envelope for experiment results: what ran, over which domain, on which
/// inputs, what came out, and which oracles or congruences back each claim.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport<O> {
    pub kind: &'static str,
    pub domain: DomainSpec,
    pub inputs: serde_json::Value,
    pub outcome: O,
    /// Provenance notes: the oracle or congruence behind each claim.
    pub oracles: Vec<String>,
    /// Honesty notes: heuristics used and what the finite data cannot show.
    pub caveats: Vec<String>,
}

impl<O: Serialize> ExperimentReport<O> {
    /// Canonical JSON rendering (sorted keys, no whitespace variation).
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| crate::error::Error::Parse {
            offset: 0,
            message: format!("report serialization failed: {e}"),
        })
    }
}
