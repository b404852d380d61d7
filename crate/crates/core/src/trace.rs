//! Run traces and metrics records emitted by the solver pipelines.
//!
//! Traces are JSON-lines: a header object followed by one object per round.
//! Every field that feeds a downstream assertion (degree envelopes,
//! potential trajectory, migration totals) is recorded per round so the
//! analysis quantities are observable without re-running.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RunTrace {
    pub algo: String,
    pub mode: String,
    pub n: u32,
    pub edges_initial: usize,
    pub rank: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Rational surrogate used for `log m` powers in exact arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_log_m: Option<String>,
    pub rounds: Vec<RoundRecord>,
    /// Logged precondition or induction-analog violations (non-fatal).
    pub warnings: Vec<String>,
    /// Stage transitions where the chosen minimum exceeded the previous
    /// potential (should be zero).
    #[serde(default)]
    pub phi_violations: usize,
    /// Fresh migration summands that started above the settled floor
    /// (diagnostic only).
    #[serde(default)]
    pub p3_violations: usize,
    pub mis_size: usize,
    pub verified: bool,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: usize,
    /// Scheduled degree scale for this round.
    pub v: f64,
    /// Marking probability in effect.
    pub p: f64,
    pub edges: usize,
    pub singletons: usize,
    pub committed_total: usize,
    pub committed_round: usize,
    /// Least v such that the graph is v-constrained, per envelope regime.
    pub minv_plain: f64,
    pub minv_f: f64,
    pub minv_g: f64,
    /// Status of the residual against 2v (equilibrium) and 0.99v (decrease),
    /// plain envelope.
    pub within_2v: bool,
    pub within_099v: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub migration_total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collapse_count: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub stages: Vec<StageRecord>,
}

/// One potential-minimization stage of a deterministic round.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct StageRecord {
    pub i: usize,
    /// Index of the chosen vector in canonical support order.
    pub chosen: usize,
    /// Potential before and after the choice (natural log).
    pub ln_phi_before: f64,
    pub ln_phi_after: f64,
    /// Class subtotals (natural log) after the choice.
    pub ln_migration_part: f64,
    pub ln_collapse_part: f64,
    pub ln_settled_part: f64,
}

impl RunTrace {
    pub fn new(algo: &str, mode: &str, n: u32, m: usize, r: usize, seed: Option<u64>) -> Self {
        RunTrace {
            algo: algo.into(),
            mode: mode.into(),
            n,
            edges_initial: m,
            rank: r,
            seed,
            ..Default::default()
        }
    }

    pub fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }

    /// Header line plus one line per round.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let header = serde_json::json!({
            "algo": self.algo,
            "mode": self.mode,
            "n": self.n,
            "edges_initial": self.edges_initial,
            "rank": self.rank,
            "seed": self.seed,
            "lambda_log_m": self.lambda_log_m,
            "mis_size": self.mis_size,
            "verified": self.verified,
            "rounds": self.rounds.len(),
            "warnings": self.warnings,
        });
        out.push_str(&header.to_string());
        out.push('\n');
        for r in &self.rounds {
            out.push_str(&serde_json::to_string(r).expect("round record serializes"));
            out.push('\n');
        }
        out
    }
}

/// One completed run, as emitted by the suite harness.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub instance: String,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub rounds: usize,
    pub stages: usize,
    pub wall_ms: u64,
    pub mis_size: usize,
    pub verified: bool,
    pub phi_violations: usize,
    pub envelope_violations: usize,
}
