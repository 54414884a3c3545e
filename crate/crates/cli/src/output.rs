//! JSON shapes emitted by the subcommands. Each one deserializes back to an
//! equal value.

use lowrank_poly::concentration::{ChainVerdict, ConcentrationReport};
use lowrank_poly::LowRankApprox64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormOutput {
    pub bombieri: f64,
    pub max_coeff: f64,
}

/// Value computed by an exact oracle instead of the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutput {
    pub value: f64,
    pub method: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxOutput {
    #[serde(flatten)]
    pub approx: LowRankApprox64,
    /// `⌊eps⁻²⌋`
    pub step_bound: usize,
    pub within_bound: bool,
    /// Exact `‖p − q‖ₒ` when run with `--oracle`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual_opnorm_oracle: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrateOutput {
    pub report: ConcentrationReport<f64>,
    pub verdict: ChainVerdict<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub eps: f64,
    pub d: u32,
    pub n: usize,
    pub samples: usize,
    pub model: String,
    pub bound: usize,
    pub mean_terms: f64,
    pub max_terms: usize,
    /// Runs with more than `bound` terms. Must be 0.
    pub violations: usize,
    /// Runs whose final residual estimate exceeds `eps·‖p‖`.
    pub residual_violations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_defect_over_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_defect_over_norm_sq: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_defect_over_eps_sq_norm_sq: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchOutput {
    pub seed: u64,
    pub cells: Vec<BenchCell>,
}
