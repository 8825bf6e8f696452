//! Stable-schema reports for game runs.

use std::time::Duration;

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct ReportConfig {
    pub game: String,
    pub family: String,
    pub k: u64,
    pub pi: String,
    pub tau: String,
    pub trials: u32,
    pub seed: u64,
    pub adversary: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance_budget: Option<u64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QueryStats {
    pub bb_total: u64,
    pub bb_mean: f64,
    pub oracle_calls: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GameResults {
    pub successes: u64,
    pub trials: u64,
    /// Empirical success rate (mean of per-instance rates in worst-case
    /// mode).
    pub estimate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_instance_min: Option<f64>,
    /// Set when the instance space was sub-sampled instead of enumerated.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partial: Option<bool>,
    pub query_stats: QueryStats,
}

/// One game run. Wall time is measured but never serialized, so reports
/// with equal seeds compare byte-identical.
#[derive(Debug, Clone, Serialize)]
pub struct TrialReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub results: GameResults,
    #[serde(skip)]
    pub wall: Duration,
}

impl TrialReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// 95% Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(50, 100);
        assert!(lo < 0.5 && 0.5 < hi);
        assert!(lo > 0.39 && hi < 0.61);
        let (lo, hi) = wilson_interval(200, 200);
        assert!(lo > 0.97 && (hi - 1.0).abs() < 1e-12);
        let (lo, hi) = wilson_interval(0, 200);
        assert!(lo < 1e-12 && hi < 0.03);
    }
}
