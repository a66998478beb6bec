//! Experiment reports and their JSON / CSV serializations.

use std::fmt::Write as _;

use serde::Serialize;

use crate::counts::CountKind;
use crate::error::Result;
use crate::prob::Schedule;

/// CSV header, one line per [`ReportRow`].
pub const CSV_COLUMNS: &str =
    "N,n,lambda,lambda_prime,m_star,mean_r,var_r,p_upper_violation,p_lower_violation,tv_distance";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportConfig {
    pub experiment: String,
    pub p: u64,
    pub s: u32,
    pub q: u64,
    pub schedule: Schedule,
    pub seed: u64,
    pub trials: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degrees: Option<(u32, u32)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_index: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<CountKind>,
}

/// Statistics for one target `N`.
///
/// For difference experiments `lambda` holds `E t_N` and `lambda_prime` is
/// absent.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    #[serde(rename = "N")]
    pub target: u64,
    #[serde(rename = "n")]
    pub degree: u32,
    pub lambda: Option<f64>,
    pub lambda_prime: Option<f64>,
    pub m_star: Option<f64>,
    pub mean_r: f64,
    pub var_r: f64,
    /// `sqrt(Var / trials)` from the exact variance of the count.
    pub std_err: f64,
    pub p_upper_violation: Option<f64>,
    pub p_lower_violation: Option<f64>,
    pub tv_distance: Option<f64>,
    pub lambda_lower: Option<f64>,
    pub lambda_upper: Option<f64>,
    pub in_band: Option<bool>,
    pub above_log: Option<bool>,
    pub mean_within_3se: Option<bool>,
}

/// Per-trial exceedance fractions pooled over the degrees `lo..=hi`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockSummary {
    pub block: u32,
    pub degree_lo: u32,
    pub degree_hi: u32,
    pub targets: u64,
    pub median_fraction: f64,
    pub mean_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_lower_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mean_lower_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialGrowth {
    pub trial: u64,
    pub members: u64,
    pub max_count: u32,
    pub top_decade_terms: u64,
    pub median_ratio: Option<f64>,
    pub within_band: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Summary {
    pub rows_flagged: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials_exceeding_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blocks_non_increasing: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub growth_within_band_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_mismatches: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing_mismatches: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ReportConfig,
    pub rows: Vec<ReportRow>,
    pub blocks: Vec<BlockSummary>,
    pub summary: Summary,
    /// First degree from which every tested row satisfies the closed-form
    /// band for `λ_N` and `λ_N > ln N`.
    pub onset: Option<u32>,
    pub growth: Vec<TrialGrowth>,
}

impl ExperimentReport {
    pub fn empty(config: ReportConfig) -> Self {
        ExperimentReport {
            config,
            rows: Vec::new(),
            blocks: Vec::new(),
            summary: Summary::default(),
            onset: None,
            growth: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(std::io::Error::from)?;
        s.push('\n');
        Ok(s)
    }

    /// The per-row table. Absent values are empty fields; the echoed config is
    /// carried on a leading `#` line.
    pub fn to_csv(&self) -> Result<String> {
        let config = serde_json::to_string(&self.config).map_err(std::io::Error::from)?;
        let mut out = format!("# {config}\n{CSV_COLUMNS}\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.target,
                r.degree,
                opt(r.lambda),
                opt(r.lambda_prime),
                opt(r.m_star),
                r.mean_r,
                r.var_r,
                opt(r.p_upper_violation),
                opt(r.p_lower_violation),
                opt(r.tv_distance),
            )
            .expect("writing to a String");
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ReportConfig {
        ReportConfig {
            experiment: "thm02".into(),
            p: 3,
            s: 1,
            q: 3,
            schedule: Schedule::thick(2.0).unwrap(),
            seed: 1,
            trials: 2,
            degrees: None,
            max_index: Some(80),
            kind: Some(CountKind::Sum),
        }
    }

    #[test]
    fn empty_report_has_header_only_csv() {
        let csv = ExperimentReport::empty(config()).to_csv().unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("# {"));
        assert_eq!(lines[1], CSV_COLUMNS);
    }

    #[test]
    fn csv_rows_leave_absent_values_empty() {
        let mut r = ExperimentReport::empty(config());
        r.rows.push(ReportRow {
            target: 5,
            degree: 1,
            lambda: Some(0.25),
            lambda_prime: None,
            m_star: None,
            mean_r: 0.5,
            var_r: 0.5,
            std_err: 0.5,
            p_upper_violation: Some(0.0),
            p_lower_violation: None,
            tv_distance: None,
            lambda_lower: None,
            lambda_upper: None,
            in_band: None,
            above_log: None,
            mean_within_3se: Some(true),
        });
        let csv = r.to_csv().unwrap();
        assert_eq!(csv.lines().nth(2), Some("5,1,0.25,,,0.5,0.5,0,,"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["rows"].as_array().unwrap().len(), 1);
        assert_eq!(json["rows"][0]["N"], 5);
        assert_eq!(json["config"]["schedule"]["kind"], "thick");
    }
}
