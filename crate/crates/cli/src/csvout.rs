//! CSV emission and parsing for simulation estimates.
//!
//! Floats use Rust's shortest round-trip formatting, so files are
//! byte-stable across runs and re-parse to identical values. A missing
//! decay exponent (no replication erred) is written as `NaN`.

use bailab_core::harness::RegretEstimate;

use crate::CliError;

pub const ESTIMATE_HEADER: &str =
    "rule,k,N,T,reps,regret_hat,regret_se,err_prob_hat,exponent_point,share_best_mean,share_best_se,seed";

fn float(x: f64) -> String {
    format!("{x}")
}

/// One row per horizon of a simulation grid.
pub fn estimate_rows(
    rule: &str,
    k: usize,
    wave_size: u64,
    seed: u64,
    estimates: &[RegretEstimate],
) -> String {
    let mut out = String::from(ESTIMATE_HEADER);
    out.push('\n');
    for est in estimates {
        let exponent = est
            .exponent_point
            .map(float)
            .unwrap_or_else(|| "NaN".to_string());
        out.push_str(&format!(
            "{rule},{k},{wave_size},{T},{reps},{regret},{se},{err},{exponent},{share},{share_se},{seed}\n",
            T = est.waves,
            reps = est.reps,
            regret = float(est.regret_hat),
            se = float(est.regret_se),
            err = float(est.err_prob_hat),
            share = float(est.share_best_mean),
            share_se = float(est.share_best_se),
        ));
    }
    out
}

/// A parsed row of an estimate CSV (the fields the joiner needs).
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub rule: String,
    pub k: usize,
    pub wave_size: u64,
    pub waves: u32,
    pub reps: u64,
    pub regret_hat: f64,
    pub regret_se: f64,
    pub err_prob_hat: f64,
    pub exponent_point: Option<f64>,
    pub share_best_mean: f64,
    pub share_best_se: f64,
    pub seed: u64,
}

/// Parse a CSV produced by [`estimate_rows`].
pub fn parse_estimates(content: &str) -> Result<Vec<EstimateRow>, CliError> {
    let mut lines = content.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty CSV".into()))?;
    if header.trim() != ESTIMATE_HEADER {
        return Err(CliError::Config(format!(
            "unexpected CSV header: {header}"
        )));
    }
    let mut rows = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(CliError::Config(format!(
                "row {}: expected 12 fields, got {}",
                idx + 2,
                fields.len()
            )));
        }
        let parse_f64 = |s: &str, name: &str| -> Result<f64, CliError> {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("row {}: bad {name}: {s}", idx + 2)))
        };
        let exponent = if fields[8] == "NaN" {
            None
        } else {
            Some(parse_f64(fields[8], "exponent_point")?)
        };
        rows.push(EstimateRow {
            rule: fields[0].to_string(),
            k: fields[1]
                .parse()
                .map_err(|_| CliError::Config(format!("row {}: bad k", idx + 2)))?,
            wave_size: fields[2]
                .parse()
                .map_err(|_| CliError::Config(format!("row {}: bad N", idx + 2)))?,
            waves: fields[3]
                .parse()
                .map_err(|_| CliError::Config(format!("row {}: bad T", idx + 2)))?,
            reps: fields[4]
                .parse()
                .map_err(|_| CliError::Config(format!("row {}: bad reps", idx + 2)))?,
            regret_hat: parse_f64(fields[5], "regret_hat")?,
            regret_se: parse_f64(fields[6], "regret_se")?,
            err_prob_hat: parse_f64(fields[7], "err_prob_hat")?,
            exponent_point: exponent,
            share_best_mean: parse_f64(fields[9], "share_best_mean")?,
            share_best_se: parse_f64(fields[10], "share_best_se")?,
            seed: fields[11]
                .parse()
                .map_err(|_| CliError::Config(format!("row {}: bad seed", idx + 2)))?,
        });
    }
    Ok(rows)
}

/// Full DP policy table: state columns m1..mk, r1..rk, t, then the chosen
/// assignment n1..nk.
pub fn policy_table(k: usize, policy: &std::collections::BTreeMap<bailab_core::dp::DpState, Vec<u64>>) -> String {
    let mut header = String::new();
    for d in 1..=k {
        header.push_str(&format!("m{d},"));
    }
    for d in 1..=k {
        header.push_str(&format!("r{d},"));
    }
    header.push_str("t,");
    header.push_str(
        &(1..=k)
            .map(|d| format!("n{d}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    let mut out = header;
    out.push('\n');
    for (state, action) in policy {
        let mut row = String::new();
        for &m in &state.m {
            row.push_str(&format!("{m},"));
        }
        for &r in &state.r {
            row.push_str(&format!("{r},"));
        }
        row.push_str(&format!("{},", state.t));
        row.push_str(
            &action
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        out.push_str(&row);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let estimates = vec![
            RegretEstimate {
                waves: 40,
                reps: 1000,
                regret_hat: 0.0123,
                regret_se: 0.001,
                err_prob_hat: 0.041,
                exponent_point: Some(0.11),
                share_best_mean: 0.5,
                share_best_se: 0.002,
                share_by_arm: vec![0.5, 0.5],
            },
            RegretEstimate {
                waves: 80,
                reps: 1000,
                regret_hat: 0.0,
                regret_se: 0.0,
                err_prob_hat: 0.0,
                exponent_point: None,
                share_best_mean: 0.499,
                share_best_se: 0.0021,
                share_by_arm: vec![0.499, 0.501],
            },
        ];
        let csv = estimate_rows("exploration", 2, 5, 42, &estimates);
        let rows = parse_estimates(&csv).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].regret_hat, 0.0123);
        assert_eq!(rows[0].exponent_point, Some(0.11));
        assert_eq!(rows[1].exponent_point, None);
        assert_eq!(rows[1].waves, 80);
        assert_eq!(rows[1].seed, 42);
    }

    #[test]
    fn rejects_malformed_rows() {
        assert!(parse_estimates("").is_err());
        assert!(parse_estimates("bad,header\n1,2\n").is_err());
        let mut csv = String::from(ESTIMATE_HEADER);
        csv.push_str("\nexploration,2,5,40,100,x,0,0,NaN,0.5,0,42\n");
        assert!(parse_estimates(&csv).is_err());
    }
}
