//! Subcommand implementations: pure functions from resolved inputs to
//! output text, so they are directly testable without a process spawn.

use serde::Serialize;

use bailab_core::dp::{solve_dp, Objective};
use bailab_core::harness::{aggregate, fit_line, horizon_config, RegretEstimate};
use bailab_core::ldp::{
    bound_report, complexity_h, pinsker_bound, solve_gamma_star, CL_INNER_CONSTANT,
    RATE_CAP_CONSTANT,
};
use bailab_core::model::Instance;
use bailab_core::posterior::BetaPosterior;

use crate::config::ResolvedRun;
use crate::csvout::{self, EstimateRow};
use crate::jsonfmt::to_json;
use crate::runner::replicate_parallel;
use crate::CliError;

/// Version stamp carried by every JSON output.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct InstanceJson<'a> {
    schema_version: u32,
    theta: &'a [f64],
    best_arm: usize,
}

/// `instance`: emit a hard-family instance.
pub fn instance_json(k: usize, index: usize) -> Result<String, CliError> {
    let instance = Instance::carpentier_locatelli(k, index).map_err(CliError::from_core)?;
    Ok(to_json(&InstanceJson {
        schema_version: SCHEMA_VERSION,
        theta: instance.theta(),
        best_arm: instance.best_arm(),
    }))
}

#[derive(Serialize)]
struct ResidualJson {
    arm: usize,
    slack: f64,
}

#[derive(Serialize)]
struct GammaJson<'a> {
    schema_version: u32,
    /// The program pins the best arm's share at 1/2 (the exploration
    /// sampling limit), so this is the optimum within that class.
    constraint: &'static str,
    theta: &'a [f64],
    best_arm: usize,
    gamma_star: f64,
    rho: Vec<f64>,
    residuals: Vec<ResidualJson>,
}

/// `gamma`: solve the constrained rate program.
pub fn gamma_json(instance: &Instance, tol: f64) -> String {
    let solution = solve_gamma_star(instance, tol);
    to_json(&GammaJson {
        schema_version: SCHEMA_VERSION,
        constraint: "best-arm share fixed at 1/2",
        theta: instance.theta(),
        best_arm: instance.best_arm(),
        gamma_star: solution.gamma_star,
        rho: solution.rho.clone(),
        residuals: solution
            .residuals
            .iter()
            .map(|&(arm, slack)| ResidualJson { arm, slack })
            .collect(),
    })
}

#[derive(Serialize)]
struct BoundsJson<'a> {
    schema_version: u32,
    theta: &'a [f64],
    best_arm: usize,
    waves: u64,
    h: f64,
    pinsker_bound: f64,
    gamma_star: f64,
    cl_bound_log: f64,
    kasy_rate: f64,
    capped_rate: f64,
    exponent_ratio: f64,
    cl_inner_constant: f64,
    rate_cap_constant: f64,
}

/// `bounds`: complexity and rate-cap diagnostics at a budget.
pub fn bounds_json(instance: &Instance, waves: u64) -> Result<String, CliError> {
    let report = bound_report(instance, waves).map_err(CliError::from_core)?;
    Ok(to_json(&BoundsJson {
        schema_version: SCHEMA_VERSION,
        theta: instance.theta(),
        best_arm: instance.best_arm(),
        waves,
        h: report.h,
        pinsker_bound: report.pinsker_bound,
        gamma_star: report.gamma_star,
        cl_bound_log: report.cl_bound_log,
        kasy_rate: report.kasy_rate,
        capped_rate: report.capped_rate,
        exponent_ratio: report.exponent_ratio,
        cl_inner_constant: CL_INNER_CONSTANT,
        rate_cap_constant: RATE_CAP_CONSTANT,
    }))
}

#[derive(Serialize)]
struct GridRowJson {
    waves: u32,
    budget: u64,
    regret_hat: f64,
    regret_se: f64,
    err_prob_hat: f64,
    exponent_point: Option<f64>,
    share_best_mean: f64,
    share_best_se: f64,
    /// Empirical budget share per arm, to read against `predictions.rho`.
    share_by_arm: Vec<f64>,
}

#[derive(Serialize)]
struct OlsJson {
    exponent: Option<f64>,
    se: Option<f64>,
    intercept: Option<f64>,
    points_used: usize,
    dropped_waves: Vec<u32>,
}

#[derive(Serialize)]
struct PredictionsJson {
    h: f64,
    gamma_star: f64,
    pinsker_bound: f64,
    capped_rate: f64,
    exponent_ratio: f64,
    /// Optimal limiting allocation from the rate program (best arm 1/2).
    rho: Vec<f64>,
}

#[derive(Serialize)]
struct SimulateJson<'a> {
    schema_version: u32,
    rule: &'static str,
    k: usize,
    wave_size: u64,
    seed: u64,
    reps: u64,
    posterior_draws: u32,
    theta: &'a [f64],
    best_arm: usize,
    grid: Vec<GridRowJson>,
    ols: OlsJson,
    predictions: PredictionsJson,
}

pub struct SimulateOutput {
    pub csv: String,
    pub json: String,
}

fn ols_summary(points: &[(f64, f64)], dropped: Vec<u32>) -> OlsJson {
    if points.len() < 2 {
        return OlsJson {
            exponent: None,
            se: None,
            intercept: None,
            points_used: points.len(),
            dropped_waves: dropped,
        };
    }
    let logged: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, y.ln())).collect();
    let (slope, intercept, se) = fit_line(&logged).expect("two or more points");
    OlsJson {
        exponent: Some(-slope),
        se,
        intercept: Some(intercept),
        points_used: points.len(),
        dropped_waves: dropped,
    }
}

fn predictions(instance: &Instance) -> PredictionsJson {
    let gamma = solve_gamma_star(instance, 1e-9);
    let log_k = (instance.k() as f64).ln();
    PredictionsJson {
        h: complexity_h(instance),
        gamma_star: gamma.gamma_star,
        pinsker_bound: pinsker_bound(instance),
        capped_rate: RATE_CAP_CONSTANT / log_k * gamma.gamma_star,
        exponent_ratio: log_k / RATE_CAP_CONSTANT,
        rho: gamma.rho,
    }
}

/// `simulate`: replicate the experiment over the horizon grid and emit
/// one CSV row per horizon plus a JSON summary with the fitted decay
/// exponent next to the large-deviations predictions.
pub fn simulate(run: &ResolvedRun) -> Result<SimulateOutput, CliError> {
    let mut estimates: Vec<RegretEstimate> = Vec::with_capacity(run.t_grid.len());
    for &waves in &run.t_grid {
        let sub = horizon_config(&run.experiment, waves);
        let results = replicate_parallel(&run.instance, &sub, run.rule, run.reps, run.workers)?;
        estimates.push(aggregate(&run.instance, &sub, waves, &results));
    }

    let csv = csvout::estimate_rows(
        run.rule.as_str(),
        run.instance.k(),
        run.experiment.wave_size,
        run.experiment.seed,
        &estimates,
    );

    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for est in &estimates {
        let budget = (run.experiment.wave_size * est.waves as u64) as f64;
        if est.regret_hat > 0.0 {
            points.push((budget, est.regret_hat));
        } else {
            dropped.push(est.waves);
        }
    }

    let grid = estimates
        .iter()
        .map(|est| GridRowJson {
            waves: est.waves,
            budget: run.experiment.wave_size * est.waves as u64,
            regret_hat: est.regret_hat,
            regret_se: est.regret_se,
            err_prob_hat: est.err_prob_hat,
            exponent_point: est.exponent_point,
            share_best_mean: est.share_best_mean,
            share_best_se: est.share_best_se,
            share_by_arm: est.share_by_arm.clone(),
        })
        .collect();

    let json = to_json(&SimulateJson {
        schema_version: SCHEMA_VERSION,
        rule: run.rule.as_str(),
        k: run.instance.k(),
        wave_size: run.experiment.wave_size,
        seed: run.experiment.seed,
        reps: run.reps,
        posterior_draws: run.experiment.posterior_draws,
        theta: run.instance.theta(),
        best_arm: run.instance.best_arm(),
        grid,
        ols: ols_summary(&points, dropped),
        predictions: predictions(&run.instance),
    });

    Ok(SimulateOutput { csv, json })
}

#[derive(Serialize)]
struct PolicyEntryJson {
    m: Vec<u64>,
    r: Vec<u64>,
    t: u32,
    assign: Vec<u64>,
}

#[derive(Serialize)]
struct DpJson {
    schema_version: u32,
    objective: &'static str,
    k: usize,
    wave_size: u64,
    waves: u32,
    prior_alpha: Vec<f64>,
    prior_beta: Vec<f64>,
    value: f64,
    states: u64,
    /// First few policy entries in state order; the full table goes to
    /// CSV on request.
    policy_sample: Vec<PolicyEntryJson>,
}

pub struct DpOutput {
    pub json: String,
    pub policy_csv: String,
}

/// `dp`: exact backward induction. Scalar prior parameters broadcast
/// across arms.
pub fn dp_run(
    k: usize,
    wave_size: u64,
    waves: u32,
    prior_alpha: Vec<f64>,
    prior_beta: Vec<f64>,
    objective: Objective,
) -> Result<DpOutput, CliError> {
    let broadcast = |values: Vec<f64>, name: &str| -> Result<Vec<f64>, CliError> {
        if values.len() == 1 {
            Ok(vec![values[0]; k])
        } else if values.len() == k {
            Ok(values)
        } else {
            Err(CliError::Config(format!(
                "{name} needs 1 or {k} values, got {}",
                values.len()
            )))
        }
    };
    let alpha = broadcast(prior_alpha, "prior-alpha")?;
    let beta = broadcast(prior_beta, "prior-beta")?;
    let prior = BetaPosterior::new(alpha.clone(), beta.clone()).map_err(CliError::from_core)?;
    let solution = solve_dp(wave_size, waves, &prior, objective).map_err(CliError::from_core)?;

    let policy_sample = solution
        .policy
        .iter()
        .take(8)
        .map(|(state, assign)| PolicyEntryJson {
            m: state.m.clone(),
            r: state.r.clone(),
            t: state.t,
            assign: assign.clone(),
        })
        .collect();

    let json = to_json(&DpJson {
        schema_version: SCHEMA_VERSION,
        objective: objective.as_str(),
        k,
        wave_size,
        waves,
        prior_alpha: alpha,
        prior_beta: beta,
        value: solution.value,
        states: solution.states,
        policy_sample,
    });
    let policy_csv = csvout::policy_table(k, &solution.policy);
    Ok(DpOutput { json, policy_csv })
}

#[derive(Serialize)]
struct ReportRowJson {
    rule: String,
    waves: u32,
    budget: u64,
    reps: u64,
    regret_hat: f64,
    regret_se: f64,
    err_prob_hat: f64,
    exponent_point: Option<f64>,
    share_best_mean: f64,
    share_best_se: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    schema_version: u32,
    theta: &'a [f64],
    best_arm: usize,
    rows: Vec<ReportRowJson>,
    ols: OlsJson,
    predictions: PredictionsJson,
}

/// `report`: join previously simulated CSV rows with the rate
/// predictions for the instance they came from.
pub fn report(csv_content: &str, instance: &Instance) -> Result<String, CliError> {
    let rows: Vec<EstimateRow> = csvout::parse_estimates(csv_content)?;
    if rows.is_empty() {
        return Err(CliError::Config("CSV has no data rows".into()));
    }
    for row in &rows {
        if row.k != instance.k() {
            return Err(CliError::Config(format!(
                "CSV row has k = {}, instance has k = {}",
                row.k,
                instance.k()
            )));
        }
    }
    let mut points = Vec::new();
    let mut dropped = Vec::new();
    for row in &rows {
        let budget = (row.wave_size * row.waves as u64) as f64;
        if row.regret_hat > 0.0 {
            points.push((budget, row.regret_hat));
        } else {
            dropped.push(row.waves);
        }
    }
    let json_rows = rows
        .iter()
        .map(|row| ReportRowJson {
            rule: row.rule.clone(),
            waves: row.waves,
            budget: row.wave_size * row.waves as u64,
            reps: row.reps,
            regret_hat: row.regret_hat,
            regret_se: row.regret_se,
            err_prob_hat: row.err_prob_hat,
            exponent_point: row.exponent_point,
            share_best_mean: row.share_best_mean,
            share_best_se: row.share_best_se,
        })
        .collect();
    Ok(to_json(&ReportJson {
        schema_version: SCHEMA_VERSION,
        theta: instance.theta(),
        best_arm: instance.best_arm(),
        rows: json_rows,
        ols: ols_summary(&points, dropped),
        predictions: predictions(instance),
    }))
}
