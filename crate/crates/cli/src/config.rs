//! Simulation run configuration: flat `key = value` files merged with
//! command-line flags (flags win), then validated into a resolved run.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use bailab_core::allocate::AllocationRule;
use bailab_core::model::{ExperimentConfig, Instance};

use crate::CliError;

/// Unvalidated simulation options; `None` means "not given".
#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    pub theta: Option<Vec<f64>>,
    pub cl_k: Option<usize>,
    pub cl_index: Option<usize>,
    pub rule: Option<AllocationRule>,
    pub wave_size: Option<u64>,
    pub t_grid: Option<Vec<u32>>,
    pub reps: Option<u64>,
    pub seed: Option<u64>,
    pub posterior_draws: Option<u32>,
    pub prior_alpha: Option<Vec<f64>>,
    pub prior_beta: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
}

pub fn parse_rule(s: &str) -> Result<AllocationRule, String> {
    AllocationRule::from_str(s)
        .map_err(|()| format!("unknown rule `{s}` (expected exploration, thompson, or uniform)"))
}

fn parse_list<T: FromStr>(value: &str, key: &str) -> Result<Vec<T>, CliError> {
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<T>()
                .map_err(|_| CliError::Config(format!("bad value `{part}` for key `{key}`")))
        })
        .collect()
}

fn parse_scalar<T: FromStr>(value: &str, key: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| CliError::Config(format!("bad value `{value}` for key `{key}`")))
}

impl RunConfig {
    /// Load a flat key-value config file. Lines are `key = value`; blank
    /// lines and `#` comments are ignored; unknown keys are errors.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config = RunConfig::default();
        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "{}:{}: expected `key = value`",
                    path.display(),
                    lineno + 1
                ))
            })?;
            let key = key.trim();
            let value = value.trim();
            match key {
                "theta" => config.theta = Some(parse_list(value, key)?),
                "cl_k" => config.cl_k = Some(parse_scalar(value, key)?),
                "cl_index" => config.cl_index = Some(parse_scalar(value, key)?),
                "rule" => config.rule = Some(parse_rule(value).map_err(CliError::Config)?),
                "wave_size" => config.wave_size = Some(parse_scalar(value, key)?),
                "t_grid" => config.t_grid = Some(parse_list(value, key)?),
                "reps" => config.reps = Some(parse_scalar(value, key)?),
                "seed" => config.seed = Some(parse_scalar(value, key)?),
                "posterior_draws" => config.posterior_draws = Some(parse_scalar(value, key)?),
                "prior_alpha" => config.prior_alpha = Some(parse_list(value, key)?),
                "prior_beta" => config.prior_beta = Some(parse_list(value, key)?),
                "workers" => config.workers = Some(parse_scalar(value, key)?),
                "out_csv" => config.out_csv = Some(PathBuf::from(value)),
                "out_json" => config.out_json = Some(PathBuf::from(value)),
                _ => {
                    return Err(CliError::Config(format!(
                        "{}:{}: unknown key `{key}`",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        Ok(config)
    }

    /// Overlay `flags` on top of `self` (flags win field by field).
    pub fn overridden_by(mut self, flags: RunConfig) -> Self {
        macro_rules! take {
            ($field:ident) => {
                if flags.$field.is_some() {
                    self.$field = flags.$field;
                }
            };
        }
        take!(theta);
        take!(cl_k);
        take!(cl_index);
        take!(rule);
        take!(wave_size);
        take!(t_grid);
        take!(reps);
        take!(seed);
        take!(posterior_draws);
        take!(prior_alpha);
        take!(prior_beta);
        take!(workers);
        take!(out_csv);
        take!(out_json);
        self
    }

    /// Validate and build the pieces a simulation run needs.
    pub fn resolve(self) -> Result<ResolvedRun, CliError> {
        let instance = build_instance(&self.theta, self.cl_k, self.cl_index)?;
        let rule = self
            .rule
            .ok_or_else(|| CliError::Config("missing `rule`".into()))?;
        let wave_size = self
            .wave_size
            .ok_or_else(|| CliError::Config("missing `wave_size`".into()))?;
        let t_grid = self
            .t_grid
            .ok_or_else(|| CliError::Config("missing `t_grid`".into()))?;
        if t_grid.is_empty() {
            return Err(CliError::Config("`t_grid` must be non-empty".into()));
        }
        if t_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Config(
                "`t_grid` must be strictly increasing".into(),
            ));
        }
        if t_grid[0] == 0 {
            return Err(CliError::Config("`t_grid` entries must be >= 1".into()));
        }
        let reps = self
            .reps
            .ok_or_else(|| CliError::Config("missing `reps`".into()))?;
        if reps == 0 {
            return Err(CliError::Config("`reps` must be >= 1".into()));
        }
        let mut experiment = ExperimentConfig::new(
            instance.k(),
            wave_size,
            *t_grid.last().unwrap(),
            self.seed.unwrap_or(0),
        )
        .map_err(CliError::from_core)?;
        if let Some(draws) = self.posterior_draws {
            if draws == 0 {
                return Err(CliError::Config("`posterior_draws` must be >= 1".into()));
            }
            experiment.posterior_draws = draws;
        }
        if self.prior_alpha.is_some() || self.prior_beta.is_some() {
            let broadcast = |values: Option<Vec<f64>>, name: &str| -> Result<Vec<f64>, CliError> {
                let values = values.unwrap_or_else(|| vec![1.0]);
                if values.len() == 1 {
                    Ok(vec![values[0]; instance.k()])
                } else if values.len() == instance.k() {
                    Ok(values)
                } else {
                    Err(CliError::Config(format!(
                        "{name} needs 1 or {} values, got {}",
                        instance.k(),
                        values.len()
                    )))
                }
            };
            let alpha = broadcast(self.prior_alpha, "prior_alpha")?;
            let beta = broadcast(self.prior_beta, "prior_beta")?;
            experiment.prior =
                bailab_core::posterior::BetaPosterior::new(alpha, beta).map_err(CliError::from_core)?;
        }
        Ok(ResolvedRun {
            instance,
            rule,
            experiment,
            t_grid,
            reps,
            workers: self.workers.unwrap_or(0),
            out_csv: self.out_csv,
            out_json: self.out_json,
        })
    }
}

/// Build an instance from exactly one of an explicit mean vector or a
/// hard-family selector.
pub fn build_instance(
    theta: &Option<Vec<f64>>,
    cl_k: Option<usize>,
    cl_index: Option<usize>,
) -> Result<Instance, CliError> {
    match (theta, cl_k, cl_index) {
        (Some(theta), None, None) => Instance::new(theta.clone()).map_err(CliError::from_core),
        (None, Some(k), Some(index)) => {
            Instance::carpentier_locatelli(k, index).map_err(CliError::from_core)
        }
        (None, None, None) => Err(CliError::Config(
            "specify an instance: either --theta or --cl-k with --cl-index".into(),
        )),
        (None, Some(_), None) | (None, None, Some(_)) => Err(CliError::Config(
            "--cl-k and --cl-index must be given together".into(),
        )),
        (Some(_), _, _) => Err(CliError::Config(
            "--theta conflicts with --cl-k/--cl-index; give exactly one".into(),
        )),
    }
}

/// A fully validated simulation run.
#[derive(Clone, Debug)]
pub struct ResolvedRun {
    pub instance: Instance,
    pub rule: AllocationRule,
    /// Horizon set to the largest grid entry; per-horizon sub-configs are
    /// derived from this.
    pub experiment: ExperimentConfig,
    pub t_grid: Vec<u32>,
    pub reps: u64,
    pub workers: usize,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> PathBuf {
        let path = std::env::temp_dir().join(format!(
            "bailab-config-{}-{}.cfg",
            std::process::id(),
            content.len()
        ));
        std::fs::write(&path, content).unwrap();
        path
    }

    #[test]
    fn parses_full_file() {
        let path = write_temp(
            "# comment\n\
             theta = 0.9, 0.6\n\
             rule = exploration\n\
             wave_size = 10\n\
             t_grid = 5, 10, 20\n\
             reps = 100\n\
             seed = 7\n\
             posterior_draws = 500 # inline comment\n\
             prior_alpha = 2, 3\n\
             prior_beta = 4\n",
        );
        let run = RunConfig::from_file(&path).unwrap().resolve().unwrap();
        assert_eq!(run.instance.theta(), &[0.9, 0.6]);
        assert_eq!(run.t_grid, vec![5, 10, 20]);
        assert_eq!(run.experiment.waves, 20);
        assert_eq!(run.experiment.posterior_draws, 500);
        assert_eq!(run.experiment.seed, 7);
        assert_eq!(run.experiment.prior.alpha(), &[2.0, 3.0]);
        assert_eq!(run.experiment.prior.beta(), &[4.0, 4.0]);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let path = write_temp("bogus = 3\n");
        assert!(matches!(
            RunConfig::from_file(&path),
            Err(CliError::Config(_))
        ));
        std::fs::remove_file(path).ok();

        let path = write_temp("reps = many\n");
        assert!(RunConfig::from_file(&path).is_err());
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn flags_override_file_values() {
        let file = RunConfig {
            theta: Some(vec![0.9, 0.6]),
            rule: Some(AllocationRule::Uniform),
            wave_size: Some(5),
            t_grid: Some(vec![10]),
            reps: Some(50),
            ..Default::default()
        };
        let flags = RunConfig {
            reps: Some(200),
            seed: Some(9),
            ..Default::default()
        };
        let run = file.overridden_by(flags).resolve().unwrap();
        assert_eq!(run.reps, 200);
        assert_eq!(run.experiment.seed, 9);
        assert_eq!(run.rule, AllocationRule::Uniform);
    }

    #[test]
    fn instance_selector_is_exclusive() {
        assert!(build_instance(&Some(vec![0.9, 0.6]), Some(2), Some(1)).is_err());
        assert!(build_instance(&None, Some(2), None).is_err());
        assert!(build_instance(&None, None, None).is_err());
        let inst = build_instance(&None, Some(4), Some(3)).unwrap();
        assert_eq!(inst.theta(), &[0.5, 0.375, 0.6875, 0.25]);
    }

    #[test]
    fn grid_must_increase() {
        let config = RunConfig {
            theta: Some(vec![0.9, 0.6]),
            rule: Some(AllocationRule::Uniform),
            wave_size: Some(1),
            t_grid: Some(vec![10, 10]),
            reps: Some(10),
            ..Default::default()
        };
        assert!(config.resolve().is_err());
    }
}
