//! Reproducible experiments: trial batches, coupled sweeps over a p-grid,
//! empirical threshold location and the deterministic verification battery.
//!
//! Trial `i` always uses seed `mix64(master ^ mix64(i))`. Trials run in
//! parallel and are collected by index, so output never depends on
//! scheduling.

mod intervals;
mod output;
mod threshold;
mod verify;

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

pub use intervals::{quantile_order_interval, wilson, Z95};
pub use output::{fmt_real, records_to_string, write_records, Format, CSV_HEADER};
pub use threshold::{threshold_bisect, ThresholdConfig, ThresholdEstimate};
pub use verify::{
    hilton_milner_family, pairs_meet_once, random_family, verify_suite, VerifyItem, VerifyLimits,
    VerifyReport,
};

use crate::combinatorics::{graph_constants, GraphSpec};
use crate::error::{Error, Result};
use crate::kneser::Colex;
use crate::sampler::{
    sample_with_colex, trial_seed, BackendRegistry, SamplerBackend, DEFAULT_MATERIALIZE_CAP,
};
use crate::solver::{count_y, AlphaMode, Budget, Solver, SolverRegistry};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n: u32,
    pub r: u32,
    pub s: u32,
    /// Strictly increasing retention probabilities; one entry for a plain batch.
    pub grid: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub mode: AlphaMode,
    pub classify: bool,
    /// Record the `Y` count in every row.
    pub count_y: bool,
    /// Share one seed per trial across the grid.
    pub coupled: bool,
    /// Record wall-clock time per row; off keeps output byte-reproducible.
    pub timing: bool,
    pub solver: String,
    pub backend: String,
    pub max_nodes: Option<u64>,
    pub max_time_ms: Option<u64>,
}

impl ExperimentConfig {
    pub fn new(n: u32, r: u32, grid: Vec<f64>, trials: u64, master_seed: u64) -> Self {
        ExperimentConfig {
            n,
            r,
            s: 0,
            grid,
            trials,
            master_seed,
            mode: AlphaMode::ExceedsN,
            classify: false,
            count_y: true,
            coupled: true,
            timing: false,
            solver: "bnb".into(),
            backend: "auto".into(),
            max_nodes: Budget::default().max_nodes,
            max_time_ms: None,
        }
    }

    pub fn validate(&self) -> Result<GraphSpec> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.grid.is_empty() {
            return Err(Error::Parameter("the p-grid is empty".into()));
        }
        if let Some(p) = self.grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Parameter(format!("p = {p} is outside [0, 1]")));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Parameter(
                "the p-grid must be strictly increasing".into(),
            ));
        }
        let spec = graph_constants(self.n, self.r, self.s)?;
        spec.require_stability_regime()?;
        Ok(spec)
    }

    pub fn budget(&self) -> Budget {
        Budget {
            max_nodes: self.max_nodes,
            max_time: self.max_time_ms.map(std::time::Duration::from_millis),
        }
    }

    fn solver(&self) -> Result<Solver> {
        let engine = SolverRegistry::default().get(&self.solver)?;
        Ok(Solver::new(engine, self.budget()))
    }

    fn backend(&self) -> Result<Arc<dyn SamplerBackend>> {
        BackendRegistry::default().get(&self.backend)
    }

    /// Seed for trial `trial` at grid position `k`.
    pub fn seed_for(&self, trial: u64, k: usize) -> u64 {
        let base = trial_seed(self.master_seed, trial);
        if self.coupled {
            base
        } else {
            trial_seed(base, k as u64)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    BudgetExceeded,
}

/// One `(trial, p)` outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRecord {
    pub n: u32,
    pub r: u32,
    pub s: u32,
    pub p: f64,
    pub seed: u64,
    pub trial: u64,
    pub status: Status,
    #[serde(rename = "alpha_eq_N")]
    pub alpha_eq_n: Option<bool>,
    /// Known exactly in exact mode, and equal to `N` whenever `alpha_eq_N`.
    pub alpha: Option<u32>,
    pub stars_only: Option<bool>,
    pub y_count: Option<u64>,
    pub nodes: u64,
    pub elapsed_ms: Option<u64>,
}

/// Shared, immutable per-run state.
struct Runner {
    config: ExperimentConfig,
    spec: GraphSpec,
    colex: Arc<Colex>,
    solver: Solver,
    backend: Arc<dyn SamplerBackend>,
    star: u32,
}

impl Runner {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let spec = config.validate()?;
        let colex = Arc::new(Colex::new(spec.n, spec.r)?);
        let star = spec.star_size_u64().expect("star size below vertex count") as u32;
        Ok(Runner {
            config: config.clone(),
            colex,
            solver: config.solver()?,
            backend: config.backend()?,
            spec,
            star,
        })
    }

    fn evaluate(&self, trial: u64, k: usize, p: f64) -> Result<TrialRecord> {
        let started = Instant::now();
        let seed = self.config.seed_for(trial, k);
        let sample = sample_with_colex(
            &self.spec,
            Arc::clone(&self.colex),
            p,
            seed,
            self.backend.as_ref(),
            DEFAULT_MATERIALIZE_CAP,
        )?;
        let mut rec = TrialRecord {
            n: self.spec.n,
            r: self.spec.r,
            s: self.spec.s,
            p,
            seed,
            trial,
            status: Status::Ok,
            alpha_eq_n: None,
            alpha: None,
            stars_only: None,
            y_count: None,
            nodes: 0,
            elapsed_ms: None,
        };
        if self.config.count_y {
            rec.y_count = Some(count_y(&sample)?);
        }
        let outcome = match self.config.mode {
            AlphaMode::Exact => self.solver.alpha_exact(&sample).map(|a| {
                rec.nodes = a.nodes;
                rec.alpha = Some(a.alpha);
                rec.alpha_eq_n = Some(a.alpha == self.star);
            }),
            // a Y-witness already certifies alpha > N
            AlphaMode::ExceedsN if rec.y_count.is_some_and(|y| y > 0) && !self.config.classify => {
                rec.alpha_eq_n = Some(false);
                Ok(())
            }
            AlphaMode::ExceedsN => Ok(()),
        };
        let outcome = outcome.and_then(|_| {
            let needs_verdict =
                rec.alpha_eq_n.is_none() || (self.config.classify && rec.alpha_eq_n == Some(true));
            if !needs_verdict {
                return Ok(());
            }
            let v = self.solver.is_ekr_stable(&sample, self.config.classify)?;
            rec.nodes += v.nodes;
            rec.alpha_eq_n = Some(v.alpha_eq_n);
            rec.stars_only = v.stars_only;
            if v.alpha_eq_n {
                rec.alpha = Some(self.star);
            }
            Ok(())
        });
        match outcome {
            Ok(()) => {}
            Err(Error::Budget { nodes, .. }) => {
                rec.status = Status::BudgetExceeded;
                rec.nodes = nodes;
                rec.alpha_eq_n = None;
                rec.alpha = None;
                rec.stars_only = None;
            }
            Err(e) => return Err(e),
        }
        if self.config.timing {
            rec.elapsed_ms = Some(started.elapsed().as_millis() as u64);
        }
        Ok(rec)
    }

    /// Every grid point of one trial, in grid order.
    fn trial_rows(&self, trial: u64) -> Result<Vec<TrialRecord>> {
        let rows = self
            .config
            .grid
            .iter()
            .enumerate()
            .map(|(k, &p)| self.evaluate(trial, k, p))
            .collect::<Result<Vec<_>>>()?;
        if self.config.coupled {
            let flags: Vec<bool> = rows.iter().filter_map(|r| r.alpha_eq_n).collect();
            assert!(
                flags.windows(2).all(|w| w[0] <= w[1]),
                "coupled indicator decreased along the grid in trial {trial}"
            );
        }
        Ok(rows)
    }
}

/// Runs `trials` trials at every grid point; rows ordered by trial, then p.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let runner = Runner::new(config)?;
    let per_trial: Vec<Vec<TrialRecord>> = (0..config.trials)
        .into_par_iter()
        .map(|t| runner.trial_rows(t))
        .collect::<Result<_>>()?;
    Ok(per_trial.into_iter().flatten().collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub p: f64,
    /// Trials with a verdict.
    pub trials: u64,
    /// Trials dropped for exhausting the solver budget.
    pub excluded: u64,
    pub stable: u64,
    pub probability: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// Fraction of trials with `Y > 0`, when counted.
    pub y_positive: Option<f64>,
}

/// Empirical probability of `alpha = N` along the grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub coupled: bool,
}

impl SweepResult {
    pub fn is_nondecreasing(&self) -> bool {
        self.points
            .windows(2)
            .all(|w| w[0].probability <= w[1].probability)
    }

    pub fn excluded(&self) -> u64 {
        self.points.iter().map(|p| p.excluded).sum()
    }
}

pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> SweepResult {
    let points = config
        .grid
        .iter()
        .enumerate()
        .map(|(k, &p)| {
            let rows = records.iter().skip(k).step_by(config.grid.len());
            let (mut trials, mut excluded, mut stable, mut y_pos, mut y_seen) =
                (0, 0, 0, 0u64, 0u64);
            for row in rows {
                debug_assert_eq!(row.p, p);
                if let Some(y) = row.y_count {
                    y_seen += 1;
                    y_pos += (y > 0) as u64;
                }
                match row.alpha_eq_n {
                    Some(flag) => {
                        trials += 1;
                        stable += flag as u64;
                    }
                    None => excluded += 1,
                }
            }
            let (wilson_lo, wilson_hi) = wilson(stable, trials, Z95);
            SweepPoint {
                p,
                trials,
                excluded,
                stable,
                probability: if trials == 0 {
                    f64::NAN
                } else {
                    stable as f64 / trials as f64
                },
                wilson_lo,
                wilson_hi,
                y_positive: (y_seen > 0).then(|| y_pos as f64 / y_seen as f64),
            }
        })
        .collect();
    SweepResult {
        points,
        coupled: config.coupled,
    }
}

/// Runs the grid for every trial and aggregates the survival curve.
pub fn sweep(config: &ExperimentConfig) -> Result<(Vec<TrialRecord>, SweepResult)> {
    let records = run_trials(config)?;
    let result = summarize(config, &records);
    if config.coupled && result.excluded() == 0 {
        assert!(result.is_nondecreasing(), "coupled curve decreased");
    }
    Ok((records, result))
}

/// Provenance written next to every output file.
#[derive(Clone, Debug, Serialize)]
pub struct RunMetadata<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub master_seed: u64,
    pub master_seed_hex: String,
    pub config: &'a ExperimentConfig,
}

impl<'a> RunMetadata<'a> {
    pub fn new(command: &'a str, config: &'a ExperimentConfig) -> Self {
        RunMetadata {
            tool: "ekr",
            version: crate::VERSION,
            command,
            master_seed: config.master_seed,
            master_seed_hex: format!("{:#018x}", config.master_seed),
            config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes")
    }
}
