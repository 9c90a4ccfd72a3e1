//! Empirical location of the stability threshold.
//!
//! Under coupling each trial has a single switch point `tau_i`: the sample is
//! stable exactly for `p >= tau_i`. Bisection finds every `tau_i` to within
//! `tol`, and the empirical `target`-quantile of the switch points is the
//! smallest `p` at which the stable fraction reaches `target`.

use rayon::prelude::*;
use serde::Serialize;

use super::{quantile_order_interval, ExperimentConfig, Runner, Status};
use crate::error::{Error, Result};
use crate::theory::p_critical;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdConfig {
    pub n: u32,
    pub r: u32,
    pub target: f64,
    pub trials: u64,
    pub plo: f64,
    pub phi: f64,
    pub master_seed: u64,
    pub tol: f64,
    pub level: f64,
    pub solver: String,
    pub backend: String,
    pub max_nodes: Option<u64>,
}

impl ThresholdConfig {
    pub fn new(n: u32, r: u32, trials: u64, master_seed: u64) -> Self {
        ThresholdConfig {
            n,
            r,
            target: 0.5,
            trials,
            plo: 0.0,
            phi: 1.0,
            master_seed,
            tol: 1e-3,
            level: 0.95,
            solver: "bnb".into(),
            backend: "auto".into(),
            max_nodes: super::Budget::default().max_nodes,
        }
    }

    fn experiment(&self) -> Result<ExperimentConfig> {
        if self.plo >= self.phi || self.plo.is_nan() || self.phi.is_nan() {
            return Err(Error::Parameter(format!(
                "need plo < phi, got [{}, {}]",
                self.plo, self.phi
            )));
        }
        if !(0.0..=1.0).contains(&self.target) {
            return Err(Error::Parameter(format!(
                "target {} is outside [0, 1]",
                self.target
            )));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Parameter("tol must be positive".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Parameter(
                "confidence level must lie in (0, 1)".into(),
            ));
        }
        let mut cfg = ExperimentConfig::new(
            self.n,
            self.r,
            vec![self.plo, self.phi],
            self.trials,
            self.master_seed,
        );
        cfg.count_y = false;
        cfg.solver = self.solver.clone();
        cfg.backend = self.backend.clone();
        cfg.max_nodes = self.max_nodes;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdEstimate {
    pub n: u32,
    pub r: u32,
    pub target: f64,
    /// Trials with a complete bisection.
    pub trials: u64,
    pub excluded: u64,
    /// Stable fractions at the bracket ends.
    pub f_lo: f64,
    pub f_hi: f64,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub level: f64,
    pub tol: f64,
    pub p_c: f64,
    pub ratio: f64,
    /// Whether `p_hat / p_c` lies in `[0.4, 1.6]`.
    pub in_sanity_band: bool,
}

pub const SANITY_BAND: (f64, f64) = (0.4, 1.6);

/// Switch point of one trial, `None` if the budget ran out.
/// `+inf` when the trial is still unstable at `phi`.
fn switch_point(runner: &Runner, cfg: &ThresholdConfig, trial: u64) -> Result<Option<f64>> {
    let stable = |p: f64| -> Result<Option<bool>> {
        let rec = runner.evaluate(trial, 0, p)?;
        Ok(match rec.status {
            Status::Ok => rec.alpha_eq_n,
            Status::BudgetExceeded => None,
        })
    };
    match stable(cfg.plo)? {
        None => return Ok(None),
        Some(true) => return Ok(Some(cfg.plo)),
        Some(false) => {}
    }
    match stable(cfg.phi)? {
        None => return Ok(None),
        Some(false) => return Ok(Some(f64::INFINITY)),
        Some(true) => {}
    }
    let (mut lo, mut hi) = (cfg.plo, cfg.phi);
    while hi - lo > cfg.tol {
        let mid = 0.5 * (lo + hi);
        match stable(mid)? {
            None => return Ok(None),
            Some(true) => hi = mid,
            Some(false) => lo = mid,
        }
    }
    Ok(Some(hi))
}

/// Smallest `p` whose empirical stable fraction reaches `target`, with a
/// distribution-free interval widened by the bisection tolerance.
pub fn threshold_bisect(cfg: &ThresholdConfig) -> Result<ThresholdEstimate> {
    let runner = Runner::new(&cfg.experiment()?)?;
    let p_c = p_critical(cfg.n, cfg.r)?.p_c;
    let points: Vec<Option<f64>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| switch_point(&runner, cfg, t))
        .collect::<Result<_>>()?;
    let mut taus: Vec<f64> = points.iter().flatten().copied().collect();
    let excluded = cfg.trials - taus.len() as u64;
    if taus.is_empty() {
        return Err(Error::Budget {
            nodes: 0,
            reason: crate::error::BudgetKind::Nodes,
        });
    }
    taus.sort_by(|a, b| a.partial_cmp(b).expect("no NaN switch points"));
    let t = taus.len() as u64;
    let f_lo = taus.iter().filter(|&&x| x <= cfg.plo).count() as f64 / t as f64;
    let f_hi = taus.iter().filter(|&&x| x <= cfg.phi).count() as f64 / t as f64;
    if !(f_lo < cfg.target && cfg.target <= f_hi) {
        return Err(Error::NoCrossing {
            target: cfg.target,
            lo: cfg.plo,
            hi: cfg.phi,
        });
    }
    let k = ((cfg.target * t as f64).ceil() as u64).max(1);
    let p_hat = taus[k as usize - 1];
    let (lo_idx, hi_idx) = quantile_order_interval(t, cfg.target, cfg.level);
    let ci_lo = (taus[lo_idx as usize - 1] - cfg.tol).max(cfg.plo);
    let ci_hi = taus[hi_idx as usize - 1];
    let ratio = p_hat / p_c;
    Ok(ThresholdEstimate {
        n: cfg.n,
        r: cfg.r,
        target: cfg.target,
        trials: t,
        excluded,
        f_lo,
        f_hi,
        p_hat,
        ci_lo: ci_lo.min(p_hat),
        ci_hi: ci_hi.max(p_hat),
        level: cfg.level,
        tol: cfg.tol,
        p_c,
        ratio,
        in_sanity_band: (SANITY_BAND.0..=SANITY_BAND.1).contains(&ratio),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn target_zero_from_p_zero_has_no_crossing() {
        let mut cfg = ThresholdConfig::new(6, 2, 20, 1);
        cfg.target = 0.0;
        assert!(matches!(
            threshold_bisect(&cfg),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn bracket_that_misses_the_curve() {
        let mut cfg = ThresholdConfig::new(8, 2, 30, 1);
        cfg.plo = 0.0;
        cfg.phi = 0.01;
        assert!(matches!(
            threshold_bisect(&cfg),
            Err(Error::NoCrossing { .. })
        ));
    }

    #[test]
    fn estimate_is_consistent_with_the_sweep() {
        let mut cfg = ThresholdConfig::new(10, 2, 80, 7);
        cfg.tol = 1e-4;
        let est = threshold_bisect(&cfg).unwrap();
        assert!(est.ci_lo <= est.p_hat && est.p_hat <= est.ci_hi);
        assert_eq!(est.excluded, 0);
        // the stable fraction crosses the target at p_hat and not before
        let grid = vec![est.p_hat - 2.0 * cfg.tol, est.p_hat];
        let sweep_cfg = ExperimentConfig::new(10, 2, grid, 80, 7);
        let (_, res) = super::super::sweep(&sweep_cfg).unwrap();
        assert!(res.points[0].probability < 0.5);
        assert!(res.points[1].probability >= 0.5);
    }

    #[test]
    fn more_trials_do_not_widen_the_interval() {
        let mut a = ThresholdConfig::new(9, 2, 100, 3);
        a.tol = 1e-4;
        let mut b = a.clone();
        b.trials = 200;
        let (ea, eb) = (threshold_bisect(&a).unwrap(), threshold_bisect(&b).unwrap());
        assert!(eb.ci_hi - eb.ci_lo <= ea.ci_hi - ea.ci_lo);
    }

    #[test]
    fn invalid_brackets() {
        let mut cfg = ThresholdConfig::new(6, 2, 10, 1);
        cfg.plo = 0.5;
        cfg.phi = 0.5;
        assert!(matches!(threshold_bisect(&cfg), Err(Error::Parameter(_))));
        let cfg = ThresholdConfig::new(5, 3, 10, 1);
        assert!(matches!(threshold_bisect(&cfg), Err(Error::Infeasible(_))));
    }
}
