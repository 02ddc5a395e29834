//! Sequential `T_max` testing with the `e_max` elimination rule.
//!
//! One bootstrap ensemble of raw centered column means is drawn per run. At each
//! step the relative losses `d̄_{i·}` and the bootstrap contrasts are re-centred
//! on the methods still in the set, so no resampling happens between steps.
//! The conditional variant runs the same procedure separately on the losses
//! observed in each state.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    bootstrap_means, clamp_block_len, default_block_len, gen_block_indices, BootstrapEnsemble,
    BootstrapPlan,
};
use crate::error::{Error, Result};
use crate::panel::{
    partition_by_state, ConfidenceSetResult, EliminationRecord, LossPanel, RunStatus, StateSeries,
};
use crate::statsutil::RandomStream;

/// Below this magnitude a bootstrap variance or mean is treated as zero.
pub const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLength {
    /// `⌈n^{1/3}⌉` of the sample actually tested.
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McsConfig {
    pub alpha: f64,
    /// Bootstrap resamples `B`.
    pub replications: usize,
    pub block_len: BlockLength,
    pub stream: RandomStream,
    /// Smallest sample on which a test is attempted.
    pub min_state_obs: usize,
}

impl McsConfig {
    pub fn new(alpha: f64, replications: usize, seed: u64) -> Self {
        Self {
            alpha,
            replications,
            block_len: BlockLength::Auto,
            stream: RandomStream::new(seed, 0),
            min_state_obs: 10,
        }
    }

    pub fn with_block_len(mut self, block_len: BlockLength) -> Self {
        self.block_len = block_len;
        self
    }

    pub fn with_min_state_obs(mut self, min_state_obs: usize) -> Self {
        self.min_state_obs = min_state_obs;
        self
    }

    pub fn with_stream(mut self, stream: RandomStream) -> Self {
        self.stream = stream;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.replications == 0 {
            return Err(Error::invalid("bootstrap needs at least one replication"));
        }
        if self.min_state_obs < 2 {
            return Err(Error::invalid("min_state_obs must be at least 2"));
        }
        if self.block_len == BlockLength::Fixed(0) {
            return Err(Error::invalid("block length must be positive"));
        }
        Ok(())
    }
}

/// `T_max`, the position attaining it and the individual `t_{i·}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TmaxOutcome {
    pub t_max: f64,
    pub argmax: usize,
    pub t_stats: Vec<f64>,
}

/// One test of the sequence, on the set active at that point.
#[derive(Debug, Clone, PartialEq)]
pub struct EliminationStep {
    /// Original method positions of the active set.
    pub active: Vec<usize>,
    pub t_stats: Vec<f64>,
    pub t_max: f64,
    /// Original method position attaining `T_max`.
    pub argmax_method: usize,
    pub p_value: f64,
}

/// Computes `t_{i·} = d̄_{i·} / √var(d̄_{i·})` and their maximum (ties go to the lowest position).
pub fn tmax_statistic(d_bar: &[f64], variances: &[f64]) -> Result<TmaxOutcome> {
    if d_bar.len() != variances.len() {
        return Err(Error::LengthMismatch {
            expected: d_bar.len(),
            actual: variances.len(),
        });
    }
    if d_bar.len() < 2 {
        return Err(Error::invalid("T_max needs at least two methods"));
    }
    let t_stats = d_bar
        .iter()
        .zip(variances)
        .enumerate()
        .map(|(i, (&d, &v))| standardize(i, d, v))
        .collect::<Result<Vec<_>>>()?;
    let (argmax, t_max) = argmax_first(&t_stats);
    Ok(TmaxOutcome {
        t_max,
        argmax,
        t_stats,
    })
}

fn standardize(i: usize, mean: f64, var: f64) -> Result<f64> {
    if var < 0.0 || var.is_nan() {
        return Err(Error::invalid(format!("negative variance {var} for method {i}")));
    }
    if var < DEGENERACY_TOL {
        if mean.abs() < DEGENERACY_TOL {
            return Ok(0.0);
        }
        return Err(Error::DegenerateVariance { method: i, mean });
    }
    Ok(mean / var.sqrt())
}

fn argmax_first(xs: &[f64]) -> (usize, f64) {
    let mut best = (0, xs[0]);
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

/// Runs the sequential test on a bootstrap ensemble and returns every step taken.
pub fn elimination_steps(ensemble: &BootstrapEnsemble, alpha: f64) -> Result<Vec<EliminationStep>> {
    let b_count = ensemble.replications();
    let mut active: Vec<usize> = (0..ensemble.m()).collect();
    let mut steps = Vec::new();
    let means = ensemble.sample_means();
    let mut contrasts = vec![0.0; b_count * ensemble.m()];

    while active.len() >= 2 {
        let k = active.len();
        let grand = active.iter().map(|&i| means[i]).sum::<f64>() / k as f64;
        let d_bar: Vec<f64> = active.iter().map(|&i| means[i] - grand).collect();

        let mut variances = vec![0.0; k];
        for b in 0..b_count {
            let row = ensemble.centered_row(b);
            let xi_dot = active.iter().map(|&i| row[i]).sum::<f64>() / k as f64;
            let out = &mut contrasts[b * k..(b + 1) * k];
            for (slot, (&i, v)) in out.iter_mut().zip(active.iter().zip(variances.iter_mut())) {
                let c = row[i] - xi_dot;
                *slot = c;
                *v += c * c;
            }
        }
        variances.iter_mut().for_each(|v| *v /= b_count as f64);

        let stat = tmax_statistic(&d_bar, &variances)?;
        let all_degenerate = variances.iter().all(|&v| v < DEGENERACY_TOL);
        let p_value = if all_degenerate {
            1.0
        } else {
            let inv_sd: Vec<f64> = variances
                .iter()
                .map(|&v| if v < DEGENERACY_TOL { 0.0 } else { v.sqrt().recip() })
                .collect();
            let exceed = (0..b_count)
                .filter(|&b| {
                    let t_star = contrasts[b * k..(b + 1) * k]
                        .iter()
                        .zip(&inv_sd)
                        .map(|(c, s)| c * s)
                        .fold(f64::NEG_INFINITY, f64::max);
                    stat.t_max < t_star
                })
                .count();
            exceed as f64 / b_count as f64
        };

        let argmax_method = active[stat.argmax];
        steps.push(EliminationStep {
            active: active.clone(),
            t_stats: stat.t_stats,
            t_max: stat.t_max,
            argmax_method,
            p_value,
        });
        if p_value < alpha {
            active.remove(stat.argmax);
        } else {
            break;
        }
    }
    Ok(steps)
}

fn resolve_block_len(n: usize, cfg: &McsConfig) -> (usize, Option<String>) {
    let requested = match cfg.block_len {
        BlockLength::Auto => default_block_len(n),
        BlockLength::Fixed(p) => p,
    };
    clamp_block_len(n, requested)
}

/// Unconditional confidence set over the whole panel.
pub fn mcs_run(panel: &LossPanel, cfg: &McsConfig) -> Result<ConfidenceSetResult> {
    run_on_sample(panel, cfg, cfg.stream.child(0), None)
}

/// One confidence set per declared state, in alphabet order.
///
/// States with fewer than `min_state_obs` observations are reported with
/// [`RunStatus::InsufficientData`]. State `k` draws from stream `k` of the key
/// derived from `cfg.stream`, so a single-state run reproduces [`mcs_run`].
pub fn cmcs_run(
    panel: &LossPanel,
    states: &StateSeries,
    cfg: &McsConfig,
) -> Result<Vec<ConfidenceSetResult>> {
    cfg.validate()?;
    let partition = partition_by_state(panel, states)?;
    partition
        .index_sets()
        .iter()
        .enumerate()
        .map(|(k, rows)| {
            let label = Some(partition.alphabet()[k].clone());
            let stream = cfg.stream.child(k as u64);
            if rows.len() < cfg.min_state_obs {
                return Ok(insufficient(panel, cfg, stream, label, rows.len()));
            }
            let sub = panel.select_rows(rows)?;
            run_on_sample(&sub, cfg, stream, label)
        })
        .collect()
}

fn insufficient(
    panel: &LossPanel,
    cfg: &McsConfig,
    stream: RandomStream,
    state: Option<String>,
    observations: usize,
) -> ConfidenceSetResult {
    ConfidenceSetResult {
        state,
        status: RunStatus::InsufficientData {
            required: cfg.min_state_obs,
        },
        alpha: cfg.alpha,
        block_len: 0,
        replications: cfg.replications,
        seed: stream.seed,
        stream_id: stream.stream_id,
        observations,
        surviving: panel.method_ids().to_vec(),
        trace: Vec::new(),
        final_p_step: None,
        mcs_p_values: BTreeMap::new(),
        warnings: vec![format!(
            "{observations} observations, at least {} required; no test performed",
            cfg.min_state_obs
        )],
    }
}

fn run_on_sample(
    panel: &LossPanel,
    cfg: &McsConfig,
    stream: RandomStream,
    state: Option<String>,
) -> Result<ConfidenceSetResult> {
    cfg.validate()?;
    let n = panel.n();
    if n < cfg.min_state_obs {
        return Ok(insufficient(panel, cfg, stream, state, n));
    }
    let (block_len, warning) = resolve_block_len(n, cfg);
    let plan = BootstrapPlan::new(cfg.replications, block_len, stream);
    let idx = gen_block_indices(n, &plan)?;
    let ensemble = bootstrap_means(panel, &idx)?;
    let steps = elimination_steps(&ensemble, cfg.alpha)?;

    let ids = panel.method_ids();
    let mut running = 0.0f64;
    let mut trace = Vec::new();
    let mut final_p_step = None;
    let mut eliminated = vec![false; panel.m()];
    let mut mcs_p_values = BTreeMap::new();
    for step in &steps {
        running = running.max(step.p_value);
        if step.p_value < cfg.alpha {
            eliminated[step.argmax_method] = true;
            mcs_p_values.insert(ids[step.argmax_method].clone(), running);
            trace.push(EliminationRecord {
                eliminated: ids[step.argmax_method].clone(),
                t_max: step.t_max,
                p_step: step.p_value,
                p_mcs: running,
                t_stats: step
                    .active
                    .iter()
                    .zip(&step.t_stats)
                    .map(|(&i, &t)| (ids[i].clone(), t))
                    .collect(),
            });
        } else {
            final_p_step = Some(step.p_value);
        }
    }
    let survivor_p = if final_p_step.is_some() { running } else { 1.0 };
    let surviving: Vec<String> = ids
        .iter()
        .zip(&eliminated)
        .filter(|(_, &e)| !e)
        .map(|(id, _)| id.clone())
        .collect();
    for id in &surviving {
        mcs_p_values.insert(id.clone(), survivor_p);
    }

    Ok(ConfidenceSetResult {
        state,
        status: RunStatus::Complete,
        alpha: cfg.alpha,
        block_len,
        replications: cfg.replications,
        seed: stream.seed,
        stream_id: stream.stream_id,
        observations: n,
        surviving,
        trace,
        final_p_step,
        mcs_p_values,
        warnings: warning.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statsutil::std_normal_draws;

    #[test]
    fn tmax_zero_means() {
        let out = tmax_statistic(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!(out.t_max, 0.0);
        assert_eq!(out.argmax, 0);
    }

    #[test]
    fn tmax_direct_arithmetic() {
        let out = tmax_statistic(&[0.2, -0.2], &[0.01, 0.01]).unwrap();
        assert!((out.t_stats[0] - 2.0).abs() < 1e-12);
        assert!((out.t_stats[1] + 2.0).abs() < 1e-12);
        assert!((out.t_max - 2.0).abs() < 1e-12);
        assert_eq!(out.argmax, 0);
    }

    #[test]
    fn tmax_degenerate_rules() {
        let out = tmax_statistic(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(out.t_stats, vec![0.0; 3]);
        assert!(matches!(
            tmax_statistic(&[0.5, -0.5], &[0.0, 0.0]),
            Err(Error::DegenerateVariance { method: 0, .. })
        ));
        assert!(tmax_statistic(&[0.5], &[1.0]).is_err());
        assert!(tmax_statistic(&[0.5, 0.1], &[1.0]).is_err());
    }

    #[test]
    fn tmax_ties_pick_lowest_position() {
        let out = tmax_statistic(&[0.1, 0.3, 0.3], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(out.argmax, 1);
    }

    #[test]
    fn identical_columns_are_never_eliminated() {
        let col = std_normal_draws(&RandomStream::new(4, 0), 200);
        let panel =
            LossPanel::from_columns(&[col.clone(), col.clone(), col], LossPanel::default_ids(3))
                .unwrap();
        let res = mcs_run(&panel, &McsConfig::new(0.05, 200, 1)).unwrap();
        assert_eq!(res.surviving.len(), 3);
        assert!(res.trace.is_empty());
        assert!(res.final_p_step.unwrap() >= 0.05);
    }

    #[test]
    fn small_samples_report_insufficient_data() {
        let panel = LossPanel::from_row_major(vec![0.0, 1.0, 1.0, 0.0], LossPanel::default_ids(2))
            .unwrap();
        let res = mcs_run(&panel, &McsConfig::new(0.1, 50, 1)).unwrap();
        assert_eq!(
            res.status,
            RunStatus::InsufficientData { required: 10 }
        );
        assert_eq!(res.observations, 2);
        assert_eq!(res.surviving.len(), 2);
    }

    #[test]
    fn config_validation() {
        let panel = LossPanel::from_row_major(vec![0.0; 40], LossPanel::default_ids(2)).unwrap();
        assert!(mcs_run(&panel, &McsConfig::new(0.0, 10, 1)).is_err());
        assert!(mcs_run(&panel, &McsConfig::new(0.1, 0, 1)).is_err());
        assert!(mcs_run(&panel, &McsConfig::new(0.1, 10, 1).with_min_state_obs(1)).is_err());
    }

    #[test]
    fn clamped_block_length_is_flagged() {
        let col: Vec<f64> = std_normal_draws(&RandomStream::new(8, 0), 40);
        let other = std_normal_draws(&RandomStream::new(8, 1), 40);
        let panel = LossPanel::from_columns(&[col, other], LossPanel::default_ids(2)).unwrap();
        let cfg = McsConfig::new(0.1, 50, 1).with_block_len(BlockLength::Fixed(30));
        let res = mcs_run(&panel, &cfg).unwrap();
        assert_eq!(res.block_len, 20);
        assert_eq!(res.warnings.len(), 1);
    }
}
