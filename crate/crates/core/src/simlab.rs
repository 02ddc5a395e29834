//! Monte Carlo designs.
//!
//! Two data-generating processes are provided. In the multi-method design the
//! conditional mean of method `i` is `∓μ(1 - c_i)` in states 1/2 with
//! `c_i = 2(i-1)/(m-1)`, so the ranking flips between states while every
//! method has the same unconditional mean when `p = 1/2`. In the two-method
//! design the mean vector is `(-μ, μ)` in state 1 and `v(μ, -μ)` in state 2.
//!
//! Replication `r` of grid point `g` draws from `RandomStream::new(seed, g).child(r)`,
//! and results are reduced in replication order, so outcomes do not depend on
//! the number of worker threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cpa::{
    closed_form_wald, instrument, statewise_t_test, wald_test, CovEstimator, StatewiseVariance,
    TwoStateDesign,
};
use crate::error::{Error, Result};
use crate::mcs::{cmcs_run, mcs_run, BlockLength, McsConfig};
use crate::panel::{LossPanel, StateSeries};
use crate::statsutil::{chi2_quantile, normal_two_sided_critical, RandomStream};

/// Per-method noise variance under which the two-method rejection-rate tables are reproduced
/// (the loss differential then has variance 4).
pub const TABLE_NOISE_VAR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiMethodDgp {
    pub m: usize,
    pub mu: f64,
    pub state_prob: f64,
    pub n: usize,
}

impl MultiMethodDgp {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid("need at least two methods"));
        }
        if !(self.mu >= 0.0) {
            return Err(Error::invalid(format!("μ = {} must be nonnegative", self.mu)));
        }
        check_prob_and_n(self.state_prob, self.n)
    }

    /// Spacing weight `c_i = 2(i-1)/(m-1)` for 0-based `i`.
    pub fn spacing(&self, i: usize) -> f64 {
        2.0 * i as f64 / (self.m - 1) as f64
    }

    /// Conditional mean loss of method `i` in state 1 (`state = 0`) or 2 (`state = 1`).
    pub fn conditional_mean(&self, i: usize, state: usize) -> f64 {
        let level = self.mu * (1.0 - self.spacing(i));
        if state == 0 {
            -level
        } else {
            level
        }
    }
}

fn check_prob_and_n(p: f64, n: usize) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("state probability {p} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    Ok(())
}

fn two_state_alphabet() -> Vec<String> {
    vec!["1".into(), "2".into()]
}

/// Draws states iid with `P(S_t = 1) = p`, then `L_t = μ(S_t) + ε_t` with independent normal noise.
fn generate(
    n: usize,
    p: f64,
    noise_sd: f64,
    means: &[[f64; 2]],
    stream: &RandomStream,
) -> Result<(LossPanel, StateSeries)> {
    let m = means.len();
    let mut rng = stream.generator();
    let mut data = Vec::with_capacity(n * m);
    let mut codes = Vec::with_capacity(n);
    for _ in 0..n {
        let s = if rng.random::<f64>() < p { 0 } else { 1 };
        codes.push(s);
        for mu in means {
            let e: f64 = rng.sample(StandardNormal);
            data.push(mu[s] + noise_sd * e);
        }
    }
    let panel = LossPanel::from_row_major(data, LossPanel::default_ids(m))?;
    let states = StateSeries::from_codes(two_state_alphabet(), codes)?;
    Ok((panel, states))
}

pub fn gen_multi(dgp: &MultiMethodDgp, stream: &RandomStream) -> Result<(LossPanel, StateSeries)> {
    dgp.validate()?;
    let means: Vec<[f64; 2]> = (0..dgp.m)
        .map(|i| [dgp.conditional_mean(i, 0), dgp.conditional_mean(i, 1)])
        .collect();
    generate(dgp.n, dgp.state_prob, 1.0, &means, stream)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoMethodDgp {
    /// Half the state-1 loss gap, so `Δ₁ = -2μ`.
    pub mu: f64,
    pub v: f64,
    pub state_prob: f64,
    pub n: usize,
    /// Variance of each method's noise term.
    pub noise_var: f64,
}

impl TwoMethodDgp {
    /// Unit-variance noise.
    pub fn new(mu: f64, v: f64, state_prob: f64, n: usize) -> Self {
        Self {
            mu,
            v,
            state_prob,
            n,
            noise_var: 1.0,
        }
    }

    /// Parameterized by the state-1 differential `Δ₁ = -2μ`.
    pub fn from_delta1(delta1: f64, v: f64, state_prob: f64, n: usize) -> Self {
        Self::new(-delta1 / 2.0, v, state_prob, n)
    }

    pub fn with_noise_var(mut self, noise_var: f64) -> Self {
        self.noise_var = noise_var;
        self
    }

    pub fn delta1(&self) -> f64 {
        -2.0 * self.mu
    }

    pub fn delta2(&self) -> f64 {
        2.0 * self.v * self.mu
    }

    /// Variance of `d_t = L_{1,t} - L_{2,t}` within a state.
    pub fn differential_variance(&self) -> f64 {
        2.0 * self.noise_var
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu >= 0.0) {
            return Err(Error::invalid(format!("μ = {} must be nonnegative", self.mu)));
        }
        if !(0.0..=1.0).contains(&self.v) {
            return Err(Error::invalid(format!("v = {} outside [0, 1]", self.v)));
        }
        if !(self.noise_var > 0.0) {
            return Err(Error::invalid("noise variance must be positive"));
        }
        check_prob_and_n(self.state_prob, self.n)
    }
}

pub fn gen_two(dgp: &TwoMethodDgp, stream: &RandomStream) -> Result<(LossPanel, StateSeries)> {
    dgp.validate()?;
    let (mu, v) = (dgp.mu, dgp.v);
    let means = [[-mu, v * mu], [mu, -v * mu]];
    generate(dgp.n, dgp.state_prob, dgp.noise_var.sqrt(), &means, stream)
}

/// One estimated quantity at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyCell {
    pub point: Vec<(String, f64)>,
    pub statistic: String,
    pub estimate: f64,
    /// Monte Carlo standard error.
    pub mc_se: f64,
}

impl StudyCell {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.point.iter().find(|(k, _)| k == name).map(|&(_, v)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub study: String,
    pub config: BTreeMap<String, String>,
    pub seed: u64,
    pub replications: usize,
    pub cells: Vec<StudyCell>,
}

impl StudyResult {
    /// Looks up a cell by statistic name and parameter values (compared to 1e-9).
    pub fn cell(&self, statistic: &str, point: &[(&str, f64)]) -> Option<&StudyCell> {
        self.cells.iter().find(|c| {
            c.statistic == statistic
                && point
                    .iter()
                    .all(|(k, v)| c.param(k).is_some_and(|x| (x - v).abs() < 1e-9))
        })
    }

    /// Tidy CSV: parameter columns, then `statistic,estimate,mc_se`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let keys: Vec<&str> = self
            .cells
            .first()
            .map(|c| c.point.iter().map(|(k, _)| k.as_str()).collect())
            .unwrap_or_default();
        for k in &keys {
            out.push_str(k);
            out.push(',');
        }
        out.push_str("statistic,estimate,mc_se\n");
        for c in &self.cells {
            for (_, v) in &c.point {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{},{},{}", c.statistic, c.estimate, c.mc_se);
        }
        out
    }

    /// Wide text table: one row per parameter point, one column per statistic.
    pub fn render_table(&self) -> String {
        let mut stats: Vec<&str> = Vec::new();
        let mut rows: Vec<&[(String, f64)]> = Vec::new();
        for c in &self.cells {
            if !stats.contains(&c.statistic.as_str()) {
                stats.push(&c.statistic);
            }
            if !rows.contains(&c.point.as_slice()) {
                rows.push(&c.point);
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "{} (R = {}, seed = {})", self.study, self.replications, self.seed);
        if let Some(first) = rows.first() {
            for (k, _) in first.iter() {
                let _ = write!(out, "{k:>8} ");
            }
        }
        for s in &stats {
            let _ = write!(out, "{s:>14} ");
        }
        out.push('\n');
        for r in &rows {
            for (_, v) in r.iter() {
                let _ = write!(out, "{v:>8.3} ");
            }
            for s in &stats {
                match self.cells.iter().find(|c| c.point == *r && c.statistic == *s) {
                    Some(c) => {
                        let _ = write!(out, "{:>14.3} ", c.estimate);
                    }
                    None => out.push_str(&format!("{:>14} ", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn rate_cell(point: &[(String, f64)], statistic: &str, hits: usize, reps: usize) -> StudyCell {
    let r = hits as f64 / reps as f64;
    StudyCell {
        point: point.to_vec(),
        statistic: statistic.into(),
        estimate: r,
        mc_se: (r * (1.0 - r) / reps as f64).sqrt(),
    }
}

fn mean_cell(point: &[(String, f64)], statistic: &str, xs: &[f64]) -> StudyCell {
    let r = xs.len() as f64;
    let mu = xs.iter().sum::<f64>() / r;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (r - 1.0)
    } else {
        0.0
    };
    StudyCell {
        point: point.to_vec(),
        statistic: statistic.into(),
        estimate: mu,
        mc_se: (var / r).sqrt(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerStudyConfig {
    pub m: usize,
    pub mus: Vec<f64>,
    pub ns: Vec<usize>,
    pub state_prob: f64,
    pub alpha: f64,
    /// Monte Carlo replications per grid point.
    pub reps: usize,
    /// Bootstrap resamples per confidence-set run.
    pub boot_b: usize,
    pub block_len: BlockLength,
    pub min_state_obs: usize,
    pub seed: u64,
}

impl PowerStudyConfig {
    /// Ten methods, `μ ∈ {0, 0.1, ..., 0.5}`, `n ∈ {150, 500, 1000}`, `p = 0.5`, `α = 0.05`, 5000 replications.
    pub fn figure1() -> Self {
        Self {
            m: 10,
            mus: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            ns: vec![150, 500, 1000],
            state_prob: 0.5,
            alpha: 0.05,
            reps: 5000,
            boot_b: 1000,
            block_len: BlockLength::Auto,
            min_state_obs: 10,
            seed: 20_240_501,
        }
    }

    fn echo(&self) -> BTreeMap<String, String> {
        let mut c = BTreeMap::new();
        c.insert("m".into(), self.m.to_string());
        c.insert("mus".into(), format!("{:?}", self.mus));
        c.insert("ns".into(), format!("{:?}", self.ns));
        c.insert("state_prob".into(), self.state_prob.to_string());
        c.insert("alpha".into(), self.alpha.to_string());
        c.insert("boot_b".into(), self.boot_b.to_string());
        c.insert("block_len".into(), format!("{:?}", self.block_len));
        c.insert("min_state_obs".into(), self.min_state_obs.to_string());
        c
    }
}

struct PowerReplication {
    mcs_size: f64,
    cmcs_sizes: [f64; 2],
    best_covered: [bool; 2],
}

/// Average confidence-set sizes of the unconditional and statewise procedures over a grid of `(n, μ)`.
///
/// Statistics per point: `mcs_size`, `cmcs_size_state1`, `cmcs_size_state2`, and
/// `cover_state1`/`cover_state2`, the frequency with which the conditionally best
/// method (method 1 in state 1, method `m` in state 2) survives.
pub fn power_study(cfg: &PowerStudyConfig) -> Result<StudyResult> {
    if cfg.reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    let mut cells = Vec::new();
    let grid: Vec<(usize, f64)> = cfg
        .ns
        .iter()
        .flat_map(|&n| cfg.mus.iter().map(move |&mu| (n, mu)))
        .collect();
    for (g, &(n, mu)) in grid.iter().enumerate() {
        let dgp = MultiMethodDgp {
            m: cfg.m,
            mu,
            state_prob: cfg.state_prob,
            n,
        };
        dgp.validate()?;
        let point_stream = RandomStream::new(cfg.seed, g as u64);
        let best = [String::from("m1"), format!("m{}", cfg.m)];
        let reps = (0..cfg.reps)
            .into_par_iter()
            .map(|r| -> Result<PowerReplication> {
                let rep = point_stream.child(r as u64);
                let (panel, states) = gen_multi(&dgp, &rep)?;
                let mcs_cfg = McsConfig {
                    alpha: cfg.alpha,
                    replications: cfg.boot_b,
                    block_len: cfg.block_len,
                    stream: rep.child(1),
                    min_state_obs: cfg.min_state_obs,
                };
                let uncond = mcs_run(&panel, &mcs_cfg)?;
                let cond = cmcs_run(&panel, &states, &mcs_cfg)?;
                Ok(PowerReplication {
                    mcs_size: uncond.size() as f64,
                    cmcs_sizes: [cond[0].size() as f64, cond[1].size() as f64],
                    best_covered: [cond[0].contains(&best[0]), cond[1].contains(&best[1])],
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let point = vec![("n".to_string(), n as f64), ("mu".to_string(), mu)];
        let pick = |f: &dyn Fn(&PowerReplication) -> f64| reps.iter().map(f).collect::<Vec<_>>();
        cells.push(mean_cell(&point, "mcs_size", &pick(&|r| r.mcs_size)));
        cells.push(mean_cell(&point, "cmcs_size_state1", &pick(&|r| r.cmcs_sizes[0])));
        cells.push(mean_cell(&point, "cmcs_size_state2", &pick(&|r| r.cmcs_sizes[1])));
        for (k, name) in ["cover_state1", "cover_state2"].iter().enumerate() {
            let hits = reps.iter().filter(|r| r.best_covered[k]).count();
            cells.push(rate_cell(&point, name, hits, cfg.reps));
        }
    }
    Ok(StudyResult {
        study: "power".into(),
        config: cfg.echo(),
        seed: cfg.seed,
        replications: cfg.reps,
        cells,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionStudyConfig {
    /// State-1 differentials `Δ₁`.
    pub deltas: Vec<f64>,
    pub vs: Vec<f64>,
    pub state_prob: f64,
    pub n: usize,
    pub alpha: f64,
    pub reps: usize,
    pub noise_var: f64,
    pub cov: CovEstimator,
    pub seed: u64,
}

impl RejectionStudyConfig {
    /// Grids of the two-method rejection-rate tables (1 to 4).
    pub fn table(number: u8) -> Result<Self> {
        let (p, vs) = match number {
            1 => (0.5, vec![0.0]),
            2 => (0.5, vec![0.05, 0.1, 0.25, 0.5, 0.75, 1.0]),
            3 => (0.2, vec![0.0]),
            4 => (0.2, vec![0.05, 0.1, 0.25, 0.5, 0.75, 1.0]),
            _ => return Err(Error::invalid(format!("no rejection table {number}"))),
        };
        Ok(Self {
            deltas: vec![-0.1, -0.2, -0.3, -0.4, -0.5, -0.6],
            vs,
            state_prob: p,
            n: 500,
            alpha: 0.05,
            reps: 10_000,
            noise_var: TABLE_NOISE_VAR,
            cov: CovEstimator::Sample,
            seed: 20_240_500 + u64::from(number),
        })
    }

    fn echo(&self) -> BTreeMap<String, String> {
        let mut c = BTreeMap::new();
        c.insert("deltas".into(), format!("{:?}", self.deltas));
        c.insert("vs".into(), format!("{:?}", self.vs));
        c.insert("state_prob".into(), self.state_prob.to_string());
        c.insert("n".into(), self.n.to_string());
        c.insert("alpha".into(), self.alpha.to_string());
        c.insert("noise_var".into(), self.noise_var.to_string());
        c.insert("cov".into(), format!("{:?}", self.cov));
        c
    }
}

/// Statistic names reported by [`rejection_study`].
pub const REJECTION_STATS: [&str; 4] = ["t1_reject", "t2_reject", "wald_reject", "wald_reject_d2_neg"];

#[derive(Default, Clone, Copy)]
struct RejectionCounts {
    t1: bool,
    t2: bool,
    wald: bool,
    directional: bool,
}

/// Rejection rates of the statewise t-tests and the Wald test, plus the rate at which the
/// Wald test rejects while the state-2 mean differential is negative (method 2 dropped in
/// state 2 by the sign rule).
pub fn rejection_study(cfg: &RejectionStudyConfig) -> Result<StudyResult> {
    if cfg.reps == 0 {
        return Err(Error::invalid("need at least one replication"));
    }
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        return Err(Error::invalid(format!("alpha {} outside (0, 1)", cfg.alpha)));
    }
    let z_crit = normal_two_sided_critical(cfg.alpha)?;
    let mut cells = Vec::new();
    let grid: Vec<(f64, f64)> = cfg
        .deltas
        .iter()
        .flat_map(|&d| cfg.vs.iter().map(move |&v| (d, v)))
        .collect();
    for (g, &(delta1, v)) in grid.iter().enumerate() {
        let dgp = TwoMethodDgp::from_delta1(delta1, v, cfg.state_prob, cfg.n)
            .with_noise_var(cfg.noise_var);
        dgp.validate()?;
        let point_stream = RandomStream::new(cfg.seed, g as u64);
        let outcomes = (0..cfg.reps)
            .into_par_iter()
            .map(|r| -> Result<RejectionCounts> {
                let (panel, states) = gen_two(&dgp, &point_stream.child(r as u64))?;
                let d = panel.differential(0, 1);
                let t_rejects = |state| match statewise_t_test(&d, &states, state, StatewiseVariance::Iid)
                {
                    Ok(t) => Ok((t.statistic.abs() > z_crit, Some(t.mean))),
                    Err(Error::InsufficientData(_)) => Ok((false, None)),
                    Err(e) => Err(e),
                };
                let (t1, _) = t_rejects(0)?;
                let (t2, mean2) = t_rejects(1)?;
                let wald = wald_test(&instrument(&d, &states)?, cfg.cov)?.p_value < cfg.alpha;
                Ok(RejectionCounts {
                    t1,
                    t2,
                    wald,
                    directional: wald && mean2.is_some_and(|m| m < 0.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let point = vec![("delta1".to_string(), delta1), ("v".to_string(), v)];
        let count = |f: fn(&RejectionCounts) -> bool| outcomes.iter().filter(|o| f(o)).count();
        cells.push(rate_cell(&point, REJECTION_STATS[0], count(|o| o.t1), cfg.reps));
        cells.push(rate_cell(&point, REJECTION_STATS[1], count(|o| o.t2), cfg.reps));
        cells.push(rate_cell(&point, REJECTION_STATS[2], count(|o| o.wald), cfg.reps));
        cells.push(rate_cell(&point, REJECTION_STATS[3], count(|o| o.directional), cfg.reps));
    }
    Ok(StudyResult {
        study: "rejection".into(),
        config: cfg.echo(),
        seed: cfg.seed,
        replications: cfg.reps,
        cells,
    })
}

/// Axis ranges and resolution of a rejection-region grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d1_range: (f64, f64),
    pub d2_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub d_bar1: f64,
    pub d_bar2: f64,
    pub t1_rejects: bool,
    pub t2_rejects: bool,
    pub wald_rejects: bool,
    pub wald_statistic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub design: TwoStateDesign,
    pub n: f64,
    pub alpha: f64,
    pub t_critical: f64,
    pub wald_critical: f64,
    pub nx: usize,
    pub ny: usize,
    /// Row-major over `d̄₂` (outer) and `d̄₁` (inner).
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d_bar1,d_bar2,t1_rejects,t2_rejects,wald_rejects,wald_statistic\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.d_bar1,
                c.d_bar2,
                u8::from(c.t1_rejects),
                u8::from(c.t2_rejects),
                u8::from(c.wald_rejects),
                c.wald_statistic
            );
        }
        out
    }
}

/// Evaluates one point with the true covariance and expected state counts `np`, `n(1-p)`.
pub fn classify_point(
    d_bar1: f64,
    d_bar2: f64,
    design: &TwoStateDesign,
    n: f64,
    t_critical: f64,
    wald_critical: f64,
) -> RegionCell {
    let p = design.state_prob;
    let sd = design.sigma2.sqrt();
    let t1 = (n * p).sqrt() * d_bar1 / sd;
    let t2 = (n * (1.0 - p)).sqrt() * d_bar2 / sd;
    let w = closed_form_wald(d_bar1, d_bar2, n, design);
    RegionCell {
        d_bar1,
        d_bar2,
        t1_rejects: t1.abs() > t_critical,
        t2_rejects: t2.abs() > t_critical,
        wald_rejects: w > wald_critical,
        wald_statistic: w,
    }
}

pub fn rejection_region_grid(
    design: &TwoStateDesign,
    n: f64,
    alpha: f64,
    grid: &GridSpec,
) -> Result<RegionGrid> {
    if grid.nx < 2 || grid.ny < 2 {
        return Err(Error::invalid("grid needs at least two points per axis"));
    }
    if !(n > 0.0) {
        return Err(Error::invalid("sample size must be positive"));
    }
    let t_critical = normal_two_sided_critical(alpha)?;
    let wald_critical = chi2_quantile(alpha, 2)?;
    let axis = |(lo, hi): (f64, f64), k: usize, count: usize| {
        lo + (hi - lo) * k as f64 / (count - 1) as f64
    };
    let mut cells = Vec::with_capacity(grid.nx * grid.ny);
    for j in 0..grid.ny {
        let d2 = axis(grid.d2_range, j, grid.ny);
        for i in 0..grid.nx {
            let d1 = axis(grid.d1_range, i, grid.nx);
            cells.push(classify_point(d1, d2, design, n, t_critical, wald_critical));
        }
    }
    Ok(RegionGrid {
        design: *design,
        n,
        alpha,
        t_critical,
        wald_critical,
        nx: grid.nx,
        ny: grid.ny,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_design_means() {
        let dgp = MultiMethodDgp { m: 10, mu: 0.4, state_prob: 0.5, n: 10 };
        assert_eq!(dgp.spacing(0), 0.0);
        assert_eq!(dgp.spacing(9), 2.0);
        assert_eq!(dgp.conditional_mean(0, 0), -0.4);
        assert_eq!(dgp.conditional_mean(0, 1), 0.4);
        assert!((dgp.conditional_mean(9, 0) - 0.4).abs() < 1e-15);
        assert!((dgp.conditional_mean(9, 1) + 0.4).abs() < 1e-15);
        let null = MultiMethodDgp { mu: 0.0, ..dgp };
        assert!((0..10).all(|i| null.conditional_mean(i, 0) == 0.0 && null.conditional_mean(i, 1) == 0.0));
    }

    #[test]
    fn two_methods_of_multi_design_match_two_method_design() {
        let multi = MultiMethodDgp { m: 2, mu: 0.3, state_prob: 0.5, n: 10 };
        let two = TwoMethodDgp::new(0.3, 1.0, 0.5, 10);
        let s = RandomStream::new(3, 3);
        assert_eq!(gen_multi(&multi, &s).unwrap(), gen_two(&two, &s).unwrap());
    }

    #[test]
    fn two_design_deltas() {
        let d = TwoMethodDgp::from_delta1(-0.3, 0.5, 0.5, 100);
        assert!((d.mu - 0.15).abs() < 1e-15);
        assert!((d.delta1() + 0.3).abs() < 1e-15);
        assert!((d.delta2() - 0.15).abs() < 1e-15);
        assert_eq!(TwoMethodDgp::new(0.1, 0.0, 0.5, 10).delta2(), 0.0);
        assert!(TwoMethodDgp::new(0.1, 1.5, 0.5, 10).validate().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let dgp = MultiMethodDgp { m: 4, mu: 0.2, state_prob: 0.3, n: 50 };
        let s = RandomStream::new(9, 1);
        assert_eq!(gen_multi(&dgp, &s).unwrap(), gen_multi(&dgp, &s).unwrap());
        assert_ne!(gen_multi(&dgp, &s).unwrap(), gen_multi(&dgp, &s.with_stream(2)).unwrap());
    }

    #[test]
    fn table_presets() {
        assert_eq!(RejectionStudyConfig::table(1).unwrap().vs, vec![0.0]);
        assert_eq!(RejectionStudyConfig::table(4).unwrap().state_prob, 0.2);
        assert!(RejectionStudyConfig::table(5).is_err());
    }

    #[test]
    fn region_origin_and_resolution() {
        let design = TwoStateDesign::new(-0.3, 1.0, 0.5, 4.0).unwrap();
        let grid = GridSpec { d1_range: (-1.0, 1.0), d2_range: (-1.0, 1.0), nx: 3, ny: 3 };
        let g = rejection_region_grid(&design, 500.0, 0.05, &grid).unwrap();
        let origin = g.cells[4];
        assert_eq!((origin.d_bar1, origin.d_bar2), (0.0, 0.0));
        assert!(!origin.t1_rejects && !origin.t2_rejects && !origin.wald_rejects);
        let bad = GridSpec { nx: 1, ..grid };
        assert!(rejection_region_grid(&design, 500.0, 0.05, &bad).is_err());
    }
}
