//! Conditional predictive ability testing.
//!
//! The Wald-type test works on the instrumented differential `z_t = h_t d_t`
//! with `h_t = (1, 1{S_t = s^1}, ..., 1{S_t = s^{d-1}})'`; the last declared
//! state is the omitted category. For two methods and two states the module
//! also carries the exact covariance of `z_t` under a normal mixture design,
//! which gives the Wald statistic in closed form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::bootstrap::{gen_block_indices, BootstrapPlan};
use crate::error::{Error, Result};
use crate::panel::{partition_series, LossPanel, StateSeries};
use crate::statsutil::{chi2_upper_tail, mean, normal_two_sided_p, sample_variance};

/// Instrumented loss differentials, `n × q`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentSeries {
    z: Vec<f64>,
    n: usize,
    q: usize,
}

impl InstrumentSeries {
    pub fn from_row_major(z: Vec<f64>, q: usize) -> Result<Self> {
        if q == 0 || !z.len().is_multiple_of(q) {
            return Err(Error::Shape(format!("{} values do not form rows of {q}", z.len())));
        }
        Ok(Self { n: z.len() / q, z, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.z[t * self.q..(t + 1) * self.q]
    }

    pub fn mean(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.q];
        for row in self.z.chunks_exact(self.q) {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        }
        acc.iter().map(|a| a / self.n as f64).collect()
    }
}

/// `z_t = h_t d_t` for a single loss-differential series.
pub fn instrument(d: &[f64], states: &StateSeries) -> Result<InstrumentSeries> {
    if d.len() != states.len() {
        return Err(Error::LengthMismatch {
            expected: d.len(),
            actual: states.len(),
        });
    }
    let q = states.num_states();
    let mut z = Vec::with_capacity(d.len() * q);
    for (t, &dt) in d.iter().enumerate() {
        let s = states.code(t);
        z.push(dt);
        z.extend((0..q - 1).map(|k| if k == s { dt } else { 0.0 }));
    }
    InstrumentSeries::from_row_major(z, q)
}

/// Multivariate instrument `h_t ⊗ (L_{j,t} - L_{base,t})_{j ≠ base}`.
///
/// Component `k (m-1) + j` holds the `k`-th test function times the `j`-th
/// differential against the baseline method.
pub fn instrument_against_baseline(
    panel: &LossPanel,
    baseline: usize,
    states: &StateSeries,
) -> Result<InstrumentSeries> {
    if baseline >= panel.m() {
        return Err(Error::invalid(format!("baseline method {baseline} out of range")));
    }
    if states.len() != panel.n() {
        return Err(Error::LengthMismatch {
            expected: panel.n(),
            actual: states.len(),
        });
    }
    let h_dim = states.num_states();
    let others: Vec<usize> = (0..panel.m()).filter(|&j| j != baseline).collect();
    let mut z = Vec::with_capacity(panel.n() * h_dim * others.len());
    for t in 0..panel.n() {
        let row = panel.row(t);
        let s = states.code(t);
        for k in 0..h_dim {
            let h = if k == 0 || k - 1 == s { 1.0 } else { 0.0 };
            z.extend(others.iter().map(|&j| h * (row[j] - row[baseline])));
        }
    }
    InstrumentSeries::from_row_major(z, h_dim * others.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovEstimator {
    /// Centered sample covariance `Γ̂_0`.
    Sample,
    /// `Γ̂_0 + Σ_{k=1}^{lag} (Γ̂_k + Γ̂_k')` with unit weights.
    TruncatedHac { lag: usize },
}

impl CovEstimator {
    /// Truncated kernel with the lag set to a quarter of the sample.
    pub fn quarter_sample_hac(n: usize) -> Self {
        CovEstimator::TruncatedHac { lag: n / 4 }
    }
}

fn autocov(z: &InstrumentSeries, center: &[f64], lag: usize) -> DMatrix<f64> {
    let q = z.q();
    let mut g = DMatrix::zeros(q, q);
    for t in lag..z.n() {
        let a = z.row(t);
        let b = z.row(t - lag);
        for r in 0..q {
            let ar = a[r] - center[r];
            for c in 0..q {
                g[(r, c)] += ar * (b[c] - center[c]);
            }
        }
    }
    g / z.n() as f64
}

/// Long-run covariance of `z_t`, repaired once with a small ridge if it is not positive definite.
pub fn covariance(z: &InstrumentSeries, spec: CovEstimator) -> Result<DMatrix<f64>> {
    if z.n() <= z.q() {
        return Err(Error::InsufficientData(format!(
            "{} observations for a {}-dimensional covariance",
            z.n(),
            z.q()
        )));
    }
    let center = z.mean();
    let mut s = autocov(z, &center, 0);
    if let CovEstimator::TruncatedHac { lag } = spec {
        if lag >= z.n() {
            return Err(Error::invalid(format!("HAC lag {lag} must be below n = {}", z.n())));
        }
        for k in 1..=lag {
            let g = autocov(z, &center, k);
            s += &g + g.transpose();
        }
    }
    if s.clone().cholesky().is_some() {
        return Ok(s);
    }
    let q = z.q() as f64;
    let ridge = 1e-8 * s.trace() / q;
    if ridge > 0.0 {
        let repaired = &s + DMatrix::identity(z.q(), z.q()) * ridge;
        if repaired.clone().cholesky().is_some() {
            return Ok(repaired);
        }
    }
    Err(Error::NotPositiveDefinite {
        min_eigenvalue: s.symmetric_eigenvalues().min(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaldOutcome {
    pub statistic: f64,
    pub df: u32,
    pub p_value: f64,
}

/// `T^h = n z̄' Σ̂⁻¹ z̄` against `χ²_q`.
pub fn wald_test(z: &InstrumentSeries, spec: CovEstimator) -> Result<WaldOutcome> {
    let sigma = covariance(z, spec)?;
    let zbar = DVector::from_vec(z.mean());
    let chol = sigma.cholesky().ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    })?;
    let solved = chol.solve(&zbar);
    let statistic = (z.n() as f64 * zbar.dot(&solved)).max(0.0);
    let df = z.q() as u32;
    Ok(WaldOutcome {
        statistic,
        df,
        p_value: chi2_upper_tail(statistic, df)?,
    })
}

/// Unconditional test of a zero mean differential, standardized with the same covariance estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmOutcome {
    pub statistic: f64,
    pub p_value: f64,
}

pub fn diebold_mariano(d: &[f64], spec: CovEstimator) -> Result<DmOutcome> {
    let z = InstrumentSeries::from_row_major(d.to_vec(), 1)?;
    let var = covariance(&z, spec)?[(0, 0)];
    let statistic = mean(d) / (var / d.len() as f64).sqrt();
    Ok(DmOutcome {
        statistic,
        p_value: normal_two_sided_p(statistic),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StatewiseVariance {
    /// `s² / n^l`.
    Iid,
    /// Circular block bootstrap variance of the conditional mean.
    BlockBootstrap(BootstrapPlan),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatewiseT {
    pub statistic: f64,
    pub p_two_sided: f64,
    pub observations: usize,
    pub mean: f64,
}

/// Two-sided test that the differential has zero mean in `target_state`.
pub fn statewise_t_test(
    d: &[f64],
    states: &StateSeries,
    target_state: usize,
    variance: StatewiseVariance,
) -> Result<StatewiseT> {
    if target_state >= states.num_states() {
        return Err(Error::invalid(format!("state {target_state} not declared")));
    }
    let part = partition_series(d.len(), states)?;
    let sample: Vec<f64> = part.indices(target_state).iter().map(|&t| d[t]).collect();
    let n_l = sample.len();
    if n_l < 2 {
        return Err(Error::InsufficientData(format!(
            "state `{}` has {n_l} observations",
            states.alphabet()[target_state]
        )));
    }
    let d_bar = mean(&sample);
    let var_mean = match variance {
        StatewiseVariance::Iid => sample_variance(&sample) / n_l as f64,
        StatewiseVariance::BlockBootstrap(plan) => bootstrap_mean_variance(&sample, &plan)?,
    };
    if !(var_mean > 0.0) {
        return Err(Error::InsufficientData(format!(
            "zero variance in state `{}`",
            states.alphabet()[target_state]
        )));
    }
    let statistic = d_bar / var_mean.sqrt();
    Ok(StatewiseT {
        statistic,
        p_two_sided: normal_two_sided_p(statistic),
        observations: n_l,
        mean: d_bar,
    })
}

fn bootstrap_mean_variance(sample: &[f64], plan: &BootstrapPlan) -> Result<f64> {
    let n = sample.len();
    let p = plan.block_len.min(n).max(1);
    let idx = gen_block_indices(n, &BootstrapPlan { block_len: p, ..*plan })?;
    let mu = mean(sample);
    let ss: f64 = (0..idx.replications())
        .map(|b| {
            let m = idx.row(b).iter().map(|&t| sample[t]).sum::<f64>() / n as f64;
            (m - mu).powi(2)
        })
        .sum();
    Ok(ss / idx.replications() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selected {
    Both,
    First,
    Second,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSelection {
    pub state: String,
    pub mean: Option<f64>,
    pub selected: Selected,
    /// Set when the conditional mean was exactly zero or unavailable.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DfcSelection {
    pub wald_rejects: bool,
    pub states: Vec<StateSelection>,
}

/// Sign rule after a Wald rejection: per state keep the method with the smaller
/// conditional average loss (`d = L_1 - L_2`).
pub fn dfc_select(
    d: &[f64],
    states: &StateSeries,
    wald: &WaldOutcome,
    alpha: f64,
) -> Result<DfcSelection> {
    let part = partition_series(d.len(), states)?;
    let wald_rejects = wald.p_value < alpha;
    let states = part
        .index_sets()
        .iter()
        .zip(part.alphabet())
        .map(|(rows, label)| {
            let mean = (!rows.is_empty())
                .then(|| rows.iter().map(|&t| d[t]).sum::<f64>() / rows.len() as f64);
            let (selected, flagged) = match (wald_rejects, mean) {
                (false, _) => (Selected::Both, false),
                (true, None) => (Selected::Both, true),
                (true, Some(m)) if m < 0.0 => (Selected::First, false),
                (true, Some(m)) if m > 0.0 => (Selected::Second, false),
                (true, Some(_)) => (Selected::Both, true),
            };
            StateSelection {
                state: label.clone(),
                mean,
                selected,
                flagged,
            }
        })
        .collect();
    Ok(DfcSelection {
        wald_rejects,
        states,
    })
}

/// Two-state normal mixture for the loss differential: mean `Δ₁` in state 1
/// (probability `p`), mean `Δ₂` in state 2, common variance `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStateDesign {
    pub delta1: f64,
    pub delta2: f64,
    pub state_prob: f64,
    pub sigma2: f64,
}

impl TwoStateDesign {
    /// `Δ₁ < 0`, `Δ₂ = -v Δ₁` with `v ∈ [0, 1]`.
    pub fn new(delta1: f64, v: f64, state_prob: f64, sigma2: f64) -> Result<Self> {
        if !(delta1 < 0.0) {
            return Err(Error::invalid(format!("Δ₁ = {delta1} must be negative")));
        }
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::invalid(format!("v = {v} outside [0, 1]")));
        }
        Self::general(delta1, -v * delta1, state_prob, sigma2)
    }

    /// Any pair of conditional means.
    pub fn general(delta1: f64, delta2: f64, state_prob: f64, sigma2: f64) -> Result<Self> {
        if !(state_prob > 0.0 && state_prob < 1.0) {
            return Err(Error::invalid(format!("state probability {state_prob} outside (0, 1)")));
        }
        if !(sigma2 > 0.0) || !sigma2.is_finite() {
            return Err(Error::invalid(format!("σ² = {sigma2} must be positive")));
        }
        if !delta1.is_finite() || !delta2.is_finite() {
            return Err(Error::invalid("conditional means must be finite"));
        }
        Ok(Self {
            delta1,
            delta2,
            state_prob,
            sigma2,
        })
    }

    /// `v` such that `Δ₂ = -v Δ₁` (NaN when `Δ₁ = 0`).
    pub fn v(&self) -> f64 {
        -self.delta2 / self.delta1
    }

    /// `(1-p)Δ₁² + pΔ₂² + σ²`.
    fn k(&self) -> f64 {
        let p = self.state_prob;
        (1.0 - p) * self.delta1.powi(2) + p * self.delta2.powi(2) + self.sigma2
    }
}

/// Exact covariance of `(D_t, D_t 1{S_t = 1})'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormCov {
    pub sigma11: f64,
    pub sigma12: f64,
    pub sigma22: f64,
    pub det: f64,
    pub inverse: [[f64; 2]; 2],
}

impl ClosedFormCov {
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[self.sigma11, self.sigma12], [self.sigma12, self.sigma22]]
    }
}

pub fn closed_form_sigma(design: &TwoStateDesign) -> Result<ClosedFormCov> {
    let TwoStateDesign {
        delta1: d1,
        delta2: d2,
        state_prob: p,
        sigma2: s2,
    } = *design;
    let pq = p * (1.0 - p);
    let sigma11 = s2 + pq * (d1 - d2).powi(2);
    let sigma12 = p * s2 + pq * (d1 * d1 - d1 * d2);
    let sigma22 = p * s2 + pq * d1 * d1;
    let det = pq * s2 * design.k();
    if !(det > 0.0) {
        return Err(Error::invalid(format!("covariance determinant {det} is not positive")));
    }
    Ok(ClosedFormCov {
        sigma11,
        sigma12,
        sigma22,
        det,
        inverse: [
            [sigma22 / det, -sigma12 / det],
            [-sigma12 / det, sigma11 / det],
        ],
    })
}

/// The three components of the closed-form Wald statistic divided by `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaldTerms {
    /// State-1 evidence, `p² d̄₁² (σ² + pΔ₂²) / (pσ²K)`.
    pub d: f64,
    /// Cross term, `2p(1-p) d̄₁ d̄₂ Δ₁Δ₂ / (σ²K)`.
    pub e: f64,
    /// State-2 evidence, `(1-p)² d̄₂² (σ² + (1-p)Δ₁²) / ((1-p)σ²K)`.
    pub f: f64,
}

pub fn closed_form_wald_terms(d_bar1: f64, d_bar2: f64, design: &TwoStateDesign) -> WaldTerms {
    let p = design.state_prob;
    let q = 1.0 - p;
    let s2 = design.sigma2;
    let k = design.k();
    let (a1, a2) = (design.delta1, design.delta2);
    WaldTerms {
        d: p * p * d_bar1 * d_bar1 * (s2 + p * a2 * a2) / (p * s2 * k),
        e: 2.0 * p * q * d_bar1 * d_bar2 * a1 * a2 / (s2 * k),
        f: q * q * d_bar2 * d_bar2 * (s2 + q * a1 * a1) / (q * s2 * k),
    }
}

/// `T^h = n [D + E + F]` with the true covariance and expected state counts.
pub fn closed_form_wald(d_bar1: f64, d_bar2: f64, n: f64, design: &TwoStateDesign) -> f64 {
    let t = closed_form_wald_terms(d_bar1, d_bar2, design);
    n * (t.d + t.e + t.f)
}
