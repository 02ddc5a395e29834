//! Joint VaR/ES scoring, liquidity-horizon ES aggregation and stress windows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::StateSeries;

/// Basel liquidity-horizon ladder in days.
pub const BASEL_LIQUIDITY_HORIZONS: [u32; 5] = [10, 20, 40, 60, 120];

/// Default stress window length in trading days.
pub const STRESS_WINDOW_DAYS: usize = 252;

/// A VaR/ES forecast pair at tail level `prob`, in return units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarEsForecast {
    pub var: f64,
    pub es: f64,
    pub prob: f64,
}

impl VarEsForecast {
    pub fn new(var: f64, es: f64, prob: f64) -> Result<Self> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::invalid(format!("tail level {prob} outside (0, 1)")));
        }
        if !var.is_finite() || !es.is_finite() {
            return Err(Error::invalid("VaR and ES must be finite"));
        }
        if es > var {
            return Err(Error::invalid(format!("ES {es} lies above VaR {var}")));
        }
        Ok(Self { var, es, prob })
    }
}

/// `ln(1 + e^x)` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Fissler–Ziegel loss with `G₁(x) = x`, `G₂(x) = eˣ/(1+eˣ)`, `ξ₂(x) = ln(1+eˣ)`, `a = ln 2`.
pub fn fz_loss(f: &VarEsForecast, r: f64) -> f64 {
    fz_loss_raw(f.var, f.es, f.prob, r)
}

#[inline]
fn fz_loss_raw(var: f64, es: f64, p: f64, r: f64) -> f64 {
    let hit = if r <= var { 1.0 } else { 0.0 };
    var * (hit - p) - hit * r + logistic(es) * (es - var + hit * (var - r) / p) - softplus(es)
        + std::f64::consts::LN_2
}

/// Average loss of a fixed forecast over a sample of returns.
pub fn mean_fz_loss(f: &VarEsForecast, returns: &[f64]) -> f64 {
    returns
        .iter()
        .map(|&r| fz_loss_raw(f.var, f.es, f.prob, r))
        .sum::<f64>()
        / returns.len() as f64
}

/// Grid point with the smallest average loss among pairs with `es ≤ var`.
pub fn fz_grid_minimizer(
    returns: &[f64],
    prob: f64,
    var_grid: &[f64],
    es_grid: &[f64],
) -> Result<(f64, f64)> {
    use rayon::prelude::*;
    if returns.is_empty() {
        return Err(Error::InsufficientData("no returns".into()));
    }
    let candidates: Vec<(f64, f64)> = var_grid
        .iter()
        .flat_map(|&v| es_grid.iter().filter(move |&&e| e <= v).map(move |&e| (v, e)))
        .collect();
    if candidates.is_empty() {
        return Err(Error::invalid("grid contains no pair with ES <= VaR"));
    }
    let forecasts = candidates
        .iter()
        .map(|&(v, e)| VarEsForecast::new(v, e, prob))
        .collect::<Result<Vec<_>>>()?;
    let scores: Vec<f64> = forecasts
        .par_iter()
        .map(|f| mean_fz_loss(f, returns))
        .collect();
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |b, (i, &s)| if s < scores[b] { i } else { b });
    Ok(candidates[best])
}

/// ES forecasts per liquidity horizon together with the scaling horizon `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonEsSet {
    horizons: Vec<(u32, f64)>,
    base_t: f64,
}

impl HorizonEsSet {
    pub fn new(horizons: Vec<(u32, f64)>, base_t: f64) -> Result<Self> {
        if horizons.is_empty() {
            return Err(Error::invalid("at least one liquidity horizon is required"));
        }
        if !(base_t > 0.0) {
            return Err(Error::invalid(format!("scaling horizon {base_t} must be positive")));
        }
        if horizons.iter().any(|&(lh, es)| lh == 0 || !es.is_finite()) {
            return Err(Error::invalid("horizons must be positive and ES values finite"));
        }
        if horizons.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("liquidity horizons must be strictly increasing"));
        }
        Ok(Self { horizons, base_t })
    }

    /// ES values on the Basel ladder `10, 20, 40, 60, 120`.
    pub fn basel(es: [f64; 5], base_t: f64) -> Result<Self> {
        Self::new(BASEL_LIQUIDITY_HORIZONS.into_iter().zip(es).collect(), base_t)
    }

    pub fn horizons(&self) -> &[(u32, f64)] {
        &self.horizons
    }

    pub fn base_t(&self) -> f64 {
        self.base_t
    }
}

/// `√(ES₁² + Σ_{j≥2} (ES_j √((LH_j − LH_{j−1})/T))²)`.
pub fn es_bcbs(h: &HorizonEsSet) -> f64 {
    let first = h.horizons[0].1;
    let rest: f64 = h
        .horizons
        .windows(2)
        .map(|w| w[1].1 * w[1].1 * f64::from(w[1].0 - w[0].0) / h.base_t)
        .sum();
    (first * first + rest).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StressWindow {
    /// 0-based first time index.
    pub start: usize,
    pub length: usize,
}

impl StressWindow {
    pub fn end(&self) -> usize {
        self.start + self.length
    }

    pub fn contains(&self, t: usize) -> bool {
        (self.start..self.end()).contains(&t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowCriterion {
    #[default]
    RollingMean,
    RollingMax,
}

/// Window of `win_len` consecutive points where the factor is highest; ties go to the earliest start.
pub fn find_stress_window(
    factor: &[f64],
    win_len: usize,
    criterion: WindowCriterion,
) -> Result<StressWindow> {
    if win_len == 0 {
        return Err(Error::invalid("window length must be positive"));
    }
    if factor.len() < win_len {
        return Err(Error::InsufficientData(format!(
            "series of {} points is shorter than the {win_len}-point window",
            factor.len()
        )));
    }
    if let Some(t) = factor.iter().position(|x| !x.is_finite()) {
        return Err(Error::invalid(format!("non-finite factor value at {t}")));
    }
    let score = |w: &[f64]| match criterion {
        WindowCriterion::RollingMean => w.iter().sum::<f64>() / win_len as f64,
        WindowCriterion::RollingMax => w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    };
    let mut best = (0, score(&factor[..win_len]));
    for (start, w) in factor.windows(win_len).enumerate().skip(1) {
        let s = score(w);
        if s > best.1 {
            best = (start, s);
        }
    }
    Ok(StressWindow {
        start: best.0,
        length: win_len,
    })
}

/// Labels each time point with the first regime whose window covers it, else `baseline`.
///
/// The alphabet is the regime names in the given order followed by `baseline`.
pub fn states_from_windows(
    windows: &[(String, StressWindow)],
    n: usize,
    baseline: &str,
) -> Result<StateSeries> {
    if let Some((name, w)) = windows.iter().find(|(_, w)| w.end() > n) {
        return Err(Error::invalid(format!(
            "window `{name}` ends at {} beyond the series length {n}",
            w.end()
        )));
    }
    let mut alphabet: Vec<String> = windows.iter().map(|(name, _)| name.clone()).collect();
    alphabet.push(baseline.to_string());
    let base_code = windows.len();
    let codes = (0..n)
        .map(|t| {
            windows
                .iter()
                .position(|(_, w)| w.contains(t))
                .unwrap_or(base_code)
        })
        .collect();
    StateSeries::from_codes(alphabet, codes)
}
