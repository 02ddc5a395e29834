//! Loss panels, state series and the confidence-set result type.
//!
//! Losses are stored time-major: row `t` holds the losses of all `m` methods at
//! time `t`. Time and method positions are 0-based throughout the crate.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n × m` matrix of out-of-sample losses, one column per forecasting method.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPanel {
    data: Vec<f64>,
    n: usize,
    m: usize,
    method_ids: Vec<String>,
    time_index: Option<Vec<String>>,
}

impl LossPanel {
    /// Builds a panel from row-major data of length `n * m`.
    pub fn from_row_major(data: Vec<f64>, method_ids: Vec<String>) -> Result<Self> {
        let m = method_ids.len();
        if m < 2 {
            return Err(Error::Shape(format!("need at least 2 methods, got {m}")));
        }
        if data.is_empty() || !data.len().is_multiple_of(m) {
            return Err(Error::Shape(format!(
                "{} values cannot be arranged in rows of {m} methods",
                data.len()
            )));
        }
        let mut seen = HashSet::with_capacity(m);
        for id in &method_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateMethod(id.clone()));
            }
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                t: pos / m,
                method: pos % m,
            });
        }
        let n = data.len() / m;
        Ok(Self {
            data,
            n,
            m,
            method_ids,
            time_index: None,
        })
    }

    /// Builds a panel from a list of rows.
    pub fn from_rows(rows: &[Vec<f64>], method_ids: Vec<String>) -> Result<Self> {
        let m = method_ids.len();
        if let Some((t, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != m) {
            return Err(Error::Shape(format!(
                "row {t} has {} entries, expected {m}",
                row.len()
            )));
        }
        Self::from_row_major(rows.concat(), method_ids)
    }

    /// Builds a panel from columns, one per method.
    pub fn from_columns(columns: &[Vec<f64>], method_ids: Vec<String>) -> Result<Self> {
        let m = columns.len();
        if m != method_ids.len() {
            return Err(Error::LengthMismatch {
                expected: method_ids.len(),
                actual: m,
            });
        }
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Shape("columns have different lengths".into()));
        }
        let mut data = Vec::with_capacity(n * m);
        for t in 0..n {
            data.extend(columns.iter().map(|c| c[t]));
        }
        Self::from_row_major(data, method_ids)
    }

    /// Attaches time stamps (one per row).
    pub fn with_time_index(mut self, index: Vec<String>) -> Result<Self> {
        if index.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                actual: index.len(),
            });
        }
        self.time_index = Some(index);
        Ok(self)
    }

    /// Default method ids `m1, m2, ...`.
    pub fn default_ids(m: usize) -> Vec<String> {
        (1..=m).map(|i| format!("m{i}")).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn method_ids(&self) -> &[String] {
        &self.method_ids
    }

    pub fn time_index(&self) -> Option<&[String]> {
        self.time_index.as_deref()
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, t: usize, method: usize) -> f64 {
        self.data[t * self.m + method]
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.m..(t + 1) * self.m]
    }

    pub fn column(&self, method: usize) -> Vec<f64> {
        self.data.iter().skip(method).step_by(self.m).copied().collect()
    }

    /// Per-method sample means.
    pub fn column_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.m];
        for row in self.data.chunks_exact(self.m) {
            for (s, x) in sums.iter_mut().zip(row) {
                *s += x;
            }
        }
        sums.iter().map(|s| s / self.n as f64).collect()
    }

    /// Loss differential `L_i - L_j` over time.
    pub fn differential(&self, i: usize, j: usize) -> Vec<f64> {
        self.data
            .chunks_exact(self.m)
            .map(|row| row[i] - row[j])
            .collect()
    }

    /// Sub-panel made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InsufficientData("row selection is empty".into()));
        }
        let mut data = Vec::with_capacity(rows.len() * self.m);
        for &t in rows {
            if t >= self.n {
                return Err(Error::invalid(format!("row {t} out of range (n = {})", self.n)));
            }
            data.extend_from_slice(self.row(t));
        }
        let time_index = self
            .time_index
            .as_ref()
            .map(|idx| rows.iter().map(|&t| idx[t].clone()).collect());
        Ok(Self {
            data,
            n: rows.len(),
            m: self.m,
            method_ids: self.method_ids.clone(),
            time_index,
        })
    }
}

/// Per-time regime labels over a caller-declared alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSeries {
    alphabet: Vec<String>,
    labels: Vec<usize>,
}

impl StateSeries {
    /// Builds a series from textual labels; every label must belong to `alphabet`.
    pub fn new<S: AsRef<str>>(alphabet: Vec<String>, labels: &[S]) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::invalid("state alphabet is empty"));
        }
        let mut seen = HashSet::new();
        for a in &alphabet {
            if !seen.insert(a.as_str()) {
                return Err(Error::invalid(format!("state `{a}` declared twice")));
            }
        }
        let codes = labels
            .iter()
            .map(|l| {
                let l = l.as_ref();
                alphabet
                    .iter()
                    .position(|a| a == l)
                    .ok_or_else(|| Error::UnknownState(l.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            alphabet,
            labels: codes,
        })
    }

    /// Builds a series from positions into `alphabet`.
    pub fn from_codes(alphabet: Vec<String>, codes: Vec<usize>) -> Result<Self> {
        if alphabet.is_empty() {
            return Err(Error::invalid("state alphabet is empty"));
        }
        if let Some(&c) = codes.iter().find(|&&c| c >= alphabet.len()) {
            return Err(Error::UnknownState(format!("code {c}")));
        }
        Ok(Self {
            alphabet,
            labels: codes,
        })
    }

    /// Alphabet `1..=d` with labels given as 1-based integers.
    pub fn numbered(d: usize, labels: &[usize]) -> Result<Self> {
        let alphabet = (1..=d).map(|s| s.to_string()).collect();
        let codes = labels
            .iter()
            .map(|&l| {
                if l == 0 || l > d {
                    Err(Error::UnknownState(l.to_string()))
                } else {
                    Ok(l - 1)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_codes(alphabet, codes)
    }

    /// Infers the alphabet from the labels: numeric order when every label parses
    /// as an integer, lexical order otherwise.
    pub fn infer<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let mut alphabet: Vec<String> = labels.iter().map(|l| l.as_ref().to_string()).collect();
        alphabet.sort();
        alphabet.dedup();
        if alphabet.iter().all(|a| a.parse::<i64>().is_ok()) {
            alphabet.sort_by_key(|a| a.parse::<i64>().unwrap_or_default());
        }
        Self::new(alphabet, labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of declared states `d`.
    pub fn num_states(&self) -> usize {
        self.alphabet.len()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn codes(&self) -> &[usize] {
        &self.labels
    }

    pub fn code(&self, t: usize) -> usize {
        self.labels[t]
    }

    pub fn label(&self, t: usize) -> &str {
        &self.alphabet[self.labels[t]]
    }

    pub fn position_of(&self, label: &str) -> Option<usize> {
        self.alphabet.iter().position(|a| a == label)
    }
}

/// Index sets `I^l = { t : S_t = s^l }` for every declared state, including empty ones.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StatePartition {
    alphabet: Vec<String>,
    index_sets: Vec<Vec<usize>>,
}

impl StatePartition {
    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn index_sets(&self) -> &[Vec<usize>] {
        &self.index_sets
    }

    pub fn indices(&self, state: usize) -> &[usize] {
        &self.index_sets[state]
    }

    pub fn count(&self, state: usize) -> usize {
        self.index_sets[state].len()
    }

    pub fn counts(&self) -> Vec<usize> {
        self.index_sets.iter().map(Vec::len).collect()
    }
}

/// Splits the time axis by state. Empty states are kept as empty index sets.
pub fn partition_by_state(panel: &LossPanel, states: &StateSeries) -> Result<StatePartition> {
    partition_series(panel.n(), states)
}

pub(crate) fn partition_series(n: usize, states: &StateSeries) -> Result<StatePartition> {
    if states.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: states.len(),
        });
    }
    let mut index_sets = vec![Vec::new(); states.num_states()];
    for (t, &c) in states.codes().iter().enumerate() {
        index_sets[c].push(t);
    }
    Ok(StatePartition {
        alphabet: states.alphabet().to_vec(),
        index_sets,
    })
}

/// Losses relative to the cross-method average, `d_{i·,t} = L_{i,t} - mean_j L_{j,t}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeLoss {
    d_dot: Vec<f64>,
    row_means: Vec<f64>,
    n: usize,
    m: usize,
}

impl RelativeLoss {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn d_dot(&self, t: usize, i: usize) -> f64 {
        self.d_dot[t * self.m + i]
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.d_dot[t * self.m..(t + 1) * self.m]
    }

    /// Pairwise differential `d_{ij,t} = d_{i·,t} - d_{j·,t}`.
    #[inline]
    pub fn pairwise(&self, i: usize, j: usize, t: usize) -> f64 {
        self.d_dot(t, i) - self.d_dot(t, j)
    }

    /// Cross-method mean loss at each time point.
    pub fn row_means(&self) -> &[f64] {
        &self.row_means
    }

    /// Recovers the original losses.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.d_dot
            .chunks_exact(self.m)
            .zip(&self.row_means)
            .flat_map(|(row, mean)| row.iter().map(move |d| d + mean))
            .collect()
    }
}

pub fn compute_relative_losses(panel: &LossPanel) -> RelativeLoss {
    let m = panel.m();
    let mut d_dot = Vec::with_capacity(panel.n() * m);
    let mut row_means = Vec::with_capacity(panel.n());
    for t in 0..panel.n() {
        let row = panel.row(t);
        let mean = row.iter().sum::<f64>() / m as f64;
        row_means.push(mean);
        d_dot.extend(row.iter().map(|x| x - mean));
    }
    RelativeLoss {
        d_dot,
        row_means,
        n: panel.n(),
        m,
    }
}

/// One rejected equal-predictive-ability hypothesis and the method it removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationRecord {
    pub eliminated: String,
    #[serde(rename = "T_max")]
    pub t_max: f64,
    pub p_step: f64,
    pub p_mcs: f64,
    /// Standardized excess losses of the methods active at this step, in method order.
    #[serde(default)]
    pub t_stats: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Complete,
    /// Fewer than `required` observations; the count is the result's `observations`.
    InsufficientData { required: usize },
}

/// Surviving methods of a (conditional) confidence set together with its elimination trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSetResult {
    pub state: Option<String>,
    #[serde(flatten)]
    pub status: RunStatus,
    pub alpha: f64,
    pub block_len: usize,
    #[serde(rename = "B")]
    pub replications: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub observations: usize,
    pub surviving: Vec<String>,
    pub trace: Vec<EliminationRecord>,
    /// Step p-value of the final, non-rejected test (`None` when a single method remained).
    pub final_p_step: Option<f64>,
    pub mcs_p_values: BTreeMap<String, f64>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl ConfidenceSetResult {
    pub fn is_complete(&self) -> bool {
        matches!(self.status, RunStatus::Complete)
    }

    pub fn eliminated(&self) -> impl Iterator<Item = &str> {
        self.trace.iter().map(|r| r.eliminated.as_str())
    }

    pub fn size(&self) -> usize {
        self.surviving.len()
    }

    pub fn contains(&self, method: &str) -> bool {
        self.surviving.iter().any(|s| s == method)
    }
}
