//! Report envelopes. Every report carries a [`RunInfo`] so the run can be repeated exactly;
//! CSV reports carry it as `#` comment lines, which the readers skip.

use cmcs_core::cpa::{CovEstimator, DfcSelection, DmOutcome, StatewiseT, WaldOutcome};
use cmcs_core::losses::{StressWindow, WindowCriterion};
use cmcs_core::simlab::{RegionGrid, StudyCell, StudyResult};
use cmcs_core::ConfidenceSetResult;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOOL: &str = "cmcs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    #[serde(rename = "B")]
    pub boot_b: usize,
    /// `None` means the per-sample default `⌈n^{1/3}⌉`.
    pub block_len: Option<usize>,
    pub alpha: Option<f64>,
}

impl RunInfo {
    pub fn new(command: &str, seed: u64, boot_b: usize, block_len: Option<usize>, alpha: Option<f64>) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            command: command.into(),
            seed,
            boot_b,
            block_len,
            alpha,
        }
    }

    pub fn csv_preamble(&self) -> String {
        let block = self.block_len.map_or("auto".to_string(), |p| p.to_string());
        let alpha = self.alpha.map_or("-".to_string(), |a| a.to_string());
        format!(
            "# {} {} {}\n# seed={} B={} block_len={} alpha={}\n",
            self.tool, self.version, self.command, self.seed, self.boot_b, block, alpha
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsReport {
    pub run: RunInfo,
    pub losses: String,
    pub states: Option<String>,
    pub methods: Vec<String>,
    pub observations: usize,
    /// One entry for the unconditional set, or one per declared state.
    pub results: Vec<ConfidenceSetResult>,
}

/// One row of the CSV form of an [`McsReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsRow {
    pub state: String,
    pub method: String,
    pub in_set: bool,
    pub mcs_p_value: f64,
    /// 1-based elimination step, empty for survivors.
    pub eliminated_at: Option<usize>,
    pub status: String,
}

impl McsReport {
    pub fn rows(&self) -> Vec<McsRow> {
        let mut rows = Vec::new();
        for r in &self.results {
            let state = r.state.clone().unwrap_or_else(|| "all".into());
            let status = if r.is_complete() { "complete" } else { "insufficient_data" };
            for m in &self.methods {
                rows.push(McsRow {
                    state: state.clone(),
                    method: m.clone(),
                    in_set: r.contains(m),
                    mcs_p_value: r.mcs_p_values.get(m).copied().unwrap_or(f64::NAN),
                    eliminated_at: r.trace.iter().position(|e| &e.eliminated == m).map(|k| k + 1),
                    status: status.into(),
                });
            }
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        self.run.csv_preamble() + &rows_to_csv(&self.rows())
    }
}

fn rows_to_csv<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

fn rows_from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, CliError> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(|e| CliError::Parse {
            path: "<report>".into(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })
}

pub fn parse_mcs_csv(text: &str) -> Result<Vec<McsRow>, CliError> {
    rows_from_csv(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatewiseEntry {
    pub state: String,
    pub test: Option<StatewiseT>,
    /// Why the test could not be run.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpaReport {
    pub run: RunInfo,
    pub losses: String,
    pub states: Option<String>,
    /// The differential is `first - second`.
    pub first: String,
    pub second: String,
    pub observations: usize,
    pub cov: CovEstimator,
    pub wald: WaldOutcome,
    pub dm: DmOutcome,
    pub dm_squared: f64,
    pub statewise: Vec<StatewiseEntry>,
    pub dfc: DfcSelection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpaRow {
    pub test: String,
    pub state: String,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub note: String,
}

impl CpaReport {
    pub fn rows(&self) -> Vec<CpaRow> {
        let mut rows = vec![
            CpaRow {
                test: "wald".into(),
                state: "all".into(),
                statistic: Some(self.wald.statistic),
                p_value: Some(self.wald.p_value),
                note: format!("df={}", self.wald.df),
            },
            CpaRow {
                test: "dm".into(),
                state: "all".into(),
                statistic: Some(self.dm.statistic),
                p_value: Some(self.dm.p_value),
                note: String::new(),
            },
        ];
        for s in &self.statewise {
            rows.push(CpaRow {
                test: "statewise_t".into(),
                state: s.state.clone(),
                statistic: s.test.map(|t| t.statistic),
                p_value: s.test.map(|t| t.p_two_sided),
                note: s.note.clone().unwrap_or_default(),
            });
        }
        for s in &self.dfc.states {
            rows.push(CpaRow {
                test: "dfc".into(),
                state: s.state.clone(),
                statistic: s.mean,
                p_value: None,
                note: format!("{:?}{}", s.selected, if s.flagged { ",flagged" } else { "" }).to_lowercase(),
            });
        }
        rows
    }

    pub fn to_csv(&self) -> String {
        self.run.csv_preamble() + &rows_to_csv(&self.rows())
    }
}

pub fn parse_cpa_csv(text: &str) -> Result<Vec<CpaRow>, CliError> {
    rows_from_csv(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub run: RunInfo,
    pub study: StudyResult,
}

impl StudyReport {
    pub fn to_csv(&self) -> String {
        self.run.csv_preamble() + &self.study.to_csv()
    }
}

/// Reads the tidy study CSV back into cells. Every column before `statistic` is a parameter.
pub fn parse_study_csv(text: &str) -> Result<Vec<StudyCell>, CliError> {
    let bad = |line: u64, message: String| CliError::Parse {
        path: "<report>".into(),
        line,
        message,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| bad(0, e.to_string()))?.clone();
    let k = headers
        .iter()
        .position(|h| h == "statistic")
        .ok_or_else(|| bad(1, "missing `statistic` column".into()))?;
    let mut cells = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| rec[i].parse::<f64>().map_err(|e| bad(line, e.to_string()));
        let point = (0..k)
            .map(|i| Ok((headers[i].to_string(), num(i)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        cells.push(StudyCell {
            point,
            statistic: rec[k].to_string(),
            estimate: num(k + 1)?,
            mc_se: num(k + 2)?,
        });
    }
    Ok(cells)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub run: RunInfo,
    pub grid: RegionGrid,
}

impl RegionReport {
    pub fn to_csv(&self) -> String {
        self.run.csv_preamble() + &self.grid.to_csv()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowEntry {
    pub regime: String,
    pub source: String,
    pub window: StressWindow,
    /// Time labels of the first and last point in the window.
    pub first_time: String,
    pub last_time: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub run: RunInfo,
    pub win_len: usize,
    pub criterion: WindowCriterion,
    pub baseline: String,
    pub windows: Vec<WindowEntry>,
    /// Observation counts per state, in alphabet order.
    pub state_counts: Vec<(String, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRow {
    pub regime: String,
    pub source: String,
    pub start: usize,
    pub end: usize,
    pub first_time: String,
    pub last_time: String,
    pub score: f64,
}

impl WindowReport {
    pub fn rows(&self) -> Vec<WindowRow> {
        self.windows
            .iter()
            .map(|w| WindowRow {
                regime: w.regime.clone(),
                source: w.source.clone(),
                start: w.window.start,
                end: w.window.end(),
                first_time: w.first_time.clone(),
                last_time: w.last_time.clone(),
                score: w.score,
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        self.run.csv_preamble() + &rows_to_csv(&self.rows())
    }
}

pub fn parse_window_csv(text: &str) -> Result<Vec<WindowRow>, CliError> {
    rows_from_csv(text)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcbsRow {
    pub asset: String,
    pub uc: Option<f64>,
    pub es: Vec<(u32, f64)>,
    pub es_bcbs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcbsReport {
    pub run: RunInfo,
    pub base_t: f64,
    pub rows: Vec<BcbsRow>,
}

impl BcbsReport {
    /// The input table layout with an `ES_BCBS` column appended.
    pub fn to_csv(&self) -> String {
        let mut out = self.run.csv_preamble();
        let has_uc = self.rows.iter().any(|r| r.uc.is_some());
        out.push_str("asset");
        if has_uc {
            out.push_str(",UC");
        }
        if let Some(first) = self.rows.first() {
            for (lh, _) in &first.es {
                out.push_str(&format!(",LH{lh}"));
            }
        }
        out.push_str(",ES_BCBS\n");
        for r in &self.rows {
            out.push_str(&r.asset);
            if has_uc {
                out.push_str(&format!(",{}", r.uc.map_or(String::new(), |u| u.to_string())));
            }
            for (_, es) in &r.es {
                out.push_str(&format!(",{es}"));
            }
            out.push_str(&format!(",{}\n", r.es_bcbs));
        }
        out
    }
}
