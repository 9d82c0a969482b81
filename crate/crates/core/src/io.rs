//! JSON interchange: frame files, matrix files and command reports.
//!
//! Frame files are `{"dim": d, "vectors": [[..], ..]}`. Entries are JSON
//! numbers or strings holding a C99 hex float such as `"0x1.8p1"`. Output
//! uses the shortest decimal that parses back to the same binary64 value.
//!
//! Reports index frame elements from 1.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certificates::CertificateResult;
use crate::duality::PerturbationSequence;
use crate::frame::{BoundsReport, ExcessReport, Frame};
use crate::numerics::Matrix;
use crate::weaving::{Counterexample, WeavingVerdict};

pub const REPORT_VERSION: &str = "woven-report/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("value error: {0}")]
    Value(String),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
}

pub type IoResult<T> = std::result::Result<T, IoError>;

fn parse_json(bytes: &[u8]) -> IoResult<Value> {
    serde_json::from_slice(bytes).map_err(|e| {
        // serde_json rejects literals such as 1e400 that overflow binary64.
        if e.to_string().contains("number out of range") {
            IoError::Value(e.to_string())
        } else {
            IoError::Parse(e.to_string())
        }
    })
}

fn parse_entry(v: &Value, at: &str) -> IoResult<f64> {
    let x = match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| IoError::Parse(format!("{at}: unreadable number {n}")))?,
        Value::String(s) => parse_hex(s, at)?,
        other => return Err(IoError::Parse(format!("{at}: expected a number, found {other}"))),
    };
    if !x.is_finite() {
        return Err(IoError::Value(format!("{at}: non-finite entry")));
    }
    Ok(x)
}

fn parse_hex(s: &str, at: &str) -> IoResult<f64> {
    let t = s.trim();
    match t.to_ascii_lowercase().trim_start_matches(['+', '-']) {
        "inf" | "infinity" | "nan" => return Err(IoError::Value(format!("{at}: non-finite entry \"{s}\""))),
        _ => {}
    }
    hexf_parse::parse_hexf64(t, false).map_err(|e| {
        if e.to_string().contains("exactly represent") {
            IoError::Value(format!("{at}: \"{s}\" is not representable as binary64"))
        } else {
            IoError::Parse(format!("{at}: \"{s}\" is neither a number nor a hex float"))
        }
    })
}

fn object<'a>(v: &'a Value, keys: &[&str]) -> IoResult<&'a serde_json::Map<String, Value>> {
    let obj = v.as_object().ok_or_else(|| IoError::Parse("top level must be a JSON object".into()))?;
    if let Some(k) = obj.keys().find(|k| !keys.contains(&k.as_str())) {
        return Err(IoError::Parse(format!("unknown field \"{k}\"")));
    }
    for k in keys {
        if !obj.contains_key(*k) {
            return Err(IoError::Parse(format!("missing field \"{k}\"")));
        }
    }
    Ok(obj)
}

fn parse_rows(v: &Value, what: &str) -> IoResult<Vec<Vec<f64>>> {
    let rows = v.as_array().ok_or_else(|| IoError::Parse(format!("\"{what}\" must be an array")))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row.as_array().ok_or_else(|| IoError::Parse(format!("{what}[{i}] must be an array")))?;
            row.iter().enumerate().map(|(j, x)| parse_entry(x, &format!("{what}[{i}][{j}]"))).collect()
        })
        .collect()
}

/// Parses a frame file. Vectors keep file order.
pub fn parse_frame(bytes: &[u8]) -> IoResult<Frame> {
    let v = parse_json(bytes)?;
    let obj = object(&v, &["dim", "vectors"])?;
    let dim = obj["dim"]
        .as_u64()
        .ok_or_else(|| IoError::Parse("\"dim\" must be a non-negative integer".into()))? as usize;
    let vectors = parse_rows(&obj["vectors"], "vectors")?;
    if dim == 0 {
        return Err(IoError::Shape("\"dim\" must be at least 1".into()));
    }
    if vectors.is_empty() {
        return Err(IoError::Shape("\"vectors\" is empty".into()));
    }
    if let Some((i, v)) = vectors.iter().enumerate().find(|(_, v)| v.len() != dim) {
        return Err(IoError::Shape(format!("vector {} has {} entries, expected {dim}", i + 1, v.len())));
    }
    Frame::new(dim, &vectors).map_err(|e| IoError::Shape(e.to_string()))
}

/// Parses `{"matrix": [[row], ..]}`.
pub fn parse_matrix(bytes: &[u8]) -> IoResult<Matrix> {
    let v = parse_json(bytes)?;
    let obj = object(&v, &["matrix"])?;
    let rows = parse_rows(&obj["matrix"], "matrix")?;
    if rows.is_empty() || rows[0].is_empty() {
        return Err(IoError::Shape("matrix is empty".into()));
    }
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != rows[0].len()) {
        return Err(IoError::Shape(format!("row {} has {} entries, expected {}", i + 1, r.len(), rows[0].len())));
    }
    Matrix::from_rows(&rows).map_err(|e| IoError::Shape(e.to_string()))
}

/// A perturbation sequence stored in frame-file layout; zero vectors are allowed.
pub fn parse_perturbation(bytes: &[u8]) -> IoResult<PerturbationSequence> {
    let f = parse_frame(bytes)?;
    PerturbationSequence::from_frame(&f).map_err(|e| IoError::Shape(e.to_string()))
}

fn read(path: &Path) -> IoResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| IoError::Read { path: path.display().to_string(), message: e.to_string() })
}

fn located<T>(path: &Path, r: IoResult<T>) -> IoResult<T> {
    let p = path.display();
    r.map_err(|e| match e {
        IoError::Parse(m) => IoError::Parse(format!("{p}: {m}")),
        IoError::Shape(m) => IoError::Shape(format!("{p}: {m}")),
        IoError::Value(m) => IoError::Value(format!("{p}: {m}")),
        read @ IoError::Read { .. } => read,
    })
}

pub fn read_frame(path: &Path) -> IoResult<Frame> {
    located(path, parse_frame(&read(path)?))
}

pub fn read_matrix(path: &Path) -> IoResult<Matrix> {
    located(path, parse_matrix(&read(path)?))
}

pub fn read_perturbation(path: &Path) -> IoResult<PerturbationSequence> {
    located(path, parse_perturbation(&read(path)?))
}

pub fn frame_to_json(frame: &Frame) -> String {
    serde_json::to_string_pretty(frame).expect("frames hold finite values")
}

/// Top-level document printed by every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub version: String,
    pub command: String,
    pub inputs: Vec<String>,
    /// Seconds since the Unix epoch; absent in deterministic mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub result: ReportResult,
}

impl Report {
    pub fn new(command: &str, inputs: Vec<String>, timestamp: Option<u64>, result: ReportResult) -> Self {
        Report { version: REPORT_VERSION.to_owned(), command: command.to_owned(), inputs, timestamp, result }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports hold finite values");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> IoResult<Self> {
        let r: Report = serde_json::from_str(s).map_err(|e| IoError::Parse(e.to_string()))?;
        if r.version != REPORT_VERSION {
            return Err(IoError::Parse(format!("unsupported report version \"{}\"", r.version)));
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReportResult {
    Bounds(BoundsReport),
    Excess(ExcessSummary),
    Dual(DualListing),
    Weaving(WeavingSummary),
    Certificate(CertificateResult),
    Search(SearchSummary),
}

fn one_based(ix: &[usize]) -> Vec<usize> {
    ix.iter().map(|i| i + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExcessSummary {
    pub excess: usize,
    pub rank: usize,
    pub riesz_indices: Vec<usize>,
    pub redundant_indices: Vec<usize>,
}

impl From<&ExcessReport> for ExcessSummary {
    fn from(e: &ExcessReport) -> Self {
        ExcessSummary {
            excess: e.excess,
            rank: e.riesz_indices.len(),
            riesz_indices: one_based(&e.riesz_indices),
            redundant_indices: one_based(&e.redundant_indices),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualEntry {
    pub seed: u64,
    pub dual: Frame,
    /// `dual − canonical`, one vector per element.
    pub perturbation: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualListing {
    pub canonical: Frame,
    pub canonical_parseval: Frame,
    pub excess: usize,
    pub scale: f64,
    pub duals: Vec<DualEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSummary {
    /// Pairs only: sorted indices taken from the first frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<usize>>,
    /// Frame number supplying each element.
    pub assignment: Vec<usize>,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeavingSummary {
    pub woven: bool,
    pub frames: usize,
    pub universal_lower: f64,
    pub universal_upper: f64,
    pub partitions_checked: u64,
    pub witness: Option<WitnessSummary>,
}

impl WeavingSummary {
    pub fn from_verdict(v: &WeavingVerdict, frames: usize) -> Self {
        WeavingSummary {
            woven: v.woven,
            frames,
            universal_lower: v.universal_lower,
            universal_upper: v.universal_upper,
            partitions_checked: v.partitions_checked,
            witness: v.witness.as_ref().map(|w| WitnessSummary {
                sigma: (w.assignment.frames == 2).then(|| one_based(&w.assignment.sigma())),
                assignment: w.assignment.choice.iter().map(|c| c + 1).collect(),
                lambda_min: w.lambda_min,
                lambda_max: w.lambda_max,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSummary {
    pub trial: usize,
    pub phi: Frame,
    pub psi: Frame,
    pub verdict: WeavingSummary,
}

impl From<&Counterexample> for CounterexampleSummary {
    fn from(c: &Counterexample) -> Self {
        CounterexampleSummary {
            trial: c.trial,
            phi: c.phi.clone(),
            psi: c.psi.clone(),
            verdict: WeavingSummary::from_verdict(&c.verdict, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSummary {
    pub dim: usize,
    pub count: usize,
    pub trials: usize,
    pub seed: u64,
    pub counterexamples: Vec<CounterexampleSummary>,
}
