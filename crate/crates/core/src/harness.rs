//! Convergence experiments: densities of sequence terms at several scales,
//! tabulated as CSV.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{ConstructionDescriptor, DEFAULT_LENGTH_CAP};
use crate::count;
use crate::error::{Error, Result};
use crate::estimate::{check_confidence, estimate_histogram_at_scale, DensityEstimate};
use crate::pattern;
use crate::perm::Permutation;
use crate::scaling::ScalingFunction;
use crate::seed::SeedStream;
use crate::sequence::{ComponentSequence, PermutationSequence};

pub const CSV_HEADER: [&str; 7] = [
    "j",
    "n",
    "scale",
    "pattern",
    "value",
    "half_width",
    "samples",
];
const SKIPPED: &str = "skipped";

/// What the experiment indexes by `j`: a component sequence (term `j` has
/// length `j`) or a construction (term `j` is the assembly with `m = j`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "serde_json::Value", into = "serde_json::Value")]
#[allow(clippy::large_enum_variant)]
pub enum SequenceSource {
    Construction(ConstructionDescriptor),
    Component(ComponentSequence),
}

impl TryFrom<serde_json::Value> for SequenceSource {
    type Error = serde_json::Error;
    fn try_from(v: serde_json::Value) -> std::result::Result<Self, Self::Error> {
        if v.get("kind").is_some() {
            serde_json::from_value(v).map(SequenceSource::Construction)
        } else {
            serde_json::from_value(v).map(SequenceSource::Component)
        }
    }
}

impl From<SequenceSource> for serde_json::Value {
    fn from(s: SequenceSource) -> Self {
        match s {
            SequenceSource::Construction(d) => serde_json::to_value(d),
            SequenceSource::Component(c) => serde_json::to_value(c),
        }
        .expect("descriptors serialize")
    }
}

/// A single pattern, or all of `S_k` (written `all k` or `all length k`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum PatternSpec {
    All(usize),
    One(Permutation),
}

impl PatternSpec {
    /// Pattern length; never zero.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        match self {
            PatternSpec::All(k) => *k,
            PatternSpec::One(p) => p.len(),
        }
    }

    fn expand(&self) -> Result<Vec<Permutation>> {
        match self {
            PatternSpec::All(k) => pattern::all_of_length(*k),
            PatternSpec::One(p) => Ok(vec![p.clone()]),
        }
    }
}

impl FromStr for PatternSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.strip_prefix("all") {
            Some(rest) => {
                let rest = rest.trim();
                let rest = rest.strip_prefix("length").unwrap_or(rest).trim();
                let k: usize = rest
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad pattern set {s:?}")))?;
                if k == 0 {
                    return Err(Error::Parse(format!("bad pattern set {s:?}")));
                }
                Ok(PatternSpec::All(k))
            }
            None => Ok(PatternSpec::One(t.parse()?)),
        }
    }
}

impl TryFrom<String> for PatternSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternSpec::All(k) => write!(f, "all {k}"),
            PatternSpec::One(p) => f.write_str(&compact(p)),
        }
    }
}

impl From<PatternSpec> for String {
    fn from(p: PatternSpec) -> Self {
        p.to_string()
    }
}

/// One-line text of a pattern: digits run together when every entry is a
/// single digit, space-separated otherwise.
pub fn compact(p: &Permutation) -> String {
    if p.len() > 1 && p.len() <= 9 {
        p.values().iter().map(|v| v.to_string()).collect()
    } else {
        p.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Mc,
    Exact,
}

fn default_samples() -> u64 {
    100_000
}

fn default_confidence() -> f64 {
    0.99
}

fn default_cap() -> u64 {
    DEFAULT_LENGTH_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub sequence: SequenceSource,
    pub indices: Vec<u64>,
    pub scales: Vec<ScalingFunction>,
    pub patterns: Vec<PatternSpec>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default = "default_confidence")]
    pub confidence: f64,
    #[serde(default)]
    pub seed: u64,
    /// Rayon worker threads; the table does not depend on it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default = "default_cap")]
    pub length_cap: u64,
    #[serde(default)]
    pub mode: Mode,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid_argument("samples must be at least 1"));
        }
        check_confidence(self.confidence)?;
        if self.indices.is_empty() || self.scales.is_empty() || self.patterns.is_empty() {
            return Err(Error::invalid_argument(
                "indices, scales and patterns must be non-empty",
            ));
        }
        if self.indices.contains(&0) {
            return Err(Error::invalid_argument("indices start at 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid_argument("workers must be at least 1"));
        }
        for p in &self.patterns {
            let limit = if matches!(p, PatternSpec::All(_)) {
                9
            } else {
                pattern::MAX_INDEXED_LEN
            };
            if p.len() > limit {
                return Err(Error::invalid_argument(format!(
                    "pattern set {p} is too long"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub j: u64,
    pub n: u128,
    pub scale: String,
    pub pattern: String,
    /// `None` marks a skipped cell.
    pub value: Option<f64>,
    pub half_width: Option<f64>,
    pub samples: u64,
}

impl ConvergenceRow {
    pub fn is_skipped(&self) -> bool {
        self.value.is_none()
    }

    fn skipped(j: u64, n: u128, scale: &str, pattern: &str) -> Self {
        ConvergenceRow {
            j,
            n,
            scale: scale.into(),
            pattern: pattern.into(),
            value: None,
            half_width: None,
            samples: 0,
        }
    }

    fn estimated(j: u64, n: u128, scale: &str, pattern: &str, est: DensityEstimate) -> Self {
        ConvergenceRow {
            j,
            n,
            scale: scale.into(),
            pattern: pattern.into(),
            value: Some(est.value),
            half_width: Some(est.half_width),
            samples: est.samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

fn opt_text(x: Option<f64>, missing: &str) -> String {
    x.map_or_else(|| missing.to_string(), |v| v.to_string())
}

impl ConvergenceTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.j.to_string(),
                r.n.to_string(),
                r.scale.clone(),
                r.pattern.clone(),
                opt_text(r.value, SKIPPED),
                opt_text(r.half_width, ""),
                r.samples.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        if rd.headers()?.iter().ne(CSV_HEADER) {
            return Err(Error::Parse(format!(
                "unexpected CSV header {:?}",
                rd.headers()?
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("bad {what} {s:?}")))
        };
        let mut rows = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let int = |i: usize| -> Result<u128> {
                rec[i]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad {} {:?}", CSV_HEADER[i], &rec[i])))
            };
            let value = match &rec[4] {
                SKIPPED => None,
                s => Some(num(s, "value")?),
            };
            let half_width = match &rec[5] {
                "" => None,
                s => Some(num(s, "half_width")?),
            };
            rows.push(ConvergenceRow {
                j: int(0)? as u64,
                n: int(1)?,
                scale: rec[2].to_string(),
                pattern: rec[3].to_string(),
                value,
                half_width,
                samples: int(6)? as u64,
            });
        }
        Ok(ConvergenceTable { rows })
    }
}

struct Term {
    j: u64,
    n: u128,
    perm: Option<Permutation>,
}

fn build_term(cfg: &ExperimentConfig, j: u64) -> Result<Term> {
    match &cfg.sequence {
        SequenceSource::Component(seq) => {
            let n = seq.term_len(j)?;
            let perm = (n <= cfg.length_cap).then(|| seq.term(j)).transpose()?;
            Ok(Term {
                j,
                n: n as u128,
                perm,
            })
        }
        SequenceSource::Construction(desc) => {
            let mut d = desc.with_m(j as usize);
            d.set_length_cap(d.length_cap().min(cfg.length_cap));
            let plan = d.plan()?;
            let perm = (!plan.exceeds_cap())
                .then(|| d.build().map(|b| b.0))
                .transpose()?;
            Ok(Term {
                j,
                n: plan.total_length,
                perm,
            })
        }
    }
}

/// Whether a cell failure means "no value at this size" rather than bad input.
fn infeasible(e: &Error) -> bool {
    matches!(
        e,
        Error::ScaleTooSmall { .. } | Error::PatternTooLong { .. }
    )
}

struct Cell<'a> {
    scale_idx: usize,
    scale: &'a ScalingFunction,
    k: usize,
    patterns: Vec<Permutation>,
}

fn evaluate_cell(
    cfg: &ExperimentConfig,
    term: &Term,
    cell: &Cell<'_>,
    stream: SeedStream,
) -> Result<Vec<ConvergenceRow>> {
    let scale_text = cell.scale.to_string();
    let texts: Vec<String> = cell.patterns.iter().map(compact).collect();
    let skip_all = || {
        texts
            .iter()
            .map(|p| ConvergenceRow::skipped(term.j, term.n, &scale_text, p))
            .collect()
    };
    let Some(host) = &term.perm else {
        return Ok(skip_all());
    };
    let f = match cell.scale.evaluate(host.len() as f64) {
        Ok(f) => f,
        Err(_) => return Ok(skip_all()),
    };
    let result: Result<Vec<DensityEstimate>> = match cfg.mode {
        Mode::Mc => {
            estimate_histogram_at_scale(host, cell.k, f, cfg.samples, cfg.confidence, stream)
                .map(|h| cell.patterns.iter().map(|p| h.estimate(p)).collect())
        }
        Mode::Exact => cell
            .patterns
            .iter()
            .map(|p| count::density_at_scale(p, host, f))
            .collect(),
    };
    match result {
        Ok(ests) => Ok(ests
            .into_iter()
            .zip(&texts)
            .map(|(e, p)| ConvergenceRow::estimated(term.j, term.n, &scale_text, p, e))
            .collect()),
        Err(e) if infeasible(&e) => Ok(skip_all()),
        Err(e) => Err(e),
    }
}

/// Patterns grouped by length, in order of first appearance, without repeats.
fn pattern_groups(specs: &[PatternSpec]) -> Result<Vec<(usize, Vec<Permutation>)>> {
    let mut groups: Vec<(usize, Vec<Permutation>)> = Vec::new();
    let mut seen = BTreeSet::new();
    for spec in specs {
        for p in spec.expand()? {
            if !seen.insert(p.clone()) {
                continue;
            }
            match groups.iter_mut().find(|g| g.0 == p.len()) {
                Some(g) => g.1.push(p),
                None => groups.push((p.len(), vec![p])),
            }
        }
    }
    Ok(groups)
}

fn run_rows(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let groups = pattern_groups(&cfg.patterns)?;
    let root = SeedStream::new(cfg.seed).tagged("converge");
    let mut rows = Vec::new();
    for &j in &cfg.indices {
        let term = build_term(cfg, j)?;
        let cells: Vec<Cell<'_>> = cfg
            .scales
            .iter()
            .enumerate()
            .flat_map(|(scale_idx, scale)| {
                groups.iter().map(move |(k, ps)| Cell {
                    scale_idx,
                    scale,
                    k: *k,
                    patterns: ps.clone(),
                })
            })
            .collect();
        let blocks: Vec<Vec<ConvergenceRow>> = cells
            .par_iter()
            .map(|c| {
                evaluate_cell(
                    cfg,
                    &term,
                    c,
                    root.child(j).child(c.scale_idx as u64).child(c.k as u64),
                )
            })
            .collect::<Result<_>>()?;
        rows.extend(blocks.into_iter().flatten());
    }
    Ok(ConvergenceTable { rows })
}

/// Runs the experiment; rows are ordered by index, scale, then pattern.
pub fn run_converge(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    match cfg.workers {
        None => run_rows(cfg),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::invalid_argument(format!("thread pool: {e}")))?
            .install(|| run_rows(cfg)),
    }
}
