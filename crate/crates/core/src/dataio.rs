//! Sparse text datasets, subsampling, and run output files.
//!
//! # Sparse format
//!
//! One row per line: `<label> <index>:<value> <index>:<value> ...`, tokens
//! separated by any run of spaces or tabs. Indices are 1-based and may appear
//! in any order but at most once per line; absent indices are zero. Labels
//! are numbers: `-1` and `0` map to `−1`, `1` and `2` map to `+1` (a leading
//! `+` is accepted). Blank lines and lines whose first non-blank character is
//! `#` are skipped. The dimension is the largest index seen, or `expect_dim`
//! when given.
//!
//! # Run files
//!
//! [`write_run`] writes `trace.csv`, `report.txt` and `manifest.txt` into one
//! directory. Numbers in `trace.csv` carry 12 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::{index, SliceRandom};

use crate::config::DszogConfig;
use crate::error::{Error, Result};
use crate::metrics::StationarityReport;
use crate::problems::Dataset;
use crate::record::RunRecord;
use crate::rng;
use crate::solver::Termination;

pub const TRACE_HEADER: [&str; 9] =
    ["iter", "wall_s", "obj", "penalty", "max_viol", "sumsq_viol", "step_w", "ema_w", "ema_p"];

pub fn read_sparse_dataset(path: impl AsRef<Path>, expect_dim: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sparse_dataset(&text, expect_dim)
}

pub fn parse_sparse_dataset(text: &str, expect_dim: Option<usize>) -> Result<Dataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a token");
        labels.push(parse_label(label_tok).ok_or_else(|| err(format!("bad label `{label_tok}`")))?);
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (i, v) = tok.split_once(':').ok_or_else(|| err(format!("expected index:value, got `{tok}`")))?;
            let i: usize = i.parse().map_err(|_| err(format!("bad index `{i}`")))?;
            if i == 0 {
                return Err(err("indices are 1-based; found 0".into()));
            }
            let v: f64 = v.parse().map_err(|_| err(format!("bad value `{v}`")))?;
            if !v.is_finite() {
                return Err(err(format!("non-finite value `{v}`")));
            }
            if let Some(d) = expect_dim.filter(|d| i > *d) {
                return Err(err(format!("index {i} exceeds dimension {d}")));
            }
            if entries.iter().any(|(j, _)| *j + 1 == i) {
                return Err(err(format!("index {i} repeated")));
            }
            max_index = max_index.max(i);
            entries.push((i - 1, v));
        }
        rows.push(entries);
    }
    let d = expect_dim.unwrap_or(max_index);
    let mut features = vec![0.0; rows.len() * d];
    for (r, entries) in rows.iter().enumerate() {
        for &(i, v) in entries {
            features[r * d + i] = v;
        }
    }
    Dataset::new(d, features, labels)
}

fn parse_label(tok: &str) -> Option<f64> {
    let v: f64 = tok.parse().ok()?;
    if v == -1.0 || v == 0.0 {
        Some(-1.0)
    } else if v == 1.0 || v == 2.0 {
        Some(1.0)
    } else {
        None
    }
}

/// Writes `data` in the sparse format, omitting zeros. Values use Rust's
/// shortest round-trip formatting, so reading the file back is exact.
pub fn write_sparse_dataset(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for i in 0..data.n() {
        out.push_str(if data.label(i) > 0.0 { "+1" } else { "-1" });
        for (j, v) in data.row(i).iter().enumerate() {
            if *v != 0.0 {
                write!(out, " {}:{v}", j + 1).expect("writing to a String");
            }
        }
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// `n_keep` rows drawn without replacement, in original row order. The
/// stratified variant keeps each class's share to within one row.
pub fn subsample(data: &Dataset, n_keep: usize, stratified: bool, seed: u64) -> Result<Dataset> {
    if n_keep > data.n() {
        return Err(Error::Data(format!("cannot keep {n_keep} of {} rows", data.n())));
    }
    let mut g = rng::stream(seed, rng::DATA);
    let mut keep = if stratified {
        let pos: Vec<usize> = (0..data.n()).filter(|&i| data.label(i) > 0.0).collect();
        let neg: Vec<usize> = (0..data.n()).filter(|&i| data.label(i) < 0.0).collect();
        let k_pos = ((n_keep as f64) * pos.len() as f64 / data.n().max(1) as f64).round() as usize;
        let k_pos = k_pos.min(pos.len()).max(n_keep.saturating_sub(neg.len()));
        let mut keep: Vec<usize> = index::sample(&mut g, pos.len(), k_pos).into_iter().map(|i| pos[i]).collect();
        keep.extend(index::sample(&mut g, neg.len(), n_keep - k_pos).into_iter().map(|i| neg[i]));
        keep
    } else {
        index::sample(&mut g, data.n(), n_keep).into_vec()
    };
    keep.sort_unstable();
    Ok(data.select(&keep))
}

/// Shuffled copy of all rows.
pub fn shuffle_rows(data: &Dataset, seed: u64) -> Dataset {
    let mut idx: Vec<usize> = (0..data.n()).collect();
    idx.shuffle(&mut rng::stream(seed, rng::DATA));
    data.select(&idx)
}

/// 64-bit FNV-1a over `n, d, r` (little-endian u64), every feature and label
/// as little-endian f64 bits, then the sensitive bytes.
pub fn dataset_checksum(data: &Dataset) -> u64 {
    let mut h = Fnv1a::new();
    for v in [data.n(), data.dim(), data.sensitive_dim()] {
        h.write(&(v as u64).to_le_bytes());
    }
    for x in data.features().iter().chain(data.labels()) {
        h.write(&x.to_bits().to_le_bytes());
    }
    for i in 0..data.n() {
        h.write(data.sensitive_row(i));
    }
    h.0
}

struct Fnv1a(u64);

impl Fnv1a {
    fn new() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

/// Ordered `key=value` provenance lines.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    /// Every solver configuration field.
    pub fn push_config(&mut self, cfg: &DszogConfig) -> &mut Self {
        for (k, v) in cfg.fields() {
            self.push(k, v);
        }
        self
    }

    /// Size and checksum of a dataset under a key prefix.
    pub fn push_dataset(&mut self, prefix: &str, data: &Dataset) -> &mut Self {
        self.push(format!("{prefix}.n"), data.n())
            .push(format!("{prefix}.d"), data.dim())
            .push(format!("{prefix}.r"), data.sensitive_dim())
            .push(format!("{prefix}.fnv1a64"), format!("{:016x}", dataset_checksum(data)))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}

/// `x` with 12 significant digits, fixed notation for moderate magnitudes
/// and scientific otherwise, trailing zeros removed.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn render_trace(record: &RunRecord) -> String {
    let mut out = TRACE_HEADER.join(",");
    for c in record.extra_columns() {
        out.push(',');
        out.push_str(c);
    }
    out.push('\n');
    for r in record.rows() {
        out.push_str(&r.iter.to_string());
        let values = [
            r.wall_time_s,
            r.objective,
            r.penalty,
            r.max_violation,
            r.sum_sq_violation,
            r.step_norm_w,
            r.ema_norm_w,
            r.ema_norm_p,
        ];
        for v in values.iter().chain(&r.extra) {
            out.push(',');
            out.push_str(&format_sig12(*v));
        }
        out.push('\n');
    }
    out
}

pub fn render_report(report: &StationarityReport, termination: Termination) -> String {
    let mut out = format!("termination={termination}\n");
    for (k, v) in report.fields() {
        writeln!(out, "{k}={v}").expect("writing to a String");
    }
    out
}

/// Writes `trace.csv`, `report.txt` and `manifest.txt` under `out_dir`,
/// creating it if needed.
pub fn write_run(
    record: &RunRecord,
    report: &StationarityReport,
    termination: Termination,
    manifest: &Manifest,
    out_dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("trace.csv", render_trace(record)),
        ("report.txt", render_report(report, termination)),
        ("manifest.txt", manifest.render()),
    ];
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

/// Reads a `key=value` file as written by [`Manifest::render`] or
/// [`render_report`].
pub fn read_key_values(path: impl AsRef<Path>) -> Result<Vec<(String, String)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse { line: i + 1, msg: format!("expected key=value, got `{l}`") })
        })
        .collect()
}
