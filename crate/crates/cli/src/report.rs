//! `summary.csv` and `plot_accuracy_vs_time.csv`, both computed from the
//! `trace.csv` files under an output directory.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

const METRICS: [&str; 2] = ["test_accuracy", "error"];

pub struct Trace {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Trace {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        let header: Vec<String> = match lines.next() {
            Some(h) => h.split(',').map(str::to_string).collect(),
            None => bail!("{}: empty trace", path.display()),
        };
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<Result<_, _>>()
                .with_context(|| format!("{}: bad number on line {}", path.display(), i + 2))?;
            if row.len() != header.len() {
                bail!("{}: line {} has {} fields, header has {}", path.display(), i + 2, row.len(), header.len());
            }
            rows.push(row);
        }
        Ok(Trace { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    fn metric(&self) -> Option<&'static str> {
        METRICS.into_iter().find(|m| self.header.iter().any(|h| h == m))
    }
}

/// `(method, seed, trace path)` for every run under `root`, sorted by
/// method name then seed.
pub fn find_traces(root: &Path) -> Result<Vec<(String, u64, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(root).with_context(|| format!("listing {}", root.display()))? {
        let entry = entry?;
        if !entry.file_type()?.is_dir() {
            continue;
        }
        let method = entry.file_name().to_string_lossy().into_owned();
        for run in fs::read_dir(entry.path())? {
            let run = run?;
            let name = run.file_name().to_string_lossy().into_owned();
            let Some(seed) = name.strip_prefix("seed_").and_then(|s| s.parse::<u64>().ok()) else {
                continue;
            };
            let trace = run.path().join("trace.csv");
            if !trace.is_file() {
                bail!("{}: missing trace.csv", run.path().display());
            }
            out.push((method.clone(), seed, trace));
        }
    }
    if out.is_empty() {
        bail!("{}: no traces found", root.display());
    }
    out.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    Ok(out)
}

/// Mean and sample standard deviation (divisor `n − 1`; zero for a single
/// value).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per method: the final metric value of each repeat, averaged.
pub fn emit_summary(root: &Path) -> Result<()> {
    let traces = find_traces(root)?;
    let mut out = String::from("method,metric,repeats,mean,std,mean_wall_s\n");
    let mut at = 0;
    while at < traces.len() {
        let method = &traces[at].0;
        let end = at + traces[at..].iter().take_while(|t| &t.0 == method).count();
        let mut finals = Vec::new();
        let mut walls = Vec::new();
        let mut metric = None;
        for (_, _, path) in &traces[at..end] {
            let t = Trace::read(path)?;
            let Some(m) = t.metric() else { bail!("{}: no metric column", path.display()) };
            if metric.is_some_and(|prev| prev != m) {
                bail!("{method}: traces disagree on the metric column");
            }
            metric = Some(m);
            let Some(last) = t.column(m).and_then(|c| c.last().copied()) else {
                bail!("{}: trace has no rows", path.display())
            };
            finals.push(last);
            walls.push(t.column("wall_s").and_then(|c| c.last().copied()).unwrap_or(f64::NAN));
        }
        let (mean, std) = mean_std(&finals);
        let (wall, _) = mean_std(&walls);
        out.push_str(&format!("{method},{},{},{mean},{std},{wall}\n", metric.expect("at least one trace"), finals.len()));
        at = end;
    }
    let path = root.join("summary.csv");
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))
}

/// Held-out accuracy against solver wall time, one series per run. Runs
/// without an accuracy column are skipped; the file is written only when
/// some run has one.
pub fn emit_plot_data(root: &Path) -> Result<()> {
    let traces = find_traces(root)?;
    let mut rows: Vec<(String, u64, f64, f64)> = Vec::new();
    for (method, seed, path) in &traces {
        let t = Trace::read(path)?;
        let (Some(wall), Some(acc)) = (t.column("wall_s"), t.column("test_accuracy")) else { continue };
        rows.extend(wall.into_iter().zip(acc).map(|(w, a)| (method.clone(), *seed, w, a)));
    }
    if rows.is_empty() {
        return Ok(());
    }
    rows.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)).then(a.2.total_cmp(&b.2)));
    let mut out = String::from("method,seed,wall_s,test_accuracy\n");
    for (m, s, w, a) in rows {
        out.push_str(&format!("{m},{s},{w},{a}\n"));
    }
    let path = root.join("plot_accuracy_vs_time.csv");
    fs::write(&path, out).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[0.7]), (0.7, 0.0));
    }

    #[test]
    fn plot_rows_are_sorted() {
        let dir = tempfile::tempdir().unwrap();
        let header = "iter,wall_s,obj,penalty,max_viol,sumsq_viol,step_w,ema_w,ema_p,test_accuracy\n";
        for (method, seed, body) in [("b", 1, "0,0.5,1,0,0,0,0,0,0,0.5\n"), ("a", 10, "0,0,1,0,0,0,0,0,0,0.25\n"), ("a", 2, "0,0.1,1,0,0,0,0,0,0,1\n5,0.3,1,0,0,0,0,0,0,0.75\n")] {
            let d = dir.path().join(method).join(format!("seed_{seed}"));
            fs::create_dir_all(&d).unwrap();
            fs::write(d.join("trace.csv"), format!("{header}{body}")).unwrap();
        }
        emit_plot_data(dir.path()).unwrap();
        let got = fs::read_to_string(dir.path().join("plot_accuracy_vs_time.csv")).unwrap();
        assert_eq!(got, "method,seed,wall_s,test_accuracy\na,2,0.1,1\na,2,0.3,0.75\na,10,0,0.25\nb,1,0.5,0.5\n");
        emit_summary(dir.path()).unwrap();
        let got = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(got.starts_with("method,metric,repeats,mean,std,mean_wall_s\na,test_accuracy,2,0.5,"), "{got}");
    }

    #[test]
    fn missing_traces_are_an_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(emit_plot_data(dir.path()).is_err());
        fs::create_dir_all(dir.path().join("dszog/seed_0")).unwrap();
        assert!(emit_summary(dir.path()).is_err());
    }
}
