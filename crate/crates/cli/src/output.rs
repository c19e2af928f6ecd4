use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use maxclade::exact::format_sig17;
use maxclade::mc::ExperimentResult;

use crate::{Format, Global, Outcome};

/// Rows of preformatted cells under a fixed header.
pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn render(&self, format: Format, meta: Value) -> String {
        match format {
            Format::Csv => {
                let mut out = self.header.join(",");
                out.push('\n');
                for r in &self.rows {
                    out.push_str(&r.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Value> = self
                    .rows
                    .iter()
                    .map(|r| {
                        let obj: Map<String, Value> = self
                            .header
                            .iter()
                            .zip(r)
                            .map(|(k, v)| (k.to_string(), cell(v)))
                            .collect();
                        Value::Object(obj)
                    })
                    .collect();
                let mut out =
                    serde_json::to_string_pretty(&json!({ "metadata": meta, "rows": rows }))
                        .expect("json serializes");
                out.push('\n');
                out
            }
        }
    }
}

fn cell(v: &str) -> Value {
    if v.is_empty() {
        return Value::Null;
    }
    if let Ok(i) = v.parse::<i64>() {
        return json!(i);
    }
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => json!(x),
        _ => json!(v),
    }
}

/// Writes to a sibling temp file, then renames over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| {
        io::Error::new(io::ErrorKind::InvalidInput, "output path has no file name")
    })?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_output(g: &Global, content: &str) -> Outcome {
    match &g.out {
        Some(path) => atomic_write(path, content.as_bytes())?,
        None => io::stdout().lock().write_all(content.as_bytes())?,
    }
    Ok(())
}

fn value(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format_sig17(x)
    }
}

/// One single-column CSV per statistic, named after it.
pub fn write_raw(dir: &Path, res: &ExperimentResult) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    for (stat, s) in &res.summaries {
        let Some(raw) = &s.raw else { continue };
        let mut out = format!("{stat}\n");
        for &x in raw {
            out.push_str(&value(x));
            out.push('\n');
        }
        atomic_write(&dir.join(format!("{stat}.csv")), out.as_bytes())?;
    }
    Ok(())
}

pub const HIST_RANGE: f64 = 4.0;

/// Histograms of `(x - mean)/sd` on `[-4, 4]`, with the density of each bin.
pub fn write_histograms(path: &Path, res: &ExperimentResult, bins: usize) -> io::Result<()> {
    let bins = bins.max(1);
    let width = 2.0 * HIST_RANGE / bins as f64;
    let mut out = String::from("stat,lo,hi,count,density\n");
    for (stat, s) in &res.summaries {
        let (Some(raw), sd) = (&s.raw, s.std_dev()) else {
            continue;
        };
        if !(sd > 0.0) {
            continue;
        }
        let mut counts = vec![0u64; bins];
        for &x in raw {
            let z = (x - s.mean) / sd;
            let b = ((z + HIST_RANGE) / width).floor();
            if b >= 0.0 && (b as usize) < bins {
                counts[b as usize] += 1;
            }
        }
        for (b, &c) in counts.iter().enumerate() {
            let lo = -HIST_RANGE + b as f64 * width;
            out.push_str(&format!(
                "{stat},{},{},{c},{}\n",
                format_sig17(lo),
                format_sig17(lo + width),
                format_sig17(c as f64 / (raw.len() as f64 * width))
            ));
        }
    }
    atomic_write(path, out.as_bytes())
}
