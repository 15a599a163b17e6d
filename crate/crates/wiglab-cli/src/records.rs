//! Experiment records and their serialized forms. Bodies are
//! deterministic for a fixed config and seed; wall-clock fields carry
//! timing only and are excluded from reproducibility comparisons.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use crate::CliError;
use wiglab_sim::C64;

pub const CSV_HEADER: &str = "experiment_id,N,k,params_json,seed,n_samples,pred_re,pred_im,mean_re,mean_im,stderr,abs_dev,rel_dev,wall_ms";

#[derive(Clone, Debug)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub n: usize,
    pub k: usize,
    pub params_json: String,
    pub seed: u64,
    pub n_samples: usize,
    pub pred: C64,
    pub mean: C64,
    pub stderr: f64,
    pub wall_ms: u128,
}

impl ExperimentRecord {
    pub fn abs_dev(&self) -> f64 {
        (self.mean - self.pred).norm()
    }

    pub fn rel_dev(&self) -> f64 {
        let denom = self.pred.norm();
        if denom == 0.0 {
            f64::NAN
        } else {
            self.abs_dev() / denom
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_escape(&self.experiment_id),
            self.n,
            self.k,
            csv_escape(&self.params_json),
            self.seed,
            self.n_samples,
            fmt_f64(self.pred.re),
            fmt_f64(self.pred.im),
            fmt_f64(self.mean.re),
            fmt_f64(self.mean.im),
            fmt_f64(self.stderr),
            fmt_f64(self.abs_dev()),
            fmt_f64(self.rel_dev()),
            self.wall_ms
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "experiment_id": self.experiment_id,
            "N": self.n,
            "k": self.k,
            "params": serde_json::from_str::<serde_json::Value>(&self.params_json)
                .unwrap_or(serde_json::Value::String(self.params_json.clone())),
            "seed": self.seed,
            "n_samples": self.n_samples,
            "pred_re": self.pred.re,
            "pred_im": self.pred.im,
            "mean_re": self.mean.re,
            "mean_im": self.mean.im,
            "stderr": self.stderr,
            "abs_dev": self.abs_dev(),
            "rel_dev": self.rel_dev(),
            "wall_ms": self.wall_ms as u64,
        })
    }
}

/// Shortest round-trip f64 formatting so parsed values are bit-exact.
fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        let mut s = format!("{x}");
        if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("nan") {
            s.push_str(".0");
        }
        s
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// A run's collected output: records plus free-form summary lines.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub records: Vec<ExperimentRecord>,
    pub summary: Vec<String>,
}

impl RunOutput {
    pub fn push(&mut self, rec: ExperimentRecord) {
        self.records.push(rec);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.summary.push(line.into());
    }

    /// Writes CSV, JSON mirror, and plain-text summary under `out_dir`.
    /// The effective config and timestamp live in comment headers; the
    /// record body below the column header is deterministic.
    pub fn write_all(
        &self,
        out_dir: &str,
        name: &str,
        effective_config: &str,
        echo_format: &str,
    ) -> Result<(), CliError> {
        let dir = Path::new(out_dir);
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Io(format!("cannot create {out_dir}: {e}")))?;
        let stamp = now_utc_string();

        let csv_path = dir.join(format!("{name}.csv"));
        let mut csv = String::new();
        csv.push_str(&format!("# generated: {stamp}\n"));
        for line in effective_config.lines() {
            csv.push_str(&format!("# {line}\n"));
        }
        csv.push_str(CSV_HEADER);
        csv.push('\n');
        for rec in &self.records {
            csv.push_str(&rec.csv_row());
            csv.push('\n');
        }
        write_file(&csv_path, csv.as_bytes())?;

        let json_path = dir.join(format!("{name}.json"));
        let doc = json!({
            "generated": stamp,
            "config": effective_config,
            "records": self.records.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
            "summary": self.summary,
        });
        let mut body = serde_json::to_string_pretty(&doc)
            .map_err(|e| CliError::Io(format!("json encoding failed: {e}")))?;
        body.push('\n');
        write_file(&json_path, body.as_bytes())?;

        let txt_path = dir.join(format!("{name}.txt"));
        let mut txt = String::new();
        txt.push_str(&format!("run: {name}\ngenerated: {stamp}\nrecords: {}\n\n", self.records.len()));
        for line in &self.summary {
            txt.push_str(line);
            txt.push('\n');
        }
        write_file(&txt_path, txt.as_bytes())?;

        let echoed = match echo_format {
            "json" => json_path.display().to_string(),
            _ => csv_path.display().to_string(),
        };
        println!("wrote {echoed}");
        for line in &self.summary {
            println!("{line}");
        }
        Ok(())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    f.write_all(bytes)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn now_utc_string() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("unix:{secs}")
}

/// Strips comment headers, the column header, and the wall_ms column,
/// leaving the deterministic record body for byte comparisons.
pub fn csv_body_without_wall(csv_text: &str) -> String {
    let mut out = String::new();
    for line in csv_text.lines() {
        if line.starts_with('#') || line == CSV_HEADER {
            continue;
        }
        match split_csv_fields(line) {
            Some(fields) if fields.len() == 14 => {
                out.push_str(&fields[..13].join(","));
                out.push('\n');
            }
            _ => {
                out.push_str(line);
                out.push('\n');
            }
        }
    }
    out
}

fn split_csv_fields(line: &str) -> Option<Vec<String>> {
    let mut fields = Vec::new();
    let mut cur = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        if in_quotes {
            if c == '"' {
                if chars.peek() == Some(&'"') {
                    cur.push('"');
                    chars.next();
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push(c);
            }
        } else if c == '"' {
            in_quotes = true;
        } else if c == ',' {
            fields.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    if in_quotes {
        return None;
    }
    fields.push(cur);
    Some(fields)
}
