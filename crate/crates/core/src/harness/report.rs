//! Check records and run reports: machine-parseable, human-readable, and
//! byte-reproducible in the body (timing lives in a trailer so reports from
//! different thread counts compare equal).

use serde::{Deserialize, Serialize};

/// Report format tag; bump on any layout change.
pub const REPORT_FORMAT: &str = "ergolab-report/1";

/// How a recorded value relates to its bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckKind {
    /// value ≤ bound
    Upper { bound: f64 },
    /// value ≥ bound
    Lower { bound: f64 },
    /// lo ≤ value ≤ hi
    Within { lo: f64, hi: f64 },
}

impl CheckKind {
    pub fn passes(&self, value: f64) -> bool {
        if !value.is_finite() {
            return false;
        }
        match *self {
            CheckKind::Upper { bound } => value <= bound,
            CheckKind::Lower { bound } => value >= bound,
            CheckKind::Within { lo, hi } => (lo..=hi).contains(&value),
        }
    }

    fn describe(&self) -> String {
        match *self {
            CheckKind::Upper { bound } => format!("<= {bound:.6e}"),
            CheckKind::Lower { bound } => format!(">= {bound:.6e}"),
            CheckKind::Within { lo, hi } => format!("in [{lo:.4}, {hi:.4}]"),
        }
    }
}

/// One named check: the measured value, its bound, and the verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    #[serde(flatten)]
    pub kind: CheckKind,
    pub pass: bool,
    pub note: String,
}

impl CheckRecord {
    pub fn upper(name: impl Into<String>, value: f64, bound: f64, note: impl Into<String>) -> Self {
        let kind = CheckKind::Upper { bound };
        Self {
            name: name.into(),
            value,
            kind,
            pass: kind.passes(value),
            note: note.into(),
        }
    }

    pub fn lower(name: impl Into<String>, value: f64, bound: f64, note: impl Into<String>) -> Self {
        let kind = CheckKind::Lower { bound };
        Self {
            name: name.into(),
            value,
            kind,
            pass: kind.passes(value),
            note: note.into(),
        }
    }

    pub fn within(
        name: impl Into<String>,
        value: f64,
        lo: f64,
        hi: f64,
        note: impl Into<String>,
    ) -> Self {
        let kind = CheckKind::Within { lo, hi };
        Self {
            name: name.into(),
            value,
            kind,
            pass: kind.passes(value),
            note: note.into(),
        }
    }

    /// Recompute the verdict from the stored value and bound (used when
    /// re-rendering a report from raw data).
    pub fn reevaluated(&self) -> Self {
        let mut r = self.clone();
        r.pass = r.kind.passes(r.value);
        r
    }
}

/// Raw persisted payload of one run: everything needed to re-render the
/// report, nothing volatile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawRun {
    pub format: String,
    pub suite: String,
    pub master_seed: u64,
    pub config_echo: String,
    pub records: Vec<CheckRecord>,
}

/// A finished run: raw payload plus timing trailer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    #[serde(flatten)]
    pub raw: RawRun,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn new(suite: &str, master_seed: u64, config_echo: String, records: Vec<CheckRecord>) -> Self {
        Self {
            raw: RawRun {
                format: REPORT_FORMAT.into(),
                suite: suite.into(),
                master_seed,
                config_echo,
                records,
            },
            elapsed_seconds: 0.0,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.raw.records.iter().all(|r| r.pass)
    }

    pub fn failed_count(&self) -> usize {
        self.raw.records.iter().filter(|r| !r.pass).count()
    }

    /// The deterministic body: identical bytes for identical (config,
    /// seed) regardless of thread count.
    pub fn body_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{}\n", self.raw.format));
        out.push_str(&format!("suite: {}\n", self.raw.suite));
        out.push_str(&format!("master_seed: {}\n", self.raw.master_seed));
        out.push_str("\n[config]\n");
        for line in self.raw.config_echo.trim_end().lines() {
            out.push_str(&format!("  {line}\n"));
        }
        out.push_str("\n[checks]\n");
        let name_width = self
            .raw
            .records
            .iter()
            .map(|r| r.name.len())
            .max()
            .unwrap_or(4)
            .max(4);
        out.push_str(&format!(
            "  {:<name_width$}  {:>13}  {:>22}  {:>4}  note\n",
            "name", "value", "bound", "pass"
        ));
        for r in &self.raw.records {
            out.push_str(&format!(
                "  {:<name_width$}  {:>13.6e}  {:>22}  {:>4}  {}\n",
                r.name,
                r.value,
                r.kind.describe(),
                if r.pass { "ok" } else { "FAIL" },
                r.note
            ));
        }
        out.push_str(&format!(
            "\nchecks: {} total, {} failed\n",
            self.raw.records.len(),
            self.failed_count()
        ));
        out
    }

    /// Body plus the volatile trailer.
    pub fn render_text(&self) -> String {
        format!(
            "{}\n[trailer]\n  elapsed_seconds: {:.3}\n",
            self.body_text(),
            self.elapsed_seconds
        )
    }
}

/// Write a scalar series as CSV (header + rows).
pub fn write_csv(
    path: &std::path::Path,
    header: &[&str],
    rows: &[Vec<f64>],
) -> crate::error::Result<()> {
    use std::io::Write;
    let mut f = std::fs::File::create(path)?;
    writeln!(f, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.17e}")).collect();
        writeln!(f, "{}", cells.join(","))?;
    }
    Ok(())
}
