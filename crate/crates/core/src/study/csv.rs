//! Study tables as CSV: `# key: value` metadata lines, one header line and
//! one row per level with every float at 17 significant digits.

use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub const COLUMNS: [&str; 8] =
    ["level", "resolution", "strong", "weak_quad", "representation", "mc_estimate", "mc_stderr", "fitted"];

/// Bit of the `fitted` column set when the level entered the weak fit.
pub const FITTED_WEAK: u8 = 1;
/// Bit of the `fitted` column set when the level entered the strong fit.
pub const FITTED_STRONG: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyRow {
    pub level: usize,
    pub resolution: f64,
    pub strong: f64,
    pub weak_quad: f64,
    pub representation: f64,
    pub mc_estimate: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub fitted: u8,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

/// 17 significant digits, enough to recover every f64 exactly.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn optional(x: Option<f64>) -> String {
    x.map(format_float).unwrap_or_default()
}

pub fn to_csv_string(table: &StudyTable) -> String {
    let mut out = String::new();
    for (key, value) in &table.metadata {
        let _ = writeln!(out, "# {key}: {value}");
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in &table.rows {
        let fields = [
            r.level.to_string(),
            format_float(r.resolution),
            format_float(r.strong),
            format_float(r.weak_quad),
            format_float(r.representation),
            optional(r.mc_estimate),
            optional(r.mc_stderr),
            r.fitted.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_csv(table: &StudyTable, path: &Path) -> Result<()> {
    std::fs::write(path, to_csv_string(table))?;
    Ok(())
}

pub fn parse_csv(text: &str) -> Result<StudyTable> {
    let bad = |line: usize, msg: &str| Error::Config(format!("csv line {line}: {msg}"));
    let mut table = StudyTable::default();
    let mut header_seen = false;
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if let Some(meta) = line.strip_prefix("# ") {
            let (key, value) = meta.split_once(": ").ok_or_else(|| bad(n, "metadata needs `key: value`"))?;
            table.metadata.push((key.to_string(), value.to_string()));
            continue;
        }
        if !header_seen {
            if line != COLUMNS.join(",") {
                return Err(bad(n, "unexpected header"));
            }
            header_seen = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != COLUMNS.len() {
            return Err(bad(n, "wrong field count"));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|_| bad(n, "bad number"));
        let opt = |s: &str| if s.is_empty() { Ok(None) } else { float(s).map(Some) };
        table.rows.push(StudyRow {
            level: fields[0].parse().map_err(|_| bad(n, "bad level"))?,
            resolution: float(fields[1])?,
            strong: float(fields[2])?,
            weak_quad: float(fields[3])?,
            representation: float(fields[4])?,
            mc_estimate: opt(fields[5])?,
            mc_stderr: opt(fields[6])?,
            fitted: fields[7].parse().map_err(|_| bad(n, "bad fitted flags"))?,
        });
    }
    if !header_seen {
        return Err(bad(text.lines().count() + 1, "missing header"));
    }
    Ok(table)
}
