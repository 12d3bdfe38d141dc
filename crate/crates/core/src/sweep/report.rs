use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "gsd,q,aperture,input_size,f1,count_error,precision,recall,map,ap_cow,ap_sheep,ap_dog";

/// One evaluated condition in the layout of the results tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub gsd: f64,
    pub q: f64,
    pub aperture: String,
    pub input_size: u32,
    pub f1: f64,
    pub count_error: f64,
    pub precision: f64,
    pub recall: f64,
    pub map: f64,
    pub ap_cow: Option<f64>,
    pub ap_sheep: Option<f64>,
    pub ap_dog: Option<f64>,
}

impl ResultRow {
    fn sort_key(&self, other: &Self) -> std::cmp::Ordering {
        self.gsd
            .total_cmp(&other.gsd)
            .then(self.q.total_cmp(&other.q))
            .then(self.aperture.cmp(&other.aperture))
            .then(self.input_size.cmp(&other.input_size))
    }

    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::F1 => Some(self.f1),
            Metric::CountError => Some(self.count_error),
            Metric::Precision => Some(self.precision),
            Metric::Recall => Some(self.recall),
            Metric::Map => Some(self.map),
            Metric::ApCow => self.ap_cow,
            Metric::ApSheep => self.ap_sheep,
            Metric::ApDog => self.ap_dog,
        }
    }
}

/// Sorts rows by gsd, q, aperture, input size.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| a.sort_key(b));
}

/// Plottable result columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    F1,
    CountError,
    Precision,
    Recall,
    Map,
    ApCow,
    ApSheep,
    ApDog,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::F1,
        Metric::CountError,
        Metric::Precision,
        Metric::Recall,
        Metric::Map,
        Metric::ApCow,
        Metric::ApSheep,
        Metric::ApDog,
    ];

    /// Column name in the results CSV.
    pub fn name(self) -> &'static str {
        match self {
            Metric::F1 => "f1",
            Metric::CountError => "count_error",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::Map => "map",
            Metric::ApCow => "ap_cow",
            Metric::ApSheep => "ap_sheep",
            Metric::ApDog => "ap_dog",
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
            Error::Usage(format!("unknown metric '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Six decimals with trailing zeros trimmed, keeping at least one decimal.
pub fn format_number(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

fn format_optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

pub fn emit_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let fields = [
            format_number(r.gsd),
            format_number(r.q),
            r.aperture.clone(),
            r.input_size.to_string(),
            format_number(r.f1),
            format_number(r.count_error),
            format_number(r.precision),
            format_number(r.recall),
            format_number(r.map),
            format_optional(r.ap_cow),
            format_optional(r.ap_sheep),
            format_optional(r.ap_dog),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header '{CSV_HEADER}'"),
            })
        }
    }
    lines
        .map(|(i, line)| {
            let line_no = i + 1;
            let err = |message: String| Error::Parse { line: line_no, message };
            let f: Vec<&str> = line.trim().split(',').collect();
            if f.len() != 12 {
                return Err(err(format!("expected 12 fields, found {}", f.len())));
            }
            let num = |k: usize| -> Result<f64> {
                f[k].parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("invalid number '{}'", f[k])))
            };
            let opt = |k: usize| -> Result<Option<f64>> {
                if f[k].is_empty() {
                    Ok(None)
                } else {
                    num(k).map(Some)
                }
            };
            Ok(ResultRow {
                gsd: num(0)?,
                q: num(1)?,
                aperture: f[2].to_string(),
                input_size: f[3].parse().map_err(|_| err(format!("invalid input size '{}'", f[3])))?,
                f1: num(4)?,
                count_error: num(5)?,
                precision: num(6)?,
                recall: num(7)?,
                map: num(8)?,
                ap_cow: opt(9)?,
                ap_sheep: opt(10)?,
                ap_dog: opt(11)?,
            })
        })
        .collect()
}

/// gnuplot data: one block of `gsd value` lines per (q, aperture, input
/// size), each under `#` header lines and separated by two blank lines so
/// blocks can be addressed with `index`.
pub fn emit_plot_data(rows: &[ResultRow], metric: Metric) -> Result<String> {
    if rows.is_empty() {
        return Err(Error::Validation("no result rows to plot".into()));
    }
    let mut sorted = rows.to_vec();
    sorted.sort_by(|a, b| {
        a.q.total_cmp(&b.q)
            .then(a.aperture.cmp(&b.aperture))
            .then(a.input_size.cmp(&b.input_size))
            .then(a.gsd.total_cmp(&b.gsd))
    });
    let mut out = String::new();
    let mut current: Option<(f64, &str, u32)> = None;
    for r in &sorted {
        let key = (r.q, r.aperture.as_str(), r.input_size);
        if current != Some(key) {
            if current.is_some() {
                out.push_str("\n\n");
            }
            let _ = writeln!(
                out,
                "# q={} aperture={} input_size={}",
                format_number(r.q),
                r.aperture,
                r.input_size
            );
            let _ = writeln!(out, "# gsd {}", metric.name());
            current = Some(key);
        }
        if let Some(v) = r.get(metric) {
            let _ = writeln!(out, "{} {}", format_number(r.gsd), format_number(v));
        }
    }
    Ok(out)
}

/// Fixed-width text table for terminals.
pub fn render_table(rows: &[ResultRow]) -> String {
    let header = [
        "GSD", "Q", "aperture", "input", "F1", "CE", "precision", "recall", "mAP", "AP cow", "AP sheep", "AP dog",
    ];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let opt = |v: Option<f64>| v.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into());
            vec![
                format!("{:.2}", r.gsd),
                format!("{:.1}", r.q),
                r.aperture.clone(),
                r.input_size.to_string(),
                format!("{:.2}", r.f1),
                format!("{:.3}", r.count_error),
                format!("{:.3}", r.precision),
                format!("{:.3}", r.recall),
                format!("{:.3}", r.map),
                opt(r.ap_cow),
                opt(r.ap_sheep),
                opt(r.ap_dog),
            ]
        })
        .collect();
    let widths: Vec<usize> = (0..header.len())
        .map(|c| cells.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |fields: Vec<&str>| -> String {
        let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for r in &cells {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}
