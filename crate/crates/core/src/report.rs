//! Machine-readable reports, bundled reference tables and row-by-row comparison.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub title: String,
    /// Resolved configuration (TOML), written into the header.
    pub config: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// Human-readable lines (dimensions, pruning, timings); not part of the TSV.
    pub summary: Vec<String>,
}

impl Report {
    pub fn new(title: &str, config: String, columns: &[&str]) -> Self {
        Self {
            title: title.to_string(),
            config,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn push(&mut self, key: impl Into<String>, values: Vec<f64>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(Row { key: key.into(), values });
    }

    pub fn value(&self, key: &str, column: &str) -> Option<f64> {
        let c = self.columns.iter().position(|x| x == column)?;
        self.rows.iter().find(|r| r.key == key).map(|r| r.values[c])
    }

    /// Tab-separated text; deterministic for a given configuration.
    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# title: {}", self.title).unwrap();
        for line in self.config.lines() {
            writeln!(s, "#cfg {line}").unwrap();
        }
        writeln!(s, "key\t{}", self.columns.join("\t")).unwrap();
        for r in &self.rows {
            let vals: Vec<String> = r.values.iter().map(|v| format!("{v:.13e}")).collect();
            writeln!(s, "{}\t{}", r.key, vals.join("\t")).unwrap();
        }
        s
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut title = String::new();
        let mut config = String::new();
        let mut columns: Option<Vec<String>> = None;
        let mut rows = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            if let Some(t) = line.strip_prefix("# title: ") {
                title = t.to_string();
            } else if let Some(c) = line.strip_prefix("#cfg ") {
                config.push_str(c);
                config.push('\n');
            } else if line.starts_with('#') || line.trim().is_empty() {
            } else if columns.is_none() {
                let mut it = line.split('\t');
                if it.next() != Some("key") {
                    return Err(Error::Parse(format!("line {}: expected a header starting with 'key'", ln + 1)));
                }
                columns = Some(it.map(str::to_string).collect());
            } else {
                let mut it = line.split('\t');
                let key = it.next().unwrap_or_default().to_string();
                let values = it
                    .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", ln + 1))))
                    .collect::<Result<Vec<_>>>()?;
                if values.len() != columns.as_ref().unwrap().len() {
                    return Err(Error::Parse(format!("line {}: wrong number of columns", ln + 1)));
                }
                rows.push(Row { key, values });
            }
        }
        let columns = columns.ok_or_else(|| Error::Parse("report has no header".into()))?;
        Ok(Self { title, config, columns, rows, summary: Vec::new() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tolerance {
    /// |a − e| ≤ tol
    Abs,
    /// |a − e| ≤ tol·|e|
    Rel,
    /// ||a| − |e|| ≤ tol
    Magnitude,
    /// |a − e| ≥ tol: the value must visibly miss.
    Miss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Matching {
    Key,
    /// Row whose `energy` is nearest the entry's expected energy (resonance lists).
    NearestEnergy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceEntry {
    pub table: String,
    pub part: String,
    pub key: String,
    pub column: String,
    pub expected: f64,
    pub tolerance: f64,
    pub kind: Tolerance,
    pub matching: Matching,
    pub note: String,
}

const TABLES: &[(&str, &str)] = &[
    ("table1", include_str!("../data/reference/table1.tsv")),
    ("table2", include_str!("../data/reference/table2.tsv")),
    ("table3", include_str!("../data/reference/table3.tsv")),
    ("table4", include_str!("../data/reference/table4.tsv")),
    ("table5", include_str!("../data/reference/table5.tsv")),
    ("table6", include_str!("../data/reference/table6.tsv")),
    ("table7", include_str!("../data/reference/table7.tsv")),
];

pub fn parse_reference(table: &str, text: &str) -> Result<Vec<ReferenceEntry>> {
    let mut out = Vec::new();
    let mut header_seen = false;
    for (ln, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 8 {
            return Err(Error::Parse(format!("{table} line {}: expected 8 fields", ln + 1)));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{table} line {}: {e}", ln + 1)));
        let kind = match f[5] {
            "abs" => Tolerance::Abs,
            "rel" => Tolerance::Rel,
            "mag" => Tolerance::Magnitude,
            "miss" => Tolerance::Miss,
            k => return Err(Error::Parse(format!("{table} line {}: tolerance kind {k}", ln + 1))),
        };
        let matching = match f[6] {
            "key" => Matching::Key,
            "nearest" => Matching::NearestEnergy,
            m => return Err(Error::Parse(format!("{table} line {}: matching {m}", ln + 1))),
        };
        out.push(ReferenceEntry {
            table: table.to_string(),
            part: f[0].to_string(),
            key: f[1].to_string(),
            column: f[2].to_string(),
            expected: num(f[3])?,
            tolerance: num(f[4])?,
            kind,
            matching,
            note: f[7].to_string(),
        });
    }
    Ok(out)
}

/// Bundled entries for `table` or `table-part` (e.g. "table4-S").
pub fn reference_table(id: &str) -> Result<Vec<ReferenceEntry>> {
    let (name, part) = match id.split_once('-') {
        Some((n, p)) => (n, Some(p)),
        None => (id, None),
    };
    let (_, text) = TABLES
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Config(format!("unknown reference table '{id}'")))?;
    let all = parse_reference(name, text)?;
    let sel: Vec<ReferenceEntry> = all.into_iter().filter(|e| part.is_none_or(|p| e.part == p)).collect();
    if sel.is_empty() {
        return Err(Error::Config(format!("unknown reference table '{id}'")));
    }
    Ok(sel)
}

pub fn reference_ids() -> Vec<String> {
    let mut ids = Vec::new();
    for (name, text) in TABLES {
        ids.push(name.to_string());
        let mut parts: Vec<String> = parse_reference(name, text)
            .map(|v| v.into_iter().map(|e| e.part).filter(|p| p != "-").collect())
            .unwrap_or_default();
        parts.dedup();
        ids.extend(parts.into_iter().map(|p| format!("{name}-{p}")));
    }
    ids
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub entry: ReferenceEntry,
    /// Matched report row and value, if any.
    pub row: Option<String>,
    pub actual: Option<f64>,
    /// actual − expected (signed)
    pub deviation: f64,
    pub pass: bool,
}

fn check(kind: Tolerance, a: f64, e: f64, tol: f64) -> bool {
    match kind {
        Tolerance::Abs => (a - e).abs() <= tol,
        Tolerance::Rel => (a - e).abs() <= tol * e.abs(),
        Tolerance::Magnitude => (a.abs() - e.abs()).abs() <= tol,
        Tolerance::Miss => (a - e).abs() >= tol,
    }
}

pub fn compare_entries(report: &Report, entries: &[ReferenceEntry]) -> Vec<Comparison> {
    let energy_col = report.columns.iter().position(|c| c == "energy");
    entries
        .iter()
        .map(|e| {
            let row = match e.matching {
                Matching::Key => report.rows.iter().find(|r| r.key == e.key),
                Matching::NearestEnergy => {
                    let target = entries
                        .iter()
                        .find(|x| x.key == e.key && x.column == "energy")
                        .map(|x| x.expected);
                    match (target, energy_col) {
                        (Some(t), Some(c)) => {
                            report.rows.iter().min_by(|a, b| (a.values[c] - t).abs().total_cmp(&(b.values[c] - t).abs()))
                        }
                        _ => None,
                    }
                }
            };
            let col = report.columns.iter().position(|c| *c == e.column);
            match (row, col) {
                (Some(r), Some(c)) => {
                    let a = r.values[c];
                    Comparison {
                        entry: e.clone(),
                        row: Some(r.key.clone()),
                        actual: Some(a),
                        deviation: a - e.expected,
                        pass: check(e.kind, a, e.expected, e.tolerance),
                    }
                }
                _ => Comparison { entry: e.clone(), row: None, actual: None, deviation: f64::NAN, pass: false },
            }
        })
        .collect()
}

pub fn compare(report: &Report, table_id: &str) -> Result<Vec<Comparison>> {
    Ok(compare_entries(report, &reference_table(table_id)?))
}

pub fn comparison_table(cmp: &[Comparison]) -> String {
    let mut s = String::from("table\tpart\tkey\tcolumn\texpected\tactual\tdeviation\ttolerance\tresult\n");
    for c in cmp {
        let e = &c.entry;
        writeln!(
            s,
            "{}\t{}\t{}\t{}\t{:.10e}\t{}\t{:+.3e}\t{:.1e}\t{}",
            e.table,
            e.part,
            c.row.as_deref().unwrap_or(&e.key),
            e.column,
            e.expected,
            c.actual.map(|a| format!("{a:.10e}")).unwrap_or_else(|| "missing".into()),
            c.deviation,
            e.tolerance,
            if c.pass { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    s
}
