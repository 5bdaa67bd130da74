//! Key/value reports with attached tables, rendered for people or for
//! machines.
//!
//! The machine format is one `key=value` per line, followed by each table as
//! `table=NAME columns=A,B,... rows=N`, its rows, and `end=NAME`. Reals are
//! printed with 15 significant digits, so equal inputs give equal bytes.

use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Clone, Debug)]
pub enum Value {
    Real(f64),
    Int(usize),
    Bool(bool),
    /// A check outcome, shown as PASS or FAIL to people.
    Verdict(bool),
    Text(String),
}

impl Value {
    fn render(&self, format: Format) -> String {
        match (self, format) {
            (Self::Real(v), Format::Machine) => format!("{v:.14e}"),
            (Self::Real(v), Format::Human) => format!("{v:.6e}"),
            (Self::Int(v), _) => v.to_string(),
            (Self::Bool(v), _) | (Self::Verdict(v), Format::Machine) => v.to_string(),
            (Self::Verdict(v), Format::Human) => if *v { "PASS" } else { "FAIL" }.into(),
            (Self::Text(s), Format::Machine) => s.replace('\n', " "),
            (Self::Text(s), Format::Human) => s.clone(),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Self::Real(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Self::Int(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Self::Text(v.into())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

#[derive(Debug)]
pub struct Table {
    name: String,
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
    /// Long sample tables are left out of human output.
    detail: bool,
}

impl Table {
    pub fn row(&mut self, cells: Vec<Value>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

#[derive(Debug, Default)]
pub struct Report {
    title: String,
    entries: Vec<(String, Value)>,
    tables: Vec<Table>,
}

impl Report {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            ..Self::default()
        }
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Into<Value>) {
        self.entries.push((key.into(), value.into()));
    }

    pub fn table(&mut self, name: &str, columns: &[&'static str], detail: bool) -> &mut Table {
        self.tables.push(Table {
            name: name.into(),
            columns: columns.to_vec(),
            rows: Vec::new(),
            detail,
        });
        self.tables.last_mut().unwrap()
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Machine => self.machine(),
            Format::Human => self.human(),
        }
    }

    fn machine(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "{k}={}", v.render(Format::Machine)).unwrap();
        }
        for t in &self.tables {
            writeln!(
                out,
                "table={} columns={} rows={}",
                t.name,
                t.columns.join(","),
                t.rows.len()
            )
            .unwrap();
            for r in &t.rows {
                let cells: Vec<String> = r.iter().map(|c| c.render(Format::Machine)).collect();
                writeln!(out, "{}", cells.join(" ")).unwrap();
            }
            writeln!(out, "end={}", t.name).unwrap();
        }
        out
    }

    fn human(&self) -> String {
        let mut out = format!("{}\n", self.title);
        let width = self.entries.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        for (k, v) in &self.entries {
            writeln!(out, "  {k:<width$}  {}", v.render(Format::Human)).unwrap();
        }
        for t in &self.tables {
            if t.detail {
                writeln!(out, "\n{}: {} rows (shown with --format machine)", t.name, t.rows.len()).unwrap();
                continue;
            }
            writeln!(out, "\n{}:", t.name).unwrap();
            if t.rows.is_empty() {
                writeln!(out, "  (none)").unwrap();
                continue;
            }
            let cells: Vec<Vec<String>> = t
                .rows
                .iter()
                .map(|r| r.iter().map(|c| c.render(Format::Human)).collect())
                .collect();
            let widths: Vec<usize> = (0..t.columns.len())
                .map(|j| {
                    cells
                        .iter()
                        .map(|r| r[j].len())
                        .chain([t.columns[j].len()])
                        .max()
                        .unwrap()
                })
                .collect();
            let line = |row: Vec<&str>| {
                let padded: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
                format!("  {}\n", padded.join("  "))
            };
            out.push_str(&line(t.columns.clone()));
            for r in &cells {
                out.push_str(&line(r.iter().map(String::as_str).collect()));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_format_is_fixed() {
        let mut r = Report::new("t");
        r.put("sup", 1.0 / 3.0);
        r.put("pass", Value::Verdict(false));
        r.table("pieces", &["lo", "n"], true).row(vec![0.25.into(), 3usize.into()]);
        assert_eq!(
            r.render(Format::Machine),
            "sup=3.33333333333333e-1\npass=false\ntable=pieces columns=lo,n rows=1\n2.50000000000000e-1 3\nend=pieces\n"
        );
        let human = r.render(Format::Human);
        assert!(human.contains("FAIL") && human.contains("pieces: 1 rows"));
    }
}
