//! Rendering of reports as aligned tables, JSON lines or CSV.

use serde::Serialize;
use serde_json::Value;

use crate::config::Format;
use crate::harness::{
    Check, CountReport, DivisorReport, HeightRecord, HeightReport, SeriesReport, SweepReport,
};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Lines printed after the table (not part of CSV).
    pub footer: Vec<String>,
}

impl Table {
    fn new(headers: &[&str]) -> Table {
        Table {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            ..Table::default()
        }
    }

    fn key_values(pairs: Vec<(&str, String)>) -> Table {
        let mut t = Table::new(&["key", "value"]);
        t.rows = pairs
            .into_iter()
            .map(|(k, v)| vec![k.to_string(), v])
            .collect();
        t
    }

    pub fn render(&self) -> String {
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(&self.headers);
        out += &line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>());
        for row in &self.rows {
            out += &line(row);
        }
        for f in &self.footer {
            out += f;
            out.push('\n');
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }
}

pub trait Render {
    fn table(&self) -> Table;
    fn json(&self) -> Vec<Value>;

    fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.table().render(),
            Format::Csv => self.table().csv(),
            Format::Json => self.json().iter().map(|v| v.to_string() + "\n").collect(),
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12}")
}

impl Render for DivisorReport {
    fn table(&self) -> Table {
        let opt = |x: Option<String>| x.unwrap_or_else(|| "-".into());
        let mut pairs = vec![
            ("f", self.f.clone()),
            ("P", self.p.clone()),
            ("D(f,P)", self.divisor.clone()),
            ("hhat_f(P) = deg D", self.hhat.clone()),
            ("N", opt(self.n.map(|n| n.to_string()))),
            ("scale", opt(self.scale.map(|s| s.to_string()))),
            ("g", opt(self.g.clone())),
            ("certified", self.certified.to_string()),
        ];
        for e in &self.entries {
            let esc = e.escape_n.map_or("-".into(), |n| n.to_string());
            pairs.push(("escape level", format!("{} (at {})", esc, e.place)));
        }
        let mut t = Table::key_values(pairs);
        t.footer.extend(self.note.clone());
        t
    }

    fn json(&self) -> Vec<Value> {
        vec![to_value(self)]
    }
}

fn height_table(records: &[&HeightRecord]) -> Table {
    let mut t = Table::new(&["t", "hhat", "hD", "diff", "flags"]);
    t.rows = records
        .iter()
        .map(|r| {
            vec![
                r.t.clone(),
                fmt_f(r.hhat),
                fmt_f(r.h_d),
                fmt_f(r.diff),
                r.flags.join(";"),
            ]
        })
        .collect();
    t
}

impl Render for HeightReport {
    fn table(&self) -> Table {
        height_table(&self.records().collect::<Vec<_>>())
    }

    fn json(&self) -> Vec<Value> {
        self.records().map(to_value).collect()
    }
}

impl Render for SweepReport {
    fn table(&self) -> Table {
        let mut t = self.heights.table();
        let s = &self.summary;
        t.footer = vec![
            format!(
                "evaluated {} parameters of height <= log {}, skipped {}",
                s.evaluated, s.bound, s.skipped
            ),
            format!(
                "max |diff| = {} at t = {}",
                fmt_f(s.max_abs_diff),
                s.argmax.as_deref().unwrap_or("-")
            ),
            format!("uncertified records: {}", s.uncertified),
        ];
        t
    }

    fn json(&self) -> Vec<Value> {
        let mut out = self.heights.json();
        out.push(serde_json::json!({ "schema": self.summary.schema, "summary": to_value(&self.summary) }));
        out
    }
}

impl Render for SeriesReport {
    fn table(&self) -> Table {
        let mut t = Table::new(&["place", "c", "scale", "coefficients of F (w^1, w^2, ...)"]);
        t.rows = self
            .records
            .iter()
            .map(|r| {
                vec![
                    r.place.clone(),
                    r.c.clone().unwrap_or_else(|| "-".into()),
                    r.scale.map_or("-".into(), |s| s.to_string()),
                    match &r.error {
                        Some(e) => e.clone(),
                        None => r.coefficients.join(", "),
                    },
                ]
            })
            .collect();
        t
    }

    fn json(&self) -> Vec<Value> {
        self.records.iter().map(to_value).collect()
    }
}

impl Render for CountReport {
    fn table(&self) -> Table {
        let mut t = Table::key_values(vec![
            ("B", self.b.to_string()),
            ("N(B)", self.count.to_string()),
            ("log N / B", fmt_f(self.log_count_over_b)),
            ("box max(|a|,b) <=", self.box_bound.to_string()),
            ("slack", fmt_f(self.slack)),
            ("candidates", self.candidates.to_string()),
            ("skipped", self.skipped.to_string()),
            ("uncertified", self.uncertified.to_string()),
        ]);
        if self.partial {
            t.footer
                .push("partial result: enumeration box was capped".into());
        }
        t
    }

    fn json(&self) -> Vec<Value> {
        vec![to_value(self)]
    }
}

/// `verify` output.
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn failed(&self) -> bool {
        self.0.iter().any(|c| c.passed == Some(false))
    }
}

impl Render for Checks {
    fn table(&self) -> Table {
        let mut t = Table::new(&["check", "result", "detail"]);
        t.rows = self
            .0
            .iter()
            .map(|c| {
                let r = match c.passed {
                    Some(true) => "pass",
                    Some(false) => "FAIL",
                    None => "skip",
                };
                vec![c.name.clone(), r.into(), c.detail.clone()]
            })
            .collect();
        t
    }

    fn json(&self) -> Vec<Value> {
        self.0
            .iter()
            .map(|c| {
                let mut v = to_value(c);
                v["schema"] = 1.into();
                v
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment_and_csv_quoting() {
        let mut t = Table::new(&["a", "long header"]);
        t.rows.push(vec!["x, y".into(), "1".into()]);
        let text = t.render();
        assert_eq!(text.lines().next().unwrap(), "a     long header");
        assert_eq!(t.csv(), "a,long header\n\"x, y\",1\n");
    }
}
