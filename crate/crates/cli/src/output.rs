use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::args::Format;

/// Rows of named string fields, rendered in one of the output layouts.
#[derive(Debug, Clone, Default)]
pub struct Report {
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Report {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, fields: Vec<String>) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.rows.push(fields);
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        match format {
            Format::Lines => {
                for r in &self.rows {
                    let _ = writeln!(out, "{}", r.join(" "));
                }
            }
            Format::Table => {
                let widths: Vec<usize> = (0..self.columns.len())
                    .map(|i| {
                        self.rows
                            .iter()
                            .map(|r| r[i].chars().count())
                            .chain([self.columns[i].len()])
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                let line = |cells: Vec<&str>| {
                    cells
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| format!("{c:<w$}"))
                        .collect::<Vec<_>>()
                        .join("  ")
                        .trim_end()
                        .to_string()
                };
                let _ = writeln!(out, "{}", line(self.columns.clone()));
                let _ = writeln!(out, "{}", line(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
                for r in &self.rows {
                    let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
                }
            }
            Format::JsonLines => {
                for r in &self.rows {
                    let obj: Map<String, Value> = self
                        .columns
                        .iter()
                        .zip(r)
                        .map(|(k, v)| (k.to_string(), Value::String(v.clone())))
                        .collect();
                    let _ = writeln!(out, "{}", Value::Object(obj));
                }
            }
        }
        out
    }
}
