//! Rendering of command results as JSON, CSV or aligned tables.

use rootfrac::realnum::Ball;
use serde::Serialize;

use crate::args::Format;

/// Exit codes.
pub const OK: u8 = 0;
pub const UNDECIDED: u8 = 1;
pub const INPUT: u8 = 2;
pub const DISAGREEMENT: u8 = 3;
pub const VERIFICATION_FAILED: u8 = 4;

/// A command result in all three renderings.
pub struct Output {
    pub json: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub code: u8,
    pub default_format: Format,
}

impl Output {
    pub fn new<T: Serialize>(value: &T, default_format: Format) -> Self {
        Output {
            json: serde_json::to_string_pretty(value).expect("serializable"),
            headers: Vec::new(),
            rows: Vec::new(),
            code: OK,
            default_format,
        }
    }

    pub fn columns(mut self, headers: &[&str]) -> Self {
        self.headers = headers.iter().map(|h| h.to_string()).collect();
        self
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    pub fn code(mut self, code: u8) -> Self {
        self.code = code;
        self
    }

    pub fn render(&self, format: Option<Format>) -> String {
        match format.unwrap_or(self.default_format) {
            Format::Json => format!("{}\n", self.json),
            Format::Csv => self.csv(),
            Format::Table => self.table(),
        }
    }

    fn csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    fn table(&self) -> String {
        let n = self.headers.len();
        let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (i, c) in r.iter().enumerate().take(n) {
                widths[i] = widths[i].max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let parts: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            format!("{}\n", parts.join("  ").trim_end())
        };
        let mut s = line(&self.headers);
        s.push_str(&line(&widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>()));
        for r in &self.rows {
            s.push_str(&line(r));
        }
        s
    }
}

/// Midpoint to 12 significant digits and the half-width.
pub fn ball_cells(b: &Ball) -> [String; 2] {
    [b.mid().to_sci_string(12), b.width().shl(-1).to_sci_string(2)]
}

pub fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or(String::new(), |v| v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_three_ways() {
        let mut o = Output::new(&vec![1, 2], Format::Json).columns(&["a", "bb"]);
        o.row(vec!["1".into(), "x,y".into()]);
        assert_eq!(o.render(None), "[\n  1,\n  2\n]\n");
        assert_eq!(o.render(Some(Format::Csv)), "a,bb\n1,\"x,y\"\n");
        assert_eq!(o.render(Some(Format::Table)), "a  bb\n-  ---\n1  x,y\n");
    }
}
