//! Report tables: full precision in CSV, three decimals on display.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    Int(u64),
    Num(f64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as u64)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl Cell {
    fn machine(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Int(x) => x.to_string(),
            Cell::Num(x) => x.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn display(&self) -> String {
        match self {
            Cell::Num(x) => format!("{x:.3}"),
            Cell::Empty => "-".into(),
            other => other.machine(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub title: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(title: &str, headers: &[&str]) -> Self {
        Self { title: title.into(), headers: headers.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::machine)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    /// Left-aligned text columns, right-aligned numbers.
    pub fn to_display(&self) -> String {
        let cells: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::display).collect()).collect();
        let mut width: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
        for r in &cells {
            for (w, c) in width.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        if !self.title.is_empty() {
            writeln!(out, "{}", self.title).unwrap();
        }
        let header: Vec<String> = self.headers.iter().zip(&width).map(|(h, w)| format!("{h:<w$}")).collect();
        writeln!(out, "{}", header.join("  ").trim_end()).unwrap();
        for (r, raw) in cells.iter().zip(&self.rows) {
            let line: Vec<String> = r
                .iter()
                .zip(raw)
                .zip(&width)
                .map(|((c, cell), w)| match cell {
                    Cell::Num(_) | Cell::Int(_) => format!("{c:>w$}"),
                    _ => format!("{c:<w$}"),
                })
                .collect();
            writeln!(out, "{}", line.join("  ").trim_end()).unwrap();
        }
        out
    }
}

/// Square display of a symmetric statistic keyed by name pairs.
pub fn square(title: &str, names: &[String], value: impl Fn(usize, usize) -> Option<f64>) -> Table {
    let mut headers = vec![""];
    headers.extend(names.iter().map(String::as_str));
    let mut t = Table::new(title, &headers);
    for (i, a) in names.iter().enumerate() {
        let mut row = vec![Cell::from(a.as_str())];
        row.extend((0..names.len()).map(|j| value(i, j).map_or(Cell::Empty, Cell::Num)));
        t.push(row);
    }
    t
}
