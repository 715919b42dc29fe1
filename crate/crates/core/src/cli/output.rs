//! CSV, plot data and SVG emission, plus the CSV reader used for round trips.

use std::fmt::Write as _;
use std::path::Path;

use crate::integrator::Sample;

/// Header of every time-series CSV.
pub const TIME_SERIES_COLUMNS: [&str; 9] = ["t", "re_a1", "im_a1", "re_a2", "im_a2", "p1", "p2", "norm2", "p_emit"];

/// Twelve significant digits.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{x:.11e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_num(*x),
            Cell::Int(n) => n.to_string(),
        }
    }
}

/// In-memory table rendered to CSV in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table { header: header.iter().map(|h| h.as_ref().to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }

    /// `x y` pairs from two columns, for external plotters.
    pub fn two_column(&self, x: usize, y: usize) -> String {
        let mut out = format!("# {} {}\n", self.header[x], self.header[y]);
        for row in &self.rows {
            let _ = writeln!(out, "{} {}", row[x].render(), row[y].render());
        }
        out
    }

    pub fn column(&self, idx: usize) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match r[idx] {
                Cell::Num(x) => x,
                Cell::Int(n) => n as f64,
            })
            .collect()
    }
}

pub fn time_series_table(samples: &[Sample]) -> Table {
    let mut table = Table::new(&TIME_SERIES_COLUMNS);
    for s in samples {
        let st = &s.state;
        table.push(
            [s.t, st.a1.re, st.a1.im, st.a2.re, st.a2.im, st.p1(), st.p2(), st.norm2(), st.p_emit]
                .into_iter()
                .map(Cell::Num)
                .collect(),
        );
    }
    table
}

/// Parsed CSV with numeric cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvData {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvData {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReadError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}: cannot parse `{value}` as a number")]
    Number { row: usize, value: String },
}

pub fn parse_csv(text: &str) -> Result<CsvData, ReadError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| ReadError::Number { row: i + 1, value: v.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(CsvData { header, rows })
}

pub fn read_csv(path: &Path) -> Result<CsvData, ReadError> {
    let text = std::fs::read_to_string(path).map_err(csv::Error::from)?;
    parse_csv(&text)
}

/// Minimal self-contained SVG line chart. Non-finite points are skipped.
pub fn svg_line_chart(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64], log_x: bool) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const M: f64 = 60.0;
    let tx = |x: f64| if log_x { x.log10() } else { x };
    let points: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| (tx(x), y))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &points {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let path: Vec<String> = points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let x_axis = if log_x { format!("log10 {x_label}") } else { x_label.to_string() };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="black" points="{M},{} {M},{} {},{}"/>"#,
        M,
        H - M,
        W - M,
        H - M
    );
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12">{x_axis}</text>"#, W / 2.0, H - 15.0);
    let _ = writeln!(svg, r#"<text x="15" y="{}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 15 {})">{y_label}</text>"#, H / 2.0, H / 2.0);
    for (value, y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(svg, r#"<text x="{}" y="{y:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#, M - 4.0, fmt_short(value));
    }
    for (value, x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#, H - M + 14.0, fmt_short(value));
    }
    let _ = writeln!(svg, r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#, path.join(" "));
    svg.push_str("</svg>\n");
    svg
}

fn fmt_short(x: f64) -> String {
    format!("{x:.4}")
}
