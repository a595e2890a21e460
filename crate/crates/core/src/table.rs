//! Sampled one-dimensional tables with piecewise-linear interpolation.

use crate::error::{Error, Result};

/// A strictly ascending abscissa with one ordinate per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::validation(
                "table",
                format!("{} abscissae but {} ordinates", xs.len(), ys.len()),
            ));
        }
        if xs.len() < 2 {
            return Err(Error::validation("table", "at least two samples are required"));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::validation("table", "non-finite sample"));
        }
        if let Some(w) = xs.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::validation(
                "table",
                format!("abscissa not strictly ascending at {} -> {}", w[0], w[1]),
            ));
        }
        Ok(Table { xs, ys })
    }

    /// Builds a table from samples given in any order of the abscissa.
    pub fn from_unsorted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (xs, ys) = pairs.into_iter().unzip();
        Table::new(xs, ys)
    }

    /// Parses a two-column CSV: an optional header line, `#` comments, one
    /// `x,y` record per line.
    pub fn parse_csv(text: &str, context: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(text.as_bytes());
        let mut pairs = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(context, e.to_string()))?;
            let line = record.position().map(|p| p.line()).unwrap_or(idx as u64 + 1);
            if record.iter().all(|f| f.is_empty()) {
                continue;
            }
            if record.len() != 2 {
                return Err(Error::parse(
                    context,
                    format!("line {line}: expected 2 columns, found {}", record.len()),
                ));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => pairs.push((x, y)),
                _ if pairs.is_empty() && idx == 0 => continue, // header
                _ => {
                    return Err(Error::parse(
                        context,
                        format!("line {line}: non-numeric record `{},{}`", &record[0], &record[1]),
                    ))
                }
            }
        }
        Table::new(
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
        .map_err(|e| Error::parse(context, e.to_string()))
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        if !(x >= self.x_min() && x <= self.x_max()) {
            return None;
        }
        let hi = self.xs.partition_point(|&v| v < x);
        if self.xs[hi] == x {
            return Some(self.ys[hi]);
        }
        let lo = hi - 1;
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        Some(self.ys[lo] + t * (self.ys[hi] - self.ys[lo]))
    }

    /// Applies `f` to every sample, producing a new table.
    pub fn map(&self, fx: impl Fn(f64) -> f64, fy: impl Fn(f64) -> f64) -> Result<Self> {
        Table::from_unsorted(self.xs.iter().zip(&self.ys).map(|(&x, &y)| (fx(x), fy(y))).collect())
    }

    pub fn to_csv(&self, header: (&str, &str)) -> String {
        let mut out = format!("{},{}\n", header.0, header.1);
        for (x, y) in self.xs.iter().zip(&self.ys) {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}
