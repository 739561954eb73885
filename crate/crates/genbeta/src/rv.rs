//! Realized-volatility pipeline: daily close prices → log returns →
//! annualized realized volatility per window size → empirical ccdf curves
//! ready for fitting and log-log plotting.
//!
//! The annualized value over a window of n daily returns is
//!
//! ```text
//! RV = 100 · √( (252/n) · Σ r_i² )
//! ```
//!
//! with r_i = ln(S_i / S_{i−1}). Windows slide with stride 1 by default so
//! every window size keeps nearly the full observation count.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Window sizes (trading days) used by the standard report.
pub const DEFAULT_WINDOWS: [usize; 9] = [1, 2, 3, 5, 7, 9, 13, 17, 21];

/// Calendar date with ordering; only ordering and display are needed here.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CalDate {
    pub year: u16,
    pub month: u8,
    pub day: u8,
}

impl CalDate {
    /// Parses an ISO-8601 calendar date (YYYY-MM-DD).
    pub fn parse(s: &str) -> Result<CalDate> {
        let parts: Vec<&str> = s.trim().split('-').collect();
        if parts.len() != 3 {
            return Err(Error::parse(format!("invalid date: {s}")));
        }
        let year: u16 = parts[0]
            .parse()
            .map_err(|_| Error::parse(format!("invalid year in date: {s}")))?;
        let month: u8 = parts[1]
            .parse()
            .map_err(|_| Error::parse(format!("invalid month in date: {s}")))?;
        let day: u8 = parts[2]
            .parse()
            .map_err(|_| Error::parse(format!("invalid day in date: {s}")))?;
        if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
            return Err(Error::parse(format!("calendar field out of range: {s}")));
        }
        Ok(CalDate { year, month, day })
    }
}

impl std::fmt::Display for CalDate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:04}-{:02}-{:02}", self.year, self.month, self.day)
    }
}

/// Ordered daily closing prices.
#[derive(Debug, Clone)]
pub struct PriceSeries {
    pub dates: Vec<CalDate>,
    pub closes: Vec<f64>,
    /// FNV-1a digest of the source bytes, for report provenance.
    pub source_digest: String,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

impl PriceSeries {
    /// Reads two comma-separated columns (ISO-8601 date, close price) with an
    /// optional header line. Rows with an unparseable price are rejected with
    /// their line number; dates must strictly increase and prices must be
    /// positive.
    pub fn from_csv_str(text: &str) -> Result<PriceSeries> {
        let digest = format!("{:016x}", fnv1a(text.as_bytes()));
        let mut dates = Vec::new();
        let mut closes = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut cols = trimmed.split(',');
            let (date_col, price_col) = match (cols.next(), cols.next()) {
                (Some(d), Some(p)) => (d, p),
                _ => {
                    return Err(Error::parse(format!(
                        "line {line_no}: expected two comma-separated columns"
                    )))
                }
            };
            let parsed_price = price_col.trim().parse::<f64>();
            let parsed_date = CalDate::parse(date_col);
            if idx == 0 && (parsed_price.is_err() || parsed_date.is_err()) {
                // Optional header.
                continue;
            }
            let date = parsed_date?;
            let price = parsed_price
                .map_err(|_| Error::parse(format!("line {line_no}: unparseable price {price_col:?}")))?;
            if !(price > 0.0) || !price.is_finite() {
                return Err(Error::parse(format!(
                    "line {line_no}: price must be positive, got {price}"
                )));
            }
            if let Some(last) = dates.last() {
                if *last >= date {
                    return Err(Error::parse(format!(
                        "line {line_no}: dates must strictly increase ({last} then {date})"
                    )));
                }
            }
            dates.push(date);
            closes.push(price);
        }
        if closes.is_empty() {
            return Err(Error::parse("no price rows found"));
        }
        Ok(PriceSeries {
            dates,
            closes,
            source_digest: digest,
        })
    }

    pub fn from_csv_path(path: &Path) -> Result<PriceSeries> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    /// Daily log returns r_i = ln(S_i / S_{i−1}); length = count − 1.
    pub fn log_returns(&self) -> Result<Vec<f64>> {
        if self.closes.len() < 2 {
            return Err(Error::domain(
                "log_returns requires at least two prices".to_string(),
            ));
        }
        Ok(self
            .closes
            .windows(2)
            .map(|w| (w[1] / w[0]).ln())
            .collect())
    }
}

/// Annualization and windowing settings. The defaults produce the
/// percent-annualized convention (factor 100, 252 trading days, stride 1);
/// setting `annual_days` and `scale` to 1 reduces RV to the plain
/// root-mean-square return.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RvSettings {
    pub annual_days: f64,
    pub scale: f64,
    pub stride: usize,
}

impl Default for RvSettings {
    fn default() -> Self {
        RvSettings {
            annual_days: 252.0,
            scale: 100.0,
            stride: 1,
        }
    }
}

/// Realized-volatility observations for one window size.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RvDataset {
    /// Window length in trading days.
    pub n: usize,
    /// Annualized observations, all positive.
    pub values: Vec<f64>,
    pub count: usize,
    /// All-zero windows excluded from `values` (the family members live on
    /// x > 0).
    pub zeros_excluded: usize,
}

/// Sliding-window realized volatility with default settings.
pub fn realized_volatility(returns: &[f64], n: usize) -> Result<RvDataset> {
    realized_volatility_with(returns, n, &RvSettings::default())
}

/// Sliding-window realized volatility: RV = scale·√(annual_days/n · Σ r²)
/// over windows of length n advanced by `stride`.
pub fn realized_volatility_with(
    returns: &[f64],
    n: usize,
    settings: &RvSettings,
) -> Result<RvDataset> {
    if n < 1 {
        return Err(Error::domain("window length must be >= 1"));
    }
    if settings.stride < 1 {
        return Err(Error::domain("stride must be >= 1"));
    }
    if returns.len() < n {
        return Err(Error::domain(format!(
            "window of {n} returns does not fit a series of length {}",
            returns.len()
        )));
    }
    let factor = settings.annual_days / n as f64;
    let mut values = Vec::with_capacity((returns.len() - n) / settings.stride + 1);
    let mut zeros = 0usize;
    let mut start = 0usize;
    while start + n <= returns.len() {
        let ss: f64 = returns[start..start + n].iter().map(|r| r * r).sum();
        let rv = settings.scale * (factor * ss).sqrt();
        if rv > 0.0 {
            values.push(rv);
        } else {
            zeros += 1;
        }
        start += settings.stride;
    }
    Ok(RvDataset {
        n,
        count: values.len(),
        values,
        zeros_excluded: zeros,
    })
}

/// Empirical complementary CDF over the sorted unique values:
/// ccdf(x_k) = #{values > x_k}/count, except that the last point carries
/// 1/count instead of 0 so log-log plots stay finite.
pub fn empirical_ccdf(dataset: &RvDataset) -> Vec<(f64, f64)> {
    if dataset.values.is_empty() {
        return Vec::new();
    }
    let mut sorted = dataset.values.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let count = sorted.len() as f64;
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut i = 0usize;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let above = (sorted.len() - j) as f64;
        let ccdf = if above > 0.0 { above / count } else { 1.0 / count };
        out.push((x, ccdf));
        i = j;
    }
    out
}

/// Realized-volatility datasets for every requested window size.
pub fn build_all(series: &PriceSeries, windows: &[usize]) -> Result<Vec<RvDataset>> {
    build_all_with(series, windows, &RvSettings::default())
}

pub fn build_all_with(
    series: &PriceSeries,
    windows: &[usize],
    settings: &RvSettings,
) -> Result<Vec<RvDataset>> {
    let returns = series.log_returns()?;
    windows
        .iter()
        .map(|&n| realized_volatility_with(&returns, n, settings))
        .collect()
}

impl RvDataset {
    /// Single-column values plus a JSON sidecar {n, count, source_digest}.
    pub fn write_files(&self, dir: &Path, stem: &str, source_digest: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut text = String::with_capacity(self.values.len() * 20);
        for v in &self.values {
            text.push_str(&format!("{v}\n"));
        }
        std::fs::write(dir.join(format!("{stem}.txt")), text)?;
        let sidecar = serde_json::json!({
            "n": self.n,
            "count": self.count,
            "zeros_excluded": self.zeros_excluded,
            "source_digest": source_digest,
        });
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(&sidecar)? + "\n",
        )?;
        Ok(())
    }

    /// Two-column TSV of the empirical ccdf.
    pub fn write_ccdf_tsv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        for (x, c) in empirical_ccdf(self) {
            writeln!(f, "{x}\t{c}")?;
        }
        Ok(())
    }
}
