//! Daily return panels: construction, CSV ingestion and synthetic data.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::Range;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Cross-section of daily simple returns.
///
/// Each stock has one contiguous active range of days; values outside it
/// are absent. Market caps, when present, cover the same ranges.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    stocks: Vec<String>,
    returns: Vec<Vec<f64>>,
    active: Vec<Range<usize>>,
    market_caps: Option<Vec<Vec<f64>>>,
}

fn contiguous(stock: &str, cells: &[Option<f64>]) -> Result<Range<usize>> {
    let start = cells.iter().position(Option::is_some);
    let Some(start) = start else {
        return Ok(0..0);
    };
    let end = cells.iter().rposition(Option::is_some).unwrap() + 1;
    if let Some(gap) = cells[start..end].iter().position(Option::is_none) {
        return Err(Error::MissingData(format!(
            "{stock} has a gap on day {} inside its active range",
            start + gap
        )));
    }
    Ok(start..end)
}

impl ReturnPanel {
    /// `returns[s][t]` is `None` where stock `s` is not listed on day `t`.
    pub fn new(
        dates: Vec<NaiveDate>,
        stocks: Vec<String>,
        returns: Vec<Vec<Option<f64>>>,
        market_caps: Option<Vec<Vec<Option<f64>>>>,
    ) -> Result<Self> {
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("panel dates must be strictly increasing".into()));
        }
        if returns.len() != stocks.len() {
            return Err(Error::Shape {
                expected: stocks.len(),
                got: returns.len(),
            });
        }
        let mut active = Vec::with_capacity(stocks.len());
        let mut dense = Vec::with_capacity(stocks.len());
        for (name, row) in stocks.iter().zip(&returns) {
            if row.len() != dates.len() {
                return Err(Error::Shape {
                    expected: dates.len(),
                    got: row.len(),
                });
            }
            let range = contiguous(name, row)?;
            if let Some(bad) = row.iter().flatten().find(|v| !v.is_finite()) {
                return Err(Error::MissingData(format!("{name} has non-finite return {bad}")));
            }
            dense.push(row.iter().map(|v| v.unwrap_or(f64::NAN)).collect());
            active.push(range);
        }
        let market_caps = match market_caps {
            None => None,
            Some(caps) => {
                if caps.len() != stocks.len() {
                    return Err(Error::Shape {
                        expected: stocks.len(),
                        got: caps.len(),
                    });
                }
                let mut out = Vec::with_capacity(caps.len());
                for ((name, row), range) in stocks.iter().zip(caps).zip(&active) {
                    let mut r = vec![f64::NAN; dates.len()];
                    for t in range.clone() {
                        match row.get(t).copied().flatten() {
                            Some(c) if c > 0.0 && c.is_finite() => r[t] = c,
                            _ => {
                                return Err(Error::MissingData(format!(
                                    "{name} lacks a positive market cap on day {t}"
                                )))
                            }
                        }
                    }
                    out.push(r);
                }
                Some(out)
            }
        };
        Ok(ReturnPanel {
            dates,
            stocks,
            returns: dense,
            active,
            market_caps,
        })
    }

    /// Builds a return panel from aligned price tapes. The first date only
    /// provides the base price, so the panel has one fewer day.
    pub fn from_prices(
        dates: Vec<NaiveDate>,
        stocks: Vec<String>,
        prices: Vec<Vec<Option<f64>>>,
        market_caps: Option<Vec<Vec<Option<f64>>>>,
    ) -> Result<Self> {
        if dates.len() < 2 {
            return Err(Error::InsufficientHistory {
                have: dates.len(),
                need: 2,
            });
        }
        let mut returns = Vec::with_capacity(prices.len());
        for (name, row) in stocks.iter().zip(&prices) {
            for (day, p) in row.iter().enumerate() {
                if let Some(p) = p {
                    if !(*p > 0.0) || !p.is_finite() {
                        return Err(Error::InvalidPrice {
                            stock: name.clone(),
                            day,
                            price: *p,
                        });
                    }
                }
            }
            returns.push(
                row.windows(2)
                    .map(|w| match (w[0], w[1]) {
                        (Some(a), Some(b)) => Some(b / a - 1.0),
                        _ => None,
                    })
                    .collect(),
            );
        }
        let caps = market_caps.map(|c| c.into_iter().map(|row| row[1..].to_vec()).collect());
        ReturnPanel::new(dates[1..].to_vec(), stocks, returns, caps)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn stocks(&self) -> &[String] {
        &self.stocks
    }

    pub fn n_days(&self) -> usize {
        self.dates.len()
    }

    pub fn n_stocks(&self) -> usize {
        self.stocks.len()
    }

    pub fn active(&self, stock: usize) -> Range<usize> {
        self.active[stock].clone()
    }

    pub fn is_active(&self, stock: usize, day: usize) -> bool {
        self.active[stock].contains(&day)
    }

    pub fn get(&self, stock: usize, day: usize) -> Option<f64> {
        self.is_active(stock, day).then(|| self.returns[stock][day])
    }

    /// Raw row for `stock`; entries outside [`Self::active`] are NaN.
    pub fn row(&self, stock: usize) -> &[f64] {
        &self.returns[stock]
    }

    pub fn has_market_caps(&self) -> bool {
        self.market_caps.is_some()
    }

    pub fn market_cap(&self, stock: usize, day: usize) -> Option<f64> {
        let caps = self.market_caps.as_ref()?;
        self.is_active(stock, day).then(|| caps[stock][day])
    }

    /// Panel restricted to the given stock indices, in that order.
    pub fn select(&self, stocks: &[usize]) -> ReturnPanel {
        ReturnPanel {
            dates: self.dates.clone(),
            stocks: stocks.iter().map(|&s| self.stocks[s].clone()).collect(),
            returns: stocks.iter().map(|&s| self.returns[s].clone()).collect(),
            active: stocks.iter().map(|&s| self.active[s].clone()).collect(),
            market_caps: self
                .market_caps
                .as_ref()
                .map(|c| stocks.iter().map(|&s| c[s].clone()).collect()),
        }
    }

    /// Stocks active on `day`.
    pub fn active_on(&self, day: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.stocks.len()).filter(move |&s| self.is_active(s, day))
    }
}

/// `p[t] / p[t-1] - 1` for every consecutive pair of prices.
pub fn compute_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if prices.len() < 2 {
        return Err(Error::InsufficientHistory {
            have: prices.len(),
            need: 2,
        });
    }
    if let Some((day, &price)) = prices.iter().enumerate().find(|(_, p)| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidPrice {
            stock: String::new(),
            day,
            price,
        });
    }
    Ok(prices.windows(2).map(|w| w[1] / w[0] - 1.0).collect())
}

/// Keeps the `k` stocks with the largest market cap on `reference_day`.
pub fn top_k_by_market_cap(panel: &ReturnPanel, k: usize, reference_day: usize) -> Result<ReturnPanel> {
    if !panel.has_market_caps() {
        return Err(Error::MissingData("panel has no market caps".into()));
    }
    let mut ranked: Vec<(usize, f64)> = panel
        .active_on(reference_day)
        .map(|s| (s, panel.market_cap(s, reference_day).unwrap()))
        .collect();
    if ranked.len() < k {
        return Err(Error::MissingData(format!(
            "only {} stocks carry a market cap on day {reference_day}, {k} requested",
            ranked.len()
        )));
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| panel.stocks[a.0].cmp(&panel.stocks[b.0])));
    let mut keep: Vec<usize> = ranked[..k].iter().map(|r| r.0).collect();
    keep.sort_unstable();
    Ok(panel.select(&keep))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ValueKind {
    Close,
    Return,
}

/// Reads `date,ticker,close[,market_cap]` or `date,ticker,return[,market_cap]`.
pub fn read_panel_csv(path: impl AsRef<Path>) -> Result<ReturnPanel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_panel(file)
}

pub fn read_panel(reader: impl std::io::Read) -> Result<ReturnPanel> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(date_col), Some(ticker_col)) = (col("date"), col("ticker")) else {
        return Err(Error::MissingData("CSV needs `date` and `ticker` columns".into()));
    };
    let (kind, value_col) = match (col("close"), col("return")) {
        (Some(c), None) => (ValueKind::Close, c),
        (None, Some(c)) => (ValueKind::Return, c),
        _ => {
            return Err(Error::MissingData(
                "CSV needs exactly one of `close` or `return` columns".into(),
            ))
        }
    };
    let cap_col = col("market_cap");

    type Cell = (f64, Option<f64>);
    let mut cells: BTreeMap<String, BTreeMap<NaiveDate, Cell>> = BTreeMap::new();
    let mut all_dates = BTreeSet::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let bad = |what: &str| Error::MissingData(format!("row {}: bad {what}", line + 2));
        let date = NaiveDate::parse_from_str(field(date_col), "%Y-%m-%d").map_err(|_| bad("date"))?;
        let value: f64 = field(value_col).parse().map_err(|_| bad("value"))?;
        let cap = match cap_col {
            Some(c) if !field(c).is_empty() => Some(field(c).parse::<f64>().map_err(|_| bad("market_cap"))?),
            _ => None,
        };
        all_dates.insert(date);
        if cells
            .entry(field(ticker_col).to_string())
            .or_default()
            .insert(date, (value, cap))
            .is_some()
        {
            return Err(bad("duplicate (date, ticker)"));
        }
    }
    let dates: Vec<NaiveDate> = all_dates.into_iter().collect();
    let stocks: Vec<String> = cells.keys().cloned().collect();
    let has_caps = cap_col.is_some();
    let mut values = Vec::with_capacity(stocks.len());
    let mut caps = Vec::with_capacity(stocks.len());
    for rows in cells.values() {
        values.push(dates.iter().map(|d| rows.get(d).map(|c| c.0)).collect::<Vec<_>>());
        caps.push(dates.iter().map(|d| rows.get(d).and_then(|c| c.1)).collect::<Vec<_>>());
    }
    let caps = has_caps.then_some(caps);
    match kind {
        ValueKind::Close => ReturnPanel::from_prices(dates, stocks, values, caps),
        ValueKind::Return => ReturnPanel::new(dates, stocks, values, caps),
    }
}

/// Writes the `date,ticker,return[,market_cap]` format, sorted by date then ticker.
pub fn write_returns_csv(panel: &ReturnPanel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_returns(panel, std::io::BufWriter::new(file))
}

pub fn write_returns(panel: &ReturnPanel, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let caps = panel.has_market_caps();
    if caps {
        w.write_record(["date", "ticker", "return", "market_cap"])?;
    } else {
        w.write_record(["date", "ticker", "return"])?;
    }
    let mut order: Vec<usize> = (0..panel.n_stocks()).collect();
    order.sort_by(|&a, &b| panel.stocks[a].cmp(&panel.stocks[b]));
    for (t, date) in panel.dates.iter().enumerate() {
        let d = date.format("%Y-%m-%d").to_string();
        for &s in &order {
            if let Some(r) = panel.get(s, t) {
                let ticker = panel.stocks[s].as_str();
                if caps {
                    let c = panel.market_cap(s, t).unwrap();
                    w.write_record([d.as_str(), ticker, &r.to_string(), &c.to_string()])?;
                } else {
                    w.write_record([d.as_str(), ticker, &r.to_string()])?;
                }
            }
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Parameters of the synthetic momentum panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthParams {
    pub n_stocks: usize,
    pub n_days: usize,
    pub signal_strength: f64,
    pub noise_std: f64,
    /// Days in the trailing mean whose sign drives the signal.
    pub lookback: usize,
    pub start_date: NaiveDate,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_stocks: 50,
            n_days: 1250,
            signal_strength: 0.008,
            noise_std: 0.02,
            lookback: 5,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(),
        }
    }
}

/// Consecutive weekdays starting at `start` (or the next weekday).
pub fn business_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Synthetic panel `r[s][t] = strength * sign(mean(r[s][t-lookback..t])) + noise`.
///
/// Market caps start log-normal and then compound with each stock's returns.
pub fn synth_panel(params: &SynthParams, stream: &RngStream) -> Result<ReturnPanel> {
    let SynthParams {
        n_stocks,
        n_days,
        signal_strength,
        noise_std,
        lookback,
        ..
    } = *params;
    if n_stocks < 2 || n_days < 2 || lookback == 0 || !(noise_std >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "synthetic panel needs >= 2 stocks, >= 2 days, lookback >= 1 and noise >= 0 \
             (got {n_stocks}, {n_days}, {lookback}, {noise_std})"
        )));
    }
    let stocks: Vec<String> = (0..n_stocks).map(|s| format!("S{s:04}")).collect();
    let mut returns = Vec::with_capacity(n_stocks);
    let mut caps = Vec::with_capacity(n_stocks);
    for s in 0..n_stocks {
        let mut rng = stream.derive_named("returns").derive(s as u64).rng();
        let mut row: Vec<f64> = Vec::with_capacity(n_days);
        for t in 0..n_days {
            let past = &row[t.saturating_sub(lookback)..t];
            let drift: f64 = past.iter().sum();
            let m = if drift > 0.0 {
                1.0
            } else if drift < 0.0 {
                -1.0
            } else {
                0.0
            };
            let z: f64 = StandardNormal.sample(&mut rng);
            row.push(signal_strength * m + noise_std * z);
        }
        let mut cap_rng = stream.derive_named("caps").derive(s as u64).rng();
        let z: f64 = StandardNormal.sample(&mut cap_rng);
        let mut cap = (23.0 + z + 0.01 * cap_rng.random::<f64>()).exp();
        let cap_row: Vec<Option<f64>> = row
            .iter()
            .map(|r| {
                cap *= 1.0 + r;
                Some(cap)
            })
            .collect();
        returns.push(row.into_iter().map(Some).collect());
        caps.push(cap_row);
    }
    ReturnPanel::new(business_days(params.start_date, n_days), stocks, returns, Some(caps))
}
