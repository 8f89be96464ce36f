//! Calendar-indexed time series and the frequency transforms used to move
//! between daily indicators and monthly targets.
//!
//! A [`TimeSeries`] is a named, strictly date-ordered list of observations on
//! an explicit grid ([`Frequency::Daily`] or [`Frequency::Monthly`]). Values
//! may be missing; a missing value is an `Observation` whose `value` is
//! `None`, and a date that simply does not appear in the series is treated
//! the same way by the transforms below.

use std::convert::TryFrom;
use std::path::Path;

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Grid a series lives on. Monthly observations are anchored to the first
/// day of their month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frequency {
    Daily,
    Monthly,
}

impl Frequency {
    pub fn as_str(self) -> &'static str {
        match self {
            Frequency::Daily => "daily",
            Frequency::Monthly => "monthly",
        }
    }
}

impl std::fmt::Display for Frequency {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One dated observation. `value: None` marks a missing value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub value: Option<f64>,
}

impl Observation {
    pub fn new(date: NaiveDate, value: f64) -> Self {
        Observation {
            date,
            value: Some(value),
        }
    }

    pub fn missing(date: NaiveDate) -> Self {
        Observation { date, value: None }
    }
}

/// A named series of observations on a fixed calendar grid.
///
/// Invariants enforced at construction (and re-checked on deserialization):
/// dates are strictly increasing, monthly observations fall on the first of
/// the month, and all present values are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTimeSeries")]
pub struct TimeSeries {
    name: String,
    frequency: Frequency,
    observations: Vec<Observation>,
}

#[derive(Deserialize)]
struct RawTimeSeries {
    name: String,
    frequency: Frequency,
    observations: Vec<Observation>,
}

impl TryFrom<RawTimeSeries> for TimeSeries {
    type Error = Error;

    fn try_from(raw: RawTimeSeries) -> Result<Self> {
        TimeSeries::new(raw.name, raw.frequency, raw.observations)
    }
}

impl TimeSeries {
    /// Build a series, validating the structural invariants.
    pub fn new(
        name: impl Into<String>,
        frequency: Frequency,
        observations: Vec<Observation>,
    ) -> Result<Self> {
        let name = name.into();
        for pair in observations.windows(2) {
            if pair[1].date <= pair[0].date {
                return Err(Error::InvalidSeries {
                    series: name,
                    message: format!(
                        "dates must be strictly increasing, found {} after {}",
                        pair[1].date, pair[0].date
                    ),
                });
            }
        }
        for obs in &observations {
            if frequency == Frequency::Monthly && obs.date.day() != 1 {
                return Err(Error::FrequencyMismatch {
                    series: name,
                    date: obs.date,
                    expected: "monthly",
                });
            }
            if let Some(v) = obs.value {
                if !v.is_finite() {
                    return Err(Error::InvalidSeries {
                        series: name,
                        message: format!("non-finite value {} at {}", v, obs.date),
                    });
                }
            }
        }
        Ok(TimeSeries {
            name,
            frequency,
            observations,
        })
    }

    /// Build a fully observed series from consecutive grid points starting at
    /// `start`. Panics only if the dates run off the calendar, so it is safe
    /// for any realistic span.
    pub fn from_values(
        name: impl Into<String>,
        frequency: Frequency,
        start: NaiveDate,
        values: impl IntoIterator<Item = f64>,
    ) -> Result<Self> {
        let observations = values
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let date = match frequency {
                    Frequency::Daily => start
                        .checked_add_days(Days::new(i as u64))
                        .expect("date within calendar range"),
                    Frequency::Monthly => add_months(start, i as i32),
                };
                Observation::new(date, v)
            })
            .collect();
        TimeSeries::new(name, frequency, observations)
    }

    /// Construct without re-validating. Only for internal use on observation
    /// lists already known to satisfy the invariants (slices of a valid
    /// series, transforms that preserve ordering).
    pub(crate) fn from_parts_unchecked(
        name: String,
        frequency: Frequency,
        observations: Vec<Observation>,
    ) -> Self {
        TimeSeries {
            name,
            frequency,
            observations,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn first_date(&self) -> Option<NaiveDate> {
        self.observations.first().map(|o| o.date)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.observations.last().map(|o| o.date)
    }

    /// Value recorded exactly at `date`, if present and not missing.
    pub fn value_at(&self, date: NaiveDate) -> Option<f64> {
        self.observations
            .binary_search_by_key(&date, |o| o.date)
            .ok()
            .and_then(|i| self.observations[i].value)
    }

    /// Observations with `start <= date < end`.
    pub fn between(&self, start: NaiveDate, end: NaiveDate) -> TimeSeries {
        let lo = self.observations.partition_point(|o| o.date < start);
        let hi = self.observations.partition_point(|o| o.date < end);
        TimeSeries::from_parts_unchecked(
            self.name.clone(),
            self.frequency,
            self.observations[lo..hi].to_vec(),
        )
    }

    /// Observations strictly before `end`.
    pub fn before(&self, end: NaiveDate) -> TimeSeries {
        let hi = self.observations.partition_point(|o| o.date < end);
        TimeSeries::from_parts_unchecked(
            self.name.clone(),
            self.frequency,
            self.observations[..hi].to_vec(),
        )
    }

    /// Drop leading and trailing observations whose value is missing.
    pub fn trimmed(&self) -> TimeSeries {
        let first = self.observations.iter().position(|o| o.value.is_some());
        let series = match first {
            None => Vec::new(),
            Some(lo) => {
                let hi = self
                    .observations
                    .iter()
                    .rposition(|o| o.value.is_some())
                    .expect("some value exists");
                self.observations[lo..=hi].to_vec()
            }
        };
        TimeSeries::from_parts_unchecked(self.name.clone(), self.frequency, series)
    }

    pub fn rename(mut self, name: impl Into<String>) -> TimeSeries {
        self.name = name.into();
        self
    }

    /// `(date, value)` pairs for all non-missing observations, in date order.
    pub fn non_missing(&self) -> impl Iterator<Item = (NaiveDate, f64)> + '_ {
        self.observations
            .iter()
            .filter_map(|o| o.value.map(|v| (o.date, v)))
    }

    pub fn non_missing_values(&self) -> Vec<f64> {
        self.non_missing().map(|(_, v)| v).collect()
    }

    pub fn non_missing_count(&self) -> usize {
        self.observations
            .iter()
            .filter(|o| o.value.is_some())
            .count()
    }
}

/// First day of the month containing `date`.
pub fn month_anchor(date: NaiveDate) -> NaiveDate {
    date.with_day(1).expect("day 1 exists in every month")
}

/// Month anchor shifted by `delta` months (negative shifts go back in time).
pub fn add_months(date: NaiveDate, delta: i32) -> NaiveDate {
    let shifted = if delta >= 0 {
        date.checked_add_months(Months::new(delta as u32))
    } else {
        date.checked_sub_months(Months::new(delta.unsigned_abs()))
    };
    shifted.expect("date within calendar range")
}

/// Number of days in the month containing `date`.
pub fn days_in_month(date: NaiveDate) -> u32 {
    let anchor = month_anchor(date);
    (add_months(anchor, 1) - anchor).num_days() as u32
}

/// Fill interior gaps of a daily series by linear interpolation in calendar
/// time.
///
/// The output covers every calendar day from the first to the last
/// observation. Days between two non-missing values get the straight-line
/// interpolant weighted by date distance; days before the first or after the
/// last non-missing value stay missing. Running the operation twice gives the
/// same result as running it once.
pub fn interpolate_gaps(series: &TimeSeries) -> Result<TimeSeries> {
    if series.frequency() != Frequency::Daily {
        return Err(Error::InvalidParameter {
            message: format!(
                "interpolate_gaps expects a daily series, '{}' is {}",
                series.name(),
                series.frequency()
            ),
        });
    }
    let points: Vec<(NaiveDate, f64)> = series.non_missing().collect();
    if points.len() < 2 {
        return Err(Error::InsufficientData {
            context: format!("interpolate_gaps on '{}'", series.name()),
            needed: 2,
            got: points.len(),
        });
    }
    let first = series.first_date().expect("non-empty");
    let last = series.last_date().expect("non-empty");
    let (first_known, last_known) = (points[0].0, points[points.len() - 1].0);

    let mut out = Vec::with_capacity((last - first).num_days() as usize + 1);
    let mut seg = 0;
    let mut date = first;
    while date <= last {
        let value = if date < first_known || date > last_known {
            None
        } else {
            while points[seg + 1].0 < date {
                seg += 1;
            }
            let (left_date, left) = points[seg];
            let (right_date, right) = points[seg + 1];
            if left_date == date {
                Some(left)
            } else if right_date == date {
                Some(right)
            } else {
                let span = (right_date - left_date).num_days() as f64;
                let offset = (date - left_date).num_days() as f64;
                Some(left + (right - left) * (offset / span))
            }
        };
        out.push(Observation { date, value });
        date = date.succ_opt().expect("date within calendar range");
    }
    Ok(TimeSeries::from_parts_unchecked(
        series.name().to_string(),
        Frequency::Daily,
        out,
    ))
}

/// Default horizon for [`fractional_change`]: one week of daily data.
pub const DEFAULT_CHANGE_HORIZON_DAYS: usize = 7;

/// Relative change over a fixed horizon: `(x_t - x_{t-h}) / x_{t-h}`.
///
/// Requires a gap-free daily series (use [`interpolate_gaps`] first). The
/// first `horizon_days` observations have no base value and are dropped.
pub fn fractional_change(series: &TimeSeries, horizon_days: usize) -> Result<TimeSeries> {
    if series.frequency() != Frequency::Daily {
        return Err(Error::InvalidParameter {
            message: format!(
                "fractional_change expects a daily series, '{}' is {}",
                series.name(),
                series.frequency()
            ),
        });
    }
    if horizon_days == 0 {
        return Err(Error::InvalidParameter {
            message: "fractional_change horizon must be at least 1 day".to_string(),
        });
    }
    if series.is_empty() {
        return Err(Error::EmptySeries {
            name: series.name().to_string(),
        });
    }
    let obs = series.observations();
    let mut expected = obs[0].date;
    for o in obs {
        if o.date != expected {
            return Err(Error::MissingObservation {
                series: series.name().to_string(),
                date: expected,
            });
        }
        if o.value.is_none() {
            return Err(Error::MissingObservation {
                series: series.name().to_string(),
                date: o.date,
            });
        }
        expected = expected.succ_opt().expect("date within calendar range");
    }

    let mut out = Vec::new();
    for i in horizon_days..obs.len() {
        let base = obs[i - horizon_days].value.expect("checked above");
        if base == 0.0 {
            return Err(Error::DivisionByZero {
                context: format!(
                    "fractional_change of '{}': base value at {} is zero",
                    series.name(),
                    obs[i - horizon_days].date
                ),
            });
        }
        let current = obs[i].value.expect("checked above");
        out.push(Observation::new(obs[i].date, (current - base) / base));
    }
    Ok(TimeSeries::from_parts_unchecked(
        series.name().to_string(),
        Frequency::Daily,
        out,
    ))
}

/// Expand a monthly series to daily frequency by repeating each month's value
/// on every day of that month.
pub fn downsample_fill(series: &TimeSeries) -> Result<TimeSeries> {
    if series.frequency() != Frequency::Monthly {
        return Err(Error::InvalidParameter {
            message: format!(
                "downsample_fill expects a monthly series, '{}' is {}",
                series.name(),
                series.frequency()
            ),
        });
    }
    let mut out = Vec::new();
    for obs in series.observations() {
        let value = obs.value.ok_or_else(|| Error::MissingObservation {
            series: series.name().to_string(),
            date: obs.date,
        })?;
        for day in 0..days_in_month(obs.date) {
            let date = obs
                .date
                .checked_add_days(Days::new(day as u64))
                .expect("date within calendar range");
            out.push(Observation::new(date, value));
        }
    }
    Ok(TimeSeries::from_parts_unchecked(
        series.name().to_string(),
        Frequency::Daily,
        out,
    ))
}

/// The `len` most recent daily values at or before `reference`, newest first.
///
/// Element `j` of the result is the value `j` calendar days before the anchor
/// observation (the last observation on or before `reference`). The window
/// must be contiguous: a skipped calendar day or a missing value inside it is
/// an error, and a window reaching past the start of the series reports how
/// many days are unavailable.
pub fn lag_window(series: &TimeSeries, reference: NaiveDate, len: usize) -> Result<Vec<f64>> {
    if series.frequency() != Frequency::Daily {
        return Err(Error::InvalidParameter {
            message: format!(
                "lag_window expects a daily series, '{}' is {}",
                series.name(),
                series.frequency()
            ),
        });
    }
    if len == 0 {
        return Err(Error::InvalidParameter {
            message: "lag_window length must be at least 1".to_string(),
        });
    }
    let obs = series.observations();
    let anchor = series
        .observations()
        .partition_point(|o| o.date <= reference);
    if anchor == 0 {
        return Err(Error::InsufficientHistory {
            context: format!(
                "series '{}' has no observations on or before {}",
                series.name(),
                reference
            ),
            shortfall: len,
            unit: "days",
        });
    }
    let anchor = anchor - 1;
    let anchor_date = obs[anchor].date;
    let window_start = anchor_date
        .checked_sub_days(Days::new(len as u64 - 1))
        .expect("date within calendar range");

    let contiguous = anchor + 1 >= len && obs[anchor + 1 - len].date == window_start;
    if !contiguous {
        let first = obs[0].date;
        if first > window_start {
            let shortfall = (first - window_start).num_days() as usize;
            return Err(Error::InsufficientHistory {
                context: format!(
                    "series '{}': window of {} days ending {} starts before the data",
                    series.name(),
                    len,
                    anchor_date
                ),
                shortfall,
                unit: "days",
            });
        }
        // The span is covered but some calendar day inside it is absent; walk
        // backwards to name the first one.
        let mut expected = anchor_date;
        let mut i = anchor;
        loop {
            if obs[i].date != expected {
                return Err(Error::MissingObservation {
                    series: series.name().to_string(),
                    date: expected,
                });
            }
            expected = expected.pred_opt().expect("date within calendar range");
            i -= 1;
        }
    }

    let mut window = Vec::with_capacity(len);
    for j in 0..len {
        let o = &obs[anchor - j];
        let value = o.value.ok_or_else(|| Error::MissingObservation {
            series: series.name().to_string(),
            date: o.date,
        })?;
        window.push(value);
    }
    Ok(window)
}

/// Read a `date,value` CSV into a series. An empty value field marks a
/// missing observation. Dates must be ISO-8601 and strictly increasing.
pub fn read_series_csv(path: &Path, name: &str, frequency: Frequency) -> Result<TimeSeries> {
    let display = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => {
                let io = match e.into_kind() {
                    csv::ErrorKind::Io(io) => io,
                    _ => unreachable!("kind checked above"),
                };
                Error::io(&display, io)
            }
            _ => Error::FormatError {
                file: display.clone(),
                line: 1,
                message: e.to_string(),
            },
        })?;

    {
        let headers = reader.headers().map_err(|e| Error::FormatError {
            file: display.clone(),
            line: 1,
            message: e.to_string(),
        })?;
        let fields: Vec<String> = headers.iter().map(|h| h.trim().to_lowercase()).collect();
        if fields != ["date", "value"] {
            return Err(Error::FormatError {
                file: display,
                line: 1,
                message: format!("expected header 'date,value', got '{}'", fields.join(",")),
            });
        }
    }

    let mut observations = Vec::new();
    let mut previous: Option<NaiveDate> = None;
    for record in reader.records() {
        let record = record.map_err(|e| Error::FormatError {
            file: display.clone(),
            line: e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(observations.len() + 2),
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(observations.len() + 2);
        if record.len() != 2 {
            return Err(Error::FormatError {
                file: display,
                line,
                message: format!("expected 2 fields, got {}", record.len()),
            });
        }
        let date = record[0]
            .parse::<NaiveDate>()
            .map_err(|e| Error::FormatError {
                file: display.clone(),
                line,
                message: format!("bad date '{}': {}", &record[0], e),
            })?;
        if let Some(prev) = previous {
            if date <= prev {
                return Err(Error::FormatError {
                    file: display,
                    line,
                    message: format!("dates must be strictly increasing, {} follows {}", date, prev),
                });
            }
        }
        previous = Some(date);
        let raw = record[1].trim();
        let value = if raw.is_empty() {
            None
        } else {
            let v = raw.parse::<f64>().map_err(|e| Error::FormatError {
                file: display.clone(),
                line,
                message: format!("bad value '{}': {}", raw, e),
            })?;
            Some(v)
        };
        observations.push(Observation { date, value });
    }
    TimeSeries::new(name, frequency, observations)
}

/// Write a series as a `date,value` CSV. Missing values become empty fields;
/// present values are printed with full round-trip precision.
pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let display = path.display().to_string();
    let mut out = String::from("date,value\n");
    for obs in series.observations() {
        match obs.value {
            Some(v) => out.push_str(&format!("{},{}\n", obs.date, v)),
            None => out.push_str(&format!("{},\n", obs.date)),
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(&display, e))
}
