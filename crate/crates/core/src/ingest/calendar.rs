//! Trading calendar and close-to-close day assignment.
//!
//! A message posted at `ts` belongs to the earliest trading day `d` with
//! `close(d-1) < ts <= close(d)`. Weekend and holiday messages therefore roll
//! forward into the next session. The first calendar row only anchors the
//! first interval; timestamps at or before its close, or after the last
//! close, are out of calendar.
//!
//! File format (CSV, LF line endings):
//!
//! ```text
//! timezone,America/New_York
//! date,close_time_local
//! 2019-11-29,16:00:00
//! 2019-12-02,16:00:00
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Datelike, NaiveDate, NaiveTime, TimeZone, Utc, Weekday};
use chrono_tz::Tz;

pub const DEFAULT_TZ: Tz = chrono_tz::America::New_York;

#[derive(Debug, thiserror::Error)]
pub enum CalendarError {
    #[error("timestamp {0} is outside the trading calendar")]
    OutOfCalendar(DateTime<Utc>),
    #[error("calendar file {path}: {detail}")]
    Format { path: String, detail: String },
    #[error("calendar rows must be strictly increasing (at {0})")]
    Unordered(NaiveDate),
    #[error("close time {1} on {0} does not exist or is ambiguous in the calendar timezone")]
    BadLocalTime(NaiveDate, NaiveTime),
    #[error("calendar needs at least two rows (an anchor and one session)")]
    TooShort,
}

#[derive(Debug, Clone)]
pub struct TradingCalendar {
    tz: Tz,
    days: Vec<NaiveDate>,
    closes: Vec<DateTime<Utc>>,
    close_local: Vec<NaiveTime>,
}

/// Full-day NYSE closures used by [`TradingCalendar::us_equities`].
const US_HOLIDAYS: &[(i32, u32, u32)] = &[
    (2019, 1, 1),
    (2019, 1, 21),
    (2019, 2, 18),
    (2019, 4, 19),
    (2019, 5, 27),
    (2019, 7, 4),
    (2019, 9, 2),
    (2019, 11, 28),
    (2019, 12, 25),
    (2020, 1, 1),
    (2020, 1, 20),
    (2020, 2, 17),
    (2020, 4, 10),
    (2020, 5, 25),
    (2020, 7, 3),
    (2020, 9, 7),
    (2020, 11, 26),
    (2020, 12, 25),
    (2021, 1, 1),
    (2021, 1, 18),
    (2021, 2, 15),
    (2021, 4, 2),
    (2021, 5, 31),
    (2021, 7, 5),
    (2021, 9, 6),
    (2021, 11, 25),
    (2021, 12, 24),
];

fn is_us_session(d: NaiveDate) -> bool {
    !matches!(d.weekday(), Weekday::Sat | Weekday::Sun)
        && !US_HOLIDAYS.contains(&(d.year(), d.month(), d.day()))
}

pub fn default_close() -> NaiveTime {
    NaiveTime::from_hms_opt(16, 0, 0).unwrap()
}

impl TradingCalendar {
    pub fn new(tz: Tz, rows: Vec<(NaiveDate, NaiveTime)>) -> Result<Self, CalendarError> {
        if rows.len() < 2 {
            return Err(CalendarError::TooShort);
        }
        let mut days = Vec::with_capacity(rows.len());
        let mut closes = Vec::with_capacity(rows.len());
        let mut close_local = Vec::with_capacity(rows.len());
        for (d, t) in rows {
            if let Some(prev) = days.last() {
                if *prev >= d {
                    return Err(CalendarError::Unordered(d));
                }
            }
            let close = tz
                .from_local_datetime(&d.and_time(t))
                .single()
                .ok_or(CalendarError::BadLocalTime(d, t))?
                .with_timezone(&Utc);
            days.push(d);
            closes.push(close);
            close_local.push(t);
        }
        Ok(TradingCalendar {
            tz,
            days,
            closes,
            close_local,
        })
    }

    /// US equity sessions (weekdays minus NYSE full-day holidays for
    /// 2019-2021) closing at 16:00 New York time, covering `from..=to`.
    /// The last session before `from` is included as the anchor.
    pub fn us_equities(from: NaiveDate, to: NaiveDate) -> Self {
        let mut anchor = from.pred_opt().unwrap();
        while !is_us_session(anchor) {
            anchor = anchor.pred_opt().unwrap();
        }
        let rows: Vec<_> = anchor
            .iter_days()
            .take_while(|d| *d <= to.max(from))
            .filter(|d| is_us_session(*d))
            .map(|d| (d, default_close()))
            .collect();
        let mut rows = rows;
        if rows.len() < 2 {
            // `from..=to` holds no session; extend to the next one.
            let mut next = to.max(from).succ_opt().unwrap();
            while !is_us_session(next) {
                next = next.succ_opt().unwrap();
            }
            rows.push((next, default_close()));
        }
        Self::new(DEFAULT_TZ, rows).expect("generated calendar is well formed")
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CalendarError> {
        let fmt_err = |detail: String| CalendarError::Format {
            path: origin.to_string(),
            detail,
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, tz_line) = lines.next().ok_or_else(|| fmt_err("empty file".into()))?;
        let tz_name = tz_line
            .trim()
            .strip_prefix("timezone,")
            .ok_or_else(|| fmt_err("first row must be `timezone,<IANA name>`".into()))?;
        let tz: Tz = tz_name
            .trim()
            .parse()
            .map_err(|_| fmt_err(format!("unknown timezone {tz_name:?}")))?;
        let (_, header) = lines.next().ok_or_else(|| fmt_err("missing header row".into()))?;
        if header.trim() != "date,close_time_local" {
            return Err(fmt_err(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let (d, t) = line
                .trim()
                .split_once(',')
                .ok_or_else(|| fmt_err(format!("line {}: expected date,time", i + 1)))?;
            let d = NaiveDate::parse_from_str(d.trim(), "%Y-%m-%d")
                .map_err(|e| fmt_err(format!("line {}: {e}", i + 1)))?;
            let t = NaiveTime::parse_from_str(t.trim(), "%H:%M:%S")
                .or_else(|_| NaiveTime::parse_from_str(t.trim(), "%H:%M"))
                .map_err(|e| fmt_err(format!("line {}: {e}", i + 1)))?;
            rows.push((d, t));
        }
        Self::new(tz, rows)
    }

    pub fn load(path: &Path) -> Result<Self, CalendarError> {
        let text = fs::read_to_string(path).map_err(|e| CalendarError::Format {
            path: path.display().to_string(),
            detail: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "timezone,{}", self.tz.name())?;
        writeln!(w, "date,close_time_local")?;
        for (d, t) in self.days.iter().zip(&self.close_local) {
            writeln!(w, "{},{}", d.format("%Y-%m-%d"), t.format("%H:%M:%S"))?;
        }
        Ok(())
    }

    pub fn tz(&self) -> Tz {
        self.tz
    }

    /// Sessions that can receive messages (everything after the anchor).
    pub fn sessions(&self) -> &[NaiveDate] {
        &self.days[1..]
    }

    /// Sessions within `from..=to`.
    pub fn sessions_between(&self, from: NaiveDate, to: NaiveDate) -> &[NaiveDate] {
        let s = self.sessions();
        let lo = s.partition_point(|d| *d < from);
        let hi = s.partition_point(|d| *d <= to);
        &s[lo..hi.max(lo)]
    }

    /// Earliest instant strictly covered (exclusive).
    pub fn coverage_start(&self) -> DateTime<Utc> {
        self.closes[0]
    }

    /// Latest instant covered (inclusive).
    pub fn coverage_end(&self) -> DateTime<Utc> {
        *self.closes.last().unwrap()
    }

    pub fn close_of(&self, day: NaiveDate) -> Option<DateTime<Utc>> {
        self.days.binary_search(&day).ok().map(|i| self.closes[i])
    }

    pub fn assign(&self, ts: DateTime<Utc>) -> Result<NaiveDate, CalendarError> {
        let idx = self.closes.partition_point(|c| *c < ts);
        if idx == 0 || idx == self.closes.len() {
            return Err(CalendarError::OutOfCalendar(ts));
        }
        Ok(self.days[idx])
    }
}

/// Close-to-close trading day of `ts`.
pub fn assign_trading_day(ts: DateTime<Utc>, cal: &TradingCalendar) -> Result<NaiveDate, CalendarError> {
    cal.assign(ts)
}
