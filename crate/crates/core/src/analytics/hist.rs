use chrono::{DateTime, Datelike, Timelike, Utc};
use chrono_tz::Tz;
use serde::{Deserialize, Serialize};

/// First and one-past-last local hour bins flagged as trading hours.
pub const TRADING_HOURS: std::ops::Range<u32> = 9..16;

pub const WEEKDAY_NAMES: [&str; 7] = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"];

/// Hour-of-day and day-of-week message counts in a local timezone.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeHistograms {
    pub hours: [u64; 24],
    /// Monday first.
    pub weekdays: [u64; 7],
    /// Messages posted Monday-Friday inside [`TRADING_HOURS`].
    pub trading_mass: u64,
    pub total: u64,
}

impl Default for TimeHistograms {
    fn default() -> Self {
        TimeHistograms {
            hours: [0; 24],
            weekdays: [0; 7],
            trading_mass: 0,
            total: 0,
        }
    }
}

pub fn is_trading_hour(hour: usize) -> bool {
    TRADING_HOURS.contains(&(hour as u32))
}

pub fn is_trading_weekday(weekday: usize) -> bool {
    weekday < 5
}

impl TimeHistograms {
    pub fn observe(&mut self, ts: DateTime<Utc>, tz: Tz) {
        let local = ts.with_timezone(&tz);
        let hour = local.hour() as usize;
        let wd = local.weekday().num_days_from_monday() as usize;
        self.hours[hour] += 1;
        self.weekdays[wd] += 1;
        self.total += 1;
        if is_trading_hour(hour) && is_trading_weekday(wd) {
            self.trading_mass += 1;
        }
    }

    pub fn merge(&mut self, o: &TimeHistograms) {
        for (a, b) in self.hours.iter_mut().zip(o.hours) {
            *a += b;
        }
        for (a, b) in self.weekdays.iter_mut().zip(o.weekdays) {
            *a += b;
        }
        self.trading_mass += o.trading_mass;
        self.total += o.total;
    }

    pub fn trading_fraction(&self) -> Option<f64> {
        (self.total > 0).then(|| self.trading_mass as f64 / self.total as f64)
    }
}

pub fn time_histograms(timestamps: impl IntoIterator<Item = DateTime<Utc>>, tz: Tz) -> TimeHistograms {
    let mut h = TimeHistograms::default();
    for ts in timestamps {
        h.observe(ts, tz);
    }
    h
}
