use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{fmt_full, fmt_g6, fmt_opt, ReportError};
use crate::analytics::{
    is_trading_hour, is_trading_weekday, CorpusSummary, CorrelationMatrix, RankedEntry, StatsRow, TimeHistograms,
    TopKey, WEEKDAY_NAMES,
};
use crate::catalog::ProfileTable;
use crate::ingest::Reject;
use crate::metrics::{BeliefSeries, DailyAggregate};

pub const STATS_COLUMNS: [&str; 8] = ["count", "mean", "std", "min", "25%", "50%", "75%", "max"];

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Vec<u8> {
    w.into_inner().expect("in-memory writer")
}

fn record<I, S>(w: &mut csv::Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).expect("in-memory writer");
}

/// `<title>,count,mean,std,min,25%,50%,75%,max`, one row per label.
pub fn stats_table_csv(title: &str, rows: &[StatsRow]) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, std::iter::once(title).chain(STATS_COLUMNS));
    for r in rows {
        let s = &r.stats;
        record(
            &mut w,
            [
                r.label.clone(),
                s.count.to_string(),
                fmt_g6(s.mean),
                fmt_g6(s.std),
                fmt_g6(s.min),
                fmt_g6(s.p25),
                fmt_g6(s.p50),
                fmt_g6(s.p75),
                fmt_g6(s.max),
            ],
        );
    }
    finish(w)
}

pub fn profile_table_csv(t: &ProfileTable) -> Vec<u8> {
    let mut w = writer();
    record(
        &mut w,
        [t.dimension, "Num. Users", "Percent Users", "Num. Messages", "Percent Messages"],
    );
    for r in &t.rows {
        record(
            &mut w,
            [
                r.category.to_string(),
                r.n_users.to_string(),
                fmt_g6(r.pct_users),
                r.n_messages.to_string(),
                fmt_g6(r.pct_messages),
            ],
        );
    }
    let full = |n: u64| if n > 0 { "100" } else { "0" };
    record(
        &mut w,
        [
            "Total".to_string(),
            t.total_users.to_string(),
            full(t.total_users).into(),
            t.total_messages.to_string(),
            full(t.total_messages).into(),
        ],
    );
    finish(w)
}

pub fn top_k_csv(key: TopKey, entries: &[RankedEntry]) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, [key.title(), "frequency", "pct"]);
    for e in entries {
        record(&mut w, [e.name.clone(), e.frequency.to_string(), fmt_g6(e.pct)]);
    }
    finish(w)
}

pub fn hist_hour_csv(h: &TimeHistograms) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, ["hour", "messages", "trading"]);
    for (i, n) in h.hours.iter().enumerate() {
        record(&mut w, [format!("{i:02}"), n.to_string(), is_trading_hour(i).to_string()]);
    }
    finish(w)
}

pub fn hist_weekday_csv(h: &TimeHistograms) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, ["weekday", "messages", "trading"]);
    for (i, n) in h.weekdays.iter().enumerate() {
        record(
            &mut w,
            [WEEKDAY_NAMES[i].to_string(), n.to_string(), is_trading_weekday(i).to_string()],
        );
    }
    finish(w)
}

const DAILY_HEADER: [&str; 7] = [
    "group1",
    "group2",
    "day",
    "n_bullish",
    "n_bearish",
    "avg_sentiment",
    "disagreement",
];

/// Daily aggregates in (key, day) order. Reals use round-trip precision so
/// row-level identities can be re-checked from the file.
pub fn daily_table_csv(aggs: &[DailyAggregate]) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, DAILY_HEADER);
    for a in aggs {
        record(
            &mut w,
            [
                a.key.group1.label(),
                a.key.group2.label().to_string(),
                a.day.to_string(),
                a.n_bullish.to_string(),
                a.n_bearish.to_string(),
                fmt_opt(a.avg_sentiment, fmt_full),
                fmt_opt(a.disagreement, fmt_full),
            ],
        );
    }
    finish(w)
}

/// Paired sentiment/disagreement series, one row per (key, trading day).
pub fn series_table_csv(pairs: &[(BeliefSeries, BeliefSeries)]) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, ["group1", "group2", "day", "avg_sentiment", "disagreement"]);
    for (s, d) in pairs {
        for (i, day) in s.days.iter().enumerate() {
            record(
                &mut w,
                [
                    s.key.group1.label(),
                    s.key.group2.label().to_string(),
                    day.to_string(),
                    fmt_opt(s.values[i], fmt_full),
                    fmt_opt(d.values[i], fmt_full),
                ],
            );
        }
    }
    finish(w)
}

/// Lower triangle including the diagonal; cells above it are empty.
pub fn matrix_csv(m: &CorrelationMatrix) -> Vec<u8> {
    let mut w = writer();
    record(&mut w, std::iter::once("").chain(m.labels.iter().map(String::as_str)));
    for (i, label) in m.labels.iter().enumerate() {
        let cells = (0..m.len()).map(|j| if j <= i { fmt_opt(m.entries[i][j], fmt_g6) } else { String::new() });
        record(&mut w, std::iter::once(label.clone()).chain(cells));
    }
    finish(w)
}

pub fn matrix_json(m: &CorrelationMatrix) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(m).expect("matrix serializes");
    v.push(b'\n');
    v
}

/// Reads a lower-triangle matrix CSV back into labels and a full symmetric matrix.
pub fn load_matrix_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<Option<f64>>>), ReportError> {
    let bad = |detail: String| ReportError::Load {
        what: "matrix CSV".into(),
        detail,
    };
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(bytes);
    let mut rows = r.records();
    let header = rows.next().ok_or_else(|| bad("empty file".into()))?.map_err(|e| bad(e.to_string()))?;
    let labels: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut entries = vec![vec![None; n]; n];
    for (i, rec) in rows.enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if i >= n || rec.len() != n + 1 || rec[0] != labels[i] {
            return Err(bad(format!("row {} does not match the header", i + 2)));
        }
        for j in 0..=i {
            let v = match &rec[j + 1] {
                "" => None,
                s => Some(s.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", i + 2)))?),
            };
            entries[i][j] = v;
            entries[j][i] = v;
        }
    }
    Ok((labels, entries))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyRow {
    pub group1: String,
    pub group2: String,
    pub day: NaiveDate,
    pub n_bullish: u64,
    pub n_bearish: u64,
    pub avg_sentiment: Option<f64>,
    pub disagreement: Option<f64>,
}

pub fn load_daily_csv(bytes: &[u8]) -> Result<Vec<DailyRow>, ReportError> {
    let mut r = csv::Reader::from_reader(bytes);
    r.deserialize()
        .collect::<Result<Vec<DailyRow>, _>>()
        .map_err(|e| ReportError::Load {
            what: "daily CSV".into(),
            detail: e.to_string(),
        })
}

pub fn rejects_ndjson(rejects: &[Reject]) -> Vec<u8> {
    let mut out = Vec::new();
    for r in rejects {
        serde_json::to_writer(&mut out, r).expect("reject serializes");
        out.push(b'\n');
    }
    out
}

pub fn corpus_json(s: &CorpusSummary) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(s).expect("summary serializes");
    v.push(b'\n');
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{correlation_matrix, summary_stats};
    use crate::metrics::{Counts, Group1, Group2, GroupKey};

    #[test]
    fn stats_layout() {
        let rows = [StatsRow {
            label: "x".into(),
            stats: summary_stats(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
        }];
        let text = String::from_utf8(stats_table_csv("Approach", &rows)).unwrap();
        assert_eq!(
            text,
            "Approach,count,mean,std,min,25%,50%,75%,max\nx,4,2.5,1.29099,1,1.75,2.5,3.25,4\n"
        );
    }

    #[test]
    fn matrix_round_trip() {
        let d = NaiveDate::from_ymd_opt(2020, 2, 19).unwrap();
        let s = |v: &[f64]| v.iter().copied().map(Some).collect::<Vec<_>>();
        let m = correlation_matrix(
            vec!["Basic Materials".into(), "Technology".into(), "Health, care".into()],
            &[s(&[1., 2., 3., 5.]), s(&[1., 3., 2., 4.]), vec![None; 4]],
            d,
            false,
            2,
        );
        let bytes = matrix_csv(&m);
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with(",Basic Materials,Technology,\"Health, care\"\nBasic Materials,1,,\n"));
        let (labels, entries) = load_matrix_csv(&bytes).unwrap();
        assert_eq!(labels, m.labels);
        for i in 0..3 {
            for j in 0..3 {
                match (entries[i][j], m.entries[i][j]) {
                    (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-6),
                    (a, b) => assert_eq!(a, b),
                }
            }
        }
    }

    #[test]
    fn daily_round_trip() {
        let key = GroupKey {
            group1: Group1::AllFirms,
            group2: Group2::AllInvestors,
        };
        let day = NaiveDate::from_ymd_opt(2020, 1, 2).unwrap();
        let aggs = [DailyAggregate::from_counts(key, day, Counts { bullish: 2, bearish: 1 })];
        let rows = load_daily_csv(&daily_table_csv(&aggs)).unwrap();
        assert_eq!(rows[0].avg_sentiment, aggs[0].avg_sentiment);
        assert_eq!(rows[0].disagreement, aggs[0].disagreement);
        assert_eq!(rows[0].group1, "All Firms");
    }
}
