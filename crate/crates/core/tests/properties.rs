use approx::assert_abs_diff_eq;
use belief_core::analytics::{correlation_matrix, disagreement_corr_matrix, CorrDimension, CorrOptions, EconomyState};
use belief_core::catalog::{Category, Sector};
use belief_core::metrics::{
    aggregate, smoothed_pair, AggregationContext, Counts, DailyAggregate, Group1, Group1Dim, Group2, Group2Dim, GroupKey,
    SmoothingConfig,
};
use belief_core::report::{load_matrix_csv, matrix_csv};
use belief_core::synth::{generate_messages, sector_prob_scenario, vshape_scenario};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn d(y: i32, m: u32, day: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, day).unwrap()
}

#[test]
fn matrix_survives_csv_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let series: Vec<Vec<Option<f64>>> = (0..6)
        .map(|i| {
            (0..40)
                .map(|_| (i != 5 || rng.random_bool(0.1)).then(|| rng.random_range(0.0..1.0)))
                .collect()
        })
        .collect();
    let labels: Vec<String> = (0..6).map(|i| format!("Group, {i}")).collect();
    let m = correlation_matrix(labels.clone(), &series, d(2020, 3, 1), false, 10);
    let (l2, e2) = load_matrix_csv(&matrix_csv(&m)).unwrap();
    assert_eq!(l2, labels);
    for (a, b) in m.entries.iter().flatten().zip(e2.iter().flatten()) {
        match (a, b) {
            (Some(a), Some(b)) => assert_abs_diff_eq!(*a, *b, epsilon = 1e-6),
            (None, None) => {}
            _ => panic!("{a:?} vs {b:?}"),
        }
    }
    // The sparse series never reaches the overlap threshold.
    assert!(e2[5][..5].iter().all(Option::is_none));
}

#[test]
fn sector_probabilities_are_recovered() {
    let spec = sector_prob_scenario(5, 60_000, &[(Sector::Healthcare, 0.9), (Sector::Financial, 0.6)]);
    let (msgs, _) = generate_messages(&spec).unwrap();
    let (cal, catalog) = (spec.calendar(), spec.catalog());
    let ctx = AggregationContext {
        catalog: &catalog,
        calendar: &cal,
        from: spec.start,
        to: spec.end,
        excluded_sectors: vec![],
    };
    let aggs = aggregate(&msgs, Group1Dim::Sector, Group2Dim::AllInvestors, &ctx);
    for (sector, p) in [(Sector::Healthcare, 0.9), (Sector::Financial, 0.6)] {
        let rows: Vec<&DailyAggregate> = aggs.iter().filter(|a| a.key.group1 == Group1::Sector(sector)).collect();
        let n = rows.len() as f64;
        let mean = rows.iter().map(|a| a.avg_sentiment.unwrap()).sum::<f64>() / n;
        let se = rows
            .iter()
            .map(|a| 4.0 * p * (1.0 - p) / (a.n_bullish + a.n_bearish) as f64)
            .sum::<f64>()
            .sqrt()
            / n;
        let target = 2.0 * p - 1.0;
        assert!((mean - target).abs() <= 3.0 * se, "{}: {mean} vs {target} (se {se})", sector.label());
    }
}

#[test]
fn fair_coin_cells_center_on_zero() {
    let spec = sector_prob_scenario(6, 40_000, &[(Sector::Technology, 0.5)]);
    let (msgs, _) = generate_messages(&spec).unwrap();
    let (cal, catalog) = (spec.calendar(), spec.catalog());
    let ctx = AggregationContext {
        catalog: &catalog,
        calendar: &cal,
        from: spec.start,
        to: spec.end,
        excluded_sectors: vec![],
    };
    for a in aggregate(&msgs, Group1Dim::AllFirms, Group2Dim::AllInvestors, &ctx) {
        let n = (a.n_bullish + a.n_bearish) as f64;
        let s = a.avg_sentiment.unwrap();
        assert!(s.abs() <= 4.0 / n.sqrt(), "{}: {s} over {n} messages", a.day);
    }
}

fn sector_key(s: Sector) -> GroupKey {
    GroupKey {
        group1: Group1::Sector(s),
        group2: Group2::AllInvestors,
    }
}

#[test]
fn common_factor_drives_disagreement_correlation() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let days: Vec<NaiveDate> = (0..80).map(|i| d(2020, 1, 1) + chrono::Days::new(i)).collect();
    let mut aggs = Vec::new();
    for day in &days {
        let factor: f64 = rng.random_range(0.05..0.95);
        for s in [Sector::Technology, Sector::Services] {
            let noise: f64 = rng.random_range(-0.02..0.02);
            let p = (factor + noise).clamp(0.0, 1.0);
            let bullish = (p * 2000.0).round() as u64;
            let c = Counts {
                bullish,
                bearish: 2000 - bullish,
            };
            aggs.push(DailyAggregate::from_counts(sector_key(s), *day, c));
        }
    }
    let opts = CorrOptions {
        days: days.clone(),
        smoothing: SmoothingConfig::default(),
        min_overlap: 10,
    };
    let state = EconomyState::new("All", *days.last().unwrap());
    let m = disagreement_corr_matrix(&aggs, CorrDimension::Sector, &state, false, &opts).unwrap();
    let r = m.get("Technology", "Services").unwrap();
    assert!(r > 0.9, "{r}");
}

#[test]
fn truncation_commutes_with_smoothing_up_to_the_cutoff() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let days: Vec<NaiveDate> = (0..60).map(|i| d(2020, 1, 1) + chrono::Days::new(i)).collect();
    let mut aggs = Vec::new();
    for day in &days {
        if rng.random_bool(0.8) {
            let bullish = rng.random_range(0..50);
            let c = Counts {
                bullish,
                bearish: 50 - bullish + 1,
            };
            aggs.push(DailyAggregate::from_counts(sector_key(Sector::Technology), *day, c));
        }
    }
    let raw = belief_core::metrics::materialize(&aggs, &days).remove(0);
    let cfg = SmoothingConfig::default();
    let cutoff = days[35];
    let (full, _) = smoothed_pair(&raw, &cfg).unwrap();
    let (cut, _) = smoothed_pair(&raw.truncate_after(cutoff), &cfg).unwrap();
    assert_eq!(full.truncate_after(cutoff).values, cut.values);
}

#[test]
fn vshape_has_three_ordered_regimes() {
    let spec = vshape_scenario();
    spec.validate().unwrap();
    assert_eq!(spec.regimes.len(), 3);
    assert!(spec.regimes.windows(2).all(|w| w[0].end < w[1].start));
    assert!(spec.regime_of(d(2020, 3, 23)).is_some());
}
