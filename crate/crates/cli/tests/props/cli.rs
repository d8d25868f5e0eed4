use std::process::Command;

use pmcal::io::{self, Severity};
use pmcal::timeseries::IntervalMask;
use proptest::prelude::*;

use super::gen::{grid, rows, series, series_from, BASE};
use super::{check, Property};

pub const PROPERTIES: &[(&str, Property)] = &[
    ("series_csv_fixed_point", series_csv_fixed_point),
    ("label_and_mask_csv_fixed_point", label_and_mask_csv_fixed_point),
    ("ingest_exit_status_tracks_errors", ingest_exit_status_tracks_errors),
];

fn series_csv_fixed_point() -> Result<(), String> {
    check(series(false, 60), |s| {
        let text = io::series_to_csv(&s);
        let once = io::read_series::<f64, _>(text.as_bytes(), s.device_id(), Some(s.interval())).unwrap();
        prop_assert!(!once.has_errors(), "{:?}", once.diagnostics);
        prop_assert_eq!(&once.series, &s);
        let again = io::series_to_csv(&once.series);
        prop_assert_eq!(&again, &text);
        let twice = io::read_series::<f64, _>(again.as_bytes(), s.device_id(), Some(s.interval())).unwrap();
        prop_assert_eq!(twice, once);
        Ok(())
    })
}

fn label_and_mask_csv_fixed_point() -> Result<(), String> {
    let labels = prop::collection::btree_set(-1_000_000i64..1_000_000, 0..50);
    let windows = prop::collection::vec((-1_000_000i64..1_000_000, 1i64..10_000), 0..10);
    check((labels, windows), |(labels, windows)| {
        let labels: Vec<i64> = labels.into_iter().map(|t| BASE + t).collect();
        let text = io::labels_to_csv(&labels);
        let back = io::read_labels(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &labels);
        prop_assert_eq!(io::labels_to_csv(&back), text);

        let mask = IntervalMask::new(windows.into_iter().map(|(a, len)| (BASE + a, BASE + a + len))).unwrap();
        let text = io::mask_to_csv(&mask);
        let back = io::read_mask(text.as_bytes()).unwrap();
        prop_assert_eq!(&back, &mask);
        prop_assert_eq!(io::mask_to_csv(&back), text);
        Ok(())
    })
}

/// Lines that can never parse as a data row.
const MALFORMED: [&str; 5] = [
    "not,a,row",
    "2021-13-45T00:00:00Z,1,2,3,4,5",
    "2021-03-01T00:00:00Z,abc,2,3,4,5",
    "2021-03-01T00:00:00Z,1,2,3,4,5,6,7,8",
    "\"unterminated",
];

fn ingest_exit_status_tracks_errors() -> Result<(), String> {
    let strategy = (
        grid(),
        rows(false, 20),
        prop::collection::vec(
            (any::<prop::sample::Index>(), prop::sample::select(MALFORMED.to_vec())),
            0..3,
        ),
        prop::bool::weighted(0.1),
    );
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    check(strategy, |((interval, t0), rows, bad, bad_header)| {
        let s = series_from("unit", interval, t0, &rows);
        let mut lines: Vec<String> = io::series_to_csv(&s).lines().map(str::to_string).collect();
        for (at, line) in &bad {
            let i = 1 + at.index(lines.len());
            lines.insert(i, line.to_string());
        }
        if bad_header {
            lines[0] = "time,pm1,pm25,pm10,temp,rh".into();
        }
        let path = dir.path().join("unit.csv");
        std::fs::write(&path, lines.join("\n") + "\n").unwrap();

        let expect_error = bad_header || !bad.is_empty();
        // Cross-check the expectation against the parser's own diagnostics.
        let parsed = io::read_series::<f64, _>(std::fs::File::open(&path).unwrap(), "unit", Some(interval));
        let constructed = match &parsed {
            Ok(p) => p.diagnostics.iter().any(|d| d.severity == Severity::Error),
            Err(_) => true,
        };
        prop_assert_eq!(constructed, expect_error);

        let status = Command::new(env!("CARGO_BIN_EXE_pmcal"))
            .args(["ingest", "--interval", &interval.to_string()])
            .arg(&path)
            .output()
            .unwrap()
            .status;
        prop_assert_eq!(!status.success(), expect_error, "status {:?}", status);
        Ok(())
    })
}
