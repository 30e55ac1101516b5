//! Export artifacts: lossless CSV/JSON round trips and deterministic,
//! data-carrying SVG plots.

use serde::{Deserialize, Serialize};
use vortexspec::export::{
    export_csv, export_json, export_plot, read_csv, PlotStyle, Series,
};
use vortexspec::vortex::{solve_vortex, SpinIndex};

#[test]
fn csv_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let rows = vec![
        vec![1.0 / 3.0, -25.798025438, 1e-300],
        vec![f64::MIN_POSITIVE, 6.02214076e23, -0.0],
    ];
    export_csv(&path, &["a", "b", "c"], &rows).unwrap();
    let (headers, parsed) = read_csv(&path).unwrap();
    assert_eq!(headers, ["a", "b", "c"]);
    for (row, orig) in parsed.iter().zip(&rows) {
        for (x, y) in row.iter().zip(orig) {
            assert_eq!(x.to_bits(), y.to_bits(), "{x} vs {y}");
        }
    }
}

#[test]
fn csv_rejects_ragged_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    assert!(export_csv(&path, &["a", "b"], &[vec![1.0]]).is_err());
}

#[test]
fn json_round_trip() {
    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Payload {
        v1: f64,
        v2: f64,
        names: Vec<String>,
    }
    let value = Payload {
        v1: -0.48237019 * std::f64::consts::TAU,
        v2: 1e-17,
        names: vec!["k".into()],
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    export_json(&path, &value).unwrap();
    let back: Payload =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, value);
}

fn style() -> PlotStyle {
    PlotStyle {
        title: "t".into(),
        x_label: "x".into(),
        y_label: "y".into(),
    }
}

#[test]
fn single_point_series_becomes_a_marker() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.svg");
    export_plot(
        &path,
        &style(),
        &[Series {
            name: "pt".into(),
            points: vec![(1.0, 2.0)],
        }],
    )
    .unwrap();
    let svg = std::fs::read_to_string(&path).unwrap();
    assert_eq!(svg.matches("<circle").count(), 1);
    assert_eq!(svg.matches("<polyline").count(), 0);
}

#[test]
fn plots_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let series = [Series {
        name: "s".into(),
        points: (0..100).map(|k| (k as f64, (k as f64).sin())).collect(),
    }];
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    export_plot(&a, &style(), &series).unwrap();
    export_plot(&b, &style(), &series).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn embedded_data_block_carries_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.svg");
    let series = [
        Series {
            name: "one".into(),
            points: vec![(0.0, 1.0), (1.0, 2.0)],
        },
        Series {
            name: "two".into(),
            points: vec![(0.0, -1.0)],
        },
    ];
    export_plot(&path, &style(), &series).unwrap();
    let svg = std::fs::read_to_string(&path).unwrap();
    let data = svg
        .split("<!-- data\n")
        .nth(1)
        .and_then(|s| s.split("-->").next())
        .unwrap();
    assert_eq!(data.lines().count(), 1 + 3, "header plus one row per point");
}

#[test]
fn empty_series_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.svg");
    assert!(export_plot(&path, &style(), &[]).is_err());
    assert!(export_plot(
        &path,
        &style(),
        &[Series {
            name: "s".into(),
            points: vec![],
        }]
    )
    .is_err());
}

#[test]
fn overlaid_vortex_profiles_have_ordered_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("vortices.svg");
    let mut series = Vec::new();
    let mut peak_locations = Vec::new();
    for m in 0..=3u32 {
        let profile = solve_vortex(SpinIndex(m), 50.0, 1e-10).unwrap();
        let sol = profile.solution();
        let points: Vec<(f64, f64)> = (0..sol.mesh().len())
            .map(|k| (sol.mesh()[k], profile.physical(sol.mesh()[k]).unwrap()))
            .collect();
        peak_locations.push(profile.peak().0);
        // the tail is monotone decreasing past the peak
        let peak_idx = points
            .iter()
            .enumerate()
            .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .unwrap()
            .0;
        for w in points[peak_idx..].windows(2) {
            assert!(w[1].1 <= w[0].1 + 1e-12, "m={m}: tail not monotone");
        }
        series.push(Series {
            name: format!("m={m}"),
            points,
        });
    }
    for w in peak_locations.windows(2) {
        assert!(w[0] < w[1], "peaks not ordered by m: {peak_locations:?}");
    }
    export_plot(&path, &style(), &series).unwrap();
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("<svg"));
}
