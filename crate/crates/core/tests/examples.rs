use klsc::curvature::curvature_sweep;
use klsc::io::{curvature_csv, metric_from_json, metric_to_json, pair_from_json, pair_to_json, parse_curvature_csv};
use klsc::klsc::{build_klsc_metric, check_admissible};
use klsc::suite::{examples_suite, report_json, report_text, Example};

#[test]
fn every_example_passes() {
    let reports = examples_suite();
    assert_eq!(reports.len(), Example::ALL.len());
    for r in &reports {
        assert!(r.passed(), "{}", report_text(std::slice::from_ref(r)));
    }
    let text = report_text(&reports);
    assert!(!text.contains("[FAIL]"));
}

#[test]
fn reports_are_deterministic() {
    let a = report_json(&examples_suite()).to_string();
    let b = report_json(&examples_suite()).to_string();
    assert_eq!(a, b);
}

#[test]
fn pair_file_round_trip_builds_same_metric() {
    let v: serde_json::Value =
        serde_json::from_str(r#"{"n":2,"F":"z + z^2","C":0,"annulus":[0,"inf"],"basepoint":"canonical"}"#).unwrap();
    let pair = pair_from_json(&v).unwrap();
    let again = pair_from_json(&pair_to_json(&pair)).unwrap();
    assert!(check_admissible(&again).unwrap().is_admissible());
    let (a, b) = (build_klsc_metric(&pair).unwrap(), build_klsc_metric(&again).unwrap());
    for z in [0.01, 1.0, 50.0] {
        assert_eq!(a.metric.e().eval(z).unwrap(), b.metric.e().eval(z).unwrap());
    }
}

#[test]
fn sweep_csv_round_trip() {
    let v: serde_json::Value =
        serde_json::from_str(r#"{"n":3,"annulus":[0.5,4],"E":"1/(1+z)^2","F":"1/(1+z)"}"#).unwrap();
    let m = metric_from_json(&v).unwrap();
    let printed = metric_to_json(&m);
    assert_eq!(metric_to_json(&metric_from_json(&printed).unwrap()), printed);
    let rows = curvature_sweep(&m, &m.domain().grid(20)).unwrap();
    let text = curvature_csv(&rows);
    assert_eq!(parse_curvature_csv(&text).unwrap(), rows);
    for r in rows {
        assert!((r.s_c - 12.0).abs() < 1e-10 && (r.s - 24.0).abs() < 1e-9);
    }
}
