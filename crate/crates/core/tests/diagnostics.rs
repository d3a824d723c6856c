use aadp_core::diagnostics::{bound_reports_csv, default_bound_config, random_bound_reports};

#[test]
fn bound_report_on_twenty_instances_is_finite() {
    let cfg = default_bound_config(6, 3);
    let reports = random_bound_reports(20, 6, 0.9, &cfg, 3).unwrap();
    assert_eq!(reports.len(), 20);
    for r in &reports {
        assert!(r.lhs.is_finite() && r.rhs.is_finite(), "{r:?}");
        assert!(r.lhs >= 0.0 && r.rhs >= 0.0);
        assert_eq!(r.holds, r.lhs <= r.rhs);
    }
    let csv = bound_reports_csv(&reports);
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn bound_reports_are_deterministic() {
    let cfg = default_bound_config(5, 1);
    let a = bound_reports_csv(&random_bound_reports(6, 5, 0.5, &cfg, 9).unwrap());
    let b = bound_reports_csv(&random_bound_reports(6, 5, 0.5, &cfg, 9).unwrap());
    assert_eq!(a, b);
}
