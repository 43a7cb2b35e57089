use imexrelax_web::*;

#[test]
fn channel_settles() {
    let p = r13_channel(50, 1e-4, 1.0, 0.7, 0.3, 2.5, 10.0).ok().unwrap();
    assert_eq!(p.steps(), 100);
    assert!(*p.distances().last().unwrap() < 1e-3);
    assert_eq!(p.x().len(), p.numeric(0).len());
}

#[test]
fn penalization_keeps_heat_errors_small() {
    let pen = heat_errors(64, 1e-6, 0.25, 1.0, true).ok().unwrap();
    let raw = heat_errors(64, 1e-6, 0.25, 1.0, false).ok().unwrap();
    assert!(pen[pen.len() - 1] < 1e-2);
    assert!(raw[raw.len() - 1] > 1.0);
}

#[test]
fn builtin_round_trip_checks_clean() {
    let registry = imexrelax::tableau::Registry::builtin();
    assert_eq!(builtin_schemes().len(), registry.entries.len());
    for e in registry.entries.iter().filter(|e| e.tableau.is_some()) {
        let report = check_tableau(&builtin_scheme_text(&e.name).ok().unwrap());
        assert!(report.contains("structure: ok"), "{report}");
    }
    assert!(check_tableau("garbage").starts_with("error"));
}
