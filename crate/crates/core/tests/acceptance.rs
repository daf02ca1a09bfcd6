use geoproj::acceptance;

#[test]
fn acceptance_suite() {
    let seed = std::env::var("GEOPROJ_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0);
    let report = acceptance::run(seed, |r| println!("{}", r.line()));
    for c in &report.controls {
        println!("{}", c.line());
    }
    for c in report.criteria.iter().filter(|c| !c.pass) {
        println!("FAILED {}: {}", c.id, c.detail);
    }
    for c in report.controls.iter().filter(|c| !c.failed_as_expected) {
        println!("CONTROL {}: {}", c.name, c.detail);
    }
    assert!(report.pass);
}
