use isosym::inequalities::Verdict;
use isosym::suite::{run_builtin, SuiteConfig};

#[test]
fn realized_constants_stable_under_doubling() {
    let base = SuiteConfig {
        rs: vec![1.5],
        dims: vec![2],
        ..SuiteConfig::default()
    };
    let small = run_builtin(&base).unwrap();
    let large = run_builtin(&SuiteConfig {
        points: 200_000,
        ..base.clone()
    })
    .unwrap();
    assert_eq!(small.len(), large.len());
    let mut compared = 0;
    for (a, b) in small.iter().zip(&large) {
        assert_eq!((&a.name, &a.function), (&b.name, &b.function));
        if a.divergent || b.divergent || a.verdict == Verdict::Skipped {
            continue;
        }
        if let (Some(x), Some(y)) = (a.realized_constant, b.realized_constant) {
            if !(x.is_finite() && y.is_finite()) || x.abs() < 1e-12 {
                continue;
            }
            compared += 1;
            assert!(
                (y / x - 1.0).abs() < 0.05,
                "{} on {}: {x} -> {y}",
                a.name,
                a.function
            );
        }
    }
    assert!(compared > 20, "{compared}");
}
