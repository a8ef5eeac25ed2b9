use tlae::suites::{mask_invariance, monotonicity, round_trip, soundness, theorem_suite, Outcome};

fn assert_passed(o: Outcome) {
    assert!(o.passed(), "{}: {:?}", o.name, o.failures);
    assert!(o.checked > 0);
}

#[test]
fn axioms_hold_on_generated_models() {
    let o = soundness(11, 1000, 50);
    assert_eq!(o.checked, 1000 * 14 * 50);
    assert_passed(o);
}

#[test]
fn instrumentality_implications() {
    assert_passed(theorem_suite(12, 300));
}

#[test]
fn candidates_are_monotone() {
    assert_passed(monotonicity(13, 300));
}

#[test]
fn print_parse_round_trip() {
    assert_passed(round_trip(14, 10_000));
}

#[test]
fn equivalent_actions() {
    assert_passed(mask_invariance(15, 300));
}
