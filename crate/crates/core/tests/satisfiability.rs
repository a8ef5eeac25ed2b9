use tlae::action::ActionType;
use tlae::checker::EvalContext;
use tlae::formula::{expand, parse, Formula, Interval, MacroCall, MacroName};
use tlae::model::validate;
use tlae::sat::oracle::{oracle_search, OracleBounds, OracleResult};
use tlae::sat::{is_theorem, satisfiable, SatConfig, SatResult, TheoremResult};
use tlae::suites::{non_compactness, oracle_agreement, sat_axioms};

#[test]
fn axiom_instances_are_valid() {
    let o = sat_axioms(21, 50);
    assert!(o.passed(), "{:?}", o.failures);
}

#[test]
fn agrees_with_oracle() {
    let (o, counts) = oracle_agreement(22, 500);
    assert!(o.passed(), "{:?}", o.failures);
    assert!(counts.both_unsat > 0 && counts.both_sat > 0);
}

#[test]
fn finite_subsets_have_models() {
    let o = non_compactness(5);
    assert!(o.passed(), "{:?}", o.failures);
}

#[test]
fn expected_instrument_need_not_guarantee() {
    let d = ActionType::atomic(0).bind(0);
    let goal = Formula::var(1);
    let ex = expand(&MacroCall::interval(MacroName::ExInstr, d.clone(), goal.clone(), Interval::Finite(1)), 1).unwrap();
    let claim = Formula::imp(ex, Formula::actual(Formula::imp(tlae::action::translate(&d), goal)));
    match is_theorem(&claim, &SatConfig::default()).unwrap() {
        TheoremResult::Countermodel { model, moment } => {
            assert!(validate(&model).ok());
            assert!(!EvalContext::new(&model).eval(moment, &claim).unwrap());
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn oracle_examples() {
    let b = OracleBounds::default();
    let phi = parse("<>p1").unwrap();
    match oracle_search(&phi, None, &b).unwrap() {
        OracleResult::Sat { model, moment } => {
            assert!(validate(&model).ok());
            assert!(EvalContext::new(&model).eval(moment, &phi).unwrap());
            assert_eq!(model.len(), 2);
        }
        other => panic!("{other:?}"),
    }
    for depth in 0..=3 {
        let b = OracleBounds { depth, ..b };
        assert!(matches!(oracle_search(&parse("<P>p1 & H~p1").unwrap(), None, &b).unwrap(), OracleResult::NoModelWithinBound));
    }
}

#[test]
fn witnesses_for_expectations() {
    match satisfiable(&parse("<>e@a1").unwrap(), &SatConfig::default()).unwrap() {
        SatResult::Sat { model, moment } => {
            let kids = model.children(moment);
            assert!(kids.iter().any(|&c| model.expected(c, 0)) && kids.iter().any(|&c| !model.expected(c, 0)));
        }
        other => panic!("{other}"),
    }
    assert!(satisfiable(&parse("p1 & ~p1").unwrap(), &SatConfig::default()).unwrap().is_unsat());
    let a9 = parse("H p1 <-> ([P]p1 & [P]H p1)").unwrap();
    assert!(matches!(is_theorem(&a9, &SatConfig::default()).unwrap(), TheoremResult::Valid { .. }));
}

#[test]
fn depth_bound_gives_unknown() {
    let f = parse("<P><P><P>p1").unwrap();
    assert!(satisfiable(&f, &SatConfig::default()).unwrap().is_sat());
    let cfg = SatConfig { bound_depth: 2, ..SatConfig::default() };
    assert!(matches!(satisfiable(&f, &cfg).unwrap(), SatResult::Unknown { .. }));
}
