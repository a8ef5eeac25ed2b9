use num_rational::Ratio;
use tlae::action::ActionType;
use tlae::checker::EvalContext;
use tlae::fixtures::load;
use tlae::formula::{expand, parse, Interval, MacroCall, MacroName};
use tlae::instrumentality::{analyze, instruments, success_ratio, witness_sets, AnalysisOptions, SuccessRatio};

fn holds(fixture: &str, moment: &str, text: &str) -> bool {
    let m = load(fixture).unwrap();
    let mut ctx = EvalContext::new(&m);
    let w = m.index_of(moment).unwrap();
    ctx.eval_extended(w, &parse(text).unwrap()).unwrap()
}

#[test]
fn figure_one_types() {
    assert!(holds("fig1_produce", "w0", "prod(d1@a1, p1)"));
    assert!(holds("fig1_destroy", "w0", "destr(d1@a1, p1)"));
    assert!(holds("fig1_suppress", "w0", "supp(d1@a1, p1)"));
    assert!(holds("fig1_preserve", "w0", "pres(d1@a1, p1)"));
    assert!(!holds("fig1_produce", "w0", "pres(d1@a1, p1)"));
    assert!(!holds("fig1_destroy", "w0", "supp(d1@a1, p1)"));
}

#[test]
fn figure_two_and_three() {
    let m = load("fig2").unwrap();
    let would = expand(&MacroCall::bound(MacroName::Would, ActionType::atomic(0).bind(0), parse("p1").unwrap()), 1).unwrap();
    assert!(EvalContext::new(&m).eval_at("w0", &would).unwrap());
    assert!(holds("fig3", "w4", "would-ex(d1@a1, p1)"));
    assert!(!holds("fig3", "w4", "[A](dw1@a1 -> p1)"));
    assert!(holds("fig3", "w4", "ex-c-instr(d1@a1, p1, 4)"));
}

#[test]
fn figure_four_witnesses() {
    let m = load("fig4").unwrap();
    let w6 = m.index_of("w6").unwrap();
    assert_eq!(m.ancestors(w6).iter().map(|&a| m.id(a)).collect::<Vec<_>>(), ["w5", "w3", "w2", "w1", "w0"]);
    let mut ctx = EvalContext::new(&m);
    let g = parse("p1").unwrap();
    let delta = ActionType::atomic(0);
    let gamma = ActionType::atomic(1);
    let theta = ActionType::union(delta.clone(), gamma.clone());
    let wg = witness_sets(&mut ctx, w6, 0, &g, &gamma, None).unwrap();
    assert_eq!(wg.achievements, ["w2", "w5"]);
    assert!(wg.failures.is_empty());
    let wd = witness_sets(&mut ctx, w6, 0, &g, &delta, None).unwrap();
    assert_eq!(wd.achievements, ["w1", "w2"]);
    assert_eq!(wd.failures, ["w6"]);
    assert_eq!(success_ratio(&mut ctx, w6, 0, &g, &gamma, None).unwrap(), SuccessRatio::new(1, 1));
    assert_eq!(success_ratio(&mut ctx, w6, 0, &g, &delta, None).unwrap(), SuccessRatio::new(2, 3));
    assert_eq!(success_ratio(&mut ctx, w6, 0, &g, &theta, None).unwrap(), SuccessRatio::new(3, 4));
    let found = instruments(&mut ctx, w6, 0, &g, None).unwrap();
    for t in [&delta, &gamma, &theta] {
        assert!(found.contains(t), "{t}");
        let call = MacroCall::interval(MacroName::Instr, t.clone().bind(0), g.clone(), Interval::Infinite);
        assert!(ctx.eval_macro(w6, &call).unwrap());
    }
}

#[test]
fn figure_four_thresholds() {
    let m = load("fig4").unwrap();
    let w6 = m.index_of("w6").unwrap();
    let g = parse("p1").unwrap();
    let named = |list: &[&str], min: Option<usize>, ratio: Option<Ratio<u64>>| {
        let candidates = Some(list.iter().map(|s| tlae::formula::parse_action(s).unwrap()).collect());
        analyze(&m, w6, 0, &g, &AnalysisOptions { candidates, witness_min: min, ratio_min: ratio, interval: None }).unwrap()
    };
    let r = named(&["d1", "d2"], Some(2), None);
    assert_eq!(r.best, ["d2@a1"]);
    assert_eq!(r.worst, ["d1@a1"]);
    let r = named(&["d1", "d2"], Some(3), None);
    assert_eq!(r.best, ["d1@a1"]);
    let r = named(&["d1", "d2", "d1 | d2"], Some(3), None);
    assert_eq!(r.best, ["(d1 | d2)@a1"]);
    assert_eq!(r.worst, ["d1@a1"]);
    let r = named(&["d1", "d2"], None, Some(Ratio::new(3, 4)));
    assert_eq!(r.good.unwrap(), ["d2@a1"]);
    let r = named(&["d1", "d2"], Some(3), Some(Ratio::new(3, 4)));
    assert!(r.good.unwrap().is_empty());
}

#[test]
fn defeasibility_fixtures() {
    assert!(holds("defeasible_interval", "w", "ex-instr(d1@a1, p1, 2)"));
    assert!(!holds("defeasible_interval", "w", "ex-instr(d1@a1, p1, 3)"));
    assert!(holds("fig3", "w4", "ex-instr(d1@a1, p1, inf)"));
    assert!(!holds("fig3", "w7", "ex-instr(d1@a1, p1, inf)"));
    assert!(holds("fig3", "w4", "ex-instr(d1@a1, p1, 4) & ~[A](dw1@a1 -> p1)"));
}

#[test]
fn unit_ratio_without_excellence() {
    let m = load("sigma_one_not_excellent").unwrap();
    let w = m.index_of("w").unwrap();
    let mut ctx = EvalContext::new(&m);
    let g = parse("p1").unwrap();
    assert!(success_ratio(&mut ctx, w, 0, &g, &ActionType::atomic(0), None).unwrap().is_one());
    assert!(!holds("sigma_one_not_excellent", "w", "ex-instr(d1@a1, p1, inf)"));
    let r = analyze(&m, w, 0, &g, &AnalysisOptions::default()).unwrap();
    let d = r.diagnostics.iter().find(|d| d.claim == "ratio 1 implies excellent instrument").unwrap();
    assert!(!d.holds);
}
