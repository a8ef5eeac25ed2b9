//! One line per acceptance criterion. The process fails only when a
//! criterion fails for a reason not listed in `EXPECTED`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use tlae::action::ActionType;
use tlae::checker::EvalContext;
use tlae::fixtures::load;
use tlae::formula::{expand, parse, parse_action, Formula, MacroCall, MacroName};
use tlae::instrumentality::{analyze, success_ratio, witness_sets, AnalysisOptions, SuccessRatio};
use tlae::suites::{mask_invariance, monotonicity, non_theorem, non_compactness, oracle_agreement, round_trip, soundness, theorem_suite, Outcome};

/// Sub-claims that cannot hold on the fixture as the figure specifies it.
const EXPECTED: &[&str] = &["Delta not in Worst at 3 with Theta"];

struct Line {
    failed: Vec<String>,
    notes: Vec<String>,
}

impl Line {
    fn new() -> Self {
        Line { failed: Vec::new(), notes: Vec::new() }
    }

    fn claim(&mut self, name: &str, ok: bool) {
        if !ok {
            self.failed.push(name.to_string());
        }
    }

    fn outcome(&mut self, o: &Outcome) {
        if !o.passed() {
            self.failed.push(format!("{}: {}", o.name, o.failures.first().cloned().unwrap_or_default()));
        }
        self.notes.push(format!("{} {} checks{}", o.name, o.checked, o.notes.iter().map(|n| format!(", {n}")).collect::<String>()));
    }

    fn time(&mut self, elapsed: Duration, limit: Duration) {
        self.notes.push(format!("{:.2}s", elapsed.as_secs_f64()));
        if elapsed > limit {
            self.failed.push(format!("took {:.2}s, limit {}s", elapsed.as_secs_f64(), limit.as_secs()));
        }
    }
}

fn holds(fixture: &str, moment: &str, text: &str) -> bool {
    let m = load(fixture).unwrap();
    let w = m.index_of(moment).unwrap();
    EvalContext::new(&m).eval_extended(w, &parse(text).unwrap()).unwrap()
}

fn figure_four() -> Line {
    let start = Instant::now();
    let mut l = Line::new();
    let m = load("fig4").unwrap();
    let w6 = m.index_of("w6").unwrap();
    let g = Formula::var(1);
    let mut ctx = EvalContext::new(&m);
    let (delta, gamma) = (ActionType::atomic(0), ActionType::atomic(1));
    l.claim("sigma(Gamma) = 1", success_ratio(&mut ctx, w6, 0, &g, &gamma, None).unwrap() == SuccessRatio::new(1, 1));
    l.claim("sigma(Delta) = 2/3", success_ratio(&mut ctx, w6, 0, &g, &delta, None).unwrap() == SuccessRatio::new(2, 3));
    let wg = witness_sets(&mut ctx, w6, 0, &g, &gamma, None).unwrap();
    let wd = witness_sets(&mut ctx, w6, 0, &g, &delta, None).unwrap();
    l.claim("Achieve(Gamma) = {w2, w5}", wg.achievements == ["w2", "w5"]);
    l.claim("Achieve(Delta) = {w1, w2}", wd.achievements == ["w1", "w2"]);
    l.claim("Fail(Delta) = {w6}", wd.failures == ["w6"]);
    let run = |names: &[&str], min: Option<usize>, ratio: Option<Ratio<u64>>| {
        let candidates = Some(names.iter().map(|s| parse_action(s).unwrap()).collect());
        analyze(&m, w6, 0, &g, &AnalysisOptions { candidates, witness_min: min, ratio_min: ratio, interval: None }).unwrap()
    };
    let two = run(&["d1", "d2"], Some(2), None);
    l.claim("Gamma in Best at 2", two.best.iter().any(|b| b == "d2@a1"));
    l.claim("Delta in Worst at 2", two.worst.iter().any(|b| b == "d1@a1"));
    let three = run(&["d1", "d2"], Some(3), None);
    l.claim("Delta in Best at 3", three.best.iter().any(|b| b == "d1@a1"));
    let with_theta = run(&["d1", "d2", "d1 | d2"], Some(3), None);
    l.claim("Delta not in Worst at 3 with Theta", !with_theta.worst.iter().any(|b| b == "d1@a1"));
    l.notes.push(format!("with Theta at 3: Best {:?}, Worst {:?}", with_theta.best, with_theta.worst));
    let good = run(&["d1", "d2"], None, Some(Ratio::new(3, 4)));
    l.claim("Good at 3/4 = {Gamma}", good.good.as_deref() == Some(&["d2@a1".to_string()][..]));
    let good3 = run(&["d1", "d2"], Some(3), Some(Ratio::new(3, 4)));
    l.claim("Good at 3/4 with 3 witnesses is empty", good3.good.as_ref().is_some_and(|g| g.is_empty()));
    l.time(start.elapsed(), Duration::from_secs(1));
    l
}

fn figures_one_to_three() -> Line {
    let mut l = Line::new();
    for (fixture, name) in [("fig1_produce", "prod"), ("fig1_destroy", "destr"), ("fig1_suppress", "supp"), ("fig1_preserve", "pres")] {
        l.claim(&format!("{name} at {fixture} w0"), holds(fixture, "w0", &format!("{name}(d1@a1, p1)")));
    }
    let fig2 = load("fig2").unwrap();
    let would = expand(&MacroCall::bound(MacroName::Would, ActionType::atomic(0).bind(0), Formula::var(1)), 1).unwrap();
    l.claim("would at fig2 w0", EvalContext::new(&fig2).eval_at("w0", &would).unwrap());
    l.claim("would-ex at fig3 w4", holds("fig3", "w4", "would-ex(d1@a1, p1)"));
    l.claim("[A](t(d1) -> p1) false at fig3 w4", !holds("fig3", "w4", "[A](dw1@a1 -> p1)"));
    l
}

fn theorems() -> Line {
    let mut l = Line::new();
    l.outcome(&theorem_suite(31, 300));
    l.outcome(&non_theorem());
    l.claim("fixture countermodel to the non-theorem", holds("fig3", "w4", "ex-instr(d1@a1, p1, 4) & ~[A](dw1@a1 -> p1)"));
    l
}

fn defeasibility() -> Line {
    let mut l = Line::new();
    l.outcome(&monotonicity(41, 300));
    l.claim("ex-instr at interval 2", holds("defeasible_interval", "w", "ex-instr(d1@a1, p1, 2)"));
    l.claim("no ex-instr at interval 3", !holds("defeasible_interval", "w", "ex-instr(d1@a1, p1, 3)"));
    l.claim("ex-instr at fig3 w4", holds("fig3", "w4", "ex-instr(d1@a1, p1, inf)"));
    l.claim("no ex-instr later at fig3 w7", !holds("fig3", "w7", "ex-instr(d1@a1, p1, inf)"));
    l
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Box<dyn Fn() -> Line>)> = vec![
        ("Figure-4 reproduction", Box::new(figure_four)),
        ("Figure-1/2/3 checks", Box::new(figures_one_to_three)),
        (
            "axiom soundness",
            Box::new(|| {
                let mut l = Line::new();
                let o = soundness(21, 1000, 50);
                l.outcome(&o);
                l.time(o.elapsed, Duration::from_secs(60));
                l
            }),
        ),
        ("theorem suite and non-theorem", Box::new(theorems)),
        ("monotonicity and defeasibility", Box::new(defeasibility)),
        (
            "sat/oracle agreement",
            Box::new(|| {
                let mut l = Line::new();
                let start = Instant::now();
                let (o, _) = oracle_agreement(61, 500);
                l.outcome(&o);
                l.time(start.elapsed(), Duration::from_secs(300));
                l
            }),
        ),
        (
            "non-compactness",
            Box::new(|| {
                let mut l = Line::new();
                l.outcome(&non_compactness(5));
                l
            }),
        ),
        (
            "round trip and mask invariance",
            Box::new(|| {
                let mut l = Line::new();
                l.outcome(&round_trip(81, 10_000));
                l.outcome(&mask_invariance(82, 300));
                l
            }),
        ),
    ];
    let mut unexpected = false;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let line = run();
        let status = if line.failed.is_empty() { "PASS" } else { "FAIL" };
        let mut text = format!("criterion {} {name}: {status}", i + 1);
        if !line.failed.is_empty() {
            text += &format!(" [failed: {}]", line.failed.join("; "));
            if line.failed.iter().any(|f| !EXPECTED.contains(&f.as_str())) {
                unexpected = true;
            } else {
                text += " (known unattainable, see README)";
            }
        }
        if !line.notes.is_empty() {
            text += &format!(" ({})", line.notes.join("; "));
        }
        println!("{text}");
    }
    if unexpected {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
