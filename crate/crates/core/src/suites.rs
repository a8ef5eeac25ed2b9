//! Property suites over generated corpora. Each returns an outcome with
//! counts; the integration tests, the acceptance target and the CLI's
//! `theorems` command share them.

use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::action::{canonical_mask, ActionType};
use crate::checker::{check_validity_with, EvalContext};
use crate::corpus::{axiom_instance, random_action, random_formula, random_model, FormulaGen, ModelGen, AXIOMS};
use crate::formula::{parse, Formula, Interval, MacroCall, MacroName};
use crate::instrumentality::Analyzer;
use crate::model::{validate, TreeModel};
use crate::sat::oracle::{covers, oracle_search, symbol_count, OracleBounds, OracleResult};
use crate::sat::{is_theorem, satisfiable, SatConfig, SatResult, TheoremResult};
use crate::signature::Signature;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub name: String,
    pub checked: usize,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
    pub elapsed: Duration,
}

impl Outcome {
    fn new(name: &str) -> Self {
        Outcome { name: name.into(), checked: 0, failures: Vec::new(), notes: Vec::new(), elapsed: Duration::ZERO }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < 20 {
            self.failures.push(msg);
        } else if self.failures.len() == 20 {
            self.failures.push("...".into());
        }
    }
}

fn models(seed: u64, count: usize, g: &ModelGen) -> Vec<TreeModel> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_model(&mut rng, g)).collect()
}

fn axiom_gen() -> FormulaGen {
    FormulaGen { agents: 2, size: 6, modal_depth: 2, ..FormulaGen::default() }
}

/// Every axiom instance is true at every moment of every generated model,
/// and validity on a model survives `[]` and `H`.
pub fn soundness(seed: u64, model_count: usize, per_axiom: usize) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("axiom soundness");
    let mut rng = StdRng::seed_from_u64(seed);
    let g = axiom_gen();
    let pool: Vec<(usize, Formula)> =
        (1..AXIOMS.len()).flat_map(|k| (0..per_axiom).map(|_| (k, axiom_instance(&mut rng, k, &g))).collect::<Vec<_>>()).collect();
    for (i, m) in models(seed, model_count, &ModelGen::default()).iter().enumerate() {
        if !validate(m).ok() {
            out.fail(format!("generated model {i} fails validation"));
            continue;
        }
        let mut ctx = EvalContext::new(m);
        for (j, (k, f)) in pool.iter().enumerate() {
            out.checked += 1;
            match check_validity_with(&mut ctx, f) {
                Ok(true) => {
                    if j % 97 == i % 97 {
                        for g in [Formula::nec(f.clone()), Formula::hist(f.clone())] {
                            if !check_validity_with(&mut ctx, &g).unwrap_or(false) {
                                out.fail(format!("rule fails on model {i}: {g}"));
                            }
                        }
                    }
                }
                Ok(false) => out.fail(format!("{} instance fails on model {i}: {f}", AXIOMS[*k])),
                Err(e) => out.fail(format!("{}: {e}", AXIOMS[*k])),
            }
        }
    }
    out.notes.push(format!("{model_count} models, {per_axiom} instances of each of A1-A14"));
    out.elapsed = start.elapsed();
    out
}

fn intervals() -> [Interval; 5] {
    [Interval::Finite(0), Interval::Finite(1), Interval::Finite(2), Interval::Finite(3), Interval::Infinite]
}

fn call(name: MacroName, a: &ActionType, goal: &Formula, n: Interval) -> Formula {
    Formula::call(MacroCall::interval(name, a.clone().bind(0), goal.clone(), n))
}

/// The implications between instrumentality notions hold at every moment of
/// every generated model.
pub fn theorem_suite(seed: u64, model_count: usize) -> Outcome {
    use MacroName::*;
    let start = Instant::now();
    let mut out = Outcome::new("instrumentality theorems");
    let pairs = [(ExInstr, ExCInstr), (Instr, CInstr), (ExCInstr, CInstr), (ExInstr, Instr), (ProdInstr, Instr)];
    let mut rng = StdRng::seed_from_u64(seed ^ 0x5151);
    let g = ModelGen { agents: 1, ..ModelGen::default() };
    for (i, m) in models(seed, model_count, &g).iter().enumerate() {
        let mut ctx = EvalContext::new(m);
        let a = random_action(&mut rng, 2, 2);
        let goal = if rng.gen_bool(0.5) { Formula::var(1) } else { parse("p1 | p2").unwrap() };
        for n in intervals() {
            for (strong, weak) in pairs {
                let f = Formula::imp(call(strong, &a, &goal, n), call(weak, &a, &goal, n));
                for w in 0..m.len() {
                    out.checked += 1;
                    match ctx.eval_extended(w, &f) {
                        Ok(true) => {}
                        Ok(false) => out.fail(format!("model {i} {}: {f}", m.id(w))),
                        Err(e) => out.fail(e.to_string()),
                    }
                }
            }
        }
    }
    out.elapsed = start.elapsed();
    out
}

/// Candidate instrumentality grows with the interval and persists into
/// every next moment.
pub fn monotonicity(seed: u64, model_count: usize) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("candidate monotonicity");
    let mut rng = StdRng::seed_from_u64(seed ^ 0x7777);
    let g = ModelGen { agents: 1, ..ModelGen::default() };
    for (i, m) in models(seed, model_count, &g).iter().enumerate() {
        let mut ctx = EvalContext::new(m);
        let a = random_action(&mut rng, 2, 2);
        let goal = Formula::var(rng.gen_range(1..=2));
        for w in 0..m.len() {
            let mut prev = false;
            for n in 0..5 {
                out.checked += 1;
                let now = ctx.eval_extended(w, &call(MacroName::CInstr, &a, &goal, Interval::Finite(n))).unwrap();
                if prev && !now {
                    out.fail(format!("model {i} {}: c-instr lost from {} to {n}", m.id(w), n - 1));
                }
                prev = now;
            }
            let inf = call(MacroName::CInstr, &a, &goal, Interval::Infinite);
            if ctx.eval_extended(w, &inf).unwrap() {
                for &c in m.children(w) {
                    out.checked += 1;
                    if !ctx.eval_extended(c, &inf).unwrap() {
                        out.fail(format!("model {i}: c-instr at {} not at {}", m.id(w), m.id(c)));
                    }
                }
            }
        }
    }
    out.elapsed = start.elapsed();
    out
}

/// The decision procedure proves axiom instances.
pub fn sat_axioms(seed: u64, per_axiom: usize) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("axiom instances are theorems");
    let mut rng = StdRng::seed_from_u64(seed);
    let g = FormulaGen { agents: 2, size: 5, modal_depth: 2, vars: 2, ..FormulaGen::default() };
    let mut unknown = 0;
    for k in 1..AXIOMS.len() {
        for _ in 0..per_axiom {
            let f = axiom_instance(&mut rng, k, &g);
            out.checked += 1;
            match is_theorem(&f, &SatConfig::default()) {
                Ok(TheoremResult::Valid { .. }) => {}
                Ok(TheoremResult::Countermodel { model, moment }) => {
                    out.fail(format!("{} instance {f} refuted at {} of a {}-moment model", AXIOMS[k], model.id(moment), model.len()))
                }
                Ok(TheoremResult::Unknown { .. }) => unknown += 1,
                Err(e) => out.fail(format!("{f}: {e}")),
            }
        }
    }
    out.notes.push(format!("{unknown} unknown"));
    out.elapsed = start.elapsed();
    out
}

#[derive(Clone, Debug, Default)]
pub struct AgreementCounts {
    pub both_sat: usize,
    pub both_unsat: usize,
    pub sat_beyond_oracle: usize,
    pub sat_unknown: usize,
}

/// Runs `satisfiable` and the brute-force oracle on random formulas over one
/// agent, two actions and two variables.
pub fn oracle_agreement(seed: u64, count: usize) -> (Outcome, AgreementCounts) {
    let start = Instant::now();
    let mut out = Outcome::new("sat/oracle agreement");
    let mut counts = AgreementCounts::default();
    let mut rng = StdRng::seed_from_u64(seed);
    let g = FormulaGen { size: 5, ..FormulaGen::default() };
    let sig = Signature::with_counts(1, 2);
    let cfg = SatConfig { signature: Some(sig.clone()), ..SatConfig::default() };
    let bounds = OracleBounds::default();
    for _ in 0..count {
        // Conjunctions keep the corpus from being almost all satisfiable.
        let parts = rng.gen_range(1..=3);
        let f = Formula::and_all((0..parts).map(|_| random_formula(&mut rng, &g)));
        out.checked += 1;
        let s = match satisfiable(&f, &cfg) {
            Ok(s) => s,
            Err(e) => {
                out.fail(format!("{f}: {e}"));
                continue;
            }
        };
        let o = match oracle_search(&f, Some(&sig), &bounds) {
            Ok(o) => o,
            Err(e) => {
                out.fail(format!("{f}: oracle {e}"));
                continue;
            }
        };
        if let OracleResult::Sat { model, moment } = &o {
            if !witness_ok(model, *moment, &f) {
                out.fail(format!("oracle witness for {f} does not verify"));
            }
        }
        match (&s, &o) {
            (SatResult::Sat { model, moment }, o) => {
                if !witness_ok(model, *moment, &f) {
                    out.fail(format!("sat witness for {f} does not verify"));
                }
                match o {
                    OracleResult::Sat { .. } => counts.both_sat += 1,
                    OracleResult::NoModelWithinBound if covers(&bounds, model, symbol_count(&f)) => {
                        out.fail(format!("{f}: sat witness lies inside the oracle's bounds but the oracle found none"))
                    }
                    OracleResult::NoModelWithinBound => counts.sat_beyond_oracle += 1,
                }
            }
            (SatResult::Unsat { .. }, OracleResult::Sat { .. }) => out.fail(format!("{f}: unsat but the oracle found a model")),
            (SatResult::Unsat { .. }, OracleResult::NoModelWithinBound) => counts.both_unsat += 1,
            (SatResult::Unknown { .. }, _) => counts.sat_unknown += 1,
        }
    }
    out.notes.push(format!(
        "{} both sat, {} both unsat, {} sat beyond oracle bounds, {} sat unknown",
        counts.both_sat, counts.both_unsat, counts.sat_beyond_oracle, counts.sat_unknown
    ));
    out.elapsed = start.elapsed();
    (out, counts)
}

fn witness_ok(model: &TreeModel, moment: usize, f: &Formula) -> bool {
    validate(model).ok() && EvalContext::new(model).eval_extended(moment, f).unwrap_or(false)
}

/// `[P]^0 p1 & ... & [P]^k p1 & ~H p1` for each `k`: satisfiable, and only
/// by a past of at least `k + 1` moments below the evaluation point.
pub fn non_compactness(max_k: usize) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("finite subsets of the non-compact set");
    let p = Formula::var(1);
    for k in 0..=max_k {
        out.checked += 1;
        let f = Formula::and(
            Formula::and_all((0..=k).map(|i| Formula::prev_n(i, p.clone()))),
            Formula::not(Formula::hist(p.clone())),
        );
        match satisfiable(&f, &SatConfig::default()) {
            Ok(SatResult::Sat { model, moment }) => {
                let chain = model.past_depth(moment) + 1;
                if !witness_ok(&model, moment, &f) {
                    out.fail(format!("k={k}: witness does not verify"));
                } else if chain < k + 2 {
                    out.fail(format!("k={k}: chain of {chain} moments"));
                } else {
                    out.notes.push(format!("k={k}: chain of {chain}"));
                }
            }
            Ok(other) => out.fail(format!("k={k}: {other}")),
            Err(e) => out.fail(format!("k={k}: {e}")),
        }
    }
    out.elapsed = start.elapsed();
    out
}

/// Printing then parsing gives back the same formula.
pub fn round_trip(seed: u64, count: usize) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("print/parse round trip");
    let mut rng = StdRng::seed_from_u64(seed);
    let g = FormulaGen { agents: 2, actions: 3, vars: 4, size: 12, macros: true, ..FormulaGen::default() };
    for _ in 0..count {
        let f = random_formula(&mut rng, &g);
        out.checked += 1;
        let text = f.to_string();
        match parse(&text) {
            Ok(back) if back == f => {}
            Ok(back) => out.fail(format!("{text} parsed as {back}")),
            Err(e) => out.fail(format!("{text}: {e}")),
        }
    }
    out.elapsed = start.elapsed();
    out
}

fn rewrite<R: Rng>(rng: &mut R, a: &ActionType) -> ActionType {
    let inner = match a {
        ActionType::Atomic(_) => a.clone(),
        ActionType::Complement(x) => ActionType::complement(rewrite(rng, x)),
        ActionType::Union(x, y) => {
            if rng.gen_bool(0.5) {
                ActionType::union(rewrite(rng, y), rewrite(rng, x))
            } else {
                ActionType::union(rewrite(rng, x), rewrite(rng, y))
            }
        }
    };
    match rng.gen_range(0..3) {
        0 => ActionType::complement(ActionType::complement(inner)),
        1 => ActionType::union(inner.clone(), inner),
        _ => inner,
    }
}

/// Equivalent action terms get identical witness sets, instrument status
/// and macro truth values.
pub fn mask_invariance(seed: u64, model_count: usize) -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("equivalent actions analyze alike");
    let mut rng = StdRng::seed_from_u64(seed ^ 0x3333);
    let g = ModelGen { agents: 1, ..ModelGen::default() };
    let goal = Formula::var(1);
    for (i, m) in models(seed, model_count, &g).iter().enumerate() {
        let a = random_action(&mut rng, 2, 3);
        let b = rewrite(&mut rng, &a);
        if canonical_mask(&a.clone().bind(0), 2) != canonical_mask(&b.clone().bind(0), 2) {
            out.fail(format!("rewrite changed the mask of {a}"));
            continue;
        }
        let mut ctx = EvalContext::new(m);
        for w in 0..m.len() {
            out.checked += 1;
            let (sa, sb, ia, ib) = {
                let an = Analyzer::new(&mut ctx, w, 0, &goal, None).unwrap();
                let (ma, mb) = (an.mask_of(&a).unwrap(), an.mask_of(&b).unwrap());
                (an.witness_sets(ma), an.witness_sets(mb), an.is_excellent(ma), an.is_excellent(mb))
            };
            if sa.achievements != sb.achievements || sa.failures != sb.failures || ia != ib {
                out.fail(format!("model {i} {}: {a} and {b} differ", m.id(w)));
            }
            for name in [MacroName::Instr, MacroName::ExInstr, MacroName::CInstr] {
                let x = ctx.eval_extended(w, &call(name, &a, &goal, Interval::Finite(2))).unwrap();
                let y = ctx.eval_extended(w, &call(name, &b, &goal, Interval::Finite(2))).unwrap();
                if x != y {
                    out.fail(format!("model {i} {}: {} differs for {a} and {b}", m.id(w), name.name()));
                }
            }
        }
    }
    out.elapsed = start.elapsed();
    out
}

/// `ex-instr(d1@a1, p1, 1) -> [A](t(d1@a1) -> p1)` is refuted by a verified
/// countermodel from the decision procedure.
pub fn non_theorem() -> Outcome {
    let start = Instant::now();
    let mut out = Outcome::new("expected instruments need not guarantee");
    let d = ActionType::atomic(0).bind(0);
    let goal = Formula::var(1);
    let call = MacroCall::interval(MacroName::ExInstr, d.clone(), goal.clone(), Interval::Finite(1));
    let claim = Formula::imp(Formula::call(call), Formula::actual(Formula::imp(crate::action::translate(&d), goal)));
    out.checked = 1;
    match is_theorem(&claim, &SatConfig::default()) {
        Ok(TheoremResult::Countermodel { model, moment }) => {
            let refuted = validate(&model).ok() && !EvalContext::new(&model).eval_extended(moment, &claim).unwrap_or(true);
            if refuted {
                out.notes.push(format!("countermodel with {} moments", model.len()));
            } else {
                out.fail("countermodel does not verify".into());
            }
        }
        Ok(other) => out.fail(format!("no countermodel: {other:?}")),
        Err(e) => out.fail(e.to_string()),
    }
    out.elapsed = start.elapsed();
    out
}
