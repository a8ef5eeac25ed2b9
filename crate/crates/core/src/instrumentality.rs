use std::collections::BTreeMap;
use std::fmt::{self, Write};

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::action::{enumerate_classes, representative, type_mask, ActionError, ActionType, DEFAULT_CLASS_CAP};
use crate::checker::{CheckError, EvalContext};
use crate::formula::{Formula, Interval, MacroCall, MacroName};
use crate::model::TreeModel;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InstrError {
    #[error(transparent)]
    Check(#[from] CheckError),
    #[error(transparent)]
    Action(#[from] ActionError),
    #[error("agent index a{index} outside 1..{count}")]
    UnknownAgent { index: usize, count: usize },
    #[error("{0} has no achievement or failure witnesses, so it has no success ratio")]
    NotAnInstrument(String),
    #[error("ratio threshold {0} outside [0, 1]")]
    RatioOutOfRange(String),
}

/// Exact success ratio.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SuccessRatio(pub Ratio<u64>);

impl SuccessRatio {
    pub fn new(numerator: u64, denominator: u64) -> Self {
        SuccessRatio(Ratio::new(numerator, denominator))
    }

    pub fn numerator(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }
}

impl fmt::Display for SuccessRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for SuccessRatio {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Moment ids, listed from the root towards the evaluation moment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct WitnessSets {
    pub achievements: Vec<String>,
    pub failures: Vec<String>,
}

impl WitnessSets {
    pub fn total(&self) -> usize {
        let mut all: Vec<&String> = self.achievements.iter().chain(&self.failures).collect();
        all.sort();
        all.dedup();
        all.len()
    }

    pub fn ratio(&self) -> Option<SuccessRatio> {
        let d = self.total() as u64;
        (d > 0).then(|| SuccessRatio::new(self.achievements.len() as u64, d))
    }
}

#[derive(Clone, Debug, Default)]
pub struct AnalysisOptions {
    pub interval: Option<u32>,
    pub witness_min: Option<usize>,
    pub ratio_min: Option<Ratio<u64>>,
    /// Restricts the classes considered; `None` enumerates every class.
    pub candidates: Option<Vec<ActionType>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassEntry {
    pub action: String,
    pub mask: u64,
    #[serde(flatten)]
    pub witnesses: WitnessSets,
    pub ratio: Option<SuccessRatio>,
    pub qualifying: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub claim: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InstrumentReport {
    pub goal: String,
    pub agent: String,
    pub moment: String,
    pub interval: String,
    pub witness_min: Option<usize>,
    #[serde(serialize_with = "ser_opt_ratio")]
    pub ratio_min: Option<Ratio<u64>>,
    pub instruments: Vec<ClassEntry>,
    /// Strict edges `(better, worse)` of the success-ratio ordering between
    /// adjacent levels of qualifying classes.
    pub ordering: Vec<(String, String)>,
    pub best: Vec<String>,
    pub worst: Vec<String>,
    pub good: Option<Vec<String>>,
    pub poor: Option<Vec<String>>,
    pub diagnostics: Vec<Diagnostic>,
}

fn ser_opt_ratio<S: Serializer>(r: &Option<Ratio<u64>>, s: S) -> Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.collect_str(r),
        None => s.serialize_none(),
    }
}

/// Per-moment data shared by every class: the evaluation chain, the
/// performed vectors along it, and the vectors of children falsifying the
/// goal at each chain parent.
pub struct Analyzer<'c, 'm> {
    ctx: &'c mut EvalContext<'m>,
    w: usize,
    agent: usize,
    goal: Formula,
    actions: usize,
    /// `(v, parent, vec(v), goal at v)`, nearest first, within the interval.
    steps: Vec<(usize, usize, u64, bool)>,
    limit: usize,
    bad: BTreeMap<usize, (u64, u64)>,
}

impl<'c, 'm> Analyzer<'c, 'm> {
    pub fn new(
        ctx: &'c mut EvalContext<'m>,
        w: usize,
        agent: usize,
        goal: &Formula,
        interval: Option<u32>,
    ) -> Result<Self, InstrError> {
        let m = ctx.model();
        let count = m.signature().agent_count();
        if agent >= count {
            return Err(InstrError::UnknownAgent { index: agent + 1, count });
        }
        let actions = m.signature().action_count();
        let labels = ctx.labels(goal)?;
        let mut chain = vec![w];
        chain.extend(m.ancestors(w));
        let limit = interval.map_or(usize::MAX, |n| n as usize);
        let mut steps = Vec::new();
        let mut bad = BTreeMap::new();
        let record = |p: usize, bad: &mut BTreeMap<usize, (u64, u64)>| {
            bad.entry(p).or_insert_with(|| {
                let (mut b, mut bex) = (0u64, 0u64);
                for &c in m.children(p) {
                    if !labels[c] {
                        b |= 1 << m.performed(c, agent);
                        if m.expected(c, agent) {
                            bex |= 1 << m.performed(c, agent);
                        }
                    }
                }
                (b, bex)
            });
        };
        for (i, pair) in chain.windows(2).enumerate() {
            if i > limit {
                break;
            }
            let (v, p) = (pair[0], pair[1]);
            steps.push((v, p, m.performed(v, agent), labels[v]));
            record(p, &mut bad);
        }
        record(w, &mut bad);
        Ok(Analyzer { ctx, w, agent, goal: goal.clone(), actions, steps, limit, bad })
    }

    fn would_at(&self, p: usize, mask: u64) -> bool {
        mask & self.bad[&p].0 == 0
    }

    fn would_ex_at(&self, p: usize, mask: u64) -> bool {
        mask & self.bad[&p].1 == 0
    }

    pub fn mask_of(&self, action: &ActionType) -> Result<u64, InstrError> {
        Ok(type_mask(action, self.actions)?)
    }

    pub fn witness_sets(&self, mask: u64) -> WitnessSets {
        let m = self.ctx.model();
        let mut out = WitnessSets::default();
        for &(v, p, vec, holds) in self.steps.iter().rev() {
            if mask >> vec & 1 == 0 {
                continue;
            }
            if self.would_at(p, mask) {
                out.achievements.push(m.id(v).to_string());
            }
            if !holds && self.would_ex_at(p, mask) {
                out.failures.push(m.id(v).to_string());
            }
        }
        out
    }

    /// Membership in the available instruments: at least one achievement
    /// within the interval, and the expected-would condition here.
    pub fn is_instrument(&self, mask: u64) -> bool {
        self.would_ex_at(self.w, mask)
            && self.steps.iter().any(|&(_, p, vec, _)| mask >> vec & 1 == 1 && self.would_at(p, mask))
    }

    pub fn instruments(&self) -> Vec<u64> {
        let reach: u64 = self.steps.iter().fold(0, |acc, s| acc | 1 << s.2);
        let width = 1u32 << self.actions;
        let all = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        let mut out = Vec::new();
        // Only masks containing a performed vector of the chain can have an
        // achievement.
        let mut mask = 0u64;
        loop {
            if mask & reach != 0 && self.is_instrument(mask) {
                out.push(mask);
            }
            if mask == all {
                break;
            }
            mask += 1;
        }
        out
    }

    /// The excellent-instrument condition: an instrument whose would
    /// condition also held at every ancestor in the interval.
    pub fn is_excellent(&self, mask: u64) -> bool {
        self.is_instrument(mask) && self.steps.iter().take(self.limit).all(|&(_, p, _, _)| self.would_at(p, mask))
    }

    pub fn eval_macro(&mut self, name: MacroName, action: &ActionType, interval: Interval) -> Result<bool, InstrError> {
        let call = MacroCall::interval(name, action.clone().bind(self.agent), self.goal.clone(), interval);
        Ok(self.ctx.eval_macro(self.w, &call)?)
    }
}

fn bound_name(t: &ActionType, agent: usize) -> String {
    t.clone().bind(agent).to_string()
}

pub fn witness_sets(
    ctx: &mut EvalContext<'_>,
    w: usize,
    agent: usize,
    goal: &Formula,
    action: &ActionType,
    interval: Option<u32>,
) -> Result<WitnessSets, InstrError> {
    let an = Analyzer::new(ctx, w, agent, goal, interval)?;
    let mask = an.mask_of(action)?;
    Ok(an.witness_sets(mask))
}

pub fn success_ratio(
    ctx: &mut EvalContext<'_>,
    w: usize,
    agent: usize,
    goal: &Formula,
    action: &ActionType,
    interval: Option<u32>,
) -> Result<SuccessRatio, InstrError> {
    witness_sets(ctx, w, agent, goal, action, interval)?
        .ratio()
        .ok_or_else(|| InstrError::NotAnInstrument(bound_name(action, agent)))
}

/// Canonical representatives of the available instruments, ordered by mask.
pub fn instruments(
    ctx: &mut EvalContext<'_>,
    w: usize,
    agent: usize,
    goal: &Formula,
    interval: Option<u32>,
) -> Result<Vec<ActionType>, InstrError> {
    let actions = ctx.model().signature().action_count();
    enumerate_classes(agent, actions, DEFAULT_CLASS_CAP)?;
    let an = Analyzer::new(ctx, w, agent, goal, interval)?;
    Ok(an.instruments().into_iter().map(|m| representative(m, actions)).collect())
}

/// Classes sorted into levels of equal ratio, best level first.
fn levels(entries: &[&ClassEntry]) -> Vec<Vec<String>> {
    let mut by: BTreeMap<std::cmp::Reverse<SuccessRatio>, Vec<String>> = BTreeMap::new();
    for e in entries {
        if let Some(r) = e.ratio {
            by.entry(std::cmp::Reverse(r)).or_default().push(e.action.clone());
        }
    }
    by.into_values().collect()
}

pub fn analyze(
    model: &TreeModel,
    w: usize,
    agent: usize,
    goal: &Formula,
    opts: &AnalysisOptions,
) -> Result<InstrumentReport, InstrError> {
    if let Some(r) = opts.ratio_min {
        if r > Ratio::one() {
            return Err(InstrError::RatioOutOfRange(r.to_string()));
        }
    }
    let actions = model.signature().action_count();
    let mut ctx = EvalContext::new(model);
    let an = Analyzer::new(&mut ctx, w, agent, goal, opts.interval)?;
    let masks: Vec<u64> = match &opts.candidates {
        Some(list) => {
            let mut ms = Vec::new();
            for t in list {
                let m = an.mask_of(t)?;
                if an.is_instrument(m) {
                    ms.push(m);
                }
            }
            ms.sort_unstable();
            ms.dedup();
            ms
        }
        None => {
            enumerate_classes(agent, actions, DEFAULT_CLASS_CAP)?;
            an.instruments()
        }
    };
    let min = opts.witness_min.unwrap_or(0);
    let entries: Vec<ClassEntry> = masks
        .iter()
        .map(|&mask| {
            let ws = an.witness_sets(mask);
            let ratio = ws.ratio();
            ClassEntry {
                action: bound_name(&representative(mask, actions), agent),
                mask,
                qualifying: ws.total() >= min,
                witnesses: ws,
                ratio,
            }
        })
        .collect();
    let qualifying: Vec<&ClassEntry> = entries.iter().filter(|e| e.qualifying).collect();
    let lv = levels(&qualifying);
    let mut ordering = Vec::new();
    for pair in lv.windows(2) {
        for a in &pair[0] {
            for b in &pair[1] {
                ordering.push((a.clone(), b.clone()));
            }
        }
    }
    let best = lv.first().cloned().unwrap_or_default();
    let worst = lv.last().cloned().unwrap_or_default();
    let (good, poor) = match opts.ratio_min {
        Some(n) => {
            let pick = |f: &dyn Fn(Ratio<u64>) -> bool| -> Vec<String> {
                entries
                    .iter()
                    .filter(|e| opts.witness_min.map_or(true, |_| e.qualifying))
                    .filter(|e| e.ratio.is_some_and(|r| f(r.0)))
                    .map(|e| e.action.clone())
                    .collect()
            };
            (Some(pick(&|r| r >= n)), Some(pick(&|r| r <= n)))
        }
        None => (None, None),
    };
    let mut diagnostics = Vec::new();
    let mut overlap = Vec::new();
    let mut unit_not_excellent = Vec::new();
    let mut excellent_not_unit = Vec::new();
    for e in &entries {
        if e.witnesses.achievements.iter().any(|a| e.witnesses.failures.contains(a)) {
            overlap.push(e.action.clone());
        }
        let excellent = an.is_excellent(e.mask);
        let unit = e.ratio.is_some_and(|r| r.is_one());
        if unit && !excellent {
            unit_not_excellent.push(e.action.clone());
        }
        if excellent && !unit {
            excellent_not_unit.push(e.action.clone());
        }
    }
    diagnostics.push(Diagnostic {
        claim: "achievements and failures are disjoint".into(),
        holds: overlap.is_empty(),
        detail: overlap.join(", "),
    });
    diagnostics.push(Diagnostic {
        claim: "excellent instruments have ratio 1".into(),
        holds: excellent_not_unit.is_empty(),
        detail: excellent_not_unit.join(", "),
    });
    diagnostics.push(Diagnostic {
        claim: "ratio 1 implies excellent instrument".into(),
        holds: unit_not_excellent.is_empty(),
        detail: unit_not_excellent.join(", "),
    });
    let unit_set: Vec<String> = entries.iter().filter(|e| e.ratio.is_some_and(|r| r.is_one())).map(|e| e.action.clone()).collect();
    let best_all = levels(&entries.iter().collect::<Vec<_>>()).first().cloned().unwrap_or_default();
    diagnostics.push(Diagnostic {
        claim: "Good at ratio 1 equals Best".into(),
        holds: unit_set == best_all,
        detail: format!("good1=[{}] best=[{}]", unit_set.join(", "), best_all.join(", ")),
    });
    if let (Some(n), Some(good)) = (opts.ratio_min, &good) {
        if n > Ratio::zero() {
            let all: Vec<String> = entries.iter().map(|e| e.action.clone()).collect();
            diagnostics.push(Diagnostic {
                claim: format!("Good at ratio {n} equals the available instruments"),
                holds: *good == all,
                detail: all.iter().filter(|a| !good.contains(a)).cloned().collect::<Vec<_>>().join(", "),
            });
        }
    }
    let m = model;
    Ok(InstrumentReport {
        goal: goal.to_string(),
        agent: m.signature().agents[agent].clone(),
        moment: m.id(w).to_string(),
        interval: opts.interval.map_or("inf".to_string(), |n| n.to_string()),
        witness_min: opts.witness_min,
        ratio_min: opts.ratio_min,
        instruments: entries,
        ordering,
        best,
        worst,
        good,
        poor,
        diagnostics,
    })
}

impl InstrumentReport {
    pub fn entry(&self, action: &str) -> Option<&ClassEntry> {
        self.instruments.iter().find(|e| e.action == action)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    /// Hasse diagram of the ordering over qualifying classes; classes of
    /// equal ratio share a node.
    pub fn hasse_dot(&self) -> String {
        let qualifying: Vec<&ClassEntry> = self.instruments.iter().filter(|e| e.qualifying).collect();
        let lv = levels(&qualifying);
        let ratio_of = |name: &str| self.entry(name).and_then(|e| e.ratio).map(|r| r.to_string()).unwrap_or_default();
        let mut out = String::from("digraph ordering {\n  rankdir=TB;\n  node [shape=box];\n");
        for (i, level) in lv.iter().enumerate() {
            let label = format!("{}\\nσ = {}", level.join("\\n"), ratio_of(&level[0]));
            let _ = writeln!(out, "  l{i} [label=\"{}\"];", label.replace('"', "\\\""));
        }
        for i in 1..lv.len() {
            let _ = writeln!(out, "  l{} -> l{};", i - 1, i);
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::ActionType as A;
    use crate::formula::{parse, parse_action};
    use crate::model::ModelDoc;

    fn small() -> TreeModel {
        // r -> u (d1, p1); u -> {x (d1, p1, e), y (~d1)}
        let j = r#"{"agents":["a1"],"actions":["d1"],"moments":[
            {"id":"r"},{"id":"u","vars":["p1"],"performed":{"a1":["d1"]}},
            {"id":"x","vars":["p1"],"performed":{"a1":["d1"]},"expected":["a1"]},{"id":"y"}],
            "edges":[["r","u"],["u","x"],["u","y"]]}"#;
        TreeModel::build(&ModelDoc::from_json(j).unwrap()).unwrap()
    }

    #[test]
    fn witnesses_and_ratio() {
        let m = small();
        let mut ctx = EvalContext::new(&m);
        let g = parse("p1").unwrap();
        let x = m.index_of("x").unwrap();
        let ws = witness_sets(&mut ctx, x, 0, &g, &A::atomic(0), None).unwrap();
        assert_eq!(ws.achievements, vec!["u", "x"]);
        assert!(ws.failures.is_empty());
        assert_eq!(success_ratio(&mut ctx, x, 0, &g, &A::atomic(0), None).unwrap(), SuccessRatio::new(1, 1));
        let root = witness_sets(&mut ctx, m.root(), 0, &g, &A::atomic(0), None).unwrap();
        assert_eq!(root, WitnessSets::default());
        assert!(matches!(
            success_ratio(&mut ctx, m.root(), 0, &g, &A::atomic(0), None),
            Err(InstrError::NotAnInstrument(_))
        ));
    }

    #[test]
    fn interval_limits_witnesses() {
        let m = small();
        let mut ctx = EvalContext::new(&m);
        let g = parse("p1").unwrap();
        let x = m.index_of("x").unwrap();
        let ws = witness_sets(&mut ctx, x, 0, &g, &A::atomic(0), Some(0)).unwrap();
        assert_eq!(ws.achievements, vec!["x"]);
    }

    #[test]
    fn instruments_match_macro() {
        let m = small();
        let g = parse("p1").unwrap();
        for w in 0..m.len() {
            let mut ctx = EvalContext::new(&m);
            let found = instruments(&mut ctx, w, 0, &g, None).unwrap();
            for cls in enumerate_classes(0, 1, 4).unwrap() {
                let call = MacroCall::interval(MacroName::Instr, cls.representative.clone().bind(0), g.clone(), Interval::Infinite);
                let expected = ctx.eval_macro(w, &call).unwrap();
                assert_eq!(found.contains(&cls.representative), expected, "w={w} {}", cls.representative);
            }
        }
    }

    #[test]
    fn excellent_matches_macro() {
        let m = small();
        let g = parse("p1").unwrap();
        for w in 0..m.len() {
            for n in [None, Some(0), Some(1), Some(2)] {
                let mut ctx = EvalContext::new(&m);
                let mut an = Analyzer::new(&mut ctx, w, 0, &g, n).unwrap();
                let iv = n.map_or(Interval::Infinite, Interval::Finite);
                for mask in 0..4u64 {
                    let t = representative(mask, 1);
                    assert_eq!(an.is_excellent(mask), an.eval_macro(MacroName::ExInstr, &t, iv).unwrap());
                    assert_eq!(an.is_instrument(mask), an.eval_macro(MacroName::Instr, &t, iv).unwrap());
                }
            }
        }
    }

    #[test]
    fn empty_past_gives_empty_report() {
        let m = small();
        let r = analyze(&m, m.root(), 0, &parse("p1").unwrap(), &AnalysisOptions::default()).unwrap();
        assert!(r.instruments.is_empty() && r.best.is_empty() && r.worst.is_empty());
    }

    #[test]
    fn candidates_are_mask_invariant() {
        let m = small();
        let x = m.index_of("x").unwrap();
        let g = parse("p1").unwrap();
        let run = |t: &str| {
            let opts = AnalysisOptions { candidates: Some(vec![parse_action(t).unwrap()]), ..Default::default() };
            analyze(&m, x, 0, &g, &opts).unwrap()
        };
        assert_eq!(run("d1"), run("~~d1"));
        assert_eq!(run("d1"), run("d1 | (d1 & ~d1)"));
    }

    #[test]
    fn ratio_threshold_range() {
        let m = small();
        let opts = AnalysisOptions { ratio_min: Some(Ratio::new(3, 2)), ..Default::default() };
        assert!(matches!(analyze(&m, 0, 0, &parse("p1").unwrap(), &opts), Err(InstrError::RatioOutOfRange(_))));
    }
}
