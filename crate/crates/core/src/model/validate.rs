use std::collections::{BTreeSet, HashMap, HashSet};

use serde::Serialize;

use super::{ModelDoc, TreeModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PropertyResult {
    pub property: String,
    pub ok: bool,
    pub offending: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub properties: Vec<PropertyResult>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.properties.iter().all(|p| p.ok)
    }

    pub fn get(&self, property: &str) -> Option<&PropertyResult> {
        self.properties.iter().find(|p| p.property == property)
    }

    pub fn failures(&self) -> Vec<&PropertyResult> {
        self.properties.iter().filter(|p| !p.ok).collect()
    }
}

/// Explicit relations over moment indices, as authored.
struct Frame {
    ids: Vec<String>,
    edges: Vec<(usize, usize)>,
    actual: Vec<(usize, usize)>,
    performed: Vec<Vec<u64>>,
    expected: Vec<Vec<bool>>,
    agents: usize,
}

pub fn validate(m: &TreeModel) -> ValidationReport {
    let n = m.len();
    let mut edges = Vec::new();
    let mut actual = Vec::new();
    for w in 0..n {
        edges.extend(m.children(w).iter().map(|&c| (w, c)));
        actual.extend(m.actual(w).iter().map(|&c| (w, c)));
    }
    let frame = Frame {
        ids: m.moments().iter().map(|x| x.id.clone()).collect(),
        edges,
        actual,
        performed: m.moments().iter().map(|x| x.performed.clone()).collect(),
        expected: m.moments().iter().map(|x| x.expected.clone()).collect(),
        agents: m.signature().agent_count(),
    };
    check(&frame, vec![])
}

/// Validates a document without building it, so structural defects show up
/// as failed properties rather than errors.
pub fn validate_doc(doc: &ModelDoc) -> ValidationReport {
    let mut problems = Vec::new();
    let mut index = HashMap::new();
    for (i, md) in doc.moments.iter().enumerate() {
        if index.insert(md.id.clone(), i).is_some() {
            problems.push(format!("duplicate id {}", md.id));
        }
    }
    let agents = doc.agents.len();
    let mut performed = vec![vec![0u64; agents]; doc.moments.len()];
    let mut expected = vec![vec![false; agents]; doc.moments.len()];
    let sig = crate::signature::Signature { agents: doc.agents.clone(), actions: doc.actions.clone() };
    for (i, md) in doc.moments.iter().enumerate() {
        for v in &md.vars {
            if v.strip_prefix('p').and_then(|r| r.parse::<u32>().ok()).is_none() {
                problems.push(format!("bad variable {v} at {}", md.id));
            }
        }
        for (agent, acts) in &md.performed {
            match sig.agent_index(agent) {
                Some(a) => {
                    for act in acts {
                        match sig.action_index(act) {
                            Some(j) => performed[i][a] |= 1 << j,
                            None => problems.push(format!("unknown action {act} at {}", md.id)),
                        }
                    }
                }
                None => problems.push(format!("unknown agent {agent} at {}", md.id)),
            }
        }
        for agent in &md.expected {
            match sig.agent_index(agent) {
                Some(a) => expected[i][a] = true,
                None => problems.push(format!("unknown agent {agent} at {}", md.id)),
            }
        }
    }
    let mut resolve = |pairs: &[(String, String)]| {
        let mut out = Vec::new();
        for (a, b) in pairs {
            match (index.get(a), index.get(b)) {
                (Some(&x), Some(&y)) => out.push((x, y)),
                _ => problems.push(format!("edge {a} -> {b} mentions an unknown id")),
            }
        }
        out
    };
    let edges = resolve(&doc.edges);
    let actual = resolve(&doc.actual);
    let frame = Frame {
        ids: doc.moments.iter().map(|m| m.id.clone()).collect(),
        edges,
        actual,
        performed,
        expected,
        agents,
    };
    check(&frame, problems)
}

fn result(property: &str, offending: BTreeSet<String>) -> PropertyResult {
    PropertyResult { property: property.into(), ok: offending.is_empty(), offending: offending.into_iter().collect() }
}

fn check(f: &Frame, problems: Vec<String>) -> ValidationReport {
    let n = f.ids.len();
    let id = |i: usize| f.ids[i].clone();
    let mut children = vec![Vec::new(); n];
    let mut parents = vec![Vec::new(); n];
    for &(a, b) in &f.edges {
        children[a].push(b);
        parents[b].push(a);
    }
    let mut props = Vec::new();
    props.push(PropertyResult { property: "document".into(), ok: problems.is_empty(), offending: problems });

    let roots: BTreeSet<String> = (0..n).filter(|&i| parents[i].is_empty()).map(id).collect();
    let mut root = result("single root", BTreeSet::new());
    if roots.len() != 1 {
        root.ok = false;
        root.offending = roots.into_iter().collect();
        if root.offending.is_empty() {
            root.offending.push("(none)".into());
        }
    }
    props.push(root);

    // R_H as the transitive closure of the parent relation.
    let mut hist: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for w in 0..n {
        let mut stack: Vec<usize> = parents[w].clone();
        while let Some(p) = stack.pop() {
            if hist[w].insert(p) {
                stack.extend(parents[p].iter().copied());
            }
        }
    }
    let self_related = |w: usize| {
        f.edges.contains(&(w, w)) || f.actual.contains(&(w, w)) || hist[w].contains(&w)
    };
    props.push(result("irreflexive", (0..n).filter(|&w| self_related(w)).map(id).collect()));
    props.push(result("p(A12) linear past", (0..n).filter(|&w| parents[w].len() > 1).map(id).collect()));
    props.push(result("p(A13) finite past", (0..n).filter(|&w| hist[w].contains(&w) || hist[w].iter().any(|&h| hist[h].contains(&h))).map(id).collect()));
    // Both of these hold because R_■ and R_H are derived; they are rechecked
    // on the materialized relations.
    let prev: HashSet<(usize, usize)> = f.edges.iter().map(|&(a, b)| (b, a)).collect();
    props.push(result(
        "p(A10;A11) converse",
        f.edges.iter().filter(|&&(a, b)| !prev.contains(&(b, a))).map(|&(a, _)| id(a)).collect(),
    ));
    props.push(result(
        "p(A9;A14) transitive past",
        (0..n)
            .filter(|&w| parents[w].iter().any(|&p| !hist[w].contains(&p) || !hist[p].is_subset(&hist[w])))
            .map(id)
            .collect(),
    ));

    let distinct_actual: HashSet<(usize, usize)> = f.actual.iter().copied().collect();
    let mut per_source = vec![0usize; n];
    for &(a, _) in &distinct_actual {
        per_source[a] += 1;
    }
    props.push(result("p(A3) functional actual", (0..n).filter(|&w| per_source[w] > 1).map(id).collect()));
    let edge_set: HashSet<(usize, usize)> = f.edges.iter().copied().collect();
    props.push(result(
        "p(A4) actual within next",
        f.actual.iter().filter(|e| !edge_set.contains(e)).map(|&(a, _)| id(a)).collect(),
    ));

    let mut a5 = BTreeSet::new();
    let mut a6 = BTreeSet::new();
    for w in 0..n {
        let kids = &children[w];
        if kids.is_empty() {
            continue;
        }
        let tuples: HashSet<&Vec<u64>> = kids.iter().map(|&c| &f.performed[c]).collect();
        let product: usize = (0..f.agents)
            .map(|a| kids.iter().map(|&c| f.performed[c][a]).collect::<HashSet<u64>>().len())
            .product();
        if tuples.len() != product {
            a5.insert(id(w));
        }
        for a in 0..f.agents {
            let some = kids.iter().any(|&c| f.expected[c][a]);
            let all = kids.iter().all(|&c| f.expected[c][a]);
            if some && all {
                a6.insert(id(w));
            }
        }
    }
    props.push(result("p(A5) independence", a5));
    props.push(result("p(A6) expectations defeasible", a6));
    ValidationReport { properties: props }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(json: &str) -> ModelDoc {
        ModelDoc::from_json(json).unwrap()
    }

    #[test]
    fn expected_only_child_fails_a6() {
        let j = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"w"},{"id":"u","expected":["a1"]}],"edges":[["w","u"]]}"#;
        let r = validate(&TreeModel::build(&doc(j)).unwrap());
        assert!(!r.get("p(A6) expectations defeasible").unwrap().ok);
        assert_eq!(r.get("p(A6) expectations defeasible").unwrap().offending, vec!["w"]);
    }

    #[test]
    fn two_actual_successors_fail_a3() {
        let j = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"w"},{"id":"u"},{"id":"v"}],"edges":[["w","u"],["w","v"]],"actual":[["w","u"],["w","v"]]}"#;
        let r = validate(&TreeModel::build(&doc(j)).unwrap());
        assert!(!r.get("p(A3) functional actual").unwrap().ok);
        assert!(r.get("p(A4) actual within next").unwrap().ok);
    }

    #[test]
    fn independence_product() {
        let j = r#"{"agents":["a1","a2"],"actions":["d1"],"moments":[{"id":"w"},
            {"id":"x","performed":{"a1":["d1"],"a2":["d1"]}},{"id":"y"}],"edges":[["w","x"],["w","y"]]}"#;
        let r = validate(&TreeModel::build(&doc(j)).unwrap());
        assert!(!r.get("p(A5) independence").unwrap().ok);
        let fixed = j.replace(r#"{"id":"y"}"#, r#"{"id":"y"},{"id":"z","performed":{"a1":["d1"]}},{"id":"v","performed":{"a2":["d1"]}}"#)
            .replace(r#"["w","y"]]"#, r#"["w","y"],["w","z"],["w","v"]]"#);
        assert!(validate(&TreeModel::build(&doc(&fixed)).unwrap()).ok());
    }

    #[test]
    fn raw_documents_report_structure() {
        let cyc = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"r"},{"id":"x"},{"id":"y"}],"edges":[["x","y"],["y","x"]]}"#;
        let r = validate_doc(&doc(cyc));
        assert!(!r.get("p(A13) finite past").unwrap().ok);
        assert!(!r.get("irreflexive").unwrap().ok);
        let two = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"r"},{"id":"x"},{"id":"y"}],"edges":[["r","x"],["r","y"],["x","y"]]}"#;
        assert!(!validate_doc(&doc(two)).get("p(A12) linear past").unwrap().ok);
        let outside = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"r"},{"id":"x"},{"id":"y"}],"edges":[["r","x"],["x","y"]],"actual":[["r","y"]]}"#;
        assert!(!validate_doc(&doc(outside)).get("p(A4) actual within next").unwrap().ok);
        let fine = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"r"},{"id":"x"}],"edges":[["r","x"]],"actual":[["r","x"]]}"#;
        assert!(validate_doc(&doc(fine)).ok());
    }
}
