use std::fmt::Write;

use super::TreeModel;

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz rendering: solid edges for next moments, doubled edges for
/// actual next moments.
pub fn export_dot(m: &TreeModel) -> String {
    let sig = m.signature();
    let mut out = String::from("digraph model {\n  rankdir=TB;\n  node [shape=box];\n");
    for w in 0..m.len() {
        let mo = m.moment(w);
        let mut label = mo.id.clone();
        let vars: Vec<String> = mo.vars.iter().map(|k| format!("p{k}")).collect();
        if !vars.is_empty() {
            label.push_str(&format!("\\n{}", vars.join(" ")));
        }
        for a in 0..sig.agent_count() {
            let acts: Vec<&str> = (0..sig.action_count())
                .filter(|&j| mo.performed[a] >> j & 1 == 1)
                .map(|j| sig.actions[j].as_str())
                .collect();
            if !acts.is_empty() {
                label.push_str(&format!("\\n{}: {}", sig.agents[a], acts.join(",")));
            }
            if mo.expected[a] {
                label.push_str(&format!("\\ne[{}]", sig.agents[a]));
            }
        }
        let _ = writeln!(out, "  {} [label={}];", quote(&mo.id), quote(&label).replace("\\\\n", "\\n"));
    }
    for w in 0..m.len() {
        for &c in m.children(w) {
            let attrs = if m.actual(w).contains(&c) { " [color=\"black:invis:black\"]" } else { "" };
            let _ = writeln!(out, "  {} -> {}{};", quote(m.id(w)), quote(m.id(c)), attrs);
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelDoc;

    #[test]
    fn actual_edges_are_doubled() {
        let j = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"r"},{"id":"x","vars":["p1"]},{"id":"y"}],"edges":[["r","x"],["r","y"]],"actual":[["r","x"]]}"#;
        let m = TreeModel::build(&ModelDoc::from_json(j).unwrap()).unwrap();
        let dot = export_dot(&m);
        assert!(dot.contains("\"r\" -> \"x\" [color=\"black:invis:black\"];"));
        assert!(dot.contains("\"r\" -> \"y\";"));
        assert!(dot.contains("label=\"x\\np1\""));
    }
}
