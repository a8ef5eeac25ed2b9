mod doc;
mod dot;
mod validate;

pub use doc::{ModelDoc, MomentDoc};
pub use dot::export_dot;
pub use validate::{validate, validate_doc, PropertyResult, ValidationReport};

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::signature::{Signature, SignatureError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("duplicate moment id `{0}`")]
    DuplicateId(String),
    #[error("unknown moment id `{0}`")]
    UnknownId(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("variable `{0}` is not of the form p<k>")]
    BadVariable(String),
    #[error("moment `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("edge from `{0}` to itself")]
    SelfLoop(String),
    #[error("no root: every moment has a parent")]
    NoRoot,
    #[error("more than one root: {0:?}")]
    MultipleRoots(Vec<String>),
    #[error("moment `{0}` is not reachable from the root")]
    Unreachable(String),
    #[error("actual edge `{0}` -> `{1}` is not a child edge")]
    ActualNotChild(String, String),
    #[error("model has no moments")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Moment {
    pub id: String,
    pub vars: BTreeSet<u32>,
    /// Per agent, bit `j` set iff the agent has just performed action `j`.
    pub performed: Vec<u64>,
    pub expected: Vec<bool>,
}

impl Moment {
    pub fn new(id: impl Into<String>, agents: usize) -> Self {
        Moment { id: id.into(), vars: BTreeSet::new(), performed: vec![0; agents], expected: vec![false; agents] }
    }
}

/// A finite rooted tree of moments with designated actual successors.
#[derive(Clone, Debug)]
pub struct TreeModel {
    sig: Signature,
    moments: Vec<Moment>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    actual: Vec<Vec<usize>>,
    depth: Vec<usize>,
    root: usize,
    index: HashMap<String, usize>,
}

impl TreeModel {
    pub fn build(doc: &ModelDoc) -> Result<TreeModel, ModelError> {
        let sig = Signature::new(doc.agents.clone(), doc.actions.clone())?;
        let mut index = HashMap::new();
        let mut moments = Vec::with_capacity(doc.moments.len());
        for (i, md) in doc.moments.iter().enumerate() {
            if index.insert(md.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(md.id.clone()));
            }
            let mut m = Moment::new(md.id.clone(), sig.agent_count());
            for v in &md.vars {
                let k = v.strip_prefix('p').and_then(|r| r.parse().ok()).ok_or_else(|| ModelError::BadVariable(v.clone()))?;
                m.vars.insert(k);
            }
            for (agent, acts) in &md.performed {
                let a = sig.agent_index(agent).ok_or_else(|| ModelError::UnknownAgent(agent.clone()))?;
                for act in acts {
                    let j = sig.action_index(act).ok_or_else(|| ModelError::UnknownAction(act.clone()))?;
                    m.performed[a] |= 1 << j;
                }
            }
            for agent in &md.expected {
                let a = sig.agent_index(agent).ok_or_else(|| ModelError::UnknownAgent(agent.clone()))?;
                m.expected[a] = true;
            }
            moments.push(m);
        }
        let lookup = |id: &String| index.get(id).copied().ok_or_else(|| ModelError::UnknownId(id.clone()));
        let mut parent = vec![None; moments.len()];
        for (from, to) in &doc.edges {
            let (f, t) = (lookup(from)?, lookup(to)?);
            if f == t {
                return Err(ModelError::SelfLoop(from.clone()));
            }
            if parent[t].replace(f).is_some() {
                return Err(ModelError::MultipleParents(to.clone()));
            }
        }
        let mut actual = vec![Vec::new(); moments.len()];
        for (from, to) in &doc.actual {
            let (f, t) = (lookup(from)?, lookup(to)?);
            actual[f].push(t);
        }
        TreeModel::from_parts(sig, moments, parent, actual)
    }

    pub fn from_json(text: &str) -> Result<TreeModel, Box<dyn std::error::Error + Send + Sync>> {
        Ok(TreeModel::build(&ModelDoc::from_json(text)?)?)
    }

    /// Assembles a model from a parent map and actual-successor lists.
    pub fn from_parts(
        sig: Signature,
        moments: Vec<Moment>,
        parent: Vec<Option<usize>>,
        actual: Vec<Vec<usize>>,
    ) -> Result<TreeModel, ModelError> {
        if moments.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut index = HashMap::new();
        for (i, m) in moments.iter().enumerate() {
            if index.insert(m.id.clone(), i).is_some() {
                return Err(ModelError::DuplicateId(m.id.clone()));
            }
        }
        let roots: Vec<usize> = (0..moments.len()).filter(|&i| parent[i].is_none()).collect();
        let root = match roots.as_slice() {
            [] => return Err(ModelError::NoRoot),
            [r] => *r,
            many => return Err(ModelError::MultipleRoots(many.iter().map(|&i| moments[i].id.clone()).collect())),
        };
        let mut children = vec![Vec::new(); moments.len()];
        for (c, p) in parent.iter().enumerate() {
            if let Some(p) = p {
                children[*p].push(c);
            }
        }
        let mut depth = vec![usize::MAX; moments.len()];
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(w) = stack.pop() {
            for &c in &children[w] {
                depth[c] = depth[w] + 1;
                stack.push(c);
            }
        }
        if let Some(i) = depth.iter().position(|&d| d == usize::MAX) {
            return Err(ModelError::Unreachable(moments[i].id.clone()));
        }
        for (w, succ) in actual.iter().enumerate() {
            for &u in succ {
                if parent[u] != Some(w) {
                    return Err(ModelError::ActualNotChild(moments[w].id.clone(), moments[u].id.clone()));
                }
            }
        }
        let agents = sig.agent_count();
        let moments = moments
            .into_iter()
            .map(|mut m| {
                m.performed.resize(agents, 0);
                m.expected.resize(agents, false);
                m
            })
            .collect();
        Ok(TreeModel { sig, moments, parent, children, actual, depth, root, index })
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn len(&self) -> usize {
        self.moments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moments.is_empty()
    }

    pub fn moment(&self, w: usize) -> &Moment {
        &self.moments[w]
    }

    pub fn moments(&self) -> &[Moment] {
        &self.moments
    }

    pub fn id(&self, w: usize) -> &str {
        &self.moments[w].id
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, w: usize) -> Option<usize> {
        self.parent[w]
    }

    pub fn children(&self, w: usize) -> &[usize] {
        &self.children[w]
    }

    pub fn actual(&self, w: usize) -> &[usize] {
        &self.actual[w]
    }

    /// The backward chain to the root, nearest first.
    pub fn ancestors(&self, w: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.parent[w];
        while let Some(p) = cur {
            out.push(p);
            cur = self.parent[p];
        }
        out
    }

    pub fn past_depth(&self, w: usize) -> usize {
        self.depth[w]
    }

    pub fn performed(&self, w: usize, agent: usize) -> u64 {
        self.moments[w].performed[agent]
    }

    pub fn expected(&self, w: usize, agent: usize) -> bool {
        self.moments[w].expected[agent]
    }

    pub fn to_doc(&self) -> ModelDoc {
        let moments = self
            .moments
            .iter()
            .map(|m| MomentDoc {
                id: m.id.clone(),
                vars: m.vars.iter().map(|k| format!("p{k}")).collect(),
                performed: (0..self.sig.agent_count())
                    .filter(|&a| m.performed[a] != 0)
                    .map(|a| {
                        let acts = (0..self.sig.action_count())
                            .filter(|&j| m.performed[a] >> j & 1 == 1)
                            .map(|j| self.sig.actions[j].clone())
                            .collect();
                        (self.sig.agents[a].clone(), acts)
                    })
                    .collect(),
                expected: (0..self.sig.agent_count())
                    .filter(|&a| m.expected[a])
                    .map(|a| self.sig.agents[a].clone())
                    .collect(),
            })
            .collect();
        let mut edges = Vec::new();
        let mut actual = Vec::new();
        for w in 0..self.len() {
            for &c in &self.children[w] {
                edges.push((self.id(w).to_string(), self.id(c).to_string()));
            }
            for &c in &self.actual[w] {
                actual.push((self.id(w).to_string(), self.id(c).to_string()));
            }
        }
        ModelDoc {
            description: None,
            agents: self.sig.agents.clone(),
            actions: self.sig.actions.clone(),
            moments,
            edges,
            actual,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(json: &str) -> ModelDoc {
        ModelDoc::from_json(json).unwrap()
    }

    #[test]
    fn two_moment_chain() {
        let m = TreeModel::build(&doc(
            r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"root"},{"id":"w1","vars":["p1"],"performed":{"a1":["d1"]}}],"edges":[["root","w1"]]}"#,
        ))
        .unwrap();
        let w1 = m.index_of("w1").unwrap();
        assert_eq!(m.ancestors(w1), vec![m.root()]);
        assert_eq!(m.past_depth(w1), 1);
        assert!(m.ancestors(m.root()).is_empty());
        assert_eq!(m.performed(w1, 0), 1);
        assert!(m.moment(w1).vars.contains(&1));
    }

    #[test]
    fn structural_errors() {
        let base = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"w"},{"id":"u"}],"edges":EDGES,"actual":ACT}"#;
        let make = |e: &str, a: &str| TreeModel::build(&doc(&base.replace("EDGES", e).replace("ACT", a)));
        assert_eq!(make(r#"[["w","w"]]"#, "[]").unwrap_err(), ModelError::SelfLoop("w".into()));
        assert_eq!(make(r#"[["w","x"]]"#, "[]").unwrap_err(), ModelError::UnknownId("x".into()));
        assert!(matches!(make("[]", "[]").unwrap_err(), ModelError::MultipleRoots(_)));
        assert_eq!(make(r#"[["w","u"],["u","w"]]"#, "[]").unwrap_err(), ModelError::NoRoot);
        assert_eq!(make(r#"[["w","u"]]"#, r#"[["u","w"]]"#).unwrap_err(), ModelError::ActualNotChild("u".into(), "w".into()));
        let dup = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"w"},{"id":"w"}]}"#;
        assert_eq!(TreeModel::build(&doc(dup)).unwrap_err(), ModelError::DuplicateId("w".into()));
    }

    #[test]
    fn second_parent_rejected() {
        let j = r#"{"agents":["a1"],"actions":["d1"],"moments":[{"id":"r"},{"id":"x"},{"id":"y"}],"edges":[["r","x"],["r","y"],["x","y"]]}"#;
        assert_eq!(TreeModel::build(&doc(j)).unwrap_err(), ModelError::MultipleParents("y".into()));
    }

    #[test]
    fn document_round_trip() {
        let j = r#"{"agents":["a1","a2"],"actions":["d1","d2"],"moments":[{"id":"r"},{"id":"x","vars":["p2"],"performed":{"a2":["d1","d2"]},"expected":["a1"]}],"edges":[["r","x"]],"actual":[["r","x"]]}"#;
        let m = TreeModel::build(&doc(j)).unwrap();
        let again = TreeModel::build(&m.to_doc()).unwrap();
        assert_eq!(again.moments(), m.moments());
        assert_eq!(again.actual(again.root()), &[1]);
    }
}
