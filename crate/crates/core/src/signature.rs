use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SignatureError {
    #[error("at least one agent and one atomic action are required")]
    Empty,
    #[error("duplicate name `{0}`")]
    Duplicate(String),
}

/// Agent and atomic-action names fixed for a session. Indices are 0-based
/// internally and printed 1-based (`a1`, `d1`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    pub agents: Vec<String>,
    pub actions: Vec<String>,
}

impl Signature {
    pub fn new(agents: Vec<String>, actions: Vec<String>) -> Result<Self, SignatureError> {
        if agents.is_empty() || actions.is_empty() {
            return Err(SignatureError::Empty);
        }
        for list in [&agents, &actions] {
            let mut seen = std::collections::HashSet::new();
            for name in list {
                if !seen.insert(name) {
                    return Err(SignatureError::Duplicate(name.clone()));
                }
            }
        }
        Ok(Signature { agents, actions })
    }

    pub fn with_counts(agents: usize, actions: usize) -> Self {
        Signature {
            agents: (1..=agents.max(1)).map(|i| format!("a{i}")).collect(),
            actions: (1..=actions.max(1)).map(|j| format!("d{j}")).collect(),
        }
    }

    pub fn minimal() -> Self {
        Self::with_counts(1, 1)
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn action_count(&self) -> usize {
        self.actions.len()
    }

    /// Resolves an agent by its name or by the positional form `a<k>`.
    pub fn agent_index(&self, name: &str) -> Option<usize> {
        lookup(&self.agents, name, 'a')
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        lookup(&self.actions, name, 'd')
    }

    /// Extends the signature with positional names so that it covers at least
    /// the given counts.
    pub fn widened(&self, agents: usize, actions: usize) -> Signature {
        let mut out = self.clone();
        while out.agents.len() < agents {
            let k = out.agents.len() + 1;
            out.agents.push(fresh(&out.agents, 'a', k));
        }
        while out.actions.len() < actions {
            let k = out.actions.len() + 1;
            out.actions.push(fresh(&out.actions, 'd', k));
        }
        out
    }
}

fn lookup(names: &[String], name: &str, prefix: char) -> Option<usize> {
    if let Some(i) = names.iter().position(|n| n == name) {
        return Some(i);
    }
    let rest = name.strip_prefix(prefix)?;
    let k: usize = rest.parse().ok()?;
    (k >= 1 && k <= names.len()).then(|| k - 1)
}

fn fresh(names: &[String], prefix: char, k: usize) -> String {
    let mut candidate = format!("{prefix}{k}");
    while names.contains(&candidate) {
        candidate.push('\'');
    }
    candidate
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn positional_and_named_lookup() {
        let sig = Signature::new(vec!["alice".into(), "bob".into()], vec!["push".into()]).unwrap();
        assert_eq!(sig.agent_index("bob"), Some(1));
        assert_eq!(sig.agent_index("a1"), Some(0));
        assert_eq!(sig.agent_index("a3"), None);
        assert_eq!(sig.action_index("d1"), Some(0));
    }

    #[test]
    fn duplicates_rejected() {
        let err = Signature::new(vec!["a".into(), "a".into()], vec!["d".into()]).unwrap_err();
        assert_eq!(err, SignatureError::Duplicate("a".into()));
        assert_eq!(Signature::new(vec![], vec!["d".into()]), Err(SignatureError::Empty));
    }

    #[test]
    fn widening_keeps_existing_names() {
        let sig = Signature::minimal().widened(2, 3);
        assert_eq!(sig.agents, vec!["a1", "a2"]);
        assert_eq!(sig.actions, vec!["d1", "d2", "d3"]);
    }
}
