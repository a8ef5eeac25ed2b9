use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;
use tlae::sat::SatConfig;
use tlae::Signature;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Text,
    Dot,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SessionConfig {
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    /// Largest number of atomic actions whose classes are enumerated.
    pub max_actions: usize,
    pub bound_depth: usize,
    pub bound_branching: Option<usize>,
    pub max_moments: usize,
    pub max_atoms: usize,
    pub format: Format,
}

impl Default for SessionConfig {
    fn default() -> Self {
        let sat = SatConfig::default();
        SessionConfig {
            agents: vec!["a1".into()],
            actions: vec!["d1".into()],
            max_actions: 6,
            bound_depth: sat.bound_depth,
            bound_branching: None,
            max_moments: sat.max_moments,
            max_atoms: sat.max_atoms,
            format: Format::Json,
        }
    }
}

impl SessionConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let cfg: SessionConfig = toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<(), String> {
        for (what, names) in [("agent", &self.agents), ("action", &self.actions)] {
            let mut seen = HashSet::new();
            if let Some(dup) = names.iter().find(|n| !seen.insert(*n)) {
                return Err(format!("duplicate {what} name {dup}"));
            }
        }
        let caps = [
            ("max_actions", self.max_actions),
            ("bound_depth", self.bound_depth),
            ("max_moments", self.max_moments),
            ("max_atoms", self.max_atoms),
            ("bound_branching", self.bound_branching.unwrap_or(1)),
        ];
        if let Some((name, _)) = caps.iter().find(|(_, v)| *v == 0) {
            return Err(format!("{name} must be positive"));
        }
        Ok(())
    }

    pub fn signature(&self) -> Result<Signature, String> {
        Signature::new(self.agents.clone(), self.actions.clone()).map_err(|e| e.to_string())
    }

    pub fn sat(&self) -> Result<SatConfig, String> {
        Ok(SatConfig {
            signature: Some(self.signature()?),
            bound_depth: self.bound_depth,
            bound_branching: self.bound_branching,
            max_moments: self.max_moments,
            max_atoms: self.max_atoms,
            ..SatConfig::default()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_checks() {
        let cfg: SessionConfig = toml::from_str("agents = [\"a1\", \"a2\"]\nbound_depth = 4\nformat = \"text\"").unwrap();
        assert_eq!(cfg.agents.len(), 2);
        assert_eq!(cfg.bound_depth, 4);
        assert_eq!(cfg.format, Format::Text);
        assert!(cfg.check().is_ok());
        let dup: SessionConfig = toml::from_str("actions = [\"d1\", \"d1\"]").unwrap();
        assert!(dup.check().is_err());
        let zero: SessionConfig = toml::from_str("max_moments = 0").unwrap();
        assert!(zero.check().is_err());
        assert!(toml::from_str::<SessionConfig>("colour = 1").is_err());
    }
}
