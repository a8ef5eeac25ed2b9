use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// The on-disk model format.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub agents: Vec<String>,
    pub actions: Vec<String>,
    pub moments: Vec<MomentDoc>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub actual: Vec<(String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentDoc {
    pub id: String,
    #[serde(default)]
    pub vars: Vec<String>,
    #[serde(default)]
    pub performed: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    pub expected: Vec<String>,
}

impl ModelDoc {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }
}
