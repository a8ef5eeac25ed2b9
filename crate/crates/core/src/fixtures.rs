//! Models of the worked examples, embedded at build time.

use crate::model::{ModelDoc, TreeModel};

pub const FIXTURES: [(&str, &str); 9] = [
    ("fig1_produce", include_str!("../fixtures/fig1_produce.json")),
    ("fig1_destroy", include_str!("../fixtures/fig1_destroy.json")),
    ("fig1_suppress", include_str!("../fixtures/fig1_suppress.json")),
    ("fig1_preserve", include_str!("../fixtures/fig1_preserve.json")),
    ("fig2", include_str!("../fixtures/fig2.json")),
    ("fig3", include_str!("../fixtures/fig3.json")),
    ("fig4", include_str!("../fixtures/fig4.json")),
    ("defeasible_interval", include_str!("../fixtures/defeasible_interval.json")),
    ("sigma_one_not_excellent", include_str!("../fixtures/sigma_one_not_excellent.json")),
];

pub fn doc(name: &str) -> Option<ModelDoc> {
    let (_, text) = FIXTURES.iter().find(|(n, _)| *n == name)?;
    Some(ModelDoc::from_json(text).expect("embedded fixtures parse"))
}

pub fn load(name: &str) -> Option<TreeModel> {
    doc(name).map(|d| TreeModel::build(&d).expect("embedded fixtures build"))
}
