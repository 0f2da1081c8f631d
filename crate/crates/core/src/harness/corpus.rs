//! The shipped example trees and variables, embedded at compile time.

use crate::error::Result;
use crate::format::{LoadedTree, TreeFile, VariableFile};

pub const FAIR_COIN: &str = include_str!("../../corpus/fair_coin.json");
pub const TWO_VERTEX: &str = include_str!("../../corpus/two_vertex.json");
pub const LINEAR_VACUOUS: &str = include_str!("../../corpus/linear_vacuous.json");
pub const ABSORBING_CHAIN: &str = include_str!("../../corpus/absorbing_chain.json");
pub const VARIABLES_BINARY: &str = include_str!("../../corpus/variables_binary.json");
pub const VARIABLES_TERNARY: &str = include_str!("../../corpus/variables_ternary.json");

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub tree: LoadedTree,
    pub variables: Vec<VariableFile>,
}

/// The trees the suites run on by default.
pub fn suite_trees() -> Result<Vec<CorpusEntry>> {
    let binary = VariableFile::parse_all(VARIABLES_BINARY)?;
    let ternary = VariableFile::parse_all(VARIABLES_TERNARY)?;
    Ok(vec![
        CorpusEntry {
            name: "fair_coin",
            tree: TreeFile::parse(FAIR_COIN)?,
            variables: binary.clone(),
        },
        CorpusEntry {
            name: "two_vertex",
            tree: TreeFile::parse(TWO_VERTEX)?,
            variables: binary,
        },
        CorpusEntry {
            name: "linear_vacuous",
            tree: TreeFile::parse(LINEAR_VACUOUS)?,
            variables: ternary,
        },
    ])
}

/// The suite trees plus the absorbing chain.
pub fn all() -> Result<Vec<CorpusEntry>> {
    let mut out = suite_trees()?;
    out.push(CorpusEntry {
        name: "absorbing_chain",
        tree: TreeFile::parse(ABSORBING_CHAIN)?,
        variables: VariableFile::parse_all(VARIABLES_BINARY)?,
    });
    Ok(out)
}
