//! JSON file formats for trees, variables and supermartingales.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamble::FinitaryGamble;
use crate::game::{Supermartingale, TailRule, Variable};
use crate::limit::{
    hitting_variable, lsc_variable, truncated_average, usc_variable, HittingMode, HittingOptions,
    MonotoneVariable,
};
use crate::local::{CredalSet, MassFunction};
use crate::space::{Situation, StateSpace, ROOT_SYMBOL};
use crate::tree::{ImpreciseTree, PreciseTree, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    Precise,
    Imprecise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Uniform,
    Stationary,
    Explicit,
}

/// On-disk tree description. Assignment keys are `"*"` for a uniform rule,
/// `""`/`"□"` and state labels for a stationary rule, and situation strings
/// for an explicit rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeFile {
    pub states: Vec<String>,
    pub kind: TreeKind,
    pub rule: RuleKind,
    pub credal_sets: BTreeMap<String, Vec<Vec<f64>>>,
    pub assignments: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

/// A validated tree. Precise trees are also kept as single-vertex
/// imprecise trees so every route accepts them.
#[derive(Debug, Clone)]
pub struct LoadedTree {
    pub kind: TreeKind,
    pub tree: ImpreciseTree,
}

impl LoadedTree {
    pub fn space(&self) -> &StateSpace {
        self.tree.space()
    }

    /// The precise tree, for precise files.
    pub fn precise(&self) -> Result<PreciseTree> {
        let pick = |k: &CredalSet| -> Result<MassFunction> {
            match k.vertices() {
                [only] => Ok(only.clone()),
                _ => Err(Error::Spec("tree is not precise".into())),
            }
        };
        let rule = match self.tree.rule() {
            Rule::Uniform(k) => Rule::Uniform(pick(k)?),
            Rule::Stationary { root, by_state } => Rule::Stationary {
                root: pick(root)?,
                by_state: by_state.iter().map(pick).collect::<Result<_>>()?,
            },
            Rule::Explicit { depth, levels } => Rule::Explicit {
                depth: *depth,
                levels: levels
                    .iter()
                    .map(|l| l.iter().map(pick).collect::<Result<_>>())
                    .collect::<Result<_>>()?,
            },
        };
        PreciseTree::new(self.tree.space().clone(), rule)
    }
}

impl TreeFile {
    pub fn load(path: impl AsRef<Path>) -> Result<LoadedTree> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<LoadedTree> {
        serde_json::from_str::<Self>(text)?.build()
    }

    pub fn build(&self) -> Result<LoadedTree> {
        let space = StateSpace::new(self.states.clone())?;
        let mut sets: BTreeMap<&str, CredalSet> = BTreeMap::new();
        for (label, vectors) in &self.credal_sets {
            if self.kind == TreeKind::Precise && vectors.len() != 1 {
                return Err(Error::Spec(format!(
                    "precise tree: `{label}` must hold exactly one mass function"
                )));
            }
            let k = CredalSet::from_vectors(vectors.clone())?;
            if k.dimension() != space.size() {
                return Err(Error::DimensionMismatch {
                    expected: space.size(),
                    got: k.dimension(),
                });
            }
            sets.insert(label, k);
        }
        let lookup = |key: &str| -> Result<CredalSet> {
            let label = self
                .assignments
                .get(key)
                .ok_or_else(|| Error::Spec(format!("no assignment for `{key}`")))?;
            sets.get(label.as_str())
                .cloned()
                .ok_or_else(|| Error::Spec(format!("unknown credal set `{label}`")))
        };
        let rule = match self.rule {
            RuleKind::Uniform => {
                if self.assignments.len() != 1 {
                    return Err(Error::Spec("uniform rule takes a single assignment".into()));
                }
                let key = self.assignments.keys().next().expect("one entry");
                Rule::Uniform(lookup(key)?)
            }
            RuleKind::Stationary => {
                let root = lookup("").or_else(|_| lookup(ROOT_SYMBOL))?;
                let by_state = space
                    .labels()
                    .iter()
                    .map(|l| lookup(l))
                    .collect::<Result<_>>()?;
                Rule::Stationary { root, by_state }
            }
            RuleKind::Explicit => {
                let depth = self
                    .depth
                    .ok_or_else(|| Error::Spec("explicit rule needs `depth`".into()))?;
                let mut by_situation: BTreeMap<Situation, &String> = BTreeMap::new();
                for (key, label) in &self.assignments {
                    let t = space.parse_situation(key)?;
                    if t.len() >= depth {
                        return Err(Error::Spec(format!("assignment `{key}` lies beyond depth {depth}")));
                    }
                    by_situation.insert(t, label);
                }
                let levels = (0..depth)
                    .map(|k| {
                        Situation::all_of_length(space.size(), k)
                            .map(|t| {
                                let label = by_situation.get(&t).ok_or_else(|| {
                                    Error::Spec(format!(
                                        "no assignment for `{}`",
                                        space.display_situation(&t)
                                    ))
                                })?;
                                sets.get(label.as_str())
                                    .cloned()
                                    .ok_or_else(|| Error::Spec(format!("unknown credal set `{label}`")))
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                Rule::Explicit { depth, levels }
            }
        };
        Ok(LoadedTree {
            kind: self.kind,
            tree: ImpreciseTree::new(space, rule)?,
        })
    }
}

/// Variable description; the `kind` field selects the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VariableSpec {
    FinitaryTable {
        horizon: usize,
        values: Vec<f64>,
    },
    HittingIndicator {
        target: Vec<String>,
        #[serde(default)]
        include_history: bool,
    },
    HittingTime {
        target: Vec<String>,
        #[serde(default)]
        cap: Option<f64>,
        #[serde(default)]
        include_history: bool,
    },
    TruncatedAverage {
        weights: Vec<f64>,
        window: usize,
    },
    UscFromTable {
        horizon: usize,
        values: Vec<f64>,
    },
    LscFromTable {
        horizon: usize,
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableFile {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub spec: VariableSpec,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<VariableFile>),
    One(VariableFile),
}

impl VariableFile {
    /// Reads a single variable or a list of them.
    pub fn load_all(path: impl AsRef<Path>) -> Result<Vec<VariableFile>> {
        Self::parse_all(&fs::read_to_string(path)?)
    }

    pub fn parse_all(text: &str) -> Result<Vec<VariableFile>> {
        Ok(match serde_json::from_str::<OneOrMany>(text)? {
            OneOrMany::Many(v) => v,
            OneOrMany::One(v) => vec![v],
        })
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            serde_json::to_value(&self.spec)
                .ok()
                .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_owned))
                .unwrap_or_default()
        })
    }

    /// Builds the variable as seen from the conditioning situation `s`:
    /// hitting times start counting after `s` unless history is included.
    pub fn build(&self, space: &StateSpace, s: &Situation) -> Result<Variable> {
        let arity = space.size();
        let targets = |labels: &[String]| -> Result<Vec<usize>> {
            labels.iter().map(|l| space.index(l)).collect()
        };
        let named = |v: MonotoneVariable| Variable::Monotone(v.with_name(self.name()));
        Ok(match &self.spec {
            VariableSpec::FinitaryTable { horizon, values } => {
                Variable::Finitary(FinitaryGamble::from_table(arity, *horizon, values)?)
            }
            VariableSpec::HittingIndicator {
                target,
                include_history,
            } => named(hitting_variable(
                arity,
                &targets(target)?,
                HittingMode::Indicator,
                HittingOptions {
                    origin: s.len(),
                    include_history: *include_history,
                    cap: None,
                },
            )?),
            VariableSpec::HittingTime {
                target,
                cap,
                include_history,
            } => named(hitting_variable(
                arity,
                &targets(target)?,
                HittingMode::Time,
                HittingOptions {
                    origin: s.len(),
                    include_history: *include_history,
                    cap: *cap,
                },
            )?),
            VariableSpec::TruncatedAverage { weights, window } => {
                named(truncated_average(arity, weights, *window)?)
            }
            VariableSpec::UscFromTable { horizon, values } => named(usc_variable(Arc::new(
                FinitaryGamble::from_table(arity, *horizon, values)?,
            ))),
            VariableSpec::LscFromTable { horizon, values } => named(lsc_variable(Arc::new(
                FinitaryGamble::from_table(arity, *horizon, values)?,
            ))?),
        })
    }
}

/// On-disk supermartingale: `(situation, value)` pairs with the root written
/// as `""`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupermartingaleFile {
    pub states: Vec<String>,
    pub values: Vec<(String, f64)>,
    pub tail_rule: TailRule,
    pub lower_bound: f64,
}

impl SupermartingaleFile {
    pub fn from_supermartingale(space: &StateSpace, m: &Supermartingale) -> Self {
        Self {
            states: space.labels().to_vec(),
            values: m
                .entries()
                .into_iter()
                .map(|(t, v)| (space.format_situation(&t), v))
                .collect(),
            tail_rule: m.tail_rule(),
            lower_bound: m.lower_bound(),
        }
    }

    pub fn build(&self) -> Result<(StateSpace, Supermartingale)> {
        let space = StateSpace::new(self.states.clone())?;
        let mut values = BTreeMap::new();
        for (key, v) in &self.values {
            if values.insert(space.parse_situation(key)?, *v).is_some() {
                return Err(Error::InvalidSupermartingale(format!("`{key}` listed twice")));
            }
        }
        let m = Supermartingale::new(values, self.tail_rule, self.lower_bound)?;
        Ok((space, m))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<(StateSpace, Supermartingale)> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str::<Self>(&text)?.build()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}
