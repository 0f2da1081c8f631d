//! State spaces and situations.
//!
//! A situation is a finite, possibly empty, string of state indices: a node
//! of the event tree. The empty situation is the root `□`. Paths are never
//! materialized; every statement about infinite paths is checked on their
//! finite prefixes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Root symbol used when rendering the empty situation.
pub const ROOT_SYMBOL: &str = "□";

/// A finite state space with at least two labelled states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct StateSpace {
    labels: Vec<String>,
}

impl StateSpace {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(Error::InvalidStateSpace(format!(
                "need at least two states, got {}",
                labels.len()
            )));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l == ROOT_SYMBOL || l.contains(['.', ',']) {
                return Err(Error::InvalidStateSpace(format!("bad label `{l}`")));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidStateSpace(format!("duplicate label `{l}`")));
            }
        }
        Ok(Self { labels })
    }

    /// States labelled `a`, `b`, `c`, ...
    pub fn alphabetic(size: usize) -> Result<Self> {
        if size > 26 {
            return Err(Error::InvalidStateSpace(format!("{size} states")));
        }
        Self::new((0..size).map(|i| char::from(b'a' + i as u8).to_string()))
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    fn single_char(&self) -> bool {
        self.labels.iter().all(|l| l.chars().count() == 1)
    }

    /// Parses `""`/`"□"` as the root, `"ab"` when every label is a single
    /// character, and `"x.y"` (or `"x,y"`) otherwise.
    pub fn parse_situation(&self, text: &str) -> Result<Situation> {
        let text = text.trim();
        if text.is_empty() || text == ROOT_SYMBOL {
            return Ok(Situation::root());
        }
        let states = if text.contains(['.', ',']) || !self.single_char() {
            text.split(['.', ','])
                .map(|part| self.index(part.trim()))
                .collect::<Result<Vec<_>>>()?
        } else {
            text.chars()
                .map(|c| self.index(&c.to_string()))
                .collect::<Result<Vec<_>>>()?
        };
        Ok(Situation(states))
    }

    /// File form of a situation: the empty string for the root.
    pub fn format_situation(&self, s: &Situation) -> String {
        let sep = if self.single_char() { "" } else { "." };
        s.0.iter()
            .map(|&i| self.labels[i].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    /// Human form of a situation: `□` for the root.
    pub fn display_situation(&self, s: &Situation) -> String {
        if s.is_root() {
            ROOT_SYMBOL.to_string()
        } else {
            self.format_situation(s)
        }
    }

    pub fn check(&self, s: &Situation) -> Result<()> {
        match s.0.iter().find(|&&x| x >= self.size()) {
            Some(&x) => Err(Error::UnknownState(format!("index {x}"))),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<String>> for StateSpace {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<StateSpace> for Vec<String> {
    fn from(space: StateSpace) -> Self {
        space.labels
    }
}

/// A finite sequence of state indices `x_1 ... x_k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Situation(pub Vec<usize>);

impl Situation {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn new(states: Vec<usize>) -> Self {
        Self(states)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn states(&self) -> &[usize] {
        &self.0
    }

    pub fn last(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// The situation `s x`.
    pub fn child(&self, x: usize) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(x);
        Self(v)
    }

    /// The first `k` states, or the whole situation if it is shorter.
    pub fn prefix(&self, k: usize) -> Self {
        Self(self.0[..k.min(self.0.len())].to_vec())
    }

    /// `self ⊑ other`, i.e. `Γ(other) ⊆ Γ(self)`.
    pub fn is_prefix_of(&self, other: &Situation) -> bool {
        is_prefix(self, other)
    }

    /// All situations of length exactly `len` in lexicographic order.
    pub fn all_of_length(arity: usize, len: usize) -> impl Iterator<Item = Situation> {
        let count = arity.checked_pow(len as u32).unwrap_or(usize::MAX);
        (0..count).map(move |mut code| {
            let mut states = vec![0; len];
            for slot in states.iter_mut().rev() {
                *slot = code % arity;
                code /= arity;
            }
            Situation(states)
        })
    }

    /// Descendants `t` of `self` with `len(t) == len`, lexicographic.
    pub fn extensions(&self, arity: usize, len: usize) -> impl Iterator<Item = Situation> + '_ {
        let extra = len.saturating_sub(self.len());
        Situation::all_of_length(arity, extra).map(move |tail| {
            let mut v = self.0.clone();
            v.extend(tail.0);
            Situation(v)
        })
    }
}

impl From<Vec<usize>> for Situation {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl fmt::Display for Situation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(ROOT_SYMBOL);
        }
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

/// True iff `s` is an initial segment of `t`.
pub fn is_prefix(s: &Situation, t: &Situation) -> bool {
    s.len() <= t.len() && t.0[..s.len()] == s.0[..]
}

/// Canonical order used for selections and reports: by length, then
/// lexicographically.
pub fn canonical_cmp(a: &Situation, b: &Situation) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0))
}
