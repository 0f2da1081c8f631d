//! Precise and imprecise probability trees, compatibility, and vertex
//! selections.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::local::{is_dominated, CredalSet, MassFunction};
use crate::space::{canonical_cmp, Situation, StateSpace};
use crate::TOLERANCE;

/// Something that can be attached to a node of an event tree.
pub trait LocalModel: Clone + Send + Sync {
    fn dimension(&self) -> usize;
}

impl LocalModel for CredalSet {
    fn dimension(&self) -> usize {
        CredalSet::dimension(self)
    }
}

impl LocalModel for MassFunction {
    fn dimension(&self) -> usize {
        self.len()
    }
}

/// How local models are assigned to situations.
#[derive(Debug, Clone, PartialEq)]
pub enum Rule<M> {
    /// The same model everywhere.
    Uniform(M),
    /// Model depends on the last state only; `root` is used at `□`.
    Stationary { root: M, by_state: Vec<M> },
    /// A model for every situation of length `< depth`. `levels[k]` lists
    /// the situations of length `k` in lexicographic order.
    Explicit { depth: usize, levels: Vec<Vec<M>> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree<M> {
    space: StateSpace,
    rule: Rule<M>,
}

pub type ImpreciseTree = Tree<CredalSet>;
pub type PreciseTree = Tree<MassFunction>;

fn level_index(arity: usize, s: &Situation) -> usize {
    s.states().iter().fold(0, |acc, &x| acc * arity + x)
}

impl<M: LocalModel> Tree<M> {
    pub fn new(space: StateSpace, rule: Rule<M>) -> Result<Self> {
        let n = space.size();
        let check = |m: &M| -> Result<()> {
            if m.dimension() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: m.dimension(),
                });
            }
            Ok(())
        };
        match &rule {
            Rule::Uniform(m) => check(m)?,
            Rule::Stationary { root, by_state } => {
                check(root)?;
                if by_state.len() != n {
                    return Err(Error::Spec(format!(
                        "stationary rule needs {n} state models, got {}",
                        by_state.len()
                    )));
                }
                by_state.iter().try_for_each(check)?;
            }
            Rule::Explicit { depth, levels } => {
                if levels.len() != *depth {
                    return Err(Error::Spec(format!(
                        "explicit tree of depth {depth} has {} levels",
                        levels.len()
                    )));
                }
                for (k, level) in levels.iter().enumerate() {
                    let expected = n.pow(k as u32);
                    if level.len() != expected {
                        return Err(Error::Spec(format!(
                            "level {k} has {} models, expected {expected}",
                            level.len()
                        )));
                    }
                    level.iter().try_for_each(check)?;
                }
            }
        }
        Ok(Self { space, rule })
    }

    pub fn uniform(space: StateSpace, m: M) -> Result<Self> {
        Self::new(space, Rule::Uniform(m))
    }

    pub fn stationary(space: StateSpace, root: M, by_state: Vec<M>) -> Result<Self> {
        Self::new(space, Rule::Stationary { root, by_state })
    }

    /// Explicit tree from a function evaluated on every situation shorter
    /// than `depth`.
    pub fn explicit_from_fn(
        space: StateSpace,
        depth: usize,
        mut f: impl FnMut(&Situation) -> M,
    ) -> Result<Self> {
        let n = space.size();
        let levels = (0..depth)
            .map(|k| Situation::all_of_length(n, k).map(|t| f(&t)).collect())
            .collect();
        Self::new(space, Rule::Explicit { depth, levels })
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.space.size()
    }

    pub fn rule(&self) -> &Rule<M> {
        &self.rule
    }

    /// `Some(D)` for explicit trees.
    pub fn depth_limit(&self) -> Option<usize> {
        match &self.rule {
            Rule::Explicit { depth, .. } => Some(*depth),
            _ => None,
        }
    }

    /// The local model attached to `s`.
    pub fn model_at(&self, s: &Situation) -> Result<&M> {
        match &self.rule {
            Rule::Uniform(m) => Ok(m),
            Rule::Stationary { root, by_state } => Ok(match s.last() {
                None => root,
                Some(x) => &by_state[x],
            }),
            Rule::Explicit { depth, levels } => {
                if s.len() >= *depth {
                    return Err(Error::DepthExceeded {
                        len: s.len(),
                        depth: *depth,
                    });
                }
                Ok(&levels[s.len()][level_index(self.arity(), s)])
            }
        }
    }

    /// Converts to an explicit tree of the given depth.
    pub fn to_explicit(&self, depth: usize) -> Result<Self> {
        if let Some(d) = self.depth_limit() {
            if depth > d {
                return Err(Error::DepthExceeded { len: depth, depth: d });
            }
        }
        Self::explicit_from_fn(self.space.clone(), depth, |t| {
            self.model_at(t).expect("depth checked").clone()
        })
    }

    /// Largest situation length that must be inspected to see every
    /// distinct local model up to `depth`: rule trees repeat after length 1.
    fn inspection_depth(&self, depth: usize) -> usize {
        match self.rule {
            Rule::Explicit { .. } => depth,
            _ => depth.min(2),
        }
    }
}

impl PreciseTree {
    /// `(1 − λ)·p + λ·q` at every situation shorter than `depth`; rule
    /// trees stay rule trees.
    pub fn mixture(p: &Self, q: &Self, lambda: f64, depth: usize) -> Result<Self> {
        if p.space != q.space {
            return Err(Error::Spec("mixing trees over different state spaces".into()));
        }
        let mix = |a: &MassFunction, b: &MassFunction| a.mix(b, lambda);
        match (&p.rule, &q.rule) {
            (Rule::Uniform(a), Rule::Uniform(b)) => Self::uniform(p.space.clone(), mix(a, b)?),
            (Rule::Explicit { .. }, _) | (_, Rule::Explicit { .. }) => {
                let mut err = None;
                let tree = Self::explicit_from_fn(p.space.clone(), depth, |t| {
                    let r = p
                        .model_at(t)
                        .and_then(|a| q.model_at(t).and_then(|b| mix(a, b)));
                    r.unwrap_or_else(|e| {
                        err.get_or_insert(e);
                        MassFunction::uniform(p.arity())
                    })
                })?;
                match err {
                    Some(e) => Err(e),
                    None => Ok(tree),
                }
            }
            _ => {
                let root = mix(p.model_at(&Situation::root())?, q.model_at(&Situation::root())?)?;
                let by_state = (0..p.arity())
                    .map(|x| {
                        let t = Situation(vec![x]);
                        mix(p.model_at(&t)?, q.model_at(&t)?)
                    })
                    .collect::<Result<_>>()?;
                Self::stationary(p.space.clone(), root, by_state)
            }
        }
    }
}

/// True iff `p(·|s)` is dominated by `P_s` at every situation of length
/// `< depth`. Only ever claims compatibility up to that depth.
pub fn is_compatible(p: &PreciseTree, big_p: &ImpreciseTree, depth: usize) -> Result<bool> {
    if p.space != big_p.space {
        return Err(Error::Spec("trees over different state spaces".into()));
    }
    let depth = p.inspection_depth(depth).max(big_p.inspection_depth(depth));
    for k in 0..depth {
        for t in Situation::all_of_length(p.arity(), k) {
            let local = p.model_at(&t)?;
            let credal = big_p.model_at(&t)?;
            if !is_dominated(local, credal, &[], TOLERANCE)?.is_dominated() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One vertex index per relevant situation, in canonical order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSelection(pub Vec<(Situation, usize)>);

impl VertexSelection {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, t: &Situation) -> Option<usize> {
        self.0
            .binary_search_by(|(u, _)| canonical_cmp(u, t))
            .ok()
            .map(|i| self.0[i].1)
    }

    /// Precise tree of the given depth picking the selected vertex at
    /// selected situations and vertex 0 elsewhere.
    pub fn tree(&self, big_p: &ImpreciseTree, depth: usize) -> Result<PreciseTree> {
        let chosen: BTreeMap<&Situation, usize> = self.0.iter().map(|(t, v)| (t, *v)).collect();
        let mut err = None;
        let tree = PreciseTree::explicit_from_fn(big_p.space().clone(), depth, |t| {
            let picked = big_p.model_at(t).and_then(|k| {
                let v = chosen.get(t).copied().unwrap_or(0);
                k.vertices().get(v).cloned().ok_or_else(|| {
                    Error::Spec(format!("vertex {v} out of range at {t}"))
                })
            });
            picked.unwrap_or_else(|e| {
                err.get_or_insert(e);
                MassFunction::uniform(big_p.arity())
            })
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok(tree),
        }
    }
}

/// Situations `t` with `s ⊑ t` and `len(t) < n`, canonical order.
pub fn relevant_situations(arity: usize, s: &Situation, n: usize) -> Vec<Situation> {
    (s.len()..n).flat_map(|k| s.extensions(arity, k)).collect()
}

/// Deterministic stream of every vertex-selection tree for `(s, n)`.
pub struct VertexTrees<'a> {
    tree: &'a ImpreciseTree,
    relevant: Vec<Situation>,
    radices: Vec<usize>,
    next: Option<Vec<usize>>,
    horizon: usize,
    count: u128,
}

impl VertexTrees<'_> {
    /// Total number of trees in the stream.
    pub fn count_total(&self) -> u128 {
        self.count
    }

    pub fn relevant(&self) -> &[Situation] {
        &self.relevant
    }
}

impl Iterator for VertexTrees<'_> {
    type Item = Result<(VertexSelection, PreciseTree)>;

    fn next(&mut self) -> Option<Self::Item> {
        let digits = self.next.take()?;
        let mut succ = digits.clone();
        // Last situation varies fastest.
        let mut carry = true;
        for (d, r) in succ.iter_mut().zip(&self.radices).rev() {
            if !carry {
                break;
            }
            *d += 1;
            if *d == *r {
                *d = 0;
            } else {
                carry = false;
            }
        }
        if !carry {
            self.next = Some(succ);
        }
        let selection = VertexSelection(self.relevant.iter().cloned().zip(digits).collect());
        Some(
            selection
                .tree(self.tree, self.horizon)
                .map(|t| (selection, t)),
        )
    }
}

/// Product of vertex counts over the relevant situations, saturating.
pub fn vertex_tree_count(big_p: &ImpreciseTree, s: &Situation, n: usize) -> Result<u128> {
    relevant_situations(big_p.arity(), s, n)
        .iter()
        .try_fold(1u128, |acc, t| {
            Ok(acc.saturating_mul(big_p.model_at(t)?.vertex_count() as u128))
        })
}

/// Every precise tree obtained by choosing one vertex per relevant
/// situation. Fails with `BudgetExceeded` when there are more than `budget`.
pub fn enumerate_vertex_trees<'a>(
    big_p: &'a ImpreciseTree,
    s: &Situation,
    n: usize,
    budget: u128,
) -> Result<VertexTrees<'a>> {
    let relevant = relevant_situations(big_p.arity(), s, n);
    let radices = relevant
        .iter()
        .map(|t| Ok(big_p.model_at(t)?.vertex_count()))
        .collect::<Result<Vec<_>>>()?;
    let count = radices
        .iter()
        .fold(1u128, |acc, &r| acc.saturating_mul(r as u128));
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    Ok(VertexTrees {
        tree: big_p,
        next: Some(vec![0; relevant.len()]),
        relevant,
        radices,
        horizon: n,
        count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> StateSpace {
        StateSpace::alphabetic(2).unwrap()
    }

    fn k2() -> CredalSet {
        CredalSet::from_vectors(vec![vec![0.4, 0.6], vec![0.7, 0.3]]).unwrap()
    }

    fn mf(v: &[f64]) -> MassFunction {
        MassFunction::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rule_lookups() {
        let u = ImpreciseTree::uniform(ab(), k2()).unwrap();
        assert_eq!(u.model_at(&Situation(vec![0, 1, 1])).unwrap(), &k2());

        let ka = CredalSet::precise(mf(&[0.5, 0.5]));
        let kb = CredalSet::precise(mf(&[0.0, 1.0]));
        let st = ImpreciseTree::stationary(ab(), ka.clone(), vec![ka.clone(), kb.clone()]).unwrap();
        assert_eq!(st.model_at(&Situation(vec![0, 1])).unwrap(), &kb);
        assert_eq!(st.model_at(&Situation::root()).unwrap(), &ka);

        let ex = st.to_explicit(2).unwrap();
        assert!(matches!(
            ex.model_at(&Situation(vec![0, 0, 0])),
            Err(Error::DepthExceeded { len: 3, depth: 2 })
        ));
    }

    #[test]
    fn stationary_and_explicit_agree() {
        let k3 = |p: &[f64]| CredalSet::linear_vacuous(&MassFunction::new(p.to_vec()).unwrap(), 0.2).unwrap();
        let space = StateSpace::alphabetic(3).unwrap();
        let st = ImpreciseTree::stationary(
            space,
            k3(&[0.2, 0.3, 0.5]),
            vec![k3(&[0.6, 0.2, 0.2]), k3(&[0.1, 0.8, 0.1]), k3(&[0.3, 0.3, 0.4])],
        )
        .unwrap();
        let ex = st.to_explicit(4).unwrap();
        for k in 0..4 {
            for t in Situation::all_of_length(3, k) {
                assert_eq!(st.model_at(&t).unwrap(), ex.model_at(&t).unwrap());
            }
        }
    }

    #[test]
    fn compatibility_examples() {
        let big = ImpreciseTree::uniform(ab(), k2()).unwrap();
        let outside = PreciseTree::uniform(ab(), mf(&[0.9, 0.1])).unwrap();
        assert!(!is_compatible(&outside, &big, 3).unwrap());

        let p = mf(&[0.3, 0.7]);
        let precise_big = ImpreciseTree::uniform(ab(), CredalSet::precise(p.clone())).unwrap();
        let same = PreciseTree::uniform(ab(), p).unwrap();
        assert!(is_compatible(&same, &precise_big, 5).unwrap());
    }

    #[test]
    fn enumeration_counts() {
        let big = ImpreciseTree::uniform(ab(), k2()).unwrap();
        let trees: Vec<_> = enumerate_vertex_trees(&big, &Situation::root(), 2, 1_000)
            .unwrap()
            .collect::<Result<_>>()
            .unwrap();
        assert_eq!(trees.len(), 8);
        for (sel, t) in &trees {
            assert_eq!(sel.len(), 3);
            assert!(is_compatible(t, &big, 2).unwrap());
        }
        // distinct selections
        for i in 0..trees.len() {
            for j in i + 1..trees.len() {
                assert_ne!(trees[i].0, trees[j].0);
            }
        }
        assert_eq!(
            enumerate_vertex_trees(&big, &Situation::root(), 0, 1).unwrap().count(),
            1
        );
        let precise = ImpreciseTree::uniform(ab(), CredalSet::precise(mf(&[0.5, 0.5]))).unwrap();
        assert_eq!(
            enumerate_vertex_trees(&precise, &Situation::root(), 4, 1).unwrap().count(),
            1
        );
        assert!(matches!(
            enumerate_vertex_trees(&big, &Situation::root(), 3, 100),
            Err(Error::BudgetExceeded { count: 128, budget: 100 })
        ));
        assert_eq!(vertex_tree_count(&big, &Situation(vec![1]), 3).unwrap(), 8);
    }

    #[test]
    fn enumeration_count_matches_product() {
        let k3 = CredalSet::vacuous(3);
        let space = StateSpace::alphabetic(3).unwrap();
        let big = ImpreciseTree::stationary(
            space,
            CredalSet::precise(MassFunction::uniform(3)),
            vec![k3.clone(), CredalSet::precise(MassFunction::uniform(3)), k3],
        )
        .unwrap();
        let s = Situation::root();
        let expected = vertex_tree_count(&big, &s, 3).unwrap();
        // root: 1; length 1: 3·1·3 = 9; length 2: nine situations, six end in a or c
        assert_eq!(expected, 9 * 3u128.pow(6));
        let streamed = enumerate_vertex_trees(&big, &s, 3, u128::MAX).unwrap();
        assert_eq!(streamed.count_total(), expected);
    }

    #[test]
    fn mixtures_stay_in_rule_form() {
        let p = PreciseTree::uniform(ab(), mf(&[0.2, 0.8])).unwrap();
        let q = PreciseTree::uniform(ab(), mf(&[0.6, 0.4])).unwrap();
        let m = PreciseTree::mixture(&p, &q, 0.25, 5).unwrap();
        assert!(matches!(m.rule(), Rule::Uniform(_)));
        let got = m.model_at(&Situation::root()).unwrap().probs().to_vec();
        assert!((got[0] - 0.3).abs() < 1e-12);
    }
}
