//! Finitary gambles.
//!
//! A finitary gamble with horizon `n` assigns a real value to every situation
//! of length `n`. Values are stored on a cylinder trie: a leaf at situation
//! `t` means the gamble is constant on `Γ(t)`. A fully branched trie of depth
//! `n` is the dense table over `X^n`; gambles that settle early (hitting
//! indicators, truncated hitting times) stay linear in the horizon instead of
//! exponential.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::Situation;

/// One node of a cylinder trie. Children are shared, so cloning is cheap and
/// identical subtrees may be aliased.
#[derive(Debug, Clone)]
pub enum Node {
    Leaf(f64),
    Branch(Arc<[Node]>),
}

impl Node {
    /// Builds a branch, collapsing it to a leaf when every child is the same
    /// leaf value.
    pub fn branch(children: Vec<Node>) -> Node {
        if let Some(Node::Leaf(first)) = children.first() {
            let first = *first;
            if children
                .iter()
                .all(|c| matches!(c, Node::Leaf(v) if *v == first))
            {
                return Node::Leaf(first);
            }
        }
        Node::Branch(children.into())
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf(_))
    }

    /// Identity of a shared branch.
    fn id(&self) -> Option<usize> {
        match self {
            Node::Leaf(_) => None,
            Node::Branch(cs) => Some(cs.as_ptr() as usize),
        }
    }

    // Traversals below memoize on shared branches, so aliased subtries are
    // visited once.

    fn extremes(&self) -> (f64, f64) {
        fn go(n: &Node, memo: &mut HashMap<usize, (f64, f64)>) -> (f64, f64) {
            let Node::Branch(cs) = n else {
                let Node::Leaf(v) = n else { unreachable!() };
                return (*v, *v);
            };
            let id = n.id().expect("branch");
            if let Some(&e) = memo.get(&id) {
                return e;
            }
            let e = cs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                let (a, b) = go(c, memo);
                (lo.min(a), hi.max(b))
            });
            memo.insert(id, e);
            e
        }
        go(self, &mut HashMap::new())
    }

    fn depth(&self) -> usize {
        fn go(n: &Node, memo: &mut HashMap<usize, usize>) -> usize {
            let Node::Branch(cs) = n else { return 0 };
            let id = n.id().expect("branch");
            if let Some(&d) = memo.get(&id) {
                return d;
            }
            let d = 1 + cs.iter().map(|c| go(c, memo)).max().unwrap_or(0);
            memo.insert(id, d);
            d
        }
        go(self, &mut HashMap::new())
    }

    /// Distinct stored nodes.
    fn count(&self) -> usize {
        fn go(n: &Node, seen: &mut HashSet<usize>) -> usize {
            let Node::Branch(cs) = n else { return 1 };
            if !seen.insert(n.id().expect("branch")) {
                return 0;
            }
            1 + cs.iter().map(|c| go(c, seen)).sum::<usize>()
        }
        go(self, &mut HashSet::new())
    }

    fn map(&self, f: &impl Fn(f64) -> f64) -> Node {
        fn go(n: &Node, f: &impl Fn(f64) -> f64, memo: &mut HashMap<usize, Node>) -> Node {
            match n {
                Node::Leaf(v) => Node::Leaf(f(*v)),
                Node::Branch(cs) => {
                    let id = n.id().expect("branch");
                    if let Some(m) = memo.get(&id) {
                        return m.clone();
                    }
                    let m = Node::branch(cs.iter().map(|c| go(c, f, memo)).collect());
                    memo.insert(id, m.clone());
                    m
                }
            }
        }
        go(self, f, &mut HashMap::new())
    }

    fn zip(&self, other: &Node, op: &impl Fn(f64, f64) -> f64) -> Node {
        type Key = (Result<usize, u64>, Result<usize, u64>);
        fn key(n: &Node) -> Result<usize, u64> {
            match n {
                Node::Leaf(v) => Err(v.to_bits()),
                Node::Branch(_) => Ok(n.id().expect("branch")),
            }
        }
        fn go(a: &Node, b: &Node, op: &impl Fn(f64, f64) -> f64, memo: &mut HashMap<Key, Node>) -> Node {
            if let (Node::Leaf(x), Node::Leaf(y)) = (a, b) {
                return Node::Leaf(op(*x, *y));
            }
            let k = (key(a), key(b));
            if let Some(m) = memo.get(&k) {
                return m.clone();
            }
            let m = match (a, b) {
                (Node::Leaf(_), Node::Branch(cs)) => Node::branch(cs.iter().map(|c| go(a, c, op, memo)).collect()),
                (Node::Branch(cs), Node::Leaf(_)) => Node::branch(cs.iter().map(|c| go(c, b, op, memo)).collect()),
                (Node::Branch(xs), Node::Branch(ys)) => {
                    Node::branch(xs.iter().zip(ys.iter()).map(|(x, y)| go(x, y, op, memo)).collect())
                }
                (Node::Leaf(_), Node::Leaf(_)) => unreachable!("handled above"),
            };
            memo.insert(k, m.clone());
            m
        }
        go(self, other, op, &mut HashMap::new())
    }
}

/// A bounded real variable depending only on the first `horizon` states.
#[derive(Debug, Clone)]
pub struct FinitaryGamble {
    arity: usize,
    horizon: usize,
    root: Node,
    lo: f64,
    hi: f64,
}

impl FinitaryGamble {
    /// Wraps a trie. The declared horizon must cover the trie depth and every
    /// branch must have `arity` children.
    pub fn from_node(arity: usize, horizon: usize, root: Node) -> Result<Self> {
        fn validate(node: &Node, arity: usize, seen: &mut HashSet<usize>) -> Result<()> {
            match node {
                Node::Leaf(v) if v.is_finite() => Ok(()),
                Node::Leaf(v) => Err(Error::Spec(format!("non-finite gamble value {v}"))),
                Node::Branch(cs) if cs.len() != arity => Err(Error::DimensionMismatch {
                    expected: arity,
                    got: cs.len(),
                }),
                Node::Branch(cs) => {
                    if !seen.insert(node.id().expect("branch")) {
                        return Ok(());
                    }
                    cs.iter().try_for_each(|c| validate(c, arity, seen))
                }
            }
        }
        validate(&root, arity, &mut HashSet::new())?;
        let depth = root.depth();
        if depth > horizon {
            return Err(Error::Spec(format!(
                "trie depth {depth} exceeds declared horizon {horizon}"
            )));
        }
        Ok(Self::wrap(arity, horizon, root))
    }

    fn wrap(arity: usize, horizon: usize, root: Node) -> Self {
        let (lo, hi) = root.extremes();
        Self {
            arity,
            horizon,
            root,
            lo,
            hi,
        }
    }

    /// Tabulates `f` on every situation of length `horizon`.
    pub fn from_fn(arity: usize, horizon: usize, f: impl Fn(&Situation) -> f64) -> Result<Self> {
        fn build(
            arity: usize,
            horizon: usize,
            t: &mut Vec<usize>,
            f: &impl Fn(&Situation) -> f64,
        ) -> Node {
            if t.len() == horizon {
                return Node::Leaf(f(&Situation(t.clone())));
            }
            let children = (0..arity)
                .map(|x| {
                    t.push(x);
                    let c = build(arity, horizon, t, f);
                    t.pop();
                    c
                })
                .collect();
            Node::branch(children)
        }
        let root = build(arity, horizon, &mut Vec::with_capacity(horizon), &f);
        Self::from_node(arity, horizon, root)
    }

    /// Values listed for `X^horizon` in lexicographic order.
    pub fn from_table(arity: usize, horizon: usize, values: &[f64]) -> Result<Self> {
        let expected = arity.pow(horizon as u32);
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Self::from_fn(arity, horizon, |t| {
            let code = t.states().iter().fold(0, |acc, &x| acc * arity + x);
            values[code]
        })
    }

    pub fn constant(arity: usize, c: f64) -> Self {
        Self::wrap(arity, 0, Node::Leaf(c))
    }

    /// Indicator of the cylinder `Γ(s)`.
    pub fn indicator(arity: usize, s: &Situation) -> Self {
        let mut node = Node::Leaf(1.0);
        for &x in s.states().iter().rev() {
            let children = (0..arity)
                .map(|y| if y == x { node.clone() } else { Node::Leaf(0.0) })
                .collect();
            node = Node::branch(children);
        }
        Self::wrap(arity, s.len(), node)
    }

    /// The gamble `g(X_{k+1})` for a local gamble `g` on the state space.
    pub fn local(arity: usize, k: usize, g: &[f64]) -> Result<Self> {
        if g.len() != arity {
            return Err(Error::DimensionMismatch {
                expected: arity,
                got: g.len(),
            });
        }
        let mut node = Node::branch(g.iter().map(|&v| Node::Leaf(v)).collect());
        for _ in 0..k {
            node = Node::branch(vec![node; arity]);
        }
        Self::from_node(arity, k + 1, node)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Pointwise infimum.
    pub fn lo(&self) -> f64 {
        self.lo
    }

    /// Pointwise supremum.
    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Number of trie nodes.
    pub fn size(&self) -> usize {
        self.root.count()
    }

    /// Value on any path through `t`; requires `len(t) ≥ horizon`.
    pub fn value(&self, t: &Situation) -> Result<f64> {
        if t.len() < self.horizon {
            return Err(Error::SituationTooShort {
                len: t.len(),
                horizon: self.horizon,
            });
        }
        Ok(self
            .constant_on(t)
            .expect("trie depth never exceeds the declared horizon"))
    }

    /// The value if the gamble is constant on `Γ(t)`.
    pub fn constant_on(&self, t: &Situation) -> Option<f64> {
        match self.node_at(t) {
            Node::Leaf(v) => Some(*v),
            Node::Branch(_) => None,
        }
    }

    /// Trie node for `Γ(t)`; stops early at a leaf.
    pub fn node_at(&self, t: &Situation) -> &Node {
        let mut node = &self.root;
        for &x in t.states() {
            match node {
                Node::Leaf(_) => break,
                Node::Branch(cs) => node = &cs[x],
            }
        }
        node
    }

    /// `sup` of the gamble over `Γ(t)`.
    pub fn cylinder_sup(&self, t: &Situation) -> f64 {
        self.node_at(t).extremes().1
    }

    /// `inf` of the gamble over `Γ(t)`.
    pub fn cylinder_inf(&self, t: &Situation) -> f64 {
        self.node_at(t).extremes().0
    }

    /// Same variable seen as `m`-measurable.
    pub fn lift(&self, m: usize) -> Self {
        assert!(m >= self.horizon, "cannot lower the horizon by lifting");
        Self {
            horizon: m,
            ..self.clone()
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::wrap(self.arity, self.horizon, self.root.map(&f))
    }

    /// Pointwise combination; the result has the larger horizon.
    pub fn zip_with(&self, other: &Self, op: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.arity, other.arity, "gambles over different state spaces");
        Self::wrap(
            self.arity,
            self.horizon.max(other.horizon),
            self.root.zip(&other.root, &op),
        )
    }

    /// Upper cut `f ∧ c`.
    pub fn cut_upper(&self, c: f64) -> Self {
        self.map(|v| v.min(c))
    }

    /// Lower cut `f ∨ c`.
    pub fn cut_lower(&self, c: f64) -> Self {
        self.map(|v| v.max(c))
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn add_const(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        self.map(|v| lambda * v)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    /// `f · 1_s`.
    pub fn restrict(&self, s: &Situation) -> Self {
        let ind = Self::indicator(self.arity, s);
        self.zip_with(&ind, |a, b| a * b)
    }

    /// Largest pointwise gap `|f − g|`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let d = self.zip_with(other, |a, b| (a - b).abs());
        d.hi
    }

    /// Every `(situation, value)` pair on `X^horizon` in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = (Situation, f64)> + '_ {
        Situation::all_of_length(self.arity, self.horizon).map(move |t| {
            let v = self.constant_on(&t).expect("full-length situation");
            (t, v)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sit(v: &[usize]) -> Situation {
        Situation(v.to_vec())
    }

    #[test]
    fn indicator_values() {
        let f = FinitaryGamble::indicator(2, &sit(&[0]));
        assert_eq!(f.horizon(), 1);
        assert_eq!(f.value(&sit(&[0, 1])).unwrap(), 1.0);
        assert_eq!(f.value(&sit(&[1, 0])).unwrap(), 0.0);
    }

    #[test]
    fn short_situation_is_rejected() {
        let f = FinitaryGamble::indicator(2, &sit(&[0, 1]));
        assert!(matches!(
            f.value(&sit(&[0])),
            Err(Error::SituationTooShort { len: 1, horizon: 2 })
        ));
    }

    #[test]
    fn cut_examples() {
        let f = FinitaryGamble::indicator(2, &sit(&[0]));
        let same = f.cut_upper(1.0);
        assert_eq!(same.max_abs_diff(&f), 0.0);

        let cut = f.cut_upper(0.5);
        assert_eq!(cut.value(&sit(&[0])).unwrap(), 0.5);
        assert_eq!(cut.value(&sit(&[1])).unwrap(), 0.0);
        assert_eq!(cut.horizon(), 1);
        assert_eq!(cut.bounds(), (0.0, 0.5));

        let flat = cut.cut_lower(0.5);
        for (_, v) in flat.cells() {
            assert_eq!(v, 0.5);
        }
        assert!(flat.root().is_leaf());
    }

    #[test]
    fn table_round_trip_and_collapse() {
        let f = FinitaryGamble::from_table(2, 2, &[1.0, 1.0, 0.0, 2.0]).unwrap();
        assert!(f.constant_on(&sit(&[0])).is_some());
        assert_eq!(f.constant_on(&sit(&[1])), None);
        let vals: Vec<f64> = f.cells().map(|(_, v)| v).collect();
        assert_eq!(vals, vec![1.0, 1.0, 0.0, 2.0]);
        assert_eq!(f.cylinder_sup(&sit(&[1])), 2.0);
        assert_eq!(f.cylinder_inf(&Situation::root()), 0.0);
        assert!(FinitaryGamble::from_table(2, 2, &[1.0]).is_err());
        assert!(FinitaryGamble::from_table(2, 1, &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn local_gamble_depends_on_one_coordinate() {
        let g = FinitaryGamble::local(3, 2, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(g.horizon(), 3);
        for (t, v) in g.cells() {
            assert_eq!(v, (t.states()[2] + 1) as f64);
        }
    }

    #[test]
    fn restrict_zeroes_outside_cylinder() {
        let f = FinitaryGamble::from_table(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let r = f.restrict(&sit(&[1]));
        let vals: Vec<f64> = r.cells().map(|(_, v)| v).collect();
        assert_eq!(vals, vec![0.0, 0.0, 3.0, 4.0]);
    }

    fn table_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
        (2usize..=3, 0usize..=3).prop_flat_map(|(arity, n)| {
            let len = arity.pow(n as u32);
            (
                Just(arity),
                Just(n),
                proptest::collection::vec(-5.0f64..5.0, len),
            )
        })
    }

    proptest! {
        #[test]
        fn lifting_preserves_values((arity, n, vals) in table_strategy(), extra in 0usize..3) {
            let f = FinitaryGamble::from_table(arity, n, &vals).unwrap();
            let m = n + extra;
            let lifted = f.lift(m);
            for t in Situation::all_of_length(arity, m + 1) {
                prop_assert_eq!(lifted.value(&t).unwrap(), f.value(&t).unwrap());
            }
        }

        #[test]
        fn upper_cuts_are_ordered((arity, n, vals) in table_strategy(), c1 in -5.0f64..5.0, c2 in -5.0f64..5.0) {
            let f = FinitaryGamble::from_table(arity, n, &vals).unwrap();
            let (lo_c, hi_c) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            let a = f.cut_upper(lo_c);
            let b = f.cut_upper(hi_c);
            for ((_, x), (_, y)) in a.lift(n).cells().zip(b.lift(n).cells()) {
                prop_assert!(x <= y);
            }
            prop_assert_eq!(f.cut_upper(f.hi()).max_abs_diff(&f), 0.0);
            prop_assert!(f.cut_upper(f.hi() - 1e-3).max_abs_diff(&f) <= 1e-3 + 1e-15);
        }
    }
}
