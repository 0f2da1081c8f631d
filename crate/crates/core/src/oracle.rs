//! The measure-theoretic route: cylinder probabilities, finitary
//! expectations as finite weighted sums, and the upper envelope of those
//! expectations over the precise trees compatible with an imprecise tree.
//!
//! The envelope is searched over vertex-selection trees restricted to the
//! situations the gamble actually branches on below the conditioning
//! situation. A linear functional over a product of polytopes attains its
//! maximum at a product of vertices, so full enumeration is exact.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamble::{FinitaryGamble, Node};
use crate::limit::{converge, ConvergenceControls, LimitResult, MonotoneVariable};
use crate::local::{CredalSet, MassFunction};
use crate::space::Situation;
use crate::tree::{ImpreciseTree, PreciseTree, VertexSelection};

/// A precise forecaster: one mass function per situation.
pub trait Transition: Sync {
    fn arity(&self) -> usize;
    fn mass_at(&self, t: &Situation) -> Result<&MassFunction>;
}

impl Transition for PreciseTree {
    fn arity(&self) -> usize {
        PreciseTree::arity(self)
    }

    fn mass_at(&self, t: &Situation) -> Result<&MassFunction> {
        self.model_at(t)
    }
}

/// The precise tree picked out of an imprecise tree by a vertex selection,
/// vertex 0 wherever nothing is selected. Unlike
/// [`VertexSelection::tree`] it never materializes a level table.
#[derive(Debug, Clone, Copy)]
pub struct Selected<'a> {
    pub tree: &'a ImpreciseTree,
    pub selection: &'a VertexSelection,
}

impl Transition for Selected<'_> {
    fn arity(&self) -> usize {
        self.tree.arity()
    }

    fn mass_at(&self, t: &Situation) -> Result<&MassFunction> {
        let k = self.tree.model_at(t)?;
        let v = self.selection.get(t).unwrap_or(0);
        k.vertices()
            .get(v)
            .ok_or_else(|| Error::Spec(format!("vertex {v} out of range at {t}")))
    }
}

/// `P_p(Γ(z) | s)`:
/// the product of `p(z_{i+1} | z_{1:i})` for `i = k..ℓ−1` when `k < ℓ` and
/// `z` extends `s`; 1 when `k ≥ ℓ` and `z` is a prefix of `s`; 0 otherwise.
pub fn cylinder_probability(p: &impl Transition, z: &Situation, s: &Situation) -> Result<f64> {
    let (k, l) = (s.len(), z.len());
    if k >= l {
        return Ok(if z.is_prefix_of(s) { 1.0 } else { 0.0 });
    }
    if !s.is_prefix_of(z) {
        return Ok(0.0);
    }
    let mut prob = 1.0;
    for i in k..l {
        let m = p.mass_at(&z.prefix(i))?;
        prob *= m.probs()[z.states()[i]];
    }
    Ok(prob)
}

/// `E_p(f | s) = Σ_{z ∈ X^n} f(z) P_p(Γ(z) | s)`, summed literally over the
/// full grid. Exponential in the horizon; the reference for
/// [`finitary_expectation`].
pub fn finitary_expectation_dense(
    p: &impl Transition,
    f: &FinitaryGamble,
    s: &Situation,
) -> Result<f64> {
    let mut total = 0.0;
    for (z, v) in f.cells() {
        let w = cylinder_probability(p, &z, s)?;
        if w != 0.0 {
            total += v * w;
        }
    }
    Ok(total)
}

/// `E_p(f | s)` as a weighted sum over the cylinders on which `f` is
/// constant: each such `Γ(z)` inside `Γ(s)` carries weight `P_p(Γ(z) | s)`,
/// accumulated top-down as a running product.
pub fn finitary_expectation(p: &impl Transition, f: &FinitaryGamble, s: &Situation) -> Result<f64> {
    let start = f.node_at(s);
    let mut total = 0.0;
    let mut stack: Vec<(&Node, Situation, f64)> = vec![(start, s.clone(), 1.0)];
    while let Some((node, t, w)) = stack.pop() {
        match node {
            Node::Leaf(v) => total += v * w,
            Node::Branch(children) => {
                let m = p.mass_at(&t)?;
                for (x, child) in children.iter().enumerate() {
                    let q = m.probs()[x];
                    if q != 0.0 {
                        stack.push((child, t.child(x), w * q));
                    }
                }
            }
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeControls {
    /// Largest number of vertex trees enumerated exhaustively.
    pub budget: u128,
    /// Random selections drawn when the budget is exceeded.
    pub samples: usize,
    pub seed: u64,
    /// Cap on greedy improvement sweeps in sampled mode.
    pub max_sweeps: usize,
}

impl Default for EnvelopeControls {
    fn default() -> Self {
        Self {
            budget: 1_000_000,
            samples: 1024,
            seed: 0,
            max_sweeps: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeResult {
    pub value: f64,
    /// Full enumeration; otherwise `value` is a certified lower bound.
    pub exact: bool,
    pub trees_evaluated: u128,
    pub argmax_selection: VertexSelection,
}

#[derive(Debug, Clone, Copy)]
enum Child {
    Leaf(f64),
    Node(usize),
}

struct PlanNode<'a> {
    situation: Situation,
    credal: &'a CredalSet,
    children: Vec<Child>,
}

/// Branching situations the oracle will enumerate before giving up.
pub const MAX_PLAN_NODES: usize = 1 << 20;

/// The branching situations of `f` below `s`, canonical order, each with
/// its credal set. `None` when `f` is already constant on `Γ(s)`.
struct Plan<'a> {
    nodes: Vec<PlanNode<'a>>,
}

impl<'a> Plan<'a> {
    fn build(big_p: &'a ImpreciseTree, f: &FinitaryGamble, s: &Situation) -> Result<Option<Self>> {
        let start = f.node_at(s);
        if start.is_leaf() {
            return Ok(None);
        }
        let mut nodes: Vec<PlanNode<'a>> = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        queue.push_back((start, s.clone()));
        let mut next_index = 1;
        while let Some((node, t)) = queue.pop_front() {
            let Node::Branch(cs) = node else {
                unreachable!("only branches are queued")
            };
            let mut children = Vec::with_capacity(cs.len());
            for (x, c) in cs.iter().enumerate() {
                match c {
                    Node::Leaf(v) => children.push(Child::Leaf(*v)),
                    Node::Branch(_) => {
                        if next_index >= MAX_PLAN_NODES {
                            return Err(Error::BudgetExceeded {
                                count: next_index as u128 + 1,
                                budget: MAX_PLAN_NODES as u128,
                            });
                        }
                        children.push(Child::Node(next_index));
                        next_index += 1;
                        queue.push_back((c, t.child(x)));
                    }
                }
            }
            nodes.push(PlanNode {
                credal: big_p.model_at(&t)?,
                situation: t,
                children,
            });
        }
        Ok(Some(Self { nodes }))
    }

    fn radices(&self) -> Vec<usize> {
        self.nodes.iter().map(|n| n.credal.vertex_count()).collect()
    }

    fn count(&self) -> u128 {
        self.radices()
            .iter()
            .fold(1u128, |acc, &r| acc.saturating_mul(r as u128))
    }

    fn evaluate(&self, choice: &[usize], stack: &mut Vec<(usize, f64)>) -> f64 {
        stack.clear();
        stack.push((0, 1.0));
        let mut total = 0.0;
        while let Some((i, w)) = stack.pop() {
            let node = &self.nodes[i];
            let p = node.credal.vertices()[choice[i]].probs();
            for (child, &q) in node.children.iter().zip(p) {
                if q == 0.0 {
                    continue;
                }
                match *child {
                    Child::Leaf(v) => total += v * (w * q),
                    Child::Node(j) => stack.push((j, w * q)),
                }
            }
        }
        total
    }

    fn selection(&self, choice: &[usize]) -> VertexSelection {
        VertexSelection(
            self.nodes
                .iter()
                .zip(choice)
                .map(|(n, &v)| (n.situation.clone(), v))
                .collect(),
        )
    }
}

fn decode(mut code: u128, radices: &[usize], out: &mut [usize]) {
    for (slot, &r) in out.iter_mut().zip(radices).rev() {
        *slot = (code % r as u128) as usize;
        code /= r as u128;
    }
}

/// Better value wins; ties go to the lower index.
fn better(a: (f64, u128), b: (f64, u128)) -> (f64, u128) {
    if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
        b
    } else {
        a
    }
}

/// `sup` of `E_p(f | s)` over compatible precise trees `p`.
pub fn measure_upper_finitary(
    big_p: &ImpreciseTree,
    f: &FinitaryGamble,
    s: &Situation,
    controls: &EnvelopeControls,
) -> Result<EnvelopeResult> {
    let Some(plan) = Plan::build(big_p, f, s)? else {
        return Ok(EnvelopeResult {
            value: f.constant_on(s).expect("leaf at s"),
            exact: true,
            trees_evaluated: 1,
            argmax_selection: VertexSelection::default(),
        });
    };
    let radices = plan.radices();
    let count = plan.count();
    if count <= controls.budget && count <= u64::MAX as u128 {
        let len = radices.len();
        let (value, code) = (0..count as u64)
            .into_par_iter()
            .map_init(
                || (vec![0usize; len], Vec::new()),
                |(choice, stack), code| {
                    decode(code as u128, &radices, choice);
                    (plan.evaluate(choice, stack), code as u128)
                },
            )
            .reduce(|| (f64::NEG_INFINITY, u128::MAX), better);
        let mut choice = vec![0; len];
        decode(code, &radices, &mut choice);
        return Ok(EnvelopeResult {
            value,
            exact: true,
            trees_evaluated: count,
            argmax_selection: plan.selection(&choice),
        });
    }
    Ok(sampled_envelope(&plan, &radices, controls))
}

/// Random selections followed by coordinate-wise improvement, deepest
/// situations first. Every value reported is attained by an actual tree.
fn sampled_envelope(plan: &Plan<'_>, radices: &[usize], controls: &EnvelopeControls) -> EnvelopeResult {
    let mut rng = ChaCha8Rng::seed_from_u64(controls.seed);
    let mut candidates: Vec<Vec<usize>> = vec![vec![0; radices.len()]];
    for _ in 0..controls.samples {
        candidates.push(radices.iter().map(|&r| rng.gen_range(0..r)).collect());
    }
    let (mut best, index) = candidates
        .par_iter()
        .enumerate()
        .map_init(Vec::new, |stack, (i, c)| (plan.evaluate(c, stack), i as u128))
        .reduce(|| (f64::NEG_INFINITY, u128::MAX), better);
    let mut evaluated = candidates.len() as u128;
    let mut choice = candidates.swap_remove(index as usize);
    let mut stack = Vec::new();
    for _ in 0..controls.max_sweeps {
        let mut improved = false;
        for i in (0..radices.len()).rev() {
            let mut keep = choice[i];
            for v in 0..radices[i] {
                if v == keep {
                    continue;
                }
                choice[i] = v;
                let value = plan.evaluate(&choice, &mut stack);
                evaluated += 1;
                if value > best {
                    best = value;
                    keep = v;
                    improved = true;
                }
            }
            choice[i] = keep;
        }
        if !improved {
            break;
        }
    }
    EnvelopeResult {
        value: best,
        exact: false,
        trees_evaluated: evaluated,
        argmax_selection: plan.selection(&choice),
    }
}

/// `−measure_upper_finitary(−f)`; the selection is the minimizing one.
pub fn measure_lower_finitary(
    big_p: &ImpreciseTree,
    f: &FinitaryGamble,
    s: &Situation,
    controls: &EnvelopeControls,
) -> Result<EnvelopeResult> {
    let mut r = measure_upper_finitary(big_p, &f.neg(), s, controls)?;
    r.value = -r.value;
    Ok(r)
}

/// Re-evaluates `E_p(f | s)` for the tree picked out by `selection`.
pub fn evaluate_selection(
    big_p: &ImpreciseTree,
    f: &FinitaryGamble,
    s: &Situation,
    selection: &VertexSelection,
) -> Result<f64> {
    finitary_expectation(
        &Selected {
            tree: big_p,
            selection,
        },
        f,
        s,
    )
}

/// Limit of oracle values along a monotone sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleLimit {
    pub limit: LimitResult,
    /// Every term was evaluated by full enumeration.
    pub exact: bool,
}

pub fn measure_upper_limit(
    big_p: &ImpreciseTree,
    seq: &MonotoneVariable,
    s: &Situation,
    controls: &ConvergenceControls,
    envelope: &EnvelopeControls,
) -> Result<OracleLimit> {
    let mut exact = true;
    let limit = converge(seq, controls, |g| {
        let r = measure_upper_finitary(big_p, g, s, envelope)?;
        exact &= r.exact;
        Ok(r.value)
    })?;
    Ok(OracleLimit { limit, exact })
}

/// Lower value through `−upper(−f)`.
pub fn measure_lower_limit(
    big_p: &ImpreciseTree,
    seq: &MonotoneVariable,
    s: &Situation,
    controls: &ConvergenceControls,
    envelope: &EnvelopeControls,
) -> Result<OracleLimit> {
    let mut r = measure_upper_limit(big_p, &seq.negate()?, s, controls, envelope)?;
    r.limit = negate_limit(r.limit);
    Ok(r)
}

/// Mirrors a limit result through `x ↦ −x`.
pub fn negate_limit(mut r: LimitResult) -> LimitResult {
    r.estimate = -r.estimate;
    r.bound_direction = match r.bound_direction {
        crate::limit::BoundDirection::FromBelow => crate::limit::BoundDirection::FromAbove,
        crate::limit::BoundDirection::FromAbove => crate::limit::BoundDirection::FromBelow,
    };
    for p in &mut r.trace {
        p.value = -p.value;
    }
    r
}
