//! Global evaluators seen by the property suites, and fault-injecting
//! wrappers used to check that the suites catch what they claim to.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::game::backward_upper;
use crate::gamble::{FinitaryGamble, Node};
use crate::limit::{converge, ConvergenceControls, LimitResult, MonotoneVariable};
use crate::oracle::{measure_upper_finitary, EnvelopeControls};
use crate::space::Situation;
use crate::tree::ImpreciseTree;

/// A global upper expectation on finitary gambles.
pub trait Evaluator: Sync {
    fn name(&self) -> String;
    fn tree(&self) -> &ImpreciseTree;

    /// Value and whether it is exact (rather than a lower bound).
    fn upper_checked(&self, f: &FinitaryGamble, s: &Situation) -> Result<(f64, bool)>;

    fn upper(&self, f: &FinitaryGamble, s: &Situation) -> Result<f64> {
        Ok(self.upper_checked(f, s)?.0)
    }

    fn lower(&self, f: &FinitaryGamble, s: &Situation) -> Result<f64> {
        Ok(-self.upper(&f.neg(), s)?)
    }

    /// Limit of values along a monotone sequence.
    fn upper_limit(
        &self,
        v: &MonotoneVariable,
        s: &Situation,
        controls: &ConvergenceControls,
    ) -> Result<LimitResult> {
        converge(v, controls, |g| self.upper(g, s))
    }
}

impl<E: Evaluator + ?Sized> Evaluator for &E {
    fn name(&self) -> String {
        (**self).name()
    }

    fn tree(&self) -> &ImpreciseTree {
        (**self).tree()
    }

    fn upper_checked(&self, f: &FinitaryGamble, s: &Situation) -> Result<(f64, bool)> {
        (**self).upper_checked(f, s)
    }
}

/// Backward recursion.
#[derive(Debug, Clone, Copy)]
pub struct GameEvaluator<'a> {
    pub tree: &'a ImpreciseTree,
}

impl Evaluator for GameEvaluator<'_> {
    fn name(&self) -> String {
        "game".into()
    }

    fn tree(&self) -> &ImpreciseTree {
        self.tree
    }

    fn upper_checked(&self, f: &FinitaryGamble, s: &Situation) -> Result<(f64, bool)> {
        Ok((backward_upper(self.tree, f, s)?, true))
    }
}

/// Envelope over vertex-selection trees.
#[derive(Debug, Clone, Copy)]
pub struct OracleEvaluator<'a> {
    pub tree: &'a ImpreciseTree,
    pub controls: EnvelopeControls,
}

impl Evaluator for OracleEvaluator<'_> {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn tree(&self) -> &ImpreciseTree {
        self.tree
    }

    fn upper_checked(&self, f: &FinitaryGamble, s: &Situation) -> Result<(f64, bool)> {
        let r = measure_upper_finitary(self.tree, f, s, &self.controls)?;
        Ok((r.value, r.exact))
    }
}

/// Deliberate defects, one per axiom they are meant to break.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Returns the lower value for one-step gambles (P1).
    LowerForOneStep,
    /// Evaluates everything at the root (P2).
    IgnoreConditioning,
    /// Adds 0.1 at situations of length 1 (P3).
    ShiftAtDepthOne,
    /// Returns `−E(f)` (P4).
    Negated,
    /// Subtracts 0.1 for gambles with horizon above 4 (P5).
    DropBeyondHorizonFour,
    /// Subtracts the range of the gamble (CA1).
    RangePenalty,
    /// Adds 0.1 when `sup f ≥ 1` (CA2).
    UpwardJump,
    /// Adds 0.1 when `sup f > 1` (CA3).
    DownwardJump,
}

impl Fault {
    pub const ALL: [Fault; 8] = [
        Fault::LowerForOneStep,
        Fault::IgnoreConditioning,
        Fault::ShiftAtDepthOne,
        Fault::Negated,
        Fault::DropBeyondHorizonFour,
        Fault::RangePenalty,
        Fault::UpwardJump,
        Fault::DownwardJump,
    ];

    /// The property the fault is meant to violate.
    pub fn target(self) -> &'static str {
        match self {
            Fault::LowerForOneStep => "P1",
            Fault::IgnoreConditioning => "P2",
            Fault::ShiftAtDepthOne => "P3",
            Fault::Negated => "P4",
            Fault::DropBeyondHorizonFour => "P5",
            Fault::RangePenalty => "CA1",
            Fault::UpwardJump => "CA2",
            Fault::DownwardJump => "CA3",
        }
    }
}

/// Wraps an evaluator and applies a [`Fault`].
pub struct Faulty<E> {
    pub inner: E,
    pub fault: Fault,
}

fn is_one_step(f: &FinitaryGamble, s: &Situation) -> bool {
    match f.node_at(s) {
        Node::Branch(cs) => cs.iter().all(Node::is_leaf),
        Node::Leaf(_) => false,
    }
}

impl<E: Evaluator> Evaluator for Faulty<E> {
    fn name(&self) -> String {
        format!("{}+{:?}", self.inner.name(), self.fault)
    }

    fn tree(&self) -> &ImpreciseTree {
        self.inner.tree()
    }

    fn upper_checked(&self, f: &FinitaryGamble, s: &Situation) -> Result<(f64, bool)> {
        let (v, exact) = self.inner.upper_checked(f, s)?;
        let v = match self.fault {
            Fault::LowerForOneStep if is_one_step(f, s) => -self.inner.upper(&f.neg(), s)?,
            Fault::IgnoreConditioning => self.inner.upper(f, &Situation::root())?,
            Fault::ShiftAtDepthOne if s.len() == 1 => v + 0.1,
            Fault::Negated => -v,
            Fault::DropBeyondHorizonFour if f.horizon() > 4 => v - 0.1,
            Fault::RangePenalty => v - (f.hi() - f.lo()),
            Fault::UpwardJump if f.hi() >= 1.0 => v + 0.1,
            Fault::DownwardJump if f.hi() > 1.0 => v + 0.1,
            _ => v,
        };
        Ok((v, exact))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local::CredalSet;
    use crate::space::StateSpace;

    #[test]
    fn routes_agree_on_a_small_instance() {
        let tree = ImpreciseTree::uniform(
            StateSpace::alphabetic(2).unwrap(),
            CredalSet::from_vectors(vec![vec![0.4, 0.6], vec![0.7, 0.3]]).unwrap(),
        )
        .unwrap();
        let f = FinitaryGamble::from_table(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap();
        let g = GameEvaluator { tree: &tree };
        let o = OracleEvaluator {
            tree: &tree,
            controls: EnvelopeControls::default(),
        };
        let s = Situation::root();
        assert!((g.upper(&f, &s).unwrap() - o.upper(&f, &s).unwrap()).abs() < 1e-12);
        assert!((g.lower(&f, &s).unwrap() - 0.34).abs() < 1e-12);
        let bad = Faulty {
            inner: g,
            fault: Fault::Negated,
        };
        assert!((bad.upper(&f, &s).unwrap() + 0.67).abs() < 1e-12);
    }
}
