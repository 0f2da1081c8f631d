//! Non-finitary variables as monotone sequences of finitary gambles, the
//! built-in constructions (hitting times, reach indicators, truncated
//! averages, semicontinuous decompositions) and the convergence controller.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::gamble::{FinitaryGamble, Node};
use crate::space::Situation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    NonDecreasing,
    NonIncreasing,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Self::NonDecreasing => Self::NonIncreasing,
            Self::NonIncreasing => Self::NonDecreasing,
        }
    }

    /// Whether `later` may follow `earlier` within `tol`.
    pub fn admits(self, earlier: f64, later: f64, tol: f64) -> bool {
        match self {
            Self::NonDecreasing => later >= earlier - tol,
            Self::NonIncreasing => later <= earlier + tol,
        }
    }
}

/// Which side of the limit the trace values lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundDirection {
    FromBelow,
    FromAbove,
}

impl From<Direction> for BoundDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::NonDecreasing => Self::FromBelow,
            Direction::NonIncreasing => Self::FromAbove,
        }
    }
}

pub type Generator = Arc<dyn Fn(usize) -> Result<FinitaryGamble> + Send + Sync>;

/// A monotone sequence `n ↦ f_n` of finitary gambles, `f_n` having horizon
/// at most `n`. Its pointwise limit is the variable it stands for.
#[derive(Clone)]
pub struct MonotoneVariable {
    name: String,
    arity: usize,
    direction: Direction,
    lower_bound: Option<f64>,
    generator: Generator,
    /// Terms may have horizon up to `max(n, base_horizon)`; nonzero only
    /// for sequences starting from a fixed finitary gamble.
    base_horizon: usize,
}

impl fmt::Debug for MonotoneVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneVariable")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("direction", &self.direction)
            .field("lower_bound", &self.lower_bound)
            .finish_non_exhaustive()
    }
}

impl MonotoneVariable {
    /// Non-decreasing sequences need a uniform lower bound.
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        direction: Direction,
        lower_bound: Option<f64>,
        generator: impl Fn(usize) -> Result<FinitaryGamble> + Send + Sync + 'static,
    ) -> Result<Self> {
        if direction == Direction::NonDecreasing && lower_bound.is_none() {
            return Err(Error::MissingLowerBound);
        }
        Ok(Self {
            name: name.into(),
            arity,
            direction,
            lower_bound,
            generator: Arc::new(generator),
            base_horizon: 0,
        })
    }

    /// `f_n = f` for every `n`.
    pub fn constant(f: FinitaryGamble) -> Self {
        let lo = f.lo();
        let arity = f.arity();
        let base_horizon = f.horizon();
        Self {
            name: "constant".into(),
            arity,
            direction: Direction::NonDecreasing,
            lower_bound: Some(lo),
            generator: Arc::new(move |_| Ok(f.clone())),
            base_horizon,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Allows terms of horizon up to `max(n, h)`, for sequences built on a
    /// fixed finitary gamble of horizon `h`.
    pub fn with_base_horizon(mut self, h: usize) -> Self {
        self.base_horizon = self.base_horizon.max(h);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn lower_bound(&self) -> Option<f64> {
        self.lower_bound
    }

    /// `f_n`.
    pub fn at(&self, n: usize) -> Result<FinitaryGamble> {
        let f = (self.generator)(n)?;
        if f.horizon() > n.max(self.base_horizon) {
            return Err(Error::Spec(format!(
                "{}: term {n} has horizon {}",
                self.name,
                f.horizon()
            )));
        }
        if f.arity() != self.arity {
            return Err(Error::DimensionMismatch {
                expected: self.arity,
                got: f.arity(),
            });
        }
        Ok(f)
    }

    /// The sequence `−f_n`, with the opposite direction.
    pub fn negate(&self) -> Result<Self> {
        let direction = self.direction.flip();
        let lower_bound = match direction {
            // −f_n ≥ −sup f_1 when f_n is non-increasing.
            Direction::NonDecreasing => Some(-self.at(1)?.hi()),
            Direction::NonIncreasing => None,
        };
        let inner = self.generator.clone();
        Ok(Self {
            name: format!("-({})", self.name),
            arity: self.arity,
            direction,
            lower_bound,
            generator: Arc::new(move |n| Ok(inner(n)?.neg())),
            base_horizon: self.base_horizon,
        })
    }

    /// Applies a pointwise non-decreasing map to every term; the direction
    /// is preserved.
    pub fn map_terms(
        &self,
        name: impl Into<String>,
        lower_bound: Option<f64>,
        op: impl Fn(&FinitaryGamble) -> FinitaryGamble + Send + Sync + 'static,
    ) -> Self {
        let inner = self.generator.clone();
        Self {
            name: name.into(),
            arity: self.arity,
            direction: self.direction,
            lower_bound,
            generator: Arc::new(move |n| Ok(op(&inner(n)?))),
            base_horizon: self.base_horizon,
        }
    }

    /// Checks the declared direction pointwise between consecutive sampled
    /// horizons, and the declared lower bound.
    pub fn validate(&self, horizons: &[usize], tol: f64) -> Result<()> {
        let mut prev: Option<FinitaryGamble> = None;
        for &n in horizons {
            let f = self.at(n)?;
            if let Some(b) = self.lower_bound {
                if f.lo() < b - tol {
                    return Err(Error::Spec(format!(
                        "{}: term {n} drops to {} below the declared bound {b}",
                        self.name,
                        f.lo()
                    )));
                }
            }
            if let Some(p) = &prev {
                let worst = match self.direction {
                    Direction::NonDecreasing => p.zip_with(&f, |a, b| a - b).hi(),
                    Direction::NonIncreasing => p.zip_with(&f, |a, b| b - a).hi(),
                };
                if worst > tol {
                    return Err(Error::NonMonotone { horizon: n });
                }
            }
            prev = Some(f);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HittingMode {
    /// `τ ∧ n`
    Time,
    /// `1{τ ≤ n}`
    Indicator,
}

/// Where hitting times are measured from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HittingOptions {
    /// Number of states treated as history, normally the length of the
    /// conditioning situation.
    pub origin: usize,
    /// Count the history states too: `τ` is then the first absolute time.
    pub include_history: bool,
    /// Optional cap on the hitting time.
    pub cap: Option<f64>,
}

/// Entry time into `target`: `τ = min{j ≥ 1 : ω_{origin+j} ∈ A}`.
pub fn hitting_variable(
    arity: usize,
    target: &[usize],
    mode: HittingMode,
    options: HittingOptions,
) -> Result<MonotoneVariable> {
    if target.is_empty() {
        return Err(Error::EmptyTarget("no target states".into()));
    }
    if let Some(&x) = target.iter().find(|&&x| x >= arity) {
        return Err(Error::EmptyTarget(format!("state index {x} out of range")));
    }
    let mut hit = vec![false; arity];
    for &x in target {
        hit[x] = true;
    }
    if mode == HittingMode::Time && hit.iter().all(|&h| h) {
        return Err(Error::EmptyTarget("target is the whole state space".into()));
    }
    let origin = if options.include_history { 0 } else { options.origin };
    let cap = options.cap.unwrap_or(f64::INFINITY);
    let name = match mode {
        HittingMode::Time => "hitting_time",
        HittingMode::Indicator => "hitting_indicator",
    };
    let generator = move |n: usize| {
        let steps = n.saturating_sub(origin);
        let (on_hit, at_end): (Box<dyn Fn(usize) -> f64>, f64) = match mode {
            HittingMode::Time => (Box::new(|j| (j as f64).min(cap)), (steps as f64).min(cap)),
            HittingMode::Indicator => (Box::new(|_| 1.0), 0.0),
        };
        let mut node = Node::Leaf(at_end);
        for d in (0..steps).rev() {
            let children = (0..arity)
                .map(|x| {
                    if hit[x] {
                        Node::Leaf(on_hit(d + 1))
                    } else {
                        node.clone()
                    }
                })
                .collect();
            node = Node::branch(children);
        }
        for _ in 0..origin.min(n) {
            node = Node::branch(vec![node; arity]);
        }
        FinitaryGamble::from_node(arity, n, node)
    };
    MonotoneVariable::new(name, arity, Direction::NonDecreasing, Some(0.0), generator)
}

/// `f_n = (1/N) Σ_{i ≤ min(n, N)} w(ω_i)`; weights must share a sign.
pub fn truncated_average(arity: usize, weights: &[f64], window: usize) -> Result<MonotoneVariable> {
    if weights.len() != arity {
        return Err(Error::DimensionMismatch {
            expected: arity,
            got: weights.len(),
        });
    }
    if window == 0 {
        return Err(Error::Spec("empty averaging window".into()));
    }
    let direction = if weights.iter().all(|&w| w >= 0.0) {
        Direction::NonDecreasing
    } else if weights.iter().all(|&w| w <= 0.0) {
        Direction::NonIncreasing
    } else {
        return Err(Error::Spec("averaging weights of mixed sign give no monotone sequence".into()));
    };
    let lower_bound = match direction {
        Direction::NonDecreasing => Some(0.0),
        Direction::NonIncreasing => None,
    };
    let weights = weights.to_vec();
    MonotoneVariable::new("truncated_average", arity, direction, lower_bound, move |n| {
        let m = n.min(window);
        FinitaryGamble::from_fn(arity, m, |t| {
            t.states().iter().map(|&x| weights[x]).sum::<f64>() / window as f64
        })
    })
}

/// Suprema and infima of a variable over cylinders `Γ(t)`; may be infinite.
pub trait CylinderBounds: Send + Sync {
    fn arity(&self) -> usize;
    fn sup_over(&self, t: &Situation) -> f64;
    fn inf_over(&self, t: &Situation) -> f64;
}

impl CylinderBounds for FinitaryGamble {
    fn arity(&self) -> usize {
        FinitaryGamble::arity(self)
    }

    fn sup_over(&self, t: &Situation) -> f64 {
        self.cylinder_sup(t)
    }

    fn inf_over(&self, t: &Situation) -> f64 {
        self.cylinder_inf(t)
    }
}

/// Absolute first entry time into a set of states, `+∞` if never.
#[derive(Debug, Clone)]
pub struct FirstHit {
    arity: usize,
    hit: Vec<bool>,
}

impl FirstHit {
    pub fn new(arity: usize, target: &[usize]) -> Result<Self> {
        if target.is_empty() || target.iter().any(|&x| x >= arity) {
            return Err(Error::EmptyTarget(format!("{target:?}")));
        }
        let mut hit = vec![false; arity];
        for &x in target {
            hit[x] = true;
        }
        Ok(Self { arity, hit })
    }

    fn observed(&self, t: &Situation) -> Option<usize> {
        t.states().iter().position(|&x| self.hit[x]).map(|i| i + 1)
    }
}

impl CylinderBounds for FirstHit {
    fn arity(&self) -> usize {
        self.arity
    }

    fn sup_over(&self, t: &Situation) -> f64 {
        self.observed(t).map_or(f64::INFINITY, |i| i as f64)
    }

    fn inf_over(&self, t: &Situation) -> f64 {
        self.observed(t).map_or(t.len() as f64 + 1.0, |i| i as f64)
    }
}

/// `−f` for a variable given by its cylinder bounds.
#[derive(Debug, Clone)]
pub struct Negated<B>(pub B);

impl<B: CylinderBounds> CylinderBounds for Negated<B> {
    fn arity(&self) -> usize {
        self.0.arity()
    }

    fn sup_over(&self, t: &Situation) -> f64 {
        -self.0.inf_over(t)
    }

    fn inf_over(&self, t: &Situation) -> f64 {
        -self.0.sup_over(t)
    }
}

fn clamped_decomposition(
    oracle: &dyn CylinderBounds,
    settled: &dyn Fn(&Situation) -> Option<f64>,
    t: &mut Vec<usize>,
) -> Node {
    // `settled` always answers at the target length, so recursion stops there.
    if let Some(v) = settled(&Situation(t.clone())) {
        return Node::Leaf(v);
    }
    let children = (0..oracle.arity())
        .map(|x| {
            t.push(x);
            let c = clamped_decomposition(oracle, settled, t);
            t.pop();
            c
        })
        .collect();
    Node::branch(children)
}

/// `f_n(t) = max(−n, sup_{Γ(t)} f)` on situations of length `n`. The
/// sequence is non-increasing and converges to `f` when `f` is upper
/// semicontinuous.
pub fn usc_decomposition(oracle: &dyn CylinderBounds, n: usize) -> Result<FinitaryGamble> {
    let floor = -(n as f64);
    let settled = |t: &Situation| {
        let sup = oracle.sup_over(t);
        if sup <= floor {
            return Some(floor);
        }
        if t.len() == n || sup == oracle.inf_over(t) {
            return Some(sup.max(floor));
        }
        None
    };
    let root = clamped_decomposition(oracle, &settled, &mut Vec::with_capacity(n));
    FinitaryGamble::from_node(oracle.arity(), n, root)
}

/// `f_n(t) = min(n, inf_{Γ(t)} f)`; non-decreasing, converging to `f` when
/// `f` is lower semicontinuous.
pub fn lsc_decomposition(oracle: &dyn CylinderBounds, n: usize) -> Result<FinitaryGamble> {
    let ceiling = n as f64;
    let settled = |t: &Situation| {
        let inf = oracle.inf_over(t);
        if inf >= ceiling {
            return Some(ceiling);
        }
        if t.len() == n || inf == oracle.sup_over(t) {
            return Some(inf.min(ceiling));
        }
        None
    };
    let root = clamped_decomposition(oracle, &settled, &mut Vec::with_capacity(n));
    FinitaryGamble::from_node(oracle.arity(), n, root)
}

/// The non-increasing sequence `n ↦ usc_decomposition(oracle, n)`.
pub fn usc_variable(oracle: Arc<dyn CylinderBounds>) -> MonotoneVariable {
    let arity = oracle.arity();
    MonotoneVariable::new("usc", arity, Direction::NonIncreasing, None, move |n| {
        usc_decomposition(oracle.as_ref(), n)
    })
    .expect("non-increasing sequences need no lower bound")
}

/// The non-decreasing sequence `n ↦ lsc_decomposition(oracle, n)`.
pub fn lsc_variable(oracle: Arc<dyn CylinderBounds>) -> Result<MonotoneVariable> {
    let arity = oracle.arity();
    let inf = oracle.inf_over(&Situation::root());
    if !inf.is_finite() {
        return Err(Error::MissingLowerBound);
    }
    MonotoneVariable::new(
        "lsc",
        arity,
        Direction::NonDecreasing,
        Some(inf.min(1.0)),
        move |n| lsc_decomposition(oracle.as_ref(), n),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceControls {
    pub tol: f64,
    pub max_horizon: usize,
    pub stall_window: usize,
    /// Values above this, still growing, are reported as `+∞`.
    pub divergence_threshold: f64,
    /// Consecutive growing steps required for a divergence claim.
    pub divergence_window: usize,
}

impl Default for ConvergenceControls {
    fn default() -> Self {
        Self {
            tol: crate::TOLERANCE,
            max_horizon: 64,
            stall_window: 3,
            divergence_threshold: 1e12,
            divergence_window: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub horizon: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitResult {
    pub estimate: ExtendedReal,
    pub bound_direction: BoundDirection,
    pub converged: bool,
    /// Set when the estimate is a `+∞` growth claim.
    pub diverged: bool,
    pub horizon_used: usize,
    pub trace: Vec<TracePoint>,
}

impl LimitResult {
    pub fn last_value(&self) -> Option<f64> {
        self.trace.last().map(|p| p.value)
    }
}

/// Evaluates `f_1, f_2, ...` until `stall_window` consecutive steps move by
/// less than `tol`. Exhausting `max_horizon` is an error carrying the trace.
pub fn converge(
    seq: &MonotoneVariable,
    controls: &ConvergenceControls,
    mut evaluator: impl FnMut(&FinitaryGamble) -> Result<f64>,
) -> Result<LimitResult> {
    let direction = seq.direction();
    let mut trace: Vec<TracePoint> = Vec::new();
    let mut stall = 0;
    let mut growth = 0;
    let finish = |trace: Vec<TracePoint>, estimate, converged, diverged| LimitResult {
        estimate,
        bound_direction: direction.into(),
        converged,
        diverged,
        horizon_used: trace.last().map_or(0, |p| p.horizon),
        trace,
    };
    for n in 1..=controls.max_horizon {
        let value = evaluator(&seq.at(n)?)?;
        if let Some(prev) = trace.last() {
            if !direction.admits(prev.value, value, controls.tol) {
                return Err(Error::NonMonotone { horizon: n });
            }
            let step = (value - prev.value).abs();
            if step < controls.tol {
                stall += 1;
                growth = 0;
            } else {
                stall = 0;
                growth += 1;
            }
        }
        trace.push(TracePoint { horizon: n, value });
        if stall >= controls.stall_window {
            return Ok(finish(trace, ExtendedReal::Finite(value), true, false));
        }
        if direction == Direction::NonDecreasing
            && value > controls.divergence_threshold
            && growth >= controls.divergence_window
        {
            return Ok(finish(trace, ExtendedReal::PosInf, false, true));
        }
    }
    let last = trace.last().map_or(f64::NAN, |p| p.value);
    Err(Error::NotConverged(Box::new(finish(
        trace,
        ExtendedReal::Finite(last),
        false,
        false,
    ))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sit(v: &[usize]) -> Situation {
        Situation(v.to_vec())
    }

    #[test]
    fn hitting_indicator_on_full_space_is_one() {
        let v = hitting_variable(2, &[0, 1], HittingMode::Indicator, HittingOptions::default()).unwrap();
        for n in 1..6 {
            let f = v.at(n).unwrap();
            assert_eq!(f.bounds(), (1.0, 1.0));
        }
        assert!(hitting_variable(2, &[], HittingMode::Indicator, HittingOptions::default()).is_err());
        assert!(hitting_variable(2, &[0, 1], HittingMode::Time, HittingOptions::default()).is_err());
    }

    #[test]
    fn hitting_time_values() {
        let opts = HittingOptions {
            origin: 1,
            ..Default::default()
        };
        let v = hitting_variable(2, &[1], HittingMode::Time, opts).unwrap();
        let f = v.at(4).unwrap();
        assert_eq!(f.horizon(), 4);
        // history state ignored; first b after it at absolute time 3 → τ = 2
        assert_eq!(f.value(&sit(&[1, 0, 1, 0])).unwrap(), 2.0);
        assert_eq!(f.value(&sit(&[0, 0, 0, 0])).unwrap(), 3.0);
        assert_eq!(f.value(&sit(&[0, 1, 1, 1])).unwrap(), 1.0);
        // linear size in the horizon (shared subtrees are counted twice)
        assert!(v.at(60).unwrap().size() < 300);
        v.validate(&[1, 2, 3, 5, 8], 1e-12).unwrap();

        let capped = hitting_variable(
            2,
            &[1],
            HittingMode::Time,
            HittingOptions {
                cap: Some(2.5),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(capped.at(6).unwrap().hi(), 2.5);

        let absolute = hitting_variable(
            2,
            &[1],
            HittingMode::Time,
            HittingOptions {
                origin: 1,
                include_history: true,
                cap: None,
            },
        )
        .unwrap();
        assert_eq!(absolute.at(3).unwrap().value(&sit(&[1, 0, 0])).unwrap(), 1.0);
    }

    #[test]
    fn usc_examples() {
        let ind = FinitaryGamble::indicator(2, &sit(&[0]));
        let d1 = usc_decomposition(&ind, 1).unwrap();
        assert_eq!(d1.max_abs_diff(&ind), 0.0);

        struct MinusInfinity;
        impl CylinderBounds for MinusInfinity {
            fn arity(&self) -> usize {
                2
            }
            fn sup_over(&self, _: &Situation) -> f64 {
                f64::NEG_INFINITY
            }
            fn inf_over(&self, _: &Situation) -> f64 {
                f64::NEG_INFINITY
            }
        }
        for n in 1..5 {
            assert_eq!(usc_decomposition(&MinusInfinity, n).unwrap().bounds(), (-(n as f64), -(n as f64)));
        }

        let neg_hit = Negated(FirstHit::new(2, &[1]).unwrap());
        let f2 = usc_decomposition(&neg_hit, 2).unwrap();
        assert_eq!(f2.value(&sit(&[0, 0])).unwrap(), -2.0);
        assert_eq!(f2.value(&sit(&[0, 1])).unwrap(), -2.0);
        assert_eq!(f2.value(&sit(&[1, 0])).unwrap(), -1.0);
    }

    #[test]
    fn lsc_examples() {
        let ind = FinitaryGamble::indicator(2, &sit(&[0]));
        assert_eq!(lsc_decomposition(&ind, 1).unwrap().max_abs_diff(&ind), 0.0);

        let tau = FirstHit::new(2, &[1]).unwrap();
        let time = hitting_variable(2, &[1], HittingMode::Time, HittingOptions::default()).unwrap();
        for n in 1..8 {
            let d = lsc_decomposition(&tau, n).unwrap();
            assert_eq!(d.max_abs_diff(&time.at(n).unwrap()), 0.0, "n = {n}");
        }

        let c = FinitaryGamble::constant(2, -3.0);
        assert_eq!(lsc_decomposition(&c, 4).unwrap().bounds(), (-3.0, -3.0));
    }

    #[test]
    fn decompositions_are_monotone_and_bracket_the_target() {
        let g = FinitaryGamble::from_table(2, 3, &[0.5, -1.0, 2.0, 0.0, 1.0, 1.5, -0.5, 3.0]).unwrap();
        let usc = usc_variable(Arc::new(g.clone()));
        let lsc = lsc_variable(Arc::new(g.clone())).unwrap();
        usc.validate(&[1, 2, 3, 4, 5], 0.0).unwrap();
        lsc.validate(&[1, 2, 3, 4, 5], 0.0).unwrap();
        for n in 1..6 {
            let u = usc.at(n).unwrap();
            let l = lsc.at(n).unwrap();
            assert!(u.zip_with(&g, |a, b| b - a).hi() <= 0.0);
            assert!(l.zip_with(&g, |a, b| a - b).hi() <= 0.0);
        }
        assert_eq!(usc.at(3).unwrap().max_abs_diff(&g), 0.0);
        assert_eq!(lsc.at(3).unwrap().max_abs_diff(&g), 0.0);
    }

    #[test]
    fn negation_flips_direction() {
        let g = FinitaryGamble::from_table(2, 1, &[2.0, -1.0]).unwrap();
        let usc = usc_variable(Arc::new(g));
        let neg = usc.negate().unwrap();
        assert_eq!(neg.direction(), Direction::NonDecreasing);
        assert_eq!(neg.lower_bound(), Some(-2.0));
        assert!(MonotoneVariable::new("x", 2, Direction::NonDecreasing, None, |_| {
            Ok(FinitaryGamble::constant(2, 0.0))
        })
        .is_err());
    }

    #[test]
    fn truncated_average_direction() {
        let up = truncated_average(2, &[1.0, 0.0], 4).unwrap();
        assert_eq!(up.direction(), Direction::NonDecreasing);
        up.validate(&[1, 2, 3, 4, 6], 0.0).unwrap();
        assert_eq!(up.at(6).unwrap().horizon(), 4);
        let down = truncated_average(2, &[-1.0, 0.0], 3).unwrap();
        assert_eq!(down.direction(), Direction::NonIncreasing);
        assert!(truncated_average(2, &[1.0, -1.0], 3).is_err());
    }

    fn trace_of(values: impl Fn(usize) -> f64 + Send + Sync + 'static, dir: Direction) -> MonotoneVariable {
        MonotoneVariable::new("t", 2, dir, Some(-1e300), move |n| Ok(FinitaryGamble::constant(2, values(n))))
            .unwrap()
    }

    #[test]
    fn converge_examples() {
        let c = ConvergenceControls::default();
        let constant = trace_of(|_| 0.5, Direction::NonDecreasing);
        let r = converge(&constant, &c, |f| Ok(f.hi())).unwrap();
        assert!(r.converged);
        assert_eq!(r.horizon_used, 1 + c.stall_window);

        let geometric = trace_of(|n| 1.0 - 0.5f64.powi(n as i32), Direction::NonDecreasing);
        let r = converge(&geometric, &c, |f| Ok(f.hi())).unwrap();
        assert!(r.converged);
        assert!((30..=34).contains(&r.horizon_used), "{}", r.horizon_used);
        assert!((r.estimate.as_f64() - 1.0).abs() < 1e-8);
        assert_eq!(r.bound_direction, BoundDirection::FromBelow);

        let growing = trace_of(|n| n as f64, Direction::NonDecreasing);
        match converge(&growing, &c, |f| Ok(f.hi())) {
            Err(Error::NotConverged(partial)) => {
                assert_eq!(partial.bound_direction, BoundDirection::FromBelow);
                assert_eq!(partial.trace.len(), 64);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }

        let exploding = trace_of(|n| 10f64.powi(n as i32), Direction::NonDecreasing);
        let r = converge(&exploding, &c, |f| Ok(f.hi())).unwrap();
        assert!(r.diverged);
        assert_eq!(r.estimate, ExtendedReal::PosInf);

        let wrong = trace_of(|n| -(n as f64), Direction::NonDecreasing);
        assert!(matches!(
            converge(&wrong, &c, |f| Ok(f.hi())),
            Err(Error::NonMonotone { horizon: 2 })
        ));
    }
}
