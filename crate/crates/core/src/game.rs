//! The game-theoretic route: backward recursion for finitary gambles,
//! witness supermartingales, the hedging condition checked on paths, and
//! cut extensions for unbounded variables.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::gamble::{FinitaryGamble, Node};
use crate::limit::{converge, ConvergenceControls, Direction, LimitResult, MonotoneVariable, TracePoint};
use crate::path::PathSampler;
use crate::space::{canonical_cmp, Situation};
use crate::tree::{ImpreciseTree, Rule};

fn backward_node(
    big_p: &ImpreciseTree,
    node: &Node,
    t: &mut Vec<usize>,
    record: &mut Option<&mut BTreeMap<Situation, f64>>,
) -> Result<f64> {
    let value = match node {
        Node::Leaf(v) => *v,
        Node::Branch(children) => {
            let mut vals = Vec::with_capacity(children.len());
            for (x, c) in children.iter().enumerate() {
                t.push(x);
                let v = backward_node(big_p, c, t, record);
                t.pop();
                vals.push(v?);
            }
            big_p.model_at(&Situation(t.clone()))?.upper(&vals)
        }
    };
    if let Some(map) = record {
        map.insert(Situation(t.clone()), value);
    }
    Ok(value)
}

/// Memo key for a shared trie node: under uniform and stationary rules the
/// value below `t` depends on `t` only through its last state.
type MemoKey = (usize, Option<usize>);

fn backward_shared(
    big_p: &ImpreciseTree,
    node: &Node,
    t: &mut Vec<usize>,
    memo: &mut HashMap<MemoKey, f64>,
) -> Result<f64> {
    let children = match node {
        Node::Leaf(v) => return Ok(*v),
        Node::Branch(cs) => cs,
    };
    let key = (
        children.as_ptr() as usize,
        match big_p.rule() {
            Rule::Uniform(_) => None,
            _ => t.last().copied(),
        },
    );
    if let Some(&v) = memo.get(&key) {
        return Ok(v);
    }
    let mut vals = Vec::with_capacity(children.len());
    for (x, c) in children.iter().enumerate() {
        t.push(x);
        let v = backward_shared(big_p, c, t, memo);
        t.pop();
        vals.push(v?);
    }
    let v = big_p.model_at(&Situation(t.clone()))?.upper(&vals);
    memo.insert(key, v);
    Ok(v)
}

/// `value(t) = f(t)` on the horizon, `value(t) = Q_t(x ↦ value(tx))` above
/// it; returns `value(s)`. Beyond the horizon this is the value of `f` at
/// the horizon prefix of `s`.
pub fn backward_upper(big_p: &ImpreciseTree, f: &FinitaryGamble, s: &Situation) -> Result<f64> {
    if let Some(v) = f.constant_on(s) {
        return Ok(v);
    }
    let mut t = s.states().to_vec();
    match big_p.rule() {
        Rule::Explicit { .. } => backward_node(big_p, f.node_at(s), &mut t, &mut None),
        _ => backward_shared(big_p, f.node_at(s), &mut t, &mut HashMap::new()),
    }
}

/// `−backward_upper(−f)`.
pub fn backward_lower(big_p: &ImpreciseTree, f: &FinitaryGamble, s: &Situation) -> Result<f64> {
    Ok(-backward_upper(big_p, &f.neg(), s)?)
}

/// JSON object keys must be strings, so stored values travel as a list of
/// `(situation, value)` pairs.
mod as_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::space::Situation;

    pub fn serialize<S: Serializer>(m: &BTreeMap<Situation, f64>, ser: S) -> Result<S::Ok, S::Error> {
        m.iter().collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<BTreeMap<Situation, f64>, D::Error> {
        Ok(Vec::<(Situation, f64)>::deserialize(de)?.into_iter().collect())
    }
}

/// How a supermartingale is extended past its stored situations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailRule {
    /// Capital is frozen: an unstored situation takes the value of its
    /// longest stored prefix.
    ConstantAfterDepth,
    /// Only stored situations have values.
    Explicit,
}

/// A real process on situations, stored on a finite set of situations
/// containing the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Supermartingale {
    #[serde(with = "as_pairs")]
    values: BTreeMap<Situation, f64>,
    tail_rule: TailRule,
    lower_bound: f64,
}

impl Supermartingale {
    pub fn new(values: BTreeMap<Situation, f64>, tail_rule: TailRule, lower_bound: f64) -> Result<Self> {
        if !values.contains_key(&Situation::root()) {
            return Err(Error::InvalidSupermartingale("no value at the root".into()));
        }
        if let Some((t, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSupermartingale(format!("value {v} at {t}")));
        }
        if !lower_bound.is_finite() {
            return Err(Error::InvalidSupermartingale("lower bound must be finite".into()));
        }
        Ok(Self {
            values,
            tail_rule,
            lower_bound,
        })
    }

    pub fn constant(c: f64) -> Self {
        Self {
            values: BTreeMap::from([(Situation::root(), c)]),
            tail_rule: TailRule::ConstantAfterDepth,
            lower_bound: c,
        }
    }

    pub fn tail_rule(&self) -> TailRule {
        self.tail_rule
    }

    pub fn lower_bound(&self) -> f64 {
        self.lower_bound
    }

    /// Length of the longest stored situation.
    pub fn depth(&self) -> usize {
        self.values.keys().map(Situation::len).max().unwrap_or(0)
    }

    /// Stored `(situation, value)` pairs in canonical order.
    pub fn entries(&self) -> Vec<(Situation, f64)> {
        let mut v: Vec<_> = self.values.iter().map(|(t, x)| (t.clone(), *x)).collect();
        v.sort_by(|a, b| canonical_cmp(&a.0, &b.0));
        v
    }

    pub fn stored(&self, t: &Situation) -> Option<f64> {
        self.values.get(t).copied()
    }

    pub fn set(&mut self, t: Situation, v: f64) {
        self.values.insert(t, v);
    }

    pub fn value_at(&self, t: &Situation) -> Result<f64> {
        match self.tail_rule {
            TailRule::Explicit => self
                .stored(t)
                .ok_or_else(|| Error::InvalidSupermartingale(format!("no value at {t}"))),
            TailRule::ConstantAfterDepth => {
                for k in (0..=t.len()).rev() {
                    if let Some(v) = self.stored(&t.prefix(k)) {
                        return Ok(v);
                    }
                }
                unreachable!("the root is always stored")
            }
        }
    }
}

/// The witness attaining the backward value: `ℳ(t)` is the backward value
/// for every situation `t ⊒ s` on which `f` still branches or first becomes
/// constant, frozen afterwards. Strict prefixes of `s` carry `sup f`.
pub fn optimal_supermartingale(
    big_p: &ImpreciseTree,
    f: &FinitaryGamble,
    s: &Situation,
) -> Result<Supermartingale> {
    let mut values = BTreeMap::new();
    for k in 0..s.len() {
        values.insert(s.prefix(k), f.hi());
    }
    backward_node(big_p, f.node_at(s), &mut s.states().to_vec(), &mut Some(&mut values))?;
    let lower_bound = values.values().copied().fold(f64::INFINITY, f64::min);
    Supermartingale::new(values, TailRule::ConstantAfterDepth, lower_bound)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupermartingaleViolation {
    pub situation: Situation,
    pub value: f64,
    pub envelope: f64,
    /// `value − envelope`; negative at a violation.
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupermartingaleReport {
    pub checked: usize,
    pub violations: Vec<SupermartingaleViolation>,
    pub min_value: f64,
    pub bounded_below: bool,
}

impl SupermartingaleReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty() && self.bounded_below
    }
}

/// Checks `Q_t(ℳ(t·)) ≤ ℳ(t) + tol` at every stored situation shorter than
/// `depth`. Unstored situations under the frozen tail have constant
/// children and satisfy the inequality by coherence.
pub fn is_supermartingale(
    m: &Supermartingale,
    big_p: &ImpreciseTree,
    depth: usize,
    tol: f64,
) -> Result<SupermartingaleReport> {
    let mut report = SupermartingaleReport {
        checked: 0,
        violations: Vec::new(),
        min_value: f64::INFINITY,
        bounded_below: true,
    };
    for (t, value) in m.entries() {
        report.min_value = report.min_value.min(value);
        if t.len() >= depth {
            continue;
        }
        let children = (0..big_p.arity())
            .map(|x| m.value_at(&t.child(x)))
            .collect::<Result<Vec<_>>>()?;
        let envelope = big_p.model_at(&t)?.upper(&children);
        report.checked += 1;
        if envelope > value + tol {
            report.violations.push(SupermartingaleViolation {
                situation: t,
                value,
                envelope,
                slack: value - envelope,
            });
        }
    }
    report.bounded_below = report.min_value >= m.lower_bound() - tol;
    Ok(report)
}

/// What a hedge must dominate.
#[derive(Debug, Clone, Copy)]
pub enum HedgeTarget<'a> {
    Finitary(&'a FinitaryGamble),
    /// Compared against the term at the check horizon.
    Monotone(&'a MonotoneVariable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum HedgingVerdict {
    NoCounterexampleFound { paths_checked: usize, exhaustive: bool, horizon: usize },
    Counterexample { path: Situation, level: f64, target: f64 },
}

impl HedgingVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, Self::NoCounterexampleFound { .. })
    }
}

/// Looks for a path through `Γ(s)` on which the eventual capital of `m`
/// falls short of the target. The check horizon is raised to cover both
/// the target and the stored depth of `m`, so the capital read there is
/// its frozen limit. All paths are enumerated when there are at most
/// `paths` of them; otherwise `paths` seeded random paths are drawn.
pub fn hedging_check(
    m: &Supermartingale,
    target: HedgeTarget<'_>,
    s: &Situation,
    horizon: usize,
    paths: usize,
    seed: u64,
    tol: f64,
) -> Result<HedgingVerdict> {
    let (arity, mut h) = match target {
        HedgeTarget::Finitary(f) => (f.arity(), horizon.max(f.horizon())),
        HedgeTarget::Monotone(v) => (v.arity(), horizon),
    };
    h = h.max(s.len());
    if m.tail_rule() == TailRule::ConstantAfterDepth {
        h = h.max(m.depth());
    }
    let f = match target {
        HedgeTarget::Finitary(f) => f.clone(),
        HedgeTarget::Monotone(v) => v.at(h)?,
    };
    let check = |path: &Situation| -> Result<Option<HedgingVerdict>> {
        let level = m.value_at(path)?;
        let value = f.value(path)?;
        Ok((level < value - tol).then(|| HedgingVerdict::Counterexample {
            path: path.clone(),
            level,
            target: value,
        }))
    };
    let total = (arity as u128).checked_pow((h - s.len()) as u32);
    if let Some(total) = total.filter(|&t| t <= paths as u128) {
        for path in s.extensions(arity, h) {
            if let Some(v) = check(&path)? {
                return Ok(v);
            }
        }
        return Ok(HedgingVerdict::NoCounterexampleFound {
            paths_checked: total as usize,
            exhaustive: true,
            horizon: h,
        });
    }
    let mut sampler = PathSampler::new(arity, s.clone(), seed);
    for _ in 0..paths {
        sampler.restart(s.clone());
        let path = sampler.sample_to(h).clone();
        if let Some(v) = check(&path)? {
            return Ok(v);
        }
    }
    Ok(HedgingVerdict::NoCounterexampleFound {
        paths_checked: paths,
        exhaustive: false,
        horizon: h,
    })
}

/// An unbounded variable evaluated through symmetric cuts
/// `(f ∨ −c) ∧ c` for `c = start, 2·start, 4·start, ...`.
#[derive(Debug, Clone)]
pub struct CutExtended {
    pub base: MonotoneVariable,
    pub start: f64,
    pub rounds: usize,
}

impl CutExtended {
    pub fn new(base: MonotoneVariable) -> Self {
        Self {
            base,
            start: 1.0,
            rounds: 48,
        }
    }

    /// The monotone sequence of the cut variable at level `c`.
    pub fn cut_at(&self, c: f64) -> MonotoneVariable {
        let bound = match self.base.direction() {
            Direction::NonDecreasing => self.base.lower_bound().map(|b| b.max(-c).min(c)),
            Direction::NonIncreasing => None,
        };
        self.base
            .map_terms(format!("cut({}, {c})", self.base.name()), bound, move |g| {
                g.cut_lower(-c).cut_upper(c)
            })
    }
}

/// A variable the game route can evaluate.
#[derive(Debug, Clone)]
pub enum Variable {
    Finitary(FinitaryGamble),
    Monotone(MonotoneVariable),
    CutExtended(CutExtended),
}

impl Variable {
    pub fn negate(&self) -> Result<Self> {
        Ok(match self {
            Self::Finitary(f) => Self::Finitary(f.neg()),
            Self::Monotone(v) => Self::Monotone(v.negate()?),
            Self::CutExtended(c) => Self::CutExtended(CutExtended {
                base: c.base.negate()?,
                ..c.clone()
            }),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    FinitaryExact,
    Limit,
    CutExtension,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub tol: f64,
    pub horizon_used: Option<usize>,
    pub converged: bool,
    pub diverged: bool,
    pub trace: Vec<TracePoint>,
    /// `(c, value)` per cut level.
    pub cuts: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameValue {
    pub value: ExtendedReal,
    pub witness: Option<Supermartingale>,
    pub route: Route,
    pub diagnostics: Diagnostics,
}

fn limit_value(big_p: &ImpreciseTree, v: &MonotoneVariable, s: &Situation, controls: &ConvergenceControls) -> Result<LimitResult> {
    converge(v, controls, |g| backward_upper(big_p, g, s))
}

/// Game-theoretic upper expectation of `v` conditional on `s`.
pub fn game_upper(
    big_p: &ImpreciseTree,
    v: &Variable,
    s: &Situation,
    controls: &ConvergenceControls,
) -> Result<GameValue> {
    match v {
        Variable::Finitary(f) => {
            let witness = optimal_supermartingale(big_p, f, s)?;
            let value = witness.value_at(s)?;
            Ok(GameValue {
                value: ExtendedReal::Finite(value),
                witness: Some(witness),
                route: Route::FinitaryExact,
                diagnostics: Diagnostics {
                    tol: controls.tol,
                    horizon_used: Some(f.horizon()),
                    converged: true,
                    ..Default::default()
                },
            })
        }
        Variable::Monotone(seq) => {
            let r = limit_value(big_p, seq, s, controls)?;
            Ok(GameValue {
                value: r.estimate,
                witness: None,
                route: Route::Limit,
                diagnostics: Diagnostics {
                    tol: controls.tol,
                    horizon_used: Some(r.horizon_used),
                    converged: r.converged,
                    diverged: r.diverged,
                    trace: r.trace,
                    cuts: Vec::new(),
                },
            })
        }
        Variable::CutExtended(cut) => {
            let mut cuts: Vec<(f64, f64)> = Vec::new();
            let mut c = cut.start;
            let mut last_horizon = 0;
            for _ in 0..cut.rounds {
                let r = limit_value(big_p, &cut.cut_at(c), s, controls)?;
                let value = r.estimate.as_f64();
                last_horizon = r.horizon_used;
                let settled = cuts
                    .last()
                    .is_some_and(|&(_, prev)| (value - prev).abs() < controls.tol);
                cuts.push((c, value));
                if settled {
                    return Ok(GameValue {
                        value: ExtendedReal::Finite(value),
                        witness: None,
                        route: Route::CutExtension,
                        diagnostics: Diagnostics {
                            tol: controls.tol,
                            horizon_used: Some(last_horizon),
                            converged: true,
                            diverged: false,
                            trace: r.trace,
                            cuts,
                        },
                    });
                }
                c *= 2.0;
            }
            let trace = cuts
                .iter()
                .enumerate()
                .map(|(i, &(_, value))| TracePoint { horizon: i + 1, value })
                .collect::<Vec<_>>();
            Err(Error::NotConverged(Box::new(LimitResult {
                estimate: ExtendedReal::Finite(cuts.last().map_or(f64::NAN, |p| p.1)),
                bound_direction: cut.base.direction().into(),
                converged: false,
                diverged: false,
                horizon_used: last_horizon,
                trace,
            })))
        }
    }
}

/// `−game_upper(−v)`.
pub fn game_lower(
    big_p: &ImpreciseTree,
    v: &Variable,
    s: &Situation,
    controls: &ConvergenceControls,
) -> Result<GameValue> {
    let mut g = game_upper(big_p, &v.negate()?, s, controls)?;
    g.value = -g.value;
    for p in &mut g.diagnostics.trace {
        p.value = -p.value;
    }
    for p in &mut g.diagnostics.cuts {
        p.1 = -p.1;
    }
    // The witness hedges −v and says nothing about the lower value.
    g.witness = None;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::{hitting_variable, HittingMode, HittingOptions};
    use crate::local::{CredalSet, MassFunction};
    use crate::space::StateSpace;

    fn ab() -> StateSpace {
        StateSpace::alphabetic(2).unwrap()
    }

    fn sit(v: &[usize]) -> Situation {
        Situation(v.to_vec())
    }

    fn k2_tree() -> ImpreciseTree {
        ImpreciseTree::uniform(
            ab(),
            CredalSet::from_vectors(vec![vec![0.4, 0.6], vec![0.7, 0.3]]).unwrap(),
        )
        .unwrap()
    }

    fn fair() -> ImpreciseTree {
        ImpreciseTree::uniform(ab(), CredalSet::precise(MassFunction::uniform(2))).unwrap()
    }

    fn diagonal() -> FinitaryGamble {
        FinitaryGamble::from_table(2, 2, &[1.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn backward_examples() {
        let ind = FinitaryGamble::indicator(2, &sit(&[0, 1]));
        assert!((backward_upper(&fair(), &ind, &Situation::root()).unwrap() - 0.25).abs() < 1e-15);
        let big = k2_tree();
        assert!((backward_upper(&big, &diagonal(), &Situation::root()).unwrap() - 0.67).abs() < 1e-12);
        assert!((backward_upper(&big, &diagonal(), &sit(&[0])).unwrap() - 0.7).abs() < 1e-12);
        assert!((backward_lower(&big, &diagonal(), &Situation::root()).unwrap() - 0.34).abs() < 1e-12);
        // past the horizon the value is read off the gamble
        assert_eq!(backward_upper(&big, &diagonal(), &sit(&[1, 1, 0])).unwrap(), 1.0);
    }

    #[test]
    fn witness_examples() {
        let m = optimal_supermartingale(&k2_tree(), &FinitaryGamble::constant(2, 3.0), &Situation::root()).unwrap();
        assert_eq!(m.entries(), vec![(Situation::root(), 3.0)]);

        let m = optimal_supermartingale(&k2_tree(), &diagonal(), &Situation::root()).unwrap();
        let at = |v: &[usize]| m.value_at(&sit(v)).unwrap();
        assert!((at(&[]) - 0.67).abs() < 1e-12);
        assert!((at(&[0]) - 0.7).abs() < 1e-12);
        assert!((at(&[1]) - 0.6).abs() < 1e-12);
        assert_eq!(at(&[0, 0]), 1.0);
        assert_eq!(at(&[1, 1]), 1.0);
        assert_eq!(at(&[0, 1]), 0.0);
        assert_eq!(at(&[1, 0]), 0.0);
        assert_eq!(at(&[1, 0, 1, 1]), 0.0);

        let ind = FinitaryGamble::indicator(2, &sit(&[0, 1]));
        let m = optimal_supermartingale(&fair(), &ind, &Situation::root()).unwrap();
        assert_eq!(m.value_at(&Situation::root()).unwrap(), 0.25);
        assert_eq!(m.value_at(&sit(&[0])).unwrap(), 0.5);
        assert_eq!(m.value_at(&sit(&[1])).unwrap(), 0.0);
    }

    #[test]
    fn supermartingale_checks() {
        let big = k2_tree();
        let m = optimal_supermartingale(&big, &diagonal(), &Situation::root()).unwrap();
        assert!(is_supermartingale(&m, &big, 2, 1e-9).unwrap().is_valid());
        assert!(is_supermartingale(&Supermartingale::constant(-4.0), &big, 5, 1e-9)
            .unwrap()
            .is_valid());

        let mut broken = m.clone();
        broken.set(Situation::root(), 0.67 - 0.1);
        let r = is_supermartingale(&broken, &big, 2, 1e-9).unwrap();
        assert_eq!(r.violations.len(), 1);
        assert!(r.violations[0].situation.is_root());
        assert!((r.violations[0].slack + 0.1).abs() < 1e-12);

        let explicit = Supermartingale::new(
            BTreeMap::from([(Situation::root(), 1.0)]),
            TailRule::Explicit,
            0.0,
        )
        .unwrap();
        assert!(is_supermartingale(&explicit, &big, 1, 1e-9).is_err());
    }

    #[test]
    fn witness_for_non_root_situation() {
        let big = k2_tree();
        let s = sit(&[1]);
        let m = optimal_supermartingale(&big, &diagonal(), &s).unwrap();
        assert!((m.value_at(&s).unwrap() - 0.6).abs() < 1e-12);
        assert!(is_supermartingale(&m, &big, 3, 1e-9).unwrap().is_valid());
        let v = hedging_check(&m, HedgeTarget::Finitary(&diagonal()), &s, 2, 16, 0, 1e-9).unwrap();
        assert!(v.passed());
    }

    #[test]
    fn hedging_examples() {
        let big = k2_tree();
        let m = optimal_supermartingale(&big, &diagonal(), &Situation::root()).unwrap();
        match hedging_check(&m, HedgeTarget::Finitary(&diagonal()), &Situation::root(), 2, 4, 0, 1e-9).unwrap() {
            HedgingVerdict::NoCounterexampleFound { paths_checked, exhaustive, .. } => {
                assert_eq!(paths_checked, 4);
                assert!(exhaustive);
            }
            other => panic!("{other:?}"),
        }
        let one = FinitaryGamble::constant(2, 1.0);
        let v = hedging_check(
            &Supermartingale::constant(0.0),
            HedgeTarget::Finitary(&one),
            &Situation::root(),
            10,
            1,
            3,
            1e-9,
        )
        .unwrap();
        assert!(!v.passed());

        // a cheaper start than the witness is caught on some path
        let mut cheap = m.clone();
        cheap.set(sit(&[0, 0]), 0.9);
        let v = hedging_check(&cheap, HedgeTarget::Finitary(&diagonal()), &Situation::root(), 2, 4, 0, 1e-9).unwrap();
        assert!(!v.passed());
    }

    fn chain() -> ImpreciseTree {
        let half = CredalSet::precise(MassFunction::uniform(2));
        let stay = CredalSet::precise(MassFunction::new(vec![0.0, 1.0]).unwrap());
        ImpreciseTree::stationary(ab(), half.clone(), vec![half, stay]).unwrap()
    }

    #[test]
    fn hitting_time_limit_is_two() {
        let v = hitting_variable(
            2,
            &[1],
            HittingMode::Time,
            HittingOptions {
                origin: 1,
                ..Default::default()
            },
        )
        .unwrap();
        let g = game_upper(&chain(), &Variable::Monotone(v.clone()), &sit(&[0]), &Default::default()).unwrap();
        assert_eq!(g.route, Route::Limit);
        assert!(g.diagnostics.converged);
        assert!((g.value.as_f64() - 2.0).abs() < 1e-6);
        let low = game_lower(&chain(), &Variable::Monotone(v), &sit(&[0]), &Default::default()).unwrap();
        assert!((low.value.as_f64() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn dispatch_routes() {
        let big = k2_tree();
        let g = game_upper(&big, &Variable::Finitary(diagonal()), &Situation::root(), &Default::default()).unwrap();
        assert_eq!(g.route, Route::FinitaryExact);
        assert!((g.value.as_f64() - 0.67).abs() < 1e-12);
        assert_eq!(g.witness.unwrap().value_at(&Situation::root()).unwrap(), g.value.as_f64());

        let constant = MonotoneVariable::constant(diagonal());
        let g = game_upper(&big, &Variable::Monotone(constant.clone()), &Situation::root(), &Default::default())
            .unwrap();
        assert_eq!(g.route, Route::Limit);
        assert_eq!(g.diagnostics.trace[0].value, backward_upper(&big, &diagonal(), &Situation::root()).unwrap());

        // bounded variable: cuts become inactive and the plain value is recovered
        let cut = CutExtended::new(constant);
        let g = game_upper(&big, &Variable::CutExtended(cut), &Situation::root(), &Default::default()).unwrap();
        assert_eq!(g.route, Route::CutExtension);
        assert!((g.value.as_f64() - 0.67).abs() < 1e-12);
    }

    #[test]
    fn cut_extension_of_an_unbounded_hitting_time() {
        // τ under the fair coin is unbounded above; its cuts converge to E τ = 2.
        let v = hitting_variable(2, &[1], HittingMode::Time, HittingOptions::default()).unwrap();
        let g = game_upper(
            &fair(),
            &Variable::CutExtended(CutExtended::new(v)),
            &Situation::root(),
            &Default::default(),
        )
        .unwrap();
        assert!((g.value.as_f64() - 2.0).abs() < 1e-6, "{:?}", g.value);
    }
}
