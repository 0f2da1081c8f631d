//! Game route against measure route, upper and lower, on finitary gambles
//! and monotone limits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::random;
use super::report::PropertyReport;
use super::RunConfig;
use crate::error::{Error, Result};
use crate::format::VariableFile;
use crate::gamble::FinitaryGamble;
use crate::game::{game_lower, game_upper, Variable};
use crate::oracle::{measure_lower_finitary, measure_lower_limit, measure_upper_finitary, measure_upper_limit};
use crate::space::{Situation, StateSpace};
use crate::tree::ImpreciseTree;

/// A variable to compare, rebuilt for every conditioning situation.
#[derive(Debug, Clone)]
pub enum NamedVariable {
    File(VariableFile),
    Finitary { name: String, gamble: FinitaryGamble },
}

impl NamedVariable {
    pub fn name(&self) -> String {
        match self {
            Self::File(v) => v.name(),
            Self::Finitary { name, .. } => name.clone(),
        }
    }

    pub fn build(&self, space: &StateSpace, s: &Situation) -> Result<Variable> {
        match self {
            Self::File(v) => v.build(space, s),
            Self::Finitary { gamble, .. } => Ok(Variable::Finitary(gamble.clone())),
        }
    }
}

/// `count` random finitary gambles with values in `[−1, 1]`. Horizons stay
/// where exact enumeration is usually affordable: up to 4 on two states, up
/// to 2 on more.
pub fn finitary_instances(arity: usize, count: usize, seed: u64) -> Vec<NamedVariable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_h = if arity == 2 { 4 } else { 2 };
    (0..count)
        .map(|i| {
            let h = rng.gen_range(1..=max_h);
            NamedVariable::Finitary {
                name: format!("random{i:02}_h{h}"),
                gamble: random::gamble(&mut rng, arity, h, -1.0, 1.0),
            }
        })
        .collect()
}

/// `□` and every situation of length 1 and 2.
pub fn default_situations(arity: usize) -> Vec<Situation> {
    (0..=2).flat_map(|k| Situation::all_of_length(arity, k)).collect()
}

#[derive(Debug, Clone, Copy)]
struct Pair {
    game: f64,
    oracle: f64,
    exact: bool,
}

fn compare(r: &mut PropertyReport, case: String, p: Pair, tol: f64, upper: bool, metric: &str) {
    let gap = (p.game - p.oracle).abs();
    if p.exact {
        r.metric_max(metric, gap);
        r.expect_eq(case, p.oracle, p.game, tol);
    } else {
        r.metric_max("max_abs_gap_sampled", gap);
        // Sampled oracles only see some trees: a lower bound on the upper
        // value and an upper bound on the lower value.
        let slack = if upper { p.game - p.oracle } else { p.oracle - p.game };
        r.record(case + "/sampled", p.oracle, p.game, slack, slack >= -tol);
    }
}

fn finite(v: crate::extended::ExtendedReal) -> Result<f64> {
    match v {
        crate::extended::ExtendedReal::Finite(x) => Ok(x),
        _ => Err(Error::Undefined("infinite value")),
    }
}

fn both_routes(tree: &ImpreciseTree, v: &Variable, s: &Situation, config: &RunConfig) -> Result<(Pair, Pair, bool)> {
    let controls = config.convergence();
    let envelope = config.envelope();
    match v {
        Variable::Finitary(f) => {
            let up = measure_upper_finitary(tree, f, s, &envelope)?;
            let low = measure_lower_finitary(tree, f, s, &envelope)?;
            Ok((
                Pair {
                    game: finite(game_upper(tree, v, s, &controls)?.value)?,
                    oracle: up.value,
                    exact: up.exact,
                },
                Pair {
                    game: finite(game_lower(tree, v, s, &controls)?.value)?,
                    oracle: low.value,
                    exact: low.exact,
                },
                true,
            ))
        }
        Variable::Monotone(seq) => {
            let up = measure_upper_limit(tree, seq, s, &controls, &envelope)?;
            let low = measure_lower_limit(tree, seq, s, &controls, &envelope)?;
            Ok((
                Pair {
                    game: finite(game_upper(tree, v, s, &controls)?.value)?,
                    oracle: finite(up.limit.estimate)?,
                    exact: up.exact,
                },
                Pair {
                    game: finite(game_lower(tree, v, s, &controls)?.value)?,
                    oracle: finite(low.limit.estimate)?,
                    exact: low.exact,
                },
                false,
            ))
        }
        Variable::CutExtended(_) => Err(Error::Undefined("the measure route has no cut extension")),
    }
}

/// Compares both routes, upper and lower, for every variable at every
/// situation. Exact oracle values must match within `tol` (finitary) or
/// `limit_tol` (limits); sampled ones are checked one-sided.
pub fn equivalence_report(
    tree: &ImpreciseTree,
    vars: &[NamedVariable],
    situations: &[Situation],
    config: &RunConfig,
) -> PropertyReport {
    let mut report = PropertyReport::new("equivalence", config.seed, config.echo());
    let space = tree.space();
    let jobs: Vec<(&NamedVariable, &Situation)> = vars
        .iter()
        .flat_map(|v| situations.iter().map(move |s| (v, s)))
        .collect();
    let parts: Vec<PropertyReport> = jobs
        .par_iter()
        .map(|(v, s)| {
            let mut r = PropertyReport::new("", 0, serde_json::Value::Null);
            let case = format!("{}/s={}", v.name(), space.display_situation(s));
            match v.build(space, s).and_then(|var| both_routes(tree, &var, s, config)) {
                Ok((up, low, finitary)) => {
                    let (tol, metric) = if finitary {
                        (config.tol, "max_abs_gap_finitary")
                    } else {
                        (config.limit_tol, "max_abs_gap_limit")
                    };
                    compare(&mut r, format!("{case}/upper"), up, tol, true, metric);
                    compare(&mut r, format!("{case}/lower"), low, tol, false, metric);
                }
                Err(e) => r.record(format!("{case}/error: {e}"), f64::NAN, f64::NAN, f64::NAN, false),
            }
            r
        })
        .collect();
    for p in parts {
        report.merge(p);
    }
    report.finalize();
    report
}
