//! CA1–CA3 on non-negative variables.

use rand::Rng;

use super::axioms::{case_rng, run_cases};
use super::evaluator::Evaluator;
use super::random;
use super::report::PropertyReport;
use super::RunConfig;
use crate::gamble::FinitaryGamble;
use crate::limit::{hitting_variable, usc_variable, Direction, HittingMode, HittingOptions, MonotoneVariable};
use crate::space::Situation;

/// Random non-negative gamble with `sup = 1`.
fn unit_gamble(rng: &mut impl Rng, arity: usize, horizon: usize) -> FinitaryGamble {
    let f = random::gamble(rng, arity, horizon, 0.0, 1.0);
    let hi = f.hi();
    if hi > 0.0 {
        f.map(|v| (v / hi).min(1.0))
    } else {
        FinitaryGamble::constant(arity, 1.0).lift(horizon)
    }
}

/// Checks CA1–CA3 at random situations of length at most 2.
///
/// * CA1: monotonicity on ordered non-negative pairs, including a constant
///   against the same constant plus a small cylinder bump.
/// * CA2: `lim E((1 − 2^{-n}) h | s) = E(h | s)`; constant sequences are
///   stationary; hitting indicators converge.
/// * CA3: usc decompositions of tables converge to the table's value, and
///   `lim E(h + 2^{-n} | s) = E(h | s)`.
pub fn check_capacity(e: &dyn Evaluator, config: &RunConfig) -> PropertyReport {
    let mut report = PropertyReport::new("capacity", config.seed, config.echo());
    let arity = e.tree().arity();
    let tol = config.tol;
    let ltol = config.limit_tol;
    let controls = config.convergence();
    let n = config.samples;
    let limit_cases = (n / 10).max(1);
    let situation = |rng: &mut rand_chacha::ChaCha8Rng| {
        let len = rng.gen_range(0..=2);
        random::situation(rng, arity, len)
    };

    run_cases(&mut report, n, |i, r| {
        let mut rng = case_rng(config.seed, 11, i);
        let s = situation(&mut rng);
        let h = s.len() + rng.gen_range(1..=2);
        let f = random::gamble(&mut rng, arity, h, 0.0, 1.0);
        let g = f.add(&random::gamble(&mut rng, arity, h, 0.0, 0.5));
        r.expect_le(format!("CA1/pair/{i:04}/s={s}"), e.upper(&f, &s)?, e.upper(&g, &s)?, tol);

        let c = rng.gen_range(0.0..1.0);
        let x = s.child(rng.gen_range(0..arity));
        let bumped = FinitaryGamble::indicator(arity, &x).map(|v| c + 0.05 * v);
        let flat = FinitaryGamble::constant(arity, c);
        r.expect_le(format!("CA1/bump/{i:04}/s={s}"), e.upper(&flat, &s)?, e.upper(&bumped, &s)?, tol);
        Ok(())
    }, "CA1");

    run_cases(&mut report, limit_cases, |i, r| {
        let mut rng = case_rng(config.seed, 12, i);
        let s = situation(&mut rng);
        let h = s.len() + rng.gen_range(1..=2);
        let top = unit_gamble(&mut rng, arity, h);
        let base = top.clone();
        let seq = MonotoneVariable::new("(1 − 2^-n) h", arity, Direction::NonDecreasing, Some(0.0), move |m| {
            Ok(base.scale(1.0 - 0.5f64.powi(m as i32)))
        })?
        .with_base_horizon(h);
        let lim = e.upper_limit(&seq, &s, &controls)?;
        r.expect_eq(format!("CA2/scaled/{i:04}/s={s}"), lim.estimate.as_f64(), e.upper(&top, &s)?, ltol);

        let c = rng.gen_range(0.0..2.0);
        let constant = MonotoneVariable::constant(FinitaryGamble::constant(arity, c));
        let lim = e.upper_limit(&constant, &s, &controls)?;
        r.expect_eq(format!("CA2/constant/{i:04}/s={s}"), lim.estimate.as_f64(), c, 0.0);

        let mut target: Vec<usize> = (0..arity).filter(|_| rng.gen_bool(0.5)).collect();
        if target.is_empty() {
            target.push(rng.gen_range(0..arity));
        }
        let hit = hitting_variable(
            arity,
            &target,
            HittingMode::Indicator,
            HittingOptions {
                origin: s.len(),
                ..Default::default()
            },
        )?;
        let lim = e.upper_limit(&hit, &s, &controls)?;
        let v = lim.estimate.as_f64();
        r.record(
            format!("CA2/hitting/{i:04}/s={s}"),
            v,
            v,
            0.0,
            lim.converged && (-tol..=1.0 + tol).contains(&v),
        );
        Ok(())
    }, "CA2");

    run_cases(&mut report, limit_cases, |i, r| {
        let mut rng = case_rng(config.seed, 13, i);
        let s = situation(&mut rng);
        let h = s.len() + rng.gen_range(1..=2);
        let table = unit_gamble(&mut rng, arity, h);
        let expected = e.upper(&table, &s)?;
        let lim = e.upper_limit(&usc_variable(std::sync::Arc::new(table.clone())), &s, &controls)?;
        r.expect_eq(format!("CA3/usc/{i:04}/s={s}"), lim.estimate.as_f64(), expected, ltol);

        let base = table.clone();
        let seq = MonotoneVariable::new("h + 2^-n", arity, Direction::NonIncreasing, None, move |m| {
            Ok(base.add_const(0.5f64.powi(m as i32)))
        })?
        .with_base_horizon(h);
        let lim = e.upper_limit(&seq, &s, &controls)?;
        r.expect_eq(format!("CA3/shifted/{i:04}/s={s}"), lim.estimate.as_f64(), expected, ltol);

        let x = Situation((0..rng.gen_range(1..=2)).map(|_| rng.gen_range(0..arity)).collect());
        let cylinder = FinitaryGamble::indicator(arity, &x);
        let lim = e.upper_limit(&usc_variable(std::sync::Arc::new(cylinder.clone())), &s, &controls)?;
        r.expect_eq(format!("CA3/cylinder/{i:04}/s={s}"), lim.estimate.as_f64(), e.upper(&cylinder, &s)?, tol);
        Ok(())
    }, "CA3");

    report.finalize();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus;
    use crate::harness::evaluator::{Fault, Faulty, GameEvaluator};

    fn small() -> RunConfig {
        RunConfig {
            samples: 40,
            ..Default::default()
        }
    }

    #[test]
    fn corpus_passes() {
        for entry in corpus::suite_trees().unwrap() {
            let r = check_capacity(&GameEvaluator { tree: &entry.tree.tree }, &small());
            assert!(r.passed(), "{}: {}", entry.name, r.to_table());
        }
    }

    #[test]
    fn faults_are_caught() {
        let entry = corpus::suite_trees().unwrap().remove(1);
        for (fault, prefix) in [
            (Fault::RangePenalty, "CA1"),
            (Fault::UpwardJump, "CA2"),
            (Fault::DownwardJump, "CA3"),
        ] {
            let e = Faulty {
                inner: GameEvaluator { tree: &entry.tree.tree },
                fault,
            };
            let r = check_capacity(&e, &small());
            assert!(r.violations.iter().any(|v| v.case.starts_with(prefix)), "{fault:?}");
        }
    }
}
