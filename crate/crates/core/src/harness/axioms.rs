//! P1–P5 for a global upper expectation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::evaluator::Evaluator;
use super::random;
use super::report::PropertyReport;
use super::RunConfig;
use crate::error::Result;
use crate::gamble::FinitaryGamble;
use crate::limit::{Direction, MonotoneVariable};
use crate::space::Situation;

/// Independent RNG stream for case `i` of property `tag`.
pub(crate) fn case_rng(seed: u64, tag: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((tag << 32) | i as u64);
    rng
}

/// Runs `cases` in parallel and merges the per-case reports in index order.
pub(crate) fn run_cases(
    report: &mut PropertyReport,
    cases: usize,
    case: impl Fn(usize, &mut PropertyReport) -> Result<()> + Sync,
    label: &str,
) {
    let parts: Vec<PropertyReport> = (0..cases)
        .into_par_iter()
        .map(|i| {
            let mut r = PropertyReport::new("", 0, serde_json::Value::Null);
            if let Err(e) = case(i, &mut r) {
                r.record(format!("{label}/{i:04}/error: {e}"), f64::NAN, f64::NAN, f64::NAN, false);
            }
            r
        })
        .collect();
    for p in parts {
        report.merge(p);
    }
}

fn random_situation(rng: &mut ChaCha8Rng, arity: usize) -> Situation {
    let len = rng.gen_range(0..=2);
    random::situation(rng, arity, len)
}

/// The one-step gamble `x ↦ E(f | s·x)` as a function of state `len(s)+1`.
fn one_step_values(e: &dyn Evaluator, f: &FinitaryGamble, s: &Situation, arity: usize) -> Result<FinitaryGamble> {
    let values = (0..arity).map(|x| e.upper(f, &s.child(x))).collect::<Result<Vec<_>>>()?;
    FinitaryGamble::local(arity, s.len(), &values)
}

/// Checks P1–P5 with random situations of length at most 2 and gambles
/// reaching at most two steps past them.
///
/// * P1: one-step gambles reproduce the local envelope.
/// * P2: `E(f | s) = E(f·1_{Γ(s)} | s)`.
/// * P3: `E(f | s) = E(E(f | s·X) | s)`, asserted with equality.
/// * P4: `f ≤ g` implies `E(f | s) ≤ E(g | s)`.
/// * P5: `limsup E(f_n | s) ≥ E(f | s)` along two convergent sequences
///   whose limit is finitary or itself a monotone limit; a third family has
///   no independent evaluator and is only counted.
pub fn check_global_axioms(e: &dyn Evaluator, config: &RunConfig) -> PropertyReport {
    let mut report = PropertyReport::new("axioms", config.seed, config.echo());
    let tree = e.tree();
    let arity = tree.arity();
    let tol = config.tol;
    let n = config.samples;

    run_cases(&mut report, n, |i, r| {
        let mut rng = case_rng(config.seed, 1, i);
        let s = random_situation(&mut rng, arity);
        let g: Vec<f64> = (0..arity).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let f = FinitaryGamble::local(arity, s.len(), &g)?;
        let expected = tree.model_at(&s)?.upper(&g);
        r.expect_eq(format!("P1/{i:04}/s={s}"), e.upper(&f, &s)?, expected, tol);
        Ok(())
    }, "P1");

    run_cases(&mut report, n, |i, r| {
        let mut rng = case_rng(config.seed, 2, i);
        let s = random_situation(&mut rng, arity);
        let h = s.len() + rng.gen_range(1..=2);
        let f = random::gamble(&mut rng, arity, h, -1.0, 1.0);
        let restricted = f.zip_with(&FinitaryGamble::indicator(arity, &s), |a, b| a * b);
        r.expect_eq(format!("P2/{i:04}/s={s}"), e.upper(&restricted, &s)?, e.upper(&f, &s)?, tol);
        Ok(())
    }, "P2");

    run_cases(&mut report, n, |i, r| {
        let mut rng = case_rng(config.seed, 3, i);
        let s = random_situation(&mut rng, arity);
        let h = s.len() + rng.gen_range(1..=2);
        let f = random::gamble(&mut rng, arity, h, -1.0, 1.0);
        let inner = one_step_values(e, &f, &s, arity)?;
        r.expect_eq(format!("P3/{i:04}/s={s}"), e.upper(&f, &s)?, e.upper(&inner, &s)?, tol);
        Ok(())
    }, "P3");

    run_cases(&mut report, n, |i, r| {
        let mut rng = case_rng(config.seed, 4, i);
        let s = random_situation(&mut rng, arity);
        let h = s.len() + rng.gen_range(1..=2);
        let f = random::gamble(&mut rng, arity, h, -1.0, 1.0);
        let bump = random::gamble(&mut rng, arity, h, 0.0, 0.5);
        let shift = rng.gen_range(0.0..1.0);
        let g = f.add(&bump).add_const(shift);
        r.expect_le(format!("P4/{i:04}/s={s}"), e.upper(&f, &s)?, e.upper(&g, &s)?, tol);
        Ok(())
    }, "P4");

    // f_n = g + (−1)^n / n on horizon max(n, h): converges uniformly to g.
    const OSCILLATION_TERMS: usize = 24;
    run_cases(&mut report, n, |i, r| {
        let mut rng = case_rng(config.seed, 5, i);
        let s = random_situation(&mut rng, arity);
        let h = s.len() + rng.gen_range(1..=2);
        let g = random::gamble(&mut rng, arity, h, -1.0, 1.0);
        let target = e.upper(&g, &s)?;
        let tail = (OSCILLATION_TERMS - 2..=OSCILLATION_TERMS)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                e.upper(&g.add_const(sign / m as f64).lift(m.max(h)), &s)
            })
            .collect::<Result<Vec<_>>>()?;
        let limsup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r.record(format!("P5a/{i:04}/s={s}"), limsup, target, limsup - target, limsup >= target - tol);
        Ok(())
    }, "P5a");

    // f_n = g + 1_{Γ(s·a^n)} + (−1)^n / n. Its limit g + 1{a forever after s} is the non-increasing limit of the
    // same sequence without the oscillation, evaluated through the
    // convergence controller.
    let limit_cases = (n / 10).max(1);
    let controls = config.convergence();
    run_cases(&mut report, limit_cases, |i, r| {
        let mut rng = case_rng(config.seed, 6, i);
        let s = random_situation(&mut rng, arity);
        let k = s.len();
        let h = k + rng.gen_range(1..=2);
        let g = random::gamble(&mut rng, arity, h, 0.0, 1.0);
        let run_of_a = |m: usize| {
            let mut t = s.clone();
            t.0.extend(std::iter::repeat(0).take(m));
            FinitaryGamble::indicator(arity, &t)
        };
        let base = g.clone();
        let prefix = s.clone();
        let limit = MonotoneVariable::new("g + run of a", arity, Direction::NonIncreasing, None, move |m| {
            let mut t = prefix.clone();
            t.0.extend(std::iter::repeat(0).take(m.saturating_sub(k)));
            Ok(base.add(&FinitaryGamble::indicator(arity, &t)))
        })?
        .with_base_horizon(h);
        let target = e.upper_limit(&limit, &s, &controls)?.estimate.as_f64();
        let m_max = controls.max_horizon.min(48);
        let tail = (m_max - 2..=m_max)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                e.upper(&g.add(&run_of_a(m)).add_const(sign / m as f64), &s)
            })
            .collect::<Result<Vec<_>>>()?;
        let limsup = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        r.record(
            format!("P5b/{i:04}/s={s}"),
            limsup,
            target,
            limsup - target,
            limsup >= target - config.limit_tol,
        );
        Ok(())
    }, "P5b");

    // Σ_{i ≤ n} (−1/2)^i 1{X_i = a}: convergent, neither finitary nor
    // monotone, so its limit has no evaluator here.
    report.untestable_limits += limit_cases;

    report.finalize();
    report
}
