//! C1–C3 on every local model of a tree.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::report::PropertyReport;
use super::RunConfig;
use crate::local::{check_coherence, CredalSet, LocalGamble};
use crate::tree::{ImpreciseTree, Rule};

/// Defects for local upper expectations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalFault {
    /// `Q(f) + 1`, breaks C1.
    SupPlusOne,
    /// Lower envelope in place of the upper one, breaks C2.
    LowerAsUpper,
    /// `Q(f)²` with sign kept, breaks C3.
    Squared,
}

impl LocalFault {
    pub const ALL: [LocalFault; 3] = [LocalFault::SupPlusOne, LocalFault::LowerAsUpper, LocalFault::Squared];

    pub fn apply(self, k: &CredalSet, f: &[f64]) -> f64 {
        match self {
            LocalFault::SupPlusOne => k.upper(f) + 1.0,
            LocalFault::LowerAsUpper => k.lower(f),
            LocalFault::Squared => {
                let v = k.upper(f);
                v * v.abs()
            }
        }
    }
}

/// Distinct credal sets used by the tree, in first-seen order.
pub fn distinct_credal_sets(tree: &ImpreciseTree) -> Vec<CredalSet> {
    let all: Vec<&CredalSet> = match tree.rule() {
        Rule::Uniform(k) => vec![k],
        Rule::Stationary { root, by_state } => std::iter::once(root).chain(by_state).collect(),
        Rule::Explicit { levels, .. } => levels.iter().flatten().collect(),
    };
    let mut out: Vec<CredalSet> = Vec::new();
    for k in all {
        if !out.contains(k) {
            out.push(k.clone());
        }
    }
    out
}

fn test_family(rng: &mut ChaCha8Rng, n: usize, count: usize) -> (Vec<LocalGamble>, Vec<f64>) {
    let mut gambles: Vec<LocalGamble> = (0..n).map(|x| LocalGamble::indicator(n, x)).collect();
    gambles.push(LocalGamble::constant(n, -0.5));
    while gambles.len() < count {
        let scale = [1.0, 5.0, 100.0][rng.gen_range(0..3)];
        gambles.push((0..n).map(|_| rng.gen_range(-scale..=scale)).collect::<Vec<_>>().into());
    }
    let scalars = vec![0.5, 1.0, 3.0, rng.gen_range(0.0..10.0)];
    (gambles, scalars)
}

/// Runs C1–C3 on every distinct local model, optionally through a fault.
pub fn check_tree_coherence_with(tree: &ImpreciseTree, config: &RunConfig, fault: Option<LocalFault>) -> PropertyReport {
    let mut report = PropertyReport::new("coherence", config.seed, config.echo());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let count = (config.samples / 10).clamp(8, 40);
    for (i, k) in distinct_credal_sets(tree).iter().enumerate() {
        let (gambles, scalars) = test_family(&mut rng, k.dimension(), count);
        let r = match fault {
            None => check_coherence(k, &gambles, &scalars, config.tol),
            Some(fl) => check_coherence(&|f: &[f64]| fl.apply(k, f), &gambles, &scalars, config.tol),
        };
        report.cases_run += r.cases;
        for v in r.violations {
            report.violations.push(super::report::Violation {
                case: format!("set{i}/{}/{:?}{}", v.axiom, v.gambles, v.lambda.map(|l| format!("/λ={l}")).unwrap_or_default()),
                observed: v.observed,
                expected: v.bound,
                slack: v.slack,
            });
        }
    }
    report.finalize();
    report
}

pub fn check_tree_coherence(tree: &ImpreciseTree, config: &RunConfig) -> PropertyReport {
    check_tree_coherence_with(tree, config, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::corpus;

    #[test]
    fn corpus_is_coherent_and_faults_are_caught() {
        let config = RunConfig::default();
        for e in corpus::suite_trees().unwrap() {
            assert!(check_tree_coherence(&e.tree.tree, &config).passed(), "{}", e.name);
        }
        let two = corpus::suite_trees().unwrap().remove(1).tree.tree;
        for fault in LocalFault::ALL {
            let r = check_tree_coherence_with(&two, &config, Some(fault));
            let axiom = match fault {
                LocalFault::SupPlusOne => "C1",
                LocalFault::LowerAsUpper => "C2",
                LocalFault::Squared => "C3",
            };
            assert!(r.violations.iter().any(|v| v.case.contains(axiom)), "{fault:?}");
        }
    }
}
