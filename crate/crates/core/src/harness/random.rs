//! Seeded random trees, gambles and situations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::gamble::FinitaryGamble;
use crate::local::{CredalSet, MassFunction};
use crate::space::{Situation, StateSpace};
use crate::tree::{vertex_tree_count, ImpreciseTree};

/// Uniform point of the simplex.
pub fn mass_function(rng: &mut impl Rng, n: usize) -> MassFunction {
    let raw: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = raw.iter().sum();
    MassFunction::new(raw.iter().map(|x| x / total).collect()).expect("normalized")
}

/// Credal set with `1..=max_vertices` random vertices.
pub fn credal_set(rng: &mut impl Rng, n: usize, max_vertices: usize) -> CredalSet {
    let k = rng.gen_range(1..=max_vertices.max(1));
    CredalSet::new((0..k).map(|_| mass_function(rng, n)).collect()).expect("non-empty")
}

pub fn situation(rng: &mut impl Rng, arity: usize, len: usize) -> Situation {
    Situation((0..len).map(|_| rng.gen_range(0..arity)).collect())
}

/// Gamble with values uniform in `[lo, hi]` on every situation of length
/// `horizon`.
pub fn gamble(rng: &mut impl Rng, arity: usize, horizon: usize, lo: f64, hi: f64) -> FinitaryGamble {
    let cells = arity.pow(horizon as u32);
    let values: Vec<f64> = (0..cells).map(|_| rng.gen_range(lo..=hi)).collect();
    FinitaryGamble::from_table(arity, horizon, &values).expect("table size matches")
}

/// Explicit tree of the given depth. Credal sets on situations below `s`
/// are collapsed to one of their vertices until at most `cap`
/// vertex-selection trees remain for `(s, depth)`.
pub fn explicit_tree(
    rng: &mut impl Rng,
    arity: usize,
    depth: usize,
    max_vertices: usize,
    s: &Situation,
    cap: u128,
) -> Result<ImpreciseTree> {
    let space = StateSpace::alphabetic(arity)?;
    let mut sets: BTreeMap<Situation, CredalSet> = BTreeMap::new();
    for k in 0..depth {
        for t in Situation::all_of_length(arity, k) {
            sets.insert(t, credal_set(rng, arity, max_vertices));
        }
    }
    let build = |sets: &BTreeMap<Situation, CredalSet>| {
        ImpreciseTree::explicit_from_fn(space.clone(), depth, |t| sets[t].clone())
    };
    let mut tree = build(&sets)?;
    while vertex_tree_count(&tree, s, depth)? > cap {
        let mut imprecise: Vec<Situation> = sets
            .iter()
            .filter(|(t, k)| s.is_prefix_of(t) && !k.is_precise())
            .map(|(t, _)| t.clone())
            .collect();
        imprecise.shuffle(rng);
        let t = imprecise.pop().expect("count above cap implies an imprecise set");
        let k = &sets[&t];
        let keep = k.vertices()[rng.gen_range(0..k.vertex_count())].clone();
        sets.insert(t, CredalSet::precise(keep));
        tree = build(&sets)?;
    }
    Ok(tree)
}

/// A random finitary comparison instance.
#[derive(Debug, Clone)]
pub struct Instance {
    pub tree: ImpreciseTree,
    pub gamble: FinitaryGamble,
    pub situation: Situation,
}

/// `|X| ∈ {2, 3}`, horizon `1..=max_horizon`, up to `max_vertices` vertices
/// per credal set, values in `[−1, 1]`, and `s` of length below the horizon.
pub fn instance(rng: &mut impl Rng, max_horizon: usize, max_vertices: usize, cap: u128) -> Result<Instance> {
    let arity = rng.gen_range(2..=3);
    let horizon = rng.gen_range(1..=max_horizon);
    let len = rng.gen_range(0..horizon.min(3));
    let s = situation(rng, arity, len);
    let tree = explicit_tree(rng, arity, horizon, max_vertices, &s, cap)?;
    Ok(Instance {
        gamble: gamble(rng, arity, horizon, -1.0, 1.0),
        tree,
        situation: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn instances_respect_the_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let i = instance(&mut rng, 4, 3, 4096).unwrap();
            assert!(vertex_tree_count(&i.tree, &i.situation, i.gamble.horizon()).unwrap() <= 4096);
            assert!(i.gamble.lo() >= -1.0 && i.gamble.hi() <= 1.0);
        }
    }

    #[test]
    fn seeded_generation_is_reproducible() {
        let a = instance(&mut ChaCha8Rng::seed_from_u64(9), 4, 3, 4096).unwrap();
        let b = instance(&mut ChaCha8Rng::seed_from_u64(9), 4, 3, 4096).unwrap();
        assert_eq!(a.tree, b.tree);
        assert_eq!(a.gamble.max_abs_diff(&b.gamble), 0.0);
    }
}
