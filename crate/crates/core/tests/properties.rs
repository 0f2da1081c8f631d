use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use imprex::game::{backward_lower, backward_upper, game_upper, CutExtended, Variable};
use imprex::harness::random;
use imprex::limit::{
    hitting_variable, lsc_decomposition, usc_decomposition, ConvergenceControls, HittingMode, HittingOptions,
    MonotoneVariable,
};
use imprex::oracle::{measure_lower_finitary, measure_upper_finitary, EnvelopeControls};
use imprex::{FinitaryGamble, Situation};

const TOL: f64 = 1e-9;

fn instance(seed: u64) -> random::Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random::instance(&mut rng, 3, 3, 4096).unwrap()
}

fn table() -> impl Strategy<Value = FinitaryGamble> {
    (2usize..=3, 1usize..=3).prop_flat_map(|(arity, h)| {
        proptest::collection::vec(-3.0f64..3.0, arity.pow(h as u32))
            .prop_map(move |v| FinitaryGamble::from_table(arity, h, &v).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lower_is_negated_upper_on_both_routes(seed in any::<u64>()) {
        let inst = instance(seed);
        let (p, f, s) = (&inst.tree, &inst.gamble, &inst.situation);
        let env = EnvelopeControls::default();
        let up = backward_upper(p, f, s).unwrap();
        let low = backward_lower(p, f, s).unwrap();
        prop_assert!((low + backward_upper(p, &f.neg(), s).unwrap()).abs() < TOL);
        prop_assert!(low <= up + TOL);
        let m_up = measure_upper_finitary(p, f, s, &env).unwrap().value;
        let m_low = measure_lower_finitary(p, f, s, &env).unwrap().value;
        prop_assert!((m_low + measure_upper_finitary(p, &f.neg(), s, &env).unwrap().value).abs() < TOL);
        prop_assert!(m_low <= m_up + TOL);
    }

    #[test]
    fn upper_value_is_monotone(seed in any::<u64>(), bump in 0.0f64..1.0) {
        let inst = instance(seed);
        let (p, f, s) = (&inst.tree, &inst.gamble, &inst.situation);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let g = f.add(&random::gamble(&mut rng, f.arity(), f.horizon(), 0.0, bump));
        prop_assert!(backward_upper(p, f, s).unwrap() <= backward_upper(p, &g, s).unwrap() + TOL);
        prop_assert!(backward_lower(p, f, s).unwrap() <= backward_lower(p, &g, s).unwrap() + TOL);
        let c = f.hi() + bump;
        prop_assert!(backward_upper(p, f, s).unwrap() <= c + TOL);
    }

    #[test]
    fn cuts_beyond_the_range_change_nothing(seed in any::<u64>(), c in 0.0f64..1.0) {
        let inst = instance(seed);
        let (p, f, s) = (&inst.tree, &inst.gamble, &inst.situation);
        let plain = backward_upper(p, f, s).unwrap();
        let wide = f.lo().abs().max(f.hi().abs());
        prop_assert_eq!(backward_upper(p, &f.cut_lower(-wide).cut_upper(wide), s).unwrap(), plain);

        let cut = f.cut_lower(-c).cut_upper(c);
        prop_assert!(backward_upper(p, &f.cut_upper(c), s).unwrap() <= plain + TOL);
        prop_assert!(backward_upper(p, &cut, s).unwrap() <= c + TOL);
        prop_assert!(backward_upper(p, &cut, s).unwrap() >= -c - TOL);

        let extended = Variable::CutExtended(CutExtended::new(MonotoneVariable::constant(f.clone())));
        let value = game_upper(p, &extended, s, &ConvergenceControls::default()).unwrap().value.as_f64();
        prop_assert!((value - plain).abs() < 1e-6, "{} vs {}", value, plain);
    }

    #[test]
    fn usc_decomposition_descends_to_the_table(f in table()) {
        let arity = f.arity();
        let settle = f.horizon().max((-f.lo()).ceil() as usize);
        let mut prev: Option<FinitaryGamble> = None;
        for n in 0..=settle + 1 {
            let u = usc_decomposition(&f, n).unwrap();
            for t in Situation::all_of_length(arity, n) {
                let sup = f.cylinder_sup(&t);
                let v = u.value(&t).unwrap();
                prop_assert!(v >= sup);
                prop_assert_eq!(v, sup.max(-(n as f64)));
            }
            if let Some(p) = &prev {
                prop_assert!(u.zip_with(p, |a, b| a - b).hi() <= 0.0);
            }
            prev = Some(u);
        }
        prop_assert_eq!(prev.unwrap().max_abs_diff(&f), 0.0);
    }

    #[test]
    fn lsc_decomposition_ascends_to_the_table(f in table()) {
        let settle = f.horizon().max(f.hi().ceil() as usize);
        let mut prev: Option<FinitaryGamble> = None;
        for n in 0..=settle + 1 {
            let l = lsc_decomposition(&f, n).unwrap();
            for t in Situation::all_of_length(f.arity(), n) {
                prop_assert_eq!(l.value(&t).unwrap(), f.cylinder_inf(&t).min(n as f64));
            }
            if let Some(p) = &prev {
                prop_assert!(p.zip_with(&l, |a, b| a - b).hi() <= 0.0);
            }
            prev = Some(l);
        }
        prop_assert_eq!(prev.unwrap().max_abs_diff(&f), 0.0);
    }

    #[test]
    fn hitting_variables_are_monotone(
        arity in 2usize..=3,
        mask in 1u8..7,
        origin in 0usize..3,
        cap in proptest::option::of(0.5f64..6.0),
        time in any::<bool>(),
    ) {
        let target: Vec<usize> = (0..arity).filter(|x| mask & (1 << x) != 0).collect();
        prop_assume!(!target.is_empty());
        prop_assume!(!(time && target.len() == arity));
        let mode = if time { HittingMode::Time } else { HittingMode::Indicator };
        let options = HittingOptions { origin, cap, ..Default::default() };
        let v = hitting_variable(arity, &target, mode, options).unwrap();
        prop_assert!(v.validate(&[0, 1, 2, 3, 4, 5, 6], 0.0).is_ok());
        let last = v.at(6).unwrap();
        prop_assert!(last.lo() >= 0.0);
        if !time {
            prop_assert!(last.hi() <= 1.0);
        }
    }
}
