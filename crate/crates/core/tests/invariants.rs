use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;
use tilewalk_core::{
    build_graph, enumerate_paths, green_column, green_table, sample_path, CircleRealization, DoublingKernel,
    EmpiricalMeasure, KernelTable, Symbol, TransitionKernel, Word, DEFAULT_VERTEX_BUDGET,
};

fn x_strategy() -> impl Strategy<Value = (u64, u64)> {
    (2u64..40).prop_flat_map(|q| (1..q, Just(q)))
}

fn kernel((p, q): (u64, u64)) -> DoublingKernel {
    DoublingKernel::from_fraction(p, q).unwrap()
}

fn word_strategy(max_level: u32) -> impl Strategy<Value = Word> {
    (0..=max_level).prop_flat_map(|n| (Just(n), 0..1u64 << n)).prop_map(|(n, i)| Word::new(2, n, i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rows_are_stochastic_and_raise_the_level(x in x_strategy(), u in word_strategy(40)) {
        let k = kernel(x);
        let row = k.transitions(&u).unwrap();
        prop_assert_eq!(row.iter().map(|t| t.weight).sum::<u64>(), k.denominator());
        for t in &row {
            prop_assert!(t.weight > 0);
            prop_assert_eq!(t.target.level(), u.level() + 1);
            prop_assert!(t.target.tile().intersects(&u.tile()));
        }
    }

    #[test]
    fn dp_matches_enumeration(x in x_strategy(), source in word_strategy(2)) {
        let k = kernel(x);
        let depth = source.level() + 4;
        let dp = green_table(&k, &source, depth).unwrap();
        let paths = enumerate_paths(&k, &source, depth).unwrap();
        for (w, f) in &paths {
            prop_assert_eq!(&dp.get(w), f);
        }
        for (w, f) in dp.iter() {
            prop_assert_eq!(paths.get(&w).cloned().unwrap_or_else(BigRational::zero), f);
        }
    }

    #[test]
    fn hitting_probabilities_are_sub_stochastic(x in x_strategy(), n in 1u32..9) {
        // Every path from o crosses level n exactly once.
        let k = kernel(x);
        let table = green_table(&k, &Word::root(2), n).unwrap();
        let mut level_sum = BigRational::zero();
        for (w, f) in table.iter() {
            prop_assert!(f >= BigRational::zero() && f <= BigRational::one());
            if w.level() == n {
                level_sum += f;
            }
        }
        prop_assert!(level_sum.is_one());
    }

    #[test]
    fn column_and_table_agree(x in x_strategy(), u in word_strategy(3), v in word_strategy(7)) {
        let k = kernel(x);
        let forward = green_table(&k, &u, 7).unwrap().get(&v);
        let backward = green_column(&k, &v, 0).unwrap().get(&u);
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn martin_kernel_is_one_at_the_root(x in x_strategy(), v in word_strategy(12)) {
        let column = green_column(&kernel(x), &v, 0).unwrap();
        prop_assert!(column.martin(&Word::root(2)).unwrap().is_one());
    }

    #[test]
    fn samples_are_reproducible(x in x_strategy(), seed in any::<u64>(), index in 0u64..1000) {
        let k = kernel(x);
        let a = sample_path(&k, seed, index, 30).unwrap();
        let b = sample_path(&k, seed, index, 30).unwrap();
        prop_assert_eq!(&a, &b);
        for (n, pair) in a.steps.windows(2).enumerate() {
            prop_assert_eq!(pair[1].level(), n as u32 + 1);
            prop_assert!(k.transitions(&pair[0]).unwrap().iter().any(|t| t.target == pair[1]));
        }
    }

    #[test]
    fn words_round_trip(symbols in proptest::collection::vec(0u8..3, 0..20)) {
        let syms: Vec<Symbol> = symbols.iter().map(|&s| Symbol(s)).collect();
        let w = Word::from_symbols(3, &syms).unwrap();
        prop_assert_eq!(w.symbols(), syms.clone());
        prop_assert_eq!(Word::parse(3, &w.to_string()).unwrap(), w);
        if let Some((&last, _)) = syms.split_last() {
            prop_assert_eq!(w.parent().child(last).unwrap(), w);
            prop_assert!(w.parent().tile().contains(&w.tile()));
            prop_assert_eq!(w.shift().symbols(), syms[1..].to_vec());
        }
    }

    #[test]
    fn measures_are_normalized(counts in proptest::collection::vec(0u64..1000, 16)) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let m = EmpiricalMeasure::from_counts(2, 4, counts);
        prop_assert!((m.masses.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_kernels_extend_back_to_themselves(x in x_strategy(), u in word_strategy(12)) {
        let k = kernel(x);
        let table = KernelTable::from_kernel(&k, 2).unwrap();
        let extended = tilewalk_core::extend_by_equivariance(&table).unwrap();
        let as_map = |row: Vec<tilewalk_core::Transition>, d: u64| -> BTreeMap<Word, BigRational> {
            row.into_iter().map(|t| (t.target, BigRational::new(BigInt::from(t.weight), BigInt::from(d)))).collect()
        };
        prop_assert_eq!(
            as_map(extended.transitions(&u).unwrap(), extended.denominator()),
            as_map(k.transitions(&u).unwrap(), k.denominator())
        );
    }
}

#[test]
fn graph_edges_are_symmetric_and_local() {
    let g = build_graph(&CircleRealization::doubling(), 7, DEFAULT_VERTEX_BUDGET).unwrap();
    for (u, v) in g.edges() {
        assert!(u.level().abs_diff(v.level()) <= 1);
        assert!(u.tile().intersects(&v.tile()));
        assert!(g.neighbors(&v).unwrap().contains(&u));
    }
}

#[test]
fn delta_does_not_decrease_with_the_cutoff() {
    let g = build_graph(&CircleRealization::doubling(), 6, DEFAULT_VERTEX_BUDGET).unwrap();
    let deltas: Vec<i64> = (0..=6).map(|c| g.hyperbolicity_delta(c, u64::MAX, 0).unwrap().delta.twice()).collect();
    assert!(deltas.windows(2).all(|w| w[0] <= w[1]), "{deltas:?}");
}
