//! Property suites for the algebraic invariants of the crate: free-group
//! word laws, clopen-set boolean algebra and equivariance, Smith normal
//! form certificates, the Schreier index-rank formula, and supernatural
//! arithmetic.

use proptest::prelude::*;

use freeboundary::boundary::ClopenSet;
use freeboundary::classify::{classify_gammas, invariant_iso, GammaSpec};
use freeboundary::matrix::IntMatrix;
use freeboundary::subgrp::SchreierGraph;
use freeboundary::supernat::{seq_equiv, Exp, SupernaturalNumber};
use freeboundary::words::ReducedWord;

// ------------------------------------------------------------ generators

fn letter(rank: u32) -> impl Strategy<Value = i32> {
    let r = rank as i32;
    (1..=r).prop_flat_map(|i| prop_oneof![Just(i), Just(-i)])
}

fn word(rank: u32, max_len: usize) -> impl Strategy<Value = ReducedWord> {
    prop::collection::vec(letter(rank), 0..=max_len)
        .prop_map(move |ls| ReducedWord::from_letters(rank, ls).unwrap())
}

fn clopen(rank: u32) -> impl Strategy<Value = ClopenSet> {
    prop::collection::vec(word(rank, 4), 0..=4).prop_map(move |ws| {
        ClopenSet::from_prefixes(rank, ws.iter().map(|w| w.letters().to_vec())).unwrap()
    })
}

fn supernatural() -> impl Strategy<Value = SupernaturalNumber> {
    let primes = [2u64, 3, 5, 7];
    prop::collection::vec((0usize..4, prop_oneof![
        (0u32..4).prop_map(Exp::Finite),
        Just(Exp::Inf)
    ]), 0..=3)
    .prop_map(move |entries| {
        let mut exc = std::collections::BTreeMap::new();
        for (i, e) in entries {
            exc.insert(primes[i], e);
        }
        SupernaturalNumber::new(Exp::Finite(0), exc).unwrap()
    })
}

fn infinite_supernatural() -> impl Strategy<Value = SupernaturalNumber> {
    (supernatural(), 0usize..4).prop_map(|(s, i)| {
        let primes = [2u64, 3, 5, 7];
        s.mul(&SupernaturalNumber::prime_power_inf(primes[i]).unwrap())
    })
}

fn gamma() -> impl Strategy<Value = GammaSpec> {
    (2u32..=3).prop_flat_map(|n| {
        (1usize..=n as usize)
            .prop_flat_map(move |k| prop::collection::vec(infinite_supernatural(), k..=k))
            .prop_map(move |ns| GammaSpec::new(n, ns).unwrap())
    })
}

// ------------------------------------------------------------- word laws

proptest! {
    #[test]
    fn word_group_laws(a in word(3, 8), b in word(3, 8), c in word(3, 8)) {
        let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(a.multiply(&a.inverse()).unwrap().is_identity());
        prop_assert_eq!(a.inverse().inverse(), a);
    }

    #[test]
    fn reduction_is_canonical(ls in prop::collection::vec(letter(3), 0..10)) {
        let w = ReducedWord::from_letters(3, ls).unwrap();
        // no adjacent inverse pair survives
        prop_assert!(w.letters().windows(2).all(|p| p[0] != -p[1]));
        // re-reducing is the identity
        prop_assert_eq!(ReducedWord::from_letters(3, w.letters().to_vec()).unwrap(), w);
    }
}

// -------------------------------------------------- clopen boolean algebra

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn clopen_boolean_laws(a in clopen(2), b in clopen(2), c in clopen(2)) {
        let u = |x: &ClopenSet, y: &ClopenSet| x.union(y).unwrap();
        let i = |x: &ClopenSet, y: &ClopenSet| x.intersect(y).unwrap();
        prop_assert_eq!(u(&a, &b), u(&b, &a));
        prop_assert_eq!(i(&a, &b), i(&b, &a));
        prop_assert_eq!(u(&u(&a, &b), &c), u(&a, &u(&b, &c)));
        prop_assert_eq!(i(&i(&a, &b), &c), i(&a, &i(&b, &c)));
        // absorption and De Morgan
        prop_assert_eq!(u(&a, &i(&a, &b)), a.clone());
        prop_assert_eq!(i(&a, &b).complement(), u(&a.complement(), &b.complement()));
        prop_assert_eq!(a.complement().complement(), a.clone());
        // distributivity
        prop_assert_eq!(i(&a, &u(&b, &c)), u(&i(&a, &b), &i(&a, &c)));
    }

    #[test]
    fn clopen_action_equivariance(g in word(2, 4), h in word(2, 4), a in clopen(2), b in clopen(2)) {
        let ga = a.act(&g).unwrap();
        let gb = b.act(&g).unwrap();
        prop_assert_eq!(a.union(&b).unwrap().act(&g).unwrap(), ga.union(&gb).unwrap());
        prop_assert_eq!(a.intersect(&b).unwrap().act(&g).unwrap(), ga.intersect(&gb).unwrap());
        prop_assert_eq!(a.complement().act(&g).unwrap(), ga.complement());
        // composition and invertibility
        let gh = g.multiply(&h).unwrap();
        prop_assert_eq!(a.act(&h).unwrap().act(&g).unwrap(), a.act(&gh).unwrap());
        prop_assert_eq!(ga.act(&g.inverse()).unwrap(), a);
    }
}

// -------------------------------------------------------- SNF certificates

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn snf_certificate_holds(rows in 1usize..=8, cols in 1usize..=8, seed in any::<u64>()) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<Vec<i64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-9..=9)).collect())
            .collect();
        let refs: Vec<&[i64]> = data.iter().map(|r| r.as_slice()).collect();
        let m = IntMatrix::from_rows(&refs).unwrap();
        let snf = m.smith_normal_form();
        // UMV = D with unimodular U, V, and a divisibility chain
        snf.verify(&m).unwrap();
        for w in snf.divisors.windows(2) {
            use num_traits::Zero;
            prop_assert!(w[1].is_zero() || (&w[1] % &w[0]).is_zero());
        }
    }
}

// ------------------------------------------------- Schreier rank formula

fn random_transitive(rank: u32, size: usize, rng: &mut impl rand::Rng) -> SchreierGraph {
    loop {
        let perms: Vec<Vec<usize>> = (0..rank)
            .map(|_| {
                let mut p: Vec<usize> = (0..size).collect();
                for i in (1..size).rev() {
                    p.swap(i, rng.gen_range(0..=i));
                }
                p
            })
            .collect();
        if let Ok(g) = SchreierGraph::from_permutations(rank, &perms) {
            return g;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn schreier_index_rank_formula(n in 2u32..=3, size in 1usize..=7, seed in any::<u64>()) {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let graph = random_transitive(n, size, &mut rng);
        let index = graph.index();
        let basis = graph.schreier_basis().unwrap();
        prop_assert_eq!(basis.rank(), index * (n as usize - 1) + 1);
        // every basis word lies in the subgroup and rewrites to itself
        for (i, w) in basis.basis().elements().iter().enumerate() {
            prop_assert!(basis.graph().contains(w));
            let gen = ReducedWord::from_letters(basis.rank() as u32, vec![i as i32 + 1]).unwrap();
            prop_assert_eq!(basis.rewrite(w).unwrap().unwrap(), gen);
        }
    }
}

// ------------------------------------------------- supernatural arithmetic

proptest! {
    #[test]
    fn supernatural_semigroup_laws(a in supernatural(), b in supernatural(), c in supernatural()) {
        prop_assert_eq!(a.mul(&b), b.mul(&a));
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.lcm(&b), b.lcm(&a));
        prop_assert!(a.divides(&a.mul(&b)));
        prop_assert!(a.divides(&a.lcm(&b)) && b.divides(&a.lcm(&b)));
        prop_assert_eq!(a.mul(&SupernaturalNumber::one()), a);
    }

    #[test]
    fn seq_equiv_is_reflexive_and_symmetric(g in gamma(), h in gamma()) {
        let ns = g.factors();
        let w = seq_equiv(ns, ns).unwrap().expect("reflexive");
        w.verify(ns, ns).unwrap();
        let fwd = seq_equiv(g.factors(), h.factors()).unwrap();
        let back = seq_equiv(h.factors(), g.factors()).unwrap();
        prop_assert_eq!(fwd.is_some(), back.is_some());
        if let Some(w) = fwd { w.verify(g.factors(), h.factors()).unwrap(); }
    }

    #[test]
    fn classify_agrees_with_invariant_iso(a in gamma(), b in gamma()) {
        let verdict = classify_gammas(&a, &b).unwrap();
        let witness = invariant_iso(&a, &b).unwrap();
        prop_assert_eq!(verdict.equivalent, witness.is_some());
        prop_assert!(verdict.conditions.iter().all(|c| c.equivalent == verdict.equivalent));
        // symmetry of the verdict
        let rev = classify_gammas(&b, &a).unwrap();
        prop_assert_eq!(rev.equivalent, verdict.equivalent);
    }
}
