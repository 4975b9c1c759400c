use std::collections::{BTreeMap, BTreeSet};

use caclab::coding::{n_fold_join, CodeSet};
use caclab::forcing::{
    build_diagonal_poset, check_requirements, enumerate_extensions, extends, is_parallel, mind_change,
    random_condition, validate_condition, Condition, DiagonalConfig, Selector,
};
use caclab::game::{cac_via_omega_strategy, play_reduction_game, BruteForceAdversary, Verdict};
use caclab::gen::{gen_instance, random_density, random_omega_poset, random_poset, random_stable, random_table_machine, rng};
use caclab::machines::{check_use_consistency, OracleMachine};
use caclab::problems::{enumerate_solutions, max_feasible, solve_poset, validate_instance, verify_in_poset, verify_solution};
use caclab::reductions::{
    build_leq_q, compose_cac_via_omega, greedy_antichain, split_minus, split_plus, stable_thinning, successor_free_set,
    thinning_predicate, to_small_type, GreedyAntichainOptions, ReductionError,
};
use caclab::trees::{build_extension_tree, label_tree, labeled_subtree};
use caclab::{classify_stability, Behavior, Element, FinitePoset, ProblemKind, SizePolicy, SolutionSet, StableAnnotation, Tag, TypeTag};
use proptest::prelude::*;

fn poset(seed: u64, size: u32) -> FinitePoset {
    let mut r = rng(seed);
    let d = random_density(&mut r);
    random_poset(&mut r, size, d)
}

fn omega_poset(seed: u64, size: u32) -> FinitePoset {
    let mut r = rng(seed);
    let d = random_density(&mut r);
    random_omega_poset(&mut r, size, d)
}

fn subset(p: &FinitePoset, mask: u32) -> BTreeSet<Element> {
    p.universe().iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &x)| x).collect()
}

fn min3(p: &FinitePoset) -> SizePolicy {
    SizePolicy::new(max_feasible(p).clamp(1, 3)).unwrap()
}

fn axioms_hold(p: &FinitePoset) -> bool {
    let u = p.universe();
    u.iter().all(|&x| p.le(x, x))
        && u.iter().all(|&x| u.iter().all(|&y| x == y || !(p.le(x, y) && p.le(y, x))))
        && u.iter().all(|&x| u.iter().all(|&y| u.iter().all(|&z| !(p.le(x, y) && p.le(y, z)) || p.le(x, z))))
}

const KINDS: [ProblemKind; 7] = ProblemKind::ALL;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn chain_and_antichain_means_at_most_one(seed: u64, size in 0u32..=12, mask: u32) {
        let p = poset(seed, size);
        let x = subset(&p, mask);
        if p.is_chain(&x).unwrap() && p.is_antichain(&x).unwrap() {
            prop_assert!(x.len() <= 1);
        }
    }

    #[test]
    fn dual_preserves_shape_and_is_an_involution(seed: u64, size in 0u32..=12, mask: u32) {
        let p = poset(seed, size);
        let d = p.dual_order();
        let x = subset(&p, mask);
        prop_assert_eq!(p.is_chain(&x).unwrap(), d.is_chain(&x).unwrap());
        prop_assert_eq!(p.is_antichain(&x).unwrap(), d.is_antichain(&x).unwrap());
        prop_assert_eq!(d.dual_order(), p.clone());
        prop_assert!(p.pairs().all(|(a, b)| d.le(b, a)));
    }

    #[test]
    fn restrict_keeps_axioms(seed: u64, size in 0u32..=12, mask: u32) {
        let p = poset(seed, size);
        let q = p.restrict(&subset(&p, mask)).unwrap();
        prop_assert!(axioms_hold(&q));
        prop_assert!(FinitePoset::validate(q.universe(), q.pairs().collect::<BTreeSet<_>>()).is_ok());
    }

    #[test]
    fn omega_ordered_rejects_early_large_tags(seed: u64, size in 2u32..=10, pick: usize, t_pick: u32) {
        let p = omega_poset(seed, size);
        let u = p.universe().to_vec();
        let max = *u.last().unwrap();
        let x = u[pick % (u.len() - 1)];
        let t = t_pick % (max + 1);
        let behaviors: BTreeMap<Element, Behavior> = u
            .iter()
            .map(|&y| (y, if y == x { Behavior::new(Tag::L, t) } else { Behavior::new(Tag::I, max + 1) }))
            .collect();
        let ann = StableAnnotation::new(behaviors, TypeTag::Large).unwrap();
        prop_assert!(classify_stability(&p, &ann).is_err());
    }

    #[test]
    fn brute_force_is_sound_and_kinds_nest(seed: u64, k in 0usize..7, size in 0u32..=10) {
        let kind = KINDS[k];
        let mut r = rng(seed);
        let inst = gen_instance(&mut r, kind, size, Default::default()).unwrap();
        prop_assert!(validate_instance(kind, &inst).is_ok());
        prop_assert!(validate_instance(ProblemKind::Cac, &inst).is_ok());
        if kind == ProblemKind::OmegaScac {
            let ann = inst.annotation.as_ref().unwrap();
            prop_assert!(!ann.has_tag(Tag::L));
        }
        let pol = min3(&inst.poset);
        if let Some(s) = solve_poset(&inst.poset, &pol).unwrap() {
            prop_assert!(verify_solution(kind, &inst, &s, &pol).is_ok());
        } else {
            prop_assert!(inst.poset.is_empty());
        }
    }

    #[test]
    fn splits_are_omega_ordered(seed: u64, size in 0u32..=12) {
        let p = poset(seed, size);
        for q in [split_plus(&p), split_minus(&p)] {
            prop_assert!(q.is_omega_ordered());
            prop_assert!(axioms_hold(&q));
            prop_assert_eq!(q.universe(), p.universe());
        }
    }

    #[test]
    fn compose_verifies_or_a_stage_is_short(seed: u64, size in 1u32..=12) {
        let p = poset(seed, size);
        let pol = min3(&p);
        let solver = |q: &FinitePoset, pol: &SizePolicy| solve_poset(q, pol).unwrap();
        match compose_cac_via_omega(&p, solver, &pol) {
            Ok(c) => {
                let inst = caclab::ProblemInstance::plain(p.clone());
                prop_assert!(verify_solution(ProblemKind::Cac, &inst, &c.result, &pol).is_ok());
            }
            Err(ReductionError::SolverFailed(1)) => {
                prop_assert!(max_feasible(&split_plus(&p)) < pol.min_size);
            }
            Err(ReductionError::SolverFailed(2)) => {
                let plus = split_plus(&p);
                let x = solve_poset(&plus, &pol).unwrap().unwrap();
                let minus = split_minus(&p).restrict(&x.elements).unwrap();
                prop_assert!(max_feasible(&minus) < pol.min_size);
            }
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn thinning_is_a_subset_with_r_pairs(seed: u64, size in 1u32..=9, large: bool) {
        let ty = if large { TypeTag::Large } else { TypeTag::Small };
        let mut r = rng(seed);
        let inst = random_stable(&mut r, size, ty, false);
        let p = &inst.poset;
        let q = build_leq_q(p, ty);
        let pol = min3(&q);
        let one = SizePolicy::new(1).unwrap();
        for x in enumerate_solutions(&q, &pol).unwrap() {
            let (y, trace) = stable_thinning(p, ty, &x, &pol).unwrap();
            prop_assert!(y.elements.is_subset(&x.elements));
            prop_assert!(trace.is_nested());
            for &a in &y.elements {
                for &b in y.elements.range(a + 1..) {
                    prop_assert!(thinning_predicate(p, &q, a, b));
                }
            }
            prop_assert!(verify_in_poset(p, &y, &one).is_ok());
        }
    }

    #[test]
    fn greedy_antichain_walks_the_free_set(seed: u64, size in 0u32..=12) {
        let p = omega_poset(seed, size);
        let s = greedy_antichain(&p, GreedyAntichainOptions::default()).unwrap();
        prop_assert!(s.elements.is_subset(&successor_free_set(&p)));
        prop_assert!(p.is_antichain(&s.elements).unwrap());
        let v: Vec<_> = s.elements.iter().collect();
        prop_assert!(v.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn small_type_transfer_is_verbatim(seed: u64, size in 0u32..=9, mask: u32) {
        let mut r = rng(seed);
        let inst = random_stable(&mut r, size, TypeTag::Large, false);
        let small = to_small_type(&inst).unwrap();
        let one = SizePolicy::new(1).unwrap();
        let x = subset(&inst.poset, mask);
        for s in [SolutionSet::chain(x.iter().copied()), SolutionSet::antichain(x.iter().copied())] {
            prop_assert_eq!(verify_in_poset(&inst.poset, &s, &one).is_ok(), verify_in_poset(&small.poset, &s, &one).is_ok());
        }
    }

    #[test]
    fn n_fold_join_is_injective(
        a in prop::collection::vec(prop::collection::btree_set(0u64..50, 0..5), 1..=4),
        b in prop::collection::vec(prop::collection::btree_set(0u64..50, 0..5), 1..=4),
    ) {
        let ja: CodeSet = n_fold_join(&a).unwrap();
        let jb: CodeSet = n_fold_join(&b).unwrap();
        prop_assert_eq!(ja == jb, a == b);
    }

    #[test]
    fn game_wins_are_sound(seed: u64, size in 1u32..=10) {
        let mut r = rng(seed);
        let inst = gen_instance(&mut r, ProblemKind::Cac, size, Default::default()).unwrap();
        let pol = min3(&inst.poset);
        let p = inst.poset.clone();
        let mut adv = BruteForceAdversary::new(inst);
        let t = play_reduction_game(ProblemKind::Cac, ProblemKind::OmegaCac, &mut adv, &cac_via_omega_strategy(pol), 3, &pol).unwrap();
        match &t.verdict {
            Verdict::IIWins { round } => {
                prop_assert!(*round <= 3);
                let y = SolutionSet::chain(t.winning_set().unwrap().iter().map(|&c| c as Element));
                let anti = SolutionSet::antichain(y.elements.iter().copied());
                prop_assert!(verify_in_poset(&p, &y, &pol).is_ok() || verify_in_poset(&p, &anti, &pol).is_ok());
            }
            Verdict::Exhausted { .. } => {}
            Verdict::IWins { reason, .. } => prop_assert!(false, "builtin strategy lost: {reason}"),
        }
    }

    #[test]
    fn table_machines_are_use_consistent(seed: u64, u in 1u64..=6, oracle in prop::collection::btree_set(0u64..16, 0..8), extra in prop::collection::btree_set(6u64..24, 0..6)) {
        let mut r = rng(seed);
        let m = random_table_machine(&mut r, u, 16, 0.3);
        prop_assert!(check_use_consistency(&m, 2).is_none());
        let a: BTreeSet<u64> = oracle.iter().copied().filter(|&x| x < u).collect();
        let b: BTreeSet<u64> = a.iter().copied().chain(extra.into_iter().filter(|&x| x >= u)).collect();
        for w in 0..16 {
            prop_assert_eq!(m.evaluate(&a, w), m.evaluate(&b, w));
            prop_assert_eq!(m.evaluate(&a, w), m.evaluate(&a, w));
        }
    }

    #[test]
    fn mind_change_is_valid_and_parallel(seed: u64, size in 0u32..=12) {
        let mut r = rng(seed);
        let p = random_condition(&mut r, size, TypeTag::Small);
        let q = mind_change(&p).unwrap();
        prop_assert!(is_parallel(&p, &q));
        prop_assert!(validate_condition(q.pi().clone(), q.assign().to_vec()).is_ok());
    }

    #[test]
    fn extends_is_a_partial_order(seed: u64, size in 0u32..=2, i: usize, j: usize) {
        let mut r = rng(seed);
        let p = random_condition(&mut r, size, TypeTag::Small);
        prop_assert!(extends(&p, &p));
        let qs = enumerate_extensions(&p, p.size() + 1, TypeTag::Small);
        let q = &qs[i % qs.len()];
        let rs = enumerate_extensions(q, q.size() + 1, TypeTag::Small);
        let r2 = &rs[j % rs.len()];
        prop_assert!(extends(q, &p) && extends(r2, q) && extends(r2, &p));
        prop_assert!(!extends(&p, q));
        if extends(q, &p) && extends(&p, q) {
            prop_assert_eq!(q, &p);
        }
    }

    #[test]
    fn diagonal_output_is_stable_and_meets_requirements(
        oracles in prop::collection::vec(prop::collection::btree_set(0u64..16, 0..8), 1..=3),
        k in 1usize..=3,
        stages in 1usize..=9,
    ) {
        let selectors: Vec<Selector> = oracles
            .iter()
            .enumerate()
            .map(|(n, o)| {
                let m = if n % 2 == 0 { OracleMachine::membership() } else { OracleMachine::threshold(k) };
                Selector::new(m, o.iter().copied())
            })
            .collect();
        let run = build_diagonal_poset(&Condition::empty(), &selectors, &DiagonalConfig { stages, ..Default::default() });
        prop_assert!(axioms_hold(&run.poset));
        prop_assert!(classify_stability(&run.poset, &run.annotation).is_ok());
        prop_assert_eq!(run.annotation.type_tag(), TypeTag::Small);
        // Each requirement gets a visit once stages cover the family.
        if stages >= 3 * selectors.len() {
            prop_assert!(check_requirements(&run.poset, &selectors).iter().all(|c| c.holds()));
        }
    }

    #[test]
    fn trees_are_prefix_closed_and_deterministic(
        seed: u64,
        u in 1u64..=8,
        e in prop::collection::btree_set(0u64..8, 0..3),
        i in prop::collection::btree_set(0u64..10, 0..=6),
        n in 0u64..3,
        kappa in 1usize..=3,
    ) {
        let mut r = rng(seed);
        let m = random_table_machine(&mut r, u, 16, 0.02);
        let i: BTreeSet<u64> = i.difference(&e).copied().collect();
        let t = build_extension_tree(e.clone(), i.clone(), m.clone(), n, 16).unwrap();
        let t2 = build_extension_tree(e, i, m, n, 16).unwrap();
        prop_assert_eq!(&t, &t2);
        prop_assert!(t.nodes().all(|a| a.is_empty() || t.contains(&a[..a.len() - 1])));
        let lb = label_tree(&t, kappa).unwrap();
        prop_assert_eq!(&lb, &label_tree(&t2, kappa).unwrap());
        let tl = labeled_subtree(&t, &lb);
        prop_assert!(tl.nodes.iter().all(|a| t.contains(a)));
    }
}

#[test]
fn conditions_from_extensions_validate() {
    let p = Condition::empty();
    for c in enumerate_extensions(&p, 3, TypeTag::Small) {
        assert!(validate_condition(c.pi().clone(), c.assign().to_vec()).is_ok());
    }
}
