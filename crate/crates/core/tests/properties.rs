//! Property tests over random arcs, trees and measure spaces.

mod support;

use num_traits::Zero;
use proptest::prelude::*;
use qctree_core::dyadic::DyadicEdge;
use qctree_core::glue::{family_norms, phi};
use qctree_core::l1::{quotient_norm, quotient_norm_brute, FiniteMeasureSpace};
use qctree_core::martingale::{affinize, check_level, martingale_d};
use qctree_core::tree::{debv, validate_treelike, GluePlan};
use qctree_core::{Dyadic, Filtration, MetricTree, QuasiArc, Rational};
use support::*;

fn arc_strategy() -> impl Strategy<Value = (u64, u32)> {
    (any::<u64>(), 2u32..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_metric_is_a_metric((seed, k) in arc_strategy()) {
        let arc = QuasiArc::from_tree(random_tree(seed, k)).unwrap();
        prop_assert!(arc.metric_violation().is_none());
        prop_assert!(arc.edge_distance_mismatches().is_empty());
    }

    #[test]
    fn distance_bounded_by_common_edge((seed, k) in arc_strategy(), a in 0u64..=32, b in 0u64..=32) {
        let t = random_tree(seed, k);
        let arc = QuasiArc::from_tree(t.clone()).unwrap();
        let n = 1u64 << k;
        let (x, y) = (Dyadic::grid(a % (n + 1), k), Dyadic::grid(b % (n + 1), k));
        let e = DyadicEdge::common_ancestor(&x, &y, k);
        prop_assert!(arc.distance(&x, &y).unwrap() <= t.delta(&e));
    }

    #[test]
    fn distance_matches_chain_oracle((seed, k) in arc_strategy(), a in 0usize..32, b in 1usize..=32) {
        let t = random_tree(seed, k);
        let arc = QuasiArc::from_tree(t.clone()).unwrap();
        let n = 1usize << k;
        let (x, y) = (a % n, (a % n) + 1 + b % (n - a % n));
        let oracle = normalized_chain_oracle(t.halving_bits(), k, k + 2, x, y);
        prop_assert_eq!(arc.d(x, y).scale_pow2((k + 2) as i32).to_rational(), q(oracle as i64, 1));
    }

    #[test]
    fn capped_metrics_increase_to_d((seed, k) in arc_strategy()) {
        let t = random_tree(seed, k);
        let arc = QuasiArc::from_tree(t.clone()).unwrap();
        let filt = Filtration::from_tree(t).unwrap();
        let mut prev: Option<QuasiArc> = None;
        for n in 0..=filt.n_max() {
            let dn = filt.approx_metric(n).unwrap();
            for x in 0..arc.point_count() {
                for y in x + 1..arc.point_count() {
                    // |x - y| <= d_n <= min(2^n |x - y|, d)
                    let eu = Dyadic::new((y - x) as i128, k);
                    prop_assert!(eu <= dn.d(x, y) && dn.d(x, y) <= eu.scale_pow2(n as i32));
                    prop_assert!(dn.d(x, y) <= arc.d(x, y));
                    if let Some(p) = &prev {
                        prop_assert!(p.d(x, y) <= dn.d(x, y));
                    }
                }
            }
            prev = Some(dn);
        }
        prop_assert_eq!(prev.unwrap().d(0, arc.point_count() - 1), arc.d(0, arc.point_count() - 1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn affinization_tower((seed, k) in arc_strategy(), fseed in any::<u64>()) {
        let t = random_tree(seed, k);
        let arc = QuasiArc::from_tree(t.clone()).unwrap();
        let filt = Filtration::from_tree(t).unwrap();
        let f = random_function(&mut rng(fseed), k);
        let lip = arc.lipschitz_norm(&f).unwrap();
        let top = filt.n_max() as i64;
        prop_assert_eq!(&affinize(&filt, &f, top).unwrap(), &f);
        for kk in 0..=top {
            let fk = affinize(&filt, &f, kk).unwrap();
            for n in kk..=top {
                prop_assert_eq!(&affinize(&filt, &fk, n).unwrap(), &fk);
            }
            let dk = filt.approx_metric(kk as u32).unwrap();
            prop_assert!(dk.lipschitz_norm(&fk).unwrap() <= &lip * q(3, 1));
        }
    }

    #[test]
    fn derivatives_are_martingale_differences((seed, k) in arc_strategy(), fseed in any::<u64>()) {
        let t = random_tree(seed, k);
        let filt = Filtration::from_tree(t).unwrap();
        let f = random_function(&mut rng(fseed), k);
        for (n, g) in martingale_d(&filt, &f).unwrap().iter().enumerate() {
            prop_assert!(check_level(&filt, g, n as u32).is_ok());
        }
    }

    #[test]
    fn phi_is_contractive(seed in 0u64..10_000, arcs in 2usize..5, fseed in any::<u64>()) {
        let tree = MetricTree::build(&GluePlan::random(seed, arcs, 2).unwrap()).unwrap();
        let d = tree.arc_decomposition();
        let tl = validate_treelike(&tree, &d).unwrap();
        let mut r = rng(fseed);
        let mut f: Vec<Rational> = (0..tree.vertex_count())
            .map(|_| q(rand::Rng::gen_range(&mut r, -5..=5), 2))
            .collect();
        f[d.basepoint()] = Rational::zero();
        let lip = tree.lipschitz_on(&f, None);
        let fam = phi(&d, &tl, &f).unwrap();
        for norm in family_norms(&tree, &d, &fam) {
            prop_assert!(norm <= lip);
        }
    }

    #[test]
    fn debv_levels_are_nested(seed in 0u64..10_000, arcs in 2usize..6) {
        let tree = MetricTree::build(&GluePlan::random(seed, arcs, 2).unwrap()).unwrap();
        let dv = debv(&tree, None).unwrap();
        prop_assert!(dv.complete);
        for w in dv.levels.windows(2) {
            prop_assert!(w[1].net.starts_with(&w[0].net));
            prop_assert!(w[0].subtree.iter().all(|v| w[1].subtree.contains(v)));
        }
        let mut covered = vec![false; tree.vertex_count()];
        for p in &dv.pieces {
            for &v in &p.vertices {
                covered[v] = true;
            }
        }
        prop_assert!(covered.iter().all(|&c| c));
        validate_treelike(&tree, &dv.decomposition().unwrap()).unwrap();
    }

    #[test]
    fn quotient_norm_is_the_weighted_median(seed in any::<u64>(), atoms in 2usize..9, gseed in any::<u64>()) {
        let space = FiniteMeasureSpace::random_dyadic(seed, atoms.max(2), 2).unwrap();
        let mut r = rng(gseed);
        let g: Vec<Rational> = (0..space.len()).map(|_| q(rand::Rng::gen_range(&mut r, -9..=9), 3)).collect();
        let (value, _) = quotient_norm(&space, &g);
        prop_assert_eq!(value, quotient_norm_brute(&space, &g));
    }
}
