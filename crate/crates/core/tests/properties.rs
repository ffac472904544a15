use std::sync::Arc;

use proptest::prelude::*;

use commlab::algebra::{ell_from_trace, free_order_two_pair, AlgebraElement, FreeProductGroup, GroupWord};
use commlab::cstar::{bundled_catalog, commutator_ineq_check, gamma_filter, group_closure, ClosureOutcome};
use commlab::dynamics::walk_sum_trace;
use commlab::matrix_model::{normalized_trace, sample_haar, two_norm_dist, unitarity_deviation, unitary_with_trace};
use commlab::pu_n::{icosahedral_rep, least_dimension_criterion, quaternion_rep};
use commlab::word::{is_mixed_identity, w_sequence, FiniteGroup, MixedWord};
use commlab::{Complex, Element, Group, Matrix};

fn word_from_letters(amb: &FreeProductGroup, letters: &[(usize, bool)]) -> GroupWord {
    letters.iter().fold(GroupWord::default(), |acc, &(f, inv)| {
        let g = amb.generator_word(f).unwrap();
        let g = if inv { amb.inverse_word(&g) } else { g };
        amb.mul_words(&acc, &g)
    })
}

/// Terms as (letters of the word, coefficient).
type ElementSpec = Vec<(Vec<(usize, bool)>, (f64, f64))>;

fn element_strategy() -> impl Strategy<Value = ElementSpec> {
    prop::collection::vec(
        (prop::collection::vec((0usize..2, any::<bool>()), 0..6), (-1.0f64..1.0, -1.0f64..1.0)),
        1..8,
    )
}

fn element(amb: &Arc<FreeProductGroup>, spec: &ElementSpec) -> Element {
    let terms = spec.iter().map(|(l, (re, im))| (word_from_letters(amb, l), Complex::new(*re, *im)));
    AlgebraElement::from_terms(amb, terms).unwrap()
}

fn catalog_groups() -> Vec<Group> {
    bundled_catalog::<f64>()
        .iter()
        .map(|e| match group_closure(&e.generators, 1000, 1e-8).unwrap() {
            ClosureOutcome::Group(g) => g,
            ClosureOutcome::NonClosure(_) => panic!("{} does not close", e.name),
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn trace_is_tracial(a in element_strategy(), b in element_strategy()) {
        let amb = Arc::new(FreeProductGroup::z2_z());
        let (x, y) = (element(&amb, &a), element(&amb, &b));
        let d = (x.multiply(&y).unwrap().trace() - y.multiply(&x).unwrap().trace()).norm();
        prop_assert!(d <= 1e-12);
    }

    #[test]
    fn two_norm_is_parseval(a in element_strategy()) {
        let amb = Arc::new(FreeProductGroup::z2_z());
        let x = element(&amb, &a);
        let via_trace = x.star().multiply(&x).unwrap().trace();
        let direct: f64 = x.terms().iter().map(|(_, c)| c.norm_sqr()).sum();
        prop_assert!((via_trace.re - direct).abs() <= 1e-12 && via_trace.im.abs() <= 1e-12);
        prop_assert!((x.two_norm_sq() - direct).abs() <= 1e-12);
    }

    #[test]
    fn free_commutator_bounds(a in -0.999f64..0.999, b in -0.999f64..0.999) {
        let (u, v) = free_order_two_pair(a, b).unwrap();
        let c = u.multiply(&v).unwrap().multiply(&u.star()).unwrap().multiply(&v.star()).unwrap();
        let (ell, bar) = (c.ell().unwrap(), c.ell_bar().unwrap());
        let bu = (2.0 * (1.0 - a.abs())).sqrt();
        let bv = (2.0 * (1.0 - b.abs())).sqrt();
        prop_assert!(bu * bv / 2f64.sqrt() - 1e-10 <= ell);
        prop_assert!(ell <= 2f64.sqrt() * bu * bv + 1e-10);
        prop_assert!((ell - bar).abs() <= 1e-10);
        prop_assert!((u.multiply(&v).unwrap().trace() - Complex::new(a * b, 0.0)).norm() <= 1e-12);
    }

    #[test]
    fn haar_samples_are_unitary_with_length_formula(n in 1usize..24, seed in any::<u64>()) {
        let u = sample_haar::<f64>(n, seed).unwrap();
        prop_assert!(unitarity_deviation(u.matrix()) <= 1e-10);
        let d = two_norm_dist(&Matrix::identity(n), u.matrix()).unwrap();
        let tau = normalized_trace(u.matrix()).unwrap();
        prop_assert!((d * d - (2.0 - 2.0 * tau.re)).abs() <= 1e-12);
    }

    #[test]
    fn prescribed_trace_unitaries_are_unitary(alpha in -1.0f64..=1.0, n in 2usize..40, seed in any::<u64>()) {
        let (u, realized) = unitary_with_trace::<f64>(alpha, n, seed).unwrap();
        prop_assert!(unitarity_deviation(u.matrix()) <= 1e-10);
        prop_assert!((u.normalized_trace().re - realized.value()).abs() <= 1e-12);
    }

    #[test]
    fn commutator_contracts_for_any_pair(n in 2usize..9, seed in any::<u64>(), alpha in -1.0f64..=1.0) {
        // One Haar factor and one with a prescribed spectrum: far from free at small n.
        let u = sample_haar::<f64>(n, seed).unwrap();
        let (v, _) = unitary_with_trace::<f64>(alpha, n, seed ^ 0x9e37).unwrap();
        let c = commutator_ineq_check(&u, &v).unwrap();
        prop_assert!(c.lhs <= c.rhs + 1e-9);
    }

    #[test]
    fn exact_traces_follow_recursion_and_contract(alpha in 0.7501f64..0.9999) {
        let mut tau = alpha;
        let mut prev = f64::INFINITY;
        for n in 1..=6 {
            let t = walk_sum_trace(&w_sequence(n).unwrap(), alpha).unwrap().unwrap();
            prop_assert!((t - Complex::new(tau, 0.0)).norm() <= 1e-10);
            let ell = ell_from_trace(t);
            prop_assert!(ell < prev);
            prev = ell;
            tau = 1.0 - (1.0 - tau * tau) * (1.0 - alpha * alpha);
        }
    }

    #[test]
    fn filters_are_monotone(s in 0.0f64..2.1, t in 0.0f64..2.1) {
        let (s, t) = if s <= t { (s, t) } else { (t, s) };
        for g in catalog_groups() {
            let small = gamma_filter(&g, s).subgroup;
            let big = gamma_filter(&g, t).subgroup;
            prop_assert!(small.iter().all(|x| big.contains(x)));
        }
    }

    #[test]
    fn least_dimension_is_monotone(dims in prop::collection::vec(1usize..8, 1..6), bump in 0usize..4) {
        for rep in [icosahedral_rep::<f64>().unwrap(), quaternion_rep::<f64>().unwrap()] {
            let before = least_dimension_criterion(&rep, &dims).unwrap();
            let raised: Vec<usize> = dims.iter().map(|d| d + bump).collect();
            let after = least_dimension_criterion(&rep, &raised).unwrap();
            prop_assert!(!before.guarantee || after.guarantee);
            prop_assert_eq!(before.guarantee, before.irreducible && before.least_dimension);
        }
    }

    #[test]
    fn mixed_identity_witnesses_reverify(
        coeffs in prop::collection::vec(0usize..8, 1..5),
        exps in prop::collection::vec(prop_oneof![-3i64..=-1, 1i64..=3], 0..4),
    ) {
        for g in [FiniteGroup::symmetric(3).unwrap(), FiniteGroup::dihedral(4).unwrap()] {
            let k = exps.len().min(coeffs.len() - 1);
            let cs: Vec<usize> = coeffs[..=k].iter().map(|c| c % g.order()).collect();
            let w = MixedWord::new(&g, &cs, &exps[..k]).unwrap();
            let v = is_mixed_identity(&w, &g);
            match v.witness {
                Some(x) => {
                    prop_assert!(w.evaluate(&g, x) != g.identity());
                    prop_assert_eq!(Some(w.evaluate(&g, x)), v.witness_value);
                    prop_assert!((0..x).all(|y| w.evaluate(&g, y) == g.identity()));
                }
                None => prop_assert!((0..g.order()).all(|y| w.evaluate(&g, y) == g.identity())),
            }
        }
    }
}
