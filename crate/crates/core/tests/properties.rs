//! Randomised invariants over formulas, states, models and rule sets.

mod common;

use oblig_core::generate::{generate_instance, GeneratorConfig};
use oblig_core::io::{model_to_json, parse_model, parse_rules, rules_to_json};
use oblig_core::reduction::build_with_order;
use oblig_core::{
    build_interpretation_model, check, check_full, parse_formula, verify_witness, Atom, CheckOptions,
    ComplianceReport, Formula, Literal, Mode, State, VariantTag,
};
use proptest::prelude::*;

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

fn atom() -> impl Strategy<Value = Atom> {
    prop::sample::select(&ATOMS[..]).prop_map(|n| Atom::new(n).expect("identifier"))
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        atom().prop_map(Formula::Atom),
        Just(Formula::True),
        Just(Formula::False),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner).prop_map(|(a, b)| Formula::implies(a, b)),
        ]
    })
}

/// Each atom is absent, positive or negative.
fn state() -> impl Strategy<Value = State> {
    prop::collection::vec(prop::option::of(any::<bool>()), ATOMS.len()).prop_map(|signs| {
        let lits = ATOMS.iter().zip(signs).filter_map(|(n, s)| {
            s.map(|positive| Literal {
                atom: Atom::new(*n).expect("identifier"),
                positive,
            })
        });
        State::new(lits).expect("one literal per atom")
    })
}

fn instance() -> impl Strategy<Value = (u64, &'static str)> {
    (any::<u64>(), prop::sample::select(&VariantTag::ALL[..]))
}

fn config(seed: u64, tag: &str) -> GeneratorConfig {
    GeneratorConfig::new(seed, tag.parse().expect("known tag"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn update_keeps_annotation_and_untouched_atoms(s in state(), ann in state()) {
        let u = s.update(&ann);
        for l in ann.literals() {
            prop_assert!(u.contains(l));
        }
        for l in s.literals() {
            if !ann.decides(&l.atom) {
                prop_assert!(u.contains(l));
            }
        }
        prop_assert_eq!(u.len(), s.atoms().union(&ann.atoms()).count());
        prop_assert_eq!(u.update(&ann), u.clone());
        prop_assert_eq!(State::empty().update(&ann), ann);
    }

    #[test]
    fn formula_text_round_trips(f in formula()) {
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn eval_matches_closed_world_oracle(f in formula(), s in state()) {
        prop_assert_eq!(f.eval(&s), common::holds(&f, &s));
    }

    #[test]
    fn modes_relate_and_witnesses_verify((seed, tag) in instance()) {
        let (m, rs) = generate_instance(&config(seed, tag));
        let opts = CheckOptions::default();
        let full = check(&m, &rs, Mode::Full, &opts).unwrap();
        let partial = check(&m, &rs, Mode::Partial, &opts).unwrap();
        let non = check(&m, &rs, Mode::Non, &opts).unwrap();
        prop_assert!(!full.verdict || partial.verdict);
        prop_assert_eq!(non.verdict, !partial.verdict);
        prop_assert_eq!(full.witness.is_some(), !full.verdict);
        prop_assert_eq!(partial.witness.is_some(), partial.verdict);
        for r in [&full, &partial, &non] {
            prop_assert!(verify_witness(&m, &rs, r, &opts).is_ok());
        }
    }

    #[test]
    fn worker_count_does_not_change_reports((seed, tag) in instance()) {
        let (m, rs) = generate_instance(&config(seed, tag));
        let one = CheckOptions::default();
        let four = CheckOptions { jobs: 4, ..CheckOptions::default() };
        for mode in [Mode::Full, Mode::Partial] {
            prop_assert_eq!(check(&m, &rs, mode, &one).unwrap(), check(&m, &rs, mode, &four).unwrap());
        }
    }

    #[test]
    fn files_round_trip((seed, tag) in instance()) {
        let (m, rs) = generate_instance(&config(seed, tag));
        prop_assert_eq!(parse_model(&model_to_json(&m), "m").unwrap(), m.clone());
        prop_assert_eq!(parse_rules(&rules_to_json(&rs), "r").unwrap(), rs.clone());
        let report = check(&m, &rs, Mode::Full, &CheckOptions::default()).unwrap();
        let back: ComplianceReport = serde_json::from_str(&report.to_json()).unwrap();
        prop_assert_eq!(back, report);
    }

    #[test]
    fn reduction_ignores_atom_order(f in formula(), rot in 0usize..4) {
        let atoms: Vec<Atom> = f.atoms().into_iter().collect();
        prop_assume!(!atoms.is_empty());
        let mut order = atoms.clone();
        order.rotate_left(rot % atoms.len());
        order.reverse();
        let base = build_interpretation_model(&f).unwrap();
        let other = build_with_order(&f, &order).unwrap();
        let opts = CheckOptions::default();
        let a = check_full(&base.model, &base.rules, &opts).unwrap();
        let b = check_full(&other.model, &other.rules, &opts).unwrap();
        prop_assert_eq!(a.verdict, b.verdict);
        prop_assert_eq!(a.verdict, common::is_tautology(&f));
        prop_assert_eq!(base.model.count_executions(), (1u32 << atoms.len()).into());
    }
}

#[test]
fn shipped_example_is_the_figure_model() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/fig3.model.json");
    assert_eq!(oblig_core::io::load_model(path).unwrap(), oblig_core::figure_example());
}
