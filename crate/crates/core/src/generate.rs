//! Seeded random instances for property tests and benchmarks.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use num_bigint::BigUint;

use crate::formula::{Atom, Formula, Literal, State};
use crate::model::{Model, ProcessBlock, Task};
use crate::obligation::{Count, Expressivity, Obligation, ObligationKind, RuleSet, ScopeTag, VariantTag};

/// Generated models are redrawn until they have at most this many
/// executions, so the brute engine stays cheap on them.
pub const GENERATED_EXECUTION_LIMIT: u64 = 5_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub seed: u64,
    /// Upper bound on tasks in the body, not counting `start` and `end`.
    pub max_tasks: usize,
    pub max_depth: usize,
    /// Atoms are drawn from the first `atom_pool` of `a`, `b`, ...
    pub atom_pool: usize,
    pub variant: VariantTag,
}

impl GeneratorConfig {
    pub fn new(seed: u64, variant: VariantTag) -> Self {
        GeneratorConfig {
            seed,
            max_tasks: 8,
            max_depth: 3,
            atom_pool: 4,
            variant,
        }
    }
}

/// Atom names `a`, `b`, ..., `z`, `a1`, `b1`, ...
pub fn atom_names(n: usize) -> Vec<Atom> {
    (0..n)
        .map(|i| {
            let letter = (b'a' + (i % 26) as u8) as char;
            let name = if i < 26 { letter.to_string() } else { format!("{letter}{}", i / 26) };
            Atom::new(name).expect("generated names are identifiers")
        })
        .collect()
}

/// Same seed and config, same instance.
pub fn generate_instance(cfg: &GeneratorConfig) -> (Model, RuleSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let atoms = atom_names(cfg.atom_pool.max(1));
    let model = loop {
        let n = rng.gen_range(1..=cfg.max_tasks.max(1));
        let mut next_id = 0;
        let body = gen_block(&mut rng, &atoms, n, cfg.max_depth, &mut next_id);
        let m = Model::validate(format!("gen{}", cfg.seed), body).expect("generated blocks are valid");
        if m.count_executions() <= BigUint::from(GENERATED_EXECUTION_LIMIT) {
            break m;
        }
    };
    let rules = gen_rules(&mut rng, &model, &atoms, cfg.variant);
    (model, rules)
}

fn gen_block(rng: &mut ChaCha8Rng, atoms: &[Atom], n: usize, depth: usize, next_id: &mut usize) -> ProcessBlock {
    if n == 1 || depth == 0 {
        if n > 1 {
            // out of depth: lay the remaining tasks out in sequence
            return ProcessBlock::Seq((0..n).map(|_| gen_task(rng, atoms, next_id)).collect());
        }
        return gen_task(rng, atoms, next_id);
    }
    let parts = rng.gen_range(2..=n.min(4));
    let mut sizes = vec![1; parts];
    for _ in parts..n {
        let k = rng.gen_range(0..parts);
        sizes[k] += 1;
    }
    let children = sizes
        .into_iter()
        .map(|s| gen_block(rng, atoms, s, depth - 1, next_id))
        .collect();
    match rng.gen_range(0..3) {
        0 => ProcessBlock::Seq(children),
        1 => ProcessBlock::Xor(children),
        _ => ProcessBlock::And(children),
    }
}

fn gen_task(rng: &mut ChaCha8Rng, atoms: &[Atom], next_id: &mut usize) -> ProcessBlock {
    *next_id += 1;
    let k = rng.gen_range(0..=2.min(atoms.len()));
    let lits = atoms
        .choose_multiple(rng, k)
        .map(|a| Literal {
            atom: a.clone(),
            positive: rng.gen_bool(0.6),
        })
        .collect::<Vec<_>>();
    ProcessBlock::Task(Arc::new(Task::new(
        format!("t{next_id}"),
        State::new(lits).expect("distinct atoms are consistent"),
    )))
}

/// A random literal, biased towards those annotated in `m` so that local
/// obligations actually trigger.
fn gen_literal(rng: &mut ChaCha8Rng, m: &Model, atoms: &[Atom]) -> Literal {
    let annotated: Vec<&Literal> = m.tasks().iter().flat_map(|t| t.annotation.literals()).collect();
    if !annotated.is_empty() && rng.gen_bool(0.75) {
        return (*annotated.choose(rng).expect("non-empty")).clone();
    }
    Literal {
        atom: atoms.choose(rng).expect("atom pool is non-empty").clone(),
        positive: rng.gen_bool(0.5),
    }
}

/// A random formula of depth at most `depth` over `atoms`.
pub fn random_formula(rng: &mut impl Rng, atoms: &[Atom], depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return Formula::Atom(atoms.choose(rng).expect("atom pool is non-empty").clone());
    }
    let sub = |rng: &mut _| random_formula(rng, atoms, depth - 1);
    match rng.gen_range(0..4) {
        0 => Formula::not(sub(rng)),
        1 => Formula::and(sub(rng), sub(rng)),
        2 => Formula::or(sub(rng), sub(rng)),
        _ => Formula::implies(sub(rng), sub(rng)),
    }
}

/// A random formula that is not a literal.
fn compound_formula(rng: &mut ChaCha8Rng, atoms: &[Atom]) -> Formula {
    let a = Formula::Atom(atoms.choose(rng).expect("non-empty").clone());
    let b = random_formula(rng, atoms, 2);
    match rng.gen_range(0..3) {
        0 => Formula::and(a, b),
        1 => Formula::or(a, b),
        _ => Formula::implies(a, b),
    }
}

fn gen_rules(rng: &mut ChaCha8Rng, m: &Model, atoms: &[Atom], v: VariantTag) -> RuleSet {
    let count = match v.count {
        Count::One => 1,
        Count::Many => rng.gen_range(2..=3),
    };
    let obligations = (0..count)
        .map(|i| {
            let kind = if rng.gen_bool(0.5) {
                ObligationKind::Achievement
            } else {
                ObligationKind::Maintenance
            };
            let lit = |rng: &mut ChaCha8Rng| gen_literal(rng, m, atoms).to_formula();
            let requirement = if v.expressivity == Expressivity::Formulae && i == 0 {
                compound_formula(rng, atoms)
            } else {
                lit(rng)
            };
            match v.scope {
                ScopeTag::Global => Obligation::global(kind, requirement),
                ScopeTag::Local => {
                    let trigger = lit(rng);
                    let deadline = lit(rng);
                    Obligation::local(kind, requirement, trigger, deadline)
                }
            }
        })
        .collect();
    RuleSet::new(obligations).expect("count is positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::obligation::classify_variant;

    #[test]
    fn deterministic() {
        let cfg = GeneratorConfig::new(1, "1L-".parse().unwrap());
        assert_eq!(generate_instance(&cfg), generate_instance(&cfg));
    }

    #[test]
    fn variants_and_bounds() {
        for tag in VariantTag::ALL {
            for seed in 0..40 {
                let cfg = GeneratorConfig {
                    max_tasks: 10,
                    ..GeneratorConfig::new(seed, tag.parse().unwrap())
                };
                let (m, rs) = generate_instance(&cfg);
                assert_eq!(classify_variant(&rs).to_string(), tag);
                assert!(m.tasks().len() <= 12);
                assert!(m.count_executions() <= BigUint::from(GENERATED_EXECUTION_LIMIT));
            }
        }
    }

    #[test]
    fn atom_names_are_distinct() {
        let names = atom_names(60);
        let set: std::collections::BTreeSet<_> = names.iter().collect();
        assert_eq!(set.len(), 60);
        assert_eq!(names[0].name(), "a");
        assert_eq!(names[27].name(), "b1");
    }
}
