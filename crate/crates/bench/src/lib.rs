//! Fixtures shared by the criterion benches.

use oblig_core::bench::{tautology_chain, xor_chain};
use oblig_core::generate::{generate_instance, GeneratorConfig};
use oblig_core::{build_interpretation_model, Model, RuleSet};

/// Interpretation model and rules for a tautology over `n` atoms.
pub fn reduction_fixture(n: usize) -> (Model, RuleSet) {
    let inst = build_interpretation_model(&tautology_chain(n)).expect("n is positive");
    (inst.model, inst.rules)
}

/// XOR chain of length `n` with a single local literal obligation.
pub fn xor_chain_fixture(n: usize) -> (Model, RuleSet) {
    xor_chain(n)
}

/// Seeded random `1L-` instances with up to 10 tasks.
pub fn random_local_fixtures(count: u64) -> Vec<(Model, RuleSet)> {
    (0..count)
        .map(|seed| {
            let cfg = GeneratorConfig {
                max_tasks: 10,
                atom_pool: 6,
                ..GeneratorConfig::new(seed, "1L-".parse().expect("valid tag"))
            };
            generate_instance(&cfg)
        })
        .collect()
}
