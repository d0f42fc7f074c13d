//! Tautology to full compliance of a single global maintenance obligation.
//!
//! For a formula over atoms `p1..pn` the interpretation model is
//! `Seq(start, init, Xor(p1_pos, p1_neg), ..., Xor(pn_pos, pn_neg), end)`,
//! where `init` asserts every atom and each XOR branch sets one atom to true
//! or false. Its 2^n traces end in the 2^n interpretations, so the model is
//! fully compliant with `O^m<f, _, _>` iff `f` is a tautology.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::engine::{check_full, CheckOptions};
use crate::formula::{tautology_truth_table, Atom, Formula, Literal, State};
use crate::model::{Model, ProcessBlock, Task};
use crate::net::enumerate_executions;
use crate::obligation::{Obligation, ObligationKind, RuleSet};
use crate::trace::derive_trace;
use crate::Error;

/// Largest atom count accepted, keeping 2^n within the default cap.
pub const MAX_REDUCTION_ATOMS: usize = 20;

pub const INIT: &str = "init";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReductionError {
    #[error("formula has no atoms")]
    NoAtoms,
    #[error("formula has {found} atoms, at most {max} are supported")]
    TooManyAtoms { found: usize, max: usize },
    #[error("atom order must list each atom of the formula once")]
    BadAtomOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionInstance {
    pub formula: Formula,
    pub model: Model,
    pub rules: RuleSet,
}

pub fn build_interpretation_model(f: &Formula) -> Result<ReductionInstance, ReductionError> {
    let atoms = f.atoms();
    let order: Vec<Atom> = atoms.iter().cloned().collect();
    build(f, &atoms, &order)
}

/// Builds the instance with the XOR blocks in the given atom order.
pub fn build_with_order(f: &Formula, order: &[Atom]) -> Result<ReductionInstance, ReductionError> {
    build(f, &f.atoms(), order)
}

fn build(f: &Formula, atoms: &BTreeSet<Atom>, order: &[Atom]) -> Result<ReductionInstance, ReductionError> {
    if atoms.is_empty() {
        return Err(ReductionError::NoAtoms);
    }
    if atoms.len() > MAX_REDUCTION_ATOMS {
        return Err(ReductionError::TooManyAtoms {
            found: atoms.len(),
            max: MAX_REDUCTION_ATOMS,
        });
    }
    let listed: BTreeSet<&Atom> = order.iter().collect();
    if order.len() != atoms.len() || listed.len() != order.len() || !order.iter().all(|a| atoms.contains(a)) {
        return Err(ReductionError::BadAtomOrder);
    }
    let task = |id: String, lits: Vec<Literal>| {
        ProcessBlock::Task(Arc::new(Task::new(id, State::new(lits).expect("consistent by construction"))))
    };
    let mut body = vec![task(INIT.into(), atoms.iter().cloned().map(Literal::pos).collect())];
    body.extend(order.iter().map(|a| {
        ProcessBlock::Xor(vec![
            task([a.name(), "_pos"].concat(), vec![Literal::pos(a.clone())]),
            task([a.name(), "_neg"].concat(), vec![Literal::neg(a.clone())]),
        ])
    }));
    let model = Model::validate("interpretations", ProcessBlock::Seq(body))
        .expect("generated ids are unique identifiers");
    Ok(ReductionInstance {
        formula: f.clone(),
        model,
        rules: RuleSet::single(Obligation::global(ObligationKind::Maintenance, f.clone())),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepCheck {
    pub step: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of running the four proof steps on one formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReductionDiagnostics {
    pub atoms: usize,
    pub traces: u64,
    pub steps: Vec<StepCheck>,
    pub tautology: bool,
    pub full_compliance: bool,
}

impl ReductionDiagnostics {
    pub fn all_passed(&self) -> bool {
        self.steps.iter().all(|s| s.passed)
    }

    pub fn summary(&self) -> String {
        format!(
            "tautology: {}, full compliance: {}",
            self.tautology, self.full_compliance
        )
    }
}

impl fmt::Display for ReductionDiagnostics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            let mark = if s.passed { "pass" } else { "FAIL" };
            writeln!(f, "step {} [{mark}] {}: {}", s.step, s.name, s.detail)?;
        }
        write!(f, "{}", self.summary())
    }
}

/// Runs the four checks: total final states, final states in bijection with
/// interpretations, total states from `init` on, and full compliance
/// agreeing with the truth table.
pub fn verify_reduction_steps(f: &Formula) -> Result<ReductionDiagnostics, Error> {
    let inst = build_interpretation_model(f)?;
    let atoms = f.atoms();
    let total = |s: &State| atoms.iter().all(|a| s.decides(a)) && s.atoms() == atoms;
    let execs = enumerate_executions(&inst.model, u64::MAX)?;
    let traces: Vec<_> = execs.iter().map(|e| derive_trace(&inst.model, e)).collect();
    let mut steps = Vec::new();

    let partial_finals = traces
        .iter()
        .filter(|tr| !tr.last_state().is_some_and(total))
        .count();
    steps.push(StepCheck {
        step: 1,
        name: "final states are total",
        passed: partial_finals == 0,
        detail: format!("{partial_finals} of {} final states are partial", traces.len()),
    });

    let finals: BTreeSet<&State> = traces.iter().filter_map(|tr| tr.last_state()).collect();
    let expected = 1u64 << atoms.len();
    let bijective = finals.len() == traces.len() && traces.len() as u64 == expected && finals.iter().all(|s| total(s));
    steps.push(StepCheck {
        step: 2,
        name: "final states enumerate interpretations once",
        passed: bijective,
        detail: format!(
            "{} traces, {} distinct final states, {expected} interpretations",
            traces.len(),
            finals.len()
        ),
    });

    let partial_inner = traces
        .iter()
        .flat_map(|tr| tr.steps().iter().skip_while(|s| s.task.id != INIT))
        .filter(|s| !total(&s.state))
        .count();
    steps.push(StepCheck {
        step: 3,
        name: "states from init on are total",
        passed: partial_inner == 0,
        detail: format!("{partial_inner} partial states after init"),
    });

    let tautology = tautology_truth_table(f)?;
    let report = check_full(&inst.model, &inst.rules, &CheckOptions::default())?;
    steps.push(StepCheck {
        step: 4,
        name: "full compliance matches the truth table",
        passed: report.verdict == tautology,
        detail: format!("{} traces examined", report.traces_examined),
    });

    Ok(ReductionDiagnostics {
        atoms: atoms.len(),
        traces: traces.len() as u64,
        steps,
        tautology,
        full_compliance: report.verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_formula;
    use crate::model::ProcessBlock as B;

    fn f(s: &str) -> Formula {
        parse_formula(s).unwrap()
    }

    #[test]
    fn one_atom_model() {
        let inst = build_interpretation_model(&f("a")).unwrap();
        assert_eq!(
            inst.model.body(),
            &B::Seq(vec![
                B::task("init", &["a"]),
                B::Xor(vec![B::task("a_pos", &["a"]), B::task("a_neg", &["-a"])]),
            ])
        );
        assert_eq!(inst.model.count_executions(), 2u32.into());
        assert_eq!(inst.rules.variant().to_string(), "1G-");
        assert_eq!(build_interpretation_model(&f("a | b")).unwrap().rules.variant().to_string(), "1G+");
    }

    #[test]
    fn two_atom_final_states() {
        let inst = build_interpretation_model(&f("a & b")).unwrap();
        let finals: BTreeSet<Vec<String>> = enumerate_executions(&inst.model, 100)
            .unwrap()
            .iter()
            .map(|e| derive_trace(&inst.model, e).last_state().unwrap().to_strings())
            .collect();
        let want: BTreeSet<Vec<String>> = [["a", "b"], ["a", "-b"], ["-a", "b"], ["-a", "-b"]]
            .iter()
            .map(|p| State::parse(p).unwrap().to_strings())
            .collect();
        assert_eq!(finals, want);
    }

    #[test]
    fn empty_start_state_breaks_a_single_atom() {
        // `start` is unannotated, so `a` fails at the first step of every trace
        let inst = build_interpretation_model(&f("a")).unwrap();
        let opts = CheckOptions::default();
        assert!(!check_full(&inst.model, &inst.rules, &opts).unwrap().verdict);
        assert!(!crate::engine::check_partial(&inst.model, &inst.rules, &opts).unwrap().verdict);
    }

    #[test]
    fn constants_have_no_atoms() {
        assert_eq!(build_interpretation_model(&Formula::True), Err(ReductionError::NoAtoms));
    }

    #[test]
    fn steps_on_examples() {
        let d = verify_reduction_steps(&f("a | !a")).unwrap();
        assert!(d.all_passed() && d.tautology && d.full_compliance);
        assert_eq!(d.summary(), "tautology: true, full compliance: true");
        let d = verify_reduction_steps(&f("a & b")).unwrap();
        assert!(d.all_passed() && !d.full_compliance);
        let d = verify_reduction_steps(&f("a -> a")).unwrap();
        assert!(d.all_passed() && d.traces == 2);
    }

    #[test]
    fn order_is_checked() {
        let g = f("a & b");
        let ba = [Atom::new("b").unwrap(), Atom::new("a").unwrap()];
        let inst = build_with_order(&g, &ba).unwrap();
        assert_eq!(inst.model.tasks()[2].id, "b_pos");
        assert_eq!(build_with_order(&g, &ba[..1]), Err(ReductionError::BadAtomOrder));
    }
}
