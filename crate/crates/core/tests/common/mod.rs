//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use oblig_core::{derive_trace, enumerate_executions, Atom, Formula, Model, Obligation, ObligationKind, State};
use oblig_core::obligation::Scope;

/// Classical evaluation, written separately from the library's evaluator.
pub fn eval(f: &Formula, v: &BTreeMap<Atom, bool>) -> bool {
    match f {
        Formula::Atom(a) => v[a],
        Formula::Not(g) => !eval(g, v),
        Formula::And(a, b) => eval(a, v) && eval(b, v),
        Formula::Or(a, b) => eval(a, v) || eval(b, v),
        Formula::Implies(a, b) => !eval(a, v) || eval(b, v),
        Formula::True => true,
        Formula::False => false,
    }
}

/// Truth-table check with one bit per row, for at most 6 atoms.
pub fn is_tautology(f: &Formula) -> bool {
    let mut atoms = Vec::new();
    collect_atoms(f, &mut atoms);
    assert!(atoms.len() <= 6, "oracle handles at most 6 atoms");
    let rows = 1u32 << atoms.len();
    let all = if rows == 64 { u64::MAX } else { (1u64 << rows) - 1 };
    table(f, &atoms, all) == all
}

fn collect_atoms(f: &Formula, out: &mut Vec<Atom>) {
    match f {
        Formula::Atom(a) if !out.contains(a) => out.push(a.clone()),
        Formula::Not(g) => collect_atoms(g, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            collect_atoms(a, out);
            collect_atoms(b, out);
        }
        _ => {}
    }
}

/// Bit `r` is the value of `f` in row `r`, where atom `i` is true iff bit
/// `i` of `r` is set.
fn table(f: &Formula, atoms: &[Atom], all: u64) -> u64 {
    match f {
        Formula::Atom(a) => {
            const COLUMNS: [u64; 6] = [
                0xAAAA_AAAA_AAAA_AAAA,
                0xCCCC_CCCC_CCCC_CCCC,
                0xF0F0_F0F0_F0F0_F0F0,
                0xFF00_FF00_FF00_FF00,
                0xFFFF_0000_FFFF_0000,
                0xFFFF_FFFF_0000_0000,
            ];
            let i = atoms.iter().position(|x| x == a).expect("atom listed");
            COLUMNS[i] & all
        }
        Formula::Not(g) => !table(g, atoms, all) & all,
        Formula::And(a, b) => table(a, atoms, all) & table(b, atoms, all),
        Formula::Or(a, b) => table(a, atoms, all) | table(b, atoms, all),
        Formula::Implies(a, b) => (!table(a, atoms, all) | table(b, atoms, all)) & all,
        Formula::True => all,
        Formula::False => 0,
    }
}

/// Calls `visit` on every formula over `atoms` with connective depth at most
/// `depth`, atoms having depth 0. Only the formulas one level down are kept
/// in memory.
pub fn for_each_formula(atoms: &[&str], depth: usize, mut visit: impl FnMut(&Formula)) {
    let mut level: Vec<Formula> = atoms.iter().map(|a| Formula::atom(a)).collect();
    if depth == 0 {
        level.iter().for_each(visit);
        return;
    }
    for _ in 1..depth {
        level = extend_level(&level);
    }
    level.iter().for_each(&mut visit);
    for f in &level {
        visit(&Formula::not(f.clone()));
    }
    for a in &level {
        for b in &level {
            visit(&Formula::and(a.clone(), b.clone()));
            visit(&Formula::or(a.clone(), b.clone()));
            visit(&Formula::implies(a.clone(), b.clone()));
        }
    }
}

fn extend_level(level: &[Formula]) -> Vec<Formula> {
    let mut next = level.to_vec();
    next.extend(level.iter().map(|f| Formula::not(f.clone())));
    for a in level {
        for b in level {
            next.push(Formula::and(a.clone(), b.clone()));
            next.push(Formula::or(a.clone(), b.clone()));
            next.push(Formula::implies(a.clone(), b.clone()));
        }
    }
    next
}

/// Closed-world truth of `f` in a state.
pub fn holds(f: &Formula, s: &State) -> bool {
    let v = f
        .atoms()
        .into_iter()
        .map(|a| {
            let on = s.to_strings().iter().any(|l| *l == a.name());
            (a, on)
        })
        .collect();
    eval(f, &v)
}

/// Outcome of the instance of local obligation `o` started at position `i`
/// of `states`, or `None` when no instance starts there.
pub fn instance_outcome(o: &Obligation, annotation: &State, states: &[State], i: usize) -> Option<bool> {
    let Scope::Local { trigger, deadline } = &o.scope else {
        panic!("local obligation expected")
    };
    if !(holds(trigger, annotation) && holds(trigger, &states[i])) {
        return None;
    }
    let last = states.len() - 1;
    let rho = |k: usize| holds(&o.requirement, &states[k]);
    let delta = |k: usize| k == last || holds(deadline, &states[k]);
    let mut k = i;
    Some(match o.kind {
        ObligationKind::Achievement => loop {
            if rho(k) {
                break true;
            }
            if delta(k) {
                break false;
            }
            k += 1;
        },
        ObligationKind::Maintenance => loop {
            if !rho(k) {
                break false;
            }
            if delta(k) {
                break true;
            }
            k += 1;
        },
    })
}

/// Some trace contains task `x` and satisfies the instance started there.
pub fn brute_instance_satisfiable(m: &Model, o: &Obligation, x: &str) -> bool {
    let xi = m.task_index(x).expect("task exists");
    enumerate_executions(m, u64::MAX).unwrap().iter().any(|e| {
        let Some(pos) = e.steps().iter().position(|&t| t == xi) else {
            return false;
        };
        let tr = derive_trace(m, e);
        let states: Vec<State> = tr.states().cloned().collect();
        instance_outcome(o, &m.task(xi).annotation, &states, pos) == Some(true)
    })
}

/// Tasks whose annotation satisfies the trigger under closed-world reading.
pub fn trigger_tasks(m: &Model, o: &Obligation) -> Vec<String> {
    let Scope::Local { trigger, .. } = &o.scope else {
        return Vec::new();
    };
    m.tasks()
        .iter()
        .filter(|t| holds(trigger, &t.annotation))
        .map(|t| t.id.clone())
        .collect()
}
