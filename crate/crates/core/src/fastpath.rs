//! Polynomial checks for a single local obligation over literals (`1L-`).
//!
//! For a designated trigger task `x`, every block is summarised as a transfer
//! relation over abstract states: the truth values of the (at most three)
//! atoms the obligation mentions, plus the phase of the instance started at
//! `x` (not yet started, in force, satisfied, violated). SEQ composes child
//! relations, XOR unions them, and AND explores the product of its branches'
//! step graphs. The root relation applied to the initial state answers
//! whether some trace satisfies (or violates) the instance started at `x`.
//!
//! Partial compliance then labels unsatisfiable trigger tasks as not
//! executable, erases them, and accepts iff the root block survives.

use std::collections::{BTreeSet, HashMap, VecDeque};

use thiserror::Error;

use crate::formula::{Atom, Formula, Literal, State};
use crate::model::{Model, ProcessBlock, Task};
use crate::obligation::{classify_variant, Obligation, ObligationKind, RuleSet, Scope, VariantTag};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FastPathError {
    #[error("obligation fields must all be literals")]
    NotLiteralVariant,
    #[error("fast engine handles 1L- only, got {0}")]
    WrongVariant(VariantTag),
    #[error("task `{0}` is not a trigger task of the obligation")]
    NotATrigger(String),
}

/// A `1L-` obligation with its fields as literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiteralObligation {
    pub kind: ObligationKind,
    pub requirement: Literal,
    pub trigger: Literal,
    pub deadline: Literal,
}

impl LiteralObligation {
    pub fn from_obligation(o: &Obligation) -> Result<Self, FastPathError> {
        let Scope::Local { trigger, deadline } = &o.scope else {
            return Err(FastPathError::WrongVariant(classify_variant(&RuleSet::single(o.clone()))));
        };
        let lit = |f: &Formula| f.as_literal().ok_or(FastPathError::NotLiteralVariant);
        Ok(LiteralObligation {
            kind: o.kind,
            requirement: lit(&o.requirement)?,
            trigger: lit(trigger)?,
            deadline: lit(deadline)?,
        })
    }

    /// Closed-world: does this annotation, on its own, satisfy the trigger?
    fn triggered_by(&self, annotation: &State) -> bool {
        self.trigger.to_formula().eval(annotation)
    }
}

/// Whether the instance originating at one trigger task can be satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriggerAnalysis {
    pub task: String,
    pub satisfiable: bool,
    pub violable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ErasedModel {
    Survives(Model),
    RootRemoved,
}

/// Tasks whose annotation satisfies the trigger literal.
pub fn trigger_transitions(m: &Model, o: &Obligation) -> Result<Vec<String>, FastPathError> {
    let lo = LiteralObligation::from_obligation(o)?;
    Ok(m
        .tasks()
        .iter()
        .filter(|t| lo.triggered_by(&t.annotation))
        .map(|t| t.id.clone())
        .collect())
}

pub fn instance_satisfiable(m: &Model, o: &Obligation, x: &str) -> Result<bool, FastPathError> {
    Ok(analyse_trigger(m, o, x)?.satisfiable)
}

pub fn analyse_trigger(m: &Model, o: &Obligation, x: &str) -> Result<TriggerAnalysis, FastPathError> {
    let lo = LiteralObligation::from_obligation(o)?;
    let idx = m
        .task_index(x)
        .filter(|&i| lo.triggered_by(&m.task(i).annotation))
        .ok_or_else(|| FastPathError::NotATrigger(x.to_string()))?;
    Ok(Analyser::new(&lo, m.task(idx)).run(m.root()))
}

pub fn analyse_all(m: &Model, o: &Obligation) -> Result<Vec<TriggerAnalysis>, FastPathError> {
    trigger_transitions(m, o)?
        .iter()
        .map(|x| analyse_trigger(m, o, x))
        .collect()
}

/// True iff some trace complies with the single local literal obligation `o`.
pub fn partial_compliant_fast(m: &Model, o: &Obligation) -> Result<bool, FastPathError> {
    let dead: BTreeSet<String> = analyse_all(m, o)?
        .into_iter()
        .filter(|a| !a.satisfiable)
        .map(|a| a.task)
        .collect();
    Ok(matches!(erase(m, &dead), ErasedModel::Survives(_)))
}

/// True iff no trace violates `o`.
pub fn full_compliant_fast(m: &Model, o: &Obligation) -> Result<bool, FastPathError> {
    Ok(analyse_all(m, o)?.iter().all(|a| !a.violable))
}

/// Removes the blocks of `dead` tasks. Removal propagates through SEQ and
/// AND parents and stops at XOR parents, which lose only that branch.
pub fn erase(m: &Model, dead: &BTreeSet<String>) -> ErasedModel {
    fn go(b: &ProcessBlock, dead: &BTreeSet<String>) -> Option<ProcessBlock> {
        match b {
            ProcessBlock::Task(t) => (!dead.contains(&t.id)).then(|| b.clone()),
            ProcessBlock::Seq(c) => c.iter().map(|c| go(c, dead)).collect::<Option<_>>().map(ProcessBlock::Seq),
            ProcessBlock::And(c) => c.iter().map(|c| go(c, dead)).collect::<Option<_>>().map(ProcessBlock::And),
            ProcessBlock::Xor(c) => {
                let mut kept: Vec<_> = c.iter().filter_map(|c| go(c, dead)).collect();
                match kept.len() {
                    0 => None,
                    1 => kept.pop(),
                    _ => Some(ProcessBlock::Xor(kept)),
                }
            }
        }
    }
    match go(m.root(), dead) {
        None => ErasedModel::RootRemoved,
        Some(root) => ErasedModel::Survives(
            Model::from_root(m.name().to_string(), root).expect("erasing keeps a valid model"),
        ),
    }
}

/// Dispatches a fast check for `1L-` rule sets.
pub fn check_fast(m: &Model, rs: &RuleSet, full: bool) -> Result<bool, FastPathError> {
    let tag = classify_variant(rs);
    if !tag.is_one_local_literal() {
        return Err(FastPathError::WrongVariant(tag));
    }
    let o = &rs.obligations()[0];
    if full {
        full_compliant_fast(m, o)
    } else {
        partial_compliant_fast(m, o)
    }
}

const BEFORE: usize = 0;
const ACTIVE: usize = 1;
const SATISFIED: usize = 2;
const VIOLATED: usize = 3;
const ABS: usize = 32;

/// Relation over the 32 abstract states; row `a` is the bitset of outputs.
#[derive(Clone, Copy, PartialEq, Eq)]
struct Relation([u32; ABS]);

impl Relation {
    fn empty() -> Self {
        Relation([0; ABS])
    }

    fn identity() -> Self {
        let mut r = Relation::empty();
        (0..ABS).for_each(|a| r.0[a] = 1 << a);
        r
    }

    fn then(&self, next: &Relation) -> Relation {
        let mut out = Relation::empty();
        for a in 0..ABS {
            let mut row = self.0[a];
            while row != 0 {
                let b = row.trailing_zeros() as usize;
                row &= row - 1;
                out.0[a] |= next.0[b];
            }
        }
        out
    }

    fn union(&mut self, other: &Relation) {
        (0..ABS).for_each(|a| self.0[a] |= other.0[a]);
    }
}

struct StepGraph {
    /// edges[node]: (task, successor)
    edges: Vec<Vec<(usize, usize)>>,
    entry: usize,
    exit: usize,
}

struct Analyser<'a> {
    lo: &'a LiteralObligation,
    x: &'a Task,
    atoms: Vec<Atom>,
    tasks: Vec<&'a Task>,
    task_index: HashMap<&'a str, usize>,
}

impl<'a> Analyser<'a> {
    fn new(lo: &'a LiteralObligation, x: &'a Task) -> Self {
        let mut atoms: Vec<Atom> = Vec::new();
        for l in [&lo.requirement, &lo.trigger, &lo.deadline] {
            if !atoms.contains(&l.atom) {
                atoms.push(l.atom.clone());
            }
        }
        Analyser {
            lo,
            x,
            atoms,
            tasks: Vec::new(),
            task_index: HashMap::new(),
        }
    }

    fn run(mut self, root: &'a ProcessBlock) -> TriggerAnalysis {
        for t in root.tasks() {
            self.task_index.insert(t.id.as_str(), self.tasks.len());
            self.tasks.push(t);
        }
        let rel = self.relation(root);
        let (mut satisfiable, mut violable) = (false, false);
        let mut outs = rel.0[0];
        while outs != 0 {
            let b = outs.trailing_zeros() as usize;
            outs &= outs - 1;
            let phase = match b / 8 {
                ACTIVE if self.lo.kind == ObligationKind::Achievement => VIOLATED,
                ACTIVE => SATISFIED,
                p => p,
            };
            satisfiable |= phase == SATISFIED;
            violable |= phase == VIOLATED;
        }
        TriggerAnalysis {
            task: self.x.id.clone(),
            satisfiable,
            violable,
        }
    }

    fn holds(&self, l: &Literal, val: usize) -> bool {
        let k = self.atoms.iter().position(|a| *a == l.atom).expect("relevant atom");
        (val >> k & 1 == 1) == l.positive
    }

    /// Phase after a step of an instance that is in force (or just started).
    fn judge(&self, val: usize) -> usize {
        let rho = self.holds(&self.lo.requirement, val);
        let delta = self.holds(&self.lo.deadline, val);
        match self.lo.kind {
            ObligationKind::Achievement if rho => SATISFIED,
            ObligationKind::Achievement if delta => VIOLATED,
            ObligationKind::Maintenance if !rho => VIOLATED,
            ObligationKind::Maintenance if delta => SATISFIED,
            _ => ACTIVE,
        }
    }

    fn step(&self, task: &Task, abs: usize) -> Option<usize> {
        let (phase, mut val) = (abs / 8, abs % 8);
        for (k, atom) in self.atoms.iter().enumerate() {
            if task.annotation.contains(&Literal::pos(atom.clone())) {
                val |= 1 << k;
            } else if task.annotation.contains(&Literal::neg(atom.clone())) {
                val &= !(1 << k);
            }
        }
        let phase = if task.id == self.x.id {
            if phase != BEFORE {
                return None;
            }
            if self.holds(&self.lo.trigger, val) {
                self.judge(val)
            } else {
                // no instance starts here in this trace
                SATISFIED
            }
        } else if phase == ACTIVE {
            self.judge(val)
        } else {
            phase
        };
        Some(phase * 8 + val)
    }

    fn task_relation(&self, task: &Task) -> Relation {
        let mut r = Relation::empty();
        for a in 0..ABS {
            if let Some(b) = self.step(task, a) {
                r.0[a] = 1 << b;
            }
        }
        r
    }

    fn relation(&self, block: &ProcessBlock) -> Relation {
        match block {
            ProcessBlock::Task(t) => self.task_relation(t),
            ProcessBlock::Seq(c) => c
                .iter()
                .fold(Relation::identity(), |acc, c| acc.then(&self.relation(c))),
            ProcessBlock::Xor(c) => c.iter().fold(Relation::empty(), |mut acc, c| {
                acc.union(&self.relation(c));
                acc
            }),
            ProcessBlock::And(_) => self.graph_relation(&self.graph(block)),
        }
    }

    fn graph(&self, block: &ProcessBlock) -> StepGraph {
        match block {
            ProcessBlock::Task(t) => StepGraph {
                edges: vec![vec![(self.task_index[t.id.as_str()], 1)], vec![]],
                entry: 0,
                exit: 1,
            },
            ProcessBlock::Seq(c) => {
                let mut g = StepGraph {
                    edges: vec![vec![]],
                    entry: 0,
                    exit: 0,
                };
                for child in c {
                    let sub = self.graph(child);
                    let base = g.edges.len();
                    let map = |n: usize| if n == sub.entry { g.exit } else { base + n - usize::from(n > sub.entry) };
                    let mut added = vec![vec![]; sub.edges.len() - 1];
                    for (n, out) in sub.edges.iter().enumerate() {
                        let mapped: Vec<_> = out.iter().map(|&(t, to)| (t, map(to))).collect();
                        if n == sub.entry {
                            g.edges[g.exit].extend(mapped);
                        } else {
                            added[n - usize::from(n > sub.entry)] = mapped;
                        }
                    }
                    let exit = map(sub.exit);
                    g.edges.extend(added);
                    g.exit = exit;
                }
                g
            }
            ProcessBlock::Xor(c) => {
                let mut g = StepGraph {
                    edges: vec![vec![], vec![]],
                    entry: 0,
                    exit: 1,
                };
                for child in c {
                    let sub = self.graph(child);
                    let base = g.edges.len();
                    let mut ids = vec![0; sub.edges.len()];
                    let mut next = base;
                    for (n, id) in ids.iter_mut().enumerate() {
                        *id = if n == sub.entry {
                            0
                        } else if n == sub.exit {
                            1
                        } else {
                            next += 1;
                            next - 1
                        };
                    }
                    g.edges.resize(next, vec![]);
                    for (n, out) in sub.edges.iter().enumerate() {
                        let mapped: Vec<_> = out.iter().map(|&(t, to)| (t, ids[to])).collect();
                        g.edges[ids[n]].extend(mapped);
                    }
                }
                g
            }
            ProcessBlock::And(c) => {
                let subs: Vec<StepGraph> = c.iter().map(|b| self.graph(b)).collect();
                let start: Vec<usize> = subs.iter().map(|s| s.entry).collect();
                let goal: Vec<usize> = subs.iter().map(|s| s.exit).collect();
                let mut ids: HashMap<Vec<usize>, usize> = HashMap::from([(start.clone(), 0)]);
                let mut edges: Vec<Vec<(usize, usize)>> = vec![vec![]];
                let mut queue = VecDeque::from([start]);
                while let Some(tuple) = queue.pop_front() {
                    let from = ids[&tuple];
                    for (k, sub) in subs.iter().enumerate() {
                        for &(t, to) in &sub.edges[tuple[k]] {
                            let mut succ = tuple.clone();
                            succ[k] = to;
                            let id = *ids.entry(succ.clone()).or_insert_with(|| {
                                edges.push(vec![]);
                                queue.push_back(succ);
                                edges.len() - 1
                            });
                            edges[from].push((t, id));
                        }
                    }
                }
                let exit = ids[&goal];
                StepGraph {
                    edges,
                    entry: 0,
                    exit,
                }
            }
        }
    }

    /// Entry-to-exit relation of an acyclic step graph, in topological order.
    fn graph_relation(&self, g: &StepGraph) -> Relation {
        let n = g.edges.len();
        let mut indegree = vec![0usize; n];
        g.edges.iter().flatten().for_each(|&(_, to)| indegree[to] += 1);
        let mut reach = vec![Relation::empty(); n];
        reach[g.entry] = Relation::identity();
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let step_rel: Vec<Relation> = self.tasks.iter().map(|t| self.task_relation(t)).collect();
        while let Some(v) = ready.pop() {
            for &(t, to) in &g.edges[v] {
                let r = reach[v].then(&step_rel[t]);
                reach[to].union(&r);
                indegree[to] -= 1;
                if indegree[to] == 0 {
                    ready.push(to);
                }
            }
        }
        reach[g.exit]
    }
}
