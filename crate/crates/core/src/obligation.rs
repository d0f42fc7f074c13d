//! Achievement and maintenance obligations, their in-force intervals over a
//! trace, and the variant tag of a rule set.
//!
//! An in-force instance of a local obligation starts at every trace position
//! whose task annotation satisfies the trigger (closed world) and whose state
//! satisfies it too. Achievement instances end at the first state, from the
//! trigger on, satisfying the requirement or the deadline; maintenance
//! instances end at the first deadline state. The last state of a trace always
//! counts as a deadline.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::Formula;
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObligationError {
    #[error("a rule set needs at least one obligation")]
    EmptyRuleSet,
    #[error("trigger and deadline must be both present or both absent")]
    MixedScope,
    #[error("operation needs a local obligation")]
    NotLocal,
    #[error("intervals [{0}, {1}] and [{2}, {3}] are not nested")]
    NotNested(usize, usize, usize, usize),
    #[error("unknown variant tag `{0}`")]
    BadVariantTag(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObligationKind {
    Achievement,
    Maintenance,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    /// In force over the whole trace.
    Global,
    Local { trigger: Formula, deadline: Formula },
}

/// An obligation `O^kind<requirement, trigger, deadline>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Obligation {
    pub kind: ObligationKind,
    pub requirement: Formula,
    pub scope: Scope,
}

impl Obligation {
    pub fn global(kind: ObligationKind, requirement: Formula) -> Self {
        Obligation {
            kind,
            requirement,
            scope: Scope::Global,
        }
    }

    pub fn local(kind: ObligationKind, requirement: Formula, trigger: Formula, deadline: Formula) -> Self {
        Obligation {
            kind,
            requirement,
            scope: Scope::Local { trigger, deadline },
        }
    }

    /// Builds from optional trigger/deadline, which must agree on presence.
    pub fn new(
        kind: ObligationKind,
        requirement: Formula,
        trigger: Option<Formula>,
        deadline: Option<Formula>,
    ) -> Result<Self, ObligationError> {
        match (trigger, deadline) {
            (None, None) => Ok(Obligation::global(kind, requirement)),
            (Some(t), Some(d)) => Ok(Obligation::local(kind, requirement, t, d)),
            _ => Err(ObligationError::MixedScope),
        }
    }

    pub fn is_global(&self) -> bool {
        matches!(self.scope, Scope::Global)
    }

    pub fn trigger(&self) -> Option<&Formula> {
        match &self.scope {
            Scope::Global => None,
            Scope::Local { trigger, .. } => Some(trigger),
        }
    }

    pub fn deadline(&self) -> Option<&Formula> {
        match &self.scope {
            Scope::Global => None,
            Scope::Local { deadline, .. } => Some(deadline),
        }
    }

    /// Every formula field that is present.
    pub fn fields(&self) -> Vec<&Formula> {
        let mut out = vec![&self.requirement];
        out.extend(self.trigger());
        out.extend(self.deadline());
        out
    }

    pub fn is_literal(&self) -> bool {
        self.fields().iter().all(|f| f.is_literal())
    }
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            ObligationKind::Achievement => "a",
            ObligationKind::Maintenance => "m",
        };
        match &self.scope {
            Scope::Global => write!(f, "O^{k}<{}, _, _>", self.requirement),
            Scope::Local { trigger, deadline } => {
                write!(f, "O^{k}<{}, {trigger}, {deadline}>", self.requirement)
            }
        }
    }
}

/// A non-empty list of obligations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleSet {
    obligations: Vec<Obligation>,
}

impl RuleSet {
    pub fn new(obligations: Vec<Obligation>) -> Result<Self, ObligationError> {
        if obligations.is_empty() {
            return Err(ObligationError::EmptyRuleSet);
        }
        Ok(RuleSet { obligations })
    }

    pub fn single(o: Obligation) -> Self {
        RuleSet {
            obligations: vec![o],
        }
    }

    pub fn obligations(&self) -> &[Obligation] {
        &self.obligations
    }

    pub fn variant(&self) -> VariantTag {
        classify_variant(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Satisfied,
    Violated,
}

/// Trace positions `start..=end` during which one instance is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InForceInterval {
    pub start: usize,
    pub end: usize,
    pub outcome: Outcome,
}

impl InForceInterval {
    /// `self ⊂ other` as position ranges.
    pub fn nested_in(&self, other: &InForceInterval) -> bool {
        other.start <= self.start
            && self.end <= other.end
            && (other.start, other.end) != (self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalOptions {
    /// Read the achievement deadline clause literally: a deadline state at
    /// any position before the achieving state, even before the trigger,
    /// violates the instance.
    pub strict_deadline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Evaluation {
    Satisfied,
    /// Carries the first violated instance.
    Violated(InForceInterval),
}

impl Evaluation {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Evaluation::Satisfied)
    }
}

/// Positions where an in-force instance of `o` starts.
pub fn trigger_positions(tr: &Trace, o: &Obligation) -> Vec<usize> {
    match &o.scope {
        Scope::Global => (!tr.is_empty()).then_some(0).into_iter().collect(),
        Scope::Local { trigger, .. } => tr
            .steps()
            .iter()
            .enumerate()
            .filter(|(_, s)| trigger.eval(&s.task.annotation) && trigger.eval(&s.state))
            .map(|(k, _)| k)
            .collect(),
    }
}

pub fn in_force_intervals(tr: &Trace, o: &Obligation) -> Vec<InForceInterval> {
    in_force_intervals_with(tr, o, EvalOptions::default())
}

pub fn in_force_intervals_with(tr: &Trace, o: &Obligation, opts: EvalOptions) -> Vec<InForceInterval> {
    let states: Vec<_> = tr.states().collect();
    let n = states.len();
    if n == 0 {
        return Vec::new();
    }
    let rho = |k: usize| o.requirement.eval(states[k]);
    match &o.scope {
        Scope::Global => vec![global_interval(tr, o)],
        Scope::Local { deadline, .. } => {
            let delta = |k: usize| k + 1 == n || deadline.eval(states[k]);
            trigger_positions(tr, o)
                .into_iter()
                .map(|i| {
                    let (end, ok) = match o.kind {
                        ObligationKind::Achievement => {
                            let end = (i..n).find(|&k| rho(k) || delta(k)).expect("last state is a deadline");
                            let ok = if opts.strict_deadline {
                                // first achieving state, with no deadline anywhere before it
                                (i..n)
                                    .find(|&k| rho(k))
                                    .is_some_and(|j| !(0..j).any(|k| deadline.eval(states[k])))
                            } else {
                                rho(end)
                            };
                            (end, ok)
                        }
                        ObligationKind::Maintenance => {
                            let end = (i..n).find(|&k| delta(k)).expect("last state is a deadline");
                            (end, (i..=end).all(rho))
                        }
                    };
                    InForceInterval {
                        start: i,
                        end,
                        outcome: if ok { Outcome::Satisfied } else { Outcome::Violated },
                    }
                })
                .collect()
        }
    }
}

pub fn eval_obligation(tr: &Trace, o: &Obligation) -> Evaluation {
    eval_obligation_with(tr, o, EvalOptions::default())
}

/// The single interval of a global obligation over a non-empty trace.
fn global_interval(tr: &Trace, o: &Obligation) -> InForceInterval {
    let mut states = tr.states();
    let ok = match o.kind {
        ObligationKind::Achievement => states.any(|s| o.requirement.eval(s)),
        ObligationKind::Maintenance => states.all(|s| o.requirement.eval(s)),
    };
    InForceInterval {
        start: 0,
        end: tr.steps().len() - 1,
        outcome: if ok { Outcome::Satisfied } else { Outcome::Violated },
    }
}

pub fn eval_obligation_with(tr: &Trace, o: &Obligation, opts: EvalOptions) -> Evaluation {
    if o.is_global() && !tr.steps().is_empty() {
        let iv = global_interval(tr, o);
        return match iv.outcome {
            Outcome::Satisfied => Evaluation::Satisfied,
            Outcome::Violated => Evaluation::Violated(iv),
        };
    }
    in_force_intervals_with(tr, o, opts)
        .into_iter()
        .find(|iv| iv.outcome == Outcome::Violated)
        .map_or(Evaluation::Satisfied, Evaluation::Violated)
}

/// Checks only the instances that start at a step whose task id is in
/// `allowed`.
pub fn eval_restricted(tr: &Trace, o: &Obligation, allowed: &BTreeSet<String>) -> Result<bool, ObligationError> {
    eval_restricted_with(tr, o, allowed, EvalOptions::default())
}

pub fn eval_restricted_with(
    tr: &Trace,
    o: &Obligation,
    allowed: &BTreeSet<String>,
    opts: EvalOptions,
) -> Result<bool, ObligationError> {
    if o.is_global() {
        return Err(ObligationError::NotLocal);
    }
    Ok(in_force_intervals_with(tr, o, opts).iter().all(|iv| {
        iv.outcome == Outcome::Satisfied || !allowed.contains(&tr.steps()[iv.start].task.id)
    }))
}

/// For `inner ⊂ outer`, the one interval whose evaluation decides both:
/// the inner one for achievement, the outer one for maintenance.
pub fn overlap_reduction(
    outer: InForceInterval,
    inner: InForceInterval,
    kind: ObligationKind,
) -> Result<InForceInterval, ObligationError> {
    if !inner.nested_in(&outer) {
        return Err(ObligationError::NotNested(outer.start, outer.end, inner.start, inner.end));
    }
    Ok(match kind {
        ObligationKind::Achievement => inner,
        ObligationKind::Maintenance => outer,
    })
}

/// Drops every interval that a nested partner decides for it.
pub fn deciding_intervals(intervals: &[InForceInterval], kind: ObligationKind) -> Vec<InForceInterval> {
    intervals
        .iter()
        .filter(|iv| {
            !intervals.iter().any(|other| {
                let pair = if other.nested_in(iv) {
                    overlap_reduction(**iv, *other, kind)
                } else if iv.nested_in(other) {
                    overlap_reduction(*other, **iv, kind)
                } else {
                    return false;
                };
                pair.is_ok_and(|d| d != **iv)
            })
        })
        .copied()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Count {
    One,
    Many,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScopeTag {
    Global,
    Local,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expressivity {
    Literals,
    Formulae,
}

/// Problem variant, rendered `1G+`, `nL-`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VariantTag {
    pub count: Count,
    pub scope: ScopeTag,
    pub expressivity: Expressivity,
}

impl VariantTag {
    pub const ALL: [&'static str; 8] = ["1G-", "1G+", "1L-", "1L+", "nG-", "nG+", "nL-", "nL+"];

    pub fn is_one_local_literal(&self) -> bool {
        *self
            == VariantTag {
                count: Count::One,
                scope: ScopeTag::Local,
                expressivity: Expressivity::Literals,
            }
    }
}

impl fmt::Display for VariantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.count == Count::One { '1' } else { 'n' };
        let s = if self.scope == ScopeTag::Global { 'G' } else { 'L' };
        let e = if self.expressivity == Expressivity::Literals { '-' } else { '+' };
        write!(f, "{c}{s}{e}")
    }
}

impl FromStr for VariantTag {
    type Err = ObligationError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ObligationError::BadVariantTag(s.to_string());
        let b = s.as_bytes();
        if b.len() != 3 {
            return Err(bad());
        }
        let count = match b[0] {
            b'1' => Count::One,
            b'n' | b'N' => Count::Many,
            _ => return Err(bad()),
        };
        let scope = match b[1] {
            b'G' | b'g' => ScopeTag::Global,
            b'L' | b'l' => ScopeTag::Local,
            _ => return Err(bad()),
        };
        let expressivity = match b[2] {
            b'-' => Expressivity::Literals,
            b'+' => Expressivity::Formulae,
            _ => return Err(bad()),
        };
        Ok(VariantTag {
            count,
            scope,
            expressivity,
        })
    }
}

pub fn classify_variant(rs: &RuleSet) -> VariantTag {
    let obs = rs.obligations();
    VariantTag {
        count: if obs.len() == 1 { Count::One } else { Count::Many },
        scope: if obs.iter().all(Obligation::is_global) {
            ScopeTag::Global
        } else {
            ScopeTag::Local
        },
        expressivity: if obs.iter().all(Obligation::is_literal) {
            Expressivity::Literals
        } else {
            Expressivity::Formulae
        },
    }
}
