//! Propositional formulas, literal-set process states and the state update
//! operator.
//!
//! Satisfaction of a formula by a [`State`] is closed-world: an atom is true
//! iff its positive literal is in the state. Atoms that are absent, or present
//! only negatively, are false.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default upper bound on the number of atoms the truth-table oracle accepts.
pub const DEFAULT_TAUTOLOGY_BOUND: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormulaError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("atom `{0}` is not in the interpretation's universe")]
    MissingAtom(String),
    #[error("formula has {found} atoms, truth table bound is {max}")]
    TooManyAtoms { found: usize, max: usize },
    #[error("inconsistent literal set: contains both `{0}` and `-{0}`")]
    InconsistentInput(String),
}

/// Checks the identifier pattern `[A-Za-z_][A-Za-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A propositional variable.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Atom(Arc<str>);

impl std::hash::Hash for Atom {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state);
    }
}

// clones of one atom share their name, which makes most comparisons a
// pointer check
impl PartialEq for Atom {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Atom {}

impl PartialOrd for Atom {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Atom {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return std::cmp::Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl Atom {
    pub fn new(name: impl Into<String>) -> Result<Self, FormulaError> {
        let name = name.into();
        if is_identifier(&name) && name != "true" && name != "false" {
            Ok(Atom(name.into()))
        } else {
            Err(FormulaError::InvalidAtom(name))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Atom {
    type Error = FormulaError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        Atom::new(value)
    }
}

impl From<Atom> for String {
    fn from(a: Atom) -> String {
        a.0.to_string()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An atom or its negation. Text form is `a` / `-a`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Literal {
    pub atom: Atom,
    pub positive: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, positive: true }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, positive: false }
    }

    pub fn negate(&self) -> Self {
        Literal {
            atom: self.atom.clone(),
            positive: !self.positive,
        }
    }

    /// The literal as a formula: `a` or `!a`.
    pub fn to_formula(&self) -> Formula {
        let a = Formula::Atom(self.atom.clone());
        if self.positive {
            a
        } else {
            Formula::not(a)
        }
    }
}

impl FromStr for Literal {
    type Err = FormulaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.strip_prefix('-') {
            Some(rest) => Ok(Literal::neg(Atom::new(rest)?)),
            None => Ok(Literal::pos(Atom::new(s)?)),
        }
    }
}

impl TryFrom<String> for Literal {
    type Error = FormulaError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Literal> for String {
    fn from(l: Literal) -> String {
        l.to_string()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "{}", self.atom)
        } else {
            write!(f, "-{}", self.atom)
        }
    }
}

/// A consistent set of literals: never both `l` and `-l`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    /// sorted, no duplicates
    literals: Vec<Literal>,
}

impl State {
    pub fn empty() -> Self {
        State::default()
    }

    pub fn new(literals: impl IntoIterator<Item = Literal>) -> Result<Self, FormulaError> {
        let mut literals: Vec<Literal> = literals.into_iter().collect();
        literals.sort();
        literals.dedup();
        // `-a` sorts right before `a`
        if let Some(w) = literals.windows(2).find(|w| w[0].atom == w[1].atom) {
            return Err(FormulaError::InconsistentInput(w[0].atom.to_string()));
        }
        Ok(State { literals })
    }

    /// Parses `["a", "-b"]`-style literal strings.
    pub fn parse<S: AsRef<str>>(items: &[S]) -> Result<Self, FormulaError> {
        let lits = items
            .iter()
            .map(|s| s.as_ref().parse::<Literal>())
            .collect::<Result<Vec<_>, _>>()?;
        State::new(lits)
    }

    pub fn literals(&self) -> impl Iterator<Item = &Literal> {
        self.literals.iter()
    }

    pub fn contains(&self, l: &Literal) -> bool {
        self.literals.binary_search(l).is_ok()
    }

    /// True iff the positive literal of `atom` is present.
    pub fn holds(&self, atom: &Atom) -> bool {
        self.find(atom).is_some_and(|l| l.positive)
    }

    /// True iff the state mentions `atom` with either polarity.
    pub fn decides(&self, atom: &Atom) -> bool {
        self.find(atom).is_some()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.literals.iter().map(|l| l.atom.clone()).collect()
    }

    /// The literals as `a` / `-a` strings, in set order.
    pub fn to_strings(&self) -> Vec<String> {
        self.literals
            .iter()
            .map(|l| {
                let name = l.atom.name();
                let mut text = String::with_capacity(name.len() + 1);
                if !l.positive {
                    text.push('-');
                }
                text.push_str(name);
                text
            })
            .collect()
    }

    /// The literal on `atom`, if any.
    fn find(&self, atom: &Atom) -> Option<&Literal> {
        let i = self.literals.partition_point(|l| l.atom < *atom);
        self.literals.get(i).filter(|l| l.atom == *atom)
    }

    /// `self ⊕ annotation`: incoming literals replace their negations.
    pub fn update(&self, annotation: &State) -> State {
        // merge of two sorted lists, keyed by atom, annotation wins
        let (a, b) = (&self.literals, &annotation.literals);
        let mut literals = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].atom.cmp(&b[j].atom) {
                std::cmp::Ordering::Less => {
                    literals.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    literals.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    literals.push(b[j].clone());
                    i += 1;
                    j += 1;
                }
            }
        }
        literals.extend_from_slice(&a[i..]);
        literals.extend_from_slice(&b[j..]);
        State { literals }
    }

    /// Maps every atom of `universe` to whether its positive literal is present.
    pub fn closed_world(&self, universe: &BTreeSet<Atom>) -> Interpretation {
        Interpretation::new(universe.iter().map(|a| (a.clone(), self.holds(a))))
    }
}

impl fmt::Display for State {
    /// Renders as `{a, ¬b}`, or `∅` when empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("∅");
        }
        f.write_str("{")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            if l.positive {
                write!(f, "{}", l.atom)?;
            } else {
                write!(f, "¬{}", l.atom)?;
            }
        }
        f.write_str("}")
    }
}

/// Checked form of [`State::update`] for callers holding raw literal sets.
pub fn update(s1: &BTreeSet<Literal>, s2: &BTreeSet<Literal>) -> Result<State, FormulaError> {
    let s1 = State::new(s1.iter().cloned())?;
    let s2 = State::new(s2.iter().cloned())?;
    Ok(s1.update(&s2))
}

/// A total assignment over a declared atom universe.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interpretation {
    assignment: BTreeMap<Atom, bool>,
}

impl Interpretation {
    pub fn new(pairs: impl IntoIterator<Item = (Atom, bool)>) -> Self {
        Interpretation {
            assignment: pairs.into_iter().collect(),
        }
    }

    pub fn get(&self, atom: &Atom) -> Option<bool> {
        self.assignment.get(atom).copied()
    }

    pub fn universe(&self) -> impl Iterator<Item = &Atom> {
        self.assignment.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Atom, bool)> {
        self.assignment.iter().map(|(a, v)| (a, *v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(Atom),
    Not(Arc<Formula>),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    True,
    False,
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Atom::new(name).expect("valid atom name"))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Arc::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
            Formula::True | Formula::False => {}
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::True | Formula::False => 0,
            Formula::Not(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Closed-world satisfaction by a process state.
    pub fn eval(&self, s: &State) -> bool {
        match self {
            Formula::Atom(a) => s.holds(a),
            Formula::Not(f) => !f.eval(s),
            Formula::And(a, b) => a.eval(s) && b.eval(s),
            Formula::Or(a, b) => a.eval(s) || b.eval(s),
            Formula::Implies(a, b) => !a.eval(s) || b.eval(s),
            Formula::True => true,
            Formula::False => false,
        }
    }

    /// Classical evaluation under a total interpretation.
    pub fn eval_under(&self, i: &Interpretation) -> Result<bool, FormulaError> {
        Ok(match self {
            Formula::Atom(a) => i
                .get(a)
                .ok_or_else(|| FormulaError::MissingAtom(a.to_string()))?,
            Formula::Not(f) => !f.eval_under(i)?,
            Formula::And(a, b) => a.eval_under(i)? & b.eval_under(i)?,
            Formula::Or(a, b) => a.eval_under(i)? | b.eval_under(i)?,
            Formula::Implies(a, b) => !a.eval_under(i)? | b.eval_under(i)?,
            Formula::True => true,
            Formula::False => false,
        })
    }

    /// True iff the formula is an atom or a negated atom.
    pub fn is_literal(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(_)),
            _ => false,
        }
    }

    /// The literal this formula denotes, when [`Formula::is_literal`] holds.
    pub fn as_literal(&self) -> Option<Literal> {
        match self {
            Formula::Atom(a) => Some(Literal::pos(a.clone())),
            Formula::Not(f) => match &**f {
                Formula::Atom(a) => Some(Literal::neg(a.clone())),
                _ => None,
            },
            _ => None,
        }
    }

    /// Negation normal form: implications expanded, negations pushed to atoms.
    pub fn nnf(&self) -> Formula {
        self.nnf_polarity(true)
    }

    fn nnf_polarity(&self, positive: bool) -> Formula {
        match (self, positive) {
            (Formula::Atom(_), true) => self.clone(),
            (Formula::Atom(_), false) => Formula::not(self.clone()),
            (Formula::True, true) | (Formula::False, false) => Formula::True,
            (Formula::True, false) | (Formula::False, true) => Formula::False,
            (Formula::Not(f), p) => f.nnf_polarity(!p),
            (Formula::And(a, b), true) => Formula::and(a.nnf_polarity(true), b.nnf_polarity(true)),
            (Formula::And(a, b), false) => {
                Formula::or(a.nnf_polarity(false), b.nnf_polarity(false))
            }
            (Formula::Or(a, b), true) => Formula::or(a.nnf_polarity(true), b.nnf_polarity(true)),
            (Formula::Or(a, b), false) => {
                Formula::and(a.nnf_polarity(false), b.nnf_polarity(false))
            }
            (Formula::Implies(a, b), true) => {
                Formula::or(a.nnf_polarity(false), b.nnf_polarity(true))
            }
            (Formula::Implies(a, b), false) => {
                Formula::and(a.nnf_polarity(true), b.nnf_polarity(false))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Implies(..) => 0,
            Formula::Or(..) => 1,
            Formula::And(..) => 2,
            _ => 3,
        }
    }
}

impl fmt::Display for Formula {
    /// Prints in the input grammar with the minimum parentheses needed to
    /// parse back to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(out: &mut fmt::Formatter<'_>, c: &Formula, min: u8) -> fmt::Result {
            if c.precedence() < min {
                write!(out, "({c})")
            } else {
                write!(out, "{c}")
            }
        }
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::True => f.write_str("true"),
            Formula::False => f.write_str("false"),
            Formula::Not(g) => {
                f.write_str("!")?;
                child(f, g, 3)
            }
            // `&` and `|` chains are left-associative
            Formula::And(a, b) => {
                child(f, a, 2)?;
                f.write_str(" & ")?;
                child(f, b, 3)
            }
            Formula::Or(a, b) => {
                child(f, a, 1)?;
                f.write_str(" | ")?;
                child(f, b, 2)
            }
            // `->` is right-associative
            Formula::Implies(a, b) => {
                child(f, a, 1)?;
                f.write_str(" -> ")?;
                child(f, b, 0)
            }
        }
    }
}

impl FromStr for Formula {
    type Err = FormulaError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_formula(s)
    }
}

/// Parses a formula. Precedence is `!` > `&` > `|` > `->`; `->` associates
/// to the right.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut p = Parser {
        src: text,
        pos: 0,
        atoms: Vec::new(),
    };
    let f = p.implication()?;
    p.skip_ws();
    if p.pos < text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    /// atoms seen so far, so repeated names share one allocation
    atoms: Vec<Atom>,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> FormulaError {
        FormulaError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula, FormulaError> {
        let lhs = self.disjunction()?;
        if self.eat("->") {
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut f = self.conjunction()?;
        while self.eat("|") {
            f = Formula::or(f, self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula, FormulaError> {
        let mut f = self.unary()?;
        while self.eat("&") {
            f = Formula::and(f, self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat("!") {
            return Ok(Formula::not(self.unary()?));
        }
        if self.eat("(") {
            let f = self.implication()?;
            if !self.eat(")") {
                return Err(self.error("expected `)`"));
            }
            return Ok(f);
        }
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let len = rest
            .char_indices()
            .find(|&(i, c)| {
                !(c.is_ascii_alphanumeric() || c == '_') || (i == 0 && c.is_ascii_digit())
            })
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return Err(if rest.is_empty() {
                self.error("unexpected end of input")
            } else {
                self.error("expected atom, constant, `!` or `(`")
            });
        }
        let word = &rest[..len];
        self.pos += len;
        Ok(match word {
            "true" => Formula::True,
            "false" => Formula::False,
            _ => Formula::Atom(match self.atoms.iter().find(|a| &*a.0 == word) {
                Some(a) => a.clone(),
                None => {
                    let a = Atom(word.into());
                    self.atoms.push(a.clone());
                    a
                }
            }),
        })
    }
}

/// Enumerates every interpretation over `atoms(f)` and reports whether `f`
/// holds in all of them.
pub fn tautology_truth_table(f: &Formula) -> Result<bool, FormulaError> {
    tautology_truth_table_bounded(f, DEFAULT_TAUTOLOGY_BOUND)
}

pub fn tautology_truth_table_bounded(f: &Formula, max_atoms: usize) -> Result<bool, FormulaError> {
    let atoms: Vec<Atom> = f.atoms().into_iter().collect();
    if atoms.len() > max_atoms {
        return Err(FormulaError::TooManyAtoms {
            found: atoms.len(),
            max: max_atoms,
        });
    }
    for row in 0u64..(1u64 << atoms.len()) {
        let i = Interpretation::new(
            atoms
                .iter()
                .enumerate()
                .map(|(k, a)| (a.clone(), row >> k & 1 == 1)),
        );
        if !f.eval_under(&i)? {
            return Ok(false);
        }
    }
    Ok(true)
}
