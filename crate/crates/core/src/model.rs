//! Structured acyclic process models as block trees.
//!
//! A [`Model`] wraps a validated root block between the unannotated `start`
//! and `end` tasks. Composite blocks always have at least two children.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::formula::{is_identifier, FormulaError, Literal, State};

pub const START: &str = "start";
pub const END: &str = "end";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("task id `{0}` appears more than once")]
    DuplicateTaskId(String),
    #[error("task id `{0}` is not an identifier")]
    InvalidTaskId(String),
    #[error("task `{task}` has an invalid literal: {message}")]
    InvalidLiteral { task: String, message: String },
    #[error("{0} block has no children")]
    EmptyBlock(&'static str),
    #[error("task `{task}` has an inconsistent annotation on atom `{atom}`")]
    InconsistentAnnotation { task: String, atom: String },
    #[error("transition `{0}` is not enabled")]
    NotEnabled(String),
    #[error("model has {count} executions, above the cap of {cap}")]
    ExecutionCapExceeded { count: BigUint, cap: u64 },
    #[error("not an execution of the model: {0}")]
    InvalidExecution(String),
}

/// A task (visible transition) with its annotation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Task {
    pub id: String,
    pub annotation: State,
}

impl Task {
    pub fn new(id: impl Into<String>, annotation: State) -> Self {
        Task {
            id: id.into(),
            annotation,
        }
    }

    /// Builds a task from `a` / `-a` strings.
    pub fn parse(id: impl Into<String>, ann: &[&str]) -> Result<Self, ModelError> {
        let id = id.into();
        let bad = |e: FormulaError| match e {
            FormulaError::InconsistentInput(atom) => ModelError::InconsistentAnnotation {
                task: id.clone(),
                atom,
            },
            other => ModelError::InvalidLiteral {
                task: id.clone(),
                message: other.to_string(),
            },
        };
        let lits = ann
            .iter()
            .map(|s| s.parse::<Literal>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(&bad)?;
        let annotation = State::new(lits).map_err(&bad)?;
        Ok(Task { id, annotation })
    }

    pub fn unannotated(id: impl Into<String>) -> Self {
        Task::new(id, State::empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProcessBlock {
    Task(Arc<Task>),
    Seq(Vec<ProcessBlock>),
    Xor(Vec<ProcessBlock>),
    And(Vec<ProcessBlock>),
}

impl ProcessBlock {
    pub fn task(id: &str, ann: &[&str]) -> ProcessBlock {
        ProcessBlock::Task(Arc::new(Task::parse(id, ann).expect("valid task")))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProcessBlock::Task(_) => "task",
            ProcessBlock::Seq(_) => "seq",
            ProcessBlock::Xor(_) => "xor",
            ProcessBlock::And(_) => "and",
        }
    }

    pub fn children(&self) -> &[ProcessBlock] {
        match self {
            ProcessBlock::Task(_) => &[],
            ProcessBlock::Seq(c) | ProcessBlock::Xor(c) | ProcessBlock::And(c) => c,
        }
    }

    /// Tasks in depth-first declaration order.
    pub fn tasks(&self) -> Vec<&Arc<Task>> {
        let mut out = Vec::new();
        self.collect_tasks(&mut out);
        out
    }

    fn collect_tasks<'a>(&'a self, out: &mut Vec<&'a Arc<Task>>) {
        match self {
            ProcessBlock::Task(t) => out.push(t),
            _ => self.children().iter().for_each(|c| c.collect_tasks(out)),
        }
    }

    fn collect_arcs(&self, out: &mut Vec<Arc<Task>>) {
        match self {
            ProcessBlock::Task(t) => out.push(t.clone()),
            _ => self.children().iter().for_each(|c| c.collect_arcs(out)),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(ProcessBlock::size).sum::<usize>()
    }

    /// Drops 1-child composites recursively; rejects empty ones.
    fn normalise(mut self) -> Result<ProcessBlock, ModelError> {
        self.normalise_in_place()?;
        Ok(self)
    }

    fn normalise_in_place(&mut self) -> Result<(), ModelError> {
        let name = self.kind_name();
        let children = match self {
            ProcessBlock::Task(_) => return Ok(()),
            ProcessBlock::Seq(c) | ProcessBlock::Xor(c) | ProcessBlock::And(c) => c,
        };
        if children.is_empty() {
            return Err(ModelError::EmptyBlock(name));
        }
        for c in children.iter_mut() {
            c.normalise_in_place()?;
        }
        if children.len() == 1 {
            *self = children.pop().expect("one child");
        }
        Ok(())
    }

    /// Number of distinct executions, counted analytically.
    pub fn count_executions(&self) -> BigUint {
        self.length_distribution().values().sum()
    }

    /// Execution count, or `None` once any intermediate value overflows `u64`.
    pub fn count_executions_u64(&self) -> Option<u64> {
        match self {
            ProcessBlock::Task(_) => Some(1),
            ProcessBlock::Seq(c) => c.iter().try_fold(1u64, |acc, c| acc.checked_mul(c.count_executions_u64()?)),
            ProcessBlock::Xor(c) => c.iter().try_fold(0u64, |acc, c| acc.checked_add(c.count_executions_u64()?)),
            // interleavings depend on branch lengths
            ProcessBlock::And(_) => {
                let dist = self.length_distribution_u64()?;
                dist.iter().try_fold(0u64, |acc, n| acc.checked_add(*n))
            }
        }
    }

    /// Like [`Self::length_distribution`], indexed by length, without big integers.
    fn length_distribution_u64(&self) -> Option<Vec<u64>> {
        match self {
            ProcessBlock::Task(_) => Some(vec![0, 1]),
            ProcessBlock::Seq(children) => children.iter().try_fold(vec![1], |acc, c| {
                combine_u64(&acc, &c.length_distribution_u64()?, |_, _| Some(1))
            }),
            ProcessBlock::Xor(children) => {
                let mut out: Vec<u64> = Vec::new();
                for c in children {
                    let d = c.length_distribution_u64()?;
                    if out.len() < d.len() {
                        out.resize(d.len(), 0);
                    }
                    for (o, n) in out.iter_mut().zip(d) {
                        *o = o.checked_add(n)?;
                    }
                }
                Some(out)
            }
            ProcessBlock::And(children) => children.iter().try_fold(vec![1], |acc, c| {
                combine_u64(&acc, &c.length_distribution_u64()?, binomial_u64)
            }),
        }
    }

    /// Execution count per execution length (visible tasks only).
    pub fn length_distribution(&self) -> BTreeMap<usize, BigUint> {
        match self {
            ProcessBlock::Task(_) => BTreeMap::from([(1, BigUint::one())]),
            ProcessBlock::Seq(children) => children.iter().fold(
                BTreeMap::from([(0, BigUint::one())]),
                |acc, c| combine(&acc, &c.length_distribution(), |_, _| BigUint::one()),
            ),
            ProcessBlock::Xor(children) => {
                let mut out: BTreeMap<usize, BigUint> = BTreeMap::new();
                for c in children {
                    for (len, n) in c.length_distribution() {
                        *out.entry(len).or_insert_with(BigUint::zero) += n;
                    }
                }
                out
            }
            // the multinomial over all branches is a product of binomials,
            // folded in one branch at a time
            ProcessBlock::And(children) => children.iter().fold(
                BTreeMap::from([(0, BigUint::one())]),
                |acc, c| combine(&acc, &c.length_distribution(), binomial),
            ),
        }
    }
}

fn combine(
    a: &BTreeMap<usize, BigUint>,
    b: &BTreeMap<usize, BigUint>,
    weight: impl Fn(usize, usize) -> BigUint,
) -> BTreeMap<usize, BigUint> {
    let mut out: BTreeMap<usize, BigUint> = BTreeMap::new();
    for (la, ca) in a {
        for (lb, cb) in b {
            *out.entry(la + lb).or_insert_with(BigUint::zero) += ca * cb * weight(*la, *lb);
        }
    }
    out
}

fn combine_u64(a: &[u64], b: &[u64], weight: impl Fn(usize, usize) -> Option<u64>) -> Option<Vec<u64>> {
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (la, ca) in a.iter().enumerate().filter(|(_, c)| **c > 0) {
        for (lb, cb) in b.iter().enumerate().filter(|(_, c)| **c > 0) {
            let n = ca.checked_mul(*cb)?.checked_mul(weight(la, lb)?)?;
            out[la + lb] = out[la + lb].checked_add(n)?;
        }
    }
    Some(out)
}

fn binomial_u64(a: usize, b: usize) -> Option<u64> {
    let (n, k) = ((a + b) as u64, a.min(b) as u64);
    let mut r = 1u64;
    for i in 0..k {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// `C(a + b, a)`
fn binomial(a: usize, b: usize) -> BigUint {
    let (n, k) = (a + b, a.min(b));
    let mut r = BigUint::one();
    for i in 0..k {
        r = r * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    r
}

/// A validated process model. `root` is always `Seq(start, body, end)`.
#[derive(Debug, Clone)]
pub struct Model {
    name: String,
    root: ProcessBlock,
    tasks: Vec<Arc<Task>>,
    /// task indices sorted by id
    by_id: Vec<usize>,
}

impl PartialEq for Model {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.root == other.root
    }
}

impl Model {
    /// Validates `body` and wraps it between `start` and `end`.
    pub fn validate(name: impl Into<String>, body: ProcessBlock) -> Result<Model, ModelError> {
        let body = body.normalise()?;
        let root = ProcessBlock::Seq(vec![
            ProcessBlock::Task(Arc::new(Task::unannotated(START))),
            body,
            ProcessBlock::Task(Arc::new(Task::unannotated(END))),
        ]);
        Model::from_root(name.into(), root)
    }

    /// Builds a model from an already-wrapped root.
    pub(crate) fn from_root(name: String, root: ProcessBlock) -> Result<Model, ModelError> {
        let mut tasks = Vec::with_capacity(root.size());
        root.collect_arcs(&mut tasks);
        if let Some(t) = tasks.iter().find(|t| !is_identifier(&t.id)) {
            return Err(ModelError::InvalidTaskId(t.id.clone()));
        }
        let mut by_id: Vec<usize> = (0..tasks.len()).collect();
        by_id.sort_by(|&a, &b| tasks[a].id.cmp(&tasks[b].id));
        if let Some(w) = by_id.windows(2).find(|w| tasks[w[0]].id == tasks[w[1]].id) {
            return Err(ModelError::DuplicateTaskId(tasks[w[0]].id.clone()));
        }
        Ok(Model {
            name,
            root,
            tasks,
            by_id,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn root(&self) -> &ProcessBlock {
        &self.root
    }

    /// The user-supplied block between `start` and `end`.
    pub fn body(&self) -> &ProcessBlock {
        &self.root.children()[1]
    }

    /// All tasks, `start` and `end` included, in declaration order.
    pub fn tasks(&self) -> &[Arc<Task>] {
        &self.tasks
    }

    pub fn task(&self, idx: usize) -> &Arc<Task> {
        &self.tasks[idx]
    }

    /// Task indices in id order.
    pub(crate) fn ids_sorted(&self) -> &[usize] {
        &self.by_id
    }

    pub fn task_index(&self, id: &str) -> Option<usize> {
        let k = self.by_id.binary_search_by(|&t| self.tasks[t].id.as_str().cmp(id)).ok()?;
        Some(self.by_id[k])
    }

    pub fn count_executions(&self) -> BigUint {
        self.root.count_executions()
    }
}

impl fmt::Display for ProcessBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProcessBlock::Task(t) if t.annotation.is_empty() => write!(f, "{}", t.id),
            ProcessBlock::Task(t) => write!(f, "{}{}", t.id, t.annotation),
            _ => {
                let name = match self {
                    ProcessBlock::Seq(_) => "SEQ",
                    ProcessBlock::Xor(_) => "XOR",
                    _ => "AND",
                };
                write!(f, "{name}(")?;
                for (i, c) in self.children().iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{c}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// The annotated example process: `SEQ(AND(XOR(t1, t2), t3), t4)`.
pub fn figure_example() -> Model {
    use ProcessBlock as B;
    let body = B::Seq(vec![
        B::And(vec![
            B::Xor(vec![B::task("t1", &["a"]), B::task("t2", &["b", "c"])]),
            B::task("t3", &["c", "d"]),
        ]),
        B::task("t4", &["-a"]),
    ]);
    Model::validate("fig3", body).expect("figure example is valid")
}
