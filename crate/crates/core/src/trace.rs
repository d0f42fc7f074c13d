//! Executions and the traces of process states they induce.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::formula::State;
use crate::model::{Model, Task};

/// A maximal firing sequence of visible tasks, as indices into
/// [`Model::tasks`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Execution {
    steps: Vec<usize>,
}

impl Execution {
    pub fn new(steps: Vec<usize>) -> Self {
        Execution { steps }
    }

    pub fn steps(&self) -> &[usize] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn contains(&self, task: usize) -> bool {
        self.steps.contains(&task)
    }

    pub fn ids<'m>(&self, model: &'m Model) -> Vec<&'m str> {
        self.steps.iter().map(|&t| model.task(t).id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub task: Arc<Task>,
    /// The process state holding after `task` executed.
    pub state: State,
}

/// An execution paired with its evolving process states.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    steps: Vec<TraceStep>,
}

impl Trace {
    /// Folds the state update over the tasks' annotations, starting from ∅.
    pub fn from_tasks(tasks: impl IntoIterator<Item = Arc<Task>>) -> Trace {
        let tasks = tasks.into_iter();
        let mut tr = Trace::with_capacity(tasks.size_hint().0);
        tasks.for_each(|t| tr.push(t));
        tr
    }

    pub(crate) fn with_capacity(n: usize) -> Trace {
        Trace {
            steps: Vec::with_capacity(n),
        }
    }

    /// Appends a step whose state updates the current last state.
    pub(crate) fn push(&mut self, task: Arc<Task>) {
        let state = match self.steps.last() {
            Some(prev) => prev.state.update(&task.annotation),
            None => State::empty().update(&task.annotation),
        };
        self.steps.push(TraceStep { task, state });
    }

    pub(crate) fn truncate(&mut self, len: usize) {
        self.steps.truncate(len);
    }

    pub fn steps(&self) -> &[TraceStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.steps.iter().map(|s| &s.state)
    }

    pub fn task_ids(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.task.id.as_str()).collect()
    }

    pub fn last_state(&self) -> Option<&State> {
        self.steps.last().map(|s| &s.state)
    }

    /// The execution column of the two-column trace table, e.g.
    /// `(start,t1,t3,t4,end)`.
    pub fn execution_cell(&self) -> String {
        format!("({})", self.task_ids().join(","))
    }

    /// The trace column, e.g. `((start, ∅), (t1, {a}), ...)`.
    pub fn trace_cell(&self) -> String {
        let mut out = String::from("(");
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "({}, {})", s.task.id, s.state);
        }
        out.push(')');
        out
    }

    /// One table row: execution and trace separated by ` | `.
    pub fn table_row(&self) -> String {
        format!("{} | {}", self.execution_cell(), self.trace_cell())
    }
}

/// The trace of execution `e` of `model`.
pub fn derive_trace(model: &Model, e: &Execution) -> Trace {
    Trace::from_tasks(e.steps().iter().map(|&t| model.task(t).clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{figure_example, ProcessBlock};

    fn exec(m: &Model, ids: &[&str]) -> Execution {
        Execution::new(ids.iter().map(|id| m.task_index(id).unwrap()).collect())
    }

    fn st(items: &[&str]) -> State {
        State::parse(items).unwrap()
    }

    #[test]
    fn row_one_states() {
        let m = figure_example();
        let tr = derive_trace(&m, &exec(&m, &["start", "t1", "t3", "t4", "end"]));
        let states: Vec<_> = tr.states().cloned().collect();
        assert_eq!(
            states,
            [
                State::empty(),
                st(&["a"]),
                st(&["a", "c", "d"]),
                st(&["-a", "c", "d"]),
                st(&["-a", "c", "d"]),
            ]
        );
        assert_eq!(
            tr.table_row(),
            "(start,t1,t3,t4,end) | ((start, ∅), (t1, {a}), (t3, {a, c, d}), (t4, {¬a, c, d}), (end, {¬a, c, d}))"
        );
    }

    #[test]
    fn second_execution_final_state() {
        let m = figure_example();
        let tr = derive_trace(&m, &exec(&m, &["start", "t2", "t3", "t4", "end"]));
        assert_eq!(tr.last_state(), Some(&st(&["-a", "b", "c", "d"])));
    }

    #[test]
    fn unannotated_states_stay_empty() {
        let m = Model::validate(
            "m",
            ProcessBlock::Seq(vec![ProcessBlock::task("x", &[]), ProcessBlock::task("y", &[])]),
        )
        .unwrap();
        let tr = derive_trace(&m, &exec(&m, &["start", "x", "y", "end"]));
        assert!(tr.states().all(State::is_empty));
    }
}
