//! Workflow-net compilation of block trees, the firing rule, and exhaustive
//! enumeration of executions.
//!
//! SEQ chains children through shared places, XOR gives every branch the
//! same entry and exit place, and AND adds a silent fork and join transition
//! with one place per branch on each side. Silent transitions carry no
//! annotation and never appear in an [`Execution`].

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use smallvec::{smallvec, SmallVec};

use crate::model::{Model, ModelError, ProcessBlock, Task};
use crate::trace::Execution;

/// Default cap on the number of executions enumerated.
pub const DEFAULT_EXECUTION_CAP: u64 = 1 << 20;

pub type PlaceId = usize;
pub type TransitionId = usize;

/// Pre- or post-set of a transition; only AND blocks have more than one place.
pub type Places = SmallVec<[PlaceId; 2]>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub task: Arc<Task>,
    /// Index into [`Model::tasks`] for visible transitions, `None` for fork/join.
    pub model_task: Option<usize>,
    pub pre: Places,
    pub post: Places,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.model_task.is_none()
    }

    pub fn id(&self) -> &str {
        &self.task.id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NetArc {
    PlaceToTransition(PlaceId, TransitionId),
    TransitionToPlace(TransitionId, PlaceId),
}

/// Token counts per place, inline for small nets.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Marking(SmallVec<[u32; 16]>);

impl Marking {
    pub fn tokens(&self, p: PlaceId) -> u32 {
        self.0[p]
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn max_tokens(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct WfNet {
    /// places are `i`, `o`, `p1`, `p2`, ... by index
    places: usize,
    transitions: Vec<Transition>,
    source: PlaceId,
    sink: PlaceId,
    /// transitions with `p` in their pre-set
    consumers: Adjacency,
    /// transitions with `p` in their post-set
    producers: Adjacency,
    /// visible transitions sorted by task id
    by_id: Vec<TransitionId>,
    /// silent transitions whose pre-set places have no other consumer
    unconflicted: Vec<TransitionId>,
    /// places fed by some silent transition
    forked: Vec<bool>,
}

/// Per-place transition lists, stored flat.
#[derive(Debug, Clone)]
struct Adjacency {
    /// transitions of place `p` are `items[offsets[p]..offsets[p + 1]]`
    offsets: Vec<usize>,
    items: Vec<TransitionId>,
}

impl Adjacency {
    fn new(places: usize, transitions: &[Transition], side: impl Fn(&Transition) -> &Places) -> Adjacency {
        let mut offsets = vec![0; places + 1];
        for tr in transitions {
            side(tr).iter().for_each(|&p| offsets[p + 1] += 1);
        }
        for p in 0..places {
            offsets[p + 1] += offsets[p];
        }
        let mut fill = offsets.clone();
        let mut items = vec![0; offsets[places]];
        for (t, tr) in transitions.iter().enumerate() {
            for &p in side(tr) {
                items[fill[p]] = t;
                fill[p] += 1;
            }
        }
        Adjacency { offsets, items }
    }

    fn of(&self, p: PlaceId) -> &[TransitionId] {
        &self.items[self.offsets[p]..self.offsets[p + 1]]
    }
}

struct Builder {
    places: usize,
    /// tasks are met in the same depth-first order as [`Model::tasks`]
    next_task: usize,
    transitions: Vec<Transition>,
    silent: usize,
}

impl Builder {
    fn place(&mut self) -> PlaceId {
        self.places += 1;
        self.places - 1
    }

    fn compile(&mut self, model: &Model, block: &ProcessBlock, entry: PlaceId, exit: PlaceId) {
        match block {
            ProcessBlock::Task(t) => {
                let idx = self.next_task;
                self.next_task += 1;
                debug_assert_eq!(model.task(idx).id, t.id);
                self.transitions.push(Transition {
                    task: model.task(idx).clone(),
                    model_task: Some(idx),
                    pre: smallvec![entry],
                    post: smallvec![exit],
                });
            }
            ProcessBlock::Seq(children) => {
                let mut from = entry;
                for (k, c) in children.iter().enumerate() {
                    let to = if k + 1 == children.len() { exit } else { self.place() };
                    self.compile(model, c, from, to);
                    from = to;
                }
            }
            ProcessBlock::Xor(children) => {
                for c in children {
                    self.compile(model, c, entry, exit);
                }
            }
            ProcessBlock::And(children) => {
                self.silent += 1;
                let n = self.silent;
                let fork = self.transitions.len();
                self.transitions.push(Transition {
                    task: Arc::new(Task::unannotated(format!("#fork{n}"))),
                    model_task: None,
                    pre: smallvec![entry],
                    post: Places::new(),
                });
                let mut outs = Places::new();
                for c in children {
                    let b_in = self.place();
                    let b_out = self.place();
                    self.transitions[fork].post.push(b_in);
                    self.compile(model, c, b_in, b_out);
                    outs.push(b_out);
                }
                self.transitions.push(Transition {
                    task: Arc::new(Task::unannotated(format!("#join{n}"))),
                    model_task: None,
                    pre: outs,
                    post: smallvec![exit],
                });
            }
        }
    }
}

impl WfNet {
    /// Compiles a validated model into its workflow net.
    pub fn compile(model: &Model) -> WfNet {
        let mut b = Builder {
            places: 2,
            next_task: 0,
            transitions: Vec::with_capacity(model.tasks().len() + 2),
            silent: 0,
        };
        b.compile(model, model.root(), 0, 1);
        let n = b.places;
        let consumers = Adjacency::new(n, &b.transitions, |tr| &tr.pre);
        let producers = Adjacency::new(n, &b.transitions, |tr| &tr.post);
        let mut of_task = vec![0; model.tasks().len()];
        for (t, tr) in b.transitions.iter().enumerate() {
            if let Some(i) = tr.model_task {
                of_task[i] = t;
            }
        }
        let by_id = model.ids_sorted().iter().map(|&i| of_task[i]).collect();
        let unconflicted = (0..b.transitions.len())
            .filter(|&t| {
                let tr = &b.transitions[t];
                tr.is_silent() && tr.pre.iter().all(|&p| consumers.of(p).len() == 1)
            })
            .collect();
        let forked = (0..n)
            .map(|p| producers.of(p).iter().any(|&t| b.transitions[t].is_silent()))
            .collect();
        WfNet {
            places: b.places,
            transitions: b.transitions,
            source: 0,
            sink: 1,
            consumers,
            producers,
            by_id,
            unconflicted,
            forked,
        }
    }

    pub fn place_count(&self) -> usize {
        self.places
    }

    pub fn place_name(&self, p: PlaceId) -> String {
        match p {
            0 => "i".into(),
            1 => "o".into(),
            _ => format!("p{}", p - 1),
        }
    }

    pub fn places(&self) -> Vec<String> {
        (0..self.places).map(|p| self.place_name(p)).collect()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn transition(&self, t: TransitionId) -> &Transition {
        &self.transitions[t]
    }

    pub fn source(&self) -> PlaceId {
        self.source
    }

    pub fn sink(&self) -> PlaceId {
        self.sink
    }

    pub fn transition_by_id(&self, id: &str) -> Option<TransitionId> {
        self.transitions.iter().position(|t| t.id() == id)
    }

    pub fn arcs(&self) -> Vec<NetArc> {
        let mut arcs = Vec::new();
        for (t, tr) in self.transitions.iter().enumerate() {
            arcs.extend(tr.pre.iter().map(|&p| NetArc::PlaceToTransition(p, t)));
            arcs.extend(tr.post.iter().map(|&p| NetArc::TransitionToPlace(t, p)));
        }
        arcs.sort();
        arcs
    }

    /// One token on the source place.
    pub fn initial_marking(&self) -> Marking {
        let mut m = self.empty_marking();
        m.0[self.source] = 1;
        m
    }

    pub fn empty_marking(&self) -> Marking {
        Marking(smallvec![0; self.places])
    }

    pub fn is_enabled(&self, m: &Marking, t: TransitionId) -> bool {
        self.transitions[t].pre.iter().all(|&p| m.0[p] > 0)
    }

    /// Transitions whose whole pre-set is marked, in declaration order.
    pub fn enabled(&self, m: &Marking) -> Vec<TransitionId> {
        (0..self.transitions.len())
            .filter(|&t| self.is_enabled(m, t))
            .collect()
    }

    /// Consumes one token from each pre-set place and produces one on each
    /// post-set place.
    pub fn fire(&self, m: &Marking, t: TransitionId) -> Result<Marking, ModelError> {
        if !self.is_enabled(m, t) {
            return Err(ModelError::NotEnabled(self.transitions[t].id().to_string()));
        }
        let mut next = m.clone();
        self.fire_in_place(&mut next, t);
        Ok(next)
    }

    fn fire_in_place(&self, m: &mut Marking, t: TransitionId) {
        let tr = &self.transitions[t];
        tr.pre.iter().for_each(|&p| m.0[p] -= 1);
        tr.post.iter().for_each(|&p| m.0[p] += 1);
    }

    /// Fires every enabled silent transition that is not in conflict with
    /// another transition, until none remains.
    fn settle(&self, m: &mut Marking) {
        loop {
            let next = self.unconflicted.iter().copied().find(|&t| self.is_enabled(m, t));
            match next {
                Some(t) => self.fire_in_place(m, t),
                None => return,
            }
        }
    }

    /// Marks `p` by firing the (conflicting) forks above it, if possible.
    fn mark_lazily(&self, m: &mut Marking, p: PlaceId) -> bool {
        if m.0[p] > 0 {
            return true;
        }
        for &f in self.producers.of(p) {
            let fork = &self.transitions[f];
            if fork.is_silent() && fork.pre.len() == 1 && self.mark_lazily(m, fork.pre[0]) {
                self.fire_in_place(m, f);
                return true;
            }
        }
        false
    }

    /// Read-only check for [`WfNet::mark_lazily`].
    fn can_mark(&self, m: &Marking, p: PlaceId) -> bool {
        m.0[p] > 0
            || self.forked[p] && self.producers.of(p).iter().any(|&f| {
                let fork = &self.transitions[f];
                fork.is_silent() && fork.pre.len() == 1 && self.can_mark(m, fork.pre[0])
            })
    }

    /// Fires visible transition `t` from a settled marking, opening any AND
    /// blocks it sits in, then settles again.
    fn step_visible(&self, m: &Marking, t: TransitionId) -> Option<Marking> {
        let tr = &self.transitions[t];
        let marked = tr.pre.iter().all(|&p| m.0[p] > 0);
        if !marked && !tr.pre.iter().all(|&p| self.can_mark(m, p)) {
            return None;
        }
        let mut next = m.clone();
        if !marked && !tr.pre.iter().all(|&p| self.mark_lazily(&mut next, p)) {
            return None;
        }
        self.fire_in_place(&mut next, t);
        self.settle(&mut next);
        Some(next)
    }

    fn settled_initial(&self) -> Marking {
        let mut m = self.initial_marking();
        self.settle(&mut m);
        m
    }

    /// Replays an execution of visible tasks (model task indices), inserting
    /// silent transitions as needed. Returns every marking visited.
    pub fn replay(&self, steps: &[usize]) -> Result<Vec<Marking>, ModelError> {
        let mut m = self.settled_initial();
        let mut seen = vec![m.clone()];
        for &task in steps {
            let t = self
                .transitions
                .iter()
                .position(|tr| tr.model_task == Some(task))
                .ok_or_else(|| ModelError::InvalidExecution(format!("unknown task #{task}")))?;
            m = self
                .step_visible(&m, t)
                .ok_or_else(|| ModelError::NotEnabled(self.transitions[t].id().to_string()))?;
            seen.push(m.clone());
        }
        if !self.enabled(&m).is_empty() {
            return Err(ModelError::InvalidExecution(
                "transitions are still enabled at the end".into(),
            ));
        }
        Ok(seen)
    }

    /// Structural workflow-net conditions: unique source and sink, every
    /// other place on some path, strongly connected once `o` feeds back to `i`.
    pub fn check_workflow(&self) -> Result<(), String> {
        let n = self.places;
        for p in 0..n {
            let no_pre = self.producers.of(p).is_empty();
            let no_post = self.consumers.of(p).is_empty();
            if (p == self.source) != no_pre {
                return Err(format!("place {} breaks the source condition", self.place_name(p)));
            }
            if (p == self.sink) != no_post {
                return Err(format!("place {} breaks the sink condition", self.place_name(p)));
            }
        }
        // nodes: places 0..n, transitions n..n+t, plus the feedback o -> i
        let total = n + self.transitions.len();
        let mut fwd = vec![Vec::new(); total];
        let mut bwd = vec![Vec::new(); total];
        for arc in self.arcs() {
            let (a, b) = match arc {
                NetArc::PlaceToTransition(p, t) => (p, n + t),
                NetArc::TransitionToPlace(t, p) => (n + t, p),
            };
            fwd[a].push(b);
            bwd[b].push(a);
        }
        fwd[self.sink].push(self.source);
        bwd[self.source].push(self.sink);
        for adj in [&fwd, &bwd] {
            let mut seen = vec![false; total];
            let mut queue = VecDeque::from([self.source]);
            seen[self.source] = true;
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x] {
                    if !seen[y] {
                        seen[y] = true;
                        queue.push_back(y);
                    }
                }
            }
            if seen.iter().any(|s| !s) {
                return Err("net is not strongly connected".into());
            }
        }
        Ok(())
    }

    /// Lazily enumerates all executions, depth first, enabled tasks tried in
    /// task-id order.
    pub fn executions(&self) -> Executions<'_> {
        let root = self.frame(self.settled_initial());
        Executions {
            net: self,
            stack: vec![root],
            path: Vec::new(),
        }
    }

    fn frame(&self, m: Marking) -> Frame {
        Frame { marking: m, next: 0 }
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// A settled marking and the position in task-id order of the next
/// transition to try from it.
struct Frame {
    marking: Marking,
    next: usize,
}

pub struct Executions<'a> {
    net: &'a WfNet,
    stack: Vec<Frame>,
    path: Vec<usize>,
}

impl Iterator for Executions<'_> {
    type Item = Execution;

    fn next(&mut self) -> Option<Execution> {
        let net = self.net;
        loop {
            let top = self.stack.last_mut()?;
            let step = net.by_id[top.next..]
                .iter()
                .enumerate()
                .find_map(|(k, &t)| net.step_visible(&top.marking, t).map(|m| (k, t, m)));
            let Some((k, t, m)) = step else {
                // a marking that never had a successor ends an execution
                let leaf = top.next == 0 && !self.path.is_empty();
                self.stack.pop();
                let done = leaf.then(|| Execution::new(self.path.clone()));
                self.path.pop();
                match done {
                    Some(e) => return Some(e),
                    None => continue,
                }
            };
            top.next += k + 1;
            self.path.push(net.transitions[t].model_task.expect("visible"));
            self.stack.push(net.frame(m));
        }
    }
}

/// Enumerates every execution of `model`, refusing models whose analytic
/// execution count exceeds `cap`.
pub fn enumerate_executions(model: &Model, cap: u64) -> Result<Vec<Execution>, ModelError> {
    check_cap(model, cap)?;
    let net = WfNet::compile(model);
    Ok(net.executions().collect())
}

pub(crate) fn check_cap(model: &Model, cap: u64) -> Result<(), ModelError> {
    if model.root().count_executions_u64().is_some_and(|n| n <= cap) {
        return Ok(());
    }
    let count = model.count_executions();
    if count > BigUint::from(cap) {
        return Err(ModelError::ExecutionCapExceeded { count, cap });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::figure_example;
    use ProcessBlock as B;

    fn ids(model: &Model, e: &Execution) -> Vec<String> {
        e.ids(model).into_iter().map(String::from).collect()
    }

    #[test]
    fn single_task_net_shape() {
        let m = Model::validate("m", B::task("t", &[])).unwrap();
        let net = WfNet::compile(&m);
        assert_eq!(net.places(), ["i", "o", "p1", "p2"]);
        let shape: Vec<_> = net
            .transitions()
            .iter()
            .map(|t| (t.id().to_string(), t.pre.to_vec(), t.post.to_vec()))
            .collect();
        assert_eq!(
            shape,
            [
                ("start".to_string(), vec![0], vec![2]),
                ("t".to_string(), vec![2], vec![3]),
                ("end".to_string(), vec![3], vec![1]),
            ]
        );
        net.check_workflow().unwrap();
    }

    #[test]
    fn xor_shares_entry_and_exit() {
        let m = Model::validate("m", B::Xor(vec![B::task("t1", &[]), B::task("t2", &[])])).unwrap();
        let net = WfNet::compile(&m);
        let t1 = net.transition(net.transition_by_id("t1").unwrap());
        let t2 = net.transition(net.transition_by_id("t2").unwrap());
        assert_eq!(t1.pre, t2.pre);
        assert_eq!(t1.post, t2.post);
        assert_ne!(t1.pre, t1.post);
        net.check_workflow().unwrap();
    }

    #[test]
    fn enabled_and_fire() {
        let m = figure_example();
        let net = WfNet::compile(&m);
        let m0 = net.initial_marking();
        let start = net.transition_by_id("start").unwrap();
        assert_eq!(net.enabled(&m0), vec![start]);
        let m1 = net.fire(&m0, start).unwrap();
        assert_eq!(m1.tokens(net.source()), 0);
        let en = net.enabled(&m1);
        assert_eq!(en.len(), 1);
        assert_eq!(net.transition(en[0]).id(), "#fork1");
        assert!(net.enabled(&net.empty_marking()).is_empty());
        let t4 = net.transition_by_id("t4").unwrap();
        assert_eq!(
            net.fire(&m1, t4),
            Err(ModelError::NotEnabled("t4".into()))
        );
    }

    #[test]
    fn figure_executions_in_order() {
        let m = figure_example();
        let ex = enumerate_executions(&m, DEFAULT_EXECUTION_CAP).unwrap();
        let got: Vec<_> = ex.iter().map(|e| ids(&m, e).join(",")).collect();
        assert_eq!(
            got,
            [
                "start,t1,t3,t4,end",
                "start,t2,t3,t4,end",
                "start,t3,t1,t4,end",
                "start,t3,t2,t4,end",
            ]
        );
    }

    #[test]
    fn replay_row_one_ends_on_sink() {
        let m = figure_example();
        let net = WfNet::compile(&m);
        let steps: Vec<usize> = ["start", "t1", "t3", "t4", "end"]
            .iter()
            .map(|id| m.task_index(id).unwrap())
            .collect();
        let markings = net.replay(&steps).unwrap();
        let last = markings.last().unwrap();
        assert_eq!(last.tokens(net.sink()), 1);
        assert_eq!(last.total(), 1);
        // skipping t3 leaves the join waiting
        let bad: Vec<usize> = ["start", "t1", "t4"].iter().map(|id| m.task_index(id).unwrap()).collect();
        assert!(net.replay(&bad).is_err());
    }

    #[test]
    fn interleavings_of_seq_and_task() {
        let body = B::And(vec![B::Seq(vec![B::task("a", &[]), B::task("b", &[])]), B::task("c", &[])]);
        let m = Model::validate("m", body).unwrap();
        let ex = enumerate_executions(&m, 100).unwrap();
        assert_eq!(ex.len(), 3);
    }

    #[test]
    fn and_under_xor_has_no_duplicates() {
        // the inner fork conflicts with `c`, so it must only fire on demand
        let body = B::And(vec![
            B::Xor(vec![
                B::And(vec![B::task("a", &[]), B::task("b", &[])]),
                B::task("c", &[]),
            ]),
            B::task("d", &[]),
        ]);
        let m = Model::validate("m", body).unwrap();
        let ex = enumerate_executions(&m, 100).unwrap();
        let mut got: Vec<_> = ex.iter().map(|e| ids(&m, e).join(",")).collect();
        assert_eq!(got.len(), 8);
        got.sort();
        got.dedup();
        assert_eq!(got.len(), 8);
        assert_eq!(m.count_executions(), BigUint::from(8u32));
        WfNet::compile(&m).check_workflow().unwrap();
    }

    #[test]
    fn cap_is_enforced() {
        let m = figure_example();
        assert!(matches!(
            enumerate_executions(&m, 3),
            Err(ModelError::ExecutionCapExceeded { cap: 3, .. })
        ));
    }
}
