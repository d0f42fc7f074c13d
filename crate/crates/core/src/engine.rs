//! Full, partial and non compliance of a model against a rule set.
//!
//! The brute engine walks the executions in the deterministic enumeration
//! order, in batches, checking each batch's traces on a rayon pool. Within a
//! batch the least index wins, so witnesses and `traces_examined` do not
//! depend on the number of workers.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use serde::{Deserialize, Serialize};

use crate::fastpath::check_fast;
use crate::formula::State;
use crate::model::{Model, ModelError};
use crate::net::{check_cap, WfNet, DEFAULT_EXECUTION_CAP};
use crate::obligation::{eval_obligation_with, EvalOptions, RuleSet};
use crate::trace::{derive_trace, Execution, Trace};
use crate::Error;

const BATCH: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Full,
    Partial,
    Non,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineKind {
    #[default]
    Brute,
    Fast,
}

macro_rules! lowercase_enum {
    ($ty:ty, $($variant:ident => $name:literal),+) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(Self::$variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    _ => Err(format!("unknown {}: `{s}`", stringify!($ty).to_lowercase())),
                }
            }
        }
    };
}

lowercase_enum!(Mode, Full => "full", Partial => "partial", Non => "non");
lowercase_enum!(EngineKind, Brute => "brute", Fast => "fast");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    /// Worker threads for the brute engine.
    pub jobs: usize,
    /// Largest execution count the brute engine accepts.
    pub cap: u64,
    pub strict_deadline: bool,
    pub engine: EngineKind,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            jobs: 1,
            cap: DEFAULT_EXECUTION_CAP,
            strict_deadline: false,
            engine: EngineKind::Brute,
        }
    }
}

impl CheckOptions {
    fn eval(&self) -> EvalOptions {
        EvalOptions {
            strict_deadline: self.strict_deadline,
        }
    }
}

/// A trace as task ids and the literals of each state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Witness {
    pub execution: Vec<String>,
    pub states: Vec<Vec<String>>,
}

impl Witness {
    pub fn from_trace(tr: &Trace) -> Self {
        Witness {
            execution: tr.steps().iter().map(|s| s.task.id.clone()).collect(),
            states: tr.states().map(State::to_strings).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComplianceReport {
    pub mode: Mode,
    pub verdict: bool,
    pub witness: Option<Witness>,
    pub traces_examined: u64,
    pub engine: EngineKind,
}

impl ComplianceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports serialise")
    }
}

/// Every obligation of `rs` holds on `tr`.
pub fn trace_complies(tr: &Trace, rs: &RuleSet) -> bool {
    trace_complies_with(tr, rs, EvalOptions::default())
}

pub fn trace_complies_with(tr: &Trace, rs: &RuleSet, opts: EvalOptions) -> bool {
    rs.obligations()
        .iter()
        .all(|o| eval_obligation_with(tr, o, opts).is_satisfied())
}

/// Index and trace of the first execution whose trace compliance equals
/// `target`, plus the number of executions seen.
fn search(
    m: &Model,
    rs: &RuleSet,
    opts: &CheckOptions,
    target: bool,
) -> Result<(Option<Trace>, u64), Error> {
    check_cap(m, opts.cap)?;
    let net = WfNet::compile(m);
    let eval = opts.eval();
    let test = |e: &Execution| {
        let tr = derive_trace(m, e);
        (trace_complies_with(&tr, rs, eval) == target).then_some(tr)
    };
    let pool = (opts.jobs > 1).then(|| worker_pool(opts.jobs)).transpose()?;
    let mut executions = net.executions();
    let Some(pool) = pool else {
        // consecutive executions share prefixes, so one trace is kept and
        // only its differing suffix is rederived
        let mut seen = 0u64;
        let mut tr = Trace::with_capacity(m.tasks().len());
        let mut prev = Execution::new(Vec::new());
        for e in executions {
            seen += 1;
            let common = prev.steps().iter().zip(e.steps()).take_while(|(a, b)| a == b).count();
            tr.truncate(common);
            e.steps()[common..].iter().for_each(|&t| tr.push(m.task(t).clone()));
            if trace_complies_with(&tr, rs, eval) == target {
                return Ok((Some(tr), seen));
            }
            prev = e;
        }
        return Ok((None, seen));
    };
    let mut seen = 0u64;
    loop {
        let batch: Vec<Execution> = executions.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            return Ok((None, seen));
        }
        let hit = pool.install(|| {
            batch
                .par_iter()
                .enumerate()
                .find_map_first(|(i, e)| test(e).map(|tr| (i, tr)))
        });
        if let Some((i, tr)) = hit {
            return Ok((Some(tr), seen + i as u64 + 1));
        }
        seen += batch.len() as u64;
    }
}

/// One shared pool per worker count, built on first use.
fn worker_pool(jobs: usize) -> Result<Arc<ThreadPool>, Error> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS
        .get_or_init(Default::default)
        .lock()
        .unwrap_or_else(|poisoned| poisoned.into_inner());
    if let Some(pool) = pools.get(&jobs) {
        return Ok(pool.clone());
    }
    let pool = ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::ThreadPool(e.to_string()))?;
    let pool = Arc::new(pool);
    pools.insert(jobs, pool.clone());
    Ok(pool)
}

fn brute_report(mode: Mode, verdict: bool, witness: Option<Trace>, seen: u64) -> ComplianceReport {
    ComplianceReport {
        mode,
        verdict,
        witness: witness.as_ref().map(Witness::from_trace),
        traces_examined: seen,
        engine: EngineKind::Brute,
    }
}

/// Every trace complies; otherwise the first violating trace is the witness.
pub fn check_full(m: &Model, rs: &RuleSet, opts: &CheckOptions) -> Result<ComplianceReport, Error> {
    let (violating, seen) = search(m, rs, opts, false)?;
    Ok(brute_report(Mode::Full, violating.is_none(), violating, seen))
}

/// Some trace complies, and the first one is the witness.
pub fn check_partial(m: &Model, rs: &RuleSet, opts: &CheckOptions) -> Result<ComplianceReport, Error> {
    let (compliant, seen) = search(m, rs, opts, true)?;
    Ok(brute_report(Mode::Partial, compliant.is_some(), compliant, seen))
}

/// No trace complies; a compliant trace refutes it.
pub fn check_non(m: &Model, rs: &RuleSet, opts: &CheckOptions) -> Result<ComplianceReport, Error> {
    let (compliant, seen) = search(m, rs, opts, true)?;
    Ok(brute_report(Mode::Non, compliant.is_none(), compliant, seen))
}

/// Runs `mode` on the engine chosen in `opts`. The fast engine accepts
/// `1L-` rule sets only and reports no witness.
pub fn check(m: &Model, rs: &RuleSet, mode: Mode, opts: &CheckOptions) -> Result<ComplianceReport, Error> {
    match opts.engine {
        EngineKind::Brute => match mode {
            Mode::Full => check_full(m, rs, opts),
            Mode::Partial => check_partial(m, rs, opts),
            Mode::Non => check_non(m, rs, opts),
        },
        EngineKind::Fast => {
            if opts.strict_deadline {
                return Err(Error::StrictFast);
            }
            let verdict = match mode {
                Mode::Full => check_fast(m, rs, true)?,
                Mode::Partial => check_fast(m, rs, false)?,
                Mode::Non => !check_fast(m, rs, false)?,
            };
            Ok(ComplianceReport {
                mode,
                verdict,
                witness: None,
                traces_examined: 0,
                engine: EngineKind::Fast,
            })
        }
    }
}

/// Re-checks a report's witness: it must be an execution of `m`, carry the
/// states that execution induces, and comply (partial, non) or violate
/// (full) as the report claims.
pub fn verify_witness(
    m: &Model,
    rs: &RuleSet,
    report: &ComplianceReport,
    opts: &CheckOptions,
) -> Result<(), Error> {
    let Some(w) = &report.witness else {
        return Ok(());
    };
    let bad = |msg: String| Error::from(ModelError::InvalidExecution(msg));
    let steps = w
        .execution
        .iter()
        .map(|id| m.task_index(id).ok_or_else(|| bad(format!("unknown task `{id}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    WfNet::compile(m).replay(&steps)?;
    let tr = derive_trace(m, &Execution::new(steps));
    if Witness::from_trace(&tr) != *w {
        return Err(bad("witness states differ from the replayed trace".into()));
    }
    let complies = trace_complies_with(&tr, rs, opts.eval());
    let expected = report.mode != Mode::Full;
    if complies != expected {
        return Err(bad(format!(
            "witness {} but the {} report needs it to {}",
            if complies { "complies" } else { "violates" },
            report.mode,
            if expected { "comply" } else { "violate" },
        )));
    }
    Ok(())
}
