//! Compliance checking of structured process models against propositional
//! achievement and maintenance obligations.
//!
//! A [`Model`] is a block tree of annotated tasks compiled to a workflow net
//! ([`WfNet`]). Its executions induce [`Trace`]s of process states, which are
//! checked against a [`RuleSet`] by the brute engine ([`check_full`],
//! [`check_partial`], [`check_non`]) or, for a single local obligation over
//! literals, by the polynomial procedures in [`fastpath`]. The [`reduction`]
//! module builds the interpretation model that turns tautology checking into
//! full compliance.

pub mod bench;
pub mod engine;
pub mod fastpath;
pub mod formula;
pub mod generate;
pub mod io;
pub mod model;
pub mod net;
pub mod obligation;
pub mod reduction;
pub mod trace;

use thiserror::Error;

pub use engine::{
    check, check_full, check_non, check_partial, trace_complies, verify_witness, CheckOptions, ComplianceReport,
    EngineKind, Mode, Witness,
};
pub use fastpath::{erase, full_compliant_fast, partial_compliant_fast, ErasedModel, FastPathError};
pub use formula::{parse_formula, tautology_truth_table, Atom, Formula, FormulaError, Literal, State};
pub use model::{figure_example, Model, ModelError, ProcessBlock, Task};
pub use net::{enumerate_executions, WfNet, DEFAULT_EXECUTION_CAP};
pub use obligation::{
    classify_variant, eval_obligation, Obligation, ObligationError, ObligationKind, RuleSet, VariantTag,
};
pub use reduction::{build_interpretation_model, verify_reduction_steps, ReductionError, ReductionInstance};
pub use trace::{derive_trace, Execution, Trace};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Obligation(#[from] ObligationError),
    #[error(transparent)]
    FastPath(#[from] FastPathError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("the fast engine does not support strict deadlines")]
    StrictFast,
    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{input}:{line}:{column}: {message}")]
    Json {
        input: String,
        line: usize,
        column: usize,
        message: String,
    },
}
