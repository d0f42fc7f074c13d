//! The benchmark harness behind `oblig bench`: timed runs written as CSV.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use crate::engine::{check, CheckOptions, EngineKind, Mode};
use crate::formula::Formula;
use crate::generate::atom_names;
use crate::model::{Model, ProcessBlock};
use crate::obligation::{Obligation, ObligationKind, RuleSet};
use crate::reduction::build_interpretation_model;
use crate::Error;

pub const CSV_HEADER: &str = "instance,engine,n,wall_ms,traces,verdict";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Full compliance of interpretation models for `(x1 | !x1) & ...`.
    Reduction,
    /// Brute and fast full compliance on chains of XOR blocks.
    Fastpath,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "reduction" => Ok(Suite::Reduction),
            "fastpath" => Ok(Suite::Fastpath),
            _ => Err(format!("unknown suite `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub instance: String,
    pub engine: EngineKind,
    pub n: usize,
    pub wall_ms: f64,
    pub traces: u64,
    pub verdict: bool,
}

impl fmt::Display for BenchRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{:.3},{},{}",
            self.instance, self.engine, self.n, self.wall_ms, self.traces, self.verdict
        )
    }
}

/// `(x1 | !x1) & ... & (xn | !xn)` over the first `n` generated atoms.
pub fn tautology_chain(n: usize) -> Formula {
    atom_names(n)
        .into_iter()
        .map(|a| {
            let x = Formula::Atom(a);
            Formula::or(x.clone(), Formula::not(x))
        })
        .reduce(Formula::and)
        .unwrap_or(Formula::True)
}

/// `Seq(x{a}, Xor(p1{b}, q1{c}), ..., Xor(pn{b}, qn{c}))` with
/// `O^a<b, a, d>`. Only the all-`q` trace violates, and it comes last.
pub fn xor_chain(n: usize) -> (Model, RuleSet) {
    let mut blocks = vec![ProcessBlock::task("x", &["a"])];
    blocks.extend((1..=n).map(|i| {
        ProcessBlock::Xor(vec![
            ProcessBlock::task(&format!("p{i}"), &["b"]),
            ProcessBlock::task(&format!("q{i}"), &["c"]),
        ])
    }));
    let m = Model::validate(format!("xorchain{n}"), ProcessBlock::Seq(blocks)).expect("valid chain");
    let o = Obligation::local(
        ObligationKind::Achievement,
        Formula::atom("b"),
        Formula::atom("a"),
        Formula::atom("d"),
    );
    (m, RuleSet::single(o))
}

fn timed(instance: String, n: usize, m: &Model, rs: &RuleSet, opts: &CheckOptions) -> Result<BenchRecord, Error> {
    let t = Instant::now();
    let rep = check(m, rs, Mode::Full, opts)?;
    Ok(BenchRecord {
        instance,
        engine: opts.engine,
        n,
        wall_ms: t.elapsed().as_secs_f64() * 1e3,
        traces: rep.traces_examined,
        verdict: rep.verdict,
    })
}

/// One record per instance and engine for `n` in `n_min..=n_max`.
pub fn run_suite(suite: Suite, n_min: usize, n_max: usize, opts: &CheckOptions) -> Result<Vec<BenchRecord>, Error> {
    let mut out = Vec::new();
    for n in n_min.max(1)..=n_max {
        match suite {
            Suite::Reduction => {
                let inst = build_interpretation_model(&tautology_chain(n))?;
                let brute = CheckOptions {
                    engine: EngineKind::Brute,
                    ..*opts
                };
                out.push(timed(format!("taut{n}"), n, &inst.model, &inst.rules, &brute)?);
            }
            Suite::Fastpath => {
                let (m, rs) = xor_chain(n);
                for engine in [EngineKind::Brute, EngineKind::Fast] {
                    let o = CheckOptions { engine, ..*opts };
                    out.push(timed(format!("xorchain{n}"), n, &m, &rs, &o)?);
                }
            }
        }
    }
    Ok(out)
}

pub fn write_csv(mut w: impl Write, records: &[BenchRecord]) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{r}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_traces_double() {
        let recs = run_suite(Suite::Reduction, 4, 8, &CheckOptions::default()).unwrap();
        let traces: Vec<u64> = recs.iter().map(|r| r.traces).collect();
        assert_eq!(traces, [16, 32, 64, 128, 256]);
        assert!(recs.iter().all(|r| r.verdict));
    }

    #[test]
    fn fastpath_rows() {
        let recs = run_suite(Suite::Fastpath, 1, 6, &CheckOptions::default()).unwrap();
        assert_eq!(recs.len(), 12);
        for pair in recs.chunks(2) {
            assert_eq!(pair[0].verdict, pair[1].verdict);
            assert!(!pair[0].verdict);
            assert_eq!(pair[0].traces, 1 << pair[0].n);
        }
    }

    #[test]
    fn empty_range_is_header_only() {
        let recs = run_suite(Suite::Reduction, 5, 4, &CheckOptions::default()).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
    }
}
