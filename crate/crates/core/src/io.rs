//! JSON model and rule files.
//!
//! A model file is `{"name": ..., "root": <block>}` where a block is
//! `{"type":"task","id":..,"ann":[literals]}` or
//! `{"type":"seq"|"xor"|"and","children":[blocks]}`. The root is the body
//! between the implicit `start` and `end` tasks; a root that already begins
//! with `start` and ends with `end` is taken as is.
//!
//! A rule file is `{"obligations":[{"kind":..,"requirement":..,"trigger":..,
//! "deadline":..}]}` with formulas as strings; null trigger and deadline make
//! the obligation global.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::formula::{parse_formula, State};
use crate::model::{Model, ProcessBlock, Task, END, START};
use crate::obligation::{Obligation, ObligationKind, RuleSet, Scope};
use crate::Error;

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum BlockFile {
    Task {
        id: String,
        #[serde(default)]
        ann: Vec<String>,
    },
    Seq { children: Vec<BlockFile> },
    Xor { children: Vec<BlockFile> },
    And { children: Vec<BlockFile> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    root: BlockFile,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObligationFile {
    kind: ObligationKind,
    requirement: String,
    #[serde(default)]
    trigger: Option<String>,
    #[serde(default)]
    deadline: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RulesFile {
    obligations: Vec<ObligationFile>,
}

impl BlockFile {
    fn into_block(self) -> Result<ProcessBlock, Error> {
        let kids = |c: Vec<BlockFile>| c.into_iter().map(BlockFile::into_block).collect::<Result<Vec<_>, _>>();
        Ok(match self {
            BlockFile::Task { id, ann } => {
                let ann: Vec<&str> = ann.iter().map(String::as_str).collect();
                ProcessBlock::Task(Arc::new(Task::parse(id, &ann)?))
            }
            BlockFile::Seq { children } => ProcessBlock::Seq(kids(children)?),
            BlockFile::Xor { children } => ProcessBlock::Xor(kids(children)?),
            BlockFile::And { children } => ProcessBlock::And(kids(children)?),
        })
    }

    fn from_block(b: &ProcessBlock) -> BlockFile {
        let kids = |c: &[ProcessBlock]| c.iter().map(BlockFile::from_block).collect();
        match b {
            ProcessBlock::Task(t) => BlockFile::Task {
                id: t.id.clone(),
                ann: t.annotation.to_strings(),
            },
            ProcessBlock::Seq(c) => BlockFile::Seq { children: kids(c) },
            ProcessBlock::Xor(c) => BlockFile::Xor { children: kids(c) },
            ProcessBlock::And(c) => BlockFile::And { children: kids(c) },
        }
    }
}

fn json_error(source: &str, e: serde_json::Error) -> Error {
    Error::Json {
        input: source.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

fn is_bare(b: &ProcessBlock, id: &str) -> bool {
    matches!(b, ProcessBlock::Task(t) if t.id == id && t.annotation == State::empty())
}

/// Parses model JSON; `source` names the input in error messages.
pub fn parse_model(text: &str, source: &str) -> Result<Model, Error> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    let root = file.root.into_block()?;
    if let ProcessBlock::Seq(c) = &root {
        if c.len() >= 3 && is_bare(&c[0], START) && is_bare(&c[c.len() - 1], END) {
            let body = ProcessBlock::Seq(c[1..c.len() - 1].to_vec());
            return Ok(Model::validate(file.name, body)?);
        }
    }
    Ok(Model::validate(file.name, root)?)
}

pub fn model_to_json(m: &Model) -> String {
    let file = ModelFile {
        name: m.name().to_string(),
        root: BlockFile::from_block(m.body()),
    };
    serde_json::to_string_pretty(&file).expect("models serialise")
}

pub fn parse_rules(text: &str, source: &str) -> Result<RuleSet, Error> {
    let file: RulesFile = serde_json::from_str(text).map_err(|e| json_error(source, e))?;
    let obligations = file
        .obligations
        .into_iter()
        .map(|o| {
            let opt = |s: Option<String>| s.as_deref().map(parse_formula).transpose();
            Ok(Obligation::new(
                o.kind,
                parse_formula(&o.requirement)?,
                opt(o.trigger)?,
                opt(o.deadline)?,
            )?)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(RuleSet::new(obligations)?)
}

pub fn rules_to_json(rs: &RuleSet) -> String {
    let file = RulesFile {
        obligations: rs
            .obligations()
            .iter()
            .map(|o| {
                let (trigger, deadline) = match &o.scope {
                    Scope::Global => (None, None),
                    Scope::Local { trigger, deadline } => (Some(trigger.to_string()), Some(deadline.to_string())),
                };
                ObligationFile {
                    kind: o.kind,
                    requirement: o.requirement.to_string(),
                    trigger,
                    deadline,
                }
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("rules serialise")
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

fn write(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, format!("{text}\n")).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Model, Error> {
    let path = path.as_ref();
    parse_model(&read(path)?, &path.display().to_string())
}

pub fn load_rules(path: impl AsRef<Path>) -> Result<RuleSet, Error> {
    let path = path.as_ref();
    parse_rules(&read(path)?, &path.display().to_string())
}

pub fn save_model(path: impl AsRef<Path>, m: &Model) -> Result<(), Error> {
    write(path.as_ref(), &model_to_json(m))
}

pub fn save_rules(path: impl AsRef<Path>, rs: &RuleSet) -> Result<(), Error> {
    write(path.as_ref(), &rules_to_json(rs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{figure_example, ModelError};
    use crate::obligation::ObligationError;

    const FIG: &str = r#"{"name":"fig3","root":{"type":"seq","children":[
        {"type":"and","children":[
            {"type":"xor","children":[
                {"type":"task","id":"t1","ann":["a"]},
                {"type":"task","id":"t2","ann":["b","c"]}]},
            {"type":"task","id":"t3","ann":["c","d"]}]},
        {"type":"task","id":"t4","ann":["-a"]}]}}"#;

    #[test]
    fn figure_file() {
        assert_eq!(parse_model(FIG, "fig").unwrap(), figure_example());
    }

    #[test]
    fn model_round_trip() {
        let m = figure_example();
        assert_eq!(parse_model(&model_to_json(&m), "x").unwrap(), m);
    }

    #[test]
    fn wrapped_root_is_accepted() {
        let wrapped = r#"{"name":"w","root":{"type":"seq","children":[
            {"type":"task","id":"start"},{"type":"task","id":"x","ann":["a"]},{"type":"task","id":"end","ann":[]}]}}"#;
        let m = parse_model(wrapped, "w").unwrap();
        assert_eq!(m.tasks().len(), 3);
    }

    #[test]
    fn inconsistent_annotation() {
        let text = r#"{"name":"m","root":{"type":"task","id":"t","ann":["a","-a"]}}"#;
        assert!(matches!(
            parse_model(text, "m"),
            Err(Error::Model(ModelError::InconsistentAnnotation { .. }))
        ));
    }

    #[test]
    fn syntax_errors_have_locations() {
        let err = parse_model("{\n  \"name\": \"m\",\n  \"root\": }", "bad.json").unwrap_err();
        let Error::Json { line, column, .. } = err else {
            panic!("{err}")
        };
        assert_eq!((line, column), (3, 11));
        assert!(matches!(
            parse_model(r#"{"name":"m","root":{"type":"loop","children":[]}}"#, "m"),
            Err(Error::Json { .. })
        ));
    }

    #[test]
    fn rules() {
        let text = r#"{"obligations":[
            {"kind":"achievement","requirement":"b","trigger":"a","deadline":"d"},
            {"kind":"maintenance","requirement":"a | !a","trigger":null,"deadline":null}]}"#;
        let rs = parse_rules(text, "r").unwrap();
        assert_eq!(rs.variant().to_string(), "nL+");
        assert!(rs.obligations()[1].is_global());
        assert_eq!(parse_rules(&rules_to_json(&rs), "r").unwrap(), rs);
        assert!(matches!(
            parse_rules(r#"{"obligations":[]}"#, "r"),
            Err(Error::Obligation(ObligationError::EmptyRuleSet))
        ));
        let mixed = r#"{"obligations":[{"kind":"achievement","requirement":"b","trigger":"a","deadline":null}]}"#;
        assert!(matches!(parse_rules(mixed, "r"), Err(Error::Obligation(ObligationError::MixedScope))));
        let bad = r#"{"obligations":[{"kind":"achievement","requirement":"b &"}]}"#;
        assert!(matches!(parse_rules(bad, "r"), Err(Error::Formula(_))));
    }
}
