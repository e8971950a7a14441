//! JSON file formats: signatures, structures, chains, verdicts and collapse
//! results.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use fulfillment_core::collapse::{CollapseReport, CollapseResult};
use fulfillment_core::logic::Symbol;
use fulfillment_core::structures::{Domain, StructureTables};
use fulfillment_core::{FulfillmentVerdict, LnModel, PartialStructure, Signature};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::LabError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolFile {
    pub name: String,
    pub arity: usize,
}

/// `{"base": "arithmetic"?, "relations": [..], "functions": [..], "constants": [..]}`.
///
/// With `"base": "arithmetic"` the listed symbols are added to `0, S, +, *, <`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default)]
    pub relations: Vec<SymbolFile>,
    #[serde(default)]
    pub functions: Vec<SymbolFile>,
    #[serde(default)]
    pub constants: Vec<String>,
}

impl SignatureFile {
    pub fn to_signature(&self) -> Result<Signature, LabError> {
        let (mut rels, mut funs, mut consts) = match self.base.as_deref() {
            None => (Vec::new(), Vec::new(), Vec::new()),
            Some("arithmetic") => {
                let a = Signature::arithmetic();
                (a.relations().to_vec(), a.functions().to_vec(), a.constants().to_vec())
            }
            Some(other) => return Err(LabError::input(format!("unknown base signature `{other}`"))),
        };
        rels.extend(self.relations.iter().map(|s| Symbol::new(s.name.clone(), s.arity)));
        funs.extend(self.functions.iter().map(|s| Symbol::new(s.name.clone(), s.arity)));
        consts.extend(self.constants.iter().cloned());
        Signature::new(rels, funs, consts).map_err(|e| LabError::input(format!("signature: {e}")))
    }

    pub fn from_signature(sig: &Signature) -> Self {
        let sym = |s: &Symbol| SymbolFile { name: s.name.clone(), arity: s.arity };
        SignatureFile {
            base: None,
            relations: sig.relations().iter().map(sym).collect(),
            functions: sig.functions().iter().map(sym).collect(),
            constants: sig.constants().to_vec(),
        }
    }
}

/// A structure: `{"segment": n}` for `M_n`, or explicit tables. Function
/// graphs list `[a_1, .., a_k, value]` rows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructureFile {
    Segment {
        segment: u64,
    },
    Explicit {
        domain: Vec<u64>,
        #[serde(default)]
        constants: BTreeMap<String, u64>,
        #[serde(default)]
        relations: BTreeMap<String, Vec<Vec<u64>>>,
        #[serde(default)]
        functions: BTreeMap<String, Vec<Vec<u64>>>,
    },
}

impl StructureFile {
    pub fn to_structure(&self, sig: &Arc<Signature>) -> Result<PartialStructure, LabError> {
        let s = match self {
            StructureFile::Segment { segment } => PartialStructure::segment(sig.clone(), *segment),
            StructureFile::Explicit { domain, constants, relations, functions } => {
                let mut graphs = BTreeMap::new();
                for (name, rows) in functions {
                    let mut graph = BTreeMap::new();
                    for row in rows {
                        let (value, args) = row
                            .split_last()
                            .ok_or_else(|| LabError::input(format!("empty row in the graph of `{name}`")))?;
                        if graph.insert(args.to_vec(), *value).is_some() {
                            return Err(LabError::input(format!("`{name}` has two values at {args:?}")));
                        }
                    }
                    graphs.insert(name.clone(), graph);
                }
                let tables = StructureTables {
                    domain: domain.iter().copied().collect(),
                    constants: constants.clone(),
                    relations: relations.iter().map(|(k, v)| (k.clone(), v.iter().cloned().collect())).collect(),
                    functions: graphs,
                };
                PartialStructure::from_tables(sig.clone(), tables)
            }
        };
        s.map_err(|e| LabError::input(format!("structure: {e}")))
    }

    pub fn from_structure(s: &PartialStructure) -> Self {
        if let (Domain::Range(n), true) = (s.domain(), s.is_pure_segment()) {
            return StructureFile::Segment { segment: *n };
        }
        let t = s.tables();
        StructureFile::Explicit {
            domain: t.domain.into_iter().collect(),
            constants: t.constants,
            relations: t.relations.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
            functions: t
                .functions
                .into_iter()
                .map(|(k, g)| {
                    let rows = g
                        .into_iter()
                        .map(|(mut args, v)| {
                            args.push(v);
                            args
                        })
                        .collect();
                    (k, rows)
                })
                .collect(),
        }
    }
}

/// A chain: an array of structures or `{"segments": [m_0, ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChainFile {
    Segments { segments: Vec<u64> },
    Levels(Vec<StructureFile>),
}

impl ChainFile {
    pub fn to_chain(&self, sig: &Arc<Signature>) -> Result<LnModel, LabError> {
        let levels = match self {
            ChainFile::Segments { segments } => segments
                .iter()
                .map(|n| StructureFile::Segment { segment: *n }.to_structure(sig))
                .collect::<Result<Vec<_>, _>>()?,
            ChainFile::Levels(ls) => ls.iter().map(|s| s.to_structure(sig)).collect::<Result<Vec<_>, _>>()?,
        };
        LnModel::new(levels).map_err(|e| LabError::input(format!("chain: {e}")))
    }

    pub fn from_chain(v: &LnModel) -> Self {
        ChainFile::Levels(v.levels().iter().map(StructureFile::from_structure).collect())
    }
}

pub fn chain_json(v: &LnModel) -> Value {
    serde_json::to_value(ChainFile::from_chain(v)).unwrap_or(Value::Null)
}

/// `{"verdict": "true"|"false"|"undefined", "reason": ..}`.
pub fn verdict_json(v: FulfillmentVerdict) -> Value {
    match v {
        FulfillmentVerdict::True => json!({ "verdict": "true", "reason": null }),
        FulfillmentVerdict::False => json!({ "verdict": "false", "reason": null }),
        FulfillmentVerdict::Undefined(r) => json!({ "verdict": "undefined", "reason": r.as_str() }),
    }
}

/// Per-level universes, the renaming table and the condition report.
pub fn collapse_json(r: &CollapseResult, report: &CollapseReport) -> Value {
    let universes: Vec<Vec<u64>> = r.universes.iter().map(|b| b.iter().copied().collect()).collect();
    let renaming: Vec<[u64; 2]> = r.renaming.iter().map(|(a, b)| [*a, *b]).collect();
    json!({
        "universes": universes,
        "renaming": renaming,
        "renamed": chain_json(&r.renamed),
        "report": collapse_report_json(report),
    })
}

pub fn collapse_report_json(report: &CollapseReport) -> Value {
    json!({
        "sizes": report.sizes,
        "bounds": report.bounds,
        "conditions": report.conditions,
        "renaming_ok": report.renaming_ok,
        "failures": report.failures,
        "comparisons": report.comparisons,
        "passed": report.passed(),
    })
}

fn read_text(path: &Path) -> Result<String, LabError> {
    std::fs::read_to_string(path).map_err(|e| LabError::input(format!("cannot read {}: {e}", path.display())))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, LabError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| LabError::input(format!("{}: {e}", path.display())))
}

pub fn load_signature(path: &Path) -> Result<Signature, LabError> {
    read_json::<SignatureFile>(path)?.to_signature()
}

pub fn load_chain(path: &Path, sig: &Arc<Signature>) -> Result<LnModel, LabError> {
    read_json::<ChainFile>(path)?.to_chain(sig)
}

/// A coloring table: `{"colors": {"<chain key>": c, ..}, "default": c?}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColoringFile {
    pub colors: BTreeMap<String, u32>,
    #[serde(default)]
    pub default: Option<u32>,
}

pub fn load_coloring(path: &Path) -> Result<ColoringFile, LabError> {
    read_json(path)
}

/// Comma list of naturals, e.g. `2,5,26`.
pub fn parse_list(text: &str) -> Result<Vec<u64>, LabError> {
    text.split(',')
        .map(|p| {
            p.trim().parse::<u64>().map_err(|_| LabError::input(format!("`{}` is not a natural number", p.trim())))
        })
        .collect()
}

/// `x=3,y=0`.
pub fn parse_assignment(text: &str) -> Result<BTreeMap<String, u64>, LabError> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (var, value) =
            part.split_once('=').ok_or_else(|| LabError::input(format!("`{part}` is not of the form var=value")))?;
        let value = value.trim().parse().map_err(|_| LabError::input(format!("`{value}` is not a natural number")))?;
        out.insert(var.trim().to_string(), value);
    }
    Ok(out)
}

/// Sorted element list, for reports.
pub fn elements(s: &BTreeSet<u64>) -> Vec<u64> {
    s.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_sig() -> Arc<Signature> {
        Arc::new(Signature::new(vec![Symbol::new("P", 1)], vec![Symbol::new("f", 1)], vec!["c".into()]).unwrap())
    }

    #[test]
    fn explicit_structures_round_trip() {
        let text = r#"[{"domain":[0],"constants":{"c":0},"relations":{"P":[[0]]}},
                       {"domain":[0,1],"constants":{"c":0},"relations":{"P":[[0]]},"functions":{"f":[[0,1]]}}]"#;
        let file: ChainFile = serde_json::from_str(text).unwrap();
        let v = file.to_chain(&rel_sig()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.top().apply("f", &[0]).unwrap(), Some(1));
        let back = ChainFile::from_chain(&v).to_chain(&rel_sig()).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn segments_round_trip() {
        let sig = Arc::new(Signature::arithmetic());
        let file: ChainFile = serde_json::from_str(r#"{"segments":[2,5,26]}"#).unwrap();
        let v = file.to_chain(&sig).unwrap();
        assert_eq!(v, LnModel::from_segments(&[2, 5, 26]).unwrap());
        let text = serde_json::to_string(&ChainFile::from_chain(&v)).unwrap();
        assert_eq!(text, r#"[{"segment":2},{"segment":5},{"segment":26}]"#);
    }

    #[test]
    fn invalid_inputs_are_input_errors() {
        let sig = Arc::new(Signature::arithmetic());
        let file: ChainFile = serde_json::from_str(r#"{"segments":[3,4]}"#).unwrap();
        assert!(matches!(file.to_chain(&sig), Err(LabError::Input(_))));
        assert!(parse_list("2,x").is_err());
        assert_eq!(parse_assignment("x=3, y=0").unwrap().len(), 2);
        let twice: StructureFile =
            serde_json::from_str(r#"{"domain":[0,1],"constants":{"c":0},"functions":{"f":[[0,1],[0,0]]}}"#).unwrap();
        assert!(twice.to_structure(&rel_sig()).is_err());
    }

    #[test]
    fn signature_files() {
        let f: SignatureFile = serde_json::from_str(r#"{"base":"arithmetic","constants":["c_0","c_1"]}"#).unwrap();
        let sig = f.to_signature().unwrap();
        assert!(sig.is_arithmetic_base());
        assert_eq!(sig.cardinality(), Signature::arithmetic().cardinality() + 2);
        let plain = SignatureFile::from_signature(&rel_sig());
        assert_eq!(plain.to_signature().unwrap(), *rel_sig());
    }

    #[test]
    fn verdicts_serialize_with_reasons() {
        use fulfillment_core::UndefinedReason;
        let u = verdict_json(FulfillmentVerdict::Undefined(UndefinedReason::ParameterInTopModel));
        assert_eq!(u.to_string(), r#"{"reason":"parameter-in-top-model","verdict":"undefined"}"#);
    }
}
