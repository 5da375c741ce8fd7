//! JSON file formats for instances, DFVC instances and vertex lists.
//!
//! An instance file is an object with `m`, `n`, `orient` (an `m x n` matrix
//! of 0/1, 1 meaning `a_i -> b_j`), and optional `k`, `labels` and
//! `metadata`. Other fields are kept and written back unchanged.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::de::{self, DeserializeSeed, MapAccess, SeqAccess, Visitor};
use serde::{Deserialize, Deserializer};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::cfvs::CfvsInstance;
use crate::dfvc::DfvcInstance;
use crate::graph::{BipartiteTournament, Edge, GraphError, MixedMultigraph, PartVertex, VertexSet};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    File {
        path: String,
        source: std::io::Error,
    },
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep the message clean
        let message = match message.rfind(" at line ") {
            Some(i) if e.line() > 0 => message[..i].to_string(),
            _ => message,
        };
        IoError::Parse {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceFile {
    pub tournament: BipartiteTournament,
    pub k: Option<usize>,
    pub metadata: Option<Value>,
    /// Unrecognized top-level fields, in file order.
    pub extra: Map<String, Value>,
}

impl InstanceFile {
    pub fn new(tournament: BipartiteTournament) -> Self {
        InstanceFile {
            tournament,
            k: None,
            metadata: None,
            extra: Map::new(),
        }
    }
}

struct Raw {
    m: usize,
    n: usize,
    orient: Vec<Vec<bool>>,
    k: Option<usize>,
    labels: Option<Vec<String>>,
    metadata: Option<Value>,
    extra: Map<String, Value>,
}

struct RowSeed(usize);

impl<'de> DeserializeSeed<'de> for RowSeed {
    type Value = Vec<bool>;

    fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Vec<bool>, D::Error> {
        d.deserialize_seq(self)
    }
}

impl<'de> Visitor<'de> for RowSeed {
    type Value = Vec<bool>;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "row {} of orient as a list of 0/1", self.0)
    }

    fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<bool>, A::Error> {
        let mut row = Vec::new();
        while let Some(v) = seq.next_element::<Value>()? {
            match v.as_u64() {
                Some(0) => row.push(false),
                Some(1) => row.push(true),
                _ => {
                    return Err(de::Error::custom(format!(
                        "orient[{}][{}] = {v}: expected 0 or 1",
                        self.0,
                        row.len()
                    )))
                }
            }
        }
        Ok(row)
    }
}

struct Orient(Vec<Vec<bool>>);

impl<'de> Deserialize<'de> for Orient {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct Rows;
        impl<'de> Visitor<'de> for Rows {
            type Value = Orient;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("orient as a list of rows")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Orient, A::Error> {
                let mut rows = Vec::new();
                while let Some(r) = seq.next_element_seed(RowSeed(rows.len()))? {
                    rows.push(r);
                }
                Ok(Orient(rows))
            }
        }
        d.deserialize_seq(Rows)
    }
}

impl<'de> Deserialize<'de> for Raw {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Raw;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an instance object")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Raw, A::Error> {
                let (mut m, mut n, mut orient) = (None, None, None);
                let (mut k, mut labels, mut metadata) = (None, None, None);
                let mut extra = Map::new();
                while let Some(key) = map.next_key::<String>()? {
                    let dup = match key.as_str() {
                        "m" => m.replace(map.next_value::<usize>()?).is_some(),
                        "n" => n.replace(map.next_value::<usize>()?).is_some(),
                        "orient" => orient.replace(map.next_value::<Orient>()?.0).is_some(),
                        "k" => k.replace(map.next_value::<usize>()?).is_some(),
                        "labels" => labels.replace(map.next_value::<Vec<String>>()?).is_some(),
                        "metadata" => metadata.replace(map.next_value::<Value>()?).is_some(),
                        _ => {
                            let v = map.next_value::<Value>()?;
                            extra.insert(key.clone(), v).is_some()
                        }
                    };
                    if dup {
                        return Err(de::Error::custom(format!("duplicate field `{key}`")));
                    }
                }
                Ok(Raw {
                    m: m.ok_or_else(|| de::Error::missing_field("m"))?,
                    n: n.ok_or_else(|| de::Error::missing_field("n"))?,
                    orient: orient.ok_or_else(|| de::Error::missing_field("orient"))?,
                    k,
                    labels,
                    metadata,
                    extra,
                })
            }
        }
        d.deserialize_map(V)
    }
}

impl Raw {
    fn build(self) -> Result<InstanceFile, IoError> {
        let mut t = BipartiteTournament::new(self.m, self.n, self.orient)?;
        if let Some(labels) = self.labels {
            t = t.with_labels(labels)?;
        }
        Ok(InstanceFile {
            tournament: t,
            k: self.k,
            metadata: self.metadata,
            extra: self.extra,
        })
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile, IoError> {
    serde_json::from_str::<Raw>(text)?.build()
}

fn instance_from_value(v: Value) -> Result<InstanceFile, IoError> {
    serde_json::from_value::<Raw>(v)
        .map_err(|e| IoError::Invalid(e.to_string()))?
        .build()
}

/// Tournament fields only: `m`, `n`, `orient` and custom `labels`.
pub fn tournament_value(t: &BipartiteTournament) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("m".into(), json!(t.m()));
    obj.insert("n".into(), json!(t.n()));
    let rows: Vec<Vec<u8>> = t
        .orient_rows()
        .iter()
        .map(|r| r.iter().map(|&b| b as u8).collect())
        .collect();
    obj.insert("orient".into(), json!(rows));
    if let Some(labels) = t.labels() {
        obj.insert("labels".into(), json!(labels));
    }
    obj
}

pub fn instance_value(file: &InstanceFile) -> Value {
    let mut obj = tournament_value(&file.tournament);
    if let Some(k) = file.k {
        obj.insert("k".into(), json!(k));
    }
    if let Some(md) = &file.metadata {
        obj.insert("metadata".into(), md.clone());
    }
    for (key, v) in &file.extra {
        obj.insert(key.clone(), v.clone());
    }
    Value::Object(obj)
}

pub fn serialize_instance(file: &InstanceFile) -> String {
    let mut s = serde_json::to_string_pretty(&instance_value(file)).expect("values serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, IoError> {
    parse_instance(&read(path)?)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

/// A comma-separated list of vertex labels, e.g. `a0,b3`.
pub fn parse_vertex_list(t: &BipartiteTournament, list: &str) -> Result<VertexSet, IoError> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            t.find_label(s)
                .ok_or_else(|| IoError::Invalid(format!("unknown vertex {s:?}")))
        })
        .collect()
}

pub fn vertex_labels(t: &BipartiteTournament, set: &VertexSet) -> Vec<String> {
    set.iter().map(|&v| t.label(v)).collect()
}

fn part_label(g: &MixedMultigraph, v: PartVertex) -> String {
    format!("{}/{}", v.part, g.parts()[v.part].label(v.vertex))
}

fn parse_part_vertex(parts: &[BipartiteTournament], s: &str) -> Result<PartVertex, IoError> {
    let bad = || IoError::Invalid(format!("bad part vertex {s:?}; expected <part>/<label>"));
    let (p, label) = s.split_once('/').ok_or_else(bad)?;
    let part: usize = p.parse().map_err(|_| bad())?;
    let t = parts.get(part).ok_or_else(bad)?;
    let v = t.find_label(label).ok_or_else(bad)?;
    Ok(PartVertex::new(part, v))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDfvc {
    parts: Vec<Value>,
    #[serde(default)]
    undirected: Vec<(String, String)>,
    #[serde(default)]
    forbidden: Vec<String>,
    #[serde(default)]
    internal_cover: Vec<(String, String)>,
    budget: usize,
}

/// `{"parts": [...], "undirected": [["0/a0", "1/b2"], ...], "forbidden":
/// [...], "internal_cover": [[from, to], ...], "budget": k}`; parts are
/// tournament objects and vertices are written `<part>/<label>`.
pub fn parse_dfvc(text: &str) -> Result<DfvcInstance, IoError> {
    let raw: RawDfvc = serde_json::from_str(text)?;
    let parts: Vec<BipartiteTournament> = raw
        .parts
        .into_iter()
        .map(|v| instance_from_value(v).map(|f| f.tournament))
        .collect::<Result<_, _>>()?;
    let undirected = raw
        .undirected
        .iter()
        .map(|(u, v)| Ok((parse_part_vertex(&parts, u)?, parse_part_vertex(&parts, v)?)))
        .collect::<Result<Vec<_>, IoError>>()?;
    let forbidden = raw
        .forbidden
        .iter()
        .map(|s| parse_part_vertex(&parts, s))
        .collect::<Result<BTreeSet<_>, _>>()?;
    let mut internal_cover = BTreeSet::new();
    for (u, v) in &raw.internal_cover {
        let (u, v) = (parse_part_vertex(&parts, u)?, parse_part_vertex(&parts, v)?);
        if u.part != v.part {
            return Err(IoError::Invalid(format!(
                "internal cover edge {u}-{v} spans two parts"
            )));
        }
        internal_cover.insert((u.part, Edge::new(u.vertex, v.vertex)));
    }
    let graph = MixedMultigraph::new(parts, undirected)?;
    Ok(DfvcInstance {
        graph,
        forbidden,
        internal_cover,
        budget: raw.budget,
    })
}

pub fn dfvc_value(inst: &DfvcInstance) -> Value {
    let g = &inst.graph;
    let parts: Vec<Value> = g
        .parts()
        .iter()
        .map(|t| Value::Object(tournament_value(t)))
        .collect();
    let undirected: Vec<[String; 2]> = g
        .undirected()
        .iter()
        .map(|&(u, v)| [part_label(g, u), part_label(g, v)])
        .collect();
    let forbidden: Vec<String> = inst.forbidden.iter().map(|&v| part_label(g, v)).collect();
    let mut obj = json!({
        "parts": parts,
        "undirected": undirected,
        "forbidden": forbidden,
        "budget": inst.budget,
    });
    if !inst.internal_cover.is_empty() {
        let cover: Vec<[String; 2]> = inst
            .internal_cover
            .iter()
            .map(|&(p, e)| {
                [
                    part_label(g, PartVertex::new(p, e.from)),
                    part_label(g, PartVertex::new(p, e.to)),
                ]
            })
            .collect();
        obj["internal_cover"] = json!(cover);
    }
    obj
}

pub fn part_vertex_labels(g: &MixedMultigraph, set: &BTreeSet<PartVertex>) -> Vec<String> {
    set.iter().map(|&v| part_label(g, v)).collect()
}

/// `M`, `P`, `F` and `k` of a constrained instance, by label.
pub fn cfvs_value(inst: &CfvsInstance) -> Value {
    let t = &inst.tournament;
    let f: Vec<[String; 2]> = inst
        .f
        .iter()
        .map(|e| [t.label(e.from), t.label(e.to)])
        .collect();
    json!({
        "m": vertex_labels(t, &inst.m),
        "p": vertex_labels(t, &inst.p),
        "f": f,
        "k": inst.k,
    })
}
