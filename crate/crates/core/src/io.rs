//! JSON file formats. Every format may carry `"schema": "envlab/1"`.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::finspace::{FinSpace, PointMap, UpFamily};
use crate::realpw::{format_q, parse_q, Affine, Bound, PAEnvelope, PAFunction};

pub const SCHEMA: &str = "envlab/1";

fn check_schema(schema: &Option<String>, location: &str) -> Result<()> {
    match schema.as_deref() {
        None | Some(SCHEMA) => Ok(()),
        Some(other) => Err(Error::parse(
            format!("{location}: schema"),
            format!("expected `{SCHEMA}`, found `{other}`"),
        )),
    }
}

/// A finite space: element names and generating order pairs `a ≤ b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub elements: Vec<String>,
    #[serde(default)]
    pub le: Vec<(String, String)>,
}

impl SpaceSpec {
    pub fn of(space: &FinSpace) -> Self {
        let le = space
            .strict_pairs()
            .into_iter()
            .map(|(a, b)| (space.name(a).to_string(), space.name(b).to_string()))
            .collect();
        SpaceSpec {
            schema: None,
            elements: space.names().to_vec(),
            le,
        }
    }

    pub fn build(&self, location: &str) -> Result<FinSpace> {
        check_schema(&self.schema, location)?;
        let find = |name: &str| {
            self.elements.iter().position(|e| e == name).ok_or_else(|| {
                Error::parse(
                    format!("{location}: le"),
                    format!("unknown element `{name}`"),
                )
            })
        };
        let pairs = self
            .le
            .iter()
            .map(|(a, b)| Ok((find(a)?, find(b)?)))
            .collect::<Result<Vec<_>>>()?;
        FinSpace::from_order(&self.elements, &pairs)
            .map_err(|e| Error::parse(location, e.to_string()))
    }
}

/// A function between finite spaces, given pointwise by names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub domain: SpaceSpec,
    pub codomain: SpaceSpec,
    pub map: Map<String, Value>,
}

impl MapSpec {
    pub fn of(f: &PointMap) -> Self {
        let d = f.domain();
        let map = (0..d.len())
            .map(|x| {
                let y = f.codomain().name(f.apply(x)).to_string();
                (d.name(x).to_string(), Value::String(y))
            })
            .collect();
        MapSpec {
            schema: None,
            domain: SpaceSpec::of(d),
            codomain: SpaceSpec::of(f.codomain()),
            map,
        }
    }

    pub fn build(&self, location: &str) -> Result<PointMap> {
        check_schema(&self.schema, location)?;
        let dom = Arc::new(self.domain.build(&format!("{location}: domain"))?);
        let cod = Arc::new(self.codomain.build(&format!("{location}: codomain"))?);
        for key in self.map.keys() {
            dom.index_of(key).map_err(|_| {
                Error::parse(format!("{location}: map"), format!("unknown point `{key}`"))
            })?;
        }
        let assignment = (0..dom.len())
            .map(|x| {
                let at = format!("{location}: map.{}", dom.name(x));
                let target = self
                    .map
                    .get(dom.name(x))
                    .ok_or_else(|| Error::parse(&at, "missing value"))?
                    .as_str()
                    .ok_or_else(|| Error::parse(&at, "value must be an element name"))?;
                cod.index_of(target)
                    .map_err(|_| Error::parse(&at, format!("unknown element `{target}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        PointMap::new(dom, cod, assignment)
    }
}

/// An O²-valued map: for every point, the minimal opens of its family.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    pub values: Map<String, Value>,
}

impl EnvelopeSpec {
    pub fn build(&self, x: &FinSpace, y: &FinSpace, location: &str) -> Result<Vec<UpFamily>> {
        check_schema(&self.schema, location)?;
        (0..x.len())
            .map(|p| {
                let at = format!("{location}: values.{}", x.name(p));
                let raw = self
                    .values
                    .get(x.name(p))
                    .ok_or_else(|| Error::parse(&at, "missing value"))?;
                let gens: Vec<Vec<String>> = serde_json::from_value(raw.clone())
                    .map_err(|e| Error::parse(&at, e.to_string()))?;
                let sets = gens
                    .iter()
                    .map(|g| {
                        g.iter()
                            .map(|n| {
                                y.index_of(n).map_err(|_| {
                                    Error::parse(&at, format!("unknown element `{n}`"))
                                })
                            })
                            .collect::<Result<_>>()
                    })
                    .collect::<Result<Vec<_>>>()?;
                UpFamily::new(y, sets).map_err(|e| Error::parse(&at, e.to_string()))
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BreakpointSpec {
    pub x: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub slope: String,
    pub intercept: String,
}

/// A piecewise-affine function with rationals written as `"p"` or `"p/q"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PaSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<String>,
    #[serde(default)]
    pub breakpoints: Vec<BreakpointSpec>,
    pub pieces: Vec<PieceSpec>,
}

impl PaSpec {
    pub fn of(f: &PAFunction) -> Self {
        PaSpec {
            schema: None,
            breakpoints: f
                .breakpoints()
                .iter()
                .map(|(x, v)| BreakpointSpec {
                    x: format_q(x),
                    value: format_q(v),
                })
                .collect(),
            pieces: f.pieces().iter().map(piece_spec).collect(),
        }
    }

    pub fn build(&self, location: &str) -> Result<PAFunction> {
        check_schema(&self.schema, location)?;
        let rat = |s: &str, at: String| parse_q(s).map_err(|e| Error::parse(at, e.to_string()));
        let breakpoints = self
            .breakpoints
            .iter()
            .enumerate()
            .map(|(i, b)| {
                Ok((
                    rat(&b.x, format!("{location}: breakpoints[{i}].x"))?,
                    rat(&b.value, format!("{location}: breakpoints[{i}].value"))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let pieces = self
            .pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Ok(Affine::new(
                    rat(&p.slope, format!("{location}: pieces[{i}].slope"))?,
                    rat(&p.intercept, format!("{location}: pieces[{i}].intercept"))?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        PAFunction::new(breakpoints, pieces).map_err(|e| Error::parse(location, e.to_string()))
    }
}

fn piece_spec(h: &Affine) -> PieceSpec {
    PieceSpec {
        slope: format_q(&h.slope),
        intercept: format_q(&h.intercept),
    }
}

/// Reads and deserializes a JSON file, reporting line and column on failure.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        Error::parse(
            format!("{}:{}:{}", path.display(), e.line(), e.column()),
            e.to_string(),
        )
    })
}

/// A family as its minimal opens, each a sorted list of names.
pub fn family_json(space: &FinSpace, family: &UpFamily) -> Value {
    Value::Array(
        family
            .generators()
            .iter()
            .map(|g| json!(space.sorted_names(g)))
            .collect(),
    )
}

fn bound_str(b: &Bound) -> String {
    b.to_string()
}

fn set_json(values: &BTreeSet<crate::realpw::Q>) -> Value {
    Value::Array(values.iter().map(|v| Value::String(format_q(v))).collect())
}

/// An envelope `ℝ → K_⊥(ℝ)`: value sets at breakpoints and affine branches
/// on the open pieces between them.
pub fn pa_envelope_json(e: &PAEnvelope) -> Value {
    let bps = e.breakpoints();
    let bound = |i: usize, lower: bool| -> String {
        match (lower, i) {
            (true, 0) => bound_str(&Bound::NegInf),
            (true, i) => format_q(&bps[i - 1]),
            (false, i) if i == bps.len() => bound_str(&Bound::PosInf),
            (false, i) => format_q(&bps[i]),
        }
    };
    let breakpoints: Vec<Value> = bps
        .iter()
        .zip(e.at())
        .map(|(x, at)| json!({"x": format_q(x), "values": set_json(at)}))
        .collect();
    let pieces: Vec<Value> = e
        .pieces()
        .iter()
        .enumerate()
        .map(|(i, branches)| {
            json!({
                "from": bound(i, true),
                "to": bound(i, false),
                "branches": branches.iter().map(|h| json!(piece_spec(h))).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({"breakpoints": breakpoints, "pieces": pieces})
}

/// A plain-text rendering of any JSON report.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render_into(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(items) if items.iter().all(|i| !i.is_object()) => {
            let parts: Option<Vec<String>> = items.iter().map(scalar).collect();
            parts.map(|p| format!("[{}]", p.join(", ")))
        }
        _ => None,
    }
}

fn render_into(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, val) in map {
                match scalar(val) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_into(val, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(items) => {
            for item in items {
                match scalar(item) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        // The first line of the nested block shares the dash.
                        let mut inner = String::new();
                        render_into(item, depth + 1, &mut inner);
                        let body = inner.trim_start_matches(' ');
                        out.push_str(&format!("{pad}- {body}"));
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
