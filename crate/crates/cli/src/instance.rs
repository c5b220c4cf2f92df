//! JSON instance formats. Rationals travel as strings "p/q" (or "p") so
//! exactness survives serialization; lattice data is plain integers;
//! decompositions use index-pooled cells so face sharing is syntactic.

use std::path::Path;

use serde_json::{json, Map, Value};

use jetbound_core::estimation_methods::Decomposition;
use jetbound_core::jet_matrix::StaircaseIdeal;
use jetbound_core::lattice_geometry::{
    LatticeMap, LatticePointSet, RationalPolytope, RationalVector,
};
use jetbound_core::{Int, Rat};

use crate::CliError;

/// One parsed instance file.
#[derive(Debug, Clone)]
pub enum Instance {
    Polytope(RationalPolytope),
    LatticeSet(LatticePointSet),
    Ideal(StaircaseIdeal),
    Map(LatticeMap),
    Decomposition(Decomposition),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Polytope(_) => "polytope",
            Instance::LatticeSet(_) => "lattice-set",
            Instance::Ideal(_) => "ideal",
            Instance::Map(_) => "lattice-map",
            Instance::Decomposition(_) => "decomposition",
        }
    }
}

pub fn load(path: &Path) -> Result<(Instance, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: invalid JSON: {e}", path.display())))?;
    let name = value
        .get("name")
        .and_then(Value::as_str)
        .map(str::to_owned)
        .unwrap_or_else(|| {
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "instance".into())
        });
    let instance = from_value(&value).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })?;
    Ok((instance, name))
}

pub fn from_value(value: &Value) -> Result<Instance, CliError> {
    let obj = value
        .as_object()
        .ok_or_else(|| CliError::Input("top level must be a JSON object".into()))?;
    if obj.contains_key("cells") {
        return Ok(Instance::Decomposition(parse_decomposition(obj)?));
    }
    if let Some(v) = obj.get("vertices") {
        return Ok(Instance::Polytope(parse_polytope(v, "vertices")?));
    }
    if let Some(v) = obj.get("points") {
        return Ok(Instance::LatticeSet(parse_lattice_set(v)?));
    }
    if let Some(v) = obj.get("generators") {
        let gens = parse_int_rows(v, "generators")?;
        return Ok(Instance::Ideal(StaircaseIdeal::from_generators(gens)?));
    }
    if let Some(v) = obj.get("matrix") {
        let rows = parse_int_rows(v, "matrix")?;
        return Ok(Instance::Map(LatticeMap::new(rows)?));
    }
    Err(CliError::Input(
        "expected one of the fields: vertices | points | generators | matrix | cells".into(),
    ))
}

fn parse_rat(v: &Value, field: &str) -> Result<Rat, CliError> {
    match v {
        Value::String(s) => parse_rat_str(s)
            .ok_or_else(|| CliError::Input(format!("{field}: cannot parse rational {s:?}"))),
        Value::Number(n) => n
            .as_i64()
            .map(|i| Rat::from_integer(Int::from(i)))
            .ok_or_else(|| {
                CliError::Input(format!("{field}: only integer numerals are exact, got {n}"))
            }),
        other => Err(CliError::Input(format!(
            "{field}: expected string \"p/q\" or integer, got {other}"
        ))),
    }
}

pub fn parse_rat_str(s: &str) -> Option<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: Int = p.trim().parse().ok()?;
            let q: Int = q.trim().parse().ok()?;
            use num_traits::Zero;
            (!q.is_zero()).then(|| Rat::new(p, q))
        }
        None => {
            let p: Int = s.parse().ok()?;
            Some(Rat::from_integer(p))
        }
    }
}

pub fn rat_to_string(r: &Rat) -> String {
    use num_traits::One;
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_vector(v: &Value, field: &str) -> Result<RationalVector, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Input(format!("{field}: expected an array of coordinates")))?;
    let coords = arr
        .iter()
        .map(|c| parse_rat(c, field))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalVector::new(coords))
}

fn parse_polytope(v: &Value, field: &str) -> Result<RationalPolytope, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Input(format!("{field}: expected an array of vertices")))?;
    let vertices = arr
        .iter()
        .map(|x| parse_vector(x, field))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RationalPolytope::from_vertices(vertices)?)
}

fn parse_lattice_set(v: &Value) -> Result<LatticePointSet, CliError> {
    let rows = parse_int_rows(v, "points")?;
    let dim = rows.first().map_or(0, Vec::len);
    if dim == 0 {
        return Err(CliError::Input("points: need at least one point".into()));
    }
    Ok(LatticePointSet::new(rows, dim)?)
}

fn parse_int_rows(v: &Value, field: &str) -> Result<Vec<Vec<i64>>, CliError> {
    let arr = v
        .as_array()
        .ok_or_else(|| CliError::Input(format!("{field}: expected an array of integer rows")))?;
    arr.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row.as_array().ok_or_else(|| {
                CliError::Input(format!("{field}[{i}]: expected an integer array"))
            })?;
            row.iter()
                .map(|x| {
                    x.as_i64().ok_or_else(|| {
                        CliError::Input(format!("{field}[{i}]: expected integer, got {x}"))
                    })
                })
                .collect()
        })
        .collect()
}

fn parse_decomposition(obj: &Map<String, Value>) -> Result<Decomposition, CliError> {
    let parent_value = obj
        .get("parent")
        .ok_or_else(|| CliError::Input("decomposition: missing \"parent\"".into()))?;
    let parent = match parent_value {
        Value::Array(_) => parse_polytope(parent_value, "parent")?,
        Value::Object(o) => parse_polytope(
            o.get("vertices")
                .ok_or_else(|| CliError::Input("parent: missing \"vertices\"".into()))?,
            "parent.vertices",
        )?,
        other => {
            return Err(CliError::Input(format!(
                "parent: expected vertex array or polytope object, got {other}"
            )))
        }
    };
    let pool_value = obj
        .get("pool")
        .ok_or_else(|| CliError::Input("decomposition: missing \"pool\"".into()))?;
    let pool = pool_value
        .as_array()
        .ok_or_else(|| CliError::Input("pool: expected an array of vertices".into()))?
        .iter()
        .map(|x| parse_vector(x, "pool"))
        .collect::<Result<Vec<_>, _>>()?;
    let cells_value = obj
        .get("cells")
        .and_then(Value::as_array)
        .ok_or_else(|| CliError::Input("cells: expected an array of index lists".into()))?;
    let mut cells = Vec::with_capacity(cells_value.len());
    for (ci, cell) in cells_value.iter().enumerate() {
        let idx = cell
            .as_array()
            .ok_or_else(|| CliError::Input(format!("cells[{ci}]: expected index array")))?;
        let mut vertices = Vec::with_capacity(idx.len());
        for v in idx {
            let i = v
                .as_u64()
                .ok_or_else(|| CliError::Input(format!("cells[{ci}]: invalid index {v}")))?
                as usize;
            let vert = pool.get(i).ok_or_else(|| {
                CliError::Input(format!("cells[{ci}]: index {i} outside pool of {}", pool.len()))
            })?;
            vertices.push(vert.clone());
        }
        cells.push(RationalPolytope::from_vertices(vertices)?);
    }
    Ok(Decomposition::new(parent, cells))
}

pub fn emit_polytope(p: &RationalPolytope, name: &str) -> Value {
    json!({
        "name": name,
        "vertices": p
            .vertices()
            .iter()
            .map(|v| v.coords().iter().map(rat_to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    })
}

pub fn emit_lattice_set(s: &LatticePointSet, name: &str) -> Value {
    json!({ "name": name, "points": s.points() })
}

pub fn emit_ideal(i: &StaircaseIdeal, name: &str) -> Value {
    json!({ "name": name, "generators": i.generators() })
}

pub fn emit_map(m: &LatticeMap, name: &str) -> Value {
    let rows: Vec<Vec<String>> = (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.matrix().at(i, j).to_string()).collect())
        .collect();
    json!({ "name": name, "matrix": rows
        .iter()
        .map(|r| r.iter().map(|s| s.parse::<i64>().unwrap()).collect::<Vec<_>>())
        .collect::<Vec<_>>() })
}

pub fn emit_decomposition(d: &Decomposition, name: &str) -> Value {
    // rebuild the shared pool from the cell vertices
    let mut pool: Vec<RationalVector> = Vec::new();
    let mut cells: Vec<Vec<usize>> = Vec::new();
    for cell in d.cells() {
        let mut idx = Vec::new();
        for v in cell.vertices() {
            let i = match pool.iter().position(|p| p == v) {
                Some(i) => i,
                None => {
                    pool.push(v.clone());
                    pool.len() - 1
                }
            };
            idx.push(i);
        }
        cells.push(idx);
    }
    json!({
        "name": name,
        "parent": d
            .parent()
            .vertices()
            .iter()
            .map(|v| v.coords().iter().map(rat_to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "pool": pool
            .iter()
            .map(|v| v.coords().iter().map(rat_to_string).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
        "cells": cells,
    })
}
