//! Report emission: human-readable tables and deterministic JSON records.
//! Exact rationals print as "p/q"; upper bounds as {radicand, root}.

use num_traits::ToPrimitive;
use serde::Serialize;
use serde_json::Value;

use jetbound_core::bound_engine::{BoundResult, UpperBound};
use jetbound_core::estimation_methods::{DecompositionBound, ValidatedDecomposition};
use jetbound_core::Rat;

use crate::instance::rat_to_string;

#[derive(Serialize)]
pub struct UpperJson {
    pub radicand: String,
    pub root: u32,
    pub approx: f64,
}

pub fn upper_json(u: &UpperBound) -> UpperJson {
    match u {
        UpperBound::Exact(v) => UpperJson {
            radicand: rat_to_string(v),
            root: 1,
            approx: u.to_f64(),
        },
        UpperBound::Root { radicand, index } => UpperJson {
            radicand: rat_to_string(radicand),
            root: *index,
            approx: u.to_f64(),
        },
    }
}

#[derive(Serialize)]
pub struct BoundJson {
    pub name: String,
    pub method: String,
    pub lower: String,
    pub lower_approx: f64,
    pub upper: UpperJson,
    pub k_used: u32,
    pub m_achieved: i64,
    pub certified: bool,
    pub exact_value: Option<String>,
}

pub fn bound_json(name: &str, res: &BoundResult) -> BoundJson {
    BoundJson {
        name: name.to_string(),
        method: res.method.tag().to_string(),
        lower: rat_to_string(&res.lower),
        lower_approx: res.lower.to_f64().unwrap_or(f64::NAN),
        upper: upper_json(&res.upper),
        k_used: res.k_used,
        m_achieved: res.m_achieved,
        certified: res.certified,
        exact_value: res.exact_value().map(|v| rat_to_string(&v)),
    }
}

pub fn render_bound_human(name: &str, res: &BoundResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("instance      {name}\n"));
    out.push_str(&format!("method        {}\n", res.method.tag()));
    let label = if res.certified { "certified" } else { "probabilistic" };
    out.push_str(&format!(
        "lower bound   {}  (~{:.6})  [{label}]\n",
        rat_to_string(&res.lower),
        res.lower.to_f64().unwrap_or(f64::NAN)
    ));
    out.push_str(&format!(
        "upper bound   {}  (~{:.6})  [volume formula]\n",
        res.upper,
        res.upper.to_f64()
    ));
    out.push_str(&format!(
        "witness       k = {}, jets m = {}\n",
        res.k_used, res.m_achieved
    ));
    if let Some(v) = res.exact_value() {
        out.push_str(&format!("exact value   {}\n", rat_to_string(&v)));
    }
    out
}

pub fn render_certificate(cert: &[Rat], phi: &[Vec<i64>]) -> String {
    let terms: Vec<String> = cert
        .iter()
        .zip(phi)
        .filter(|(c, _)| !num_traits::Zero::is_zero(*c))
        .map(|(c, lambda)| {
            let mono = lambda
                .iter()
                .enumerate()
                .filter(|(_, &e)| e != 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("u{}", i + 1)
                    } else {
                        format!("u{}^{e}", i + 1)
                    }
                })
                .collect::<Vec<_>>()
                .join("*");
            if mono.is_empty() {
                format!("({})", rat_to_string(c))
            } else {
                format!("({})*{mono}", rat_to_string(c))
            }
        })
        .collect();
    terms.join(" + ")
}

pub fn render_witness_human(
    vd: &ValidatedDecomposition,
    out: &DecompositionBound,
) -> Result<String, crate::CliError> {
    let mut s = String::new();
    let witness = &out.witness;
    s.push_str(&format!(
        "lifting witness (values scaled by {} are integral):\n",
        witness.scale()
    ));
    for (i, cell) in vd.cells().iter().enumerate() {
        let (a, b) = &witness.affine()[i];
        let coeffs = a.iter().map(rat_to_string).collect::<Vec<_>>().join(", ");
        s.push_str(&format!("  cell {i}: a = ({coeffs}), b = {}\n", rat_to_string(b)));
        let pts = cell.lattice_points()?;
        let values: Vec<String> = pts
            .points()
            .iter()
            .map(|u| {
                let v = witness.value_at(
                    i,
                    &jetbound_core::lattice_geometry::RationalVector::from_integers(u),
                ) * Rat::from_integer(witness.scale().clone());
                format!("{u:?} -> {}", rat_to_string(&v))
            })
            .collect();
        s.push_str(&format!("    scaled values: {}\n", values.join(", ")));
    }
    Ok(s)
}

pub fn to_stable_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report structs always serialize")
}

pub fn value_to_string(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("valid JSON value")
}
