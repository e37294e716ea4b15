//! JSON formats for fans, weights, functions, matroids and operation trees.
//! Output is canonical: object keys sorted, integers outside the safe range
//! written as decimal strings, fractions as `"p/q"`.

use std::path::Path;

use num_traits::{One, ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::balancing::Weight;
use crate::error::{Error, Result};
use crate::fan::{Cone, Fan};
use crate::linalg::{Int, Rat};
use crate::matroid::Matroid;
use crate::piecewise::ConewiseLinear;
use crate::pipeline::OpTree;

/// Largest integer JSON readers are guaranteed to round-trip.
const SAFE: i64 = (1 << 53) - 1;

fn perr(msg: impl Into<String>) -> Error {
    Error::Parse(msg.into())
}

pub fn int_to_json(x: &Int) -> Value {
    match x.to_i64() {
        Some(v) if v.abs() <= SAFE => json!(v),
        _ => Value::String(x.to_string()),
    }
}

pub fn int_from_json(v: &Value) -> Result<Int> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Int::from(i))
            } else if let Some(u) = n.as_u64() {
                Ok(Int::from(u))
            } else {
                Err(perr(format!("expected an integer, got {n}")))
            }
        }
        Value::String(s) => s.trim().parse::<Int>().map_err(|_| perr(format!("bad integer {s:?}"))),
        _ => Err(perr(format!("expected an integer, got {v}"))),
    }
}

pub fn rat_to_json(x: &Rat) -> Value {
    if x.denom().is_one() {
        int_to_json(x.numer())
    } else {
        Value::String(format!("{}/{}", x.numer(), x.denom()))
    }
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::String(s) if s.contains('/') => {
            let (p, q) = s.split_once('/').expect("contains /");
            let p: Int = p.trim().parse().map_err(|_| perr(format!("bad fraction {s:?}")))?;
            let q: Int = q.trim().parse().map_err(|_| perr(format!("bad fraction {s:?}")))?;
            if q.is_zero() {
                return Err(perr(format!("zero denominator in {s:?}")));
            }
            Ok(Rat::new(p, q))
        }
        _ => Ok(Rat::from_integer(int_from_json(v)?)),
    }
}

fn array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| perr(format!("{what} must be an array")))
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| perr(format!("missing key {key:?}")))
}

fn usize_from(v: &Value, what: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| perr(format!("{what} must be a nonnegative integer")))
}

fn index_list(v: &Value, what: &str) -> Result<Vec<usize>> {
    array(v, what)?.iter().map(|x| usize_from(x, what)).collect()
}

pub fn ints_to_json(v: &[Int]) -> Value {
    Value::Array(v.iter().map(int_to_json).collect())
}

pub fn rats_to_json(v: &[Rat]) -> Value {
    Value::Array(v.iter().map(rat_to_json).collect())
}

pub fn cone_to_json(c: &[usize]) -> Value {
    Value::Array(c.iter().map(|&i| json!(i)).collect())
}

// ---------------------------------------------------------------------------
// fans and weights

/// `{ "rank", "rays", "cones" (maximal), "weights"? }`.
pub fn fan_to_json(fan: &Fan, w: Option<&Weight>) -> Value {
    let cones = fan.maximal_cones();
    let mut m = Map::new();
    m.insert("rank".into(), json!(fan.rank()));
    m.insert("rays".into(), Value::Array(fan.rays().iter().map(|r| ints_to_json(r)).collect()));
    m.insert("cones".into(), Value::Array(cones.iter().map(|c| cone_to_json(c)).collect()));
    if let Some(w) = w {
        m.insert("weights".into(), Value::Array(cones.iter().map(|c| int_to_json(&w.get(fan, c))).collect()));
    }
    Value::Object(m)
}

pub fn fan_from_json(v: &Value) -> Result<(Fan, Option<Weight>)> {
    let rays: Vec<Vec<Int>> = array(field(v, "rays")?, "rays")?
        .iter()
        .map(|r| array(r, "ray")?.iter().map(int_from_json).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let rank = match v.get("rank") {
        Some(r) => usize_from(r, "rank")?,
        None => rays.first().map(|r| r.len()).ok_or_else(|| perr("rank missing and no rays given"))?,
    };
    let cones: Vec<Vec<usize>> =
        array(field(v, "cones")?, "cones")?.iter().map(|c| index_list(c, "cone")).collect::<Result<_>>()?;
    let fan = Fan::new(rank, rays, cones.clone(), true)?;
    let weight = match v.get("weights") {
        None | Some(Value::Null) => None,
        Some(ws) => {
            let ws: Vec<Int> = array(ws, "weights")?.iter().map(int_from_json).collect::<Result<_>>()?;
            if ws.len() != cones.len() {
                return Err(perr(format!("{} weights for {} cones", ws.len(), cones.len())));
            }
            let d = fan.dim();
            let mut entries = Vec::new();
            for (c, x) in cones.iter().zip(ws) {
                if c.len() == d {
                    entries.push((c.clone(), x));
                } else if !x.is_zero() {
                    return Err(Error::InvalidFan(format!("nonzero weight on the non-facet cone {c:?}")));
                }
            }
            Some(Weight::from_map(&fan, d, &entries)?)
        }
    };
    Ok((fan, weight))
}

/// `{ "dimension": p, "entries": [[cone, value], ...] }`, zero entries omitted.
pub fn weight_to_json(fan: &Fan, w: &Weight) -> Value {
    let entries: Vec<Value> = w
        .entries(fan)
        .into_iter()
        .filter(|(_, x)| !x.is_zero())
        .map(|(c, x)| Value::Array(vec![cone_to_json(&c), int_to_json(&x)]))
        .collect();
    json!({ "dimension": w.dim, "entries": entries })
}

pub fn weight_from_json(fan: &Fan, v: &Value) -> Result<Weight> {
    let dim = usize_from(field(v, "dimension")?, "dimension")?;
    let mut entries = Vec::new();
    for e in array(field(v, "entries")?, "entries")? {
        let pair = array(e, "entry")?;
        if pair.len() != 2 {
            return Err(perr("weight entries are [cone, value] pairs"));
        }
        entries.push((index_list(&pair[0], "cone")?, int_from_json(&pair[1])?));
    }
    Weight::from_map(fan, dim, &entries)
}

// ---------------------------------------------------------------------------
// functions

pub fn function_to_json(f: &ConewiseLinear) -> Value {
    json!({ "values": rats_to_json(&f.values) })
}

pub fn function_from_json(v: &Value) -> Result<ConewiseLinear> {
    let vals = match v {
        Value::Array(_) => v,
        _ => field(v, "values")?,
    };
    Ok(ConewiseLinear::new(array(vals, "values")?.iter().map(rat_from_json).collect::<Result<_>>()?))
}

// ---------------------------------------------------------------------------
// matroids

pub fn matroid_to_json(m: &Matroid) -> Value {
    let bases: Vec<Value> = m.bases().iter().map(|b| cone_to_json(b)).collect();
    json!({ "ground": m.ground(), "bases": bases })
}

pub fn matroid_from_json(v: &Value) -> Result<Matroid> {
    let ground = usize_from(field(v, "ground")?, "ground")?;
    let bases: Vec<Vec<usize>> =
        array(field(v, "bases")?, "bases")?.iter().map(|b| index_list(b, "basis")).collect::<Result<_>>()?;
    Matroid::from_bases(ground, &bases)
}

/// Parses the `r,n` shorthand for `U_{r,n}`.
pub fn uniform_from_str(s: &str) -> Result<Matroid> {
    let (r, n) = s.split_once(',').ok_or_else(|| perr(format!("expected r,n, got {s:?}")))?;
    let r: usize = r.trim().parse().map_err(|_| perr(format!("bad rank {r:?}")))?;
    let n: usize = n.trim().parse().map_err(|_| perr(format!("bad size {n:?}")))?;
    Matroid::uniform(r, n)
}

// ---------------------------------------------------------------------------
// operation trees

pub fn optree_to_json(t: &OpTree) -> Value {
    let mut m = Map::new();
    m.insert("op".into(), json!(t.op_name()));
    match t {
        OpTree::Point(n) => {
            m.insert("weight".into(), json!(n));
        }
        OpTree::Line => {}
        OpTree::Product(a, b) => {
            m.insert("args".into(), json!([optree_to_json(a), optree_to_json(b)]));
        }
        OpTree::TropMod(a, f) => {
            m.insert("args".into(), json!([optree_to_json(a)]));
            m.insert("function".into(), function_to_json(f));
        }
        OpTree::BlowUp(a, c, ray) => {
            m.insert("args".into(), json!([optree_to_json(a)]));
            m.insert("cone".into(), cone_to_json(c));
            if let Some(r) = ray {
                m.insert("ray".into(), ints_to_json(r));
            }
        }
        OpTree::BlowDown(a, r) => {
            m.insert("args".into(), json!([optree_to_json(a)]));
            m.insert("ray".into(), json!(r));
        }
    }
    Value::Object(m)
}

fn args(v: &Value, n: usize, op: &str) -> Result<Vec<OpTree>> {
    let a = array(field(v, "args")?, "args")?;
    if a.len() != n {
        return Err(perr(format!("{op} takes {n} argument(s), got {}", a.len())));
    }
    a.iter().map(optree_from_json).collect()
}

pub fn optree_from_json(v: &Value) -> Result<OpTree> {
    let op = field(v, "op")?.as_str().ok_or_else(|| perr("op must be a string"))?;
    match op {
        "point" => {
            let n = match v.get("weight") {
                Some(w) => w.as_i64().ok_or_else(|| perr("point weight must be an integer"))?,
                None => 1,
            };
            Ok(OpTree::Point(n))
        }
        "line" => Ok(OpTree::Line),
        "product" => {
            let mut a = args(v, 2, op)?;
            let b = a.pop().expect("two args");
            Ok(OpTree::product(a.pop().expect("two args"), b))
        }
        "tropmod" => {
            let a = args(v, 1, op)?.pop().expect("one arg");
            Ok(OpTree::tropmod(a, function_from_json(field(v, "function")?)?))
        }
        "blowup" => {
            let a = args(v, 1, op)?.pop().expect("one arg");
            let cone = index_list(field(v, "cone")?, "cone")?;
            match v.get("ray") {
                None | Some(Value::Null) => Ok(OpTree::blowup(a, &cone)),
                Some(r) => {
                    let ray: Vec<Int> = array(r, "ray")?.iter().map(int_from_json).collect::<Result<_>>()?;
                    Ok(OpTree::blowup_at(a, &cone, ray))
                }
            }
        }
        "blowdown" => {
            let a = args(v, 1, op)?.pop().expect("one arg");
            Ok(OpTree::blowdown(a, usize_from(field(v, "ray")?, "ray")?))
        }
        other => Err(perr(format!("unknown op {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// files

pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| perr(e.to_string()))
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| perr(format!("{}: {e}", path.display())))?;
    parse_json(&text).map_err(|e| perr(format!("{}: {e}", path.display())))
}

/// Canonical text of a JSON value (sorted keys, two-space indent, trailing newline).
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, canonical(v)).map_err(|e| perr(format!("{}: {e}", path.display())))
}

/// Orientation from the file, or the reduced one.
pub fn weight_or_reduced(fan: &Fan, w: Option<Weight>) -> Weight {
    w.unwrap_or_else(|| Weight::reduced(fan))
}

pub fn cones_to_json(cones: &[Cone]) -> Value {
    Value::Array(cones.iter().map(|c| cone_to_json(c)).collect())
}
