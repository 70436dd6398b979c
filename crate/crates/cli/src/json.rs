use num_bigint::BigInt;
use serde_json::{Map, Value};
use twistlab::arith::Place;
use twistlab::curve::{Curve, TwistDisc};

use crate::commands::JobError;

const SAFE_INT: i64 = 1 << 53;

/// Integers outside ±2^53 are written as decimal strings.
pub fn int(n: &BigInt) -> Value {
    match i64::try_from(n) {
        Ok(v) if v.abs() <= SAFE_INT => Value::from(v),
        _ => Value::String(n.to_string()),
    }
}

pub fn uint(n: u128) -> Value {
    int(&BigInt::from(n))
}

pub fn place(v: Place) -> Value {
    match v {
        Place::Real => Value::String("inf".into()),
        Place::Finite(p) => uint(p),
    }
}

pub fn coeffs(c: &Curve) -> Value {
    Value::Array(c.a().iter().map(int).collect())
}

pub fn parse_int(v: &Value, what: &str) -> Result<BigInt, JobError> {
    let bad = || JobError::Input(format!("{what}: expected an integer, got {v}"));
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(bad),
        Value::String(s) => s.trim().parse().map_err(|_| bad()),
        _ => Err(bad()),
    }
}

pub fn get<'a>(obj: &'a Map<String, Value>, key: &str) -> Option<&'a Value> {
    obj.get(key).filter(|v| !v.is_null())
}

pub fn req<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, JobError> {
    get(obj, key).ok_or_else(|| JobError::Input(format!("missing field \"{key}\"")))
}

pub fn int_field(obj: &Map<String, Value>, key: &str) -> Result<Option<BigInt>, JobError> {
    get(obj, key).map(|v| parse_int(v, key)).transpose()
}

pub fn i64_field(obj: &Map<String, Value>, key: &str) -> Result<Option<i64>, JobError> {
    int_field(obj, key)?
        .map(|n| i64::try_from(&n).map_err(|_| JobError::Input(format!("{key}: {n} out of range"))))
        .transpose()
}

pub fn u64_field(obj: &Map<String, Value>, key: &str) -> Result<Option<u64>, JobError> {
    int_field(obj, key)?
        .map(|n| u64::try_from(&n).map_err(|_| JobError::Input(format!("{key}: {n} out of range"))))
        .transpose()
}

pub fn int_array(v: &Value, what: &str, len: usize) -> Result<Vec<BigInt>, JobError> {
    let arr = v
        .as_array()
        .ok_or_else(|| JobError::Input(format!("{what}: expected an array")))?;
    if arr.len() != len {
        return Err(JobError::Input(format!(
            "{what}: expected {len} entries, got {}",
            arr.len()
        )));
    }
    arr.iter().map(|x| parse_int(x, what)).collect()
}

pub fn twist_disc(obj: &Map<String, Value>) -> Result<TwistDisc, JobError> {
    let d = i64_field(obj, "d")?.ok_or_else(|| JobError::Input("missing field \"d\"".into()))?;
    TwistDisc::new(d).map_err(|e| JobError::Input(e.to_string()))
}
