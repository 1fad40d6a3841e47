use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use kchain::chain::{OffDiagSign, SpinChain};
use kchain::families::{validate, FamilyKind, FamilySpec, Scalar};
use kchain::qseries::parse_rational;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{Map, Value};

/// Malformed input: bad JSON, unknown tags, missing fields, bad grids.
#[derive(Debug)]
pub struct InputError(pub String);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

pub enum Source {
    Family(FamilySpec),
    Chain(SpinChain),
}

pub struct SpecFile {
    pub source: Source,
    pub sign: OffDiagSign,
}

impl SpecFile {
    pub fn family(&self) -> Option<&FamilySpec> {
        match &self.source {
            Source::Family(spec) => Some(spec),
            Source::Chain(_) => None,
        }
    }
}

pub fn load(path: &Path) -> Result<SpecFile> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let value: Value = serde_json::from_str(&text).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let spec = parse(&value)?;
    if let Source::Family(f) = &spec.source {
        validate(f).into_result()?;
    }
    Ok(spec)
}

fn field<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a Value> {
    obj.get(name).ok_or_else(|| input_error(format!("missing field {name:?}")))
}

fn integer(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(BigInt::from(n.as_i64().unwrap())),
        Value::String(s) => s.trim().parse().map_err(|_| input_error(format!("{what}: {s:?} is not an integer"))),
        _ => Err(input_error(format!("{what}: expected an integer"))),
    }
}

/// Numbers, `"a/b"` strings and `{"num", "den"}` objects, all kept exact.
pub fn scalar(v: &Value, what: &str) -> Result<Scalar> {
    let exact = match v {
        Value::Number(n) => parse_rational(&n.to_string()),
        Value::String(s) => parse_rational(s),
        Value::Object(o) => {
            let num = integer(field(o, "num")?, what)?;
            let den = integer(field(o, "den")?, what)?;
            if den.is_zero() {
                return Err(input_error(format!("{what}: zero denominator")));
            }
            Some(BigRational::new(num, den))
        }
        _ => None,
    };
    exact.map(Scalar::Exact).ok_or_else(|| input_error(format!("{what}: cannot read {v} as a number")))
}

fn real_list(v: &Value, what: &str) -> Result<Vec<f64>> {
    let items = v.as_array().ok_or_else(|| input_error(format!("{what}: expected an array")))?;
    items
        .iter()
        .enumerate()
        .map(|(i, item)| match item {
            Value::Number(n) => n.as_f64().ok_or_else(|| input_error(format!("{what}[{i}]: not finite"))),
            other => scalar(other, &format!("{what}[{i}]")).map(|s| s.to_f64()),
        })
        .collect()
}

pub fn parse(value: &Value) -> Result<SpecFile> {
    let obj = value.as_object().ok_or_else(|| input_error("spec must be a JSON object"))?;
    let sign = match obj.get("sign").and_then(Value::as_str) {
        None | Some("neg") => OffDiagSign::NegativeOffDiag,
        Some("pos") => OffDiagSign::PositiveOffDiag,
        Some(other) => return Err(input_error(format!("sign must be \"pos\" or \"neg\", got {other:?}"))),
    };
    let tag = field(obj, "family")?.as_str().ok_or_else(|| input_error("family must be a string"))?;
    if tag == "chain" {
        let j = real_list(field(obj, "J")?, "J")?;
        let h = real_list(field(obj, "h")?, "h")?;
        return Ok(SpecFile { source: Source::Chain(SpinChain::new(j, h)?), sign });
    }
    let kind = FamilyKind::from_name(tag).ok_or_else(|| {
        let known: Vec<&str> = FamilyKind::ALL.iter().map(|k| k.name()).collect();
        input_error(format!("unknown family {tag:?}; expected one of {} or chain", known.join(", ")))
    })?;
    let n = field(obj, "N")?
        .as_u64()
        .ok_or_else(|| input_error("N must be a non-negative integer"))? as usize;
    let q = scalar(field(obj, "q")?, "q")?;
    let empty = Map::new();
    let params = match obj.get("params") {
        Some(Value::Object(p)) => p,
        None => &empty,
        Some(_) => return Err(input_error("params must be an object")),
    };
    for key in params.keys() {
        if !kind.param_names().contains(&key.as_str()) {
            return Err(input_error(format!("{tag} has no parameter {key:?}")));
        }
    }
    let values = kind
        .param_names()
        .iter()
        .map(|name| scalar(field(params, name)?, name))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpecFile { source: Source::Family(FamilySpec::new(kind.with_params(&values), n, q)), sign })
}
