//! Shared helpers for the binary tests: a process runner that isolates the
//! seed environment, the shipped output schema, and a validator for the
//! schema subset it uses.

#![allow(dead_code)]

use std::process::Command;

use serde_json::Value;

pub struct Out {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Out {
    run_env(args, &[])
}

pub fn run_env(args: &[&str], envs: &[(&str, &str)]) -> Out {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pysim"));
    cmd.env_remove("PYSIM_SEED");
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Out {
        status: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("stdout is utf8"),
        stderr: String::from_utf8(out.stderr).expect("stderr is utf8"),
    }
}

pub fn schema() -> Value {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../schema/output.schema.json"
    );
    let text = std::fs::read_to_string(path).expect("schema file is readable");
    serde_json::from_str(&text).expect("schema parses")
}

/// Validates `instance` against the schema subset the shipped schema uses:
/// local `$ref`, `oneOf` (exactly one branch), `type`, `enum`, `minimum`,
/// `required`, `properties` with `additionalProperties: false`, and
/// `items`.
pub fn validate(schema: &Value, instance: &Value) -> Result<(), String> {
    check(schema, instance, schema, "$")
}

fn resolve<'a>(node: &'a Value, root: &'a Value) -> &'a Value {
    match node.get("$ref").and_then(Value::as_str) {
        Some(r) => {
            let path = r.strip_prefix("#/").expect("refs are document-local");
            let mut cur = root;
            for seg in path.split('/') {
                cur = cur
                    .get(seg)
                    .unwrap_or_else(|| panic!("ref target {r} exists"));
            }
            resolve(cur, root)
        }
        None => node,
    }
}

fn check(node: &Value, inst: &Value, root: &Value, path: &str) -> Result<(), String> {
    let node = resolve(node, root);

    if let Some(alts) = node.get("oneOf").and_then(Value::as_array) {
        let hits = alts
            .iter()
            .filter(|alt| check(alt, inst, root, path).is_ok())
            .count();
        if hits != 1 {
            return Err(format!(
                "{path}: matched {hits} oneOf alternatives, exactly 1 required"
            ));
        }
    }

    if let Some(ty) = node.get("type").and_then(Value::as_str) {
        let ok = match ty {
            "object" => inst.is_object(),
            "array" => inst.is_array(),
            "string" => inst.is_string(),
            "number" => inst.is_number(),
            "integer" => inst.as_i64().is_some() || inst.as_u64().is_some(),
            "boolean" => inst.is_boolean(),
            other => return Err(format!("{path}: unsupported type keyword {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {ty}, got {inst}"));
        }
    }

    if let Some(allowed) = node.get("enum").and_then(Value::as_array) {
        if !allowed.contains(inst) {
            return Err(format!("{path}: {inst} not among the allowed values"));
        }
    }

    if let Some(min) = node.get("minimum").and_then(Value::as_f64) {
        let v = inst
            .as_f64()
            .ok_or_else(|| format!("{path}: minimum applies to numbers"))?;
        if v < min {
            return Err(format!("{path}: {v} below minimum {min}"));
        }
    }

    if let Some(obj) = inst.as_object() {
        if let Some(req) = node.get("required").and_then(Value::as_array) {
            for key in req {
                let key = key.as_str().expect("required keys are strings");
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing required key {key}"));
                }
            }
        }
        if let Some(props) = node.get("properties").and_then(Value::as_object) {
            let closed = node.get("additionalProperties") == Some(&Value::Bool(false));
            for (key, val) in obj {
                match props.get(key) {
                    Some(sub) => check(sub, val, root, &format!("{path}.{key}"))?,
                    None if closed => return Err(format!("{path}: unexpected key {key}")),
                    None => {}
                }
            }
        }
    }

    if let (Some(arr), Some(items)) = (inst.as_array(), node.get("items")) {
        for (i, val) in arr.iter().enumerate() {
            check(items, val, root, &format!("{path}[{i}]"))?;
        }
    }

    Ok(())
}
