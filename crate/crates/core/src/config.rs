//! Plain-text tree spec files.
//!
//! ```text
//! # binary branchings at spheres 1 and 5
//! L = 1,5
//! k = 2,2
//! depth = 9
//! ```
//!
//! Each non-blank line is `key = value`; `#` starts a comment. Lists are
//! comma-separated integers without a trailing comma. With `preset = NAME`
//! every other key except `depth` and `label` is passed to
//! [`crate::model::preset`] as a parameter.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{preset, validate_spec, PresetParams, TreeSpec};

#[derive(Clone, Debug, PartialEq)]
pub struct SpecFile {
    pub spec: TreeSpec,
    pub depth: Option<usize>,
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<u64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<u64>().map_err(|_| Error::SpecParse {
                line,
                message: if item.is_empty() {
                    format!("empty item in `{key}` list")
                } else {
                    format!("`{item}` in `{key}` is not a nonnegative integer")
                },
            })
        })
        .collect()
}

fn is_key(key: &str) -> bool {
    !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

pub fn parse_spec_file(text: &str) -> Result<SpecFile> {
    let mut pairs: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(Error::SpecParse {
                line,
                message: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if !is_key(key) {
            return Err(Error::SpecParse {
                line,
                message: format!("invalid key `{key}`"),
            });
        }
        if pairs
            .insert(key.to_string(), (line, value.to_string()))
            .is_some()
        {
            return Err(Error::SpecParse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let depth = match pairs.remove("depth") {
        None => None,
        Some((line, v)) => match v.parse::<i64>() {
            Ok(d) if d < 0 => return Err(Error::DepthNegative(d)),
            Ok(d) => Some(d as usize),
            Err(_) => {
                return Err(Error::SpecParse {
                    line,
                    message: format!("depth `{v}` is not an integer"),
                })
            }
        },
    };
    let label = pairs.remove("label").map(|(_, v)| v);

    let spec = if let Some((line, name)) = pairs.remove("preset") {
        if let Some(key) = ["L", "k"].into_iter().find(|k| pairs.contains_key(*k)) {
            return Err(Error::SpecParse {
                line: pairs[key].0,
                message: format!("`{key}` cannot be combined with `preset` (line {line})"),
            });
        }
        let params: PresetParams = pairs.into_iter().map(|(k, (_, v))| (k, v)).collect();
        preset(&name, &params)?
    } else {
        let allow_root = match pairs.remove("allow_root_branching") {
            None => false,
            Some((_, v)) if v == "true" => true,
            Some((_, v)) if v == "false" => false,
            Some((line, v)) => {
                return Err(Error::SpecParse {
                    line,
                    message: format!("allow_root_branching must be true or false, got `{v}`"),
                })
            }
        };
        let positions = match pairs.remove("L") {
            Some((line, v)) => parse_list(line, "L", &v)?,
            None => Vec::new(),
        };
        let factors = match pairs.remove("k") {
            Some((line, v)) => parse_list(line, "k", &v)?,
            None => Vec::new(),
        };
        if let Some((key, (line, _))) = pairs.into_iter().next() {
            return Err(Error::SpecParse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        validate_spec(positions, factors, allow_root)?.with_label("spec")
    };
    let spec = match label {
        Some(label) => spec.with_label(label),
        None => spec,
    };
    Ok(SpecFile { spec, depth })
}

/// Renders a spec back into the file format (explicit `L`/`k` form).
pub fn render_spec_file(spec: &TreeSpec, depth: Option<usize>) -> String {
    let join = |v: &[u64]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    };
    let mut out = String::new();
    if spec.positions().first() == Some(&0) {
        out.push_str("allow_root_branching = true\n");
    }
    out.push_str(&format!(
        "L = {}\nk = {}\n",
        join(spec.positions()),
        join(spec.factors())
    ));
    if let Some(d) = depth {
        out.push_str(&format!("depth = {d}\n"));
    }
    out
}
