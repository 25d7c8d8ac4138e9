//! Input formats.
//!
//! The text format, one item per line, `#` starting a comment:
//!
//! ```text
//! dim 2
//! states q1 q2
//! q1 -> q1 [-1 1]
//! q1 -> q2 [0 0]
//! ```
//!
//! `dim` comes first, followed by one or more `states` lines, followed by
//! transitions. Identifiers match `[A-Za-z_][A-Za-z0-9_]*`. A JSON document
//! with the same fields is accepted as well.

use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::vass::{RawState, RawTransition, RawVass, Vass, VassError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("{0}")]
    Invalid(#[from] VassError),
    #[error("invalid JSON input: {0}")]
    Json(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::Syntax { .. } => "Syntax",
            FormatError::Invalid(e) => e.code(),
            FormatError::Json(_) => "Json",
            FormatError::Io { .. } => "Io",
        }
    }
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn identifier(s: &str, line: usize) -> Result<String, FormatError> {
    if is_identifier(s) {
        Ok(s.to_string())
    } else {
        Err(syntax(line, format!("`{s}` is not a valid identifier")))
    }
}

/// Parses the text format without validating it.
pub fn parse_raw(text: &str) -> Result<RawVass, FormatError> {
    let mut raw = RawVass::default();
    let mut seen_dim = false;
    let mut seen_transition = false;
    for (idx, full) in text.lines().enumerate() {
        let line = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let head = words.next().expect("non-empty line");
        if !seen_dim {
            if head != "dim" {
                return Err(syntax(line, "expected `dim <d>` as the first line"));
            }
            let d: Vec<&str> = words.collect();
            let [d] = d.as_slice() else {
                return Err(syntax(line, "expected exactly one dimension after `dim`"));
            };
            raw.dimension = d
                .parse()
                .map_err(|_| syntax(line, format!("`{d}` is not a dimension")))?;
            if raw.dimension == 0 {
                return Err(syntax(line, "dimension must be positive"));
            }
            seen_dim = true;
            continue;
        }
        if head == "dim" {
            return Err(syntax(line, "`dim` may appear only once"));
        }
        if head == "states" {
            if seen_transition {
                return Err(syntax(line, "`states` lines must precede all transitions"));
            }
            let names: Vec<&str> = words.collect();
            if names.is_empty() {
                return Err(syntax(line, "`states` needs at least one identifier"));
            }
            for n in names {
                raw.states.push(RawState {
                    name: identifier(n, line)?,
                    line: Some(line),
                });
            }
            continue;
        }
        if raw.states.is_empty() {
            return Err(syntax(line, "expected a `states` line before transitions"));
        }
        raw.transitions.push(parse_transition(content, line)?);
        seen_transition = true;
    }
    if !seen_dim {
        return Err(syntax(1, "missing `dim <d>` line"));
    }
    Ok(raw)
}

fn parse_transition(content: &str, line: usize) -> Result<RawTransition, FormatError> {
    let (lhs, rhs) = content
        .split_once("->")
        .ok_or_else(|| syntax(line, "expected `q -> q' [e1 ... ed]`"))?;
    let source = identifier(lhs.trim(), line)?;
    let (target, rest) = rhs
        .split_once('[')
        .ok_or_else(|| syntax(line, "missing `[` before the update vector"))?;
    let target = identifier(target.trim(), line)?;
    let (body, tail) = rest
        .split_once(']')
        .ok_or_else(|| syntax(line, "missing `]` after the update vector"))?;
    if !tail.trim().is_empty() {
        return Err(syntax(line, format!("unexpected `{}` after the update vector", tail.trim())));
    }
    let update = body
        .split_whitespace()
        .map(|e| {
            e.parse::<i64>()
                .map_err(|_| syntax(line, format!("`{e}` is not an integer")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RawTransition {
        source,
        update,
        target,
        line: Some(line),
    })
}

pub fn parse_vass(text: &str) -> Result<Vass, FormatError> {
    Ok(Vass::validate(&parse_raw(text)?)?)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonVass {
    pub dim: usize,
    pub states: Vec<String>,
    pub transitions: Vec<JsonTransition>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JsonTransition {
    pub source: String,
    pub update: Vec<i64>,
    pub target: String,
}

pub fn parse_json(text: &str) -> Result<Vass, FormatError> {
    let j: JsonVass = serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    for s in j.states.iter().chain(j.transitions.iter().flat_map(|t| [&t.source, &t.target])) {
        if !is_identifier(s) {
            return Err(FormatError::Json(format!("`{s}` is not a valid identifier")));
        }
    }
    let raw = RawVass {
        dimension: j.dim,
        states: j.states.into_iter().map(|name| RawState { name, line: None }).collect(),
        transitions: j
            .transitions
            .into_iter()
            .map(|t| RawTransition {
                source: t.source,
                update: t.update,
                target: t.target,
                line: None,
            })
            .collect(),
    };
    Ok(Vass::validate(&raw)?)
}

pub fn to_json(v: &Vass) -> String {
    let j = JsonVass {
        dim: v.dimension(),
        states: v.state_names().to_vec(),
        transitions: v
            .transitions()
            .iter()
            .map(|t| JsonTransition {
                source: v.state_name(t.source).to_string(),
                update: t.update.0.clone(),
                target: v.state_name(t.target).to_string(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&j).expect("serializable")
}

/// Renders in the text format, keeping declaration order.
pub fn to_text(v: &Vass) -> String {
    let mut out = format!("dim {}\nstates {}\n", v.dimension(), v.state_names().join(" "));
    for t in v.transitions() {
        out.push_str(&v.render_transition(t));
        out.push('\n');
    }
    out
}

/// Reads a VASS from a file, choosing the JSON parser for `.json` files.
pub fn read_vass(path: &FsPath) -> Result<Vass, FormatError> {
    let text = std::fs::read_to_string(path).map_err(|e| FormatError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    if path.extension().is_some_and(|e| e == "json") {
        parse_json(&text)
    } else {
        parse_vass(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vass::Line;

    const FIG2A: &str = "# quadratic\ndim 2\nstates q1 q2\nq1 -> q1 [-1 1]\nq1 -> q2 [0 0]  # move\nq2 -> q1 [-1 0]\nq2 -> q2 [1 -1]\n";

    #[test]
    fn parses_fig2a() {
        let v = parse_vass(FIG2A).unwrap();
        assert_eq!(v.dimension(), 2);
        assert_eq!(v.transitions().len(), 4);
        assert_eq!(parse_vass(&to_text(&v)).unwrap(), v);
        assert_eq!(parse_json(&to_json(&v)).unwrap(), v);
    }

    #[test]
    fn multiple_states_lines() {
        let v = parse_vass("dim 1\nstates a\nstates b\na->b[1]\n").unwrap();
        assert_eq!(v.state_names(), ["a", "b"]);
    }

    #[test]
    fn errors_carry_lines() {
        let e = parse_vass("dim 2\nstates q1 q2\nq1 -> q3 [0 0]\n").unwrap_err();
        assert_eq!(
            e,
            FormatError::Invalid(VassError::UnknownState {
                line: Line(Some(3)),
                name: "q3".into()
            })
        );
        assert_eq!(e.to_string(), "line 3: unknown state `q3`");
        let e = parse_vass("dim 2\nstates q1\nq1 -> q1 [-2 0]\n").unwrap_err();
        assert_eq!(e.code(), "UpdateOutOfRange");
        let e = parse_vass("states q\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax { line: 1, .. }));
        let e = parse_vass("dim 1\nstates 1q\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax { line: 2, .. }));
        let e = parse_vass("dim 1\nstates q\nq -> q [1] extra\n").unwrap_err();
        assert!(matches!(e, FormatError::Syntax { line: 3, .. }));
        let e = parse_vass("dim 1\nstates q\nq -> q [1 0]\n").unwrap_err();
        assert_eq!(e.code(), "DimensionMismatch");
    }
}
