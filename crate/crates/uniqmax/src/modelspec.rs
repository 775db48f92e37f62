//! Payoff model specifications: built-in aliases and JSON model documents.
//!
//! A model document looks like `{"k": 2, "probs": ["1/4", "1/2", "1/4"]}`.

use std::fmt;
use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;
use uniqmax_core::rational::parse_rational;
use uniqmax_core::{PayoffModel, Violation};

/// A rejected model specification, with the offending token or location.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message}")]
pub struct SpecError {
    pub message: String,
}

impl SpecError {
    fn new(message: impl Into<String>) -> Self {
        SpecError {
            message: message.into(),
        }
    }
}

/// A model together with the text it was resolved from.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedModel {
    pub label: String,
    pub model: PayoffModel,
}

impl fmt::Display for ResolvedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Resolves `classic`, `chess:<p_draw>` or `uniform:<k>`.
pub fn parse_alias(token: &str) -> Result<ResolvedModel, SpecError> {
    let bad = |why: String| SpecError::new(format!("invalid model {token:?}: {why}"));
    let (name, arg) = match token.split_once(':') {
        Some((name, arg)) => (name, Some(arg)),
        None => (token, None),
    };
    let model = match (name, arg) {
        ("classic", None) => PayoffModel::classic(),
        ("chess", Some(p)) => {
            let p_draw = parse_rational(p).map_err(|e| bad(e.to_string()))?;
            PayoffModel::chess(p_draw).map_err(|e| bad(e.to_string()))?
        }
        ("uniform", Some(k)) => {
            let k: u32 = k
                .parse()
                .map_err(|_| bad(format!("{k:?} is not a positive integer")))?;
            PayoffModel::uniform(k).map_err(|e| bad(e.to_string()))?
        }
        _ => {
            return Err(bad(String::from(
                "expected classic, chess:<p_draw>, uniform:<k>, or --model-file",
            )))
        }
    };
    Ok(ResolvedModel {
        label: token.to_string(),
        model,
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    k: u32,
    probs: Vec<String>,
}

/// Parses a JSON model document. Diagnostics name the line and the field.
pub fn parse_model_json(text: &str) -> Result<PayoffModel, SpecError> {
    let doc: ModelDoc = serde_json::from_str(text)
        .map_err(|e| SpecError::new(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let lines = probs_entry_lines(text);
    let line_of = |i: usize| lines.get(i).copied().unwrap_or(1);
    let probs_line = lines.first().copied().unwrap_or(1);
    let mut probs: Vec<BigRational> = Vec::with_capacity(doc.probs.len());
    for (i, raw) in doc.probs.iter().enumerate() {
        let p = parse_rational(raw)
            .map_err(|e| SpecError::new(format!("line {}, field probs[{i}]: {e}", line_of(i))))?;
        probs.push(p);
    }
    if let Err(v) = uniqmax_core::model::validate(doc.k, &probs) {
        let msg = match &v {
            Violation::ZeroK => format!("field k: {v}"),
            Violation::Length { .. } | Violation::NotNormalized { .. } => {
                format!("line {probs_line}, field probs: {v}")
            }
            Violation::NonPositive { index } => {
                format!("line {}, field probs[{index}]: {v}", line_of(*index))
            }
            Violation::Asymmetric { index, mirror } => format!(
                "line {}, field probs[{index}] (mirror probs[{mirror}] on line {}): {v}",
                line_of(*index),
                line_of(*mirror)
            ),
        };
        return Err(SpecError::new(msg));
    }
    PayoffModel::new(doc.k, probs).map_err(|e| SpecError::new(e.to_string()))
}

pub fn load_model_file(path: &Path) -> Result<ResolvedModel, SpecError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SpecError::new(format!("cannot read model file {}: {e}", path.display())))?;
    let model =
        parse_model_json(&text).map_err(|e| SpecError::new(format!("{}: {e}", path.display())))?;
    Ok(ResolvedModel {
        label: format!("file:{}", path.display()),
        model,
    })
}

/// Line numbers (1-based) of the string literals inside the `"probs"` array.
fn probs_entry_lines(text: &str) -> Vec<usize> {
    let Some(key) = text.find("\"probs\"") else {
        return Vec::new();
    };
    let mut line = 1 + text[..key].matches('\n').count();
    let mut out = Vec::new();
    let mut chars = text[key + "\"probs\"".len()..].chars();
    let mut in_array = false;
    while let Some(c) = chars.next() {
        match c {
            '\n' => line += 1,
            '[' if !in_array => in_array = true,
            ']' if in_array => break,
            '"' if in_array => {
                out.push(line);
                let mut escaped = false;
                for c in chars.by_ref() {
                    match c {
                        '\n' => line += 1,
                        '\\' if !escaped => {
                            escaped = true;
                            continue;
                        }
                        '"' if !escaped => break,
                        _ => {}
                    }
                    escaped = false;
                }
            }
            _ => {}
        }
    }
    out
}
