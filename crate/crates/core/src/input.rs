//! Reading manifold files and matrix literals, with located diagnostics.
//!
//! A manifold file is JSON:
//!
//! ```json
//! {
//!   "pieces": [
//!     {"id": 1, "euler": "-1", "genus": 1},
//!     {"id": 2, "euler": "-1/2", "genus": 1, "cone_orders": [2]}
//!   ],
//!   "tori": [{"from": 1, "to": 2, "p": 1}]
//! }
//! ```
//!
//! Rationals are strings `[+-]digits[/digits]`; `q`, `q_prime`, `p_prime`
//! default to `1`, `1`, `0`.

use std::fmt;

use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::manifold::{DecompositionGraph, Violation};
use crate::rational::{parse_rational, Rational};

/// A problem with an input file, located where possible.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct InputError {
    pub message: String,
    /// 1-based line and the text of that line.
    pub line: Option<(usize, String)>,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.line {
            Some((n, text)) => write!(f, "line {n}: {}\n  {n} | {}", self.message, text.trim_end()),
            None => f.write_str(&self.message),
        }
    }
}

impl InputError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            line: None,
        }
    }

    fn at(message: impl Into<String>, text: &str, line: usize) -> Self {
        let content = text.lines().nth(line.saturating_sub(1)).unwrap_or("").to_string();
        Self {
            message: message.into(),
            line: Some((line, content)),
        }
    }
}

/// Parses and validates a manifold file; every validation failure is
/// reported, each pointing at the piece or torus it concerns.
pub fn parse_manifold(text: &str) -> Result<DecompositionGraph, Vec<InputError>> {
    let graph: DecompositionGraph = serde_json::from_str(text).map_err(|e| {
        let msg = e.to_string();
        let msg = msg.split(" at line ").next().unwrap_or(&msg).to_string();
        vec![if e.line() > 0 {
            InputError::at(format!("{msg} (column {})", e.column()), text, e.line())
        } else {
            InputError::new(msg)
        }]
    })?;
    match graph.validate() {
        Ok(()) => Ok(graph),
        Err(violations) => Err(violations
            .iter()
            .map(|v| match locate(text, v) {
                Some(line) => InputError::at(v.to_string(), text, line),
                None => InputError::new(v.to_string()),
            })
            .collect()),
    }
}

/// Line of the JSON object a violation refers to, found by counting
/// `"from"` keys for tori and matching `"id"` values for pieces.
fn locate(text: &str, v: &Violation) -> Option<usize> {
    let torus_line = |k: usize| {
        text.match_indices("\"from\"")
            .nth(k)
            .map(|(pos, _)| line_of(text, pos))
    };
    let piece_line = |id: i64| {
        text.match_indices("\"id\"").find_map(|(pos, key)| {
            let rest = text[pos + key.len()..].trim_start().strip_prefix(':')?;
            let digits: String = rest
                .trim_start()
                .chars()
                .take_while(|c| c.is_ascii_digit() || *c == '-')
                .collect();
            (digits.parse::<i64>().ok()? == id).then(|| line_of(text, pos))
        })
    };
    match v {
        Violation::UnknownPiece { torus, .. }
        | Violation::SelfGluing { torus, .. }
        | Violation::NonPositiveP { torus, .. }
        | Violation::BadGluingDeterminant { torus, .. } => torus_line(*torus),
        Violation::DuplicatePieceId(id)
        | Violation::IsolatedPiece(id)
        | Violation::BadConeOrder { piece: id, .. }
        | Violation::NonNegativeOrbifoldEuler { piece: id, .. } => piece_line(*id),
        Violation::NoPieces | Violation::Disconnected { .. } => None,
    }
}

fn line_of(text: &str, pos: usize) -> usize {
    text[..pos].matches('\n').count() + 1
}

/// Parses a square symmetric matrix literal such as `[[-1, 2], [2, "-1/2"]]`.
///
/// Entries are rationals, optionally quoted.
pub fn parse_matrix(text: &str) -> Result<SymMatrix, InputError> {
    let rows = parse_rows(text)?;
    SymMatrix::from_rows(rows).map_err(|e| InputError::new(format!("matrix: {e}")))
}

fn parse_rows(text: &str) -> Result<Vec<Vec<Rational>>, InputError> {
    let bad = |m: &str| InputError::new(format!("matrix literal: {m}"));
    let body = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| bad("expected [[...], ...]"))?;
    let mut rows = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        let inner = rest.strip_prefix('[').ok_or_else(|| bad("expected '['"))?;
        let close = inner.find(']').ok_or_else(|| bad("unclosed row"))?;
        let row = inner[..close]
            .split(',')
            .map(|tok| {
                let tok = tok.trim().trim_matches('"');
                parse_rational(tok).map_err(|e| bad(&format!("entry {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
        rest = inner[close + 1..].trim_start();
        if let Some(r) = rest.strip_prefix(',') {
            rest = r.trim_start();
            if rest.is_empty() {
                return Err(bad("trailing comma"));
            }
        } else if !rest.is_empty() {
            return Err(bad("expected ',' between rows"));
        }
    }
    if rows.is_empty() {
        return Err(bad("empty matrix"));
    }
    Ok(rows)
}
