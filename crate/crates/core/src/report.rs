//! Analysis reports in human-readable and JSON form.
//!
//! Both forms carry the same fields, and every number is an exact
//! rational string.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::decision::{decide, two_piece_d, two_piece_virtually_fibers, Verdict, DecisionError};
use crate::linalg::{Inertia, SymMatrix};
use crate::manifold::{a_minus, split_blocks, Blocks};
use crate::rational::{serde_exact, Rational};
use crate::reduction::{find_singular_reduction, ReductionCertificate, ReductionError};

/// Cross-check data for two-piece manifolds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPieceSummary {
    #[serde(with = "serde_exact::rational")]
    pub d: Rational,
    pub i_via_d: bool,
    pub ve_via_d: bool,
    pub fibers: bool,
    pub virtually_fibers: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    #[serde(with = "serde_exact::rational_rows")]
    pub matrix: Vec<Vec<Rational>>,
    #[serde(with = "serde_exact::rational_rows")]
    pub a_minus: Vec<Vec<Rational>>,
    pub inertia: Inertia,
    pub blocks: Blocks,
    pub verdict: Verdict,
    pub two_piece: Option<TwoPieceSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduction: Option<ReductionCertificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<String>,
}

impl Report {
    pub fn new(a: &SymMatrix) -> Result<Self, DecisionError> {
        let verdict = decide(a)?;
        let two_piece = if a.order() == 2 {
            let inv = two_piece_d(a)?;
            Some(TwoPieceSummary {
                i_via_d: inv.i_via_d(),
                ve_via_d: inv.ve_via_d(),
                fibers: inv.fibers(),
                virtually_fibers: two_piece_virtually_fibers(a)?,
                d: inv.d,
            })
        } else {
            None
        };
        Ok(Self {
            matrix: a.to_rows(),
            a_minus: a_minus(a).to_rows(),
            inertia: a.inertia(),
            blocks: split_blocks(a),
            verdict,
            two_piece,
            reduction: None,
            certificates: Vec::new(),
        })
    }

    /// Adds a singular reduction when `A₋` is not negative definite.
    pub fn with_reduction(mut self, a: &SymMatrix) -> Self {
        self.reduction = match find_singular_reduction(a) {
            Ok(cert) => Some(cert),
            Err(ReductionError::NegativeDefinite) => None,
            Err(e) => unreachable!("shape was checked by the decision: {e}"),
        };
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn rows(f: &mut fmt::Formatter<'_>, name: &str, m: &[Vec<Rational>]) -> fmt::Result {
    writeln!(f, "{name}:")?;
    for row in m {
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        writeln!(f, "  [{}]", cells.join(", "))?;
    }
    Ok(())
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        rows(f, "matrix", &self.matrix)?;
        rows(f, "a_minus", &self.a_minus)?;
        writeln!(f, "inertia: {}", self.inertia)?;
        writeln!(
            f,
            "blocks: positive {:?}, negative {:?}, zero {:?}",
            self.blocks.positive, self.blocks.negative, self.blocks.zero
        )?;
        let v = &self.verdict;
        writeln!(f, "inertia of a_minus: {}", v.inertia_of_a_minus)?;
        writeln!(f, "branch: {}", v.branch)?;
        writeln!(f, "property I: {}", v.property_i)?;
        writeln!(f, "property VE: {}", v.property_ve)?;
        if v.zero_diagonal_same_sign {
            writeln!(f, "note: zero diagonal entries counted as either sign")?;
        }
        if let Some(t) = &self.two_piece {
            writeln!(f, "D: {}", t.d)?;
            writeln!(f, "I via D: {}", t.i_via_d)?;
            writeln!(f, "VE via D: {}", t.ve_via_d)?;
            writeln!(f, "fibers: {}", t.fibers)?;
            writeln!(f, "virtually fibers: {}", t.virtually_fibers)?;
        }
        if let Some(r) = &self.reduction {
            rows(f, "reduction a_prime", &r.a_prime.to_rows())?;
            let a: Vec<String> = r.a.iter().map(ToString::to_string).collect();
            writeln!(f, "reduction a: [{}]", a.join(", "))?;
        }
        for path in &self.certificates {
            writeln!(f, "certificate: {path}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::input::parse_matrix;
    use crate::rational::int;

    #[test]
    fn two_piece_report() {
        let a = parse_matrix("[[-1,1],[1,-1]]").unwrap();
        let r = Report::new(&a).unwrap();
        assert!(r.verdict.property_i && r.verdict.property_ve);
        let t = r.two_piece.as_ref().unwrap();
        assert_eq!(t.d, int(1));
        assert!(t.fibers);
        let text = r.to_string();
        assert!(text.contains("property I: true"));
        assert!(text.contains("D: 1"));
    }

    #[test]
    fn json_mirrors_text_and_round_trips() {
        let a = parse_matrix("[[-1,2],[2,-1]]").unwrap();
        let r = Report::new(&a).unwrap().with_reduction(&a);
        assert!(r.reduction.is_some());
        let json = r.to_json();
        let back: Report = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
        assert!(json.contains("\"property_i\": true"));
        assert!(json.contains("\"d\": \"1/4\""));
        assert!(!json.contains('.'));
    }

    #[test]
    fn negative_definite_has_no_reduction() {
        let a = parse_matrix("[[-2,1],[1,-2]]").unwrap();
        let r = Report::new(&a).unwrap().with_reduction(&a);
        assert!(r.reduction.is_none());
        assert!(!r.verdict.property_i);
    }
}
