//! Deciding properties (I) and (VE) from a decomposition matrix.
//!
//! Property (I): the manifold contains an immersed π₁-injective surface of
//! negative Euler characteristic. Property (VE): some finite cover
//! contains an embedded one.
//!
//! (I) holds iff `A₋` has a positive eigenvalue, or `A₋` is negative
//! semidefinite and singular and the diagonal of `A` is all `>= 0` or all
//! `<= 0`. (VE) holds iff one of `P₋`, `N` is not negative definite, where
//! `P`/`N` are the principal blocks on positive/negative diagonal entries.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Inertia, SymMatrix};
use crate::manifold::{a_minus, split_blocks};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecisionError {
    #[error("empty matrix")]
    Empty,
    #[error("negative off-diagonal entry {value} at ({i},{j})")]
    NegativeOffDiagonal { i: usize, j: usize, value: Rational },
    #[error("matrix graph is disconnected ({components} components)")]
    DisconnectedMatrix { components: usize },
    #[error("the two-piece invariant needs a 2x2 matrix, got order {0}")]
    NotTwoPiece(usize),
    #[error("the two-piece invariant needs a positive off-diagonal entry, got {0}")]
    ZeroCoupling(Rational),
}

/// Which case of the decision produced the verdict on (I).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// `A₋` has a positive eigenvalue.
    PositiveEigenvalue,
    /// `A₋` negative semidefinite and singular; diagonal of `A` of one sign.
    SemidefiniteSameSign,
    /// `A₋` negative definite.
    NegativeDefinite,
    /// `A₋` negative semidefinite and singular; diagonal of `A` has both signs.
    SemidefiniteMixedSign,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Branch::PositiveEigenvalue => "PositiveEigenvalue",
            Branch::SemidefiniteSameSign => "SemidefiniteSameSign",
            Branch::NegativeDefinite => "NegativeDefinite",
            Branch::SemidefiniteMixedSign => "SemidefiniteMixedSign",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub property_i: bool,
    pub property_ve: bool,
    pub branch: Branch,
    pub inertia_of_a_minus: Inertia,
    /// Set when the "same sign" test passed with zero diagonal entries
    /// present; zeros count as either sign.
    pub zero_diagonal_same_sign: bool,
}

/// Checks off-diagonal non-negativity and connectivity of the matrix graph.
pub fn check_shape(a: &SymMatrix) -> Result<(), DecisionError> {
    let n = a.order();
    if n == 0 {
        return Err(DecisionError::Empty);
    }
    for i in 0..n {
        for j in i + 1..n {
            if a.get(i, j).is_negative() {
                return Err(DecisionError::NegativeOffDiagonal {
                    i,
                    j,
                    value: a.get(i, j).clone(),
                });
            }
        }
    }
    let components = a.graph_components().len();
    if components > 1 {
        return Err(DecisionError::DisconnectedMatrix { components });
    }
    Ok(())
}

fn diagonal_same_sign(a: &SymMatrix) -> bool {
    let d = a.diagonal();
    d.iter().all(|x| !x.is_negative()) || d.iter().all(|x| !x.is_positive())
}

pub fn decide_immersed(a: &SymMatrix) -> Result<(bool, Branch), DecisionError> {
    check_shape(a)?;
    let inertia = a_minus(a).inertia();
    Ok(immersed_from_inertia(a, inertia))
}

fn immersed_from_inertia(a: &SymMatrix, inertia: Inertia) -> (bool, Branch) {
    if inertia.n_pos > 0 {
        (true, Branch::PositiveEigenvalue)
    } else if inertia.n_zero == 0 {
        (false, Branch::NegativeDefinite)
    } else if diagonal_same_sign(a) {
        (true, Branch::SemidefiniteSameSign)
    } else {
        (false, Branch::SemidefiniteMixedSign)
    }
}

pub fn decide_virtually_embedded(a: &SymMatrix) -> Result<bool, DecisionError> {
    check_shape(a)?;
    Ok(virtually_embedded_unchecked(a))
}

fn virtually_embedded_unchecked(a: &SymMatrix) -> bool {
    let blocks = split_blocks(a);
    if !blocks.zero.is_empty() {
        // whichever block receives a zero diagonal entry is not negative definite
        return true;
    }
    !blocks_negative_definite(a, &blocks.positive, &blocks.negative)
}

/// Whether both `P₋` and `N` are negative definite for an explicit split.
fn blocks_negative_definite(a: &SymMatrix, p: &[usize], n: &[usize]) -> bool {
    let p_minus = a_minus(&a.principal_submatrix(p).expect("indices from a"));
    let n_block = a.principal_submatrix(n).expect("indices from a");
    p_minus.is_negative_definite() && n_block.is_negative_definite()
}

/// Evaluates the (VE) criterion with zero-diagonal indices assigned by
/// `to_positive_block` (`true` puts the index in `P`).
pub fn virtually_embedded_with_assignment(
    a: &SymMatrix,
    mut to_positive_block: impl FnMut(usize) -> bool,
) -> Result<bool, DecisionError> {
    check_shape(a)?;
    let blocks = split_blocks(a);
    let mut p = blocks.positive.clone();
    let mut n = blocks.negative.clone();
    for &z in &blocks.zero {
        if to_positive_block(z) {
            p.push(z);
        } else {
            n.push(z);
        }
    }
    p.sort_unstable();
    n.sort_unstable();
    Ok(!blocks_negative_definite(a, &p, &n))
}

pub fn decide(a: &SymMatrix) -> Result<Verdict, DecisionError> {
    check_shape(a)?;
    let inertia = a_minus(a).inertia();
    let (property_i, branch) = immersed_from_inertia(a, inertia);
    let zero_diagonal_same_sign =
        branch == Branch::SemidefiniteSameSign && a.diagonal().iter().any(Zero::is_zero);
    Ok(Verdict {
        property_i,
        property_ve: virtually_embedded_unchecked(a),
        branch,
        inertia_of_a_minus: inertia,
        zero_diagonal_same_sign,
    })
}

/// `D = A₁₁A₂₂ / A₁₂²` for a two-piece manifold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoPieceInvariant {
    #[serde(with = "crate::rational::serde_exact::rational")]
    pub d: Rational,
}

impl TwoPieceInvariant {
    /// `-1 < D <= 1`.
    pub fn i_via_d(&self) -> bool {
        let one = Rational::one();
        -one.clone() < self.d && self.d <= one
    }

    /// `0 <= D <= 1`.
    pub fn ve_via_d(&self) -> bool {
        !self.d.is_negative() && self.d <= Rational::one()
    }

    /// `D = 1`: the manifold itself fibers over the circle.
    pub fn fibers(&self) -> bool {
        self.d.is_one()
    }

    /// `0 < D <= 1`, or `A₁₁ = A₂₂ = 0` (checked by the caller via [`two_piece_virtually_fibers`]).
    fn virtually_fibers_by_d(&self) -> bool {
        self.d.is_positive() && self.d <= Rational::one()
    }
}

pub fn two_piece_d(a: &SymMatrix) -> Result<TwoPieceInvariant, DecisionError> {
    if a.order() != 2 {
        return Err(DecisionError::NotTwoPiece(a.order()));
    }
    let c = a.get(0, 1);
    if !c.is_positive() {
        return Err(DecisionError::ZeroCoupling(c.clone()));
    }
    Ok(TwoPieceInvariant {
        d: a.get(0, 0) * a.get(1, 1) / (c * c),
    })
}

/// Informational virtual-fibration flag for two-piece manifolds:
/// `0 < D <= 1` or `A₁₁ = A₂₂ = 0`.
pub fn two_piece_virtually_fibers(a: &SymMatrix) -> Result<bool, DecisionError> {
    let inv = two_piece_d(a)?;
    Ok(inv.virtually_fibers_by_d() || (a.get(0, 0).is_zero() && a.get(1, 1).is_zero()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{frac, int};

    fn m2(a: Rational, b: Rational, c: Rational) -> SymMatrix {
        SymMatrix::from_rows(vec![vec![a, c.clone()], vec![c, b]]).unwrap()
    }

    fn i2(a: i64, b: i64, c: i64) -> SymMatrix {
        m2(int(a), int(b), int(c))
    }

    #[test]
    fn immersed_examples() {
        assert_eq!(decide_immersed(&i2(-1, -1, 2)).unwrap(), (true, Branch::PositiveEigenvalue));
        assert_eq!(decide_immersed(&i2(-2, -2, 1)).unwrap(), (false, Branch::NegativeDefinite));
        assert_eq!(
            decide_immersed(&i2(1, -1, 1)).unwrap(),
            (false, Branch::SemidefiniteMixedSign)
        );
        assert_eq!(
            decide_immersed(&i2(-1, -1, 1)).unwrap(),
            (true, Branch::SemidefiniteSameSign)
        );
    }

    #[test]
    fn virtually_embedded_examples() {
        assert!(decide_virtually_embedded(&i2(-1, -1, 1)).unwrap());
        assert!(!decide_virtually_embedded(&i2(1, -1, 1)).unwrap());
        let z = m2(int(0), int(0), frac(3, 2));
        assert!(decide_virtually_embedded(&z).unwrap());
        assert_eq!(two_piece_d(&z).unwrap().d, int(0));
    }

    #[test]
    fn two_piece_examples() {
        let d = two_piece_d(&i2(-1, -1, 1)).unwrap();
        assert_eq!(d.d, int(1));
        assert!(d.i_via_d() && d.ve_via_d() && d.fibers());

        let d = two_piece_d(&i2(1, -1, 1)).unwrap();
        assert_eq!(d.d, int(-1));
        assert!(!d.i_via_d() && !d.ve_via_d());

        let d = two_piece_d(&i2(-1, -1, 2)).unwrap();
        assert_eq!(d.d, frac(1, 4));
        assert!(d.i_via_d() && d.ve_via_d());
    }

    #[test]
    fn two_piece_errors() {
        let three = SymMatrix::from_fn(3, |_, _| int(1));
        assert_eq!(two_piece_d(&three), Err(DecisionError::NotTwoPiece(3)));
        assert_eq!(two_piece_d(&i2(1, 1, 0)), Err(DecisionError::ZeroCoupling(int(0))));
    }

    #[test]
    fn virtual_fibration_flag() {
        assert!(two_piece_virtually_fibers(&m2(int(0), int(0), int(1))).unwrap());
        assert!(two_piece_virtually_fibers(&i2(-1, -1, 2)).unwrap());
        // D = 0 with one nonzero diagonal entry
        assert!(!two_piece_virtually_fibers(&i2(0, -1, 1)).unwrap());
    }

    #[test]
    fn shape_errors() {
        assert!(matches!(
            decide_immersed(&i2(0, 0, -1)),
            Err(DecisionError::NegativeOffDiagonal { i: 0, j: 1, .. })
        ));
        assert_eq!(
            decide_virtually_embedded(&i2(-1, -1, 0)),
            Err(DecisionError::DisconnectedMatrix { components: 2 })
        );
        assert_eq!(decide(&SymMatrix::empty()), Err(DecisionError::Empty));
    }

    #[test]
    fn verdict_reports_zero_diagonal_interpretation() {
        // A₋ = [[0,1],[1,-1]] has det -1: positive eigenvalue, flag stays off
        let v = decide(&i2(0, -1, 1)).unwrap();
        assert_eq!(v.branch, Branch::PositiveEigenvalue);
        assert!(!v.zero_diagonal_same_sign);

        // a connected semidefinite A₋ with a zero diagonal entry must be 1x1
        let v = decide(&SymMatrix::from_rows(vec![vec![int(0)]]).unwrap()).unwrap();
        assert_eq!(v.branch, Branch::SemidefiniteSameSign);
        assert!(v.zero_diagonal_same_sign);
    }

    #[test]
    fn zero_diagonal_assignments_agree() {
        let a = SymMatrix::from_rows(vec![
            vec![int(0), int(1), int(0)],
            vec![int(1), int(-3), int(1)],
            vec![int(0), int(1), int(2)],
        ])
        .unwrap();
        let shortcut = decide_virtually_embedded(&a).unwrap();
        for to_p in [true, false] {
            assert_eq!(virtually_embedded_with_assignment(&a, |_| to_p).unwrap(), shortcut);
        }
    }
}
