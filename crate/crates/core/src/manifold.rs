//! Graph manifolds described by their Seifert pieces and gluing tori.
//!
//! A [`DecompositionGraph`] is the source of truth for a manifold
//! instance. Piece ids are arbitrary integers; matrix row `k` always
//! corresponds to `pieces[k]`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::SymMatrix;
use crate::rational::{int, serde_exact, Rational};

pub type PieceId = i64;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeifertPiece {
    pub id: PieceId,
    /// Euler number relative to the fibers of the neighbouring pieces.
    #[serde(with = "serde_exact::rational")]
    pub euler: Rational,
    /// Genus of the orientable base orbifold.
    pub genus: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub cone_orders: Vec<u32>,
}

impl SeifertPiece {
    pub fn new(id: PieceId, euler: Rational, genus: u32) -> Self {
        Self {
            id,
            euler,
            genus,
            cone_orders: Vec::new(),
        }
    }
}

/// A torus glued between two distinct pieces.
///
/// `(q, p, q_prime, p_prime)` is the change of basis from (meridian, fiber)
/// of `from_piece` to (meridian, fiber) of `to_piece`, i.e. the matrix
/// `[[q, p], [-p', -q']]`, which must have determinant -1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GluingTorus {
    #[serde(rename = "from")]
    pub from_piece: PieceId,
    #[serde(rename = "to")]
    pub to_piece: PieceId,
    pub p: i64,
    #[serde(default = "one")]
    pub q: i64,
    #[serde(default = "one")]
    pub q_prime: i64,
    #[serde(default)]
    pub p_prime: i64,
}

fn one() -> i64 {
    1
}

impl GluingTorus {
    /// Torus with only the fiber intersection number given; the remaining
    /// basis data default to `q = q' = 1, p' = 0`.
    pub fn with_p(from_piece: PieceId, to_piece: PieceId, p: i64) -> Self {
        Self {
            from_piece,
            to_piece,
            p,
            q: 1,
            q_prime: 1,
            p_prime: 0,
        }
    }

    pub fn determinant_defect(&self) -> i128 {
        self.q as i128 * self.q_prime as i128 - self.p as i128 * self.p_prime as i128
    }

    /// `(q, p)` as seen from `piece`: `(q, p)` from the `from` side, `(q', p)` from the `to` side.
    pub fn side_data(&self, piece: PieceId) -> Option<(i64, i64)> {
        if piece == self.from_piece {
            Some((self.q, self.p))
        } else if piece == self.to_piece {
            Some((self.q_prime, self.p))
        } else {
            None
        }
    }

    pub fn other_side(&self, piece: PieceId) -> Option<PieceId> {
        if piece == self.from_piece {
            Some(self.to_piece)
        } else if piece == self.to_piece {
            Some(self.from_piece)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionGraph {
    pub pieces: Vec<SeifertPiece>,
    pub tori: Vec<GluingTorus>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoPieces,
    DuplicatePieceId(PieceId),
    UnknownPiece { torus: usize, piece: PieceId },
    SelfGluing { torus: usize, piece: PieceId },
    NonPositiveP { torus: usize, p: i64 },
    BadGluingDeterminant { torus: usize, value: i128 },
    BadConeOrder { piece: PieceId, order: u32 },
    NonNegativeOrbifoldEuler { piece: PieceId, chi: Rational },
    IsolatedPiece(PieceId),
    Disconnected { components: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPieces => write!(f, "no pieces"),
            Violation::DuplicatePieceId(id) => write!(f, "duplicate piece id {id}"),
            Violation::UnknownPiece { torus, piece } => {
                write!(f, "torus {torus}: unknown piece id {piece}")
            }
            Violation::SelfGluing { torus, piece } => {
                write!(f, "torus {torus}: self-gluing of piece {piece}")
            }
            Violation::NonPositiveP { torus, p } => {
                write!(f, "torus {torus}: fiber intersection number p = {p} must be positive")
            }
            Violation::BadGluingDeterminant { torus, value } => write!(
                f,
                "torus {torus}: qq' - pp' = {value} != 1 (change of basis must have determinant -1)"
            ),
            Violation::BadConeOrder { piece, order } => {
                write!(f, "piece {piece}: cone order {order} must be at least 2")
            }
            Violation::NonNegativeOrbifoldEuler { piece, chi } => write!(
                f,
                "piece {piece}: orbifold Euler characteristic {chi} is not negative"
            ),
            Violation::IsolatedPiece(id) => write!(f, "piece {id} meets no gluing torus"),
            Violation::Disconnected { components } => {
                write!(f, "decomposition graph is disconnected ({components} components)")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid decomposition graph: {}", join_violations(.0))]
    InvalidGraph(Vec<Violation>),
    #[error("unknown piece id {0}")]
    UnknownPiece(PieceId),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl DecompositionGraph {
    pub fn new(pieces: Vec<SeifertPiece>, tori: Vec<GluingTorus>) -> Self {
        Self { pieces, tori }
    }

    pub fn order(&self) -> usize {
        self.pieces.len()
    }

    pub fn index_of(&self, id: PieceId) -> Option<usize> {
        self.pieces.iter().position(|p| p.id == id)
    }

    pub fn piece(&self, id: PieceId) -> Option<&SeifertPiece> {
        self.pieces.iter().find(|p| p.id == id)
    }

    /// Indices of tori incident to `piece`.
    pub fn incident_tori(&self, piece: PieceId) -> impl Iterator<Item = usize> + '_ {
        self.tori
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.from_piece == piece || t.to_piece == piece)
            .map(|(k, _)| k)
    }

    /// Orbifold Euler characteristic `2 - 2g - (#incident tori) - sum(1 - 1/alpha)`.
    pub fn orbifold_euler(&self, piece: &SeifertPiece) -> Rational {
        let boundary = self.incident_tori(piece.id).count() as i64;
        let mut chi = int(2 - 2 * piece.genus as i64 - boundary);
        for &alpha in &piece.cone_orders {
            if alpha > 0 {
                chi -= Rational::one() - Rational::new(BigInt::one(), BigInt::from(alpha));
            }
        }
        chi
    }

    /// Checks every standing normalization and returns all violations found.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        let mut out = Vec::new();
        if self.pieces.is_empty() {
            out.push(Violation::NoPieces);
        }
        let mut ids = HashSet::new();
        for p in &self.pieces {
            if !ids.insert(p.id) {
                out.push(Violation::DuplicatePieceId(p.id));
            }
        }
        for (k, t) in self.tori.iter().enumerate() {
            for end in [t.from_piece, t.to_piece] {
                if !ids.contains(&end) {
                    out.push(Violation::UnknownPiece { torus: k, piece: end });
                }
            }
            if t.from_piece == t.to_piece {
                out.push(Violation::SelfGluing {
                    torus: k,
                    piece: t.from_piece,
                });
            }
            if t.p <= 0 {
                out.push(Violation::NonPositiveP { torus: k, p: t.p });
            }
            let det = t.determinant_defect();
            if det != 1 {
                out.push(Violation::BadGluingDeterminant { torus: k, value: det });
            }
        }
        for p in &self.pieces {
            for &alpha in &p.cone_orders {
                if alpha < 2 {
                    out.push(Violation::BadConeOrder {
                        piece: p.id,
                        order: alpha,
                    });
                }
            }
            let chi = self.orbifold_euler(p);
            if !chi.is_negative() {
                out.push(Violation::NonNegativeOrbifoldEuler { piece: p.id, chi });
            }
            if self.incident_tori(p.id).next().is_none() {
                out.push(Violation::IsolatedPiece(p.id));
            }
        }
        let components = self.components();
        if components > 1 {
            out.push(Violation::Disconnected { components });
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    fn components(&self) -> usize {
        let index: HashMap<PieceId, usize> = self
            .pieces
            .iter()
            .enumerate()
            .map(|(k, p)| (p.id, k))
            .collect();
        let n = self.pieces.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for t in &self.tori {
            if let (Some(&a), Some(&b)) = (index.get(&t.from_piece), index.get(&t.to_piece)) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
        (0..n).filter(|&x| find(&mut parent, x) == x).count()
    }

    /// `A_ii = e_i`, `A_ij = sum over tori between i and j of 1/p(T)`.
    pub fn decomposition_matrix(&self) -> Result<SymMatrix, ModelError> {
        self.validate().map_err(ModelError::InvalidGraph)?;
        let n = self.order();
        let mut off = vec![vec![Rational::zero(); n]; n];
        for t in &self.tori {
            let i = self.index_of(t.from_piece).expect("validated");
            let j = self.index_of(t.to_piece).expect("validated");
            let w = Rational::new(BigInt::one(), BigInt::from(t.p));
            off[i][j] += &w;
            off[j][i] += w;
        }
        Ok(SymMatrix::from_fn(n, |i, j| {
            if i == j {
                self.pieces[i].euler.clone()
            } else {
                off[i][j].clone()
            }
        }))
    }

    /// Euler number of `piece` with respect to the chosen meridians:
    /// `e'_i = e_i - sum over incident tori of q(T)/p(T)`, using `q'` on the `to` side.
    pub fn euler_wrt_meridians(&self, piece: PieceId) -> Result<Rational, ModelError> {
        let p = self.piece(piece).ok_or(ModelError::UnknownPiece(piece))?;
        Ok(&p.euler - self.meridian_offset(piece))
    }

    /// `sum q(T)/p(T)` over tori incident to `piece`.
    pub fn meridian_offset(&self, piece: PieceId) -> Rational {
        self.incident_tori(piece)
            .map(|k| {
                let (q, p) = self.tori[k].side_data(piece).expect("incident");
                Rational::new(BigInt::from(q), BigInt::from(p))
            })
            .fold(Rational::zero(), |acc, v| acc + v)
    }
}

/// Negates every positive diagonal entry.
pub fn a_minus(a: &SymMatrix) -> SymMatrix {
    SymMatrix::from_fn(a.order(), |i, j| {
        let v = a.get(i, j);
        if i == j && v.is_positive() {
            -v.clone()
        } else {
            v.clone()
        }
    })
}

/// Index sets by sign of the diagonal entry.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Blocks {
    pub positive: Vec<usize>,
    pub negative: Vec<usize>,
    pub zero: Vec<usize>,
}

pub fn split_blocks(a: &SymMatrix) -> Blocks {
    let mut b = Blocks::default();
    for i in 0..a.order() {
        let d = a.get(i, i);
        if d.is_positive() {
            b.positive.push(i);
        } else if d.is_negative() {
            b.negative.push(i);
        } else {
            b.zero.push(i);
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn two_piece(e1: Rational, e2: Rational, tori: Vec<GluingTorus>) -> DecompositionGraph {
        DecompositionGraph::new(
            vec![SeifertPiece::new(1, e1, 1), SeifertPiece::new(2, e2, 1)],
            tori,
        )
    }

    fn sym(rows: &[&[Rational]]) -> SymMatrix {
        SymMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn validate_accepts_minimal_two_piece_graph() {
        let g = two_piece(int(0), int(0), vec![GluingTorus::with_p(1, 2, 1)]);
        assert_eq!(g.validate(), Ok(()));
        assert_eq!(g.orbifold_euler(&g.pieces[0]), int(-1));
    }

    #[test]
    fn validate_reports_self_gluing_and_determinant() {
        let mut g = two_piece(int(0), int(0), vec![GluingTorus::with_p(1, 2, 1)]);
        g.tori.push(GluingTorus::with_p(1, 1, 1));
        let v = g.validate().unwrap_err();
        assert!(v.contains(&Violation::SelfGluing { torus: 1, piece: 1 }));
        assert!(v.iter().any(|x| x.to_string().contains("self-gluing")));

        let mut bad = GluingTorus::with_p(1, 2, 1);
        bad.q = 2;
        let g = two_piece(int(0), int(0), vec![bad]);
        let v = g.validate().unwrap_err();
        assert_eq!(v, vec![Violation::BadGluingDeterminant { torus: 0, value: 2 }]);
        assert!(v[0].to_string().contains("qq' - pp' = 2 != 1"));
    }

    #[test]
    fn validate_collects_everything() {
        let g = DecompositionGraph::new(
            vec![
                SeifertPiece::new(1, int(0), 0),
                SeifertPiece::new(2, int(0), 1),
                SeifertPiece::new(3, int(0), 1),
                SeifertPiece::new(3, int(0), 1),
            ],
            vec![GluingTorus::with_p(1, 2, 0), GluingTorus::with_p(2, 9, 1)],
        );
        let v = g.validate().unwrap_err();
        assert!(v.contains(&Violation::DuplicatePieceId(3)));
        assert!(v.contains(&Violation::UnknownPiece { torus: 1, piece: 9 }));
        assert!(v.contains(&Violation::NonPositiveP { torus: 0, p: 0 }));
        assert!(v.contains(&Violation::IsolatedPiece(3)));
        // genus 0 with a single boundary torus: chi = 2 - 0 - 1 = 1
        assert!(v.contains(&Violation::NonNegativeOrbifoldEuler { piece: 1, chi: int(1) }));
        assert!(v.iter().any(|x| matches!(x, Violation::Disconnected { .. })));
    }

    #[test]
    fn cone_points_lower_orbifold_euler() {
        let mut p = SeifertPiece::new(1, int(0), 0);
        p.cone_orders = vec![2, 3, 7];
        let g = DecompositionGraph::new(
            vec![p, SeifertPiece::new(2, int(0), 1)],
            vec![GluingTorus::with_p(1, 2, 1)],
        );
        // 2 - 1 - (1/2 + 2/3 + 6/7) = 1 - 85/42 = -43/42
        assert_eq!(g.orbifold_euler(&g.pieces[0]), frac(-43, 42));
        assert_eq!(g.validate(), Ok(()));
    }

    #[test]
    fn decomposition_matrix_examples() {
        let g = two_piece(int(-1), int(-1), vec![GluingTorus::with_p(1, 2, 1)]);
        assert_eq!(
            g.decomposition_matrix().unwrap(),
            sym(&[&[int(-1), int(1)], &[int(1), int(-1)]])
        );
        let g = two_piece(
            int(0),
            int(0),
            vec![GluingTorus::with_p(1, 2, 1), GluingTorus::with_p(2, 1, 2)],
        );
        assert_eq!(
            g.decomposition_matrix().unwrap(),
            sym(&[&[int(0), frac(3, 2)], &[frac(3, 2), int(0)]])
        );
        let single = DecompositionGraph::new(vec![SeifertPiece::new(1, int(0), 2)], vec![]);
        assert!(matches!(
            single.decomposition_matrix(),
            Err(ModelError::InvalidGraph(v)) if v.contains(&Violation::IsolatedPiece(1))
        ));
    }

    #[test]
    fn a_minus_and_blocks() {
        let a = sym(&[&[int(2), int(1)], &[int(1), int(-1)]]);
        assert_eq!(a_minus(&a), sym(&[&[int(-2), int(1)], &[int(1), int(-1)]]));
        let n = sym(&[&[int(-3), int(1)], &[int(1), int(-1)]]);
        assert_eq!(a_minus(&n), n);
        let z = sym(&[&[int(0), int(1)], &[int(1), int(0)]]);
        assert_eq!(a_minus(&z), z);

        let d = SymMatrix::from_fn(3, |i, j| match (i, j) {
            (0, 0) => int(2),
            (1, 1) => int(-1),
            _ => int(0),
        });
        assert_eq!(
            split_blocks(&d),
            Blocks {
                positive: vec![0],
                negative: vec![1],
                zero: vec![2]
            }
        );
        assert_eq!(split_blocks(&n).negative, vec![0, 1]);
        assert_eq!(split_blocks(&z).zero, vec![0, 1]);
    }

    #[test]
    fn euler_wrt_meridians_examples() {
        let g = two_piece(int(0), int(-1), vec![GluingTorus::with_p(1, 2, 1)]);
        assert_eq!(g.euler_wrt_meridians(1).unwrap(), int(-1));

        let t = GluingTorus {
            from_piece: 2,
            to_piece: 1,
            p: 2,
            q: 1,
            q_prime: 1,
            p_prime: 0,
        };
        let g = two_piece(int(0), int(-1), vec![t]);
        assert_eq!(g.euler_wrt_meridians(2).unwrap(), frac(-3, 2));
        let back = g.euler_wrt_meridians(2).unwrap() + g.meridian_offset(2);
        assert_eq!(back, int(-1));
        assert_eq!(g.euler_wrt_meridians(7), Err(ModelError::UnknownPiece(7)));
    }

    #[test]
    fn to_side_uses_q_prime() {
        // q = 3, p = 2, q' = 1, p' = 1: 3*1 - 2*1 = 1
        let t = GluingTorus {
            from_piece: 1,
            to_piece: 2,
            p: 2,
            q: 3,
            q_prime: 1,
            p_prime: 1,
        };
        let g = two_piece(int(0), int(0), vec![t]);
        assert_eq!(g.validate(), Ok(()));
        assert_eq!(g.euler_wrt_meridians(1).unwrap(), frac(-3, 2));
        assert_eq!(g.euler_wrt_meridians(2).unwrap(), frac(-1, 2));
    }

    #[test]
    fn manifold_json_defaults() {
        let text = r#"{"pieces":[{"id":1,"euler":"-1/2","genus":1},{"id":2,"euler":"3","genus":2,"cone_orders":[2]}],
                       "tori":[{"from":1,"to":2,"p":3}]}"#;
        let g: DecompositionGraph = serde_json::from_str(text).unwrap();
        assert_eq!(g.pieces[0].euler, frac(-1, 2));
        assert_eq!(g.tori[0], GluingTorus::with_p(1, 2, 3));
        let back: DecompositionGraph =
            serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
