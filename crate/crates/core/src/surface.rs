//! Boundary-curve certificates for horizontal immersed surfaces.
//!
//! On each side of each gluing torus the certificate records two integer
//! curve classes, `(a⁺, b⁺)` and `(a⁻, b⁻)`, in the (meridian, fiber) basis
//! of that side's piece. A valid certificate satisfies, for every piece
//! `i` of degree `aᵢ`:
//!
//! * `a⁺ + a⁻ = aᵢ` on every boundary torus of piece `i`;
//! * `Σ (b⁺ + b⁻) = aᵢ e'ᵢ` over the boundary tori of piece `i`;
//!
//! and on every torus the two sides describe the same classes under the
//! change of basis `[[q, p], [-p', -q']]` (negated for the minus curves).
//! Those are the numerical conditions for the curves on each piece to
//! bound a horizontal surface, and the surfaces then glue up.
//!
//! Construction: shrink the off-diagonal entries of `A` until `A₋` keeps a
//! positive eigenvalue, take a singular reduction `A'` of the shrunk
//! matrix with a positive annihilated vector `a`, and for a torus between
//! pieces `i` and `j` put, on the side of piece `j`,
//!
//! ```text
//! a⁺ = (Aᵢⱼ - A'ᵢⱼ) / (2Aᵢⱼ) · aⱼ        a⁻ = (Aᵢⱼ + A'ᵢⱼ) / (2Aᵢⱼ) · aⱼ
//! ```
//!
//! The fiber coordinates follow from the first row of the gluing relation,
//! `b± = (±a±_other - q a±) / p`, with `q` replaced by `q'` on the `to`
//! side. Everything is homogeneous in `a`, so one global integer scale
//! clears all denominators.
//!
//! Parallel tori between the same two pieces all receive the same `a±`;
//! torus `T` then contributes the fraction `(1/p(T)) / Aᵢⱼ` of the
//! aggregate relation for that pair.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decision::{decide_immersed, Branch, DecisionError};
use crate::linalg::{Matrix, SymMatrix};
use crate::manifold::{DecompositionGraph, GluingTorus, ModelError, PieceId};
use crate::rational::{lcm_of_denominators, serde_exact, Rational};
use crate::reduction::{
    find_singular_reduction_with, matrix_rows, positive_singular_reduction, strict_shrink,
    ReductionCertificate, ReductionError, SlideOrder,
};

/// Curve data on one side of one torus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSystem {
    pub torus: usize,
    pub side: PieceId,
    #[serde(with = "serde_exact::bigint")]
    pub a_plus: BigInt,
    #[serde(with = "serde_exact::bigint")]
    pub a_minus: BigInt,
    #[serde(with = "serde_exact::bigint")]
    pub b_plus: BigInt,
    #[serde(with = "serde_exact::bigint")]
    pub b_minus: BigInt,
}

/// How the singular reduction inside a certificate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seed")]
pub enum ReductionRoute {
    RowMajor,
    Shuffled(u64),
    PositiveVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceCertificate {
    /// Decomposition matrix with off-diagonal entries scaled by `1 - epsilon`.
    #[serde(with = "sym_rows")]
    pub shrunk: SymMatrix,
    #[serde(with = "serde_exact::rational")]
    pub epsilon: Rational,
    /// Strict reduction of the decomposition matrix annihilating `a`.
    #[serde(with = "matrix_rows")]
    pub a_prime: Matrix,
    /// Per-piece degrees, in piece order.
    #[serde(with = "serde_exact::bigint_vec")]
    pub a: Vec<BigInt>,
    /// Multiplier applied to the reduction's vector to make all data integral.
    #[serde(with = "serde_exact::bigint")]
    pub scale: BigInt,
    pub route: ReductionRoute,
    pub systems: Vec<CurveSystem>,
}

mod sym_rows {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &SymMatrix, s: S) -> Result<S::Ok, S::Error> {
        serde_exact::rational_rows::serialize(&m.to_rows(), s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SymMatrix, D::Error> {
        let rows = serde_exact::rational_rows::deserialize(d)?;
        SymMatrix::from_rows(rows).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SurfaceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error("no horizontal surface certificate: decision branch is {0}, not PositiveEigenvalue")]
    NotPositiveEigenvalueBranch(Branch),
    #[error("reduction vector vanishes on pieces {zero_pieces:?}")]
    DegenerateSupport { zero_pieces: Vec<PieceId> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SurfaceOptions {
    /// Extra attempts with shuffled slide orders when the row-major
    /// reduction vector has zero entries.
    pub shuffled_retries: u64,
    pub seed: u64,
    /// Fall back to the positive-vector construction when every sliding
    /// attempt is degenerate.
    pub positive_fallback: bool,
}

impl Default for SurfaceOptions {
    fn default() -> Self {
        Self {
            shuffled_retries: 8,
            seed: 0,
            positive_fallback: true,
        }
    }
}

pub fn build_surface_certificate(
    g: &DecompositionGraph,
) -> Result<SurfaceCertificate, SurfaceError> {
    build_surface_certificate_with(g, SurfaceOptions::default())
}

pub fn build_surface_certificate_with(
    g: &DecompositionGraph,
    options: SurfaceOptions,
) -> Result<SurfaceCertificate, SurfaceError> {
    let a = g.decomposition_matrix()?;
    let (_, branch) = decide_immersed(&a)?;
    if branch != Branch::PositiveEigenvalue {
        return Err(SurfaceError::NotPositiveEigenvalueBranch(branch));
    }
    let shrink = strict_shrink(&a)?;
    let (reduction, route) = choose_reduction(g, &shrink.matrix, options)?;
    Ok(assemble(g, &a, shrink.matrix, shrink.epsilon, reduction, route))
}

fn choose_reduction(
    g: &DecompositionGraph,
    shrunk: &SymMatrix,
    options: SurfaceOptions,
) -> Result<(ReductionCertificate, ReductionRoute), SurfaceError> {
    let first = find_singular_reduction_with(shrunk, SlideOrder::RowMajor)?;
    if first.has_full_support() {
        return Ok((first, ReductionRoute::RowMajor));
    }
    for k in 0..options.shuffled_retries {
        let seed = options.seed.wrapping_add(k);
        let cert = find_singular_reduction_with(shrunk, SlideOrder::Shuffled(seed))?;
        if cert.has_full_support() {
            return Ok((cert, ReductionRoute::Shuffled(seed)));
        }
    }
    if options.positive_fallback {
        let cert = positive_singular_reduction(shrunk)?;
        return Ok((cert, ReductionRoute::PositiveVector));
    }
    let zero_pieces = (0..first.a.len())
        .filter(|&i| first.a[i].is_zero())
        .map(|i| g.pieces[i].id)
        .collect();
    Err(SurfaceError::DegenerateSupport { zero_pieces })
}

struct RationalSystem {
    torus: usize,
    side: PieceId,
    a_plus: Rational,
    a_minus: Rational,
    b_plus: Rational,
    b_minus: Rational,
}

fn assemble(
    g: &DecompositionGraph,
    a: &SymMatrix,
    shrunk: SymMatrix,
    epsilon: Rational,
    reduction: ReductionCertificate,
    route: ReductionRoute,
) -> SurfaceCertificate {
    let two = Rational::from_integer(2.into());
    let weights = &reduction.a;
    let rp = &reduction.a_prime;
    let mut rational = Vec::with_capacity(2 * g.tori.len());
    for (k, t) in g.tori.iter().enumerate() {
        let i = g.index_of(t.from_piece).expect("validated");
        let j = g.index_of(t.to_piece).expect("validated");
        let aij = a.get(i, j);
        // to side (piece j) uses row i of A', from side (piece i) uses row j
        let to_plus = (aij - &rp[(i, j)]) / (&two * aij) * &weights[j];
        let to_minus = (aij + &rp[(i, j)]) / (&two * aij) * &weights[j];
        let from_plus = (aij - &rp[(j, i)]) / (&two * aij) * &weights[i];
        let from_minus = (aij + &rp[(j, i)]) / (&two * aij) * &weights[i];
        let p = Rational::from_integer(t.p.into());
        let q = Rational::from_integer(t.q.into());
        let q_prime = Rational::from_integer(t.q_prime.into());
        let from_b_plus = (&to_plus - &q * &from_plus) / &p;
        let from_b_minus = (-&to_minus - &q * &from_minus) / &p;
        let to_b_plus = (&from_plus - &q_prime * &to_plus) / &p;
        let to_b_minus = (-&from_minus - &q_prime * &to_minus) / &p;
        rational.push(RationalSystem {
            torus: k,
            side: t.from_piece,
            a_plus: from_plus,
            a_minus: from_minus,
            b_plus: from_b_plus,
            b_minus: from_b_minus,
        });
        rational.push(RationalSystem {
            torus: k,
            side: t.to_piece,
            a_plus: to_plus,
            a_minus: to_minus,
            b_plus: to_b_plus,
            b_minus: to_b_minus,
        });
    }
    let scale = lcm_of_denominators(
        weights.iter().chain(
            rational
                .iter()
                .flat_map(|s| [&s.a_plus, &s.a_minus, &s.b_plus, &s.b_minus]),
        ),
    );
    let factor = Rational::from_integer(scale.clone());
    let to_int = |v: &Rational| -> BigInt {
        let scaled = v * &factor;
        debug_assert!(scaled.is_integer());
        scaled.to_integer()
    };
    let systems = rational
        .iter()
        .map(|s| CurveSystem {
            torus: s.torus,
            side: s.side,
            a_plus: to_int(&s.a_plus),
            a_minus: to_int(&s.a_minus),
            b_plus: to_int(&s.b_plus),
            b_minus: to_int(&s.b_minus),
        })
        .collect();
    SurfaceCertificate {
        shrunk,
        epsilon,
        a_prime: reduction.a_prime.clone(),
        a: weights.iter().map(to_int).collect(),
        scale,
        route,
        systems,
    }
}

/// Which family of curves a gluing violation concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveSign {
    Plus,
    Minus,
}

impl fmt::Display for CurveSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurveSign::Plus => "plus",
            CurveSign::Minus => "minus",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurveViolation {
    NonPositiveDegree,
    NegativeCoordinate { torus: usize },
    DegreeSum { torus: usize },
    EulerBalance { expected: Rational, found: Rational },
}

impl fmt::Display for CurveViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositiveDegree => write!(f, "degree must be positive (empty surface)"),
            Self::NegativeCoordinate { torus } => {
                write!(f, "torus {torus}: negative fiber-transverse coordinate")
            }
            Self::DegreeSum { torus } => {
                write!(f, "torus {torus}: a+ + a- differs from the piece degree")
            }
            Self::EulerBalance { expected, found } => write!(
                f,
                "Euler balance fails: sum of b is {found}, degree times Euler number is {expected}"
            ),
        }
    }
}

/// Numerical conditions for the boundary curves of one piece to bound a
/// horizontal surface of degree `degree` over a base with Euler number `e`
/// (taken with respect to the meridians the coordinates use).
pub fn verify_piece_curves(
    e: &Rational,
    boundary: &[CurveSystem],
    degree: &BigInt,
) -> Result<(), Vec<CurveViolation>> {
    if !degree.is_positive() {
        return Err(vec![CurveViolation::NonPositiveDegree]);
    }
    piece_equations(e, boundary, degree)
}

fn piece_equations(
    e: &Rational,
    boundary: &[CurveSystem],
    degree: &BigInt,
) -> Result<(), Vec<CurveViolation>> {
    let mut out = Vec::new();
    let mut b_sum = BigInt::zero();
    for s in boundary {
        if s.a_plus.is_negative() || s.a_minus.is_negative() {
            out.push(CurveViolation::NegativeCoordinate { torus: s.torus });
        }
        if &(&s.a_plus + &s.a_minus) != degree {
            out.push(CurveViolation::DegreeSum { torus: s.torus });
        }
        b_sum += &s.b_plus + &s.b_minus;
    }
    let expected = Rational::from_integer(degree.clone()) * e;
    let found = Rational::from_integer(b_sum);
    if found != expected {
        out.push(CurveViolation::EulerBalance { expected, found });
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SurfaceViolation {
    InvalidGraph(String),
    WrongLength { expected: usize, found: usize },
    ZeroDegreeVector,
    NegativeDegree { piece: PieceId },
    UnknownSystem { torus: usize, side: PieceId },
    MissingSystem { torus: usize, side: PieceId },
    DuplicateSystem { torus: usize, side: PieceId },
    Piece { piece: PieceId, violation: CurveViolation },
    ReferenceBalance { piece: PieceId },
    Gluing { torus: usize, sign: CurveSign },
    InverseGluing { torus: usize, sign: CurveSign },
    NotPositive { torus: usize, side: PieceId },
    ReductionDiagonal { piece: PieceId },
    NotAStrictReduction { i: usize, j: usize },
    ReductionNotAnnihilating { piece: PieceId },
    ReductionMismatch { i: usize, j: usize },
}

impl fmt::Display for SurfaceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidGraph(msg) => write!(f, "invalid manifold: {msg}"),
            Self::WrongLength { expected, found } => {
                write!(f, "degree vector has length {found}, expected {expected}")
            }
            Self::ZeroDegreeVector => write!(f, "degree vector is zero"),
            Self::NegativeDegree { piece } => write!(f, "piece {piece}: negative degree"),
            Self::UnknownSystem { torus, side } => {
                write!(f, "curve system for torus {torus} side {side} does not exist in the manifold")
            }
            Self::MissingSystem { torus, side } => {
                write!(f, "torus {torus}: no curve system on the side of piece {side}")
            }
            Self::DuplicateSystem { torus, side } => {
                write!(f, "torus {torus}: duplicate curve system on the side of piece {side}")
            }
            Self::Piece { piece, violation } => write!(f, "piece {piece}: {violation}"),
            Self::ReferenceBalance { piece } => write!(
                f,
                "piece {piece}: balance against neighbouring fibers fails (sum of (a+ - a-)/p on the far sides differs from a·e)"
            ),
            Self::Gluing { torus, sign } => {
                write!(f, "torus {torus}: gluing relation fails for the {sign} curves")
            }
            Self::InverseGluing { torus, sign } => {
                write!(f, "torus {torus}: inverse gluing relation fails for the {sign} curves")
            }
            Self::NotPositive { torus, side } => write!(
                f,
                "torus {torus}: side of piece {side} has a zero curve coordinate although the piece degree is positive"
            ),
            Self::ReductionDiagonal { piece } => {
                write!(f, "piece {piece}: reduction diagonal differs from the Euler number")
            }
            Self::NotAStrictReduction { i, j } => {
                write!(f, "reduction entry ({i},{j}) is not strictly smaller than the decomposition entry")
            }
            Self::ReductionNotAnnihilating { piece } => {
                write!(f, "piece {piece}: reduction does not annihilate the degree vector")
            }
            Self::ReductionMismatch { i, j } => write!(
                f,
                "curve data between rows {i} and {j} does not reproduce the recorded reduction"
            ),
        }
    }
}

/// Independently rechecks every equation a surface certificate claims.
pub fn verify_surface_certificate(
    g: &DecompositionGraph,
    cert: &SurfaceCertificate,
) -> Result<(), Vec<SurfaceViolation>> {
    let a = match g.decomposition_matrix() {
        Ok(a) => a,
        Err(e) => return Err(vec![SurfaceViolation::InvalidGraph(e.to_string())]),
    };
    let n = g.order();
    let mut out = Vec::new();
    if cert.a.len() != n {
        return Err(vec![SurfaceViolation::WrongLength {
            expected: n,
            found: cert.a.len(),
        }]);
    }
    if cert.a.iter().all(Zero::is_zero) {
        out.push(SurfaceViolation::ZeroDegreeVector);
    }
    for (k, d) in cert.a.iter().enumerate() {
        if d.is_negative() {
            out.push(SurfaceViolation::NegativeDegree {
                piece: g.pieces[k].id,
            });
        }
    }

    let mut by_side: HashMap<(usize, PieceId), &CurveSystem> = HashMap::new();
    for s in &cert.systems {
        let known = g
            .tori
            .get(s.torus)
            .is_some_and(|t| t.from_piece == s.side || t.to_piece == s.side);
        if !known {
            out.push(SurfaceViolation::UnknownSystem {
                torus: s.torus,
                side: s.side,
            });
        } else if by_side.insert((s.torus, s.side), s).is_some() {
            out.push(SurfaceViolation::DuplicateSystem {
                torus: s.torus,
                side: s.side,
            });
        }
    }
    for (k, t) in g.tori.iter().enumerate() {
        for side in [t.from_piece, t.to_piece] {
            if !by_side.contains_key(&(k, side)) {
                out.push(SurfaceViolation::MissingSystem { torus: k, side });
            }
        }
    }
    if !out.is_empty() {
        return Err(out);
    }

    let degree_of = |id: PieceId| &cert.a[g.index_of(id).expect("validated")];

    // per-piece curve conditions in the meridian basis
    for (idx, piece) in g.pieces.iter().enumerate() {
        let boundary: Vec<CurveSystem> = g
            .incident_tori(piece.id)
            .map(|k| by_side[&(k, piece.id)].clone())
            .collect();
        let e_prime = g.euler_wrt_meridians(piece.id).expect("known piece");
        if let Err(vs) = piece_equations(&e_prime, &boundary, &cert.a[idx]) {
            out.extend(vs.into_iter().map(|violation| SurfaceViolation::Piece {
                piece: piece.id,
                violation,
            }));
        }
        // same balance against the neighbouring fibers, using eᵢ
        let mut lhs = Rational::zero();
        for k in g.incident_tori(piece.id) {
            let t = &g.tori[k];
            let other = t.other_side(piece.id).expect("incident");
            let far = by_side[&(k, other)];
            lhs += Rational::new(&far.a_plus - &far.a_minus, BigInt::from(t.p));
        }
        if lhs != Rational::from_integer(cert.a[idx].clone()) * &piece.euler {
            out.push(SurfaceViolation::ReferenceBalance { piece: piece.id });
        }
    }

    for (k, t) in g.tori.iter().enumerate() {
        let near = by_side[&(k, t.from_piece)];
        let far = by_side[&(k, t.to_piece)];
        for sign in [CurveSign::Plus, CurveSign::Minus] {
            let (na, nb, fa, fb) = match sign {
                CurveSign::Plus => (&near.a_plus, &near.b_plus, &far.a_plus, &far.b_plus),
                CurveSign::Minus => (&near.a_minus, &near.b_minus, &far.a_minus, &far.b_minus),
            };
            let flip = |v: BigInt| if sign == CurveSign::Minus { -v } else { v };
            let (fa2, fb2) = apply_gluing(t, na, nb);
            if fa != &flip(fa2) || fb != &flip(fb2) {
                out.push(SurfaceViolation::Gluing { torus: k, sign });
            }
            let (na2, nb2) = apply_inverse_gluing(t, fa, fb);
            if na != &flip(na2) || nb != &flip(nb2) {
                out.push(SurfaceViolation::InverseGluing { torus: k, sign });
            }
        }
        for s in [near, far] {
            if degree_of(s.side).is_positive() && !(s.a_plus.is_positive() && s.a_minus.is_positive())
            {
                out.push(SurfaceViolation::NotPositive {
                    torus: k,
                    side: s.side,
                });
            }
        }
    }

    check_recorded_reduction(g, &a, cert, &by_side, &mut out);

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// `[[q, p], [-p', -q']] · (a, b)`.
fn apply_gluing(t: &GluingTorus, a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    (
        BigInt::from(t.q) * a + BigInt::from(t.p) * b,
        -(BigInt::from(t.p_prime) * a) - BigInt::from(t.q_prime) * b,
    )
}

/// `[[q', p], [-p', -q]] · (a, b)`, the inverse change of basis.
fn apply_inverse_gluing(t: &GluingTorus, a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    (
        BigInt::from(t.q_prime) * a + BigInt::from(t.p) * b,
        -(BigInt::from(t.p_prime) * a) - BigInt::from(t.q) * b,
    )
}

/// Cross-checks the stored reduction against the curve data: the summed
/// far-side balances between pieces `i` and `j` must equal `-A'ᵢⱼ aⱼ`, and
/// `A'` must be a strict reduction of `A` annihilating `a`.
fn check_recorded_reduction(
    g: &DecompositionGraph,
    a: &SymMatrix,
    cert: &SurfaceCertificate,
    by_side: &HashMap<(usize, PieceId), &CurveSystem>,
    out: &mut Vec<SurfaceViolation>,
) {
    let n = g.order();
    let rp = &cert.a_prime;
    if rp.rows() != n || rp.cols() != n {
        out.push(SurfaceViolation::WrongLength {
            expected: n,
            found: rp.rows(),
        });
        return;
    }
    let weights: Vec<Rational> = cert
        .a
        .iter()
        .map(|v| Rational::from_integer(v.clone()))
        .collect();
    for i in 0..n {
        if rp[(i, i)] != *a.get(i, i) {
            out.push(SurfaceViolation::ReductionDiagonal {
                piece: g.pieces[i].id,
            });
        }
        for j in 0..n {
            if i == j {
                continue;
            }
            let aij = a.get(i, j);
            let strict = if aij.is_zero() {
                rp[(i, j)].is_zero()
            } else {
                rp[(i, j)].abs() < *aij
            };
            if !strict {
                out.push(SurfaceViolation::NotAStrictReduction { i, j });
            }
        }
    }
    let image = rp.mul_vec(&weights).expect("square");
    for (i, v) in image.iter().enumerate() {
        if !v.is_zero() {
            out.push(SurfaceViolation::ReductionNotAnnihilating {
                piece: g.pieces[i].id,
            });
        }
    }
    let mut pair_sums: HashMap<(usize, usize), Rational> = HashMap::new();
    for (k, t) in g.tori.iter().enumerate() {
        let i = g.index_of(t.from_piece).expect("validated");
        let j = g.index_of(t.to_piece).expect("validated");
        for (row, far_piece, far_idx) in [(i, t.to_piece, j), (j, t.from_piece, i)] {
            let far = by_side[&(k, far_piece)];
            *pair_sums.entry((row, far_idx)).or_insert_with(Rational::zero) +=
                Rational::new(&far.a_plus - &far.a_minus, BigInt::from(t.p));
        }
    }
    for ((i, j), sum) in pair_sums {
        if sum != -(&rp[(i, j)] * &weights[j]) {
            out.push(SurfaceViolation::ReductionMismatch { i, j });
        }
    }
}

/// Largest absolute value among the integer entries of a certificate.
pub fn max_abs_entry(cert: &SurfaceCertificate) -> BigInt {
    cert.systems
        .iter()
        .flat_map(|s| [&s.a_plus, &s.a_minus, &s.b_plus, &s.b_minus])
        .chain(cert.a.iter())
        .map(|v| v.abs())
        .max()
        .unwrap_or_else(BigInt::one)
}
