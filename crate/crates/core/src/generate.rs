//! Seeded random instances: manifolds with a prescribed inertia profile
//! and the matrix families used by the test suites.
//!
//! Every generator is deterministic in its seed and checks its output
//! exactly, resampling until the requested property holds.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::{Matrix, SymMatrix};
use crate::manifold::{a_minus, DecompositionGraph, GluingTorus, SeifertPiece};
use crate::rational::{frac, int, Rational};

/// Inertia profile of `A₋` requested from [`generate_manifold`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Profile {
    /// No constraint.
    Any,
    /// `A₋` negative definite.
    NegDef,
    /// `A₋` has a positive eigenvalue.
    PosEig,
    /// `A₋` negative semidefinite and singular.
    SemiDef,
}

impl Profile {
    pub fn matches(self, a: &SymMatrix) -> bool {
        let inertia = a_minus(a).inertia();
        match self {
            Profile::Any => true,
            Profile::NegDef => inertia.n_pos + inertia.n_zero == 0,
            Profile::PosEig => inertia.n_pos > 0,
            Profile::SemiDef => inertia.n_pos == 0 && inertia.n_zero > 0,
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Any => "any",
            Profile::NegDef => "negdef",
            Profile::PosEig => "posEig",
            Profile::SemiDef => "semidef",
        })
    }
}

impl FromStr for Profile {
    type Err = GenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "any" => Ok(Profile::Any),
            "negdef" => Ok(Profile::NegDef),
            "posEig" => Ok(Profile::PosEig),
            "semidef" => Ok(Profile::SemiDef),
            other => Err(GenError::UnknownProfile(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("at least 2 pieces are required, got {0}")]
    TooFewPieces(usize),
    #[error("unknown profile {0:?} (expected any, negdef, posEig or semidef)")]
    UnknownProfile(String),
    #[error("no {profile} instance found within {attempts} attempts")]
    Unsatisfiable { profile: Profile, attempts: usize },
}

const ATTEMPTS: usize = 1000;

/// Random valid graph manifold with `pieces` pieces whose decomposition
/// matrix has the requested profile.
pub fn generate_manifold(
    pieces: usize,
    seed: u64,
    profile: Profile,
) -> Result<DecompositionGraph, GenError> {
    if pieces < 2 {
        return Err(GenError::TooFewPieces(pieces));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..ATTEMPTS {
        let g = candidate_manifold(pieces, profile, &mut rng);
        if let Ok(a) = g.decomposition_matrix() {
            if profile.matches(&a) {
                return Ok(g);
            }
        }
    }
    Err(GenError::Unsatisfiable {
        profile,
        attempts: ATTEMPTS,
    })
}

fn candidate_manifold(k: usize, profile: Profile, rng: &mut ChaCha8Rng) -> DecompositionGraph {
    let ids: Vec<i64> = (1..=k as i64).collect();
    let mut tori = Vec::new();
    for i in 1..k {
        let j = rng.gen_range(0..i);
        tori.push(random_torus(ids[j], ids[i], rng));
    }
    for _ in 0..rng.gen_range(0..=k / 2) {
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k - 1);
        if j >= i {
            j += 1;
        }
        tori.push(random_torus(ids[i], ids[j], rng));
    }
    let mut pieces: Vec<SeifertPiece> = ids
        .iter()
        .map(|&id| {
            let mut p = SeifertPiece::new(id, Rational::zero(), rng.gen_range(1..=2));
            if rng.gen_bool(0.25) {
                p.cone_orders.push(rng.gen_range(2..=5));
            }
            p
        })
        .collect();
    let graph = DecompositionGraph::new(pieces.clone(), tori);
    let w = graph.decomposition_matrix().expect("generated graph is valid");
    let e = euler_numbers(&w, profile, rng);
    for (p, e) in pieces.iter_mut().zip(e) {
        p.euler = e;
    }
    DecompositionGraph::new(pieces, graph.tori)
}

/// Torus with fiber intersection `p` in `1..=3` and random basis data of determinant -1.
fn random_torus(from: i64, to: i64, rng: &mut ChaCha8Rng) -> GluingTorus {
    let p: i64 = rng.gen_range(1..=3);
    let mut t = GluingTorus::with_p(from, to, p);
    if rng.gen_bool(0.5) {
        return t;
    }
    let q = loop {
        let q: i64 = rng.gen_range(-3..=3);
        if q != 0 && q.gcd(&p) == 1 {
            break q;
        }
    };
    // q' ≡ q⁻¹ (mod p), shifted by a random multiple of p
    let inv = (1..=p).find(|&c| (q * c - 1).rem_euclid(p) == 0).unwrap_or(1);
    let q_prime = inv + p * rng.gen_range(-1..=1);
    t.q = q;
    t.q_prime = q_prime;
    t.p_prime = (q * q_prime - 1) / p;
    t
}

/// Euler numbers for the off-diagonal part of `w` (its diagonal is ignored).
///
/// With a positive vector `a`, `|eᵢ| = (Σⱼ wᵢⱼaⱼ)/aᵢ + δᵢ` makes `A₋a` negative
/// (definite), zero (semidefinite) or, with `δᵢ < 0` somewhere, positive
/// somewhere (a positive eigenvalue). Signs of `eᵢ` are random.
fn euler_numbers(w: &SymMatrix, profile: Profile, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let n = w.order();
    if profile == Profile::Any {
        return (0..n).map(|_| small_rational(rng, 4)).collect();
    }
    let a: Vec<Rational> = (0..n).map(|_| int(rng.gen_range(1..=3))).collect();
    let pushed = rng.gen_range(0..n);
    (0..n)
        .map(|i| {
            let mut row = Rational::zero();
            for (j, aj) in a.iter().enumerate() {
                if i != j {
                    row += w.get(i, j) * aj;
                }
            }
            let base = row / &a[i];
            let delta = match profile {
                Profile::NegDef => frac(rng.gen_range(1..=4), 2),
                Profile::SemiDef => Rational::zero(),
                _ if i == pushed || rng.gen_bool(0.3) => -frac(rng.gen_range(1..=4), 2),
                _ => frac(rng.gen_range(-2..=2), 2),
            };
            let magnitude = (base + delta).max(Rational::zero());
            if rng.gen_bool(0.5) {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect()
}

/// Rational `m/d` with `|m| <= bound * d` and `d` in `1..=3`.
pub fn small_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    let d: i64 = rng.gen_range(1..=3);
    frac(rng.gen_range(-bound * d..=bound * d), d)
}

fn nonnegative_rational(rng: &mut impl Rng, bound: i64) -> Rational {
    let d: i64 = rng.gen_range(1..=2);
    frac(rng.gen_range(0..=bound * d), d)
}

/// Symmetric rational matrix with non-negative off-diagonal entries; about
/// a third of the off-diagonal entries are zero.
#[allow(clippy::needless_range_loop)]
pub fn random_symmetric(rng: &mut impl Rng, order: usize) -> SymMatrix {
    let mut rows = vec![vec![Rational::zero(); order]; order];
    for i in 0..order {
        rows[i][i] = small_rational(rng, 4);
        for j in i + 1..order {
            if rng.gen_bool(2.0 / 3.0) {
                let v = nonnegative_rational(rng, 2);
                rows[i][j] = v.clone();
                rows[j][i] = v;
            }
        }
    }
    SymMatrix::from_rows(rows).expect("symmetric by construction")
}

/// Connected negative definite matrix `-PᵀP - δI` with off-diagonal
/// entries replaced by their absolute values, resampled until it stays
/// negative definite and connected.
pub fn gram_negative_definite(rng: &mut impl Rng, order: usize) -> SymMatrix {
    loop {
        let p = Matrix::from_rows(
            (0..order)
                .map(|_| (0..order).map(|_| int(rng.gen_range(-2..=2))).collect())
                .collect(),
        )
        .expect("rectangular");
        let gram = p.transpose().mul(&p).expect("square");
        let delta = frac(rng.gen_range(1..=4), 2);
        let m = SymMatrix::from_fn(order, |i, j| {
            if i == j {
                -&gram[(i, i)] - &delta
            } else {
                gram[(i, j)].abs()
            }
        });
        if m.is_connected() && m.is_negative_definite() {
            return m;
        }
    }
}

/// Random connected graph on `order` vertices as non-negative weights:
/// a spanning tree plus extra edges.
fn connected_weights(rng: &mut impl Rng, order: usize) -> Vec<Vec<Rational>> {
    let mut w = vec![vec![Rational::zero(); order]; order];
    let add = |w: &mut Vec<Vec<Rational>>, i: usize, j: usize, v: Rational| {
        w[i][j] += &v;
        w[j][i] += v;
    };
    for i in 1..order {
        let j = rng.gen_range(0..i);
        let v = frac(rng.gen_range(1..=4), 2);
        add(&mut w, i, j, v);
    }
    for _ in 0..rng.gen_range(0..=order) {
        let i = rng.gen_range(0..order);
        let j = rng.gen_range(0..order);
        if i != j {
            let v = frac(rng.gen_range(1..=4), 2);
            add(&mut w, i, j, v);
        }
    }
    w
}

/// Connected negative matrix: negative definite, or negative semidefinite
/// and singular when `semidefinite` is set.
pub fn connected_negative(rng: &mut impl Rng, order: usize, semidefinite: bool) -> SymMatrix {
    let w = connected_weights(rng, order);
    let a: Vec<Rational> = (0..order).map(|_| int(rng.gen_range(1..=4))).collect();
    let m = SymMatrix::from_fn(order, |i, j| {
        if i != j {
            return w[i][j].clone();
        }
        let row: Rational = (0..order)
            .filter(|&k| k != i)
            .map(|k| &w[i][k] * &a[k])
            .sum();
        -(row / &a[i])
    });
    if semidefinite {
        return m;
    }
    let d: Vec<Rational> = (0..order)
        .map(|_| frac(rng.gen_range(0..=3), 2))
        .collect();
    let d = if d.iter().all(Zero::is_zero) {
        let mut d = d;
        d[rng.gen_range(0..order)] = Rational::one();
        d
    } else {
        d
    };
    SymMatrix::from_fn(order, |i, j| {
        if i == j {
            m.get(i, i) - &d[i]
        } else {
            m.get(i, j).clone()
        }
    })
}

/// Symmetric strict reduction: every positive off-diagonal entry is
/// scaled by a random factor in the open interval `(-1, 1)`.
pub fn random_strict_reduction(rng: &mut impl Rng, a: &SymMatrix) -> SymMatrix {
    a.map_off_diagonal(|v| {
        let d: i64 = rng.gen_range(2..=6);
        v * frac(rng.gen_range(-(d - 1)..=d - 1), d)
    })
}

/// Random integer vector with entries in `-bound..=bound`.
pub fn random_vector(rng: &mut impl Rng, order: usize, bound: i64) -> Vec<Rational> {
    (0..order).map(|_| int(rng.gen_range(-bound..=bound))).collect()
}

/// Random invertible integer matrix (unit triangular factors, rows shuffled).
pub fn random_unimodular(rng: &mut impl Rng, order: usize) -> Matrix {
    let mut l = Matrix::identity(order);
    let mut u = Matrix::identity(order);
    for i in 0..order {
        for j in 0..i {
            l[(i, j)] = int(rng.gen_range(-2..=2));
            u[(j, i)] = int(rng.gen_range(-2..=2));
        }
    }
    let m = l.mul(&u).expect("square");
    let mut rows = m.to_rows();
    rows.shuffle(rng);
    Matrix::from_rows(rows).expect("rectangular")
}
