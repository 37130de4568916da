//! Connected finite covers of orientable surfaces with prescribed boundary
//! degrees.
//!
//! A connected α-fold cover of a surface `F` of genus `g` with `b`
//! boundary components corresponds to a transitive homomorphism
//! `π₁(F) → Sym(α)`. The presentation used throughout is
//! `⟨x₁,y₁,…,x_g,y_g,z₁,…,z_b | [x₁,y₁]⋯[x_g,y_g]·z₁⋯z_b⟩` with `z_b`
//! eliminated, and the cycle type of `zⱼ` lists the degrees of the cover
//! over the `j`-th boundary component.
//!
//! Products compose left to right: `a.then(b)` applies `a` first.
//! Commutators are `[x,y] = x·y·x⁻¹·y⁻¹`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A permutation of `{0, …, n-1}`, displayed 1-based in cycle notation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermError {
    #[error("not a permutation of 0..{0}")]
    NotBijective(usize),
    #[error("point {point} outside 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("point {0} appears twice")]
    RepeatedPoint(usize),
    #[error("malformed cycle notation: {0}")]
    Malformed(String),
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(PermError::NotBijective(n));
            }
            seen[v] = true;
        }
        Ok(Self { images })
    }

    /// Builds a permutation of degree `n` from 0-based cycles.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<usize> = (0..n).collect();
        let mut used = vec![false; n];
        for cycle in cycles {
            for (k, &p) in cycle.iter().enumerate() {
                if p >= n {
                    return Err(PermError::PointOutOfRange {
                        point: p + 1,
                        degree: n,
                    });
                }
                if used[p] {
                    return Err(PermError::RepeatedPoint(p + 1));
                }
                used[p] = true;
                images[p] = cycle[(k + 1) % cycle.len()];
            }
        }
        Ok(Self { images })
    }

    /// Parses 1-based cycle notation such as `(1 2 3)(4 5)`; `()` is the identity.
    pub fn parse(n: usize, text: &str) -> Result<Self, PermError> {
        let malformed = || PermError::Malformed(text.to_string());
        let mut cycles = Vec::new();
        let mut rest = text.trim();
        if rest.is_empty() {
            return Err(malformed());
        }
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(malformed)?;
            let close = body.find(')').ok_or_else(malformed)?;
            let points = body[..close]
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| match s.parse::<usize>() {
                    Ok(0) => Err(PermError::PointOutOfRange { point: 0, degree: n }),
                    Ok(p) => Ok(p - 1),
                    Err(_) => Err(malformed()),
                })
                .collect::<Result<Vec<_>, _>>()?;
            if !points.is_empty() {
                cycles.push(points);
            }
            rest = body[close + 1..].trim_start();
        }
        Self::from_cycles(n, &cycles)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, point: usize) -> usize {
        self.images[point]
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        Perm {
            images: self.images.iter().map(|&i| other.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &v) in self.images.iter().enumerate() {
            images[v] = i;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `[self, other] = self·other·self⁻¹·other⁻¹`.
    pub fn commutator(&self, other: &Perm) -> Perm {
        self.then(other).then(&self.inverse()).then(&other.inverse())
    }

    /// Cycles including fixed points, each starting at its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.images.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut p = start;
            while !seen[p] {
                seen[p] = true;
                cycle.push(p);
                p = self.images[p];
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths, fixed points included, in non-increasing order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Random permutation with the given cycle type.
    pub fn random_with_type(n: usize, cycle_type: &[usize], rng: &mut impl Rng) -> Perm {
        let mut points: Vec<usize> = (0..n).collect();
        points.shuffle(rng);
        let mut cycles = Vec::new();
        let mut at = 0;
        for &len in cycle_type {
            cycles.push(points[at..at + len].to_vec());
            at += len;
        }
        Perm::from_cycles(n, &cycles).expect("cycle type sums to the degree")
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Perm {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Perm { images }
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let moved: Vec<_> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if moved.is_empty() {
            return f.write_str("()");
        }
        for c in moved {
            write!(f, "({})", c.iter().map(|p| p + 1).join(" "))?;
        }
        Ok(())
    }
}

/// Whether the group generated by `gens` acts transitively on `0..n`.
pub fn is_transitive(n: usize, gens: &[&Perm]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(p) = stack.pop() {
        for g in gens {
            let q = g.apply(p);
            if !seen[q] {
                seen[q] = true;
                count += 1;
                stack.push(q);
            }
        }
    }
    count == n
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error("invalid cover spec: {0}")]
    InvalidSpec(String),
    #[error("boundary count parity differs from α·χ: no such cover exists")]
    ParityFails,
    #[error("search budget exhausted after {attempts} random attempts and {tuples} enumerated tuples")]
    SearchBudgetExhausted { attempts: u64, tuples: u64 },
    #[error("exhaustive enumeration needs {needed} tuples, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },
    #[error("exhaustive enumeration supports α <= 5, g <= 2, b <= 2")]
    OutOfRange,
}

/// Degree, genus and per-boundary cycle types of a requested cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverSpec {
    pub genus: usize,
    pub alpha: usize,
    pub boundary_degrees: Vec<Vec<usize>>,
}

impl CoverSpec {
    pub fn new(
        genus: usize,
        alpha: usize,
        boundary_degrees: Vec<Vec<usize>>,
    ) -> Result<Self, CoverError> {
        let spec = Self {
            genus,
            alpha,
            boundary_degrees,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), CoverError> {
        let bad = |m: String| Err(CoverError::InvalidSpec(m));
        if self.genus == 0 {
            return bad("genus must be at least 1".into());
        }
        if self.alpha == 0 {
            return bad("degree must be at least 1".into());
        }
        if self.boundary_degrees.is_empty() {
            return bad("at least one boundary component is required".into());
        }
        for (j, d) in self.boundary_degrees.iter().enumerate() {
            if d.contains(&0) {
                return bad(format!("boundary {}: degrees must be positive", j + 1));
            }
            let sum: usize = d.iter().sum();
            if sum != self.alpha {
                return bad(format!(
                    "boundary {}: degrees sum to {sum}, expected {}",
                    j + 1,
                    self.alpha
                ));
            }
        }
        Ok(())
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_degrees.len()
    }

    /// `χ(F) = 2 - 2g - b`.
    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.genus as i64 - self.boundary_count() as i64
    }

    /// Cycle type wanted for `z_j`, sorted like [`Perm::cycle_type`].
    pub fn cycle_type(&self, j: usize) -> Vec<usize> {
        let mut t = self.boundary_degrees[j].clone();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// Parses `"2,1;1,1,1"`: boundary components separated by `;`.
    pub fn parse_boundary(text: &str) -> Result<Vec<Vec<usize>>, CoverError> {
        text.split(';')
            .map(|part| {
                part.split(',')
                    .map(|v| {
                        v.trim().parse::<usize>().map_err(|_| {
                            CoverError::InvalidSpec(format!("bad boundary degree {:?}", v.trim()))
                        })
                    })
                    .collect()
            })
            .collect()
    }
}

/// Total prescribed boundary count `≡ α·χ(F) (mod 2)`.
pub fn parity_check(spec: &CoverSpec) -> bool {
    let total: i64 = spec.boundary_degrees.iter().map(|d| d.len() as i64).sum();
    (total - spec.alpha as i64 * spec.euler_characteristic()).rem_euclid(2) == 0
}

/// `d·a·χ ≡ d·k (mod 2)`.
pub fn seifert_parity(d: i64, a: i64, chi: i64, k_sum: i64) -> bool {
    let (d, a, chi, k) = (d as i128, a as i128, chi as i128, k_sum as i128);
    (d * a * chi - d * k).rem_euclid(2) == 0
}

/// Images of `x₁,y₁,…,x_g,y_g` and `z₁,…,z_{b-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverCertificate {
    pub alpha: usize,
    pub x: Vec<Perm>,
    pub y: Vec<Perm>,
    pub z: Vec<Perm>,
}

impl CoverCertificate {
    /// `z_b = ([x₁,y₁]⋯[x_g,y_g]·z₁⋯z_{b-1})⁻¹`.
    pub fn last_boundary(&self) -> Perm {
        let mut acc = Perm::identity(self.alpha);
        for (x, y) in self.x.iter().zip(&self.y) {
            acc = acc.then(&x.commutator(y));
        }
        for z in &self.z {
            acc = acc.then(z);
        }
        acc.inverse()
    }

    /// All boundary images `z₁,…,z_b`.
    pub fn boundary_images(&self) -> Vec<Perm> {
        let mut out = self.z.clone();
        out.push(self.last_boundary());
        out
    }

    pub fn generators(&self) -> impl Iterator<Item = &Perm> {
        self.x.iter().chain(&self.y).chain(&self.z)
    }

    /// Number of boundary components of the cover.
    pub fn cover_boundary_count(&self) -> usize {
        self.boundary_images().iter().map(|z| z.cycles().len()).sum()
    }
}

impl fmt::Display for CoverCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "alpha {}", self.alpha)?;
        for (i, (x, y)) in self.x.iter().zip(&self.y).enumerate() {
            writeln!(f, "x{} {x}", i + 1)?;
            writeln!(f, "y{} {y}", i + 1)?;
        }
        for (j, z) in self.z.iter().enumerate() {
            writeln!(f, "z{} {z}", j + 1)?;
        }
        Ok(())
    }
}

impl FromStr for CoverCertificate {
    type Err = PermError;

    /// Reads the format written by `Display`: an `alpha N` line, then one
    /// `name cycles` line per generator in the order `x₁,y₁,…,z₁,…`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let malformed = |m: &str| PermError::Malformed(m.to_string());
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| malformed("empty certificate"))?;
        let alpha = header
            .strip_prefix("alpha")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .ok_or_else(|| malformed(header))?;
        let mut cert = CoverCertificate {
            alpha,
            x: Vec::new(),
            y: Vec::new(),
            z: Vec::new(),
        };
        for line in lines {
            let (name, cycles) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let perm = Perm::parse(alpha, cycles)?;
            let (list, index) = match name.split_at(1) {
                ("x", i) => (&mut cert.x, i),
                ("y", i) => (&mut cert.y, i),
                ("z", i) => (&mut cert.z, i),
                _ => return Err(malformed(line)),
            };
            if index.parse::<usize>().ok() != Some(list.len() + 1) {
                return Err(malformed(line));
            }
            list.push(perm);
        }
        if cert.x.len() != cert.y.len() {
            return Err(malformed("unpaired x/y generators"));
        }
        Ok(cert)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverViolation {
    WrongDegree { generator: String, degree: usize },
    WrongGeneratorCount { expected: usize, found: usize },
    CycleType { boundary: usize, expected: Vec<usize>, found: Vec<usize> },
    NotTransitive,
}

impl fmt::Display for CoverViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverViolation::WrongDegree { generator, degree } => {
                write!(f, "{generator} acts on {degree} points")
            }
            CoverViolation::WrongGeneratorCount { expected, found } => {
                write!(f, "expected {expected} generators, found {found}")
            }
            CoverViolation::CycleType {
                boundary,
                expected,
                found,
            } => write!(
                f,
                "z{boundary} has cycle type {found:?}, expected {expected:?}"
            ),
            CoverViolation::NotTransitive => f.write_str("generated group is not transitive"),
        }
    }
}

/// Recomputes `z_b`, every boundary cycle type and transitivity.
pub fn verify_cover(spec: &CoverSpec, cert: &CoverCertificate) -> Result<(), Vec<CoverViolation>> {
    let mut out = Vec::new();
    let expected = 2 * spec.genus + spec.boundary_count() - 1;
    let found = cert.x.len() + cert.y.len() + cert.z.len();
    if cert.x.len() != spec.genus || cert.y.len() != spec.genus || found != expected {
        out.push(CoverViolation::WrongGeneratorCount { expected, found });
        return Err(out);
    }
    let names = (1..=spec.genus)
        .map(|i| format!("x{i}"))
        .chain((1..=spec.genus).map(|i| format!("y{i}")))
        .chain((1..spec.boundary_count()).map(|j| format!("z{j}")));
    for (name, g) in names.zip(cert.generators()) {
        if g.degree() != spec.alpha {
            out.push(CoverViolation::WrongDegree {
                generator: name,
                degree: g.degree(),
            });
        }
    }
    if cert.alpha != spec.alpha || !out.is_empty() {
        if out.is_empty() {
            out.push(CoverViolation::WrongDegree {
                generator: "alpha".into(),
                degree: cert.alpha,
            });
        }
        return Err(out);
    }
    for (j, z) in cert.boundary_images().iter().enumerate() {
        let want = spec.cycle_type(j);
        let have = z.cycle_type();
        if want != have {
            out.push(CoverViolation::CycleType {
                boundary: j + 1,
                expected: want,
                found: have,
            });
        }
    }
    let gens: Vec<&Perm> = cert.generators().collect();
    if !is_transitive(spec.alpha, &gens) {
        out.push(CoverViolation::NotTransitive);
    }
    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

/// Work limits for [`find_cover`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Random tuples tried before falling back to enumeration.
    pub random_attempts: u64,
    /// Generator tuples the exhaustive fallback may visit.
    pub exhaustive_tuples: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            random_attempts: 200_000,
            exhaustive_tuples: 50_000_000,
        }
    }
}

/// Builds a connected cover by randomized search, then exhaustive
/// enumeration, and verifies it before returning.
pub fn find_cover(
    spec: &CoverSpec,
    seed: u64,
    budget: SearchBudget,
) -> Result<CoverCertificate, CoverError> {
    spec.validate()?;
    if !parity_check(spec) {
        return Err(CoverError::ParityFails);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..budget.random_attempts {
        if let Some(cert) = random_attempt(spec, &mut rng) {
            debug_assert_eq!(verify_cover(spec, &cert), Ok(()));
            return Ok(cert);
        }
    }
    let mut visited = 0;
    if let Ok(table) = PermTable::new(spec.alpha, budget.exhaustive_tuples) {
        if let Ok(Some(cert)) = table.search(spec, budget.exhaustive_tuples, &mut visited) {
            if verify_cover(spec, &cert).is_ok() {
                return Ok(cert);
            }
        }
    }
    Err(CoverError::SearchBudgetExhausted {
        attempts: budget.random_attempts,
        tuples: visited,
    })
}

/// One random trial: sample `z₁,…,z_b` and `x₂,…,y_g`, then solve
/// `[x₁,y₁] = τ` for the remaining commutator by matching cycles of `y₁`
/// and `τ·y₁`.
fn random_attempt(spec: &CoverSpec, rng: &mut ChaCha8Rng) -> Option<CoverCertificate> {
    let n = spec.alpha;
    let zs: Vec<Perm> = (0..spec.boundary_count())
        .map(|j| Perm::random_with_type(n, &spec.cycle_type(j), rng))
        .collect();
    let mut x: Vec<Perm> = vec![Perm::identity(n)];
    let mut y: Vec<Perm> = vec![Perm::identity(n)];
    for _ in 1..spec.genus {
        x.push(Perm::random(n, rng));
        y.push(Perm::random(n, rng));
    }
    // relator = [x1,y1]·rest, so [x1,y1] = rest⁻¹
    let mut rest = Perm::identity(n);
    for i in 1..spec.genus {
        rest = rest.then(&x[i].commutator(&y[i]));
    }
    for z in &zs {
        rest = rest.then(z);
    }
    let tau = rest.inverse();
    let y1 = Perm::random(n, rng);
    let target = tau.then(&y1);
    if target.cycle_type() != y1.cycle_type() {
        return None;
    }
    // x1·y1·x1⁻¹ = τ·y1: x1⁻¹ carries the cycles of τ·y1 onto those of y1
    let u = cycle_matching(&target, &y1, rng);
    x[0] = u.inverse();
    y[0] = y1;
    let cert = CoverCertificate {
        alpha: n,
        x,
        y,
        z: zs[..zs.len() - 1].to_vec(),
    };
    let gens: Vec<&Perm> = cert.generators().collect();
    if !is_transitive(n, &gens) {
        return None;
    }
    (verify_cover(spec, &cert).is_ok()).then_some(cert)
}

/// Random `u` with `u(c(i)) = d(u(i))`, for `c` and `d` of equal cycle type.
fn cycle_matching(c: &Perm, d: &Perm, rng: &mut ChaCha8Rng) -> Perm {
    let n = c.degree();
    let mut by_len: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for cycle in d.cycles() {
        by_len.entry(cycle.len()).or_default().push(cycle);
    }
    for list in by_len.values_mut() {
        list.shuffle(rng);
    }
    let mut images = vec![0; n];
    for cycle in c.cycles() {
        let target = by_len
            .get_mut(&cycle.len())
            .and_then(Vec::pop)
            .expect("equal cycle types");
        let shift = rng.gen_range(0..cycle.len());
        for (k, &p) in cycle.iter().enumerate() {
            images[p] = target[(k + shift) % cycle.len()];
        }
    }
    Perm { images }
}

/// Exhaustive oracle: whether any generator tuple gives a connected cover
/// with the prescribed boundary degrees.
///
/// `x₁` ranges over one representative per conjugacy class, which loses
/// nothing since simultaneous conjugation preserves every constraint.
pub fn cover_exists_bruteforce(spec: &CoverSpec, budget: u64) -> Result<bool, CoverError> {
    spec.validate()?;
    if spec.alpha > 5 || spec.genus > 2 || spec.boundary_count() > 2 {
        return Err(CoverError::OutOfRange);
    }
    let table = PermTable::new(spec.alpha, budget)?;
    let needed = table.tuple_count(spec);
    if needed > budget as u128 {
        return Err(CoverError::BudgetExceeded { needed, budget });
    }
    let mut visited = 0;
    Ok(table.search(spec, budget, &mut visited)?.is_some())
}

/// All permutations of a small degree with a multiplication table.
struct PermTable {
    n: usize,
    perms: Vec<Perm>,
    mul: Vec<u16>,
    inv: Vec<u16>,
    cycle_type: Vec<Vec<usize>>,
}

impl PermTable {
    fn new(n: usize, budget: u64) -> Result<Self, CoverError> {
        let count: u128 = (1..=n as u128).product();
        if n > 6 || count * count > budget as u128 * 16 {
            return Err(CoverError::BudgetExceeded {
                needed: count * count,
                budget,
            });
        }
        let perms: Vec<Perm> = (0..n)
            .permutations(n)
            .map(|images| Perm { images })
            .collect();
        let index: HashMap<&Perm, u16> = perms.iter().enumerate().map(|(k, p)| (p, k as u16)).collect();
        let m = perms.len();
        let mut mul = vec![0u16; m * m];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                mul[a * m + b] = index[&pa.then(pb)];
            }
        }
        let inv = perms.iter().map(|p| index[&p.inverse()]).collect();
        let cycle_type = perms.iter().map(Perm::cycle_type).collect();
        Ok(Self {
            n,
            perms,
            mul,
            inv,
            cycle_type,
        })
    }

    fn mul(&self, a: u16, b: u16) -> u16 {
        self.mul[a as usize * self.perms.len() + b as usize]
    }

    fn commutator(&self, x: u16, y: u16) -> u16 {
        let xy = self.mul(x, y);
        let xyx = self.mul(xy, self.inv[x as usize]);
        self.mul(xyx, self.inv[y as usize])
    }

    /// One representative of each cycle type: consecutive cycles `(0 1 …)(k …)`.
    fn class_representatives(&self) -> Vec<u16> {
        let mut out = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (k, t) in self.cycle_type.iter().enumerate() {
            if seen.insert(t.clone()) {
                let mut cycles = Vec::new();
                let mut at = 0;
                for &len in t {
                    cycles.push((at..at + len).collect::<Vec<_>>());
                    at += len;
                }
                let rep = Perm::from_cycles(self.n, &cycles).expect("valid cycles");
                let idx = self.perms.iter().position(|p| *p == rep).unwrap_or(k);
                out.push(idx as u16);
            }
        }
        out
    }

    fn with_type(&self, t: &[usize]) -> Vec<u16> {
        (0..self.perms.len() as u16)
            .filter(|&k| self.cycle_type[k as usize] == t)
            .collect()
    }

    fn tuple_count(&self, spec: &CoverSpec) -> u128 {
        let m = self.perms.len() as u128;
        let mut count = self.class_representatives().len() as u128 * m.pow(2 * spec.genus as u32 - 1);
        for j in 0..spec.boundary_count() - 1 {
            count *= self.with_type(&spec.cycle_type(j)).len() as u128;
        }
        count
    }

    /// Depth-first enumeration in the order `x₁, y₁, …, x_g, y_g, z₁, …`.
    fn search(
        &self,
        spec: &CoverSpec,
        budget: u64,
        visited: &mut u64,
    ) -> Result<Option<CoverCertificate>, CoverError> {
        let all: Vec<u16> = (0..self.perms.len() as u16).collect();
        let mut choices: Vec<Vec<u16>> = vec![self.class_representatives()];
        for _ in 1..2 * spec.genus {
            choices.push(all.clone());
        }
        for j in 0..spec.boundary_count() - 1 {
            choices.push(self.with_type(&spec.cycle_type(j)));
        }
        let last_type = spec.cycle_type(spec.boundary_count() - 1);
        let mut picked = vec![0u16; choices.len()];
        let found = self.descend(spec, &choices, &last_type, 0, 0, &mut picked, budget, visited)?;
        Ok(found.then(|| {
            let g = spec.genus;
            let perm = |k: usize| self.perms[picked[k] as usize].clone();
            CoverCertificate {
                alpha: self.n,
                x: (0..g).map(|i| perm(2 * i)).collect(),
                y: (0..g).map(|i| perm(2 * i + 1)).collect(),
                z: (2 * g..picked.len()).map(perm).collect(),
            }
        }))
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        spec: &CoverSpec,
        choices: &[Vec<u16>],
        last_type: &[usize],
        depth: usize,
        prefix: u16,
        picked: &mut [u16],
        budget: u64,
        visited: &mut u64,
    ) -> Result<bool, CoverError> {
        let pairs = 2 * spec.genus;
        if depth == choices.len() {
            *visited += 1;
            if *visited > budget {
                return Err(CoverError::BudgetExceeded {
                    needed: *visited as u128,
                    budget,
                });
            }
            let z_last = self.inv[prefix as usize];
            if self.cycle_type[z_last as usize] != last_type {
                return Ok(false);
            }
            let gens: Vec<&Perm> = picked.iter().map(|&k| &self.perms[k as usize]).collect();
            return Ok(is_transitive(self.n, &gens));
        }
        for &c in &choices[depth] {
            picked[depth] = c;
            let next = if depth < pairs {
                if depth.is_multiple_of(2) {
                    prefix
                } else {
                    self.mul(prefix, self.commutator(picked[depth - 1], c))
                }
            } else {
                self.mul(prefix, c)
            };
            if self.descend(spec, choices, last_type, depth + 1, next, picked, budget, visited)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(g: usize, alpha: usize, degrees: Vec<Vec<usize>>) -> CoverSpec {
        CoverSpec::new(g, alpha, degrees).unwrap()
    }

    #[test]
    fn perm_basics() {
        let x = Perm::parse(3, "(1 2 3)").unwrap();
        assert_eq!(x.to_string(), "(1 2 3)");
        assert_eq!(x.then(&x.inverse()), Perm::identity(3));
        assert_eq!(Perm::identity(4).to_string(), "()");
        assert_eq!(Perm::parse(4, "()").unwrap(), Perm::identity(4));
        let p = Perm::parse(5, "(1 2)(3 5 4)").unwrap();
        assert_eq!(p.cycle_type(), vec![3, 2]);
        assert_eq!(Perm::parse(5, &p.to_string()).unwrap(), p);
        assert!(Perm::parse(3, "(1 4)").is_err());
        assert!(Perm::parse(3, "(1 2)(2 3)").is_err());
        assert!(Perm::parse(3, "1 2").is_err());
        // left to right: (1 2) then (2 3) sends 1 -> 2 -> 3
        let a = Perm::parse(3, "(1 2)").unwrap();
        let b = Perm::parse(3, "(2 3)").unwrap();
        assert_eq!(a.then(&b).apply(0), 2);
    }

    #[test]
    fn parity_examples() {
        assert!(!parity_check(&spec(1, 2, vec![vec![2]])));
        assert!(parity_check(&spec(1, 2, vec![vec![1, 1]])));
        for g in 1..4 {
            for b in 1..4 {
                assert!(parity_check(&spec(g, 1, vec![vec![1]; b])));
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(matches!(CoverSpec::new(0, 2, vec![vec![2]]), Err(CoverError::InvalidSpec(_))));
        assert!(matches!(CoverSpec::new(1, 2, vec![]), Err(CoverError::InvalidSpec(_))));
        assert!(matches!(CoverSpec::new(1, 3, vec![vec![2]]), Err(CoverError::InvalidSpec(_))));
        assert!(matches!(CoverSpec::new(1, 2, vec![vec![2, 0]]), Err(CoverError::InvalidSpec(_))));
        assert_eq!(
            CoverSpec::parse_boundary("2,1;1,1,1").unwrap(),
            vec![vec![2, 1], vec![1, 1, 1]]
        );
        assert!(CoverSpec::parse_boundary("2,x").is_err());
    }

    #[test]
    fn hand_checked_certificates() {
        let s = spec(1, 2, vec![vec![1, 1]]);
        let cert = CoverCertificate {
            alpha: 2,
            x: vec![Perm::parse(2, "(1 2)").unwrap()],
            y: vec![Perm::identity(2)],
            z: vec![],
        };
        assert!(cert.last_boundary().is_identity());
        assert_eq!(verify_cover(&s, &cert), Ok(()));

        let x = Perm::parse(3, "(1 2 3)").unwrap();
        let y = Perm::parse(3, "(1 2)").unwrap();
        assert_eq!(x.commutator(&y).cycle_type(), vec![3]);
        let cert = CoverCertificate {
            alpha: 3,
            x: vec![x],
            y: vec![y],
            z: vec![],
        };
        assert_eq!(verify_cover(&spec(1, 3, vec![vec![3]]), &cert), Ok(()));
    }

    #[test]
    fn verifier_rejects_bad_certificates() {
        let s = spec(1, 2, vec![vec![1, 1]]);
        let cert = CoverCertificate {
            alpha: 2,
            x: vec![Perm::identity(2)],
            y: vec![Perm::identity(2)],
            z: vec![],
        };
        assert_eq!(verify_cover(&s, &cert), Err(vec![CoverViolation::NotTransitive]));
        let s3 = spec(1, 3, vec![vec![3]]);
        let cert = CoverCertificate {
            alpha: 3,
            x: vec![Perm::parse(3, "(1 2 3)").unwrap()],
            y: vec![Perm::identity(3)],
            z: vec![],
        };
        assert!(matches!(
            verify_cover(&s3, &cert).unwrap_err()[0],
            CoverViolation::CycleType { boundary: 1, .. }
        ));
        let short = CoverCertificate {
            alpha: 3,
            x: vec![],
            y: vec![],
            z: vec![],
        };
        assert!(matches!(
            verify_cover(&s3, &short).unwrap_err()[0],
            CoverViolation::WrongGeneratorCount { .. }
        ));
    }

    #[test]
    fn find_cover_examples() {
        let s = spec(1, 2, vec![vec![1, 1]]);
        let cert = find_cover(&s, 0, SearchBudget::default()).unwrap();
        assert_eq!(verify_cover(&s, &cert), Ok(()));
        let s = spec(1, 3, vec![vec![3]]);
        let cert = find_cover(&s, 1, SearchBudget::default()).unwrap();
        assert_eq!(verify_cover(&s, &cert), Ok(()));
        assert_eq!(
            find_cover(&spec(1, 2, vec![vec![2]]), 0, SearchBudget::default()),
            Err(CoverError::ParityFails)
        );
    }

    #[test]
    fn find_cover_is_deterministic_and_scales() {
        let s = spec(2, 8, vec![vec![3, 3, 2], vec![5, 2, 1]]);
        assert!(parity_check(&s));
        let a = find_cover(&s, 42, SearchBudget::default()).unwrap();
        let b = find_cover(&s, 42, SearchBudget::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(verify_cover(&s, &a), Ok(()));
        let expected = (s.alpha as i64 * s.euler_characteristic()).rem_euclid(2);
        assert_eq!(a.cover_boundary_count() as i64 % 2, expected);
    }

    #[test]
    fn exhaustive_fallback_finds_covers() {
        let s = spec(1, 3, vec![vec![3]]);
        let budget = SearchBudget {
            random_attempts: 0,
            exhaustive_tuples: 1_000_000,
        };
        let cert = find_cover(&s, 0, budget).unwrap();
        assert_eq!(verify_cover(&s, &cert), Ok(()));
        let starved = SearchBudget {
            random_attempts: 0,
            exhaustive_tuples: 1,
        };
        assert!(matches!(
            find_cover(&spec(2, 4, vec![vec![2, 2]]), 0, starved),
            Err(CoverError::SearchBudgetExhausted { .. })
        ));
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(cover_exists_bruteforce(&spec(1, 2, vec![vec![2]]), 1_000), Ok(false));
        assert_eq!(cover_exists_bruteforce(&spec(1, 2, vec![vec![1, 1]]), 1_000), Ok(true));
        assert_eq!(cover_exists_bruteforce(&spec(2, 1, vec![vec![1]]), 1_000), Ok(true));
        assert!(matches!(
            cover_exists_bruteforce(&spec(2, 4, vec![vec![4], vec![2, 2]]), 10),
            Err(CoverError::BudgetExceeded { .. })
        ));
        assert_eq!(
            cover_exists_bruteforce(&spec(3, 2, vec![vec![2]]), 1_000),
            Err(CoverError::OutOfRange)
        );
    }

    #[test]
    fn seifert_parity_examples() {
        for (a, chi, k) in [(1, -1, 2), (3, -5, 7), (0, 0, 1)] {
            assert!(seifert_parity(2, a, chi, k));
        }
        assert!(!seifert_parity(1, 1, -1, 2));
        assert!(seifert_parity(1, 2, -1, 2));
    }

    #[test]
    fn certificate_text_round_trip() {
        let s = spec(2, 5, vec![vec![2, 2, 1], vec![3, 1, 1]]);
        let cert = find_cover(&s, 7, SearchBudget::default()).unwrap();
        let text = cert.to_string();
        assert_eq!(text.lines().count(), 1 + 2 * 2 + 1);
        let back: CoverCertificate = text.parse().unwrap();
        assert_eq!(back, cert);
        assert!("alpha 2\nw1 (1 2)\n".parse::<CoverCertificate>().is_err());
        assert!("alpha 2\nx2 (1 2)\n".parse::<CoverCertificate>().is_err());
    }
}
