//! Embedding numbers and conjugacy-class counts.
//!
//! The central objects are E(B, Γ) — the number of optimal embeddings of a
//! quadratic order B modulo conjugation, evaluated through the product
//! formula cl(B) · Π_{p|d}(1 − (B/p)) · Π_{p|m}(1 + (B/p)) — and the
//! trace-indexed counts E(t, n, Γ) = Σ over B ⊇ ℤ\[γ\] of E(B, Γ). Primitive
//! hyperbolic counts E′(t, 1, Γ) invert the power-trace recursion. The
//! exceptional classes of trace p + 1 and determinant p for Γ₀(m) get
//! explicit matrix representatives, and a brute-force conjugation oracle
//! cross-checks the product formula independently.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::sync::Mutex;

use num::rational::Ratio;
use serde::Serialize;

use crate::arith::{
    self, divisors, extended_gcd, is_prime, is_squarefree, kronecker, mod_inverse, omega,
};
use crate::quadforms::{InvariantCache, QuadOrder};
use crate::{Error, Result};

/// The Fuchsian group a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum GroupDescriptor {
    /// Norm-one units of a maximal order in the indefinite rational
    /// quaternion division algebra of discriminant `d` (squarefree,
    /// an even number ≥ 2 of prime factors).
    CocompactUnits { d: u64 },
    /// The Hecke congruence group Γ₀(m), `m` squarefree.
    HeckeCongruence { m: u64 },
}

impl GroupDescriptor {
    pub fn cocompact(d: u64) -> Result<Self> {
        if !is_squarefree(d)? {
            return Err(Error::domain(format!("{d} is not squarefree")));
        }
        let om = omega(d)?;
        if om < 2 || om % 2 != 0 {
            return Err(Error::domain(format!(
                "discriminant {d} must have an even number (≥ 2) of prime factors"
            )));
        }
        Ok(GroupDescriptor::CocompactUnits { d })
    }

    pub fn hecke(m: u64) -> Result<Self> {
        if m == 0 || !is_squarefree(m)? {
            return Err(Error::domain(format!(
                "level {m} must be positive squarefree"
            )));
        }
        Ok(GroupDescriptor::HeckeCongruence { m })
    }

    /// Primes of the division-algebra discriminant (empty for Γ₀(m)).
    pub fn division_primes(&self) -> Result<Vec<u64>> {
        match self {
            GroupDescriptor::CocompactUnits { d } => arith::prime_divisors(*d),
            GroupDescriptor::HeckeCongruence { .. } => Ok(Vec::new()),
        }
    }

    /// Primes of the level (empty for the cocompact groups).
    pub fn level_primes(&self) -> Result<Vec<u64>> {
        match self {
            GroupDescriptor::CocompactUnits { .. } => Ok(Vec::new()),
            GroupDescriptor::HeckeCongruence { m } => arith::prime_divisors(*m),
        }
    }

    pub fn label(&self) -> String {
        match self {
            GroupDescriptor::CocompactUnits { d } => format!("cocompact:{d}"),
            GroupDescriptor::HeckeCongruence { m } => format!("gamma0:{m}"),
        }
    }
}

/// 2×2 integer matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IntegerMatrix2x2 {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl IntegerMatrix2x2 {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Self {
        IntegerMatrix2x2 { a, b, c, d }
    }

    pub fn trace(&self) -> i64 {
        self.a + self.d
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Member of M(m): integer entries with c ≡ 0 (mod m).
    pub fn in_level(&self, m: u64) -> bool {
        self.c.rem_euclid(m as i64) == 0
    }

    fn mul(&self, rhs: &Self) -> Self {
        IntegerMatrix2x2 {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    /// Inverse for det ±1 matrices.
    fn unit_inverse(&self) -> Self {
        let det = self.det();
        debug_assert!(det == 1 || det == -1);
        IntegerMatrix2x2 {
            a: det * self.d,
            b: -det * self.b,
            c: -det * self.c,
            d: det * self.a,
        }
    }

    /// Action on a cusp x/y (reduced or not); returns the reduced image.
    fn act_on_cusp(&self, x: i64, y: i64) -> (i64, i64) {
        let nx = self.a * x + self.b * y;
        let ny = self.c * x + self.d * y;
        normalize_cusp(nx, ny)
    }
}

fn normalize_cusp(x: i64, y: i64) -> (i64, i64) {
    if x == 0 && y == 0 {
        return (0, 0);
    }
    let g = arith::gcd_i64(x, y).max(1);
    let (mut x, mut y) = (x / g, y / g);
    if y < 0 || (y == 0 && x < 0) {
        x = -x;
        y = -y;
    }
    (x, y)
}

/// The symbol (B/p): 1 if p splits in the fraction field or B is not
/// maximal at p (p divides the conductor); −1 if p is inert and B maximal
/// at p; 0 if p is ramified and B maximal at p.
pub fn symbol_bp(order: &QuadOrder, p: u64) -> i32 {
    if order.conductor() % p == 0 {
        return 1;
    }
    kronecker(order.fund_disc(), p)
}

/// E(B, Γ) = cl(B) · Π_{p|d}(1 − (B/p)) · Π_{p|m}(1 + (B/p)).
pub fn embedding_count_order(
    order: &QuadOrder,
    group: &GroupDescriptor,
    cache: &InvariantCache,
) -> Result<u64> {
    let h = cache.get(order)?.h_wide;
    let mut count = h;
    for p in group.division_primes()? {
        count *= (1 - symbol_bp(order, p)) as u64;
    }
    for p in group.level_primes()? {
        count *= (1 + symbol_bp(order, p)) as u64;
    }
    Ok(count)
}

/// E(t, n, Γ) = Σ over B ⊇ ℤ\[γ\] of E(B, Γ). Symmetric in t ↔ −t by construction
/// (only t² enters). Errors with `ExceptionalTrace` when t² − 4n is a
/// perfect square (the t = p + 1 case for n = p).
pub fn embedding_count_trace(
    t: i64,
    n: i64,
    group: &GroupDescriptor,
    cache: &InvariantCache,
) -> Result<u64> {
    let mut total = 0u64;
    for order in crate::quadforms::superorders_of_element(t.abs(), n)? {
        total += embedding_count_order(&order, group, cache)?;
    }
    Ok(total)
}

/// E(p + 1, p, Γ₀(m)) = 2^ω(m) (p − 1): the number of conjugacy classes of
/// trace p + 1 and determinant p.
pub fn exceptional_class_count(p: u64, m: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::domain(format!("{p} is not prime")));
    }
    if !is_squarefree(m)? {
        return Err(Error::domain(format!("{m} is not squarefree")));
    }
    if m % p == 0 {
        return Err(Error::domain(format!("p = {p} must not divide m = {m}")));
    }
    Ok((1u64 << omega(m)?) * (p - 1))
}

/// Representatives γ_{v,n} = [[p − nv, n], [v(p − nv − 1), nv + 1]] of the
/// exceptional conjugacy classes: for each positive v | m, the values
/// n = n₀(v) + k·(m/v) with 0 ≤ k < p − 1 and n₀(v) ≡ (p−1)·v⁻¹ (mod m/v).
pub fn exceptional_representatives(p: u64, m: u64) -> Result<Vec<IntegerMatrix2x2>> {
    exceptional_class_count(p, m)?; // validates preconditions
    let mut reps = Vec::new();
    for v in divisors(m)? {
        let modulus = m / v;
        let inv = mod_inverse(v as i64, modulus)
            .ok_or_else(|| Error::Inconsistent(format!("v = {v} not invertible mod {modulus}")))?;
        let n0 = ((p - 1) as i64 * inv).rem_euclid(modulus.max(1) as i64);
        for k in 0..(p - 1) as i64 {
            let n = n0 + k * modulus as i64;
            let vi = v as i64;
            let pi = p as i64;
            let gamma = IntegerMatrix2x2::new(pi - n * vi, n, vi * (pi - n * vi - 1), n * vi + 1);
            debug_assert_eq!(gamma.trace(), pi + 1);
            debug_assert_eq!(gamma.det(), pi);
            debug_assert!(gamma.in_level(m));
            reps.push(gamma);
        }
    }
    debug_assert_eq!(reps.len() as u64, (1u64 << omega(m)?) * (p - 1));
    Ok(reps)
}

/// Cusp representatives F(m) = {1/v : v | m}, as reduced rationals.
pub fn cusp_representatives(m: u64) -> Result<Vec<Ratio<i64>>> {
    Ok(divisors(m)?
        .into_iter()
        .map(|v| Ratio::new(1, v as i64))
        .collect())
}

/// Constructive check that Γ₀(m)-inequivalent cusps stay inequivalent
/// modulo M_p(m): for every v | m and every coset representative γ of the
/// double-coset decomposition of M_p(m), solve the linear congruence from
/// the proof to produce a witness w ∈ Γ₀(m) with w(γ·(1/v)) = 1/v… i.e.
/// verify γ·(1/v) ~ 1/v directly. Returns false if any witness fails.
pub fn verify_cusp_inequivalence(m: u64, p: u64) -> Result<bool> {
    if !is_prime(p) || m % p == 0 || !is_squarefree(m)? {
        return Err(Error::domain(format!(
            "need p prime, p ∤ m; got p={p}, m={m}"
        )));
    }
    let pi = p as i64;
    // coset representatives of M_p(m): [[1, j], [0, p]] and [[p, 0], [0, 1]]
    let mut cosets: Vec<IntegerMatrix2x2> = (0..pi)
        .map(|j| IntegerMatrix2x2::new(1, j, 0, pi))
        .collect();
    cosets.push(IntegerMatrix2x2::new(pi, 0, 0, 1));

    for v in divisors(m)? {
        let vi = v as i64;
        for gamma in &cosets {
            let (x, den) = gamma.act_on_cusp(1, vi);
            // the image must be expressible as x/(y·v) with (y, m) = 1
            if den % vi != 0 {
                return Ok(false);
            }
            let y = den / vi;
            if arith::gcd_i64(y, m as i64) != 1 {
                return Ok(false);
            }
            // solve x·y − 1 = c·(m/v)·x + b·(v·y) for integers b, c
            let mv = (m / v) as i64;
            let rhs = x * y - 1;
            let (g, c0, b0) = extended_gcd(mv * x, vi * y);
            if rhs % g != 0 {
                return Ok(false);
            }
            let scale = rhs / g;
            let c = c0 * scale;
            let b = b0 * scale;
            let a = x - b * vi;
            let d = y - c * mv;
            let witness = IntegerMatrix2x2::new(a, b, m as i64 * c, d);
            if witness.det() != 1 || !witness.in_level(m) {
                return Ok(false);
            }
            if witness.act_on_cusp(1, vi) != (x, den) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// primitive counts
// ---------------------------------------------------------------------------

/// Counting context: memoizes order invariants and per-group counts.
#[derive(Default)]
pub struct CountCache {
    pub orders: InvariantCache,
    eprime: Mutex<HashMap<(GroupDescriptor, i64), u64>>,
}

impl CountCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// E(t, n, Γ).
    pub fn trace_count(&self, t: i64, n: i64, group: &GroupDescriptor) -> Result<u64> {
        embedding_count_trace(t, n, group, &self.orders)
    }

    /// E′(t, 1, Γ) for t ≥ 3: E(t, 1, Γ) minus the contributions of powers,
    /// through the power-trace sequence a₁ = s, a₂ = s² − 2,
    /// a_{r+1} = s·a_r − a_{r−1}.
    pub fn primitive_count(&self, t: i64, group: &GroupDescriptor) -> Result<u64> {
        if t < 3 {
            return Err(Error::domain(format!(
                "primitive counts need t ≥ 3, got {t}"
            )));
        }
        if let Some(&hit) = self.eprime.lock().unwrap().get(&(*group, t)) {
            return Ok(hit);
        }
        // fill ascending so that the recursion always hits the memo
        for s in 3..=t {
            if self.eprime.lock().unwrap().contains_key(&(*group, s)) {
                continue;
            }
            let mut value = self.trace_count(s, 1, group)? as i64;
            for base in 3..s {
                // does some power of a trace-`base` element have trace s?
                let (mut prev, mut cur) = (2i64, base);
                let mut hits = false;
                while cur < s {
                    let next = base * cur - prev;
                    prev = cur;
                    cur = next;
                    if cur == s {
                        hits = true;
                        break;
                    }
                }
                if hits {
                    let sub = *self.eprime.lock().unwrap().get(&(*group, base)).unwrap();
                    value -= sub as i64;
                }
            }
            if value < 0 {
                return Err(Error::Inconsistent(format!(
                    "negative primitive count at t = {s} for {}",
                    group.label()
                )));
            }
            self.eprime
                .lock()
                .unwrap()
                .insert((*group, s), value as u64);
        }
        Ok(*self.eprime.lock().unwrap().get(&(*group, t)).unwrap())
    }
}

/// E′(t, 1, Γ) with a fresh cache.
pub fn primitive_count(t: i64, group: &GroupDescriptor) -> Result<u64> {
    CountCache::new().primitive_count(t, group)
}

// ---------------------------------------------------------------------------
// conjugacy oracle
// ---------------------------------------------------------------------------

/// Outcome of the brute-force conjugacy count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OracleOutcome {
    /// Count stable under doubling of the enumeration bound.
    Stable(u64),
    /// Resource caps prevented a stable answer.
    Inconclusive,
}

/// Which conjugators the oracle may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConjugatorSet {
    /// Conjugation by the full unit group of M(m): the translations
    /// `T = [[1,1],[0,1]]`, `U = [[1,0],[m,1]]` and the norm −1 unit
    /// J = diag(1, −1). This is the convention under which the product
    /// formula's cl(B) (wide class numbers) reproduces the class counts.
    FullUnits,
    /// Norm-one conjugators only (T, U and inverses). Exposes the
    /// narrow-versus-wide discrepancy instead of hiding it.
    NormOneOnly,
}

/// Both oracle counts plus stability flags, for fixtures.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub t: i64,
    pub level: u64,
    pub bound: u64,
    pub full_units: OracleOutcome,
    pub norm_one_only: OracleOutcome,
}

fn enumerate_level_matrices(t: i64, m: u64, det: i64, bound: i64) -> Vec<IntegerMatrix2x2> {
    let mut out = Vec::new();
    for a in -bound..=bound {
        let d = t - a;
        if d.abs() > bound {
            continue;
        }
        let bc = a * d - det; // b·c
        if bc == 0 {
            for b in -bound..=bound {
                let gamma = IntegerMatrix2x2::new(a, b, 0, d);
                if gamma.in_level(m) {
                    out.push(gamma);
                }
            }
            for c in -bound..=bound {
                if c != 0 {
                    let gamma = IntegerMatrix2x2::new(a, 0, c, d);
                    if gamma.in_level(m) {
                        out.push(gamma);
                    }
                }
            }
        } else {
            let mut b = -bound;
            while b <= bound {
                if b != 0 && bc % b == 0 {
                    let c = bc / b;
                    if c.abs() <= bound {
                        let gamma = IntegerMatrix2x2::new(a, b, c, d);
                        if gamma.in_level(m) {
                            out.push(gamma);
                        }
                    }
                }
                b += 1;
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

fn merge_classes(
    matrices: &[IntegerMatrix2x2],
    m: u64,
    set: ConjugatorSet,
    entry_cap: i64,
    state_cap: usize,
) -> Option<u64> {
    let mut conjugators = vec![
        IntegerMatrix2x2::new(1, 1, 0, 1),
        IntegerMatrix2x2::new(1, -1, 0, 1),
        IntegerMatrix2x2::new(1, 0, m as i64, 1),
        IntegerMatrix2x2::new(1, 0, -(m as i64), 1),
    ];
    if set == ConjugatorSet::FullUnits {
        conjugators.push(IntegerMatrix2x2::new(1, 0, 0, -1));
    }

    let index: HashMap<IntegerMatrix2x2, usize> =
        matrices.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let mut class_of: Vec<Option<usize>> = vec![None; matrices.len()];
    let mut classes = 0u64;

    for start in 0..matrices.len() {
        if class_of[start].is_some() {
            continue;
        }
        let class_id = classes as usize;
        classes += 1;
        let mut queue = VecDeque::new();
        let mut visited: HashSet<IntegerMatrix2x2> = HashSet::new();
        queue.push_back(matrices[start]);
        visited.insert(matrices[start]);
        class_of[start] = Some(class_id);
        while let Some(g) = queue.pop_front() {
            if visited.len() > state_cap {
                return None;
            }
            for w in &conjugators {
                let h = w.mul(&g).mul(&w.unit_inverse());
                if h.a.abs() > entry_cap
                    || h.b.abs() > entry_cap
                    || h.c.abs() > entry_cap
                    || h.d.abs() > entry_cap
                {
                    continue;
                }
                if visited.insert(h) {
                    if let Some(&i) = index.get(&h) {
                        match class_of[i] {
                            None => class_of[i] = Some(class_id),
                            Some(existing) if existing == class_id => {}
                            Some(_) => {
                                // BFS components cannot overlap: the first
                                // visit claims the whole component
                                unreachable!("conjugation classes overlapped");
                            }
                        }
                    }
                    queue.push_back(h);
                }
            }
        }
    }
    Some(classes)
}

fn oracle_once(t: i64, m: u64, det: i64, bound: u64, set: ConjugatorSet) -> Option<u64> {
    let matrices = enumerate_level_matrices(t, m, det, bound as i64);
    if matrices.is_empty() {
        return Some(0);
    }
    merge_classes(&matrices, m, set, 8 * bound as i64, 2_000_000)
}

/// Conjugacy-class count of trace-`t`, determinant-1 elements of M(m),
/// merged by BFS over a conjugator set, with a stability check under
/// doubling of the enumeration bound. Never returns a wrong number:
/// unstable or capped runs report `Inconclusive`.
pub fn oracle_conjugacy_count(t: i64, m: u64, bound: u64) -> Result<OracleOutcome> {
    oracle_conjugacy_count_det(t, m, 1, bound, ConjugatorSet::FullUnits)
}

/// Oracle with explicit determinant and conjugator set.
pub fn oracle_conjugacy_count_det(
    t: i64,
    m: u64,
    det: i64,
    bound: u64,
    set: ConjugatorSet,
) -> Result<OracleOutcome> {
    if bound < t.unsigned_abs() {
        return Err(Error::domain(format!(
            "entry bound {bound} below |t| = {}",
            t.abs()
        )));
    }
    let first = oracle_once(t, m, det, bound, set);
    let second = oracle_once(t, m, det, bound * 2, set);
    match (first, second) {
        (Some(x), Some(y)) if x == y => Ok(OracleOutcome::Stable(x)),
        _ => Ok(OracleOutcome::Inconclusive),
    }
}

/// Run the oracle in both conjugator conventions.
pub fn oracle_report(t: i64, m: u64, bound: u64) -> Result<OracleReport> {
    Ok(OracleReport {
        t,
        level: m,
        bound,
        full_units: oracle_conjugacy_count_det(t, m, 1, bound, ConjugatorSet::FullUnits)?,
        norm_one_only: oracle_conjugacy_count_det(t, m, 1, bound, ConjugatorSet::NormOneOnly)?,
    })
}

/// β-weighted counting identity E(B, 𝒪¹_d) = Σ_{m|d} β(d/m) E(B, Γ₀(m)),
/// evaluated on both routes; used by tests and the verification layer.
pub fn beta_weighted_order_count(
    order: &QuadOrder,
    d: u64,
    cache: &InvariantCache,
) -> Result<(u64, i64)> {
    let lhs = embedding_count_order(order, &GroupDescriptor::cocompact(d)?, cache)?;
    let mut rhs = 0i64;
    for m in divisors(d)? {
        let b = arith::beta(d / m)?;
        let count = embedding_count_order(order, &GroupDescriptor::hecke(m)?, cache)?;
        rhs += b * count as i64;
    }
    Ok((lhs, rhs))
}

/// All (t, order) pairs needed by a Hecke geometric side: elliptic when
/// t² < 4p, hyperbolic when t² > 4p, skipping the exceptional t = p + 1.
pub fn hecke_trace_range(p: u64, t_max: i64) -> Vec<i64> {
    (0..=t_max)
        .filter(|&t| t != (p + 1) as i64 && t * t != 4 * p as i64)
        .collect()
}

/// Deterministic JSON-ready table of embedding counts over a trace range.
pub fn count_table(
    group: &GroupDescriptor,
    n: i64,
    t_range: std::ops::RangeInclusive<i64>,
    cache: &CountCache,
) -> Result<BTreeMap<i64, Option<u64>>> {
    let mut out = BTreeMap::new();
    for t in t_range {
        match cache.trace_count(t, n, group) {
            Ok(v) => {
                out.insert(t, Some(v));
            }
            Err(Error::ExceptionalTrace { .. }) => {
                out.insert(t, None);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_validation() {
        assert!(GroupDescriptor::cocompact(6).is_ok());
        assert!(GroupDescriptor::cocompact(7).is_err()); // one prime
        assert!(GroupDescriptor::cocompact(30).is_err()); // three primes
        assert!(GroupDescriptor::cocompact(12).is_err()); // not squarefree
        assert!(GroupDescriptor::cocompact(210).is_ok()); // four primes
        assert!(GroupDescriptor::hecke(1).is_ok());
        assert!(GroupDescriptor::hecke(4).is_err());
    }

    #[test]
    fn symbol_examples() {
        let disc_m4 = QuadOrder::from_disc(-4).unwrap();
        assert_eq!(symbol_bp(&disc_m4, 2), 0); // 2 ramified in Q(i)
        assert_eq!(symbol_bp(&disc_m4, 5), 1); // 5 splits
        assert_eq!(symbol_bp(&disc_m4, 3), -1); // 3 inert
        let disc_m16 = QuadOrder::from_disc(-16).unwrap();
        assert_eq!(symbol_bp(&disc_m16, 2), 1); // not maximal at 2
        assert_eq!(symbol_bp(&disc_m16, 3), -1); // still maximal at 3
    }

    #[test]
    fn embedding_count_examples() {
        let cache = InvariantCache::new();
        let disc_m4 = QuadOrder::from_disc(-4).unwrap();
        let g1 = GroupDescriptor::hecke(1).unwrap();
        let g5 = GroupDescriptor::hecke(5).unwrap();
        let o6 = GroupDescriptor::cocompact(6).unwrap();
        assert_eq!(embedding_count_order(&disc_m4, &g1, &cache).unwrap(), 1);
        assert_eq!(embedding_count_order(&disc_m4, &g5, &cache).unwrap(), 2);
        assert_eq!(embedding_count_order(&disc_m4, &o6, &cache).unwrap(), 2);
    }

    #[test]
    fn trace_count_examples() {
        let cache = InvariantCache::new();
        let g1 = GroupDescriptor::hecke(1).unwrap();
        assert_eq!(embedding_count_trace(3, 1, &g1, &cache).unwrap(), 1);
        assert_eq!(embedding_count_trace(0, 1, &g1, &cache).unwrap(), 1);
        assert_eq!(embedding_count_trace(1, 1, &g1, &cache).unwrap(), 1);
        // symmetry by construction
        for t in [-6i64, -3, 0, 3, 6] {
            if t * t != 4 {
                assert_eq!(
                    embedding_count_trace(t, 1, &g1, &cache).unwrap(),
                    embedding_count_trace(-t, 1, &g1, &cache).unwrap()
                );
            }
        }
    }

    #[test]
    fn division_algebra_excludes_exceptional_trace() {
        let cache = InvariantCache::new();
        let o6 = GroupDescriptor::cocompact(6).unwrap();
        assert!(matches!(
            embedding_count_trace(6, 5, &o6, &cache),
            Err(Error::ExceptionalTrace { .. })
        ));
    }

    #[test]
    fn primitive_count_examples() {
        let cache = CountCache::new();
        let g1 = GroupDescriptor::hecke(1).unwrap();
        let e3 = cache.trace_count(3, 1, &g1).unwrap();
        assert_eq!(cache.primitive_count(3, &g1).unwrap(), e3);
        // 3² − 2 = 7, so trace-7 classes include squares of trace-3 ones
        let e7 = cache.trace_count(7, 1, &g1).unwrap();
        assert_eq!(cache.primitive_count(7, &g1).unwrap(), e7 - e3);
        // no power-trace hits 4
        let e4 = cache.trace_count(4, 1, &g1).unwrap();
        assert_eq!(cache.primitive_count(4, &g1).unwrap(), e4);
        // 3³ − 3·3 = 18: cubes of trace-3 elements have trace 18
        let e18 = cache.trace_count(18, 1, &g1).unwrap();
        let ep3 = cache.primitive_count(3, &g1).unwrap();
        assert_eq!(cache.primitive_count(18, &g1).unwrap(), e18 - ep3);
        assert!(cache.primitive_count(2, &g1).is_err());
    }

    #[test]
    fn exceptional_counts_and_reps() {
        assert_eq!(exceptional_class_count(5, 1).unwrap(), 4);
        assert_eq!(exceptional_class_count(3, 2).unwrap(), 4);
        assert_eq!(exceptional_class_count(7, 6).unwrap(), 24);
        assert!(exceptional_class_count(3, 3).is_err());

        let reps = exceptional_representatives(3, 2).unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.contains(&IntegerMatrix2x2::new(3, 0, 2, 1)));
        assert!(reps.contains(&IntegerMatrix2x2::new(3, 0, 4, 1)));
        for g in &reps {
            assert_eq!(g.trace(), 4);
            assert_eq!(g.det(), 3);
            assert!(g.in_level(2));
        }

        let reps = exceptional_representatives(2, 1).unwrap();
        assert_eq!(reps, vec![IntegerMatrix2x2::new(2, 0, 1, 1)]);
    }

    #[test]
    fn cusp_representatives_examples() {
        let f1 = cusp_representatives(1).unwrap();
        assert_eq!(f1, vec![Ratio::new(1, 1)]);
        let f6 = cusp_representatives(6).unwrap();
        assert_eq!(
            f6,
            vec![
                Ratio::new(1, 1),
                Ratio::new(1, 2),
                Ratio::new(1, 3),
                Ratio::new(1, 6)
            ]
        );
        assert_eq!(cusp_representatives(10).unwrap().len(), 4);
    }

    #[test]
    fn cusp_inequivalence_holds() {
        assert!(verify_cusp_inequivalence(6, 5).unwrap());
        assert!(verify_cusp_inequivalence(1, 2).unwrap());
        assert!(verify_cusp_inequivalence(15, 2).unwrap());
        assert!(verify_cusp_inequivalence(30, 7).unwrap());
        assert!(verify_cusp_inequivalence(2, 3).is_ok());
        assert!(verify_cusp_inequivalence(6, 3).is_err());
    }

    #[test]
    fn oracle_small_traces_level_one() {
        // elliptic traces: one class each under full-unit conjugation
        for t in [0i64, 1] {
            let out = oracle_conjugacy_count(t, 1, 40).unwrap();
            assert_eq!(out, OracleOutcome::Stable(1), "t = {t}");
        }
        // hyperbolic trace 3: the golden-ratio class
        let out = oracle_conjugacy_count(3, 1, 40).unwrap();
        assert_eq!(out, OracleOutcome::Stable(1));
    }

    #[test]
    fn beta_weighted_count_identity_spot() {
        let cache = InvariantCache::new();
        for disc in [-3i64, -4, -8, -20, 5, 12, 21, 40] {
            let order = QuadOrder::from_disc(disc).unwrap();
            for d in [6u64, 10, 15] {
                let (lhs, rhs) = beta_weighted_order_count(&order, d, &cache).unwrap();
                assert_eq!(lhs as i64, rhs, "disc {disc}, d {d}");
            }
        }
    }
}
