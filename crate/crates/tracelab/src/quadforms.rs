//! Quadratic orders through binary quadratic forms.
//!
//! A quadratic order is identified by its discriminant `D ≡ 0, 1 (mod 4)`,
//! `D` not a perfect square. For `D < 0` the class number is the count of
//! reduced primitive positive-definite forms; for `D > 0` the narrow class
//! number is the number of ρ-cycles of reduced primitive indefinite forms,
//! and the wide class number divides it by two exactly when the order has
//! no unit of norm −1. Fundamental norm-one units are extracted from one
//! traversal of the principal cycle (the accumulated `SL₂(ℤ)` automorph),
//! which stays exact via big integers even when the regulator is large.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use num::bigint::BigInt;
use num::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{factorize, is_perfect_square, isqrt};
use crate::{Error, Result};

/// A quadratic order, identified by discriminant = fund_disc · conductor².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct QuadOrder {
    disc: i64,
    fund_disc: i64,
    conductor: u64,
}

impl QuadOrder {
    /// Build the order of discriminant `disc`; rejects perfect squares and
    /// values not congruent to 0 or 1 mod 4.
    pub fn from_disc(disc: i64) -> Result<Self> {
        if disc == 0 || is_perfect_square(disc) {
            return Err(Error::InvalidOrder(disc));
        }
        let r = disc.rem_euclid(4);
        if r != 0 && r != 1 {
            return Err(Error::InvalidOrder(disc));
        }
        let (fund_disc, conductor) = fundamental_decomposition(disc)?;
        Ok(QuadOrder {
            disc,
            fund_disc,
            conductor,
        })
    }

    pub fn disc(&self) -> i64 {
        self.disc
    }

    pub fn fund_disc(&self) -> i64 {
        self.fund_disc
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_imaginary(&self) -> bool {
        self.disc < 0
    }
}

/// Split disc = fund_disc · f² with fund_disc a fundamental discriminant.
fn fundamental_decomposition(disc: i64) -> Result<(i64, u64)> {
    let mut f: u64 = 1;
    for (p, e) in factorize(disc.unsigned_abs())? {
        for _ in 0..e / 2 {
            f = f
                .checked_mul(p)
                .ok_or(Error::Overflow("fundamental_decomposition"))?;
        }
    }
    let mut core = disc / (f * f) as i64;
    if core.rem_euclid(4) != 1 {
        // core ≡ 2, 3 (mod 4): the fundamental discriminant is 4·core
        debug_assert_eq!(f % 2, 0);
        f /= 2;
        core *= 4;
    }
    Ok((core, f))
}

/// Norm-one unit data of a quadratic order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum UnitData {
    /// Imaginary order: the norm-one unit group is cyclic of this order
    /// (6 for disc −3, 4 for disc −4, 2 otherwise).
    Imaginary { torsion_order: u32 },
    /// Real order: (x + y√disc)/2 with x² − disc·y² = 4 is the smallest
    /// norm-one unit > 1; `log_eps` is its logarithm.
    Real {
        log_eps: f64,
        #[serde(serialize_with = "bigint_decimal")]
        norm_one_x: BigInt,
        #[serde(serialize_with = "bigint_decimal")]
        norm_one_y: BigInt,
        has_norm_minus_one: bool,
    },
}

fn bigint_decimal<S: serde::Serializer>(n: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_string())
}

impl UnitData {
    /// Torsion order m for imaginary orders; error for real ones.
    pub fn torsion_order(&self) -> Result<u32> {
        match self {
            UnitData::Imaginary { torsion_order } => Ok(*torsion_order),
            UnitData::Real { .. } => Err(Error::domain("torsion order of a real order")),
        }
    }

    pub fn log_eps(&self) -> Result<f64> {
        match self {
            UnitData::Real { log_eps, .. } => Ok(*log_eps),
            UnitData::Imaginary { .. } => Err(Error::domain("log ε of an imaginary order")),
        }
    }
}

/// Bundle of everything the trace formulae need about one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderInvariants {
    pub disc: i64,
    pub h_wide: u64,
    pub h_narrow: u64,
    pub unit: UnitData,
}

// ---------------------------------------------------------------------------
// imaginary discriminants
// ---------------------------------------------------------------------------

fn class_number_imaginary(disc: i64) -> Result<u64> {
    debug_assert!(disc < 0);
    let abs = disc.unsigned_abs();
    let mut count: u64 = 0;
    let b_max = isqrt(abs / 3);
    let mut b = (disc.rem_euclid(2)) as u64;
    while b <= b_max {
        // 4ac = b² − disc
        let n = (b * b + abs) / 4;
        let mut a = std::cmp::max(b, 1);
        while a * a <= n {
            if n % a == 0 {
                let c = n / a;
                let g = crate::arith::gcd(crate::arith::gcd(a, b), c);
                if g == 1 {
                    // |b| ≤ a ≤ c with b ≥ 0: forms with 0 < b < a < c count
                    // twice (±b), boundary forms once
                    count += if b == 0 || b == a || a == c { 1 } else { 2 };
                }
            }
            a += 1;
        }
        b += 2;
    }
    Ok(count)
}

// ---------------------------------------------------------------------------
// real discriminants: reduced indefinite forms and ρ-cycles
// ---------------------------------------------------------------------------

/// A binary quadratic form a·x² + b·xy + c·y².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Form {
    a: i64,
    b: i64,
    c: i64,
}

impl Form {
    fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    /// Reduced indefinite form: 0 < b < √D and |√D − 2|a|| < b.
    fn is_reduced(&self, disc: i64) -> bool {
        if self.b <= 0 || self.b * self.b >= disc {
            return false;
        }
        let two_a = 2 * self.a.abs();
        // √D < b + 2|a|
        if (self.b + two_a) * (self.b + two_a) <= disc {
            return false;
        }
        // 2|a| < √D + b
        if two_a > self.b && (two_a - self.b) * (two_a - self.b) >= disc {
            return false;
        }
        true
    }
}

/// One ρ-step: (a, b, c) → (c, b', c') with b' ≡ −b (mod 2c), b' in the
/// reduced window when |c| < √D, else in (−|c|, |c|]. Returns the new form
/// and the step parameter s = (b + b')/(2c).
fn rho_step(form: Form, disc: i64) -> (Form, i64) {
    debug_assert!(form.c != 0);
    let two_c = 2 * form.c.abs();
    let s_floor = isqrt(disc as u64) as i64;
    let b_new = if form.c.abs() * form.c.abs() > disc {
        // b' in (−|c|, |c|]
        let mut r = (-form.b).rem_euclid(two_c);
        if r > form.c.abs() {
            r -= two_c;
        }
        r
    } else {
        // b' the unique value ≡ −b (mod 2|c|) in [⌊√D⌋ − 2|c| + 1, ⌊√D⌋]
        s_floor - (s_floor + form.b).rem_euclid(two_c)
    };
    let c_new = (b_new * b_new - disc) / (4 * form.c);
    let s = (form.b + b_new) / (2 * form.c);
    let next = Form {
        a: form.c,
        b: b_new,
        c: c_new,
    };
    debug_assert_eq!(next.disc(), disc);
    (next, s)
}

/// Apply ρ until the form is reduced.
fn reduce_form(mut form: Form, disc: i64) -> Result<Form> {
    for _ in 0..10_000 {
        if form.is_reduced(disc) {
            return Ok(form);
        }
        form = rho_step(form, disc).0;
    }
    Err(Error::Resource {
        what: "indefinite form reduction",
        bound: 10_000,
    })
}

/// The full ρ-cycle through a reduced form.
fn cycle_of(start: Form, disc: i64) -> Result<Vec<Form>> {
    let mut cycle = vec![start];
    let mut current = rho_step(start, disc).0;
    while current != start {
        if cycle.len() > 2_000_000 {
            return Err(Error::Resource {
                what: "form cycle traversal",
                bound: 2_000_000,
            });
        }
        cycle.push(current);
        current = rho_step(current, disc).0;
    }
    Ok(cycle)
}

/// All reduced primitive indefinite forms of discriminant `disc`.
fn reduced_forms(disc: i64) -> Result<BTreeSet<Form>> {
    debug_assert!(disc > 0);
    let mut forms = BTreeSet::new();
    let s = isqrt(disc as u64) as i64;
    let mut b = if disc % 2 == 0 { 2 } else { 1 };
    while b <= s {
        let n = (disc - b * b) / 4; // = −ac > 0
        let mut g = 1i64;
        while g * g <= n {
            if n % g == 0 {
                for (a, c) in [(g, -(n / g)), (-g, n / g), (n / g, -g), (-(n / g), g)] {
                    let form = Form { a, b, c };
                    if form.is_reduced(disc)
                        && crate::arith::gcd_i64(crate::arith::gcd_i64(a, b), c) == 1
                    {
                        forms.insert(form);
                    }
                }
            }
            g += 1;
        }
        b += 2;
    }
    Ok(forms)
}

/// Narrow class number: number of ρ-cycles of reduced primitive forms.
fn class_number_narrow_real(disc: i64) -> Result<u64> {
    let forms = reduced_forms(disc)?;
    let mut seen: BTreeSet<Form> = BTreeSet::new();
    let mut cycles = 0u64;
    for &form in &forms {
        if seen.contains(&form) {
            continue;
        }
        cycles += 1;
        for member in cycle_of(form, disc)? {
            seen.insert(member);
        }
    }
    if seen.len() != forms.len() {
        return Err(Error::Inconsistent(format!(
            "cycle partition missed {} reduced forms for disc {}",
            forms.len() - seen.len(),
            disc
        )));
    }
    Ok(cycles)
}

/// Principal reduced form (1, b₀, (b₀² − D)/4) with b₀ ≤ ⌊√D⌋ maximal of
/// the right parity.
fn principal_form(disc: i64) -> Form {
    let s = isqrt(disc as u64) as i64;
    let b = if (s - disc).rem_euclid(2) == 0 {
        s
    } else {
        s - 1
    };
    Form {
        a: 1,
        b,
        c: (b * b - disc) / 4,
    }
}

struct BigMatrix {
    m: [[BigInt; 2]; 2],
}

impl BigMatrix {
    fn identity() -> Self {
        BigMatrix {
            m: [
                [BigInt::one(), BigInt::zero()],
                [BigInt::zero(), BigInt::one()],
            ],
        }
    }

    /// Right-multiply by the ρ-step matrix [[0, −1], [1, s]].
    fn apply_step(&mut self, s: i64) {
        let s = BigInt::from(s);
        for row in &mut self.m {
            let new0 = row[1].clone();
            let new1 = &row[1] * &s - &row[0];
            row[0] = new0;
            row[1] = new1;
        }
    }
}

/// Natural log of a positive big integer, accurate to ~1e−14 relative.
fn big_ln(n: &BigInt) -> f64 {
    debug_assert!(n.is_positive());
    let bits = n.bits();
    if bits <= 53 {
        return n.to_string().parse::<f64>().unwrap().ln();
    }
    let shift = bits - 53;
    let top: BigInt = n >> shift;
    let mantissa = top.to_string().parse::<f64>().unwrap();
    mantissa.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Fundamental norm-one unit of the real order of discriminant `disc`,
/// together with the norm-(−1) existence flag.
fn real_unit_data(disc: i64) -> Result<UnitData> {
    let p0 = principal_form(disc);
    let cycle = cycle_of(p0, disc)?;

    // accumulate the automorph over one full cycle
    let mut m = BigMatrix::identity();
    let mut current = p0;
    for _ in 0..cycle.len() {
        let (next, s) = rho_step(current, disc);
        m.apply_step(s);
        current = next;
    }
    debug_assert_eq!(current, p0);

    let x = (&m.m[0][0] + &m.m[1][1]).abs();
    let y = m.m[1][0].abs();
    // exact check x² − D y² = 4
    let lhs = &x * &x - BigInt::from(disc) * &y * &y;
    if lhs != BigInt::from(4) {
        return Err(Error::Inconsistent(format!(
            "principal cycle automorph of disc {disc} is not a norm-one unit"
        )));
    }
    if x.is_zero() || y.is_zero() {
        return Err(Error::Inconsistent(format!(
            "degenerate automorph for disc {disc}"
        )));
    }

    // log ε = log(x + y√D) − log 2, via log x + log(1 + y√D/x)
    let y2d = &y * &y * BigInt::from(disc);
    let x2 = &x * &x;
    let t = (big_ln(&y2d) - big_ln(&x2)).exp();
    let log_eps = big_ln(&x) + (1.0 + t.sqrt()).ln() - std::f64::consts::LN_2;

    // norm −1 unit exists iff the negated principal form lies in the
    // principal cycle
    let neg = Form {
        a: -p0.a,
        b: -p0.b,
        c: -p0.c,
    };
    let neg_reduced = reduce_form(neg, disc)?;
    let has_norm_minus_one = cycle.contains(&neg_reduced);

    Ok(UnitData::Real {
        log_eps,
        norm_one_x: x,
        norm_one_y: y,
        has_norm_minus_one,
    })
}

// ---------------------------------------------------------------------------
// public operations
// ---------------------------------------------------------------------------

/// Compute all invariants of one order.
pub fn order_invariants(order: &QuadOrder) -> Result<OrderInvariants> {
    let disc = order.disc();
    if disc < 0 {
        let h = class_number_imaginary(disc)?;
        let torsion_order = match disc {
            -3 => 6,
            -4 => 4,
            _ => 2,
        };
        Ok(OrderInvariants {
            disc,
            h_wide: h,
            h_narrow: h,
            unit: UnitData::Imaginary { torsion_order },
        })
    } else {
        let h_narrow = class_number_narrow_real(disc)?;
        let unit = real_unit_data(disc)?;
        let has_minus = matches!(
            unit,
            UnitData::Real {
                has_norm_minus_one: true,
                ..
            }
        );
        let h_wide = if has_minus {
            h_narrow
        } else {
            if h_narrow % 2 != 0 {
                return Err(Error::Inconsistent(format!(
                    "narrow class number {h_narrow} odd without a norm −1 unit, disc {disc}"
                )));
            }
            h_narrow / 2
        };
        Ok(OrderInvariants {
            disc,
            h_wide,
            h_narrow,
            unit,
        })
    }
}

/// Ideal class number of the order in the wide sense.
pub fn class_number(order: &QuadOrder) -> Result<u64> {
    Ok(order_invariants(order)?.h_wide)
}

/// Narrow class number (equal to the wide one for imaginary orders).
pub fn class_number_narrow(order: &QuadOrder) -> Result<u64> {
    Ok(order_invariants(order)?.h_narrow)
}

/// Norm-one unit data (torsion order, or fundamental Pell solution).
pub fn unit_data(order: &QuadOrder) -> Result<UnitData> {
    Ok(order_invariants(order)?.unit)
}

/// Whether x² − disc·y² = −4 has an integer solution.
pub fn has_norm_minus_one_unit(order: &QuadOrder) -> Result<bool> {
    if order.disc() < 0 {
        return Err(Error::domain("norm −1 test requires a real order"));
    }
    match order_invariants(order)?.unit {
        UnitData::Real {
            has_norm_minus_one, ..
        } => Ok(has_norm_minus_one),
        UnitData::Imaginary { .. } => unreachable!(),
    }
}

/// The orders B ⊇ ℤ\[γ\] for γ of trace t and norm n: t² − 4n = f₀²·D₀ and
/// the result is one order of discriminant f²·D₀ per positive f | f₀,
/// conductor descending (ℤ\[γ\] itself first).
pub fn superorders_of_element(t: i64, n: i64) -> Result<Vec<QuadOrder>> {
    let disc = t
        .checked_mul(t)
        .and_then(|t2| t2.checked_sub(4 * n))
        .ok_or(Error::Overflow("superorders_of_element"))?;
    if is_perfect_square(disc) {
        return Err(Error::ExceptionalTrace { t, n, disc });
    }
    let order = QuadOrder::from_disc(disc)?;
    let f0 = order.conductor();
    let mut result = Vec::new();
    let mut divs = crate::arith::divisors(f0)?;
    divs.reverse();
    for f in divs {
        result.push(QuadOrder::from_disc(order.fund_disc() * (f * f) as i64)?);
    }
    Ok(result)
}

/// Insert-once memo table for order invariants, safe for concurrent use.
#[derive(Default)]
pub struct InvariantCache {
    map: Mutex<HashMap<i64, Arc<OrderInvariants>>>,
}

impl InvariantCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, order: &QuadOrder) -> Result<Arc<OrderInvariants>> {
        if let Some(hit) = self.map.lock().unwrap().get(&order.disc()) {
            return Ok(hit.clone());
        }
        let computed = Arc::new(order_invariants(order)?);
        let mut map = self.map.lock().unwrap();
        Ok(map.entry(order.disc()).or_insert(computed).clone())
    }
}
