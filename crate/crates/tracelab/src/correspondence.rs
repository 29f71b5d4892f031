//! β-weighted identity verdicts: the geometric side of the cocompact group
//! against the β(d/m)-weighted combination of the Γ₀(m) geometric sides
//! over m | d, for the Laplace and the Hecke trace formulae, plus the
//! exact area and counting identities and the newform dimension
//! combinator δ′(d,λ) = Σ_{m|d} β(d/m) δ(m,λ).

use std::collections::BTreeMap;

use num::rational::Ratio;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{beta, divisor_stats, divisors, omega};
use crate::embeddings::{CountCache, GroupDescriptor};
use crate::selberg_transform::TestFunction;
use crate::trace_geometry::{self, area, GeometricSideReport, GeometryConfig, TruncationBudget};
use crate::{Error, Result};

/// Result of one β-weighted identity check between two numerically
/// evaluated geometric sides.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityVerdict {
    pub lhs: f64,
    pub rhs: f64,
    pub abs_diff: f64,
    /// Sum of all tail estimates and quadrature errors on both sides.
    pub error_budget: f64,
    pub tolerance: f64,
    /// abs_diff ≤ max(tolerance, error_budget)
    pub pass: bool,
    pub sub_checks: Vec<SubCheck>,
    /// Per-group reports: the cocompact side first, then one per m | d.
    pub breakdown: Vec<GeometricSideReport>,
}

/// A named auxiliary cancellation check inside a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

fn assemble_verdict(
    lhs_report: GeometricSideReport,
    rhs_reports: Vec<(i64, GeometricSideReport)>,
    tolerance: f64,
    sub_checks: Vec<SubCheck>,
) -> IdentityVerdict {
    let lhs = lhs_report.grand_total;
    let mut rhs = 0.0;
    let mut error_budget = lhs_report.tail_estimate + lhs_report.quadrature_error;
    for (b, report) in &rhs_reports {
        rhs += *b as f64 * report.grand_total;
        error_budget +=
            (b.unsigned_abs() as f64) * (report.tail_estimate + report.quadrature_error);
    }
    let abs_diff = (lhs - rhs).abs();
    let pass = abs_diff <= tolerance.max(error_budget) && sub_checks.iter().all(|c| c.pass);
    let mut breakdown = vec![lhs_report];
    breakdown.extend(rhs_reports.into_iter().map(|(_, r)| r));
    IdentityVerdict {
        lhs,
        rhs,
        abs_diff,
        error_budget,
        tolerance,
        pass,
        sub_checks,
        breakdown,
    }
}

/// Exact rational verdict for the area identity A_𝒪 = Σ_{m|d} β(d/m) A_m.
#[derive(Debug, Clone, Serialize)]
pub struct AreaVerdict {
    pub d: u64,
    /// π-coefficients of both sides.
    pub lhs_coeff: Ratio<i64>,
    pub rhs_coeff: Ratio<i64>,
    pub pass: bool,
}

/// Area identity, checked in exact rational arithmetic (difference must be
/// exactly zero).
pub fn verify_area_identity(d: u64) -> Result<AreaVerdict> {
    let lhs = area(&GroupDescriptor::cocompact(d)?)?.coeff;
    let mut rhs = Ratio::new(0, 1);
    for m in divisors(d)? {
        let b = beta(d / m)?;
        rhs += Ratio::from_integer(b) * area(&GroupDescriptor::hecke(m)?)?.coeff;
    }
    Ok(AreaVerdict {
        d,
        lhs_coeff: lhs,
        rhs_coeff: rhs,
        pass: lhs == rhs,
    })
}

/// Exact integer verdict for one trace of the counting identity.
#[derive(Debug, Clone, Serialize)]
pub struct CountVerdict {
    pub t: i64,
    /// E for t ∈ {0, 1}, E′ for t ≥ 3.
    pub lhs: u64,
    pub rhs: i64,
    pub pass: bool,
}

/// Counting identities E′(t,1,𝒪¹_d) = Σ_{m|d} β(d/m) E′(t,1,Γ₀(m)) for
/// t ∈ {0, 1} (with E′ = E) and 3 ≤ t ≤ t_max, all exact.
pub fn verify_counting_identities(
    d: u64,
    t_max: i64,
    counts: &CountCache,
) -> Result<Vec<CountVerdict>> {
    let cod = GroupDescriptor::cocompact(d)?;
    let levels: Vec<(u64, i64, GroupDescriptor)> = divisors(d)?
        .into_iter()
        .map(|m| Ok((m, beta(d / m)?, GroupDescriptor::hecke(m)?)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for t in [0i64, 1].into_iter().chain(3..=t_max) {
        let (lhs, rhs) = if t < 3 {
            let lhs = counts.trace_count(t, 1, &cod)?;
            let mut rhs = 0i64;
            for (_, b, g) in &levels {
                rhs += b * counts.trace_count(t, 1, g)? as i64;
            }
            (lhs, rhs)
        } else {
            let lhs = counts.primitive_count(t, &cod)?;
            let mut rhs = 0i64;
            for (_, b, g) in &levels {
                rhs += b * counts.primitive_count(t, g)? as i64;
            }
            (lhs, rhs)
        };
        out.push(CountVerdict {
            t,
            lhs,
            rhs,
            pass: lhs as i64 == rhs,
        });
    }
    Ok(out)
}

/// Warm the order-invariant cache in parallel for all traces a Laplace or
/// Hecke side will touch; keeps the subsequent assembly deterministic.
fn prefill_orders(counts: &CountCache, n: i64, t_max: i64) -> Result<()> {
    let traces: Vec<i64> = (0..=t_max).collect();
    traces
        .par_iter()
        .try_for_each(|&t| match crate::quadforms::superorders_of_element(t, n) {
            Ok(orders) => {
                for o in &orders {
                    counts.orders.get(o)?;
                }
                Ok(())
            }
            Err(Error::ExceptionalTrace { .. }) => Ok(()),
            Err(e) => Err(e),
        })
}

/// Verdict for the Laplace-spectrum correspondence at the geometric-side
/// level: geometric side of the cocompact group of discriminant d versus
/// Σ_{m|d} β(d/m) × (geometric side of Γ₀(m)), including the sub-check
/// that the β-weighted parabolic blocks alone cancel.
pub fn verify_theorem1(
    d: u64,
    f: &TestFunction,
    budget: &TruncationBudget,
    tolerance: f64,
    config: &GeometryConfig,
    counts: &CountCache,
) -> Result<IdentityVerdict> {
    let group = GroupDescriptor::cocompact(d)?;
    prefill_orders(counts, 1, budget.t_max)?;
    let lhs_report = trace_geometry::geometric_side_laplace(&group, f, budget, config, counts)?;

    let ms = divisors(d)?;
    let rhs_reports: Vec<(i64, GeometricSideReport)> = ms
        .par_iter()
        .map(|&m| {
            let b = beta(d / m)?;
            let g = GroupDescriptor::hecke(m)?;
            let report = trace_geometry::geometric_side_laplace(&g, f, budget, config, counts)?;
            Ok((b, report))
        })
        .collect::<Result<_>>()?;

    // the parabolic blocks alone must cancel under the β-weights
    let mut parabolic_sum = 0.0;
    let mut parabolic_bound = 0.0;
    for (b, report) in &rhs_reports {
        parabolic_sum += *b as f64 * report.parabolic_or_exceptional_total;
        parabolic_bound +=
            (b.unsigned_abs() as f64) * (report.tail_estimate + report.quadrature_error);
    }
    let bound = tolerance.max(parabolic_bound);
    let sub = SubCheck {
        name: "parabolic-beta-sum".into(),
        value: parabolic_sum,
        bound,
        pass: parabolic_sum.abs() <= bound,
    };

    Ok(assemble_verdict(
        lhs_report,
        rhs_reports,
        tolerance,
        vec![sub],
    ))
}

/// Verdict for the Hecke-trace correspondence at the geometric-side level
/// for a prime p ∤ d, including the sub-check that the β-weighted
/// exceptional blocks alone cancel.
pub fn verify_theorem2(
    d: u64,
    p: u64,
    f: &TestFunction,
    budget: &TruncationBudget,
    tolerance: f64,
    config: &GeometryConfig,
    counts: &CountCache,
) -> Result<IdentityVerdict> {
    if d % p == 0 {
        return Err(Error::domain(format!("p = {p} must not divide d = {d}")));
    }
    prefill_orders(counts, p as i64, budget.t_max)?;
    let lhs_report =
        trace_geometry::geometric_side_hecke_cocompact(d, p, f, budget, config, counts)?;

    let ms = divisors(d)?;
    let rhs_reports: Vec<(i64, GeometricSideReport)> = ms
        .par_iter()
        .map(|&m| {
            let b = beta(d / m)?;
            let report =
                trace_geometry::geometric_side_hecke_gamma0(m, p, f, budget, config, counts)?;
            Ok((b, report))
        })
        .collect::<Result<_>>()?;

    let mut exceptional_sum = 0.0;
    let mut exceptional_bound = 0.0;
    for (b, report) in &rhs_reports {
        exceptional_sum += *b as f64 * report.parabolic_or_exceptional_total;
        exceptional_bound +=
            (b.unsigned_abs() as f64) * (report.tail_estimate + report.quadrature_error);
    }
    let bound = tolerance.max(exceptional_bound);
    let sub = SubCheck {
        name: "exceptional-beta-sum".into(),
        value: exceptional_sum,
        bound,
        pass: exceptional_sum.abs() <= bound,
    };

    Ok(assemble_verdict(
        lhs_report,
        rhs_reports,
        tolerance,
        vec![sub],
    ))
}

// ---------------------------------------------------------------------------
// newform dimension combinator
// ---------------------------------------------------------------------------

/// Eigenvalue-multiplicity table: (level m, eigenvalue label) → δ(m, λ).
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MultiplicityTable {
    pub entries: BTreeMap<(u64, String), u64>,
}

impl MultiplicityTable {
    pub fn insert(&mut self, level: u64, label: impl Into<String>, dim: u64) {
        self.entries.insert((level, label.into()), dim);
    }

    pub fn get(&self, level: u64, label: &str) -> u64 {
        *self.entries.get(&(level, label.to_string())).unwrap_or(&0)
    }

    fn labels(&self) -> Vec<String> {
        let mut labels: Vec<String> = self.entries.keys().map(|(_, l)| l.clone()).collect();
        labels.sort();
        labels.dedup();
        labels
    }
}

/// Newform dimensions δ′(d, λ) = Σ_{m|d} β(d/m) δ(m, λ). A negative output
/// means the table cannot come from a genuine spectrum and is an error.
pub fn newform_dimensions(table: &MultiplicityTable, d: u64) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for label in table.labels() {
        let mut sum = 0i64;
        for m in divisors(d)? {
            sum += beta(d / m)? * table.get(m, &label) as i64;
        }
        if sum < 0 {
            return Err(Error::Inconsistent(format!(
                "negative newform dimension {sum} at level {d} for eigenvalue {label}"
            )));
        }
        out.insert(label, sum as u64);
    }
    Ok(out)
}

/// Forward check δ(d, λ) = Σ_{m|d} τ(d/m) δ′(m, λ) from a table of newform
/// dimensions δ′.
pub fn old_new_dimensions(new_table: &MultiplicityTable, d: u64) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for label in new_table.labels() {
        let mut sum = 0u64;
        for m in divisors(d)? {
            sum += divisor_stats(d / m)?.tau * new_table.get(m, &label);
        }
        out.insert(label, sum);
    }
    Ok(out)
}

/// ω(d) of the largest divisor, the knob the default budgets need.
pub fn omega_max_of(d: u64) -> Result<u32> {
    omega(d)
}
