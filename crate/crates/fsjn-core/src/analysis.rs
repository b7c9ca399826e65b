//! Diagnostics over measure sequences: limit-set classification, positive/
//! negative balance audits, limit-set mass sums, pointwise decay tables, and
//! exact binomial deviation tails with certified square-root comparisons.
//!
//! Everything here is exact rational arithmetic. Where a comparison against an
//! irrational bound is needed (`√2/(ε√n)`), the bound is replaced by a
//! certified rational *lower* approximation, so a passing check implies the
//! true inequality. Sampled (non-oracle) statistics describe the inspected
//! window only and are never promoted to exact limit statements.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::functional::{evaluate, index_count, IndexSet, NamedFunctional, SignSet};
use crate::generators;
use crate::point::{Point, SignVector};
use crate::rational::{nat, pow2, rat, sqrt_enclosure, Rational};
use crate::seq::{HandleSource, OracleValue, SeqError, SequenceHandle};

/// Errors surfaced by the diagnostic operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    /// Sequence access failed.
    Seq(SeqError),
    /// A functional could not be evaluated at a support point.
    Eval(String),
    /// The operation needs an exact pointwise-limit oracle.
    OracleRequired,
    /// A parameter is outside its documented range.
    InvalidParameter(String),
    /// The request exceeds the exact-computation range.
    CapExceeded(String),
    /// A certified inequality failed at a specific index.
    BoundFailed {
        /// The index at which the inequality failed.
        n: u64,
        /// The exact left-hand side.
        lhs: Rational,
        /// The certified rational bound it was compared against.
        bound: Rational,
    },
}

impl From<SeqError> for AnalysisError {
    fn from(e: SeqError) -> Self {
        AnalysisError::Seq(e)
    }
}

impl fmt::Display for AnalysisError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use crate::rational::format_rational as fr;
        match self {
            AnalysisError::Seq(e) => write!(f, "{e}"),
            AnalysisError::Eval(msg) => write!(f, "evaluation failed: {msg}"),
            AnalysisError::OracleRequired => {
                write!(f, "limit oracle required for this operation")
            }
            AnalysisError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            AnalysisError::CapExceeded(msg) => write!(f, "beyond exact range: {msg}"),
            AnalysisError::BoundFailed { n, lhs, bound } => write!(
                f,
                "certified bound failed at n = {n}: {} > {}",
                fr(lhs),
                fr(bound)
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Limit-set classification
// ---------------------------------------------------------------------------

/// Where a support point sits in the chain `L ⊆ LI ⊆ LS ⊆ S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Classification {
    /// `lim μ_n({x})` exists and is nonzero: the point belongs to `L`.
    Limit(Rational),
    /// No exact limit claimed, but `|μ_n({x})|` stays bounded away from zero:
    /// the point belongs to `LI ∖ L` (oracle basis) or is certified into `LI`
    /// on the window only (sampled basis).
    LimInfPositive,
    /// `|μ_n({x})|` is large infinitely often but not eventually: `LS ∖ LI`.
    LimSupPositive,
    /// Transient support point; coefficients vanish along the sequence.
    Transient,
}

/// Evidence grade for one classification row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    /// Closed-form limit data from the sequence's oracle.
    OracleExact,
    /// Min/max of `|μ_n({x})|` over the sampled window only. These witness
    /// lower bounds for the limsup (and candidate values for the liminf) but
    /// are never upgraded to exact limit statements.
    WindowEstimate {
        /// Least sampled magnitude (zero when the point is absent somewhere).
        inf: Rational,
        /// Greatest sampled magnitude.
        sup: Rational,
    },
}

/// One classified support point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitPointRow {
    /// The support point.
    pub point: Point,
    /// Its position in the limit-set chain.
    pub classification: Classification,
    /// Whether the classification is oracle-exact or window-sampled.
    pub basis: Basis,
}

/// Cumulative sizes of the nested sets `L ⊆ LI ⊆ LS ⊆ S` over the window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainCounts {
    /// Points with a nonzero exact limit.
    pub limit: usize,
    /// `limit` plus points with positive liminf.
    pub liminf: usize,
    /// `liminf` plus points with positive limsup only.
    pub limsup: usize,
    /// Every enumerated support point.
    pub support: usize,
}

impl ChainCounts {
    /// The chain inclusions, which hold by construction.
    pub fn nested(&self) -> bool {
        self.limit <= self.liminf && self.liminf <= self.limsup && self.limsup <= self.support
    }
}

/// Classification of every support point seen in the sampled window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitSetReport {
    /// Rows in first-appearance order.
    pub rows: Vec<LimitPointRow>,
    /// The sampling horizon that was requested.
    pub horizon: u64,
    /// Indices actually inspected (origin-relative window).
    pub sampled: Vec<u64>,
    /// Sizes of the nested chain.
    pub counts: ChainCounts,
    /// Whether an oracle supplied exact limit data.
    pub oracle_backed: bool,
    /// True when no new support point appeared in the second half of the
    /// window, i.e. the union of supports looks finite at this horizon.
    pub appears_finite: bool,
}

impl LimitSetReport {
    /// Rows classified into `L` (nonzero exact limits).
    pub fn limit_points(&self) -> Vec<&Point> {
        self.rows
            .iter()
            .filter(|r| matches!(r.classification, Classification::Limit(_)))
            .map(|r| &r.point)
            .collect()
    }

    /// Rows classified with positive liminf but no exact limit.
    pub fn liminf_only_points(&self) -> Vec<&Point> {
        self.rows
            .iter()
            .filter(|r| r.classification == Classification::LimInfPositive)
            .map(|r| &r.point)
            .collect()
    }

    /// Rows classified with positive limsup but vanishing liminf.
    pub fn limsup_only_points(&self) -> Vec<&Point> {
        self.rows
            .iter()
            .filter(|r| r.classification == Classification::LimSupPositive)
            .map(|r| &r.point)
            .collect()
    }
}

/// Enumerates every support point in the window and classifies it into the
/// chain `L ⊆ LI ⊆ LS ⊆ S`.
///
/// With an oracle, each point gets its closed-form limit or oscillation data
/// (basis [`Basis::OracleExact`]). Without one, only window statistics are
/// reported and no point is ever classified into `L`.
pub fn limit_sets(h: &SequenceHandle, horizon: u64) -> Result<LimitSetReport, AnalysisError> {
    let sampled: Vec<u64> = h.indices(horizon).collect();
    if sampled.is_empty() {
        return Err(AnalysisError::InvalidParameter(String::from(
            "empty sampling window",
        )));
    }
    let mut measures = Vec::with_capacity(sampled.len());
    for &n in &sampled {
        measures.push(h.at(n)?);
    }

    // support points in first-appearance order, with the position they appear
    let mut order: Vec<(Point, usize)> = Vec::new();
    let mut seen: BTreeSet<Point> = BTreeSet::new();
    for (pos, m) in measures.iter().enumerate() {
        for (p, _) in m.atoms() {
            if seen.insert(p.clone()) {
                order.push((p.clone(), pos));
            }
        }
    }

    let mut rows = Vec::with_capacity(order.len());
    let (mut in_l, mut in_li_only, mut in_ls_only) = (0usize, 0usize, 0usize);
    let mut last_new = 0usize;
    for (p, first_pos) in order {
        last_new = last_new.max(first_pos);
        let (classification, basis) = match &h.oracle {
            Some(oracle) => {
                let c = match oracle.eval(&p) {
                    OracleValue::Limit(v) if !v.is_zero() => Classification::Limit(v),
                    OracleValue::Limit(_) => Classification::Transient,
                    OracleValue::Oscillation { liminf_abs, .. } if liminf_abs.is_positive() => {
                        Classification::LimInfPositive
                    }
                    OracleValue::Oscillation { .. } => Classification::LimSupPositive,
                };
                (c, Basis::OracleExact)
            }
            None => {
                let mut inf: Option<Rational> = None;
                let mut sup = Rational::zero();
                for m in &measures {
                    let mag = m.coefficient(&p).abs();
                    sup = sup.max(mag.clone());
                    inf = Some(match inf {
                        None => mag,
                        Some(i) => i.min(mag),
                    });
                }
                let inf = inf.unwrap_or_default();
                let c = if inf.is_positive() {
                    Classification::LimInfPositive
                } else {
                    Classification::LimSupPositive
                };
                (c, Basis::WindowEstimate { inf, sup })
            }
        };
        match &classification {
            Classification::Limit(_) => in_l += 1,
            Classification::LimInfPositive => in_li_only += 1,
            Classification::LimSupPositive => in_ls_only += 1,
            Classification::Transient => {}
        }
        rows.push(LimitPointRow { point: p, classification, basis });
    }

    let counts = ChainCounts {
        limit: in_l,
        liminf: in_l + in_li_only,
        limsup: in_l + in_li_only + in_ls_only,
        support: rows.len(),
    };
    let appears_finite = last_new < measures.len().div_ceil(2);
    Ok(LimitSetReport {
        rows,
        horizon,
        sampled,
        counts,
        oracle_backed: h.oracle.is_some(),
        appears_finite,
    })
}

// ---------------------------------------------------------------------------
// Balance audit
// ---------------------------------------------------------------------------

/// One row of a balance audit: the mass of the positive part at one index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceRow {
    /// Sequence index.
    pub index: u64,
    /// `∥μ_n⁺∥`, the total mass of the positive part.
    pub positive_mass: Rational,
}

/// Exact positive-part masses and the worst deviation from ½ on the tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    /// Per-index positive masses over the window.
    pub rows: Vec<BalanceRow>,
    /// `max |∥μ_n⁺∥ − ½|` over the second half of the window.
    pub max_tail_deviation: Rational,
    /// The deviation tolerance the verdict uses.
    pub tolerance: Rational,
    /// True when the tail deviation stays strictly below the tolerance.
    pub balanced: bool,
}

/// Computes `∥μ_n⁺∥` exactly for every sampled index and flags sequences whose
/// positive/negative split does not tend to ½/½.
pub fn balance_check(
    h: &SequenceHandle,
    horizon: u64,
    tolerance: &Rational,
) -> Result<BalanceReport, AnalysisError> {
    if !tolerance.is_positive() {
        return Err(AnalysisError::InvalidParameter(String::from(
            "tolerance must be positive",
        )));
    }
    let sampled: Vec<u64> = h.indices(horizon).collect();
    if sampled.is_empty() {
        return Err(AnalysisError::InvalidParameter(String::from(
            "empty sampling window",
        )));
    }
    let mut rows = Vec::with_capacity(sampled.len());
    for &n in &sampled {
        let (pos, _) = h.at(n)?.jordan_split();
        rows.push(BalanceRow { index: n, positive_mass: pos.norm() });
    }
    let half = rat(1, 2);
    let tail_start = rows.len() / 2;
    let max_tail_deviation = rows[tail_start..]
        .iter()
        .map(|r| (&r.positive_mass - &half).abs())
        .max()
        .expect("tail is nonempty");
    let balanced = max_tail_deviation < *tolerance;
    Ok(BalanceReport { rows, max_tail_deviation, tolerance: tolerance.clone(), balanced })
}

// ---------------------------------------------------------------------------
// Limit-set mass
// ---------------------------------------------------------------------------

/// How a limit-set mass sum was obtained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitMassMethod {
    /// A closed-form series value supplied by the generator.
    ClosedForm,
    /// Sum of `|lim μ_n({x})|` over the limit-set points that appear in the
    /// sampled window (a lower bound when the limit set is infinite).
    WindowEnumerated {
        /// How many distinct limit-set points were summed.
        points: usize,
    },
}

/// The total limit mass `Σ_{x ∈ L} |lim μ_n({x})|` with its verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitMassReport {
    /// The (possibly partial) sum.
    pub sum: Rational,
    /// Whether the sum respects the structural ceiling ½.
    pub within_half: bool,
    /// Provenance of the sum.
    pub method: LimitMassMethod,
}

/// Sums `|lim μ_n({x})|` over the limit set.
///
/// Generator-backed sequences use the exact series value; materialized
/// sequences with an oracle enumerate the limit-set points visible in the
/// window. Fails without an oracle.
pub fn l_mass_sum(h: &SequenceHandle, horizon: u64) -> Result<LimitMassReport, AnalysisError> {
    let oracle = h.oracle.as_ref().ok_or(AnalysisError::OracleRequired)?;
    if let HandleSource::Generator(spec) = &h.source {
        if let Some(sum) = generators::l_mass_closed_form(spec) {
            let within_half = sum <= rat(1, 2);
            return Ok(LimitMassReport { sum, within_half, method: LimitMassMethod::ClosedForm });
        }
    }
    let mut seen: BTreeSet<Point> = BTreeSet::new();
    let mut sum = Rational::zero();
    let mut points = 0usize;
    for n in h.indices(horizon) {
        for (p, _) in h.at(n)?.atoms() {
            if seen.insert(p.clone()) {
                if let OracleValue::Limit(v) = oracle.eval(p) {
                    if !v.is_zero() {
                        sum += v.abs();
                        points += 1;
                    }
                }
            }
        }
    }
    let within_half = sum <= rat(1, 2);
    Ok(LimitMassReport { sum, within_half, method: LimitMassMethod::WindowEnumerated { points } })
}

// ---------------------------------------------------------------------------
// Decay tables
// ---------------------------------------------------------------------------

/// The decay trace of one functional along the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecayRow {
    /// The functional's display name.
    pub name: String,
    /// Exact values `μ_n(f)` over the window.
    pub values: Vec<(u64, Rational)>,
    /// `max |μ_n(f)|` over the last quarter of the window.
    pub tail_max: Rational,
    /// True when the tail maximum is strictly below the tolerance.
    pub vanishing: bool,
}

/// Exact pairings `μ_n(f)` for a family of functionals, with tail verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecayReport {
    /// One row per functional.
    pub rows: Vec<DecayRow>,
    /// The sampling horizon that was requested.
    pub horizon: u64,
    /// The tail tolerance.
    pub tolerance: Rational,
    /// True when every row vanishes.
    pub all_vanishing: bool,
}

/// Evaluates every functional against every sampled measure exactly and
/// checks that the last quarter of each trace stays below `tolerance`.
pub fn decay_report(
    h: &SequenceHandle,
    family: &[NamedFunctional],
    horizon: u64,
    tolerance: &Rational,
) -> Result<DecayReport, AnalysisError> {
    if !tolerance.is_positive() {
        return Err(AnalysisError::InvalidParameter(String::from(
            "tolerance must be positive",
        )));
    }
    let sampled: Vec<u64> = h.indices(horizon).collect();
    if sampled.is_empty() {
        return Err(AnalysisError::InvalidParameter(String::from(
            "empty sampling window",
        )));
    }
    let mut measures = Vec::with_capacity(sampled.len());
    for &n in &sampled {
        measures.push(h.at(n)?);
    }
    let tail_len = sampled.len().div_ceil(4);
    let mut rows = Vec::with_capacity(family.len());
    for f in family {
        let mut values = Vec::with_capacity(sampled.len());
        for (&n, m) in sampled.iter().zip(&measures) {
            let v = evaluate(m, &f.functional).map_err(|e| AnalysisError::Eval(e.to_string()))?;
            values.push((n, v));
        }
        let tail_max = values[values.len() - tail_len..]
            .iter()
            .map(|(_, v)| v.abs())
            .max()
            .expect("tail is nonempty");
        let vanishing = tail_max < *tolerance;
        rows.push(DecayRow { name: f.name.clone(), values, tail_max, vanishing });
    }
    let all_vanishing = rows.iter().all(|r| r.vanishing);
    Ok(DecayReport { rows, horizon, tolerance: tolerance.clone(), all_vanishing })
}

// ---------------------------------------------------------------------------
// Binomial deviation tails
// ---------------------------------------------------------------------------

/// An exact symmetric binomial deviation tail with its certified bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinomialTailQuery {
    /// Number of independent signs.
    pub n: u64,
    /// Relative deviation threshold.
    pub eps: Rational,
    /// Exact probability that `|#{+1} − n/2| ≥ εn/2` under fair signs.
    pub tail: Rational,
    /// Certified rational lower approximation of `√2/(ε√n)`; `tail ≤` this
    /// value implies the true inequality `tail ≤ √2/(ε√n)`.
    pub bound_lower: Rational,
    /// Whether the bound's hypotheses (`ε ≤ 1/12` and `n ≥ 3/ε`) hold.
    pub hypothesis_met: bool,
    /// The certified comparison, populated only when the hypotheses hold.
    pub bound_holds: Option<bool>,
}

/// Exact tail count: `Σ C(n,k)` over `k` with `|2k − n| ≥ εn`, divided by 2ⁿ.
fn tail_probability(n: u64, eps: &Rational) -> Rational {
    let num = eps.numer().to_biguint().expect("eps is positive");
    let den = eps.denom().to_biguint().expect("denominator is positive");
    let rhs = &num * BigUint::from(n);
    let mut binom = BigUint::one();
    let mut sum = BigUint::zero();
    for k in 0..=n {
        let dev = if 2 * k >= n { 2 * k - n } else { n - 2 * k };
        if BigUint::from(dev) * &den >= rhs {
            sum += &binom;
        }
        if k < n {
            binom = binom * BigUint::from(n - k) / BigUint::from(k + 1);
        }
    }
    Rational::new(sum.into(), pow2(n).to_integer())
}

/// Computes the exact probability that a sum of `n` fair ±1 signs deviates
/// from its mean by at least `εn/2` heads, and compares it against the
/// `√2/(ε√n)` ceiling via a certified rational lower approximation.
///
/// Any `ε ∈ (0,1)` is accepted; the comparison verdict is only populated when
/// the ceiling's hypotheses (`ε ≤ 1/12`, `n ≥ 3/ε`) hold.
pub fn binomial_tail(n: u64, eps: &Rational) -> Result<BinomialTailQuery, AnalysisError> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(AnalysisError::InvalidParameter(String::from(
            "deviation fraction must lie strictly between 0 and 1",
        )));
    }
    if n == 0 {
        return Err(AnalysisError::InvalidParameter(String::from(
            "the sign count must be positive",
        )));
    }
    if n > 2000 {
        return Err(AnalysisError::CapExceeded(format!(
            "exact binomial tails are computed for n ≤ 2000, got {n}"
        )));
    }
    let tail = tail_probability(n, eps);
    // √2/(ε√n) = √(2/n)/ε; take the certified lower endpoint of √(2/n).
    let (radical_lo, _) = sqrt_enclosure(&(rat(2, 1) / nat(n)), 128);
    let bound_lower = radical_lo / eps;
    let hypothesis_met = *eps <= rat(1, 12) && nat(n) * eps >= rat(3, 1);
    let bound_holds = if hypothesis_met { Some(tail <= bound_lower) } else { None };
    Ok(BinomialTailQuery { n, eps: eps.clone(), tail, bound_lower, hypothesis_met, bound_holds })
}

/// Verifies `tail(n, ε) ≤ √2/(ε√n)` for every `n` from the first index where
/// the hypotheses hold (`n ≥ 3/ε`) up to `n_max`, all exactly. Returns how
/// many indices were checked.
pub fn binomial_tail_sweep(eps: &Rational, n_max: u64) -> Result<u64, AnalysisError> {
    if !eps.is_positive() || *eps > rat(1, 12) {
        return Err(AnalysisError::InvalidParameter(String::from(
            "the sweep requires a deviation fraction in (0, 1/12]",
        )));
    }
    // first n with n ≥ 3/ε
    let start = (rat(3, 1) / eps)
        .ceil()
        .to_integer()
        .to_u64()
        .ok_or_else(|| AnalysisError::InvalidParameter(String::from("3/ε overflows u64")))?;
    if start > n_max {
        return Ok(0);
    }
    let mut checked = 0u64;
    for n in start..=n_max {
        let q = binomial_tail(n, eps)?;
        debug_assert!(q.hypothesis_met);
        if q.bound_holds != Some(true) {
            return Err(AnalysisError::BoundFailed { n, lhs: q.tail, bound: q.bound_lower });
        }
        checked += 1;
    }
    Ok(checked)
}

// ---------------------------------------------------------------------------
// Rectangle estimate audit
// ---------------------------------------------------------------------------

/// One audited index of a sign-vector/index rectangle pairing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditRow {
    /// Sequence index.
    pub n: u64,
    /// True in the probabilistic case `|B ∩ Σ_n| ≥ 2/ε⁴`; false in the
    /// counting case.
    pub case_one: bool,
    /// `|A ∩ Ω_n|`.
    pub a_count: u64,
    /// `|B ∩ Σ_n|`.
    pub b_count: u64,
    /// Exact value `μ_n([A]×[B])`.
    pub value: Rational,
    /// The product bound `(|A∩Ω_n|/2ⁿ)·(|B∩Σ_n|/n)`.
    pub rect_bound: Rational,
    /// `|value| ≤ rect_bound`, exactly.
    pub bound_ok: bool,
    /// Counting-case ceiling `2/(nε⁴)`, when applicable.
    pub case_zero_bound: Option<Rational>,
    /// `|value| < 2/(nε⁴)` in the counting case (vacuously true otherwise).
    pub case_zero_ok: bool,
    /// Deviation-tail data for the probabilistic case, when the block size is
    /// within the exact tail range.
    pub tail_query: Option<BinomialTailQuery>,
    /// Whether this index clears the threshold after which the final estimate
    /// is asserted (`n > 1/ε⁵` in the counting case; immediate otherwise).
    pub threshold_passed: bool,
    /// `|value| < 2ε`, exactly.
    pub within_two_eps: bool,
}

/// Per-index audit of the two-case rectangle estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditReport {
    /// The deviation parameter.
    pub eps: Rational,
    /// The case split `2/ε⁴` applied to `|B ∩ Σ_n|`.
    pub case_split: Rational,
    /// The counting-case index threshold `1/ε⁵`.
    pub n_threshold: Rational,
    /// One row per audited index.
    pub rows: Vec<AuditRow>,
    /// True when every row satisfies its case's exact inequalities and every
    /// row past its threshold lands strictly inside `2ε`.
    pub verdict: bool,
}

/// Audits the estimate `|μ_n([A]×[B])| < 2ε` for the double-Stone product
/// family, splitting each index into the counting case (`|B∩Σ_n| < 2/ε⁴`,
/// bounded through the rectangle product) and the probabilistic case (bounded
/// through the binomial deviation tail). All comparisons are exact.
pub fn product_proof_audit(
    a: &SignSet,
    b: &IndexSet,
    eps: &Rational,
    n_from: u64,
    n_to: u64,
    cap: u64,
) -> Result<AuditReport, AnalysisError> {
    if !eps.is_positive() || *eps > rat(1, 12) {
        return Err(AnalysisError::InvalidParameter(String::from(
            "the deviation parameter must lie in (0, 1/12]",
        )));
    }
    if n_from == 0 || n_from > n_to {
        return Err(AnalysisError::InvalidParameter(String::from(
            "the audited index range must satisfy 1 ≤ from ≤ to",
        )));
    }
    let eps2 = eps * eps;
    let eps4 = &eps2 * &eps2;
    let case_split = rat(2, 1) / &eps4;
    let n_threshold = Rational::one() / (&eps4 * eps);
    let two_eps = rat(2, 1) * eps;

    let mut rows = Vec::with_capacity((n_to - n_from + 1) as usize);
    for n in n_from..=n_to {
        let nn = n as u32;
        let b_count = index_count(b, nn);
        let a_count = match a.count_closed_form(nn) {
            Some(c) => c,
            None => {
                if n > cap.min(24) {
                    return Err(AnalysisError::CapExceeded(format!(
                        "counting the sign set at n = {n} needs 2^{n} enumeration beyond the cap"
                    )));
                }
                (0..(1u64 << nn))
                    .filter(|&bits| a.contains(&SignVector::new(nn, bits)))
                    .count() as u64
            }
        };
        let value = generators::evaluate_rect(n, a, b, cap)?;
        let rect_bound = Rational::new(a_count.into(), pow2(n).to_integer())
            * Rational::new(b_count.into(), nat(n).to_integer());
        let case_one = nat(b_count) >= case_split;
        let bound_ok = value.abs() <= rect_bound;
        let case_zero_bound = (!case_one).then(|| &case_split / nat(n));
        let case_zero_ok = match &case_zero_bound {
            Some(cb) => value.abs() < *cb,
            None => true,
        };
        let tail_query = if case_one && b_count <= 2000 {
            Some(binomial_tail(b_count, eps)?)
        } else {
            None
        };
        let threshold_passed = case_one || nat(n) > n_threshold;
        let within_two_eps = value.abs() < two_eps;
        rows.push(AuditRow {
            n,
            case_one,
            a_count,
            b_count,
            value,
            rect_bound,
            bound_ok,
            case_zero_bound,
            case_zero_ok,
            tail_query,
            threshold_passed,
            within_two_eps,
        });
    }
    let verdict = rows
        .iter()
        .all(|r| r.bound_ok && r.case_zero_ok && (!r.threshold_passed || r.within_two_eps));
    Ok(AuditReport { eps: eps.clone(), case_split, n_threshold, rows, verdict })
}

// ---------------------------------------------------------------------------
