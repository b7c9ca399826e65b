//! Sequence-to-sequence procedures. Every operation consumes a handle,
//! emits a new handle whose measures all have norm exactly 1, and appends a
//! provenance step whose certificate rows can be re-checked exactly against
//! the input. Subsequence selection is always "the least index satisfying the
//! stage's inequality", so outputs are deterministic and replayable.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::functional::{NamedFunctional, TestFunctional};
use crate::measure::FiniteSignedMeasure;
use crate::point::Point;
use crate::rational::{format_rational, parse_rational, rat, Rational};
use crate::seq::{
    Certificate, HandleSource, LimitOracle, SeqError, SequenceHandle, TransformStep,
};

/// Errors raised by transforms when a certified inequality fails or a
/// precondition cannot be established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransformError {
    /// Underlying sequence evaluation failed.
    Seq(SeqError),
    /// A sampled norm fell at or below the normalization guard.
    NormTooSmall {
        /// The offending index.
        index: u64,
        /// Its exact norm.
        norm: Rational,
        /// The guard threshold.
        eps: Rational,
    },
    /// A truncation tail exceeded its declared bound.
    TailTooLarge {
        /// The offending index.
        index: u64,
        /// Exact mass outside the kept set.
        tail: Rational,
        /// The declared bound.
        bound: Rational,
    },
    /// The operation requires an exact limit oracle on the input handle.
    OracleRequired,
    /// The oracle reports non-convergent coefficients and no canonical
    /// convergent subsequence is known for this source.
    OracleOscillates,
    /// Restriction to the limit set requires a certified limit-set mass
    /// limit of exactly 1.
    LimitMassNotOne {
        /// The certified limit, if any.
        have: Option<Rational>,
    },
    /// A pairwise difference norm fell below the certified lower bound.
    DifferenceTooSmall {
        /// Source indices of the pair.
        pair: (u64, u64),
        /// The exact difference norm.
        norm: Rational,
        /// The certified lower bound.
        beta: Rational,
    },
    /// Support sizes differ where a constant size was required.
    SupportSizeMismatch {
        /// The offending index.
        index: u64,
        /// The size seen at the first index.
        expected: usize,
        /// The size seen here.
        got: usize,
    },
    /// No convergent coefficient labeling was found within the horizon.
    NoConvergentLabeling,
    /// The stabilized coefficient vector violates the mass identities.
    CoefficientMassViolated {
        /// `Σ|α_i|`.
        total: Rational,
        /// `Σ{α_i : α_i > 0}`.
        positive: Rational,
        /// The tolerance applied (0 for the exact path).
        tolerance: Rational,
    },
    /// An atom magnitude violated a declared bound.
    BoundViolated {
        /// The offending index.
        index: u64,
        /// The magnitude seen.
        magnitude: Rational,
        /// The violated bound.
        bound: Rational,
    },
    /// An atom magnitude fell below the required floor.
    MagnitudeTooSmall {
        /// The offending index.
        index: u64,
        /// The magnitude seen.
        magnitude: Rational,
        /// The required floor.
        floor: Rational,
    },
    /// A measure was missing an atom of the required sign.
    MissingSign {
        /// The offending index.
        index: u64,
        /// Whether the positive side was missing (else the negative).
        positive_missing: bool,
    },
    /// A measure that must be scaled to norm 1 was zero.
    ZeroNorm {
        /// The offending index.
        index: u64,
    },
    /// The concentration point carries no certifiable nonzero oscillation.
    NotCertifiablyPositive {
        /// Rendering of the point.
        at: String,
    },
    /// The weight functional is invalid (not 1 at the point, or out of [0,1]).
    InvalidWeight(String),
    /// A greedy search ran out of evaluable indices before emitting anything.
    HorizonExhausted {
        /// The stage that exhausted its search.
        stage: String,
    },
    /// A composite stage's certificate could not be established.
    NotCertifiable(String),
    /// A parameter failed validation.
    InvalidParameter(String),
    /// A provenance step could not be replayed.
    ReplayUnsupported(String),
}

impl From<SeqError> for TransformError {
    fn from(e: SeqError) -> Self {
        TransformError::Seq(e)
    }
}

impl core::fmt::Display for TransformError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            TransformError::Seq(e) => write!(f, "{e}"),
            TransformError::NormTooSmall { index, norm, eps } => write!(
                f,
                "norm {} at index {index} is not above the guard {}",
                format_rational(norm),
                format_rational(eps)
            ),
            TransformError::TailTooLarge { index, tail, bound } => write!(
                f,
                "truncation tail {} at index {index} is not below the bound {}",
                format_rational(tail),
                format_rational(bound)
            ),
            TransformError::OracleRequired => {
                write!(f, "this operation requires an exact limit oracle")
            }
            TransformError::OracleOscillates => write!(
                f,
                "the oracle reports non-convergent coefficients and no canonical \
                 convergent subsequence is known"
            ),
            TransformError::LimitMassNotOne { have } => match have {
                Some(v) => write!(
                    f,
                    "restriction to the limit set needs limit-set mass tending to 1, \
                     but the certified limit is {}",
                    format_rational(v)
                ),
                None => write!(
                    f,
                    "restriction to the limit set needs a certified limit-set mass limit"
                ),
            },
            TransformError::DifferenceTooSmall { pair, norm, beta } => write!(
                f,
                "difference norm {} for pair ({}, {}) is below the certified bound {}",
                format_rational(norm),
                pair.0,
                pair.1,
                format_rational(beta)
            ),
            TransformError::SupportSizeMismatch { index, expected, got } => write!(
                f,
                "support size {got} at index {index} differs from the expected {expected}"
            ),
            TransformError::NoConvergentLabeling => {
                write!(f, "no convergent coefficient labeling within the horizon")
            }
            TransformError::CoefficientMassViolated { total, positive, tolerance } => write!(
                f,
                "stabilized coefficients violate the mass identities: total {}, \
                 positive part {}, tolerance {}",
                format_rational(total),
                format_rational(positive),
                format_rational(tolerance)
            ),
            TransformError::BoundViolated { index, magnitude, bound } => write!(
                f,
                "atom magnitude {} at index {index} is not below the bound {}",
                format_rational(magnitude),
                format_rational(bound)
            ),
            TransformError::MagnitudeTooSmall { index, magnitude, floor } => write!(
                f,
                "atom magnitude {} at index {index} is below the floor {}",
                format_rational(magnitude),
                format_rational(floor)
            ),
            TransformError::MissingSign { index, positive_missing } => write!(
                f,
                "measure at index {index} has no {} atom",
                if *positive_missing { "positive" } else { "negative" }
            ),
            TransformError::ZeroNorm { index } => {
                write!(f, "measure at index {index} is zero and cannot be normalized")
            }
            TransformError::NotCertifiablyPositive { at } => write!(
                f,
                "no certifiable nonzero limit magnitude at {at}"
            ),
            TransformError::InvalidWeight(msg) => write!(f, "invalid weight functional: {msg}"),
            TransformError::HorizonExhausted { stage } => {
                write!(f, "stage '{stage}' exhausted its index search without emitting")
            }
            TransformError::NotCertifiable(msg) => write!(f, "certificate unavailable: {msg}"),
            TransformError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            TransformError::ReplayUnsupported(msg) => write!(f, "cannot replay step: {msg}"),
        }
    }
}

/// How the truncation chooses its kept finite set per index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruncationKeep {
    /// Keep the fewest largest-magnitude atoms whose tail is below the bound.
    GreedyLeast,
    /// Keep the `count · (n + 1)` largest-magnitude atoms at the n-th emitted
    /// position.
    LargestPerIndex {
        /// Atoms kept per unit of position.
        count: u64,
    },
}

impl TruncationKeep {
    fn render(&self) -> String {
        match self {
            TruncationKeep::GreedyLeast => String::from("greedy"),
            TruncationKeep::LargestPerIndex { count } => alloc::format!("per-index:{count}"),
        }
    }

    fn parse(s: &str) -> Option<TruncationKeep> {
        if s == "greedy" {
            return Some(TruncationKeep::GreedyLeast);
        }
        let rest = s.strip_prefix("per-index:")?;
        rest.parse().ok().map(|count| TruncationKeep::LargestPerIndex { count })
    }
}

fn pstr(k: &str, v: String) -> (String, String) {
    (String::from(k), v)
}

fn prat(k: &str, v: &Rational) -> (String, String) {
    (String::from(k), format_rational(v))
}

fn pint(k: &str, v: u64) -> (String, String) {
    (String::from(k), alloc::format!("{v}"))
}

/// Builds the output handle: materialized emitted measures at origin 0, the
/// stated metadata, and the input's provenance extended by one step.
fn emit(
    input: &SequenceHandle,
    measures: Vec<FiniteSignedMeasure>,
    oracle: Option<LimitOracle>,
    l_limit: Option<Rational>,
    op: &str,
    params: Vec<(String, String)>,
    certificate: Certificate,
) -> SequenceHandle {
    let mut provenance = input.provenance.clone();
    provenance.push(TransformStep { op: String::from(op), params, certificate });
    SequenceHandle {
        space: input.space.clone(),
        index_origin: 0,
        source: HandleSource::Materialized(measures),
        oracle,
        l_limit,
        provenance,
    }
}

/// Keeps the input's lazy source (identity on measures) while recording a step.
fn emit_identity(
    input: &SequenceHandle,
    op: &str,
    params: Vec<(String, String)>,
    certificate: Certificate,
) -> SequenceHandle {
    let mut out = input.clone();
    out.provenance.push(TransformStep { op: String::from(op), params, certificate });
    out
}

fn window(h: &SequenceHandle, horizon: u64) -> Vec<u64> {
    h.indices(horizon).collect()
}

/// Scales every measure to norm exactly 1, after certifying that each sampled
/// norm exceeds the guard `eps`. Inputs that already have norm 1 everywhere
/// pass through unchanged (lazy sources preserved).
pub fn normalize(
    h: &SequenceHandle,
    eps: &Rational,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    if eps < &Rational::zero() {
        return Err(TransformError::InvalidParameter(String::from(
            "the normalization guard must be nonnegative",
        )));
    }
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut identity = true;
    for n in window(h, horizon) {
        let m = h.at(n)?;
        let norm = m.norm();
        if &norm <= eps {
            return Err(TransformError::NormTooSmall { index: n, norm, eps: eps.clone() });
        }
        identity &= norm.is_one();
        rows.push((n, norm.clone()));
        out.push(m.scale(&(Rational::one() / norm)));
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("normalize") });
    }
    let params = alloc::vec![prat("eps", eps), pint("horizon", horizon)];
    let cert = Certificate::Normalize { rows };
    if identity {
        Ok(emit_identity(h, "normalize", params, cert))
    } else {
        // scaling by a non-convergent factor invalidates pointwise limits
        Ok(emit(h, out, None, None, "normalize", params, cert))
    }
}

/// Restricts each measure to a finite set of its largest-magnitude atoms,
/// certifies the discarded tail against the bound `1/(n+1)` at the n-th
/// position, and renormalizes. Ties in magnitude are broken by point order.
pub fn truncate_cs_to_fs(
    h: &SequenceHandle,
    keep: &TruncationKeep,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut identity = true;
    for (pos, n) in window(h, horizon).into_iter().enumerate() {
        let m = h.at(n)?;
        let bound = Rational::new(1.into(), (pos as u64 + 1).into());
        // atoms by descending magnitude, ties by ascending point
        let mut atoms: Vec<(Point, Rational)> =
            m.atoms().map(|(p, c)| (p.clone(), c.clone())).collect();
        atoms.sort_by(|a, b| b.1.abs().cmp(&a.1.abs()).then(a.0.cmp(&b.0)));
        let keep_count = match keep {
            TruncationKeep::LargestPerIndex { count } => {
                (count.saturating_mul(pos as u64 + 1)) as usize
            }
            TruncationKeep::GreedyLeast => {
                // fewest atoms with tail < bound: walk the sorted magnitudes
                let mut tail = m.norm();
                let mut cnt = 0usize;
                for (_, c) in &atoms {
                    if tail < bound {
                        break;
                    }
                    tail -= c.abs();
                    cnt += 1;
                }
                cnt
            }
        };
        let kept = FiniteSignedMeasure::from_atoms(
            atoms.iter().take(keep_count).cloned(),
        );
        let tail = &m.norm() - &kept.norm();
        if tail >= bound {
            return Err(TransformError::TailTooLarge { index: n, tail, bound });
        }
        let kept_norm = kept.norm();
        if kept_norm.is_zero() {
            return Err(TransformError::ZeroNorm { index: n });
        }
        identity &= tail.is_zero() && kept_norm.is_one();
        rows.push((n, tail, kept_norm.clone()));
        out.push(kept.scale(&(Rational::one() / kept_norm)));
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("truncate") });
    }
    let params = alloc::vec![pstr("keep", keep.render()), pint("horizon", horizon)];
    let cert = Certificate::Truncate { rows };
    if identity {
        Ok(emit_identity(h, "truncate", params, cert))
    } else {
        Ok(emit(h, out, None, None, "truncate", params, cert))
    }
}

/// Checks the truncation estimate
/// `|ν_n(f)| ≤ (|μ_n(f)| + maxf·tail_n) / (1 − tail_n)` for every functional
/// in `family`, where `maxf` is the exact bound of `|f|` on the input
/// support. Both handles must evaluate at the certificate's recorded indices.
pub fn truncate_estimate_check(
    input: &SequenceHandle,
    output: &SequenceHandle,
    family: &[NamedFunctional],
) -> Result<(), TransformError> {
    let step = output
        .provenance
        .last()
        .filter(|s| s.op == "truncate")
        .ok_or_else(|| TransformError::NotCertifiable(String::from("no truncation step")))?;
    let Certificate::Truncate { rows } = &step.certificate else {
        return Err(TransformError::NotCertifiable(String::from("wrong certificate kind")));
    };
    for (pos, (n, tail, _)) in rows.iter().enumerate() {
        let full = input.at(*n)?;
        let truncated = output.at(pos as u64)?;
        for nf in family {
            let mu = crate::functional::evaluate(&full, &nf.functional)
                .map_err(|e| TransformError::NotCertifiable(e.to_string()))?;
            let nu = crate::functional::evaluate(&truncated, &nf.functional)
                .map_err(|e| TransformError::NotCertifiable(e.to_string()))?;
            let maxf = full
                .atoms()
                .map(|(p, _)| nf.functional.eval(p).map(|v| v.abs()))
                .try_fold(Rational::zero(), |acc, v| {
                    v.map(|v| if v > acc { v } else { acc })
                })
                .map_err(|e| TransformError::NotCertifiable(e.to_string()))?;
            let rhs = (mu.abs() + maxf * tail) / (Rational::one() - tail);
            if nu.abs() > rhs {
                return Err(TransformError::NotCertifiable(alloc::format!(
                    "estimate fails at index {n} for '{}'",
                    nf.name
                )));
            }
        }
    }
    Ok(())
}

/// Extracts a pointwise-convergent subsequence. With an oracle whose limits
/// all exist, the input already converges pointwise and passes through
/// (flag exact). With an oscillating oracle on a generator-backed handle, the
/// canonical convergent subsequence is materialized and the oracle swapped
/// (flag exact). Otherwise a greedy diagonal heuristic picks indices whose
/// first-m coefficient oscillations are below `1/(m+1)` (flag estimated).
pub fn extract_pointwise_convergent(
    h: &SequenceHandle,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let params = alloc::vec![pint("horizon", horizon)];
    if let Some(oracle) = &h.oracle {
        if oracle.all_limits_exist() {
            let cert = Certificate::Extract { picks: Vec::new(), exact: true };
            let mut params = params;
            params.push(pstr("mode", String::from("identity")));
            return Ok(emit_identity(h, "extract-pointwise", params, cert));
        }
        if let HandleSource::Generator(spec) = &h.source {
            if let Some((map, sub_oracle)) = crate::generators::convergent_subsequence(spec) {
                let mut picks = Vec::new();
                let mut out = Vec::new();
                for j in 0.. {
                    let n = map(j);
                    if n >= h.limit_index() || out.len() as u64 >= horizon {
                        break;
                    }
                    picks.push(n);
                    out.push(h.at(n)?);
                }
                if out.is_empty() {
                    return Err(TransformError::HorizonExhausted {
                        stage: String::from("extract-pointwise"),
                    });
                }
                let l_limit = crate::generators::subsequence_l_limit(spec);
                let cert = Certificate::Extract { picks, exact: true };
                let mut params = params;
                params.push(pstr("mode", String::from("canonical-subsequence")));
                return Ok(emit(h, out, Some(sub_oracle), l_limit, "extract-pointwise", params, cert));
            }
        }
    }
    // greedy diagonal: support points are enumerated in first-appearance
    // order as indices are scanned, and a candidate is accepted when its
    // oscillation against the previous pick is below 1/(m+1) at the first
    // m+1 points; the scan itself is capped deterministically
    let scan_cap = 4 * horizon + 64;
    let mut points: Vec<Point> = Vec::new();
    let mut picks: Vec<u64> = Vec::new();
    let mut out: Vec<FiniteSignedMeasure> = Vec::new();
    let mut prev: Option<FiniteSignedMeasure> = None;
    for n in window(h, scan_cap) {
        if out.len() as u64 >= horizon {
            break;
        }
        let m = h.at(n)?;
        for (p, _) in m.atoms() {
            if !points.contains(p) {
                points.push(p.clone());
            }
        }
        let stage = out.len() as u64;
        let ok = match &prev {
            None => true,
            Some(q) => {
                let eps = Rational::new(1.into(), (stage + 1).into());
                points.iter().take(stage as usize + 1).all(|p| {
                    (m.coefficient(p) - q.coefficient(p)).abs() < eps
                })
            }
        };
        if ok {
            picks.push(n);
            prev = Some(m.clone());
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted {
            stage: String::from("extract-pointwise"),
        });
    }
    let cert = Certificate::Extract { picks, exact: false };
    let mut params = params;
    params.push(pstr("mode", String::from("greedy")));
    Ok(emit(h, out, None, None, "extract-pointwise", params, cert))
}

/// Whether the handle's most recent extraction (if any) certified exactness.
pub fn last_extract_exact(h: &SequenceHandle) -> Option<bool> {
    h.provenance.iter().rev().find_map(|s| match &s.certificate {
        Certificate::Extract { exact, .. } if s.op == "extract-pointwise" => Some(*exact),
        _ => None,
    })
}

/// The disjoint-outside-the-limit-set step. Requires a pointwise-convergent
/// input (exact oracle, all limits existing). Greedily picks `n_k` as the
/// least unused index whose mass on the previously used off-limit-set points
/// is below `1/(k+1)`, removes that mass, and renormalizes by
/// `α_k = 1/(1 − removed) ∈ [1, 1+1/k)`. Emitted supports then intersect only
/// inside the limit set.
pub fn restrict_renormalize_off_limit(
    h: &SequenceHandle,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let oracle = h.oracle.clone().ok_or(TransformError::OracleRequired)?;
    if !oracle.all_limits_exist() {
        return Err(TransformError::OracleOscillates);
    }
    let mut used_off_l: BTreeSet<Point> = BTreeSet::new();
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut n = h.index_origin;
    let limit = h.limit_index();
    for k in 1..=horizon {
        let bound = Rational::new(1.into(), (k + 1).into());
        let mut emitted = false;
        while n < limit {
            let m = h.at(n)?;
            let removed = m.restrict(|p| used_off_l.contains(p)).norm();
            if removed < bound {
                let kept = m.restrict(|p| !used_off_l.contains(p));
                let kept_norm = kept.norm();
                if kept_norm.is_zero() {
                    return Err(TransformError::ZeroNorm { index: n });
                }
                let alpha = Rational::one() / kept_norm;
                // removed < 1/(k+1) gives α = 1/(1−removed) < 1 + 1/k exactly
                let cap = Rational::one() + Rational::new(1.into(), k.into());
                debug_assert!(alpha < cap);
                let nu = kept.scale(&alpha);
                for (p, _) in nu.atoms() {
                    if !oracle.in_limit_set(p) {
                        used_off_l.insert(p.clone());
                    }
                }
                rows.push((n, removed, alpha));
                out.push(nu);
                n += 1;
                emitted = true;
                break;
            }
            n += 1;
        }
        if !emitted {
            break;
        }
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted {
            stage: String::from("restrict-off-limit"),
        });
    }
    // exact postcondition: pairwise support intersections lie in the limit set
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            for p in out[i].support_intersection(&out[j]) {
                if !oracle.in_limit_set(&p) {
                    return Err(TransformError::NotCertifiable(alloc::format!(
                        "supports of emitted {i} and {j} share the off-limit point {}",
                        p.render()
                    )));
                }
            }
        }
    }
    let params = alloc::vec![pint("horizon", horizon)];
    let cert = Certificate::OffL { rows };
    let l_limit = h.l_limit.clone();
    Ok(emit(h, out, Some(oracle), l_limit, "restrict-off-limit", params, cert))
}

/// Restriction to the limit set, for inputs whose limit-set mass is certified
/// to tend to 1. Greedily picks `n_k` as the least unused index whose
/// off-limit-set mass is below `1/(k+1)`, restricts to the limit set, and
/// renormalizes; output supports lie inside the limit set.
pub fn restrict_to_limit(
    h: &SequenceHandle,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let oracle = h.oracle.clone().ok_or(TransformError::OracleRequired)?;
    if !oracle.all_limits_exist() {
        return Err(TransformError::OracleOscillates);
    }
    if h.l_limit != Some(Rational::one()) {
        return Err(TransformError::LimitMassNotOne { have: h.l_limit.clone() });
    }
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut n = h.index_origin;
    let limit = h.limit_index();
    for k in 1..=horizon {
        let bound = Rational::new(1.into(), (k + 1).into());
        let mut emitted = false;
        while n < limit {
            let m = h.at(n)?;
            let off = m.restrict(|p| !oracle.in_limit_set(p)).norm();
            if off < bound {
                let kept = m.restrict(|p| oracle.in_limit_set(p));
                let kept_norm = kept.norm();
                if kept_norm.is_zero() {
                    return Err(TransformError::ZeroNorm { index: n });
                }
                let alpha = Rational::one() / kept_norm;
                rows.push((n, off, alpha.clone()));
                out.push(kept.scale(&alpha));
                n += 1;
                emitted = true;
                break;
            }
            n += 1;
        }
        if !emitted {
            break;
        }
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted {
            stage: String::from("restrict-to-limit"),
        });
    }
    let params = alloc::vec![pint("horizon", horizon)];
    let cert = Certificate::RestrictL { rows };
    Ok(emit(h, out, Some(oracle), Some(Rational::one()), "restrict-to-limit", params, cert))
}

/// Normalized consecutive differences: pairs the available indices in order
/// and emits `(ν_even − ν_odd)/∥ν_even − ν_odd∥`, certifying each exact
/// difference norm against the lower bound `beta`.
pub fn difference_normalize(
    h: &SequenceHandle,
    beta: &Rational,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    if beta <= &Rational::zero() {
        return Err(TransformError::InvalidParameter(String::from(
            "the difference lower bound must be positive",
        )));
    }
    let idx = window(h, u64::MAX);
    let mut rows = Vec::new();
    let mut out = Vec::new();
    for pair in idx.chunks(2) {
        let &[a, b] = pair else { break };
        if out.len() as u64 >= horizon {
            break;
        }
        let d = FiniteSignedMeasure::combine(
            &Rational::one(),
            &h.at(a)?,
            &-Rational::one(),
            &h.at(b)?,
        );
        let norm = d.norm();
        if &norm < beta {
            return Err(TransformError::DifferenceTooSmall {
                pair: (a, b),
                norm,
                beta: beta.clone(),
            });
        }
        rows.push((a, b, norm.clone()));
        out.push(d.scale(&(Rational::one() / norm)));
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted {
            stage: String::from("difference-normalize"),
        });
    }
    // with pointwise-convergent input the difference coefficients vanish at
    // every point (numerators tend to 0, denominators stay ≥ beta)
    let (oracle, l_limit) = match &h.oracle {
        Some(o) if o.all_limits_exist() => (Some(LimitOracle::Zero), Some(Rational::zero())),
        _ => (None, None),
    };
    let params = alloc::vec![prat("beta", beta), pint("horizon", horizon)];
    let cert = Certificate::Difference { beta: beta.clone(), rows };
    Ok(emit(h, out, oracle, l_limit, "difference-normalize", params, cert))
}

/// Filters emitted indices by an exact limit-set-mass threshold: keeps those
/// with `∥ν↾L∥ < threshold`. Used by the disjointification case split.
fn mass_filter(
    h: &SequenceHandle,
    threshold: &Rational,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let oracle = h.oracle.clone().ok_or(TransformError::OracleRequired)?;
    let mut picks = Vec::new();
    let mut out = Vec::new();
    for n in window(h, u64::MAX) {
        if out.len() as u64 >= horizon {
            break;
        }
        let m = h.at(n)?;
        if &m.restrict(|p| oracle.in_limit_set(p)).norm() < threshold {
            picks.push(n);
            out.push(m);
        }
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("mass-filter") });
    }
    let params = alloc::vec![prat("threshold", threshold), pint("horizon", horizon)];
    let cert = Certificate::Extract { picks, exact: true };
    let l_limit = h.l_limit.clone();
    Ok(emit(h, out, Some(oracle), l_limit, "mass-filter", params, cert))
}

/// Selects difference pairs for the limit-set-mass-1 case: for each even
/// member, the odd member is the least later index whose coefficients on the
/// even member's support all lie within `1/(4·|supp|)` of their exact limits.
fn pin_pairs(
    h: &SequenceHandle,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let oracle = h.oracle.clone().ok_or(TransformError::OracleRequired)?;
    let idx = window(h, u64::MAX);
    let mut picks = Vec::new();
    let mut out = Vec::new();
    let mut pos = 0usize;
    while pos < idx.len() && (out.len() as u64) < 2 * horizon {
        let a = idx[pos];
        let ma = h.at(a)?;
        let quarter_gap = Rational::new(1.into(), (4 * ma.support_size() as u64).into());
        let mut found = None;
        for (off, &b) in idx.iter().enumerate().skip(pos + 1) {
            let mb = h.at(b)?;
            let pinned = ma.atoms().all(|(p, _)| {
                match oracle.eval(p) {
                    crate::seq::OracleValue::Limit(c) => {
                        (mb.coefficient(p) - c).abs() < quarter_gap
                    }
                    crate::seq::OracleValue::Oscillation { .. } => false,
                }
            });
            if pinned {
                found = Some((off, b));
                break;
            }
        }
        let Some((boff, b)) = found else { break };
        picks.push(a);
        picks.push(b);
        out.push(ma);
        out.push(h.at(b)?);
        pos = boff + 1;
    }
    if out.len() < 2 {
        return Err(TransformError::HorizonExhausted { stage: String::from("pin-pairs") });
    }
    let params = alloc::vec![pint("horizon", horizon)];
    let cert = Certificate::Extract { picks, exact: true };
    let l_limit = h.l_limit.clone();
    Ok(emit(h, out, Some(oracle), l_limit, "pin-pairs", params, cert))
}

fn take_new_steps(before: &SequenceHandle, after: &SequenceHandle) -> Vec<TransformStep> {
    after.provenance[before.provenance.len()..].to_vec()
}

/// The full disjointification pipeline: pointwise-convergent extraction,
/// restriction off the limit set, a case split on `α = lim ∥ν_n↾L∥`
/// (α = 0 short-circuits; α ∈ (0,1) filters by `∥ν↾L∥ < (1+α)/2` and takes
/// differences with lower bound `β = 1−α`; α = 1 restricts to the limit set,
/// pins difference pairs, and uses `β = ¼`), and a final off-limit-set
/// restriction that yields exactly verified pairwise disjoint supports.
pub fn disjointify(
    h: &SequenceHandle,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let inner = 2 * horizon + 8;
    let extracted = extract_pointwise_convergent(h, inner)?;
    if last_extract_exact(&extracted) != Some(true) {
        return Err(TransformError::OracleRequired);
    }
    let alpha = extracted
        .l_limit
        .clone()
        .ok_or_else(|| TransformError::NotCertifiable(String::from(
            "disjointification needs a certified limit of the limit-set mass",
        )))?;
    let mut stages = take_new_steps(h, &extracted);

    let (pre_final, beta) = if alpha.is_zero() {
        // the limit set carries no mass in the limit, hence is empty for an
        // exact oracle: off-limit restriction alone already disjointifies
        (extracted.clone(), None)
    } else if alpha < Rational::one() {
        let off = restrict_renormalize_off_limit(&extracted, inner)?;
        let threshold = (Rational::one() + &alpha) / rat(2, 1);
        let filtered = mass_filter(&off, &threshold, inner)?;
        let beta = Rational::one() - &alpha;
        let diffed = difference_normalize(&filtered, &beta, horizon + 2)?;
        stages = take_new_steps(h, &diffed);
        (diffed, Some(beta))
    } else if alpha == Rational::one() {
        // certified total limit-set mass at most ½ is required for the ¼ bound
        let l_mass = match &h.source {
            HandleSource::Generator(spec) => crate::generators::l_mass_closed_form(spec),
            HandleSource::Materialized(_) => None,
        }
        .ok_or_else(|| TransformError::NotCertifiable(String::from(
            "the mass-1 case needs a closed-form total limit-set mass",
        )))?;
        if l_mass > rat(1, 2) {
            return Err(TransformError::NotCertifiable(alloc::format!(
                "total limit-set mass {} exceeds 1/2",
                format_rational(&l_mass)
            )));
        }
        let restricted = restrict_to_limit(&extracted, inner)?;
        let paired = pin_pairs(&restricted, horizon + 2)?;
        let beta = rat(1, 4);
        let diffed = difference_normalize(&paired, &beta, horizon + 2)?;
        stages = take_new_steps(h, &diffed);
        (diffed, Some(beta))
    } else {
        return Err(TransformError::NotCertifiable(String::from(
            "the certified limit-set mass limit exceeds 1",
        )));
    };

    let disjointed = restrict_renormalize_off_limit(&pre_final, horizon)?;
    stages.extend(take_new_steps(&pre_final, &disjointed));

    // exact postcondition over every emitted pair
    let final_measures: Vec<FiniteSignedMeasure> = disjointed
        .indices(horizon)
        .map(|n| disjointed.at(n))
        .collect::<Result<_, _>>()?;
    for i in 0..final_measures.len() {
        for j in i + 1..final_measures.len() {
            if !final_measures[i].support_disjoint(&final_measures[j]) {
                return Err(TransformError::NotCertifiable(alloc::format!(
                    "emitted {i} and {j} share support"
                )));
            }
        }
    }
    let params = alloc::vec![pint("horizon", horizon)];
    let cert = Certificate::Disjointify {
        alpha_limit: alpha,
        beta,
        stages,
        disjoint_verified: true,
    };
    Ok(emit(h, final_measures, Some(LimitOracle::Zero), Some(Rational::zero()), "disjointify", params, cert))
}

/// Stabilizes the coefficient vectors of a constant-support-size sequence:
/// atoms are labeled in canonical point order, and a subsequence with
/// convergent labeled vectors is selected — exactly when the vectors are
/// eventually constant, otherwise by majority bucket on a `δ`-grid. Asserts
/// `Σ|α_i| = 1` and the `±½` split (exactly, or within `δ`).
pub fn stabilize_coefficients(
    h: &SequenceHandle,
    grid: &Rational,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    if grid <= &Rational::zero() {
        return Err(TransformError::InvalidParameter(String::from(
            "the grid step must be positive",
        )));
    }
    let idx = window(h, horizon);
    if idx.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("stabilize") });
    }
    let mut vectors: Vec<(u64, Vec<Rational>)> = Vec::new();
    let mut size = None;
    for &n in &idx {
        let m = h.at(n)?;
        let expected = *size.get_or_insert(m.support_size());
        if m.support_size() != expected {
            return Err(TransformError::SupportSizeMismatch {
                index: n,
                expected,
                got: m.support_size(),
            });
        }
        // canonical labeling: coefficients in ascending point order
        vectors.push((n, m.atoms().map(|(_, c)| c.clone()).collect()));
    }
    // longest constant suffix
    let mut start = vectors.len() - 1;
    while start > 0 && vectors[start - 1].1 == vectors[start].1 {
        start -= 1;
    }
    let suffix_len = vectors.len() - start;
    let (picks, alpha, exact) = if suffix_len >= 2 && suffix_len * 2 >= vectors.len() {
        let picks: Vec<u64> = vectors[start..].iter().map(|(n, _)| *n).collect();
        (picks, vectors[start].1.clone(), true)
    } else {
        // majority bucket after rounding each coefficient to the grid
        let round = |c: &Rational| -> Rational {
            Rational::from_integer(crate::rational::round_to_integer(&(c / grid))) * grid
        };
        let keys: Vec<Vec<Rational>> = vectors
            .iter()
            .map(|(_, v)| v.iter().map(round).collect())
            .collect();
        let mut best: Option<(usize, &Vec<Rational>)> = None;
        for key in &keys {
            let count = keys.iter().filter(|k| *k == key).count();
            if best.map_or(true, |(c, _)| count > c) {
                best = Some((count, key));
            }
        }
        let (count, key) = best.unwrap();
        if count < 2 || count * 4 < vectors.len() {
            return Err(TransformError::NoConvergentLabeling);
        }
        let picks: Vec<u64> = vectors
            .iter()
            .zip(&keys)
            .filter(|(_, k)| *k == key)
            .map(|((n, _), _)| *n)
            .collect();
        (picks, key.clone(), false)
    };
    let total: Rational = alpha.iter().map(|c| c.abs()).sum();
    let positive: Rational = alpha.iter().filter(|c| c > &&Rational::zero()).cloned().sum();
    let tolerance = if exact { Rational::zero() } else { grid.clone() };
    let total_ok = (&total - Rational::one()).abs() <= tolerance;
    let split_ok = (&positive - rat(1, 2)).abs() <= tolerance;
    if !total_ok || !split_ok {
        return Err(TransformError::CoefficientMassViolated { total, positive, tolerance });
    }
    let out: Vec<FiniteSignedMeasure> =
        picks.iter().map(|&n| h.at(n)).collect::<Result<_, _>>()?;
    let (oracle, l_limit) = match &h.oracle {
        Some(o) if o.all_limits_exist() => (Some(o.clone()), h.l_limit.clone()),
        _ => (None, None),
    };
    let params = alloc::vec![prat("grid", grid), pint("horizon", horizon)];
    let cert = Certificate::Stabilize { picks, alpha, exact };
    Ok(emit(h, out, oracle, l_limit, "stabilize", params, cert))
}

/// Removes the smallest-magnitude atom of each measure (ties broken by point
/// order) after certifying its magnitude below `scale/(m+1)` at the m-th
/// position, then renormalizes by `1/(1 − magnitude)`.
pub fn drop_small_atom(
    h: &SequenceHandle,
    scale: &Rational,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    if scale <= &Rational::zero() {
        return Err(TransformError::InvalidParameter(String::from(
            "the bound scale must be positive",
        )));
    }
    let mut rows = Vec::new();
    let mut out = Vec::new();
    for (pos, n) in window(h, horizon).into_iter().enumerate() {
        let m = h.at(n)?;
        let bound = scale / crate::rational::nat(pos as u64 + 1);
        let Some((p, c)) = m
            .atoms()
            .map(|(p, c)| (p.clone(), c.abs()))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
        else {
            return Err(TransformError::ZeroNorm { index: n });
        };
        if c >= bound {
            return Err(TransformError::BoundViolated { index: n, magnitude: c, bound });
        }
        if c >= Rational::one() {
            return Err(TransformError::BoundViolated {
                index: n,
                magnitude: c,
                bound: Rational::one(),
            });
        }
        let mut kept = m.clone();
        kept.remove_atom(&p);
        let factor = Rational::one() / (Rational::one() - &c);
        rows.push((n, c, bound));
        out.push(kept.scale(&factor));
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("drop-small-atom") });
    }
    let (oracle, l_limit) = match &h.oracle {
        // the removed magnitudes tend to 0 and the scaling tends to 1, so
        // pointwise limit behaviour is unchanged
        Some(o) => (Some(o.clone()), h.l_limit.clone()),
        None => (None, None),
    };
    let params = alloc::vec![prat("scale", scale), pint("horizon", horizon)];
    let cert = Certificate::DropAtom { rows };
    Ok(emit(h, out, oracle, l_limit, "drop-small-atom", params, cert))
}

/// Reduces each measure to one positive and one negative atom, `½(δ_x − δ_y)`,
/// picking the least positive-coefficient point and the least
/// negative-coefficient point. Requires constant support size at least 2 and
/// every atom magnitude at least `floor`.
pub fn pair_reduce(
    h: &SequenceHandle,
    floor: &Rational,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let mut rows = Vec::new();
    let mut out = Vec::new();
    let mut size = None;
    for n in window(h, horizon) {
        let m = h.at(n)?;
        let expected = *size.get_or_insert(m.support_size());
        if m.support_size() != expected {
            return Err(TransformError::SupportSizeMismatch {
                index: n,
                expected,
                got: m.support_size(),
            });
        }
        if expected < 2 {
            return Err(TransformError::InvalidParameter(String::from(
                "pair reduction needs support size at least 2",
            )));
        }
        for (_, c) in m.atoms() {
            if &c.abs() < floor {
                return Err(TransformError::MagnitudeTooSmall {
                    index: n,
                    magnitude: c.abs(),
                    floor: floor.clone(),
                });
            }
        }
        let pos = m.atoms().find(|(_, c)| *c > &Rational::zero()).map(|(p, _)| p.clone());
        let neg = m.atoms().find(|(_, c)| *c < &Rational::zero()).map(|(p, _)| p.clone());
        let Some(x) = pos else {
            return Err(TransformError::MissingSign { index: n, positive_missing: true });
        };
        let Some(y) = neg else {
            return Err(TransformError::MissingSign { index: n, positive_missing: false });
        };
        rows.push((n, x.render(), y.render()));
        out.push(FiniteSignedMeasure::from_atoms([
            (x, rat(1, 2)),
            (y, rat(-1, 2)),
        ]));
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("pair-reduce") });
    }
    let params = alloc::vec![prat("floor", floor), pint("horizon", horizon)];
    let cert = Certificate::PairReduce { rows };
    Ok(emit(h, out, None, None, "pair-reduce", params, cert))
}

/// Concentrates the sequence at a point `x` carrying a certified nonzero
/// limit magnitude `α`: picks the subsequence with `|μ({x})| > α/2`,
/// multiplies atomwise by a weight functional `g` (rational, `0 ≤ g ≤ 1`,
/// `g(x) = 1`), and renormalizes. Every off-`x` support point is verified to
/// carry pointwise limit 0.
pub fn concentrate_at_isolated(
    h: &SequenceHandle,
    x: &Point,
    g: &TestFunctional,
    horizon: u64,
) -> Result<SequenceHandle, TransformError> {
    let oracle = h.oracle.clone().ok_or(TransformError::OracleRequired)?;
    let alpha = match oracle.eval(x) {
        crate::seq::OracleValue::Limit(v) => v.abs(),
        crate::seq::OracleValue::Oscillation { limsup_abs, .. } => limsup_abs,
    };
    if alpha.is_zero() {
        return Err(TransformError::NotCertifiablyPositive { at: x.render() });
    }
    let weigh = |p: &Point| -> Result<Rational, TransformError> {
        let v = g.eval(p).map_err(|e| TransformError::InvalidWeight(e.to_string()))?;
        if v < Rational::zero() || v > Rational::one() {
            return Err(TransformError::InvalidWeight(alloc::format!(
                "value {} at {} is outside [0,1]",
                format_rational(&v),
                p.render()
            )));
        }
        Ok(v)
    };
    if !weigh(x)?.is_one() {
        return Err(TransformError::InvalidWeight(String::from(
            "the weight must equal 1 at the concentration point",
        )));
    }
    let half_alpha = &alpha / crate::rational::nat(2);
    let mut rows = Vec::new();
    let mut out = Vec::new();
    for n in window(h, u64::MAX) {
        if out.len() as u64 >= horizon {
            break;
        }
        let m = h.at(n)?;
        let at_x = m.coefficient(x).abs();
        if at_x <= half_alpha {
            continue;
        }
        let mut weighted = FiniteSignedMeasure::zero();
        for (p, c) in m.atoms() {
            weighted.add_atom(p.clone(), c * weigh(p)?);
        }
        let norm = weighted.norm();
        if norm.is_zero() {
            return Err(TransformError::ZeroNorm { index: n });
        }
        // every off-x point of the output must have exact pointwise limit 0
        for (p, _) in weighted.atoms() {
            if p != x && !matches!(oracle.eval(p), crate::seq::OracleValue::Limit(v) if v.is_zero())
            {
                return Err(TransformError::NotCertifiable(alloc::format!(
                    "support point {} off the concentration point has a nonzero limit",
                    p.render()
                )));
            }
        }
        rows.push((n, at_x));
        out.push(weighted.scale(&(Rational::one() / norm)));
    }
    if out.is_empty() {
        return Err(TransformError::HorizonExhausted { stage: String::from("concentrate") });
    }
    let params = alloc::vec![
        pstr("at", x.render()),
        pstr("weight", weight_render(g)),
        pint("horizon", horizon),
    ];
    let cert = Certificate::Concentrate { rows };
    Ok(emit(h, out, None, None, "concentrate", params, cert))
}

fn weight_render(g: &TestFunctional) -> String {
    match g {
        TestFunctional::Const(v) if v.is_one() => String::from("one"),
        TestFunctional::Bump { cx, cy, r } => alloc::format!(
            "bump:{};{};{}",
            format_rational(cx),
            format_rational(cy),
            format_rational(r)
        ),
        _ => String::from("unsupported"),
    }
}

fn weight_parse(s: &str) -> Option<TestFunctional> {
    if s == "one" {
        return Some(TestFunctional::Const(Rational::one()));
    }
    let rest = s.strip_prefix("bump:")?;
    let mut it = rest.split(';');
    let cx = parse_rational(it.next()?).ok()?;
    let cy = parse_rational(it.next()?).ok()?;
    let r = parse_rational(it.next()?).ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(TestFunctional::Bump { cx, cy, r })
}

fn point_parse(s: &str) -> Option<Point> {
    if let Ok(n) = s.parse::<u64>() {
        return Some(Point::Nat(n));
    }
    let inner = s.strip_prefix('(')?.strip_suffix(')')?;
    let mut it = inner.split(',');
    let x = parse_rational(it.next()?).ok()?;
    let y = parse_rational(it.next()?).ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(Point::Square { x, y })
}

fn param<'a>(step: &'a TransformStep, key: &str) -> Result<&'a str, TransformError> {
    step.params
        .iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| TransformError::ReplayUnsupported(alloc::format!(
            "step '{}' lacks parameter '{key}'",
            step.op
        )))
}

fn param_rat(step: &TransformStep, key: &str) -> Result<Rational, TransformError> {
    parse_rational(param(step, key)?).map_err(|e| {
        TransformError::ReplayUnsupported(alloc::format!("bad '{key}' in '{}': {e}", step.op))
    })
}

fn param_u64(step: &TransformStep, key: &str) -> Result<u64, TransformError> {
    param(step, key)?.parse().map_err(|_| {
        TransformError::ReplayUnsupported(alloc::format!("bad '{key}' in '{}'", step.op))
    })
}

/// Re-applies one recorded step to a handle.
pub fn apply_step(
    h: &SequenceHandle,
    step: &TransformStep,
) -> Result<SequenceHandle, TransformError> {
    let horizon = param_u64(step, "horizon")?;
    match step.op.as_str() {
        "normalize" => normalize(h, &param_rat(step, "eps")?, horizon),
        "truncate" => {
            let keep = TruncationKeep::parse(param(step, "keep")?).ok_or_else(|| {
                TransformError::ReplayUnsupported(String::from("bad truncation keep rule"))
            })?;
            truncate_cs_to_fs(h, &keep, horizon)
        }
        "extract-pointwise" => extract_pointwise_convergent(h, horizon),
        "restrict-off-limit" => restrict_renormalize_off_limit(h, horizon),
        "restrict-to-limit" => restrict_to_limit(h, horizon),
        "difference-normalize" => difference_normalize(h, &param_rat(step, "beta")?, horizon),
        "mass-filter" => mass_filter(h, &param_rat(step, "threshold")?, horizon),
        "pin-pairs" => pin_pairs(h, horizon),
        "disjointify" => disjointify(h, horizon),
        "stabilize" => stabilize_coefficients(h, &param_rat(step, "grid")?, horizon),
        "drop-small-atom" => drop_small_atom(h, &param_rat(step, "scale")?, horizon),
        "pair-reduce" => pair_reduce(h, &param_rat(step, "floor")?, horizon),
        "concentrate" => {
            let x = point_parse(param(step, "at")?).ok_or_else(|| {
                TransformError::ReplayUnsupported(String::from("unparseable point"))
            })?;
            let g = weight_parse(param(step, "weight")?).ok_or_else(|| {
                TransformError::ReplayUnsupported(String::from("unparseable weight"))
            })?;
            concentrate_at_isolated(h, &x, &g, horizon)
        }
        other => Err(TransformError::ReplayUnsupported(alloc::format!(
            "unknown operation '{other}'"
        ))),
    }
}

/// Replays recorded steps on a base handle; the result must be bit-identical
/// to the originally transformed handle for provenance to verify.
pub fn replay(
    base: &SequenceHandle,
    steps: &[TransformStep],
) -> Result<SequenceHandle, TransformError> {
    let mut h = base.clone();
    for step in steps {
        h = apply_step(&h, step)?;
    }
    Ok(h)
}

/// Verifies that `transformed` is exactly reproduced by replaying its
/// provenance suffix on `base`.
pub fn verify_provenance(
    base: &SequenceHandle,
    transformed: &SequenceHandle,
) -> Result<(), TransformError> {
    let k = base.provenance.len();
    if transformed.provenance.len() < k || transformed.provenance[..k] != base.provenance[..] {
        return Err(TransformError::ReplayUnsupported(String::from(
            "the transformed handle does not extend the base handle's provenance",
        )));
    }
    let replayed = replay(base, &transformed.provenance[k..])?;
    if &replayed == transformed {
        Ok(())
    } else {
        Err(TransformError::ReplayUnsupported(String::from(
            "replay does not reproduce the transformed handle",
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::handle;
    use crate::seq::{GeneratorSpec, PointSeq};
    use crate::space::{OmegaAlgebra, SpaceId};
    use alloc::vec;

    fn axis(x: Rational) -> Point {
        Point::Square { x, y: Rational::zero() }
    }

    fn materialized(space: SpaceId, ms: Vec<FiniteSignedMeasure>) -> SequenceHandle {
        SequenceHandle {
            space,
            index_origin: 0,
            source: HandleSource::Materialized(ms),
            oracle: None,
            l_limit: None,
            provenance: Vec::new(),
        }
    }

    #[test]
    fn normalize_scales_and_certifies() {
        let m = FiniteSignedMeasure::from_atoms([
            (Point::Nat(0), rat(1, 3)),
            (Point::Nat(1), rat(-1, 3)),
        ]);
        let h = materialized(SpaceId::Omega(OmegaAlgebra::Full), vec![m]);
        let out = normalize(&h, &rat(1, 2), 8).unwrap();
        let v = out.at(0).unwrap();
        assert_eq!(v.norm(), Rational::one());
        assert_eq!(v.coefficient(&Point::Nat(0)), rat(1, 2));
        let Certificate::Normalize { rows } = &out.provenance[0].certificate else { panic!() };
        assert_eq!(rows, &vec![(0, rat(2, 3))]);
    }

    #[test]
    fn normalize_guards_small_norms_and_passes_unit_inputs() {
        let m = FiniteSignedMeasure::from_atoms([(Point::Nat(0), rat(1, 3))]);
        let h = materialized(SpaceId::Omega(OmegaAlgebra::Full), vec![m]);
        assert!(matches!(
            normalize(&h, &rat(1, 2), 8),
            Err(TransformError::NormTooSmall { .. })
        ));
        // an already-normalized generator handle passes through with its
        // lazy source intact
        let g = handle(GeneratorSpec::Square1).unwrap();
        let out = normalize(&g, &rat(1, 2), 8).unwrap();
        assert!(matches!(out.source, HandleSource::Generator(_)));
        assert_eq!(out.oracle, g.oracle);
    }

    #[test]
    fn normalize_reproduces_the_averaging_family() {
        // raw averaged differences have norms certified above ½ and
        // normalize to the generator's measures
        let raws: Vec<FiniteSignedMeasure> =
            (1..=6).map(crate::generators::uds_raw).collect();
        let h = materialized(SpaceId::Cantor, raws);
        let out = normalize(&h, &rat(1, 2), 8).unwrap();
        let g = handle(GeneratorSpec::Uds).unwrap();
        for n in 0..6u64 {
            assert_eq!(out.at(n).unwrap(), g.at(n + 1).unwrap());
        }
    }

    fn geometric_demo(levels: u64, count: u64) -> SequenceHandle {
        // index n carries atom pairs ±2^{−k−2} at fresh even/odd twins,
        // aligned with the pairing algebra
        let ms = (0..count)
            .map(|n| {
                FiniteSignedMeasure::from_atoms((0..levels).flat_map(move |k| {
                    let base = 2 * (levels * n + k);
                    let w = crate::rational::pow2_inv(k + 2);
                    [
                        (Point::Nat(base), w.clone()),
                        (Point::Nat(base + 1), -w),
                    ]
                }))
            })
            .collect();
        materialized(SpaceId::Omega(OmegaAlgebra::Pairing), ms)
    }

    #[test]
    fn truncate_keeps_largest_pairs_and_certifies_tails() {
        let h = geometric_demo(12, 5);
        let out = truncate_cs_to_fs(&h, &TruncationKeep::LargestPerIndex { count: 4 }, 4).unwrap();
        let Certificate::Truncate { rows } = &out.provenance[0].certificate else { panic!() };
        // at position p (source index p) we keep 4(p+1) atoms = 2(p+1) pairs:
        // exact tail 2^{−2(p+1)} − 2^{−12}, kept norm 1 − 2^{−2(p+1)} + ...
        for (pos, (n, tail, kept)) in rows.iter().enumerate() {
            assert_eq!(*n, pos as u64);
            let full = Rational::one() - crate::rational::pow2_inv(12);
            let expected_kept: Rational =
                Rational::one() - crate::rational::pow2_inv(2 * (pos as u64 + 1));
            assert_eq!(kept, &expected_kept);
            assert_eq!(tail, &(full - expected_kept));
            assert!(tail < &Rational::new(1.into(), (pos as u64 + 1).into()));
        }
        for n in 0..4u64 {
            assert_eq!(out.at(n).unwrap().norm(), Rational::one());
        }
        // the displayed estimate holds for the canonical family of the space
        let family = crate::functional::canonical_family(&h.space);
        truncate_estimate_check(&h, &out, &family).unwrap();
    }

    #[test]
    fn truncate_greedy_keeps_the_least_sufficient_prefix() {
        let g = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = truncate_cs_to_fs(&g, &TruncationKeep::GreedyLeast, 6).unwrap();
        let Certificate::Truncate { rows } = &out.provenance[0].certificate else { panic!() };
        // position 0 has the vacuous bound 1, so one atom (tail ½) suffices;
        // from position 1 on the bound forces the whole two-atom support
        assert_eq!(rows[0], (0, rat(1, 2), rat(1, 2)));
        assert_eq!(out.at(0).unwrap(), FiniteSignedMeasure::dirac(Point::Nat(0)));
        for (pos, (n, tail, kept)) in rows.iter().enumerate().skip(1) {
            assert_eq!(*n, pos as u64);
            assert!(tail.is_zero());
            assert!(kept.is_one());
            assert_eq!(out.at(pos as u64).unwrap(), g.at(pos as u64).unwrap());
        }
    }

    #[test]
    fn extract_identity_for_convergent_oracles() {
        let g = handle(GeneratorSpec::Square3 { alpha: rat(1, 3) }).unwrap();
        let out = extract_pointwise_convergent(&g, 16).unwrap();
        assert!(matches!(out.source, HandleSource::Generator(_)));
        assert_eq!(last_extract_exact(&out), Some(true));
        let zero = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = extract_pointwise_convergent(&zero, 16).unwrap();
        assert!(matches!(out.source, HandleSource::Generator(_)));
        assert_eq!(last_extract_exact(&out), Some(true));
    }

    #[test]
    fn extract_takes_even_indices_for_the_two_speed_family() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        let out = extract_pointwise_convergent(&g, 10).unwrap();
        let Certificate::Extract { picks, exact } = &out.provenance[0].certificate else {
            panic!()
        };
        assert!(*exact);
        assert_eq!(picks[..5], [0, 2, 4, 6, 8]);
        assert_eq!(out.oracle, Some(LimitOracle::Square1Evens));
        assert_eq!(out.l_limit, Some(rat(1, 2)));
        // the coefficient at (1,0) is constantly zero along the subsequence
        for n in 0..10u64 {
            assert!(out.at(n).unwrap().coefficient(&axis(Rational::one())).is_zero());
        }
    }

    #[test]
    fn extract_greedy_flags_estimated_without_oracle() {
        let ms: Vec<FiniteSignedMeasure> = (0..12u64)
            .map(|n| handle(GeneratorSpec::Square1).unwrap().at(n).unwrap())
            .collect();
        let h = materialized(SpaceId::UnitSquare, ms);
        let out = extract_pointwise_convergent(&h, 8).unwrap();
        let Certificate::Extract { picks, exact } = &out.provenance[0].certificate else {
            panic!()
        };
        assert!(!*exact);
        assert!(picks.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn off_limit_restriction_on_disjoint_pairs_is_identity() {
        let g = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = restrict_renormalize_off_limit(&g, 12).unwrap();
        let Certificate::OffL { rows } = &out.provenance[0].certificate else { panic!() };
        assert_eq!(rows.len(), 12);
        for (k, (n, removed, alpha)) in rows.iter().enumerate() {
            assert_eq!(*n, k as u64);
            assert!(removed.is_zero());
            assert!(alpha.is_one());
        }
        for k in 0..12u64 {
            assert_eq!(out.at(k).unwrap(), g.at(k).unwrap());
        }
    }

    #[test]
    fn off_limit_restriction_traces_the_geometric_family() {
        let g = handle(GeneratorSpec::Square3 { alpha: rat(1, 3) }).unwrap();
        let out = restrict_renormalize_off_limit(&g, 6).unwrap();
        let Certificate::OffL { rows } = &out.provenance[0].certificate else { panic!() };
        let picks: Vec<u64> = rows.iter().map(|r| r.0).collect();
        let removed: Vec<Rational> = rows.iter().map(|r| r.1.clone()).collect();
        let alphas: Vec<Rational> = rows.iter().map(|r| r.2.clone()).collect();
        assert_eq!(picks, vec![0, 1, 2, 3, 5, 7]);
        assert_eq!(
            removed,
            vec![
                Rational::zero(),
                rat(1, 4),
                rat(5, 24),
                rat(3, 16),
                Rational::zero(),
                Rational::zero(),
            ]
        );
        assert_eq!(
            alphas,
            vec![
                Rational::one(),
                rat(4, 3),
                rat(24, 19),
                rat(16, 13),
                Rational::one(),
                Rational::one(),
            ]
        );
        // scalars satisfy 1 ≤ α_k < 1 + 1/k, strict above 1 iff mass removed
        for (k, (_, removed, alpha)) in rows.iter().enumerate() {
            let k = k as u64 + 1;
            let cap = Rational::one() + Rational::new(1.into(), k.into());
            assert!(alpha >= &Rational::one() && alpha < &cap);
            assert_eq!(alpha > &Rational::one(), !removed.is_zero());
            // displayed distance estimate: ∥ν_k − μ_{n_k}∥ ≤ 1/k + 1/(k+1)
        }
        // pairwise intersections lie inside the limit set
        let oracle = out.oracle.clone().unwrap();
        for i in 0..6u64 {
            for j in i + 1..6u64 {
                for p in out.at(i).unwrap().support_intersection(&out.at(j).unwrap()) {
                    assert!(oracle.in_limit_set(&p));
                }
            }
        }
    }

    #[test]
    fn off_limit_restriction_distance_estimate() {
        let g = handle(GeneratorSpec::Square3 { alpha: rat(1, 3) }).unwrap();
        let out = restrict_renormalize_off_limit(&g, 8).unwrap();
        let Certificate::OffL { rows } = &out.provenance[0].certificate else { panic!() };
        for (k, (n, _, _)) in rows.iter().enumerate() {
            let nu = out.at(k as u64).unwrap();
            let mu = g.at(*n).unwrap();
            let dist =
                FiniteSignedMeasure::combine(&Rational::one(), &nu, &-Rational::one(), &mu)
                    .norm();
            let k = k as u64 + 1;
            let allowance = Rational::new(1.into(), k.into())
                + Rational::new(1.into(), (k + 1).into());
            assert!(dist <= allowance, "k = {k}: {dist} > {allowance}");
        }
    }

    #[test]
    fn off_limit_restriction_requires_convergence() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        assert!(matches!(
            restrict_renormalize_off_limit(&g, 8),
            Err(TransformError::OracleOscillates)
        ));
        let bare = materialized(SpaceId::UnitSquare, vec![FiniteSignedMeasure::dirac(axis(
            Rational::zero(),
        ))]);
        assert!(matches!(
            restrict_renormalize_off_limit(&bare, 8),
            Err(TransformError::OracleRequired)
        ));
    }

    #[test]
    fn restrict_to_limit_is_identity_for_full_mass() {
        let g = handle(GeneratorSpec::Square4).unwrap();
        let out = restrict_to_limit(&g, 8).unwrap();
        let Certificate::RestrictL { rows } = &out.provenance[0].certificate else { panic!() };
        for (k, (n, off, alpha)) in rows.iter().enumerate() {
            assert_eq!(*n, k as u64);
            assert!(off.is_zero());
            assert!(alpha.is_one());
        }
        for k in 0..8u64 {
            assert_eq!(out.at(k).unwrap(), g.at(k).unwrap());
        }
        assert_eq!(out.l_limit, Some(Rational::one()));
    }

    #[test]
    fn restrict_to_limit_rejects_partial_mass() {
        let g = handle(GeneratorSpec::Square3 { alpha: rat(1, 3) }).unwrap();
        assert!(matches!(
            restrict_to_limit(&g, 8),
            Err(TransformError::LimitMassNotOne { have: Some(v) }) if v == rat(1, 3)
        ));
    }

    #[test]
    fn restrict_to_limit_identity_on_limit_supported_input() {
        let x = axis(rat(1, 2));
        let ms: Vec<FiniteSignedMeasure> =
            (0..6).map(|_| FiniteSignedMeasure::dirac(x.clone())).collect();
        let mut h = materialized(SpaceId::UnitSquare, ms);
        h.oracle = Some(LimitOracle::SinglePoint { at: x.clone(), value: Rational::one() });
        h.l_limit = Some(Rational::one());
        let out = restrict_to_limit(&h, 6).unwrap();
        for k in 0..6u64 {
            assert_eq!(out.at(k).unwrap(), h.at(k).unwrap());
        }
    }

    #[test]
    fn difference_normalize_on_disjoint_pairs() {
        let g = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = difference_normalize(&g, &Rational::one(), 8).unwrap();
        let Certificate::Difference { rows, .. } = &out.provenance[0].certificate else {
            panic!()
        };
        for (a, b, norm) in rows {
            assert_eq!(*b, *a + 1);
            assert_eq!(norm, &rat(2, 1));
        }
        // θ_n = ¼(δ_{4n} − δ_{4n+1} − δ_{4n+2} + δ_{4n+3})
        for n in 0..4u64 {
            let t = out.at(n).unwrap();
            assert_eq!(t.coefficient(&Point::Nat(4 * n)), rat(1, 4));
            assert_eq!(t.coefficient(&Point::Nat(4 * n + 1)), rat(-1, 4));
            assert_eq!(t.coefficient(&Point::Nat(4 * n + 2)), rat(-1, 4));
            assert_eq!(t.coefficient(&Point::Nat(4 * n + 3)), rat(1, 4));
        }
        assert_eq!(out.oracle, Some(LimitOracle::Zero));
    }

    #[test]
    fn difference_normalize_rejects_degenerate_pairs() {
        let m = FiniteSignedMeasure::dirac(Point::Nat(0));
        let h = materialized(SpaceId::Omega(OmegaAlgebra::Full), vec![m.clone(), m]);
        assert!(matches!(
            difference_normalize(&h, &rat(1, 2), 4),
            Err(TransformError::DifferenceTooSmall { norm, .. }) if norm.is_zero()
        ));
    }

    #[test]
    fn disjointify_short_circuits_on_empty_limit_set() {
        let g = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = disjointify(&g, 16).unwrap();
        let Certificate::Disjointify { alpha_limit, beta, stages, disjoint_verified } =
            &out.provenance[0].certificate
        else {
            panic!()
        };
        assert!(alpha_limit.is_zero());
        assert!(beta.is_none());
        assert!(disjoint_verified);
        assert_eq!(stages.len(), 2); // extraction + final off-limit restriction
        let ms: Vec<_> = (0..16u64).map(|n| out.at(n).unwrap()).collect();
        for i in 0..ms.len() {
            assert_eq!(ms[i].norm(), Rational::one());
            for j in i + 1..ms.len() {
                assert!(ms[i].support_disjoint(&ms[j]));
            }
        }
    }

    #[test]
    fn disjointify_two_speed_family() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        let out = disjointify(&g, 30).unwrap();
        let Certificate::Disjointify { alpha_limit, beta, disjoint_verified, .. } =
            &out.provenance[0].certificate
        else {
            panic!()
        };
        assert_eq!(alpha_limit, &rat(1, 2));
        assert_eq!(beta, &Some(rat(1, 2)));
        assert!(disjoint_verified);
        let ms: Vec<_> = out.indices(30).map(|n| out.at(n).unwrap()).collect();
        assert!(ms.len() >= 30);
        for i in 0..ms.len() {
            assert_eq!(ms[i].norm(), Rational::one());
            for j in i + 1..ms.len() {
                assert!(ms[i].support_disjoint(&ms[j]));
            }
        }
        // the shared accumulation points are gone from every emitted support
        for m in &ms {
            assert!(m.coefficient(&axis(Rational::zero())).is_zero());
            assert!(m.coefficient(&axis(rat(1, 2))).is_zero());
            assert!(m.coefficient(&axis(Rational::one())).is_zero());
        }
    }

    #[test]
    fn disjointify_geometric_family() {
        let g = handle(GeneratorSpec::Square3 { alpha: rat(1, 3) }).unwrap();
        let out = disjointify(&g, 24).unwrap();
        let Certificate::Disjointify { alpha_limit, beta, disjoint_verified, .. } =
            &out.provenance[0].certificate
        else {
            panic!()
        };
        assert_eq!(alpha_limit, &rat(1, 3));
        assert_eq!(beta, &Some(rat(2, 3)));
        assert!(disjoint_verified);
        let ms: Vec<_> = out.indices(24).map(|n| out.at(n).unwrap()).collect();
        assert!(ms.len() >= 20);
        for i in 0..ms.len() {
            assert_eq!(ms[i].norm(), Rational::one());
            for j in i + 1..ms.len() {
                assert!(ms[i].support_disjoint(&ms[j]));
            }
        }
    }

    #[test]
    fn disjointify_full_mass_family() {
        let g = handle(GeneratorSpec::Square4).unwrap();
        let out = disjointify(&g, 4).unwrap();
        let Certificate::Disjointify { alpha_limit, beta, disjoint_verified, .. } =
            &out.provenance[0].certificate
        else {
            panic!()
        };
        assert!(alpha_limit.is_one());
        assert_eq!(beta, &Some(rat(1, 4)));
        assert!(disjoint_verified);
        let ms: Vec<_> = out.indices(8).map(|n| out.at(n).unwrap()).collect();
        assert!(ms.len() >= 3);
        for i in 0..ms.len() {
            assert_eq!(ms[i].norm(), Rational::one());
            for j in i + 1..ms.len() {
                assert!(ms[i].support_disjoint(&ms[j]));
            }
        }
    }

    #[test]
    fn stabilize_exact_on_constant_vectors() {
        let g = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = stabilize_coefficients(&g, &rat(1, 64), 16).unwrap();
        let Certificate::Stabilize { alpha, exact, .. } = &out.provenance[0].certificate else {
            panic!()
        };
        assert!(*exact);
        assert_eq!(alpha, &vec![rat(1, 2), rat(-1, 2)]);
    }

    #[test]
    fn stabilize_even_subsequence_vector() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        let evens = extract_pointwise_convergent(&g, 16).unwrap();
        let out = stabilize_coefficients(&evens, &rat(1, 64), 16).unwrap();
        let Certificate::Stabilize { alpha, exact, .. } = &out.provenance.last().unwrap().certificate
        else {
            panic!()
        };
        assert!(*exact);
        // canonical point order: (0,0), (0,1/(n+1)), (½,0), (½,1/(n+1))
        assert_eq!(alpha, &vec![rat(1, 4), rat(-1, 4), rat(1, 4), rat(-1, 4)]);
        let positive: Rational =
            alpha.iter().filter(|c| c > &&Rational::zero()).cloned().sum();
        assert_eq!(positive, rat(1, 2));
    }

    #[test]
    fn stabilize_rejects_varying_support_sizes() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        assert!(matches!(
            stabilize_coefficients(&g, &rat(1, 64), 16),
            Err(TransformError::SupportSizeMismatch { .. })
        ));
    }

    #[test]
    fn stabilize_grid_path_on_wobbling_coefficients() {
        // coefficients (½+w, −½+w) with w = 1/(n+40): norm stays exactly 1,
        // no two vectors agree, but every vector grid-rounds to (½, −½)
        let ms: Vec<FiniteSignedMeasure> = (0..12u64)
            .map(|n| {
                let w = Rational::new(1.into(), (n + 40).into());
                FiniteSignedMeasure::from_atoms([
                    (Point::Nat(2 * n), rat(1, 2) + &w),
                    (Point::Nat(2 * n + 1), rat(-1, 2) + w),
                ])
            })
            .collect();
        let h = materialized(SpaceId::Omega(OmegaAlgebra::Full), ms);
        let out = stabilize_coefficients(&h, &rat(1, 16), 12).unwrap();
        let Certificate::Stabilize { alpha, exact, .. } = &out.provenance[0].certificate else {
            panic!()
        };
        assert!(!*exact);
        assert_eq!(alpha, &vec![rat(1, 2), rat(-1, 2)]);
    }

    fn three_atom_demo(count: u64) -> SequenceHandle {
        // third coefficient 1/(n+4) (strictly the smallest atom at every
        // index), the rest split evenly with opposite signs
        let ms = (0..count)
            .map(|n| {
                let c = Rational::new(1.into(), (n + 4).into());
                let half = (Rational::one() - &c) / crate::rational::nat(2);
                FiniteSignedMeasure::from_atoms([
                    (Point::Nat(3 * n), half.clone()),
                    (Point::Nat(3 * n + 1), -half),
                    (Point::Nat(3 * n + 2), c),
                ])
            })
            .collect();
        materialized(SpaceId::Omega(OmegaAlgebra::Full), ms)
    }

    #[test]
    fn drop_small_atom_reduces_support_and_renormalizes() {
        let h = three_atom_demo(10);
        let out = drop_small_atom(&h, &Rational::one(), 10).unwrap();
        let Certificate::DropAtom { rows } = &out.provenance[0].certificate else { panic!() };
        for (pos, (n, removed, bound)) in rows.iter().enumerate() {
            assert_eq!(*n, pos as u64);
            assert_eq!(removed, &Rational::new(1.into(), (pos as u64 + 4).into()));
            assert_eq!(bound, &Rational::new(1.into(), (pos as u64 + 1).into()));
        }
        for n in 0..10u64 {
            let m = out.at(n).unwrap();
            assert_eq!(m.support_size(), 2);
            assert_eq!(m.norm(), Rational::one());
            // scaling factor 1/(1 − c) recovers the balanced halves exactly
            assert_eq!(m.coefficient(&Point::Nat(3 * n)), rat(1, 2));
        }
    }

    #[test]
    fn drop_small_atom_enforces_the_bound() {
        let h = three_atom_demo(4);
        assert!(matches!(
            drop_small_atom(&h, &rat(1, 4), 4),
            Err(TransformError::BoundViolated { index: 0, .. })
        ));
    }

    #[test]
    fn pair_reduce_picks_least_signed_atoms() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        let evens = extract_pointwise_convergent(&g, 12).unwrap();
        let out = pair_reduce(&evens, &rat(1, 4), 12).unwrap();
        for k in 0..12u64 {
            let m = out.at(k).unwrap();
            let u = Rational::new(1.into(), (2 * k + 1).into());
            assert_eq!(m.coefficient(&axis(Rational::zero())), rat(1, 2));
            assert_eq!(m.coefficient(&Point::Square { x: Rational::zero(), y: u }), rat(-1, 2));
            assert_eq!(m.norm(), Rational::one());
        }
        // identity shape on two-atom inputs
        let s = handle(GeneratorSpec::PairingHalves).unwrap();
        let out = pair_reduce(&s, &rat(1, 2), 8).unwrap();
        for k in 0..8u64 {
            assert_eq!(out.at(k).unwrap(), s.at(k).unwrap());
        }
    }

    #[test]
    fn pair_reduce_enforces_magnitude_floor() {
        let h = three_atom_demo(6);
        assert!(matches!(
            pair_reduce(&h, &rat(1, 4), 6),
            Err(TransformError::MagnitudeTooSmall { .. })
        ));
    }

    #[test]
    fn concentrate_with_bump_erases_far_columns() {
        let g = handle(GeneratorSpec::Square1).unwrap();
        let bump = TestFunctional::Bump {
            cx: Rational::zero(),
            cy: Rational::zero(),
            r: rat(1, 8),
        };
        let out = concentrate_at_isolated(&g, &axis(Rational::zero()), &bump, 10).unwrap();
        let Certificate::Concentrate { rows } = &out.provenance[0].certificate else { panic!() };
        // the limit magnitude at the origin is ¼; every picked index carries
        // more than ⅛ there
        for (_, mag) in rows {
            assert!(mag > &rat(1, 8));
        }
        for k in 0..rows.len() as u64 {
            let m = out.at(k).unwrap();
            assert_eq!(m.norm(), Rational::one());
            for (p, _) in m.atoms() {
                let Point::Square { x, .. } = p else { panic!() };
                assert!(x.is_zero(), "support must stay in the bump box");
            }
        }
    }

    #[test]
    fn concentrate_with_unit_weight_is_subsequence_identity() {
        // the limit magnitude at (0,0) is ½; the coefficient there is
        // (1−c_n)/2 > ¼ exactly when n ≥ 1, so index 0 is skipped
        let g = handle(GeneratorSpec::TripleWithVanishingAtom {
            xs: PointSeq::SquareVertical { x: Rational::zero() },
            x: axis(Rational::zero()),
            dust: PointSeq::SquareVertical { x: Rational::one() },
        })
        .unwrap();
        let one = TestFunctional::Const(Rational::one());
        let out = concentrate_at_isolated(&g, &axis(Rational::zero()), &one, 10).unwrap();
        for k in 0..10u64 {
            assert_eq!(out.at(k).unwrap(), g.at(k + 1).unwrap());
        }
    }

    #[test]
    fn concentrate_requires_nonzero_limit() {
        let g = handle(GeneratorSpec::PairingHalves).unwrap();
        let one = TestFunctional::Const(Rational::one());
        assert!(matches!(
            concentrate_at_isolated(&g, &Point::Nat(0), &one, 8),
            Err(TransformError::NotCertifiablyPositive { .. })
        ));
    }

    #[test]
    fn provenance_replays_bit_exactly() {
        let g = handle(GeneratorSpec::Square3 { alpha: rat(1, 3) }).unwrap();
        let out = disjointify(&g, 12).unwrap();
        verify_provenance(&g, &out).unwrap();
        let g1 = handle(GeneratorSpec::Square1).unwrap();
        let chained = pair_reduce(
            &stabilize_coefficients(
                &extract_pointwise_convergent(&g1, 12).unwrap(),
                &rat(1, 64),
                12,
            )
            .unwrap(),
            &rat(1, 4),
            12,
        )
        .unwrap();
        verify_provenance(&g1, &chained).unwrap();
        let conc = concentrate_at_isolated(
            &g1,
            &axis(Rational::zero()),
            &TestFunctional::Bump { cx: Rational::zero(), cy: Rational::zero(), r: rat(1, 8) },
            8,
        )
        .unwrap();
        verify_provenance(&g1, &conc).unwrap();
    }

    #[test]
    fn pair_demo_with_vanishing_atom_feeds_drop() {
        let g = handle(GeneratorSpec::TripleWithVanishingAtom {
            xs: PointSeq::SquareVertical { x: Rational::zero() },
            x: axis(Rational::zero()),
            dust: PointSeq::SquareVertical { x: Rational::one() },
        })
        .unwrap();
        let out = drop_small_atom(&g, &Rational::one(), 12).unwrap();
        for n in 0..12u64 {
            assert_eq!(out.at(n).unwrap().norm(), Rational::one());
        }
        // from index 2 on the vanishing third atom is strictly the smallest,
        // so dropping it recovers the balanced pair exactly
        for n in 2..12u64 {
            let m = out.at(n).unwrap();
            assert_eq!(m.support_size(), 2);
            assert_eq!(m.coefficient(&axis(Rational::zero())), rat(-1, 2));
        }
        // metadata survives: the dropped magnitudes vanish in the limit
        assert_eq!(out.oracle, g.oracle);
        assert_eq!(out.l_limit, g.l_limit);
    }
}
