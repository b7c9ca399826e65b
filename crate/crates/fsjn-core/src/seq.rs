//! Sequence handles: lazily generated or materialized sequences of finitely
//! supported measures, together with their exact pointwise-limit oracles and
//! the provenance/certificate records attached by transforms.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Zero};

use crate::measure::FiniteSignedMeasure;
use crate::point::{CantorPoint, Point};
use crate::rational::Rational;
use crate::space::SpaceId;

/// Exact pointwise limit information at a single point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleValue {
    /// `lim_n μ_n({x})` exists and equals this value.
    Limit(Rational),
    /// The limit does not exist; closed-form liminf/limsup of `|μ_n({x})|`.
    Oscillation {
        /// `liminf_n |μ_n({x})|`.
        liminf_abs: Rational,
        /// `limsup_n |μ_n({x})|`.
        limsup_abs: Rational,
    },
}

impl OracleValue {
    /// The exact limit, when it exists.
    pub fn limit(&self) -> Option<&Rational> {
        match self {
            OracleValue::Limit(v) => Some(v),
            OracleValue::Oscillation { .. } => None,
        }
    }
}

/// A closed-form limit oracle: for every point of the space, the exact limit
/// behaviour of the atom coefficients along the sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LimitOracle {
    /// Every coefficient sequence tends to 0.
    Zero,
    /// Limit `value` at the single point `at`; 0 everywhere else.
    SinglePoint {
        /// The one point with a nonzero limit.
        at: Point,
        /// Its limit value.
        value: Rational,
    },
    /// The two-accumulation-speed square family: limit ¼ at the origin,
    /// oscillation between ⅛ and ¼ at (½,0), between 0 and ⅛ at (1,0).
    Square1,
    /// The even-index subsequence of the same family: limits ¼ at the origin
    /// and at (½,0).
    Square1Evens,
    /// Rolling single-pair square family: oscillation between 0 and ½ at
    /// every axis point (q,0), limit 0 elsewhere.
    Square2,
    /// Geometric axis family with parameter `alpha`: limit `(1−α)/2^(k+2)` at
    /// the k-th enumerated rational on the axis.
    Square3 {
        /// The weight parameter in (0,1).
        alpha: Rational,
    },
    /// Dyadic refinement family: limit ¼ at the origin, `1/2^(2q+1)` at each
    /// dyadic `p/2^q` (lowest terms, q ≥ 1) on the axis.
    Square4,
}

impl LimitOracle {
    /// The oracle's value at `p`.
    pub fn eval(&self, p: &Point) -> OracleValue {
        use crate::rational::{pow2_inv, rat};
        let zero = || OracleValue::Limit(Rational::zero());
        match self {
            LimitOracle::Zero => zero(),
            LimitOracle::SinglePoint { at, value } => {
                if p == at {
                    OracleValue::Limit(value.clone())
                } else {
                    zero()
                }
            }
            LimitOracle::Square1 => match p {
                Point::Square { x, y } if y.is_zero() && x.is_zero() => {
                    OracleValue::Limit(rat(1, 4))
                }
                Point::Square { x, y } if y.is_zero() && *x == rat(1, 2) => {
                    OracleValue::Oscillation { liminf_abs: rat(1, 8), limsup_abs: rat(1, 4) }
                }
                Point::Square { x, y } if y.is_zero() && x.is_one() => {
                    OracleValue::Oscillation { liminf_abs: Rational::zero(), limsup_abs: rat(1, 8) }
                }
                _ => zero(),
            },
            LimitOracle::Square1Evens => match p {
                Point::Square { x, y }
                    if y.is_zero() && (x.is_zero() || *x == rat(1, 2)) =>
                {
                    OracleValue::Limit(rat(1, 4))
                }
                _ => zero(),
            },
            LimitOracle::Square2 => match p {
                Point::Square { y, .. } if y.is_zero() => OracleValue::Oscillation {
                    liminf_abs: Rational::zero(),
                    limsup_abs: rat(1, 2),
                },
                _ => zero(),
            },
            LimitOracle::Square3 { alpha } => match p {
                Point::Square { x, y } if y.is_zero() => {
                    let k = crate::qenum::q_index(x).expect("axis points have x ∈ [0,1]");
                    OracleValue::Limit((Rational::one() - alpha) * pow2_inv(k + 2))
                }
                _ => zero(),
            },
            LimitOracle::Square4 => match p {
                Point::Square { x, y } if y.is_zero() => {
                    if x.is_zero() {
                        return OracleValue::Limit(rat(1, 4));
                    }
                    if *x >= Rational::one() {
                        return zero();
                    }
                    // dyadic p/2^q in lowest terms ⇔ denominator is a power of two
                    let den = x.denom();
                    let q = den.bits() - 1;
                    if (num_bigint::BigInt::one() << q) == *den {
                        OracleValue::Limit(pow2_inv(2 * q + 1))
                    } else {
                        zero()
                    }
                }
                _ => zero(),
            },
        }
    }

    /// Whether `p` carries a nonzero exact limit (membership in the limit set).
    pub fn in_limit_set(&self, p: &Point) -> bool {
        matches!(self.eval(p), OracleValue::Limit(v) if !v.is_zero())
    }

    /// True when every point has an exact limit (no oscillation anywhere);
    /// pipelines that sample limits refuse oracles where this fails.
    pub fn all_limits_exist(&self) -> bool {
        !matches!(self, LimitOracle::Square1 | LimitOracle::Square2)
    }
}

/// Deterministic point-sequence catalogs used as generator parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PointSeq {
    /// `n ↦ (x, 1/(n+1))` on the unit square.
    SquareVertical {
        /// The fixed abscissa.
        x: Rational,
    },
    /// `n ↦ n + offset` on the naturals.
    OmegaShift {
        /// The additive offset.
        offset: u64,
    },
    /// `n ↦` the n-th van der Corput binary word (bit-reversal order).
    CantorVdc,
}

impl PointSeq {
    /// The n-th point of the sequence.
    pub fn at(&self, n: u64) -> Point {
        match self {
            PointSeq::SquareVertical { x } => Point::Square {
                x: x.clone(),
                y: Rational::new(1.into(), (n + 1).into()),
            },
            PointSeq::OmegaShift { offset } => Point::Nat(n + offset),
            PointSeq::CantorVdc => Point::Word(vdc_word(n)),
        }
    }
}

/// The n-th van der Corput point: the binary digits of `n`, least significant
/// first, as a finite word with tail 0 (injective; words end in their top bit).
pub fn vdc_word(n: u64) -> CantorPoint {
    let mut bits = Vec::new();
    let mut k = n;
    while k > 0 {
        bits.push(k & 1 == 1);
        k >>= 1;
    }
    CantorPoint::new(bits, false)
}

/// A section of the collapse map from a doubled Cantor space back to Cantor
/// points (which copy each point lifts to).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SectionSpec {
    /// The identity section on the plain Cantor space.
    Identity,
    /// On a doubled space: lift to side 1 where doubled, side 0 elsewhere.
    PreferDoubledSide {
        /// The doubled points.
        doubled: Vec<CantorPoint>,
    },
}

/// The generator catalog: every lazily evaluable sequence family.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GeneratorSpec {
    /// `μ_n = ½(δ_{xs(n)} − δ_x)` for an injective sequence `xs → x`.
    ConvPair {
        /// The moving points.
        xs: PointSeq,
        /// Their limit.
        x: Point,
    },
    /// A constant-support-size-3 variant: `(1−c_n)·½(δ_{xs(n)} − δ_x) + c_n·δ_{dust(n)}`
    /// with `c_n = 1/(n+2)`.
    TripleWithVanishingAtom {
        /// The moving points.
        xs: PointSeq,
        /// Their limit.
        x: Point,
        /// The vanishing third atom's moving location.
        dust: PointSeq,
    },
    /// Two fixed accumulation columns with parity-dependent weights.
    Square1,
    /// One rolling half-pair per index, columns keyed by the rational enumeration.
    Square2,
    /// Geometric column weights `(1−α)/2^(k+2)` plus a climbing pair near (0,1).
    Square3 {
        /// The weight parameter in (0,1).
        alpha: Rational,
    },
    /// Dyadic refinement with an extra origin atom `c_n·δ_(0,0)`.
    Square4,
    /// `μ_n = ½(δ_{2n} − δ_{2n+1})` on the naturals with the pairing algebra.
    PairingHalves,
    /// `μ_n = Σ_{s,i} s(i)/(n2^n) δ_{(s,i)}` on the product space.
    Product,
    /// Level-n Cantor splitting `(1/2^{n+1}) Σ_s (δ_{s1^ω} − δ_{s0^ω})`.
    CantorLevels,
    /// Normalized differences of empirical averages of the van der Corput points.
    Uds,
    /// The Cantor splitting lifted through a section of a collapse map.
    Transport {
        /// Which section.
        section: SectionSpec,
    },
    /// `μ_n = ½(δ_{(n,1)} − δ_{(n,0)})` on the pair space.
    AdDuplicate,
}

/// Where a handle's measures come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HandleSource {
    /// Lazily evaluated from a generator formula.
    Generator(GeneratorSpec),
    /// An explicit finite prefix (indices `origin, origin+1, …`).
    Materialized(Vec<FiniteSignedMeasure>),
}

/// One recorded transform application with its verification certificate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformStep {
    /// Stable operation name.
    pub op: String,
    /// Rendered parameters, in a fixed order.
    pub params: Vec<(String, String)>,
    /// The exact certificate rows recorded while the transform ran.
    pub certificate: Certificate,
}

/// Exact certificates attached by transforms. Every row is re-checkable
/// against the input and output sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Certificate {
    /// Per-index pre-normalization norms (all > the guard threshold).
    Normalize {
        /// `(index, pre-normalization norm)`.
        rows: Vec<(u64, Rational)>,
    },
    /// Countable-to-finite truncation: per-index kept mass and tail bound.
    Truncate {
        /// `(index, truncated-away mass bound, kept norm before renormalizing)`.
        rows: Vec<(u64, Rational, Rational)>,
    },
    /// Pointwise-convergent subsequence extraction.
    Extract {
        /// The chosen source indices, ascending.
        picks: Vec<u64>,
        /// Whether limits are exact (oracle-backed) or greedy estimates.
        exact: bool,
    },
    /// Off-limit-set restriction: the greedy tail-mass witnesses.
    OffL {
        /// Per emitted k: `(source index n_k, removed mass, renormalization α_k)`.
        rows: Vec<(u64, Rational, Rational)>,
    },
    /// Restriction to the limit set under a mass-1 envelope.
    RestrictL {
        /// Per emitted k: `(source index n_k, off-L mass, renormalization α_k)`.
        rows: Vec<(u64, Rational, Rational)>,
    },
    /// Normalized pairwise differences.
    Difference {
        /// The certified positive lower bound β for the difference norms.
        beta: Rational,
        /// Per emitted n: `(even source index, odd source index, difference norm)`.
        rows: Vec<(u64, u64, Rational)>,
    },
    /// The composite disjointification pipeline.
    Disjointify {
        /// The limit of `∥·↾L∥` the case split ran on.
        alpha_limit: Rational,
        /// The β used for difference normalization (absent in the short-circuit case).
        beta: Option<Rational>,
        /// Stage summaries in execution order.
        stages: Vec<TransformStep>,
        /// Verified pairwise-disjointness of all emitted supports.
        disjoint_verified: bool,
    },
    /// Coefficient stabilization.
    Stabilize {
        /// The chosen subsequence indices.
        picks: Vec<u64>,
        /// The limit coefficient vector in canonical point-label order.
        alpha: Vec<Rational>,
        /// Exact (eventually constant) or grid-estimated.
        exact: bool,
    },
    /// Small-atom removal: per-index removed atom and certified bound.
    DropAtom {
        /// Per index: `(index, removed coefficient magnitude, bound)`.
        rows: Vec<(u64, Rational, Rational)>,
    },
    /// Reduction to one positive and one negative atom.
    PairReduce {
        /// Per index: `(index, kept positive point, kept negative point)` renderings.
        rows: Vec<(u64, String, String)>,
    },
    /// Concentration at an isolated point.
    Concentrate {
        /// Per emitted k: `(source index, |coefficient| at the point)`.
        rows: Vec<(u64, Rational)>,
    },
}

/// Errors from handle evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqError {
    /// Index below the handle's origin.
    BelowOrigin {
        /// Requested index.
        index: u64,
        /// The handle's origin.
        origin: u64,
    },
    /// Index beyond what can be materialized safely.
    BeyondLimit {
        /// Requested index.
        index: u64,
        /// First unavailable index.
        limit: u64,
    },
    /// A generator parameter is invalid.
    InvalidParameter(String),
}

impl fmt::Display for SeqError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqError::BelowOrigin { index, origin } => {
                write!(f, "index {index} is below the sequence origin {origin}")
            }
            SeqError::BeyondLimit { index, limit } => {
                write!(f, "index {index} is beyond the materialization limit {limit}")
            }
            SeqError::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

/// A sequence of norm-one finitely supported measures with exact metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceHandle {
    /// The space the measures live on.
    pub space: SpaceId,
    /// The first valid index.
    pub index_origin: u64,
    /// Lazily generated or materialized measures.
    pub source: HandleSource,
    /// Exact pointwise-limit oracle, when available.
    pub oracle: Option<LimitOracle>,
    /// Certified `lim_n ∥at(n)↾L∥` where `L` is the oracle's limit set.
    pub l_limit: Option<Rational>,
    /// Transform history with certificates.
    pub provenance: Vec<TransformStep>,
}

impl SequenceHandle {
    /// The measure at index `n`.
    pub fn at(&self, n: u64) -> Result<FiniteSignedMeasure, SeqError> {
        if n < self.index_origin {
            return Err(SeqError::BelowOrigin { index: n, origin: self.index_origin });
        }
        match &self.source {
            HandleSource::Generator(spec) => crate::generators::generate_at(spec, n),
            HandleSource::Materialized(ms) => {
                let i = (n - self.index_origin) as usize;
                ms.get(i).cloned().ok_or(SeqError::BeyondLimit {
                    index: n,
                    limit: self.index_origin + ms.len() as u64,
                })
            }
        }
    }

    /// First index that cannot be evaluated (origin + available count).
    pub fn limit_index(&self) -> u64 {
        match &self.source {
            HandleSource::Generator(spec) => {
                self.index_origin + crate::generators::safe_limit(spec)
            }
            HandleSource::Materialized(ms) => self.index_origin + ms.len() as u64,
        }
    }

    /// How many consecutive indices from the origin are available, capped.
    pub fn available(&self, cap: u64) -> u64 {
        (self.limit_index() - self.index_origin).min(cap)
    }

    /// All indices from the origin up to `min(horizon, available)` as a range.
    pub fn indices(&self, horizon: u64) -> impl Iterator<Item = u64> {
        let end = self.limit_index().min(self.index_origin.saturating_add(horizon));
        self.index_origin..end
    }

    /// Exact `∥at(n)↾L∥` for the oracle's limit set `L` (`None` without oracle).
    pub fn l_restriction_norm(&self, n: u64) -> Result<Option<Rational>, SeqError> {
        let Some(oracle) = &self.oracle else { return Ok(None) };
        let m = self.at(n)?;
        Ok(Some(m.restrict(|p| oracle.in_limit_set(p)).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use alloc::vec;

    #[test]
    fn oracle_square4_dyadics() {
        let o = LimitOracle::Square4;
        let at = |x: Rational| o.eval(&Point::Square { x, y: Rational::zero() });
        assert_eq!(at(Rational::zero()), OracleValue::Limit(rat(1, 4)));
        assert_eq!(at(rat(1, 2)), OracleValue::Limit(rat(1, 8)));
        assert_eq!(at(rat(1, 4)), OracleValue::Limit(rat(1, 32)));
        assert_eq!(at(rat(3, 4)), OracleValue::Limit(rat(1, 32)));
        assert_eq!(at(rat(1, 3)), OracleValue::Limit(Rational::zero()));
        assert_eq!(at(Rational::one()), OracleValue::Limit(Rational::zero()));
        let off = o.eval(&Point::Square { x: rat(1, 2), y: rat(1, 2) });
        assert_eq!(off, OracleValue::Limit(Rational::zero()));
    }

    #[test]
    fn oracle_square3_uses_the_enumeration() {
        let o = LimitOracle::Square3 { alpha: rat(1, 3) };
        // q_0 = 1, q_1 = 1/2, q_3 = 0
        let at = |x: Rational| o.eval(&Point::Square { x, y: Rational::zero() });
        assert_eq!(at(Rational::one()), OracleValue::Limit(rat(2, 3) * rat(1, 4)));
        assert_eq!(at(rat(1, 2)), OracleValue::Limit(rat(2, 3) * rat(1, 8)));
        assert_eq!(at(Rational::zero()), OracleValue::Limit(rat(2, 3) * rat(1, 32)));
    }

    #[test]
    fn vdc_words_are_canonical_and_injective() {
        let mut seen = vec![];
        for n in 0..64 {
            let w = vdc_word(n);
            assert!(!seen.contains(&w), "vdc collision at {n}");
            seen.push(w);
        }
        assert_eq!(vdc_word(0), CantorPoint::constant(false));
        assert_eq!(vdc_word(1), CantorPoint::new(vec![true], false));
        assert_eq!(vdc_word(2), CantorPoint::new(vec![false, true], false));
        assert_eq!(vdc_word(6), CantorPoint::new(vec![false, true, true], false));
    }

    #[test]
    fn all_limits_exist_flags_oscillating_oracles() {
        assert!(LimitOracle::Zero.all_limits_exist());
        assert!(LimitOracle::Square4.all_limits_exist());
        assert!(!LimitOracle::Square1.all_limits_exist());
        assert!(!LimitOracle::Square2.all_limits_exist());
        assert!(LimitOracle::Square1Evens.all_limits_exist());
    }
}
