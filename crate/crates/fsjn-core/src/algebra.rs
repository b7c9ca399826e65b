//! Boolean-algebra element descriptors over the naturals.
//!
//! Three families are supported:
//!
//! * **Power set**: any decidable predicate over `ω` (drawn from a fixed,
//!   serializable catalog).
//! * **Pairing algebra**: sets that eventually contain pairs `{2k, 2k+1}`
//!   whole. Represented as a base pair set (via `pair_mask`) toggled by a
//!   finite exception set; membership is `k ∈ A ⇔ (⌊k/2⌋ ∈ pairMask) XOR
//!   (k ∈ exceptions)`.
//! * **Density algebra**: a predicate together with a declared asymptotic
//!   density `d ∈ {0, 1}` and a convergence modulus `ε ↦ N(ε)`; the
//!   declaration is spot-verified, never trusted.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::rational::{nat, Rational};

/// A decidable subset of the naturals from a fixed catalog.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OmegaPredicate {
    /// The whole of `ω`.
    All,
    /// The empty set.
    None,
    /// The even numbers.
    Even,
    /// A finite explicit set.
    Finite(Vec<u64>),
    /// Complement of a finite explicit set.
    Cofinite(Vec<u64>),
    /// A pseudorandom set: `k ∈ A ⇔ mix64(seed ⊕ k·PHI) & 1 = 1`.
    Seeded { seed: u64 },
}

impl OmegaPredicate {
    /// Membership test.
    pub fn contains(&self, k: u64) -> bool {
        match self {
            OmegaPredicate::All => true,
            OmegaPredicate::None => false,
            OmegaPredicate::Even => k % 2 == 0,
            OmegaPredicate::Finite(v) => v.contains(&k),
            OmegaPredicate::Cofinite(v) => !v.contains(&k),
            OmegaPredicate::Seeded { seed } => seeded_bit(*seed, k),
        }
    }
}

/// One pseudorandom membership bit per `(seed, k)`, via the splitmix64 mixer.
pub fn seeded_bit(seed: u64, k: u64) -> bool {
    mix64(seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)) & 1 == 1
}

/// splitmix64 finalizer: the standard 64-bit avalanche mixer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The base pair set of a pairing-algebra element: which pairs `{2k, 2k+1}`
/// belong wholesale before exceptions are applied.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PairMask {
    /// No pairs.
    None,
    /// Every pair.
    All,
    /// Pairs with even index.
    EvenPairs,
    /// A finite explicit set of pair indices.
    Finite(Vec<u64>),
    /// All pair indices except a finite set.
    Cofinite(Vec<u64>),
    /// Pseudorandom pair selection from a seed.
    Seeded { seed: u64 },
}

impl PairMask {
    /// Whether pair `k` (covering `{2k, 2k+1}`) is in the base set.
    pub fn contains_pair(&self, k: u64) -> bool {
        match self {
            PairMask::None => false,
            PairMask::All => true,
            PairMask::EvenPairs => k % 2 == 0,
            PairMask::Finite(v) => v.contains(&k),
            PairMask::Cofinite(v) => !v.contains(&k),
            PairMask::Seeded { seed } => seeded_bit(*seed, k),
        }
    }
}

/// A named builtin predicate with known asymptotic density 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DensityPredicate {
    /// Positive perfect squares `{1, 4, 9, …}` (density 0).
    Squares,
    /// Powers of two `{1, 2, 4, 8, …}` (density 0).
    PowersOfTwo,
    /// Sparse blocks `⋃_i [4^i, 4^i + 2^i)` (density 0).
    Blocks,
    /// The arithmetic progression `{a·k + b : k ∈ ω}`; density 1 only if `a = 1`.
    Arithmetic { a: u64, b: u64 },
}

impl DensityPredicate {
    /// Membership test.
    pub fn contains(&self, k: u64) -> bool {
        match self {
            DensityPredicate::Squares => {
                if k == 0 {
                    return false;
                }
                let r = k.isqrt();
                r * r == k
            }
            DensityPredicate::PowersOfTwo => k.is_power_of_two(),
            DensityPredicate::Blocks => {
                let mut lo = 1u64; // 4^i
                let mut w = 1u64; // 2^i
                while lo <= k {
                    if k < lo + w {
                        return true;
                    }
                    match lo.checked_mul(4) {
                        Some(next) => lo = next,
                        None => return false,
                    }
                    w *= 2;
                }
                false
            }
            DensityPredicate::Arithmetic { a, b } => {
                if *a == 0 {
                    k == *b
                } else {
                    k >= *b && (k - b) % a == 0
                }
            }
        }
    }
}

/// A convergence modulus `ε ↦ N(ε)` for a density declaration, from a fixed
/// catalog of closed forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum DensityModulus {
    /// `N(ε) = ⌈1/ε²⌉ + 1` (fits counting functions `≤ √n`).
    InverseSquare,
    /// `N(ε) = ⌈9/ε²⌉ + 1` (fits counting functions `≤ 3√n`).
    NineInverseSquare,
    /// `N(ε) = ⌈(2/ε)·log2ceil(2/ε)⌉ + 4` (fits logarithmic counting).
    LogLinear,
    /// `N(ε) = ⌈c/ε⌉ + 1` (fits a cofinite deficit of size `c`).
    Linear { c: u64 },
}

impl DensityModulus {
    /// The threshold `N(ε)`.
    pub fn threshold(&self, eps: &Rational) -> u64 {
        use crate::rational::ceil_ratio;
        use num_traits::{One, ToPrimitive};
        assert!(eps > &Rational::zero(), "modulus threshold needs ε > 0");
        let inv = Rational::one() / eps;
        let big: num_bigint::BigInt = match self {
            DensityModulus::InverseSquare => ceil_ratio(&(&inv * &inv)) + 1,
            DensityModulus::NineInverseSquare => ceil_ratio(&(&inv * &inv * nat(9))) + 1,
            DensityModulus::LogLinear => {
                let two_inv = &inv * nat(2);
                let arg = ceil_ratio(&two_inv).to_u64().unwrap_or(u64::MAX);
                let log = 64 - arg.saturating_sub(1).leading_zeros() as u64; // ⌈log2 arg⌉
                ceil_ratio(&(two_inv * nat(log))) + 4
            }
            DensityModulus::Linear { c } => ceil_ratio(&(inv * nat(*c))) + 1,
        };
        big.to_u64().unwrap_or(u64::MAX)
    }
}

/// A Boolean-algebra element descriptor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum AlgebraDescriptor {
    /// An arbitrary decidable set in the full power-set algebra.
    PowerSet(OmegaPredicate),
    /// A pairing-algebra element: base pairs toggled by finitely many exceptions.
    Pairing { pair_mask: PairMask, exceptions: Vec<u64> },
    /// A density-algebra element with declared density and modulus.
    Density { predicate: DensityPredicate, d: u8, modulus: DensityModulus },
}

impl AlgebraDescriptor {
    /// Membership of `k` in the described set.
    pub fn contains(&self, k: u64) -> bool {
        match self {
            AlgebraDescriptor::PowerSet(p) => p.contains(k),
            AlgebraDescriptor::Pairing { pair_mask, exceptions } => {
                pair_mask.contains_pair(k / 2) ^ exceptions.contains(&k)
            }
            AlgebraDescriptor::Density { predicate, .. } => predicate.contains(k),
        }
    }

    /// For pairing elements: a bound `N` such that for every `n ≥ N` the pair
    /// `{2n, 2n+1}` lies inside or outside the set as a whole.
    ///
    /// Computed from the exceptions alone (conservatively): one more than the
    /// largest pair index touched by any exception, `0` when there are none.
    pub fn pair_bound(&self) -> Option<u64> {
        match self {
            AlgebraDescriptor::Pairing { exceptions, .. } => {
                Some(exceptions.iter().map(|e| e / 2 + 1).max().unwrap_or(0))
            }
            _ => None,
        }
    }
}

/// One row of an algebra-element verification report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraViolation {
    /// Human-readable description of the failed check.
    pub message: String,
    /// The witness index at which it failed.
    pub witness: u64,
}

/// Outcome of [`verify_algebra_element`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraReport {
    /// The horizon the checks ran to.
    pub horizon: u64,
    /// All detected violations (empty = verified at this horizon).
    pub violations: Vec<AlgebraViolation>,
    /// For density elements: the sampled densities `|A ∩ [0,n)|/n` at the
    /// modulus checkpoints `(ε, N(ε))` actually tested.
    pub density_samples: Vec<(Rational, u64, Rational)>,
}

impl AlgebraReport {
    /// True when no violation was found.
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that a descriptor's structural claims hold up to `horizon`.
///
/// * Pairing: beyond `pair_bound` every pair is whole (exact, and for
///   exception-free masks this is true by construction).
/// * Density: for `ε ∈ {1/4, 1/16}` and every `n` between `N(ε)` and the
///   horizon, the empirical density is within `ε` of the declared `d`.
/// * Power set: nothing to check beyond decidability; always passes.
pub fn verify_algebra_element(desc: &AlgebraDescriptor, horizon: u64) -> AlgebraReport {
    let mut report =
        AlgebraReport { horizon, violations: Vec::new(), density_samples: Vec::new() };
    match desc {
        AlgebraDescriptor::PowerSet(_) => {}
        AlgebraDescriptor::Pairing { .. } => {
            let bound = desc.pair_bound().expect("pairing element");
            for n in bound..bound.max(horizon) {
                if desc.contains(2 * n) != desc.contains(2 * n + 1) {
                    report.violations.push(AlgebraViolation {
                        message: String::from("split pair at or beyond the pair bound"),
                        witness: n,
                    });
                }
            }
        }
        AlgebraDescriptor::Density { predicate, d, modulus } => {
            if *d > 1 {
                report.violations.push(AlgebraViolation {
                    message: String::from("declared density must be 0 or 1"),
                    witness: u64::from(*d),
                });
                return report;
            }
            let d_rat = nat(u64::from(*d));
            for eps in [crate::rational::rat(1, 4), crate::rational::rat(1, 16)] {
                let start = modulus.threshold(&eps);
                if start > horizon {
                    report.violations.push(AlgebraViolation {
                        message: String::from("modulus threshold exceeds the verification horizon"),
                        witness: start,
                    });
                    continue;
                }
                let mut count: u64 = (0..start).filter(|&k| predicate.contains(k)).count() as u64;
                let mut worst: Option<(u64, Rational)> = None;
                for n in start..=horizon {
                    if n > start {
                        if predicate.contains(n - 1) {
                            count += 1;
                        }
                    }
                    if n == 0 {
                        continue;
                    }
                    let density = Rational::new(count.into(), n.into());
                    let dev = if density >= d_rat { &density - &d_rat } else { &d_rat - &density };
                    if worst.as_ref().map_or(true, |(_, w)| dev > *w) {
                        worst = Some((n, dev.clone()));
                    }
                    if dev > eps {
                        report.violations.push(AlgebraViolation {
                            message: String::from("empirical density exceeds declared modulus"),
                            witness: n,
                        });
                    }
                }
                let sample_at = start.max(1);
                let sample_count = (0..sample_at).filter(|&k| predicate.contains(k)).count() as u64;
                report.density_samples.push((
                    eps.clone(),
                    sample_at,
                    Rational::new(sample_count.into(), sample_at.into()),
                ));
            }
        }
    }
    report
}

/// The set `{k < horizon : k ∈ desc}` as a sorted set (test/report helper).
pub fn enumerate_below(desc: &AlgebraDescriptor, horizon: u64) -> BTreeSet<u64> {
    (0..horizon).filter(|&k| desc.contains(k)).collect()
}
