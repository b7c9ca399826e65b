//! The generator catalog: exact closed-form constructors for every sequence
//! family, their metadata (index origins, materialization limits, limit
//! oracles, limit-set mass data), and the closed-form rectangle evaluation
//! for the product family with its brute-force cross-check.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::functional::{IndexSet, SignSet};
use crate::measure::FiniteSignedMeasure;
use crate::point::{Point, SignVector};
use crate::qenum::q_at;
use crate::rational::{nat, pow2_inv, rat, Rational};
use crate::seq::{
    GeneratorSpec, HandleSource, LimitOracle, PointSeq, SectionSpec, SeqError, SequenceHandle,
};
use crate::space::{OmegaAlgebra, SpaceId};

/// The space a generator's measures live on.
pub fn space_of(spec: &GeneratorSpec) -> SpaceId {
    match spec {
        GeneratorSpec::ConvPair { .. }
        | GeneratorSpec::TripleWithVanishingAtom { .. }
        | GeneratorSpec::Square1
        | GeneratorSpec::Square2
        | GeneratorSpec::Square3 { .. }
        | GeneratorSpec::Square4 => SpaceId::UnitSquare,
        GeneratorSpec::PairingHalves => SpaceId::Omega(OmegaAlgebra::Pairing),
        GeneratorSpec::Product => SpaceId::Product,
        GeneratorSpec::CantorLevels | GeneratorSpec::Uds => SpaceId::Cantor,
        GeneratorSpec::Transport { section } => match section {
            SectionSpec::Identity => SpaceId::Cantor,
            SectionSpec::PreferDoubledSide { doubled } => {
                SpaceId::Doubled { doubled: doubled.clone() }
            }
        },
        GeneratorSpec::AdDuplicate => SpaceId::Pairs,
    }
}

/// The first valid index of the family (families whose formula divides by the
/// index start at 1).
pub fn index_origin(spec: &GeneratorSpec) -> u64 {
    match spec {
        GeneratorSpec::Square2 | GeneratorSpec::Product | GeneratorSpec::Uds => 1,
        _ => 0,
    }
}

/// How many consecutive indices may be materialized safely (support sizes of
/// some families grow exponentially; beyond these limits analyses fall back
/// to closed-form virtual evaluation).
pub fn safe_limit(spec: &GeneratorSpec) -> u64 {
    match spec {
        GeneratorSpec::Product => 14,
        GeneratorSpec::Uds => 12,
        GeneratorSpec::CantorLevels | GeneratorSpec::Transport { .. } => 16,
        GeneratorSpec::Square4 => 18,
        _ => 4096,
    }
}

/// Validates generator parameters (CLI usage errors surface here).
pub fn validate(spec: &GeneratorSpec) -> Result<(), SeqError> {
    match spec {
        GeneratorSpec::Square3 { alpha } => {
            if alpha <= &Rational::zero() || alpha >= &Rational::one() {
                return Err(SeqError::InvalidParameter(alloc::format!(
                    "alpha must lie strictly between 0 and 1, got {}",
                    crate::rational::format_rational(alpha)
                )));
            }
            Ok(())
        }
        GeneratorSpec::ConvPair { xs, x } | GeneratorSpec::TripleWithVanishingAtom { xs, x, .. } => {
            let space = space_of(spec);
            if !space.contains(x) {
                return Err(SeqError::InvalidParameter(alloc::format!(
                    "limit point {} is outside {}",
                    x.render(),
                    space.id_str()
                )));
            }
            // the moving points must actually converge to x in the space's sense
            match (xs, x) {
                (PointSeq::SquareVertical { x: col }, Point::Square { x: lx, y: ly }) => {
                    if col != lx || !ly.is_zero() {
                        return Err(SeqError::InvalidParameter(alloc::format!(
                            "vertical sequence at x = {} converges to ({}, 0), not to {}",
                            crate::rational::format_rational(col),
                            crate::rational::format_rational(col),
                            x.render()
                        )));
                    }
                    Ok(())
                }
                _ => Err(SeqError::InvalidParameter(alloc::string::String::from(
                    "unsupported moving-point sequence for this space",
                ))),
            }
        }
        _ => Ok(()),
    }
}

/// The exact limit oracle of the family, when one exists.
pub fn oracle(spec: &GeneratorSpec) -> Option<LimitOracle> {
    match spec {
        GeneratorSpec::ConvPair { x, .. } => Some(LimitOracle::SinglePoint {
            at: x.clone(),
            value: rat(-1, 2),
        }),
        GeneratorSpec::TripleWithVanishingAtom { x, .. } => Some(LimitOracle::SinglePoint {
            at: x.clone(),
            value: rat(-1, 2),
        }),
        GeneratorSpec::Square1 => Some(LimitOracle::Square1),
        GeneratorSpec::Square2 => Some(LimitOracle::Square2),
        GeneratorSpec::Square3 { alpha } => Some(LimitOracle::Square3 { alpha: alpha.clone() }),
        GeneratorSpec::Square4 => Some(LimitOracle::Square4),
        GeneratorSpec::PairingHalves
        | GeneratorSpec::Product
        | GeneratorSpec::CantorLevels
        | GeneratorSpec::Uds
        | GeneratorSpec::Transport { .. }
        | GeneratorSpec::AdDuplicate => Some(LimitOracle::Zero),
    }
}

/// Certified `lim_n ∥at(n)↾L∥` for the oracle's limit set `L`.
pub fn l_limit(spec: &GeneratorSpec) -> Option<Rational> {
    match spec {
        GeneratorSpec::ConvPair { .. } | GeneratorSpec::TripleWithVanishingAtom { .. } => {
            Some(rat(1, 2))
        }
        GeneratorSpec::Square1 => Some(rat(1, 4)),
        GeneratorSpec::Square2 => Some(Rational::zero()),
        GeneratorSpec::Square3 { alpha } => Some((Rational::one() - alpha) / nat(2)),
        GeneratorSpec::Square4 => Some(Rational::one()),
        _ => Some(Rational::zero()),
    }
}

/// Exact envelope: `|∥at(n)↾L∥ − l_limit| ≤ envelope(n)` for every valid `n`.
pub fn l_envelope(spec: &GeneratorSpec, n: u64) -> Rational {
    match spec {
        GeneratorSpec::TripleWithVanishingAtom { .. } => {
            // coefficient at the limit point is (1−c_n)/2 with c_n = 1/(n+2)
            Rational::new(1.into(), (2 * (n + 2)).into())
        }
        GeneratorSpec::Square2 => rat(1, 2), // a single rolling column of mass ½
        GeneratorSpec::Square3 { alpha } => {
            if n == 0 {
                alpha / nat(2)
            } else {
                (Rational::one() - alpha) * pow2_inv(n + 2)
            }
        }
        _ => Rational::zero(),
    }
}

/// The closed-form total limit-set mass `Σ_{x∈L} |lim μ_n({x})|`, when the
/// family provides a series formula.
pub fn l_mass_closed_form(spec: &GeneratorSpec) -> Option<Rational> {
    match spec {
        GeneratorSpec::ConvPair { .. } | GeneratorSpec::TripleWithVanishingAtom { .. } => {
            Some(rat(1, 2))
        }
        GeneratorSpec::Square1 => Some(rat(1, 4)),
        GeneratorSpec::Square2 => Some(Rational::zero()),
        GeneratorSpec::Square3 { alpha } => Some((Rational::one() - alpha) / nat(2)),
        GeneratorSpec::Square4 => Some(rat(1, 2)),
        _ => Some(Rational::zero()),
    }
}

/// A canonical pointwise-convergent subsequence for families whose raw oracle
/// oscillates but stabilizes along a fixed arithmetic subsequence:
/// `(index map n ↦ σ(n), the subsequence's exact oracle)`.
pub fn convergent_subsequence(spec: &GeneratorSpec) -> Option<(fn(u64) -> u64, LimitOracle)> {
    match spec {
        GeneratorSpec::Square1 => Some((|n| 2 * n, LimitOracle::Square1Evens)),
        _ => None,
    }
}

/// The `l_limit` of the canonical convergent subsequence (used when the
/// extraction swaps oracles).
pub fn subsequence_l_limit(spec: &GeneratorSpec) -> Option<Rational> {
    match spec {
        GeneratorSpec::Square1 => Some(rat(1, 2)),
        _ => None,
    }
}

/// Builds a fresh lazy handle for a generator, after validating parameters.
pub fn handle(spec: GeneratorSpec) -> Result<SequenceHandle, SeqError> {
    validate(&spec)?;
    Ok(SequenceHandle {
        space: space_of(&spec),
        index_origin: index_origin(&spec),
        oracle: oracle(&spec),
        l_limit: l_limit(&spec),
        source: HandleSource::Generator(spec),
        provenance: Vec::new(),
    })
}

/// The measure at index `n` of the family.
pub fn generate_at(spec: &GeneratorSpec, n: u64) -> Result<FiniteSignedMeasure, SeqError> {
    let origin = index_origin(spec);
    if n < origin {
        return Err(SeqError::BelowOrigin { index: n, origin });
    }
    let limit = origin + safe_limit(spec);
    if n >= limit {
        return Err(SeqError::BeyondLimit { index: n, limit });
    }
    Ok(match spec {
        GeneratorSpec::ConvPair { xs, x } => FiniteSignedMeasure::from_atoms([
            (xs.at(n), rat(1, 2)),
            (x.clone(), rat(-1, 2)),
        ]),
        GeneratorSpec::TripleWithVanishingAtom { xs, x, dust } => {
            let c = Rational::new(1.into(), (n + 2).into());
            let half_kept = (Rational::one() - &c) / nat(2);
            FiniteSignedMeasure::from_atoms([
                (xs.at(n), half_kept.clone()),
                (x.clone(), -half_kept),
                (dust.at(n), c),
            ])
        }
        GeneratorSpec::Square1 => square1_at(n),
        GeneratorSpec::Square2 => square2_at(n),
        GeneratorSpec::Square3 { alpha } => square3_at(alpha, n),
        GeneratorSpec::Square4 => square4_at(n),
        GeneratorSpec::PairingHalves => FiniteSignedMeasure::from_atoms([
            (Point::Nat(2 * n), rat(1, 2)),
            (Point::Nat(2 * n + 1), rat(-1, 2)),
        ]),
        GeneratorSpec::Product => product_at(n),
        GeneratorSpec::CantorLevels => cantor_levels_at(n),
        GeneratorSpec::Uds => uds_at(n),
        GeneratorSpec::Transport { section } => transport_at(section, n),
        GeneratorSpec::AdDuplicate => FiniteSignedMeasure::from_atoms([
            (Point::Pair { k: n, level: true }, rat(1, 2)),
            (Point::Pair { k: n, level: false }, rat(-1, 2)),
        ]),
    })
}

fn axis(x: Rational) -> Point {
    Point::Square { x, y: Rational::zero() }
}

fn raised(x: Rational, y: Rational) -> Point {
    Point::Square { x, y }
}

fn square1_at(n: u64) -> FiniteSignedMeasure {
    let u = Rational::new(1.into(), (n + 1).into());
    let quarter = rat(1, 4);
    let eighth = rat(1, 8);
    let mut atoms = alloc::vec![
        (axis(Rational::zero()), quarter.clone()),
        (raised(Rational::zero(), u.clone()), -quarter.clone()),
    ];
    if n % 2 == 0 {
        atoms.push((axis(rat(1, 2)), quarter.clone()));
        atoms.push((raised(rat(1, 2), u), -quarter));
    } else {
        atoms.push((axis(rat(1, 2)), eighth.clone()));
        atoms.push((raised(rat(1, 2), u.clone()), -eighth.clone()));
        atoms.push((axis(Rational::one()), eighth.clone()));
        atoms.push((raised(Rational::one(), u), -eighth));
    }
    FiniteSignedMeasure::from_atoms(atoms)
}

/// Classifies `k ≥ 1` into the default two-adic partition: block
/// `n = v₂(k+1)` (so block n is `{2^n(2m+1) − 1 : m ∈ ω}`).
pub fn square2_block(k: u64) -> u64 {
    u64::from((k + 1).trailing_zeros())
}

fn square2_at(k: u64) -> FiniteSignedMeasure {
    let block = square2_block(k);
    let q = q_at(block);
    let y = Rational::new(1.into(), k.into());
    FiniteSignedMeasure::from_atoms([
        (axis(q.clone()), rat(1, 2)),
        (raised(q, y), rat(-1, 2)),
    ])
}

fn square3_at(alpha: &Rational, n: u64) -> FiniteSignedMeasure {
    let mut m = FiniteSignedMeasure::zero();
    let u = Rational::new(1.into(), (n + 1).into());
    let one_minus = Rational::one() - alpha;
    for k in 0..=n {
        let w = &one_minus * pow2_inv(k + 2);
        let q = q_at(k);
        m.add_atom(axis(q.clone()), w.clone());
        m.add_atom(raised(q, u.clone()), -w);
    }
    let climb = alpha / nat(2) + &one_minus * pow2_inv(n + 2);
    let y_hi = Rational::one() - Rational::new(1.into(), (n + 1).into());
    let y_hi2 = Rational::one() - Rational::new(1.into(), (n + 2).into());
    m.add_atom(raised(Rational::zero(), y_hi), climb.clone());
    m.add_atom(raised(Rational::zero(), y_hi2), -climb);
    m
}

/// The level-`n` grid weight `α_k^n` of the dyadic refinement family:
/// write `k = 2^t·j` with `j` odd (or `k = 0`); then `α = ¼` for `k = 0` and
/// `1/2^(2(n−t)+1)` otherwise.
pub fn square4_weight(n: u64, k: u64) -> Rational {
    if k == 0 {
        return rat(1, 4);
    }
    let t = u64::from(k.trailing_zeros());
    debug_assert!(t <= n);
    pow2_inv(2 * (n - t) + 1)
}

/// The auxiliary (pre-origin-atom) part `ν_n` of the dyadic refinement family.
pub fn square4_aux(n: u64) -> FiniteSignedMeasure {
    let mut m = FiniteSignedMeasure::zero();
    for k in 0..(1u64 << n) {
        let w = square4_weight(n, k);
        let e = Rational::new((2 * k).into(), (1u64 << (n + 1)).into());
        let o = Rational::new((2 * k + 1).into(), (1u64 << (n + 1)).into());
        m.add_atom(axis(e), w.clone());
        m.add_atom(axis(o), -w);
    }
    m
}

fn square4_at(n: u64) -> FiniteSignedMeasure {
    let mut m = square4_aux(n);
    m.add_atom(axis(Rational::zero()), pow2_inv(n + 1));
    m
}

fn product_at(n: u64) -> FiniteSignedMeasure {
    let nn = n as u32;
    let denom = nat(n) * crate::rational::pow2(n);
    let w = Rational::one() / denom;
    let mut atoms = Vec::with_capacity((n << n) as usize);
    for bits in 0..(1u64 << nn) {
        let s = SignVector::new(nn, bits);
        for i in 0..nn {
            let coef = if s.sign(i) > 0 { w.clone() } else { -w.clone() };
            atoms.push((Point::Prod { s, i }, coef));
        }
    }
    FiniteSignedMeasure::from_atoms(atoms)
}

fn cantor_word(bits: u64, len: u64, tail: bool) -> Point {
    let word: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
    Point::Word(crate::point::CantorPoint::new(word, tail))
}

fn cantor_levels_at(n: u64) -> FiniteSignedMeasure {
    let w = pow2_inv(n + 1);
    let mut m = FiniteSignedMeasure::zero();
    for bits in 0..(1u64 << n) {
        m.add_atom(cantor_word(bits, n, true), w.clone());
        m.add_atom(cantor_word(bits, n, false), -w.clone());
    }
    m
}

fn transport_at(section: &SectionSpec, n: u64) -> FiniteSignedMeasure {
    let lift = |bits: u64, tail: bool| -> Point {
        let base = match cantor_word(bits, n, tail) {
            Point::Word(w) => w,
            _ => unreachable!(),
        };
        match section {
            SectionSpec::Identity => Point::Word(base),
            SectionSpec::PreferDoubledSide { doubled } => {
                let side = doubled.contains(&base);
                Point::Doubled { base, side }
            }
        }
    };
    let w = pow2_inv(n + 1);
    let mut m = FiniteSignedMeasure::zero();
    for bits in 0..(1u64 << n) {
        m.add_atom(lift(bits, true), w.clone());
        m.add_atom(lift(bits, false), -w.clone());
    }
    m
}

/// The default block partition of the averaging family: block `n ≥ 1` is
/// `[2^n − 1, 2^(n+1) − 1)`, whose maximum is `2^(n+1) − 2`.
pub fn uds_block_max(n: u64) -> u64 {
    (1u64 << (n + 1)) - 2
}

/// The un-normalized difference of consecutive empirical averages.
pub fn uds_raw(n: u64) -> FiniteSignedMeasure {
    let m_lo = uds_block_max(n);
    let m_hi = uds_block_max(n + 1);
    let w_hi = Rational::new(1.into(), m_hi.into());
    let w_lo = Rational::new(1.into(), m_lo.into());
    let mut m = FiniteSignedMeasure::zero();
    for k in 0..=m_hi {
        m.add_atom(Point::Word(crate::seq::vdc_word(k)), w_hi.clone());
    }
    for k in 0..=m_lo {
        m.add_atom(Point::Word(crate::seq::vdc_word(k)), -w_lo.clone());
    }
    m
}

fn uds_at(n: u64) -> FiniteSignedMeasure {
    let raw = uds_raw(n);
    let norm = raw.norm();
    raw.scale(&(Rational::one() / norm))
}

/// Exact closed-form `μ_n([A]×[B])` for the product family, when available
/// (`A` = all vectors or a sign-cylinder); cross-checked against brute force
/// for `n ≤ cap`. For seeded `A` only the brute-force path exists (`n ≤ cap`).
pub fn evaluate_rect(n: u64, a: &SignSet, b: &IndexSet, cap: u64) -> Result<Rational, SeqError> {
    if n == 0 {
        return Err(SeqError::BelowOrigin { index: 0, origin: 1 });
    }
    let closed = rect_closed_form(n, a, b);
    if n <= cap && n <= 24 {
        let brute = rect_brute_force(n, a, b);
        if let Some(c) = &closed {
            assert_eq!(c, &brute, "closed-form/brute-force disagreement at n = {n}");
        }
        return Ok(brute);
    }
    closed.ok_or(SeqError::BeyondLimit { index: n, limit: cap + 1 })
}

/// The closed form: only the constrained coordinates of a sign-cylinder
/// contribute, each `σ(i)/(n·2^(#constraints))`.
fn rect_closed_form(n: u64, a: &SignSet, b: &IndexSet) -> Option<Rational> {
    let nn = n as u32;
    match a {
        SignSet::All => Some(Rational::zero()),
        SignSet::Cylinder { constraints } => {
            if a.count_closed_form(nn) == Some(0) {
                return Some(Rational::zero());
            }
            let mut fixed: Vec<(u32, bool)> = Vec::new();
            for &(i, plus) in constraints {
                if !fixed.contains(&(i, plus)) {
                    fixed.push((i, plus));
                }
            }
            let mut acc = Rational::zero();
            let weight = Rational::one() / (nat(n) * crate::rational::pow2(fixed.len() as u64));
            for &(i, plus) in &fixed {
                if b.contains(i, nn) {
                    if plus {
                        acc += &weight;
                    } else {
                        acc -= &weight;
                    }
                }
            }
            Some(acc)
        }
        SignSet::Seeded { .. } => None,
    }
}

/// Exhaustive evaluation over all `2^n` sign vectors.
fn rect_brute_force(n: u64, a: &SignSet, b: &IndexSet) -> Rational {
    let nn = n as u32;
    let bmask: u64 = b.members(nn).iter().fold(0, |m, &i| m | 1 << i);
    let b_count = bmask.count_ones() as i64;
    let mut acc: i64 = 0;
    for bits in 0..(1u64 << nn) {
        if a.contains(&SignVector::new(nn, bits)) {
            // Σ_{i∈B} s(i) = (#set) − (#clear) over B's coordinates
            acc += 2 * (bits & bmask).count_ones() as i64 - b_count;
        }
    }
    Rational::new(acc.into(), (nat(n) * crate::rational::pow2(n)).to_integer())
}

/// The (†)-style product bound `(|A∩Ω_n|/2^n)·(|B∩Σ_n|/n)`, brute-forcing the
/// vector count when no closed form exists.
pub fn rect_bound(n: u64, a: &SignSet, b: &IndexSet) -> Rational {
    let nn = n as u32;
    let a_count = a.count_closed_form(nn).unwrap_or_else(|| {
        (0..(1u64 << nn)).filter(|&bits| a.contains(&SignVector::new(nn, bits))).count() as u64
    });
    let b_count = crate::functional::index_count(b, nn);
    Rational::new(a_count.into(), crate::rational::pow2(n).to_integer())
        * Rational::new(b_count.into(), nat(n).to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_traits::Signed;

    fn norm_is_one(spec: &GeneratorSpec, upto: u64) {
        let origin = index_origin(spec);
        for n in origin..origin + upto {
            let m = generate_at(spec, n).unwrap();
            assert_eq!(m.norm(), Rational::one(), "{spec:?} at {n}");
        }
    }

    #[test]
    fn all_families_have_unit_norm() {
        for spec in [
            GeneratorSpec::ConvPair {
                xs: PointSeq::SquareVertical { x: Rational::zero() },
                x: axis(Rational::zero()),
            },
            GeneratorSpec::TripleWithVanishingAtom {
                xs: PointSeq::SquareVertical { x: Rational::zero() },
                x: axis(Rational::zero()),
                dust: PointSeq::SquareVertical { x: Rational::one() },
            },
            GeneratorSpec::Square1,
            GeneratorSpec::Square2,
            GeneratorSpec::Square3 { alpha: rat(1, 3) },
            GeneratorSpec::PairingHalves,
            GeneratorSpec::AdDuplicate,
        ] {
            norm_is_one(&spec, 24);
        }
        norm_is_one(&GeneratorSpec::CantorLevels, 14);
        norm_is_one(&GeneratorSpec::Square4, 12);
        norm_is_one(&GeneratorSpec::Product, 8);
        norm_is_one(&GeneratorSpec::Uds, 8);
        norm_is_one(
            &GeneratorSpec::Transport {
                section: SectionSpec::PreferDoubledSide {
                    doubled: vec![crate::point::CantorPoint::constant(true)],
                },
            },
            10,
        );
    }

    #[test]
    fn square1_parity_structure() {
        let even = generate_at(&GeneratorSpec::Square1, 2).unwrap();
        assert_eq!(even.support_size(), 4);
        assert_eq!(even.coefficient(&axis(Rational::zero())), rat(1, 4));
        assert_eq!(even.coefficient(&axis(rat(1, 2))), rat(1, 4));
        assert_eq!(even.coefficient(&raised(Rational::zero(), rat(1, 3))), rat(-1, 4));
        let odd = generate_at(&GeneratorSpec::Square1, 3).unwrap();
        assert_eq!(odd.support_size(), 6);
        assert_eq!(odd.coefficient(&axis(rat(1, 2))), rat(1, 8));
        assert_eq!(odd.coefficient(&axis(Rational::one())), rat(1, 8));
        assert_eq!(odd.coefficient(&raised(Rational::one(), rat(1, 4))), rat(-1, 8));
    }

    #[test]
    fn square2_blocks_and_coefficients() {
        // v₂(k+1): k = 1,3,7 → blocks 1,2,3; k = 2,4,6 → block 0 (q_0 = 1)
        assert_eq!(square2_block(1), 1);
        assert_eq!(square2_block(3), 2);
        assert_eq!(square2_block(7), 3);
        assert_eq!(square2_block(2), 0);
        let m = generate_at(&GeneratorSpec::Square2, 3).unwrap();
        // block 2 → q_2 = 1/3
        assert_eq!(m.coefficient(&axis(rat(1, 3))), rat(1, 2));
        assert_eq!(m.coefficient(&raised(rat(1, 3), rat(1, 3))), rat(-1, 2));
        // coefficients on the axis are exactly 0 or ½ for every index
        for k in 1..200 {
            let m = generate_at(&GeneratorSpec::Square2, k).unwrap();
            for (p, c) in m.atoms() {
                if matches!(p, Point::Square { y, .. } if y.is_zero()) {
                    assert_eq!(c, &rat(1, 2));
                }
            }
        }
    }

    #[test]
    fn square3_frozen_values() {
        let alpha = rat(1, 3);
        let spec = GeneratorSpec::Square3 { alpha: alpha.clone() };
        // n = 0: first column (q_0 = 1) with weight (1−α)/4 = 1/6, and the
        // climbing pair lands on (0,0)/(0,1/2) with weight α/2 + (1−α)/4 = 1/3
        let m0 = generate_at(&spec, 0).unwrap();
        assert_eq!(m0.norm(), Rational::one());
        assert_eq!(m0.coefficient(&axis(Rational::one())), rat(1, 6));
        assert_eq!(m0.coefficient(&raised(Rational::one(), Rational::one())), rat(-1, 6));
        assert_eq!(m0.coefficient(&axis(Rational::zero())), rat(1, 3));
        assert_eq!(m0.coefficient(&raised(Rational::zero(), rat(1, 2))), rat(-1, 3));
        // the corrected axis-restriction value: ∥μ₀↾axis∥ = 1/6 + 1/3 = 1/2
        let on_axis = m0.restrict(|p| matches!(p, Point::Square { y, .. } if y.is_zero()));
        assert_eq!(on_axis.norm(), rat(1, 2));
        // the (∗) property: μ_n({(q_k,0)}) = (1−α)/2^(k+2) for every n ≥ k
        for n in 0..24u64 {
            let m = generate_at(&spec, n).unwrap();
            for k in 0..=n.min(8) {
                let expect = (Rational::one() - &alpha) * pow2_inv(k + 2);
                assert_eq!(m.coefficient(&axis(q_at(k))), expect, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn square3_l_mass_envelope_is_exact() {
        let alpha = rat(1, 3);
        let spec = GeneratorSpec::Square3 { alpha: alpha.clone() };
        let oracle = oracle(&spec).unwrap();
        let lim = l_limit(&spec).unwrap();
        assert_eq!(lim, rat(1, 3));
        for n in 0..32 {
            let m = generate_at(&spec, n).unwrap();
            let on_l = m.restrict(|p| oracle.in_limit_set(p)).norm();
            let dev = (&on_l - &lim).abs();
            assert!(dev <= l_envelope(&spec, n), "n = {n}: dev {dev}");
        }
    }

    #[test]
    fn square4_structure() {
        // ∥ν_n∥ = 1 − 1/2^(n+1) exactly
        for n in 0..=12u64 {
            let aux = square4_aux(n);
            assert_eq!(aux.norm(), Rational::one() - pow2_inv(n + 1), "aux norm at {n}");
            let full = generate_at(&GeneratorSpec::Square4, n).unwrap();
            assert_eq!(full.norm(), Rational::one(), "full norm at {n}");
            // every atom sits on the axis
            assert!(full
                .atoms()
                .all(|(p, _)| matches!(p, Point::Square { y, .. } if y.is_zero())));
        }
        // frozen table at n = 2: pair weights in k-order are ¼, 1/32, ⅛, 1/32
        let m2 = generate_at(&GeneratorSpec::Square4, 2).unwrap();
        assert_eq!(m2.coefficient(&axis(Rational::zero())), rat(3, 8)); // ¼ + c_2 = ¼+⅛
        assert_eq!(m2.coefficient(&axis(rat(1, 8))), rat(-1, 4));
        assert_eq!(m2.coefficient(&axis(rat(1, 4))), rat(1, 32));
        assert_eq!(m2.coefficient(&axis(rat(3, 8))), rat(-1, 32));
        assert_eq!(m2.coefficient(&axis(rat(1, 2))), rat(1, 8));
        assert_eq!(m2.coefficient(&axis(rat(5, 8))), rat(-1, 8));
        assert_eq!(m2.coefficient(&axis(rat(3, 4))), rat(1, 32));
        assert_eq!(m2.coefficient(&axis(rat(7, 8))), rat(-1, 32));
    }

    #[test]
    fn square4_coefficients_match_oracle_when_stable() {
        let o = LimitOracle::Square4;
        for n in 3..12u64 {
            let m = generate_at(&GeneratorSpec::Square4, n).unwrap();
            // dyadics of level ≤ n−1 have stabilized except the origin's c_n term
            for (p, c) in m.atoms() {
                let Point::Square { x, .. } = p else { panic!() };
                if x.is_zero() {
                    assert_eq!(c.clone(), rat(1, 4) + pow2_inv(n + 1));
                    continue;
                }
                let level = x.denom().bits() - 1;
                if level < n {
                    match o.eval(p) {
                        crate::seq::OracleValue::Limit(v) => assert_eq!(c, &v, "n={n} x={x}"),
                        _ => panic!("square4 oracle must be a limit everywhere"),
                    }
                }
            }
        }
    }

    #[test]
    fn product_structure() {
        let m = generate_at(&GeneratorSpec::Product, 3).unwrap();
        assert_eq!(m.support_size(), 3 * 8);
        assert_eq!(m.norm(), Rational::one());
        let (pos, neg) = m.jordan_split();
        assert_eq!(pos.norm(), rat(1, 2), "sign symmetry");
        assert_eq!(neg.norm(), rat(1, 2));
        // disjoint first-coordinate projections across indices: all vectors of
        // μ_n have length n, so supports never meet
        let m4 = generate_at(&GeneratorSpec::Product, 4).unwrap();
        assert!(m.support_disjoint(&m4));
    }

    #[test]
    fn product_rect_closed_form_and_bound() {
        let a = SignSet::Cylinder { constraints: vec![(0, true)] };
        let b = IndexSet::All;
        for n in 1..=20u64 {
            let v = evaluate_rect(n, &a, &b, 14).unwrap();
            assert_eq!(v, Rational::new(1.into(), (2 * n).into()), "1/(2n) at {n}");
        }
        // (†) bound for a seeded pair at small n
        let sa = SignSet::Seeded { seed: 5 };
        let sb = IndexSet::Seeded { seed: 6 };
        for n in 1..=10u64 {
            let v = evaluate_rect(n, &sa, &sb, 14).unwrap();
            assert!(v.abs() <= rect_bound(n, &sa, &sb), "(†) at {n}");
        }
    }

    #[test]
    fn cantor_levels_frozen() {
        let m0 = generate_at(&GeneratorSpec::CantorLevels, 0).unwrap();
        assert_eq!(m0.support_size(), 2);
        assert_eq!(
            m0.coefficient(&Point::Word(crate::point::CantorPoint::constant(true))),
            rat(1, 2)
        );
        assert_eq!(
            m0.coefficient(&Point::Word(crate::point::CantorPoint::constant(false))),
            rat(-1, 2)
        );
        // χ_[0]: −½ at n = 0, exactly 0 for n ≥ 1
        let chi0 = crate::functional::TestFunctional::CylinderIndicator { word: vec![false] };
        assert_eq!(crate::functional::evaluate(&m0, &chi0).unwrap(), rat(-1, 2));
        for n in 1..10 {
            let m = generate_at(&GeneratorSpec::CantorLevels, n).unwrap();
            assert!(crate::functional::evaluate(&m, &chi0).unwrap().is_zero(), "n = {n}");
            assert_eq!(m.support_size(), 1 << (n + 1));
        }
    }

    #[test]
    fn uds_frozen_first_element() {
        // blocks: max P_1 = 2, max P_2 = 6; coefficients −1/3 ×3 then +1/6 ×4,
        // norm 5/3; normalized: −1/5 ×3, +1/10 ×4
        let raw = uds_raw(1);
        assert_eq!(raw.norm(), rat(5, 3));
        let m = generate_at(&GeneratorSpec::Uds, 1).unwrap();
        assert_eq!(m.norm(), Rational::one());
        assert_eq!(m.coefficient(&Point::Word(crate::seq::vdc_word(0))), rat(-1, 5));
        assert_eq!(m.coefficient(&Point::Word(crate::seq::vdc_word(2))), rat(-1, 5));
        assert_eq!(m.coefficient(&Point::Word(crate::seq::vdc_word(3))), rat(1, 10));
        assert_eq!(m.coefficient(&Point::Word(crate::seq::vdc_word(6))), rat(1, 10));
        // eval against χ_[0]: points with first bit 0 are vdc(0),(2),(4),(6) →
        // −1/5 − 1/5 + 1/10 + 1/10 = −1/5
        let chi0 = crate::functional::TestFunctional::CylinderIndicator { word: vec![false] };
        assert_eq!(crate::functional::evaluate(&m, &chi0).unwrap(), rat(-1, 5));
    }

    #[test]
    fn uds_halves_lower_bound() {
        // ∥raw_n∥ ≥ |P_{n+1}|/max P_{n+1} ≥ ½
        for n in 1..10u64 {
            let raw = uds_raw(n);
            let p_next = 1u64 << (n + 1); // |P_{n+1}| = 2^{n+1}
            let bound = Rational::new(p_next.into(), uds_block_max(n + 1).into());
            assert!(raw.norm() >= bound);
            assert!(bound > rat(1, 2));
        }
    }

    #[test]
    fn transport_doubles_the_all_ones_point() {
        let one = crate::point::CantorPoint::constant(true);
        let spec = GeneratorSpec::Transport {
            section: SectionSpec::PreferDoubledSide { doubled: vec![one.clone()] },
        };
        for n in 0..8u64 {
            let m = generate_at(&spec, n).unwrap();
            assert_eq!(m.norm(), Rational::one());
            // the all-ones word lifts to side 1 with coefficient +1/2^(n+1)
            let p = Point::Doubled { base: one.clone(), side: true };
            assert_eq!(m.coefficient(&p), pow2_inv(n + 1), "n = {n}");
            // its side-0 twin never receives mass
            let p0 = Point::Doubled { base: one.clone(), side: false };
            assert!(m.coefficient(&p0).is_zero());
        }
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        assert!(validate(&GeneratorSpec::Square3 { alpha: rat(3, 2) }).is_err());
        assert!(validate(&GeneratorSpec::Square3 { alpha: Rational::zero() }).is_err());
        assert!(validate(&GeneratorSpec::Square3 { alpha: rat(1, 3) }).is_ok());
        let bad = GeneratorSpec::ConvPair {
            xs: PointSeq::SquareVertical { x: Rational::zero() },
            x: axis(rat(1, 2)),
        };
        assert!(validate(&bad).is_err(), "sequence does not converge to the claimed point");
    }

    #[test]
    fn origin_and_limits() {
        assert!(generate_at(&GeneratorSpec::Product, 0).is_err());
        assert!(generate_at(&GeneratorSpec::Square2, 0).is_err());
        assert!(generate_at(&GeneratorSpec::Product, 15).is_err());
        assert!(generate_at(&GeneratorSpec::Product, 14).is_ok());
    }

    #[test]
    fn handles_wire_metadata() {
        let h = handle(GeneratorSpec::Square4).unwrap();
        assert_eq!(h.space, SpaceId::UnitSquare);
        assert_eq!(h.l_limit, Some(Rational::one()));
        assert_eq!(h.l_restriction_norm(5).unwrap(), Some(Rational::one()));
        let h2 = handle(GeneratorSpec::PairingHalves).unwrap();
        assert_eq!(h2.l_limit, Some(Rational::zero()));
        assert_eq!(h2.l_restriction_norm(5).unwrap(), Some(Rational::zero()));
    }
}
