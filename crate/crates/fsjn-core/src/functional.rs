//! Test functionals: the continuous functions measures are integrated
//! against, drawn from serializable catalogs per space (polynomials and hat
//! bumps on the square, algebra indicators on the naturals, rectangle
//! indicators on the product space, cylinder indicators on Cantor-like
//! spaces, finite level indicators on pair spaces).

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::algebra::{seeded_bit, AlgebraDescriptor, PairMask};
use crate::measure::FiniteSignedMeasure;
use crate::point::{CantorPoint, Point};
use crate::rational::{nat, rat, Rational};
use crate::space::{OmegaAlgebra, SpaceId};

/// A clopen set of sign vectors (the first factor of a product rectangle).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignSet {
    /// Every sign vector.
    All,
    /// Vectors satisfying finitely many fixed coordinate signs
    /// (`(i, true)` means `s(i) = +1`); vectors shorter than a constrained
    /// coordinate are excluded.
    Cylinder { constraints: Vec<(u32, bool)> },
    /// Pseudorandom membership by vector identity (length and bits).
    Seeded { seed: u64 },
}

impl SignSet {
    /// Membership of a sign vector.
    pub fn contains(&self, s: &crate::point::SignVector) -> bool {
        match self {
            SignSet::All => true,
            SignSet::Cylinder { constraints } => constraints
                .iter()
                .all(|&(i, plus)| i < s.len() && (s.sign(i) > 0) == plus),
            SignSet::Seeded { seed } => {
                seeded_bit(*seed ^ u64::from(s.len()).rotate_left(32), s.bits())
            }
        }
    }

    /// `|A ∩ Ω_n|` when a closed form exists (`All` and `Cylinder`), else `None`.
    pub fn count_closed_form(&self, n: u32) -> Option<u64> {
        match self {
            SignSet::All => Some(1u64 << n),
            SignSet::Cylinder { constraints } => {
                let mut fixed: Vec<(u32, bool)> = Vec::new();
                for &(i, plus) in constraints {
                    if i >= n {
                        return Some(0);
                    }
                    match fixed.iter().find(|&&(j, _)| j == i) {
                        Some(&(_, p)) if p != plus => return Some(0),
                        Some(_) => {}
                        None => fixed.push((i, plus)),
                    }
                }
                Some(1u64 << (n as u64 - fixed.len() as u64))
            }
            SignSet::Seeded { .. } => None,
        }
    }
}

/// A set of coordinate indices within the second product factor; membership
/// may depend on the block `n` the index lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IndexSet {
    /// Every index.
    All,
    /// Indices `i < c`.
    UpTo { c: u32 },
    /// Even indices.
    EvenIndex,
    /// Pseudorandom membership of `(i, n)`.
    Seeded { seed: u64 },
}

impl IndexSet {
    /// Membership of index `i` within block `n`.
    pub fn contains(&self, i: u32, n: u32) -> bool {
        match self {
            IndexSet::All => true,
            IndexSet::UpTo { c } => i < *c,
            IndexSet::EvenIndex => i % 2 == 0,
            IndexSet::Seeded { seed } => {
                seeded_bit(*seed ^ u64::from(n).rotate_left(32), u64::from(i))
            }
        }
    }

    /// The members of the set within block `n`, ascending.
    pub fn members(&self, n: u32) -> Vec<u32> {
        (0..n).filter(|&i| self.contains(i, n)).collect()
    }
}

/// A test functional from the per-space catalogs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestFunctional {
    /// The constant function.
    Const(Rational),
    /// `x^a · y^b` on the unit square.
    Monomial { a: u8, b: u8 },
    /// The product hat `max(0, 1−|x−cx|/r) · max(0, 1−|y−cy|/r)`.
    Bump { cx: Rational, cy: Rational, r: Rational },
    /// The indicator of an algebra element, on naturals.
    AlgebraIndicator(AlgebraDescriptor),
    /// The indicator of a rectangle `[A]×[B]` on the product space.
    Rect { a: SignSet, b: IndexSet },
    /// The indicator of the cylinder `[word]` on the Cantor space.
    CylinderIndicator { word: Vec<bool> },
    /// The indicator of `[word]` pulled back through the collapse map of a
    /// doubled space (ignores the side bit).
    CollapseCylinder { word: Vec<bool> },
    /// The indicator of the isolated doubled copy `(at, 1)`.
    SideIndicator { at: CantorPoint },
    /// The indicator of finitely many pair points: level 1 at `ones`, level 0
    /// at `zeros`.
    PairIndicator { ones: Vec<u64>, zeros: Vec<u64> },
}

/// Error from evaluating a functional at a point of the wrong kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalError {
    /// The functional's catalog name or debug rendering.
    pub functional: String,
    /// Rendering of the point.
    pub point: String,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "functional {} is not defined at point {}", self.functional, self.point)
    }
}

impl TestFunctional {
    /// Exact evaluation at a point.
    pub fn eval(&self, p: &Point) -> Result<Rational, EvalError> {
        let err = || EvalError {
            functional: alloc::format!("{self:?}"),
            point: p.render(),
        };
        let indicator = |b: bool| if b { Rational::one() } else { Rational::zero() };
        match (self, p) {
            (TestFunctional::Const(c), _) => Ok(c.clone()),
            (TestFunctional::Monomial { a, b }, Point::Square { x, y }) => {
                let mut v = Rational::one();
                for _ in 0..*a {
                    v *= x;
                }
                for _ in 0..*b {
                    v *= y;
                }
                Ok(v)
            }
            (TestFunctional::Bump { cx, cy, r }, Point::Square { x, y }) => {
                let hat = |v: &Rational, c: &Rational| -> Rational {
                    let d = (v - c).abs();
                    if d >= *r {
                        Rational::zero()
                    } else {
                        Rational::one() - d / r
                    }
                };
                Ok(hat(x, cx) * hat(y, cy))
            }
            (TestFunctional::AlgebraIndicator(desc), Point::Nat(k)) => {
                Ok(indicator(desc.contains(*k)))
            }
            (TestFunctional::Rect { a, b }, Point::Prod { s, i }) => {
                Ok(indicator(a.contains(s) && b.contains(*i, s.len())))
            }
            (TestFunctional::CylinderIndicator { word }, Point::Word(w)) => {
                Ok(indicator(w.in_cylinder(word)))
            }
            (TestFunctional::CollapseCylinder { word }, Point::Doubled { base, .. }) => {
                Ok(indicator(base.in_cylinder(word)))
            }
            (TestFunctional::SideIndicator { at }, Point::Doubled { base, side }) => {
                Ok(indicator(*side && base == at))
            }
            (TestFunctional::PairIndicator { ones, zeros }, Point::Pair { k, level }) => {
                Ok(indicator(if *level { ones.contains(k) } else { zeros.contains(k) }))
            }
            _ => Err(err()),
        }
    }
}

/// A functional with a stable catalog name and, where meaningful, the rational
/// scale that makes it 1-Lipschitz on its space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NamedFunctional {
    /// Stable name used in reports.
    pub name: String,
    /// The functional.
    pub functional: TestFunctional,
    /// `s` such that `s·f` is 1-Lipschitz (square functionals only).
    pub lip_scale: Option<Rational>,
}

impl NamedFunctional {
    /// Names a functional for use in reports.
    pub fn new(name: &str, functional: TestFunctional) -> Self {
        NamedFunctional { name: String::from(name), functional, lip_scale: None }
    }

    /// Names a functional and records the scale that makes it 1-Lipschitz.
    pub fn with_lip(name: &str, functional: TestFunctional, lip_scale: Rational) -> Self {
        NamedFunctional { name: String::from(name), functional, lip_scale: Some(lip_scale) }
    }
}

/// Evaluates `μ(f)` exactly.
pub fn evaluate(m: &FiniteSignedMeasure, f: &TestFunctional) -> Result<Rational, EvalError> {
    m.try_evaluate_with(|p| f.eval(p))
}

/// The canonical test family of a space: a fixed, deterministic list of named
/// functionals used by decay reports and the acceptance checks.
pub fn canonical_family(space: &SpaceId) -> Vec<NamedFunctional> {
    match space {
        SpaceId::UnitSquare => {
            let mut fam = vec![NamedFunctional::with_lip(
                "const-1",
                TestFunctional::Const(Rational::one()),
                Rational::one(),
            )];
            for a in 0..=3u8 {
                for b in 0..=3u8 {
                    if a + b == 0 || a + b > 3 {
                        continue;
                    }
                    let name = alloc::format!("mono-x{a}y{b}");
                    // |∇(x^a y^b)| ≤ a+b on [0,1]², so 1/(a+b) rescales to 1-Lipschitz
                    fam.push(NamedFunctional {
                        name,
                        functional: TestFunctional::Monomial { a, b },
                        lip_scale: Some(rat(1, i64::from(a + b))),
                    });
                }
            }
            let quarter = rat(1, 4);
            let centers: [(&str, Rational, Rational); 5] = [
                ("bump-origin", Rational::zero(), Rational::zero()),
                ("bump-half-axis", rat(1, 2), Rational::zero()),
                ("bump-one-axis", Rational::one(), Rational::zero()),
                ("bump-top-left", Rational::zero(), Rational::one()),
                ("bump-center", rat(1, 2), rat(1, 2)),
            ];
            for (name, cx, cy) in centers {
                // hat slope is 1/r = 4, so 1/4 rescales to 1-Lipschitz
                fam.push(NamedFunctional::with_lip(
                    name,
                    TestFunctional::Bump { cx, cy, r: quarter.clone() },
                    quarter.clone(),
                ));
            }
            fam
        }
        SpaceId::Omega(OmegaAlgebra::Pairing) | SpaceId::Omega(OmegaAlgebra::Full) => {
            let ind = |pair_mask: PairMask, exceptions: Vec<u64>| {
                TestFunctional::AlgebraIndicator(AlgebraDescriptor::Pairing {
                    pair_mask,
                    exceptions,
                })
            };
            vec![
                NamedFunctional::new("const-1", TestFunctional::Const(Rational::one())),
                NamedFunctional::new("pairs-all", ind(PairMask::All, vec![])),
                NamedFunctional::new("pairs-even", ind(PairMask::EvenPairs, vec![])),
                NamedFunctional::new("pairs-0-2", ind(PairMask::Finite(vec![0, 2]), vec![])),
                NamedFunctional::new("pairs-even-x1", ind(PairMask::EvenPairs, vec![1])),
                NamedFunctional::new("pairs-seeded-x9", ind(PairMask::Seeded { seed: 0xA5 }, vec![9])),
            ]
        }
        SpaceId::Omega(OmegaAlgebra::Density) => {
            use crate::algebra::{DensityModulus, DensityPredicate};
            let ind = |predicate: DensityPredicate, d: u8, modulus: DensityModulus| {
                TestFunctional::AlgebraIndicator(AlgebraDescriptor::Density {
                    predicate,
                    d,
                    modulus,
                })
            };
            vec![
                NamedFunctional::new("const-1", TestFunctional::Const(Rational::one())),
                NamedFunctional::new(
                    "density-squares",
                    ind(DensityPredicate::Squares, 0, DensityModulus::InverseSquare),
                ),
                NamedFunctional::new(
                    "density-pow2",
                    ind(DensityPredicate::PowersOfTwo, 0, DensityModulus::LogLinear),
                ),
                NamedFunctional::new(
                    "density-blocks",
                    ind(DensityPredicate::Blocks, 0, DensityModulus::NineInverseSquare),
                ),
                NamedFunctional::new(
                    "density-tail10",
                    ind(
                        DensityPredicate::Arithmetic { a: 1, b: 10 },
                        1,
                        DensityModulus::Linear { c: 10 },
                    ),
                ),
            ]
        }
        SpaceId::Product => {
            let rect = |a: SignSet, b: IndexSet| TestFunctional::Rect { a, b };
            vec![
                NamedFunctional::new("rect-all-all", rect(SignSet::All, IndexSet::All)),
                NamedFunctional::new(
                    "rect-s0plus-all",
                    rect(SignSet::Cylinder { constraints: vec![(0, true)] }, IndexSet::All),
                ),
                NamedFunctional::new(
                    "rect-s0plus-even",
                    rect(SignSet::Cylinder { constraints: vec![(0, true)] }, IndexSet::EvenIndex),
                ),
                NamedFunctional::new(
                    "rect-s0s1plus-upto3",
                    rect(
                        SignSet::Cylinder { constraints: vec![(0, true), (1, true)] },
                        IndexSet::UpTo { c: 3 },
                    ),
                ),
                NamedFunctional::new("rect-all-even", rect(SignSet::All, IndexSet::EvenIndex)),
            ]
        }
        SpaceId::Cantor => {
            let mut fam = vec![NamedFunctional::new(
                "const-1",
                TestFunctional::Const(Rational::one()),
            )];
            for len in 1..=2usize {
                for bits in 0..(1u32 << len) {
                    let word: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                    let name: String = word.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    fam.push(NamedFunctional::new(
                        &alloc::format!("cyl-{name}"),
                        TestFunctional::CylinderIndicator { word },
                    ));
                }
            }
            fam
        }
        SpaceId::Doubled { doubled } => {
            let mut fam = vec![NamedFunctional::new(
                "const-1",
                TestFunctional::Const(Rational::one()),
            )];
            for len in 1..=2usize {
                for bits in 0..(1u32 << len) {
                    let word: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                    let name: String = word.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    fam.push(NamedFunctional::new(
                        &alloc::format!("collapse-cyl-{name}"),
                        TestFunctional::CollapseCylinder { word },
                    ));
                }
            }
            for (i, at) in doubled.iter().enumerate() {
                fam.push(NamedFunctional::new(
                    &alloc::format!("side-{i}"),
                    TestFunctional::SideIndicator { at: at.clone() },
                ));
            }
            fam
        }
        SpaceId::Pairs => vec![
            NamedFunctional::new("const-1", TestFunctional::Const(Rational::one())),
            NamedFunctional::new(
                "ones-0-3",
                TestFunctional::PairIndicator { ones: vec![0, 1, 2, 3], zeros: vec![] },
            ),
            NamedFunctional::new(
                "zeros-0-3",
                TestFunctional::PairIndicator { ones: vec![], zeros: vec![0, 1, 2, 3] },
            ),
            NamedFunctional::new(
                "mixed-finite",
                TestFunctional::PairIndicator { ones: vec![1, 4], zeros: vec![2, 4, 7] },
            ),
        ],
    }
}

/// `|B ∩ Σ_n|` — the count of indices of block `n` in the set.
pub fn index_count(b: &IndexSet, n: u32) -> u64 {
    match b {
        IndexSet::All => u64::from(n),
        IndexSet::UpTo { c } => u64::from((*c).min(n)),
        IndexSet::EvenIndex => u64::from(n.div_ceil(2)),
        IndexSet::Seeded { .. } => b.members(n).len() as u64,
    }
}

/// The hat-bump value helper reused by virtual evaluations.
pub fn bump_value(cx: &Rational, cy: &Rational, r: &Rational, x: &Rational, y: &Rational) -> Rational {
    let hat = |v: &Rational, c: &Rational| -> Rational {
        let d = (v - c).abs();
        if d >= *r {
            Rational::zero()
        } else {
            Rational::one() - d / r
        }
    };
    hat(x, cx) * hat(y, cy)
}

/// Convenience: `nat` re-export used by closed-form rectangle values.
pub fn block_weight(n: u32) -> Rational {
    nat(u64::from(n)) * crate::rational::pow2(u64::from(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::point::SignVector;

    #[test]
    fn monomials_and_bumps() {
        let p = Point::square(rat(1, 2), rat(1, 3));
        let xy = TestFunctional::Monomial { a: 1, b: 1 };
        assert_eq!(xy.eval(&p).unwrap(), rat(1, 6));
        let x2 = TestFunctional::Monomial { a: 2, b: 0 };
        assert_eq!(x2.eval(&p).unwrap(), rat(1, 4));
        let bump = TestFunctional::Bump { cx: rat(1, 2), cy: rat(1, 3), r: rat(1, 4) };
        assert_eq!(bump.eval(&p).unwrap(), Rational::one());
        let off = Point::square(rat(1, 2), rat(7, 12)); // |y−1/3| = 1/4 ≥ r
        assert!(bump.eval(&off).unwrap().is_zero());
        let near = Point::square(rat(5, 8), rat(1, 3)); // |x−1/2| = 1/8 = r/2
        assert_eq!(bump.eval(&near).unwrap(), rat(1, 2));
    }

    #[test]
    fn wrong_point_kind_is_an_error() {
        let xy = TestFunctional::Monomial { a: 1, b: 1 };
        assert!(xy.eval(&Point::Nat(3)).is_err());
        let c = TestFunctional::Const(rat(2, 1));
        assert_eq!(c.eval(&Point::Nat(3)).unwrap(), rat(2, 1), "constants are everywhere");
    }

    #[test]
    fn rect_membership() {
        let f = TestFunctional::Rect {
            a: SignSet::Cylinder { constraints: vec![(0, true)] },
            b: IndexSet::All,
        };
        let s_plus = SignVector::new(3, 0b001);
        let s_minus = SignVector::new(3, 0b110);
        assert_eq!(f.eval(&Point::Prod { s: s_plus, i: 1 }).unwrap(), Rational::one());
        assert!(f.eval(&Point::Prod { s: s_minus, i: 1 }).unwrap().is_zero());
    }

    #[test]
    fn sign_set_counts() {
        assert_eq!(SignSet::All.count_closed_form(5), Some(32));
        let cyl = SignSet::Cylinder { constraints: vec![(0, true)] };
        assert_eq!(cyl.count_closed_form(5), Some(16));
        let cyl2 = SignSet::Cylinder { constraints: vec![(0, true), (2, false)] };
        assert_eq!(cyl2.count_closed_form(5), Some(8));
        // brute-force agreement
        for n in 0..=10u32 {
            let mut count = 0u64;
            for bits in 0..(1u64 << n) {
                if cyl2.contains(&SignVector::new(n, bits)) {
                    count += 1;
                }
            }
            assert_eq!(Some(count), cyl2.count_closed_form(n), "n = {n}");
        }
        let contradictory = SignSet::Cylinder { constraints: vec![(1, true), (1, false)] };
        assert_eq!(contradictory.count_closed_form(4), Some(0));
        assert_eq!(SignSet::Seeded { seed: 3 }.count_closed_form(4), None);
    }

    #[test]
    fn index_set_counts() {
        assert_eq!(index_count(&IndexSet::All, 7), 7);
        assert_eq!(index_count(&IndexSet::EvenIndex, 7), 4);
        assert_eq!(index_count(&IndexSet::UpTo { c: 3 }, 7), 3);
        assert_eq!(index_count(&IndexSet::UpTo { c: 9 }, 7), 7);
        let seeded = IndexSet::Seeded { seed: 11 };
        assert_eq!(index_count(&seeded, 9), seeded.members(9).len() as u64);
    }

    #[test]
    fn cylinder_indicators() {
        let f = TestFunctional::CylinderIndicator { word: vec![false, true] };
        let inside = Point::Word(CantorPoint::new(vec![false, true, false], false));
        let outside = Point::Word(CantorPoint::new(vec![true], false));
        assert_eq!(f.eval(&inside).unwrap(), Rational::one());
        assert!(f.eval(&outside).unwrap().is_zero());
        // tail extension counts: 0(1)^ω ∈ [01]
        let taily = Point::Word(CantorPoint::new(vec![false], true));
        assert_eq!(f.eval(&taily).unwrap(), Rational::one());
    }

    #[test]
    fn families_are_nonempty_and_named_uniquely() {
        for space in [
            SpaceId::UnitSquare,
            SpaceId::Omega(OmegaAlgebra::Pairing),
            SpaceId::Omega(OmegaAlgebra::Density),
            SpaceId::Product,
            SpaceId::Cantor,
            SpaceId::Doubled { doubled: vec![CantorPoint::constant(true)] },
            SpaceId::Pairs,
        ] {
            let fam = canonical_family(&space);
            assert!(!fam.is_empty());
            for i in 0..fam.len() {
                for j in i + 1..fam.len() {
                    assert_ne!(fam[i].name, fam[j].name, "duplicate name in {space:?}");
                }
            }
        }
    }

    #[test]
    fn square_family_shape() {
        let fam = canonical_family(&SpaceId::UnitSquare);
        // 1 constant + 9 monomials + 5 bumps
        assert_eq!(fam.len(), 15);
        assert!(fam.iter().all(|f| f.lip_scale.is_some()));
    }
}
