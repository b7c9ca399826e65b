//! The symbolic compact spaces measures live on.
//!
//! Each space is identified by a `SpaceId`, owns a notion of which `Point`s
//! belong to it, and canonicalizes points so that equal points of the space
//! have equal representations (e.g. the side bit of a duplicate-style space
//! is forced to 0 away from the doubled set).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed};

use crate::algebra::AlgebraDescriptor;
use crate::point::{CantorPoint, Point};
use crate::rational::Rational;

/// Which Boolean algebra the naturals-based Stone space carries; this decides
/// which indicator functionals are admissible test functions on it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum OmegaAlgebra {
    /// The full power set.
    Full,
    /// The pairing algebra (sets eventually containing pairs `{2k,2k+1}` whole).
    Pairing,
    /// The density-0-or-1 algebra.
    Density,
}

/// Identifier of a symbolic space, carrying the data needed to interpret points.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SpaceId {
    /// The unit square `[0,1]²` with rational coordinates.
    UnitSquare,
    /// The Stone space of an algebra over `ω`; atoms sit on the naturals.
    Omega(OmegaAlgebra),
    /// The Cantor space of infinite binary sequences (eventually constant ones).
    Cantor,
    /// The double Stone rectangle: sign vectors paired with coordinate indices.
    Product,
    /// The Cantor space with a finite set of points doubled (side bit 0/1).
    Doubled { doubled: Vec<CantorPoint> },
    /// A compactified family of isolated pairs `(k, 0)/(k, 1)`.
    Pairs,
}

/// Error returned when a point does not belong to a space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpaceMismatch {
    /// The space's identifier string.
    pub space: String,
    /// Rendering of the offending point.
    pub point: String,
}

impl fmt::Display for SpaceMismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "point {} does not belong to space {}", self.point, self.space)
    }
}

impl SpaceId {
    /// A stable identifier string (used in file formats and reports).
    pub fn id_str(&self) -> String {
        match self {
            SpaceId::UnitSquare => String::from("unit-square"),
            SpaceId::Omega(OmegaAlgebra::Full) => String::from("omega/full"),
            SpaceId::Omega(OmegaAlgebra::Pairing) => String::from("omega/pairing"),
            SpaceId::Omega(OmegaAlgebra::Density) => String::from("omega/density"),
            SpaceId::Cantor => String::from("cantor"),
            SpaceId::Product => String::from("product"),
            SpaceId::Doubled { .. } => String::from("doubled-cantor"),
            SpaceId::Pairs => String::from("pairs"),
        }
    }

    /// Whether `p` is a point of this space (after canonicalization).
    pub fn contains(&self, p: &Point) -> bool {
        self.canonicalize(p.clone()).is_ok()
    }

    /// Validates membership and rewrites `p` into its canonical representative.
    ///
    /// The only non-identity rewrite is on doubled spaces: the side bit is
    /// cleared on points outside the doubled set, so that each space point has
    /// exactly one representation.
    pub fn canonicalize(&self, p: Point) -> Result<Point, SpaceMismatch> {
        let fail = |p: &Point| SpaceMismatch { space: self.id_str(), point: p.render() };
        match (self, p) {
            (SpaceId::UnitSquare, Point::Square { x, y }) => {
                let in_unit = |v: &Rational| !v.is_negative() && *v <= Rational::one();
                if in_unit(&x) && in_unit(&y) {
                    Ok(Point::Square { x, y })
                } else {
                    Err(fail(&Point::Square { x, y }))
                }
            }
            (SpaceId::Omega(_), Point::Nat(n)) => Ok(Point::Nat(n)),
            (SpaceId::Cantor, Point::Word(w)) => Ok(Point::Word(w)),
            (SpaceId::Product, Point::Prod { s, i }) => {
                if i < s.len() {
                    Ok(Point::Prod { s, i })
                } else {
                    Err(fail(&Point::Prod { s, i }))
                }
            }
            (SpaceId::Doubled { doubled }, Point::Doubled { base, side }) => {
                let side = side && doubled.contains(&base);
                Ok(Point::Doubled { base, side })
            }
            (SpaceId::Pairs, Point::Pair { k, level }) => Ok(Point::Pair { k, level }),
            (_, p) => Err(fail(&p)),
        }
    }

    /// The algebra carried by a naturals-based space, if any.
    pub fn omega_algebra(&self) -> Option<&OmegaAlgebra> {
        match self {
            SpaceId::Omega(a) => Some(a),
            _ => None,
        }
    }

    /// Whether an algebra descriptor is admissible as an indicator on this space.
    pub fn admits_indicator(&self, desc: &AlgebraDescriptor) -> bool {
        match (self, desc) {
            (SpaceId::Omega(OmegaAlgebra::Full), _) => true,
            (SpaceId::Omega(OmegaAlgebra::Pairing), AlgebraDescriptor::Pairing { .. }) => true,
            (SpaceId::Omega(OmegaAlgebra::Density), AlgebraDescriptor::Density { .. }) => true,
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::PairMask;
    use crate::point::SignVector;
    use crate::rational::rat;
    use alloc::vec;

    #[test]
    fn unit_square_membership() {
        let sq = SpaceId::UnitSquare;
        assert!(sq.contains(&Point::square(rat(0, 1), rat(1, 1))));
        assert!(sq.contains(&Point::square(rat(1, 2), rat(1, 3))));
        assert!(!sq.contains(&Point::square(rat(3, 2), rat(0, 1))));
        assert!(!sq.contains(&Point::square(rat(-1, 2), rat(0, 1))));
        assert!(!sq.contains(&Point::Nat(3)));
    }

    #[test]
    fn product_membership_requires_index_in_range() {
        let pr = SpaceId::Product;
        let s = SignVector::new(3, 0b011);
        assert!(pr.contains(&Point::Prod { s, i: 2 }));
        assert!(!pr.contains(&Point::Prod { s, i: 3 }));
    }

    #[test]
    fn doubled_side_is_cleared_off_the_doubled_set() {
        let one = CantorPoint::constant(true);
        let sp = SpaceId::Doubled { doubled: vec![one.clone()] };
        let kept = sp.canonicalize(Point::Doubled { base: one.clone(), side: true }).unwrap();
        assert_eq!(kept, Point::Doubled { base: one, side: true });
        let zero = CantorPoint::constant(false);
        let cleared = sp.canonicalize(Point::Doubled { base: zero.clone(), side: true }).unwrap();
        assert_eq!(cleared, Point::Doubled { base: zero, side: false });
    }

    #[test]
    fn indicator_admissibility_tracks_the_algebra() {
        let pairing = AlgebraDescriptor::Pairing { pair_mask: PairMask::All, exceptions: vec![] };
        assert!(SpaceId::Omega(OmegaAlgebra::Pairing).admits_indicator(&pairing));
        assert!(SpaceId::Omega(OmegaAlgebra::Full).admits_indicator(&pairing));
        assert!(!SpaceId::Omega(OmegaAlgebra::Density).admits_indicator(&pairing));
    }
}
