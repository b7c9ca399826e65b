//! Finitely supported signed measures: finite maps from points to nonzero
//! rational coefficients, with exact norm, Jordan decomposition, restriction,
//! linear combination, and evaluation against point functions.

use alloc::collections::btree_map::BTreeMap;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::point::Point;
use crate::rational::Rational;

/// A finitely supported signed measure `μ = Σ_x α_x δ_x` with all `α_x ≠ 0`.
///
/// The atom map is ordered by the structural point order, so iteration order —
/// and hence every derived artifact — is deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FiniteSignedMeasure {
    atoms: BTreeMap<Point, Rational>,
}

impl FiniteSignedMeasure {
    /// The zero measure.
    pub fn zero() -> Self {
        FiniteSignedMeasure { atoms: BTreeMap::new() }
    }

    /// Builds a measure from `(point, coefficient)` pairs; coefficients at
    /// repeated points are summed and zero sums are dropped.
    pub fn from_atoms<I: IntoIterator<Item = (Point, Rational)>>(atoms: I) -> Self {
        let mut m = FiniteSignedMeasure::zero();
        for (p, c) in atoms {
            m.add_atom(p, c);
        }
        m
    }

    /// The unit point mass `δ_x`.
    pub fn dirac(p: Point) -> Self {
        use num_traits::One;
        FiniteSignedMeasure::from_atoms([(p, Rational::one())])
    }

    /// Adds `c·δ_p`, folding into an existing atom and dropping a zero result.
    pub fn add_atom(&mut self, p: Point, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.atoms.entry(p) {
            alloc::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            alloc::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// The coefficient `μ({p})` (zero off the support).
    pub fn coefficient(&self, p: &Point) -> Rational {
        self.atoms.get(p).cloned().unwrap_or_else(Rational::zero)
    }

    /// Iterates `(point, coefficient)` in point order.
    pub fn atoms(&self) -> impl Iterator<Item = (&Point, &Rational)> {
        self.atoms.iter()
    }

    /// The support as an ordered list of points.
    pub fn support(&self) -> Vec<&Point> {
        self.atoms.keys().collect()
    }

    /// Number of atoms.
    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    /// True iff this is the zero measure.
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty()
    }

    /// The total-variation norm `Σ_x |α_x|`, exact.
    pub fn norm(&self) -> Rational {
        self.atoms.values().fold(Rational::zero(), |acc, c| acc + c.abs())
    }

    /// Jordan decomposition `(μ⁺, μ⁻)`: both nonnegative, with disjoint
    /// supports and `μ = μ⁺ − μ⁻`.
    pub fn jordan_split(&self) -> (FiniteSignedMeasure, FiniteSignedMeasure) {
        let mut pos = FiniteSignedMeasure::zero();
        let mut neg = FiniteSignedMeasure::zero();
        for (p, c) in &self.atoms {
            if c.is_positive() {
                pos.atoms.insert(p.clone(), c.clone());
            } else {
                neg.atoms.insert(p.clone(), -c.clone());
            }
        }
        (pos, neg)
    }

    /// The restriction `μ↾F`: keeps exactly the atoms whose point satisfies `keep`.
    pub fn restrict<F: FnMut(&Point) -> bool>(&self, mut keep: F) -> FiniteSignedMeasure {
        FiniteSignedMeasure {
            atoms: self
                .atoms
                .iter()
                .filter(|(p, _)| keep(p))
                .map(|(p, c)| (p.clone(), c.clone()))
                .collect(),
        }
    }

    /// The norm of the restriction to the complement of `keep`'s set,
    /// `∥μ↾F^c∥`, without materializing it.
    pub fn norm_off<F: FnMut(&Point) -> bool>(&self, mut keep: F) -> Rational {
        self.atoms
            .iter()
            .filter(|(p, _)| !keep(p))
            .fold(Rational::zero(), |acc, (_, c)| acc + c.abs())
    }

    /// The exact linear combination `ca·a + cb·b`, zero coefficients dropped.
    pub fn combine(
        ca: &Rational,
        a: &FiniteSignedMeasure,
        cb: &Rational,
        b: &FiniteSignedMeasure,
    ) -> FiniteSignedMeasure {
        let mut out = FiniteSignedMeasure::zero();
        for (p, c) in &a.atoms {
            out.add_atom(p.clone(), ca * c);
        }
        for (p, c) in &b.atoms {
            out.add_atom(p.clone(), cb * c);
        }
        out
    }

    /// The scalar multiple `c·μ`.
    pub fn scale(&self, c: &Rational) -> FiniteSignedMeasure {
        if c.is_zero() {
            return FiniteSignedMeasure::zero();
        }
        FiniteSignedMeasure {
            atoms: self.atoms.iter().map(|(p, a)| (p.clone(), a * c)).collect(),
        }
    }

    /// Evaluates `μ(f) = Σ_x α_x f(x)` for a total point function `f`.
    pub fn evaluate_with<F: FnMut(&Point) -> Rational>(&self, mut f: F) -> Rational {
        self.atoms.iter().fold(Rational::zero(), |acc, (p, c)| acc + c * f(p))
    }

    /// Evaluates against a fallible point function, propagating the first error.
    pub fn try_evaluate_with<E, F: FnMut(&Point) -> Result<Rational, E>>(
        &self,
        mut f: F,
    ) -> Result<Rational, E> {
        let mut acc = Rational::zero();
        for (p, c) in &self.atoms {
            acc += c * f(p)?;
        }
        Ok(acc)
    }

    /// Removes the atom at `p` (if any), returning its coefficient.
    pub fn remove_atom(&mut self, p: &Point) -> Option<Rational> {
        self.atoms.remove(p)
    }

    /// Whether the supports of `self` and `other` are disjoint.
    pub fn support_disjoint(&self, other: &FiniteSignedMeasure) -> bool {
        // iterate the smaller map, probe the larger
        let (small, large) = if self.atoms.len() <= other.atoms.len() {
            (&self.atoms, &other.atoms)
        } else {
            (&other.atoms, &self.atoms)
        };
        !small.keys().any(|p| large.contains_key(p))
    }

    /// The intersection of the two supports, in point order.
    pub fn support_intersection(&self, other: &FiniteSignedMeasure) -> Vec<Point> {
        self.atoms.keys().filter(|p| other.atoms.contains_key(p)).cloned().collect()
    }
}
