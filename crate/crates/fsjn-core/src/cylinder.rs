//! Non-atomic measures on the Cantor space presented by their values on
//! cylinders: a rule assigning an exact rational to every finite binary word,
//! together with a *declared* total-variation norm.
//!
//! The norm of such a measure is not finitely computable, so it is declared
//! and cross-checked: the partition sums `Σ_{|s|=k} |value([s])|` must be
//! nondecreasing in `k` and never exceed the declaration.

use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{Signed, Zero};

use crate::rational::{pow2_inv, Rational};

/// The rule giving a measure's value on each cylinder `[s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CylinderRule {
    /// The `n`-th coordinate-sign measure: on `[s]` the value is
    /// `±2^{−|s|}` when `n < |s|` (sign `+` iff `s(n) = 1`), else `0`.
    CoordinateSign { n: u64 },
}

/// A cylinder-presented measure with a declared norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderMeasure {
    /// Value rule.
    pub rule: CylinderRule,
    /// Declared total-variation norm (not computed; cross-checked).
    pub declared_norm: Rational,
}

/// A violation found by [`CylinderMeasure::additivity_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdditivityViolation {
    /// The word at which `value([s]) ≠ value([s0]) + value([s1])`.
    pub word: Vec<bool>,
    /// Parent value.
    pub parent: Rational,
    /// Sum of the two child values.
    pub children_sum: Rational,
}

impl CylinderMeasure {
    /// The measure's exact value on the cylinder `[word]`.
    pub fn eval(&self, word: &[bool]) -> Rational {
        match &self.rule {
            CylinderRule::CoordinateSign { n } => {
                let n = *n as usize;
                if n < word.len() {
                    let v = pow2_inv(word.len() as u64);
                    if word[n] {
                        v
                    } else {
                        -v
                    }
                } else {
                    Rational::zero()
                }
            }
        }
    }

    /// Checks `value([s]) = value([s⌢0]) + value([s⌢1])` for every word with
    /// `|s| < depth`, exactly. Returns the first violation, if any.
    pub fn additivity_check(&self, depth: usize) -> Result<(), AdditivityViolation> {
        let mut word: Vec<bool> = Vec::new();
        additivity_walk(&|w| self.eval(w), &mut word, depth)
    }

    /// The partition lower bound `Σ_{|s| = depth} |value([s])|` for the norm.
    pub fn partition_sum(&self, depth: usize) -> Rational {
        let mut total = Rational::zero();
        let mut word = alloc::vec![false; depth];
        loop {
            total += self.eval(&word).abs();
            // binary increment; stop after the all-ones word
            let mut i = 0;
            loop {
                if i == depth {
                    return total;
                }
                if word[i] {
                    word[i] = false;
                    i += 1;
                } else {
                    word[i] = true;
                    break;
                }
            }
        }
    }

    /// Cross-checks the declared norm: partition sums must be nondecreasing in
    /// the depth and bounded by the declaration. Returns a description of the
    /// first failure.
    pub fn declared_norm_check(&self, max_depth: usize) -> Result<(), String> {
        let mut prev = Rational::zero();
        for depth in 0..=max_depth {
            let s = self.partition_sum(depth);
            if s < prev {
                return Err(alloc::format!(
                    "partition sum decreased from depth {} to {}",
                    depth - 1,
                    depth
                ));
            }
            if s > self.declared_norm {
                return Err(alloc::format!(
                    "partition sum at depth {depth} exceeds the declared norm"
                ));
            }
            prev = s;
        }
        Ok(())
    }
}

/// Depth-first additivity walk over all words shorter than `depth`.
fn additivity_walk(
    eval: &dyn Fn(&[bool]) -> Rational,
    word: &mut Vec<bool>,
    depth: usize,
) -> Result<(), AdditivityViolation> {
    if word.len() >= depth {
        return Ok(());
    }
    let parent = eval(word);
    word.push(false);
    let left = eval(word);
    additivity_walk(eval, word, depth)?;
    *word.last_mut().expect("just pushed") = true;
    let right = eval(word);
    additivity_walk(eval, word, depth)?;
    word.pop();
    let children_sum = left + right;
    if parent != children_sum {
        return Err(AdditivityViolation { word: word.clone(), parent, children_sum });
    }
    Ok(())
}

/// The coordinate-sign cylinder sequence: element `n` integrates the `n`-th
/// coordinate sign against the fair-coin product measure; every element has
/// declared norm 1.
pub fn coordinate_sign_sequence(n: u64) -> CylinderMeasure {
    CylinderMeasure {
        rule: CylinderRule::CoordinateSign { n },
        declared_norm: num_traits::One::one(),
    }
}
