//! The fixed enumeration `q` of the rationals in `[0,1]` used by the
//! square-space constructions.
//!
//! Base sequence: the Calkin–Wilf tree walked in breadth-first order, filtered
//! to values `≤ 1` (the root `1` first, then within level `d ≥ 1` exactly the
//! nodes reached by a final left step, in breadth-first position order). The
//! value `0` is not a tree node and is spliced in at index 3:
//!
//! ```text
//! q = [ 1, 1/2, 1/3, 0, 2/3, 1/4, 3/5, 2/5, 3/4, 1/5, 4/7, … ]
//! ```
//!
//! Both directions are closed-form tree walks (no caching, no shared state):
//! `value(index)` descends from the root along the index's bit path, and
//! `index(value)` ascends the parent chain. The two are exact inverses, which
//! the tests check directly.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Index of the spliced-in value `0`.
const ZERO_INDEX: u64 = 3;

/// The `j`-th rational of the enumeration of `Q ∩ [0,1]`.
pub fn q_at(j: u64) -> Rational {
    match j.cmp(&ZERO_INDEX) {
        core::cmp::Ordering::Less => base_at(j),
        core::cmp::Ordering::Equal => Rational::zero(),
        core::cmp::Ordering::Greater => base_at(j - 1),
    }
}

/// The index of a rational `r ∈ [0,1]` in the enumeration.
///
/// Returns `None` when `r` is outside `[0,1]`.
pub fn q_index(r: &Rational) -> Option<u64> {
    if r.is_negative() || *r > Rational::one() {
        return None;
    }
    if r.is_zero() {
        return Some(ZERO_INDEX);
    }
    let f = base_index(r);
    Some(if f < ZERO_INDEX { f } else { f + 1 })
}

/// The `j`-th element of the `≤ 1`-filtered breadth-first Calkin–Wilf walk:
/// `[1, 1/2, 1/3, 2/3, 1/4, 3/5, 2/5, 3/4, …]`.
///
/// Index `j = 2^(d−1) + t` (for `j ≥ 1`) decodes to tree level `d` and branch
/// word `t` (most significant bit first, `0` = left child `a/(a+b)`,
/// `1` = right child `(a+b)/b`), followed by one final left step.
fn base_at(j: u64) -> Rational {
    if j == 0 {
        return Rational::one();
    }
    let d = 64 - j.leading_zeros() as u64; // j in [2^(d-1), 2^d)
    let t = j - (1u64 << (d - 1));
    let mut a = BigInt::one();
    let mut b = BigInt::one();
    for step in (0..d - 1).rev() {
        if t >> step & 1 == 1 {
            a += &b; // right: (a+b)/b
        } else {
            b += &a; // left: a/(a+b)
        }
    }
    // final left step makes the value ≤ 1
    b += &a;
    Rational::new(a, b)
}

/// Inverse of [`base_at`] for `r ∈ (0,1]`, by walking the parent chain
/// (`a < b`: parent `a/(b−a)` via left; `a > b`: parent `(a−b)/b` via right).
fn base_index(r: &Rational) -> u64 {
    let mut a = r.numer().clone();
    let mut b = r.denom().clone();
    debug_assert!(a.is_positive() && b.is_positive());
    if a == b {
        return 0;
    }
    let mut path_up = 0u64; // bits recorded leaf-to-root, low bit = last step
    let mut depth = 0u32;
    while a != b {
        if a < b {
            b -= &a; // came via a left step (bit 0)
        } else {
            a -= &b; // came via a right step (bit 1)
            path_up |= 1 << depth;
        }
        depth += 1;
        assert!(depth < 64, "enumeration index exceeds u64 range");
    }
    // The last step (lowest recorded bit… i.e. the step from the parent to the
    // leaf) is a left step for values < 1; drop it and reverse the rest into
    // root-to-parent order t.
    debug_assert_eq!(path_up & 1, 0, "values in (0,1) end with a left step");
    let mut t = 0u64;
    for i in (1..depth).rev() {
        t = (t << 1) | (path_up >> i & 1);
    }
    (1u64 << (depth - 1)) + t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use num_traits::ToPrimitive;

    /// Reference generator: the classic value-recurrence walk
    /// `c_{k+1} = 1/(2⌊c_k⌋ − c_k + 1)` from `c_0 = 1` enumerates the whole
    /// Calkin–Wilf sequence; filtering to `≤ 1` must reproduce `base_at`.
    fn recurrence_prefix(len: usize) -> alloc::vec::Vec<Rational> {
        let mut out = alloc::vec::Vec::new();
        let mut c = Rational::one();
        while out.len() < len {
            if c <= Rational::one() {
                out.push(c.clone());
            }
            let floor = c.floor();
            c = Rational::one() / (floor * rat(2, 1) - &c + Rational::one());
        }
        out
    }

    #[test]
    fn frozen_prefix() {
        let expect = [
            rat(1, 1),
            rat(1, 2),
            rat(1, 3),
            rat(0, 1),
            rat(2, 3),
            rat(1, 4),
            rat(3, 5),
            rat(2, 5),
            rat(3, 4),
            rat(1, 5),
            rat(4, 7),
        ];
        for (j, want) in expect.iter().enumerate() {
            assert_eq!(q_at(j as u64), *want, "q_{j}");
        }
    }

    #[test]
    fn matches_recurrence_walk() {
        let reference = recurrence_prefix(300);
        for (j, want) in reference.iter().enumerate() {
            assert_eq!(base_at(j as u64), *want, "filtered walk at {j}");
        }
    }

    #[test]
    fn index_inverts_value() {
        for j in 0..500u64 {
            let r = q_at(j);
            assert_eq!(q_index(&r), Some(j), "index of q_{j} = {r}");
        }
        // and on denominator-bounded rationals directly
        for den in 1..=17u64 {
            for num in 0..=den {
                let r = rat(num as i64, den as i64);
                let j = q_index(&r).unwrap();
                assert_eq!(q_at(j), r);
            }
        }
        assert_eq!(q_index(&rat(3, 2)), None);
        assert_eq!(q_index(&rat(-1, 2)), None);
    }

    #[test]
    fn enumeration_has_zero_at_three() {
        assert!(q_at(3).is_zero());
        assert!(q_at(3).to_f64().unwrap() == 0.0);
    }
}
