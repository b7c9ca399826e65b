//! Points of the symbolic spaces: rational pairs in the unit square, naturals,
//! eventually constant binary words (Cantor points), sign vectors with a
//! coordinate index, duplicated Cantor points, and indexed pair levels.
//!
//! `Point` has a total structural order (variant tag first, then fields
//! lexicographically); every deterministic choice in the crate — map layout,
//! "least atom" picks, report row order — uses this order.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::rational::{format_rational, Rational};

/// An eventually constant infinite binary sequence, stored as a finite prefix
/// `word` followed by `tail` repeated forever.
///
/// Canonical form: `word` never ends with the tail bit, so each point has a
/// unique representation (`new` canonicalizes).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CantorPoint {
    word: Vec<bool>,
    tail: bool,
}

impl CantorPoint {
    /// Builds the point `word ⌢ tail^ω`, trimming `word` to canonical form.
    pub fn new(mut word: Vec<bool>, tail: bool) -> Self {
        while word.last() == Some(&tail) {
            word.pop();
        }
        CantorPoint { word, tail }
    }

    /// The constant sequence `tail^ω`.
    pub fn constant(tail: bool) -> Self {
        CantorPoint { word: Vec::new(), tail }
    }

    /// The canonical finite prefix (never ends with the tail bit).
    pub fn word(&self) -> &[bool] {
        &self.word
    }

    /// The eventually repeated bit.
    pub fn tail(&self) -> bool {
        self.tail
    }

    /// The `i`-th bit of the infinite sequence.
    pub fn bit(&self, i: usize) -> bool {
        self.word.get(i).copied().unwrap_or(self.tail)
    }

    /// Whether the point lies in the cylinder of all extensions of `prefix`.
    pub fn in_cylinder(&self, prefix: &[bool]) -> bool {
        prefix.iter().enumerate().all(|(i, &b)| self.bit(i) == b)
    }

    /// Compact rendering: word bits then `(b)^ω`, e.g. `01(1)^ω`.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for &b in &self.word {
            s.push(if b { '1' } else { '0' });
        }
        s.push('(');
        s.push(if self.tail { '1' } else { '0' });
        s.push_str(")^w");
        s
    }
}

/// A finite ±1-vector `s ∈ {−1,+1}^n` with `n ≤ 63`, bit `i` set ⇔ `s(i) = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignVector {
    n: u32,
    bits: u64,
}

impl SignVector {
    /// Builds a sign vector of length `n` from the low `n` bits of `bits`.
    pub fn new(n: u32, bits: u64) -> Self {
        assert!(n <= 63, "sign vectors are limited to 63 coordinates");
        let mask = if n == 0 { 0 } else { (1u64 << n) - 1 };
        SignVector { n, bits: bits & mask }
    }

    /// Vector length.
    pub fn len(&self) -> u32 {
        self.n
    }

    /// True when the vector has no coordinates.
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Raw bit pattern (bit `i` set ⇔ `s(i) = +1`).
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// The sign at coordinate `i < n`: `+1` or `−1`.
    pub fn sign(&self, i: u32) -> i64 {
        debug_assert!(i < self.n);
        if self.bits >> i & 1 == 1 {
            1
        } else {
            -1
        }
    }

    /// Rendering as `+-+…` (coordinate 0 first).
    pub fn render(&self) -> String {
        (0..self.n).map(|i| if self.sign(i) > 0 { '+' } else { '-' }).collect()
    }
}

/// A point of one of the supported symbolic spaces.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Point {
    /// A rational pair in `[0,1]²`.
    Square { x: Rational, y: Rational },
    /// A natural number (an isolated point of a Stone space over `ω`).
    Nat(u64),
    /// An eventually constant binary word.
    Word(CantorPoint),
    /// A sign vector together with a coordinate index `i < len`.
    Prod { s: SignVector, i: u32 },
    /// A Cantor point with a side bit (meaningful only on doubled points).
    Doubled { base: CantorPoint, side: bool },
    /// An index with a level bit (the `(k,0)/(k,1)` pair structure).
    Pair { k: u64, level: bool },
}

impl Point {
    /// Convenience constructor for square points.
    pub fn square(x: Rational, y: Rational) -> Self {
        Point::Square { x, y }
    }

    /// A stable, human-readable key; injective on each space's points.
    pub fn render(&self) -> String {
        use core::fmt::Write;
        let mut out = String::new();
        match self {
            Point::Square { x, y } => {
                let _ = write!(out, "({},{})", format_rational(x), format_rational(y));
            }
            Point::Nat(n) => {
                let _ = write!(out, "{n}");
            }
            Point::Word(w) => out.push_str(&w.render()),
            Point::Prod { s, i } => {
                let _ = write!(out, "({},{i})", s.render());
            }
            Point::Doubled { base, side } => {
                let _ = write!(out, "({},{})", base.render(), u8::from(*side));
            }
            Point::Pair { k, level } => {
                let _ = write!(out, "({k},{})", u8::from(*level));
            }
        }
        out
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}
