//! Arbitrary-precision rational helpers: construction, parsing, rendering,
//! powers of two, integer square roots, and directed 128-bit-precision
//! rational enclosures of square roots.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// The coefficient field of every measure in this crate.
pub type Rational = num_rational::Ratio<BigInt>;

/// `p/q` from machine integers (`q != 0`).
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// The integer `n` as a rational.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// The natural `n` as a rational.
pub fn nat(n: u64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^k` as a rational.
pub fn pow2(k: u64) -> Rational {
    Rational::from_integer(BigInt::one() << k)
}

/// `2^-k` as a rational.
pub fn pow2_inv(k: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::one() << k)
}

/// Error for [`parse_rational`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError {
    input: String,
}

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal {:?} (expected `p` or `p/q` with q > 0)", self.input)
    }
}

/// Parses `"p"` or `"p/q"` (optional leading `-` on `p`; `q` positive).
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError { input: String::from(s) };
    let mut parts = s.splitn(2, '/');
    let p = parts.next().ok_or_else(err)?;
    let p: BigInt = p.parse().map_err(|_| err())?;
    match parts.next() {
        None => Ok(Rational::from_integer(p)),
        Some(q) => {
            let q: BigInt = q.parse().map_err(|_| err())?;
            if q.is_positive() {
                Ok(Rational::new(p, q))
            } else {
                Err(err())
            }
        }
    }
}

/// Renders a rational as `"p"` (integers) or `"p/q"` in lowest terms, `q > 0`.
pub fn format_rational(r: &Rational) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    if r.denom().is_one() {
        let _ = write!(out, "{}", r.numer());
    } else {
        let _ = write!(out, "{}/{}", r.numer(), r.denom());
    }
    out
}

/// Renders a decimal approximation with `sig` significant digits
/// (round-half-away-from-zero), e.g. `1/3 → "0.33333333333333333333"` at 20.
/// Advisory only; the fraction string is the authoritative rendering.
pub fn decimal_approx(r: &Rational, sig: usize) -> String {
    use core::fmt::Write;
    if r.is_zero() {
        return String::from("0");
    }
    let neg = r.is_negative();
    let a = r.abs();
    // Find the decimal exponent e with 10^e <= a < 10^(e+1).
    let ten = Rational::from_integer(BigInt::from(10));
    let mut e: i64 = 0;
    let mut scaled = a.clone();
    while scaled >= ten {
        scaled /= &ten;
        e += 1;
    }
    while scaled < Rational::one() {
        scaled *= &ten;
        e -= 1;
    }
    // digits = round(a * 10^(sig-1-e)), which has exactly `sig` digits
    // (or sig+1 after rounding up across a power of ten).
    let shift = sig as i64 - 1 - e;
    let scaled = if shift >= 0 {
        a * ten_pow(shift as u64)
    } else {
        a / ten_pow((-shift) as u64)
    };
    let digits = round_to_integer(&scaled);
    let mut ds: Vec<u8> = Vec::new();
    {
        use num_integer::Integer;
        let mut d = digits.to_biguint().expect("non-negative by construction");
        if d.is_zero() {
            ds.push(0);
        }
        let ten_u = BigUint::from(10u8);
        while !d.is_zero() {
            let (q, r) = d.div_rem(&ten_u);
            ds.push(r.to_u8().unwrap());
            d = q;
        }
    }
    ds.reverse();
    let e = e + (ds.len() as i64 - sig as i64); // rounding may add a digit
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    // Plain notation when the exponent is moderate, otherwise e-notation.
    if (-4..16).contains(&e) {
        if e < 0 {
            out.push_str("0.");
            for _ in 0..(-e - 1) {
                out.push('0');
            }
            for d in &ds {
                let _ = write!(out, "{d}");
            }
        } else {
            for (i, d) in ds.iter().enumerate() {
                if i as i64 == e + 1 {
                    out.push('.');
                }
                let _ = write!(out, "{d}");
            }
            for _ in ds.len()..(e + 1) as usize {
                out.push('0');
            }
        }
        trim_fraction_zeros(&mut out);
    } else {
        let _ = write!(out, "{}", ds[0]);
        out.push('.');
        for d in &ds[1..] {
            let _ = write!(out, "{d}");
        }
        trim_fraction_zeros(&mut out);
        let _ = write!(out, "e{e}");
    }
    out
}

/// Removes trailing zeros after a decimal point (and a bare trailing point).
fn trim_fraction_zeros(out: &mut String) {
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
}

fn ten_pow(k: u64) -> Rational {
    let mut n = BigInt::one();
    for _ in 0..k {
        n *= 10;
    }
    Rational::from_integer(n)
}

/// Rounds half away from zero to the nearest integer.
pub fn round_to_integer(r: &Rational) -> BigInt {
    let two = BigInt::from(2);
    let num2 = r.numer() * &two;
    let den = r.denom();
    let doubled = Rational::new(num2, den.clone());
    let fl = doubled.floor().to_integer();
    // floor((2p/q + 1)/2) implements round-half-up on |r|; adjust for sign.
    if r.is_negative() {
        -((-fl + BigInt::one()) / two)
    } else {
        (fl + BigInt::one()) / two
    }
}

/// `⌊√n⌋` by Newton iteration on big naturals.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let one = BigUint::one();
    // Initial guess: 2^(ceil(bits/2)) ≥ √n.
    let mut x: BigUint = &one << n.bits().div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            return x;
        }
        x = y;
    }
}

/// Directed rational enclosure of `√r` for `r ≥ 0`:
/// returns `(lo, hi)` with `lo ≤ √r ≤ hi` and `hi − lo ≤ 2^-bits · (1/denq + …)`,
/// computed as `⌊√(p·q·4^bits)⌋ / (q·2^bits)` and the matching ceiling.
pub fn sqrt_enclosure(r: &Rational, bits: u64) -> (Rational, Rational) {
    assert!(!r.is_negative(), "sqrt of a negative rational");
    if r.is_zero() {
        return (Rational::zero(), Rational::zero());
    }
    let p = r.numer().to_biguint().expect("non-negative");
    let q = r.denom().to_biguint().expect("positive denominator");
    // √(p/q) = √(pq)/q; scale by 2^bits under the root.
    let scaled = &p * &q << (2 * bits);
    let root = isqrt(&scaled);
    let denom = BigInt::from(q) << bits;
    let lo = Rational::new(BigInt::from(root.clone()), denom.clone());
    let hi_num = if &root * &root == scaled { root } else { root + BigUint::one() };
    let hi = Rational::new(BigInt::from(hi_num), denom);
    (lo, hi)
}

/// `⌈a/b⌉` for rationals with `b > 0`, as a big integer.
pub fn ceil_ratio(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}
