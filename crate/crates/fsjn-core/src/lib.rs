//! Exact-arithmetic construction, transformation, and verification of finitely
//! supported weak*-null sequences of signed measures on symbolic compact spaces.
//!
//! Everything in this crate computes with arbitrary-precision rationals; there
//! are no floating-point numbers anywhere in the core. Measures are finite
//! maps from points to nonzero rational coefficients, spaces are symbolic
//! (unit square, naturals with a Boolean algebra, Cantor words, sign-vector
//! products, duplicates), and every derived quantity is either exact or
//! carried with an explicit certificate that can be re-verified.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod algebra;
pub mod analysis;
pub mod cylinder;
pub mod functional;
pub mod generators;
pub mod measure;
pub mod point;
pub mod qenum;
pub mod rational;
pub mod seq;
pub mod space;
pub mod transforms;

pub use measure::FiniteSignedMeasure;
pub use point::Point;
pub use rational::Rational;
pub use seq::SequenceHandle;

