//! Deterministic sampling of rectangle predicate pairs from the run seed.
//! Every random choice in the tool flows from one seed so reruns are
//! reproducible and reports can embed the seed they used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsjn_core::functional::{IndexSet, SignSet};

/// A sampled rectangle pair with human-readable descriptions.
#[derive(Debug, Clone)]
pub struct RectPair {
    pub a: SignSet,
    pub b: IndexSet,
    pub a_desc: String,
    pub b_desc: String,
}

pub fn describe_sign_set(a: &SignSet) -> String {
    match a {
        SignSet::All => String::from("all"),
        SignSet::Cylinder { constraints } => {
            let parts: Vec<String> = constraints
                .iter()
                .map(|(i, plus)| format!("{i}{}", if *plus { '+' } else { '-' }))
                .collect();
            format!("cylinder[{}]", parts.join(" "))
        }
        SignSet::Seeded { seed } => format!("seeded:{seed:#x}"),
    }
}

pub fn describe_index_set(b: &IndexSet) -> String {
    match b {
        IndexSet::All => String::from("all"),
        IndexSet::UpTo { c } => format!("upto:{c}"),
        IndexSet::EvenIndex => String::from("even"),
        IndexSet::Seeded { seed } => format!("seeded:{seed:#x}"),
    }
}

fn sample_sign_set(rng: &mut ChaCha8Rng) -> SignSet {
    match rng.gen_range(0u8..4) {
        0 => SignSet::All,
        1 | 2 => {
            let count = rng.gen_range(1usize..=3);
            let constraints = (0..count)
                .map(|_| (rng.gen_range(0u32..6), rng.gen_bool(0.5)))
                .collect();
            SignSet::Cylinder { constraints }
        }
        _ => SignSet::Seeded { seed: rng.gen() },
    }
}

fn sample_index_set(rng: &mut ChaCha8Rng) -> IndexSet {
    match rng.gen_range(0u8..5) {
        0 => IndexSet::All,
        1 => IndexSet::EvenIndex,
        2 | 3 => IndexSet::UpTo { c: rng.gen_range(1u32..8) },
        _ => IndexSet::Seeded { seed: rng.gen() },
    }
}

/// Samples `count` rectangle pairs; the stream is a pure function of `seed`.
pub fn rect_pairs(seed: u64, count: usize) -> Vec<RectPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let a = sample_sign_set(&mut rng);
            let b = sample_index_set(&mut rng);
            let a_desc = describe_sign_set(&a);
            let b_desc = describe_index_set(&b);
            RectPair { a, b, a_desc, b_desc }
        })
        .collect()
}
