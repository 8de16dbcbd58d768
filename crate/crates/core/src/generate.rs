//! Seeded random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{Instance, Tags, ValuationClass, ValuationProfile};
use crate::numeric::Rational;

/// The value family a random matrix is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSpace {
    /// Entries in `{0, 1}`.
    Binary,
    /// Each row picks levels `p < q` in `0..=max`, then every entry is `p` or `q`.
    Bivalued { max: u32 },
    /// Entries uniform in `0..=max`.
    SmallInteger { max: u32 },
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rows<R: Rng>(rng: &mut R, n: usize, m: usize, space: ValueSpace) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|_| match space {
            ValueSpace::Binary => (0..m).map(|_| Rational::from(rng.gen_range(0..=1i64))).collect(),
            ValueSpace::SmallInteger { max } => (0..m)
                .map(|_| Rational::from(rng.gen_range(0..=max as i64)))
                .collect(),
            ValueSpace::Bivalued { max } => {
                let max = max.max(1) as i64;
                let p = rng.gen_range(0..max);
                let q = rng.gen_range(p + 1..=max);
                (0..m)
                    .map(|_| Rational::from(if rng.gen_bool(0.5) { q } else { p }))
                    .collect()
            }
        })
        .collect()
}

pub fn random_profile<R: Rng>(rng: &mut R, n: usize, m: usize, space: ValueSpace) -> ValuationProfile {
    ValuationProfile::new(random_rows(rng, n, m, space)).expect("random rows are valid")
}

/// `v` and `u` drawn independently from the given spaces.
pub fn random_instance(seed: u64, n: usize, m: usize, agents: ValueSpace, allocator: ValueSpace) -> Instance {
    let mut rng = rng(seed);
    let v = random_profile(&mut rng, n, m, agents);
    let u = random_profile(&mut rng, n, m, allocator);
    Instance::new(v, u).expect("random instance is valid")
}

/// A random instance whose allocator rows are all equal.
pub fn random_identical_allocator(seed: u64, n: usize, m: usize, max: u32) -> Instance {
    let mut rng = rng(seed);
    let v = random_profile(&mut rng, n, m, ValueSpace::SmallInteger { max });
    let row = random_rows(&mut rng, 1, m, ValueSpace::SmallInteger { max }).remove(0);
    let u = ValuationProfile::new(vec![row; n]).expect("valid rows");
    let tags = Tags {
        agents: None,
        allocator: Some(ValuationClass::IdenticalAllocator),
    };
    Instance::with_tags(v, u, tags).expect("identical rows satisfy the tag")
}

/// Draws `n` and `m` uniformly from the inclusive ranges, then both matrices;
/// with `identical_allocator` every allocator row copies the first.
pub fn random_sized_instance(
    seed: u64,
    agents: (usize, usize),
    items: (usize, usize),
    agents_space: ValueSpace,
    allocator_space: ValueSpace,
    identical_allocator: bool,
) -> Instance {
    let mut rng = rng(seed);
    let n = rng.gen_range(agents.0.max(1)..=agents.1.max(agents.0).max(1));
    let m = rng.gen_range(items.0..=items.1.max(items.0));
    let v = random_profile(&mut rng, n, m, agents_space);
    let u = if identical_allocator {
        let row = random_rows(&mut rng, 1, m, allocator_space).remove(0);
        ValuationProfile::new(vec![row; n]).expect("valid rows")
    } else {
        random_profile(&mut rng, n, m, allocator_space)
    };
    Instance::new(v, u).expect("random instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_generation_is_reproducible() {
        let space = ValueSpace::SmallInteger { max: 20 };
        assert_eq!(random_instance(7, 3, 5, space, space), random_instance(7, 3, 5, space, space));
        assert_ne!(random_instance(7, 3, 5, space, space), random_instance(8, 3, 5, space, space));
    }

    #[test]
    fn spaces_respect_their_class() {
        for seed in 0..50 {
            let inst = random_instance(seed, 3, 6, ValueSpace::Binary, ValueSpace::Bivalued { max: 5 });
            assert!(inst.v().is_binary());
            assert!(inst.u().is_bivalued());
            assert!(random_identical_allocator(seed, 3, 4, 9).u().has_identical_rows());
            let sized = random_sized_instance(seed, (2, 4), (0, 6), ValueSpace::Binary, ValueSpace::Binary, true);
            assert!((2..=4).contains(&sized.n()) && sized.m() <= 6);
            assert!(sized.u().has_identical_rows());
        }
    }
}
