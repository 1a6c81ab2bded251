//! Seeded randomness.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] whose seed is
//! derived from a root seed and a path of named substreams, e.g.
//! `root / "fold" / 3 / "algorithm" / "naive"`. Adding a new consumer under a
//! new name never shifts the draws of an existing one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// A position in the seed tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

impl SeedStream {
    pub fn new(root: u64) -> Self {
        SeedStream(mix(root ^ 0x6a09_e667_f3bc_c908))
    }

    pub fn child(self, name: &str) -> Self {
        SeedStream(mix(self.0 ^ fnv1a(name.as_bytes())))
    }

    pub fn index(self, i: u64) -> Self {
        SeedStream(mix(self.0.wrapping_add(mix(i.wrapping_add(0x9e37_79b9_7f4a_7c15)))))
    }

    pub fn seed(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn named_substreams_are_independent_of_siblings() {
        let root = SeedStream::new(7);
        let a = root.child("fold").index(2).child("random");
        let b = root.child("fold").index(2).child("random");
        assert_eq!(a, b);
        assert_ne!(a, root.child("fold").index(2).child("naive"));
        assert_ne!(root.child("fold").index(1), root.child("fold").index(2));
        let x: u64 = a.rng().random();
        let y: u64 = b.rng().random();
        assert_eq!(x, y);
    }
}
