use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A deterministic random stream identified by a master seed and a path of
/// `(tag, index)` pairs. Equal paths give identical streams regardless of
/// the order in which they are created, so parallel work can derive its
/// randomness without sharing a generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    master_seed: u64,
    path: Vec<(String, u64)>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

impl RngStream {
    pub fn new(master_seed: u64) -> Self {
        RngStream { master_seed, path: Vec::new() }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[(String, u64)] {
        &self.path
    }

    pub fn child(&self, tag: &str, index: u64) -> RngStream {
        let mut path = self.path.clone();
        path.push((tag.to_string(), index));
        RngStream { master_seed: self.master_seed, path }
    }

    pub fn seed(&self) -> u64 {
        self.path.iter().fold(splitmix64(self.master_seed), |h, (tag, idx)| {
            splitmix64(splitmix64(h ^ fnv1a(tag)) ^ *idx)
        })
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn equal_paths_equal_streams() {
        let a = RngStream::new(7).child("tour", 3).child("bird", 1);
        let b = RngStream::new(7).child("tour", 3).child("bird", 1);
        let xa: Vec<u64> = (0..5).map({
            let mut r = a.rng();
            move |_| r.gen()
        }).collect();
        let xb: Vec<u64> = (0..5).map({
            let mut r = b.rng();
            move |_| r.gen()
        }).collect();
        assert_eq!(xa, xb);
    }

    #[test]
    fn distinct_paths_differ() {
        let root = RngStream::new(7);
        let seeds = [
            root.seed(),
            root.child("tour", 0).seed(),
            root.child("tour", 1).seed(),
            root.child("step", 0).seed(),
            RngStream::new(8).seed(),
            root.child("tour", 0).child("bird", 0).seed(),
        ];
        for i in 0..seeds.len() {
            for j in i + 1..seeds.len() {
                assert_ne!(seeds[i], seeds[j]);
            }
        }
    }
}
