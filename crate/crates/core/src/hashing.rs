//! Seeded k-wise independent hash families.
//!
//! A [`KWiseHash`] is a random polynomial of degree `k - 1` over the
//! Mersenne field `GF(2^61 - 1)`, reduced into `[1, m]`. Count sketches draw
//! their bucket function from the 2-wise family and their sign function from
//! the 4-wise family. Every hash in a run is derived from one master seed via
//! [`derive_seed`].

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MERSENNE_61: u64 = (1 << 61) - 1;

/// Purpose tags for seed derivation. Distinct tags give independent streams.
pub mod tags {
    pub const SIGN: u64 = 0x5349_474e;
    pub const ROW: u64 = 0x524f_5753;
    pub const REPETITION: u64 = 0x5245_5053;
    pub const COMPONENT: u64 = 0x434f_4d50;
    pub const CONTRACTION: u64 = 0x434f_4e54;
    pub const RECURSIVE: u64 = 0x5245_4353;
    pub const LEAF: u64 = 0x4c45_4146;
    pub const NODE: u64 = 0x4e4f_4445;
    pub const NODE_PART: u64 = 0x5041_5254;
    pub const ENTRY: u64 = 0x454e_5452;
    pub const TRIAL: u64 = 0x5452_4941;
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Child seed for `(master, purpose tag, index)`.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ tag) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93))
}

#[inline]
fn mul_mod(a: u64, b: u64) -> u64 {
    let p = (a as u128) * (b as u128);
    let lo = (p as u64) & MERSENNE_61;
    let hi = (p >> 61) as u64;
    let s = lo + hi;
    if s >= MERSENNE_61 { s - MERSENNE_61 } else { s }
}

#[inline]
fn add_mod(a: u64, b: u64) -> u64 {
    let s = a + b;
    if s >= MERSENNE_61 { s - MERSENNE_61 } else { s }
}

/// A hash `[n] -> [m]` drawn from a k-wise independent family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KWiseHash {
    k: usize,
    seed: u64,
    n: usize,
    m: usize,
    coeffs: Vec<u64>,
}

impl KWiseHash {
    /// # Panics
    /// If any of `k`, `n`, `m` is zero.
    pub fn new(k: usize, seed: u64, n: usize, m: usize) -> Self {
        assert!(k >= 1 && n >= 1 && m >= 1, "k, n and m must be positive");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..k).map(|_| rng.gen_range(0..MERSENNE_61)).collect();
        KWiseHash { k, seed, n, m, coeffs }
    }

    pub fn independence(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain(&self) -> usize {
        self.n
    }

    pub fn range(&self) -> usize {
        self.m
    }

    /// Bucket of `x`, in `[1, m]`. `x` must be in `[1, n]`.
    pub fn eval(&self, x: usize) -> Option<usize> {
        (1..=self.n).contains(&x).then(|| self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: usize) -> usize {
        let x = x as u64 % MERSENNE_61;
        let poly = self.coeffs.iter().fold(0u64, |acc, &c| add_mod(mul_mod(acc, x), c));
        (poly % self.m as u64) as usize + 1
    }
}

/// A `{-1, +1}`-valued hash from the 4-wise independent family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignHash(KWiseHash);

impl SignHash {
    pub fn new(seed: u64, n: usize) -> Self {
        SignHash(KWiseHash::new(4, seed, n, 2))
    }

    pub fn eval(&self, i: usize) -> Option<i8> {
        self.0.eval(i).map(bucket_to_sign)
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, i: usize) -> i8 {
        bucket_to_sign(self.0.eval_unchecked(i))
    }

    pub fn seed(&self) -> u64 {
        self.0.seed()
    }
}

#[inline]
fn bucket_to_sign(b: usize) -> i8 {
    if b == 1 { 1 } else { -1 }
}

/// Source of a count sketch's sign or bucket function: either a seeded
/// family member or a fixed lookup table (used for test fixtures).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HashFn {
    Bucket(KWiseHash),
    Sign(SignHash),
    /// `table[i - 1]` is the value for input `i`.
    Table(Arc<[i64]>),
}

impl HashFn {
    pub fn domain(&self) -> usize {
        match self {
            HashFn::Bucket(h) => h.domain(),
            HashFn::Sign(s) => s.0.domain(),
            HashFn::Table(t) => t.len(),
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, i: usize) -> i64 {
        match self {
            HashFn::Bucket(h) => h.eval_unchecked(i) as i64,
            HashFn::Sign(s) => s.eval_unchecked(i) as i64,
            HashFn::Table(t) => t[i - 1],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = KWiseHash::new(2, 99, 1000, 16);
        let b = KWiseHash::new(2, 99, 1000, 16);
        assert!((1..=1000).all(|x| a.eval(x) == b.eval(x)));
        let c = KWiseHash::new(2, 100, 1000, 16);
        assert!((1..=1000).any(|x| a.eval(x) != c.eval(x)));
        assert_eq!(a.eval(0), None);
        assert_eq!(a.eval(1001), None);
    }

    #[test]
    fn unit_range_is_constant() {
        let h = KWiseHash::new(2, 5, 50, 1);
        assert!((1..=50).all(|x| h.eval(x) == Some(1)));
    }

    #[test]
    fn bucket_frequencies_are_uniform() {
        let n = 100_000usize;
        let m = 16usize;
        let h = KWiseHash::new(2, 12345, n, m);
        let mut counts = vec![0usize; m];
        for x in 1..=n {
            counts[h.eval(x).unwrap() - 1] += 1;
        }
        let mean = n as f64 / m as f64;
        let sigma = (n as f64 * (1.0 / m as f64) * (1.0 - 1.0 / m as f64)).sqrt();
        for c in counts {
            assert!((c as f64 - mean).abs() <= 5.0 * sigma, "count {c} vs {mean}");
        }
    }

    #[test]
    fn signs_are_balanced() {
        let n = 100_000usize;
        let s = SignHash::new(777, n);
        let mean: f64 = (1..=n).map(|i| s.eval(i).unwrap() as f64).sum::<f64>() / n as f64;
        assert!(mean.abs() <= 5.0 / (n as f64).sqrt(), "mean {mean}");
        assert!((1..=n).all(|i| s.eval(i) == s.eval(i)));
    }

    #[test]
    fn sign_pairs_are_uncorrelated_across_seeds() {
        let mut pick = ChaCha8Rng::seed_from_u64(1);
        let seeds = 20_000u64;
        for _ in 0..100 {
            let i = pick.gen_range(1..=1000usize);
            let mut j = pick.gen_range(1..=1000usize);
            if j == i {
                j = i % 1000 + 1;
            }
            let mean: f64 = (0..seeds)
                .map(|s| {
                    let h = SignHash::new(derive_seed(3, tags::SIGN, s), 1000);
                    (h.eval(i).unwrap() * h.eval(j).unwrap()) as f64
                })
                .sum::<f64>()
                / seeds as f64;
            assert!(mean.abs() <= 5.0 / (seeds as f64).sqrt(), "pair ({i},{j}) mean {mean}");
        }
    }

    #[test]
    fn pairwise_joint_distribution_is_uniform() {
        // chi-squared over the m^2 joint cells, df = 15, 99% quantile 30.578
        let (n, m) = (8usize, 4usize);
        let trials = 100_000u64;
        for &(x1, x2) in &[(1usize, 2usize), (3, 8), (5, 6)] {
            let mut cells = vec![0f64; m * m];
            for s in 0..trials {
                let h = KWiseHash::new(2, derive_seed(11, tags::ROW, s), n, m);
                let (a, b) = (h.eval(x1).unwrap(), h.eval(x2).unwrap());
                cells[(a - 1) * m + (b - 1)] += 1.0;
            }
            let expected = trials as f64 / (m * m) as f64;
            let chi2: f64 = cells.iter().map(|c| (c - expected).powi(2) / expected).sum();
            assert!(chi2 < 30.578, "chi2 {chi2} for ({x1},{x2})");
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(1, tags::SIGN, 0);
        assert_ne!(a, derive_seed(1, tags::ROW, 0));
        assert_ne!(a, derive_seed(1, tags::SIGN, 1));
        assert_ne!(a, derive_seed(2, tags::SIGN, 0));
        assert_eq!(a, derive_seed(1, tags::SIGN, 0));
    }

    #[test]
    fn mersenne_arithmetic() {
        assert_eq!(mul_mod(MERSENNE_61 - 1, MERSENNE_61 - 1), 1);
        assert_eq!(add_mod(MERSENNE_61 - 1, 1), 0);
        // 2^80 = 2^61 * 2^19 = 2^19 (mod 2^61 - 1)
        assert_eq!(mul_mod(1 << 40, 1 << 40), 1 << 19);
    }
}
