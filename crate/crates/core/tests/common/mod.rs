#![allow(dead_code)]

use momentvar::moments::{GaussianParams, MixtureParams, SymMatrix};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Small random rational `a/b` with `|a| <= 9`, `1 <= b <= 4`.
pub fn small(r: &mut impl Rng) -> BigRational {
    q(r.gen_range(-9..=9), r.gen_range(1..=4))
}

pub fn nonzero(r: &mut impl Rng) -> BigRational {
    loop {
        let x = small(r);
        if x != q(0, 1) {
            return x;
        }
    }
}

pub fn gaussian(r: &mut impl Rng, n: usize) -> GaussianParams {
    let mean = (0..n).map(|_| small(r)).collect();
    let upper = (0..n * (n + 1) / 2).map(|_| small(r)).collect();
    GaussianParams::new(mean, SymMatrix::from_upper(n, upper).unwrap()).unwrap()
}

/// Two-component mixture with weight strictly between 0 and 1 and distinct
/// first mean coordinates.
pub fn two_mixture(r: &mut impl Rng, n: usize) -> MixtureParams {
    loop {
        let g1 = gaussian(r, n);
        let g2 = gaussian(r, n);
        if g1.mean[0] == g2.mean[0] {
            continue;
        }
        let w = q(r.gen_range(1..=9), 10);
        return MixtureParams::from_free_weights(vec![g1, g2], vec![w]).unwrap();
    }
}

pub fn mixture(r: &mut impl Rng, n: usize, k: usize) -> MixtureParams {
    let comps = (0..k).map(|_| gaussian(r, n)).collect();
    let free = (0..k - 1).map(|_| q(r.gen_range(1..=9), 10 * k as i64)).collect();
    MixtureParams::from_free_weights(comps, free).unwrap()
}
