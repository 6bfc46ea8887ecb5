//! MT19937 uniform generator plus the Gaussian and Cauchy variates built on it.

use core::f64::consts::PI;

use crate::{Error, Result};

const N: usize = 624;
const M: usize = 397;
const MATRIX_A: u32 = 0x9908_b0df;
const UPPER_MASK: u32 = 0x8000_0000;
const LOWER_MASK: u32 = 0x7fff_ffff;

/// 32-bit Mersenne Twister with the 2002 improved initialisation.
///
/// A 64-bit seed is split into little-endian 32-bit words and fed through
/// `init_by_array`, dropping the high word when it is zero. This is the same
/// key layout CPython's `random.seed` and numpy's `RandomState` use for
/// non-negative integers, so streams can be cross-checked against either.
#[derive(Clone)]
pub struct Mt19937 {
    state: [u32; N],
    index: usize,
    seed: u64,
    spare_gaussian: Option<f64>,
}

impl core::fmt::Debug for Mt19937 {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Mt19937").field("seed", &self.seed).field("index", &self.index).finish_non_exhaustive()
    }
}

impl Mt19937 {
    pub fn from_seed(seed: u64) -> Self {
        let lo = seed as u32;
        let hi = (seed >> 32) as u32;
        let mut mt = if hi == 0 { Self::from_key(&[lo]) } else { Self::from_key(&[lo, hi]) };
        mt.seed = seed;
        mt
    }

    /// Classic `init_genrand` seeding, as used by C++ `std::mt19937`.
    pub fn from_u32_seed(seed: u32) -> Self {
        let mut state = [0u32; N];
        state[0] = seed;
        for i in 1..N {
            let prev = state[i - 1];
            state[i] = 1_812_433_253u32.wrapping_mul(prev ^ (prev >> 30)).wrapping_add(i as u32);
        }
        Self { state, index: N, seed: u64::from(seed), spare_gaussian: None }
    }

    /// `init_by_array` seeding from an arbitrary non-empty key.
    pub fn from_key(key: &[u32]) -> Self {
        assert!(!key.is_empty(), "MT19937 key must not be empty");
        let mut mt = Self::from_u32_seed(19_650_218);
        let state = &mut mt.state;
        let mut i = 1usize;
        let mut j = 0usize;
        for _ in 0..N.max(key.len()) {
            let prev = state[i - 1];
            state[i] =
                (state[i] ^ (prev ^ (prev >> 30)).wrapping_mul(1_664_525)).wrapping_add(key[j]).wrapping_add(j as u32);
            i += 1;
            j += 1;
            if i >= N {
                state[0] = state[N - 1];
                i = 1;
            }
            if j >= key.len() {
                j = 0;
            }
        }
        for _ in 0..N - 1 {
            let prev = state[i - 1];
            state[i] = (state[i] ^ (prev ^ (prev >> 30)).wrapping_mul(1_566_083_941)).wrapping_sub(i as u32);
            i += 1;
            if i >= N {
                state[0] = state[N - 1];
                i = 1;
            }
        }
        // MSB is 1, assuring a non-zero initial array.
        state[0] = 0x8000_0000;
        mt.index = N;
        mt.seed = 0;
        mt
    }

    /// The 64-bit value this generator was seeded from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn twist(&mut self) {
        let mag01 = |y: u32| if y & 1 == 0 { 0 } else { MATRIX_A };
        for k in 0..N {
            let y = (self.state[k] & UPPER_MASK) | (self.state[(k + 1) % N] & LOWER_MASK);
            self.state[k] = self.state[(k + M) % N] ^ (y >> 1) ^ mag01(y);
        }
        self.index = 0;
    }

    pub fn next_u32(&mut self) -> u32 {
        if self.index >= N {
            self.twist();
        }
        let mut y = self.state[self.index];
        self.index += 1;
        y ^= y >> 11;
        y ^= (y << 7) & 0x9d2c_5680;
        y ^= (y << 15) & 0xefc6_0000;
        y ^= y >> 18;
        y
    }

    pub fn next_u64(&mut self) -> u64 {
        let hi = u64::from(self.next_u32());
        let lo = u64::from(self.next_u32());
        (hi << 32) | lo
    }

    /// Uniform real on the closed interval `[0, 1]`.
    pub fn uniform01(&mut self) -> f64 {
        f64::from(self.next_u32()) / 4_294_967_295.0
    }

    /// Uniform integer in `[0, bound)` without modulo bias.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        if bound <= u64::from(u32::MAX) + 1 {
            let bound32 = bound;
            let zone = (1u64 << 32) - ((1u64 << 32) % bound32);
            loop {
                let v = u64::from(self.next_u32());
                if v < zone {
                    return v % bound32;
                }
            }
        }
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Standard normal variate, polar Box-Muller.
    ///
    /// Each accepted polar pair yields two variates; the second is cached and
    /// returned by the following call without consuming uniforms.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(v) = self.spare_gaussian.take() {
            return v;
        }
        loop {
            let v1 = 2.0 * self.uniform01() - 1.0;
            let v2 = 2.0 * self.uniform01() - 1.0;
            let rsq = v1 * v1 + v2 * v2;
            if rsq >= 1.0 || rsq == 0.0 {
                continue;
            }
            let fac = libm::sqrt(-2.0 * libm::log(rsq) / rsq);
            self.spare_gaussian = Some(v1 * fac);
            return v2 * fac;
        }
    }

    /// Cauchy variate by inverse transform. Draws of exactly 0 or 1 are
    /// redrawn so the result is always finite.
    pub fn cauchy(&mut self, params: CauchyParams) -> f64 {
        loop {
            let u = self.uniform01();
            if u > 0.0 && u < 1.0 {
                return cauchy_quantile(u, params);
            }
        }
    }
}

/// SplitMix64 finaliser; used to derive independent per-task seeds.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for task `ordinal` of a run whose base seed is `base`.
pub fn derive_seed(base: u64, ordinal: u64) -> u64 {
    splitmix64(base ^ splitmix64(ordinal))
}

/// Where a run's seed comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSource {
    OsEntropy,
    Explicit(u64),
}

impl SeedSource {
    /// The effective seed; `entropy` is only called for [`SeedSource::OsEntropy`].
    pub fn resolve(self, entropy: impl FnOnce() -> u64) -> u64 {
        match self {
            SeedSource::Explicit(v) => v,
            SeedSource::OsEntropy => entropy(),
        }
    }
}

/// Location (median) and scale of a Cauchy distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyParams {
    location: f64,
    scale: f64,
}

impl CauchyParams {
    pub fn new(location: f64, scale: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::config("Cauchy location must be finite"));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::config("Cauchy scale must be finite and strictly positive"));
        }
        Ok(Self { location, scale })
    }

    pub fn standard() -> Self {
        Self { location: 0.0, scale: 1.0 }
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }
}

/// `location + scale * tan(pi * (u - 1/2))`.
pub fn cauchy_quantile(u: f64, params: CauchyParams) -> f64 {
    if u == 0.5 {
        return params.location;
    }
    params.location + params.scale * libm::tan(PI * (u - 0.5))
}

pub fn cauchy_cdf(x: f64, params: CauchyParams) -> f64 {
    libm::atan((x - params.location) / params.scale) / PI + 0.5
}

pub fn cauchy_pdf(x: f64, params: CauchyParams) -> f64 {
    let z = (x - params.location) / params.scale;
    1.0 / (PI * params.scale * (1.0 + z * z))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_mt19937_ten_thousandth_output() {
        // C++11 requires the 10000th output of default-seeded std::mt19937 to be 4123659995.
        let mut mt = Mt19937::from_u32_seed(5489);
        let mut last = 0;
        for _ in 0..10_000 {
            last = mt.next_u32();
        }
        assert_eq!(last, 4_123_659_995);
    }

    #[test]
    fn reference_init_by_array_vector() {
        // First outputs of mt19937ar.c's test driver, key {0x123, 0x234, 0x345, 0x456}.
        let mut mt = Mt19937::from_key(&[0x123, 0x234, 0x345, 0x456]);
        let got: Vec<u32> = (0..5).map(|_| mt.next_u32()).collect();
        assert_eq!(got, [1_067_595_299, 955_945_823, 477_289_528, 4_107_218_783, 4_228_976_476]);
    }

    #[test]
    fn explicit_seed_is_deterministic() {
        let mut a = Mt19937::from_seed(42);
        let mut b = Mt19937::from_seed(42);
        let cp = CauchyParams::standard();
        for _ in 0..2000 {
            assert_eq!(a.next_u32(), b.next_u32());
            assert_eq!(a.gaussian().to_bits(), b.gaussian().to_bits());
            assert_eq!(a.cauchy(cp).to_bits(), b.cauchy(cp).to_bits());
        }
    }

    #[test]
    fn seed_zero_is_nondegenerate() {
        let mut mt = Mt19937::from_seed(0);
        let draws: Vec<u32> = (0..100).map(|_| mt.next_u32()).collect();
        assert!(draws.iter().any(|&d| d != 0));
        assert!(draws.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn seed_is_remembered() {
        assert_eq!(Mt19937::from_seed(0xdead_beef_cafe).seed(), 0xdead_beef_cafe);
    }

    #[test]
    fn uniform_is_in_closed_unit_interval_with_right_moments() {
        let mut mt = Mt19937::from_seed(7);
        let n = 100_000;
        let mut sum = 0.0;
        let mut below_quarter = 0usize;
        for _ in 0..n {
            let u = mt.uniform01();
            assert!((0.0..=1.0).contains(&u));
            sum += u;
            if u < 0.25 {
                below_quarter += 1;
            }
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.01);
        assert!((below_quarter as f64 / n as f64 - 0.25).abs() < 0.01);
    }

    #[test]
    fn gaussian_moments() {
        let mut mt = Mt19937::from_seed(11);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| mt.gaussian()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
        assert!((m4 / (var * var) - 3.0).abs() < 0.1);
    }

    #[test]
    fn gaussian_pairs_share_one_polar_acceptance() {
        let mut a = Mt19937::from_seed(3);
        let mut b = a.clone();
        a.gaussian();
        let after_first = a.clone().next_u32();
        a.gaussian();
        let after_second = a.next_u32();
        // the second draw came from the cache, so the uniform stream did not move
        assert_eq!(after_first, after_second);
        b.gaussian();
        assert!(b.spare_gaussian.is_some());
    }

    #[test]
    fn cauchy_quantile_fixed_points() {
        let p = CauchyParams::new(3.5, 2.0).unwrap();
        assert_eq!(cauchy_quantile(0.5, p), 3.5);
        let s = CauchyParams::standard();
        assert!((cauchy_quantile(0.75, s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cauchy_cdf_fixed_points() {
        let p = CauchyParams::new(-1.0, 0.5).unwrap();
        assert_eq!(cauchy_cdf(-1.0, p), 0.5);
        assert!((cauchy_cdf(-0.5, p) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn cauchy_params_validation() {
        assert!(CauchyParams::new(0.0, 0.0).is_err());
        assert!(CauchyParams::new(0.0, -1.0).is_err());
        assert!(CauchyParams::new(f64::NAN, 1.0).is_err());
        assert!(CauchyParams::new(0.0, 1e-300).is_ok());
    }

    #[test]
    fn cauchy_half_mass_inside_one_scale() {
        let mut mt = Mt19937::from_seed(99);
        let p = CauchyParams::standard();
        let n = 100_000;
        let inside = (0..n).filter(|_| mt.cauchy(p).abs() <= 1.0).count();
        assert!((inside as f64 / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn below_stays_in_range() {
        let mut mt = Mt19937::from_seed(5);
        for bound in [1u64, 2, 7, 1000, 5_000_000_000] {
            for _ in 0..200 {
                assert!(mt.below(bound) < bound);
            }
        }
    }

    #[test]
    fn derived_seeds_differ() {
        let s: Vec<u64> = (0..8).map(|i| derive_seed(1, i)).collect();
        for i in 0..s.len() {
            for j in i + 1..s.len() {
                assert_ne!(s[i], s[j]);
            }
        }
    }

    #[test]
    fn seed_source_resolution() {
        assert_eq!(SeedSource::Explicit(9).resolve(|| unreachable!()), 9);
        assert_eq!(SeedSource::OsEntropy.resolve(|| 17), 17);
    }
}
