//! Moment statistics, Jarque-Bera, Hodges-Lehmann and the empirical CDF.

use alloc::vec::Vec;

use crate::prng::Mt19937;
use crate::{Error, Result};

/// A non-empty slice of finite values.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    values: &'a [f64],
}

impl<'a> Sample<'a> {
    pub fn new(values: &'a [f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("sample contains non-finite values"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &'a [f64] {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn median(&self) -> f64 {
        let mut sorted = self.values.to_vec();
        sort(&mut sorted);
        median_of_sorted(&sorted)
    }

    /// Second, third and fourth central moments with divisor `m`.
    fn central_moments(&self) -> (f64, f64, f64) {
        let m = self.values.len() as f64;
        let mean = self.mean();
        let (mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0);
        for &x in self.values {
            let d = x - mean;
            let d2 = d * d;
            s2 += d2;
            s3 += d2 * d;
            s4 += d2 * d2;
        }
        (s2 / m, s3 / m, s4 / m)
    }

    fn nondegenerate_moments(&self, what: &'static str) -> Result<(f64, f64, f64)> {
        if self.values.len() < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.values.len() });
        }
        let moments = self.central_moments();
        if moments.0 <= 0.0 {
            return Err(Error::Undefined(what));
        }
        Ok(moments)
    }
}

pub(crate) fn sort(values: &mut [f64]) {
    values.sort_unstable_by(f64::total_cmp);
}

pub(crate) fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Moment skewness, `m3 / m2^(3/2)`.
pub fn skewness(s: &Sample<'_>) -> Result<f64> {
    let (m2, m3, _) = s.nondegenerate_moments("skewness")?;
    Ok(m3 / (m2 * libm::sqrt(m2)))
}

/// Moment kurtosis, `m4 / m2^2` (not excess: a Gaussian gives 3).
pub fn kurtosis(s: &Sample<'_>) -> Result<f64> {
    let (m2, _, m4) = s.nondegenerate_moments("kurtosis")?;
    Ok(m4 / (m2 * m2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    pub p_value: f64,
    pub skewness: f64,
    pub kurtosis: f64,
}

/// Jarque-Bera normality test against chi-square with 2 degrees of freedom.
pub fn jarque_bera(s: &Sample<'_>) -> Result<JarqueBera> {
    let (m2, m3, m4) = s.nondegenerate_moments("Jarque-Bera statistic")?;
    let sk = m3 / (m2 * libm::sqrt(m2));
    let kr = m4 / (m2 * m2);
    let statistic = jarque_bera_statistic(s.len(), sk, kr);
    Ok(JarqueBera { statistic, p_value: chi2_2df_survival(statistic), skewness: sk, kurtosis: kr })
}

pub fn jarque_bera_statistic(m: usize, sk: f64, kr: f64) -> f64 {
    let e = kr - 3.0;
    m as f64 / 6.0 * (sk * sk + e * e / 4.0)
}

/// Upper tail of chi-square(2), which is exactly `exp(-x/2)`.
pub fn chi2_2df_survival(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        libm::exp(-0.5 * x)
    }
}

/// Empirical distribution function over a sorted copy of the sample.
#[derive(Debug, Clone)]
pub struct Ecdf {
    sorted: Vec<f64>,
}

impl Ecdf {
    pub fn new(s: &Sample<'_>) -> Self {
        let mut sorted = s.values().to_vec();
        sort(&mut sorted);
        Self { sorted }
    }

    /// Fraction of values `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.count_le(x) as f64 / self.sorted.len() as f64
    }

    /// Average of the left and right limits at `x`, i.e. values below `x`
    /// count fully and values equal to `x` count half.
    pub fn eval_mid(&self, x: f64) -> f64 {
        let lt = self.sorted.partition_point(|&v| v < x);
        let le = self.count_le(x);
        (lt + le) as f64 / (2 * self.sorted.len()) as f64
    }

    fn count_le(&self, x: f64) -> usize {
        self.sorted.partition_point(|&v| v <= x)
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }
}

pub fn ecdf(s: &Sample<'_>, x: f64) -> f64 {
    s.values().iter().filter(|&&v| v <= x).count() as f64 / s.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HlMethod {
    Exact,
    Subsampled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HlEstimate {
    /// Median of the Walsh averages.
    pub point: f64,
    pub ci95: (f64, f64),
    pub method: HlMethod,
    /// 1-based order statistic of the sorted Walsh averages giving the lower bound.
    pub lower_rank: u64,
    /// Number of Walsh averages, `m(m+1)/2`.
    pub walsh_count: u64,
}

/// Limits for Walsh-average enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HlConfig {
    /// Largest sample size that is enumerated exactly.
    pub exact_cap: usize,
    /// Walsh pairs drawn when the sample is larger than `exact_cap`.
    pub subsample_pairs: usize,
}

impl Default for HlConfig {
    fn default() -> Self {
        Self { exact_cap: 2000, subsample_pairs: 4_000_000 }
    }
}

/// Largest sample size whose signed-rank null distribution is tabulated exactly.
pub const EXACT_SIGNED_RANK_MAX: usize = 50;

/// Rank `k` (1-based) of the lower 95% bound among the sorted Walsh averages;
/// the upper bound is at `M + 1 - k`.
///
/// Exact signed-rank quantiles up to [`EXACT_SIGNED_RANK_MAX`], normal
/// approximation beyond.
pub fn signed_rank_lower_rank(m: usize) -> u64 {
    let k = if m <= EXACT_SIGNED_RANK_MAX {
        exact_lower_rank(m, 0.025)
    } else {
        let mf = m as f64;
        let centre = mf * (mf + 1.0) / 4.0;
        let sd = libm::sqrt(mf * (mf + 1.0) * (2.0 * mf + 1.0) / 24.0);
        let k = libm::floor(centre - 1.959_963_984_540_054 * sd);
        if k < 1.0 {
            0
        } else {
            k as u64
        }
    };
    k.max(1)
}

/// Counts of the Wilcoxon signed-rank statistic `T+` over all `2^m` sign patterns.
pub fn signed_rank_counts(m: usize) -> Vec<u64> {
    let max_t = m * (m + 1) / 2;
    let mut counts = alloc::vec![0u64; max_t + 1];
    counts[0] = 1;
    let mut reach = 0;
    for rank in 1..=m {
        reach += rank;
        for t in (rank..=reach).rev() {
            counts[t] += counts[t - rank];
        }
    }
    counts
}

fn exact_lower_rank(m: usize, tail: f64) -> u64 {
    let counts = signed_rank_counts(m);
    let total = libm::ldexp(1.0, m as i32);
    // largest k with P(T+ <= k - 1) <= tail
    let mut cumulative = 0u64;
    let mut k = 0u64;
    for (t, &c) in counts.iter().enumerate() {
        cumulative += c;
        if cumulative as f64 / total <= tail {
            k = t as u64 + 1;
        } else {
            break;
        }
    }
    k
}

/// Hodges-Lehmann location estimate with its 95% confidence interval.
pub fn hodges_lehmann(s: &Sample<'_>, rng: &mut Mt19937) -> Result<HlEstimate> {
    hodges_lehmann_with(s, HlConfig::default(), rng)
}

pub fn hodges_lehmann_with(s: &Sample<'_>, config: HlConfig, rng: &mut Mt19937) -> Result<HlEstimate> {
    let m = s.len();
    if m < 2 {
        return Err(Error::InsufficientData { needed: 2, got: m });
    }
    let x = s.values();
    let walsh_count = (m as u64) * (m as u64 + 1) / 2;
    let k = signed_rank_lower_rank(m).min(walsh_count.div_ceil(2));

    if m <= config.exact_cap {
        let mut walsh = Vec::with_capacity(walsh_count as usize);
        for i in 0..m {
            for j in i..m {
                walsh.push(0.5 * (x[i] + x[j]));
            }
        }
        sort(&mut walsh);
        let lo = walsh[(k - 1) as usize];
        let hi = walsh[(walsh_count - k) as usize];
        return Ok(HlEstimate {
            point: median_of_sorted(&walsh),
            ci95: (lo, hi),
            method: HlMethod::Exact,
            lower_rank: k,
            walsh_count,
        });
    }

    let draws = config.subsample_pairs.max(1);
    let mut walsh = Vec::with_capacity(draws);
    // (i, j) uniform on the m x m grid, keeping i <= j only, is uniform over
    // the m(m+1)/2 Walsh pairs.
    while walsh.len() < draws {
        let i = rng.below(m as u64) as usize;
        let j = rng.below(m as u64) as usize;
        if i <= j {
            walsh.push(0.5 * (x[i] + x[j]));
        }
    }
    sort(&mut walsh);
    let n = walsh.len();
    let frac = k as f64 / walsh_count as f64;
    let lo_idx = (libm::ceil(frac * n as f64) as usize).clamp(1, n) - 1;
    let hi_idx = n - 1 - lo_idx;
    Ok(HlEstimate {
        point: median_of_sorted(&walsh),
        ci95: (walsh[lo_idx], walsh[hi_idx]),
        method: HlMethod::Subsampled,
        lower_rank: k,
        walsh_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[f64]) -> Sample<'_> {
        Sample::new(v).unwrap()
    }

    #[test]
    fn sample_rejects_empty_and_nonfinite() {
        assert!(Sample::new(&[]).is_err());
        assert!(Sample::new(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn skewness_cases() {
        assert_eq!(skewness(&sample(&[-1.0, 0.0, 1.0])).unwrap(), 0.0);
        // {0,0,3}: mean 1, m2 = 2, m3 = 2  =>  2 / 2^1.5
        let sk = skewness(&sample(&[0.0, 0.0, 3.0])).unwrap();
        assert!((sk - 2.0 / 2f64.powf(1.5)).abs() < 1e-15);
        assert!(sk > 0.0);
        assert_eq!(skewness(&sample(&[4.0, 4.0, 4.0])), Err(Error::Undefined("skewness")));
    }

    #[test]
    fn kurtosis_cases() {
        assert_eq!(kurtosis(&sample(&[-1.0, 1.0])).unwrap(), 1.0);
        assert!(kurtosis(&sample(&[2.0, 2.0])).is_err());
        assert!(matches!(kurtosis(&sample(&[2.0])), Err(Error::InsufficientData { .. })));
    }

    #[test]
    fn jarque_bera_arithmetic() {
        assert!((jarque_bera_statistic(100, 0.5, 4.0) - 100.0 / 6.0 * 0.5).abs() < 1e-12);
        assert_eq!(jarque_bera_statistic(50, 0.0, 3.0), 0.0);
        assert_eq!(chi2_2df_survival(0.0), 1.0);
        assert!((chi2_2df_survival(5.991_464_547_107_979) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn jarque_bera_rejects_cauchy() {
        let mut mt = Mt19937::from_seed(1);
        let p = crate::prng::CauchyParams::standard();
        let xs: Vec<f64> = (0..10_000).map(|_| mt.cauchy(p)).collect();
        assert!(jarque_bera(&sample(&xs)).unwrap().p_value < 1e-6);
    }

    #[test]
    fn jarque_bera_accepts_gaussian() {
        let mut mt = Mt19937::from_seed(2);
        let xs: Vec<f64> = (0..10_000).map(|_| mt.gaussian()).collect();
        assert!(jarque_bera(&sample(&xs)).unwrap().p_value > 0.005);
    }

    #[test]
    fn ecdf_boundaries() {
        let v = [1.0, 2.0, 3.0, 4.0];
        let s = sample(&v);
        assert_eq!(ecdf(&s, 0.5), 0.0);
        assert_eq!(ecdf(&s, 4.0), 1.0);
        assert_eq!(ecdf(&s, 2.5), 0.5);
        let e = Ecdf::new(&s);
        assert_eq!(e.eval(2.0), 0.5);
        assert_eq!(e.eval_mid(2.0), 0.375);
        assert_eq!(e.eval_mid(2.5), 0.5);
    }

    #[test]
    fn hodges_lehmann_small_sets() {
        let mut rng = Mt19937::from_seed(0);
        let hl = hodges_lehmann(&sample(&[1.0, 2.0, 3.0]), &mut rng).unwrap();
        assert_eq!(hl.point, 2.0);
        assert_eq!(hl.walsh_count, 6);
        assert_eq!(hl.method, HlMethod::Exact);
        // Walsh set {1, 1.5, 2, 5.5, 6, 10}
        let hl = hodges_lehmann(&sample(&[1.0, 2.0, 10.0]), &mut rng).unwrap();
        assert_eq!(hl.point, 3.75);
        assert!(hodges_lehmann(&sample(&[1.0]), &mut rng).is_err());
    }

    #[test]
    fn signed_rank_counts_match_brute_force() {
        for m in 1..=12usize {
            let counts = signed_rank_counts(m);
            let mut brute = alloc::vec![0u64; counts.len()];
            for mask in 0u32..(1 << m) {
                let t: usize = (0..m).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).sum();
                brute[t] += 1;
            }
            assert_eq!(counts, brute, "m = {m}");
        }
    }

    #[test]
    fn exact_critical_ranks_match_tables() {
        // two-sided 0.05 lower critical values of T+ (Hollander & Wolfe): rank = critical + 1
        // n=6: T <= 0 ; n=10: T <= 8 ; n=20: T <= 52
        assert_eq!(signed_rank_lower_rank(6), 1);
        assert_eq!(signed_rank_lower_rank(10), 9);
        assert_eq!(signed_rank_lower_rank(20), 53);
        assert_eq!(signed_rank_lower_rank(3), 1);
    }

    #[test]
    fn normal_rank_formula_beyond_exact_range() {
        let m = 100f64;
        let expect =
            (m * (m + 1.0) / 4.0 - 1.959_963_984_540_054 * (m * (m + 1.0) * (2.0 * m + 1.0) / 24.0).sqrt()).floor();
        assert_eq!(signed_rank_lower_rank(100), expect as u64);
    }

    #[test]
    fn subsampled_agrees_with_exact() {
        let mut rng = Mt19937::from_seed(8);
        let xs: Vec<f64> = (0..150).map(|_| rng.gaussian() * 3.0 + 1.0).collect();
        let s = sample(&xs);
        let exact = hodges_lehmann(&s, &mut rng).unwrap();
        let cfg = HlConfig { exact_cap: 10, subsample_pairs: 400_000 };
        let sub = hodges_lehmann_with(&s, cfg, &mut rng).unwrap();
        assert_eq!(sub.method, HlMethod::Subsampled);
        let half = 0.5 * (exact.ci95.1 - exact.ci95.0);
        assert!((sub.point - exact.point).abs() < half);
        assert!((sub.ci95.0 - exact.ci95.0).abs() < half);
        assert!((sub.ci95.1 - exact.ci95.1).abs() < half);
    }
}
