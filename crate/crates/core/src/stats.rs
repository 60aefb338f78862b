//! Small statistics helpers shared by the estimators and their tests.

use alloc::vec::Vec;

use libm::sqrt;

/// Pairwise (cascade) summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if xs.len() <= LEAF {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let (lo, hi) = xs.split_at(xs.len() / 2);
    pairwise_sum(lo) + pairwise_sum(hi)
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: u64,
}

impl Estimate {
    /// Sample mean and `s / sqrt(n)`.
    pub fn from_samples(xs: &[f64]) -> Estimate {
        let n = xs.len();
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                std_error: f64::NAN,
                n: 0,
            };
        }
        let mean = pairwise_sum(xs) / n as f64;
        let std_error = if n > 1 {
            let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            sqrt(pairwise_sum(&sq) / (n - 1) as f64 / n as f64)
        } else {
            0.0
        };
        Estimate {
            value: mean,
            std_error,
            n: n as u64,
        }
    }

    /// Bernoulli proportion; the standard error is the half-width of the
    /// one-sigma Wilson score interval, which stays positive at 0 and 1.
    pub fn from_successes(successes: u64, n: u64) -> Estimate {
        if n == 0 {
            return Estimate {
                value: f64::NAN,
                std_error: f64::NAN,
                n: 0,
            };
        }
        let nf = n as f64;
        let p = successes as f64 / nf;
        let half = sqrt(p * (1.0 - p) / nf + 0.25 / (nf * nf)) / (1.0 + 1.0 / nf);
        Estimate {
            value: p,
            std_error: half,
            n,
        }
    }

    /// `|value - reference|` in units of the standard error.
    pub fn z_score(&self, reference: f64) -> f64 {
        (self.value - reference).abs() / self.std_error
    }
}

/// Kolmogorov–Smirnov distance between the empirical CDF of `sorted` and
/// `cdf`. `sorted` must be in ascending order.
pub fn ks_distance<F: FnMut(f64) -> f64>(sorted: &[f64], mut cdf: F) -> f64 {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Empirical CDF of a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted: samples }
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    /// Fraction of samples `<= x`.
    pub fn eval(&self, x: f64) -> f64 {
        if self.sorted.is_empty() {
            return f64::NAN;
        }
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn ks_distance<F: FnMut(f64) -> f64>(&self, cdf: F) -> f64 {
        ks_distance(&self.sorted, cdf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs: Vec<f64> = (0..100_000).map(|_| 0.1).collect();
        assert!((pairwise_sum(&xs) - 10_000.0).abs() < 1e-9);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn estimate_from_samples() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(e.value, 2.5);
        // s^2 = 5/3, se = sqrt(5/3/4)
        assert!((e.std_error - sqrt(5.0 / 12.0)).abs() < 1e-15);
        assert_eq!(Estimate::from_samples(&[3.0]).std_error, 0.0);
    }

    #[test]
    fn wilson_error() {
        let e = Estimate::from_successes(50, 100);
        assert_eq!(e.value, 0.5);
        assert!((e.std_error - sqrt(0.25 / 100.0 + 0.25 / 1e4) / 1.01).abs() < 1e-15);
        let all = Estimate::from_successes(100, 100);
        assert!(all.std_error > 0.0);
    }

    #[test]
    fn ks_against_uniform() {
        let xs: Vec<f64> = (0..10).map(|i| (i as f64 + 0.5) / 10.0).collect();
        let d = ks_distance(&xs, |x| x);
        assert!((d - 0.05).abs() < 1e-15);
        let ecdf = EmpiricalCdf::new(alloc::vec![0.3, 0.1, 0.2]);
        assert_eq!(ecdf.eval(0.2), 2.0 / 3.0);
        assert_eq!(ecdf.eval(0.0), 0.0);
    }
}
