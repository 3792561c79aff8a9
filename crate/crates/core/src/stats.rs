//! Small statistics helpers shared by the estimator and the validation suite.

/// Neumaier-compensated running sum; deterministic for a fixed add order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    let mut s = CompensatedSum::default();
    for &x in xs {
        s.add(x);
    }
    s.total() / xs.len() as f64
}

/// Sample standard deviation (n-1 denominator); 0 for fewer than two values.
pub fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let mut s = CompensatedSum::default();
    for &x in xs {
        s.add((x - m) * (x - m));
    }
    (s.total() / (xs.len() - 1) as f64).sqrt()
}

/// Standardized central moment of the given order.
fn standardized_moment(xs: &[f64], order: i32) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    let mk = xs.iter().map(|x| (x - m).powi(order)).sum::<f64>() / n;
    mk / var.powf(order as f64 / 2.0)
}

/// Sample skewness (population normalization).
pub fn skewness(xs: &[f64]) -> f64 {
    standardized_moment(xs, 3)
}

/// Excess kurtosis (population normalization, normal = 0).
pub fn excess_kurtosis(xs: &[f64]) -> f64 {
    standardized_moment(xs, 4) - 3.0
}

/// Least-squares line through `(x, y)` pairs, returning `(slope, intercept)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let mx = mean(x);
    let my = mean(y);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// p-th percentile (0..=100) of |values|, nearest-rank on a sorted copy.
pub fn abs_percentile(values: &[f64], p: f64) -> f64 {
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).filter(|v| v.is_finite()).collect();
    if mags.is_empty() {
        return 0.0;
    }
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((p / 100.0) * mags.len() as f64).ceil() as usize;
    mags[rank.clamp(1, mags.len()) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moments_on_a_known_sample() {
        let xs = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert!((mean(&xs) - 5.0).abs() < 1e-15);
        // population sd = 2, sample sd = 2 * sqrt(8/7)
        assert!((sample_std(&xs) - 2.0 * (8.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn skew_and_kurtosis_of_symmetric_data() {
        let xs: Vec<f64> = (0..1001).map(|i| (i as f64 - 500.0) / 100.0).collect();
        assert!(skewness(&xs).abs() < 1e-12);
        // uniform distribution: excess kurtosis -1.2
        assert!((excess_kurtosis(&xs) + 1.2).abs() < 0.01);
    }

    #[test]
    fn fit_recovers_a_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [3.0, 5.0, 7.0, 9.0];
        let (slope, intercept) = linear_fit(&x, &y);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
    }

    #[test]
    fn percentile_nearest_rank() {
        let v = [1.0, -2.0, 3.0, -4.0, 5.0];
        assert_eq!(abs_percentile(&v, 100.0), 5.0);
        assert_eq!(abs_percentile(&v, 50.0), 3.0);
    }

    #[test]
    fn compensated_sum_handles_cancellation() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.total(), 10.0);
    }
}
