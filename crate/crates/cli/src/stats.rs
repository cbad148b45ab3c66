//! Descriptive statistics of the ingested sample.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Descriptive {
    pub n: usize,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub sd: f64,
    pub min: f64,
    pub max: f64,
    /// Moment skewness m₃ / m₂^{3/2}.
    pub skewness: f64,
    /// Excess kurtosis m₄ / m₂² − 3 (zero for a normal distribution).
    pub excess_kurtosis: f64,
}

pub fn describe(x: &[f64]) -> Descriptive {
    let n = x.len();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    let (m2, m3, m4) = (m2 / nf, m3 / nf, m4 / nf);
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    };
    Descriptive {
        n,
        mean,
        median,
        sd: if n > 1 { (m2 * nf / (nf - 1.0)).sqrt() } else { 0.0 },
        min: s[0],
        max: s[n - 1],
        skewness: m3 / m2.powf(1.5),
        excess_kurtosis: m4 / (m2 * m2) - 3.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_sample() {
        let d = describe(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(d.median, 3.0);
        assert_eq!(d.skewness, 0.0);
        assert!((d.excess_kurtosis - (-1.3)).abs() < 1e-12);
        assert!((d.sd - 2.5f64.sqrt()).abs() < 1e-12);
    }
}
