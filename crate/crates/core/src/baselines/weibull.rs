use super::{mean_var, Baseline, DerivOrder, DerivTable, Support, MAX_BASE_PARAMS};
use crate::error::{check_positive, Error, Result};
use crate::params::ParamVector;

/// Two-parameter Weibull distribution with shape `k` and scale `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weibull {
    shape: f64,
    scale: f64,
}

impl Weibull {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        check_positive("k", shape)?;
        check_positive("lambda", scale)?;
        Ok(Self { shape, scale })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// (x/λ)^k, zero for x ≤ 0.
    fn power(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (x / self.scale).powf(self.shape)
        }
    }

    pub fn mean(&self) -> f64 {
        self.scale * libm::tgamma(1.0 + 1.0 / self.shape)
    }

    /// Density at the mode (at 0 when k ≤ 1, where it may be infinite).
    pub fn mode(&self) -> f64 {
        if self.shape <= 1.0 {
            0.0
        } else {
            self.scale * ((self.shape - 1.0) / self.shape).powf(1.0 / self.shape)
        }
    }
}

/// G(x) = 1 − exp(−(x/λ)^k), zero for x ≤ 0.
pub fn weibull_cdf(x: f64, k: f64, lambda: f64) -> Result<f64> {
    Ok(Weibull::new(k, lambda)?.cdf(x))
}

/// First (and optionally second) partials of G and g in (k, λ).
pub fn weibull_param_derivs(x: f64, k: f64, lambda: f64, order: DerivOrder) -> Result<DerivTable> {
    Weibull::new(k, lambda)?.derivs(x, order)
}

impl Baseline for Weibull {
    fn family(&self) -> &'static str {
        "weibull"
    }

    fn params(&self) -> ParamVector {
        ParamVector::new()
            .with_positive("k", self.shape)
            .and_then(|p| p.with_positive("lambda", self.scale))
            .expect("validated at construction")
    }

    fn with_values(&self, values: &[f64]) -> Result<Self> {
        match values {
            [k, l] => Weibull::new(*k, *l),
            _ => Err(Error::Domain(format!("weibull takes 2 parameters, got {}", values.len()))),
        }
    }

    fn n_params(&self) -> usize {
        2
    }

    fn support(&self) -> Support {
        Support {
            lower: 0.0,
            upper: f64::INFINITY,
            lower_closed: true,
            upper_closed: false,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        -(-self.power(x)).exp_m1()
    }

    fn sf(&self, x: f64) -> f64 {
        (-self.power(x)).exp()
    }

    fn log_sf(&self, x: f64) -> f64 {
        -self.power(x)
    }

    fn odds(&self, x: f64) -> f64 {
        self.power(x).exp_m1()
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Ok(0.0);
        }
        Ok(self.log_pdf(x)?.exp())
    }

    fn log_pdf(&self, x: f64) -> Result<f64> {
        let (k, l) = (self.shape, self.scale);
        if x < 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        if x == 0.0 {
            return if k < 1.0 {
                Err(Error::SingularPoint {
                    x,
                    reason: "weibull density diverges at 0 for k < 1",
                })
            } else if k == 1.0 {
                Ok(-l.ln())
            } else {
                Ok(f64::NEG_INFINITY)
            };
        }
        let u = x / l;
        let s = u.powf(k);
        Ok(k.ln() - l.ln() + (k - 1.0) * u.ln() - s)
    }

    fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("probability {p} outside (0, 1)")));
        }
        Ok(self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape))
    }

    fn derivs(&self, x: f64, order: DerivOrder) -> Result<DerivTable> {
        let (k, l) = (self.shape, self.scale);
        if x == 0.0 && k < 1.0 {
            return Err(Error::SingularPoint {
                x,
                reason: "weibull density derivative diverges at 0 for k < 1",
            });
        }
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::SingularPoint {
                x,
                reason: "parameter derivatives need x in the open support (0, inf)",
            });
        }
        let u = x / l;
        let ln_u = u.ln();
        let s = u.powf(k);
        let sf = (-s).exp();
        let cdf = -(-s).exp_m1();
        let pdf = (k / x) * s * sf;

        // s = (x/λ)^k and its parameter partials
        let s_k = s * ln_u;
        let s_l = -k * s / l;
        let d_cdf = [sf * s_k, sf * s_l];
        // log g = ln k − ln x + ln s − s
        let lg_k = 1.0 / k + ln_u - s * ln_u;
        let lg_l = -k / l + k * s / l;
        let d_pdf = [pdf * lg_k, pdf * lg_l];

        let mut d2_cdf = [[0.0; MAX_BASE_PARAMS]; MAX_BASE_PARAMS];
        let mut d2_pdf = [[0.0; MAX_BASE_PARAMS]; MAX_BASE_PARAMS];
        if order == DerivOrder::Second {
            let s_kk = s * ln_u * ln_u;
            let s_kl = -s * (k * ln_u + 1.0) / l;
            let s_ll = k * (k + 1.0) * s / (l * l);
            let s1 = [s_k, s_l];
            let s2 = [[s_kk, s_kl], [s_kl, s_ll]];
            let lg1 = [lg_k, lg_l];
            let lg_kk = -1.0 / (k * k) - s * ln_u * ln_u;
            let lg_kl = -1.0 / l + (k * s * ln_u + s) / l;
            let lg_ll = k / (l * l) - k * (k + 1.0) * s / (l * l);
            let lg2 = [[lg_kk, lg_kl], [lg_kl, lg_ll]];
            for a in 0..2 {
                for b in 0..2 {
                    d2_cdf[a][b] = sf * (s2[a][b] - s1[a] * s1[b]);
                    d2_pdf[a][b] = pdf * (lg2[a][b] + lg1[a] * lg1[b]);
                }
            }
        }
        Ok(DerivTable {
            n_params: 2,
            cdf,
            sf,
            pdf,
            d_cdf,
            d_pdf,
            d2_cdf,
            d2_pdf,
        })
    }

    /// Solves Γ(1+2/k)/Γ(1+1/k)² − 1 = CV² for k, then λ = mean/Γ(1+1/k).
    fn moment_matched(&self, sample: &[f64]) -> Result<Self> {
        let (mean, var) = mean_var(sample)?;
        if !(mean > 0.0 && var > 0.0) {
            return Err(Error::DegenerateData("weibull moment fit needs positive mean and variance".into()));
        }
        let cv2 = var / (mean * mean);
        let cv2_of = |k: f64| {
            let g1 = libm::lgamma(1.0 + 1.0 / k);
            let g2 = libm::lgamma(1.0 + 2.0 / k);
            (g2 - 2.0 * g1).exp() - 1.0
        };
        // CV² decreases in k; bisect in log k
        let (mut lo, mut hi) = (0.05f64.ln(), 200f64.ln());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if cv2_of(mid.exp()) > cv2 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = (0.5 * (lo + hi)).exp();
        Weibull::new(k, mean / libm::tgamma(1.0 + 1.0 / k))
    }
}
