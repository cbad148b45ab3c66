use super::{mean_var, Baseline, DerivOrder, DerivTable, Support, MAX_BASE_PARAMS};
use crate::error::{check_finite, check_positive, Error, Result};
use crate::params::ParamVector;
use crate::special::{std_normal_cdf, std_normal_log_cdf, std_normal_log_pdf};

/// Normal distribution N(μ, σ²) as a baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mu: f64,
    sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        check_finite("mu", mu)?;
        check_positive("sigma", sigma)?;
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn z(&self, x: f64) -> f64 {
        (x - self.mu) / self.sigma
    }
}

impl Baseline for Normal {
    fn family(&self) -> &'static str {
        "normal"
    }

    fn params(&self) -> ParamVector {
        ParamVector::new()
            .with("mu", self.mu, f64::NEG_INFINITY, f64::INFINITY)
            .and_then(|p| p.with_positive("sigma", self.sigma))
            .expect("validated at construction")
    }

    fn with_values(&self, values: &[f64]) -> Result<Self> {
        match values {
            [m, s] => Normal::new(*m, *s),
            _ => Err(Error::Domain(format!("normal takes 2 parameters, got {}", values.len()))),
        }
    }

    fn n_params(&self) -> usize {
        2
    }

    fn support(&self) -> Support {
        Support::REAL_LINE
    }

    fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf(self.z(x))
    }

    fn sf(&self, x: f64) -> f64 {
        std_normal_cdf(-self.z(x))
    }

    fn log_sf(&self, x: f64) -> f64 {
        std_normal_log_cdf(-self.z(x))
    }

    fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.log_pdf(x)?.exp())
    }

    fn log_pdf(&self, x: f64) -> Result<f64> {
        Ok(std_normal_log_pdf(self.z(x)) - self.sigma.ln())
    }

    fn derivs(&self, x: f64, order: DerivOrder) -> Result<DerivTable> {
        if !x.is_finite() {
            return Err(Error::SingularPoint {
                x,
                reason: "parameter derivatives need a finite x",
            });
        }
        let s = self.sigma;
        let z = self.z(x);
        let pdf = std_normal_log_pdf(z).exp() / s;
        let cdf = std_normal_cdf(z);
        let sf = std_normal_cdf(-z);
        let d_cdf = [-pdf, -z * pdf];
        let lg = [z / s, (z * z - 1.0) / s];
        let d_pdf = [pdf * lg[0], pdf * lg[1]];
        let mut d2_cdf = [[0.0; MAX_BASE_PARAMS]; MAX_BASE_PARAMS];
        let mut d2_pdf = [[0.0; MAX_BASE_PARAMS]; MAX_BASE_PARAMS];
        if order == DerivOrder::Second {
            let g_mm = -pdf * z / s;
            let g_ms = pdf * (1.0 - z * z) / s;
            let g_ss = z * pdf * (2.0 - z * z) / s;
            d2_cdf = [[g_mm, g_ms], [g_ms, g_ss]];
            let lg2 = [
                [-1.0 / (s * s), -2.0 * z / (s * s)],
                [-2.0 * z / (s * s), (1.0 - 3.0 * z * z) / (s * s)],
            ];
            for a in 0..2 {
                for b in 0..2 {
                    d2_pdf[a][b] = pdf * (lg2[a][b] + lg[a] * lg[b]);
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

    fn moment_matched(&self, sample: &[f64]) -> Result<Self> {
        let (mean, var) = mean_var(sample)?;
        if !(var > 0.0) {
            return Err(Error::DegenerateData("zero variance".into()));
        }
        Normal::new(mean, var.sqrt())
    }
}
