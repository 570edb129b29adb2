//! Column distributions for synthetic design matrices.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{
    Beta, Binomial, Cauchy, ChiSquared, Distribution, Exp, Gamma, Gumbel, LogNormal, Normal,
    Pareto, StudentT, Weibull,
};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distribution family, without hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Family {
    Beta,
    Binomial,
    Cauchy,
    ChiSquared,
    Exponential,
    Gamma,
    Gaussian,
    Gumbel,
    Laplace,
    LogNormal,
    Pareto,
    StudentT,
    Uniform,
    Weibull,
    GaussianMixture,
}

impl Family {
    /// The fourteen training families. Gaussian mixtures are held out.
    pub const TRAINING: [Family; 14] = [
        Family::Beta,
        Family::Binomial,
        Family::Cauchy,
        Family::ChiSquared,
        Family::Exponential,
        Family::Gamma,
        Family::Gaussian,
        Family::Gumbel,
        Family::Laplace,
        Family::LogNormal,
        Family::Pareto,
        Family::StudentT,
        Family::Uniform,
        Family::Weibull,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Beta => "beta",
            Family::Binomial => "binomial",
            Family::Cauchy => "cauchy",
            Family::ChiSquared => "chisquared",
            Family::Exponential => "exponential",
            Family::Gamma => "gamma",
            Family::Gaussian => "gaussian",
            Family::Gumbel => "gumbel",
            Family::Laplace => "laplace",
            Family::LogNormal => "lognormal",
            Family::Pareto => "pareto",
            Family::StudentT => "studentt",
            Family::Uniform => "uniform",
            Family::Weibull => "weibull",
            Family::GaussianMixture => "gmm",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Family::TRAINING
            .iter()
            .chain(std::iter::once(&Family::GaussianMixture))
            .copied()
            .find(|f| f.name() == lower || (lower == "gaussianmixture" && *f == Family::GaussianMixture))
            .ok_or_else(|| Error::Argument(format!("unknown distribution family {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: f64,
    pub std: f64,
}

/// A fully parameterized column distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionSpec {
    Beta { alpha: f64, beta: f64 },
    Binomial { trials: u64, prob: f64 },
    Cauchy { location: f64, scale: f64 },
    ChiSquared { dof: f64 },
    Exponential { rate: f64 },
    Gamma { shape: f64, scale: f64 },
    Gaussian { mean: f64, std: f64 },
    Gumbel { location: f64, scale: f64 },
    Laplace { location: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
    Pareto { scale: f64, shape: f64 },
    StudentT { dof: f64 },
    Uniform { low: f64, high: f64 },
    Weibull { scale: f64, shape: f64 },
    GaussianMixture { components: Vec<MixtureComponent> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {v}")))
    }
}

fn param_err(e: impl fmt::Display) -> Error {
    Error::Parameter(e.to_string())
}

impl DistributionSpec {
    pub fn family(&self) -> Family {
        match self {
            DistributionSpec::Beta { .. } => Family::Beta,
            DistributionSpec::Binomial { .. } => Family::Binomial,
            DistributionSpec::Cauchy { .. } => Family::Cauchy,
            DistributionSpec::ChiSquared { .. } => Family::ChiSquared,
            DistributionSpec::Exponential { .. } => Family::Exponential,
            DistributionSpec::Gamma { .. } => Family::Gamma,
            DistributionSpec::Gaussian { .. } => Family::Gaussian,
            DistributionSpec::Gumbel { .. } => Family::Gumbel,
            DistributionSpec::Laplace { .. } => Family::Laplace,
            DistributionSpec::LogNormal { .. } => Family::LogNormal,
            DistributionSpec::Pareto { .. } => Family::Pareto,
            DistributionSpec::StudentT { .. } => Family::StudentT,
            DistributionSpec::Uniform { .. } => Family::Uniform,
            DistributionSpec::Weibull { .. } => Family::Weibull,
            DistributionSpec::GaussianMixture { .. } => Family::GaussianMixture,
        }
    }

    pub fn standard_gaussian() -> Self {
        DistributionSpec::Gaussian { mean: 0.0, std: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DistributionSpec::Beta { alpha, beta } => {
                positive("beta shape alpha", alpha)?;
                positive("beta shape beta", beta)
            }
            DistributionSpec::Binomial { trials, prob } => {
                if trials == 0 {
                    return Err(Error::Parameter("binomial trials must be >= 1".into()));
                }
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::Parameter(format!("binomial prob must lie in [0, 1], got {prob}")));
                }
                Ok(())
            }
            DistributionSpec::Cauchy { location, scale }
            | DistributionSpec::Gumbel { location, scale }
            | DistributionSpec::Laplace { location, scale } => {
                finite("location", location)?;
                positive("scale", scale)
            }
            DistributionSpec::ChiSquared { dof } => positive("chi-squared dof", dof),
            DistributionSpec::Exponential { rate } => positive("exponential rate", rate),
            DistributionSpec::Gamma { shape, scale } => {
                positive("gamma shape", shape)?;
                positive("gamma scale", scale)
            }
            DistributionSpec::Gaussian { mean, std } => {
                finite("mean", mean)?;
                positive("std", std)
            }
            DistributionSpec::LogNormal { mu, sigma } => {
                finite("lognormal mu", mu)?;
                positive("lognormal sigma", sigma)
            }
            DistributionSpec::Pareto { scale, shape } | DistributionSpec::Weibull { scale, shape } => {
                positive("scale", scale)?;
                positive("shape", shape)
            }
            DistributionSpec::StudentT { dof } => positive("student-t dof", dof),
            DistributionSpec::Uniform { low, high } => {
                finite("uniform low", low)?;
                finite("uniform high", high)?;
                if low < high {
                    Ok(())
                } else {
                    Err(Error::Parameter(format!("uniform requires low < high, got [{low}, {high})")))
                }
            }
            DistributionSpec::GaussianMixture { ref components } => {
                if components.len() < 2 {
                    return Err(Error::Parameter("gaussian mixture needs at least 2 components".into()));
                }
                let mut total = 0.0;
                for c in components {
                    finite("mixture mean", c.mean)?;
                    positive("mixture std", c.std)?;
                    if !(c.weight.is_finite() && c.weight >= 0.0) {
                        return Err(Error::Parameter(format!("mixture weight {} invalid", c.weight)));
                    }
                    total += c.weight;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Parameter(format!("mixture weights sum to {total}, not 1")));
                }
                Ok(())
            }
        }
    }

    /// Draw hyperparameters for `family` from its default randomization range.
    ///
    /// | family | ranges |
    /// |---|---|
    /// | beta | alpha, beta in [0.5, 5] |
    /// | binomial | trials in {2..10}, prob in [0.2, 0.8] |
    /// | cauchy, gumbel, laplace | location in [-2, 2], scale in [0.5, 2] |
    /// | chi-squared | dof in [1, 10] |
    /// | exponential | rate in [0.5, 2] |
    /// | gamma | shape in [0.5, 5], scale in [0.5, 2] |
    /// | gaussian | mean in [-2, 2], std in [0.5, 2] |
    /// | log-normal | mu in [-1, 1], sigma in [0.25, 1] |
    /// | pareto | scale in [0.5, 2], shape in [1, 5] |
    /// | student-t | dof in [3, 30] |
    /// | uniform | low in [-2, 0], width in [0.5, 4] |
    /// | weibull | scale in [0.5, 2], shape in [0.5, 5] |
    /// | gmm | 3 components, means in [-3, 3], stds in [0.5, 2], flat-Dirichlet weights |
    pub fn randomized<R: Rng + ?Sized>(family: Family, rng: &mut R) -> Self {
        let mut u = |lo: f64, hi: f64| lo + (hi - lo) * rng.random::<f64>();
        match family {
            Family::Beta => DistributionSpec::Beta { alpha: u(0.5, 5.0), beta: u(0.5, 5.0) },
            Family::Binomial => {
                let trials = 2 + (u(0.0, 9.0).floor() as u64).min(8);
                DistributionSpec::Binomial { trials, prob: u(0.2, 0.8) }
            }
            Family::Cauchy => DistributionSpec::Cauchy { location: u(-2.0, 2.0), scale: u(0.5, 2.0) },
            Family::ChiSquared => DistributionSpec::ChiSquared { dof: u(1.0, 10.0) },
            Family::Exponential => DistributionSpec::Exponential { rate: u(0.5, 2.0) },
            Family::Gamma => DistributionSpec::Gamma { shape: u(0.5, 5.0), scale: u(0.5, 2.0) },
            Family::Gaussian => DistributionSpec::Gaussian { mean: u(-2.0, 2.0), std: u(0.5, 2.0) },
            Family::Gumbel => DistributionSpec::Gumbel { location: u(-2.0, 2.0), scale: u(0.5, 2.0) },
            Family::Laplace => DistributionSpec::Laplace { location: u(-2.0, 2.0), scale: u(0.5, 2.0) },
            Family::LogNormal => DistributionSpec::LogNormal { mu: u(-1.0, 1.0), sigma: u(0.25, 1.0) },
            Family::Pareto => DistributionSpec::Pareto { scale: u(0.5, 2.0), shape: u(1.0, 5.0) },
            Family::StudentT => DistributionSpec::StudentT { dof: u(3.0, 30.0) },
            Family::Uniform => {
                let low = u(-2.0, 0.0);
                DistributionSpec::Uniform { low, high: low + u(0.5, 4.0) }
            }
            Family::Weibull => DistributionSpec::Weibull { scale: u(0.5, 2.0), shape: u(0.5, 5.0) },
            Family::GaussianMixture => {
                let raw: Vec<(f64, f64, f64)> = (0..3)
                    .map(|_| {
                        // Exp(1) draws normalized to one are a flat Dirichlet sample.
                        let e = -(1.0 - u(0.0, 1.0)).ln();
                        (e, u(-3.0, 3.0), u(0.5, 2.0))
                    })
                    .collect();
                let total: f64 = raw.iter().map(|r| r.0).sum();
                let mut components: Vec<MixtureComponent> = raw
                    .iter()
                    .map(|&(e, mean, std)| MixtureComponent { weight: e / total, mean, std })
                    .collect();
                // Absorb rounding so the weights sum to one.
                let head: f64 = components[..2].iter().map(|c| c.weight).sum();
                components[2].weight = 1.0 - head;
                DistributionSpec::GaussianMixture { components }
            }
        }
    }

    /// Inclusive support bounds for bounded families.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            DistributionSpec::Beta { .. } => Some((0.0, 1.0)),
            DistributionSpec::Binomial { trials, .. } => Some((0.0, trials as f64)),
            DistributionSpec::Uniform { low, high } => Some((low, high)),
            _ => None,
        }
    }

    pub(crate) fn sampler(&self) -> Result<Sampler> {
        self.validate()?;
        Ok(match *self {
            DistributionSpec::Beta { alpha, beta } => Sampler::Beta(Beta::new(alpha, beta).map_err(param_err)?),
            DistributionSpec::Binomial { trials, prob } => {
                Sampler::Binomial(Binomial::new(trials, prob).map_err(param_err)?)
            }
            DistributionSpec::Cauchy { location, scale } => {
                Sampler::Cauchy(Cauchy::new(location, scale).map_err(param_err)?)
            }
            DistributionSpec::ChiSquared { dof } => Sampler::ChiSquared(ChiSquared::new(dof).map_err(param_err)?),
            DistributionSpec::Exponential { rate } => Sampler::Exp(Exp::new(rate).map_err(param_err)?),
            DistributionSpec::Gamma { shape, scale } => Sampler::Gamma(Gamma::new(shape, scale).map_err(param_err)?),
            DistributionSpec::Gaussian { mean, std } => Sampler::Normal(Normal::new(mean, std).map_err(param_err)?),
            DistributionSpec::Gumbel { location, scale } => {
                Sampler::Gumbel(Gumbel::new(location, scale).map_err(param_err)?)
            }
            DistributionSpec::Laplace { location, scale } => Sampler::Laplace { location, scale },
            DistributionSpec::LogNormal { mu, sigma } => {
                Sampler::LogNormal(LogNormal::new(mu, sigma).map_err(param_err)?)
            }
            DistributionSpec::Pareto { scale, shape } => Sampler::Pareto(Pareto::new(scale, shape).map_err(param_err)?),
            DistributionSpec::StudentT { dof } => Sampler::StudentT(StudentT::new(dof).map_err(param_err)?),
            DistributionSpec::Uniform { low, high } => Sampler::Uniform { low, high },
            DistributionSpec::Weibull { scale, shape } => {
                Sampler::Weibull(Weibull::new(scale, shape).map_err(param_err)?)
            }
            DistributionSpec::GaussianMixture { ref components } => {
                let mut cumulative = Vec::with_capacity(components.len());
                let mut acc = 0.0;
                let mut normals = Vec::with_capacity(components.len());
                for c in components {
                    acc += c.weight;
                    cumulative.push(acc);
                    normals.push(Normal::new(c.mean, c.std).map_err(param_err)?);
                }
                Sampler::Mixture { cumulative, normals }
            }
        })
    }
}

pub(crate) enum Sampler {
    Beta(Beta<f64>),
    Binomial(Binomial),
    Cauchy(Cauchy<f64>),
    ChiSquared(ChiSquared<f64>),
    Exp(Exp<f64>),
    Gamma(Gamma<f64>),
    Normal(Normal<f64>),
    Gumbel(Gumbel<f64>),
    Laplace { location: f64, scale: f64 },
    LogNormal(LogNormal<f64>),
    Pareto(Pareto<f64>),
    StudentT(StudentT<f64>),
    Uniform { low: f64, high: f64 },
    Weibull(Weibull<f64>),
    Mixture { cumulative: Vec<f64>, normals: Vec<Normal<f64>> },
}

impl Sampler {
    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Beta(d) => d.sample(rng),
            Sampler::Binomial(d) => d.sample(rng) as f64,
            Sampler::Cauchy(d) => d.sample(rng),
            Sampler::ChiSquared(d) => d.sample(rng),
            Sampler::Exp(d) => d.sample(rng),
            Sampler::Gamma(d) => d.sample(rng),
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Gumbel(d) => d.sample(rng),
            Sampler::Laplace { location, scale } => {
                // Inverse CDF on u in (-1/2, 1/2).
                let u: f64 = rng.random::<f64>() - 0.5;
                let tail = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
                location - scale * u.signum() * tail.ln()
            }
            Sampler::LogNormal(d) => d.sample(rng),
            Sampler::Pareto(d) => d.sample(rng),
            Sampler::StudentT(d) => d.sample(rng),
            Sampler::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Sampler::Weibull(d) => d.sample(rng),
            Sampler::Mixture { cumulative, normals } => {
                let u: f64 = rng.random();
                let idx = cumulative.iter().position(|&c| u < c).unwrap_or(normals.len() - 1);
                normals[idx].sample(rng)
            }
        }
    }
}
