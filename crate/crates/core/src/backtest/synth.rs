//! Seeded synthetic sales and the Monte-Carlo fulfilment oracle.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::SalesRecord;

/// Identity of the random stream behind synthetic data, echoed into run metadata.
pub const GENERATOR_ID: &str = "ChaCha8Rng/rand_chacha-0.9+rand_distr-0.5";

/// Distribution of the true weekly rate of each synthetic SKU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSampler {
    /// Lognormal rate, redrawn until it falls in `[min, max]`.
    LogNormal { mu: f64, sigma: f64, min: f64, max: f64 },
    Constant { lambda: f64 },
}

impl Default for LambdaSampler {
    fn default() -> Self {
        LambdaSampler::LogNormal {
            mu: std::f64::consts::LN_2,
            sigma: 1.0,
            min: 0.1,
            max: 50.0,
        }
    }
}

impl LambdaSampler {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            LambdaSampler::LogNormal { mu, sigma, min, max } => {
                mu.is_finite() && sigma > 0.0 && sigma.is_finite() && min >= 0.0 && min < max && max.is_finite()
            }
            LambdaSampler::Constant { lambda } => lambda >= 0.0 && lambda.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config("lambda_sampler", format!("invalid sampler {self:?}")))
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            LambdaSampler::LogNormal { mu, sigma, min, max } => {
                let dist = LogNormal::new(mu, sigma).expect("validated sampler");
                for _ in 0..10_000 {
                    let x = dist.sample(rng);
                    if (min..=max).contains(&x) {
                        return x;
                    }
                }
                // Only reachable when [min, max] holds almost no mass.
                dist.sample(rng).clamp(min, max)
            }
            LambdaSampler::Constant { lambda } => lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWorld {
    pub clusters: u32,
    pub skus_per_cluster: u32,
    pub weeks: u32,
    pub lambda_sampler: LambdaSampler,
    pub seed: u64,
}

impl SyntheticWorld {
    pub fn new(clusters: u32, skus_per_cluster: u32, weeks: u32, seed: u64) -> Self {
        Self {
            clusters,
            skus_per_cluster,
            weeks,
            lambda_sampler: LambdaSampler::default(),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.skus_per_cluster == 0 {
            return Err(Error::config("skus_per_cluster", "must be at least 1"));
        }
        if self.weeks == 0 {
            return Err(Error::config("weeks", "must be at least 1"));
        }
        self.lambda_sampler.validate()
    }
}

fn poisson_draw(lambda: f64, rng: &mut ChaCha8Rng) -> u64 {
    if lambda == 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive finite rate").sample(rng) as u64
}

/// Dense weekly sales for `FDC_1..` × `SKU_0001..` × weeks `0..weeks`, in that nesting order.
pub fn generate_world(world: &SyntheticWorld) -> Result<Vec<SalesRecord>> {
    Ok(generate_world_with_rates(world)?.0)
}

/// As [`generate_world`], also returning the true rate of each (cluster, SKU) in record order.
pub fn generate_world_with_rates(world: &SyntheticWorld) -> Result<(Vec<SalesRecord>, Vec<f64>)> {
    world.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(world.seed);
    let n = world.clusters as usize * world.skus_per_cluster as usize;
    let mut records = Vec::with_capacity(n * world.weeks as usize);
    let mut rates = Vec::with_capacity(n);
    for c in 1..=world.clusters {
        let cluster_id = format!("FDC_{c}");
        for k in 1..=world.skus_per_cluster {
            let sku_id = format!("SKU_{k:04}");
            let lambda = world.lambda_sampler.draw(&mut rng);
            rates.push(lambda);
            for week in 0..world.weeks {
                records.push(SalesRecord {
                    cluster_id: cluster_id.clone(),
                    sku_id: sku_id.clone(),
                    week,
                    units: poisson_draw(lambda, &mut rng),
                });
            }
        }
    }
    Ok((records, rates))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: u64,
}

/// Monte-Carlo `E[min(q, D)/D]` for `D ~ Poisson(λ)`, counting `D = 0` as 1.
pub fn estimate_expected_fi(lambda: f64, q: u64, samples: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::Domain(format!("Poisson rate must be positive, got {lambda}")));
    }
    if samples == 0 {
        return Err(Error::Input("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = Poisson::new(lambda).expect("checked rate");
    // Welford
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 1..=samples {
        let d = dist.sample(&mut rng) as u64;
        let x = if d == 0 { 1.0 } else { q.min(d) as f64 / d as f64 };
        let delta = x - mean;
        mean += delta / i as f64;
        m2 += delta * (x - mean);
    }
    let variance = if samples > 1 { m2 / (samples - 1) as f64 } else { 0.0 };
    Ok(MonteCarloEstimate {
        mean,
        std_error: (variance / samples as f64).sqrt(),
        samples,
    })
}
