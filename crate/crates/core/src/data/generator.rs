//! Synthetic patients drawn from a fully specified class-conditional model.
//!
//! Labels are drawn first. Given the label, age and temperature follow
//! normal distributions truncated to the valid record ranges (sampled by
//! rejection), and each symptom is an independent Bernoulli draw. Because the
//! model is known, the exact posterior `P(infected | features)` of every
//! record is available in closed form; thresholding it at 0.5 is the Bayes
//! classifier against which trained models are judged.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, PatientRecord, AGE_RANGE, N_SYMPTOMS, TEMPERATURE_RANGE};
use crate::error::{Error, Result};
use crate::math::sigmoid;
use crate::rng::{self, Purpose};

/// Class-conditional feature distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassProfile {
    pub age_mean: f64,
    pub age_std: f64,
    pub temperature_mean: f64,
    pub temperature_std: f64,
    /// `P(symptom = 1 | class)`, in feature order.
    pub symptom_probs: [f64; N_SYMPTOMS],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Prior probability of the infected class.
    pub class_balance: f64,
    pub healthy: ClassProfile,
    pub infected: ClassProfile,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    /// Calibrated so that corr(age, infected) ≈ 0.36 and the Bayes
    /// classifier is right about 90% of the time.
    fn default() -> Self {
        GeneratorConfig {
            n: 4000,
            class_balance: 0.5,
            healthy: ClassProfile {
                age_mean: 41.0,
                age_std: 14.0,
                temperature_mean: 98.8,
                temperature_std: 0.9,
                symptom_probs: [0.30, 0.25, 0.20, 0.25, 0.10],
            },
            infected: ClassProfile {
                age_mean: 51.8,
                age_std: 14.0,
                temperature_mean: 100.8,
                temperature_std: 1.3,
                symptom_probs: [0.70, 0.60, 0.55, 0.50, 0.40],
            },
            seed: 42,
        }
    }
}

/// A generated dataset with the exact posterior of each record.
#[derive(Debug, Clone)]
pub struct SyntheticSample {
    pub dataset: Dataset,
    pub bayes_probability: Vec<f64>,
}

/// Normal distribution truncated to `[lo, hi]`.
#[derive(Debug, Clone, Copy)]
struct TruncatedNormal {
    mean: f64,
    std: f64,
    lo: f64,
    hi: f64,
    log_mass: f64,
}

impl TruncatedNormal {
    fn new(mean: f64, std: f64, (lo, hi): (f64, f64)) -> Self {
        let cdf = |x: f64| 0.5 * libm::erfc(-(x - mean) / (std * std::f64::consts::SQRT_2));
        TruncatedNormal {
            mean,
            std,
            lo,
            hi,
            log_mass: (cdf(hi) - cdf(lo)).ln(),
        }
    }

    fn mass(&self) -> f64 {
        self.log_mass.exp()
    }

    fn log_pdf(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return f64::NEG_INFINITY;
        }
        let z = (x - self.mean) / self.std;
        -0.5 * z * z - self.std.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln() - self.log_mass
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let normal = Normal::new(self.mean, self.std).expect("validated std");
        loop {
            let x = normal.sample(rng);
            if (self.lo..=self.hi).contains(&x) {
                return x;
            }
        }
    }
}

struct ClassModel {
    age: TruncatedNormal,
    temperature: TruncatedNormal,
    symptom_probs: [f64; N_SYMPTOMS],
}

impl ClassModel {
    fn new(p: &ClassProfile) -> Self {
        ClassModel {
            age: TruncatedNormal::new(p.age_mean, p.age_std, AGE_RANGE),
            temperature: TruncatedNormal::new(
                p.temperature_mean,
                p.temperature_std,
                TEMPERATURE_RANGE,
            ),
            symptom_probs: p.symptom_probs,
        }
    }

    fn log_likelihood(&self, r: &PatientRecord) -> f64 {
        let mut ll = self.age.log_pdf(r.age) + self.temperature.log_pdf(r.body_temperature);
        for (&s, &p) in r.symptoms.iter().zip(&self.symptom_probs) {
            ll += if s == 1 { p.ln() } else { (1.0 - p).ln() };
        }
        ll
    }

    fn sample(&self, rng: &mut ChaCha8Rng, label: u8) -> PatientRecord {
        let age = self.age.sample(rng);
        let body_temperature = self.temperature.sample(rng);
        let mut symptoms = [0u8; N_SYMPTOMS];
        for (s, &p) in symptoms.iter_mut().zip(&self.symptom_probs) {
            *s = u8::from(rng.random_bool(p));
        }
        PatientRecord {
            age,
            body_temperature,
            symptoms,
            infected: Some(label),
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name}={p} is not a probability")))
            }
        };
        prob("class_balance", self.class_balance)?;
        for (tag, c) in [("healthy", &self.healthy), ("infected", &self.infected)] {
            for p in c.symptom_probs {
                prob(&format!("{tag} symptom probability"), p)?;
            }
            for (name, s) in [
                ("age_std", c.age_std),
                ("temperature_std", c.temperature_std),
            ] {
                if !(s > 0.0 && s.is_finite()) {
                    return Err(Error::Config(format!("{tag} {name}={s} must be > 0")));
                }
            }
            if !(c.age_mean.is_finite() && c.temperature_mean.is_finite()) {
                return Err(Error::Config(format!("{tag} means must be finite")));
            }
            let model = ClassModel::new(c);
            // Rejection sampling needs a reasonable acceptance rate.
            if model.age.mass() < 1e-3 || model.temperature.mass() < 1e-3 {
                return Err(Error::Config(format!(
                    "{tag} distribution puts almost no mass inside the valid record ranges"
                )));
            }
        }
        Ok(())
    }

    /// Exact `P(infected = 1 | features)` under this generative model.
    pub fn posterior(&self, record: &PatientRecord) -> f64 {
        if self.class_balance >= 1.0 {
            return 1.0;
        }
        if self.class_balance <= 0.0 {
            return 0.0;
        }
        let l1 = self.class_balance.ln() + ClassModel::new(&self.infected).log_likelihood(record);
        let l0 =
            (1.0 - self.class_balance).ln() + ClassModel::new(&self.healthy).log_likelihood(record);
        match (l1.is_finite(), l0.is_finite()) {
            (_, false) => 1.0,
            (false, true) => 0.0,
            (true, true) => sigmoid(l1 - l0),
        }
    }
}

pub fn generate_synthetic(config: &GeneratorConfig) -> Result<SyntheticSample> {
    config.validate()?;
    let healthy = ClassModel::new(&config.healthy);
    let infected = ClassModel::new(&config.infected);
    let mut rng = rng::stream(config.seed, Purpose::Generator, 0);

    let mut records = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let label = u8::from(rng.random_bool(config.class_balance));
        let model = if label == 1 { &infected } else { &healthy };
        records.push(model.sample(&mut rng, label));
    }
    let bayes_probability = records.iter().map(|r| config.posterior(r)).collect();
    Ok(SyntheticSample {
        dataset: Dataset::new(records)?,
        bayes_probability,
    })
}
