//! Likelihood-ratio obstacle detection over per-bin returns.
//!
//! Each measured bin level `z` (dB) is compared against the obstacle-absent
//! expectation `mu` from the null model. Under the Gaussian-in-dB model both
//! hypotheses share a spread `sigma`; the obstacle-present mean is shifted by
//! `alt_offset`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_positive, Error, Result};
use crate::level::Level;
use crate::nullmodel::NullModelReturn;
use crate::raysim::{BeamReturn, PingReturn};

/// Gaussian-in-dB measurement model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianDb {
    pub sigma_db: f64,
    pub alt_offset_db: f64,
}

impl Default for GaussianDb {
    fn default() -> Self {
        GaussianDb {
            sigma_db: 5.0,
            alt_offset_db: 10.0,
        }
    }
}

impl GaussianDb {
    pub fn validate(&self) -> Result<()> {
        check_positive("sigma_db", self.sigma_db)?;
        if !self.alt_offset_db.is_finite() {
            return Err(Error::validation("alt_offset_db", "must be finite"));
        }
        Ok(())
    }

    /// `ln p(z | obstacle) - ln p(z | clear)` for a deviation `x = z - mu`.
    /// A zero measured intensity sits at `x = -inf`.
    pub fn log_ratio(&self, x: f64) -> f64 {
        let d = self.alt_offset_db;
        if d == 0.0 {
            return 0.0;
        }
        d / (self.sigma_db * self.sigma_db) * (x - 0.5 * d)
    }

    /// Tail probabilities of the region `lambda >= gamma` under both hypotheses.
    pub fn pd_pfa(&self, gamma: f64) -> (f64, f64) {
        if gamma <= 0.0 {
            return (1.0, 1.0);
        }
        let (s, d) = (self.sigma_db, self.alt_offset_db);
        if d == 0.0 {
            return if gamma <= 1.0 { (1.0, 1.0) } else { (0.0, 0.0) };
        }
        let t = s * s * gamma.ln() / d + 0.5 * d;
        let n = Normal::standard();
        if d > 0.0 {
            (n.sf((t - d) / s), n.sf(t / s))
        } else {
            (n.cdf((t - d) / s), n.cdf(t / s))
        }
    }
}

/// Null-hypothesis means for one beam plus the measurement model.
#[derive(Clone, Debug, PartialEq)]
pub struct HypothesisModel {
    pub null_mean_db: Vec<Level>,
    pub model: GaussianDb,
}

impl HypothesisModel {
    pub fn new(null_mean_db: Vec<Level>, model: GaussianDb) -> Result<Self> {
        model.validate()?;
        Ok(HypothesisModel { null_mean_db, model })
    }

    /// Builds the null means from a null-model run. When the measurement includes
    /// ambient noise at `noise_db`, its mean power joins the obstacle-absent expectation.
    pub fn from_null(null: &NullModelReturn, noise_db: Option<f64>, model: GaussianDb) -> Result<Self> {
        let means = null
            .records
            .iter()
            .map(|r| match noise_db {
                Some(nl) => Level::power_sum([r.total, Level::from_db(nl)]),
                None => r.total,
            })
            .collect();
        Self::new(means, model)
    }
}

/// `p(z | obstacle) / p(z | clear)` in bin `bin` (1-based). `None` marks an excluded
/// bin: the null expectation there is no response.
pub fn likelihood_ratio(z_db: Level, model: &HypothesisModel, bin: usize) -> Result<Option<f64>> {
    let mu = model
        .null_mean_db
        .get(bin.wrapping_sub(1))
        .ok_or_else(|| Error::validation("bin", format!("{bin} outside 1..={}", model.null_mean_db.len())))?;
    let Some(mu) = mu.db() else {
        return Ok(None);
    };
    let x = z_db.db().map_or(f64::NEG_INFINITY, |z| z - mu);
    Ok(Some(model.model.log_ratio(x).exp()))
}

pub fn decide(lambda: f64, gamma: f64) -> u8 {
    u8::from(lambda >= gamma)
}

pub fn pd_pfa(gamma: f64, model: &GaussianDb) -> (f64, f64) {
    model.pd_pfa(gamma)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinDetection {
    pub bin: usize,
    pub z_db: Level,
    pub null_db: Level,
    /// `None` when the bin is excluded.
    pub lambda: Option<f64>,
    pub decision: Option<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub beam_id: usize,
    pub gamma: f64,
    pub bins: Vec<BinDetection>,
    pub pd: f64,
    pub pfa: f64,
}

impl DetectionResult {
    pub fn detections(&self) -> impl Iterator<Item = usize> + '_ {
        self.bins.iter().filter(|b| b.decision == Some(1)).map(|b| b.bin)
    }

    pub fn excluded(&self) -> usize {
        self.bins.iter().filter(|b| b.lambda.is_none()).count()
    }
}

pub fn detect_levels(beam_id: usize, levels: &[Level], model: &HypothesisModel, gamma: f64) -> Result<DetectionResult> {
    if levels.len() != model.null_mean_db.len() {
        return Err(Error::validation(
            "null",
            format!(
                "{} null bins for {} measured bins",
                model.null_mean_db.len(),
                levels.len()
            ),
        ));
    }
    if gamma.is_nan() {
        return Err(Error::validation("gamma", "must not be NaN"));
    }
    let bins = levels
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let lambda = likelihood_ratio(z, model, i + 1)?;
            Ok(BinDetection {
                bin: i + 1,
                z_db: z,
                null_db: model.null_mean_db[i],
                lambda,
                decision: lambda.map(|l| decide(l, gamma)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (pd, pfa) = model.model.pd_pfa(gamma);
    Ok(DetectionResult {
        beam_id,
        gamma,
        bins,
        pd,
        pfa,
    })
}

pub fn detect_beam(beam: &BeamReturn, model: &HypothesisModel, gamma: f64) -> Result<DetectionResult> {
    detect_levels(beam.beam_id, &beam.db(), model, gamma)
}

/// Runs the detector on every beam of a ping; `models[i]` belongs to `ping.beams[i]`.
pub fn detect_ping(ping: &PingReturn, models: &[HypothesisModel], gamma: f64) -> Result<Vec<DetectionResult>> {
    if models.len() != ping.beams.len() {
        return Err(Error::validation(
            "null",
            format!("{} null models for {} beams", models.len(), ping.beams.len()),
        ));
    }
    ping.beams
        .iter()
        .zip(models)
        .map(|(b, m)| detect_beam(b, m, gamma))
        .collect()
}

/// Monte-Carlo estimate of `(pd, pfa)` with their standard errors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RocSample {
    pub pd: f64,
    pub pfa: f64,
    pub pd_se: f64,
    pub pfa_se: f64,
}

/// Draws `n` measurements under each hypothesis and applies the ratio test directly.
pub fn monte_carlo_pd_pfa(gamma: f64, model: &GaussianDb, n: usize, seed: u64) -> RocSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = [0usize; 2];
    for _ in 0..n {
        for (k, shift) in [(0, model.alt_offset_db), (1, 0.0)] {
            let e: f64 = StandardNormal.sample(&mut rng);
            let l = model.log_ratio(shift + model.sigma_db * e).exp();
            hits[k] += usize::from(decide(l, gamma) == 1);
        }
    }
    let p = |h: usize| h as f64 / n as f64;
    let se = |p: f64| (p * (1.0 - p) / n as f64).sqrt();
    let (pd, pfa) = (p(hits[0]), p(hits[1]));
    RocSample {
        pd,
        pfa,
        pd_se: se(pd),
        pfa_se: se(pfa),
    }
}
