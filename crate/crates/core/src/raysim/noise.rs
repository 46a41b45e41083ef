//! Ambient noise injection: exponential power per bin (Rayleigh envelope)
//! with mean set by the band noise level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::raysim::ping::{BeamReturn, Component, PingReturn};

/// Adds an independent exponential draw with mean `10^(nl_db/10)` to every bin.
pub fn add_noise<R: Rng>(beam: &mut BeamReturn, nl_db: f64, rng: &mut R) {
    let mean = 10f64.powf(nl_db / 10.0);
    for bin in 1..=beam.num_bins() {
        let draw: f64 = rng.sample(Exp1);
        beam.add(Component::Noise, bin, mean * draw);
    }
}

/// Adds noise to every beam of a ping; `None` for the level leaves it untouched.
pub fn add_noise_to_ping(ping: &PingReturn, nl_db: Option<f64>, seed: u64) -> PingReturn {
    let mut out = ping.clone();
    if let Some(nl) = nl_db {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for beam in &mut out.beams {
            add_noise(beam, nl, &mut rng);
        }
    }
    out
}
