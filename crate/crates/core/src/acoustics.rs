//! Closed-form propagation physics: sound speed, seawater absorption,
//! spreading and transmission loss, the rectangular-aperture beam pattern,
//! range resolution, maximum range and ambient noise.
//!
//! Frequencies are carried in kHz wherever the empirical formulas want kHz;
//! the only place Hz appears is the wavelength `c / (1000 f)` and the
//! bandwidth, which is always Hz.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, check_range, Error, Result};
use crate::level::Level;
use crate::vec3::{Mat3, Vec3};

/// Water column and seabed state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentParams {
    pub temperature_c: f64,
    pub salinity_ppt: f64,
    /// Depth at which the sound speed is evaluated.
    pub depth_m: f64,
    /// Maximum water depth, used by the pressure corrections of the absorption model.
    pub max_depth_m: f64,
    pub ph: f64,
    pub wind_knots: f64,
    /// 0 (very light) to 1 (heavy).
    pub shipping_density: f64,
    /// Volume scatterer strength: -50 high, -70 moderate, -90 low particle density.
    pub particle_density_db: f64,
    /// 1 mud, 2 sand, 3 gravel, 4 rock. Fractional values interpolate.
    pub bottom_type: f64,
}

pub mod bottom_type {
    pub const MUD: f64 = 1.0;
    pub const SAND: f64 = 2.0;
    pub const GRAVEL: f64 = 3.0;
    pub const ROCK: f64 = 4.0;
}

impl EnvironmentParams {
    pub fn validate(&self) -> Result<()> {
        check_range("temperature_c", self.temperature_c, 0.0, 35.0)?;
        check_range("salinity_ppt", self.salinity_ppt, 0.0, 45.0)?;
        check_range("depth_m", self.depth_m, 0.0, 1000.0)?;
        check_range("max_depth_m", self.max_depth_m, 0.0, 12_000.0)?;
        check_range("ph", self.ph, 0.0, 14.0)?;
        check_range("wind_knots", self.wind_knots, 0.0, f64::MAX)?;
        check_range("shipping_density", self.shipping_density, 0.0, 1.0)?;
        check_range("particle_density_db", self.particle_density_db, -f64::MAX, f64::MAX)?;
        check_range("bottom_type", self.bottom_type, 1.0, 4.0)?;
        Ok(())
    }
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        EnvironmentParams {
            temperature_c: 10.0,
            salinity_ppt: 35.0,
            depth_m: 7.0,
            max_depth_m: 12.0,
            ph: 8.0,
            wind_knots: 10.0,
            shipping_density: 0.5,
            particle_density_db: -90.0,
            bottom_type: bottom_type::SAND,
        }
    }
}

/// Beam steering relative to the vehicle. Positive pitch points the beam downwards,
/// positive yaw to starboard.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamOrientation {
    #[serde(default)]
    pub pitch_rad: f64,
    #[serde(default)]
    pub yaw_rad: f64,
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % (2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    } else if w > PI {
        w -= 2.0 * PI;
    }
    w
}

impl BeamOrientation {
    pub const FORWARD: BeamOrientation = BeamOrientation {
        pitch_rad: 0.0,
        yaw_rad: 0.0,
    };

    pub fn new(pitch_rad: f64, yaw_rad: f64) -> Self {
        BeamOrientation {
            pitch_rad: wrap_angle(pitch_rad),
            yaw_rad: wrap_angle(yaw_rad),
        }
    }

    pub fn from_degrees(pitch_deg: f64, yaw_deg: f64) -> Self {
        Self::new(pitch_deg.to_radians(), yaw_deg.to_radians())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, a) in [("pitch_rad", self.pitch_rad), ("yaw_rad", self.yaw_rad)] {
            if !a.is_finite() {
                return Err(Error::validation(name, "must be finite"));
            }
            if !(a > -PI && a <= PI) {
                return Err(Error::validation(name, format!("{a} is outside (-pi, pi]")));
            }
        }
        Ok(())
    }

    /// Adds a vehicle pitch to this beam's own pitch.
    pub fn pitched_by(self, extra_pitch_rad: f64) -> Self {
        Self::new(self.pitch_rad + extra_pitch_rad, self.yaw_rad)
    }

    /// Rotation taking world vectors into the transducer frame, where `[1, 0, 0]`
    /// points away from the transducer face.
    pub fn world_to_sonar(&self) -> Mat3 {
        let (sy, cy) = self.yaw_rad.sin_cos();
        let unyaw = Mat3([[cy, sy, 0.0], [-sy, cy, 0.0], [0.0, 0.0, 1.0]]);
        pitch_rotation(self.pitch_rad).mul(&unyaw)
    }

    /// Boresight direction in world coordinates.
    pub fn boresight(&self) -> Vec3 {
        let (sp, cp) = self.pitch_rad.sin_cos();
        let (sy, cy) = self.yaw_rad.sin_cos();
        Vec3::new(cp * cy, cp * sy, sp)
    }
}

/// The pitch rotation `[cos 0 sin; 0 1 0; -sin 0 cos]` for a sonar pitched `pitch` downwards.
pub fn pitch_rotation(pitch: f64) -> Mat3 {
    let (s, c) = pitch.sin_cos();
    Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
}

/// Transducer physics and sampling parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SonarConfig {
    pub frequency_khz: f64,
    pub bandwidth_hz: f64,
    pub source_level_db: f64,
    pub ping_rate_hz: f64,
    pub horizontal_len_m: f64,
    pub vertical_len_m: f64,
    pub bin_length_m: f64,
    /// Receive beams.
    pub beams: Vec<BeamOrientation>,
    pub num_rays: usize,
    pub rng_seed: u64,
}

impl Default for SonarConfig {
    /// A 450 kHz forward-looking head: narrow in azimuth, wide in elevation.
    fn default() -> Self {
        SonarConfig {
            frequency_khz: 450.0,
            bandwidth_hz: 50_000.0,
            source_level_db: 0.0,
            ping_rate_hz: 15.0,
            horizontal_len_m: 0.02,
            vertical_len_m: 0.005,
            bin_length_m: 0.25,
            beams: vec![BeamOrientation::FORWARD],
            num_rays: 20_000,
            rng_seed: 1,
        }
    }
}

impl SonarConfig {
    pub fn validate(&self) -> Result<()> {
        check_positive("frequency_khz", self.frequency_khz)?;
        check_positive("bandwidth_hz", self.bandwidth_hz)?;
        check_range("source_level_db", self.source_level_db, -f64::MAX, f64::MAX)?;
        check_positive("ping_rate_hz", self.ping_rate_hz)?;
        check_positive("horizontal_len_m", self.horizontal_len_m)?;
        check_positive("vertical_len_m", self.vertical_len_m)?;
        check_positive("bin_length_m", self.bin_length_m)?;
        if self.num_rays == 0 {
            return Err(Error::validation("num_rays", "at least one ray is required"));
        }
        if self.beams.is_empty() {
            return Err(Error::validation("beams", "at least one receive beam is required"));
        }
        for (i, b) in self.beams.iter().enumerate() {
            b.validate().map_err(|e| e.within(&format!("beams[{i}]")))?;
        }
        Ok(())
    }

    /// Wavelength in metres for sound speed `c` (m/s).
    pub fn wavelength_m(&self, c: f64) -> f64 {
        c / (self.frequency_khz * 1000.0)
    }

    pub fn beam_pattern(&self, c: f64) -> BeamPattern {
        BeamPattern::new(self.horizontal_len_m, self.vertical_len_m, self.wavelength_m(c))
    }
}

/// Medwin's sound speed approximation (m/s), valid for 0-35 C, 0-45 ppt and 0-1000 m.
pub fn sound_speed(env: &EnvironmentParams) -> Result<f64> {
    check_range("temperature_c", env.temperature_c, 0.0, 35.0)?;
    check_range("salinity_ppt", env.salinity_ppt, 0.0, 45.0)?;
    check_range("depth_m", env.depth_m, 0.0, 1000.0)?;
    let t = env.temperature_c;
    Ok(1449.2 + 4.6 * t - 0.055 * t * t
        + 0.00029 * t * t * t
        + (1.34 - 0.010 * t) * (env.salinity_ppt - 35.0)
        + 0.016 * env.depth_m)
}

/// The three relaxation terms of the Francois-Garrison absorption model, in dB/km.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorptionTerms {
    pub boric_acid: f64,
    pub magnesium_sulphate: f64,
    pub pure_water: f64,
}

impl AbsorptionTerms {
    pub fn total(&self) -> f64 {
        self.boric_acid + self.magnesium_sulphate + self.pure_water
    }
}

/// Francois-Garrison absorption split by mechanism, with sound speed `c` supplied.
pub fn absorption_terms(f_khz: f64, env: &EnvironmentParams, c: f64) -> Result<AbsorptionTerms> {
    check_positive("frequency_khz", f_khz)?;
    let t = env.temperature_c;
    let s = env.salinity_ppt;
    let zmax = env.max_depth_m;
    let f2 = f_khz * f_khz;
    let kelvin = t + 273.0;

    let a1 = 8.696 / c * 10f64.powf(0.78 * env.ph - 5.0);
    let p1 = 1.0;
    let fr1 = 2.8 * (s / 35.0).sqrt() * 10f64.powf(4.0 - 1245.0 / kelvin);

    let a2 = 21.44 * s / c * (1.0 + 0.025 * t);
    let p2 = 1.0 - 1.37e-4 * zmax + 6.2e-9 * zmax * zmax;
    let fr2 = 8.17 * 10f64.powf(8.0 - 1990.0 / kelvin) / (1.0 + 0.0018 * (s - 35.0));

    let a3 = if t <= 20.0 {
        4.937e-4 - 2.59e-5 * t + 9.11e-7 * t * t - 1.5e-8 * t * t * t
    } else {
        3.964e-4 - 1.146e-5 * t + 1.45e-7 * t * t - 6.5e-10 * t * t * t
    };
    let p3 = 1.0 - 3.83e-5 * zmax + 4.9e-10 * zmax * zmax;

    Ok(AbsorptionTerms {
        boric_acid: a1 * p1 * fr1 * f2 / (fr1 * fr1 + f2),
        magnesium_sulphate: a2 * p2 * fr2 * f2 / (fr2 * fr2 + f2),
        pure_water: a3 * p3 * f2,
    })
}

/// Seawater absorption coefficient alpha_w in dB/km.
pub fn absorption_coeff(f_khz: f64, env: &EnvironmentParams) -> Result<f64> {
    let c = sound_speed(env)?;
    Ok(absorption_terms(f_khz, env, c)?.total())
}

/// Two-way absorption `(2d - 1) alpha_w / 1000` dB. Distances below 1 m are clamped to 1 m.
pub fn attenuation_total(alpha_w_db_per_km: f64, d_m: f64) -> f64 {
    let d = d_m.max(1.0);
    (2.0 * d - 1.0) * alpha_w_db_per_km / 1000.0
}

/// Two-way spherical spreading loss `40 log10 d`, referenced to 1 m.
pub fn spread_loss(d_m: f64) -> Result<f64> {
    check_positive("distance_m", d_m)?;
    Ok(40.0 * d_m.max(1.0).log10())
}

pub fn transmission_loss(d_m: f64, alpha_w_db_per_km: f64) -> Result<f64> {
    Ok(spread_loss(d_m)? + attenuation_total(alpha_w_db_per_km, d_m))
}

/// Precomputed transmission loss for a fixed absorption coefficient, for hot loops
/// where the distance is already known to be positive.
#[derive(Clone, Copy, Debug)]
pub struct Propagation {
    pub alpha_w_db_per_km: f64,
}

impl Propagation {
    pub fn two_way_loss_db(&self, d_m: f64) -> f64 {
        let d = d_m.max(1.0);
        40.0 * d.log10() + attenuation_total(self.alpha_w_db_per_km, d)
    }
}

/// Normalised sinc, `sin(pi x) / (pi x)`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - (PI * x).powi(2) / 6.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Single-point-source pattern of a rectangular aperture, with lengths already
/// expressed in wavelengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamPattern {
    pub horizontal_wavelengths: f64,
    pub vertical_wavelengths: f64,
}

impl BeamPattern {
    pub fn new(horizontal_len_m: f64, vertical_len_m: f64, wavelength_m: f64) -> Self {
        BeamPattern {
            horizontal_wavelengths: horizontal_len_m / wavelength_m,
            vertical_wavelengths: vertical_len_m / wavelength_m,
        }
    }

    /// The amplitude product `alpha * beta`, or `None` outside the open front hemisphere.
    pub fn amplitude(&self, theta: f64, psi: f64) -> Option<f64> {
        let half = PI / 2.0;
        if !(theta.abs() < half && psi.abs() < half) {
            return None;
        }
        let alpha = sinc(theta.sin() * psi.cos() * self.horizontal_wavelengths);
        let beta = sinc(psi.sin() * self.vertical_wavelengths);
        Some(alpha * beta)
    }

    /// Linear intensity gain `(alpha beta)^2`; zero outside the gate.
    pub fn gain(&self, theta: f64, psi: f64) -> f64 {
        self.amplitude(theta, psi).map_or(0.0, |a| a * a)
    }

    /// `20 log10 |alpha beta|` dB, `NoResponse` outside the gate or on a null.
    /// Amplitudes below `1e-12` (-240 dB) are rounding residue of an exact null.
    pub fn loss(&self, theta: f64, psi: f64) -> Level {
        match self.amplitude(theta, psi) {
            Some(a) if a.abs() > 1e-12 => Level::Db(20.0 * a.abs().log10()),
            _ => Level::NoResponse,
        }
    }
}

/// Beam pattern loss for a given sonar at sound speed `c`.
pub fn beam_pattern_loss(theta: f64, psi: f64, sonar: &SonarConfig, c: f64) -> Level {
    sonar.beam_pattern(c).loss(theta, psi)
}

/// Range resolution `c / 2B` in metres.
pub fn range_resolution(c: f64, bandwidth_hz: f64) -> f64 {
    c / (2.0 * bandwidth_hz)
}

/// Maximum unambiguous range `c / 2 f_p` in metres.
pub fn max_range(c: f64, ping_rate_hz: f64) -> f64 {
    c / (2.0 * ping_rate_hz)
}

/// Ambient noise components in a 1 Hz band, dB.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseComponents {
    pub turbulence: f64,
    pub traffic: f64,
    pub sea_state: f64,
    pub thermal: f64,
}

impl NoiseComponents {
    pub fn new(f_khz: f64, wind_knots: f64, shipping_density: f64) -> Result<Self> {
        check_positive("frequency_khz", f_khz)?;
        let lf = f_khz.log10();
        Ok(NoiseComponents {
            turbulence: 17.0 - 30.0 * lf,
            traffic: 40.0 + 20.0 * (shipping_density - 0.5) + 26.0 * lf - 60.0 * (f_khz + 0.03).log10(),
            sea_state: 50.0 + 5.38 * wind_knots.sqrt() + 20.0 * lf - 40.0 * (f_khz + 0.4).log10(),
            thermal: -15.0 + 20.0 * lf,
        })
    }

    /// Power sum of the four components, the 1 Hz band level NL.
    pub fn total(&self) -> f64 {
        let sum: f64 = [self.turbulence, self.traffic, self.sea_state, self.thermal]
            .iter()
            .map(|l| 10f64.powf(l / 10.0))
            .sum();
        10.0 * sum.log10()
    }
}

/// Ambient noise level over a band of `bandwidth_hz`.
pub fn noise_level_band(f_khz: f64, env: &EnvironmentParams, bandwidth_hz: f64) -> Result<f64> {
    check_positive("bandwidth_hz", bandwidth_hz)?;
    let nl = NoiseComponents::new(f_khz, env.wind_knots, env.shipping_density)?;
    Ok(nl.total() + 10.0 * bandwidth_hz.log10())
}
