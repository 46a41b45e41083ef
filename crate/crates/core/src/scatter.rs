//! SEARAY backscatter coefficients and the sonar-equation assemblies for
//! reverberation and target echoes.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};
use crate::level::Level;

/// Largest grazing angle the surface coefficient is evaluated at; `tan` diverges at pi/2.
pub const SURFACE_GRAZING_CAP: f64 = FRAC_PI_2 - 1e-6;

/// Geometry of an ensonified patch or shell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatterGeometry {
    pub grazing_rad: f64,
    pub ensonified_area_m2: f64,
    pub ensonified_volume_m3: f64,
}

/// Object surface description. Roughness is expressed on the 1..4 bottom-type
/// scale so the bottom coefficient can be reused for target strength.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectMaterial {
    pub rms_roughness: f64,
}

impl ObjectMaterial {
    pub fn validate(&self) -> Result<()> {
        check_range("rms_roughness", self.rms_roughness, 1.0, 4.0)
    }
}

impl Default for ObjectMaterial {
    fn default() -> Self {
        ObjectMaterial { rms_roughness: 4.0 }
    }
}

/// Bottom backscatter coefficient `S_B` in dB/m^2.
///
/// Never NaN: as grazing goes to zero `cot^2` overflows to +inf, which drives the
/// gamma exponent to -inf and its exponential cleanly to zero. The additive
/// `10^-4.42` floor keeps the result at or above -44.2 dB.
pub fn bottom_coeff(bottom_type: f64, grazing_rad: f64, f_khz: f64) -> f64 {
    let bt = bottom_type;
    let (s, c) = grazing_rad.sin_cos();
    let cot2 = if s == 0.0 { f64::INFINITY } else { (c * c) / (s * s) };
    let gamma = 1.0 + 125.0 * (-2.64 * (bt - 1.75).powi(2) - 50.0 / bt * cot2).exp();
    let beta = gamma * (s + 0.19).powf(bt * c.powi(16));
    let scatter = 3.03 * beta * f_khz.powf(3.2 - 0.8 * bt) * 10f64.powf(2.8 * bt - 12.0);
    10.0 * (scatter + 10f64.powf(-4.42)).log10()
}

/// Surface backscatter coefficient `S_S` in dB/m^2. Grazing angles at or beyond
/// [`SURFACE_GRAZING_CAP`] are evaluated at the cap. Returns -inf at zero grazing.
pub fn surface_coeff(wind_knots: f64, grazing_rad: f64, f_khz: f64) -> f64 {
    let g = grazing_rad.min(SURFACE_GRAZING_CAP);
    let v = wind_knots;
    let fp = f_khz + 0.1;
    let beta = surface_beta(v, g, f_khz);
    10.0 * (10f64.powf(-5.05) * (1.0 + v).powi(2) * fp.powf(v / 150.0) * g.tan().powf(beta)).log10()
}

/// Exponent of `tan(grazing)` in the surface coefficient.
pub fn surface_beta(wind_knots: f64, grazing_rad: f64, f_khz: f64) -> f64 {
    let v = wind_knots;
    4.0 * ((v + 2.0) / (v + 1.0)) + (2.5 * (f_khz + 0.1).powf(-1.0 / 3.0) - 4.0) * grazing_rad.cos().powf(0.125)
}

/// Volume backscatter coefficient `S_V = Sp + 7 log10 f` in dB/m^3.
pub fn volume_coeff(particle_density_db: f64, f_khz: f64) -> f64 {
    particle_density_db + 7.0 * f_khz.log10()
}

/// `SL - TL + BP_T + BP_R + S + 10 log10(measure)`. An empty measure or a beam
/// pattern with no response yields `NoResponse`.
pub fn reverb_level(
    source_level_db: f64,
    transmission_loss_db: f64,
    bp_transmit: Level,
    bp_receive: Level,
    coeff_db: f64,
    measure: f64,
) -> Level {
    if !(measure > 0.0) {
        return Level::NoResponse;
    }
    Level::from_db(source_level_db - transmission_loss_db + coeff_db + 10.0 * measure.log10())
        + bp_transmit
        + bp_receive
}

/// Echo from an object, `SL - TL + BP_T + BP_R + TS`.
pub fn target_echo_level(
    source_level_db: f64,
    transmission_loss_db: f64,
    bp_transmit: Level,
    bp_receive: Level,
    target_strength: Level,
) -> Level {
    Level::from_db(source_level_db - transmission_loss_db) + bp_transmit + bp_receive + target_strength
}

/// Target strength of the patch a ray attributes to an object: the SEARAY bottom
/// coefficient at the object's roughness plus `10 log10(area)`.
pub fn target_strength(patch_area_m2: f64, grazing_rad: f64, f_khz: f64, material: ObjectMaterial) -> Level {
    if !(patch_area_m2 > 0.0) {
        return Level::NoResponse;
    }
    Level::from_db(bottom_coeff(material.rms_roughness, grazing_rad, f_khz) + 10.0 * patch_area_m2.log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bottom_coeff_frozen_values() {
        // High-precision scratch evaluation of the SEARAY expression.
        assert!((bottom_coeff(2.0, 0.5, 450.0) - (-17.157_034_002_120_46)).abs() < 1e-9);
        assert!((bottom_coeff(4.0, FRAC_PI_2, 450.0) - (-3.184_378_229_730_009)).abs() < 1e-9);
    }

    #[test]
    fn bottom_gamma_at_normal_incidence() {
        // cot(pi/2) = 0 leaves gamma = 1 + 125 e^(-2.64 (bt - 1.75)^2).
        let gamma = 1.0 + 125.0 * (-2.64f64 * 0.25 * 0.25).exp();
        assert!((gamma - 106.986_713_010_989_48).abs() < 1e-9);
        let expected =
            10.0 * (3.03 * gamma * 450f64.powf(3.2 - 1.6) * 10f64.powf(5.6 - 12.0) + 10f64.powf(-4.42)).log10();
        assert!((bottom_coeff(2.0, FRAC_PI_2, 450.0) - expected).abs() < 1e-9);
    }

    #[test]
    fn bottom_coeff_floor_and_tiny_grazing() {
        assert!((bottom_coeff(2.0, 0.7, 1e-30) - (-44.2)).abs() < 1e-9);
        for g in [0.0, 1e-300, 1e-12, 1e-3] {
            let s = bottom_coeff(2.0, g, 450.0);
            assert!(s.is_finite() && s >= -44.2 - 1e-12, "{g} -> {s}");
        }
    }

    #[test]
    fn surface_coeff_frozen_values() {
        assert!((surface_coeff(10.0, 0.3, 450.0) - (-31.525_159_050_988_17)).abs() < 1e-9);
        let b = surface_beta(0.0, 0.4, 0.9);
        assert!((b - (8.0 - 1.5 * 0.4f64.cos().powf(0.125))).abs() < 1e-12);
    }

    #[test]
    fn surface_coeff_monotone_in_wind_on_verified_grid() {
        // Grid checked against the scratch oracle for winds 0..30 kn. Near normal
        // incidence the tan exponent falls with wind and calm water wins.
        for g in [0.1, 0.3, 0.6, 1.0] {
            let mut prev = f64::NEG_INFINITY;
            for v in [0.0, 5.0, 10.0, 15.0, 20.0, 30.0] {
                let s = surface_coeff(v, g, 450.0);
                assert!(s > prev, "wind {v} grazing {g}");
                prev = s;
            }
        }
        assert!(surface_coeff(20.0, 0.3, 450.0) > surface_coeff(5.0, 0.3, 450.0));
        assert!(surface_coeff(0.0, 1.3, 450.0) > surface_coeff(5.0, 1.3, 450.0));
    }

    #[test]
    fn surface_coeff_is_capped_near_normal() {
        let capped = surface_coeff(10.0, SURFACE_GRAZING_CAP, 450.0);
        assert_eq!(surface_coeff(10.0, FRAC_PI_2, 450.0), capped);
        assert_eq!(surface_coeff(10.0, 2.0, 450.0), capped);
        assert!(capped.is_finite());
    }

    #[test]
    fn volume_coeff_values() {
        assert_eq!(volume_coeff(-90.0, 1.0), -90.0);
        assert_eq!(volume_coeff(-90.0, 100.0), -76.0);
        assert_eq!(volume_coeff(-50.0, 10.0), -43.0);
    }

    #[test]
    fn reverb_and_echo_assembly() {
        let z = Level::ZERO_DB;
        assert_eq!(reverb_level(0.0, 0.0, z, z, -44.2, 1.0), Level::Db(-44.2));
        let l = reverb_level(0.0, 0.0, z, z, -44.2, 100.0).db().unwrap();
        assert!((l - (-24.2)).abs() < 1e-12);
        assert_eq!(reverb_level(0.0, 0.0, z, z, -44.2, 0.0), Level::NoResponse);
        assert_eq!(
            reverb_level(0.0, 0.0, Level::NoResponse, z, -44.2, 1.0),
            Level::NoResponse
        );
        assert_eq!(target_echo_level(0.0, 0.0, z, z, Level::Db(-10.0)), Level::Db(-10.0));
        assert_eq!(target_echo_level(0.0, 40.0, z, z, Level::Db(-10.0)), Level::Db(-50.0));
    }

    #[test]
    fn target_strength_reuses_bottom_coefficient() {
        let m = ObjectMaterial { rms_roughness: 4.0 };
        let ts1 = target_strength(1.0, FRAC_PI_2, 450.0, m).db().unwrap();
        assert_eq!(ts1, bottom_coeff(4.0, FRAC_PI_2, 450.0));
        let ts2 = target_strength(2.0, FRAC_PI_2, 450.0, m).db().unwrap();
        assert!((ts2 - ts1 - 10.0 * 2f64.log10()).abs() < 1e-12);
        assert_eq!(target_strength(0.0, FRAC_PI_2, 450.0, m), Level::NoResponse);
    }
}
