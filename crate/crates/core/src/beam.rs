//! A beam pattern attached to an orientation, evaluated on world directions.

use crate::acoustics::{BeamOrientation, BeamPattern};
use crate::geometry::{beam_angles_surface, beam_angles_volume};
use crate::level::Level;
use crate::vec3::{Mat3, Vec3};

/// Which `psi` formula to use when turning a sonar-frame vector into beam angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AngleConvention {
    /// `psi = atan(v_z / sqrt(v_x^2 + v_y^2))`, used for bottom and surface returns.
    Surface,
    /// `psi = atan(v_z / v_x)`, used for the volume shell.
    Volume,
}

#[derive(Clone, Copy, Debug)]
pub struct SteeredBeam {
    to_sonar: Mat3,
    pattern: BeamPattern,
}

impl SteeredBeam {
    pub fn new(orientation: BeamOrientation, pattern: BeamPattern) -> Self {
        SteeredBeam {
            to_sonar: orientation.world_to_sonar(),
            pattern,
        }
    }

    pub fn pattern(&self) -> &BeamPattern {
        &self.pattern
    }

    /// First row of the world-to-sonar rotation: `v_x = facing . w`.
    pub fn facing(&self) -> Vec3 {
        self.to_sonar.row(0)
    }

    pub fn angles(&self, world_dir: Vec3, convention: AngleConvention) -> (f64, f64) {
        let v = self.to_sonar.apply(world_dir);
        match convention {
            AngleConvention::Surface => beam_angles_surface(v),
            AngleConvention::Volume => beam_angles_volume(v),
        }
    }

    /// Linear intensity gain toward `world_dir` (need not be normalised).
    pub fn gain(&self, world_dir: Vec3, convention: AngleConvention) -> f64 {
        let (theta, psi) = self.angles(world_dir, convention);
        self.pattern.gain(theta, psi)
    }

    pub fn loss(&self, world_dir: Vec3, convention: AngleConvention) -> Level {
        let (theta, psi) = self.angles(world_dir, convention);
        self.pattern.loss(theta, psi)
    }
}
