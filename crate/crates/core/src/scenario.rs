//! Scenario files: a TOML description of the environment, sonar head, pose,
//! scene geometry and run controls.
//!
//! Unknown keys are rejected. Angles are written in degrees and kept in
//! degrees here so that a load/save/load cycle is exact; the radian-based
//! physics types are produced on demand.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::acoustics::{BeamOrientation, EnvironmentParams, SonarConfig};
use crate::detect::GaussianDb;
use crate::error::{check_positive, check_range, Error, Result};
use crate::geometry::SonarPose;
use crate::nullmodel::NullModelOptions;
use crate::raysim::{
    AxisBox, Bottom, Heightfield, MultipathMode, RaySampling, Scene, SceneObject, Shape, SimOptions, TriangleMesh,
};
use crate::scatter::ObjectMaterial;
use crate::vec3::Vec3;

/// A steering direction in degrees. Positive pitch is down, positive yaw is starboard.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Steering {
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

impl Steering {
    pub fn orientation(&self) -> BeamOrientation {
        BeamOrientation::from_degrees(self.pitch_deg, self.yaw_deg)
    }

    pub fn validate(&self) -> Result<()> {
        check_range("pitch_deg", self.pitch_deg, -90.0, 90.0)?;
        check_range("yaw_deg", self.yaw_deg, -180.0, 180.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SonarSection {
    pub frequency_khz: f64,
    pub bandwidth_hz: f64,
    pub source_level_db: f64,
    pub ping_rate_hz: f64,
    pub horizontal_len_m: f64,
    pub vertical_len_m: f64,
    pub bin_length_m: f64,
    pub num_rays: usize,
    pub beams: Vec<Steering>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSection {
    pub altitude_m: f64,
    pub depth_m: f64,
    #[serde(default)]
    pub pitch_deg: f64,
}

/// Bottom geometry. Flat and step bottoms sit at the pose altitude under the sonar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BottomSpec {
    None,
    Flat,
    /// The bottom rises by `rise_m` across a ramp starting at `x_m` ahead of the sonar.
    Step {
        x_m: f64,
        rise_m: f64,
        #[serde(default = "default_ramp")]
        ramp_m: f64,
        #[serde(default = "default_half_width")]
        half_width_m: f64,
    },
    /// Depths below the surface on a rectilinear grid, `depths[j][i]` at `(xs[i], ys[j])`.
    Grid {
        xs: Vec<f64>,
        ys: Vec<f64>,
        depths: Vec<Vec<f64>>,
    },
}

fn default_ramp() -> f64 {
    0.1
}

fn default_half_width() -> f64 {
    60.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectSpec {
    Box {
        min: [f64; 3],
        max: [f64; 3],
        #[serde(default)]
        material: ObjectMaterial,
    },
    Mesh {
        vertices: Vec<[f64; 3]>,
        triangles: Vec<[usize; 3]>,
        #[serde(default)]
        material: ObjectMaterial,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SceneSpec {
    pub surface: bool,
    pub bottom: BottomSpec,
    pub objects: Vec<ObjectSpec>,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            surface: true,
            bottom: BottomSpec::Flat,
            objects: Vec::new(),
        }
    }
}

/// Range window and tolerance used when comparing simulated and expected returns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompareSection {
    pub min_range_m: f64,
    pub max_range_m: f64,
    pub tolerance_db: f64,
    /// Bins expected below this level are not compared.
    pub floor_db: f64,
}

impl Default for CompareSection {
    fn default() -> Self {
        CompareSection {
            min_range_m: 0.0,
            max_range_m: 20.0,
            tolerance_db: 3.0,
            floor_db: -120.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunControls {
    pub num_pings: usize,
    pub noise_enabled: bool,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl Default for RunControls {
    fn default() -> Self {
        RunControls {
            num_pings: 1,
            noise_enabled: false,
            seed: 1,
            output_dir: None,
        }
    }
}

/// Ray-tracer switches other than noise, which is a run control.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSection {
    pub multipath: MultipathMode,
    pub volume: bool,
    pub sampling: RaySampling,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let d = SimOptions::default();
        SimulationSection {
            multipath: d.multipath,
            volume: d.volume,
            sampling: d.sampling,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSection {
    pub sigma_db: f64,
    pub alt_offset_db: f64,
    pub gamma: f64,
}

impl Default for DetectionSection {
    fn default() -> Self {
        let g = GaussianDb::default();
        DetectionSection {
            sigma_db: g.sigma_db,
            alt_offset_db: g.alt_offset_db,
            gamma: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub env: EnvironmentParams,
    pub sonar: SonarSection,
    pub pose: PoseSection,
    #[serde(default)]
    pub transmitter: Steering,
    #[serde(default)]
    pub run: RunControls,
    #[serde(default)]
    pub scene: SceneSpec,
    #[serde(default)]
    pub null_model: NullModelOptions,
    #[serde(default)]
    pub simulation: SimulationSection,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub compare: CompareSection,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Scenario::from_toml(&text).map_err(|e| match e {
        Error::Parse { message, .. } => Error::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<string>"),
            message: e.to_string(),
        })?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse {
            path: PathBuf::from("<string>"),
            message: e.to_string(),
        })
    }

    pub fn sonar_config(&self) -> SonarConfig {
        let s = &self.sonar;
        SonarConfig {
            frequency_khz: s.frequency_khz,
            bandwidth_hz: s.bandwidth_hz,
            source_level_db: s.source_level_db,
            ping_rate_hz: s.ping_rate_hz,
            horizontal_len_m: s.horizontal_len_m,
            vertical_len_m: s.vertical_len_m,
            bin_length_m: s.bin_length_m,
            beams: s.beams.iter().map(Steering::orientation).collect(),
            num_rays: s.num_rays,
            rng_seed: self.run.seed,
        }
    }

    pub fn pose(&self) -> SonarPose {
        SonarPose {
            altitude_m: self.pose.altitude_m,
            depth_m: self.pose.depth_m,
            pitch_rad: self.pose.pitch_deg.to_radians(),
        }
    }

    pub fn transmitter(&self) -> BeamOrientation {
        self.transmitter.orientation()
    }

    pub fn beams(&self) -> Vec<BeamOrientation> {
        self.sonar.beams.iter().map(Steering::orientation).collect()
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            multipath: self.simulation.multipath,
            volume: self.simulation.volume,
            noise: self.run.noise_enabled,
            sampling: self.simulation.sampling,
        }
    }

    pub fn detection_model(&self) -> GaussianDb {
        GaussianDb {
            sigma_db: self.detection.sigma_db,
            alt_offset_db: self.detection.alt_offset_db,
        }
    }

    /// Water depth of the bottom directly below the sonar.
    pub fn bottom_depth(&self) -> f64 {
        self.pose.depth_m + self.pose.altitude_m
    }

    pub fn scene(&self) -> Result<Scene> {
        let near = self.bottom_depth();
        let bottom = match &self.scene.bottom {
            BottomSpec::None => None,
            BottomSpec::Flat => Some(Bottom::Flat { depth_m: near }),
            BottomSpec::Step {
                x_m,
                rise_m,
                ramp_m,
                half_width_m,
            } => Some(Bottom::Heightfield(
                Heightfield::step(*x_m, *ramp_m, near, near - rise_m, *half_width_m)
                    .map_err(|e| e.within("scene.bottom"))?,
            )),
            BottomSpec::Grid { xs, ys, depths } => Some(Bottom::Heightfield(
                Heightfield::new(xs.clone(), ys.clone(), depths.clone()).map_err(|e| e.within("scene.bottom"))?,
            )),
        };
        let objects = self
            .scene
            .objects
            .iter()
            .enumerate()
            .map(|(i, o)| object(o).map_err(|e| e.within(&format!("scene.objects[{i}]"))))
            .collect::<Result<Vec<_>>>()?;
        let scene = Scene {
            surface: self.scene.surface,
            bottom,
            objects,
        };
        scene.validate(&self.pose())?;
        Ok(scene)
    }

    /// Checks every section, naming the offending field on failure.
    pub fn validate(&self) -> Result<()> {
        self.env.validate().map_err(|e| e.within("env"))?;
        for (i, b) in self.sonar.beams.iter().enumerate() {
            b.validate().map_err(|e| e.within(&format!("sonar.beams[{i}]")))?;
        }
        self.sonar_config().validate().map_err(|e| e.within("sonar"))?;
        if self.sonar.num_rays > 100_000_000 {
            return Err(Error::validation("sonar.num_rays", "at most 1e8 rays per beam"));
        }
        check_positive("pose.altitude_m", self.pose.altitude_m)?;
        check_positive("pose.depth_m", self.pose.depth_m)?;
        check_range("pose.pitch_deg", self.pose.pitch_deg, -90.0, 90.0)?;
        self.transmitter.validate().map_err(|e| e.within("transmitter"))?;
        if self.run.num_pings == 0 {
            return Err(Error::validation("run.num_pings", "at least one ping is required"));
        }
        self.scene()?;
        if let Some(r) = self.null_model.resolution_m {
            check_positive("null_model.resolution_m", r)?;
        }
        check_positive("null_model.quadrature_tol_db", self.null_model.quadrature_tol_db)?;
        self.sim_options().validate().map_err(|e| e.within("simulation"))?;
        self.detection_model().validate().map_err(|e| e.within("detection"))?;
        check_range("detection.gamma", self.detection.gamma, 0.0, f64::MAX)?;
        let c = &self.compare;
        check_range("compare.min_range_m", c.min_range_m, 0.0, f64::MAX)?;
        check_range("compare.max_range_m", c.max_range_m, c.min_range_m, f64::MAX)?;
        check_range("compare.tolerance_db", c.tolerance_db, 0.0, f64::MAX)?;
        check_range("compare.floor_db", c.floor_db, -f64::MAX, f64::MAX)?;
        Ok(())
    }
}

fn point(p: [f64; 3]) -> Vec3 {
    Vec3::new(p[0], p[1], p[2])
}

fn object(spec: &ObjectSpec) -> Result<SceneObject> {
    Ok(match spec {
        ObjectSpec::Box { min, max, material } => SceneObject {
            shape: Shape::Box(AxisBox {
                min: point(*min),
                max: point(*max),
            }),
            material: *material,
        },
        ObjectSpec::Mesh {
            vertices,
            triangles,
            material,
        } => {
            let triangles = triangles
                .iter()
                .map(|t| {
                    let v = |k: usize| {
                        vertices.get(t[k]).map(|&p| point(p)).ok_or_else(|| {
                            Error::validation("triangles", format!("vertex index {} out of range", t[k]))
                        })
                    };
                    Ok([v(0)?, v(1)?, v(2)?])
                })
                .collect::<Result<Vec<_>>>()?;
            SceneObject {
                shape: Shape::Mesh(TriangleMesh { triangles }),
                material: *material,
            }
        }
    })
}
