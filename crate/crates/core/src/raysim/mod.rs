//! Monte-Carlo ray-traced ping simulation.

pub mod heightfield;
pub mod noise;
pub mod ping;
pub mod scene;

pub use heightfield::Heightfield;
pub use noise::{add_noise, add_noise_to_ping};
pub use ping::{
    mean_over_pings, ray_bin_volume, ray_patch_area, resolved_grazing, sample_ray_directions, specular, BeamReturn,
    Component, MultipathMode, PingReturn, RayOutcome, RaySampling, Scored, SimOptions, Simulator,
};
pub use scene::{trace_ray, AxisBox, Bottom, Hit, HitKind, Ray, Scene, SceneObject, Shape, TriangleMesh};
