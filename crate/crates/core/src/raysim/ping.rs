//! One ping: trace every ray, score its impact (and its single specular
//! bounce), add volume reverberation along the path, and sum per bin.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{
    absorption_coeff, max_range, noise_level_band, sound_speed, BeamOrientation, BeamPattern, EnvironmentParams,
    Propagation, SonarConfig,
};
use crate::beam::{AngleConvention, SteeredBeam};
use crate::error::{Error, Result};
pub use crate::geometry::resolved_grazing;
use crate::geometry::{full_shell_volume, BinLayout, SonarPose};
use crate::level::Level;
use crate::nullmodel::resolution_cells;
use crate::raysim::noise::add_noise;
use crate::raysim::scene::{Hit, HitKind, Ray, Scene};
use crate::scatter::{bottom_coeff, surface_coeff, target_strength, volume_coeff};
use crate::vec3::Vec3;

/// Lower bound on `sin(grazing)` when spreading a ray over a patch.
pub const MIN_PATCH_SIN: f64 = 0.017_452_406_437_283_51; // sin 1 deg

/// Where ray directions are drawn from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RaySampling {
    /// Uniform over the whole sphere.
    #[default]
    Sphere,
    /// Uniform over a cone about the receive beam axis. Contributions from
    /// outside the cone are dropped, so it only pays off for narrow beams.
    Cone { half_angle_deg: f64 },
}

impl RaySampling {
    pub fn solid_angle(&self) -> f64 {
        match *self {
            RaySampling::Sphere => 4.0 * PI,
            RaySampling::Cone { half_angle_deg } => 2.0 * PI * (1.0 - half_angle_deg.to_radians().cos()),
        }
    }
}

/// Which first impacts spawn a specular bounce.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultipathMode {
    Off,
    /// Only rays whose first impact is a placed object.
    #[default]
    Objects,
    /// Every impact, including the bottom and the surface.
    All,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimOptions {
    pub multipath: MultipathMode,
    pub volume: bool,
    pub noise: bool,
    pub sampling: RaySampling,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            multipath: MultipathMode::Objects,
            volume: true,
            noise: true,
            sampling: RaySampling::Sphere,
        }
    }
}

impl SimOptions {
    pub fn validate(&self) -> Result<()> {
        if let RaySampling::Cone { half_angle_deg } = self.sampling {
            if !(half_angle_deg > 0.0 && half_angle_deg <= 180.0) {
                return Err(Error::validation(
                    "sampling.half_angle_deg",
                    format!("must be in (0, 180], got {half_angle_deg}"),
                ));
            }
        }
        Ok(())
    }
}

/// Which mechanism put energy in a bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Bottom,
    Surface,
    Object,
    Volume,
    Multipath,
    Noise,
}

/// Per-bin linear intensities received on one beam, split by mechanism.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamReturn {
    pub beam_id: usize,
    pub orientation: BeamOrientation,
    pub total: Vec<f64>,
    pub bottom: Vec<f64>,
    pub surface: Vec<f64>,
    pub object: Vec<f64>,
    pub volume: Vec<f64>,
    pub multipath: Vec<f64>,
    pub noise: Vec<f64>,
}

impl BeamReturn {
    pub fn zeros(beam_id: usize, orientation: BeamOrientation, bins: usize) -> Self {
        let z = vec![0.0; bins];
        BeamReturn {
            beam_id,
            orientation,
            total: z.clone(),
            bottom: z.clone(),
            surface: z.clone(),
            object: z.clone(),
            volume: z.clone(),
            multipath: z.clone(),
            noise: z,
        }
    }

    pub fn component(&self, c: Component) -> &[f64] {
        match c {
            Component::Bottom => &self.bottom,
            Component::Surface => &self.surface,
            Component::Object => &self.object,
            Component::Volume => &self.volume,
            Component::Multipath => &self.multipath,
            Component::Noise => &self.noise,
        }
    }

    fn component_mut(&mut self, c: Component) -> &mut Vec<f64> {
        match c {
            Component::Bottom => &mut self.bottom,
            Component::Surface => &mut self.surface,
            Component::Object => &mut self.object,
            Component::Volume => &mut self.volume,
            Component::Multipath => &mut self.multipath,
            Component::Noise => &mut self.noise,
        }
    }

    /// Adds `power` to bin `bin` (1-based) of a component and the total.
    pub fn add(&mut self, c: Component, bin: usize, power: f64) {
        self.component_mut(c)[bin - 1] += power;
        self.total[bin - 1] += power;
    }

    pub fn db(&self) -> Vec<Level> {
        self.total.iter().map(|&p| Level::from_linear(p)).collect()
    }

    pub fn component_db(&self, c: Component) -> Vec<Level> {
        self.component(c).iter().map(|&p| Level::from_linear(p)).collect()
    }

    pub fn num_bins(&self) -> usize {
        self.total.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PingReturn {
    pub layout: BinLayout,
    pub beams: Vec<BeamReturn>,
    pub rng_seed: u64,
    pub ping_index: u64,
    pub ray_count: usize,
}

/// Linear mean over pings, beam by beam and component by component.
pub fn mean_over_pings(pings: &[PingReturn]) -> Result<Vec<BeamReturn>> {
    let first = pings
        .first()
        .ok_or_else(|| Error::validation("pings", "need at least one ping"))?;
    let mut mean = first.beams.clone();
    for p in &pings[1..] {
        for (m, b) in mean.iter_mut().zip(&p.beams) {
            for c in ALL_COMPONENTS {
                for (x, y) in m.component_mut(c).iter_mut().zip(b.component(c)) {
                    *x += y;
                }
            }
            for (x, y) in m.total.iter_mut().zip(&b.total) {
                *x += y;
            }
        }
    }
    let k = pings.len() as f64;
    for m in &mut mean {
        for c in ALL_COMPONENTS {
            m.component_mut(c).iter_mut().for_each(|x| *x /= k);
        }
        m.total.iter_mut().for_each(|x| *x /= k);
    }
    Ok(mean)
}

const ALL_COMPONENTS: [Component; 6] = [
    Component::Bottom,
    Component::Surface,
    Component::Object,
    Component::Volume,
    Component::Multipath,
    Component::Noise,
];

/// `n` directions from normalised triples of independent standard normals.
pub fn sample_ray_directions(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| gaussian_direction(&mut rng)).collect()
}

fn gaussian_direction<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n >= 1e-12 {
            return v * (1.0 / n);
        }
    }
}

fn cone_direction<R: Rng>(rng: &mut R, axis: Vec3, cos_half: f64) -> Vec3 {
    let cos_t = 1.0 - rng.random::<f64>() * (1.0 - cos_half);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * PI * rng.random::<f64>();
    let helper = if axis.x.abs() < 0.9 {
        Vec3::new(1.0, 0.0, 0.0)
    } else {
        Vec3::new(0.0, 1.0, 0.0)
    };
    let u = axis.cross(helper).normalized();
    let v = axis.cross(u);
    (axis * cos_t + u * (sin_t * phi.cos()) + v * (sin_t * phi.sin())).normalized()
}

/// `(4 pi / n_rays) d^2 / sin(grazing)` with `sin(grazing)` floored at `sin 1 deg`.
pub fn ray_patch_area(hit: &Hit, n_rays: usize) -> f64 {
    patch_area(hit.distance_m, hit.grazing_rad, 4.0 * PI / n_rays as f64)
}

fn patch_area(distance: f64, grazing: f64, solid_angle_share: f64) -> f64 {
    solid_angle_share * distance * distance / grazing.sin().max(MIN_PATCH_SIN)
}

/// One ray's share of the full shell of bin `n`.
pub fn ray_bin_volume(n: usize, layout: &BinLayout, n_rays: usize) -> f64 {
    full_shell_volume(layout.edge(n - 1), layout.edge(n)) / n_rays as f64
}

/// Reflects `d` about the unit normal `n`.
pub fn specular(d: Vec3, n: Vec3) -> Vec3 {
    d - n * (2.0 * d.dot(n))
}

/// Derives the random stream for one beam of one ping.
fn ray_stream(seed: u64, ping: u64, beam: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((ping << 12) | beam as u64);
    rng
}

fn noise_stream(seed: u64, ping: u64, beam: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1 << 63) | (ping << 12) | beam as u64);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scored {
    pub bin: usize,
    pub power: f64,
    pub component: Component,
}

/// What one ray contributes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayOutcome {
    pub impact: Option<Scored>,
    pub multipath: Option<Scored>,
    /// Volume is added to bins `1..=volume_bins`.
    pub volume_bins: usize,
    /// Two-way linear beam gain weighting this ray's volume share.
    pub volume_gain: f64,
}

/// Monte-Carlo ping simulator for one scene and sonar.
#[derive(Clone, Debug)]
pub struct Simulator {
    env: EnvironmentParams,
    sonar: SonarConfig,
    pose: SonarPose,
    transmitter: BeamOrientation,
    scene: Scene,
    options: SimOptions,
    propagation: Propagation,
    pattern: BeamPattern,
    layout: BinLayout,
    d_max: f64,
    resolution: f64,
    noise_db: f64,
    /// Per bin: sum over resolution cells of `V_cell * 10^(-TL/10)`.
    volume_weight: Vec<f64>,
}

impl Simulator {
    pub fn new(
        env: &EnvironmentParams,
        sonar: &SonarConfig,
        pose: SonarPose,
        transmitter: BeamOrientation,
        scene: Scene,
        options: SimOptions,
    ) -> Result<Self> {
        env.validate().map_err(|e| e.within("env"))?;
        sonar.validate().map_err(|e| e.within("sonar"))?;
        pose.validate().map_err(|e| e.within("pose"))?;
        transmitter.validate().map_err(|e| e.within("transmitter"))?;
        options.validate().map_err(|e| e.within("sim"))?;
        scene.validate(&pose)?;
        if sonar.beams.len() > 4096 {
            return Err(Error::validation("sonar.beams", "at most 4096 beams"));
        }
        let c = sound_speed(env)?;
        let d_max = max_range(c, sonar.ping_rate_hz);
        let layout = BinLayout::new(sonar.bin_length_m, d_max)?;
        let propagation = Propagation {
            alpha_w_db_per_km: absorption_coeff(sonar.frequency_khz, env)?,
        };
        let resolution = crate::acoustics::range_resolution(c, sonar.bandwidth_hz);
        let volume_weight = layout
            .bins()
            .map(|n| {
                resolution_cells(layout.edge(n - 1), layout.edge(n), resolution)
                    .map(|(a, b)| {
                        full_shell_volume(a, b) * 10f64.powf(-propagation.two_way_loss_db(0.5 * (a + b)) / 10.0)
                    })
                    .sum()
            })
            .collect();
        let noise_db = noise_level_band(sonar.frequency_khz, env, sonar.bandwidth_hz)?;
        Ok(Simulator {
            env: env.clone(),
            sonar: sonar.clone(),
            pose,
            transmitter,
            scene,
            options,
            propagation,
            pattern: sonar.beam_pattern(c),
            layout,
            d_max,
            resolution,
            noise_db,
            volume_weight,
        })
    }

    pub fn layout(&self) -> &BinLayout {
        &self.layout
    }

    pub fn max_range(&self) -> f64 {
        self.d_max
    }

    pub fn noise_level_db(&self) -> f64 {
        self.noise_db
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    pub fn options(&self) -> &SimOptions {
        &self.options
    }

    fn origin(&self) -> Vec3 {
        Vec3::new(0.0, 0.0, self.pose.depth_m)
    }

    fn steered(&self, o: BeamOrientation) -> SteeredBeam {
        SteeredBeam::new(o.pitched_by(self.pose.pitch_rad), self.pattern)
    }

    /// Directions for one beam of one ping.
    fn directions(&self, receive: &SteeredBeam, seed: u64, ping: u64, beam: usize) -> Vec<Vec3> {
        let mut rng = ray_stream(seed, ping, beam);
        let n = self.sonar.num_rays;
        match self.options.sampling {
            RaySampling::Sphere => (0..n).map(|_| gaussian_direction(&mut rng)).collect(),
            RaySampling::Cone { half_angle_deg } => {
                let axis = receive.facing();
                let cos_half = half_angle_deg.to_radians().cos();
                (0..n).map(|_| cone_direction(&mut rng, axis, cos_half)).collect()
            }
        }
    }

    /// `10^(S/10) * A` for a boundary hit, or the linear target strength for an object.
    fn scatter_power(&self, hit: &Hit, path: f64, share: f64) -> f64 {
        let area = patch_area(path, hit.grazing_rad, share);
        let f = self.sonar.frequency_khz;
        let grazing = resolved_grazing(hit.distance_m, hit.grazing_rad, self.resolution);
        let s = match hit.kind {
            HitKind::Bottom => bottom_coeff(self.env.bottom_type, grazing, f),
            HitKind::Surface => surface_coeff(self.env.wind_knots, grazing, f),
            HitKind::Object(_) => {
                let material = hit.material.unwrap_or_default();
                return target_strength(area, grazing, f, material).to_linear();
            }
        };
        10f64.powf(s / 10.0) * area
    }

    fn score(&self, hit: &Hit, path: f64, gain: f64, share: f64, component: Component) -> Option<Scored> {
        let bin = self.layout.bin_of(path)?;
        let power = self.source_linear()
            * 10f64.powf(-self.propagation.two_way_loss_db(path) / 10.0)
            * gain
            * self.scatter_power(hit, path, share);
        Some(Scored { bin, power, component })
    }

    fn source_linear(&self) -> f64 {
        10f64.powf(self.sonar.source_level_db / 10.0)
    }

    /// The contribution of a single ray launched along `dir`, as scored within a ping of `num_rays`.
    pub fn ray_outcome(&self, dir: Vec3, receive: BeamOrientation) -> RayOutcome {
        let share = self.options.sampling.solid_angle() / self.sonar.num_rays as f64;
        self.trace_one(
            dir.normalized(),
            &self.steered(self.transmitter),
            &self.steered(receive),
            share,
        )
    }

    fn trace_one(&self, dir: Vec3, tx: &SteeredBeam, rx: &SteeredBeam, share: f64) -> RayOutcome {
        let volume_gain = if self.options.volume {
            tx.gain(dir, AngleConvention::Volume) * rx.gain(dir, AngleConvention::Volume)
        } else {
            0.0
        };
        let ray = Ray::new(self.origin(), dir, self.d_max);
        let Some(hit) = self.scene.trace(&ray) else {
            return RayOutcome {
                impact: None,
                multipath: None,
                volume_bins: self.layout.num_bins,
                volume_gain,
            };
        };
        let gain = tx.gain(dir, AngleConvention::Surface) * rx.gain(dir, AngleConvention::Surface);
        let component = match hit.kind {
            HitKind::Bottom => Component::Bottom,
            HitKind::Surface => Component::Surface,
            HitKind::Object(_) => Component::Object,
        };
        let impact = if gain > 0.0 {
            self.score(&hit, hit.distance_m, gain, share, component)
        } else {
            None
        };
        let bounces = match self.options.multipath {
            MultipathMode::Off => false,
            MultipathMode::Objects => component == Component::Object,
            MultipathMode::All => true,
        };
        let tx_gain = tx.gain(dir, AngleConvention::Surface);
        let multipath = if bounces && tx_gain > 0.0 {
            self.bounce(&hit, dir, tx_gain, rx, share)
        } else {
            None
        };
        RayOutcome {
            impact,
            multipath,
            volume_bins: self.layout.bin_of(hit.distance_m).unwrap_or(self.layout.num_bins),
            volume_gain,
        }
    }

    /// First-order multipath: reflect specularly, trace the remaining range and
    /// score the second impact at the total path length. The echo comes back
    /// along the final leg, so the receive pattern is taken toward the second impact.
    fn bounce(&self, hit: &Hit, incident: Vec3, tx_gain: f64, rx: &SteeredBeam, share: f64) -> Option<Scored> {
        let remaining = self.d_max - hit.distance_m;
        if remaining <= 0.0 {
            return None;
        }
        let reflected = specular(incident, hit.normal);
        let leg = Ray::new(hit.point + hit.normal * 1e-7, reflected, remaining);
        let second = self.scene.trace(&leg)?;
        let back = second.point - self.origin();
        let gain = tx_gain * rx.gain(back.normalized(), AngleConvention::Surface);
        if gain <= 0.0 {
            return None;
        }
        self.score(
            &second,
            hit.distance_m + second.distance_m,
            gain,
            share,
            Component::Multipath,
        )
    }

    /// Simulates one ping on one receive beam.
    pub fn ping_beam(&self, beam_id: usize, receive: BeamOrientation, seed: u64, ping: u64) -> BeamReturn {
        let tx = self.steered(self.transmitter);
        let rx = self.steered(receive);
        let n = self.sonar.num_rays;
        let omega = self.options.sampling.solid_angle();
        let share = omega / n as f64;
        let dirs = self.directions(&rx, seed, ping, beam_id);
        let outcomes: Vec<RayOutcome> = dirs.par_iter().map(|&d| self.trace_one(d, &tx, &rx, share)).collect();

        let bins = self.layout.num_bins;
        let mut out = BeamReturn::zeros(beam_id, receive, bins);
        let mut covered = vec![0.0; bins + 1];
        for o in &outcomes {
            for s in [&o.impact, &o.multipath].into_iter().flatten() {
                out.add(s.component, s.bin, s.power);
            }
            if o.volume_gain > 0.0 {
                covered[0] += o.volume_gain;
                covered[o.volume_bins] -= o.volume_gain;
            }
        }
        if self.options.volume {
            let scale = self.source_linear()
                * 10f64.powf(volume_coeff(self.env.particle_density_db, self.sonar.frequency_khz) / 10.0)
                * omega
                / (4.0 * PI * n as f64);
            let mut running = 0.0;
            for k in 0..bins {
                running += covered[k];
                let p = scale * self.volume_weight[k] * running.max(0.0);
                if p > 0.0 {
                    out.add(Component::Volume, k + 1, p);
                }
            }
        }
        if self.options.noise {
            add_noise(&mut out, self.noise_db, &mut noise_stream(seed, ping, beam_id));
        }
        out
    }

    /// Simulates one ping on every configured receive beam.
    pub fn ping(&self, seed: u64, ping: u64) -> PingReturn {
        let beams = self
            .sonar
            .beams
            .par_iter()
            .enumerate()
            .map(|(i, &b)| self.ping_beam(i, b, seed, ping))
            .collect();
        PingReturn {
            layout: self.layout,
            beams,
            rng_seed: seed,
            ping_index: ping,
            ray_count: self.sonar.num_rays,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raysim::scene::{AxisBox, Shape};
    use crate::scatter::ObjectMaterial;

    fn setup(num_rays: usize) -> (EnvironmentParams, SonarConfig, SonarPose) {
        let env = EnvironmentParams::default();
        let sonar = SonarConfig {
            num_rays,
            beams: vec![BeamOrientation::FORWARD],
            ..SonarConfig::default()
        };
        let pose = SonarPose {
            altitude_m: 5.0,
            depth_m: 7.0,
            pitch_rad: 0.0,
        };
        (env, sonar, pose)
    }

    fn quiet() -> SimOptions {
        SimOptions {
            noise: false,
            ..SimOptions::default()
        }
    }

    #[test]
    fn directions_are_deterministic_and_unit() {
        let a = sample_ray_directions(1000, 7);
        assert_eq!(a, sample_ray_directions(1000, 7));
        assert_ne!(a, sample_ray_directions(1000, 8));
        assert!(a.iter().all(|d| (d.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn patch_area_and_volume_shares() {
        let hit = Hit {
            kind: HitKind::Bottom,
            distance_m: 1.0,
            point: Vec3::default(),
            normal: Vec3::new(0.0, 0.0, -1.0),
            grazing_rad: PI / 2.0,
            material: None,
        };
        let n = (4.0 * PI * 1e6).round() as usize;
        assert!((ray_patch_area(&hit, n) - 1e-6).abs() < 1e-12);
        let half = Hit {
            grazing_rad: PI / 6.0,
            ..hit
        };
        assert!((ray_patch_area(&half, 1000) / ray_patch_area(&hit, 1000) - 2.0).abs() < 1e-12);
        assert!((ray_patch_area(&hit, 1000) / ray_patch_area(&hit, 2000) - 2.0).abs() < 1e-12);
        let layout = BinLayout::with_bins(1.0, 10).unwrap();
        assert!((ray_bin_volume(1, &layout, 20_000) - 4.0 * PI / 3.0 / 20_000.0).abs() < 1e-15);
        assert!((ray_bin_volume(3, &layout, 1) - full_shell_volume(2.0, 3.0)).abs() < 1e-12);
    }

    #[test]
    fn single_vertical_ray_bookkeeping() {
        let (env, mut sonar, pose) = setup(1);
        sonar.bin_length_m = 1.0;
        let down = BeamOrientation::new(PI / 2.0, 0.0);
        let opts = SimOptions {
            multipath: MultipathMode::All,
            ..quiet()
        };
        let sim = Simulator::new(&env, &sonar, pose, down, Scene::flat(&pose), opts).unwrap();
        let o = sim.ray_outcome(Vec3::new(0.0, 0.0, 1.0), down);
        let impact = o.impact.unwrap();
        // distance 5 lands in (4, 5]
        assert_eq!((impact.bin, impact.component), (5, Component::Bottom));
        assert_eq!(o.volume_bins, 5);
        // the bounce returns from the surface overhead, behind the receive beam
        assert!(o.multipath.is_none());
        // a receive beam facing up hears it at 5 + 12 = 17, and not the direct echo
        let up = BeamOrientation::new(-PI / 2.0, 0.0);
        let o = sim.ray_outcome(Vec3::new(0.0, 0.0, 1.0), up);
        assert!(o.impact.is_none());
        let mp = o.multipath.unwrap();
        assert_eq!(mp.bin, 17);
        assert!(mp.power > 0.0);
        // boundary hits do not bounce by default
        let plain = Simulator::new(&env, &sonar, pose, down, Scene::flat(&pose), quiet()).unwrap();
        assert!(plain.ray_outcome(Vec3::new(0.0, 0.0, 1.0), down).multipath.is_none());
    }

    #[test]
    fn multipath_stays_within_range() {
        let (env, sonar, pose) = setup(20_000);
        let opts = SimOptions {
            multipath: MultipathMode::All,
            ..quiet()
        };
        let sim = Simulator::new(&env, &sonar, pose, BeamOrientation::FORWARD, Scene::flat(&pose), opts).unwrap();
        let last = sim.layout().bin_of(sim.max_range()).unwrap();
        assert!(sim.ping(3, 0).beams[0].multipath[last..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn grazing_resolution_limit() {
        // normal incidence at 7 m resolves to the middle of the first cell
        let g = resolved_grazing(7.0, PI / 2.0, 0.015);
        assert!((g - (7.0f64 / 7.0075).asin()).abs() < 1e-12);
        // shallow hits are untouched
        assert_eq!(resolved_grazing(20.0, 0.3, 0.015), 0.3);
    }

    #[test]
    fn reflection_preserves_angle() {
        let n = Vec3::new(0.3, -0.4, 0.866).normalized();
        let d = Vec3::new(0.5, 0.2, -0.7).normalized();
        let r = specular(d, n);
        assert!((r.dot(n) + d.dot(n)).abs() < 1e-12);
        assert!((r.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn open_water_without_volume_is_silent() {
        let (env, sonar, pose) = setup(2000);
        let opts = SimOptions {
            volume: false,
            ..quiet()
        };
        let sim = Simulator::new(&env, &sonar, pose, BeamOrientation::FORWARD, Scene::open_water(), opts).unwrap();
        let p = sim.ping(1, 0);
        assert!(p.beams[0].total.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ping_is_deterministic() {
        let (env, sonar, pose) = setup(5000);
        let sim = Simulator::new(
            &env,
            &sonar,
            pose,
            BeamOrientation::FORWARD,
            Scene::flat(&pose),
            SimOptions::default(),
        )
        .unwrap();
        assert_eq!(sim.ping(42, 3), sim.ping(42, 3));
        assert_ne!(sim.ping(42, 3), sim.ping(42, 4));
    }

    #[test]
    fn object_never_removes_energy_from_its_bin() {
        let (env, sonar, pose) = setup(20_000);
        let opts = SimOptions {
            volume: false,
            ..quiet()
        };
        let bare = Simulator::new(
            &env,
            &sonar,
            pose,
            BeamOrientation::FORWARD,
            Scene::flat(&pose),
            opts.clone(),
        )
        .unwrap();
        let rock = AxisBox {
            min: Vec3::new(20.0, -2.0, 6.0),
            max: Vec3::new(21.0, 2.0, 12.0),
        };
        let scene = Scene::flat(&pose).with_object(Shape::Box(rock), ObjectMaterial::default());
        let with = Simulator::new(&env, &sonar, pose, BeamOrientation::FORWARD, scene, opts).unwrap();
        let bin = bare.layout().bin_of(20.0 + 1e-6).unwrap();
        let (a, b) = (bare.ping(5, 0), with.ping(5, 0));
        assert!(b.beams[0].total[bin - 1] >= a.beams[0].total[bin - 1]);
        assert!(b.beams[0].object[bin - 1] > 0.0);
    }

    #[test]
    fn components_sum_to_total() {
        let (env, sonar, pose) = setup(5000);
        let sim = Simulator::new(
            &env,
            &sonar,
            pose,
            BeamOrientation::FORWARD,
            Scene::flat(&pose),
            SimOptions::default(),
        )
        .unwrap();
        let b = &sim.ping(9, 0).beams[0];
        for k in 0..b.num_bins() {
            let parts: f64 = ALL_COMPONENTS.iter().map(|&c| b.component(c)[k]).sum();
            assert!((parts - b.total[k]).abs() <= 1e-9 * b.total[k].abs().max(1e-300));
        }
        assert!(b.noise.iter().all(|&x| x > 0.0));
    }
}
