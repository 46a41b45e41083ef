//! Expected per-bin return with no obstacle present: the power sum of bottom,
//! surface and volume reverberation, each computed over resolution cells and
//! weighted by the beam pattern averaged over the ensonified ring or shell.

use std::f64::consts::{FRAC_PI_2, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acoustics::{
    absorption_coeff, max_range, range_resolution, sound_speed, BeamOrientation, BeamPattern, EnvironmentParams,
    Propagation, SonarConfig,
};
use crate::beam::{AngleConvention, SteeredBeam};
use crate::error::{Error, Result};
use crate::geometry::{
    bin_center, full_shell_volume, resolved_grazing, ring_area_between, ring_grazing_between, ring_radius, BinLayout,
    SonarPose, VolumeGate,
};
use crate::level::Level;
use crate::quadrature::{trig_roots, Quadrature};
use crate::scatter::{bottom_coeff, surface_coeff, volume_coeff};
use crate::vec3::Vec3;

/// How beam-pattern losses are averaged over a ring or shell.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamAveraging {
    /// Average linear intensity, normalised by the true measure (2 pi around a
    /// ring, 4 pi steradians over the sphere).
    #[default]
    Linear,
    /// Average the dB loss with the 1/pi and 1/pi^2 prefactors and the
    /// (theta_h, theta_v) sphere parameterisation, treating gated directions as 0 dB.
    Printed,
}

/// Whether the transmit and receive patterns are averaged jointly or apart.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamCoupling {
    /// Average of the two-way product `BP_T * BP_R`, the quantity a ray estimator sees.
    #[default]
    TwoWay,
    /// `avg(BP_T) * avg(BP_R)`.
    Separate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NullModelOptions {
    pub averaging: BeamAveraging,
    pub coupling: BeamCoupling,
    pub bottom: bool,
    pub surface: bool,
    pub volume: bool,
    /// Overrides the resolution cell length `c / 2B`.
    pub resolution_m: Option<f64>,
    /// Quadrature convergence threshold.
    pub quadrature_tol_db: f64,
}

impl Default for NullModelOptions {
    fn default() -> Self {
        NullModelOptions {
            averaging: BeamAveraging::Linear,
            coupling: BeamCoupling::TwoWay,
            bottom: true,
            surface: true,
            volume: true,
            resolution_m: None,
            quadrature_tol_db: 0.01,
        }
    }
}

/// One row of the expected-return table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NullBinRecord {
    pub bin: usize,
    pub center_m: f64,
    pub total: Level,
    pub bottom: Level,
    pub surface: Level,
    pub volume: Level,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NullModelReturn {
    pub records: Vec<NullBinRecord>,
    pub layout: BinLayout,
    pub pose: SonarPose,
    pub transmitter: BeamOrientation,
    pub beam: BeamOrientation,
}

impl NullModelReturn {
    pub fn totals(&self) -> Vec<Level> {
        self.records.iter().map(|r| r.total).collect()
    }

    pub fn record(&self, bin: usize) -> Option<&NullBinRecord> {
        self.records.get(bin.checked_sub(1)?)
    }
}

/// Splits `(lo, hi]` into `m = floor((hi - lo) / resolution)` equal cells, at least one.
pub fn resolution_cells(lo: f64, hi: f64, resolution: f64) -> impl Iterator<Item = (f64, f64)> {
    let m = (((hi - lo) / resolution) + 1e-9).floor().max(1.0) as usize;
    let w = (hi - lo) / m as f64;
    (0..m).map(move |i| {
        let a = lo + i as f64 * w;
        let b = if i + 1 == m { hi } else { lo + (i + 1) as f64 * w };
        (a, b)
    })
}

fn front_breaks(beams: &[SteeredBeam], a_of: impl Fn(Vec3) -> (f64, f64, f64)) -> Vec<f64> {
    beams
        .iter()
        .flat_map(|b| {
            let (a, bb, c) = a_of(b.facing());
            trig_roots(a, bb, c)
        })
        .collect()
}

fn product_gain(beams: &[SteeredBeam], dir: Vec3, conv: AngleConvention) -> f64 {
    beams.iter().map(|b| b.gain(dir, conv)).product()
}

/// Mean over `theta_r` in `[-pi, pi]` of the product of the linear gains of
/// `beams` toward the ring point `[rho cos theta_r, rho sin theta_r, plane_z]`.
pub fn ring_gain_average(rho: f64, plane_z: f64, beams: &[SteeredBeam], quad: &Quadrature) -> Result<f64> {
    let point = |t: f64| Vec3::new(rho * t.cos(), rho * t.sin(), plane_z);
    let breaks = front_breaks(beams, |f| (f.x * rho, f.y * rho, f.z * plane_z));
    let integral = quad.integrate(
        |t| product_gain(beams, point(t), AngleConvention::Surface),
        |t| beams.iter().all(|b| b.facing().dot(point(t)) > 0.0),
        -PI,
        PI,
        &breaks,
    )?;
    Ok(integral / (2.0 * PI))
}

/// The printed ring form: `(1/pi) integral of BP(dB)` with 0 dB outside the gate.
/// `NoResponse` when no part of the ring is inside the gate.
pub fn ring_loss_printed(rho: f64, plane_z: f64, beam: &SteeredBeam, quad: &Quadrature) -> Result<Level> {
    let point = |t: f64| Vec3::new(rho * t.cos(), rho * t.sin(), plane_z);
    let f = beam.facing();
    let breaks = trig_roots(f.x * rho, f.y * rho, f.z * plane_z);
    let in_gate = |t: f64| f.dot(point(t)) > 0.0;
    let measure = quad.integrate(|_| 1.0, in_gate, -PI, PI, &breaks)?;
    if measure <= 0.0 {
        return Ok(Level::NoResponse);
    }
    let integral = quad.integrate(
        |t| printed_db(beam, point(t), AngleConvention::Surface),
        in_gate,
        -PI,
        PI,
        &breaks,
    )?;
    Ok(Level::Db(integral / PI))
}

/// dB loss floored at -300 dB so sinc nulls stay integrable; 0 dB outside the gate.
fn printed_db(beam: &SteeredBeam, dir: Vec3, conv: AngleConvention) -> f64 {
    let g = beam.gain(dir, conv);
    if beam.facing().dot(dir) > 0.0 {
        10.0 * g.max(1e-30).log10()
    } else {
        0.0
    }
}

fn sphere_dir(elevation: f64, azimuth: f64) -> Vec3 {
    let ce = elevation.cos();
    Vec3::new(ce * azimuth.cos(), ce * azimuth.sin(), -elevation.sin())
}

/// Azimuthal integral of the two-way gain at one elevation, times `cos(elevation)`.
fn elevation_density(beams: &[SteeredBeam], elevation: f64, quad: &Quadrature) -> Result<f64> {
    let ce = elevation.cos();
    if ce <= 0.0 {
        return Ok(0.0);
    }
    let se = elevation.sin();
    let breaks = front_breaks(beams, |f| (f.x * ce, f.y * ce, -f.z * se));
    let inner = quad.integrate(
        |az| product_gain(beams, sphere_dir(elevation, az), AngleConvention::Volume),
        |az| {
            let d = sphere_dir(elevation, az);
            beams.iter().all(|b| b.facing().dot(d) > 0.0)
        },
        -PI,
        PI,
        &breaks,
    )?;
    Ok(ce * inner)
}

/// Solid-angle average of the gain product over the directions a volume gate admits.
pub fn sphere_gain_average(gate: VolumeGate, beams: &[SteeredBeam], quad: &Quadrature) -> Result<f64> {
    if gate.is_empty() {
        return Ok(0.0);
    }
    let lo = -gate.below.min(FRAC_PI_2);
    let hi = gate.above.min(FRAC_PI_2);
    let density = |e: f64| elevation_density(beams, e, quad);
    // The outer integrand is itself fallible, so evaluate it on demand and keep the first error.
    let failure = std::cell::RefCell::new(None);
    let outer = quad.integrate(
        |e| match density(e) {
            Ok(v) => v,
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                0.0
            }
        },
        |_| true,
        lo,
        hi,
        &[0.0],
    )?;
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    Ok(outer / (4.0 * PI))
}

/// Cumulative elevation profile of the two-way volume gain, so averages over any
/// gate window are a difference of two interpolated values.
#[derive(Clone, Debug)]
pub struct SphereProfile {
    step: f64,
    cumulative: Vec<f64>,
}

impl SphereProfile {
    pub const DEFAULT_INTERVALS: usize = 2048;

    pub fn new(beams: &[SteeredBeam], quad: &Quadrature, intervals: usize) -> Result<Self> {
        let step = PI / intervals as f64;
        let density: Vec<f64> = (0..=intervals)
            .into_par_iter()
            .map(|k| elevation_density(beams, -FRAC_PI_2 + k as f64 * step, quad))
            .collect::<Result<_>>()?;
        let mut cumulative = Vec::with_capacity(intervals + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * step * (w[0] + w[1]);
            cumulative.push(acc);
        }
        Ok(SphereProfile { step, cumulative })
    }

    fn cumulative_at(&self, elevation: f64) -> f64 {
        let x = ((elevation + FRAC_PI_2) / self.step).clamp(0.0, (self.cumulative.len() - 1) as f64);
        let k = (x.floor() as usize).min(self.cumulative.len() - 2);
        let frac = x - k as f64;
        self.cumulative[k] * (1.0 - frac) + self.cumulative[k + 1] * frac
    }

    pub fn average(&self, gate: VolumeGate) -> f64 {
        if gate.is_empty() {
            return 0.0;
        }
        let lo = -gate.below.min(FRAC_PI_2);
        let hi = gate.above.min(FRAC_PI_2);
        ((self.cumulative_at(hi) - self.cumulative_at(lo)) / (4.0 * PI)).max(0.0)
    }
}

/// The printed sphere form: `(1/pi^2)` times the integral of the dB loss over
/// `theta_h, theta_v` in `[-pi, pi]^2` with direction
/// `[cos th cos tv, sin th, sin tv]`, evaluated on a fixed midpoint grid. Gated
/// directions count as 0 dB; `pitch` enters the elevation gate as printed.
pub fn sphere_loss_printed(gate: VolumeGate, beam: &SteeredBeam, pitch: f64, grid: usize) -> Level {
    let h = 2.0 * PI / grid as f64;
    let mut sum = 0.0;
    let mut any = false;
    for i in 0..grid {
        let tv = -PI + (i as f64 + 0.5) * h;
        for j in 0..grid {
            let th = -PI + (j as f64 + 0.5) * h;
            // Parameterisation is in the sonar frame with z up; flip to z down.
            let v = Vec3::new(th.cos() * tv.cos(), th.sin(), -tv.sin());
            if v.x <= 0.0 {
                continue;
            }
            let (theta, psi) = crate::geometry::beam_angles_volume(v);
            let psi_up = -psi;
            if !(psi_up > -gate.below + pitch && psi_up < gate.above + pitch) {
                continue;
            }
            any = true;
            let g = beam.pattern().gain(theta, psi);
            sum += 10.0 * g.max(1e-30).log10();
        }
    }
    if !any {
        return Level::NoResponse;
    }
    Level::Db(sum * h * h / (PI * PI))
}

/// Analytic null-hypothesis model for one environment, sonar and pose.
#[derive(Clone, Debug)]
pub struct NullModel {
    env: EnvironmentParams,
    sonar: SonarConfig,
    pose: SonarPose,
    transmitter: BeamOrientation,
    options: NullModelOptions,
    sound_speed: f64,
    propagation: Propagation,
    pattern: BeamPattern,
    resolution: f64,
    /// `c / 2B`, which limits how close to normal incidence a return is resolved.
    sonar_resolution: f64,
    quad: Quadrature,
}

struct Plane {
    offset: f64,
    z: f64,
    coeff: Box<dyn Fn(f64) -> f64 + Sync>,
}

impl NullModel {
    pub fn new(
        env: &EnvironmentParams,
        sonar: &SonarConfig,
        pose: SonarPose,
        transmitter: BeamOrientation,
        options: NullModelOptions,
    ) -> Result<Self> {
        env.validate().map_err(|e| e.within("env"))?;
        sonar.validate().map_err(|e| e.within("sonar"))?;
        pose.validate().map_err(|e| e.within("pose"))?;
        transmitter.validate().map_err(|e| e.within("transmitter"))?;
        let c = sound_speed(env)?;
        let alpha = absorption_coeff(sonar.frequency_khz, env)?;
        let sonar_resolution = range_resolution(c, sonar.bandwidth_hz);
        let resolution = match options.resolution_m {
            Some(r) if r > 0.0 && r.is_finite() => r,
            Some(r) => {
                return Err(Error::validation(
                    "null_model.resolution_m",
                    format!("must be positive, got {r}"),
                ))
            }
            None => sonar_resolution,
        };
        let quad = Quadrature {
            tol_db: options.quadrature_tol_db,
            ..Quadrature::default()
        };
        Ok(NullModel {
            env: env.clone(),
            sonar: sonar.clone(),
            pose,
            transmitter,
            options,
            sound_speed: c,
            propagation: Propagation {
                alpha_w_db_per_km: alpha,
            },
            pattern: sonar.beam_pattern(c),
            resolution,
            sonar_resolution,
            quad,
        })
    }

    pub fn sound_speed(&self) -> f64 {
        self.sound_speed
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn options(&self) -> &NullModelOptions {
        &self.options
    }

    /// Bins of `d_b` out to the ping-rate limited range.
    pub fn layout(&self) -> Result<BinLayout> {
        BinLayout::new(
            self.sonar.bin_length_m,
            max_range(self.sound_speed, self.sonar.ping_rate_hz),
        )
    }

    fn steered(&self, o: BeamOrientation) -> SteeredBeam {
        SteeredBeam::new(o.pitched_by(self.pose.pitch_rad), self.pattern)
    }

    fn beams(&self, receive: BeamOrientation) -> (SteeredBeam, SteeredBeam) {
        (self.steered(self.transmitter), self.steered(receive))
    }

    /// `BP_T + BP_R` in dB for a ring of radius `rho` on the plane at `plane_z`.
    fn ring_two_way(&self, rho: f64, plane_z: f64, tx: &SteeredBeam, rx: &SteeredBeam) -> Result<Level> {
        match (self.options.averaging, self.options.coupling) {
            (BeamAveraging::Linear, BeamCoupling::TwoWay) => Ok(Level::from_linear(ring_gain_average(
                rho,
                plane_z,
                &[*tx, *rx],
                &self.quad,
            )?)),
            (BeamAveraging::Linear, BeamCoupling::Separate) => {
                let t = ring_gain_average(rho, plane_z, std::slice::from_ref(tx), &self.quad)?;
                let r = ring_gain_average(rho, plane_z, std::slice::from_ref(rx), &self.quad)?;
                Ok(Level::from_linear(t) + Level::from_linear(r))
            }
            (BeamAveraging::Printed, _) => {
                Ok(ring_loss_printed(rho, plane_z, tx, &self.quad)? + ring_loss_printed(rho, plane_z, rx, &self.quad)?)
            }
        }
    }

    fn plane_bins(&self, plane: &Plane, receive: BeamOrientation, layout: &BinLayout) -> Result<Vec<Level>> {
        let (tx, rx) = self.beams(receive);
        let sl = self.sonar.source_level_db;
        layout
            .bins()
            .into_par_iter()
            .map(|n| {
                let (lo, hi) = (layout.edge(n - 1), layout.edge(n));
                if plane.offset >= hi {
                    return Ok(Level::NoResponse);
                }
                let mut cells = Vec::new();
                for (a, b) in resolution_cells(lo, hi, self.resolution) {
                    if plane.offset >= b {
                        continue;
                    }
                    let area = ring_area_between(a, b, plane.offset);
                    let coeff = self.cell_coefficient(plane, a.max(plane.offset), b);
                    let rho = 0.5 * (ring_radius(b, plane.offset) + ring_radius(a, plane.offset));
                    let bp = self.ring_two_way(rho, plane.z, &tx, &rx)?;
                    let tl = self.propagation.two_way_loss_db(0.5 * (a + b));
                    cells.push(crate::scatter::reverb_level(sl, tl, bp, Level::ZERO_DB, coeff, area));
                }
                Ok(Level::power_sum(cells))
            })
            .collect()
    }

    /// Area-weighted mean scattering coefficient (dB) over the wet annulus `(lo, hi]`.
    /// Near normal incidence the coefficient changes fast across a single cell, so
    /// it is sampled at several ranges rather than once; grazing is never taken
    /// closer to normal than the sonar resolution allows.
    fn cell_coefficient(&self, plane: &Plane, lo: f64, hi: f64) -> f64 {
        const SAMPLES: usize = 8;
        let w = (hi - lo) / SAMPLES as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..SAMPLES {
            let d = lo + (i as f64 + 0.5) * w;
            let grazing = resolved_grazing(d, ring_grazing_between(d, d, plane.offset), self.sonar_resolution);
            num += d * 10f64.powf((plane.coeff)(grazing) / 10.0);
            den += d;
        }
        10.0 * (num / den).log10()
    }

    fn bottom_plane(&self) -> Plane {
        let (bt, f) = (self.env.bottom_type, self.sonar.frequency_khz);
        Plane {
            offset: self.pose.altitude_m,
            z: self.pose.altitude_m,
            coeff: Box::new(move |g| bottom_coeff(bt, g, f)),
        }
    }

    fn surface_plane(&self) -> Plane {
        let (w, f) = (self.env.wind_knots, self.sonar.frequency_khz);
        Plane {
            offset: self.pose.depth_m,
            z: -self.pose.depth_m,
            coeff: Box::new(move |g| surface_coeff(w, g, f)),
        }
    }

    /// Bottom reverberation `RL_B^n` per bin.
    pub fn bottom_return_bins(&self, receive: BeamOrientation, layout: &BinLayout) -> Result<Vec<Level>> {
        self.plane_bins(&self.bottom_plane(), receive, layout)
    }

    /// Surface reverberation `RL_S^n`: the bottom pipeline mirrored to depth `h_d`.
    pub fn surface_return_bins(&self, receive: BeamOrientation, layout: &BinLayout) -> Result<Vec<Level>> {
        self.plane_bins(&self.surface_plane(), receive, layout)
    }

    /// Volume reverberation `RL_V^n` per bin, with the bottom and surface acting
    /// through the elevation gate rather than by removing volume.
    pub fn volume_return_bins(&self, receive: BeamOrientation, layout: &BinLayout) -> Result<Vec<Level>> {
        let (tx, rx) = self.beams(receive);
        let (h, h_d) = (self.pose.altitude_m, self.pose.depth_m);
        let sv = volume_coeff(self.env.particle_density_db, self.sonar.frequency_khz);
        let sl = self.sonar.source_level_db;

        enum Averager {
            Profile(SphereProfile),
            Separate(SphereProfile, SphereProfile),
            Printed,
        }
        let averager = match (self.options.averaging, self.options.coupling) {
            (BeamAveraging::Linear, BeamCoupling::TwoWay) => Averager::Profile(SphereProfile::new(
                &[tx, rx],
                &self.quad,
                SphereProfile::DEFAULT_INTERVALS,
            )?),
            (BeamAveraging::Linear, BeamCoupling::Separate) => Averager::Separate(
                SphereProfile::new(&[tx], &self.quad, SphereProfile::DEFAULT_INTERVALS)?,
                SphereProfile::new(&[rx], &self.quad, SphereProfile::DEFAULT_INTERVALS)?,
            ),
            (BeamAveraging::Printed, _) => Averager::Printed,
        };
        let tx_pitch = self.transmitter.pitch_rad + self.pose.pitch_rad;
        let rx_pitch = receive.pitch_rad + self.pose.pitch_rad;

        let bins: Vec<Level> = layout
            .bins()
            .into_par_iter()
            .map(|n| {
                let (lo, hi) = (layout.edge(n - 1), layout.edge(n));
                let cells = resolution_cells(lo, hi, self.resolution).map(|(a, b)| {
                    let mid = 0.5 * (a + b);
                    let gate = VolumeGate::at_range(mid, h, h_d);
                    let bp = match &averager {
                        Averager::Profile(p) => Level::from_linear(p.average(gate)),
                        Averager::Separate(pt, pr) => {
                            Level::from_linear(pt.average(gate)) + Level::from_linear(pr.average(gate))
                        }
                        Averager::Printed => {
                            sphere_loss_printed(gate, &tx, tx_pitch, PRINTED_GRID)
                                + sphere_loss_printed(gate, &rx, rx_pitch, PRINTED_GRID)
                        }
                    };
                    let tl = self.propagation.two_way_loss_db(mid);
                    crate::scatter::reverb_level(sl, tl, bp, Level::ZERO_DB, sv, full_shell_volume(a, b))
                });
                Level::power_sum(cells)
            })
            .collect();
        Ok(bins)
    }

    /// Expected return per bin: power sum of the enabled components.
    pub fn expected(&self, receive: BeamOrientation, layout: &BinLayout) -> Result<NullModelReturn> {
        let none = || vec![Level::NoResponse; layout.num_bins];
        let bottom = if self.options.bottom {
            self.bottom_return_bins(receive, layout)?
        } else {
            none()
        };
        let surface = if self.options.surface {
            self.surface_return_bins(receive, layout)?
        } else {
            none()
        };
        let volume = if self.options.volume {
            self.volume_return_bins(receive, layout)?
        } else {
            none()
        };
        let records = layout
            .bins()
            .map(|n| {
                let (b, s, v) = (bottom[n - 1], surface[n - 1], volume[n - 1]);
                NullBinRecord {
                    bin: n,
                    center_m: bin_center(n, layout),
                    total: Level::power_sum([b, s, v]),
                    bottom: b,
                    surface: s,
                    volume: v,
                }
            })
            .collect();
        Ok(NullModelReturn {
            records,
            layout: *layout,
            pose: self.pose,
            transmitter: self.transmitter,
            beam: receive,
        })
    }
}

const PRINTED_GRID: usize = 160;

/// Beam-pattern loss of one beam averaged around the bottom ring of bin `n`,
/// using the ring-midpoint radius `(r_n + r_{n-1}) / 2`.
pub fn avg_ring_bp_loss(
    n: usize,
    layout: &BinLayout,
    pose: &SonarPose,
    beam: BeamOrientation,
    sonar: &SonarConfig,
    c: f64,
    averaging: BeamAveraging,
) -> Result<Level> {
    let h = pose.altitude_m;
    let rho = 0.5 * (ring_radius(layout.edge(n), h) + ring_radius(layout.edge(n - 1), h));
    let steered = SteeredBeam::new(beam.pitched_by(pose.pitch_rad), sonar.beam_pattern(c));
    let quad = Quadrature::default();
    match averaging {
        BeamAveraging::Linear => Ok(Level::from_linear(ring_gain_average(rho, h, &[steered], &quad)?)),
        BeamAveraging::Printed => ring_loss_printed(rho, h, &steered, &quad),
    }
}

/// Beam-pattern loss of one beam averaged over the sphere, restricted to the
/// elevation window between the bottom and surface cutoffs.
pub fn avg_sphere_bp_loss(
    gate: VolumeGate,
    pose: &SonarPose,
    beam: BeamOrientation,
    sonar: &SonarConfig,
    c: f64,
    averaging: BeamAveraging,
) -> Result<Level> {
    let o = beam.pitched_by(pose.pitch_rad);
    let steered = SteeredBeam::new(o, sonar.beam_pattern(c));
    match averaging {
        BeamAveraging::Linear => Ok(Level::from_linear(sphere_gain_average(
            gate,
            &[steered],
            &Quadrature::default(),
        )?)),
        BeamAveraging::Printed => Ok(sphere_loss_printed(gate, &steered, o.pitch_rad, PRINTED_GRID)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BinLayout;

    fn scenario() -> (EnvironmentParams, SonarConfig, SonarPose) {
        let pose = SonarPose {
            altitude_m: 5.0,
            depth_m: 7.0,
            pitch_rad: 0.0,
        };
        (EnvironmentParams::default(), SonarConfig::default(), pose)
    }

    fn model(options: NullModelOptions) -> NullModel {
        let (env, sonar, pose) = scenario();
        NullModel::new(&env, &sonar, pose, BeamOrientation::FORWARD, options).unwrap()
    }

    fn short_layout() -> BinLayout {
        BinLayout::with_bins(0.25, 168).unwrap()
    }

    #[test]
    fn plane_curves_match_dense_oracle() {
        // Dense fixed-grid evaluation from a separate script: 10^6 ring samples per
        // cell and 400 coefficient samples across each cell.
        let bottom = [
            (21, -55.621_373_992_043_374),
            (25, -85.226_707_157_551_27),
            (41, -84.898_756_875_703_41),
            (81, -84.096_220_992_297_35),
            (161, -98.887_833_970_893_35),
        ];
        let surface = [
            (29, -70.166_148_045_807_86),
            (30, -86.525_390_405_333_71),
            (41, -128.856_962_715_811_93),
            (81, -98.468_324_093_506_6),
        ];
        let m = model(NullModelOptions::default());
        let layout = short_layout();
        let b = m.bottom_return_bins(BeamOrientation::FORWARD, &layout).unwrap();
        let s = m.surface_return_bins(BeamOrientation::FORWARD, &layout).unwrap();
        for (bins, frozen) in [(&b, &bottom[..]), (&s, &surface[..])] {
            for &(n, want) in frozen {
                let got = bins[n - 1].db().unwrap();
                assert!((got - want).abs() < 0.1, "bin {n}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn ring_and_sphere_averages_match_reference_quadrature() {
        let (_, sonar, pose) = scenario();
        let c = model(NullModelOptions::default()).sound_speed();
        let ring = avg_ring_bp_loss(
            41,
            &short_layout(),
            &pose,
            BeamOrientation::FORWARD,
            &sonar,
            c,
            BeamAveraging::Linear,
        )
        .unwrap();
        assert!((ring.db().unwrap() - (-25.486_250_764_376_23)).abs() < 0.05, "{ring}");
        let gate = VolumeGate::at_range(10.0, 5.0, 7.0);
        let sphere =
            avg_sphere_bp_loss(gate, &pose, BeamOrientation::FORWARD, &sonar, c, BeamAveraging::Linear).unwrap();
        assert!(
            (sphere.db().unwrap() - (-20.887_503_409_180_87)).abs() < 0.05,
            "{sphere}"
        );
        let open = avg_sphere_bp_loss(
            VolumeGate::OPEN,
            &pose,
            BeamOrientation::FORWARD,
            &sonar,
            c,
            BeamAveraging::Linear,
        )
        .unwrap();
        assert!((open.db().unwrap() - (-20.079_511_853_108_52)).abs() < 0.05, "{open}");
        // the cumulative profile agrees with the direct nested quadrature
        let beam = SteeredBeam::new(BeamOrientation::FORWARD, sonar.beam_pattern(c));
        let profile = SphereProfile::new(&[beam], &Quadrature::default(), SphereProfile::DEFAULT_INTERVALS).unwrap();
        let direct = sphere_gain_average(gate, &[beam], &Quadrature::default()).unwrap();
        assert!((10.0 * (profile.average(gate) / direct).log10()).abs() < 0.01);
    }

    #[test]
    fn omnidirectional_limits_lose_only_the_back_half() {
        let (_, mut sonar, pose) = scenario();
        let c = 1500.0;
        let lambda = sonar.wavelength_m(c);
        sonar.horizontal_len_m = lambda * 1e-6;
        sonar.vertical_len_m = lambda * 1e-6;
        let layout = BinLayout::with_bins(1.0, 20).unwrap();
        let ring = avg_ring_bp_loss(
            10,
            &layout,
            &pose,
            BeamOrientation::FORWARD,
            &sonar,
            c,
            BeamAveraging::Linear,
        )
        .unwrap();
        let half = 10.0 * 0.5f64.log10();
        assert!((ring.db().unwrap() - half).abs() < 1e-3, "{ring}");
        let sphere = avg_sphere_bp_loss(
            VolumeGate::OPEN,
            &pose,
            BeamOrientation::FORWARD,
            &sonar,
            c,
            BeamAveraging::Linear,
        )
        .unwrap();
        assert!((sphere.db().unwrap() - half).abs() < 1e-3, "{sphere}");
    }

    #[test]
    fn degenerate_gates_give_no_response() {
        let (_, sonar, pose) = scenario();
        let empty = VolumeGate::from_cutoffs(0.0, 0.0);
        for mode in [BeamAveraging::Linear, BeamAveraging::Printed] {
            let l = avg_sphere_bp_loss(empty, &pose, BeamOrientation::FORWARD, &sonar, 1500.0, mode).unwrap();
            assert_eq!(l, Level::NoResponse);
        }
        // nothing below the sonar lies beyond a beam aimed straight up
        let up = BeamOrientation {
            yaw_rad: 0.0,
            pitch_rad: -std::f64::consts::FRAC_PI_2,
        };
        let layout = BinLayout::with_bins(1.0, 10).unwrap();
        let l = avg_ring_bp_loss(7, &layout, &pose, up, &sonar, 1500.0, BeamAveraging::Linear).unwrap();
        assert_eq!(l, Level::NoResponse);
        let fine = avg_ring_bp_loss(
            7,
            &layout,
            &pose,
            BeamOrientation::FORWARD,
            &sonar,
            1500.0,
            BeamAveraging::Linear,
        )
        .unwrap();
        assert!(fine.is_response());
    }

    #[test]
    fn totals_are_power_sums_and_onsets_sit_at_the_planes() {
        let m = model(NullModelOptions::default());
        let layout = short_layout();
        let ret = m.expected(BeamOrientation::FORWARD, &layout).unwrap();
        for r in &ret.records {
            let sum = Level::power_sum([r.bottom, r.surface, r.volume]);
            match (r.total, sum) {
                (Level::Db(a), Level::Db(b)) => assert!((a - b).abs() < 1e-9),
                (a, b) => assert_eq!(a, b),
            }
        }
        let first = |f: fn(&NullBinRecord) -> Level| ret.records.iter().find(|r| f(r).is_response()).unwrap().bin;
        assert_eq!(first(|r| r.bottom), layout.bin_of(5.0 + 1e-9).unwrap());
        assert_eq!(first(|r| r.surface), layout.bin_of(7.0 + 1e-9).unwrap());
        // with one component the total is that component
        let r = &ret.records[5];
        assert_eq!((r.bottom, r.surface), (Level::NoResponse, Level::NoResponse));
        assert_eq!(r.total, r.volume);
    }

    #[test]
    fn source_level_and_particle_density_shift_exactly() {
        let (mut env, mut sonar, pose) = scenario();
        let layout = BinLayout::with_bins(0.25, 60).unwrap();
        let base = NullModel::new(
            &env,
            &sonar,
            pose,
            BeamOrientation::FORWARD,
            NullModelOptions::default(),
        )
        .unwrap()
        .expected(BeamOrientation::FORWARD, &layout)
        .unwrap();
        sonar.source_level_db = 12.5;
        env.particle_density_db = -70.0;
        let shifted = NullModel::new(
            &env,
            &sonar,
            pose,
            BeamOrientation::FORWARD,
            NullModelOptions::default(),
        )
        .unwrap();
        let vol = shifted.volume_return_bins(BeamOrientation::FORWARD, &layout).unwrap();
        let bottom = shifted.bottom_return_bins(BeamOrientation::FORWARD, &layout).unwrap();
        for (r, (v, b)) in base.records.iter().zip(vol.iter().zip(&bottom)) {
            assert!((v.db().unwrap() - r.volume.db().unwrap() - 32.5).abs() < 1e-9);
            if let (Some(x), Some(y)) = (b.db(), r.bottom.db()) {
                assert!((x - y - 12.5).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn one_cell_bins_are_direct_evaluations() {
        let (env, sonar, pose) = scenario();
        let options = NullModelOptions {
            resolution_m: Some(1.0),
            surface: false,
            volume: false,
            ..NullModelOptions::default()
        };
        let m = NullModel::new(&env, &sonar, pose, BeamOrientation::FORWARD, options).unwrap();
        let layout = BinLayout::with_bins(1.0, 20).unwrap();
        let bins = m.bottom_return_bins(BeamOrientation::FORWARD, &layout).unwrap();
        let n = 12;
        let (lo, hi) = (layout.edge(n - 1), layout.edge(n));
        let rho = 0.5 * (ring_radius(hi, 5.0) + ring_radius(lo, 5.0));
        let beam = SteeredBeam::new(BeamOrientation::FORWARD, sonar.beam_pattern(m.sound_speed()));
        let avg = ring_gain_average(rho, 5.0, &[beam, beam], &Quadrature::default()).unwrap();
        let alpha = absorption_coeff(sonar.frequency_khz, &env).unwrap();
        let tl = Propagation {
            alpha_w_db_per_km: alpha,
        }
        .two_way_loss_db(bin_center(n, &layout));
        // coefficient averaged over the annulus by a fine midpoint rule
        let k = 10_000;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..k {
            let d = lo + (i as f64 + 0.5) * (hi - lo) / k as f64;
            num += d * 10f64.powf(bottom_coeff(env.bottom_type, (5.0 / d).asin(), sonar.frequency_khz) / 10.0);
            den += d;
        }
        let want = crate::scatter::reverb_level(
            0.0,
            tl,
            Level::from_linear(avg),
            Level::ZERO_DB,
            10.0 * (num / den).log10(),
            ring_area_between(lo, hi, 5.0),
        );
        assert!((bins[n - 1].db().unwrap() - want.db().unwrap()).abs() < 0.01);
    }

    #[test]
    fn halving_the_resolution_cell_is_stable() {
        let m = model(NullModelOptions::default());
        let finer = model(NullModelOptions {
            resolution_m: Some(0.5 * m.resolution()),
            ..NullModelOptions::default()
        });
        let layout = m.layout().unwrap();
        let a = m.expected(BeamOrientation::FORWARD, &layout).unwrap();
        let b = finer.expected(BeamOrientation::FORWARD, &layout).unwrap();
        for (x, y) in a.records.iter().zip(&b.records) {
            for (p, q) in [(x.bottom, y.bottom), (x.surface, y.surface), (x.volume, y.volume)] {
                if let (Some(p), Some(q)) = (p.db(), q.db()) {
                    assert!((p - q).abs() < 0.2, "bin {}: {p} vs {q}", x.bin);
                }
            }
        }
    }

    #[test]
    fn averaging_variants_are_available() {
        let layout = BinLayout::with_bins(0.25, 48).unwrap();
        let two_way = model(NullModelOptions::default())
            .expected(BeamOrientation::FORWARD, &layout)
            .unwrap();
        let separate = model(NullModelOptions {
            coupling: BeamCoupling::Separate,
            ..NullModelOptions::default()
        })
        .expected(BeamOrientation::FORWARD, &layout)
        .unwrap();
        let printed = model(NullModelOptions {
            averaging: BeamAveraging::Printed,
            ..NullModelOptions::default()
        })
        .expected(BeamOrientation::FORWARD, &layout)
        .unwrap();
        let at = |r: &NullModelReturn, n: usize| r.records[n - 1].bottom.db().unwrap();
        // the product of averages never exceeds the average of the product for a shared beam
        assert!(at(&separate, 40) <= at(&two_way, 40) + 1e-9);
        assert!(printed.records.iter().all(|r| r.total.db().is_some_and(f64::is_finite)));
    }

    #[test]
    fn cells_cover_the_bin() {
        let cells: Vec<_> = resolution_cells(1.0, 1.25, 0.0149).collect();
        assert_eq!(cells.len(), 16);
        assert_eq!(cells[0].0, 1.0);
        assert_eq!(cells[15].1, 1.25);
        assert_eq!(resolution_cells(0.0, 0.25, 1.0).count(), 1);
    }
}
