//! Range bins, ensonified rings and shells, frame rotation and beam-angle
//! extraction for the analytic reverberation model.
//!
//! Distances are measured from the transducer. The world frame has x forward,
//! y to starboard and z down, so the bottom sits at `z = +h` and the surface at
//! `z = -h_d` relative to the sonar.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::acoustics::pitch_rotation;
use crate::error::{check_positive, Error, Result};
use crate::vec3::Vec3;

/// Uniform range bins `(d_{n-1}, d_n]` with `d_0 = 0` and `d_n = n d_b`. Bins are
/// indexed from 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinLayout {
    pub bin_length_m: f64,
    pub num_bins: usize,
}

impl BinLayout {
    /// Enough bins to cover `max_range_m`, so `d_N` lies within one bin of it.
    pub fn new(bin_length_m: f64, max_range_m: f64) -> Result<Self> {
        check_positive("bin_length_m", bin_length_m)?;
        check_positive("max_range_m", max_range_m)?;
        let num_bins = ((max_range_m / bin_length_m) - 1e-9).ceil().max(1.0) as usize;
        Ok(BinLayout { bin_length_m, num_bins })
    }

    pub fn with_bins(bin_length_m: f64, num_bins: usize) -> Result<Self> {
        check_positive("bin_length_m", bin_length_m)?;
        if num_bins == 0 {
            return Err(Error::validation("num_bins", "must be at least 1"));
        }
        Ok(BinLayout { bin_length_m, num_bins })
    }

    /// Far edge `d_n`; `edge(0) = 0`.
    pub fn edge(&self, n: usize) -> f64 {
        n as f64 * self.bin_length_m
    }

    pub fn edges(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.num_bins).map(|n| self.edge(n))
    }

    pub fn max_distance(&self) -> f64 {
        self.edge(self.num_bins)
    }

    /// Bin `ceil(d / d_b)` holding distance `d`, or `None` outside `(0, d_N]`.
    pub fn bin_of(&self, d: f64) -> Option<usize> {
        if !(d > 0.0) {
            return None;
        }
        let n = (d / self.bin_length_m).ceil() as usize;
        (n >= 1 && n <= self.num_bins).then_some(n)
    }

    pub fn bins(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.num_bins
    }
}

/// Distance to the centre of bin `n`, `d_n - d_b / 2`.
pub fn bin_center(n: usize, layout: &BinLayout) -> f64 {
    layout.edge(n) - layout.bin_length_m / 2.0
}

/// Grazing angle as the range resolution can resolve it. Within the first
/// resolution cell past normal incidence on the tangent plane, grazing is taken at
/// that cell's middle: `min(grazing, asin(p / (p + resolution / 2)))`, where
/// `p = distance * sin(grazing)` is the range to the tangent plane.
pub fn resolved_grazing(distance: f64, grazing: f64, resolution: f64) -> f64 {
    let p = distance * grazing.sin();
    grazing.min((p / (p + 0.5 * resolution)).asin())
}

/// Vehicle state relevant to the analytic model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SonarPose {
    /// Height above the locally flat bottom.
    pub altitude_m: f64,
    /// Depth below the surface.
    pub depth_m: f64,
    #[serde(default)]
    pub pitch_rad: f64,
}

impl SonarPose {
    pub fn validate(&self) -> Result<()> {
        check_positive("altitude_m", self.altitude_m)?;
        check_positive("depth_m", self.depth_m)?;
        if !self.pitch_rad.is_finite() {
            return Err(Error::validation("pitch_rad", "must be finite"));
        }
        Ok(())
    }
}

/// Radius of the circle cut from the plane at distance `h` by a sphere of radius `d`.
pub fn ring_radius(d: f64, h: f64) -> f64 {
    let h = h.abs();
    if h < d {
        (d * d - h * h).sqrt()
    } else {
        0.0
    }
}

/// Plane area whose range from the sonar lies in `(d_lo, d_hi]`.
pub fn ring_area_between(d_lo: f64, d_hi: f64, h: f64) -> f64 {
    let outer = ring_radius(d_hi, h);
    let inner = ring_radius(d_lo, h);
    PI * (outer * outer - inner * inner)
}

/// Ensonified plane area of bin `n`. Partial sums over bins telescope to
/// `pi r_n^2`.
pub fn ring_area(n: usize, layout: &BinLayout, h: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ring_area_between(layout.edge(n - 1), layout.edge(n), h)
}

/// Grazing angle at the middle of the range interval `(d_lo, d_hi]`, zero when
/// the plane is out of reach. The `asin` argument is clamped to 1 in the first
/// wet interval, where the plane lies beyond the midpoint.
pub fn ring_grazing_between(d_lo: f64, d_hi: f64, h: f64) -> f64 {
    let h = h.abs();
    if h < d_hi {
        (2.0 * h / (d_hi + d_lo)).clamp(0.0, 1.0).asin()
    } else {
        0.0
    }
}

pub fn ring_grazing(n: usize, layout: &BinLayout, h: f64) -> f64 {
    ring_grazing_between(layout.edge(n - 1), layout.edge(n), h)
}

/// Applies the pitch rotation for a sonar pitched `pitch` downwards.
pub fn rotate_to_sonar_frame(v: Vec3, pitch: f64) -> Vec3 {
    pitch_rotation(pitch).apply(v)
}

/// `(theta, psi)` with `psi` measured against the horizontal projection
/// `sqrt(v_x^2 + v_y^2)`; used for rings on the bottom and surface.
pub fn beam_angles_surface(v: Vec3) -> (f64, f64) {
    (v.y.atan2(v.x), v.z.atan2(v.x.hypot(v.y)))
}

/// `(theta, psi)` with `psi = atan(v_z / v_x)`; used for the volume shell.
pub fn beam_angles_volume(v: Vec3) -> (f64, f64) {
    (v.y.atan2(v.x), v.z.atan2(v.x))
}

/// Volume of the part of a ball of radius `r` lying beyond a plane at distance `h`.
fn cap_volume(r: f64, h: f64) -> f64 {
    let h = h.abs();
    if h >= r {
        0.0
    } else {
        PI * (r - h).powi(2) * (2.0 * r + h) / 3.0
    }
}

/// Water volume of shell `n`: the hollow sphere between `d_{n-1}` and `d_n`
/// minus the spherical caps cut off by the bottom at `h` and the surface at `h_d`.
pub fn shell_volume(n: usize, layout: &BinLayout, h: f64, h_d: f64) -> f64 {
    let (lo, hi) = (layout.edge(n - 1), layout.edge(n));
    let full = 4.0 / 3.0 * PI * (hi.powi(3) - lo.powi(3));
    let cut = |plane: f64| cap_volume(hi, plane) - cap_volume(lo, plane);
    (full - cut(h) - cut(h_d)).max(0.0)
}

/// Full shell volume `4/3 pi (d_n^3 - d_{n-1}^3)`.
pub fn full_shell_volume(d_lo: f64, d_hi: f64) -> f64 {
    4.0 / 3.0 * PI * (d_hi.powi(3) - d_lo.powi(3))
}

/// The hemispherical approximation of the volume a plane at `h` removes from
/// shell `n`: a hemisphere on the cut circle, differenced between the shell radii.
pub fn hemispherical_cut(n: usize, layout: &BinLayout, h: f64) -> f64 {
    let (lo, hi) = (layout.edge(n - 1), layout.edge(n));
    let h = h.abs();
    let hemi = |d: f64| 2.0 / 3.0 * PI * (d * d - h * h).sqrt().powi(3);
    if h < lo {
        hemi(hi) - hemi(lo)
    } else if h < hi {
        hemi(hi)
    } else {
        0.0
    }
}

/// Elevation angles `(theta_ha, theta_hd)` at which bin `n`'s midpoint meets the
/// bottom and surface, clamped like [`ring_grazing`]. A plane beyond the
/// midpoint gives 0.
pub fn cutoff_angles(n: usize, layout: &BinLayout, h: f64, h_d: f64) -> (f64, f64) {
    let mid = (layout.edge(n) + layout.edge(n - 1)) / 2.0;
    let cut = |plane: f64| {
        if plane < mid {
            (plane / mid).clamp(0.0, 1.0).asin()
        } else {
            0.0
        }
    };
    (cut(h), cut(h_d))
}

/// Elevation window open to volume scattering at range `d`. Directions more than
/// `below` under the horizontal have met the bottom, more than `above` over it the
/// surface. A plane out of reach leaves that side open to pi/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeGate {
    pub below: f64,
    pub above: f64,
}

impl VolumeGate {
    pub const OPEN: VolumeGate = VolumeGate {
        below: FRAC_PI_2,
        above: FRAC_PI_2,
    };

    pub fn at_range(d: f64, h: f64, h_d: f64) -> Self {
        let cut = |plane: f64| {
            if plane < d {
                (plane / d).clamp(0.0, 1.0).asin()
            } else {
                FRAC_PI_2
            }
        };
        VolumeGate {
            below: cut(h),
            above: cut(h_d),
        }
    }

    /// Gate from explicit cutoff angles, taken verbatim.
    pub fn from_cutoffs(theta_ha: f64, theta_hd: f64) -> Self {
        VolumeGate {
            below: theta_ha,
            above: theta_hd,
        }
    }

    /// Whether a world direction with upward elevation `elevation` is open.
    pub fn admits(&self, elevation: f64) -> bool {
        -self.below < elevation && elevation < self.above
    }

    pub fn is_empty(&self) -> bool {
        self.below + self.above <= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_bins(n: usize) -> BinLayout {
        BinLayout::with_bins(1.0, n).unwrap()
    }

    #[test]
    fn layout_covers_max_range() {
        let l = BinLayout::new(0.25, 49.66).unwrap();
        assert_eq!(l.num_bins, 199);
        assert!(l.max_distance() >= 49.66 && l.max_distance() - 49.66 < 0.25);
        let exact = BinLayout::new(1.0, 50.0).unwrap();
        assert_eq!(exact.num_bins, 50);
        assert_eq!(exact.bin_of(5.0), Some(5));
        assert_eq!(exact.bin_of(5.000001), Some(6));
        assert_eq!(exact.bin_of(0.0), None);
        assert_eq!(exact.bin_of(50.01), None);
        assert!(BinLayout::new(0.0, 10.0).is_err());
    }

    #[test]
    fn bin_centres() {
        assert_eq!(bin_center(1, &unit_bins(10)), 0.5);
        assert_eq!(bin_center(10, &unit_bins(10)), 9.5);
        let fine = BinLayout::with_bins(0.05, 4).unwrap();
        assert!((bin_center(1, &fine) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn ring_radius_cases() {
        assert_eq!(ring_radius(5.0, 5.0), 0.0);
        assert!((ring_radius(6.0, 5.0) - 11f64.sqrt()).abs() < 1e-12);
        assert_eq!(ring_radius(13.0, 5.0), 12.0);
    }

    #[test]
    fn ring_areas_match_annulus_oracle() {
        let l = unit_bins(40);
        for n in 1..=5 {
            assert_eq!(ring_area(n, &l, 5.0), 0.0);
        }
        assert!((ring_area(6, &l, 5.0) - PI * 11.0).abs() < 1e-9);
        assert!((ring_area(7, &l, 5.0) - PI * 13.0).abs() < 1e-9);
        // Annulus between projected radii r_7 = sqrt(24) and r_8 = sqrt(39).
        assert!((ring_area(8, &l, 5.0) - PI * 15.0).abs() < 1e-9);
        let mut sum = 0.0;
        for n in 1..=40 {
            sum += ring_area(n, &l, 5.0);
            let r = ring_radius(l.edge(n), 5.0);
            assert!((sum - PI * r * r).abs() <= 1e-9 * (1.0 + sum));
        }
    }

    #[test]
    fn ring_grazing_cases() {
        assert!((ring_grazing_between(5.0, 6.0, 5.0) - 1.141_096_660_643_472).abs() < 1e-12);
        assert_eq!(ring_grazing_between(4.2, 5.2, 5.0), FRAC_PI_2);
        assert_eq!(ring_grazing(5, &unit_bins(10), 5.0), 0.0);
        let l = BinLayout::with_bins(0.25, 200).unwrap();
        let mut prev = FRAC_PI_2;
        for n in l.bins() {
            let g = ring_grazing(n, &l, 5.0);
            if g > 0.0 {
                assert!(g <= prev);
                prev = g;
            }
        }
    }

    #[test]
    fn pitch_rotation_examples() {
        let v = Vec3::new(0.3, -1.2, 2.5);
        assert_eq!(rotate_to_sonar_frame(v, 0.0), v);
        let r = rotate_to_sonar_frame(Vec3::new(1.0, 0.0, 0.0), FRAC_PI_2);
        assert!(r.x.abs() < 1e-15 && r.y == 0.0 && (r.z + 1.0).abs() < 1e-15);
        let back = rotate_to_sonar_frame(rotate_to_sonar_frame(v, 0.7), -0.7);
        assert!((back - v).norm() < 1e-12);
    }

    #[test]
    fn beam_angle_conventions() {
        let q = PI / 4.0;
        assert_eq!(beam_angles_surface(Vec3::new(1.0, 0.0, 0.0)), (0.0, 0.0));
        let (t, p) = beam_angles_surface(Vec3::new(1.0, 1.0, 0.0));
        assert!((t - q).abs() < 1e-15 && p == 0.0);
        let (t, p) = beam_angles_surface(Vec3::new(1.0, 0.0, 1.0));
        assert!(t == 0.0 && (p - q).abs() < 1e-15);
        assert_eq!(beam_angles_volume(Vec3::new(1.0, 0.0, 0.0)), (0.0, 0.0));
        let (t, p) = beam_angles_volume(Vec3::new(1.0, 0.0, 1.0));
        assert!(t == 0.0 && (p - q).abs() < 1e-15);
        let diag = Vec3::new(1.0, 1.0, 1.0);
        let (tv, pv) = beam_angles_volume(diag);
        assert!((tv - q).abs() < 1e-15 && (pv - q).abs() < 1e-15);
        let (ts, ps) = beam_angles_surface(diag);
        assert!((ts - q).abs() < 1e-15 && (ps - (1.0 / 2f64.sqrt()).atan()).abs() < 1e-15);
        // Behind the face maps outside the front hemisphere.
        let (t, _) = beam_angles_surface(Vec3::new(-1.0, 0.1, 0.0));
        assert!(t.abs() > FRAC_PI_2);
    }

    /// Monte-Carlo volume of the slab `-h_d <= z <= h` inside the shell.
    fn slab_shell_oracle(lo: f64, hi: f64, h: f64, h_d: f64, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inside = 0usize;
        for _ in 0..samples {
            let p = Vec3::new(
                rng.random_range(-hi..hi),
                rng.random_range(-hi..hi),
                rng.random_range(-hi..hi),
            );
            let r = p.norm();
            if r > lo && r <= hi && p.z <= h && p.z >= -h_d {
                inside += 1;
            }
        }
        (2.0 * hi).powi(3) * inside as f64 / samples as f64
    }

    #[test]
    fn shell_volume_matches_slab_oracle() {
        let l = unit_bins(40);
        // (bin, h, h_d): untouched, bottom cut only, both cut, plane inside the shell.
        for (i, &(n, h, h_d)) in [
            (10, 30.0, 30.0),
            (10, 5.0, 30.0),
            (10, 5.0, 7.0),
            (6, 5.5, 7.0),
            (20, 5.0, 7.0),
        ]
        .iter()
        .enumerate()
        {
            let exact = shell_volume(n, &l, h, h_d);
            let mc = slab_shell_oracle(l.edge(n - 1), l.edge(n), h, h_d, 1_000_000, 17 + i as u64);
            assert!(
                (exact - mc).abs() / mc < 0.01,
                "bin {n} h {h} h_d {h_d}: {exact} vs {mc}"
            );
        }
    }

    #[test]
    fn shell_volume_without_cuts_sums_to_ball() {
        let l = BinLayout::with_bins(0.25, 200).unwrap();
        assert!((shell_volume(1, &l, 1e9, 1e9) - 4.0 / 3.0 * PI * 0.25f64.powi(3)).abs() < 1e-15);
        let total: f64 = l.bins().map(|n| shell_volume(n, &l, 1e9, 1e9)).sum();
        let ball = 4.0 / 3.0 * PI * l.max_distance().powi(3);
        assert!((total - ball).abs() / ball < 1e-9);
        assert!(l.bins().all(|n| shell_volume(n, &l, 3.0, 4.0) >= 0.0));
    }

    #[test]
    fn hemispherical_cut_cases() {
        let l = unit_bins(20);
        assert_eq!(hemispherical_cut(5, &l, 5.0), 0.0);
        let partial = hemispherical_cut(6, &l, 5.0);
        assert!((partial - 2.0 / 3.0 * PI * 11f64.powf(1.5)).abs() < 1e-9);
        let through = hemispherical_cut(8, &l, 5.0);
        assert!((through - 2.0 / 3.0 * PI * (39f64.powf(1.5) - 24f64.powf(1.5))).abs() < 1e-9);
        assert!(l.bins().all(|n| hemispherical_cut(n, &l, 5.0).is_finite()));
    }

    #[test]
    fn cutoff_angle_cases() {
        // Bin 3 of 4 m bins spans (8, 12], so d_n + d_{n-1} = 20.
        let l = BinLayout::with_bins(4.0, 10).unwrap();
        let (ha, hd) = cutoff_angles(3, &l, 5.0, 25.0);
        assert!((ha - PI / 6.0).abs() < 1e-12);
        assert_eq!(hd, 0.0);
        let (ha, _) = cutoff_angles(3, &l, 10.0 - 1e-12, 100.0);
        assert!((ha - FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn volume_gate_reads_out_of_reach_planes_as_open() {
        let g = VolumeGate::at_range(3.0, 5.0, 7.0);
        assert_eq!(g, VolumeGate::OPEN);
        let g = VolumeGate::at_range(10.0, 5.0, 30.0);
        assert!((g.below - PI / 6.0).abs() < 1e-12 && g.above == FRAC_PI_2);
        assert!(VolumeGate::from_cutoffs(0.0, 0.0).is_empty());
        assert!(!VolumeGate::from_cutoffs(0.0, 0.0).admits(0.0));
    }
}
