//! Scene geometry the rays intersect: the sea surface at `z = 0`, a flat or
//! heightfield bottom, and placed objects. World frame is x forward, y
//! starboard, z down, with the sonar at `(0, 0, h_d)`.

use crate::error::{Error, Result};
use crate::geometry::SonarPose;
use crate::raysim::heightfield::Heightfield;
use crate::scatter::ObjectMaterial;
use crate::vec3::Vec3;

/// Hits closer than this to a ray origin are treated as self-intersections.
pub const RAY_EPSILON: f64 = 1e-9;
/// Hits at grazing angles below this are tangent and count as misses.
pub const TANGENT_GRAZING: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
    pub remaining_range_m: f64,
}

impl Ray {
    /// `direction` is normalised here.
    pub fn new(origin: Vec3, direction: Vec3, remaining_range_m: f64) -> Self {
        Ray {
            origin,
            direction: direction.normalized(),
            remaining_range_m: remaining_range_m.max(0.0),
        }
    }

    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HitKind {
    Bottom,
    Surface,
    /// Index into [`Scene::objects`].
    Object(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub kind: HitKind,
    pub distance_m: f64,
    pub point: Vec3,
    /// Unit normal facing the incoming ray.
    pub normal: Vec3,
    pub grazing_rad: f64,
    pub material: Option<ObjectMaterial>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Bottom {
    Flat { depth_m: f64 },
    Heightfield(Heightfield),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBox {
    pub min: Vec3,
    pub max: Vec3,
}

impl AxisBox {
    /// Slab-method entry distance and outward normal, or the exit when the origin is inside.
    pub fn intersect(&self, o: Vec3, d: Vec3, t_min: f64, t_max: f64) -> Option<(f64, Vec3)> {
        let (mut near, mut far) = (f64::NEG_INFINITY, f64::INFINITY);
        let (mut near_axis, mut far_axis) = (0, 0);
        let lo = [self.min.x, self.min.y, self.min.z];
        let hi = [self.max.x, self.max.y, self.max.z];
        let oo = [o.x, o.y, o.z];
        let dd = [d.x, d.y, d.z];
        for k in 0..3 {
            if dd[k] == 0.0 {
                if oo[k] < lo[k] || oo[k] > hi[k] {
                    return None;
                }
                continue;
            }
            let (mut t0, mut t1) = ((lo[k] - oo[k]) / dd[k], (hi[k] - oo[k]) / dd[k]);
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            if t0 > near {
                near = t0;
                near_axis = k;
            }
            if t1 < far {
                far = t1;
                far_axis = k;
            }
        }
        if near > far {
            return None;
        }
        let (t, axis) = if near > t_min {
            (near, near_axis)
        } else {
            (far, far_axis)
        };
        if t <= t_min || t > t_max {
            return None;
        }
        let mut n = [0.0; 3];
        n[axis] = -dd[axis].signum();
        Some((t, Vec3::new(n[0], n[1], n[2])))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    pub triangles: Vec<[Vec3; 3]>,
}

/// Möller-Trumbore ray/triangle intersection.
pub fn intersect_triangle(tri: &[Vec3; 3], o: Vec3, d: Vec3, t_min: f64, t_max: f64) -> Option<(f64, Vec3)> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = d.cross(e2);
    let det = e1.dot(p);
    if det.abs() < 1e-15 {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - tri[0];
    let u = s.dot(p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = d.dot(q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv;
    if t <= t_min || t > t_max {
        return None;
    }
    Some((t, e1.cross(e2).normalized()))
}

#[derive(Clone, Debug, PartialEq)]
pub enum Shape {
    Box(AxisBox),
    Mesh(TriangleMesh),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub shape: Shape,
    pub material: ObjectMaterial,
}

impl SceneObject {
    fn intersect(&self, o: Vec3, d: Vec3, t_min: f64, t_max: f64) -> Option<(f64, Vec3)> {
        match &self.shape {
            Shape::Box(b) => b.intersect(o, d, t_min, t_max),
            Shape::Mesh(m) => m
                .triangles
                .iter()
                .filter_map(|tri| intersect_triangle(tri, o, d, t_min, t_max))
                .min_by(|a, b| a.0.total_cmp(&b.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub surface: bool,
    pub bottom: Option<Bottom>,
    pub objects: Vec<SceneObject>,
}

impl Scene {
    /// Flat bottom at `h_d + h` under the pose, with the surface present.
    pub fn flat(pose: &SonarPose) -> Self {
        Scene {
            surface: true,
            bottom: Some(Bottom::Flat {
                depth_m: pose.depth_m + pose.altitude_m,
            }),
            objects: Vec::new(),
        }
    }

    /// No boundaries at all: rays only ever see the water column.
    pub fn open_water() -> Self {
        Scene {
            surface: false,
            bottom: None,
            objects: Vec::new(),
        }
    }

    pub fn with_object(mut self, shape: Shape, material: ObjectMaterial) -> Self {
        self.objects.push(SceneObject { shape, material });
        self
    }

    /// Checks the bottom lies below both the surface and the sonar.
    pub fn validate(&self, pose: &SonarPose) -> Result<()> {
        match &self.bottom {
            Some(Bottom::Flat { depth_m }) => {
                if !(depth_m.is_finite() && *depth_m > pose.depth_m) {
                    return Err(Error::validation(
                        "scene.bottom.depth_m",
                        format!("must lie below the sonar at {} m, got {depth_m}", pose.depth_m),
                    ));
                }
            }
            Some(Bottom::Heightfield(hf)) => {
                let under = hf.depth_at(0.0, 0.0);
                if under <= pose.depth_m {
                    return Err(Error::validation(
                        "scene.bottom",
                        format!("depth {under} m under the sonar is not below it"),
                    ));
                }
            }
            None => {}
        }
        for (i, obj) in self.objects.iter().enumerate() {
            obj.material
                .validate()
                .map_err(|e| e.within(&format!("scene.objects[{i}].material")))?;
            let finite = match &obj.shape {
                Shape::Box(b) => {
                    b.min.is_finite()
                        && b.max.is_finite()
                        && b.min.x <= b.max.x
                        && b.min.y <= b.max.y
                        && b.min.z <= b.max.z
                }
                Shape::Mesh(m) => !m.triangles.is_empty() && m.triangles.iter().flatten().all(|v| v.is_finite()),
            };
            if !finite {
                return Err(Error::validation(
                    format!("scene.objects[{i}]"),
                    "geometry must be finite and non-degenerate",
                ));
            }
        }
        Ok(())
    }

    /// Nearest intersection within the ray's remaining range, or `None` for a miss.
    pub fn trace(&self, ray: &Ray) -> Option<Hit> {
        let (o, d, t_max) = (ray.origin, ray.direction, ray.remaining_range_m);
        let mut best: Option<(f64, Vec3, HitKind)> = None;
        let mut consider = |t: f64, n: Vec3, kind: HitKind| {
            if t > RAY_EPSILON && t <= t_max && best.is_none_or(|b| t < b.0) {
                best = Some((t, n, kind));
            }
        };
        if self.surface && d.z < 0.0 {
            consider(-o.z / d.z, Vec3::new(0.0, 0.0, 1.0), HitKind::Surface);
        }
        match &self.bottom {
            Some(Bottom::Flat { depth_m }) if d.z > 0.0 => {
                consider((depth_m - o.z) / d.z, Vec3::new(0.0, 0.0, -1.0), HitKind::Bottom);
            }
            Some(Bottom::Heightfield(hf)) => {
                if let Some((t, n)) = hf.intersect(o, d, RAY_EPSILON, t_max) {
                    consider(t, n, HitKind::Bottom);
                }
            }
            _ => {}
        }
        for (i, obj) in self.objects.iter().enumerate() {
            if let Some((t, n)) = obj.intersect(o, d, RAY_EPSILON, t_max) {
                consider(t, n, HitKind::Object(i));
            }
        }
        let (t, n, kind) = best?;
        let cos_inc = d.dot(n);
        let grazing = cos_inc.abs().min(1.0).asin();
        if grazing < TANGENT_GRAZING {
            return None;
        }
        let normal = if cos_inc > 0.0 { -n } else { n };
        let material = match kind {
            HitKind::Object(i) => Some(self.objects[i].material),
            _ => None,
        };
        Some(Hit {
            kind,
            distance_m: t,
            point: ray.at(t),
            normal,
            grazing_rad: grazing,
            material,
        })
    }
}

/// Trace one ray through the scene.
pub fn trace_ray(scene: &Scene, ray: &Ray) -> Option<Hit> {
    scene.trace(ray)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn pose() -> SonarPose {
        SonarPose {
            altitude_m: 5.0,
            depth_m: 7.0,
            pitch_rad: 0.0,
        }
    }

    #[test]
    fn vertical_rays_hit_bottom_and_surface() {
        let scene = Scene::flat(&pose());
        let sonar = Vec3::new(0.0, 0.0, 7.0);
        let down = scene.trace(&Ray::new(sonar, Vec3::new(0.0, 0.0, 1.0), 50.0)).unwrap();
        assert_eq!(down.kind, HitKind::Bottom);
        assert!((down.distance_m - 5.0).abs() < 1e-12);
        assert!((down.grazing_rad - FRAC_PI_2).abs() < 1e-12);
        let up = scene.trace(&Ray::new(sonar, Vec3::new(0.0, 0.0, -1.0), 50.0)).unwrap();
        assert_eq!(up.kind, HitKind::Surface);
        assert!((up.distance_m - 7.0).abs() < 1e-12);
    }

    #[test]
    fn range_limit_and_tangent_rays_miss() {
        let scene = Scene::flat(&pose());
        let sonar = Vec3::new(0.0, 0.0, 7.0);
        assert!(scene.trace(&Ray::new(sonar, Vec3::new(0.0, 0.0, 1.0), 4.9)).is_none());
        assert!(scene.trace(&Ray::new(sonar, Vec3::new(1.0, 0.0, 0.0), 1e6)).is_none());
    }

    #[test]
    fn box_hit_matches_slab_oracle() {
        // Box face at x = 35 spanning the horizontal ray's path at 45 degrees azimuth.
        let b = AxisBox {
            min: Vec3::new(35.0, 30.0, 5.0),
            max: Vec3::new(40.0, 40.0, 9.0),
        };
        let scene = Scene::flat(&pose()).with_object(Shape::Box(b), ObjectMaterial::default());
        let d = Vec3::new(1.0, 1.0, 0.0);
        let hit = scene.trace(&Ray::new(Vec3::new(0.0, 0.0, 7.0), d, 100.0)).unwrap();
        // x reaches 35 at t = 35 sqrt 2, y = 35 is already inside [30, 40]
        assert_eq!(hit.kind, HitKind::Object(0));
        assert!((hit.distance_m - 35.0 * 2f64.sqrt()).abs() < 1e-9);
        assert!((hit.grazing_rad - FRAC_PI_2 / 2.0).abs() < 1e-12);
        assert!(hit.normal.x < 0.0);
    }

    #[test]
    fn triangle_hit() {
        let tri = [
            Vec3::new(10.0, -1.0, 6.0),
            Vec3::new(10.0, 1.0, 6.0),
            Vec3::new(10.0, 0.0, 8.0),
        ];
        let scene = Scene::open_water().with_object(
            Shape::Mesh(TriangleMesh { triangles: vec![tri] }),
            ObjectMaterial::default(),
        );
        let hit = scene
            .trace(&Ray::new(Vec3::new(0.0, 0.0, 7.0), Vec3::new(1.0, 0.0, 0.0), 50.0))
            .unwrap();
        assert!((hit.distance_m - 10.0).abs() < 1e-12);
        assert!((hit.normal.x + 1.0).abs() < 1e-12);
    }

    #[test]
    fn validation_catches_bottom_above_sonar() {
        let mut scene = Scene::flat(&pose());
        scene.bottom = Some(Bottom::Flat { depth_m: 6.0 });
        assert!(scene.validate(&pose()).is_err());
        assert!(Scene::flat(&pose()).validate(&pose()).is_ok());
    }
}
