//! Single rays against a stepped heightfield, a box and a triangle, with the
//! hit distance, grazing angle and the specular bounce used for multipath.

use flsim::raysim::{specular, AxisBox, Bottom, Heightfield, Ray, Scene, Shape, TriangleMesh};
use flsim::scatter::ObjectMaterial;
use flsim::vec3::Vec3;

fn main() -> flsim::Result<()> {
    let sonar = Vec3::new(0.0, 0.0, 7.0);
    let scene = Scene {
        surface: true,
        bottom: Some(Bottom::Heightfield(Heightfield::step(35.0, 0.1, 12.0, 10.0, 60.0)?)),
        objects: Vec::new(),
    }
    .with_object(
        Shape::Box(AxisBox {
            min: Vec3::new(20.0, 2.0, 9.0),
            max: Vec3::new(21.0, 4.0, 12.0),
        }),
        ObjectMaterial::default(),
    )
    .with_object(
        Shape::Mesh(TriangleMesh {
            triangles: vec![[
                Vec3::new(15.0, -3.0, 4.0),
                Vec3::new(15.0, -1.0, 4.0),
                Vec3::new(15.0, -2.0, 6.0),
            ]],
        }),
        ObjectMaterial { rms_roughness: 3.0 },
    );

    let cases = [
        ("straight down", Vec3::new(0.0, 0.0, 1.0)),
        ("straight up", Vec3::new(0.0, 0.0, -1.0)),
        ("level, forward", Vec3::new(1.0, 0.0, 0.0)),
        ("towards the box", Vec3::new(20.0, 3.0, 3.0)),
        ("towards the triangle", Vec3::new(15.0, -2.0, -2.3)),
        ("shallow, forward", Vec3::new(1.0, 0.0, 0.14)),
    ];
    for (name, dir) in cases {
        let ray = Ray::new(sonar, dir, 49.67);
        match scene.trace(&ray) {
            Some(hit) => {
                let out = specular(ray.direction, hit.normal);
                println!(
                    "{name:22} {:?} at {:7.3} m, grazing {:5.2} deg, bounce ({:+.2}, {:+.2}, {:+.2})",
                    hit.kind,
                    hit.distance_m,
                    hit.grazing_rad.to_degrees(),
                    out.x,
                    out.y,
                    out.z
                );
            }
            None => println!("{name:22} no hit within range"),
        }
    }
    Ok(())
}
