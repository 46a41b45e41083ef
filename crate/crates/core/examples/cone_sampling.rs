//! Launching rays only inside a cone around the beam gives the same expected
//! bottom return as sampling the whole sphere with a quarter of the rays, as
//! long as the cone covers the beam. Returns from outside the cone, such as the
//! bottom directly below, are lost.

use flsim::raysim::{mean_over_pings, RaySampling};
use flsim::runner::{null_returns, simulator};
use flsim::scenario::load_scenario;
use flsim::Level;

fn main() -> flsim::Result<()> {
    let mut s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/scenario1.toml"))?;
    s.scene.surface = false;
    s.simulation.volume = false;
    s.null_model.surface = false;
    s.null_model.volume = false;
    let expected = &null_returns(&s)?[0];

    let mean = |s: &flsim::scenario::Scenario, pings: u64| -> flsim::Result<Vec<f64>> {
        let sim = simulator(s)?;
        let runs: Vec<_> = (0..pings).map(|p| sim.ping(7, p)).collect();
        Ok(mean_over_pings(&runs)?[0].bottom.clone())
    };
    s.sonar.num_rays = 20_000;
    let sphere = mean(&s, 20)?;
    s.simulation.sampling = RaySampling::Cone { half_angle_deg: 60.0 };
    s.sonar.num_rays = 5_000;
    let cone = mean(&s, 20)?;

    println!(" bin   d_m   expected   sphere 20k   cone60 5k");
    for n in (31..=161).step_by(10) {
        println!(
            "{n:4} {:6.2} {:9.2} {:11.2} {:11.2}",
            expected.records[n - 1].center_m,
            expected.records[n - 1].bottom,
            Level::from_linear(sphere[n - 1]),
            Level::from_linear(cone[n - 1])
        );
    }
    Ok(())
}
