//! Expected reverberation of the first scenario split into bottom, surface
//! and volume, with the integrated beam-pattern losses behind them.

use flsim::geometry::VolumeGate;
use flsim::nullmodel::{avg_ring_bp_loss, avg_sphere_bp_loss, BeamAveraging, NullModel};
use flsim::scenario::load_scenario;

fn main() -> flsim::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/scenario1.toml"))?;
    let (sonar, pose) = (s.sonar_config(), s.pose());
    let model = NullModel::new(&s.env, &sonar, pose, s.transmitter(), s.null_model.clone())?;
    let layout = model.layout()?;
    println!(
        "c = {:.3} m/s, resolution cell {:.4} m, {} bins of {} m",
        model.sound_speed(),
        model.resolution(),
        layout.num_bins,
        layout.bin_length_m
    );
    let ret = model.expected(s.beams()[0], &layout)?;

    println!("\n bin   d_m     total    bottom   surface   volume");
    for r in ret.records.iter().filter(|r| r.bin <= 24 || r.bin % 20 == 0) {
        println!(
            "{:4} {:6.3} {:8.2} {:9.2} {:9.2} {:8.2}",
            r.bin, r.center_m, r.total, r.bottom, r.surface, r.volume
        );
    }

    let c = model.sound_speed();
    println!("\n one-way beam loss averaged over the bottom ring and the volume shell");
    for n in [21, 41, 81, 161] {
        let ring = avg_ring_bp_loss(n, &layout, &pose, s.beams()[0], &sonar, c, BeamAveraging::Linear)?;
        let d = layout.edge(n);
        let gate = VolumeGate::at_range(d, pose.altitude_m, pose.depth_m);
        let shell = avg_sphere_bp_loss(gate, &pose, s.beams()[0], &sonar, c, BeamAveraging::Linear)?;
        println!("bin {n:4} ({d:5.2} m): ring {ring:.2} dB, shell {shell:.2} dB");
    }
    Ok(())
}
