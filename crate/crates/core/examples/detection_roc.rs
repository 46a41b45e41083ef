//! Receiver operating characteristic of the Gaussian-in-dB ratio test, checked
//! against simulation, then the detector run on a ping over the stepped bottom.

use flsim::detect::{monte_carlo_pd_pfa, GaussianDb};
use flsim::runner::detect;
use flsim::scenario::load_scenario;

fn main() -> flsim::Result<()> {
    let model = GaussianDb {
        sigma_db: 5.0,
        alt_offset_db: 10.0,
    };
    println!("   gamma      pd       pfa    | mc pd    mc pfa");
    for gamma in [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let (pd, pfa) = model.pd_pfa(gamma);
        let mc = monte_carlo_pd_pfa(gamma, &model, 100_000, 3);
        println!("{gamma:8.2}  {pd:8.5}  {pfa:8.5}  | {:7.5}  {:7.5}", mc.pd, mc.pfa);
    }

    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/scenario2.toml"))?;
    println!("\nscenario2 at gamma = {}", s.detection.gamma);
    for r in &detect(&s)?[0] {
        let bins: Vec<_> = r.detections().collect();
        println!(
            "beam {}: detections at bins {bins:?}, {} bins excluded",
            r.beam_id,
            r.excluded()
        );
    }
    Ok(())
}
