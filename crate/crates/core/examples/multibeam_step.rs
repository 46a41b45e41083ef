//! Three receive beams over a bottom that rises 2 m at 35 m: onset spikes from
//! the bottom and the surface, the step echo, and the near-range loss of the
//! off-axis beams under a forward transmitter.

use flsim::runner::{null_returns, simulate};
use flsim::scenario::load_scenario;
use flsim::Level;

fn main() -> flsim::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/scenario2.toml"))?;
    let nulls = null_returns(&s)?;
    let ping = &simulate(&s)?[0];
    let layout = ping.layout;
    let names = ["forward", "down 20", "up 20"];

    println!("   d_m  | {:^19} | {:^19} | {:^19}", names[0], names[1], names[2]);
    println!("        |   sim      expected |   sim      expected |   sim      expected");
    let show = |n: usize| (19..=30).contains(&n) || (139..=143).contains(&n) || n.is_multiple_of(20);
    for n in layout.bins().filter(|&n| show(n)) {
        print!("{:7.3} ", layout.edge(n) - 0.5 * layout.bin_length_m);
        for (b, null) in ping.beams.iter().zip(&nulls) {
            print!(
                "| {:8.2} {:9.2} ",
                Level::from_linear(b.total[n - 1]),
                null.records[n - 1].total
            );
        }
        println!();
    }

    let step = layout
        .bins()
        .filter(|&n| layout.edge(n) > 34.0 && layout.edge(n) <= 36.5);
    let peak = step
        .max_by(|&a, &b| ping.beams[0].total[a - 1].total_cmp(&ping.beams[0].total[b - 1]))
        .unwrap();
    let excess = Level::from_linear(ping.beams[0].total[peak - 1]).db().unwrap()
        - nulls[0].records[peak - 1].total.db().unwrap();
    println!(
        "\nstep echo in bin {peak} ({:.2} m) is {excess:.1} dB above the expected return",
        layout.edge(peak)
    );
    Ok(())
}
