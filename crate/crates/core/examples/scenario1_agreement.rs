//! Mean of 50 simulated pings against the expected return for the flat-bottom
//! scenario, and the spread across pings at near and far range.

use flsim::runner::{compare, simulate};
use flsim::scenario::load_scenario;

fn main() -> flsim::Result<()> {
    let s = load_scenario(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/scenario1.toml"))?;
    let t = std::time::Instant::now();
    let cmp = compare(&s)?;
    println!(
        "{} pings of {} rays in {:.2?}",
        s.run.num_pings,
        s.sonar.num_rays,
        t.elapsed()
    );
    println!(
        "{}: {} bins checked in {}-{} m, worst gap {:.2} dB",
        if cmp.passed() { "agree" } else { "DISAGREE" },
        cmp.checked_bins(),
        s.compare.min_range_m,
        s.compare.max_range_m,
        cmp.worst_gap_db()
    );
    println!("\n bin    d_m   expected   simulated    gap");
    for r in cmp.beams[0]
        .rows
        .iter()
        .filter(|r| r.bin % 8 == 5 || (19..=23).contains(&r.bin))
    {
        let gap = r.gap_db.map_or("-".into(), |g| format!("{g:+.2}"));
        println!(
            "{:4} {:6.2} {:10.2} {:11.2} {:>6}",
            r.bin, r.center_m, r.expected, r.simulated, gap
        );
    }

    // coefficient of variation across pings, per bin, averaged over a window
    let pings = simulate(&s)?;
    let layout = pings[0].layout;
    let cv = |lo: f64, hi: f64| {
        let mut acc = (0.0, 0);
        for n in layout.bins().filter(|&n| layout.edge(n) > lo && layout.edge(n) <= hi) {
            let v: Vec<f64> = pings.iter().map(|p| p.beams[0].total[n - 1]).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            if mean > 0.0 {
                acc.0 += var.sqrt() / mean;
                acc.1 += 1;
            }
        }
        acc.0 / acc.1 as f64
    };
    println!(
        "\nspread/mean across pings: 5-15 m {:.3}, 30-40 m {:.3}",
        cv(5.0, 15.0),
        cv(30.0, 40.0)
    );
    Ok(())
}
