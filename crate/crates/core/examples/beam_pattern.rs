//! One-way beam pattern of the rectangular transducer: loss against azimuth
//! and elevation, and the half-power widths.

use flsim::acoustics::{beam_pattern_loss, sound_speed, EnvironmentParams, SonarConfig};

fn half_power_width(loss_at: impl Fn(f64) -> f64) -> f64 {
    // bisection for the -3 dB angle on one side of boresight
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if loss_at(mid) > -3.0103 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * lo.to_degrees()
}

fn main() -> flsim::Result<()> {
    let sonar = SonarConfig::default();
    let c = sound_speed(&EnvironmentParams::default())?;
    let db = |theta: f64, psi: f64| {
        beam_pattern_loss(theta, psi, &sonar, c)
            .db()
            .unwrap_or(f64::NEG_INFINITY)
    };

    println!(
        "wavelength {:.4} m, aperture {} x {} m",
        sonar.wavelength_m(c),
        sonar.horizontal_len_m,
        sonar.vertical_len_m
    );
    println!("horizontal -3 dB width {:.2} deg", half_power_width(|a| db(a, 0.0)));
    println!("vertical   -3 dB width {:.2} deg", half_power_width(|a| db(0.0, a)));

    println!("\n angle_deg   azimuth_db   elevation_db");
    for deg in [0.0, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 45.0, 60.0, 89.0] {
        let a = f64::to_radians(deg);
        println!("{deg:9.1}   {:10}   {:12}", fmt(db(a, 0.0)), fmt(db(0.0, a)));
    }
    println!(
        "behind the face: {}",
        beam_pattern_loss(std::f64::consts::PI, 0.0, &sonar, c)
    );
    Ok(())
}

fn fmt(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.2}")
    } else {
        "null".into()
    }
}
