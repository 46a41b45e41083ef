//! Sound speed, absorption, transmission loss and ambient noise for the
//! bundled environment, tabulated against range and frequency.

use flsim::acoustics::{
    absorption_coeff, max_range, noise_level_band, range_resolution, sound_speed, transmission_loss, EnvironmentParams,
    NoiseComponents,
};

fn main() -> flsim::Result<()> {
    let env = EnvironmentParams::default();
    let c = sound_speed(&env)?;
    println!("sound speed          {c:.3} m/s");
    println!(
        "range resolution     {:.5} m at 50 kHz bandwidth",
        range_resolution(c, 50_000.0)
    );
    println!("max range            {:.2} m at 15 Hz ping rate", max_range(c, 15.0));

    println!("\n f_kHz   alpha_dB/km   NL_1Hz   NL_50kHz");
    for f in [10.0, 50.0, 100.0, 200.0, 450.0, 900.0] {
        let alpha = absorption_coeff(f, &env)?;
        let nl = NoiseComponents::new(f, env.wind_knots, env.shipping_density)?.total();
        println!(
            "{f:6.0}   {alpha:11.3}   {nl:6.2}   {:8.2}",
            noise_level_band(f, &env, 50_000.0)?
        );
    }

    let alpha = absorption_coeff(450.0, &env)?;
    println!("\n range_m   two-way TL at 450 kHz (dB)");
    for d in [1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 40.0, 49.0] {
        println!("{d:7.1}   {:8.2}", transmission_loss(d, alpha)?);
    }
    Ok(())
}
