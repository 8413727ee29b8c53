//! Source-noise ratio of the first and last channel as the mean modulation
//! index grows, for the three canonical plans.
//!
//! ```bash
//! cargo run --example noise_vs_modulation
//! ```

use subcarrier_cvqkd::intermod::{intermod_noise_ratio, ModulationConfig};
use subcarrier_cvqkd::spectrum::ChannelPlan;

fn main() -> subcarrier_cvqkd::Result<()> {
    let plans = [ChannelPlan::high(), ChannelPlan::medium(), ChannelPlan::low()];

    println!("eps_S/V_A for k=1 / k=N       (ratio scales as mbar^2)\n");
    print!("{:>7}", "mbar");
    for plan in &plans {
        print!("   {:>11} (N={:<2})", plan.label(), plan.n_channels());
    }
    println!();

    for i in 0..=10 {
        let mbar = 0.002 * i as f64 + 0.002;
        print!("{mbar:>7.4}");
        for plan in &plans {
            let cfg = ModulationConfig::new(mbar, 10.0, 0.01)?;
            let first = intermod_noise_ratio(plan, 1, &cfg)?;
            let last = intermod_noise_ratio(plan, plan.n_channels(), &cfg)?;
            print!("   {first:.2e}/{last:.2e}");
        }
        println!();
    }

    println!(
        "\ncurves order as (40,1) > (40,40) > (15,1) > (15,15) > (5,1) > (5,5) at every mbar"
    );
    Ok(())
}
