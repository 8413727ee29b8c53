//! Multi-channel gain: how much the parallel channels multiply the total
//! throughput, vs modulation strength and vs distance.
//!
//! ```bash
//! cargo run --example multichannel_gain
//! ```

use subcarrier_cvqkd::intermod::ModulationConfig;
use subcarrier_cvqkd::security::{multichannel_gain, DetectorModel, LinkModel, ProtocolParams};
use subcarrier_cvqkd::spectrum::ChannelPlan;

fn main() -> subcarrier_cvqkd::Result<()> {
    let params = ProtocolParams::default();
    let det = DetectorModel::default();
    let plans = [ChannelPlan::high(), ChannelPlan::medium(), ChannelPlan::low()];

    println!("G_M vs mean modulation index at L = 50 km");
    println!("{:>8}  {:>10}  {:>10}  {:>10}", "mbar", "N=40", "N=15", "N=5");
    let link = LinkModel::from_distance(50.0, 0.02)?;
    for mbar in [0.001, 0.0025, 0.005, 0.0075, 0.01, 0.015, 0.02] {
        let cfg = ModulationConfig::new(mbar, params.mod_variance(), 0.01)?;
        print!("{mbar:>8.4}");
        for plan in &plans {
            let gm = multichannel_gain(plan, &cfg, &params, &link, &det)?.expect("R_sc > 0");
            print!("  {gm:>10.4}");
        }
        println!();
    }
    println!("for mbar <= 0.005 the gain is within 1% of the channel count\n");

    println!("G_M vs distance at mbar = 0.01");
    println!("{:>8}  {:>10}  {:>10}  {:>10}", "L (km)", "N=40", "N=15", "N=5");
    let cfg = ModulationConfig::new(0.01, params.mod_variance(), 0.01)?;
    for l in [0.0, 20.0, 40.0, 60.0, 80.0, 90.0, 100.0, 105.0, 107.0, 108.0] {
        let link = LinkModel::from_distance(l, 0.02)?;
        print!("{l:>8.0}");
        for plan in &plans {
            match multichannel_gain(plan, &cfg, &params, &link, &det)? {
                Some(gm) => print!("  {gm:>10.4}"),
                None => print!("  {:>10}", "undefined"),
            }
        }
        println!();
    }
    println!("the gain decays with distance and hits 0 at each plan's total-rate cutoff;");
    println!("past the single-channel cutoff the reference rate is 0 and G_M is undefined.");
    Ok(())
}
