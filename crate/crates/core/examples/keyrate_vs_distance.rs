//! Secret key rates vs transmission distance: worst channel, best channel,
//! plan total, and the single-channel reference, plus cutoff distances.
//!
//! ```bash
//! cargo run --example keyrate_vs_distance
//! ```

use subcarrier_cvqkd::intermod::ModulationConfig;
use subcarrier_cvqkd::security::{
    channel_key_rate, single_channel_key_rate, total_key_rate, DetectorModel, LinkModel,
    ProtocolParams,
};
use subcarrier_cvqkd::spectrum::ChannelPlan;

fn main() -> subcarrier_cvqkd::Result<()> {
    let params = ProtocolParams::default();
    let det = DetectorModel::default();
    let cfg = ModulationConfig::new(0.01, params.mod_variance(), 0.01)?;
    let eps = 0.02;

    let plan = ChannelPlan::high();
    let n = plan.n_channels();
    println!("plan: {} (N={n}), mbar={}, eps={eps}\n", plan.label(), cfg.mean_index());
    println!("  L (km)    R_k1 (bit/s)    R_kN (bit/s)    R_tot (bit/s)    R_sc (bit/s)");
    for l in [0.0, 20.0, 40.0, 60.0, 80.0, 100.0, 105.0, 110.0] {
        let link = LinkModel::from_distance(l, eps)?;
        let (r_tot, per) = total_key_rate(&plan, &cfg, &params, &link, &det)?;
        let sc = single_channel_key_rate(&params, &link, &det)?;
        println!(
            "{l:>8.0}    {:>12.4e}    {:>12.4e}    {:>13.4e}    {:>12.4e}",
            per[0].key_rate_bits_per_sec,
            per[n - 1].key_rate_bits_per_sec,
            r_tot,
            sc.key_rate_bits_per_sec,
        );
    }

    println!("\ncutoff distances (bisection on the bits/pulse rate):");
    for (plan, k) in [
        (ChannelPlan::high(), 1),
        (ChannelPlan::high(), 40),
        (ChannelPlan::medium(), 1),
        (ChannelPlan::medium(), 15),
        (ChannelPlan::low(), 1),
        (ChannelPlan::low(), 5),
    ] {
        let cutoff = cutoff_km(&plan, k, &cfg, &params, eps, &det)?;
        println!("  (N={:>2}, k={k:>2}) -> {cutoff:>8.3} km", plan.n_channels());
    }
    let sc_cutoff = cutoff_km(&ChannelPlan::custom(1)?, 1, &cfg, &params, eps, &det)?;
    println!("  single channel -> {sc_cutoff:>8.3} km");
    println!("\nevery subcarrier channel dies before the single-channel system;");
    println!("within a plan the last channel outlives the first.");
    Ok(())
}

fn cutoff_km(
    plan: &ChannelPlan,
    k: usize,
    cfg: &ModulationConfig,
    params: &ProtocolParams,
    eps: f64,
    det: &DetectorModel,
) -> subcarrier_cvqkd::Result<f64> {
    let rate_at = |l: f64| -> subcarrier_cvqkd::Result<f64> {
        let link = LinkModel::from_distance(l, eps)?;
        Ok(channel_key_rate(plan, k, cfg, params, &link, det)?.key_rate_bits_per_pulse)
    };
    let (mut lo, mut hi) = (0.0, 300.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if rate_at(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
