//! Runs the built-in oracle suite at a reduced trial count and prints the
//! report — the same checks the `verify` subcommand executes.
//!
//! ```bash
//! cargo run --release --example verification_suite
//! ```

use subcarrier_cvqkd::verify::{run_verification, FaultInjection, VerificationConfig};

fn main() -> subcarrier_cvqkd::Result<()> {
    let config = VerificationConfig {
        trials: 100_000,
        seed: 42,
    };
    let report = run_verification(&config, &FaultInjection::none())?;
    print!("{}", report.render());

    // The suite is expected to notice a broken model: skew the pair count
    // by one and count how many checks trip.
    let skewed = run_verification(&config, &FaultInjection { m2_offset: 1 })?;
    println!(
        "\nwith an injected off-by-one in the pair count: {} checks fail",
        skewed.failures()
    );
    Ok(())
}
