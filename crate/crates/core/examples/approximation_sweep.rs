//! Verifies seeded random instances and writes the per-instance CSV report.
//!
//!     cargo run --release --example approximation_sweep -- [trials] [seed]

use budgetext::harness::write_csv;
use budgetext::verify::{sweep, SweepConfig};

fn main() -> budgetext::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(7);

    let config = SweepConfig {
        trials,
        seed,
        grid_size: 16,
        ..SweepConfig::default()
    };
    let report = sweep(&config)?;
    let agg = &report.aggregates;
    eprintln!(
        "{trials} instances: min ratio {:.4}, mean ratio {:.4}, max deviation gain {:.2e}, failed checks {}",
        agg.min_ratio, agg.mean_ratio, agg.max_dev_gain, agg.failures
    );
    write_csv(&report, std::io::stdout().lock())
}
