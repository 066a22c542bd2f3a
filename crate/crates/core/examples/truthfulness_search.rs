//! Searches for profitable misreports. Every gain printed should be at most
//! zero up to quadrature error.
//!
//!     cargo run --example truthfulness_search

use budgetext::verify::deviation_grid;
use budgetext::{best_deviation, AuctionInstance, Mechanism};

fn main() -> budgetext::Result<()> {
    let inst = AuctionInstance::new(vec![6.0, 4.5, 2.0, 1.0], vec![1.0, 3.0, 0.5, 2.0])?;
    let m = Mechanism::default();
    for j in 0..inst.n() {
        let grid = deviation_grid(&inst, j, 200);
        let d = best_deviation(&m, &inst, j, inst.valuation(j), &grid)?;
        println!(
            "bidder {j} (v = {}): truthful utility {:.6}, best misreport {:.4} gains {:.3e}",
            inst.valuation(j),
            d.truthful_utility,
            d.best_misreport,
            d.gain
        );
    }
    Ok(())
}
