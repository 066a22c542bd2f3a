//! Greedy liquid-welfare optimum, its structural certificate, and a brute-force
//! cross-check.
//!
//!     cargo run --example optimal_allocation

use budgetext::model::liquid_welfare;
use budgetext::{check_opt_properties, grid_search_lw, optimal_allocation, AuctionInstance};

fn main() -> budgetext::Result<()> {
    let cases = [
        (vec![4.0, 1.0], vec![2.0, 1.0]),
        (vec![3.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]),
        (vec![10.0, 5.0, 10.0], vec![1.0, 1.0, 0.5]),
    ];
    for (v, a) in cases {
        let inst = AuctionInstance::new(v, a)?;
        let (x, trace) = optimal_allocation(&inst);
        let lw = liquid_welfare(&inst, &x)?;
        let props = check_opt_properties(&inst, &x)?;
        let oracle = grid_search_lw(&inst, 120)?;
        println!("v = {:?}, alpha = {:?}", inst.valuations(), inst.alphas());
        println!(
            "  allocation {:.4?}  branch {:?}",
            x.as_slice(),
            trace.branch
        );
        println!(
            "  liquid welfare {lw:.6}  (grid oracle {:.6})",
            oracle.best_lw
        );
        println!("  P1-P4 hold: {}", props.all());
    }
    Ok(())
}
