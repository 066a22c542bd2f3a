//! Runs the uniform-price auction with purchase limit and prints the outcome
//! together with the trace (division point, price, branch).
//!
//!     cargo run --example mechanism_run

use budgetext::{AuctionInstance, Mechanism};

fn main() -> budgetext::Result<()> {
    let mechanism = Mechanism::default();
    for (v, a) in [
        (vec![4.0, 1.0], vec![2.0, 1.0]),
        (vec![5.0, 5.0, 5.0], vec![1.0, 1.0, 1.0]),
        (vec![3.0, 2.0, 1.0], vec![1.0, 1.0, 1.0]),
        (vec![9.0, 7.5, 2.0, 0.4], vec![0.3, 6.0, 1.2, 2.5]),
    ] {
        let inst = AuctionInstance::new(v, a)?;
        let run = mechanism.run(&inst)?;
        let out = &run.outcome;
        println!("v = {:?}, alpha = {:?}", inst.valuations(), inst.alphas());
        println!(
            "  k = {}, q = {:.6}, {:?}, order {:?}",
            run.trace.k, run.trace.q, run.trace.branch, run.trace.sorted_order
        );
        for j in 0..inst.n() {
            println!(
                "  bidder {j}: x = {:.6}  p = {:.6}  budget = {:.6}",
                out.allocation[j], out.payments[j], out.budgets[j]
            );
        }
        println!("  liquid welfare {:.6}", out.liquid_welfare);
    }
    Ok(())
}
