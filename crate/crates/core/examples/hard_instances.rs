//! The two-bidder family behind the one-half ceiling for truthful mechanisms,
//! and how this mechanism fares on it.
//!
//!     cargo run --example hard_instances

use budgetext::model::liquid_welfare;
use budgetext::verify::{approximation_ratio, hard_instance_pair, upper_bound_rho};
use budgetext::{optimal_allocation, Mechanism};

fn main() -> budgetext::Result<()> {
    let m = Mechanism::default();
    println!(
        "{:>10} {:>10} {:>12} {:>12}",
        "alpha1", "rho bound", "ratio high", "ratio low"
    );
    for alpha1 in [2.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6] {
        let (high, low) = hard_instance_pair(alpha1)?;
        let mut ratios = [0.0; 2];
        for (r, inst) in ratios.iter_mut().zip([&high, &low]) {
            let (opt, _) = optimal_allocation(inst);
            let (alg, _) = m.allocate(inst)?;
            *r = approximation_ratio(liquid_welfare(inst, &alg)?, liquid_welfare(inst, &opt)?);
        }
        println!(
            "{alpha1:>10.0e} {:>10.5} {:>12.5} {:>12.5}",
            upper_bound_rho(alpha1)?,
            ratios[0],
            ratios[1]
        );
    }
    Ok(())
}
