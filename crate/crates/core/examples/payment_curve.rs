//! Traces one bidder's allocation curve and shows how the Myerson payment is
//! the area above it.
//!
//!     cargo run --example payment_curve

use budgetext::{AuctionInstance, Mechanism};

fn main() -> budgetext::Result<()> {
    let inst = AuctionInstance::new(vec![5.0, 5.0, 5.0], vec![1.0, 1.0, 1.0])?;
    let m = Mechanism::default();

    println!("bidder 0's share as its report z varies, others bid 5:");
    for step in 0..=12 {
        let z = step as f64 * 0.5;
        println!(
            "  z = {z:>4.1}  x = {:.6}",
            m.allocation_curve(&inst, 0, z)?
        );
    }

    let p = m.myerson_payment(&inst, 0)?;
    let closed_form = 2.0 * 1.5f64.ln() - 1.0 / 3.0;
    println!("payment {p:.9}, closed form 2 ln(3/2) - 1/3 = {closed_form:.9}");
    Ok(())
}
