//! JSON instance files and seeded instance generation.
//!
//!     cargo run --example instance_io

use budgetext::harness::{instance_rng, instance_to_json, parse_instance, random_instance};

fn main() -> budgetext::Result<()> {
    let inst = parse_instance(r#"{"valuations":[4,1],"alphas":[2,1]}"#)?;
    println!("parsed: {}", instance_to_json(&inst));

    for text in [
        r#"{"valuations":[4],"alphas":[2]}"#,
        r#"{"valuations":[4,1],"alphas":[0,1]}"#,
    ] {
        println!("rejected {text}: {}", parse_instance(text).unwrap_err());
    }

    let mut rng = instance_rng(42, 0);
    let random = random_instance(4, (0.0, 10.0), (0.1, 10.0), &mut rng)?;
    let json = instance_to_json(&random);
    println!("random: {json}");
    assert_eq!(parse_instance(&json)?, random);
    Ok(())
}
