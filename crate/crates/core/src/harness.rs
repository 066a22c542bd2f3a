//! Instance I/O, seeded instance generation and report serialisation.
//!
//! Random instances come from ChaCha8 (`rand_chacha::ChaCha8Rng`), seeded
//! with `seed_from_u64(seed)`; instance `i` of a sweep draws from stream `i`
//! of that generator, so each instance depends only on `(seed, i)` and the
//! output is identical across platforms and thread counts.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::AuctionInstance;
use crate::verify::{CheckName, ExperimentReport};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "BUDGETEXT_THREADS";

pub fn parse_instance(text: &str) -> Result<AuctionInstance> {
    Ok(serde_json::from_str(text)?)
}

pub fn instance_to_json(instance: &AuctionInstance) -> String {
    serde_json::to_string(instance).expect("instances serialise")
}

pub fn instance_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// `n` bidders with valuations and alphas drawn i.i.d. uniformly.
pub fn random_instance(
    n: usize,
    value_range: (f64, f64),
    alpha_range: (f64, f64),
    rng: &mut impl Rng,
) -> Result<AuctionInstance> {
    if n < 2 {
        return Err(Error::TooFewBidders(n));
    }
    let (vlo, vhi) = value_range;
    if !(vlo >= 0.0 && vhi >= vlo && vhi.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "value range [{vlo}, {vhi}] must be finite and non-negative"
        )));
    }
    let (alo, ahi) = alpha_range;
    if !(alo > 0.0 && ahi >= alo && ahi.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "alpha range [{alo}, {ahi}] must be finite and positive"
        )));
    }
    let mut valuations = Vec::with_capacity(n);
    let mut alphas = Vec::with_capacity(n);
    for _ in 0..n {
        valuations.push(draw(rng, value_range));
        alphas.push(draw(rng, alpha_range));
    }
    AuctionInstance::new(valuations, alphas)
}

/// Rounds to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x)
}

/// Compact JSON with every float rounded to `digits` significant digits.
pub fn to_json_rounded<T: Serialize>(value: &T, digits: usize) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_value(&mut v, digits);
    Ok(serde_json::to_string(&v)?)
}

fn round_value(v: &mut Value, digits: usize) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num
                .as_f64()
                .and_then(|f| serde_json::Number::from_f64(round_sig(f, digits)))
            {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_value(x, digits)),
        Value::Object(map) => map.values_mut().for_each(|x| round_value(x, digits)),
        _ => {}
    }
}

/// One row per instance: `instance_id, n, ratio, max_dev_gain`, then one
/// boolean column per check.
pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["instance_id", "n", "ratio", "max_dev_gain"];
    header.extend(CheckName::ALL.iter().map(|c| c.as_str()));
    w.write_record(&header).map_err(csv_err)?;
    for row in &report.rows {
        let r = &row.report;
        let mut rec = vec![
            r.instance_id.to_string(),
            r.n.to_string(),
            r.ratio.to_string(),
            r.max_dev_gain.to_string(),
        ];
        rec.extend(CheckName::ALL.iter().map(|c| r.passed(*c).to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Installs the global thread pool size from `BUDGETEXT_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{THREADS_ENV}={raw} is not an integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidConfig(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop, prop_assert_eq, proptest};

    #[test]
    fn parse_examples() {
        let i = parse_instance(r#"{"valuations":[4,1],"alphas":[2,1]}"#).unwrap();
        assert_eq!(i.valuations(), &[4.0, 1.0]);

        let e = parse_instance(r#"{"valuations":[4],"alphas":[2]}"#).unwrap_err();
        assert!(e.to_string().contains("n < 2"), "{e}");

        let e = parse_instance(r#"{"valuations":[4,1],"alphas":[0,1]}"#).unwrap_err();
        assert!(e.to_string().contains("alpha must be positive"), "{e}");

        let e = parse_instance(r#"{"valuations":[4,1]}"#).unwrap_err();
        assert!(e.to_string().contains("alphas"), "{e}");
    }

    #[test]
    fn random_instances() {
        let a = random_instance(4, (0.0, 10.0), (0.1, 10.0), &mut instance_rng(7, 0)).unwrap();
        let b = random_instance(4, (0.0, 10.0), (0.1, 10.0), &mut instance_rng(7, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n(), 4);
        assert!(a.alphas().iter().all(|&x| (0.1..=10.0).contains(&x)));
        let c = random_instance(4, (0.0, 10.0), (0.1, 10.0), &mut instance_rng(7, 1)).unwrap();
        assert_ne!(a, c);
        assert!(random_instance(4, (0.0, 10.0), (0.0, 10.0), &mut instance_rng(7, 0)).is_err());
        assert!(random_instance(1, (0.0, 10.0), (0.1, 10.0), &mut instance_rng(7, 0)).is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.47760930285, 4), 0.4776);
        assert_eq!(round_sig(1.0 / 3.0, 12), 0.333333333333);
        let s = to_json_rounded(
            &serde_json::json!({"allocation": [0.5, 0.5000000000000001]}),
            12,
        )
        .unwrap();
        assert_eq!(s, r#"{"allocation":[0.5,0.5]}"#);
    }

    proptest! {
        #[test]
        fn json_round_trip_is_bit_exact(
            v in prop::collection::vec(0.0f64..1e6, 2..6),
            seed in any::<u64>(),
        ) {
            let mut rng = instance_rng(seed, 0);
            let alphas: Vec<f64> = v.iter().map(|_| rng.random_range(1e-3..1e3)).collect();
            let inst = AuctionInstance::new(v, alphas).unwrap();
            let back = parse_instance(&instance_to_json(&inst)).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}
