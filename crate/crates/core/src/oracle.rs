//! Brute-force validators: an exhaustive simplex search for the liquid
//! welfare optimum and a misreport search against the mechanism.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanism::Mechanism;
use crate::model::{liquid_welfare_raw, Allocation, AuctionInstance, Utility};

pub const MAX_ORACLE_BIDDERS: usize = 5;
pub const MIN_RESOLUTION: usize = 10;

/// Smallest exchange step tried by the local refinement.
const MIN_STEP: f64 = 1e-6;
/// Cap on accepted moves per step size.
const MAX_MOVES_PER_STEP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub best_allocation: Allocation,
    pub best_lw: f64,
    pub resolution: usize,
    /// Whether the local refinement improved on the best grid point.
    pub refined: bool,
}

#[derive(Clone)]
struct Best {
    lw: f64,
    counts: Vec<usize>,
}

impl Best {
    fn better_than(&self, other: &Best) -> bool {
        self.lw > other.lw || (self.lw == other.lw && self.counts < other.counts)
    }
}

/// Best allocation on the grid `x_i = k_i / m`, `sum k_i = m`, followed by a
/// pairwise exchange refinement from the best grid point.
pub fn grid_search_lw(instance: &AuctionInstance, resolution: usize) -> Result<OracleResult> {
    let n = instance.n();
    if n > MAX_ORACLE_BIDDERS {
        return Err(Error::OracleTooLarge(n));
    }
    if resolution < MIN_RESOLUTION {
        return Err(Error::ResolutionTooSmall(resolution));
    }
    let m = resolution;
    let values = instance.valuations();
    let alphas = instance.alphas();

    let best = (0..=m)
        .into_par_iter()
        .map(|first| {
            let mut counts = vec![0; n];
            counts[0] = first;
            let mut x = vec![0.0; n];
            let mut best = Best {
                lw: f64::NEG_INFINITY,
                counts: Vec::new(),
            };
            enumerate(
                values,
                alphas,
                m,
                1,
                m - first,
                &mut counts,
                &mut x,
                &mut best,
            );
            best
        })
        .reduce_with(|a, b| if b.better_than(&a) { b } else { a })
        .expect("grid is non-empty");

    let mut x: Vec<f64> = best.counts.iter().map(|&c| c as f64 / m as f64).collect();
    let mut lw = liquid_welfare_raw(values, alphas, &x);
    let grid_lw = lw;
    refine(values, alphas, 1.0 / m as f64, &mut x, &mut lw);

    Ok(OracleResult {
        best_allocation: Allocation::new(x)?,
        best_lw: lw,
        resolution: m,
        refined: lw > grid_lw,
    })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    values: &[f64],
    alphas: &[f64],
    m: usize,
    pos: usize,
    left: usize,
    counts: &mut [usize],
    x: &mut [f64],
    best: &mut Best,
) {
    let n = counts.len();
    if pos == n - 1 {
        counts[pos] = left;
        for (xi, &c) in x.iter_mut().zip(counts.iter()) {
            *xi = c as f64 / m as f64;
        }
        let lw = liquid_welfare_raw(values, alphas, x);
        if lw > best.lw {
            best.lw = lw;
            best.counts = counts.to_vec();
        }
        return;
    }
    for c in 0..=left {
        counts[pos] = c;
        enumerate(values, alphas, m, pos + 1, left - c, counts, x, best);
    }
}

fn refine(values: &[f64], alphas: &[f64], start: f64, x: &mut [f64], lw: &mut f64) {
    let n = x.len();
    let mut step = start;
    let mut trial = x.to_vec();
    while step >= MIN_STEP {
        let mut moves = 0;
        loop {
            let mut improved = false;
            for to in 0..n {
                for from in 0..n {
                    if to == from || x[from] < step {
                        continue;
                    }
                    trial.copy_from_slice(x);
                    trial[to] += step;
                    trial[from] -= step;
                    let candidate = liquid_welfare_raw(values, alphas, &trial);
                    if candidate > *lw {
                        x.copy_from_slice(&trial);
                        *lw = candidate;
                        improved = true;
                        moves += 1;
                    }
                }
            }
            if !improved || moves >= MAX_MOVES_PER_STEP {
                break;
            }
        }
        step *= 0.5;
    }
}

/// Most profitable misreport found on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Deviation {
    pub best_misreport: f64,
    /// Utility at the best misreport minus truthful utility.
    pub gain: f64,
    pub truthful_utility: f64,
}

/// Searches `grid` for a report that beats reporting `true_value` for
/// `bidder`, the others reporting as in `instance`.
pub fn best_deviation(
    mechanism: &Mechanism,
    instance: &AuctionInstance,
    bidder: usize,
    true_value: f64,
    grid: &[f64],
) -> Result<Deviation> {
    instance.check_index(bidder)?;
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty misreport grid".into()));
    }
    if let Some(&bad) = grid.iter().find(|&&b| !(b >= 0.0 && b.is_finite())) {
        return Err(Error::NegativeValuation {
            index: bidder,
            value: bad,
        });
    }
    let truthful = instance.with_valuation(bidder, true_value)?;
    let truthful_utility = match mechanism
        .bidder_outcome(&truthful, bidder)?
        .utility(true_value)
    {
        Utility::Finite(u) => u,
        Utility::BudgetViolated => {
            return Err(Error::Numerical(format!(
                "truthful report of bidder {bidder} exceeds its budget"
            )))
        }
    };

    let mut best = Deviation {
        best_misreport: grid[0],
        gain: f64::NEG_INFINITY,
        truthful_utility,
    };
    for &report in grid {
        let profile = truthful.with_valuation(bidder, report)?;
        let u = mechanism
            .bidder_outcome(&profile, bidder)?
            .utility(true_value);
        if let Utility::Finite(u) = u {
            let gain = u - truthful_utility;
            if gain > best.gain {
                best.gain = gain;
                best.best_misreport = report;
            }
        }
    }
    Ok(best)
}
