//! Executable checks of the mechanism's guarantees.
//!
//! [`verify_instance`] runs every structural, incentive and welfare check on a
//! single instance; [`sweep`] repeats it over seeded random instances and
//! aggregates the results. [`hard_instance_pair`] and [`upper_bound_rho`]
//! expose the two-bidder family behind the one-half impossibility bound.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{instance_rng, random_instance};
use crate::mechanism::{Mechanism, PriceBranch, PURCHASE_LIMIT};
use crate::model::{liquid_welfare, AuctionInstance, Utility};
use crate::optimal::{check_opt_properties, optimal_allocation};
use crate::oracle::best_deviation;
use crate::TOL;

/// Guaranteed approximation ratio of the mechanism.
pub const APPROX_GUARANTEE: f64 = 1.0 / 3.0;

/// Grid points closer than this to another bid are moved off it.
const TIE_NUDGE: f64 = 1e-7;

/// Fractional offset that keeps grid points away from round numbers.
const GRID_PHASE: f64 = 0.381_966_011_250_105;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Monotonicity,
    BudgetFeasibility,
    Ir,
    Truthfulness,
    FullAllocation,
    PurchaseLimit,
    Eq1Bounds,
    P1p4,
    ApproxRatio,
}

impl CheckName {
    pub const ALL: [CheckName; 9] = [
        CheckName::Monotonicity,
        CheckName::BudgetFeasibility,
        CheckName::Ir,
        CheckName::Truthfulness,
        CheckName::FullAllocation,
        CheckName::PurchaseLimit,
        CheckName::Eq1Bounds,
        CheckName::P1p4,
        CheckName::ApproxRatio,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Monotonicity => "monotonicity",
            CheckName::BudgetFeasibility => "budget_feasibility",
            CheckName::Ir => "ir",
            CheckName::Truthfulness => "truthfulness",
            CheckName::FullAllocation => "full_allocation",
            CheckName::PurchaseLimit => "purchase_limit",
            CheckName::Eq1Bounds => "eq1_bounds",
            CheckName::P1p4 => "p1p4",
            CheckName::ApproxRatio => "approx_ratio",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub pass: bool,
    /// Worst value observed for the checked quantity.
    pub witness: Option<f64>,
}

impl CheckResult {
    fn new(pass: bool, witness: f64) -> Self {
        CheckResult {
            pass,
            witness: Some(witness),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub instance_id: usize,
    pub n: usize,
    pub checks: BTreeMap<CheckName, CheckResult>,
    /// Mechanism liquid welfare over optimal liquid welfare.
    pub ratio: f64,
    pub opt_lw: f64,
    pub alg_lw: f64,
    pub max_dev_gain: f64,
}

impl CheckReport {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.checks.values().filter(|c| !c.pass).count()
    }

    pub fn passed(&self, name: CheckName) -> bool {
        self.checks.get(&name).is_some_and(|c| c.pass)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Reports tried per bidder by the monotonicity and truthfulness checks.
    pub grid_size: usize,
    /// Slack for payments, utilities and deviation gains.
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grid_size: 200,
            tol: 1e-6,
        }
    }
}

/// `size` reports on `[0, 2 max v]` that avoid every other bidder's bid.
pub fn deviation_grid(instance: &AuctionInstance, bidder: usize, size: usize) -> Vec<f64> {
    let max_v = instance.valuations().iter().copied().fold(0.0, f64::max);
    let upper = if max_v > 0.0 { 2.0 * max_v } else { 1.0 };
    let others: Vec<f64> = instance
        .valuations()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != bidder)
        .map(|(_, &v)| v)
        .collect();
    (0..size)
        .map(|k| {
            let mut z = upper * (k as f64 + GRID_PHASE) / size as f64;
            for _ in 0..others.len() {
                match others.iter().find(|&&v| (z - v).abs() < TIE_NUDGE) {
                    Some(&v) => z = v + TIE_NUDGE,
                    None => break,
                }
            }
            z
        })
        .collect()
}

/// `ALG / OPT`, taken as 1 when the optimum is zero.
pub fn approximation_ratio(alg: f64, opt: f64) -> f64 {
    if opt <= 1e-12 {
        1.0
    } else {
        alg / opt
    }
}

pub fn verify_instance(instance: &AuctionInstance, config: &VerifyConfig) -> Result<CheckReport> {
    verify_with(&Mechanism::default(), instance, config)
}

pub fn verify_with(
    mechanism: &Mechanism,
    instance: &AuctionInstance,
    config: &VerifyConfig,
) -> Result<CheckReport> {
    if config.grid_size == 0 {
        return Err(Error::InvalidConfig("grid_size must be positive".into()));
    }
    let n = instance.n();
    let tol = config.tol;
    let run = mechanism.run(instance)?;
    let x = run.outcome.allocation.as_slice();
    let trace = &run.trace;
    let mut checks = BTreeMap::new();

    let total_gap = (run.outcome.allocation.total() - 1.0).abs();
    let full_witness = total_gap.max(trace.dummy_share.abs());
    checks.insert(
        CheckName::FullAllocation,
        CheckResult::new(
            total_gap <= TOL && trace.dummy_share.abs() <= 1e-12,
            full_witness,
        ),
    );

    let max_share = x.iter().copied().fold(0.0, f64::max);
    checks.insert(
        CheckName::PurchaseLimit,
        CheckResult::new(max_share <= PURCHASE_LIMIT + 1e-12, max_share),
    );

    checks.insert(
        CheckName::Eq1Bounds,
        eq1_check(instance, mechanism, x, trace),
    );

    let (opt_x, _) = optimal_allocation(instance);
    let props = check_opt_properties(instance, &opt_x)?;
    checks.insert(
        CheckName::P1p4,
        CheckResult {
            pass: props.all(),
            witness: Some(
                [props.p1, props.p2, props.p3, props.p4]
                    .iter()
                    .filter(|p| !**p)
                    .count() as f64,
            ),
        },
    );

    let opt_lw = liquid_welfare(instance, &opt_x)?;
    let alg_lw = run.outcome.liquid_welfare;
    let ratio = approximation_ratio(alg_lw, opt_lw);
    checks.insert(
        CheckName::ApproxRatio,
        CheckResult::new((APPROX_GUARANTEE - TOL..=1.0 + TOL).contains(&ratio), ratio),
    );

    let mut budget_excess = f64::NEG_INFINITY;
    let mut min_utility = f64::INFINITY;
    let mut budget_violated = false;
    for (j, (&share, &p)) in x.iter().zip(&run.outcome.payments).enumerate() {
        budget_excess = budget_excess.max(p - instance.alpha(j) * (1.0 - share));
        match crate::model::utility(instance, &run.outcome, j, instance.valuation(j))? {
            Utility::Finite(u) => min_utility = min_utility.min(u),
            Utility::BudgetViolated => budget_violated = true,
        }
    }
    checks.insert(
        CheckName::BudgetFeasibility,
        CheckResult::new(budget_excess <= tol, budget_excess),
    );
    checks.insert(
        CheckName::Ir,
        CheckResult::new(!budget_violated && min_utility >= -tol, min_utility),
    );

    let mut worst_drop = 0.0f64;
    let mut max_gain = f64::NEG_INFINITY;
    for j in 0..n {
        let grid = deviation_grid(instance, j, config.grid_size);
        let mut sorted = grid.clone();
        sorted.sort_by(f64::total_cmp);
        let mut prev = f64::NEG_INFINITY;
        for &z in &sorted {
            let share = mechanism.allocation_curve(instance, j, z)?;
            worst_drop = worst_drop.max(prev - share);
            prev = share;
        }
        let dev = best_deviation(mechanism, instance, j, instance.valuation(j), &grid)?;
        max_gain = max_gain.max(dev.gain);
    }
    checks.insert(
        CheckName::Monotonicity,
        CheckResult::new(worst_drop <= TOL, worst_drop),
    );
    checks.insert(
        CheckName::Truthfulness,
        CheckResult::new(max_gain <= tol, max_gain),
    );

    Ok(CheckReport {
        instance_id: 0,
        n,
        checks,
        ratio,
        opt_lw,
        alg_lw,
        max_dev_gain: max_gain,
    })
}

/// Bounds on the remainder bidder when the price does not exceed its value:
/// `0 <= x_{k+1} < min(alpha_{k+1} / (v_{k+1} + alpha_{k+1}), 1/2)`.
fn eq1_check(
    instance: &AuctionInstance,
    mechanism: &Mechanism,
    x: &[f64],
    trace: &crate::mechanism::MechanismTrace,
) -> CheckResult {
    if trace.branch != PriceBranch::PriceAtMostNext {
        return CheckResult {
            pass: true,
            witness: None,
        };
    }
    let next = trace.sorted_order[trace.k];
    let (share, value, alpha) = if next == instance.n() {
        (trace.dummy_share, 0.0, mechanism.dummy_alpha())
    } else {
        (x[next], instance.valuation(next), instance.alpha(next))
    };
    let bound = (alpha / (value + alpha)).min(PURCHASE_LIMIT);
    CheckResult::new(share >= -TOL && share < bound + TOL, share - bound)
}

/// Largest deviation of real-bidder allocations and payments across the given
/// dummy alphas, relative to the first.
pub fn dummy_alpha_spread(instance: &AuctionInstance, dummy_alphas: &[f64]) -> Result<f64> {
    let mut reference: Option<Vec<f64>> = None;
    let mut spread = 0.0f64;
    for &da in dummy_alphas {
        let (x, _) = Mechanism::new(da)?.allocate(instance)?;
        match &reference {
            None => reference = Some(x.into_vec()),
            Some(r) => {
                for (a, b) in r.iter().zip(x.as_slice()) {
                    spread = spread.max((a - b).abs());
                }
            }
        }
    }
    Ok(spread)
}

/// Two-bidder instances with `v_2 = alpha_2 = 1`, `alpha_1 = a`, and
/// `v_1 = a^2` or `v_1 = sqrt(a)`.
pub fn hard_instance_pair(alpha1: f64) -> Result<(AuctionInstance, AuctionInstance)> {
    if !(alpha1 > 1.0 && alpha1.is_finite()) {
        return Err(Error::Domain(format!("alpha1 must exceed 1, got {alpha1}")));
    }
    let high = AuctionInstance::new(vec![alpha1 * alpha1, 1.0], vec![alpha1, 1.0])?;
    let low = AuctionInstance::new(vec![alpha1.sqrt(), 1.0], vec![alpha1, 1.0])?;
    Ok((high, low))
}

/// Optimal liquid welfare of the two hard instances, in closed form.
pub fn hard_instance_opt(alpha1: f64) -> (f64, f64) {
    (
        (alpha1 * alpha1 + 1.0) / (alpha1 + 1.0),
        (alpha1 + 1.0) / (alpha1.sqrt() + 1.0),
    )
}

/// Ratio ceiling for any truthful mechanism on the hard pair.
///
/// Defined for `alpha1 >= 1`; equals 1 at `alpha1 = 1` and decreases to 1/2.
pub fn upper_bound_rho(alpha1: f64) -> Result<f64> {
    if !(alpha1 >= 1.0 && alpha1.is_finite()) {
        return Err(Error::Domain(format!(
            "alpha1 must be at least 1, got {alpha1}"
        )));
    }
    let a = alpha1;
    let first = (a * a + 1.0) / ((a + 1.0) * (a + 1.0));
    let s = a.sqrt() + 1.0;
    let second = (a + 1.0) / (s * s);
    Ok(1.0 / (first + second))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub trials: usize,
    pub value_range: (f64, f64),
    pub alpha_range: (f64, f64),
    pub seed: u64,
    pub grid_size: usize,
    pub tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            n_min: 2,
            n_max: 4,
            trials: 100,
            value_range: (0.0, 10.0),
            alpha_range: (0.1, 10.0),
            seed: 0,
            grid_size: 32,
            tol: 1e-6,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.n_min < 2 || self.n_max < self.n_min {
            return Err(Error::InvalidConfig(format!(
                "bidder range {}..={} must satisfy 2 <= n_min <= n_max",
                self.n_min, self.n_max
            )));
        }
        if self.grid_size == 0 {
            return Err(Error::InvalidConfig("grid_size must be positive".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }

    pub fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            grid_size: self.grid_size,
            tol: self.tol,
        }
    }

    /// Instance `id` of the sweep; depends only on the seed and `id`.
    pub fn instance(&self, id: usize) -> Result<AuctionInstance> {
        let mut rng = instance_rng(self.seed, id as u64);
        let n = rand::Rng::random_range(&mut rng, self.n_min..=self.n_max);
        random_instance(n, self.value_range, self.alpha_range, &mut rng)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub instance: AuctionInstance,
    pub report: CheckReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub min_ratio: f64,
    pub mean_ratio: f64,
    pub max_dev_gain: f64,
    /// Failed checks summed over all instances.
    pub failures: usize,
}

impl Aggregates {
    pub fn from_rows(rows: &[SweepRow]) -> Self {
        let ratios = rows.iter().map(|r| r.report.ratio);
        Aggregates {
            min_ratio: ratios.clone().fold(f64::INFINITY, f64::min),
            mean_ratio: ratios.sum::<f64>() / rows.len().max(1) as f64,
            max_dev_gain: rows
                .iter()
                .map(|r| r.report.max_dev_gain)
                .fold(f64::NEG_INFINITY, f64::max),
            failures: rows.iter().map(|r| r.report.failures()).sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    pub seed: u64,
    pub config: SweepConfig,
    pub rows: Vec<SweepRow>,
    pub aggregates: Aggregates,
}

pub fn sweep(config: &SweepConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let verify = config.verify_config();
    let mechanism = Mechanism::default();
    let rows = (0..config.trials)
        .into_par_iter()
        .map(|id| {
            let instance = config.instance(id)?;
            let mut report = verify_with(&mechanism, &instance, &verify)?;
            report.instance_id = id;
            Ok(SweepRow { instance, report })
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregates = Aggregates::from_rows(&rows);
    Ok(ExperimentReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: config.seed,
        config: config.clone(),
        rows,
        aggregates,
    })
}
