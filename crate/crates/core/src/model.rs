//! Instances, allocations, budgets and the welfare measures built on them.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::TOL;

/// Bidders' valuations and budget impact factors.
///
/// A bid profile is represented by the same type: replace the valuations with
/// the reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct AuctionInstance {
    valuations: Vec<f64>,
    alphas: Vec<f64>,
}

#[derive(Deserialize)]
struct RawInstance {
    valuations: Vec<f64>,
    alphas: Vec<f64>,
}

impl TryFrom<RawInstance> for AuctionInstance {
    type Error = Error;

    fn try_from(raw: RawInstance) -> Result<Self> {
        AuctionInstance::new(raw.valuations, raw.alphas)
    }
}

impl AuctionInstance {
    pub fn new(valuations: Vec<f64>, alphas: Vec<f64>) -> Result<Self> {
        if valuations.len() != alphas.len() {
            return Err(Error::LengthMismatch {
                valuations: valuations.len(),
                alphas: alphas.len(),
            });
        }
        if valuations.len() < 2 {
            return Err(Error::TooFewBidders(valuations.len()));
        }
        for (index, &value) in valuations.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    field: "valuations",
                    index,
                });
            }
            if value < 0.0 {
                return Err(Error::NegativeValuation { index, value });
            }
        }
        for (index, &value) in alphas.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    field: "alphas",
                    index,
                });
            }
            if value <= 0.0 {
                return Err(Error::NonPositiveAlpha { index, value });
            }
        }
        Ok(AuctionInstance { valuations, alphas })
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn valuation(&self, i: usize) -> f64 {
        self.valuations[i]
    }

    pub fn alpha(&self, i: usize) -> f64 {
        self.alphas[i]
    }

    pub(crate) fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.n(),
            })
        }
    }

    /// The same instance with bidder `i` reporting `value` instead.
    pub fn with_valuation(&self, i: usize, value: f64) -> Result<Self> {
        self.check_index(i)?;
        let mut valuations = self.valuations.clone();
        valuations[i] = value;
        AuctionInstance::new(valuations, self.alphas.clone())
    }

    /// Multiplies every valuation and every alpha by `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        AuctionInstance::new(
            self.valuations.iter().map(|v| v * c).collect(),
            self.alphas.iter().map(|a| a * c).collect(),
        )
    }

    /// `alpha_i / (v_i + alpha_i)`: the share at which bidder `i`'s value
    /// `v_i x_i` meets the budget `alpha_i (1 - x_i)` of a full allocation.
    pub fn saturation_share(&self, i: usize) -> f64 {
        self.alphas[i] / (self.valuations[i] + self.alphas[i])
    }

    /// Upper bound on any feasible liquid welfare: `sum_i min(v_i, alpha_i)`.
    pub fn welfare_cap(&self) -> f64 {
        self.valuations
            .iter()
            .zip(&self.alphas)
            .map(|(v, a)| v.min(*a))
            .sum()
    }
}

/// Fractions of the item handed to each bidder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(Vec<f64>);

impl Allocation {
    /// Rejects entries outside `[0, 1]` and totals above `1 + TOL`.
    pub fn new(x: Vec<f64>) -> Result<Self> {
        for (index, &value) in x.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    field: "allocation",
                    index,
                });
            }
            if !(-TOL..=1.0 + TOL).contains(&value) {
                return Err(Error::FractionOutOfRange { index, value });
            }
        }
        let total: f64 = x.iter().sum();
        if total > 1.0 + TOL {
            return Err(Error::OverAllocated(total));
        }
        Ok(Allocation(x))
    }

    pub fn zeros(n: usize) -> Self {
        Allocation(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for Allocation {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn check_arity(instance: &AuctionInstance, allocation: &Allocation) -> Result<()> {
    if allocation.len() != instance.n() {
        return Err(Error::AllocationArity {
            expected: instance.n(),
            got: allocation.len(),
        });
    }
    Ok(())
}

/// Allocation, payments and the budgets the allocation induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub allocation: Allocation,
    pub payments: Vec<f64>,
    pub budgets: Vec<f64>,
    pub liquid_welfare: f64,
}

impl Outcome {
    /// Derives budgets and liquid welfare from `allocation`.
    pub fn new(
        instance: &AuctionInstance,
        allocation: Allocation,
        payments: Vec<f64>,
    ) -> Result<Self> {
        check_arity(instance, &allocation)?;
        if payments.len() != instance.n() {
            return Err(Error::AllocationArity {
                expected: instance.n(),
                got: payments.len(),
            });
        }
        let budgets = (0..instance.n())
            .map(|i| budget(instance, &allocation, i))
            .collect::<Result<Vec<_>>>()?;
        let liquid_welfare = liquid_welfare(instance, &allocation)?;
        Ok(Outcome {
            allocation,
            payments,
            budgets,
            liquid_welfare,
        })
    }
}

/// Budgeted quasi-linear utility. A payment above the budget is worse than
/// every finite utility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Utility {
    Finite(f64),
    BudgetViolated,
}

impl Utility {
    pub fn finite(self) -> Option<f64> {
        match self {
            Utility::Finite(u) => Some(u),
            Utility::BudgetViolated => None,
        }
    }
}

impl PartialOrd for Utility {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Utility::Finite(a), Utility::Finite(b)) => a.partial_cmp(b),
            (Utility::BudgetViolated, Utility::BudgetViolated) => Some(Ordering::Equal),
            (Utility::BudgetViolated, Utility::Finite(_)) => Some(Ordering::Less),
            (Utility::Finite(_), Utility::BudgetViolated) => Some(Ordering::Greater),
        }
    }
}

impl fmt::Display for Utility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Utility::Finite(u) => write!(f, "{u}"),
            Utility::BudgetViolated => f.write_str("budget_violated"),
        }
    }
}

impl Serialize for Utility {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Utility::Finite(u) => s.serialize_f64(*u),
            Utility::BudgetViolated => s.serialize_str("budget_violated"),
        }
    }
}

/// `B_i(x_{-i}) = alpha_i * sum_{j != i} x_j`.
pub fn budget(instance: &AuctionInstance, allocation: &Allocation, i: usize) -> Result<f64> {
    instance.check_index(i)?;
    check_arity(instance, allocation)?;
    Ok(instance.alpha(i) * others_share(allocation.as_slice(), i))
}

fn others_share(x: &[f64], i: usize) -> f64 {
    x.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, xj)| xj)
        .sum::<f64>()
        .max(0.0)
}

/// Utility of a bidder with value `true_value` who receives `share` and pays
/// `payment` against `budget`.
pub fn budgeted_utility(true_value: f64, share: f64, payment: f64, budget: f64) -> Utility {
    if payment <= budget + TOL {
        Utility::Finite(true_value * share - payment)
    } else {
        Utility::BudgetViolated
    }
}

pub fn utility(
    instance: &AuctionInstance,
    outcome: &Outcome,
    i: usize,
    true_value: f64,
) -> Result<Utility> {
    instance.check_index(i)?;
    check_arity(instance, &outcome.allocation)?;
    let b = budget(instance, &outcome.allocation, i)?;
    Ok(budgeted_utility(
        true_value,
        outcome.allocation[i],
        outcome.payments[i],
        b,
    ))
}

/// `sum_i min(v_i x_i, B_i(x_{-i}))`.
pub fn liquid_welfare(instance: &AuctionInstance, allocation: &Allocation) -> Result<f64> {
    check_arity(instance, allocation)?;
    Ok(liquid_welfare_raw(
        instance.valuations(),
        instance.alphas(),
        allocation.as_slice(),
    ))
}

/// Unchecked liquid welfare on raw slices; the oracle's inner loop.
pub(crate) fn liquid_welfare_raw(valuations: &[f64], alphas: &[f64], x: &[f64]) -> f64 {
    let total: f64 = x.iter().sum();
    valuations
        .iter()
        .zip(alphas)
        .zip(x)
        .map(|((v, a), xi)| (v * xi).min(a * (total - xi).max(0.0)))
        .sum()
}
