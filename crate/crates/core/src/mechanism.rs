//! Uniform-price auction with a one-half purchase limit.
//!
//! A zero-value dummy bidder is appended after the real bidders are sorted by
//! descending valuation. The division point `k` is the longest prefix whose
//! capped shares `min(alpha_i / (v_k + alpha_i), 1/2)`, priced at the
//! prefix's last valuation, fit into one unit. The uniform price `q` is the
//! smallest non-negative root of `sum_{i <= k} min(alpha_i / (q + alpha_i), 1/2) = 1`.
//!
//! If `q` exceeds the next valuation `v_{k+1}`, the prefix buys at `q` and the
//! item is exhausted. Otherwise the prefix buys at `v_{k+1}` and bidder `k + 1`
//! takes what is left. Payments follow Myerson's identity
//! `p_j = v_j x_j(v_j) - int_0^{v_j} x_j(z) dz`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{budgeted_utility, Allocation, AuctionInstance, Outcome, Utility};
use crate::numeric::{bisect_left_edge, Simpson};

/// Largest share any bidder may buy.
pub const PURCHASE_LIMIT: f64 = 0.5;

/// Slack on the division-point feasibility test.
const DIVISION_SLACK: f64 = 1e-12;

/// Payments this close to zero are reported as zero.
const PAYMENT_CLAMP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceBranch {
    /// `q > v_{k+1}`: the first `k` bidders buy at `q`.
    PriceAboveNext,
    /// `q <= v_{k+1}`: the first `k` bidders buy at `v_{k+1}`, bidder `k + 1`
    /// receives the remainder.
    PriceAtMostNext,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismTrace {
    /// Original indices in sorted order; the dummy is index `n` and always last.
    pub sorted_order: Vec<usize>,
    /// Division point, as a prefix length of `sorted_order`.
    pub k: usize,
    /// Uniform price.
    pub q: f64,
    pub branch: PriceBranch,
    pub dummy_alpha: f64,
    /// What the dummy received. Zero up to rounding.
    pub dummy_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MechanismOutcome {
    #[serde(flatten)]
    pub outcome: Outcome,
    pub trace: MechanismTrace,
}

/// What one bidder gets out of a run: its share, payment and budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BidderOutcome {
    pub share: f64,
    pub payment: f64,
    pub budget: f64,
}

impl BidderOutcome {
    pub fn utility(&self, true_value: f64) -> Utility {
        budgeted_utility(true_value, self.share, self.payment, self.budget)
    }
}

fn capped_share(alpha: f64, price: f64) -> f64 {
    (alpha / (price + alpha)).min(PURCHASE_LIMIT)
}

fn capped_demand(alphas: &[f64], price: f64) -> f64 {
    alphas.iter().map(|&a| capped_share(a, price)).sum()
}

/// Division point for sorted valuations (dummy last, value 0) and matching
/// alphas. Returned as a prefix length in `2..=values.len() - 1`.
pub fn division_point(values: &[f64], alphas: &[f64]) -> Result<usize> {
    if values.len() != alphas.len() {
        return Err(Error::LengthMismatch {
            valuations: values.len(),
            alphas: alphas.len(),
        });
    }
    if values.len() < 3 {
        return Err(Error::TooFewBidders(values.len().saturating_sub(1)));
    }
    if values.windows(2).any(|w| w[0] < w[1]) || values[values.len() - 1] != 0.0 {
        return Err(Error::Unsorted);
    }
    if let Some(index) = alphas.iter().position(|&a| a.is_nan() || a <= 0.0) {
        return Err(Error::NonPositiveAlpha {
            index,
            value: alphas[index],
        });
    }
    let real = values.len() - 1;
    let k = (1..=real)
        .filter(|&len| capped_demand(&alphas[..len], values[len - 1]) <= 1.0 + DIVISION_SLACK)
        .max()
        .expect("a single bidder's capped share never exceeds one half");
    Ok(k)
}

/// Smallest non-negative `q` with `sum_i min(alpha_i / (q + alpha_i), 1/2) = 1`.
pub fn uniform_price(alphas: &[f64]) -> Result<f64> {
    if alphas.len() < 2 {
        return Err(Error::PrefixTooShort(alphas.len()));
    }
    if let Some(index) = alphas.iter().position(|&a| a.is_nan() || a <= 0.0) {
        return Err(Error::NonPositiveAlpha {
            index,
            value: alphas[index],
        });
    }
    if capped_demand(alphas, 0.0) <= 1.0 {
        return Ok(0.0);
    }
    let mut hi = alphas.iter().copied().fold(0.0, f64::max);
    while capped_demand(alphas, hi) >= 1.0 {
        hi *= 2.0;
    }
    let q = bisect_left_edge(0.0, hi, |q| capped_demand(alphas, q) <= 1.0);
    let residual = capped_demand(alphas, q) - 1.0;
    if residual.abs() > 1e-10 {
        return Err(Error::Numerical(format!(
            "uniform price {q} leaves demand residual {residual}"
        )));
    }
    Ok(q)
}

/// Result of running the allocation rule on one profile, in sorted order.
struct Sorted {
    order: Vec<usize>,
    shares: Vec<f64>,
    k: usize,
    q: f64,
    branch: PriceBranch,
}

#[derive(Debug, Clone, Copy)]
pub struct Mechanism {
    dummy_alpha: f64,
    quadrature: Simpson,
}

impl Default for Mechanism {
    fn default() -> Self {
        Mechanism {
            dummy_alpha: 1.0,
            quadrature: Simpson::default(),
        }
    }
}

impl Mechanism {
    pub fn new(dummy_alpha: f64) -> Result<Self> {
        if !(dummy_alpha > 0.0 && dummy_alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "dummy alpha must be positive, got {dummy_alpha}"
            )));
        }
        Ok(Mechanism {
            dummy_alpha,
            ..Mechanism::default()
        })
    }

    /// Absolute quadrature tolerance per integration segment.
    pub fn with_quadrature_tol(mut self, tol: f64) -> Result<Self> {
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidConfig(format!("quadrature tolerance {tol}")));
        }
        self.quadrature.tol = tol;
        Ok(self)
    }

    pub fn dummy_alpha(&self) -> f64 {
        self.dummy_alpha
    }

    fn solve(&self, values: &[f64], alphas: &[f64]) -> Result<Sorted> {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
        order.push(n);

        let value_of = |i: usize| if i == n { 0.0 } else { values[i] };
        let alpha_of = |i: usize| if i == n { self.dummy_alpha } else { alphas[i] };
        let sorted_values: Vec<f64> = order.iter().map(|&i| value_of(i)).collect();
        let sorted_alphas: Vec<f64> = order.iter().map(|&i| alpha_of(i)).collect();

        let k = division_point(&sorted_values, &sorted_alphas)?;
        let q = uniform_price(&sorted_alphas[..k])?;
        let next = sorted_values[k];

        let mut shares = vec![0.0; n + 1];
        let branch = if q > next {
            for i in 0..k {
                shares[i] = capped_share(sorted_alphas[i], q);
            }
            PriceBranch::PriceAboveNext
        } else {
            for i in 0..k {
                shares[i] = capped_share(sorted_alphas[i], next);
            }
            let taken: f64 = shares[..k].iter().sum();
            shares[k] = (1.0 - taken).max(0.0);
            PriceBranch::PriceAtMostNext
        };
        Ok(Sorted {
            order,
            shares,
            k,
            q,
            branch,
        })
    }

    /// Allocation to the real bidders, in original order, and the trace.
    pub fn allocate(&self, instance: &AuctionInstance) -> Result<(Allocation, MechanismTrace)> {
        let n = instance.n();
        let solved = self.solve(instance.valuations(), instance.alphas())?;
        let mut x = vec![0.0; n];
        let mut dummy_share = 0.0;
        for (&i, &share) in solved.order.iter().zip(&solved.shares) {
            if i == n {
                dummy_share = share;
            } else {
                x[i] = share;
            }
        }
        let trace = MechanismTrace {
            sorted_order: solved.order,
            k: solved.k,
            q: solved.q,
            branch: solved.branch,
            dummy_alpha: self.dummy_alpha,
            dummy_share,
        };
        Ok((Allocation::new(x)?, trace))
    }

    /// Bidder `j`'s share when it reports `z` and everyone else reports as in
    /// `instance`.
    pub fn allocation_curve(&self, instance: &AuctionInstance, j: usize, z: f64) -> Result<f64> {
        instance.check_index(j)?;
        if !(z >= 0.0 && z.is_finite()) {
            return Err(Error::NegativeValuation { index: j, value: z });
        }
        self.curve_unchecked(instance, j, z)
    }

    fn curve_unchecked(&self, instance: &AuctionInstance, j: usize, z: f64) -> Result<f64> {
        let mut values = instance.valuations().to_vec();
        values[j] = z;
        let solved = self.solve(&values, instance.alphas())?;
        let pos = solved
            .order
            .iter()
            .position(|&i| i == j)
            .expect("every bidder is sorted");
        Ok(solved.shares[pos])
    }

    /// Myerson payment of bidder `j` at its reported valuation.
    pub fn myerson_payment(&self, instance: &AuctionInstance, j: usize) -> Result<f64> {
        instance.check_index(j)?;
        let v = instance.valuation(j);
        if v == 0.0 {
            return Ok(0.0);
        }
        let share = self.curve_unchecked(instance, j, v)?;
        let area = self.area_under_curve(instance, j, v)?;
        let p = v * share - area;
        Ok(if p.abs() <= PAYMENT_CLAMP { 0.0 } else { p })
    }

    /// `int_0^upper x_j(z) dz`, split where the sorted order changes or a
    /// purchase cap can switch on.
    fn area_under_curve(&self, instance: &AuctionInstance, j: usize, upper: f64) -> Result<f64> {
        let mut cuts = vec![0.0, upper];
        for (i, &v) in instance.valuations().iter().enumerate() {
            if i != j {
                cuts.push(v);
            }
        }
        cuts.extend_from_slice(instance.alphas());
        cuts.retain(|&c| (0.0..=upper).contains(&c));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let failure = std::cell::RefCell::new(None);
        let mut area = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            // ties at the cut points are resolved by index; integrate the
            // one-sided limits from inside the segment instead
            let nudge = 1e-12 * b.max(1.0);
            if b - a <= 4.0 * nudge {
                area += (b - a) * self.curve_unchecked(instance, j, 0.5 * (a + b))?;
                continue;
            }
            let f = |z: f64| match self.curve_unchecked(instance, j, z.clamp(a + nudge, b - nudge))
            {
                Ok(x) => x,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            };
            area += self.quadrature.integrate(f, a, b)?;
        }
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(area),
        }
    }

    /// Share, payment and budget of bidder `j` alone.
    pub fn bidder_outcome(&self, instance: &AuctionInstance, j: usize) -> Result<BidderOutcome> {
        instance.check_index(j)?;
        let (x, _) = self.allocate(instance)?;
        let payment = self.myerson_payment(instance, j)?;
        let budget = crate::model::budget(instance, &x, j)?;
        Ok(BidderOutcome {
            share: x[j],
            payment,
            budget,
        })
    }

    pub fn run(&self, instance: &AuctionInstance) -> Result<MechanismOutcome> {
        let (allocation, trace) = self.allocate(instance)?;
        let payments = (0..instance.n())
            .map(|j| self.myerson_payment(instance, j))
            .collect::<Result<Vec<_>>>()?;
        let outcome = Outcome::new(instance, allocation, payments)?;
        Ok(MechanismOutcome { outcome, trace })
    }
}

/// Runs the mechanism with the default dummy alpha and quadrature settings.
pub fn run_mechanism(instance: &AuctionInstance) -> Result<MechanismOutcome> {
    Mechanism::default().run(instance)
}
