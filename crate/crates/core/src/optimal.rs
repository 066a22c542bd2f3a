//! Greedy allocation maximising liquid welfare, and the structural
//! properties (P1)-(P4) that single it out.
//!
//! Bidders are visited in descending valuation order and each receives its
//! saturation share `alpha_i / (v_i + alpha_i)` while supply lasts: at that
//! share the bidder's value equals the budget a full allocation gives it. If
//! supply remains after everyone is saturated, the rest goes to the bidder
//! with the smallest alpha, whose budget suffers least from being
//! over-allocated.

use serde::Serialize;

use crate::error::Result;
use crate::model::{Allocation, AuctionInstance};
use crate::TOL;

/// Which way the greedy pass ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum OptBranch {
    /// Saturation shares sum to at least one. The first `r` bidders in sorted
    /// order are saturated, bidder `r + 1` (if any) takes the remainder, the
    /// rest get nothing.
    Case1 { r: usize },
    /// Saturation shares sum to less than one. Everyone is saturated and the
    /// residual goes to `least_alpha` (an original bidder index).
    Case2 { least_alpha: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptTrace {
    /// Original bidder indices in the order they were served.
    pub sorted_order: Vec<usize>,
    pub branch: OptBranch,
}

/// Descending valuations, ties by ascending index (stable sort).
pub(crate) fn valuation_order(instance: &AuctionInstance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..instance.n()).collect();
    order.sort_by(|&a, &b| instance.valuation(b).total_cmp(&instance.valuation(a)));
    order
}

/// Bidder with the smallest alpha, lowest index on ties.
pub(crate) fn least_alpha(instance: &AuctionInstance) -> usize {
    (0..instance.n())
        .min_by(|&a, &b| instance.alpha(a).total_cmp(&instance.alpha(b)))
        .expect("instances have at least two bidders")
}

/// Allocation maximising liquid welfare, in original bidder order.
pub fn optimal_allocation(instance: &AuctionInstance) -> (Allocation, OptTrace) {
    let order = valuation_order(instance);
    let n = instance.n();
    let mut x = vec![0.0; n];

    let mut remaining = 1.0;
    let mut prefix = 0.0;
    let mut r = 0;
    let mut last_served = None;
    for &i in &order {
        let share = instance.saturation_share(i);
        if remaining >= share {
            x[i] = share;
            remaining -= share;
            prefix += share;
            if prefix <= 1.0 {
                r += 1;
            }
            last_served = Some(i);
        } else if remaining > 0.0 {
            x[i] = remaining;
            remaining = 0.0;
            last_served = Some(i);
        }
    }

    let total_shares: f64 = (0..n).map(|i| instance.saturation_share(i)).sum();
    let branch = if total_shares >= 1.0 || remaining <= 0.0 {
        // the final recipient absorbs rounding so the item is exactly used up
        if let Some(last) = last_served {
            let others: f64 = (0..n).filter(|&j| j != last).map(|j| x[j]).sum();
            x[last] = (1.0 - others).max(0.0);
        }
        OptBranch::Case1 { r }
    } else {
        let l = least_alpha(instance);
        let others: f64 = (0..n).filter(|&j| j != l).map(|j| x[j]).sum();
        x[l] = 1.0 - others;
        OptBranch::Case2 { least_alpha: l }
    };

    (
        Allocation::new(x).expect("greedy allocation is feasible"),
        OptTrace {
            sorted_order: order,
            branch,
        },
    )
}

/// Outcome of checking (P1)-(P4) against an allocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptProperties {
    /// All of the item is allocated.
    pub p1: bool,
    /// Nobody except the least-alpha bidder exceeds its saturation share.
    pub p2: bool,
    /// In valuation order, a later bidder gets something only once every
    /// earlier bidder is saturated.
    pub p3: bool,
    /// The least-alpha bidder is over-allocated only once everyone else is
    /// saturated.
    pub p4: bool,
    /// Least-alpha bidder (original index).
    pub least_alpha: usize,
    pub first_violation: Option<String>,
}

impl OptProperties {
    pub fn all(&self) -> bool {
        self.p1 && self.p2 && self.p3 && self.p4
    }
}

pub fn check_opt_properties(
    instance: &AuctionInstance,
    allocation: &Allocation,
) -> Result<OptProperties> {
    crate::model::liquid_welfare(instance, allocation)?;
    let n = instance.n();
    let x = allocation.as_slice();
    let share = |i: usize| instance.saturation_share(i);
    let l = least_alpha(instance);
    let order = valuation_order(instance);
    let mut violations = Vec::new();

    let total = allocation.total();
    let p1 = (total - 1.0).abs() <= TOL;
    if !p1 {
        violations.push(format!("P1: allocation sums to {total}"));
    }

    let mut p2 = true;
    for i in (0..n).filter(|&i| i != l) {
        if x[i] > share(i) + TOL {
            p2 = false;
            violations.push(format!(
                "P2: bidder {i} holds {} above its saturation share {}",
                x[i],
                share(i)
            ));
            break;
        }
    }

    let mut p3 = true;
    'outer: for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            if x[i] < share(i) - TOL && x[j] > TOL {
                p3 = false;
                violations.push(format!(
                    "P3: bidder {j} served while higher-valued bidder {i} is unsaturated"
                ));
                break 'outer;
            }
        }
    }

    let mut p4 = true;
    for i in (0..n).filter(|&i| i != l) {
        if x[l] > share(l) + TOL && x[i] < share(i) - TOL {
            p4 = false;
            violations.push(format!(
                "P4: bidder {l} over-allocated while bidder {i} is unsaturated"
            ));
            break;
        }
    }

    Ok(OptProperties {
        p1,
        p2,
        p3,
        p4,
        least_alpha: l,
        first_violation: violations.into_iter().next(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::liquid_welfare;

    fn inst(v: &[f64], a: &[f64]) -> AuctionInstance {
        AuctionInstance::new(v.to_vec(), a.to_vec()).unwrap()
    }

    fn assert_close(got: &[f64], want: &[f64]) {
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn two_bidder_hard_instance() {
        let i = inst(&[4.0, 1.0], &[2.0, 1.0]);
        let (x, trace) = optimal_allocation(&i);
        assert_close(x.as_slice(), &[1.0 / 3.0, 2.0 / 3.0]);
        assert!((liquid_welfare(&i, &x).unwrap() - 5.0 / 3.0).abs() < 1e-12);
        // shares 1/3 + 1/2 < 1: bidder 1 has the smaller alpha and absorbs the rest
        assert_eq!(trace.branch, OptBranch::Case2 { least_alpha: 1 });
    }

    #[test]
    fn symmetric_boundary() {
        let i = inst(&[1.0, 1.0], &[1.0, 1.0]);
        let (x, trace) = optimal_allocation(&i);
        assert_close(x.as_slice(), &[0.5, 0.5]);
        assert_eq!(trace.branch, OptBranch::Case1 { r: 2 });
    }

    #[test]
    fn three_bidders() {
        let i = inst(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0]);
        let (x, _) = optimal_allocation(&i);
        assert_close(x.as_slice(), &[0.25, 1.0 / 3.0, 5.0 / 12.0]);
        assert!((liquid_welfare(&i, &x).unwrap() - 11.0 / 6.0).abs() < 1e-12);
        assert!(check_opt_properties(&i, &x).unwrap().all());
    }

    #[test]
    fn case2_residual_goes_to_least_alpha() {
        // shares 1/11, 1/6, 0.5/10.5: sum < 1
        let i = inst(&[10.0, 5.0, 10.0], &[1.0, 1.0, 0.5]);
        let (x, trace) = optimal_allocation(&i);
        assert_eq!(trace.branch, OptBranch::Case2 { least_alpha: 2 });
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-12);
        assert!((x[1] - 1.0 / 6.0).abs() < 1e-12);
        assert!((x.total() - 1.0).abs() < 1e-12);
        assert!(x[2] > 0.5);
        assert!(check_opt_properties(&i, &x).unwrap().all());
    }

    #[test]
    fn original_order_is_restored() {
        let i = inst(&[1.0, 3.0, 2.0], &[1.0, 1.0, 1.0]);
        let (x, trace) = optimal_allocation(&i);
        assert_eq!(trace.sorted_order, vec![1, 2, 0]);
        assert_close(x.as_slice(), &[5.0 / 12.0, 0.25, 1.0 / 3.0]);
    }

    #[test]
    fn ties_break_by_index() {
        let i = inst(&[2.0, 2.0, 2.0], &[3.0, 1.0, 1.0]);
        let (_, trace) = optimal_allocation(&i);
        assert_eq!(trace.sorted_order, vec![0, 1, 2]);
        assert_eq!(least_alpha(&i), 1);
    }

    #[test]
    fn checker_flags_violations() {
        let i = inst(&[4.0, 1.0], &[2.0, 1.0]);
        let p = check_opt_properties(&i, &Allocation::new(vec![1.0, 0.0]).unwrap()).unwrap();
        assert!(p.p1);
        assert!(!p.p2);
        assert!(p.first_violation.unwrap().starts_with("P2"));

        let p = check_opt_properties(&i, &Allocation::new(vec![0.4, 0.5]).unwrap()).unwrap();
        assert!(!p.p1);

        // bidder 2 served before bidder 1 is saturated
        let i = inst(&[3.0, 2.0, 1.0], &[1.0, 1.0, 1.0]);
        let p = check_opt_properties(
            &i,
            &Allocation::new(vec![0.1, 1.0 / 3.0, 17.0 / 30.0]).unwrap(),
        )
        .unwrap();
        assert!(!p.p3);
    }
}
