//! Choosing the number of blocks `K` under time and accuracy constraints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default slack exponent for [`max_k_same_leading_mse`].
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Cost model `steps ~ c N^a`, memory `~ N^b`, for the full-sample statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub a: f64,
    pub c: f64,
    pub b: f64,
}

impl CostModel {
    pub fn new(a: f64, c: f64, b: f64) -> Result<Self> {
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::invalid(format!("complexity exponent must exceed 1, got {a}")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid(format!("cost constant must be positive, got {c}")));
        }
        if !(b >= 1.0 && b.is_finite()) {
            return Err(Error::invalid(format!("memory exponent must be at least 1, got {b}")));
        }
        Ok(Self { a, c, b })
    }
}

/// Cost `c K (N/K)^a = c K^{1-a} N^a` of the distributed statistic.
pub fn predicted_cost(model: &CostModel, n: u64, k: u64) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("K must lie in 1..={n}, got {k}")));
    }
    let (n, k) = (n as f64, k as f64);
    Ok(model.c * k.powf(1.0 - model.a) * n.powf(model.a))
}

/// Smallest `K >= max(k0, 1)` whose predicted cost fits in `budget`.
pub fn select_k(k0: u64, model: &CostModel, n: u64, budget: f64) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    if k0 > n {
        return Err(Error::invalid(format!("K0 = {k0} exceeds N = {n}")));
    }
    if predicted_cost(model, n, n)? > budget {
        return Err(Error::Infeasible(format!(
            "cost budget {budget} is below the cost at K = N ({})",
            predicted_cost(model, n, n)?
        )));
    }
    // cost is decreasing in K: bisect for the first K within budget
    let (mut lo, mut hi) = (1u64, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if predicted_cost(model, n, mid)? <= budget {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo.max(k0).max(1))
}

/// Advisory ceiling `floor(N^{1 - 1/(2 tau1) - eps})` on `K` for the
/// distributed statistic to keep the full-sample leading MSE term.
/// `tau1 = f64::INFINITY` is allowed.
pub fn max_k_same_leading_mse(n: u64, tau1: f64, eps: f64) -> Result<u64> {
    if tau1.is_nan() || tau1 < 1.0 {
        return Err(Error::invalid(format!("tau1 must be at least 1, got {tau1}")));
    }
    let rate = 1.0 - 1.0 / (2.0 * tau1);
    if !(eps > 0.0 && eps < rate) {
        return Err(Error::invalid(format!("eps must lie in (0, {rate}), got {eps}")));
    }
    let k = (n as f64).powf(rate - eps);
    // guard against pow rounding just below an exact integer
    let r = k.round();
    Ok(if (k - r).abs() < 1e-9 * r.max(1.0) { r as u64 } else { k.floor() as u64 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(c: f64) -> CostModel {
        CostModel::new(2.0, c, 1.0).unwrap()
    }

    #[test]
    fn cost_examples() {
        let m = quad(1.0);
        assert_eq!(predicted_cost(&m, 10_000, 1).unwrap(), 1e8);
        assert_eq!(predicted_cost(&m, 10_000, 10).unwrap(), 1e7);
        let r = predicted_cost(&m, 5000, 25).unwrap() / predicted_cost(&m, 5000, 1).unwrap();
        assert!((r - 1.0 / 25.0).abs() < 1e-15);
        assert!(predicted_cost(&m, 10, 0).is_err());
        assert!(CostModel::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn select_examples() {
        // C(K) = 1e12 / K with N = 1e6
        let m = quad(1.0);
        assert_eq!(select_k(50, &m, 1_000_000, 1e10).unwrap(), 100);
        assert_eq!(select_k(50, &m, 1_000_000, 1e11).unwrap(), 50);
        assert!(matches!(select_k(1, &m, 1_000_000, 1e5), Err(Error::Infeasible(_))));
    }

    #[test]
    fn select_matches_brute_scan() {
        let m = CostModel::new(2.5, 3.0, 1.0).unwrap();
        let n = 5000;
        for budget in [1e8, 3e8, 1e9, 1e10] {
            let brute = (1..=n).find(|&k| predicted_cost(&m, n, k).unwrap() <= budget).unwrap();
            assert_eq!(select_k(1, &m, n, budget).unwrap(), brute);
        }
    }

    #[test]
    fn max_k_examples() {
        assert_eq!(max_k_same_leading_mse(10_000, 1.0, 0.1).unwrap(), 39);
        assert_eq!(max_k_same_leading_mse(10_000, f64::INFINITY, 0.1).unwrap(), 3981);
        assert!(max_k_same_leading_mse(10_000, 1.0, 0.5).is_err());
        assert!(max_k_same_leading_mse(10_000, 0.5, 0.1).is_err());
    }

    proptest! {
        #[test]
        fn cost_strictly_decreasing(a in 1.01f64..4.0, n in 2u64..100_000, k in 1u64..1000) {
            prop_assume!(k < n);
            let m = CostModel::new(a, 1.0, 1.0).unwrap();
            prop_assert!(predicted_cost(&m, n, k + 1).unwrap() < predicted_cost(&m, n, k).unwrap());
        }

        #[test]
        fn selection_respects_constraints(k0 in 1u64..500, logb in 6.0f64..12.0) {
            let m = quad(1.0);
            let n = 1_000_000;
            let budget = 10f64.powf(logb);
            if let Ok(k) = select_k(k0, &m, n, budget) {
                prop_assert!(k >= k0);
                prop_assert!(predicted_cost(&m, n, k).unwrap() <= budget);
            }
        }
    }
}
