use crate::error::{invalid, Result};

/// Predicted convergence orders for grading `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpectedOrders {
    /// `min{r, 2}` at the final time.
    pub local: f64,
    /// `min{alpha r, 2}` over the whole interval.
    pub global: f64,
    /// `r = 3 - alpha`: the local prediction only holds up to a small `epsilon`.
    pub epsilon: bool,
}

pub fn expected_orders(alpha: f64, r: f64) -> ExpectedOrders {
    ExpectedOrders {
        local: r.min(2.0),
        global: (alpha * r).min(2.0),
        epsilon: (r - (3.0 - alpha)).abs() < 1e-9,
    }
}

/// Pairwise orders `log2(E(N_k) / E(N_{k+1}))` for doubling `ns`.
///
/// A zero error makes the corresponding order indeterminate (`None`).
pub fn fit_orders(ns: &[usize], errors: &[f64]) -> Result<Vec<Option<f64>>> {
    if ns.len() != errors.len() {
        return Err(invalid("errors", format!("{} step counts but {} errors", ns.len(), errors.len())));
    }
    if ns.len() < 2 {
        return Err(invalid("N", "need at least two step counts"));
    }
    if let Some(w) = ns.windows(2).find(|w| w[1] != 2 * w[0]) {
        return Err(invalid("N", format!("step counts must double, got {} then {}", w[0], w[1])));
    }
    Ok(errors
        .windows(2)
        .map(|w| {
            let ratio = w[0] / w[1];
            (w[0] > 0.0 && w[1] > 0.0 && ratio.is_finite()).then(|| ratio.log2())
        })
        .collect())
}

/// One convergence sweep over `N` at fixed `alpha`, `r`, `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub alpha: f64,
    pub r: f64,
    pub m: usize,
    pub ns: Vec<usize>,
    pub local: Vec<f64>,
    /// `local_orders[k]` relates `ns[k]` and `ns[k+1]`.
    pub local_orders: Vec<Option<f64>>,
    /// Absent for two-mesh sweeps.
    pub global: Option<Vec<f64>>,
    pub global_orders: Option<Vec<Option<f64>>>,
    pub expected: ExpectedOrders,
}

impl ConvergenceReport {
    pub fn new(
        alpha: f64,
        r: f64,
        m: usize,
        ns: Vec<usize>,
        local: Vec<f64>,
        global: Option<Vec<f64>>,
    ) -> Result<Self> {
        let local_orders = fit_orders(&ns, &local)?;
        let global_orders = global.as_ref().map(|g| fit_orders(&ns, g)).transpose()?;
        Ok(Self {
            alpha,
            r,
            m,
            ns,
            local,
            local_orders,
            global,
            global_orders,
            expected: expected_orders(alpha, r),
        })
    }

    /// Order into row `k` (`None` for the first row, as in the tables).
    pub fn local_rate(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.local_orders[i])
    }

    pub fn global_rate(&self, k: usize) -> Option<f64> {
        let orders = self.global_orders.as_ref()?;
        k.checked_sub(1).and_then(|i| orders[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartering_is_order_two() {
        let o = fit_orders(&[8, 16], &[4.0 * f64::EPSILON, f64::EPSILON]).unwrap();
        assert_eq!(o, vec![Some(2.0)]);
    }

    #[test]
    fn zero_error_is_indeterminate() {
        let o = fit_orders(&[8, 16, 32], &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(o, vec![None, None]);
    }

    #[test]
    fn non_doubling_rejected() {
        assert!(fit_orders(&[8, 24], &[1.0, 0.5]).is_err());
        assert!(fit_orders(&[8], &[1.0]).is_err());
    }

    #[test]
    fn expected_orders_cap_at_two() {
        let e = expected_orders(0.5, 4.0);
        assert_eq!((e.local, e.global, e.epsilon), (2.0, 2.0, false));
        let e = expected_orders(0.3, 1.0);
        assert_eq!((e.local, e.global), (1.0, 0.3));
        assert!(expected_orders(0.5, 2.5).epsilon);
    }
}
