//! Log-domain reductions.
//!
//! `log_sum_exp` keeps the dominant term out of the `ln` so that a sum of
//! the form `log(1 + tiny)` retains the relative precision of `tiny`. The
//! zero-temperature regime depends on this: pressures of normalized
//! potentials decay like `exp(-t)` while everything else is O(1).

/// `log(sum(exp(v)))`, accurate when one term dominates.
pub fn log_sum_exp<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let iter = values.into_iter();
    let mut max = f64::NEG_INFINITY;
    let mut arg = usize::MAX;
    for (k, v) in iter.clone().enumerate() {
        if v > max {
            max = v;
            arg = k;
        }
    }
    if max == f64::NEG_INFINITY || max.is_nan() {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let rest: f64 = iter
        .enumerate()
        .filter(|&(k, _)| k != arg)
        .map(|(_, v)| (v - max).exp())
        .sum();
    max + rest.ln_1p()
}

/// `log(exp(a) + exp(b))`.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `log(1 - exp(x))` for `x <= 0`.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dominant_term_keeps_tiny_correction() {
        let eps = 1e-30_f64;
        let v = log_sum_exp([0.0, eps.ln()]);
        assert!((v - eps).abs() < 1e-13 * eps);
    }

    #[test]
    fn empty_and_neg_infinity() {
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp([f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 0.0), 0.0);
    }

    #[test]
    fn matches_naive_sum() {
        let xs = [0.3, -1.2, 2.5, -0.7];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(xs) - naive).abs() < 1e-14);
        assert!((log_add_exp(0.3, -1.2) - (0.3f64.exp() + (-1.2f64).exp()).ln()).abs() < 1e-15);
    }

    #[test]
    fn log1m_exp_both_branches() {
        for x in [-1e-20f64, -0.1, -0.5, -3.0, -40.0] {
            let want = (1.0 - x.exp()).ln();
            let got = log1m_exp(x);
            if x > -1e-10 {
                assert!((got - (-x).ln()).abs() < 1e-12);
            } else {
                assert!((got - want).abs() < 1e-12 * want.abs().max(1.0));
            }
        }
    }
}
