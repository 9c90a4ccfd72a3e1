//! Interval estimates for proportions and quantiles.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes / trials`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if successes == trials {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

fn ln_binom_pmf(n: u64, k: u64, q: f64) -> f64 {
    let ln_c = crate::combinatorics::ln_binom(n, k as i64)
        .expect("k <= n")
        .ln();
    let a = if k == 0 { 0.0 } else { k as f64 * q.ln() };
    let b = if k == n {
        0.0
    } else {
        (n - k) as f64 * (-q).ln_1p()
    };
    ln_c + a + b
}

/// Distribution-free confidence interval for the `q`-quantile from `n`
/// sorted observations: 1-based order statistic indices `(lo, hi)` with
/// `P(lo <= B < hi) >= level` for `B ~ Binomial(n, q)`, clamped to `[1, n]`.
pub fn quantile_order_interval(n: u64, q: f64, level: f64) -> (u64, u64) {
    assert!(n >= 1 && (0.0..=1.0).contains(&q));
    let tail = (1.0 - level) / 2.0;
    let pmf: Vec<f64> = (0..=n)
        .map(|k| {
            if q == 0.0 {
                (k == 0) as u8 as f64
            } else if q == 1.0 {
                (k == n) as u8 as f64
            } else {
                ln_binom_pmf(n, k, q).exp()
            }
        })
        .collect();
    // largest lo with P(B < lo) <= tail
    let mut lo = 0u64;
    let mut below = 0.0;
    while lo < n && below + pmf[lo as usize] <= tail {
        below += pmf[lo as usize];
        lo += 1;
    }
    // smallest hi with P(B >= hi) <= tail
    let mut hi = n;
    let mut above = 0.0;
    while hi > lo && above + pmf[hi as usize] <= tail {
        above += pmf[hi as usize];
        hi -= 1;
    }
    // observation lo is the lo-th smallest; hi + 1 covers the upper tail
    (lo.clamp(1, n), (hi + 1).clamp(1, n))
}
