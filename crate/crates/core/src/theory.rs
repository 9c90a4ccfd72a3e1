//! Closed forms: the critical retention probability and the moment bounds
//! for the near-extremal family counts.
//!
//! Everything is evaluated in log-space and exponentiated at the end, so the
//! linear values saturate to `0` or `inf` while the `ln` forms stay finite.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::combinatorics::{binom, graph_constants, ln_binom, BigCount, GraphSpec, LogValue};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub n: u32,
    pub r: u32,
    pub p_c: f64,
}

/// `((r + 1) ln n - r ln r) / C(n - 1, r - 1)`.
pub fn p_critical(n: u32, r: u32) -> Result<ThresholdParams> {
    if r < 2 {
        return Err(Error::Parameter(format!(
            "p_critical needs r >= 2, got {r}"
        )));
    }
    if n <= r {
        return Err(Error::Parameter(format!(
            "p_critical needs n > r, got n = {n}, r = {r}"
        )));
    }
    let (nf, rf) = (n as f64, r as f64);
    let numerator = (rf + 1.0) * nf.ln() - rf * rf.ln();
    let ln_star = ln_binom(n as u64 - 1, r as i64 - 1)?.ln();
    Ok(ThresholdParams {
        n,
        r,
        p_c: (numerator.ln() - ln_star).exp(),
    })
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Parameter(format!("p = {p} is outside [0, 1]")))
    }
}

/// Stability-regime constants shared by the moment formulas.
struct Moments {
    spec: GraphSpec,
    /// ln(R - N) = ln C(n - 1, r)
    ln_outside: LogValue,
    /// M as a real
    disjoint: f64,
}

impl Moments {
    fn new(n: u32, r: u32, p: f64) -> Result<Self> {
        check_p(p)?;
        let spec = graph_constants(n, r, 0)?;
        if n < 2 * r {
            return Err(Error::Parameter(format!(
                "need n >= 2r, got n = {n}, r = {r}"
            )));
        }
        // sets avoiding a fixed element
        let ln_outside = ln_binom(n as u64 - 1, r as i64)?;
        let disjoint = spec.star_disjoint.to_f64();
        Ok(Moments {
            spec,
            ln_outside,
            disjoint,
        })
    }

    /// `(1 - p)^k` in log-space.
    fn survive(p: f64, k: f64) -> LogValue {
        if k == 0.0 {
            LogValue::from_ln(0.0)
        } else if p == 1.0 {
            LogValue::ZERO
        } else {
            LogValue::from_ln(k * (-p).ln_1p())
        }
    }
}

/// `E[Y] = n (R - N) (1 - p)^M`.
pub fn expected_y(n: u32, r: u32, p: f64) -> Result<LogValue> {
    let m = Moments::new(n, r, p)?;
    Ok(LogValue::from_value(n as f64)
        .mul(m.ln_outside)
        .mul(Moments::survive(p, m.disjoint)))
}

/// `(n^2 - n)(R - N)^2 (1 - p)^(2M) + n (R - N)(R - N - 1)(1 - p)^(2M)`.
///
/// The first term treats every pair with distinct centres as edge-disjoint,
/// which undercounts pairs sharing an edge; it is an approximation of
/// `E[Y(Y - 1)]`, not an identity.
pub fn y_second_factorial_approx(n: u32, r: u32, p: f64) -> Result<LogValue> {
    let m = Moments::new(n, r, p)?;
    let nf = n as f64;
    let outside = m.ln_outside;
    let survive = Moments::survive(p, 2.0 * m.disjoint);
    let distinct = LogValue::from_value(nf * nf - nf).mul(outside).mul(outside);
    let exact_outside = binom(n as u64 - 1, r as i64);
    let outside_minus_one = exact_outside
        .checked_sub(&BigCount::one())
        .map(|c| c.ln())
        .unwrap_or(LogValue::ZERO);
    let same = LogValue::from_value(nf).mul(outside).mul(outside_minus_one);
    Ok(distinct.add(same).mul(survive))
}

/// `n C(N, i) C(R, i) (1 - p)^(i (M - i))`, an upper bound on `E[X_i]` for `1 <= i < M`.
pub fn xi_upper_bound(n: u32, r: u32, p: f64, i: u64) -> Result<LogValue> {
    let m = Moments::new(n, r, p)?;
    if i == 0 || i as f64 >= m.disjoint {
        return Err(Error::Domain(format!(
            "xi_upper_bound needs 1 <= i < M = {}, got i = {i}",
            m.spec.star_disjoint
        )));
    }
    let star = m
        .spec
        .star_size
        .to_u64()
        .ok_or_else(|| Error::Domain("N overflows".into()))?;
    let total = m
        .spec
        .vertices
        .to_u64()
        .ok_or_else(|| Error::Domain("R overflows".into()))?;
    if i > star {
        return Ok(LogValue::ZERO);
    }
    let exponent = i as f64 * (m.disjoint - i as f64);
    Ok(LogValue::from_value(n as f64)
        .mul(ln_binom(star, i as i64)?)
        .mul(ln_binom(total, i as i64)?)
        .mul(Moments::survive(p, exponent)))
}

/// `E[Y] / (i (1 - p)^i)`, bounding `P(X_i > 0)`. Not capped at 1.
pub fn xi_from_y_bound(p: f64, i: u64, e_y: LogValue) -> Result<LogValue> {
    check_p(p)?;
    if i == 0 {
        return Err(Error::Domain("xi_from_y_bound needs i >= 1".into()));
    }
    if p == 1.0 {
        return Err(Error::Domain(
            "xi_from_y_bound is undefined at p = 1".into(),
        ));
    }
    let denom = LogValue::from_value(i as f64).mul(Moments::survive(p, i as f64));
    Ok(e_y.div(denom))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentReport {
    pub n: u32,
    pub r: u32,
    pub p: f64,
    pub e_y: LogValue,
    pub y2_approx: LogValue,
    pub xi_bounds: BTreeMap<u64, LogValue>,
    pub case1_bounds: BTreeMap<u64, LogValue>,
}

/// All moment quantities at one `p`. Indices with `i >= M` are skipped for the
/// `X_i` upper bound; at `p = 1` the `E[Y]`-transfer bound is skipped.
pub fn moment_report(n: u32, r: u32, p: f64, indices: &[u64]) -> Result<MomentReport> {
    let e_y = expected_y(n, r, p)?;
    let y2_approx = y_second_factorial_approx(n, r, p)?;
    let mut xi_bounds = BTreeMap::new();
    let mut case1_bounds = BTreeMap::new();
    for &i in indices {
        if let Ok(v) = xi_upper_bound(n, r, p, i) {
            xi_bounds.insert(i, v);
        }
        if let Ok(v) = xi_from_y_bound(p, i, e_y) {
            case1_bounds.insert(i, v);
        }
    }
    Ok(MomentReport {
        n,
        r,
        p,
        e_y,
        y2_approx,
        xi_bounds,
        case1_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, rel: f64) -> bool {
        ((a - b) / b).abs() <= rel
    }

    #[test]
    fn p_critical_examples() {
        let oracle = |n: f64, r: f64, star: f64| ((r + 1.0) * n.ln() - r * r.ln()) / star;
        assert!(close(
            p_critical(100, 3).unwrap().p_c,
            oracle(100.0, 3.0, 4851.0),
            1e-13
        ));
        assert!(close(p_critical(100, 3).unwrap().p_c, 3.1179e-3, 1e-4));
        assert!(close(p_critical(100, 2).unwrap().p_c, 0.125548, 1e-5));
        assert!(close(p_critical(14, 2).unwrap().p_c, 0.502375, 1e-5));
        assert!(matches!(p_critical(10, 1), Err(Error::Parameter(_))));
        assert!(matches!(p_critical(3, 3), Err(Error::Parameter(_))));
    }

    #[test]
    fn p_critical_decreases_in_n() {
        for r in 2..=5u32 {
            let mut prev = f64::INFINITY;
            let mut n = 3 * r;
            while n <= 10_000 {
                let pc = p_critical(n, r).unwrap().p_c;
                assert!(pc > 0.0 && pc < prev, "r={r} n={n}");
                prev = pc;
                n += 1 + n / 50;
            }
        }
    }

    #[test]
    fn expected_y_examples() {
        assert!(close(expected_y(5, 2, 0.5).unwrap().value(), 7.5, 1e-13));
        assert!(close(
            expected_y(10, 2, 0.2).unwrap().value(),
            10.0 * 36.0 * 0.8f64.powi(7),
            1e-13
        ));
        assert!(close(
            expected_y(10, 2, 0.2).unwrap().value(),
            75.4975,
            1e-6
        ));
        assert!(close(
            expected_y(9, 3, 0.0).unwrap().value(),
            9.0 * 56.0,
            1e-13
        ));
        assert!(expected_y(5, 2, 1.0).unwrap().is_zero);
        assert!(matches!(expected_y(5, 2, 1.2), Err(Error::Parameter(_))));
        assert!(matches!(expected_y(5, 3, 0.2), Err(Error::Parameter(_))));
    }

    #[test]
    fn expected_y_scales_around_threshold() {
        let pc = p_critical(10_000, 2).unwrap().p_c;
        assert!(expected_y(10_000, 2, 1.5 * pc).unwrap().value() < 1e-2);
        assert!(expected_y(10_000, 2, 0.5 * pc).unwrap().value() > 1e2);
    }

    #[test]
    fn second_factorial_examples() {
        assert!(close(
            y_second_factorial_approx(5, 2, 0.5).unwrap().value(),
            54.375,
            1e-13
        ));
        let at_zero = y_second_factorial_approx(5, 2, 0.0).unwrap().value();
        assert!(close(at_zero, 20.0 * 36.0 + 5.0 * 6.0 * 5.0, 1e-13));
    }

    #[test]
    fn xi_upper_bound_examples() {
        let v = xi_upper_bound(10, 2, 0.5, 1).unwrap().value();
        assert!(close(v, 10.0 * 9.0 * 45.0 / 64.0, 1e-13));
        assert!(close(v, 63.281, 1e-4));
        let v = xi_upper_bound(10, 2, 0.0, 2).unwrap().value();
        assert!(close(v, 10.0 * 36.0 * 990.0, 1e-13));
        assert!(matches!(
            xi_upper_bound(10, 2, 0.5, 7),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            xi_upper_bound(10, 2, 0.5, 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn xi_from_y_examples() {
        let e_y = expected_y(10, 2, 0.2).unwrap();
        let v = xi_from_y_bound(0.2, 2, e_y).unwrap().value();
        assert!(close(v, 75.497472 / 1.28, 1e-12));
        assert!(close(v, 58.98, 1e-3));
        let e = LogValue::from_value(3.5);
        assert!(close(
            xi_from_y_bound(0.0, 1, e).unwrap().value(),
            3.5,
            1e-15
        ));
        assert!(matches!(xi_from_y_bound(1.0, 1, e), Err(Error::Domain(_))));
    }

    #[test]
    fn xi_from_y_tracks_denominator() {
        let e = LogValue::from_value(10.0);
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for i in 1..=20u64 {
            for k in 0..10 {
                let p = k as f64 / 10.0;
                let denom = i as f64 * (1.0 - p).powi(i as i32);
                pts.push((denom, xi_from_y_bound(p, i, e).unwrap().value()));
            }
        }
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pts.windows(2) {
            assert!(w[1].1 <= w[0].1 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn report_collects_valid_indices() {
        let rep = moment_report(10, 2, 0.5, &[1, 2, 7, 50]).unwrap();
        assert_eq!(
            rep.xi_bounds.keys().copied().collect::<Vec<_>>(),
            vec![1, 2]
        );
        assert_eq!(rep.case1_bounds.len(), 4);
        let rep = moment_report(10, 2, 1.0, &[1]).unwrap();
        assert!(rep.case1_bounds.is_empty());
        assert!(rep.e_y.is_zero);
    }
}
