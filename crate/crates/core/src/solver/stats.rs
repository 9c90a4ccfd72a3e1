//! Exact counts of the near-extremal families on one sample.

use crate::combinatorics::binom_u64;
use crate::error::{Error, Result};
use crate::kneser::{for_each_combination, VertexId};
use crate::sampler::SubgraphSample;

fn require_kneser(sample: &SubgraphSample) -> Result<()> {
    if sample.spec.s != 0 {
        return Err(Error::Infeasible(format!(
            "star statistics need s = 0, got s = {}",
            sample.spec.s
        )));
    }
    Ok(())
}

/// Calls `f` with every `(x, A)` where `x` is not in `A`, and the ranks of
/// the members of `S_x` disjoint from `A`.
fn for_each_outside_pair(
    sample: &SubgraphSample,
    mut f: impl FnMut(u32, VertexId, &[u32], &[VertexId]),
) {
    let colex = sample.colex();
    let (n, r) = (colex.n(), colex.r());
    let mut a = vec![0u32; r as usize];
    let mut disjoint = Vec::new();
    let mut buf = Vec::with_capacity(r as usize);
    for rank in 0..colex.total() {
        colex.unrank_into(rank, &mut a);
        for x in 1..=n {
            if a.binary_search(&x).is_ok() {
                continue;
            }
            let outside: Vec<u32> = (1..=n)
                .filter(|&e| e != x && a.binary_search(&e).is_err())
                .collect();
            disjoint.clear();
            for_each_combination(outside.len(), r as usize - 1, |pick| {
                buf.clear();
                buf.extend(pick.iter().map(|&i| outside[i]));
                buf.push(x);
                buf.sort_unstable();
                disjoint.push(VertexId(colex.rank_sorted(&buf)));
            });
            f(x, VertexId(rank), &a, &disjoint);
        }
    }
}

/// Number of pairs `(x, A)` with `A` outside `S_x` such that `S_x ∪ {A}` is
/// independent in the sample: the independent `(N + 1)`-families that
/// contain a whole star.
pub fn count_y(sample: &SubgraphSample) -> Result<u64> {
    require_kneser(sample)?;
    let mut count = 0u64;
    for_each_outside_pair(sample, |_, a, _, disjoint| {
        if disjoint.iter().all(|&b| !sample.has_base_edge(a, b)) {
            count += 1;
        }
    });
    Ok(count)
}

/// Number of independent families of size `N` with maximum degree exactly
/// `N - 1`: a star with one member `C` swapped for a set `B` outside it.
pub fn count_x1(sample: &SubgraphSample) -> Result<u64> {
    require_kneser(sample)?;
    let spec = &sample.spec;
    let (n, r) = (spec.n as u64, spec.r as u64);
    let star = spec
        .star_size_u64()
        .ok_or_else(|| Error::Parameter("star size overflows".into()))?;
    if star < 2 {
        return Ok(0);
    }
    // members of S_x that also contain a fixed y != x
    let shared = binom_u64(n - 2, r.saturating_sub(2)).unwrap_or(u64::MAX);
    let ambiguous = shared.saturating_add(1) >= star - 1;
    let colex = sample.colex();
    let mut c_buf = vec![0u32; r as usize];
    let mut count = 0u64;
    for_each_outside_pair(sample, |x, b, b_set, disjoint| {
        let mut retained = disjoint.iter().filter(|&&c| sample.has_base_edge(b, c));
        let first = retained.next().copied();
        if retained.next().is_some() {
            return;
        }
        let accept = |c: VertexId, c_buf: &mut Vec<u32>| -> bool {
            if !ambiguous {
                return true;
            }
            colex.unrank_into(c.0, c_buf);
            // d(A) = N - 1 and x is the smallest element attaining it
            (1..=n as u32).filter(|&y| y != x).all(|y| {
                let deg = shared - c_buf.contains(&y) as u64 + b_set.contains(&y) as u64;
                deg < star - 1 || (deg == star - 1 && y > x)
            })
        };
        match first {
            Some(c) => count += accept(c, &mut c_buf) as u64,
            None if !ambiguous => count += star,
            None => {
                for c in crate::kneser::star_members(colex, x) {
                    count += accept(c, &mut c_buf) as u64;
                }
            }
        }
    });
    Ok(count)
}
