//! Deterministic property battery. Failures are report entries, never errors.

use serde::Serialize;

use crate::combinatorics::{
    binom, binomial_bounds_hold, exp_sandwich_holds, graph_constants, nm_gap, stirling_bounds_hold,
    stirling_remainders, BigCount, GraphSpec,
};
use crate::error::Result;
use crate::kneser::{family_stats, neighbors, star_center, Colex, Family, RSet, VertexId};
use crate::sampler::{
    mix64, sample_subgraph, trial_seed, LazyBackend, MaterializedBackend, SubgraphSample,
    DEFAULT_MATERIALIZE_CAP,
};
use crate::solver::{brute_alpha, Budget, ExhaustiveSearch, Goal, IndependenceSolver, Solver};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyLimits {
    pub max_n: u32,
    pub max_r: u32,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits {
            max_n: 12,
            max_r: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyItem {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub limits: VerifyLimits,
    pub items: Vec<VerifyItem>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.items.iter().all(|i| i.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyItem> {
        self.items.iter().filter(|i| !i.passed)
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for item in &self.items {
            let tag = if item.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", item.name, item.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} items, {} failed", self.items.len(), failed)
    }
}

// Exact searches on full graphs above this size are skipped.
const EKR_MAX_VERTICES: u32 = 2_000;
const ENUMERATE_MAX_VERTICES: u32 = 120;

fn item(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> VerifyItem {
    VerifyItem {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn full_graph(spec: &GraphSpec) -> Result<SubgraphSample> {
    sample_subgraph(spec, 1.0, 0, &MaterializedBackend, DEFAULT_MATERIALIZE_CAP)
}

fn pairs(limits: VerifyLimits) -> impl Iterator<Item = (u32, u32)> {
    (2..=limits.max_r).flat_map(move |r| (2 * r..=limits.max_n).map(move |n| (n, r)))
}

/// `alpha(K(n, r)) = C(n - 1, r - 1)` for `n >= 2r`.
fn ekr_items(limits: VerifyLimits, solver: &Solver, out: &mut Vec<VerifyItem>) -> Result<()> {
    for (n, r) in pairs(limits) {
        let spec = graph_constants(n, r, 0)?;
        let name = format!("ekr K({n},{r})");
        if spec.vertex_count().map_or(true, |v| v > EKR_MAX_VERTICES) {
            continue;
        }
        let sample = full_graph(&spec)?;
        match solver.alpha_exact(&sample) {
            Ok(a) => {
                let want = spec.star_size_u64().unwrap_or(0);
                out.push(item(
                    name,
                    a.alpha as u64 == want,
                    format!("alpha = {}, N = {want}", a.alpha),
                ));
            }
            Err(e) => out.push(item(name, false, e.to_string())),
        }
    }
    Ok(())
}

/// Maximum families of the full graph: only stars for `n > 2r`, and
/// `2^C(2r-1, r-1)` of them at `n = 2r`.
fn uniqueness_items(
    limits: VerifyLimits,
    solver: &Solver,
    out: &mut Vec<VerifyItem>,
) -> Result<()> {
    for (n, r) in pairs(limits) {
        let spec = graph_constants(n, r, 0)?;
        let small = spec
            .vertex_count()
            .is_ok_and(|v| v <= ENUMERATE_MAX_VERTICES);
        if !small || (n == 2 * r && r > 3) {
            continue;
        }
        let name = format!("stars-only K({n},{r})");
        let fams = match solver.max_independent_families(&full_graph(&spec)?) {
            Ok(f) => f,
            Err(e) => {
                out.push(item(name, false, e.to_string()));
                continue;
            }
        };
        let stars = fams.iter().filter(|f| star_center(f).is_some()).count();
        if n > 2 * r {
            let ok = fams.len() == n as usize && stars == n as usize;
            out.push(item(
                name,
                ok,
                format!("{} maxima, {stars} stars", fams.len()),
            ));
        } else {
            let pairs = binom(2 * r as u64 - 1, r as i64 - 1)
                .to_u64()
                .expect("small");
            let expected = 1usize << pairs;
            let ok = fams.len() == expected && stars == n as usize;
            out.push(item(
                name,
                ok,
                format!(
                    "uniqueness fails at n = 2r ({} maxima, {stars} stars)",
                    fams.len()
                ),
            ));
        }
    }
    Ok(())
}

/// `{2..r+1}` together with every r-set through 1 that meets it.
pub fn hilton_milner_family(n: u32, r: u32) -> Result<Family> {
    let colex = Colex::new(n, r)?;
    let b: Vec<u32> = (2..=r + 1).collect();
    let b_set = RSet::new(n, r, b)?;
    let members = colex
        .sets()
        .filter(|a| a == &b_set || (a.contains(1) && a.intersection_size(&b_set) > 0))
        .map(|a| colex.rank(&a))
        .collect::<Result<Vec<_>>>()?;
    family_stats(n, r, members)
}

fn common_element(f: &Family) -> bool {
    f.degrees.iter().any(|&d| d as usize == f.size())
}

fn hilton_milner_items(limits: VerifyLimits, out: &mut Vec<VerifyItem>) -> Result<()> {
    for (n, r) in pairs(limits).filter(|&(n, r)| n > 2 * r) {
        let spec = graph_constants(n, r, 0)?;
        let hm = hilton_milner_family(n, r)?;
        // N - M + 1
        let want = spec.star_size.as_big() + 1u32 - spec.star_disjoint.as_big();
        let mut ok = hm.is_intersecting()
            && !common_element(&hm)
            && BigCount::from_u64(hm.size() as u64) == BigCount::from(want);
        let mut detail = format!("non-trivial family of size {}", hm.size());
        // no larger non-trivial intersecting family, by exhaustion
        if spec
            .vertex_count()
            .is_ok_and(|v| v as usize <= crate::solver::BRUTE_MAX_VERTICES)
        {
            let graph = full_graph(&spec)?
                .adjacency(DEFAULT_MATERIALIZE_CAP)?
                .into_owned();
            let star = spec.star_size_u64().expect("small") as usize;
            for k in hm.size() + 1..=star {
                let found = ExhaustiveSearch
                    .solve(&graph, Goal::EnumerateSize(k), &[], &Budget::UNLIMITED)?
                    .found;
                let larger = found.iter().any(|m| {
                    let f = family_stats(n, r, m.iter().map(|&v| VertexId(v as u32)))
                        .expect("valid ids");
                    !common_element(&f)
                });
                ok &= !larger;
            }
            detail.push_str(", maximal among non-trivial families");
        }
        out.push(item(format!("hilton-milner K({n},{r})"), ok, detail));
    }
    Ok(())
}

fn ranking_items(limits: VerifyLimits, out: &mut Vec<VerifyItem>) -> Result<()> {
    let mut checked = 0u64;
    let mut ok = true;
    for n in 1..=limits.max_n {
        for r in 1..=limits.max_r.min(n) {
            let colex = Colex::new(n, r)?;
            let mut prev: Option<RSet> = None;
            for k in 0..colex.total() {
                let set = colex.unrank(VertexId(k))?;
                ok &= colex.rank(&set)? == VertexId(k);
                if let Some(p) = &prev {
                    // colex: compare from the largest element down
                    ok &= p.elements().iter().rev().lt(set.elements().iter().rev());
                }
                prev = Some(set);
                checked += 1;
            }
            ok &= BigCount::from_u64(colex.total() as u64) == binom(n as u64, r as i64);
        }
    }
    out.push(item(
        "rank/unrank",
        ok,
        format!("{checked} sets, colex order increasing"),
    ));

    let mut ok = true;
    for (n, r) in pairs(limits) {
        for s in 0..r {
            let spec = graph_constants(n, r, s)?;
            let colex = Colex::new(n, r)?;
            let a = colex.unrank(VertexId(colex.total() / 2))?;
            ok &= neighbors(n, r, s, &a)?.len() as u64 == spec.degree.to_u64().expect("small");
        }
    }
    out.push(item(
        "degree formula",
        ok,
        "C(r,s) C(n-r,r-s) on every (n,r,s)",
    ));
    Ok(())
}

/// A deterministic pseudo-random family with roughly `density` of all r-sets.
pub fn random_family(n: u32, r: u32, seed: u64) -> Result<Family> {
    let total = Colex::new(n, r)?.total();
    let density = (mix64(seed) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let members = (0..total).filter(|&k| {
        let u = (trial_seed(seed, k as u64) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < density
    });
    family_stats(n, r, members.map(VertexId))
}

/// Whether every intersecting pair meets in a single point.
pub fn pairs_meet_once(f: &Family) -> bool {
    let sets = f.sets();
    sets.iter()
        .enumerate()
        .all(|(i, a)| sets[i + 1..].iter().all(|b| a.intersection_size(b) <= 1))
}

fn identity_items(out: &mut Vec<VerifyItem>) -> Result<()> {
    let (mut ok, mut bound_ok) = (true, true);
    let mut count = 0;
    for n in 4..=500u32 {
        for r in 2..=20.min(n / 2) {
            let spec = graph_constants(n, r, 0)?;
            let gap = nm_gap(n, r)?;
            ok &= Some(gap.clone()) == spec.star_size.checked_sub(&spec.star_disjoint);
            // (n - 1)(N - M) <= r(r - 1) N
            let lhs = gap.as_big() * (n - 1);
            let rhs = spec.star_size.as_big() * (r * (r - 1));
            bound_ok &= lhs <= rhs;
            count += 1;
        }
    }
    out.push(item(
        "N - M as a sum",
        ok,
        format!("{count} pairs with n <= 500, r <= 20"),
    ));
    out.push(item("N - M upper bound", bound_ok, "(n-1)(N-M) <= r(r-1)N"));

    let (mut ok, mut tight) = (true, true);
    let mut families = 0;
    for i in 0..1000u64 {
        let seed = trial_seed(0xFA111E5, i);
        let r = 1 + (seed % 3) as u32;
        let n = r + ((seed >> 8) % (11 - r as u64)) as u32;
        let f = random_family(n, r, seed)?;
        ok &= f.induced_edges as i128 >= f.edge_lower_bound;
        tight &= (f.induced_edges as i128 == f.edge_lower_bound) == pairs_meet_once(&f);
        families += 1;
    }
    out.push(item(
        "family edge bound",
        ok,
        format!("{families} random families, n <= 10, r <= 3"),
    ));
    out.push(item(
        "family edge bound equality",
        tight,
        "tight exactly when intersecting pairs share one point",
    ));

    let ok = (1..=200u64).all(|n| (1..=n).all(|k| binomial_bounds_hold(n, k)));
    out.push(item(
        "binomial bounds",
        ok,
        "(n/k)^k <= C(n,k) <= n^k/k! <= (en/k)^k, n <= 200",
    ));

    let rem = stirling_remainders(10_000);
    let ok = rem
        .iter()
        .enumerate()
        .all(|(i, &d)| stirling_bounds_hold(i as u64 + 1, d));
    out.push(item("stirling bounds", ok, "n <= 10^4"));

    let ok = (-500..=500).all(|k| exp_sandwich_holds(k as f64 / 1000.0));
    out.push(item(
        "exponential sandwich",
        ok,
        "|x| <= 1/2 on a 0.001 grid",
    ));
    Ok(())
}

fn oracle_items(solver: &Solver, out: &mut Vec<VerifyItem>) -> Result<()> {
    let mut ok = true;
    let mut runs = 0;
    for (n, r) in [(5u32, 2u32), (6, 2)] {
        let spec = graph_constants(n, r, 0)?;
        for p in [0.3, 0.7] {
            for t in 0..50 {
                let sample = sample_subgraph(
                    &spec,
                    p,
                    trial_seed(0xB0B, t),
                    &MaterializedBackend,
                    DEFAULT_MATERIALIZE_CAP,
                )?;
                ok &= solver.alpha_exact(&sample)?.alpha == brute_alpha(&sample)?;
                runs += 1;
            }
        }
    }
    out.push(item(
        "bnb matches brute",
        ok,
        format!("{runs} samples of K(5,2), K(6,2)"),
    ));

    let mut ok = true;
    for (n, r, s) in [(7u32, 2u32, 0u32), (7, 3, 0), (7, 3, 1)] {
        let spec = graph_constants(n, r, s)?;
        for (t, p) in [0.1, 0.5, 0.9].into_iter().enumerate() {
            let seed = trial_seed(0xC0DE, t as u64);
            let a = sample_subgraph(
                &spec,
                p,
                seed,
                &MaterializedBackend,
                DEFAULT_MATERIALIZE_CAP,
            )?;
            let b = sample_subgraph(&spec, p, seed, &LazyBackend, DEFAULT_MATERIALIZE_CAP)?;
            let v = a.vertex_count();
            ok &= (0..v).all(|x| {
                (0..v).all(|y| {
                    x == y
                        || a.has_edge(VertexId(x), VertexId(y))
                            == b.has_edge(VertexId(x), VertexId(y))
                })
            });
        }
    }
    out.push(item(
        "backend equivalence",
        ok,
        "materialized and lazy edge sets agree",
    ));
    Ok(())
}

/// Runs every item within `limits`.
pub fn verify_suite(limits: VerifyLimits) -> Result<VerifyReport> {
    let solver = Solver::default().with_budget(Budget::nodes(20_000_000));
    let mut items = Vec::new();
    ekr_items(limits, &solver, &mut items)?;
    uniqueness_items(limits, &solver, &mut items)?;
    hilton_milner_items(limits, &mut items)?;
    ranking_items(limits, &mut items)?;
    identity_items(&mut items)?;
    oracle_items(&solver, &mut items)?;
    Ok(VerifyReport { limits, items })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_limits_all_pass() {
        let report = verify_suite(VerifyLimits::default()).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.items.iter().any(|i| i.name == "ekr K(12,3)"));
    }

    #[test]
    fn n_equals_2r_reports_failed_uniqueness() {
        let report = verify_suite(VerifyLimits { max_n: 5, max_r: 2 }).unwrap();
        let k42 = report
            .items
            .iter()
            .find(|i| i.name == "stars-only K(4,2)")
            .unwrap();
        assert!(k42.passed);
        assert_eq!(k42.detail, "uniqueness fails at n = 2r (8 maxima, 4 stars)");
        let k52 = report
            .items
            .iter()
            .find(|i| i.name == "stars-only K(5,2)")
            .unwrap();
        assert_eq!(k52.detail, "5 maxima, 5 stars");
    }

    #[test]
    fn hilton_milner_sizes() {
        assert_eq!(hilton_milner_family(5, 2).unwrap().size(), 3);
        // N - M + 1 = 15 - 3 + 1
        assert_eq!(hilton_milner_family(7, 3).unwrap().size(), 13);
    }

    #[test]
    fn random_families_are_reproducible() {
        assert_eq!(
            random_family(8, 3, 9).unwrap(),
            random_family(8, 3, 9).unwrap()
        );
    }
}
