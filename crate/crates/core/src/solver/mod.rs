//! Independence numbers of realized samples and the stability verdict.
//!
//! Solvers implement [`IndependenceSolver`] and are looked up by name in a
//! [`SolverRegistry`]; `bnb` is the production solver and `brute` the
//! exhaustive oracle for tiny instances.

mod bnb;
mod brute;
mod stats;

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Duration;

use serde::Serialize;

pub use bnb::ColoringBranchAndBound;
pub use brute::{ExhaustiveSearch, BRUTE_MAX_VERTICES};
pub use stats::{count_x1, count_y};

use crate::bitset::BitMatrix;
use crate::error::{Error, Result};
use crate::kneser::{family_stats, star_center, star_members, Family, VertexId};
use crate::sampler::{SubgraphSample, DEFAULT_MATERIALIZE_CAP};

/// Explicit search limits. Exceeding one is an error, never a verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        max_nodes: None,
        max_time: None,
    };

    pub fn nodes(max: u64) -> Self {
        Budget {
            max_nodes: Some(max),
            max_time: None,
        }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::nodes(50_000_000)
    }
}

/// What a solver run should establish.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    /// A maximum independent set.
    Maximum,
    /// Any independent set larger than the given size, or a proof there is none.
    Exceed(usize),
    /// Every independent set of exactly this size, assumed to be the maximum.
    EnumerateSize(usize),
}

/// Raw solver result over dense vertex indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub best: Vec<usize>,
    /// `Maximum`: always true. `Exceed(k)`: true iff no set above `k` exists.
    pub exhausted: bool,
    pub nodes: u64,
    /// Filled for `EnumerateSize`, sorted.
    pub found: Vec<Vec<usize>>,
}

pub trait IndependenceSolver: Send + Sync {
    fn name(&self) -> &'static str;

    /// `incumbent` is a known independent set used as the initial lower bound.
    fn solve(
        &self,
        graph: &BitMatrix,
        goal: Goal,
        incumbent: &[usize],
        budget: &Budget,
    ) -> Result<Outcome>;
}

/// Solvers selectable by name.
pub struct SolverRegistry {
    solvers: BTreeMap<&'static str, Arc<dyn IndependenceSolver>>,
}

impl SolverRegistry {
    pub fn empty() -> Self {
        SolverRegistry {
            solvers: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, solver: Arc<dyn IndependenceSolver>) {
        self.solvers.insert(solver.name(), solver);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn IndependenceSolver>> {
        self.solvers
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Unknown {
                kind: "solver",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }
}

impl Default for SolverRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(ColoringBranchAndBound));
        reg.register(Arc::new(ExhaustiveSearch));
        reg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    Exact,
    ExceedsN,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaResult {
    pub alpha: u32,
    pub witness: Family,
    /// True iff the search proved `alpha` optimal.
    pub exhausted: bool,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExceedsResult {
    pub exceeds: bool,
    /// An independent family of size `N + 1` when `exceeds`.
    pub witness: Option<Family>,
    pub nodes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum AlphaAnswer {
    Exact(AlphaResult),
    ExceedsN(ExceedsResult),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StabilityVerdict {
    pub alpha_eq_n: bool,
    /// Set only when `alpha_eq_n` and classification ran.
    pub stars_only: Option<bool>,
    pub nodes: u64,
}

/// Solver entry points bound to one solver and budget.
#[derive(Clone)]
pub struct Solver {
    engine: Arc<dyn IndependenceSolver>,
    budget: Budget,
    cap: u32,
}

impl std::fmt::Debug for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Solver")
            .field("engine", &self.engine.name())
            .field("budget", &self.budget)
            .finish()
    }
}

impl Default for Solver {
    fn default() -> Self {
        Solver::new(Arc::new(ColoringBranchAndBound), Budget::default())
    }
}

impl Solver {
    pub fn new(engine: Arc<dyn IndependenceSolver>, budget: Budget) -> Self {
        Solver {
            engine,
            budget,
            cap: DEFAULT_MATERIALIZE_CAP,
        }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn engine_name(&self) -> &'static str {
        self.engine.name()
    }

    fn family(&self, sample: &SubgraphSample, members: &[usize]) -> Family {
        family_stats(
            sample.spec.n,
            sample.spec.r,
            members.iter().map(|&v| VertexId(v as u32)),
        )
        .expect("solver returns valid vertex ids")
    }

    // A star is independent in every subgraph of K(n, r).
    fn star_incumbent(&self, sample: &SubgraphSample) -> Vec<usize> {
        if sample.spec.s != 0 {
            return Vec::new();
        }
        star_members(sample.colex(), 1)
            .iter()
            .map(|v| v.index())
            .collect()
    }

    pub fn alpha(&self, sample: &SubgraphSample, mode: AlphaMode) -> Result<AlphaAnswer> {
        match mode {
            AlphaMode::Exact => self.alpha_exact(sample).map(AlphaAnswer::Exact),
            AlphaMode::ExceedsN => self.exceeds_n(sample).map(AlphaAnswer::ExceedsN),
        }
    }

    /// Exact independence number, seeded with a star.
    pub fn alpha_exact(&self, sample: &SubgraphSample) -> Result<AlphaResult> {
        let graph = sample.adjacency(self.cap)?;
        let incumbent = self.star_incumbent(sample);
        let out = self
            .engine
            .solve(&graph, Goal::Maximum, &incumbent, &self.budget)?;
        if sample.spec.s == 0 {
            assert!(
                out.best.len() >= incumbent.len(),
                "alpha fell below the star size"
            );
        }
        Ok(AlphaResult {
            alpha: out.best.len() as u32,
            witness: self.family(sample, &out.best),
            exhausted: out.exhausted,
            nodes: out.nodes,
        })
    }

    /// Whether some independent family has `N + 1` members.
    pub fn exceeds_n(&self, sample: &SubgraphSample) -> Result<ExceedsResult> {
        sample.spec.require_stability_regime()?;
        let graph = sample.adjacency(self.cap)?;
        let incumbent = self.star_incumbent(sample);
        let n_star = incumbent.len();
        let out = self
            .engine
            .solve(&graph, Goal::Exceed(n_star), &incumbent, &self.budget)?;
        let exceeds = out.best.len() > n_star;
        let witness = exceeds.then(|| self.family(sample, &out.best[..n_star + 1]));
        Ok(ExceedsResult {
            exceeds,
            witness,
            nodes: out.nodes,
        })
    }

    /// All independent families of maximum size, sorted by member ranks.
    pub fn max_independent_families(&self, sample: &SubgraphSample) -> Result<Vec<Family>> {
        let exact = self.alpha_exact(sample)?;
        let mut nodes = exact.nodes;
        let fams = self.families_of_size(sample, exact.alpha as usize, &mut nodes)?;
        Ok(fams)
    }

    fn families_of_size(
        &self,
        sample: &SubgraphSample,
        size: usize,
        nodes: &mut u64,
    ) -> Result<Vec<Family>> {
        let graph = sample.adjacency(self.cap)?;
        let out = self
            .engine
            .solve(&graph, Goal::EnumerateSize(size), &[], &self.budget)?;
        *nodes += out.nodes;
        Ok(out.found.iter().map(|m| self.family(sample, m)).collect())
    }

    /// `alpha = N`, and with `classify` whether stars are the only maximum families.
    pub fn is_ekr_stable(
        &self,
        sample: &SubgraphSample,
        classify: bool,
    ) -> Result<StabilityVerdict> {
        let ex = self.exceeds_n(sample)?;
        let mut nodes = ex.nodes;
        let alpha_eq_n = !ex.exceeds;
        let stars_only = if classify && alpha_eq_n {
            let size = sample.spec.star_size_u64().expect("star size fits") as usize;
            let fams = self.families_of_size(sample, size, &mut nodes)?;
            Some(fams.iter().all(|f| star_center(f).is_some()))
        } else {
            None
        };
        Ok(StabilityVerdict {
            alpha_eq_n,
            stars_only,
            nodes,
        })
    }
}

/// Independence number by checking every vertex subset; `R <= 24`.
pub fn brute_alpha(sample: &SubgraphSample) -> Result<u32> {
    if sample.vertex_count() as usize > BRUTE_MAX_VERTICES {
        return Err(Error::Size(format!(
            "{} vertices, exhaustive search is limited to {BRUTE_MAX_VERTICES}",
            sample.vertex_count()
        )));
    }
    let graph = sample.adjacency(DEFAULT_MATERIALIZE_CAP)?;
    let out = ExhaustiveSearch.solve(&graph, Goal::Maximum, &[], &Budget::UNLIMITED)?;
    Ok(out.best.len() as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::graph_constants;
    use crate::sampler::{sample_subgraph, trial_seed, MaterializedBackend};

    fn sample(n: u32, r: u32, p: f64, seed: u64) -> SubgraphSample {
        let spec = graph_constants(n, r, 0).unwrap();
        sample_subgraph(
            &spec,
            p,
            seed,
            &MaterializedBackend,
            DEFAULT_MATERIALIZE_CAP,
        )
        .unwrap()
    }

    fn is_independent(s: &SubgraphSample, f: &Family) -> bool {
        f.members
            .iter()
            .all(|&a| f.members.iter().all(|&b| !s.has_edge(a, b)))
    }

    #[test]
    fn alpha_of_full_petersen_graph() {
        let s = sample(5, 2, 1.0, 0);
        let res = Solver::default().alpha_exact(&s).unwrap();
        assert_eq!(res.alpha, 4);
        assert!(res.exhausted);
        assert!(is_independent(&s, &res.witness));
        assert_eq!(brute_alpha(&s).unwrap(), 4);
    }

    #[test]
    fn alpha_of_edgeless_sample() {
        let s = sample(6, 2, 0.0, 0);
        assert_eq!(Solver::default().alpha_exact(&s).unwrap().alpha, 15);
        assert_eq!(brute_alpha(&s).unwrap(), 15);
        let s = sample(5, 3, 0.7, 0);
        assert_eq!(Solver::default().alpha_exact(&s).unwrap().alpha, 10);
    }

    #[test]
    fn brute_alpha_examples() {
        assert_eq!(brute_alpha(&sample(4, 2, 1.0, 0)).unwrap(), 3);
        assert_eq!(brute_alpha(&sample(5, 2, 1.0, 0)).unwrap(), 4);
        assert!(matches!(brute_alpha(&sample(7, 2, 1.0, 0)), Ok(6)));
        assert!(matches!(
            brute_alpha(&sample(8, 2, 1.0, 0)),
            Err(Error::Size(_))
        ));
    }

    #[test]
    fn bnb_matches_brute_on_random_samples() {
        let solver = Solver::default();
        for (n, r) in [(5, 2), (6, 2), (6, 3)] {
            for i in 0..40u64 {
                let p = [0.1, 0.3, 0.5, 0.7, 0.9][i as usize % 5];
                let s = sample(n, r, p, trial_seed(5, i));
                let exact = solver.alpha_exact(&s).unwrap();
                assert_eq!(
                    exact.alpha,
                    brute_alpha(&s).unwrap(),
                    "n={n} r={r} p={p} i={i}"
                );
                assert!(is_independent(&s, &exact.witness));
            }
        }
    }

    #[test]
    fn registry_solvers_agree() {
        let reg = SolverRegistry::default();
        assert_eq!(reg.names(), vec!["bnb", "brute"]);
        let s = sample(6, 2, 0.4, 11);
        let g = s.adjacency(100).unwrap();
        let a = reg
            .get("bnb")
            .unwrap()
            .solve(&g, Goal::Maximum, &[], &Budget::UNLIMITED)
            .unwrap();
        let b = reg
            .get("brute")
            .unwrap()
            .solve(&g, Goal::Maximum, &[], &Budget::UNLIMITED)
            .unwrap();
        assert_eq!(a.best.len(), b.best.len());
        let ea = reg
            .get("bnb")
            .unwrap()
            .solve(
                &g,
                Goal::EnumerateSize(a.best.len()),
                &[],
                &Budget::UNLIMITED,
            )
            .unwrap();
        let eb = reg
            .get("brute")
            .unwrap()
            .solve(
                &g,
                Goal::EnumerateSize(a.best.len()),
                &[],
                &Budget::UNLIMITED,
            )
            .unwrap();
        assert_eq!(ea.found, eb.found);
        assert!(matches!(reg.get("ilp"), Err(Error::Unknown { .. })));
    }

    #[test]
    fn maximum_families_hilton_milner() {
        let solver = Solver::default();
        let fams = solver
            .max_independent_families(&sample(5, 2, 1.0, 0))
            .unwrap();
        assert_eq!(fams.len(), 5);
        assert!(fams.iter().all(|f| star_center(f).is_some()));

        let fams = solver
            .max_independent_families(&sample(4, 2, 1.0, 0))
            .unwrap();
        assert_eq!(fams.len(), 8);
        assert_eq!(fams.iter().filter(|f| star_center(f).is_some()).count(), 4);
        assert!(fams.iter().all(|f| f.size() == 3));

        let fams = solver
            .max_independent_families(&sample(7, 3, 1.0, 0))
            .unwrap();
        assert_eq!(fams.len(), 7);
        assert!(fams.iter().all(|f| star_center(f).is_some()));
    }

    #[test]
    fn stability_verdicts() {
        let solver = Solver::default();
        let v = solver.is_ekr_stable(&sample(5, 2, 1.0, 0), true).unwrap();
        assert_eq!((v.alpha_eq_n, v.stars_only), (true, Some(true)));
        let v = solver.is_ekr_stable(&sample(5, 2, 0.0, 0), true).unwrap();
        assert_eq!((v.alpha_eq_n, v.stars_only), (false, None));
        let v = solver.is_ekr_stable(&sample(4, 2, 1.0, 0), true).unwrap();
        assert_eq!((v.alpha_eq_n, v.stars_only), (true, Some(false)));
        let v = solver.is_ekr_stable(&sample(5, 2, 1.0, 0), false).unwrap();
        assert_eq!(v.stars_only, None);
        assert!(matches!(
            solver.is_ekr_stable(&sample(5, 3, 1.0, 0), false),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn exceeds_witness_is_independent() {
        let s = sample(8, 2, 0.2, 3);
        let ex = Solver::default().exceeds_n(&s).unwrap();
        assert!(ex.exceeds);
        let w = ex.witness.unwrap();
        assert_eq!(w.size(), 8);
        assert!(is_independent(&s, &w));
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let s = sample(9, 3, 1.0, 0);
        let solver = Solver::default().with_budget(Budget::nodes(3));
        assert!(matches!(solver.alpha_exact(&s), Err(Error::Budget { .. })));
        let solver = Solver::default().with_budget(Budget {
            max_nodes: None,
            max_time: Some(Duration::ZERO),
        });
        assert!(matches!(solver.alpha_exact(&s), Err(Error::Budget { .. })));
    }

    #[test]
    fn coupled_alpha_is_monotone() {
        let solver = Solver::default();
        for seed in 0..15u64 {
            let mut prev = u32::MAX;
            let mut prev_stable = false;
            for p in [0.1, 0.3, 0.5, 0.7, 0.9] {
                let s = sample(7, 2, p, seed);
                let a = solver.alpha_exact(&s).unwrap().alpha;
                assert!(a <= prev && a >= 6);
                let stable = solver.is_ekr_stable(&s, false).unwrap().alpha_eq_n;
                assert!(!prev_stable || stable);
                prev = a;
                prev_stable = stable;
            }
        }
    }
}
