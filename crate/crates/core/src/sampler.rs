//! Realizations of `K_p(n, r)`.
//!
//! Every Kneser edge `{a, b}` carries a uniform value `edge_u(seed, a, b)`
//! derived from a keyed avalanche mix; the edge is retained iff that value is
//! below `p`. Nothing random is stored, and for one seed the edge sets are
//! nested in `p`.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::sync::Arc;

use crate::bitset::BitMatrix;
use crate::combinatorics::GraphSpec;
use crate::error::{Error, Result};
use crate::kneser::{for_each_combination, Colex, VertexId};

/// Default vertex cap for the materialized backend.
pub const DEFAULT_MATERIALIZE_CAP: u32 = 20_000;

/// Avalanche finalizer with the golden-ratio pre-increment.
#[inline]
pub fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` under `master`.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index))
}

#[inline]
fn edge_bits(seed: u64, a: u32, b: u32) -> u64 {
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    mix64(seed ^ mix64(((lo as u64) << 32) | hi as u64))
}

/// Uniform value in `[0, 1)` attached to the pair `{a, b}`.
///
/// The top 53 bits of the mixed key are used so the result is never 1.
pub fn edge_u(seed: u64, a: VertexId, b: VertexId) -> Result<f64> {
    if a == b {
        return Err(Error::Parameter(format!(
            "edge_u needs distinct endpoints, got {a} twice"
        )));
    }
    Ok(unit(edge_bits(seed, a.0, b.0)))
}

#[inline]
fn unit(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Keyed retention oracle for one seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeOracle {
    pub master_seed: u64,
}

impl EdgeOracle {
    pub fn new(master_seed: u64) -> Self {
        EdgeOracle { master_seed }
    }

    #[inline]
    pub fn u(&self, a: VertexId, b: VertexId) -> f64 {
        debug_assert_ne!(a, b);
        unit(edge_bits(self.master_seed, a.0, b.0))
    }

    #[inline]
    pub fn retained(&self, a: VertexId, b: VertexId, p: f64) -> bool {
        self.u(a, b) < p
    }
}

/// Calls `f` with the rank of every `B` with `|A ∩ B| = s`.
pub(crate) fn for_each_neighbor(colex: &Colex, s: u32, a: &[u32], mut f: impl FnMut(u32)) {
    let (n, r) = (colex.n(), colex.r());
    let outside: Vec<u32> = (1..=n).filter(|x| a.binary_search(x).is_err()).collect();
    let mut buf = Vec::with_capacity(r as usize);
    for_each_combination(a.len(), s as usize, |keep| {
        for_each_combination(outside.len(), (r - s) as usize, |add| {
            buf.clear();
            buf.extend(keep.iter().map(|&i| a[i]));
            buf.extend(add.iter().map(|&j| outside[j]));
            buf.sort_unstable();
            f(colex.rank_sorted(&buf));
        });
    });
}

/// Edge membership of one realized subgraph.
pub trait EdgeSet: Send + Sync {
    fn backend_name(&self) -> &'static str;

    /// Whether `{a, b}` is an edge of the sample.
    fn contains(&self, a: VertexId, b: VertexId) -> bool;

    /// Same as [`contains`](Self::contains) for a pair already known to be
    /// adjacent in the full graph.
    fn contains_base_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.contains(a, b)
    }

    /// The adjacency as a bit matrix, if this backend stores one.
    fn matrix(&self) -> Option<&BitMatrix> {
        None
    }
}

struct Materialized {
    adjacency: BitMatrix,
}

impl EdgeSet for Materialized {
    fn backend_name(&self) -> &'static str {
        "materialized"
    }

    fn contains(&self, a: VertexId, b: VertexId) -> bool {
        self.adjacency.get(a.index(), b.index())
    }

    fn matrix(&self) -> Option<&BitMatrix> {
        Some(&self.adjacency)
    }
}

struct Lazy {
    colex: Arc<Colex>,
    s: u32,
    oracle: EdgeOracle,
    p: f64,
}

impl EdgeSet for Lazy {
    fn backend_name(&self) -> &'static str {
        "lazy"
    }

    fn contains(&self, a: VertexId, b: VertexId) -> bool {
        if a == b {
            return false;
        }
        let (Ok(sa), Ok(sb)) = (self.colex.unrank(a), self.colex.unrank(b)) else {
            return false;
        };
        sa.intersection_size(&sb) == self.s as usize && self.oracle.retained(a, b, self.p)
    }

    fn contains_base_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.oracle.retained(a, b, self.p)
    }
}

/// Everything a backend needs to realize a sample.
pub struct BuildRequest<'a> {
    pub colex: &'a Arc<Colex>,
    pub s: u32,
    pub p: f64,
    pub seed: u64,
    pub cap: u32,
}

/// A strategy for storing the retained edges.
pub trait SamplerBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, req: &BuildRequest<'_>) -> Result<Box<dyn EdgeSet>>;
}

/// Symmetric bit-matrix adjacency; fastest for the solver at small `R`.
pub struct MaterializedBackend;

impl SamplerBackend for MaterializedBackend {
    fn name(&self) -> &'static str {
        "materialized"
    }

    fn build(&self, req: &BuildRequest<'_>) -> Result<Box<dyn EdgeSet>> {
        let colex = req.colex;
        let total = colex.total();
        if total > req.cap {
            return Err(Error::Capacity {
                cap: req.cap as u64,
                requested: total as u64,
            });
        }
        let oracle = EdgeOracle::new(req.seed);
        let mut adjacency = BitMatrix::new(total as usize);
        if req.p > 0.0 {
            let mut buf = vec![0u32; colex.r() as usize];
            for a in 0..total {
                colex.unrank_into(a, &mut buf);
                for_each_neighbor(colex, req.s, &buf, |b| {
                    if b > a && oracle.retained(VertexId(a), VertexId(b), req.p) {
                        adjacency.set_edge(a as usize, b as usize);
                    }
                });
            }
        }
        Ok(Box::new(Materialized { adjacency }))
    }
}

/// Answers membership queries from the oracle without storing edges.
pub struct LazyBackend;

impl SamplerBackend for LazyBackend {
    fn name(&self) -> &'static str {
        "lazy"
    }

    fn build(&self, req: &BuildRequest<'_>) -> Result<Box<dyn EdgeSet>> {
        Ok(Box::new(Lazy {
            colex: Arc::clone(req.colex),
            s: req.s,
            oracle: EdgeOracle::new(req.seed),
            p: req.p,
        }))
    }
}

/// Picks materialized up to the cap and lazy beyond it.
pub struct AutoBackend;

impl SamplerBackend for AutoBackend {
    fn name(&self) -> &'static str {
        "auto"
    }

    fn build(&self, req: &BuildRequest<'_>) -> Result<Box<dyn EdgeSet>> {
        if req.colex.total() <= req.cap {
            MaterializedBackend.build(req)
        } else {
            LazyBackend.build(req)
        }
    }
}

/// Backends selectable by name.
pub struct BackendRegistry {
    backends: BTreeMap<&'static str, Arc<dyn SamplerBackend>>,
}

impl BackendRegistry {
    pub fn empty() -> Self {
        BackendRegistry {
            backends: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, backend: Arc<dyn SamplerBackend>) {
        self.backends.insert(backend.name(), backend);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn SamplerBackend>> {
        self.backends
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Unknown {
                kind: "backend",
                name: name.to_string(),
                available: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.backends.keys().copied().collect()
    }
}

impl Default for BackendRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        reg.register(Arc::new(MaterializedBackend));
        reg.register(Arc::new(LazyBackend));
        reg.register(Arc::new(AutoBackend));
        reg
    }
}

/// One realization of `K_p(n, r, s)`; immutable after construction.
pub struct SubgraphSample {
    pub spec: GraphSpec,
    pub p: f64,
    pub seed: u64,
    colex: Arc<Colex>,
    edges: Box<dyn EdgeSet>,
}

impl std::fmt::Debug for SubgraphSample {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SubgraphSample")
            .field("n", &self.spec.n)
            .field("r", &self.spec.r)
            .field("s", &self.spec.s)
            .field("p", &self.p)
            .field("seed", &self.seed)
            .field("backend", &self.edges.backend_name())
            .finish()
    }
}

impl SubgraphSample {
    pub fn colex(&self) -> &Arc<Colex> {
        &self.colex
    }

    pub fn vertex_count(&self) -> u32 {
        self.colex.total()
    }

    pub fn backend_name(&self) -> &'static str {
        self.edges.backend_name()
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains(a, b)
    }

    /// Retention test for a pair the caller knows is a Kneser edge.
    pub fn has_base_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edges.contains_base_edge(a, b)
    }

    /// Adjacency matrix, borrowed when materialized and built otherwise.
    pub fn adjacency(&self, cap: u32) -> Result<Cow<'_, BitMatrix>> {
        if let Some(m) = self.edges.matrix() {
            return Ok(Cow::Borrowed(m));
        }
        let req = BuildRequest {
            colex: &self.colex,
            s: self.spec.s,
            p: self.p,
            seed: self.seed,
            cap,
        };
        let built = MaterializedBackend.build(&req)?;
        Ok(Cow::Owned(built.matrix().expect("materialized").clone()))
    }

    /// Number of retained edges, by enumeration of the base graph.
    pub fn retained_edge_count(&self) -> u64 {
        if let Some(m) = self.edges.matrix() {
            return m.edge_count();
        }
        let mut count = 0u64;
        let mut buf = vec![0u32; self.colex.r() as usize];
        for a in 0..self.colex.total() {
            self.colex.unrank_into(a, &mut buf);
            for_each_neighbor(&self.colex, self.spec.s, &buf, |b| {
                if b > a && self.edges.contains_base_edge(VertexId(a), VertexId(b)) {
                    count += 1;
                }
            });
        }
        count
    }
}

/// Realizes `K_p(n, r, s)` with the given backend.
pub fn sample_subgraph(
    spec: &GraphSpec,
    p: f64,
    seed: u64,
    backend: &dyn SamplerBackend,
    cap: u32,
) -> Result<SubgraphSample> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} is outside [0, 1]")));
    }
    let colex = Arc::new(Colex::new(spec.n, spec.r)?);
    sample_with_colex(spec, colex, p, seed, backend, cap)
}

/// As [`sample_subgraph`], reusing a ranking table.
pub fn sample_with_colex(
    spec: &GraphSpec,
    colex: Arc<Colex>,
    p: f64,
    seed: u64,
    backend: &dyn SamplerBackend,
    cap: u32,
) -> Result<SubgraphSample> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} is outside [0, 1]")));
    }
    let edges = backend.build(&BuildRequest {
        colex: &colex,
        s: spec.s,
        p,
        seed,
        cap,
    })?;
    Ok(SubgraphSample {
        spec: spec.clone(),
        p,
        seed,
        colex,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combinatorics::graph_constants;

    fn sample(n: u32, r: u32, p: f64, seed: u64, backend: &dyn SamplerBackend) -> SubgraphSample {
        let spec = graph_constants(n, r, 0).unwrap();
        sample_subgraph(&spec, p, seed, backend, DEFAULT_MATERIALIZE_CAP).unwrap()
    }

    #[test]
    fn mix64_reference_values() {
        // splitmix64 outputs for state 0 (first two draws)
        assert_eq!(mix64(0), 0xE220_A839_7B1D_CDAF);
        assert_eq!(mix64(0x9E37_79B9_7F4A_7C15), 0x6E78_9E6A_A1B9_65F4);
    }

    #[test]
    fn edge_u_symmetric_and_in_range() {
        for seed in [0u64, 1, 0xDEAD_BEEF] {
            for a in 0..40u32 {
                for b in 0..40u32 {
                    if a == b {
                        assert!(edge_u(seed, VertexId(a), VertexId(b)).is_err());
                        continue;
                    }
                    let u = edge_u(seed, VertexId(a), VertexId(b)).unwrap();
                    assert_eq!(u, edge_u(seed, VertexId(b), VertexId(a)).unwrap());
                    assert!((0.0..1.0).contains(&u));
                }
            }
        }
        assert!(unit(u64::MAX) < 1.0);
    }

    #[test]
    fn edge_u_mean_is_uniform() {
        let mut sum = 0.0;
        let mut k = 0u32;
        'outer: for a in 0..1_000u32 {
            for b in a + 1..1_000 {
                sum += edge_u(7, VertexId(a), VertexId(b)).unwrap();
                k += 1;
                if k == 100_000 {
                    break 'outer;
                }
            }
        }
        let mean = sum / k as f64;
        assert!((0.497..=0.503).contains(&mean), "mean {mean}");
    }

    #[test]
    fn distinct_seeds_give_distinct_values() {
        let mut differ = 0;
        for i in 0..10_000u32 {
            let (a, b) = (VertexId(i), VertexId(i + 17_000));
            if edge_u(1, a, b).unwrap() != edge_u(2, a, b).unwrap() {
                differ += 1;
            }
        }
        assert!(differ >= 9_990);
    }

    #[test]
    fn extremes_of_p() {
        for backend in [&MaterializedBackend as &dyn SamplerBackend, &LazyBackend] {
            assert_eq!(sample(5, 2, 1.0, 3, backend).retained_edge_count(), 15);
            assert_eq!(sample(5, 2, 0.0, 3, backend).retained_edge_count(), 0);
            assert_eq!(sample(7, 3, 1.0, 3, backend).retained_edge_count(), 70);
        }
    }

    #[test]
    fn rejects_bad_p_and_capacity() {
        let spec = graph_constants(5, 2, 0).unwrap();
        assert!(matches!(
            sample_subgraph(&spec, 1.5, 0, &MaterializedBackend, 100),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            sample_subgraph(&spec, -0.1, 0, &LazyBackend, 100),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            sample_subgraph(&spec, 0.5, 0, &MaterializedBackend, 9),
            Err(Error::Capacity {
                cap: 9,
                requested: 10
            })
        ));
        let s = sample_subgraph(&spec, 0.5, 0, &AutoBackend, 9).unwrap();
        assert_eq!(s.backend_name(), "lazy");
    }

    #[test]
    fn backends_agree_on_k62() {
        let spec = graph_constants(6, 2, 0).unwrap();
        for cfg in 0..100u64 {
            let seed = trial_seed(99, cfg);
            let p = (cfg as f64 + 0.5) / 100.0;
            let m = sample_subgraph(&spec, p, seed, &MaterializedBackend, 100).unwrap();
            let l = sample_subgraph(&spec, p, seed, &LazyBackend, 100).unwrap();
            for a in 0..15 {
                for b in 0..15 {
                    let (a, b) = (VertexId(a), VertexId(b));
                    assert_eq!(m.has_edge(a, b), l.has_edge(a, b));
                }
            }
        }
    }

    #[test]
    fn coupling_is_monotone() {
        let spec = graph_constants(7, 2, 0).unwrap();
        for seed in 0..20u64 {
            let lo = sample_subgraph(&spec, 0.3, seed, &MaterializedBackend, 100).unwrap();
            let hi = sample_subgraph(&spec, 0.6, seed, &MaterializedBackend, 100).unwrap();
            for a in 0..21 {
                for b in 0..21 {
                    let (a, b) = (VertexId(a), VertexId(b));
                    assert!(!lo.has_edge(a, b) || hi.has_edge(a, b));
                }
            }
        }
    }

    #[test]
    fn general_s_adjacency() {
        let spec = graph_constants(5, 2, 1).unwrap();
        let s = sample_subgraph(&spec, 1.0, 0, &MaterializedBackend, 100).unwrap();
        assert_eq!(s.retained_edge_count(), 30);
        let l = sample_subgraph(&spec, 1.0, 0, &LazyBackend, 100).unwrap();
        assert_eq!(l.retained_edge_count(), 30);
    }

    #[test]
    fn registry_lookup() {
        let reg = BackendRegistry::default();
        assert_eq!(reg.names(), vec!["auto", "lazy", "materialized"]);
        assert_eq!(reg.get("lazy").unwrap().name(), "lazy");
        assert!(matches!(reg.get("dense"), Err(Error::Unknown { .. })));
    }
}
