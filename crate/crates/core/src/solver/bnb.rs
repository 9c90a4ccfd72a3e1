use std::time::Instant;

use super::{Budget, Goal, IndependenceSolver, Outcome};
use crate::bitset::{BitMatrix, BitSet};
use crate::error::{BudgetKind, Error, Result};

/// Branch and bound on the complement graph.
///
/// An independent set of `G` is a clique of the complement, and a partition
/// of the candidates into cliques of `G` (a greedy colouring of the
/// complement) bounds how many of them can still be added. Vertices are
/// numbered by complement degree, highest first, ties by lowest id; each
/// node branches on the vertex with the largest colour.
#[derive(Clone, Copy, Debug, Default)]
pub struct ColoringBranchAndBound;

impl IndependenceSolver for ColoringBranchAndBound {
    fn name(&self) -> &'static str {
        "bnb"
    }

    fn solve(
        &self,
        graph: &BitMatrix,
        goal: Goal,
        incumbent: &[usize],
        budget: &Budget,
    ) -> Result<Outcome> {
        let ordered = Ordered::new(graph);
        let mut search = Search::new(&ordered.graph, budget, goal);
        search.best = incumbent.iter().map(|&v| ordered.position[v]).collect();
        let stop_early = matches!(goal, Goal::Exceed(k) if search.best.len() > k);
        if !stop_early {
            search.expand(BitSet::full(graph.size()))?;
        }
        let exhausted = match goal {
            Goal::Maximum => true,
            Goal::Exceed(k) => search.best.len() <= k,
            Goal::EnumerateSize(_) => true,
        };
        let mut best: Vec<usize> = search.best.iter().map(|&v| ordered.original[v]).collect();
        best.sort_unstable();
        let mut found: Vec<Vec<usize>> = search
            .found
            .iter()
            .map(|set| {
                let mut s: Vec<usize> = set.iter().map(|&v| ordered.original[v]).collect();
                s.sort_unstable();
                s
            })
            .collect();
        found.sort();
        Ok(Outcome {
            best,
            exhausted,
            nodes: search.nodes,
            found,
        })
    }
}

/// The input graph renumbered into search order.
struct Ordered {
    graph: BitMatrix,
    original: Vec<usize>,
    position: Vec<usize>,
}

impl Ordered {
    fn new(g: &BitMatrix) -> Self {
        let size = g.size();
        let mut original: Vec<usize> = (0..size).collect();
        // complement degree descending == degree ascending
        original.sort_by_key(|&v| (g.degree(v), v));
        let mut position = vec![0; size];
        for (i, &v) in original.iter().enumerate() {
            position[v] = i;
        }
        let mut graph = BitMatrix::new(size);
        for (i, &v) in original.iter().enumerate() {
            for j in g.neighbors(v) {
                let pj = position[j];
                if i < pj {
                    graph.set_edge(i, pj);
                }
            }
        }
        Ordered {
            graph,
            original,
            position,
        }
    }
}

enum Flow {
    Continue,
    Stop,
}

struct Search<'a> {
    graph: &'a BitMatrix,
    goal: Goal,
    budget: &'a Budget,
    started: Instant,
    nodes: u64,
    current: Vec<usize>,
    best: Vec<usize>,
    found: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn new(graph: &'a BitMatrix, budget: &'a Budget, goal: Goal) -> Self {
        Search {
            graph,
            goal,
            budget,
            started: Instant::now(),
            nodes: 0,
            current: Vec::new(),
            best: Vec::new(),
            found: Vec::new(),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.nodes += 1;
        if let Some(max) = self.budget.max_nodes {
            if self.nodes > max {
                return Err(Error::Budget {
                    nodes: self.nodes,
                    reason: BudgetKind::Nodes,
                });
            }
        }
        if let Some(limit) = self.budget.max_time {
            if self.nodes % 256 == 1 && self.started.elapsed() > limit {
                return Err(Error::Budget {
                    nodes: self.nodes,
                    reason: BudgetKind::Time,
                });
            }
        }
        Ok(())
    }

    /// Greedy clique cover of `p`: vertices in cover order with the number of
    /// cliques used so far.
    fn cover(&self, p: &BitSet) -> (Vec<usize>, Vec<usize>) {
        let mut order = Vec::with_capacity(p.count());
        let mut colors = Vec::with_capacity(order.capacity());
        let mut uncolored = p.clone();
        let mut color = 0;
        while !uncolored.is_empty() {
            color += 1;
            let mut q = uncolored.clone();
            while let Some(v) = q.first() {
                q.remove(v);
                q.intersect_with(self.graph.row(v));
                uncolored.remove(v);
                order.push(v);
                colors.push(color);
            }
        }
        (order, colors)
    }

    fn pruned(&self, bound: usize) -> bool {
        match self.goal {
            Goal::Maximum | Goal::Exceed(_) => bound <= self.best.len(),
            Goal::EnumerateSize(k) => bound < k,
        }
    }

    fn expand(&mut self, mut p: BitSet) -> Result<Flow> {
        self.tick()?;
        let (order, colors) = self.cover(&p);
        for i in (0..order.len()).rev() {
            if self.pruned(self.current.len() + colors[i]) {
                return Ok(Flow::Continue);
            }
            let v = order[i];
            self.current.push(v);
            let mut next = p.clone();
            next.difference_with(self.graph.row(v));
            next.remove(v);
            let flow = match self.goal {
                Goal::EnumerateSize(k) => {
                    if self.current.len() == k {
                        self.found.push(self.current.clone());
                        Flow::Continue
                    } else if next.is_empty() {
                        Flow::Continue
                    } else {
                        self.expand(next)?
                    }
                }
                Goal::Maximum | Goal::Exceed(_) => {
                    if self.current.len() > self.best.len() {
                        self.best = self.current.clone();
                    }
                    if matches!(self.goal, Goal::Exceed(k) if self.best.len() > k) {
                        Flow::Stop
                    } else if next.is_empty() {
                        Flow::Continue
                    } else {
                        self.expand(next)?
                    }
                }
            };
            self.current.pop();
            if let Flow::Stop = flow {
                return Ok(Flow::Stop);
            }
            p.remove(v);
        }
        Ok(Flow::Continue)
    }
}
