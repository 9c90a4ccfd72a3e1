use super::{Budget, Goal, IndependenceSolver, Outcome};
use crate::bitset::BitMatrix;
use crate::error::{Error, Result};

/// Largest vertex count the exhaustive solver accepts.
pub const BRUTE_MAX_VERTICES: usize = 24;

/// Checks every one of the `2^R` vertex subsets. Reference oracle only.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExhaustiveSearch;

fn rows(graph: &BitMatrix) -> Vec<u32> {
    (0..graph.size())
        .map(|v| graph.row(v).first().copied().unwrap_or(0) as u32)
        .collect()
}

fn independent(adj: &[u32], mask: u32) -> bool {
    let mut rest = mask;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        if adj[v] & mask != 0 {
            return false;
        }
    }
    true
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|b| mask >> b & 1 == 1).collect()
}

impl IndependenceSolver for ExhaustiveSearch {
    fn name(&self) -> &'static str {
        "brute"
    }

    fn solve(
        &self,
        graph: &BitMatrix,
        goal: Goal,
        _incumbent: &[usize],
        _budget: &Budget,
    ) -> Result<Outcome> {
        let size = graph.size();
        if size > BRUTE_MAX_VERTICES {
            return Err(Error::Size(format!(
                "{size} vertices, exhaustive search is limited to {BRUTE_MAX_VERTICES}"
            )));
        }
        let adj = rows(graph);
        let mut best = 0u32;
        let mut found = Vec::new();
        for mask in 0..(1u32 << size) {
            let k = mask.count_ones() as usize;
            let wanted = match goal {
                Goal::EnumerateSize(target) => k == target,
                Goal::Maximum | Goal::Exceed(_) => k > best.count_ones() as usize,
            };
            if wanted && independent(&adj, mask) {
                match goal {
                    Goal::EnumerateSize(_) => found.push(members(mask)),
                    _ => best = mask,
                }
            }
        }
        found.sort();
        let best = members(best);
        let exhausted = match goal {
            Goal::Exceed(k) => best.len() <= k,
            _ => true,
        };
        Ok(Outcome {
            best,
            exhausted,
            nodes: 1u64 << size,
            found,
        })
    }
}
