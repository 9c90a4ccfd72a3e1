//! Vertices of `K(n, r, s)` and statistics of set families.
//!
//! Vertices are r-subsets of `{1, ..., n}` ranked in colexicographic order,
//! so `{1,2} < {1,3} < {2,3} < {1,4} < ...`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::combinatorics::{binom_u64, graph_constants};
use crate::error::{Error, Result};

/// Colexicographic rank of an r-set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An r-subset of `[n]`, elements strictly increasing and 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RSet(Vec<u32>);

impl RSet {
    /// Validates and sorts; rejects duplicates and elements outside `[1, n]`.
    pub fn new(n: u32, r: u32, mut elements: Vec<u32>) -> Result<Self> {
        elements.sort_unstable();
        if elements.len() != r as usize {
            return Err(Error::InvalidSet(format!(
                "expected {r} elements, got {}",
                elements.len()
            )));
        }
        if elements.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSet(format!(
                "repeated element in {elements:?}"
            )));
        }
        if let Some(&bad) = elements.iter().find(|&&e| e == 0 || e > n) {
            return Err(Error::InvalidSet(format!("element {bad} outside [1, {n}]")));
        }
        Ok(RSet(elements))
    }

    pub fn elements(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn intersection_size(&self, other: &RSet) -> usize {
        let (mut i, mut j, mut common) = (0, 0, 0);
        let (a, b) = (&self.0, &other.0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    common += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        common
    }
}

impl fmt::Display for RSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

/// Parses the textual form `{a,b,c}`. Bounds are checked by [`RSet::new`].
impl FromStr for RSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| Error::InvalidSet(format!("'{s}' is not of the form {{a,b,...}}")))?;
        let mut elements = Vec::new();
        for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let e = tok
                .parse::<u32>()
                .map_err(|_| Error::InvalidSet(format!("bad element '{tok}'")))?;
            elements.push(e);
        }
        let mut sorted = elements.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) || sorted != elements {
            return Err(Error::InvalidSet(format!(
                "'{s}' must list strictly increasing elements"
            )));
        }
        Ok(RSet(elements))
    }
}

/// Binomial table and ranking for the r-subsets of `[n]`.
#[derive(Clone, Debug)]
pub struct Colex {
    n: u32,
    r: u32,
    total: u32,
    // table[a * (r + 1) + i] = C(a, i) for a <= n, i <= r
    table: Vec<u64>,
}

impl Colex {
    pub fn new(n: u32, r: u32) -> Result<Self> {
        if r == 0 || r > n {
            return Err(Error::Parameter(format!(
                "need 1 <= r <= n, got n = {n}, r = {r}"
            )));
        }
        let total = binom_u64(n as u64, r as u64)
            .filter(|&t| t < (1u64 << 31))
            .ok_or_else(|| Error::Parameter(format!("C({n}, {r}) exceeds 2^31 - 1")))?;
        let width = r as usize + 1;
        let mut table = vec![0u64; (n as usize + 1) * width];
        for a in 0..=n as usize {
            table[a * width] = 1;
            for i in 1..width.min(a + 1) {
                let above =
                    table[(a - 1) * width + i - 1].saturating_add(table[(a - 1) * width + i]);
                table[a * width + i] = above;
            }
        }
        Ok(Colex {
            n,
            r,
            total: total as u32,
            table,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// `C(n, r)`.
    pub fn total(&self) -> u32 {
        self.total
    }

    fn c(&self, a: u32, i: u32) -> u64 {
        if i > a {
            0
        } else {
            self.table[a as usize * (self.r as usize + 1) + i as usize]
        }
    }

    pub fn rank(&self, set: &RSet) -> Result<VertexId> {
        let els = set.elements();
        if els.len() != self.r as usize
            || els.windows(2).any(|w| w[0] >= w[1])
            || els.first().is_some_and(|&e| e == 0)
            || els.last().is_some_and(|&e| e > self.n)
        {
            return Err(Error::InvalidSet(format!(
                "{set} is not a {}-subset of [{}]",
                self.r, self.n
            )));
        }
        Ok(VertexId(self.rank_sorted(els)))
    }

    pub(crate) fn rank_sorted(&self, els: &[u32]) -> u32 {
        els.iter()
            .enumerate()
            .map(|(i, &a)| self.c(a - 1, i as u32 + 1))
            .sum::<u64>() as u32
    }

    pub fn unrank(&self, id: VertexId) -> Result<RSet> {
        if id.0 >= self.total {
            return Err(Error::Range {
                rank: id.0 as u64,
                total: self.total.to_string(),
            });
        }
        let mut out = vec![0u32; self.r as usize];
        self.unrank_into(id.0, &mut out);
        Ok(RSet(out))
    }

    pub(crate) fn unrank_into(&self, mut k: u32, out: &mut [u32]) {
        let mut a = self.n;
        for i in (1..=self.r).rev() {
            // largest a with C(a - 1, i) <= k
            while self.c(a - 1, i) > k as u64 {
                a -= 1;
            }
            out[i as usize - 1] = a;
            k -= self.c(a - 1, i) as u32;
            a -= 1;
        }
    }

    /// All r-sets in colex order.
    pub fn sets(&self) -> impl Iterator<Item = RSet> + '_ {
        (0..self.total).map(move |k| {
            let mut out = vec![0u32; self.r as usize];
            self.unrank_into(k, &mut out);
            RSet(out)
        })
    }
}

/// The `k`-th r-subset of `[n]` in colex order.
pub fn unrank(n: u32, r: u32, k: VertexId) -> Result<RSet> {
    Colex::new(n, r)?.unrank(k)
}

pub fn rank(n: u32, r: u32, set: &RSet) -> Result<VertexId> {
    Colex::new(n, r)?.rank(set)
}

/// Adjacency in `K(n, r, s)`: `|A ∩ B| = s`.
pub fn adjacent(a: &RSet, b: &RSet, s: u32) -> bool {
    a.intersection_size(b) == s as usize
}

/// Lexicographic k-combinations of `0..m` as index vectors.
pub(crate) fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + m - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// All `B` with `|A ∩ B| = s`, in colex order.
pub fn neighbors(n: u32, r: u32, s: u32, a: &RSet) -> Result<Vec<RSet>> {
    let colex = Colex::new(n, r)?;
    colex.rank(a)?;
    if s >= r {
        return Err(Error::Parameter(format!("s = {s} must be below r = {r}")));
    }
    let inside = a.elements();
    let outside: Vec<u32> = (1..=n).filter(|x| !a.contains(*x)).collect();
    let mut out = Vec::new();
    for_each_combination(inside.len(), s as usize, |keep| {
        for_each_combination(outside.len(), (r - s) as usize, |add| {
            let mut els: Vec<u32> = keep
                .iter()
                .map(|&i| inside[i])
                .chain(add.iter().map(|&j| outside[j]))
                .collect();
            els.sort_unstable();
            out.push(RSet(els));
        });
    });
    out.sort_by_key(|b| colex.rank_sorted(b.elements()));
    Ok(out)
}

/// An immutable family of r-sets with its degree profile and Kneser edge count.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Family {
    pub n: u32,
    pub r: u32,
    pub members: Vec<VertexId>,
    /// `degrees[x - 1] = |A_x|`.
    pub degrees: Vec<u64>,
    pub max_degree: u64,
    /// Disjoint pairs inside the family.
    pub induced_edges: u64,
    /// `C(|A|, 2) - sum_x C(|A_x|, 2)`.
    pub edge_lower_bound: i128,
}

impl Family {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn is_intersecting(&self) -> bool {
        self.induced_edges == 0
    }

    pub fn sets(&self) -> Vec<RSet> {
        let colex = Colex::new(self.n, self.r).expect("family parameters were validated");
        self.members
            .iter()
            .map(|&v| colex.unrank(v).expect("member ranks were validated"))
            .collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, s) in self.sets().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("]")
    }
}

fn choose2(k: u64) -> i128 {
    let k = k as i128;
    k * (k - 1) / 2
}

/// Computes the degree profile, `d(A)`, `e(A)` and its pair-counting lower bound.
pub fn family_stats(n: u32, r: u32, members: impl IntoIterator<Item = VertexId>) -> Result<Family> {
    let colex = Colex::new(n, r)?;
    let mut members: Vec<VertexId> = members.into_iter().collect();
    members.sort_unstable();
    members.dedup();
    if let Some(bad) = members.iter().find(|v| v.0 >= colex.total()) {
        return Err(Error::Range {
            rank: bad.0 as u64,
            total: colex.total().to_string(),
        });
    }
    let words = (n as usize).div_ceil(64);
    let mut masks = vec![0u64; members.len() * words];
    let mut degrees = vec![0u64; n as usize];
    let mut buf = vec![0u32; r as usize];
    for (i, v) in members.iter().enumerate() {
        colex.unrank_into(v.0, &mut buf);
        for &x in &buf {
            let bit = x as usize - 1;
            masks[i * words + bit / 64] |= 1 << (bit % 64);
            degrees[bit] += 1;
        }
    }
    let mut induced_edges = 0u64;
    for i in 0..members.len() {
        let a = &masks[i * words..(i + 1) * words];
        for j in i + 1..members.len() {
            let b = &masks[j * words..(j + 1) * words];
            if a.iter().zip(b).all(|(x, y)| x & y == 0) {
                induced_edges += 1;
            }
        }
    }
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let edge_lower_bound =
        choose2(members.len() as u64) - degrees.iter().map(|&d| choose2(d)).sum::<i128>();
    debug_assert_eq!(degrees.iter().sum::<u64>(), r as u64 * members.len() as u64);
    debug_assert!(induced_edges as i128 >= edge_lower_bound);
    Ok(Family {
        n,
        r,
        members,
        degrees,
        max_degree,
        induced_edges,
        edge_lower_bound,
    })
}

/// Ranks of all r-sets containing `x`, ascending.
pub(crate) fn star_members(colex: &Colex, x: u32) -> Vec<VertexId> {
    let (n, r) = (colex.n(), colex.r());
    let others: Vec<u32> = (1..=n).filter(|&e| e != x).collect();
    let mut out = Vec::new();
    for_each_combination(others.len(), r as usize - 1, |pick| {
        let mut els: Vec<u32> = pick.iter().map(|&i| others[i]).collect();
        els.push(x);
        els.sort_unstable();
        out.push(VertexId(colex.rank_sorted(&els)));
    });
    out.sort_unstable();
    out
}

/// The star `S_x`: every r-set containing `x`.
pub fn star(n: u32, r: u32, x: u32) -> Result<Family> {
    if x == 0 || x > n {
        return Err(Error::Parameter(format!(
            "star centre {x} outside [1, {n}]"
        )));
    }
    let colex = Colex::new(n, r)?;
    family_stats(n, r, star_members(&colex, x))
}

/// `Some(x)` iff the family is exactly the full star `S_x`.
pub fn star_center(family: &Family) -> Option<u32> {
    let full = graph_constants(family.n, family.r, 0)
        .ok()?
        .star_size_u64()?;
    if family.size() as u64 != full || full == 0 {
        return None;
    }
    family
        .degrees
        .iter()
        .position(|&d| d == full)
        .map(|i| i as u32 + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(els: &[u32]) -> RSet {
        RSet(els.to_vec())
    }

    #[test]
    fn unrank_examples() {
        assert_eq!(unrank(5, 2, VertexId(0)).unwrap(), set(&[1, 2]));
        assert_eq!(unrank(5, 2, VertexId(2)).unwrap(), set(&[2, 3]));
        assert_eq!(unrank(5, 2, VertexId(9)).unwrap(), set(&[4, 5]));
        assert!(matches!(
            unrank(5, 2, VertexId(10)),
            Err(Error::Range { .. })
        ));
    }

    #[test]
    fn colex_enumeration_order() {
        let got: Vec<String> = Colex::new(5, 2)
            .unwrap()
            .sets()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(
            got,
            [
                "{1,2}", "{1,3}", "{2,3}", "{1,4}", "{2,4}", "{3,4}", "{1,5}", "{2,5}", "{3,5}",
                "{4,5}"
            ]
        );
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(5, 2, &set(&[1, 2])).unwrap(), VertexId(0));
        assert_eq!(rank(5, 2, &set(&[2, 3])).unwrap(), VertexId(2));
        let colex = Colex::new(7, 3).unwrap();
        for k in 0..colex.total() {
            let s = colex.unrank(VertexId(k)).unwrap();
            assert_eq!(colex.rank(&s).unwrap(), VertexId(k));
        }
        assert!(matches!(
            rank(5, 2, &set(&[2, 6])),
            Err(Error::InvalidSet(_))
        ));
        assert!(matches!(rank(5, 2, &set(&[2])), Err(Error::InvalidSet(_))));
        assert!(matches!(
            rank(5, 2, &set(&[3, 2])),
            Err(Error::InvalidSet(_))
        ));
    }

    #[test]
    fn rank_unrank_bijection_small() {
        for n in 1..=20u32 {
            for r in 1..=n.min(6) {
                let colex = Colex::new(n, r).unwrap();
                for k in 0..colex.total().min(5_000) {
                    let s = colex.unrank(VertexId(k)).unwrap();
                    assert_eq!(colex.rank(&s).unwrap().0, k);
                }
            }
        }
    }

    #[test]
    fn adjacency_examples() {
        assert!(adjacent(&set(&[1, 2]), &set(&[3, 4]), 0));
        assert!(!adjacent(&set(&[1, 2]), &set(&[2, 3]), 0));
        assert!(adjacent(&set(&[1, 2]), &set(&[2, 3]), 1));
        assert!(!adjacent(&set(&[1, 2]), &set(&[1, 2]), 1));
    }

    #[test]
    fn neighbors_examples() {
        let nb = neighbors(5, 2, 0, &set(&[1, 2])).unwrap();
        assert_eq!(nb, vec![set(&[3, 4]), set(&[3, 5]), set(&[4, 5])]);
        assert_eq!(
            neighbors(4, 2, 0, &set(&[1, 2])).unwrap(),
            vec![set(&[3, 4])]
        );
        let nb = neighbors(5, 2, 1, &set(&[1, 2])).unwrap();
        assert_eq!(nb.len(), 6);
        assert!(nb.iter().all(|b| adjacent(&set(&[1, 2]), b, 1)));
    }

    #[test]
    fn neighbor_counts_match_degree_formula() {
        for n in 2..=9u32 {
            for r in 1..=n.min(4) {
                for s in 0..r {
                    let g = graph_constants(n, r, s).unwrap();
                    let colex = Colex::new(n, r).unwrap();
                    for a in colex.sets() {
                        let nb = neighbors(n, r, s, &a).unwrap();
                        assert_eq!(nb.len() as u64, g.degree.to_u64().unwrap());
                        let mut dedup = nb.clone();
                        dedup.dedup();
                        assert_eq!(dedup.len(), nb.len());
                        assert!(!nb.contains(&a));
                    }
                }
            }
        }
    }

    #[test]
    fn rset_text_roundtrip_and_errors() {
        let s: RSet = "{1,3,7}".parse().unwrap();
        assert_eq!(s.to_string(), "{1,3,7}");
        assert!("{3,1}".parse::<RSet>().is_err());
        assert!("{1,1}".parse::<RSet>().is_err());
        assert!("1,2".parse::<RSet>().is_err());
        assert!(RSet::new(5, 2, vec![0, 3]).is_err());
        assert!(RSet::new(5, 2, vec![3, 3]).is_err());
        assert_eq!(RSet::new(5, 2, vec![4, 1]).unwrap(), set(&[1, 4]));
    }

    #[test]
    fn family_stats_examples() {
        let all = family_stats(4, 2, (0..6).map(VertexId)).unwrap();
        assert_eq!(all.size(), 6);
        assert!(all.degrees.iter().all(|&d| d == 3));
        assert_eq!(all.max_degree, 3);
        assert_eq!(all.induced_edges, 3);
        assert_eq!(all.edge_lower_bound, 3);

        let s = star(6, 3, 2).unwrap();
        assert_eq!(s.induced_edges, 0);
        assert!(s.edge_lower_bound <= 0);

        let colex = Colex::new(5, 2).unwrap();
        let pair = [set(&[1, 2]), set(&[3, 4])].map(|s| colex.rank(&s).unwrap());
        let f = family_stats(5, 2, pair).unwrap();
        assert_eq!((f.induced_edges, f.edge_lower_bound), (1, 1));
    }

    #[test]
    fn edge_bound_is_tight_when_pairs_meet_once() {
        // tight iff every intersecting pair shares exactly one element
        let colex = Colex::new(6, 3).unwrap();
        let fam = [set(&[1, 2, 3]), set(&[1, 2, 4])].map(|s| colex.rank(&s).unwrap());
        let f = family_stats(6, 3, fam).unwrap();
        assert_eq!(f.induced_edges, 0);
        assert_eq!(f.edge_lower_bound, -1);
    }

    #[test]
    fn stars_and_centres() {
        let s = star(5, 2, 1).unwrap();
        assert_eq!(s.to_string(), "[{1,2} {1,3} {1,4} {1,5}]");
        assert_eq!(star_center(&s), Some(1));
        assert_eq!(star_center(&star(7, 3, 4).unwrap()), Some(4));
        let colex = Colex::new(5, 2).unwrap();
        let tri = [set(&[1, 2]), set(&[1, 3]), set(&[2, 3])].map(|s| colex.rank(&s).unwrap());
        assert_eq!(star_center(&family_stats(5, 2, tri).unwrap()), None);
        assert!(star(5, 2, 6).is_err());
        assert!(star(5, 2, 0).is_err());
    }

    #[test]
    fn stars_are_independent() {
        for n in 1..=12u32 {
            for r in 1..=n.min(4) {
                for x in 1..=n {
                    let s = star(n, r, x).unwrap();
                    assert_eq!(s.induced_edges, 0);
                    assert_eq!(
                        s.size() as u64,
                        binom_u64(n as u64 - 1, r as u64 - 1).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn combinations_enumerate_all() {
        let mut seen = Vec::new();
        for_each_combination(5, 3, |c| seen.push(c.to_vec()));
        assert_eq!(seen.len(), 10);
        assert_eq!(seen[0], vec![0, 1, 2]);
        assert_eq!(seen[9], vec![2, 3, 4]);
        let mut count = 0;
        for_each_combination(4, 0, |c| {
            assert!(c.is_empty());
            count += 1;
        });
        assert_eq!(count, 1);
        for_each_combination(2, 3, |_| panic!("no 3-subsets of 2 items"));
    }
}
