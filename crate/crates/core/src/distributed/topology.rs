use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{invalid, Result};

/// The fixed set of undirected channels a protocol may use.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Topology {
    n: usize,
    // sorted, no duplicates
    channels: Vec<(usize, usize)>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Topology {
    pub fn new(n: usize, channels: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut pairs = Vec::new();
        for (a, b) in channels {
            if a == b {
                return invalid(format!("self-loop at party {a}"));
            }
            if a >= n || b >= n {
                return invalid(format!("channel {a}-{b} outside {n} parties"));
            }
            pairs.push(key(a, b));
        }
        Ok(Self {
            n,
            channels: {
                pairs.sort_unstable();
                pairs.dedup();
                pairs
            },
        })
    }

    pub fn empty(n: usize) -> Self {
        Self {
            n,
            channels: Vec::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            n,
            channels: (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect(),
        }
    }

    /// Every party is connected to `center` only.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        Self::new(n, (0..n).filter(|&i| i != center).map(|i| (center, i)))
    }

    /// `m` distinct channels drawn uniformly from all `n(n-1)/2` pairs.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<Self> {
        let pairs = n * n.saturating_sub(1) / 2;
        if m > pairs {
            return invalid(format!("{m} channels requested but only {pairs} pairs exist"));
        }
        let channels = sample(rng, pairs, m).into_iter().map(|k| unrank_pair(k, n));
        Self::new(n, channels)
    }

    pub fn parties(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.channels.binary_search(&key(a, b)).is_ok()
    }

    pub fn channels(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.channels.iter().copied()
    }

    pub fn degree(&self, party: usize) -> usize {
        self.neighbors(party).count()
    }

    pub fn neighbors(&self, party: usize) -> impl Iterator<Item = usize> + '_ {
        self.channels.iter().filter_map(move |&(a, b)| {
            if a == party {
                Some(b)
            } else if b == party {
                Some(a)
            } else {
                None
            }
        })
    }

    /// Sorted neighbour lists indexed by party.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.channels {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    pub(crate) fn neighbor_index(&self) -> NeighborIndex {
        let mut offsets = vec![0; self.n + 1];
        for &(a, b) in &self.channels {
            offsets[a + 1] += 1;
            offsets[b + 1] += 1;
        }
        for i in 0..self.n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; offsets[self.n]];
        // channels iterate in (a, b) order, so every party's list comes out sorted
        for &(a, b) in &self.channels {
            targets[fill[a]] = b;
            fill[a] += 1;
            targets[fill[b]] = a;
            fill[b] += 1;
        }
        NeighborIndex { offsets, targets }
    }

    pub fn is_subset_of(&self, other: &Topology) -> bool {
        if self.n != other.n {
            return false;
        }
        let mut rest = other.channels.iter();
        self.channels.iter().all(|c| rest.by_ref().any(|o| o == c))
    }
}

/// Flat sorted neighbour lists; each directed slot `(a, b)` has a dense id.
pub(crate) struct NeighborIndex {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl NeighborIndex {
    pub(crate) fn slots(&self) -> usize {
        self.targets.len()
    }

    /// Dense id of the slot for messages from `a` to `b`, if they share a channel.
    pub(crate) fn slot(&self, a: usize, b: usize) -> Option<usize> {
        let lo = *self.offsets.get(a)?;
        let hi = self.offsets[a + 1];
        self.targets[lo..hi].binary_search(&b).ok().map(|k| lo + k)
    }
}

/// Maps `0..n(n-1)/2` onto the pairs `(a, b)` with `a < b`, row by row.
fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    for a in 0..n {
        let row = n - a - 1;
        if k < row {
            return (a, a + 1 + k);
        }
        k -= row;
    }
    unreachable!("pair rank out of range")
}

/// Parties split by degree: popular ones have at least `t + 1` channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyClassification {
    pub popular: BTreeSet<usize>,
    pub lonely: BTreeSet<usize>,
}

pub fn classify(topology: &Topology, t: usize) -> Result<PartyClassification> {
    let n = topology.parties();
    if n > 0 && t >= n {
        return invalid(format!("coalition bound {t} must be below {n}"));
    }
    let mut degree = vec![0usize; n];
    for (a, b) in topology.channels() {
        degree[a] += 1;
        degree[b] += 1;
    }
    let (popular, lonely) = (0..n).partition(|&i| degree[i] > t);
    Ok(PartyClassification { popular, lonely })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn complete_graph_is_all_popular() {
        let c = classify(&Topology::complete(5), 3).unwrap();
        assert_eq!(c.popular.len(), 5);
        assert!(c.lonely.is_empty());
    }

    #[test]
    fn star_leaves_are_lonely() {
        let c = classify(&Topology::star(5, 0).unwrap(), 2).unwrap();
        assert_eq!(c.popular, BTreeSet::from([0]));
        assert_eq!(c.lonely, (1..5).collect());
    }

    #[test]
    fn zero_bound_makes_any_connected_party_popular() {
        let topo = Topology::new(4, [(0, 1)]).unwrap();
        let c = classify(&topo, 0).unwrap();
        assert_eq!(c.popular, BTreeSet::from([0, 1]));
        assert_eq!(c.lonely, BTreeSet::from([2, 3]));
    }

    #[test]
    fn rejects_self_loops_and_bad_bounds() {
        assert!(Topology::new(3, [(1, 1)]).is_err());
        assert!(Topology::new(3, [(1, 3)]).is_err());
        assert!(classify(&Topology::complete(3), 3).is_err());
    }

    #[test]
    fn unranking_covers_all_pairs() {
        let n = 7;
        let all: BTreeSet<_> = (0..n * (n - 1) / 2).map(|k| unrank_pair(k, n)).collect();
        assert_eq!(all.into_iter().collect::<Vec<_>>(), Topology::complete(n).channels);
    }

    #[test]
    fn random_topology_has_requested_size() {
        let t = Topology::random(20, 37, &mut seeded(3)).unwrap();
        assert_eq!(t.len(), 37);
        assert!(Topology::random(4, 7, &mut seeded(3)).is_err());
    }
}
