//! Agent interaction networks.
//!
//! A network is stored as a partition of the agents into all-to-all blocks
//! plus, per agent, a sorted list of extra neighbours outside its own block.
//! Complete and clustered networks then cost O(N) memory regardless of
//! density, while arbitrary graphs (edge-list imports) fall back to one
//! singleton block per agent.

use std::fmt::Write as _;
use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Upper bound on the number of agents accepted from external input.
pub const MAX_AGENTS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    n_agents: usize,
    blocks: Vec<Range<u32>>,
    block_of: Vec<u32>,
    extra: Vec<Vec<u32>>,
    cluster_of: Option<Vec<u32>>,
}

impl Network {
    /// Every agent neighbours every agent, itself included.
    pub fn complete(n_agents: usize) -> Result<Network> {
        check_agent_count(n_agents)?;
        Ok(Network {
            n_agents,
            blocks: vec![0..n_agents as u32],
            block_of: vec![0; n_agents],
            extra: vec![Vec::new(); n_agents],
            cluster_of: None,
        })
    }

    /// `n_clusters` equally sized complete clusters of contiguous agents.
    /// Each pair of agents in different clusters is linked independently with
    /// probability `p_between`, one uniform draw per pair `i < j` in
    /// row-major order from a ChaCha8 stream seeded with `seed`.
    pub fn clustered(
        n_agents: usize,
        n_clusters: usize,
        p_between: f64,
        seed: u64,
    ) -> Result<Network> {
        check_agent_count(n_agents)?;
        if n_clusters == 0 || n_agents % n_clusters != 0 {
            return Err(Error::invalid(format!(
                "{n_clusters} clusters do not divide {n_agents} agents evenly"
            )));
        }
        if !(0.0..=1.0).contains(&p_between) {
            return Err(Error::invalid(format!(
                "p_between = {p_between} is not a probability"
            )));
        }
        let size = (n_agents / n_clusters) as u32;
        let blocks: Vec<Range<u32>> = (0..n_clusters as u32)
            .map(|c| c * size..(c + 1) * size)
            .collect();
        let block_of: Vec<u32> = (0..n_agents as u32).map(|i| i / size).collect();
        let mut extra = vec![Vec::new(); n_agents];

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in 0..n_agents as u32 {
            let first_outside = (i / size + 1) * size;
            for j in first_outside..n_agents as u32 {
                let u: f64 = rng.random();
                if u < p_between {
                    extra[i as usize].push(j);
                    extra[j as usize].push(i);
                }
            }
        }
        // Agent k receives partners i < k first (in increasing i), then its
        // own partners j > k, so every list is already sorted.
        debug_assert!(extra.iter().all(|l| l.windows(2).all(|w| w[0] < w[1])));

        Ok(Network {
            n_agents,
            blocks,
            block_of: block_of.clone(),
            extra,
            cluster_of: Some(block_of),
        })
    }

    /// Builds a network from undirected 0-based edges. Self-loops in the
    /// input are ignored and re-added for every agent; duplicates collapse.
    pub fn from_edges(n_agents: usize, edges: &[(usize, usize)]) -> Result<Network> {
        check_agent_count(n_agents)?;
        let mut extra = vec![Vec::new(); n_agents];
        for &(i, j) in edges {
            if i >= n_agents || j >= n_agents {
                return Err(Error::invalid(format!(
                    "edge ({i}, {j}) outside 0..{n_agents}"
                )));
            }
            if i != j {
                extra[i].push(j as u32);
                extra[j].push(i as u32);
            }
        }
        for list in &mut extra {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Network {
            n_agents,
            blocks: (0..n_agents as u32).map(|i| i..i + 1).collect(),
            block_of: (0..n_agents as u32).collect(),
            extra,
            cluster_of: None,
        })
    }

    pub fn n_agents(&self) -> usize {
        self.n_agents
    }

    /// Cluster index of `agent`, if the network was generated with clusters.
    pub fn cluster_of(&self, agent: usize) -> Option<usize> {
        self.cluster_of.as_ref().map(|c| c[agent] as usize)
    }

    pub fn n_clusters(&self) -> Option<usize> {
        self.cluster_of.as_ref().map(|_| self.blocks.len())
    }

    /// Agents of cluster `c` (contiguous).
    pub fn cluster_members(&self, c: usize) -> Option<Range<usize>> {
        self.cluster_of.as_ref()?;
        self.blocks
            .get(c)
            .map(|r| r.start as usize..r.end as usize)
    }

    pub fn degree(&self, agent: usize) -> usize {
        let b = &self.blocks[self.block_of[agent] as usize];
        b.len() + self.extra[agent].len()
    }

    /// The `k`-th neighbour of `agent` in storage order (block first, then
    /// extra links), for `k < degree(agent)`. Used for uniform sampling.
    #[inline]
    pub fn neighbor(&self, agent: usize, k: usize) -> usize {
        let b = &self.blocks[self.block_of[agent] as usize];
        let bl = (b.end - b.start) as usize;
        if k < bl {
            b.start as usize + k
        } else {
            self.extra[agent][k - bl] as usize
        }
    }

    /// Sorted neighbour list of `agent`, including `agent` itself.
    pub fn neighbors(&self, agent: usize) -> Vec<usize> {
        let b = &self.blocks[self.block_of[agent] as usize];
        let mut out: Vec<usize> = (b.start as usize..b.end as usize)
            .chain(self.extra[agent].iter().map(|&j| j as usize))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn is_neighbor(&self, i: usize, j: usize) -> bool {
        let b = &self.blocks[self.block_of[i] as usize];
        b.contains(&(j as u32)) || self.extra[i].binary_search(&(j as u32)).is_ok()
    }

    /// Number of links between agents of different clusters (0 without clusters).
    pub fn inter_cluster_edge_count(&self) -> usize {
        match &self.cluster_of {
            None => 0,
            Some(c) => self
                .extra
                .iter()
                .enumerate()
                .map(|(i, l)| l.iter().filter(|&&j| j as usize > i && c[j as usize] != c[i]).count())
                .sum(),
        }
    }

    /// Dense adjacency with ones on the diagonal. Intended for small networks.
    pub fn to_dense(&self) -> Vec<Vec<bool>> {
        (0..self.n_agents)
            .map(|i| {
                let mut row = vec![false; self.n_agents];
                for j in self.neighbors(i) {
                    row[j] = true;
                }
                row
            })
            .collect()
    }

    /// Edge list text: a `# agents N` header, then one `i j` pair (1-based,
    /// `i < j`) per line. Self-loops are omitted.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# agents {}", self.n_agents);
        for i in 0..self.n_agents {
            for j in self.neighbors(i) {
                if j > i {
                    let _ = writeln!(s, "{} {}", i + 1, j + 1);
                }
            }
        }
        s
    }

    /// Parses the edge-list format written by [`Network::to_edge_list`].
    /// Without a `# agents N` header the agent count is the largest index.
    pub fn parse_edge_list(text: &str) -> Result<Network> {
        let mut declared: Option<usize> = None;
        let mut max_index = 0usize;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let mut words = comment.split_whitespace();
                if words.next() == Some("agents") {
                    let n = words
                        .next()
                        .and_then(|w| w.parse::<usize>().ok())
                        .ok_or_else(|| Error::parse(lineno + 1, "malformed agents header"))?;
                    declared = Some(n);
                }
                continue;
            }
            let mut fields = line.split_whitespace();
            let mut index = || -> Result<usize> {
                let v: usize = fields
                    .next()
                    .ok_or_else(|| Error::parse(lineno + 1, "expected two agent indices"))?
                    .parse()
                    .map_err(|_| Error::parse(lineno + 1, "agent index is not an integer"))?;
                if v == 0 || v > MAX_AGENTS {
                    return Err(Error::parse(lineno + 1, format!("agent index {v} out of range")));
                }
                Ok(v - 1)
            };
            let i = index()?;
            let j = index()?;
            if fields.next().is_some() {
                return Err(Error::parse(lineno + 1, "trailing fields after edge"));
            }
            max_index = max_index.max(i + 1).max(j + 1);
            edges.push((i, j));
        }
        let n = match declared {
            Some(n) if n < max_index => {
                return Err(Error::invalid(format!(
                    "header declares {n} agents but index {max_index} appears"
                )))
            }
            Some(n) => n,
            None => max_index,
        };
        Network::from_edges(n, &edges)
    }
}

fn check_agent_count(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("network needs at least one agent"));
    }
    if n > MAX_AGENTS {
        return Err(Error::invalid(format!("{n} agents exceeds the limit {MAX_AGENTS}")));
    }
    Ok(())
}
