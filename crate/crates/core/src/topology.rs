//! Communication graphs and the redundancy condition that makes screening
//! viable.
//!
//! The representation is directed (`in_neighbors[j]` is the set of nodes `j`
//! receives from) but the generators in this module produce symmetric graphs.
//! The redundancy condition asks that every "reduced" graph — Byzantine nodes
//! deleted, plus up to `b` incoming edges dropped at each surviving node —
//! still has a source component of at least `b + 1` nodes. Checking it exactly
//! is exponential, so alongside the exact (budgeted) check we provide the
//! min-degree generation heuristic and a randomized counterexample sampler.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Directed static graph over nodes `0..M`, stored as per-node sorted
/// in-neighbor lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    in_neighbors: Vec<Vec<usize>>,
}

impl Graph {
    /// Build from directed edges `(i, j)` meaning "j receives from i".
    /// Rejects self-loops and out-of-range ids; duplicates are collapsed.
    pub fn from_directed_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut in_neighbors = vec![Vec::new(); node_count];
        for (i, j) in edges {
            if i >= node_count || j >= node_count {
                return Err(Error::Config(format!(
                    "edge ({i}, {j}) out of range for {node_count} nodes"
                )));
            }
            if i == j {
                return Err(Error::Config(format!("self-loop at node {i}")));
            }
            in_neighbors[j].push(i);
        }
        for nbrs in &mut in_neighbors {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        Ok(Graph { in_neighbors })
    }

    /// Build from undirected edges: each pair adds both directions.
    pub fn from_undirected_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let doubled: Vec<(usize, usize)> = edges
            .into_iter()
            .flat_map(|(i, j)| [(i, j), (j, i)])
            .collect();
        Self::from_directed_edges(node_count, doubled)
    }

    /// Complete graph on `m` nodes.
    pub fn complete(m: usize) -> Self {
        let in_neighbors = (0..m)
            .map(|j| (0..m).filter(|&i| i != j).collect())
            .collect();
        Graph { in_neighbors }
    }

    /// Edgeless graph on `m` nodes.
    pub fn empty(m: usize) -> Self {
        Graph {
            in_neighbors: vec![Vec::new(); m],
        }
    }

    pub fn node_count(&self) -> usize {
        self.in_neighbors.len()
    }

    /// Sorted in-neighbor list of node `j`.
    pub fn in_neighbors(&self, j: usize) -> &[usize] {
        &self.in_neighbors[j]
    }

    pub fn in_degree(&self, j: usize) -> usize {
        self.in_neighbors[j].len()
    }

    pub fn min_in_degree(&self) -> usize {
        self.in_neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// All directed edges `(i, j)` with `i` the sender and `j` the receiver.
    pub fn directed_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.in_neighbors
            .iter()
            .enumerate()
            .flat_map(|(j, nbrs)| nbrs.iter().map(move |&i| (i, j)))
    }

    /// Per-node out-neighbor lists (who hears node `i`).
    pub fn out_neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.node_count()];
        for (i, j) in self.directed_edges() {
            out[i].push(j);
        }
        for o in &mut out {
            o.sort_unstable();
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        self.directed_edges()
            .all(|(i, j)| self.in_neighbors[i].binary_search(&j).is_ok())
    }

    /// Plain-text edge list: header `M <count>`, then one directed `i j` pair
    /// per line.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("M {}\n", self.node_count());
        for (i, j) in self.directed_edges() {
            out.push_str(&format!("{i} {j}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str, path: &str) -> Result<Self> {
        let malformed = |reason: &str| Error::MalformedGraphFile {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| malformed("empty file"))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("M") {
            return Err(malformed("missing `M <count>` header"));
        }
        let m: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| malformed("bad node count in header"))?;
        let mut edges = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let i: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| malformed("bad edge line"))?;
            let j: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| malformed("bad edge line"))?;
            edges.push((i, j));
        }
        Self::from_directed_edges(m, edges)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list())?;
        Ok(())
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_edge_list(&text, &path.display().to_string())
    }
}

/// A witness describing one reduced graph: the deleted Byzantine set and, per
/// surviving node, the incoming edges additionally dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedGraphSpec {
    pub byzantine_set: Vec<usize>,
    /// `(node, removed in-neighbors)`; at most `b` removals per node.
    pub removed_in_edges: Vec<(usize, Vec<usize>)>,
}

impl ReducedGraphSpec {
    pub fn identity() -> Self {
        ReducedGraphSpec {
            byzantine_set: Vec::new(),
            removed_in_edges: Vec::new(),
        }
    }
}

/// Symmetric Erdős–Rényi graph: each unordered pair is an edge independently
/// with probability `p`. Deterministic given `(m, p, seed)`.
pub fn generate_erdos_renyi(m: usize, p: f64, seed: u64) -> Graph {
    assert!(m >= 1, "need at least one node");
    assert!((0.0..=1.0).contains(&p), "p must be in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_undirected_edges(m, edges).expect("generator emits valid edges")
}

/// True iff the least-connected node has degree strictly larger than `2b`.
/// A generation-time heuristic only; it does not certify the redundancy
/// condition.
pub fn min_degree_heuristic(g: &Graph, b: usize) -> bool {
    g.min_in_degree() > 2 * b
}

/// Resample Erdős–Rényi graphs (seed, seed+1, ...) until the min-degree
/// heuristic passes for `b`, capped at `max_attempts` draws.
pub fn generate_erdos_renyi_with_min_degree(
    m: usize,
    p: f64,
    b: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<Graph> {
    for attempt in 0..max_attempts {
        let g = generate_erdos_renyi(m, p, seed.wrapping_add(attempt as u64));
        if min_degree_heuristic(&g, b) {
            return Ok(g);
        }
    }
    Err(Error::GraphGenerationExhausted {
        attempts: max_attempts,
    })
}

/// The set of nodes each of which has a directed path to every node of `g`.
///
/// A node that reaches everything must belong to the (unique) source component
/// of the strongly-connected condensation, and every member of that component
/// reaches everything, so the set returned here is exactly that component —
/// or empty when the condensation has several sources.
pub fn source_component(g: &Graph) -> Vec<usize> {
    let m = g.node_count();
    let out = g.out_neighbors();
    let mut members = Vec::new();
    let mut seen = vec![false; m];
    let mut stack = Vec::new();
    for v in 0..m {
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        stack.push(v);
        seen[v] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &w in &out[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count == m {
            members.push(v);
        }
    }
    members
}

/// Apply a reduction. Returns the reduced graph over the surviving nodes
/// (relabeled `0..h`) together with the old ids in relabel order.
pub fn apply_reduction(g: &Graph, spec: &ReducedGraphSpec) -> (Graph, Vec<usize>) {
    let m = g.node_count();
    let mut byz = vec![false; m];
    for &j in &spec.byzantine_set {
        byz[j] = true;
    }
    let survivors: Vec<usize> = (0..m).filter(|&j| !byz[j]).collect();
    let mut new_id = vec![usize::MAX; m];
    for (k, &j) in survivors.iter().enumerate() {
        new_id[j] = k;
    }
    let mut edges = Vec::new();
    for &j in &survivors {
        let removed: &[usize] = spec
            .removed_in_edges
            .iter()
            .find(|(node, _)| *node == j)
            .map(|(_, r)| r.as_slice())
            .unwrap_or(&[]);
        for &i in g.in_neighbors(j) {
            if !byz[i] && !removed.contains(&i) {
                edges.push((new_id[i], new_id[j]));
            }
        }
    }
    let reduced =
        Graph::from_directed_edges(survivors.len(), edges).expect("reduction preserves validity");
    (reduced, survivors)
}

/// Does this particular reduction violate the redundancy condition for `b`?
pub fn reduction_violates(g: &Graph, b: usize, spec: &ReducedGraphSpec) -> bool {
    let (reduced, _) = apply_reduction(g, spec);
    source_component(&reduced).len() < b + 1
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All subsets of `items` with at most `b` elements.
fn subsets_up_to(items: &[usize], b: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(items: &[usize], start: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(current.clone());
        if left == 0 {
            return;
        }
        for i in start..items.len() {
            current.push(items[i]);
            rec(items, i + 1, left - 1, current, out);
            current.pop();
        }
    }
    rec(items, 0, b, &mut current, &mut out);
    out
}

/// All subsets of `0..m` with at most `b` elements.
fn node_subsets_up_to(m: usize, b: usize) -> Vec<Vec<usize>> {
    let ids: Vec<usize> = (0..m).collect();
    subsets_up_to(&ids, b)
}

/// Number of reduced graphs the exact check would enumerate.
fn enumeration_size(g: &Graph, b: usize, cap: u128) -> u128 {
    let m = g.node_count();
    let mut total: u128 = 0;
    for byz in node_subsets_up_to(m, b) {
        let mut combos: u128 = 1;
        for j in 0..m {
            if byz.contains(&j) {
                continue;
            }
            let deg = g
                .in_neighbors(j)
                .iter()
                .filter(|i| !byz.contains(i))
                .count() as u128;
            let choices: u128 = (0..=(b as u128).min(deg)).map(|k| binomial(deg, k)).sum();
            combos = combos.saturating_mul(choices);
        }
        total = total.saturating_add(combos);
        if total > cap {
            return total;
        }
    }
    total
}

pub const DEFAULT_ENUMERATION_CAP: u128 = 10_000_000;

/// Exhaustively verify the redundancy condition: for every Byzantine set of
/// size at most `b` and every per-node removal of at most `b` incoming edges,
/// the reduced graph's source component has at least `b + 1` nodes.
///
/// Refuses with [`Error::BudgetExceeded`] when the enumeration space exceeds
/// `cap` reduced graphs; use [`falsify_assumption4`] instead at that scale.
pub fn check_assumption4_exact(g: &Graph, b: usize, cap: u128) -> Result<bool> {
    let m = g.node_count();
    if m > 64 {
        return Err(Error::BudgetExceeded {
            required: u128::MAX,
            cap,
        });
    }
    let required = enumeration_size(g, b, cap);
    if required > cap {
        return Err(Error::BudgetExceeded { required, cap });
    }

    let in_mask: Vec<u64> = (0..m)
        .map(|j| g.in_neighbors(j).iter().fold(0u64, |acc, &i| acc | 1 << i))
        .collect();

    for byz in node_subsets_up_to(m, b) {
        let byz_mask = byz.iter().fold(0u64, |acc, &j| acc | 1 << j);
        let honest: Vec<usize> = (0..m).filter(|&j| byz_mask >> j & 1 == 0).collect();
        let survivor_mask = honest.iter().fold(0u64, |acc, &j| acc | 1 << j);
        // Per honest node: candidate removal masks (subsets of honest
        // in-neighbors, at most b bits).
        let per_node: Vec<Vec<u64>> = honest
            .iter()
            .map(|&j| {
                let candidates: Vec<usize> = (0..m)
                    .filter(|&i| (in_mask[j] & !byz_mask) >> i & 1 == 1)
                    .collect();
                subsets_up_to(&candidates, b)
                    .into_iter()
                    .map(|s| s.iter().fold(0u64, |acc, &i| acc | 1 << i))
                    .collect()
            })
            .collect();
        if honest.is_empty() {
            // Empty reduced graph: no source component at all.
            return Ok(false);
        }
        let mut pick = vec![0usize; honest.len()];
        let mut reach = vec![0u64; m];
        loop {
            // Build reduced out-adjacency as bitmasks and take the transitive
            // closure of reachability.
            for v in 0..m {
                reach[v] = 0;
            }
            for (slot, &j) in honest.iter().enumerate() {
                let kept_in = in_mask[j] & !byz_mask & !per_node[slot][pick[slot]];
                let mut bits = kept_in;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    reach[i] |= 1 << j;
                }
            }
            for &j in &honest {
                reach[j] |= 1 << j;
            }
            loop {
                let mut changed = false;
                for &v in &honest {
                    let mut acc = reach[v];
                    let mut bits = reach[v];
                    while bits != 0 {
                        let w = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        acc |= reach[w];
                    }
                    if acc != reach[v] {
                        reach[v] = acc;
                        changed = true;
                    }
                }
                if !changed {
                    break;
                }
            }
            let source_size = honest
                .iter()
                .filter(|&&v| reach[v] == survivor_mask)
                .count();
            if source_size < b + 1 {
                return Ok(false);
            }
            // Advance the odometer over per-node removal choices.
            let mut pos = 0;
            loop {
                if pos == honest.len() {
                    break;
                }
                pick[pos] += 1;
                if pick[pos] < per_node[pos].len() {
                    break;
                }
                pick[pos] = 0;
                pos += 1;
            }
            if pos == honest.len() {
                break;
            }
        }
    }
    Ok(true)
}

/// All subsets of `items` with exactly `k` elements.
fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn rec(items: &[usize], start: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(current.clone());
            return;
        }
        for i in start..=items.len().saturating_sub(left) {
            current.push(items[i]);
            rec(items, i + 1, left - 1, current, out);
            current.pop();
        }
    }
    rec(items, 0, k, &mut current, &mut out);
    out
}

/// Counterexample search over maximal reductions, and return a verified
/// violating witness if one turns up. `None` is not a certificate.
///
/// Removing extra in-edges can only shrink reach sets, so if any reduction
/// violates the redundancy condition then so does the reduction with the same
/// Byzantine set and every honest node removing a full `b` honest in-edges
/// (a superset of the original removals). The search therefore only visits
/// maximal removals: exhaustively when that space has at most `trials`
/// members, by uniform sampling otherwise.
pub fn falsify_assumption4(
    g: &Graph,
    b: usize,
    trials: usize,
    seed: u64,
) -> Option<ReducedGraphSpec> {
    assert!(trials >= 1);
    if b == 0 {
        // No deletions or removals possible: the only reduced graph is g.
        let id = ReducedGraphSpec::identity();
        return reduction_violates(g, 0, &id).then_some(id);
    }
    let m = g.node_count();

    // Size of the maximal-removal space: per Byzantine set, the product over
    // honest nodes of C(honest in-degree, min(b, honest in-degree)).
    let byz_sets = node_subsets_up_to(m, b.min(m));
    let mut space: u128 = 0;
    for byz in &byz_sets {
        let mut combos: u128 = 1;
        for j in 0..m {
            if byz.contains(&j) {
                continue;
            }
            let deg = g
                .in_neighbors(j)
                .iter()
                .filter(|i| !byz.contains(i))
                .count() as u128;
            combos = combos.saturating_mul(binomial(deg, (b as u128).min(deg)));
        }
        space = space.saturating_add(combos);
    }

    if space <= trials as u128 {
        for byz in &byz_sets {
            let honest: Vec<usize> = (0..m).filter(|j| !byz.contains(j)).collect();
            let per_node: Vec<Vec<Vec<usize>>> = honest
                .iter()
                .map(|&j| {
                    let candidates: Vec<usize> = g
                        .in_neighbors(j)
                        .iter()
                        .copied()
                        .filter(|i| !byz.contains(i))
                        .collect();
                    combinations(&candidates, b.min(candidates.len()))
                })
                .collect();
            let mut pick = vec![0usize; honest.len()];
            loop {
                let removed: Vec<(usize, Vec<usize>)> = honest
                    .iter()
                    .enumerate()
                    .map(|(slot, &j)| (j, per_node[slot][pick[slot]].clone()))
                    .filter(|(_, drop)| !drop.is_empty())
                    .collect();
                let spec = ReducedGraphSpec {
                    byzantine_set: byz.clone(),
                    removed_in_edges: removed,
                };
                if reduction_violates(g, b, &spec) {
                    return Some(spec);
                }
                let mut pos = 0;
                loop {
                    if pos == honest.len() {
                        break;
                    }
                    pick[pos] += 1;
                    if pick[pos] < per_node[pos].len() {
                        break;
                    }
                    pick[pos] = 0;
                    pos += 1;
                }
                if pos == honest.len() || honest.is_empty() {
                    break;
                }
            }
        }
        return None;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<usize> = (0..m).collect();
    for _ in 0..trials {
        let byz_size = rng.gen_range(0..=b.min(m));
        let mut byz: Vec<usize> = ids.choose_multiple(&mut rng, byz_size).copied().collect();
        byz.sort_unstable();
        let mut removed = Vec::new();
        for j in 0..m {
            if byz.contains(&j) {
                continue;
            }
            let candidates: Vec<usize> = g
                .in_neighbors(j)
                .iter()
                .copied()
                .filter(|i| !byz.contains(i))
                .collect();
            let k = b.min(candidates.len());
            if k > 0 {
                let mut drop: Vec<usize> = candidates.choose_multiple(&mut rng, k).copied().collect();
                drop.sort_unstable();
                removed.push((j, drop));
            }
        }
        let spec = ReducedGraphSpec {
            byzantine_set: byz,
            removed_in_edges: removed,
        };
        if reduction_violates(g, b, &spec) {
            return Some(spec);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(m: usize) -> Graph {
        Graph::from_undirected_edges(m, (0..m).map(|i| (i, (i + 1) % m))).unwrap()
    }

    #[test]
    fn p_one_gives_complete_graph() {
        let g = generate_erdos_renyi(3, 1.0, 42);
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn p_zero_gives_empty_graph() {
        let g = generate_erdos_renyi(5, 0.0, 42);
        assert_eq!(g, Graph::empty(5));
    }

    #[test]
    fn erdos_renyi_is_deterministic_and_symmetric() {
        let a = generate_erdos_renyi(30, 0.4, 9);
        let b = generate_erdos_renyi(30, 0.4, 9);
        assert_eq!(a, b);
        assert!(a.is_symmetric());
        let c = generate_erdos_renyi(30, 0.4, 10);
        assert_ne!(a, c);
    }

    #[test]
    fn erdos_renyi_mean_degree_near_expected() {
        // Expected degree (M-1)p = 49.5; band frozen after repeated sampling.
        let g = generate_erdos_renyi(100, 0.5, 7);
        let mean = (0..100).map(|j| g.in_degree(j)).sum::<usize>() as f64 / 100.0;
        assert!((44.0..=55.0).contains(&mean), "mean degree {mean}");
    }

    #[test]
    fn min_degree_heuristic_on_small_graphs() {
        assert!(min_degree_heuristic(&Graph::complete(5), 1));
        assert!(!min_degree_heuristic(&Graph::complete(5), 2));
        assert!(!min_degree_heuristic(&cycle(3), 1));
    }

    #[test]
    fn source_component_of_strongly_connected_ring() {
        let ring = Graph::from_directed_edges(4, (0..4).map(|i| (i, (i + 1) % 4))).unwrap();
        assert_eq!(source_component(&ring), vec![0, 1, 2, 3]);
    }

    #[test]
    fn source_component_of_disconnected_pair_is_empty() {
        assert!(source_component(&Graph::empty(2)).is_empty());
    }

    #[test]
    fn source_component_of_directed_path() {
        let path = Graph::from_directed_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(source_component(&path), vec![0]);
    }

    #[test]
    fn source_component_members_reach_everything() {
        // Per-pair reachability cross-check on small random graphs.
        for seed in 0..20u64 {
            let g = generate_erdos_renyi(7, 0.35, seed);
            let out = g.out_neighbors();
            let comp = source_component(&g);
            for &j in &comp {
                let mut seen = vec![false; g.node_count()];
                let mut stack = vec![j];
                seen[j] = true;
                while let Some(u) = stack.pop() {
                    for &w in &out[u] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
                assert!(seen.iter().all(|&x| x), "node {j} fails to reach all");
            }
        }
    }

    #[test]
    fn assumption4_holds_trivially_at_b_zero_on_strong_graphs() {
        assert!(check_assumption4_exact(&cycle(5), 0, DEFAULT_ENUMERATION_CAP).unwrap());
    }

    #[test]
    fn assumption4_fails_on_triangle_with_one_fault() {
        assert!(!check_assumption4_exact(&cycle(3), 1, DEFAULT_ENUMERATION_CAP).unwrap());
    }

    #[test]
    fn assumption4_holds_on_k5_with_one_fault() {
        assert!(check_assumption4_exact(&Graph::complete(5), 1, DEFAULT_ENUMERATION_CAP).unwrap());
    }

    #[test]
    fn budget_refusal() {
        let g = Graph::complete(12);
        match check_assumption4_exact(&g, 2, 1000) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn falsifier_finds_triangle_witness_and_witness_verifies() {
        let spec = falsify_assumption4(&cycle(3), 1, 1000, 1).expect("violation exists");
        assert!(reduction_violates(&cycle(3), 1, &spec));
        assert!(spec.byzantine_set.len() <= 1);
        for (_, removed) in &spec.removed_in_edges {
            assert!(removed.len() <= 1);
        }
    }

    #[test]
    fn falsifier_none_at_b_zero_on_connected_graph() {
        assert!(falsify_assumption4(&cycle(4), 0, 100, 5).is_none());
    }

    #[test]
    fn falsifier_none_on_k5() {
        assert!(falsify_assumption4(&Graph::complete(5), 1, 500, 3).is_none());
    }

    #[test]
    fn exact_check_and_falsifier_agree_on_small_random_graphs() {
        for seed in 0..15u64 {
            let g = generate_erdos_renyi(5, 0.6, seed);
            for b in 0..=1usize {
                let exact = check_assumption4_exact(&g, b, DEFAULT_ENUMERATION_CAP).unwrap();
                let witness = falsify_assumption4(&g, b, 5000, seed + 100);
                assert_eq!(exact, witness.is_none(), "seed {seed} b {b}");
                if let Some(spec) = witness {
                    assert!(reduction_violates(&g, b, &spec));
                }
            }
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let g = generate_erdos_renyi(12, 0.4, 3);
        let text = g.to_edge_list();
        let back = Graph::from_edge_list(&text, "mem").unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn rejects_self_loops_and_out_of_range() {
        assert!(Graph::from_directed_edges(3, [(1, 1)]).is_err());
        assert!(Graph::from_directed_edges(3, [(0, 3)]).is_err());
    }
}
