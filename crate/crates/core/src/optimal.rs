//! Optimal load-balancing scenario by best-first search over the pruned
//! decision tree.
//!
//! Every iteration is a binary decision (balance or not), so the raw tree has
//! `2^gamma` leaves. Two reductions make it quadratic:
//!
//! * balanced states at the same iteration are identical apart from their
//!   accumulated cost, so they are merged (only the cheapest queued one is
//!   kept, see [`Frontier::replace_or_insert`]);
//! * once a balanced node at iteration `i` has been popped its path is the
//!   shortest one, and no further balanced node at `i` is generated.
//!
//! The search is A* with `h(i) = sum_{j >= i} mu(j)`, the cost of the
//! remaining iterations with no imbalance. Every edge costs at least
//! `mu(i) = h(i) - h(i + 1)`, so `h` is consistent and the first goal popped
//! is optimal. Relaxing both reductions to keep `n` candidates per iteration
//! yields the `n` cheapest scenarios.

use std::cmp::Ordering;
use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LoadProfile, Scenario, WorkloadModel};

pub type NodeId = usize;

/// Largest `gamma` [`brute_force`] accepts unless told otherwise.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 20;

/// A state of the decision tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchNode {
    /// Iterations `0..next_iter` are costed.
    pub next_iter: usize,
    /// Whether the edge into this node balanced (iteration `next_iter - 1`).
    pub is_lb: bool,
    pub last_lb: usize,
    /// Cost of the path from the root.
    pub g: f64,
    /// `g + h(next_iter)`.
    pub f: f64,
    pub parent: Option<NodeId>,
}

impl SearchNode {
    /// Iteration 0 starts balanced at no cost.
    pub fn root(h0: f64) -> Self {
        Self {
            next_iter: 0,
            is_lb: true,
            last_lb: 0,
            g: 0.0,
            f: h0,
            parent: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub nodes_created: usize,
    pub nodes_expanded: usize,
    pub queue_peak: usize,
}

impl SearchStats {
    /// `gamma (gamma + 1) / 2 + gamma`: merged-tree vertex count plus the
    /// goal layer.
    pub fn state_bound(gamma: usize) -> usize {
        gamma * (gamma + 1) / 2 + gamma
    }
}

/// A scenario with its simulated total time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedScenario {
    pub scenario: Scenario,
    pub total_time: f64,
}

/// Which iterations already had a balanced node popped, and how many.
#[derive(Debug, Clone)]
pub struct FoundLb {
    popped: Vec<usize>,
    limit: usize,
}

impl FoundLb {
    /// Table allowing `limit` popped balanced nodes per iteration (1 for
    /// the optimal search).
    pub fn new(gamma: usize, limit: usize) -> Self {
        Self {
            popped: vec![0; gamma + 1],
            limit: limit.max(1),
        }
    }

    pub fn is_found(&self, iter: usize) -> bool {
        self.popped[iter] >= self.limit
    }

    pub fn mark(&mut self, iter: usize) {
        self.popped[iter] += 1;
    }
}

/// The analytic cost model seen by the search.
#[derive(Debug, Clone)]
pub struct SearchSpace<'a> {
    profile: &'a LoadProfile,
    suffix_mu: Vec<f64>,
}

impl<'a> SearchSpace<'a> {
    pub fn new(profile: &'a LoadProfile) -> Self {
        let gamma = profile.gamma();
        let mut suffix_mu = vec![0.0; gamma + 1];
        for i in (0..gamma).rev() {
            suffix_mu[i] = suffix_mu[i + 1] + profile.average_load(i);
        }
        Self { profile, suffix_mu }
    }

    pub fn gamma(&self) -> usize {
        self.profile.gamma()
    }

    /// `sum_{j=i}^{gamma-1} mu(j)`; zero at the goal.
    pub fn heuristic(&self, i: usize) -> f64 {
        self.suffix_mu[i]
    }

    /// Children of `node`: the unbalanced one always, the balanced one when
    /// `1 <= i <= gamma - 1` and no balanced node at `i` has been popped.
    pub fn expand(
        &self,
        id: NodeId,
        node: &SearchNode,
        found: &FoundLb,
    ) -> (SearchNode, Option<SearchNode>) {
        let i = node.next_iter;
        debug_assert!(i < self.gamma());
        let h = self.heuristic(i + 1);
        let g = node.g + self.profile.step_cost(i, node.last_lb, false);
        let keep = SearchNode {
            next_iter: i + 1,
            is_lb: false,
            last_lb: node.last_lb,
            g,
            f: g + h,
            parent: Some(id),
        };
        let balance = (i >= 1 && !found.is_found(i)).then(|| {
            let g = node.g + self.profile.step_cost(i, node.last_lb, true);
            SearchNode {
                next_iter: i + 1,
                is_lb: true,
                last_lb: i,
                g,
                f: g + h,
                parent: Some(id),
            }
        });
        (keep, balance)
    }
}

/// `sum_{j=i}^{gamma-1} mu(j)` for `0 <= i <= gamma`.
pub fn heuristic(model: &WorkloadModel, i: usize) -> Result<f64> {
    if i > model.gamma {
        return Err(Error::Domain(format!("iteration {i} beyond gamma = {}", model.gamma)));
    }
    let profile = model.profile()?;
    Ok(SearchSpace::new(&profile).heuristic(i))
}

#[derive(Debug, Clone, Copy)]
struct QueueEntry {
    f: f64,
    next_iter: usize,
    is_lb: bool,
    seq: u64,
    id: NodeId,
}

impl Ord for QueueEntry {
    // BinaryHeap pops the greatest entry: lowest f, then shallower, then
    // unbalanced, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(other.next_iter.cmp(&self.next_iter))
            .then(other.is_lb.cmp(&self.is_lb))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for QueueEntry {}

/// Priority queue of search nodes ordered by `f`, owning the node arena.
#[derive(Debug, Default)]
pub struct Frontier {
    nodes: Vec<SearchNode>,
    queued: Vec<bool>,
    heap: BinaryHeap<QueueEntry>,
    // queued balanced nodes, by next_iter
    balanced: HashMap<usize, Vec<NodeId>>,
    live: usize,
    peak: usize,
    seq: u64,
}

impl Frontier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&self, id: NodeId) -> &SearchNode {
        &self.nodes[id]
    }

    pub fn len(&self) -> usize {
        self.live
    }

    pub fn is_empty(&self) -> bool {
        self.live == 0
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn push(&mut self, node: SearchNode) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(node);
        self.queued.push(true);
        self.heap.push(QueueEntry {
            f: node.f,
            next_iter: node.next_iter,
            is_lb: node.is_lb,
            seq: self.seq,
            id,
        });
        self.seq += 1;
        self.live += 1;
        self.peak = self.peak.max(self.live);
        if node.is_lb {
            self.balanced.entry(node.next_iter).or_default().push(id);
        }
        id
    }

    /// Inserts a balanced node unless `keep` cheaper-or-equal balanced nodes
    /// at the same iteration are already queued, evicting the most expensive
    /// one when the new node beats it. With `keep = 1` an existing node is
    /// replaced only by a strictly cheaper one.
    pub fn replace_or_insert(&mut self, node: SearchNode, keep: usize) -> Option<NodeId> {
        debug_assert!(node.is_lb);
        let keep = keep.max(1);
        let worst = match self.balanced.get(&node.next_iter) {
            Some(ids) if ids.len() >= keep => {
                let (pos, &id) = ids
                    .iter()
                    .enumerate()
                    .max_by(|a, b| self.nodes[*a.1].g.total_cmp(&self.nodes[*b.1].g))
                    .expect("nonempty");
                if self.nodes[id].g <= node.g {
                    return None;
                }
                Some((pos, id))
            }
            _ => None,
        };
        if let Some((pos, id)) = worst {
            self.balanced
                .get_mut(&node.next_iter)
                .expect("slot exists")
                .swap_remove(pos);
            self.queued[id] = false;
            self.live -= 1;
        }
        Some(self.push(node))
    }

    /// Queued balanced nodes reaching `next_iter`.
    pub fn queued_balanced(&self, next_iter: usize) -> Vec<&SearchNode> {
        self.balanced
            .get(&next_iter)
            .map(|ids| ids.iter().map(|&id| &self.nodes[id]).collect())
            .unwrap_or_default()
    }

    pub fn pop(&mut self) -> Option<NodeId> {
        while let Some(entry) = self.heap.pop() {
            let id = entry.id;
            if !self.queued[id] {
                continue;
            }
            self.queued[id] = false;
            self.live -= 1;
            let node = self.nodes[id];
            if node.is_lb {
                if let MapEntry::Occupied(mut slot) = self.balanced.entry(node.next_iter) {
                    slot.get_mut().retain(|&other| other != id);
                    if slot.get().is_empty() {
                        slot.remove();
                    }
                }
            }
            return Some(id);
        }
        None
    }

    /// Balanced iterations on the path from the root to `id`.
    pub fn scenario(&self, id: NodeId) -> Scenario {
        let mut out = Vec::new();
        let mut cursor = Some(id);
        while let Some(c) = cursor {
            let node = &self.nodes[c];
            if node.is_lb && node.parent.is_some() {
                out.push(node.last_lb);
            }
            cursor = node.parent;
        }
        out.reverse();
        Scenario::new(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    /// Cheapest scenarios in nondecreasing total time.
    pub results: Vec<RankedScenario>,
    pub stats: SearchStats,
}

/// The optimal scenario, its total time and the search statistics.
pub fn search_optimal(model: &WorkloadModel) -> Result<(Scenario, f64, SearchStats)> {
    let outcome = search_nth_best(model, 1)?;
    let best = outcome
        .results
        .into_iter()
        .next()
        .expect("the never-balance path always reaches the goal");
    Ok((best.scenario, best.total_time, outcome.stats))
}

/// The `n` cheapest scenarios (fewer if `2^(gamma-1) < n`).
pub fn search_nth_best(model: &WorkloadModel, n: usize) -> Result<SearchOutcome> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    let profile = model.profile()?;
    Ok(search_profile(&profile, n))
}

/// [`search_nth_best`] on an already tabulated model.
pub fn search_profile(profile: &LoadProfile, n: usize) -> SearchOutcome {
    let n = n.max(1);
    let space = SearchSpace::new(profile);
    let gamma = space.gamma();
    let mut found = FoundLb::new(gamma, n);
    let mut expansions: HashMap<(usize, usize, bool), usize> = HashMap::new();
    let mut frontier = Frontier::new();
    let mut stats = SearchStats {
        nodes_created: 1,
        ..SearchStats::default()
    };
    let mut results = Vec::with_capacity(n.min(1024));
    let mut last_f = f64::NEG_INFINITY;

    frontier.push(SearchNode::root(space.heuristic(0)));
    while let Some(id) = frontier.pop() {
        let node = *frontier.node(id);
        debug_assert!(
            node.f >= last_f - 1e-9 * last_f.abs(),
            "popped f decreased: {} after {last_f}",
            node.f
        );
        last_f = node.f;

        if node.next_iter == gamma {
            results.push(RankedScenario {
                scenario: frontier.scenario(id),
                total_time: node.g,
            });
            if results.len() == n {
                break;
            }
            continue;
        }
        if node.is_lb {
            // a later pop at the same iteration cannot be among the n shortest
            if found.is_found(node.last_lb) {
                continue;
            }
            found.mark(node.last_lb);
        }
        match expansions.entry((node.next_iter, node.last_lb, node.is_lb)) {
            MapEntry::Occupied(e) if *e.get() >= n => continue,
            MapEntry::Occupied(mut e) => *e.get_mut() += 1,
            MapEntry::Vacant(e) => {
                e.insert(1);
            }
        }

        stats.nodes_expanded += 1;
        let (keep, balance) = space.expand(id, &node, &found);
        if let Some(balance) = balance {
            if frontier.replace_or_insert(balance, n).is_some() {
                stats.nodes_created += 1;
            }
        }
        stats.nodes_created += 1;
        frontier.push(keep);
    }
    stats.queue_peak = frontier.peak();
    SearchOutcome { results, stats }
}

/// Every scenario with its total time, cheapest first (ties broken by the
/// lexicographically smaller iteration list). Refuses `gamma > cap`.
pub fn brute_force(model: &WorkloadModel, cap: usize) -> Result<Vec<RankedScenario>> {
    if model.gamma > cap || model.gamma > 63 {
        return Err(Error::BruteForceCap {
            gamma: model.gamma,
            cap: cap.min(63),
        });
    }
    let profile = model.profile()?;
    let free = model.gamma - 1;
    let mut out: Vec<RankedScenario> = (0u64..1 << free)
        .map(|mask| {
            let iters: Vec<usize> = (0..free).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            let total_time = profile.total_time(&iters);
            RankedScenario {
                scenario: Scenario::new(iters),
                total_time,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        a.total_time
            .total_cmp(&b.total_time)
            .then_with(|| a.scenario.cmp(&b.scenario))
    });
    Ok(out)
}
