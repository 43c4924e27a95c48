//! UAV inspection planning as a rural postman problem with time windows.
//!
//! Critical edges (unrealized impeded edges on the UGV's k paths) get an
//! inspection deadline. Each critical edge becomes two nodes of a
//! transformed graph, one per traversal direction, plus a depot node `0`
//! for the UAV's current position. A depth-first search then looks for the
//! visiting order that inspects the most edges within their windows, and
//! among those the cheapest.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use crate::error::PlanError;
use crate::kspp::PathSet;
use crate::model::{EdgeId, KnowledgeState, PlanningCostView, ProblemInstance, VertexId, INF};
use crate::transit::UavMetric;

/// An unrealized impeded edge with its visitation window `[t_min, t_max]`.
/// Times are relative to the planning moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalEdge {
    pub edge: EdgeId,
    pub t_min: f64,
    pub t_max: f64,
}

/// Collects every unrealized impeded edge on the paths of `path_set`.
///
/// Edges on the best path get `t_max` = earliest possible UGV arrival at the
/// edge's first vertex along that path, using distribution minima for
/// unrealized impeded edges, plus `ugv_offset` (time until the UGV reaches the
/// path's first vertex). Edges only on alternative paths get `t_max = ∞`.
/// Order: best-path edges first, then by first appearance.
pub fn extract_critical_edges(
    path_set: &PathSet,
    knowledge: &KnowledgeState,
    inst: &ProblemInstance,
    view: &PlanningCostView<'_>,
    ugv_offset: f64,
) -> Vec<CriticalEdge> {
    let mut out: Vec<CriticalEdge> = Vec::new();
    let mut seen = vec![false; inst.num_edges()];
    for (rank, path) in path_set.paths.iter().enumerate() {
        let mut arrival = ugv_offset;
        for &e in &path.edges {
            let critical = inst.edge(e).is_impeded() && !knowledge.is_realized(e);
            if critical && !seen[e.index()] {
                seen[e.index()] = true;
                out.push(CriticalEdge {
                    edge: e,
                    t_min: 0.0,
                    t_max: if rank == 0 { arrival } else { INF },
                });
            }
            arrival += view.optimistic_cost(e);
        }
    }
    out
}

/// One direction of one critical edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    pub edge: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
}

/// Node graph for the inspection problem. Node 0 is the depot (UAV now);
/// nodes `2c + 1` and `2c + 2` traverse critical edge `c` in canonical and
/// reversed direction.
#[derive(Debug, Clone)]
pub struct TransformedGraph {
    pub uav_pos: VertexId,
    directions: Vec<Direction>,
    inspect_cost: Vec<f64>,
    deadline: Vec<f64>,
    original_t_max: Vec<f64>,
    arcs: Vec<f64>,
    n: usize,
}

pub const DEPOT: usize = 0;

/// The opposite-direction node of a non-depot node.
pub fn twin(i: usize) -> usize {
    debug_assert!(i != DEPOT);
    if i % 2 == 1 {
        i + 1
    } else {
        i - 1
    }
}

impl TransformedGraph {
    pub fn num_nodes(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        (self.n - 1) / 2
    }

    /// Critical-edge index of a non-depot node.
    pub fn edge_slot(&self, i: usize) -> usize {
        (i - 1) / 2
    }

    pub fn direction(&self, i: usize) -> Option<Direction> {
        (i != DEPOT).then(|| self.directions[i - 1])
    }

    /// Aerial time to traverse the node's edge.
    pub fn inspect_cost(&self, i: usize) -> f64 {
        self.inspect_cost[i]
    }

    /// Latest moment the UAV may *start* the node's traversal.
    pub fn deadline(&self, i: usize) -> f64 {
        self.deadline[i]
    }

    /// The critical edge's `t_max` before any adjustment.
    pub fn original_t_max(&self, i: usize) -> f64 {
        self.original_t_max[i]
    }

    /// Arc cost; `INF` between twins and on the diagonal.
    pub fn arc(&self, i: usize, j: usize) -> f64 {
        self.arcs[i * self.n + j]
    }
}

/// Builds the node graph for `critical`.
///
/// `arc(i, j) = τ(i) + SP(end(i), start(j))`, `arc(0, i) = SP(uav, start(i))`,
/// `arc(i, 0) = τ(i)`. Deadlines are `t_max − τ − uav_time_offset`, where the
/// offset is how long until the UAV is free at `uav_pos`.
pub fn build_transformed_graph(
    inst: &ProblemInstance,
    metric: &mut UavMetric<'_>,
    critical: &[CriticalEdge],
    uav_pos: VertexId,
    uav_time_offset: f64,
) -> TransformedGraph {
    let n = 1 + 2 * critical.len();
    let mut directions = Vec::with_capacity(n - 1);
    let mut inspect_cost = vec![0.0; n];
    let mut deadline = vec![INF; n];
    let mut original_t_max = vec![INF; n];
    for (c, ce) in critical.iter().enumerate() {
        let rec = inst.edge(ce.edge);
        directions.push(Direction {
            edge: ce.edge,
            from: rec.u,
            to: rec.v,
        });
        directions.push(Direction {
            edge: ce.edge,
            from: rec.v,
            to: rec.u,
        });
        for i in [2 * c + 1, 2 * c + 2] {
            inspect_cost[i] = rec.uav_cost;
            deadline[i] = ce.t_max - rec.uav_cost - uav_time_offset;
            original_t_max[i] = ce.t_max;
        }
    }
    let mut arcs = vec![INF; n * n];
    for j in 1..n {
        arcs[j] = metric.cost(uav_pos, directions[j - 1].from);
        arcs[j * n] = inspect_cost[j];
    }
    for i in 1..n {
        let end = directions[i - 1].to;
        for j in 1..n {
            if i == j || twin(i) == j {
                continue;
            }
            arcs[i * n + j] = inspect_cost[i] + metric.cost(end, directions[j - 1].from);
        }
    }
    TransformedGraph {
        uav_pos,
        directions,
        inspect_cost,
        deadline,
        original_t_max,
        arcs,
        n,
    }
}

/// Best inspection order found. `best_cost` is the time at which the UAV
/// starts its last inspection (0 when nothing is visited).
#[derive(Debug, Clone, PartialEq)]
pub struct RppSolution {
    pub best_cost: f64,
    pub best_visited: Vec<usize>,
    pub timed_out: bool,
    pub expansions: u64,
}

impl RppSolution {
    /// Number of inspected edges.
    pub fn inspected(&self) -> usize {
        self.best_visited.len() - 1
    }

    /// Time at which the last inspection completes.
    pub fn completion_time(&self, go: &TransformedGraph) -> f64 {
        match self.best_visited.last() {
            Some(&i) if i != DEPOT => self.best_cost + go.inspect_cost(i),
            _ => 0.0,
        }
    }
}

/// Child filter used by the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pruning {
    /// Optimal: drop a state already reached at no greater cost with the same
    /// last node and edge set, or one whose reachable edges cannot beat the
    /// incumbent.
    Exact,
    /// Skip an extension whose cost is no better than the incumbent and whose
    /// edge set is contained in the incumbent's. Fast but may miss the optimum.
    Dominance,
    /// Explore every feasible extension.
    Exhaustive,
}

#[derive(Debug, Clone, Copy)]
pub struct RppOptions {
    /// Wall-clock limit per solve.
    pub budget: Option<Duration>,
    /// Deterministic limit on search nodes per solve.
    pub max_expansions: Option<u64>,
    pub pruning: Pruning,
}

impl Default for RppOptions {
    fn default() -> Self {
        RppOptions {
            budget: Some(Duration::from_secs(1)),
            max_expansions: None,
            pruning: Pruning::Exact,
        }
    }
}

/// Edge-slot bit set.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct SlotSet(Vec<u64>);

impl SlotSet {
    fn new(n: usize) -> Self {
        SlotSet(vec![0; n.div_ceil(64).max(1)])
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn contains(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    fn is_subset(&self, other: &SlotSet) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & !b == 0)
    }
}

struct Search<'g> {
    go: &'g TransformedGraph,
    opts: RppOptions,
    started: Instant,
    best_cost: f64,
    best_visited: Vec<usize>,
    best_set: SlotSet,
    visited: Vec<usize>,
    set: SlotSet,
    timed_out: bool,
    expansions: u64,
    children: Vec<Vec<usize>>,
    reach: Vec<f64>,
    memo: HashMap<(usize, SlotSet), f64>,
}

const MEMO_LIMIT: usize = 1 << 21;

impl Search<'_> {
    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if self.opts.max_expansions.is_some_and(|m| self.expansions > m) {
            self.timed_out = true;
        } else if let Some(budget) = self.opts.budget {
            if self.expansions.is_multiple_of(256) && self.started.elapsed() > budget {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    fn record(&mut self, cost: f64) {
        let count = self.visited.len();
        let best_count = self.best_visited.len();
        if best_count < count || (best_count == count && self.best_cost > cost) {
            self.best_cost = cost;
            self.best_visited = self.visited.clone();
            self.best_set = self.set.clone();
        }
    }

    /// Whether no completion of the current state can improve the incumbent.
    fn hopeless(&mut self, v: usize, cost: f64) -> bool {
        let go = self.go;
        let n = go.num_nodes();
        let reachable = (0..go.num_edges())
            .filter(|&s| !self.set.contains(s))
            .filter(|&s| {
                [2 * s + 1, 2 * s + 2]
                    .iter()
                    .any(|&j| cost + self.reach[v * n + j] <= go.deadline(j))
            })
            .count();
        let bound = self.visited.len() + reachable;
        let best = self.best_visited.len();
        if bound < best || (bound == best && cost >= self.best_cost) {
            return true;
        }
        let key = (v, self.set.clone());
        match self.memo.get_mut(&key) {
            Some(seen) if *seen <= cost => true,
            Some(seen) => {
                *seen = cost;
                false
            }
            None => {
                if self.memo.len() < MEMO_LIMIT {
                    self.memo.insert(key, cost);
                }
                false
            }
        }
    }

    fn dfs(&mut self, v: usize, cost: f64) {
        self.expansions += 1;
        if self.out_of_time() {
            return;
        }
        let go = self.go;
        if self.opts.pruning == Pruning::Exact {
            self.record(cost);
            if self.hopeless(v, cost) {
                return;
            }
        }
        let mut terminal = true;
        for idx in 0..self.children[v].len() {
            let n = self.children[v][idx];
            let slot = go.edge_slot(n);
            if self.set.contains(slot) {
                continue;
            }
            let new_cost = cost + go.arc(v, n);
            if new_cost > go.deadline(n) {
                continue;
            }
            self.set.insert(slot);
            let explore = match self.opts.pruning {
                Pruning::Exhaustive | Pruning::Exact => true,
                Pruning::Dominance => new_cost < self.best_cost || !self.set.is_subset(&self.best_set),
            };
            if explore {
                self.visited.push(n);
                self.dfs(n, new_cost);
                self.visited.pop();
                terminal = false;
            }
            self.set.remove(slot);
            if self.timed_out {
                return;
            }
        }
        if terminal {
            self.record(cost);
        }
    }
}

/// All-pairs shortest arc distances; a lower bound on any arrival time.
fn closure(go: &TransformedGraph) -> Vec<f64> {
    let n = go.num_nodes();
    let mut d: Vec<f64> = (0..n * n).map(|x| go.arc(x / n, x % n)).collect();
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == INF {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

/// Depth-first search over the node graph from the depot. Children are tried
/// in ascending arc cost (then node index). The incumbent is replaced when
/// more edges are visited, or equally many at strictly lower cost. On budget
/// exhaustion the incumbent is returned with `timed_out`.
pub fn rpp_dfs(go: &TransformedGraph, opts: RppOptions) -> RppSolution {
    let n = go.num_nodes();
    let children = (0..n)
        .map(|v| {
            let mut c: Vec<usize> = (1..n).filter(|&j| go.arc(v, j).is_finite()).collect();
            c.sort_by(|&a, &b| go.arc(v, a).total_cmp(&go.arc(v, b)).then(a.cmp(&b)));
            c
        })
        .collect();
    let reach = if opts.pruning == Pruning::Exact {
        closure(go)
    } else {
        Vec::new()
    };
    let slots = go.num_edges();
    let mut search = Search {
        go,
        opts,
        started: Instant::now(),
        best_cost: INF,
        best_visited: vec![DEPOT],
        best_set: SlotSet::new(slots),
        visited: vec![DEPOT],
        set: SlotSet::new(slots),
        timed_out: false,
        expansions: 0,
        children,
        reach,
        memo: HashMap::new(),
    };
    search.dfs(DEPOT, 0.0);
    if search.timed_out {
        log::info!(
            "inspection search hit its budget after {} expansions",
            search.expansions
        );
    }
    RppSolution {
        best_cost: if search.best_cost.is_finite() {
            search.best_cost
        } else {
            0.0
        },
        best_visited: search.best_visited,
        timed_out: search.timed_out,
        expansions: search.expansions,
    }
}

/// One step of a UAV plan: fly `transit` (waypoints, first = current
/// position), then traverse `inspect` from `from` to `to`.
#[derive(Debug, Clone, PartialEq)]
pub struct InspectionLeg {
    pub transit: Vec<VertexId>,
    pub inspect: Direction,
}

/// Expands a solution into concrete legs.
pub fn solution_to_uav_plan(
    go: &TransformedGraph,
    sol: &RppSolution,
    metric: &mut UavMetric<'_>,
) -> Result<Vec<InspectionLeg>, PlanError> {
    let mut legs = Vec::new();
    let mut pos = go.uav_pos;
    for &i in sol.best_visited.iter().skip(1) {
        let dir = go.direction(i).expect("non-depot node");
        legs.push(InspectionLeg {
            transit: metric.route(pos, dir.from)?,
            inspect: dir,
        });
        pos = dir.to;
    }
    Ok(legs)
}

/// Total flight time of a plan: transit hops plus inspections.
pub fn plan_duration(inst: &ProblemInstance, metric: &UavMetric<'_>, legs: &[InspectionLeg]) -> f64 {
    legs.iter()
        .map(|leg| {
            let transit: f64 = leg.transit.windows(2).map(|w| metric.hop_cost(w[0], w[1])).sum();
            transit + inst.edge(leg.inspect.edge).uav_cost
        })
        .sum()
}
