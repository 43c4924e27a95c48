//! Incremental single-destination shortest paths (D* Lite).
//!
//! The search runs backwards from the destination, so `g(v)` estimates the
//! distance from `v` to the destination and `rhs(v)` is its one-step
//! lookahead `min over neighbours s of g(s) + c(s, v)`. A vertex sits in the
//! queue exactly when it is locally inconsistent (`g != rhs`). After edge
//! costs change only the affected region is repaired.

mod queue;

use std::cmp::Ordering;

pub use queue::KeyedQueue;

use crate::error::PlanError;
use crate::model::{EdgeCost, EdgeId, Path, ProblemInstance, VertexId, INF};

/// Queue priority `[k1; k2]`, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key {
    pub k1: f64,
    pub k2: f64,
}

impl Key {
    pub const INFINITE: Key = Key { k1: INF, k2: INF };

    fn cmp_total(&self, other: &Key) -> Ordering {
        self.k1.total_cmp(&other.k1).then_with(|| self.k2.total_cmp(&other.k2))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Key) -> Option<Ordering> {
        Some(self.cmp_total(other))
    }
}

/// A change of one edge's planning cost. `new_cost == INF` temporarily
/// removes the edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostUpdate {
    pub edge: EdgeId,
    pub old_cost: f64,
    pub new_cost: f64,
}

/// Work done by one [`DStarState::compute_shortest_path`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: usize,
}

#[derive(Debug, Clone)]
pub struct DStarState {
    g: Vec<f64>,
    rhs: Vec<f64>,
    queue: KeyedQueue,
    k_m: f64,
    v_old: VertexId,
    v_curr: VertexId,
    dest: VertexId,
}

impl DStarState {
    /// Fresh state: every value infinite except `rhs(dest) = 0`, and the
    /// destination queued with key `[h(start, dest); 0]`.
    pub fn initialize(inst: &ProblemInstance, start: VertexId, dest: VertexId) -> Self {
        let n = inst.num_vertices();
        let mut rhs = vec![INF; n];
        rhs[dest.index()] = 0.0;
        let mut queue = KeyedQueue::new(n);
        queue.insert(
            dest,
            Key {
                k1: inst.heuristic(start, dest),
                k2: 0.0,
            },
        );
        DStarState {
            g: vec![INF; n],
            rhs,
            queue,
            k_m: 0.0,
            v_old: start,
            v_curr: start,
            dest,
        }
    }

    pub fn g(&self, v: VertexId) -> f64 {
        self.g[v.index()]
    }

    pub fn rhs(&self, v: VertexId) -> f64 {
        self.rhs[v.index()]
    }

    pub fn k_m(&self) -> f64 {
        self.k_m
    }

    pub fn v_old(&self) -> VertexId {
        self.v_old
    }

    pub fn v_curr(&self) -> VertexId {
        self.v_curr
    }

    pub fn dest(&self) -> VertexId {
        self.dest
    }

    pub fn queue(&self) -> &KeyedQueue {
        &self.queue
    }

    /// Test hook: overwrite a vertex's values (bypasses consistency upkeep).
    #[doc(hidden)]
    pub fn set_values(&mut self, v: VertexId, g: f64, rhs: f64) {
        self.g[v.index()] = g;
        self.rhs[v.index()] = rhs;
    }

    /// Overrides the key offset; spur searches start from `k_m + h(v_curr, spur)`.
    pub fn set_k_m(&mut self, k_m: f64) {
        self.k_m = k_m;
    }

    /// True when `v` is queued iff `g(v) != rhs(v)`, for every vertex.
    pub fn queue_membership_holds(&self) -> bool {
        (0..self.g.len()).all(|i| {
            let v = VertexId(i as u32);
            self.queue.contains(v) == (self.g[i] != self.rhs[i])
        })
    }

    /// Same `g`, `rhs`, queue contents and `k_m` (bit for bit).
    pub fn same_as(&self, other: &DStarState) -> bool {
        let bits = |xs: &[f64]| xs.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let queue = |q: &KeyedQueue| {
            let mut items: Vec<_> = q.iter().map(|(v, k)| (v, k.k1.to_bits(), k.k2.to_bits())).collect();
            items.sort_unstable();
            items
        };
        bits(&self.g) == bits(&other.g)
            && bits(&self.rhs) == bits(&other.rhs)
            && self.k_m.to_bits() == other.k_m.to_bits()
            && queue(&self.queue) == queue(&other.queue)
            && self.v_old == other.v_old
            && self.v_curr == other.v_curr
    }

    pub fn calculate_key(&self, inst: &ProblemInstance, v: VertexId) -> Key {
        let m = self.g[v.index()].min(self.rhs[v.index()]);
        Key {
            k1: m + inst.heuristic(v, self.v_curr) + self.k_m,
            k2: m,
        }
    }

    pub fn update_vertex(&mut self, inst: &ProblemInstance, v: VertexId) {
        let inconsistent = self.g[v.index()] != self.rhs[v.index()];
        let queued = self.queue.contains(v);
        match (inconsistent, queued) {
            (true, true) => {
                let key = self.calculate_key(inst, v);
                self.queue.update(v, key);
            }
            (true, false) => {
                let key = self.calculate_key(inst, v);
                self.queue.insert(v, key);
            }
            (false, true) => self.queue.remove(v),
            (false, false) => {}
        }
    }

    /// `min over neighbours s' of g(s') + c(s', v)`.
    fn lookahead(&self, inst: &ProblemInstance, costs: &impl EdgeCost, v: VertexId) -> f64 {
        inst.ugv_neighbors(v)
            .iter()
            .map(|&(s, e)| self.g[s.index()] + costs.cost(e))
            .fold(INF, f64::min)
    }

    /// Repairs the `rhs` values of both endpoints after one edge changed.
    /// `costs` must already price the edge at `update.new_cost`.
    pub fn rhs_update(&mut self, inst: &ProblemInstance, costs: &impl EdgeCost, update: &CostUpdate) {
        let edge = inst.edge(update.edge);
        let (u, v) = (edge.u, edge.v);
        if update.old_cost > update.new_cost {
            for (a, b) in [(u, v), (v, u)] {
                if a != self.dest {
                    let cand = self.g[b.index()] + update.new_cost;
                    if cand < self.rhs[a.index()] {
                        self.rhs[a.index()] = cand;
                    }
                }
            }
        } else {
            for (a, b) in [(u, v), (v, u)] {
                if a != self.dest && self.rhs[a.index()] == self.g[b.index()] + update.old_cost {
                    self.rhs[a.index()] = self.lookahead(inst, costs, a);
                }
            }
        }
        self.update_vertex(inst, u);
        self.update_vertex(inst, v);
    }

    /// Expands inconsistent vertices until `v_curr` is consistent and no
    /// queued key is below its key.
    pub fn compute_shortest_path(
        &mut self,
        inst: &ProblemInstance,
        costs: &impl EdgeCost,
        v_curr: VertexId,
    ) -> Result<SearchStats, PlanError> {
        self.v_curr = v_curr;
        let mut stats = SearchStats::default();
        loop {
            let top_key = self.queue.top_key();
            let start_key = self.calculate_key(inst, v_curr);
            let vi = v_curr.index();
            if !(top_key < start_key || self.rhs[vi] != self.g[vi]) {
                break;
            }
            let Some((u, k_old)) = self.queue.top() else {
                break;
            };
            stats.expansions += 1;
            let k_new = self.calculate_key(inst, u);
            let ui = u.index();
            if k_old < k_new {
                self.queue.update(u, k_new);
            } else if self.g[ui] > self.rhs[ui] {
                self.g[ui] = self.rhs[ui];
                self.queue.remove(u);
                let gu = self.g[ui];
                for &(s, e) in inst.ugv_neighbors(u) {
                    if s != self.dest {
                        let cand = costs.cost(e) + gu;
                        if cand < self.rhs[s.index()] {
                            self.rhs[s.index()] = cand;
                        }
                    }
                    self.update_vertex(inst, s);
                }
            } else {
                let g_old = self.g[ui];
                self.g[ui] = INF;
                for &(s, e) in inst.ugv_neighbors(u) {
                    if self.rhs[s.index()] == costs.cost(e) + g_old && s != self.dest {
                        self.rhs[s.index()] = self.lookahead(inst, costs, s);
                    }
                    self.update_vertex(inst, s);
                }
                // u itself: its rhs does not depend on g(u)
                self.update_vertex(inst, u);
            }
        }
        if self.rhs[v_curr.index()].is_finite() {
            Ok(stats)
        } else {
            Err(PlanError::NoPath { from: v_curr })
        }
    }

    /// Greedy descent from `from`: repeatedly step to the neighbour
    /// minimising `c(v, s) + g(s)`, lowest vertex id on ties.
    pub fn extract_path(
        &self,
        inst: &ProblemInstance,
        costs: &impl EdgeCost,
        from: VertexId,
    ) -> Result<Path, PlanError> {
        let no_path = PlanError::NoPath { from };
        if !self.g[from.index()].is_finite() && from != self.dest {
            return Err(no_path);
        }
        let mut path = Path::single(from);
        let mut seen = vec![false; self.g.len()];
        seen[from.index()] = true;
        let mut cur = from;
        while cur != self.dest {
            let mut best: Option<(f64, VertexId, EdgeId, f64)> = None;
            for &(s, e) in inst.ugv_neighbors(cur) {
                let c = costs.cost(e);
                let total = c + self.g[s.index()];
                // neighbours are sorted by id, so strict < keeps the lowest id
                if best.is_none_or(|b| total < b.0) {
                    best = Some((total, s, e, c));
                }
            }
            let Some((_, next, e, c)) = best.filter(|b| b.0.is_finite()) else {
                return Err(no_path);
            };
            if seen[next.index()] {
                return Err(no_path);
            }
            seen[next.index()] = true;
            path.vertices.push(next);
            path.edges.push(e);
            path.cost += c;
            cur = next;
        }
        Ok(path)
    }

    /// Moves the query vertex: `k_m += h(v_old, v)` and `v_old = v`.
    pub fn shift_to(&mut self, inst: &ProblemInstance, v: VertexId) {
        self.k_m += inst.heuristic(self.v_old, v);
        self.v_old = v;
        self.v_curr = v;
    }

    /// Applies updates, repairs and extracts a path from `v_curr` without
    /// touching `k_m`.
    pub fn search(
        &mut self,
        inst: &ProblemInstance,
        costs: &impl EdgeCost,
        v_curr: VertexId,
        updates: &[CostUpdate],
    ) -> Result<Path, PlanError> {
        self.v_curr = v_curr;
        for u in updates {
            self.rhs_update(inst, costs, u);
        }
        self.compute_shortest_path(inst, costs, v_curr)?;
        self.extract_path(inst, costs, v_curr)
    }

    /// Full replanning step: shift `k_m` for the vehicle's move, apply the
    /// cost updates, repair, and return the path from `v_curr`.
    pub fn replan(
        &mut self,
        inst: &ProblemInstance,
        costs: &impl EdgeCost,
        v_curr: VertexId,
        updates: &[CostUpdate],
    ) -> Result<Path, PlanError> {
        self.shift_to(inst, v_curr);
        self.search(inst, costs, v_curr, updates)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        Coord, CostDistribution, EdgeRecord, Endpoints, KnowledgeState, PlanningCostView, UavSettings, UgvCost,
    };

    struct Table(Vec<f64>);

    impl EdgeCost for Table {
        fn cost(&self, e: EdgeId) -> f64 {
            self.0[e.index()]
        }
    }

    /// a(0) – b(1) – d(2), unit costs, plus an isolated-by-cost spur c(3)–d.
    fn line() -> ProblemInstance {
        let vertices = vec![
            Coord::new(0.0, 0.0),
            Coord::new(0.0, 0.0),
            Coord::new(0.0, 0.0),
            Coord::new(0.0, 0.0),
        ];
        let mk = |id, u, v| EdgeRecord {
            id: EdgeId(id),
            u: VertexId(u),
            v: VertexId(v),
            ugv: UgvCost::Fixed(1.0),
            uav_cost: 1.0,
        };
        let edges = vec![mk(0, 0, 1), mk(1, 1, 2), mk(2, 2, 3)];
        let ends = Endpoints {
            p: VertexId(0),
            q: VertexId(0),
            d: VertexId(2),
        };
        ProblemInstance::new(vertices, edges, ends, UavSettings::default()).unwrap()
    }

    #[test]
    fn initialize_queues_destination() {
        let inst = line();
        let s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        assert_eq!(s.rhs(VertexId(2)), 0.0);
        assert_eq!(s.g(VertexId(2)), INF);
        assert_eq!(s.queue().len(), 1);
        assert_eq!(
            s.calculate_key(&inst, VertexId(2)),
            Key {
                k1: inst.heuristic(VertexId(0), VertexId(2)),
                k2: 0.0
            }
        );
        assert!(s.queue_membership_holds());
    }

    #[test]
    fn calculate_key_formula() {
        let inst = line();
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        assert_eq!(s.calculate_key(&inst, VertexId(1)), Key::INFINITE);
        s.set_values(VertexId(1), 5.0, 7.0);
        s.set_k_m(1.0);
        // zero coordinates: h = 0, so [5 + 0 + 1; 5]
        assert_eq!(s.calculate_key(&inst, VertexId(1)), Key { k1: 6.0, k2: 5.0 });
    }

    #[test]
    fn calculate_key_with_heuristic() {
        let vertices = vec![Coord::new(0.0, 0.0), Coord::new(2.0, 0.0)];
        let edges = vec![EdgeRecord {
            id: EdgeId(0),
            u: VertexId(0),
            v: VertexId(1),
            ugv: UgvCost::Fixed(5.0),
            uav_cost: 1.0,
        }];
        let ends = Endpoints {
            p: VertexId(0),
            q: VertexId(0),
            d: VertexId(1),
        };
        let inst = ProblemInstance::new(vertices, edges, ends, UavSettings::default()).unwrap();
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(1));
        s.set_values(VertexId(1), 5.0, 7.0);
        s.set_k_m(1.0);
        // h(d, v_curr = p) = 2
        assert_eq!(s.calculate_key(&inst, VertexId(1)), Key { k1: 8.0, k2: 5.0 });
    }

    #[test]
    fn update_vertex_cases() {
        let inst = line();
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        // consistent, not queued
        s.update_vertex(&inst, VertexId(0));
        assert!(!s.queue().contains(VertexId(0)));
        // g = inf, rhs = 3 → inserted
        s.set_values(VertexId(0), INF, 3.0);
        s.update_vertex(&inst, VertexId(0));
        assert_eq!(s.queue().key_of(VertexId(0)), Some(s.calculate_key(&inst, VertexId(0))));
        // g = rhs = 3, queued → removed
        s.set_values(VertexId(0), 3.0, 3.0);
        s.update_vertex(&inst, VertexId(0));
        assert!(!s.queue().contains(VertexId(0)));
    }

    #[test]
    fn start_equals_destination() {
        let inst = line();
        let costs = Table(vec![1.0, 1.0, 1.0]);
        let mut s = DStarState::initialize(&inst, VertexId(2), VertexId(2));
        let path = s.replan(&inst, &costs, VertexId(2), &[]).unwrap();
        assert_eq!(s.g(VertexId(2)), 0.0);
        assert_eq!(path.vertices, vec![VertexId(2)]);
    }

    #[test]
    fn second_run_without_updates_expands_nothing() {
        let inst = line();
        let costs = Table(vec![1.0, 1.0, 1.0]);
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        let first = s.compute_shortest_path(&inst, &costs, VertexId(0)).unwrap();
        assert!(first.expansions > 0);
        let second = s.compute_shortest_path(&inst, &costs, VertexId(0)).unwrap();
        assert_eq!(second.expansions, 0);
    }

    #[test]
    fn increase_repairs_rhs() {
        let inst = line();
        let mut costs = Table(vec![1.0, 1.0, 1.0]);
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        s.replan(&inst, &costs, VertexId(0), &[]).unwrap();
        assert_eq!(s.g(VertexId(0)), 2.0);
        costs.0[0] = 5.0;
        let up = CostUpdate {
            edge: EdgeId(0),
            old_cost: 1.0,
            new_cost: 5.0,
        };
        let path = s.replan(&inst, &costs, VertexId(0), &[up]).unwrap();
        // Dijkstra on the updated line: 5 + 1
        assert_eq!(s.rhs(VertexId(0)), 6.0);
        assert_eq!(path.cost, 6.0);
        assert!(s.queue_membership_holds());
    }

    #[test]
    fn decrease_far_from_search_leaves_rhs() {
        let inst = line();
        let mut costs = Table(vec![1.0, 1.0, 1.0]);
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        // nothing computed yet: g = inf everywhere
        costs.0[0] = 0.5;
        let before = s.clone();
        s.rhs_update(
            &inst,
            &costs,
            &CostUpdate {
                edge: EdgeId(0),
                old_cost: 1.0,
                new_cost: 0.5,
            },
        );
        assert_eq!(s.rhs(VertexId(0)), INF);
        assert_eq!(s.rhs(VertexId(1)), INF);
        assert!(s.same_as(&before));
    }

    #[test]
    fn idempotent_update() {
        let inst = line();
        let costs = Table(vec![1.0, 1.0, 1.0]);
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        s.replan(&inst, &costs, VertexId(0), &[]).unwrap();
        let before = s.clone();
        s.rhs_update(
            &inst,
            &costs,
            &CostUpdate {
                edge: EdgeId(1),
                old_cost: 1.0,
                new_cost: 1.0,
            },
        );
        assert!(s.same_as(&before));
    }

    #[test]
    fn disconnected_start_reports_no_path() {
        let inst = line();
        let costs = Table(vec![1.0, INF, 1.0]);
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(2));
        assert_eq!(
            s.replan(&inst, &costs, VertexId(0), &[]),
            Err(PlanError::NoPath { from: VertexId(0) })
        );
        assert!(s.queue_membership_holds());
    }

    #[test]
    fn uses_planning_view() {
        let vertices = vec![Coord::new(0.0, 0.0), Coord::new(4.0, 0.0)];
        let edges = vec![EdgeRecord {
            id: EdgeId(0),
            u: VertexId(0),
            v: VertexId(1),
            ugv: UgvCost::Impeded(CostDistribution::Uniform { min: 4.0, max: 20.0 }),
            uav_cost: 1.0,
        }];
        let ends = Endpoints {
            p: VertexId(0),
            q: VertexId(0),
            d: VertexId(1),
        };
        let inst = ProblemInstance::new(vertices, edges, ends, UavSettings::default()).unwrap();
        let know = KnowledgeState::new(&inst);
        let view = PlanningCostView::new(&inst, &know);
        let mut s = DStarState::initialize(&inst, VertexId(0), VertexId(1));
        let p = s.replan(&inst, &view, VertexId(0), &[]).unwrap();
        assert_eq!(p.cost, 12.0);
    }
}
