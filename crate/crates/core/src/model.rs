//! Graph, instance and cost-distribution model shared by every planner.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;

use crate::error::InstanceError;

/// Time value used for "no path" / removed edges. Arithmetic saturates.
pub const INF: f64 = f64::INFINITY;

/// Speed of the ground vehicle. Edge costs are travel times at this speed.
pub const UGV_SPEED: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coord {
    pub x: f64,
    pub y: f64,
}

impl Coord {
    pub fn new(x: f64, y: f64) -> Self {
        Coord { x, y }
    }

    pub fn distance(&self, other: &Coord) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Distribution of the ground travel time of an impeded edge.
///
/// Only the uniform law is built in; planners see it exclusively through
/// [`expected`](Self::expected), [`variance`](Self::variance),
/// [`sample`](Self::sample) and [`bounds`](Self::bounds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostDistribution {
    Uniform { min: f64, max: f64 },
}

impl CostDistribution {
    pub fn uniform(min: f64, max: f64) -> Result<Self, InstanceError> {
        if !(min.is_finite() && max.is_finite()) || min <= 0.0 || max < min {
            return Err(InstanceError::InvalidDistribution { min, max });
        }
        Ok(CostDistribution::Uniform { min, max })
    }

    pub fn expected(&self) -> f64 {
        match *self {
            CostDistribution::Uniform { min, max } => (min + max) / 2.0,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            CostDistribution::Uniform { min, max } => (max - min) * (max - min) / 12.0,
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            CostDistribution::Uniform { min, max } => (min, max),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            CostDistribution::Uniform { min, max } => {
                if max > min {
                    rng.gen_range(min..=max)
                } else {
                    min
                }
            }
        }
    }
}

/// Ground cost of an edge: fixed, stochastic (impeded) or not traversable by
/// the ground vehicle at all (aerial-only edge).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UgvCost {
    Fixed(f64),
    Impeded(CostDistribution),
    Absent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRecord {
    pub id: EdgeId,
    /// Canonical orientation, `u < v`.
    pub u: VertexId,
    pub v: VertexId,
    pub ugv: UgvCost,
    pub uav_cost: f64,
}

impl EdgeRecord {
    pub fn is_ugv(&self) -> bool {
        !matches!(self.ugv, UgvCost::Absent)
    }

    pub fn is_impeded(&self) -> bool {
        matches!(self.ugv, UgvCost::Impeded(_))
    }

    pub fn distribution(&self) -> Option<&CostDistribution> {
        match &self.ugv {
            UgvCost::Impeded(d) => Some(d),
            _ => None,
        }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Lowest possible ground cost (fixed cost or distribution minimum).
    pub fn min_ugv_cost(&self) -> Option<f64> {
        match self.ugv {
            UgvCost::Fixed(c) => Some(c),
            UgvCost::Impeded(d) => Some(d.bounds().0),
            UgvCost::Absent => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Endpoints {
    /// Ground vehicle start.
    pub p: VertexId,
    /// Aerial vehicle start.
    pub q: VertexId,
    /// Ground vehicle destination.
    pub d: VertexId,
}

/// Aerial travel settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UavSettings {
    pub speed: f64,
    /// The aerial vehicle may fly straight between any two vertices.
    pub free_flight: bool,
}

impl Default for UavSettings {
    fn default() -> Self {
        UavSettings {
            speed: 2.0,
            free_flight: false,
        }
    }
}

type Adjacency = Vec<Vec<(VertexId, EdgeId)>>;

/// A validated problem instance. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    vertices: Vec<Coord>,
    edges: Vec<EdgeRecord>,
    ends: Endpoints,
    uav: UavSettings,
    ugv_adj: Adjacency,
    uav_adj: Adjacency,
    impeded: Vec<EdgeId>,
    pair_index: HashMap<(VertexId, VertexId), EdgeId>,
    heuristic_enabled: bool,
}

impl ProblemInstance {
    /// Validates the raw parts and builds adjacency. Edge ids must be dense
    /// and listed in order; endpoints are canonicalised to `u < v`.
    pub fn new(
        vertices: Vec<Coord>,
        mut edges: Vec<EdgeRecord>,
        ends: Endpoints,
        uav: UavSettings,
    ) -> Result<Self, InstanceError> {
        let n = vertices.len();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        for (i, c) in vertices.iter().enumerate() {
            if !(c.x.is_finite() && c.y.is_finite()) {
                return Err(InstanceError::NonFiniteCoord(VertexId(i as u32)));
            }
        }
        if !(uav.speed.is_finite() && uav.speed > 0.0) {
            return Err(InstanceError::InvalidUavSpeed(uav.speed));
        }
        for v in [ends.p, ends.q, ends.d] {
            if v.index() >= n {
                return Err(InstanceError::VertexOutOfRange(v));
            }
        }

        let mut ugv_adj: Adjacency = vec![Vec::new(); n];
        let mut uav_adj: Adjacency = vec![Vec::new(); n];
        let mut impeded = Vec::new();
        let mut pair_index = HashMap::with_capacity(edges.len());
        for (i, e) in edges.iter_mut().enumerate() {
            if e.id.index() != i {
                return Err(InstanceError::EdgeIdOrder {
                    expected: i as u32,
                    found: e.id,
                });
            }
            if e.u.index() >= n || e.v.index() >= n {
                return Err(InstanceError::VertexOutOfRange(if e.u.index() >= n {
                    e.u
                } else {
                    e.v
                }));
            }
            if e.u == e.v {
                return Err(InstanceError::SelfLoop(e.id));
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
            if pair_index.insert((e.u, e.v), e.id).is_some() {
                return Err(InstanceError::ParallelEdge(e.id));
            }
            if !(e.uav_cost.is_finite() && e.uav_cost > 0.0) {
                return Err(InstanceError::NonPositiveCost(e.id));
            }
            match e.ugv {
                UgvCost::Fixed(c) if !(c.is_finite() && c > 0.0) => return Err(InstanceError::NonPositiveCost(e.id)),
                UgvCost::Impeded(CostDistribution::Uniform { min, max }) => {
                    CostDistribution::uniform(min, max)?;
                    impeded.push(e.id);
                }
                _ => {}
            }
            if e.is_ugv() {
                ugv_adj[e.u.index()].push((e.v, e.id));
                ugv_adj[e.v.index()].push((e.u, e.id));
            }
            uav_adj[e.u.index()].push((e.v, e.id));
            uav_adj[e.v.index()].push((e.u, e.id));
        }
        for adj in ugv_adj.iter_mut().chain(uav_adj.iter_mut()) {
            adj.sort_unstable();
        }

        let mut inst = ProblemInstance {
            vertices,
            edges,
            ends,
            uav,
            ugv_adj,
            uav_adj,
            impeded,
            pair_index,
            heuristic_enabled: true,
        };
        inst.check_connected()?;
        inst.heuristic_enabled = inst.heuristic_is_admissible();
        if !inst.heuristic_enabled {
            log::warn!("edge costs fall below straight-line distance; using a zero heuristic for this instance");
        }
        Ok(inst)
    }

    fn check_connected(&self) -> Result<(), InstanceError> {
        let n = self.vertices.len();
        let mut seen = vec![false; n];
        let mut stack = vec![self.ends.p];
        seen[self.ends.p.index()] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.ugv_adj[v.index()] {
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if !seen[self.ends.d.index()] {
            return Err(InstanceError::DestinationUnreachable);
        }
        if count != n {
            return Err(InstanceError::Disconnected);
        }
        Ok(())
    }

    fn heuristic_is_admissible(&self) -> bool {
        self.edges.iter().all(|e| match e.min_ugv_cost() {
            Some(c) => c * UGV_SPEED >= self.euclidean(e.u, e.v),
            None => true,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Coord] {
        &self.vertices
    }

    pub fn coord(&self, v: VertexId) -> Coord {
        self.vertices[v.index()]
    }

    pub fn edges(&self) -> &[EdgeRecord] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &EdgeRecord {
        &self.edges[e.index()]
    }

    pub fn endpoints(&self) -> Endpoints {
        self.ends
    }

    pub fn uav_settings(&self) -> UavSettings {
        self.uav
    }

    /// Ground-traversable neighbours of `v`, sorted by vertex id.
    pub fn ugv_neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.ugv_adj[v.index()]
    }

    /// Aerial neighbours of `v` (all edges), sorted by vertex id.
    pub fn uav_neighbors(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.uav_adj[v.index()]
    }

    pub fn impeded(&self) -> &[EdgeId] {
        &self.impeded
    }

    pub fn num_ugv_edges(&self) -> usize {
        self.edges.iter().filter(|e| e.is_ugv()).count()
    }

    pub fn edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.pair_index.get(&key).copied()
    }

    pub fn ugv_edge_between(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        self.edge_between(a, b).filter(|e| self.edge(*e).is_ugv())
    }

    pub fn euclidean(&self, a: VertexId, b: VertexId) -> f64 {
        self.coord(a).distance(&self.coord(b))
    }

    /// Whether the straight-line heuristic is admissible for this instance.
    pub fn heuristic_enabled(&self) -> bool {
        self.heuristic_enabled
    }

    /// Straight-line ground travel time; zero when the instance's edge costs
    /// do not dominate straight-line distances.
    pub fn heuristic(&self, a: VertexId, b: VertexId) -> f64 {
        if self.heuristic_enabled {
            self.euclidean(a, b) / UGV_SPEED
        } else {
            0.0
        }
    }

    /// Returns a copy with different endpoints, re-validated.
    pub fn with_endpoints(&self, ends: Endpoints) -> Result<Self, InstanceError> {
        ProblemInstance::new(self.vertices.clone(), self.edges.clone(), ends, self.uav)
    }
}

/// Hidden true cost of every impeded edge.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    true_cost: Vec<Option<f64>>,
}

impl Realization {
    /// Builds a realization; its domain must be exactly the impeded set and
    /// every value must lie inside the edge's distribution bounds.
    pub fn new(inst: &ProblemInstance, costs: impl IntoIterator<Item = (EdgeId, f64)>) -> Result<Self, InstanceError> {
        let mut true_cost = vec![None; inst.num_edges()];
        for (e, c) in costs {
            if e.index() >= inst.num_edges() {
                return Err(InstanceError::UnknownEdge(e));
            }
            let dist = inst
                .edge(e)
                .distribution()
                .ok_or(InstanceError::RealizationNotImpeded(e))?;
            let (lo, hi) = dist.bounds();
            if !(c >= lo && c <= hi) {
                return Err(InstanceError::RealizationOutOfBounds { edge: e, cost: c });
            }
            if true_cost[e.index()].replace(c).is_some() {
                return Err(InstanceError::DuplicateRealization(e));
            }
        }
        if let Some(&e) = inst.impeded().iter().find(|e| true_cost[e.index()].is_none()) {
            return Err(InstanceError::MissingRealization(e));
        }
        Ok(Realization { true_cost })
    }

    pub fn sample<R: Rng + ?Sized>(inst: &ProblemInstance, rng: &mut R) -> Self {
        let mut true_cost = vec![None; inst.num_edges()];
        for &e in inst.impeded() {
            let d = inst.edge(e).distribution().expect("impeded edge");
            true_cost[e.index()] = Some(d.sample(rng));
        }
        Realization { true_cost }
    }

    pub fn cost(&self, e: EdgeId) -> Option<f64> {
        self.true_cost.get(e.index()).copied().flatten()
    }

    pub fn iter(&self) -> impl Iterator<Item = (EdgeId, f64)> + '_ {
        self.true_cost
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (EdgeId(i as u32), c)))
    }

    /// The realized ground cost of `e`, or the fixed cost for unimpeded edges.
    pub fn ground_cost(&self, inst: &ProblemInstance, e: EdgeId) -> f64 {
        match inst.edge(e).ugv {
            UgvCost::Fixed(c) => c,
            UgvCost::Impeded(_) => self.cost(e).expect("realized impeded edge"),
            UgvCost::Absent => INF,
        }
    }
}

/// The part of the realization revealed so far. Grows monotonically.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeState {
    realized: Vec<Option<f64>>,
    order: Vec<EdgeId>,
}

impl KnowledgeState {
    pub fn new(inst: &ProblemInstance) -> Self {
        KnowledgeState {
            realized: vec![None; inst.num_edges()],
            order: Vec::new(),
        }
    }

    /// Records a revealed cost. Returns false if the edge was already known.
    pub fn reveal(&mut self, e: EdgeId, cost: f64) -> bool {
        let slot = &mut self.realized[e.index()];
        if slot.is_some() {
            return false;
        }
        *slot = Some(cost);
        self.order.push(e);
        true
    }

    pub fn get(&self, e: EdgeId) -> Option<f64> {
        self.realized.get(e.index()).copied().flatten()
    }

    pub fn is_realized(&self, e: EdgeId) -> bool {
        self.get(e).is_some()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Revealed edges in reveal order.
    pub fn revealed(&self) -> &[EdgeId] {
        &self.order
    }
}

/// Anything that prices ground edges for a shortest-path search. Returns
/// [`INF`] for edges that must not be used.
pub trait EdgeCost {
    fn cost(&self, e: EdgeId) -> f64;
}

impl<T: EdgeCost + ?Sized> EdgeCost for &T {
    fn cost(&self, e: EdgeId) -> f64 {
        (**self).cost(e)
    }
}

/// Planning costs: fixed costs, realized costs where known, expected costs
/// otherwise.
#[derive(Debug, Clone, Copy)]
pub struct PlanningCostView<'a> {
    inst: &'a ProblemInstance,
    knowledge: &'a KnowledgeState,
}

impl<'a> PlanningCostView<'a> {
    pub fn new(inst: &'a ProblemInstance, knowledge: &'a KnowledgeState) -> Self {
        PlanningCostView { inst, knowledge }
    }

    pub fn instance(&self) -> &'a ProblemInstance {
        self.inst
    }

    pub fn knowledge(&self) -> &'a KnowledgeState {
        self.knowledge
    }

    pub fn planning_cost(&self, e: EdgeId) -> Result<f64, InstanceError> {
        if e.index() >= self.inst.num_edges() {
            return Err(InstanceError::UnknownEdge(e));
        }
        match self.inst.edge(e).ugv {
            UgvCost::Fixed(c) => Ok(c),
            UgvCost::Impeded(d) => Ok(self.knowledge.get(e).unwrap_or_else(|| d.expected())),
            UgvCost::Absent => Err(InstanceError::NotUgvEdge(e)),
        }
    }

    /// Optimistic cost: realized or fixed where known, distribution minimum
    /// otherwise. Used for earliest-arrival deadlines.
    pub fn optimistic_cost(&self, e: EdgeId) -> f64 {
        match self.inst.edge(e).ugv {
            UgvCost::Fixed(c) => c,
            UgvCost::Impeded(d) => self.knowledge.get(e).unwrap_or(d.bounds().0),
            UgvCost::Absent => INF,
        }
    }
}

impl EdgeCost for PlanningCostView<'_> {
    fn cost(&self, e: EdgeId) -> f64 {
        self.planning_cost(e).unwrap_or(INF)
    }
}

/// Ground costs with every impeded edge at its true cost.
#[derive(Debug, Clone, Copy)]
pub struct RealizedCosts<'a> {
    pub inst: &'a ProblemInstance,
    pub realization: &'a Realization,
}

impl EdgeCost for RealizedCosts<'_> {
    fn cost(&self, e: EdgeId) -> f64 {
        self.realization.ground_cost(self.inst, e)
    }
}

/// Wraps a cost function and prices a set of suppressed edges at [`INF`].
/// The mask is owned by the caller so it can be cleared in
/// O(#suppressed).
pub struct SuppressedCosts<'a, C> {
    base: &'a C,
    mask: &'a [bool],
}

impl<'a, C: EdgeCost> SuppressedCosts<'a, C> {
    pub fn new(base: &'a C, mask: &'a [bool]) -> Self {
        SuppressedCosts { base, mask }
    }
}

impl<C: EdgeCost> EdgeCost for SuppressedCosts<'_, C> {
    fn cost(&self, e: EdgeId) -> f64 {
        if self.mask[e.index()] {
            INF
        } else {
            self.base.cost(e)
        }
    }
}

/// A simple ground path with its cost under some [`EdgeCost`].
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub cost: f64,
}

impl Path {
    pub fn single(v: VertexId) -> Self {
        Path {
            vertices: vec![v],
            edges: Vec::new(),
            cost: 0.0,
        }
    }

    /// Builds a path from a vertex sequence, looking edges up in `inst` and
    /// summing costs in path order. `None` if two consecutive vertices are not
    /// ground-adjacent.
    pub fn from_vertices(inst: &ProblemInstance, costs: &impl EdgeCost, vertices: Vec<VertexId>) -> Option<Self> {
        let mut edges = Vec::with_capacity(vertices.len().saturating_sub(1));
        let mut cost = 0.0;
        for w in vertices.windows(2) {
            let e = inst.ugv_edge_between(w[0], w[1])?;
            cost += costs.cost(e);
            edges.push(e);
        }
        Some(Path { vertices, edges, cost })
    }

    pub fn start(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn end(&self) -> VertexId {
        *self.vertices.last().expect("non-empty path")
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = std::collections::HashSet::with_capacity(self.vertices.len());
        self.vertices.iter().all(|v| seen.insert(*v))
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.contains(&e)
    }

    /// Re-prices the path under another cost function.
    pub fn cost_under(&self, costs: &impl EdgeCost) -> f64 {
        self.edges.iter().map(|e| costs.cost(*e)).sum()
    }
}
